"""Graded space and module map tests."""

import numpy as np
import pytest

from gcstar.fingroupoid import FIXTURE_NAMES, fixture
from gcstar.hilbmod import (GradedSpace, ModuleMap, check_gamma,
                            check_module_map, creation, dump_module_map,
                            gamma_compose, gamma_fibre, identity_map,
                            induced_unitary, is_isometry, is_unitary, l2,
                            l2_family, module_from_dims, regroup, tensor,
                            tensor_map)
from gcstar.measures import (Correspondence, arrow_correspondence,
                             family_correspondence, groupoid_families,
                             haar_system)


def two_point_space():
    return GradedSpace(("a", "b"), {"a": "x", "b": "x"},
                       {"a": "y", "b": "y"}, {"a": 1.0, "b": 4.0})


def test_weighted_inner_products():
    e = two_point_space()
    v = np.array([1.0, 1.0], dtype=complex)
    w = np.array([0.0, 1.0], dtype=complex)
    assert e.scalar_inner(v, w) == 4.0
    assert e.norm(v) == pytest.approx(np.sqrt(5.0))
    assert e.inner(v, w) == {"y": 4.0 + 0.0j}


def test_module_from_dims_layout():
    m = module_from_dims(("x", "y"), ("w",), {("x", "w"): 2, ("y", "w"): 1})
    assert m.basis == (("x", "w", 0), ("x", "w", 1), ("y", "w", 0))
    assert m.left[("y", "w", 0)] == "y"
    assert m.weight[("x", "w", 1)] == 1.0
    assert m.left_fiber("x") == (("x", "w", 0), ("x", "w", 1))


def test_adjoint_weighted_oracle():
    # single basis vector on each side, weights 2 and 3; the adjoint of
    # [[2+i]] against those inner products is [[(2-i) * 3/2]]
    s = GradedSpace(("s",), {"s": "x"}, {"s": "y"}, {"s": 2.0})
    t = GradedSpace(("t",), {"t": "x"}, {"t": "y"}, {"t": 3.0})
    m = ModuleMap(s, t, [[2.0 + 1.0j]])
    assert m.adjoint().matrix[0, 0] == 3.0 - 1.5j
    # and the defining identity <T v, w>_t == <v, T* w>_s
    lhs = t.scalar_inner(m(np.array([1.0])), np.array([1.0]))
    rhs = s.scalar_inner(np.array([1.0]), m.adjoint()(np.array([1.0])))
    assert lhs == rhs


def test_compose_interface_mismatch():
    e = two_point_space()
    f = module_from_dims(("x",), ("w",), {("x", "w"): 2})
    with pytest.raises(ValueError):
        identity_map(e).compose(identity_map(f))


def test_tensor_balanced_pairs():
    e = module_from_dims(("x",), ("u", "v"),
                         {("x", "u"): 1, ("x", "v"): 1})
    f = module_from_dims(("u", "v"), ("z",),
                         {("u", "z"): 2, ("v", "z"): 1})
    t = tensor(e, f)
    # only middle grades that agree pair up: 1*2 + 1*1
    assert t.dim == 3
    for (a, b) in t.basis:
        assert e.right[a] == f.left[b]
        assert t.left[(a, b)] == "x"
        assert t.right[(a, b)] == "z"


def test_tensor_map_grade_guard():
    src = module_from_dims(("x",), ("u", "v"),
                           {("x", "u"): 1, ("x", "v"): 1})
    f = module_from_dims(("u", "v"), ("z",),
                         {("u", "z"): 1, ("v", "z"): 1})
    swap = ModuleMap(src, src, [[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        tensor_map(swap, f)


def test_regroup_unitary():
    gpd, w = fixture("P2")
    alpha, alpha_r = haar_system(gpd, w)
    e = l2_family(alpha)
    f = l2_family(alpha_r)
    g = l2_family(alpha)
    m = regroup(e, f, g)
    out = is_unitary(m, tol=0.0)
    assert out.ok, str(out)


def test_gamma_compose_weight_bitwise():
    gpd, w = fixture("W2")
    fam = groupoid_families(gpd, w)
    m = gamma_compose(fam.lam0, fam.alpha_r)
    for (x, y) in m.source.basis:
        assert m.source.weight[(x, y)] == m.target.weight[x]


def test_check_gamma_all_fixtures_exact():
    for name in FIXTURE_NAMES:
        gpd, w = fixture(name)
        rep = check_gamma(gpd, w)
        assert rep.ok, str(rep)
        assert rep.max_defect() == 0.0


def test_gamma_fibre_unitary_mixed_legs():
    gpd, w = fixture("W2")
    cr = arrow_correspondence(gpd, w, "r")
    cs = arrow_correspondence(gpd, w, "s")
    out = is_unitary(gamma_fibre(cr, cs), tol=0.0)
    assert out.ok, str(out)


def test_induced_unitary_from_ratio():
    gpd, w = fixture("W2")
    alpha, _ = haar_system(gpd, w)
    c1 = family_correspondence(alpha)
    c2 = Correspondence(c1.left_space, c1.right_space, c1.points,
                        c1.bmap, c1.fmap,
                        {p: 4.0 * c1.weight[p] for p in c1.points})
    phi = {p: p for p in c1.points}
    # ratio 1/4 has an exact square root, so the check is exact
    m = induced_unitary(c1, c2, phi, {x: 0.25 for x in gpd.objects})
    out = is_unitary(m, tol=0.0)
    assert out.ok, str(out)


def test_creation_norm_oracle():
    e = module_from_dims(("x",), ("y",), {("x", "y"): 2})
    f = module_from_dims(("y",), ("z",), {("y", "z"): 3})
    xi = np.array([1.0, 2.0j])
    m = creation(e, xi, f)
    assert check_module_map(m).ok
    # every pair is balanced here, so the column Gram is |xi|^2 I
    gram = m.adjoint().compose(m).matrix
    assert np.array_equal(gram, 5.0 * np.eye(3))


def test_is_unitary_flags_shear():
    f = module_from_dims(("y",), ("z",), {("y", "z"): 2})
    shear = ModuleMap(f, f, [[1.0, 1.0], [0.0, 1.0]])
    out = is_unitary(shear)
    assert not out.ok
    assert out.max_defect() >= 1.0


def test_isometry_non_surjective():
    f = module_from_dims(("y",), ("z",), {("y", "z"): 1})
    g = module_from_dims(("y",), ("z",), {("y", "z"): 2})
    m = ModuleMap(f, g, [[1.0], [0.0]])
    assert is_isometry(m, tol=0.0).ok
    assert not is_unitary(m, tol=0.0).ok


def test_dump_module_map_roundtrip(tmp_path):
    gpd, w = fixture("Z2")
    fam = groupoid_families(gpd, w)
    m = gamma_compose(fam.lam0, fam.alpha_r)
    bin_path, json_path = dump_module_map(m, str(tmp_path / "gamma"))
    raw = np.frombuffer(open(bin_path, "rb").read(), dtype="<c16")
    assert np.array_equal(raw.reshape(m.matrix.shape), m.matrix)
    import json
    side = json.load(open(json_path))
    assert side["shape"] == list(m.matrix.shape)
    assert side["dtype"] == "complex128"
    assert len(side["source_basis"]) == m.source.dim


def test_l2_grades_follow_correspondence():
    gpd, w = fixture("W2")
    cs = arrow_correspondence(gpd, w, "s")
    sp = l2(cs)
    assert sp.left[(1, 2)] == 1
    assert sp.right[(1, 2)] == 2
    assert sp.weight[(2, 1)] == 4.0
