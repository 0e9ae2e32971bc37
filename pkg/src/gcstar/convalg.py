"""Convolution algebra of a weighted groupoid and its operator norm.

Functions on the arrows are dicts arrow -> complex.  Convolution
integrates over the range fiber with the invariant weights, the
involution composes conjugation with inversion, and the regular
matrix is the action of a function on the arrow space by left
convolution.  The operator norm is computed on the similarity
transformed matrix with a hand rolled Hermitian Jacobi iteration so
the whole pipeline stays inspectable.
"""

from __future__ import annotations

import math

import numpy as np

from .report import Report
from .hilbmod import GradedSpace, ModuleMap


def zero_function(gpd):
    return {g: 0.0 + 0.0j for g in gpd.arrows}


def delta_function(gpd, g):
    f = zero_function(gpd)
    f[g] = 1.0 + 0.0j
    return f


def convolve(gpd, weights, f1, f2):
    """(f1 * f2)(k) sums f1(h) f2(inverse(h) k) c(src(h)) over range fibers."""
    out = zero_function(gpd)
    for k in gpd.arrows:
        acc = 0.0 + 0.0j
        for h in gpd.arrows_into(gpd.rng[k]):
            acc += f1[h] * f2[gpd.comp[(gpd.inv[h], k)]] * weights[gpd.src[h]]
        out[k] = acc
    return out


def star(gpd, f):
    return {g: np.conj(f[gpd.inv[g]]) for g in gpd.arrows}


def identity_element(gpd, weights):
    """Unit of the algebra: units weighted by the reciprocal object weight."""
    f = zero_function(gpd)
    for x in gpd.objects:
        f[gpd.unit[x]] = 1.0 / weights[x]
    return f


def delta_product(gpd, weights, g, h):
    """Structure constant form of delta_g * delta_h."""
    out = zero_function(gpd)
    if gpd.src[g] == gpd.rng[h]:
        out[gpd.comp[(g, h)]] = weights[gpd.src[g]]
    return out


def fiber_sups(gpd, weights, f):
    """Sups of the fibrewise absolute integrals along range and source."""
    along_r = {x: 0.0 for x in gpd.objects}
    along_s = {x: 0.0 for x in gpd.objects}
    for g in gpd.arrows:
        along_r[gpd.rng[g]] += abs(f[g]) * weights[gpd.src[g]]
        along_s[gpd.src[g]] += abs(f[g]) * weights[gpd.rng[g]]
    sup_r = max(along_r.values(), default=0.0)
    sup_s = max(along_s.values(), default=0.0)
    return sup_r, sup_s


def i_norm(gpd, weights, f):
    """Larger of the two fibrewise absolute integrals of f."""
    return max(fiber_sups(gpd, weights, f))


def regular_module(gpd, weights):
    """Arrow space graded by range and source, weight c(rng(h))."""
    return GradedSpace(
        gpd.arrows, dict(gpd.rng), dict(gpd.src),
        {h: weights[gpd.rng[h]] for h in gpd.arrows},
        left_space=gpd.objects, right_space=gpd.objects)


def regular_matrix(gpd, weights, f):
    """Left convolution by f on the arrow space, as a ModuleMap.

    Entry [h, h2] is f(h h2^{-1}) c(rng(h2)) when src(h2) == src(h) and
    the quotient is composable, zero otherwise; source fibers are
    preserved, so this is a module map for the right grading.
    """
    space = regular_module(gpd, weights)
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for h in gpd.arrows:
        for g in gpd.arrows_into(gpd.rng[h]):
            h2 = gpd.comp[(gpd.inv[g], h)]
            mat[space.index[h], space.index[h2]] += \
                f[g] * weights[gpd.src[g]]
    return ModuleMap(space, space, mat)


# ---------------------------------------------------------------------------
# eigenvalues and norms

def jacobi_eigenvalues(matrix, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi.

    Sweeps Givens rotations with the phase of the pivot entry folded in
    until the off diagonal Frobenius mass falls below tol relative to
    the matrix scale.  Raises ArithmeticError with the residual if the
    sweep budget runs out.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    herm = float(np.max(np.abs(a - a.conj().T)))
    if herm > 1e-9 * max(1.0, float(np.max(np.abs(a)))):
        raise ValueError(f"matrix is not Hermitian, defect {herm:.3e}")
    a = (a + a.conj().T) / 2.0
    scale = max(1.0, float(np.linalg.norm(a)))

    def offmass():
        d = a - np.diag(np.diag(a))
        return float(np.linalg.norm(d))

    for _ in range(max_sweeps):
        if offmass() <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(
                    2.0 * r, (a[q, q] - a[p, p]).real)
                cth, sth = math.cos(theta), math.sin(theta)
                colp = cth * a[:, p] - sth * np.conj(phase) * a[:, q]
                colq = sth * phase * a[:, p] + cth * a[:, q]
                a[:, p], a[:, q] = colp, colq
                rowp = cth * a[p, :] - sth * phase * a[q, :]
                rowq = sth * np.conj(phase) * a[p, :] + cth * a[q, :]
                a[p, :], a[q, :] = rowp, rowq
    if offmass() > tol * scale:
        raise ArithmeticError(
            f"jacobi did not converge in {max_sweeps} sweeps; "
            f"off-diagonal residual {offmass():.3e}")
    return np.sort(np.diag(a).real)


def operator_norm(m):
    """Operator norm of a ModuleMap between weighted spaces.

    Conjugates by the square roots of the Gram diagonals so the norm is
    the plain spectral norm of the rescaled matrix.
    """
    if m.source.dim == 0 or m.target.dim == 0:
        return 0.0
    ds = np.sqrt(m.source.gram_diagonal())
    dt = np.sqrt(m.target.gram_diagonal())
    hat = (dt[:, None] * m.matrix) / ds[None, :]
    eigs = jacobi_eigenvalues(hat.conj().T @ hat)
    return float(np.sqrt(max(float(eigs[-1]), 0.0)))


def cstar_norm(gpd, weights, f):
    """Operator norm of left convolution by f."""
    return operator_norm(regular_matrix(gpd, weights, f))


# ---------------------------------------------------------------------------
# checks

def check_convolution(gpd, weights, funcs, tol=1e-10):
    """Algebra laws and norm inequalities over a batch of functions."""
    rep = Report("convolution algebra")
    funcs = list(funcs)

    ident = identity_element(gpd, weights)
    worst = 0.0
    for f in funcs:
        left = convolve(gpd, weights, ident, f)
        right = convolve(gpd, weights, f, ident)
        for g in gpd.arrows:
            worst = max(worst, abs(left[g] - f[g]), abs(right[g] - f[g]))
    rep.add("identity-neutral", worst <= tol, defect=worst)

    worst = 0.0
    for i in range(len(funcs) - 2):
        f1, f2, f3 = funcs[i], funcs[i + 1], funcs[i + 2]
        left = convolve(gpd, weights, convolve(gpd, weights, f1, f2), f3)
        right = convolve(gpd, weights, f1, convolve(gpd, weights, f2, f3))
        worst = max(worst, max(abs(left[g] - right[g]) for g in gpd.arrows))
    rep.add("associativity", worst <= tol, defect=worst)

    worst = 0.0
    for i in range(len(funcs) - 1):
        f1, f2 = funcs[i], funcs[i + 1]
        left = star(gpd, convolve(gpd, weights, f1, f2))
        right = convolve(gpd, weights, star(gpd, f2), star(gpd, f1))
        worst = max(worst, max(abs(left[g] - right[g]) for g in gpd.arrows))
    rep.add("star-antimultiplicative", worst <= tol, defect=worst)

    worst = 0.0
    for i in range(len(funcs) - 1):
        f1, f2 = funcs[i], funcs[i + 1]
        prod = regular_matrix(gpd, weights, convolve(gpd, weights, f1, f2))
        two = regular_matrix(gpd, weights, f1).compose(
            regular_matrix(gpd, weights, f2))
        worst = max(worst, float(np.max(np.abs(prod.matrix - two.matrix))))
    rep.add("regular-multiplicative", worst <= tol, defect=worst)

    worst = 0.0
    for f in funcs:
        adj = regular_matrix(gpd, weights, f).adjoint()
        direct = regular_matrix(gpd, weights, star(gpd, f))
        worst = max(worst, float(np.max(np.abs(adj.matrix - direct.matrix))))
    rep.add("regular-star", worst <= tol, defect=worst)

    worst = 0.0
    for f in funcs:
        n1 = cstar_norm(gpd, weights,
                        convolve(gpd, weights, star(gpd, f), f))
        n2 = cstar_norm(gpd, weights, f)
        scale = max(n2 * n2, 1.0)
        worst = max(worst, abs(n1 - n2 * n2) / scale)
    rep.add("cstar-identity", worst <= max(tol, 1e-9), defect=worst)

    worst = 0.0
    for f in funcs:
        gap = cstar_norm(gpd, weights, f) - i_norm(gpd, weights, f)
        worst = max(worst, gap)
    rep.add("norm-bound", worst <= 1e-9, defect=max(worst, 0.0))
    return rep
