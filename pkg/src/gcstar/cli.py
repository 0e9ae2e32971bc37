"""Batch verification front end.

Every subcommand loads or builds a weighted groupoid, runs one slice
of the check library, and emits an aligned text table or a versioned
JSON document.  Exit status 0 means every check passed, 1 means some
check failed, 2 means the input could not be parsed or validated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .report import Report, VerificationError
from .fingroupoid import (FIXTURE_NAMES, arrow_weights, counting_weights,
                          fixture, groupoid_from_dict,
                          pair_groupoid, space_groupoid,
                          cyclic_group_groupoid, transformation_groupoid,
                          validate_groupoid, validate_haar)
from .measures import check_family_identities, check_iterated_integrals
from .hilbmod import check_gamma, dump_module_map, module_from_dims
from .convalg import (check_convolution, convolve, cstar_norm,
                      delta_function, i_norm)
from .sampling import (SplitMix64, mutate_groupoid, random_cocycle,
                       random_function, random_groupoid)
from .reps import (check_representation, from_cocycle, invariant_support,
                   regular_representation)
from .intdis import (check_conv_rep, check_integration, check_pair_exchange,
                     conv_rep_of, disintegrate, integrate_rep,
                     roundtrip_rep)
from .crossed import (bisection_from_arrows, etale_battery,
                      semigroup_from_bisections, transformation_theorem)

SCHEMA_VERSION = 1

EPILOG = """\
presets: Z2 P2 X2 T2 W2 (built-in fixtures), group:n, pair:n, space:n,
transformation:n (cyclic shift on n points), random (uses --seed).
Randomness comes from a splitmix-style 64-bit generator seeded by
--seed; Haar random unitaries are QR factors of complex Gaussian
matrices with the R diagonal made positive.
"""


def load_fixture(name):
    """Named bundle of (groupoid, object weights)."""
    return fixture(name)


def emit_report(report, fmt="text"):
    """Render one report as bytes; json round-trips, text is aligned."""
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=1, sort_keys=True)
                + "\n").encode()
    lines = [report.title] if report.title else []
    width = max((len(c.name) for c in report.checks), default=0)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"  {status}  {c.name.ljust(width)}  defect={c.defect:.3e}"
        if c.witness is not None:
            line += f"  witness={c.witness!r}"
        lines.append(line)
    return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------------------
# input loading

def parse_preset(text, seed=0):
    """NAME or NAME:params; returns (groupoid, object weights)."""
    name, _, rest = text.partition(":")
    params = rest.split(":") if rest else []
    if name in FIXTURE_NAMES:
        if params:
            raise ValueError(f"fixture {name} takes no parameters")
        return fixture(name)
    if name == "group":
        return _with_counting(cyclic_group_groupoid(int(params[0])))
    if name == "pair":
        n = int(params[0])
        return _with_counting(pair_groupoid(tuple(range(1, n + 1))))
    if name == "space":
        n = int(params[0])
        return _with_counting(space_groupoid(tuple(range(1, n + 1))))
    if name == "transformation":
        n = int(params[0])
        shift = {x: x % n + 1 for x in range(1, n + 1)}
        return _with_counting(transformation_groupoid(n, shift))
    if name == "random":
        rng = SplitMix64(seed)
        return random_groupoid(rng)
    raise ValueError(f"unknown preset {text!r}")


def _with_counting(gpd):
    return gpd, counting_weights(gpd)


def load_groupoid(args):
    """The groupoid named by --groupoid, --preset, or a positional file."""
    path = getattr(args, "file", None) or args.groupoid
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        return groupoid_from_dict(data)
    if args.preset is not None:
        return parse_preset(args.preset, seed=args.seed)
    raise ValueError("no groupoid given; use --groupoid FILE or --preset NAME")


def require_valid(gpd, weights):
    """Structure axioms as a precondition; failures are input errors."""
    rep = validate_groupoid(gpd)
    if rep.ok:
        rep.extend(validate_haar(gpd, arrow_weights(gpd, weights)))
    if not rep.ok:
        raise VerificationError(
            "; ".join(c.line() for c in rep.failures()))


def _matrix_from_json(rows):
    def num(v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)
    return np.array([[num(v) for v in row] for row in rows], dtype=complex)


def load_bundle(path):
    """Representation bundle: groupoid, fiber dims, blockwise unitaries."""
    with open(path) as fh:
        data = json.load(fh)
    gpd, weights = groupoid_from_dict(data["groupoid"])
    require_valid(gpd, weights)
    dims = {(x, "w"): int(data["dims"][str(x)]) for x in gpd.objects}
    module = module_from_dims(gpd.objects, ("w",), dims)
    unitaries = {g: _matrix_from_json(data["U"][str(g)])
                 for g in gpd.arrows}
    return from_cocycle(gpd, weights, module, unitaries)


def load_semigroup(path, gpd):
    """Generator file of partial object maps, lifted to bisections.

    Each generator needs exactly one arrow realizing every point of
    its graph, so the lift to arrows is unambiguous.
    """
    with open(path) as fh:
        data = json.load(fh)
    label = {str(x): x for x in gpd.objects}
    gens = []
    for i, gen in enumerate(data["generators"]):
        mapping = {label[str(x)]: label[str(y)]
                   for x, y in gen["map"].items()}
        dom = [label[str(x)] for x in gen.get("dom", mapping.keys())]
        if set(dom) != set(mapping.keys()):
            raise ValueError(f"generator {i}: dom and map keys disagree")
        tag = []
        for x, y in mapping.items():
            hits = [g for g in gpd.arrows
                    if gpd.src[g] == x and gpd.rng[g] == y]
            if len(hits) != 1:
                raise ValueError(
                    f"generator {i}: {len(hits)} arrows from {x!r} to "
                    f"{y!r}, need exactly one")
            tag.append(hits[0])
        gens.append(bisection_from_arrows(gpd, frozenset(tag)))
    return semigroup_from_bisections(gpd, gens)


def _random_rep(gpd, weights, rng, coeff_size=1, max_dim=3):
    module, blocks = random_cocycle(rng, gpd, weights,
                                    coeff_size=coeff_size, max_dim=max_dim)
    return from_cocycle(gpd, weights, module, blocks)


def _random_pair_function(rng, gpd):
    return {p: rng.cgauss() for p in gpd.composable_pairs()}


def _delta_batch(gpd):
    return [delta_function(gpd, g) for g in sorted(gpd.arrows, key=str)]


# ---------------------------------------------------------------------------
# subcommand bodies; each returns (reports, payload)

def cmd_validate(args):
    gpd, weights = load_groupoid(args)
    rep = Report("groupoid axioms")
    rep.extend(validate_groupoid(gpd))
    if rep.ok:
        rep.extend(validate_haar(gpd, arrow_weights(gpd, weights)),
                   prefix="haar-")
    return [rep], None


def cmd_families(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    rng = SplitMix64(args.seed)
    reports = [check_family_identities(gpd, weights)]
    funcs = [_random_pair_function(rng, gpd) for _ in range(args.trials)]
    reports.append(check_iterated_integrals(gpd, weights, funcs))
    reports.append(check_gamma(gpd, weights, max(args.tolerance, 1e-12)))
    return reports, None


def cmd_algebra(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    rng = SplitMix64(args.seed)
    funcs = _delta_batch(gpd)
    funcs += [random_function(rng, gpd) for _ in range(args.trials)]
    reports = [check_convolution(gpd, weights, funcs,
                                 max(args.tolerance, 1e-10))]

    product = []
    inorm = {}
    cstarnorm = {}
    for g in sorted(gpd.arrows, key=str):
        dg = delta_function(gpd, g)
        inorm[str(g)] = i_norm(gpd, weights, dg)
        cstarnorm[str(g)] = cstar_norm(gpd, weights, dg)
        for h in sorted(gpd.arrows, key=str):
            prod = convolve(gpd, weights, dg, delta_function(gpd, h))
            entries = {str(k): v.real for k, v in sorted(
                prod.items(), key=lambda kv: str(kv[0])) if v != 0}
            product.append([str(g), str(h), entries])
    payload = {"product": product, "inorm": inorm, "cstarnorm": cstarnorm}
    return reports, payload


def cmd_rep(args):
    if args.bundle is not None:
        rep = load_bundle(args.bundle)
    else:
        gpd, weights = load_groupoid(args)
        require_valid(gpd, weights)
        rng = SplitMix64(args.seed)
        rep = _random_rep(gpd, weights, rng)
    reports = [check_representation(rep, max(args.tolerance, 1e-10))]
    _, support_rep = invariant_support(rep)
    reports.append(support_rep)
    reg = regular_representation(rep.groupoid, rep.weights)
    regular = Report("regular representation")
    regular.extend(check_representation(reg, max(args.tolerance, 1e-10)))
    reports.append(regular)
    if args.dump:
        os.makedirs(args.dump, exist_ok=True)
        dump_module_map(rep.umap, os.path.join(args.dump, "rep-unitary"))
        dump_module_map(reg.umap, os.path.join(args.dump, "regular-unitary"))
    return reports, None


def cmd_integrate(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    rng = SplitMix64(args.seed)
    rep = _random_rep(gpd, weights, rng)
    funcs = _delta_batch(gpd)
    funcs += [random_function(rng, gpd) for _ in range(args.trials)]
    reports = [check_integration(rep, funcs, max(args.tolerance, 1e-10))]
    pair_funcs = [_random_pair_function(rng, gpd)
                  for _ in range(max(2, min(args.trials, 8)))]
    reports.append(check_pair_exchange(gpd, weights, pair_funcs))
    if args.dump:
        os.makedirs(args.dump, exist_ok=True)
        for g in sorted(gpd.arrows, key=str):
            f = delta_function(gpd, g)
            dump_module_map(integrate_rep(rep, f),
                            os.path.join(args.dump, f"integrated-{g}"))
    return reports, None


def cmd_disintegrate(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    rng = SplitMix64(args.seed)
    rep = _random_rep(gpd, weights, rng, coeff_size=2)
    conv = conv_rep_of(rep)
    funcs = _delta_batch(gpd)
    funcs += [random_function(rng, gpd) for _ in range(3)]
    reports = [check_conv_rep(conv, funcs, max(args.tolerance, 1e-10))]
    try:
        rep2, inner = disintegrate(conv, args.tolerance)
    except VerificationError as exc:
        failed = Report("disintegration")
        failed.add("disintegrate", False, witness=str(exc))
        reports.append(failed)
        return reports, None
    reports.append(inner)
    if args.dump:
        os.makedirs(args.dump, exist_ok=True)
        dump_module_map(rep2.frame, os.path.join(args.dump, "frame"))
        dump_module_map(rep2.umap, os.path.join(args.dump, "unitary"))
    return reports, None


def cmd_roundtrip(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    rng = SplitMix64(args.seed)
    reports = []
    for t in range(max(args.trials, 1)):
        rep = _random_rep(gpd, weights, rng, coeff_size=1 + t % 2)
        out = Report(f"roundtrip {t}")
        try:
            out.extend(roundtrip_rep(rep, args.tolerance))
        except VerificationError as exc:
            out.add("disintegrate", False, witness=str(exc))
        reports.append(out)
    return reports, None


def cmd_etale(args):
    gpd, weights = load_groupoid(args)
    require_valid(gpd, weights)
    bad = next((x for x, v in weights.items() if float(v) != 1.0), None)
    if bad is not None:
        raise ValueError(
            f"etale verification needs counting weights; object {bad!r} "
            f"has weight {weights[bad]!r}")
    sgrp = None
    if args.semigroup is not None:
        sgrp = load_semigroup(args.semigroup, gpd)
    rng = SplitMix64(args.seed)
    rep = _random_rep(gpd, weights, rng)
    reports = [etale_battery(gpd, weights, sgrp=sgrp, rep=rep,
                             tol=max(args.tolerance, 1e-10))]
    return reports, None


def cmd_trafo(args):
    if args.group is None or args.action is None:
        raise ValueError("trafo needs --group FILE and --action FILE")
    with open(args.group) as fh:
        order = int(json.load(fh)["order"])
    with open(args.action) as fh:
        raw = json.load(fh)["map"]
    action = {}
    for x, y in raw.items():
        try:
            action[int(x)] = int(y)
        except (TypeError, ValueError):
            action[x] = y
    gpd = transformation_groupoid(order, action)
    weights = counting_weights(gpd)
    rng = SplitMix64(args.seed)
    rep = _random_rep(gpd, weights, rng)
    reports = [transformation_theorem(order, action, rep=rep,
                                      tol=max(args.tolerance, 1e-10))]
    return reports, None


def cmd_suite(args):
    rng = SplitMix64(args.seed)
    tol = max(args.tolerance, 1e-10)
    reports = []

    for name in FIXTURE_NAMES:
        gpd, weights = fixture(name)
        out = Report(f"fixture {name}")
        out.extend(validate_groupoid(gpd), prefix="axioms-")
        out.extend(validate_haar(gpd, arrow_weights(gpd, weights)),
                   prefix="haar-")
        out.extend(check_family_identities(gpd, weights), prefix="families-")
        pair_funcs = [_random_pair_function(rng, gpd) for _ in range(3)]
        out.extend(check_iterated_integrals(gpd, weights, pair_funcs),
                   prefix="families-")
        out.extend(check_gamma(gpd, weights), prefix="gamma-")
        funcs = _delta_batch(gpd)
        funcs += [random_function(rng, gpd) for _ in range(3)]
        out.extend(check_convolution(gpd, weights, funcs, tol),
                   prefix="algebra-")
        reg = regular_representation(gpd, weights)
        out.extend(check_representation(reg, tol), prefix="regular-")
        rep = _random_rep(gpd, weights, rng)
        out.extend(check_integration(rep, funcs, tol), prefix="integration-")
        out.extend(check_pair_exchange(gpd, weights, pair_funcs),
                   prefix="pairs-")
        try:
            out.extend(roundtrip_rep(rep, args.tolerance),
                       prefix="roundtrip-")
        except VerificationError as exc:
            out.add("roundtrip-disintegrate", False, witness=str(exc))
        reports.append(out)

    for name in ("Z2", "P2", "X2"):
        gpd, weights = fixture(name)
        out = Report(f"etale {name}")
        rep = _random_rep(gpd, weights, rng)
        out.extend(etale_battery(gpd, weights, rep=rep, tol=tol))
        reports.append(out)

    swap = {1: 2, 2: 1}
    tg = transformation_groupoid(2, swap)
    trep = _random_rep(tg, counting_weights(tg), rng)
    out = Report("transformation swap")
    out.extend(transformation_theorem(2, swap, rep=trep, tol=tol))
    reports.append(out)

    randoms = Report("random instances")
    for t in range(args.trials):
        gpd, weights = random_groupoid(rng)
        ok = validate_groupoid(gpd).ok \
            and validate_haar(gpd, arrow_weights(gpd, weights)).ok
        randoms.add(f"random-{t}-axioms", ok)
        fam = check_family_identities(gpd, weights)
        randoms.add(f"random-{t}-families", fam.ok,
                    defect=fam.max_defect())
        reg = check_representation(regular_representation(gpd, weights), tol)
        randoms.add(f"random-{t}-regular", reg.ok, defect=reg.max_defect())
        mgpd, mweights, kind = mutate_groupoid(rng, gpd, weights)
        caught = not (validate_groupoid(mgpd).ok
                      and validate_haar(mgpd, mweights).ok)
        randoms.add(f"random-{t}-mutation-detected", caught, witness=kind)
    reports.append(randoms)
    return reports, None


# ---------------------------------------------------------------------------
# driver

HANDLERS = {
    "validate": cmd_validate,
    "families": cmd_families,
    "algebra": cmd_algebra,
    "rep": cmd_rep,
    "integrate": cmd_integrate,
    "disintegrate": cmd_disintegrate,
    "roundtrip": cmd_roundtrip,
    "etale": cmd_etale,
    "trafo": cmd_trafo,
    "suite": cmd_suite,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gcstar",
        description="verification battery for finite groupoid "
                    "convolution algebras",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("file", nargs="?", default=None,
                       help="groupoid JSON file (same as --groupoid)")
        p.add_argument("--groupoid", default=None, metavar="FILE")
        p.add_argument("--preset", default=None, metavar="NAME[:params]")
        p.add_argument("--tolerance", type=float, default=1e-9, metavar="X")
        p.add_argument("--seed", type=int, default=0, metavar="N")
        p.add_argument("--trials", type=int, default=20, metavar="K")
        p.add_argument("--json", action="store_true")
        p.add_argument("--dump", default=None, metavar="DIR")
        if name == "rep":
            p.add_argument("--bundle", default=None, metavar="FILE")
        if name == "etale":
            p.add_argument("--semigroup", default=None, metavar="FILE")
        if name == "trafo":
            p.add_argument("--group", default=None, metavar="FILE")
            p.add_argument("--action", default=None, metavar="FILE")
    return parser


def _params_dict(args):
    keys = ("file", "groupoid", "preset", "tolerance", "seed", "trials",
            "dump", "bundle", "semigroup", "group", "action")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tolerance <= 0:
        parser.error("tolerance must be positive")
    if args.trials < 1:
        parser.error("trials must be at least 1")

    started = time.perf_counter()
    try:
        reports, payload = HANDLERS[args.command](args)
    except (VerificationError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = all(r.ok for r in reports)

    if args.json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "params": _params_dict(args),
            "reports": [r.to_dict() for r in reports],
            "ok": ok,
        }
        if payload:
            doc.update(payload)
        doc["timings"] = {"total": time.perf_counter() - started}
        print(json.dumps(doc, indent=1, sort_keys=True))
    else:
        for r in reports:
            sys.stdout.write(emit_report(r, "text").decode())
        if args.command == "algebra" and payload:
            sys.stdout.write(_algebra_tables(payload))
        print("OK" if ok else "FAILED")

    if args.command == "validate" and not ok:
        return 2
    return 0 if ok else 1


def _algebra_tables(payload):
    lines = ["structure constants"]
    width = max((len(g) for g, _, _ in payload["product"]), default=1)
    for g, h, entries in payload["product"]:
        if not entries:
            continue
        terms = " + ".join(f"{v:g}*d[{k}]" for k, v in entries.items())
        lines.append(f"  d[{g.ljust(width)}] * d[{h.ljust(width)}] = {terms}")
    lines.append("norms")
    for g in payload["inorm"]:
        lines.append(f"  d[{g.ljust(width)}]  inorm={payload['inorm'][g]:g}"
                     f"  cstar={payload['cstarnorm'][g]:g}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    sys.exit(main())
