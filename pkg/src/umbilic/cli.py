"""Command line entry point: ``umbilic {detA,ellipsoid,perturb,winding,verify}``.

Exit codes: 0 success or certified, 1 rejected or failed check, 2 degenerate
input or reality violation, 3 parse error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from .algebra import Poly, PolyParseError, Var
from .experiments import (
    PINNED_N,
    DegenerateError,
    EllipsoidFamily,
    PerturbationSpec,
    certify_stable_umbilic,
    check_condition_ii,
    ellipsoid_slice_expansion,
    ellipsoid_winding_certificate,
    find_good_circle,
    great_circle_restriction,
    is_almost_circular,
    linear_eps_coefficient,
    numeric_circle_winding,
    pi_projection_scan,
    q0_operator,
    random_real_poly,
    rational_sphere_points,
    sigma_stokes_check,
    umbilic_grid_scan,
)
from .normal_form import derive_universal_constant, random_normal_form
from .operators import (
    SPHERE_SELECTOR,
    DefiningFunction,
    NotRealError,
    build_A,
    build_D,
    poly_det,
    reduce_mod,
    sphere_rho,
)
from .topology import (
    SampledLoop,
    UnresolvedWindingError,
    ZeroOnCurveError,
    count_roots_in_unit_disk,
    winding_number,
)

EXIT_OK, EXIT_FAIL, EXIT_DEGENERATE, EXIT_PARSE = 0, 1, 2, 3


@dataclass
class CommandConfig:
    subcommand: str
    inputs: List[str] = field(default_factory=list)
    n: int = 3
    eps_cap: Optional[int] = None
    eps: Optional[float] = None
    grid: Optional[int] = None
    output: Optional[str] = None
    seed: int = 0
    tol: float = 1e-9
    winding_samples: int = 1024


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _read_poly(path: str, eps_cap=None) -> Poly:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc}")
    try:
        return Poly.parse(text.strip(), eps_cap=eps_cap)
    except PolyParseError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}")


def _real(p: Poly) -> Poly:
    try:
        return DefiningFunction(p).rho
    except NotRealError as exc:
        raise CliError(EXIT_DEGENERATE, f"reality violation: {exc}")


def _parse_point(text: str) -> dict:
    """``z=1/2,w=1/2i`` -> exact point with conjugates filled in."""
    vals = {}
    try:
        for part in text.split(","):
            name, _, value = part.partition("=")
            v = Poly.parse(value.strip())
            if not v.is_constant():
                raise PolyParseError(f"{name}: not a constant")
            vals[Var[name.strip()]] = v.constant_value()
    except (PolyParseError, KeyError) as exc:
        raise CliError(EXIT_PARSE, f"bad point {text!r}: {exc}")
    for a, b in ((Var.z, Var.zb), (Var.w, Var.wb)):
        if a in vals and b not in vals:
            vals[b] = vals[a].conjugate()
    return vals


def _emit(text: str, cfg: CommandConfig):
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_detA(args, cfg: CommandConfig) -> int:
    rho = _real(_read_poly(args.rho, eps_cap=args.mod_eps))
    m = build_D(rho, args.n) if args.minor else build_A(rho, args.n)
    det = poly_det(m)
    if args.reduce == "sphere":
        det = reduce_mod(det, sphere_rho(), SPHERE_SELECTOR)
    if args.at:
        det = Poly.const(det.eval(_parse_point(args.at)))
    _emit(str(det), cfg)
    return EXIT_OK


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(EXIT_PARSE, f"not a rational number: {text!r}")


def cmd_ellipsoid(args, cfg: CommandConfig) -> int:
    A = None if args.A is None else _fraction(args.A)
    B = None if args.B is None else _fraction(args.B)
    try:
        fam = EllipsoidFamily(A, B, args.eps_order)
    except ValueError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc))
    if A is None or B is None:
        e0, e1, e2 = ellipsoid_slice_expansion(fam)
        out = {"eps0": str(e0), "eps1": str(e1), "eps2": str(e2), "N": PINNED_N}
        _emit(json.dumps(out, sort_keys=True, indent=2), cfg)
        return EXIT_OK
    rep = ellipsoid_winding_certificate(fam, samples=cfg.winding_samples)
    _emit(rep.to_json(), cfg)
    if rep.verdict == "degenerate":
        return EXIT_DEGENERATE
    return EXIT_OK if rep.verdict == "certified" else EXIT_FAIL


def cmd_perturb(args, cfg: CommandConfig) -> int:
    rp = _real(_read_poly(args.rhoprime))
    try:
        spec = PerturbationSpec(rp)
    except ValueError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc))
    if args.scan:
        try:
            eps, grid = float(args.scan[0]), int(args.scan[1])
        except ValueError:
            raise CliError(EXIT_PARSE, f"bad --scan arguments {args.scan!r}")
        text, summary = umbilic_grid_scan(spec, eps, grid)
        _emit(text, cfg)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return EXIT_OK
    if args.stokes is not None:
        res = sigma_stokes_check(spec, args.stokes, samples=cfg.winding_samples // 2)
        _emit(json.dumps(res, sort_keys=True, indent=2), cfg)
        return EXIT_OK if res["holds"] else EXIT_FAIL
    if args.pi_scan is not None:
        res = pi_projection_scan(q0_operator(rp), args.pi_scan)
        _emit(json.dumps(res, sort_keys=True, indent=2), cfg)
        return EXIT_OK
    if args.check == "ac":
        ok = is_almost_circular(spec)
        _emit(json.dumps(ok), cfg)
        return EXIT_OK if ok else EXIT_FAIL
    if args.check == "ii":
        res = check_condition_ii(spec)
        _emit(json.dumps(res, sort_keys=True), cfg)
        return EXIT_OK if res["passed"] else EXIT_FAIL
    if args.check == "circle":
        Q = q0_operator(rp)
        Z0 = find_good_circle(Q, seed=cfg.seed)
        res = {"found": Z0 is not None, "witness": None if Z0 is None else [str(Z0[0]), str(Z0[1])]}
        _emit(json.dumps(res, sort_keys=True), cfg)
        return EXIT_OK if Z0 is not None else EXIT_FAIL
    rep = certify_stable_umbilic(spec, seed=cfg.seed, samples=cfg.winding_samples)
    _emit(rep.to_json(), cfg)
    return EXIT_OK if rep.verdict == "certified" else EXIT_FAIL


def cmd_winding(args, cfg: CommandConfig) -> int:
    try:
        with open(args.loop) as fh:
            loop = SampledLoop.from_csv(fh.read())
    except (OSError, ValueError, IndexError) as exc:
        raise CliError(EXIT_PARSE, f"cannot read loop CSV: {exc}")
    try:
        w = winding_number(loop, zero_tol=cfg.tol)
    except ZeroOnCurveError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DEGENERATE
    except UnresolvedWindingError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    _emit(str(w), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites


def _suite_transform(cfg, log):
    rho = sphere_rho()
    a = poly_det(build_A(rho, 3))
    ok1 = poly_det(build_A(rho * 2, 3)) == a * (2**25)
    log("det A_3(2 rho) = 2^25 det A_3(rho) for the sphere", ok1)
    d = poly_det(build_D(rho, 3))
    ok2 = poly_det(build_D(rho * 2, 3)) == d * (2**18)
    log("det D_3(2 rho) = 2^18 det D_3(rho) for the sphere", ok2)
    z, w, zb, wb = (Poly.var(v) for v in (Var.z, Var.w, Var.zb, Var.wb))
    H = {Var.z: z + w * w, Var.w: w, Var.zb: zb + wb * wb, Var.wb: wb}
    lhs = poly_det(build_A(rho.substitute(H), 3))
    ok3 = lhs == a.substitute(H)
    log("det A_3(rho o (z + w^2, w)) = det A_3(rho) o (z + w^2, w)", ok3)
    return ok1 and ok2 and ok3


def _suite_normalform(cfg, log):
    rng = random.Random(cfg.seed)
    ok = True
    for n in (3, 4):
        try:
            c = derive_universal_constant(n, [random_normal_form(rng, 8) for _ in range(5)])
        except ValueError as exc:
            log(f"c_{n} universal across witnesses: {exc}", False)
            ok = False
            continue
        log(f"c_{n} = {c.value}", True)
        for line in c.transcript:
            log("  " + line, None)
    return ok


def _suite_factor(cfg, log):
    rng = random.Random(cfg.seed)
    specs = [Poly.parse("z^2*wb^2 + zb^2*w^2")] + [random_real_poly(rng, 4, nterms=2) for _ in range(2)]
    pts = rational_sphere_points(20)
    ok = True
    for rp in specs:
        direct, factored = linear_eps_coefficient(PerturbationSpec(rp))
        at_points = all(direct.eval(p) == factored.eval(p) for p in pts)
        exact = direct == factored
        log(f"rho' = {rp}: eps^1 coefficient = det D_3 * Q0 at 20 sphere points", at_points)
        log(f"  identical as polynomials: {exact}", None)
        ok = ok and at_points
    return ok


def _suite_argp(cfg, log):
    rng = random.Random(cfg.seed)
    cases = [Poly.parse("z^2*wb^2 + zb^2*w^2")]
    while len(cases) < 6:
        rp = random_real_poly(rng, 4, nterms=2, max_shift=3)
        if not q0_operator(rp).is_zero():
            cases.append(rp)
    ok = True
    for rp in cases:
        Q = q0_operator(rp)
        Z0 = find_good_circle(Q, seed=cfg.seed)
        if Z0 is None:
            log(f"rho' = {rp}: no good circle", False)
            ok = False
            continue
        P, p, m = great_circle_restriction(Q, Z0)
        n = count_roots_in_unit_disk(p, samples=cfg.winding_samples)
        W = numeric_circle_winding(P, cfg.winding_samples)
        good = W == n - m
        log(f"rho' = {rp}: winding {W} = n - m = {n} - {m}", good)
        ok = ok and good
    return ok


SUITES = {
    "transform": _suite_transform,
    "normalform": _suite_normalform,
    "factor": _suite_factor,
    "argp": _suite_argp,
}


def cmd_verify(args, cfg: CommandConfig) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    lines = []

    def log(msg, ok):
        tag = "" if ok is None else ("PASS " if ok else "FAIL ")
        lines.append(f"{tag}{msg}")

    ok = True
    for name in names:
        lines.append(f"[{name}]")
        ok = SUITES[name](cfg, log) and ok
    lines.append("all checks passed" if ok else "some checks failed")
    _emit("\n".join(lines), cfg)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="umbilic",
        description="Umbilical-tensor determinants and winding certificates for real hypersurfaces in C^2.",
        epilog="exit codes: 0 ok/certified, 1 rejected, 2 degenerate or not real, 3 parse error",
    )
    ap.add_argument("--tol", type=float, default=1e-9, help="relative zero tolerance for loop samples")
    ap.add_argument("--winding-samples", type=int, default=1024, help="initial samples per loop")
    ap.add_argument("--seed", type=int, default=0, help="seed for random circles and witnesses")
    ap.add_argument("--out", default=None, help="write the result here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detA", help="determinant of A_n (or D_n)")
    p.add_argument("--rho", required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--minor", action="store_true", help="use D_n instead of A_n")
    p.add_argument("--mod-eps", type=int, default=None, help="truncate modulo eps^K")
    p.add_argument("--at", default=None, help="evaluate at a point, e.g. z=1,w=0")
    p.add_argument("--reduce", choices=["sphere"], default=None)
    p.set_defaults(func=cmd_detA)

    p = sub.add_parser("ellipsoid", help="eps-expansion and winding certificate")
    p.add_argument("--A", default=None)
    p.add_argument("--B", default=None)
    p.add_argument("--eps-order", type=int, default=3)
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("perturb", help="sphere perturbation pipeline")
    p.add_argument("rhoprime")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--certify", action="store_true")
    g.add_argument("--scan", nargs=2, metavar=("EPS", "GRID"))
    g.add_argument("--check", choices=["ac", "ii", "circle"])
    g.add_argument("--pi-scan", type=int, metavar="GRID")
    g.add_argument("--stokes", type=float, metavar="EPS")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("winding", help="winding number of a loop CSV (t,re,im)")
    p.add_argument("loop")
    p.set_defaults(func=cmd_winding)

    p = sub.add_parser("verify", help="run an exact verification suite")
    p.add_argument("suite", choices=list(SUITES) + ["all"])
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = CommandConfig(
        subcommand=args.command,
        seed=args.seed,
        tol=args.tol,
        winding_samples=args.winding_samples,
        output=args.out,
    )
    try:
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DegenerateError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
