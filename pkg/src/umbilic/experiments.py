"""Ellipsoid expansion and sphere-perturbation certificates for umbilical curves."""
from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import EPS, GaussianRational, Poly, Var, bidegree_split, fourier_coefficient
from .operators import (
    DefiningFunction,
    apply_power,
    build_A,
    build_D,
    field_Lbar,
    poly_det,
    sphere_rho,
)
from .topology import (
    SampledLoop,
    UnivariatePoly,
    ZeroOnCurveError,
    count_roots_in_unit_disk,
    has_root_on_unit_circle,
    stokes_decomposition_check,
    umbilical_index,
    winding_number,
)

__all__ = [
    "DegenerateError",
    "EllipsoidFamily",
    "PerturbationSpec",
    "CertReport",
    "rational_sphere_point",
    "rational_sphere_points",
    "random_real_poly",
    "ellipsoid_defining",
    "ellipsoid_slice_expansion",
    "ellipsoid_winding_certificate",
    "q0_operator",
    "linear_eps_coefficient",
    "great_circle_restriction",
    "numeric_circle_winding",
    "find_good_circle",
    "check_condition_ii",
    "is_almost_circular",
    "pi_projection_scan",
    "certify_stable_umbilic",
    "CompiledPoly",
    "umbilic_grid_scan",
    "sigma_stokes_check",
    "PINNED_N",
    "SPHERE_DET_D3",
]

GR = GaussianRational

# derived once by ellipsoid_slice_expansion, kept as a regression pin
PINNED_N = 40532396646334464
# det D_3 of the unit sphere, derived by poly_det(build_D(sphere, 3))
SPHERE_DET_D3 = "12*(z*zb + w*wb)^6"


class DegenerateError(ValueError):
    pass


# ---------------------------------------------------------------------------
# points and random polynomials


def rational_sphere_point(x: Sequence) -> Dict[Var, GaussianRational]:
    """Inverse stereographic image of a rational x in Q^3: an exact point of S^3."""
    x1, x2, x3 = (Fraction(t) for t in x)
    s = x1 * x1 + x2 * x2 + x3 * x3
    d = s + 1
    z = GR(2 * x1 / d, 2 * x2 / d)
    w = GR(2 * x3 / d, (s - 1) / d)
    return {Var.z: z, Var.w: w, Var.zb: z.conjugate(), Var.wb: w.conjugate()}


def _stock_vectors():
    yield (1, 0, 0)  # Z0 = (1, 0)
    yield (0, 0, 1)  # Z0 = (0, 1)
    vals = [0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 3), 3]
    seen = {(1, 0, 0), (0, 0, 1)}
    for r in range(1, 4):
        for a in vals:
            for b in vals:
                for c in vals:
                    v = (a, b, c)
                    if v in seen or max(abs(Fraction(t)) for t in v) > r:
                        continue
                    seen.add(v)
                    yield v


def rational_sphere_points(count: int, seed: Optional[int] = None) -> List[Dict[Var, GaussianRational]]:
    """``count`` distinct exact points of S^3: stock points, or seeded random ones."""
    out = []
    if seed is None:
        for v in _stock_vectors():
            out.append(rational_sphere_point(v))
            if len(out) == count:
                return out
        seed = 0
    rng = random.Random(seed)
    while len(out) < count:
        v = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)]
        out.append(rational_sphere_point(v))
    return out


def random_real_poly(
    rng: random.Random,
    degree: int,
    nterms: int = 3,
    min_degree: Optional[int] = None,
    max_shift: Optional[int] = None,
    coeff_range: int = 5,
) -> Poly:
    """Random real polynomial ``p + conj(p)`` in z, w, zb, wb.

    ``max_shift`` bounds |a - b| for the bidegrees (a, b) of the monomials,
    so ``max_shift=3`` gives almost-circular polynomials.
    """
    lo = degree if min_degree is None else min_degree
    p = Poly.zero()
    while p.is_zero():
        acc = Poly.zero()
        for _ in range(nterms):
            d = rng.randint(lo, degree)
            while True:
                e = [0, 0, 0, 0]
                for _ in range(d):
                    e[rng.randrange(4)] += 1
                if max_shift is None or abs(e[0] + e[1] - e[2] - e[3]) <= max_shift:
                    break
            c = GR(rng.randint(-coeff_range, coeff_range), rng.randint(-coeff_range, coeff_range))
            acc = acc + Poly({tuple(e) + (0, 0, 0): c})
        p = acc + acc.conjugate()
    return p


def _pt(z, w) -> Dict[Var, GaussianRational]:
    z, w = GR.coerce(z), GR.coerce(w)
    return {Var.z: z, Var.w: w, Var.zb: z.conjugate(), Var.wb: w.conjugate()}


# ---------------------------------------------------------------------------
# reports


@dataclass
class CertReport:
    hypothesis_i_prime: dict = field(default_factory=dict)
    hypothesis_ii: dict = field(default_factory=dict)
    winding: Optional[int] = None
    disk_roots: Optional[int] = None
    laurent_order: Optional[int] = None
    verdict: str = "rejected"
    constants: dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in ("certified", "rejected", "degenerate"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == "certified":
            if not self.winding:
                raise ValueError("a certified report needs a nonzero winding")
            for h in (self.hypothesis_i_prime, self.hypothesis_ii):
                if h and not h.get("passed"):
                    raise ValueError("a certified report needs both hypotheses to pass")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# ellipsoids


@dataclass(frozen=True)
class EllipsoidFamily:
    """``A``/``B`` are exact values or None (kept symbolic)."""

    A: Optional[Fraction] = None
    B: Optional[Fraction] = None
    eps_cap: int = 3

    def __post_init__(self):
        for name in ("A", "B"):
            v = getattr(self, name)
            if v is not None:
                v = Fraction(v)
                if v < 0:
                    raise ValueError(f"{name} must be >= 0")
                object.__setattr__(self, name, v)
        if self.A == 0 and self.B == 0:
            raise ValueError("A = B = 0 is the sphere itself")

    def bindings(self) -> dict:
        out = {}
        if self.A is not None:
            out[Var.A] = self.A
        if self.B is not None:
            out[Var.B] = self.B
        return out


def ellipsoid_defining(fam: EllipsoidFamily) -> DefiningFunction:
    z, w, zb, wb = (Poly.var(v) for v in (Var.z, Var.w, Var.zb, Var.wb))
    a, b, eps = Poly.var(Var.A), Poly.var(Var.B), Poly.var(Var.eps)
    rho = -4 + 4 * z * zb + 4 * w * wb + eps * (a * (z + zb) ** 2 + b * (w + wb) ** 2)
    rho = rho.with_cap(fam.eps_cap)
    b = fam.bindings()
    return DefiningFunction(rho.substitute(b) if b else rho)


def ellipsoid_slice_expansion(fam: EllipsoidFamily) -> Tuple[Poly, Poly, Poly]:
    """eps^0, eps^1, eps^2 coefficients of det A_3(rho_eps) on the slice w = 0."""
    if fam.eps_cap < 3:
        raise ValueError("the eps^2 coefficient needs eps_cap >= 3")
    rho = ellipsoid_defining(fam).rho
    # points of the ellipsoid with w = 0 also have wb = 0
    slice_ = {Var.w: 0, Var.wb: 0}
    det = poly_det(build_A(rho, 3, post=lambda p: p.substitute(slice_)))
    return det.eps_coefficient(0), det.eps_coefficient(1), det.eps_coefficient(2)


def _slice_constant(eps2: Poly) -> Optional[int]:
    """N if eps2 = N*A*B*z^9*zb^5 (A, B possibly already bound), else None."""
    terms = list(eps2.terms())
    if len(terms) != 1:
        return None
    exps, c = terms[0]
    if exps[Var.z] != 9 or exps[Var.zb] != 5 or exps[Var.w] or exps[Var.wb]:
        return None
    return c


def ellipsoid_winding_certificate(fam: EllipsoidFamily, samples: int = 1024) -> CertReport:
    if fam.A is None or fam.B is None:
        raise ValueError("the certificate needs exact values of A and B")
    e0, e1, e2 = ellipsoid_slice_expansion(EllipsoidFamily(None, None, fam.eps_cap))
    consts = {"N": None, "delta2": str(e2)}
    c = _slice_constant(e2)
    if c is not None and c.is_real() and c.re.denominator == 1:
        consts["N"] = int(c.re)
    notes = [f"eps^0 slice coefficient: {e0}", f"eps^1 slice coefficient: {e1}"]
    delta = e2.substitute(fam.bindings())
    consts["delta2_at_AB"] = str(delta)
    if e0 or e1:
        notes.append("lower-order slice coefficients do not vanish")
        return CertReport(winding=None, verdict="degenerate", constants=consts, notes=notes)
    if delta.is_zero():
        notes.append(
            "delta2 vanishes identically (A*B = 0): the family is invariant under a "
            "circle action and the eps^2 argument does not apply"
        )
        return CertReport(winding=None, verdict="degenerate", constants=consts, notes=notes)
    cz = CompiledPoly(delta)

    def f(t):
        z = np.exp(1j * t)
        return cz({Var.z: z, Var.zb: np.conj(z)})

    try:
        w = winding_number(SampledLoop.from_function(f, samples))
    except ZeroOnCurveError as exc:
        notes.append(f"zero on the unit z-circle: {exc}")
        return CertReport(winding=None, verdict="degenerate", constants=consts, notes=notes)
    notes.append("umbilical curve certified for small eps" if w else "winding 0: no conclusion")
    return CertReport(
        hypothesis_i_prime={},
        hypothesis_ii={},
        winding=w,
        verdict="certified" if w else "rejected",
        constants=consts,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# sphere perturbations


@dataclass(frozen=True)
class PerturbationSpec:
    rho_prime: Poly
    eps_cap: int = 2

    def __post_init__(self):
        r = self.rho_prime
        if r.variables() & {Var.A, Var.B, Var.eps}:
            raise ValueError("rho' must involve z, w, zb, wb only")
        if r.conjugate() != r:
            raise ValueError("rho' must be real")

    @property
    def degree(self) -> int:
        return self.rho_prime.degree() if not self.rho_prime.is_zero() else 0

    def rho_eps(self) -> Poly:
        return (sphere_rho() + EPS * self.rho_prime).with_cap(self.eps_cap)


_LBAR0 = None


def _lbar0():
    global _LBAR0
    if _LBAR0 is None:
        _LBAR0 = field_Lbar(sphere_rho())
    return _LBAR0


def q0_operator(R: Poly) -> Poly:
    """``Lbar_0^4`` applied to the holomorphic Hessian of R along L_0."""
    zb, wb = Poly.var(Var.zb), Poly.var(Var.wb)
    rz, rw = R.diff(Var.z), R.diff(Var.w)
    h = wb * wb * rz.diff(Var.z) - 2 * zb * wb * rz.diff(Var.w) + zb * zb * rw.diff(Var.w)
    return apply_power(_lbar0(), 4, h)


def linear_eps_coefficient(spec: PerturbationSpec) -> Tuple[Poly, Poly]:
    """(direct eps^1 coefficient of det A_3(rho0 + eps rho'), det D_3(rho0) * Q0(rho'))."""
    rho = (sphere_rho() + EPS * spec.rho_prime).with_cap(2)
    direct = poly_det(build_A(rho, 3)).eps_coefficient(1)
    factored = poly_det(build_D(sphere_rho(), 3)) * q0_operator(spec.rho_prime)
    return direct, factored


def great_circle_restriction(Q: Poly, Z0) -> Tuple[Poly, UnivariatePoly, int]:
    """Restrict Q to t -> e^{it} Z0.

    P(zeta, zeta-bar) is returned as a Poly in z (zeta) and zb (zeta-bar);
    on |zeta| = 1 it equals p(zeta) / zeta^m.
    """
    z0, w0 = (GR.coerce(c) for c in Z0)
    if z0.norm() + w0.norm() != 1:
        raise ValueError("Z0 must lie on the unit sphere")
    zeta, zetab = Poly.var(Var.z), Poly.var(Var.zb)
    P = Q.substitute(
        {Var.z: zeta.scale(z0), Var.w: zeta.scale(w0), Var.zb: zetab.scale(z0.conjugate()), Var.wb: zetab.scale(w0.conjugate())}
    )
    if P.is_zero():
        raise DegenerateError("Q vanishes identically on this circle")
    m = max(e[Var.z] + e[Var.zb] for e, _ in P.terms())
    coeffs: Dict[int, GaussianRational] = {}
    for e, c in P.terms():
        k = e[Var.z] - e[Var.zb] + m
        coeffs[k] = coeffs.get(k, GR(0)) + c
    top = max(coeffs)
    p_coeffs = [coeffs.get(k, GR(0)) for k in range(top + 1)]
    if not any(p_coeffs):
        raise DegenerateError("Q vanishes identically on this circle")
    return P, UnivariatePoly(p_coeffs), m


def numeric_circle_winding(P: Poly, samples: int = 1024) -> int:
    """Winding of P(e^{it}, e^{-it}) around 0."""
    cp = CompiledPoly(P)

    def f(t):
        zeta = np.exp(1j * t)
        return cp({Var.z: zeta, Var.zb: np.conj(zeta)})

    return winding_number(SampledLoop.from_function(f, samples))


def _circle_points(seed: int, stock: int, randomized: int):
    pts = rational_sphere_points(stock)
    pts += rational_sphere_points(randomized, seed=seed + 1)
    for p in pts:
        yield (p[Var.z], p[Var.w])


def find_good_circle(Q: Poly, strategy: str = "grid", budget: Optional[int] = None, seed: int = 0):
    """First sphere point whose circle carries no zero of Q, or None.

    ``grid`` tries 32 stock points then 256 seeded random ones; ``random``
    skips the stock.  ``budget`` caps the total number of circles tried.
    """
    if strategy not in ("grid", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    stock = 32 if strategy == "grid" else 0
    pts = _circle_points(seed, stock, 256)
    for i, Z0 in enumerate(pts):
        if budget is not None and i >= budget:
            break
        try:
            _, p, _ = great_circle_restriction(Q, Z0)
        except DegenerateError:
            continue
        if not has_root_on_unit_circle(p):
            return Z0
    return None


def check_condition_ii(spec: PerturbationSpec) -> dict:
    """Q0 components Q0_{l,k-l} = Q0(rho'_{l-2,k-l+2}) must vanish for 4 <= l <= k/2."""
    offenders = []
    for (p, q), comp in bidegree_split(spec.rho_prime).items():
        if p < 2 or q < 2:
            continue
        l, k = p + 2, p + q
        if 4 <= l and 2 * l <= k and not q0_operator(comp).is_zero():
            offenders.append([l, k - l])
    return {"passed": not offenders, "offenders": offenders}


def is_almost_circular(spec: PerturbationSpec) -> bool:
    m = spec.degree
    return all(
        fourier_coefficient(spec.rho_prime, k).is_zero() for k in range(-m, m + 1) if abs(k) >= 4
    )


def pi_projection_scan(Q: Poly, grid: int = 64, tol: float = 1e-6, zero_tol: float = 1e-9) -> dict:
    """Fiberwise search for circle roots over the projective line.

    Fibers are the circles through (zt, 1)/sqrt(1 + |zt|^2) for zt on a
    ``grid`` x ``grid`` polar chart grid (|zt| = tan(a/2)), plus the point
    (1, 0) at infinity.  A fiber is flagged when Q vanishes on it identically
    or its restriction has a root within ``tol`` of the unit circle.
    """
    terms = [(e, complex(c)) for e, c in Q.terms()]
    samples = []
    for j in range(grid):
        a = math.pi * j / grid
        for k in range(grid):
            b = 2 * math.pi * k / grid
            samples.append(math.tan(a / 2) * complex(math.cos(b), math.sin(b)))
    samples.append(None)
    fibers = []
    scale = 0.0
    for zt in samples:
        if zt is None:
            z0, w0 = 1.0 + 0j, 0j
        else:
            r = 1 / math.sqrt(1 + abs(zt) ** 2)
            z0, w0 = zt * r, r + 0j
        coeffs: Dict[int, complex] = {}
        m = max((e[Var.z] + e[Var.w] + e[Var.zb] + e[Var.wb] for e, _ in terms), default=0)
        for e, c in terms:
            k = e[Var.z] + e[Var.w] - e[Var.zb] - e[Var.wb] + m
            v = c * z0 ** e[Var.z] * w0 ** e[Var.w] * z0.conjugate() ** e[Var.zb] * w0.conjugate() ** e[Var.wb]
            coeffs[k] = coeffs.get(k, 0j) + v
        cs = np.array([coeffs.get(k, 0j) for k in range(2 * m + 1)])
        scale = max(scale, float(np.max(np.abs(cs))) if len(cs) else 0.0)
        fibers.append((zt, cs))
    flagged, witness = [], None
    for zt, cs in fibers:
        mag = np.abs(cs)
        if scale == 0 or np.all(mag <= zero_tol * scale):
            hit = True
        else:
            cs = np.where(mag <= zero_tol * scale, 0, cs)
            nz = np.nonzero(cs)[0]
            trimmed = cs[nz[0] : nz[-1] + 1]
            roots = np.roots(trimmed[::-1]) if len(trimmed) > 1 else np.array([])
            hit = bool(np.any(np.abs(np.abs(roots) - 1) < tol))
        if hit:
            flagged.append("inf" if zt is None else [round(zt.real, 12), round(zt.imag, 12)])
        elif witness is None:
            witness = "inf" if zt is None else [round(zt.real, 12), round(zt.imag, 12)]
    n = len(fibers)
    return {
        "fibers": n,
        "flagged": len(flagged),
        "fraction_flagged": len(flagged) / n,
        "witness_exists": witness is not None,
        "witness": witness,
        "flagged_points": flagged[:64],
    }


def certify_stable_umbilic(spec: PerturbationSpec, seed: int = 0, samples: int = 1024) -> CertReport:
    """Certificate for a curve of stable umbilical points on rho0 + eps rho', eps small."""
    notes = [f"almost circular: {is_almost_circular(spec)}"]
    consts = {"det_D3_sphere": SPHERE_DET_D3}
    Q = q0_operator(spec.rho_prime)
    consts["Q0"] = str(Q)
    if Q.is_zero():
        notes.append("Q0(rho') vanishes identically: condition (i) is never satisfied")
        return CertReport({"passed": False, "witness": None}, check_condition_ii(spec), verdict="rejected", constants=consts, notes=notes)
    cond_ii = check_condition_ii(spec)
    Z0 = find_good_circle(Q, seed=seed)
    if Z0 is None:
        notes.append("no good circle within budget: hypothesis (i') unverified, not falsified")
        return CertReport({"passed": False, "witness": None}, cond_ii, verdict="rejected", constants=consts, notes=notes)
    hyp_i = {"passed": True, "witness": [str(Z0[0]), str(Z0[1])]}
    P, p, m = great_circle_restriction(Q, Z0)
    n = count_roots_in_unit_disk(p, samples=samples)
    W = n - m
    numeric = numeric_circle_winding(P, samples)
    if numeric != W:
        raise RuntimeError(f"argument principle mismatch: n - m = {W}, numeric winding {numeric}")
    consts["p"] = [str(c) for c in p.coeffs]
    if not cond_ii["passed"]:
        notes.append("condition (ii) fails: Q0 has components in the forbidden range")
        verdict = "rejected"
    elif W == 0:
        notes.append("winding 0 on the witness circle: no conclusion")
        verdict = "rejected"
    else:
        verdict = "certified"
    return CertReport(hyp_i, cond_ii, W, n, m, verdict, consts, notes)


# ---------------------------------------------------------------------------
# numeric scans


class CompiledPoly:
    """Floating-point evaluator for a Poly over numpy arrays."""

    def __init__(self, p: Poly):
        self.terms = [(e, complex(c)) for e, c in p.terms()]
        self.vars = sorted(p.variables())
        self.maxexp = {v: max((e[v] for e, _ in self.terms), default=0) for v in self.vars}

    def __call__(self, point: dict):
        shape = np.broadcast(*[np.asarray(point[v]) for v in self.vars]).shape if self.vars else ()
        pw = {}
        for v in self.vars:
            x = np.asarray(point[v], dtype=complex)
            lst = [np.ones(shape, dtype=complex)]
            for _ in range(self.maxexp[v]):
                lst.append(lst[-1] * x)
            pw[v] = lst
        acc = np.zeros(shape, dtype=complex)
        for e, c in self.terms:
            t = c
            for v in self.vars:
                if e[v]:
                    t = t * pw[v][e[v]]
            acc = acc + t
        return acc


class _Field:
    """det A_3(rho) and Newton projection onto rho = 0 in floating point."""

    def __init__(self, rho: Poly):
        self.rho = CompiledPoly(rho)
        self.rzb = CompiledPoly(rho.diff(Var.zb))
        self.rwb = CompiledPoly(rho.diff(Var.wb))
        self.entries = [[CompiledPoly(e) for e in row] for row in build_A(rho, 3).entries]

    @staticmethod
    def _pt(z, w):
        return {Var.z: z, Var.w: w, Var.zb: np.conj(z), Var.wb: np.conj(w)}

    def project(self, z, w, iters: int = 30, tol: float = 1e-13):
        z, w = np.array(z, dtype=complex), np.array(w, dtype=complex)
        for _ in range(iters):
            pt = self._pt(z, w)
            r = self.rho(pt).real
            gz, gw = self.rzb(pt), self.rwb(pt)
            g2 = 2 * (np.abs(gz) ** 2 + np.abs(gw) ** 2)
            z = z - r * gz / g2
            w = w - r * gw / g2
            if np.all(np.abs(r) < tol):
                break
        ok = np.abs(self.rho(self._pt(z, w)).real) < 1e-10
        return z, w, ok

    def Q(self, z, w):
        pt = self._pt(z, w)
        shape = np.broadcast(z, w).shape
        M = np.empty(shape + (5, 5), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                M[..., i, j] = e(pt)
        return np.linalg.det(M)


def _eps_rho(spec: PerturbationSpec, eps) -> Poly:
    e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    return sphere_rho() + spec.rho_prime.scale(GR(e))


def umbilic_grid_scan(spec: PerturbationSpec, eps: float, grid: int = 24) -> Tuple[str, dict]:
    """CSV samples of Q = det A_3 over M_eps on a torus-chart grid.

    Returns (csv_text, summary).  Cells where both Re Q and Im Q change sign
    among the 8 corners are marked as umbilical-curve candidates.
    """
    fld = _Field(_eps_rho(spec, eps))
    n_phi = max(grid // 2, 2)
    phi = (np.arange(n_phi) + 0.5) * (math.pi / 2) / n_phi
    th = 2 * math.pi * np.arange(grid) / grid
    P, T1, T2 = np.meshgrid(phi, th, th, indexing="ij")
    z0 = np.cos(P) * np.exp(1j * T1)
    w0 = np.sin(P) * np.exp(1j * T2)
    z, w, ok = fld.project(z0, w0)
    q = fld.Q(z, w)
    re, im = q.real, q.imag
    cand = np.zeros(q.shape, dtype=bool)
    # corners of cell (i, j, k): (i..i+1, j..j+1 mod, k..k+1 mod)
    corners_re, corners_im = [], []
    for di in (0, 1):
        for dj in (0, 1):
            for dk in (0, 1):
                sl = np.roll(np.roll(re, -dj, axis=1), -dk, axis=2)[di : n_phi - 1 + di]
                si = np.roll(np.roll(im, -dj, axis=1), -dk, axis=2)[di : n_phi - 1 + di]
                corners_re.append(sl)
                corners_im.append(si)
    cr, ci = np.stack(corners_re), np.stack(corners_im)
    cell = (cr.min(0) < 0) & (cr.max(0) > 0) & (ci.min(0) < 0) & (ci.max(0) > 0)
    cand[:-1] = cell
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["phi", "theta1", "theta2", "re_z", "im_z", "re_w", "im_w", "re_Q", "im_Q", "abs_Q", "projected", "candidate"])
    for idx in np.ndindex(q.shape):
        wr.writerow(
            [
                f"{P[idx]:.12g}", f"{T1[idx]:.12g}", f"{T2[idx]:.12g}",
                f"{z[idx].real:.12g}", f"{z[idx].imag:.12g}", f"{w[idx].real:.12g}", f"{w[idx].imag:.12g}",
                f"{re[idx]:.12g}", f"{im[idx]:.12g}", f"{abs(q[idx]):.12g}",
                int(ok[idx]), int(cand[idx]),
            ]
        )
    summary = {
        "eps": float(eps),
        "samples": int(q.size),
        "max_abs_Q": float(np.max(np.abs(q))),
        "candidates": int(cand.sum()),
        "projection_failures": int((~ok).sum()),
    }
    return buf.getvalue(), summary


def sigma_stokes_check(spec: PerturbationSpec, eps: float, grid: int = 48, samples: int = 512) -> dict:
    """Winding decomposition of Q on the disk Sigma = {(z, sqrt(1-|z|^2))} of M_eps.

    Sigma's boundary is the circle (e^{it}, 0).  Zeros of Q on Sigma are
    located from sign-change cells and polished by Newton; each is encircled
    by a small loop.  The outer winding must equal the sum of inner windings.
    """
    fld = _Field(_eps_rho(spec, eps))

    def on_sigma(z):
        z = np.asarray(z, dtype=complex)
        w = np.sqrt(np.clip(1 - np.abs(z) ** 2, 0, None)).astype(complex)
        return fld.project(z, w)

    def Qs(z):
        zz, ww, _ = on_sigma(z)
        return fld.Q(zz, ww)

    xs = np.linspace(-0.98, 0.98, grid)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Zg = X + 1j * Y
    inside = np.abs(Zg) < 0.98
    vals = Qs(np.where(inside, Zg, 0))
    seeds = []
    for i in range(grid - 1):
        for j in range(grid - 1):
            blk = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
            if not all(inside[b] for b in blk):
                continue
            v = np.array([vals[b] for b in blk])
            if v.real.min() < 0 < v.real.max() and v.imag.min() < 0 < v.imag.max():
                seeds.append(complex(Zg[i, j] + Zg[i + 1, j + 1]) / 2)
    zeros: List[complex] = []
    h = 1e-7
    for s in seeds:
        z = s
        for _ in range(50):
            f = complex(Qs(np.array([z]))[0])
            fx = (complex(Qs(np.array([z + h]))[0]) - f) / h
            fy = (complex(Qs(np.array([z + 1j * h]))[0]) - f) / h
            J = np.array([[fx.real, fy.real], [fx.imag, fy.imag]])
            try:
                dx, dy = np.linalg.solve(J, [-f.real, -f.imag])
            except np.linalg.LinAlgError:
                break
            z = z + complex(dx, dy)
            if abs(complex(dx, dy)) < 1e-13:
                break
        if abs(z) < 0.99 and abs(complex(Qs(np.array([z]))[0])) < 1e-8 * np.abs(vals).max():
            if all(abs(z - u) > 1e-6 for u in zeros):
                zeros.append(z)
    zeros.sort(key=lambda u: (round(math.atan2(u.imag, u.real), 9), abs(u)))
    outer = SampledLoop.from_function(lambda t: Qs(np.exp(1j * t)), samples, label="boundary of Sigma")
    inner = []
    for u in zeros:
        others = [abs(u - v) for v in zeros if v != u]
        delta = min([0.05, 0.5 * (1 - abs(u))] + [0.25 * d for d in others])
        inner.append(
            SampledLoop.from_function(lambda t, u=u, d=delta: Qs(u + d * np.exp(1j * t)), samples, label=f"zero at {u:.6f}")
        )
    res = stokes_decomposition_check(outer, inner)
    res["eps"] = float(eps)
    res["zeros"] = [[round(u.real, 9), round(u.imag, 9)] for u in zeros]
    res["indices"] = [umbilical_index(l).to_json() for l in inner]
    res["outer_index"] = str(Fraction(-res["outer_winding"], 2))
    return res
