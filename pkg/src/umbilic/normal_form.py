"""Graph defining functions in Chern-Moser normal form and origin evaluations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .algebra import GEOMETRIC, GaussianRational, Poly, Var
from .operators import (
    DefiningFunction,
    _row_generators,
    build_D,
    field_Lbar,
    poly_det,
)

__all__ = [
    "NormalFormSurface",
    "UniversalConstant",
    "validate_normal_form",
    "rho_from_graph",
    "detA_origin_formula",
    "origin_matrix",
    "origin_det_A",
    "origin_det_D",
    "derive_universal_constant",
    "levi_nondegenerate_at",
    "OffSurfaceError",
    "random_normal_form",
]

GR = GaussianRational


@dataclass
class NormalFormSurface:
    """phi(z, zb, u) = sum_{k,l} phi_kl(u) z^k zb^l, each phi_kl a polynomial in u.

    ``coeffs[(k, l)]`` lists the u-coefficients, constant term first.
    """

    coeffs: Dict[Tuple[int, int], List[GaussianRational]] = field(default_factory=dict)
    max_weight: int = 8

    def __post_init__(self):
        self.coeffs = {
            (int(k), int(l)): [GR.coerce(c) for c in cs] for (k, l), cs in self.coeffs.items()
        }

    def coefficient(self, k: int, l: int, j: int = 0) -> GaussianRational:
        cs = self.coeffs.get((k, l), [])
        return cs[j] if j < len(cs) else GR(0)

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int], object], max_weight: int = 8) -> "NormalFormSurface":
        """Build from u-independent coefficients ``{(k, l): c}``."""
        return cls({kl: [GR.coerce(c)] for kl, c in terms.items()}, max_weight)

    def to_json(self) -> str:
        items = []
        for (k, l), cs in sorted(self.coeffs.items()):
            items.append(
                {
                    "k": k,
                    "l": l,
                    "u_poly": [[c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator] for c in cs],
                }
            )
        return json.dumps({"max_weight": self.max_weight, "coeffs": items})

    @classmethod
    def from_json(cls, text: str) -> "NormalFormSurface":
        data = json.loads(text)
        coeffs = {}
        for item in data["coeffs"]:
            cs = [GR(Fraction(a, b), Fraction(c, d)) for a, b, c, d in item["u_poly"]]
            coeffs[(item["k"], item["l"])] = cs
        return cls(coeffs, data.get("max_weight", 8))


@dataclass(frozen=True)
class UniversalConstant:
    n: int
    value: GaussianRational
    transcript: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.value:
            raise ValueError("universal constant must be nonzero")


def _nonzero(cs: Sequence[GaussianRational]) -> bool:
    return any(bool(c) for c in cs)


def validate_normal_form(s: NormalFormSurface) -> List[str]:
    """List every violated normal-form or reality constraint (empty if valid)."""
    out = []
    for (k, l), cs in sorted(s.coeffs.items()):
        mirror = s.coeffs.get((l, k), [])
        n = max(len(cs), len(mirror))
        for j in range(n):
            a = cs[j] if j < len(cs) else GR(0)
            b = mirror[j] if j < len(mirror) else GR(0)
            if a != b.conjugate():
                out.append(f"({k},{l}): reality fails, phi_{l}{k} is not the conjugate")
                break
        for j, c in enumerate(cs):
            if c and k + l + 2 * j > s.max_weight:
                out.append(f"({k},{l}): u^{j} term exceeds max_weight {s.max_weight}")
    one = s.coeffs.get((1, 1), [])
    if not one or one[0] != 1 or _nonzero(one[1:]):
        out.append("(1,1): phi_11 must equal 1")
    for (k, l), cs in sorted(s.coeffs.items()):
        if not _nonzero(cs):
            continue
        if k == 0 or l == 0:
            out.append(f"({k},{l}): phi_0k must vanish")
        elif (k == 1 and l >= 2) or (l == 1 and k >= 2):
            out.append(f"({k},{l}): phi_1s must vanish for s >= 2")
        elif (k, l) in ((2, 2), (2, 3), (3, 2), (3, 3)):
            out.append(f"({k},{l}): must vanish")
    return out


def rho_from_graph(s: NormalFormSurface) -> DefiningFunction:
    """``rho = -Im w + phi(z, zb, Re w)`` as a polynomial."""
    w, wb = Poly.var(Var.w), Poly.var(Var.wb)
    z, zb = Poly.var(Var.z), Poly.var(Var.zb)
    u = (w + wb) * Poly.const(Fraction(1, 2))
    rho = (w - wb) * Poly.const(GR(0, Fraction(1, 2)))
    upow = [Poly.const(1)]
    for (k, l), cs in sorted(s.coeffs.items()):
        phi_kl = Poly.zero()
        for j, c in enumerate(cs):
            if not c:
                continue
            while len(upow) <= j:
                upow.append(upow[-1] * u)
            phi_kl = phi_kl + upow[j] * Poly.const(c)
        if not phi_kl.is_zero():
            rho = rho + phi_kl * z**k * zb**l
    return DefiningFunction(rho)


def normalized_jet(s: NormalFormSurface, k: int) -> GaussianRational:
    """``d^2/dz^2 d^k/dzb^k phi (0) / (2 * 4!)`` = (k!/4!) * phi_2k(0).

    The scale makes the k = 4 value the plain Taylor coefficient phi_24(0).
    """
    return s.coefficient(2, k) * Fraction(math.factorial(k), math.factorial(4))


def _scalar_det(rows: List[List[GaussianRational]]) -> GaussianRational:
    n = len(rows)
    a = [list(r) for r in rows]
    det = GR(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return GR(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        inv = GR(1) / a[c][c]
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def detA_origin_formula(s: NormalFormSurface, n: int) -> GaussianRational:
    """Determinant of the (n-2) x (n-2) binomial-weighted jet matrix.

    Entry (r, c) is ``binom(n+1+c, r) * e_{n+1+c-r}`` with ``e_k`` the
    normalized jet of phi_{2,k}; for n = 3 this is just phi_24(0).
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    size = n - 2
    rows = [
        [math.comb(n + 1 + c, r) * normalized_jet(s, n + 1 + c - r) for c in range(size)]
        for r in range(size)
    ]
    return _scalar_det(rows)


def _truncate_degree(p: Poly, d: int) -> Poly:
    """Drop terms whose degree in z, w, zb, wb exceeds d."""
    if d < 0:
        return Poly.zero(p.eps_cap)
    keep = {}
    for exps, c in p.terms():
        if sum(exps[v] for v in GEOMETRIC) <= d:
            keep[exps] = c
    return Poly(keep, p.eps_cap)


def origin_matrix(rho, n: int, minor: bool = False) -> List[List[GaussianRational]]:
    """Values at Z = 0 of ``A_n(rho)`` (or ``D_n`` when ``minor``).

    Each Lbar lowers the degree of a monomial by at most one, so before the
    remaining r applications only terms of degree <= r can reach the origin;
    everything above is dropped as the columns are built.
    """
    r = rho.rho if isinstance(rho, DefiningFunction) else rho
    ncols = n + 1 if minor else 2 * n - 1
    top = ncols - 1
    r = _truncate_degree(r, top + 2)
    lbar = field_Lbar(r)
    lbar.coeffs = {v: _truncate_degree(c, top) for v, c in lbar.coeffs.items()}
    rows = []
    for g in _row_generators(r, n, not minor):
        cur = _truncate_degree(g, top)
        row = []
        for j in range(ncols):
            row.append(cur.constant_value())
            if j < top:
                cur = _truncate_degree(lbar(cur), top - j - 1)
        rows.append(row)
    return rows


def origin_det_A(rho, n: int) -> GaussianRational:
    return _scalar_det(origin_matrix(rho, n))


def origin_det_D(rho, n: int) -> GaussianRational:
    return _scalar_det(origin_matrix(rho, n, minor=True))


def derive_universal_constant(
    n: int, witnesses: Sequence[NormalFormSurface]
) -> UniversalConstant:
    """c_n = det A_n(0) / formula value, checked to agree across witnesses.

    Witnesses whose formula value vanishes are skipped; at least one must
    remain.  Raises ``ValueError`` if two usable witnesses disagree.
    """
    value = None
    log = []
    for i, s in enumerate(witnesses):
        bad = validate_normal_form(s)
        if bad:
            raise ValueError(f"witness {i} is not in normal form: {bad}")
        f = detA_origin_formula(s, n)
        if not f:
            log.append(f"witness {i}: formula value 0, skipped")
            continue
        d = origin_det_A(rho_from_graph(s), n)
        ratio = d / f
        log.append(f"witness {i}: det A_{n}(0) = {d}, formula = {f}, ratio = {ratio}")
        if value is None:
            value = ratio
        elif ratio != value:
            raise ValueError(f"c_{n} is not universal: {value} vs {ratio}")
    if value is None:
        raise ZeroDivisionError("every witness has vanishing formula value")
    return UniversalConstant(n, value, tuple(log))


class OffSurfaceError(ValueError):
    pass


def levi_nondegenerate_at(rho, point) -> bool:
    """True iff det D_3(rho) is nonzero at ``point`` (which must lie on rho = 0)."""
    r = rho.rho if isinstance(rho, DefiningFunction) else rho
    if r.eval(point):
        raise OffSurfaceError("point does not lie on the hypersurface")
    vals = build_D(r, 3).eval(point)
    return bool(poly_det(vals).constant_value())


def random_normal_form(rng, max_weight: int = 8, u_degree: int = 1, scale: int = 9) -> NormalFormSurface:
    """Random valid normal form: every allowed (k, l) with k, l >= 2 up to the weight.

    ``u_degree`` adds u^j terms (j <= u_degree) wherever the weight allows.
    """

    def rnd():
        return GR(
            Fraction(rng.randint(-scale, scale), rng.randint(1, 5)),
            Fraction(rng.randint(-scale, scale), rng.randint(1, 5)),
        )

    coeffs = {(1, 1): [GR(1)]}
    for k in range(2, max_weight - 1):
        for l in range(k, max_weight - 1):
            if k + l > max_weight or (k, l) in ((2, 2), (2, 3), (3, 3)):
                continue
            cs = []
            for j in range(u_degree + 1):
                if k + l + 2 * j > max_weight:
                    break
                c = rnd()
                cs.append(GR(c.re) if k == l else c)
            coeffs[(k, l)] = cs
            if k != l:
                coeffs[(l, k)] = [c.conjugate() for c in cs]
    return NormalFormSurface(coeffs, max_weight)
