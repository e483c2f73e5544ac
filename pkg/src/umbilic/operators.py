"""Differential operators of a defining function and the invariant determinants.

For a real hypersurface ``{rho = 0}`` in C^2 the (1,0) field is
``L = -rho_w d/dz + rho_z d/dw``; the matrices ``A_n(rho)`` and ``D_n(rho)``
collect repeated ``Lbar`` derivatives of products of ``rho_z``, ``rho_w`` and
the Hessian contraction ``rho_{Z^2}(L, L)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from .algebra import GEOMETRIC, GaussianRational, Poly, Var, dumps_matrix, loads_matrix

__all__ = [
    "DefiningFunction",
    "LinearFieldOp",
    "PolyMatrix",
    "field_L",
    "field_Lbar",
    "apply_power",
    "hessian_LL",
    "build_A",
    "build_D",
    "poly_det",
    "det_bareiss",
    "det_minors",
    "fefferman_J",
    "reduce_mod",
    "ReductionError",
    "SPHERE",
    "SPHERE_SELECTOR",
    "sphere_rho",
]


class NotRealError(ValueError):
    pass


@dataclass(frozen=True)
class DefiningFunction:
    rho: Poly

    def __post_init__(self):
        if self.rho.is_zero():
            raise ValueError("defining function is identically zero")
        if self.rho.conjugate() != self.rho:
            raise NotRealError("defining function is not real: conjugate(rho) != rho")

    @classmethod
    def unchecked(cls, rho: Poly) -> "DefiningFunction":
        """Wrap a possibly non-real rho (formal computations only)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "rho", rho)
        return obj

    @property
    def eps_cap(self):
        return self.rho.eps_cap


def _as_rho(rho) -> Poly:
    return rho.rho if isinstance(rho, DefiningFunction) else rho


class LinearFieldOp:
    """First-order operator ``sum_v c_v d/dv`` over the geometric variables."""

    def __init__(self, coeffs: Mapping[Var, Poly]):
        self.coeffs: Dict[Var, Poly] = {Var(v): c for v, c in coeffs.items() if not c.is_zero()}
        for v in self.coeffs:
            if v not in GEOMETRIC:
                raise ValueError(f"field has a coefficient on parameter {v.name}")

    @property
    def kind(self) -> str:
        vs = set(self.coeffs)
        if vs <= {Var.z, Var.w}:
            return "(1,0)"
        if vs <= {Var.zb, Var.wb}:
            return "(0,1)"
        return "mixed"

    def __call__(self, target: Poly) -> Poly:
        out = None
        for v, c in self.coeffs.items():
            d = target.diff(v)
            if d.is_zero():
                continue
            term = c * d
            out = term if out is None else out + term
        return out if out is not None else Poly.zero(target.eps_cap)

    def __eq__(self, other):
        return isinstance(other, LinearFieldOp) and self.coeffs == other.coeffs

    def __repr__(self):
        inner = " + ".join(f"({c})*d/d{v.name}" for v, c in sorted(self.coeffs.items()))
        return f"LinearFieldOp({inner or '0'})"


def field_L(rho) -> LinearFieldOp:
    r = _as_rho(rho)
    return LinearFieldOp({Var.z: -r.diff(Var.w), Var.w: r.diff(Var.z)})


def field_Lbar(rho) -> LinearFieldOp:
    r = _as_rho(rho)
    return LinearFieldOp({Var.zb: -r.diff(Var.wb), Var.wb: r.diff(Var.zb)})


def apply_power(op: LinearFieldOp, j: int, target: Poly) -> Poly:
    if j < 0:
        raise ValueError("power must be nonnegative")
    for _ in range(j):
        target = op(target)
    return target


def hessian_LL(rho) -> Poly:
    """``rho_zz rho_w^2 - 2 rho_zw rho_z rho_w + rho_ww rho_z^2``."""
    r = _as_rho(rho)
    rz, rw = r.diff(Var.z), r.diff(Var.w)
    return r.diff(Var.z).diff(Var.z) * rw**2 - 2 * r.diff(Var.z).diff(Var.w) * rz * rw + r.diff(Var.w).diff(Var.w) * rz**2


class PolyMatrix:
    """Square matrix of polynomials sharing one eps truncation order."""

    def __init__(self, rows: Sequence[Sequence[Poly]]):
        rows = [list(r) for r in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix is not square")
        caps = {p.eps_cap for r in rows for p in r}
        cap = min((c for c in caps if c is not None), default=None)
        self.entries: List[List[Poly]] = [[p.with_cap(cap) for p in r] for r in rows]
        self.n = n
        self.eps_cap = cap

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.entries == other.entries

    def column(self, j: int) -> List[Poly]:
        return [r[j] for r in self.entries]

    def block(self, k: int) -> "PolyMatrix":
        """Top-left k x k block."""
        return PolyMatrix([r[:k] for r in self.entries[:k]])

    def map(self, fn: Callable[[Poly], Poly]) -> "PolyMatrix":
        return PolyMatrix([[fn(p) for p in r] for r in self.entries])

    def substitute(self, bindings: Mapping) -> "PolyMatrix":
        return self.map(lambda p: p.substitute(bindings))

    def eval(self, point: Mapping) -> "PolyMatrix":
        """Entrywise exact evaluation; the result has constant entries."""
        return self.map(lambda p: Poly.const(p.eval(point)))

    def det(self, method: str = "auto") -> Poly:
        return poly_det(self, method)

    def to_json(self) -> str:
        return dumps_matrix(self.entries)

    @classmethod
    def from_json(cls, text: str) -> "PolyMatrix":
        return cls(loads_matrix(text))

    def __repr__(self):
        return f"PolyMatrix(n={self.n}, eps_cap={self.eps_cap})"


def _row_generators(rho: Poly, n: int, with_hessian: bool) -> List[Poly]:
    rz, rw = rho.diff(Var.z), rho.diff(Var.w)
    zp = [Poly.const(1, rho.eps_cap)]
    wp = [Poly.const(1, rho.eps_cap)]
    for _ in range(n):
        zp.append(zp[-1] * rz)
        wp.append(wp[-1] * rw)
    rows = [zp[k] * wp[n - k] for k in range(n + 1)]
    if with_hessian:
        h = hessian_LL(rho)
        rows += [zp[s] * wp[n - 3 - s] * h for s in range(n - 2)]
    return rows


def _lbar_table(rho: Poly, generators: List[Poly], ncols: int, post=None) -> PolyMatrix:
    lbar = field_Lbar(rho)
    rows = []
    for g in generators:
        row = [g]
        for _ in range(ncols - 1):
            row.append(lbar(row[-1]))
        rows.append(row if post is None else [post(p) for p in row])
    return PolyMatrix(rows)


def build_A(rho, n: int, post: Optional[Callable[[Poly], Poly]] = None) -> PolyMatrix:
    """The (2n-1) x (2n-1) matrix ``A_n(rho)``.

    Rows are ``rho_z^k rho_w^(n-k)`` for k = 0..n followed by
    ``rho_z^s rho_w^(n-3-s) rho_{Z^2}(L, L)`` for s = 0..n-3; column j applies
    ``Lbar^j``.  ``post`` is applied to each finished entry (e.g. restriction
    to a slice); it must be a ring homomorphism for determinants to commute.
    """
    if n < 3:
        raise ValueError("A_n is defined for n >= 3")
    r = _as_rho(rho)
    return _lbar_table(r, _row_generators(r, n, True), 2 * n - 1, post)


def build_D(rho, n: int, post: Optional[Callable[[Poly], Poly]] = None) -> PolyMatrix:
    """The (n+1) x (n+1) matrix ``D_n(rho)``, the top-left block of ``A_n``."""
    if n < 1:
        raise ValueError("D_n is defined for n >= 1")
    r = _as_rho(rho)
    return _lbar_table(r, _row_generators(r, n, False), n + 1, post)


# ---------------------------------------------------------------------------
# determinants


def det_bareiss(m: PolyMatrix) -> Poly:
    """Fraction-free elimination with exact polynomial division.

    Requires an integral domain, so eps-truncated matrices are rejected.
    """
    if m.eps_cap is not None:
        raise ArithmeticError("Bareiss elimination needs an integral domain; matrix is eps-truncated")
    n = m.n
    if n == 0:
        return Poly.const(1)
    a = [list(r) for r in m.entries]
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Poly.zero()
        piv = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                num = piv * a[i][j]
                if not aik.is_zero() and not a[k][j].is_zero():
                    num = num - aik * a[k][j]
                a[i][j] = num if k == 0 else num.exact_div(prev)
        prev = piv
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_minors(m: PolyMatrix) -> Poly:
    """Division-free Laplace expansion with memoised minors (any commutative ring).

    Expands along columns; a minor is indexed by the set of rows it uses.
    Costs n * 2^(n-1) products.
    """
    n = m.n
    cap = m.eps_cap
    if n == 0:
        return Poly.const(1, cap)
    e = m.entries
    # minors over the last c columns
    minors: Dict[int, Poly] = {}
    col = n - 1
    for i in range(n):
        minors[1 << i] = e[i][col]
    for c in range(2, n + 1):
        col = n - c
        nxt: Dict[int, Poly] = {}
        for rows in itertools.combinations(range(n), c):
            mask = 0
            for r in rows:
                mask |= 1 << r
            acc = None
            for pos, r in enumerate(rows):
                entry = e[r][col]
                if entry.is_zero():
                    continue
                sub = minors.get(mask & ~(1 << r))
                if sub is None or sub.is_zero():
                    continue
                term = entry * sub
                if pos % 2:
                    term = -term
                acc = term if acc is None else acc + term
            nxt[mask] = acc if acc is not None else Poly.zero(cap)
        minors = nxt
    return minors[(1 << n) - 1]


def poly_det(m: PolyMatrix, method: str = "auto") -> Poly:
    """Exact determinant.

    ``auto`` is the memoised cofactor expansion: division free, valid in
    eps-truncated rings, and much faster than Bareiss on these sparse
    matrices.  ``bareiss`` is kept as an independent cross-check.
    """
    if method == "auto":
        method = "minors"
    if method == "bareiss":
        return det_bareiss(m)
    if method == "minors":
        return det_minors(m)
    raise ValueError(f"unknown determinant method {method!r}")


def fefferman_J(rho) -> Poly:
    """Fefferman's Monge-Ampere operator in C^2 (sign factor (-1)^2 = 1)."""
    r = _as_rho(rho)
    rzb, rwb = r.diff(Var.zb), r.diff(Var.wb)
    rz, rw = r.diff(Var.z), r.diff(Var.w)
    m = PolyMatrix(
        [
            [r, rzb, rwb],
            [rz, rz.diff(Var.zb), rz.diff(Var.wb)],
            [rw, rw.diff(Var.zb), rw.diff(Var.wb)],
        ]
    )
    return det_minors(m)


# ---------------------------------------------------------------------------
# reduction modulo a defining function


class ReductionError(ValueError):
    pass


def _graded_lex_key(order):
    def key(exps):
        return (sum(exps[v] for v in GEOMETRIC),) + tuple(exps[v] for v in order)

    return key


def _leading_rule(rho: Poly, leading):
    if isinstance(leading, Poly):
        terms = list(leading.terms())
        if len(terms) != 1:
            raise ReductionError("selector must be a single monomial")
        lead = terms[0][0]
    elif isinstance(leading, Mapping):
        lead = [0] * len(Var)
        for v, e in leading.items():
            lead[Var[v] if isinstance(v, str) else v] = e
        lead = tuple(lead)
    else:
        lead = tuple(leading) + (0,) * (len(Var) - len(tuple(leading)))
    c = rho.coeff(lead)
    if not c:
        raise ReductionError("selected monomial does not occur in rho")
    if any(lead[v] for v in (Var.A, Var.B, Var.eps)):
        raise ReductionError("selected monomial must involve geometric variables only")
    others = [e for e, _ in rho.terms() if e != lead]
    # the rewrite terminates if some graded-lex order over the geometric
    # variables puts the selected monomial strictly above all others
    for order in itertools.permutations(GEOMETRIC):
        key = _graded_lex_key(order)
        geo_lead = key(lead)
        if all(key(e) < geo_lead for e in others):
            break
    else:
        raise ReductionError("selected monomial does not dominate the other monomials of rho")
    tail = rho - Poly({lead: c})
    replacement = tail * Poly.const(GaussianRational(-1) / c)
    return lead, replacement


def reduce_mod(p: Poly, rho, leading) -> Poly:
    """Normal form of ``p`` modulo the ideal generated by ``rho``.

    ``leading`` selects the monomial of rho that is rewritten away, e.g.
    ``{"w": 1, "wb": 1}`` for the unit sphere (ww̄ -> 1 - zz̄).
    """
    r = _as_rho(rho)
    lead, repl = _leading_rule(r, leading)
    idx = [i for i, e in enumerate(lead) if e]
    powers = [Poly.const(1, p.eps_cap)]
    result: Dict[tuple, GaussianRational] = {}
    work = p
    while not work.is_zero():
        pending = Poly.zero(p.eps_cap)
        groups: Dict[int, Dict[tuple, GaussianRational]] = {}
        for exps, c in work.terms():
            k = min(exps[i] // lead[i] for i in idx)
            if k == 0:
                result[exps] = result.get(exps, GaussianRational(0)) + c
                continue
            rest = tuple(e - k * l for e, l in zip(exps, lead))
            groups.setdefault(k, {})[rest] = c
        for k, rest_terms in groups.items():
            while len(powers) <= k:
                powers.append(powers[-1] * repl)
            pending = pending + Poly(rest_terms, p.eps_cap) * powers[k]
        work = pending
    return Poly({e: c for e, c in result.items() if c}, p.eps_cap)


SPHERE_SELECTOR = {"w": 1, "wb": 1}


def sphere_rho() -> Poly:
    return Poly.parse("-1 + z*zb + w*wb")


SPHERE = DefiningFunction(sphere_rho())
