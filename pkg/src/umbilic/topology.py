"""Winding numbers, umbilical indices and root location relative to the unit circle."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np

from .algebra import GaussianRational

__all__ = [
    "SampledLoop",
    "UnivariatePoly",
    "IndexReport",
    "ZeroOnCurveError",
    "UnresolvedWindingError",
    "RootOnCircleError",
    "winding_number",
    "count_roots_in_unit_disk",
    "has_root_on_unit_circle",
    "argument_principle_count",
    "umbilical_index",
    "stokes_decomposition_check",
]

GR = GaussianRational
TWO_PI = 2 * math.pi


class ZeroOnCurveError(ValueError):
    """The sampled function vanishes (numerically) on the loop."""


class UnresolvedWindingError(RuntimeError):
    """Argument increments could not be bounded by pi/2 within the budget."""


class RootOnCircleError(ValueError):
    """A polynomial has (or cannot be certified not to have) a root with |z| = 1."""


@dataclass
class SampledLoop:
    """Samples ``f(t_i)`` of a function on a closed loop.

    ``t`` runs over one period; the loop is closed by pairing the last sample
    with the first.  With ``func`` (vectorised over t) steps can be refined.
    """

    t: np.ndarray
    values: np.ndarray
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    period: float = TWO_PI
    budget: int = 2**16
    label: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.t.shape != self.values.shape or self.t.ndim != 1 or len(self.t) < 2:
            raise ValueError("need matching 1-d sample arrays with at least 2 points")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("t must be strictly increasing")
        if self.t[-1] - self.t[0] >= self.period:
            raise ValueError("samples must lie within one period (the loop closes itself)")

    @classmethod
    def from_function(cls, func, samples: int = 1024, period: float = TWO_PI, t0: float = 0.0, budget: int = 2**16, label: str = ""):
        t = t0 + period * np.arange(samples) / samples
        return cls(t, func(t), func=func, period=period, budget=budget, label=label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", "re", "im"])
        for t, v in zip(self.t, self.values):
            wr.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, period: float = TWO_PI) -> "SampledLoop":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0].strip().lower() == "t":
            rows = rows[1:]
        rows = [r for r in rows if r]
        t = np.array([float(r[0]) for r in rows])
        v = np.array([complex(float(r[1]), float(r[2])) for r in rows])
        return cls(t, v, period=period)


def winding_number(loop: SampledLoop, zero_tol: float = 1e-12, integer_tol: float = 1e-6) -> int:
    """Total change of arg f around the loop divided by 2 pi."""
    t = list(loop.t) + [loop.t[0] + loop.period]
    v = list(loop.values) + [loop.values[0]]
    scale = max(abs(x) for x in v)
    if scale == 0:
        raise ZeroOnCurveError("function vanishes identically on the loop")

    def check(vals):
        for x in np.atleast_1d(vals):
            if abs(x) <= zero_tol * scale:
                raise ZeroOnCurveError(f"|f| = {abs(x):.3e} on the loop (scale {scale:.3e})")

    check(v)
    budget = loop.budget - len(loop.t)
    total = 0.0
    # depth-first refinement over an explicit stack of segments
    stack = [(t[i], v[i], t[i + 1], v[i + 1]) for i in range(len(t) - 2, -1, -1)]
    while stack:
        ta, va, tb, vb = stack.pop()
        d = math.atan2((vb / va).imag, (vb / va).real)
        if abs(d) <= math.pi / 2:
            total += d
            continue
        if loop.func is None or budget <= 0:
            raise UnresolvedWindingError(
                f"argument step {d:.3f} rad exceeds pi/2 between t={ta:.6g} and t={tb:.6g}"
            )
        tm = 0.5 * (ta + tb)
        vm = complex(np.asarray(loop.func(np.array([tm])))[0])
        check(vm)
        budget -= 1
        stack.append((tm, vm, tb, vb))
        stack.append((ta, va, tm, vm))
    w = total / TWO_PI
    k = round(w)
    if abs(w - k) > integer_tol:
        raise UnresolvedWindingError(f"winding {w} is not an integer")
    return int(k)


# ---------------------------------------------------------------------------
# univariate polynomials


class UnivariatePoly:
    """``c_0 + c_1 x + ... + c_n x^n``; exact (GaussianRational) or numeric (complex)."""

    def __init__(self, coeffs: Sequence, exact: Optional[bool] = None):
        cs = list(coeffs)
        if exact is None:
            exact = not any(isinstance(c, (float, complex, np.floating, np.complexfloating)) for c in cs)
        self.exact = exact
        if exact:
            cs = [GR.coerce(c) for c in cs]
        else:
            cs = [complex(c) for c in cs]
        while cs and not cs[-1]:
            cs.pop()
        if not cs:
            raise ValueError("the zero polynomial has no leading coefficient")
        self.coeffs = cs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):
            acc = acc * x + complex(c)
        return acc

    def reciprocal(self) -> "UnivariatePoly":
        """``x^n * conj(p(1/conj x))``: reversed, conjugated coefficients."""
        return UnivariatePoly([c.conjugate() for c in reversed(self.coeffs)], self.exact)

    def numeric_roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([], dtype=complex)
        return np.roots([complex(c) for c in reversed(self.coeffs)])

    def __eq__(self, other):
        return isinstance(other, UnivariatePoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"UnivariatePoly({self.coeffs!r})"


def _trim(cs: List[GR]) -> List[GR]:
    cs = list(cs)
    while cs and not cs[-1]:
        cs.pop()
    return cs


def _polymod(a: List[GR], b: List[GR]) -> List[GR]:
    a = list(a)
    inv = GR(1) / b[-1]
    while len(a) >= len(b) and a:
        f = a[-1] * inv
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = a[shift + i] - f * c
        a = _trim(a)
    return a


def poly_gcd(a: UnivariatePoly, b: UnivariatePoly) -> UnivariatePoly:
    """Monic gcd over Q(i)."""
    x, y = list(a.coeffs), list(b.coeffs)
    while y:
        x, y = y, _polymod(x, y)
    inv = GR(1) / x[-1]
    return UnivariatePoly([c * inv for c in x])


def has_root_on_unit_circle(p: UnivariatePoly, tol: float = 1e-9) -> bool:
    """Exact necessary condition via gcd(p, p*), then a numeric modulus check.

    Every root on |x| = 1 is a common root of p and its reciprocal, so a
    constant gcd certifies that there is none.
    """
    if not p.exact:
        return bool(np.any(np.abs(np.abs(p.numeric_roots()) - 1) < tol))
    g = poly_gcd(p, p.reciprocal())
    if g.degree == 0:
        return False
    return bool(np.any(np.abs(np.abs(g.numeric_roots()) - 1) < tol))


def _schur_cohn(coeffs: List[GR], max_restarts: int) -> int:
    # inside(original) = offset + sign * inside(p)
    offset, sign = 0, 1
    p = _trim(coeffs)
    restarts = 0
    while True:
        r = 0
        while p[r] == 0:
            r += 1
        if r:
            offset += sign * r
            p = p[r:]
        n = len(p) - 1
        if n == 0:
            return offset
        a0, an = p[0], p[n]
        delta = a0.norm() - an.norm()
        pstar = [c.conjugate() for c in reversed(p)]
        t = _trim([a0.conjugate() * x - an * y for x, y in zip(p, pstar)])
        if delta == 0:
            if not t:
                # self-reciprocal: roots pair up as x, 1/conj(x)
                if n % 2:
                    raise RootOnCircleError("self-reciprocal polynomial of odd degree has a circle root")
                return offset + sign * (n // 2)
            restarts += 1
            if restarts > max_restarts:
                raise RootOnCircleError("Schur-Cohn recursion stayed degenerate")
            # multiplying by (x - 2) adds no root in the closed disk
            q = [GR(0)] * (n + 2)
            for i, c in enumerate(p):
                q[i + 1] = q[i + 1] + c
                q[i] = q[i] - 2 * c
            p = q
            continue
        if delta < 0:
            offset += sign * n
            sign = -sign
        p = t


def argument_principle_count(p: UnivariatePoly, samples: int = 1024) -> int:
    """Roots in |x| < 1 as the winding number of p around the unit circle."""
    loop = SampledLoop.from_function(lambda t: p(np.exp(1j * t)), samples)
    return winding_number(loop)


def count_roots_in_unit_disk(p: UnivariatePoly, cross_check: bool = True, samples: int = 1024) -> int:
    """Number of roots with |x| < 1, with multiplicity.

    Exact Schur-Cohn recursion; degenerate steps are resolved by multiplying
    with ``x - 2``.  Raises ``RootOnCircleError`` if p has a root on the circle.
    """
    if not p.exact:
        if has_root_on_unit_circle(p):
            raise RootOnCircleError("numeric root on the unit circle")
        return argument_principle_count(p, samples)
    if has_root_on_unit_circle(p):
        raise RootOnCircleError("polynomial has a root on the unit circle; perturb or reject")
    n = _schur_cohn(p.coeffs, max_restarts=2 * p.degree + 8)
    if cross_check:
        try:
            numeric = argument_principle_count(p, samples)
        except (ZeroOnCurveError, UnresolvedWindingError):
            numeric = None
        if numeric is not None and numeric != n:
            raise RuntimeError(f"Schur-Cohn count {n} disagrees with argument principle {numeric}")
    return n


# ---------------------------------------------------------------------------
# indices


@dataclass
class IndexReport:
    label: str
    winding: int
    index: Fraction
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.index != Fraction(-self.winding, 2):
            raise ValueError("index must equal -winding/2")

    def to_json(self) -> str:
        d = asdict(self)
        d["index"] = str(self.index)
        return json.dumps(d, sort_keys=True)


def umbilical_index(loop: SampledLoop, **metadata) -> IndexReport:
    """Index of a small positively oriented loop transversal to the umbilical set."""
    w = winding_number(loop)
    meta = {"samples": len(loop.t), "orientation": "positive (caller-asserted)"}
    meta.update(metadata)
    return IndexReport(loop.label, w, Fraction(-w, 2), meta)


def stokes_decomposition_check(outer: SampledLoop, inner: Sequence[SampledLoop]) -> dict:
    """Compare the outer winding with the sum of windings of the excised loops."""
    w_out = winding_number(outer)
    reports = [umbilical_index(l) for l in inner]
    total = sum(r.winding for r in reports)
    return {
        "outer_winding": w_out,
        "inner_windings": [r.winding for r in reports],
        "inner_indices": [str(r.index) for r in reports],
        "inner_sum": total,
        "index_sum": str(sum((r.index for r in reports), Fraction(0))),
        "holds": w_out == total,
    }
