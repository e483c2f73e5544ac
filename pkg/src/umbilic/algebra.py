"""Exact polynomial arithmetic over the Gaussian rationals.

Polynomials live in Q(i)[z, w, zb, wb, A, B, eps], where ``zb``/``wb`` are the
formal conjugates of ``z``/``w`` and ``A``, ``B``, ``eps`` are real parameters.
``eps`` may carry a truncation order (``eps_cap``), so the ring is really
Q(i)[...][eps]/(eps^K).

Internally a monomial is a packed integer: one 16-bit field per variable plus a
low field holding the power of ``i`` (0 or 1).  Keeping ``i`` in the key lets
every stored coefficient be a single ``gmpy2.mpq``; products reduce i^2 = -1
on the fly.
"""
from __future__ import annotations

import enum
import itertools
import json
import re
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from gmpy2 import mpq

__all__ = [
    "Var",
    "GaussianRational",
    "Poly",
    "PolyParseError",
    "bidegree_split",
    "fourier_coefficient",
    "Z",
    "W",
    "ZB",
    "WB",
    "A",
    "B",
    "EPS",
]


class Var(enum.IntEnum):
    """Ring variables, in canonical (graded-lex) priority order."""

    z = 0
    w = 1
    zb = 2
    wb = 3
    A = 4
    B = 5
    eps = 6

    @property
    def is_holomorphic(self) -> bool:
        return self in (Var.z, Var.w)

    @property
    def is_antiholomorphic(self) -> bool:
        return self in (Var.zb, Var.wb)

    @property
    def is_parameter(self) -> bool:
        return self >= Var.A


NVARS = len(Var)
GEOMETRIC = (Var.z, Var.w, Var.zb, Var.wb)
_CONJ_VAR = {Var.z: Var.zb, Var.zb: Var.z, Var.w: Var.wb, Var.wb: Var.w}

_BITS = 16
_MASK = (1 << _BITS) - 1
MAX_EXP = (1 << (_BITS - 1)) - 1  # headroom so a single product cannot carry
_SHIFT = [_BITS * (v + 1) for v in range(NVARS)]
_I = 1  # key bit for the imaginary unit
_EPS_SHIFT = _SHIFT[Var.eps]


def _pack(exps: Iterable[int]) -> int:
    key = 0
    for v, e in enumerate(exps):
        if e < 0:
            raise ValueError("negative exponent")
        if e > MAX_EXP:
            raise OverflowError(f"exponent {e} exceeds {MAX_EXP}")
        key |= e << _SHIFT[v]
    return key


def _unpack(mono: int) -> Tuple[int, ...]:
    """Exponent tuple of a key (the ``i`` field is ignored)."""
    return tuple((mono >> s) & _MASK for s in _SHIFT)


def _exp(mono: int, v: int) -> int:
    return (mono >> _SHIFT[v]) & _MASK


def _to_mpq(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            raise TypeError("floating complex values are not exact")
        self.re = Fraction(re) if not isinstance(re, mpq) else Fraction(int(re.numerator), int(re.denominator))
        self.im = Fraction(im) if not isinstance(im, mpq) else Fraction(int(im.numerator), int(im.denominator))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        return x if isinstance(x, GaussianRational) else cls(x)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """|x|^2, exact."""
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0


Scalar = Union[int, Fraction, GaussianRational]


class PolyParseError(ValueError):
    pass


def _scalar_terms(c) -> Dict[int, mpq]:
    if isinstance(c, GaussianRational):
        out = {}
        if c.re:
            out[0] = _to_mpq(c.re)
        if c.im:
            out[_I] = _to_mpq(c.im)
        return out
    if isinstance(c, complex):
        raise TypeError("floating complex values are not exact")
    if isinstance(c, float):
        raise TypeError("floats are not exact; use Fraction")
    q = _to_mpq(c)
    return {0: q} if q else {}


def _cap_min(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class Poly:
    """Immutable multivariate polynomial with Gaussian-rational coefficients.

    Build polynomials from the module-level generators (``Z``, ``W``, ...) with
    ordinary operators, from a mapping ``{exponent tuple: coefficient}``, or by
    parsing text::

        >>> rho0 = -1 + Z * ZB + W * WB
        >>> Poly.parse("-1 + z*zb + w*wb") == rho0
        True
    """

    __slots__ = ("_t", "eps_cap", "_hash", "_maxexp")

    def __init__(self, terms: Optional[Mapping] = None, eps_cap: Optional[int] = None):
        if eps_cap is not None and eps_cap < 0:
            raise ValueError("eps_cap must be nonnegative")
        self._t: Dict[int, mpq] = {}
        self.eps_cap = eps_cap
        self._hash = None
        self._maxexp = None
        if terms:
            acc: Dict[int, mpq] = {}
            for exps, c in terms.items():
                exps = tuple(exps) + (0,) * (NVARS - len(exps))
                mono = _pack(exps)
                for ik, q in _scalar_terms(c).items():
                    k = mono | ik
                    acc[k] = acc.get(k, 0) + q
            self._t = {k: q for k, q in acc.items() if q}
            if eps_cap is not None:
                self._t = {k: q for k, q in self._t.items() if _exp(k, Var.eps) < eps_cap}

    @classmethod
    def _raw(cls, t: Dict[int, mpq], eps_cap: Optional[int]) -> "Poly":
        p = object.__new__(cls)
        p._t = t
        p.eps_cap = eps_cap
        p._hash = None
        p._maxexp = None
        return p

    # -- construction helpers -------------------------------------------------
    @classmethod
    def const(cls, c: Scalar = 1, eps_cap: Optional[int] = None) -> "Poly":
        return cls._raw(_scalar_terms(c), eps_cap)

    @classmethod
    def var(cls, v: Union[Var, str], power: int = 1, eps_cap: Optional[int] = None) -> "Poly":
        v = Var[v] if isinstance(v, str) else Var(v)
        exps = [0] * NVARS
        exps[v] = power
        return cls({tuple(exps): 1}, eps_cap=eps_cap)

    @classmethod
    def zero(cls, eps_cap: Optional[int] = None) -> "Poly":
        return cls._raw({}, eps_cap)

    def with_cap(self, eps_cap: Optional[int]) -> "Poly":
        """Same polynomial with a (possibly stricter) eps truncation order."""
        cap = _cap_min(self.eps_cap, eps_cap)
        if cap is None or cap == self.eps_cap:
            return Poly._raw(self._t, cap)
        limit = cap << _EPS_SHIFT
        epsmask = _MASK << _EPS_SHIFT
        return Poly._raw({k: q for k, q in self._t.items() if (k & epsmask) < limit}, cap)

    truncate = with_cap

    # -- inspection -------------------------------------------------------------
    def __len__(self):
        return len({k & ~_I for k in self._t})

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def terms(self) -> Iterator[Tuple[Tuple[int, ...], GaussianRational]]:
        """Yield ``(exponents, coefficient)`` in canonical order."""
        for mono in self._monomials_sorted():
            yield _unpack(mono), self._coeff_at(mono)

    def as_dict(self) -> Dict[Tuple[int, ...], GaussianRational]:
        return dict(self.terms())

    def _coeff_at(self, mono: int) -> GaussianRational:
        return GaussianRational(self._t.get(mono, 0), self._t.get(mono | _I, 0))

    def coeff(self, exps: Union[Tuple[int, ...], Mapping]) -> GaussianRational:
        if isinstance(exps, Mapping):
            e = [0] * NVARS
            for v, k in exps.items():
                e[Var[v] if isinstance(v, str) else v] = k
            exps = tuple(e)
        exps = tuple(exps) + (0,) * (NVARS - len(exps))
        return self._coeff_at(_pack(exps))

    def _monomials(self):
        return {k & ~_I for k in self._t}

    def _monomials_sorted(self):
        def order(m):
            e = _unpack(m)
            return (sum(e),) + e

        return sorted(self._monomials(), key=order, reverse=True)

    def variables(self) -> set:
        seen = 0
        for k in self._t:
            seen |= k
        return {v for v in Var if (seen >> _SHIFT[v]) & _MASK}

    def degree(self, vars: Optional[Iterable[Var]] = None) -> int:
        """Total degree in ``vars`` (all variables by default); -1 for zero."""
        vs = list(Var) if vars is None else [Var(v) for v in vars]
        if not self._t:
            return -1
        return max(sum(_exp(k, v) for v in vs) for k in self._t)

    def degree_in(self, v: Var) -> int:
        if not self._t:
            return -1
        return max(_exp(k, v) for k in self._t)

    def max_exponent(self) -> int:
        if self._maxexp is None:
            m = 0
            for k in self._t:
                for s in _SHIFT:
                    e = (k >> s) & _MASK
                    if e > m:
                        m = e
            self._maxexp = m
        return self._maxexp

    def is_constant(self) -> bool:
        return all((k & ~_I) == 0 for k in self._t)

    def constant_value(self) -> GaussianRational:
        return self._coeff_at(0)

    def is_real(self) -> bool:
        return self == self.conjugate()

    # -- equality ---------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._t == other._t
        try:
            return self._t == _scalar_terms(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly._raw(_scalar_terms(other), None)

    def __add__(self, other):
        o = self._coerce(other)
        cap = _cap_min(self.eps_cap, o.eps_cap)
        a = self if cap == self.eps_cap else self.with_cap(cap)
        b = o if cap == o.eps_cap else o.with_cap(cap)
        if len(a._t) < len(b._t):
            a, b = b, a
        t = dict(a._t)
        for k, q in b._t.items():
            s = t.get(k)
            if s is None:
                t[k] = q
            else:
                s = s + q
                if s:
                    t[k] = s
                else:
                    del t[k]
        return Poly._raw(t, cap)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({k: -q for k, q in self._t.items()}, self.eps_cap)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        cap = _cap_min(self.eps_cap, o.eps_cap)
        if not self._t or not o._t:
            return Poly._raw({}, cap)
        if self.max_exponent() + o.max_exponent() > MAX_EXP:
            raise OverflowError("exponent overflow in product")
        a, b = self._t, o._t
        if len(a) < len(b):
            a, b = b, a
        t: Dict[int, mpq] = {}
        get = t.get
        complex_mul = any(k & _I for k in a) and any(k & _I for k in b)
        if cap is None and not complex_mul:
            for k2, q2 in b.items():
                for k1, q1 in a.items():
                    k = k1 + k2
                    s = get(k)
                    t[k] = q1 * q2 if s is None else s + q1 * q2
        else:
            limit = None if cap is None else cap << _EPS_SHIFT
            epsmask = _MASK << _EPS_SHIFT
            for k2, q2 in b.items():
                for k1, q1 in a.items():
                    k = k1 + k2
                    if limit is not None and (k & epsmask) >= limit:
                        continue
                    q = q1 * q2
                    if k & 2:  # i*i
                        k -= 2
                        q = -q
                    s = get(k)
                    t[k] = q if s is None else s + q
        return Poly._raw({k: q for k, q in t.items() if q}, cap)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(1, self.eps_cap)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Scalar) -> "Poly":
        return self * Poly.const(c)

    # -- calculus and involutions -----------------------------------------------
    def diff(self, v: Union[Var, str]) -> "Poly":
        """Formal partial derivative."""
        v = Var[v] if isinstance(v, str) else Var(v)
        shift = _SHIFT[v]
        one = 1 << shift
        t = {}
        for k, q in self._t.items():
            e = (k >> shift) & _MASK
            if e:
                t[k - one] = q * e
        return Poly._raw(t, self.eps_cap)

    def conjugate(self) -> "Poly":
        """Swap z<->zb, w<->wb and conjugate every coefficient."""
        sz, sw, szb, swb = (_SHIFT[v] for v in GEOMETRIC)
        keep = ~((_MASK << sz) | (_MASK << sw) | (_MASK << szb) | (_MASK << swb) | _I)
        t = {}
        for k, q in self._t.items():
            ez, ew, ezb, ewb = (k >> sz) & _MASK, (k >> sw) & _MASK, (k >> szb) & _MASK, (k >> swb) & _MASK
            nk = (k & keep) | (ezb << sz) | (ewb << sw) | (ez << szb) | (ew << swb)
            if k & _I:
                t[nk | _I] = -q
            else:
                t[nk] = q
        return Poly._raw(t, self.eps_cap)

    def substitute(self, bindings: Mapping) -> "Poly":
        """Replace variables by polynomials (or scalars); others are kept."""
        bind = {}
        for v, p in bindings.items():
            v = Var[v] if isinstance(v, str) else Var(v)
            bind[v] = p if isinstance(p, Poly) else Poly.const(p)
        if not bind:
            return self
        cap = self.eps_cap
        for p in bind.values():
            cap = _cap_min(cap, p.eps_cap)
        bound = sorted(bind)
        clear = 0
        for v in bound:
            clear |= _MASK << _SHIFT[v]
        powers = {v: [Poly.const(1, cap)] for v in bound}

        def power(v, e):
            lst = powers[v]
            while len(lst) <= e:
                lst.append(lst[-1] * bind[v])
            return lst[e]

        # group terms by the exponents of bound variables
        groups: Dict[Tuple[int, ...], Dict[int, mpq]] = {}
        for k, q in self._t.items():
            sig = tuple((k >> _SHIFT[v]) & _MASK for v in bound)
            groups.setdefault(sig, {})[k & ~clear] = q
        out = Poly.zero(cap)
        for sig, rest in groups.items():
            factor = Poly.const(1, cap)
            for v, e in zip(bound, sig):
                if e:
                    factor = factor * power(v, e)
            out = out + Poly._raw(rest, cap) * factor
        return out

    def eval(self, point: Mapping) -> GaussianRational:
        """Exact value with every occurring variable bound to a scalar."""
        vals = {}
        for v, x in point.items():
            v = Var[v] if isinstance(v, str) else Var(v)
            x = GaussianRational.coerce(x)
            vals[v] = (_to_mpq(x.re), _to_mpq(x.im))
        missing = self.variables() - set(vals)
        if missing:
            raise KeyError(f"unbound variables: {sorted(m.name for m in missing)}")
        used = sorted(self.variables())
        cache: Dict[Tuple[int, int], Tuple[mpq, mpq]] = {}

        def pw(v, e):
            key = (v, e)
            r = cache.get(key)
            if r is None:
                if e == 0:
                    r = (mpq(1), mpq(0))
                else:
                    a, b = pw(v, e - 1)
                    c, d = vals[v]
                    r = (a * c - b * d, a * d + b * c)
                cache[key] = r
            return r

        re_acc, im_acc = mpq(0), mpq(0)
        for k, q in self._t.items():
            a, b = (q, mpq(0)) if not (k & _I) else (mpq(0), q)
            for v in used:
                e = (k >> _SHIFT[v]) & _MASK
                if e:
                    c, d = pw(v, e)
                    a, b = a * c - b * d, a * d + b * c
            re_acc += a
            im_acc += b
        return GaussianRational(re_acc, im_acc)

    def eps_coefficient(self, k: int) -> "Poly":
        """Coefficient of eps^k (a polynomial without eps, no cap)."""
        shift = _EPS_SHIFT
        t = {}
        for key, q in self._t.items():
            if ((key >> shift) & _MASK) == k:
                t[key - (k << shift)] = q
        return Poly._raw(t, None)

    def map_coefficients(self, fn) -> "Poly":
        out = {}
        for exps, c in self.terms():
            c2 = fn(c)
            if c2:
                out[exps] = c2
        return Poly(out, self.eps_cap)

    # -- division -----------------------------------------------------------------
    def exact_div(self, other: "Poly") -> "Poly":
        """Quotient ``self / other``, raising ``ArithmeticError`` if inexact.

        Only meaningful in the untruncated ring (an integral domain).
        """
        if not other._t:
            raise ZeroDivisionError("polynomial division by zero")
        if self.eps_cap is not None or other.eps_cap is not None:
            raise ArithmeticError("exact division is undefined in an eps-truncated ring")
        if not self._t:
            return Poly.zero()
        import heapq

        lm = max(other._monomials())
        lc_re, lc_im = other._t.get(lm, mpq(0)), other._t.get(lm | _I, mpq(0))
        nrm = lc_re * lc_re + lc_im * lc_im
        lm_exps = _unpack(lm)
        rem = dict(self._t)
        heap = [-m for m in {k & ~_I for k in rem}]
        heapq.heapify(heap)
        quot: Dict[int, mpq] = {}
        dterms = list(other._t.items())
        while heap:
            m = -heapq.heappop(heap)
            while heap and -heap[0] == m:
                heapq.heappop(heap)
            a, b = rem.get(m, 0), rem.get(m | _I, 0)
            if not a and not b:
                continue
            e = _unpack(m)
            if any(x < y for x, y in zip(e, lm_exps)):
                raise ArithmeticError("division is not exact")
            qm = m - lm
            # (a + bi) / (c + di)
            qre = (a * lc_re + b * lc_im) / nrm
            qim = (b * lc_re - a * lc_im) / nrm
            for part, qc in ((0, qre), (_I, qim)):
                if not qc:
                    continue
                quot[qm | part] = qc
                for k, q in dterms:
                    nk = k + qm + part
                    v = qc * q
                    if nk & 2:
                        nk -= 2
                        v = -v
                    s = rem.get(nk)
                    if s is None:
                        rem[nk] = -v
                        heapq.heappush(heap, -(nk & ~_I))
                    else:
                        s = s - v
                        if s:
                            rem[nk] = s
                        else:
                            del rem[nk]
        return Poly._raw(quot, None)

    # -- text and json -------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        cap = "" if self.eps_cap is None else f", eps_cap={self.eps_cap}"
        return f"Poly({format_poly(self)!r}{cap})"

    @classmethod
    def parse(cls, text: str, eps_cap: Optional[int] = None) -> "Poly":
        return parse_poly(text, eps_cap)

    def to_json(self) -> list:
        out = []
        for exps, c in self.terms():
            e = {v.name: x for v, x in zip(Var, exps) if x}
            out.append({"c": [c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator], "e": e})
        return out

    @classmethod
    def from_json(cls, data: list, eps_cap: Optional[int] = None) -> "Poly":
        terms = {}
        for item in data:
            rn, rd, inn, ind = item["c"]
            exps = [0] * NVARS
            for name, x in item.get("e", {}).items():
                exps[Var[name]] = int(x)
            c = GaussianRational(Fraction(rn, rd), Fraction(inn, ind))
            key = tuple(exps)
            terms[key] = terms.get(key, GaussianRational(0)) + c
        return cls(terms, eps_cap)


Z = Poly.var(Var.z)
W = Poly.var(Var.w)
ZB = Poly.var(Var.zb)
WB = Poly.var(Var.wb)
A = Poly.var(Var.A)
B = Poly.var(Var.B)
EPS = Poly.var(Var.eps)


# --------------------------------------------------------------------------------
# text grammar
#   poly   := term (('+'|'-') term)*
#   term   := coeff ('*' varpow)* | varpow ('*' varpow)*
#   varpow := var ('^' uint)?
#   coeff  := rat | '(' rat (('+'|'-') rat 'i')? ')'

_VARNAMES = {"z": Var.z, "w": Var.w, "zb": Var.zb, "wb": Var.wb, "A": Var.A, "B": Var.B, "eps": Var.eps}
_TOKEN = re.compile(r"\s*(?:(\d+)|(zb|wb|eps|z|w|A|B)|(.))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace
            break
        if m.group(1) is not None:
            out.append(("int", int(m.group(1))))
        elif m.group(2) is not None:
            out.append(("var", m.group(2)))
        else:
            ch = m.group(3)
            if ch.isspace():
                pos = m.end()
                continue
            if ch not in "+-*/^()i":
                raise PolyParseError(f"unexpected character {ch!r} at {m.start(3)}")
            out.append(("op", ch))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise PolyParseError(f"expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok[1]

    def rat(self) -> Fraction:
        num = self.take("int")
        if self.peek() == ("op", "/"):
            self.take("op", "/")
            den = self.take("int")
            if den == 0:
                raise PolyParseError("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    def coeff(self) -> GaussianRational:
        if self.peek() == ("op", "("):
            self.take("op", "(")
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            re_part = sign * self.rat()
            im_part = Fraction(0)
            if self.peek() == ("op", "i"):  # "(3i)" form
                self.take()
                re_part, im_part = Fraction(0), re_part
            elif self.peek()[0] == "op" and self.peek()[1] in "+-":
                s = 1 if self.take() == "+" else -1
                im_part = s * self.rat()
                self.take("op", "i")
            self.take("op", ")")
            return GaussianRational(re_part, im_part)
        return GaussianRational(self.rat())

    def varpow(self):
        name = self.take("var")
        e = 1
        if self.peek() == ("op", "^"):
            self.take()
            e = self.take("int")
        return _VARNAMES[name], e

    def term(self):
        exps = [0] * NVARS
        c = GaussianRational(1)
        tok = self.peek()
        if tok[0] == "var":
            v, e = self.varpow()
            exps[v] += e
        elif tok[0] == "int" or tok == ("op", "("):
            c = self.coeff()
        else:
            raise PolyParseError(f"unexpected token {tok[1]!r}")
        while self.peek() == ("op", "*"):
            self.take()
            v, e = self.varpow()
            exps[v] += e
        return tuple(exps), c

    def poly(self):
        terms: Dict[Tuple[int, ...], GaussianRational] = {}
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        while True:
            exps, c = self.term()
            terms[exps] = terms.get(exps, GaussianRational(0)) + c * sign
            tok = self.peek()
            if tok[0] is None:
                break
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                sign = 1 if tok[1] == "+" else -1
                continue
            raise PolyParseError(f"unexpected token {tok[1]!r}")
        return terms


def parse_poly(text: str, eps_cap: Optional[int] = None) -> Poly:
    toks = _tokenize(text)
    if not toks:
        raise PolyParseError("empty polynomial")
    return Poly(_Parser(toks).poly(), eps_cap=eps_cap)


def _fmt_rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_poly(p: Poly) -> str:
    """Canonical text form, parseable by :func:`parse_poly`."""
    parts = []
    for exps, c in p.terms():
        mono = "*".join(
            (v.name if e == 1 else f"{v.name}^{e}") for v, e in zip(Var, exps) if e
        )
        neg = False
        if c.im == 0:
            r = c.re
            neg = r < 0
            r = abs(r)
            cs = None if (r == 1 and mono) else _fmt_rat(r)
            if cs is not None and r.denominator != 1:
                cs = f"({cs})"
        else:
            neg = c.re < 0 or (c.re == 0 and c.im < 0)
            if neg:
                c = -c
            sign = "+" if c.im > 0 else "-"
            cs = f"({_fmt_rat(c.re)}{sign}{_fmt_rat(abs(c.im))}i)"
        body = cs if not mono else (mono if cs is None else f"{cs}*{mono}")
        parts.append(("-" if neg else "+", body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, body in parts[1:]:
        out += f" {s} {body}"
    return out


# --------------------------------------------------------------------------------
# bidegree and Fourier decompositions


def bidegree(exps: Tuple[int, ...]) -> Tuple[int, int]:
    return exps[Var.z] + exps[Var.w], exps[Var.zb] + exps[Var.wb]


def bidegree_split(p: Poly) -> Dict[Tuple[int, int], Poly]:
    """Split into components homogeneous in (z, w) and in (zb, wb) separately."""
    sz, sw, szb, swb = (_SHIFT[v] for v in GEOMETRIC)
    parts: Dict[Tuple[int, int], Dict[int, mpq]] = {}
    for k, q in p._t.items():
        bd = (((k >> sz) & _MASK) + ((k >> sw) & _MASK), ((k >> szb) & _MASK) + ((k >> swb) & _MASK))
        parts.setdefault(bd, {})[k] = q
    return {bd: Poly._raw(t, p.eps_cap) for bd, t in sorted(parts.items())}


def fourier_coefficient(p: Poly, k: int) -> Poly:
    """Sum of the bidegree components (a, b) of ``p`` with a - b = k."""
    out = Poly.zero(p.eps_cap)
    for (a, b), comp in bidegree_split(p).items():
        if a - b == k:
            out = out + comp
    return out


def geometric_monomials(degree: int) -> Iterator[Tuple[int, int, int, int]]:
    """All exponent vectors (z, w, zb, wb) of total degree ``degree``."""
    for e in itertools.product(range(degree + 1), repeat=4):
        if sum(e) == degree:
            yield e


def dumps_matrix(rows) -> str:
    """JSON array-of-arrays of polynomial strings."""
    return json.dumps([[format_poly(p) for p in row] for row in rows])


def loads_matrix(text: str):
    return [[parse_poly(s) for s in row] for row in json.loads(text)]
