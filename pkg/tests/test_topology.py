import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umbilic.algebra import GaussianRational as GR
from umbilic.topology import (
    IndexReport,
    RootOnCircleError,
    SampledLoop,
    UnivariatePoly,
    UnresolvedWindingError,
    ZeroOnCurveError,
    argument_principle_count,
    count_roots_in_unit_disk,
    has_root_on_unit_circle,
    poly_gcd,
    stokes_decomposition_check,
    umbilical_index,
    winding_number,
)


def loop(f, samples=256, **kw):
    return SampledLoop.from_function(f, samples, **kw)


def circle_point(t):
    return np.exp(1j * t)


class TestWinding:
    def test_examples(self):
        assert winding_number(loop(lambda t: np.exp(4j * t), 64)) == 4
        # z^9 zb^5 on |z| = 1
        z = circle_point
        assert winding_number(loop(lambda t: z(t) ** 9 * np.conj(z(t)) ** 5)) == 4
        assert winding_number(loop(lambda t: np.full_like(t, 3 + 1j, dtype=complex))) == 0
        assert winding_number(loop(lambda t: np.exp(-3j * t))) == -3

    def test_off_center_circle(self):
        # z - 1/2 winds once, z - 2 not at all
        assert winding_number(loop(lambda t: circle_point(t) - 0.5)) == 1
        assert winding_number(loop(lambda t: circle_point(t) - 2)) == 0

    @settings(max_examples=25)
    @given(st.integers(-6, 6), st.integers(-6, 6))
    def test_additive(self, a, b):
        f = lambda t: np.exp(1j * a * t) * (2 + np.cos(t))
        g = lambda t: np.exp(1j * b * t)
        wf, wg = winding_number(loop(f)), winding_number(loop(g))
        assert winding_number(loop(lambda t: f(t) * g(t))) == wf + wg == a + b
        assert winding_number(loop(lambda t: np.conj(f(t)))) == -wf

    def test_refinement_resolves_coarse_sampling(self):
        # 16 samples of e^{6it} step by 3pi/4; refinement with func fixes it
        assert winding_number(loop(lambda t: np.exp(6j * t), 16)) == 6

    def test_unresolved_without_func(self):
        t = 2 * np.pi * np.arange(16) / 16
        bare = SampledLoop(t, np.exp(6j * t))
        with pytest.raises(UnresolvedWindingError):
            winding_number(bare)

    def test_budget_exhausted(self):
        with pytest.raises(UnresolvedWindingError):
            winding_number(loop(lambda t: np.exp(200j * t), 16, budget=40))

    def test_zero_on_curve(self):
        with pytest.raises(ZeroOnCurveError):
            winding_number(loop(lambda t: circle_point(t) - 1))
        with pytest.raises(ZeroOnCurveError):
            winding_number(loop(lambda t: np.zeros_like(t, dtype=complex)))

    def test_bad_samples(self):
        with pytest.raises(ValueError):
            SampledLoop(np.array([0.0, 0.0]), np.array([1, 1]))
        with pytest.raises(ValueError):
            SampledLoop(np.array([0.0, 2 * math.pi]), np.array([1, 1]))

    def test_csv_roundtrip(self):
        l = loop(lambda t: np.exp(3j * t) * (1.5 + np.sin(t)), 128)
        back = SampledLoop.from_csv(l.to_csv())
        assert np.array_equal(back.t, l.t) and np.array_equal(back.values, l.values)
        assert winding_number(back) == 3


class TestRootCounting:
    @pytest.mark.parametrize(
        "coeffs,want",
        [
            ([Fraction(-1, 2), 1], 1),
            ([6, -5, 1], 0),
            ([0] * 8 + [1], 8),
            ([1, 0, 0, 5], 3),
            ([5, 0, 0, 1], 0),
            ([GR(0, Fraction(1, 3)), 1], 1),
        ],
    )
    def test_examples(self, coeffs, want):
        p = UnivariatePoly(coeffs)
        assert count_roots_in_unit_disk(p) == want

    def test_circle_root_detection(self):
        assert has_root_on_unit_circle(UnivariatePoly([1, 0, 1]))
        assert not has_root_on_unit_circle(UnivariatePoly([-2, 1]))
        assert has_root_on_unit_circle(UnivariatePoly([GR(0, -1), 1]))
        with pytest.raises(RootOnCircleError):
            count_roots_in_unit_disk(UnivariatePoly([1, 0, 1]))

    def test_gcd(self):
        # (x-1)(x-3) and (x-1)(x+2)
        g = poly_gcd(UnivariatePoly([3, -4, 1]), UnivariatePoly([-2, 1, 1]))
        assert g == UnivariatePoly([-1, 1])

    def test_degenerate_delta(self):
        # |a0| = |an| but not self-reciprocal: (x - 1/2)(x - 2) scaled by i
        p = UnivariatePoly([GR(0, 1), GR(0, Fraction(-5, 2)), GR(0, 1)])
        assert count_roots_in_unit_disk(p) == 1
        # |a0| = |an| = 1 with an interior root pair
        q = UnivariatePoly([1, Fraction(-17, 4), 1])  # roots 4 and 1/4
        assert count_roots_in_unit_disk(q) == 1

    def test_self_reciprocal(self):
        # (x - 1/3)(x - 3)(x - i/2)(x + 2i) is self-reciprocal up to a unit
        roots = [GR(Fraction(1, 3)), GR(3), GR(0, Fraction(1, 2)), GR(0, -2)]
        cs = [GR(1)]
        for r in roots:
            nxt = [GR(0)] * (len(cs) + 1)
            for i, c in enumerate(cs):
                nxt[i + 1] = nxt[i + 1] + c
                nxt[i] = nxt[i] - r * c
            cs = nxt
        assert count_roots_in_unit_disk(UnivariatePoly(cs)) == 2

    def test_random_agree(self):
        rng = random.Random(0)
        checked = 0
        while checked < 100:
            deg = rng.randint(1, 8)
            cs = [GR(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(deg + 1)]
            if not cs[-1]:
                continue
            p = UnivariatePoly(cs)
            if has_root_on_unit_circle(p):
                continue
            exact = count_roots_in_unit_disk(p, cross_check=False)
            assert exact == argument_principle_count(p)
            assert exact == int(np.sum(np.abs(p.numeric_roots()) < 1))
            checked += 1

    def test_numeric_poly(self):
        p = UnivariatePoly([0.25 + 0j, 0, 1.0])
        assert not p.exact
        assert count_roots_in_unit_disk(p) == 2

    def test_reciprocal(self):
        p = UnivariatePoly([GR(1, 2), 3, GR(0, 1)])
        assert p.reciprocal() == UnivariatePoly([GR(0, -1), 3, GR(1, -2)])
        with pytest.raises(ValueError):
            UnivariatePoly([0, 0])


class TestIndex:
    @pytest.mark.parametrize("k,index", [(1, Fraction(-1, 2)), (-2, Fraction(1)), (0, Fraction(0))])
    def test_examples(self, k, index):
        r = umbilical_index(loop(lambda t: 2 * np.exp(1j * k * t), 64), where="test")
        assert r.winding == k and r.index == index
        assert r.metadata["where"] == "test"

    def test_report_validation(self):
        with pytest.raises(ValueError):
            IndexReport("x", 2, Fraction(1))
        assert '"index": "-1/2"' in IndexReport("x", 1, Fraction(-1, 2)).to_json()

    def test_stokes(self):
        # f(z) = z (z - 1/2)(z + 1/2 i) on the unit circle; one small loop per zero
        zeros = [0, 0.5, -0.5j]
        f = lambda z: np.prod([z - a for a in zeros], axis=0)
        outer = loop(lambda t: f(np.exp(1j * t)))
        inner = [loop(lambda t, a=a: f(a + 0.1 * np.exp(1j * t))) for a in zeros]
        out = stokes_decomposition_check(outer, inner)
        assert out["holds"] and out["outer_winding"] == 3
        assert out["inner_windings"] == [1, 1, 1]
        assert out["index_sum"] == "-3/2"

    def test_stokes_missing_zero(self):
        f = lambda z: z * (z - 0.5)
        outer = loop(lambda t: f(np.exp(1j * t)))
        out = stokes_decomposition_check(outer, [loop(lambda t: f(0.1 * np.exp(1j * t)))])
        assert not out["holds"] and out["outer_winding"] == 2
