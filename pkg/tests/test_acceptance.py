"""Acceptance criteria, one test per criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; the terminal summary
prints one PASS/FAIL line per criterion.  Runtime limits are asserted inline.
"""
import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from importlib.resources import files

import pytest

from umbilic.algebra import GaussianRational as GR, Poly, Var
from umbilic.cli import main
from umbilic.experiments import (
    PINNED_N,
    EllipsoidFamily,
    PerturbationSpec,
    ellipsoid_slice_expansion,
    ellipsoid_winding_certificate,
    find_good_circle,
    great_circle_restriction,
    linear_eps_coefficient,
    numeric_circle_winding,
    q0_operator,
    random_real_poly,
    rational_sphere_points,
    sigma_stokes_check,
)
from umbilic.normal_form import (
    NormalFormSurface,
    derive_universal_constant,
    detA_origin_formula,
    origin_det_A,
    origin_det_D,
    random_normal_form,
    rho_from_graph,
)
from umbilic.operators import (
    SPHERE_SELECTOR,
    apply_power,
    build_A,
    build_D,
    field_L,
    poly_det,
    reduce_mod,
    sphere_rho,
)
from umbilic.topology import (
    UnivariatePoly,
    argument_principle_count,
    count_roots_in_unit_disk,
    has_root_on_unit_circle,
)

RHO0 = sphere_rho()
Z, W, ZB, WB = (Poly.var(v) for v in (Var.z, Var.w, Var.zb, Var.wb))
AC = Poly.parse("z^2*wb^2 + zb^2*w^2")
C3 = GR(Fraction(-9, 4096))
C4 = GR(Fraction(81, 8388608))


@contextmanager
def within(seconds):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"took {elapsed:.1f} s, limit {seconds} s"


def random_quartic(seed):
    return random_real_poly(random.Random(seed), 4, nterms=1)


@pytest.mark.criterion(1, "tangency identity L rho = 0")
def test_c01_tangency():
    rng = random.Random(1)
    with within(1):
        for _ in range(10):
            rho = random_real_poly(rng, 4, nterms=4, min_degree=1)
            assert apply_power(field_L(rho), 1, rho).is_zero()


@pytest.mark.criterion(2, "sphere umbilicity det A_3(rho0) = 0 mod rho0")
def test_c02_sphere_umbilical():
    with within(30):
        assert reduce_mod(poly_det(build_A(RHO0, 3)), RHO0, SPHERE_SELECTOR).is_zero()


@pytest.mark.criterion(3, "scaling law 2^25 for A_3 and 2^18 for D_3")
def test_c03_scaling():
    with within(120):
        for rho in (RHO0, RHO0 + random_quartic(3)):
            a = poly_det(build_A(rho, 3))
            assert poly_det(build_A(rho * 2, 3)) == a * 2**25
            d = poly_det(build_D(rho, 3))
            assert poly_det(build_D(rho * 2, 3)) == d * 2**18
        assert not a.is_zero()


@pytest.mark.criterion(4, "coordinate change by H = (z + w^2, w)")
def test_c04_coordinate_change():
    HK = {Var.z: Z + W * W, Var.w: W, Var.zb: ZB + WB * WB, Var.wb: WB}
    with within(120):
        # the sphere, plus a quadric whose det A_3 is not identically zero
        for rho in (RHO0, RHO0 + (Z * Z + ZB * ZB).scale(Fraction(1, 10))):
            lhs = poly_det(build_A(rho.substitute(HK), 3))
            assert lhs == poly_det(build_A(rho, 3)).substitute(HK)
        assert not lhs.is_zero()


@pytest.mark.criterion(5, "rescale by a = 1 + (z + zb)/10 on the sphere")
def test_c05_rescale():
    a = 1 + (Z + ZB).scale(Fraction(1, 10))
    with within(120):
        lhs = poly_det(build_A(a * RHO0, 3))
        rhs = a**25 * poly_det(build_A(RHO0, 3))
        diff = lhs - rhs
        assert not diff.is_zero()  # the identity only holds on M
        for pt in rational_sphere_points(20):
            assert diff.eval(pt) == 0


@pytest.mark.criterion(6, "origin determinant = c_n * binomial determinant, n = 3, 4")
def test_c06_origin_formula():
    rng = random.Random(6)
    with within(180):
        for n, c in ((3, C3), (4, C4)):
            witnesses = [random_normal_form(rng, 8, u_degree=0) for _ in range(5)]
            uc = derive_universal_constant(n, witnesses)
            assert uc.value == c
            for s in witnesses:
                assert origin_det_A(rho_from_graph(s), n) == c * detA_origin_formula(s, n)


@pytest.mark.criterion(7, "Cartan tensor linearity det A_3(0) = c_3 * c")
def test_c07_cartan():
    with within(60):
        values = []
        for c in (GR(0), GR(Fraction(3, 7)), GR(0, 2)):
            s = NormalFormSurface.from_terms({(1, 1): 1, (2, 4): c, (4, 2): c.conjugate()})
            values.append(origin_det_A(rho_from_graph(s), 3))
            assert values[-1] == C3 * c
        # only c = 0 gives an umbilical origin
        assert values[0] == 0 and all(values[1:])


@pytest.mark.criterion(8, "Levi criterion through det D_3")
def test_c08_levi():
    with within(30):
        d = poly_det(build_D(RHO0, 3))
        for pt in rational_sphere_points(20):
            assert d.eval(pt) != 0
        rho = rho_from_graph(NormalFormSurface.from_terms({(2, 2): 1}))
        assert rho.rho == Poly.parse("z^2*zb^2 + (1/2i)*w - (1/2i)*wb")
        assert origin_det_D(rho, 3) == 0


@pytest.mark.criterion(9, "ellipsoid slice expansion and winding 4")
def test_c09_ellipsoid():
    with within(300):
        e0, e1, e2 = ellipsoid_slice_expansion(EllipsoidFamily())
        assert e0.is_zero() and e1.is_zero()
        [(exps, N)] = list(e2.terms())
        assert N.is_real() and N.re.denominator == 1 and N.re > 0
        assert e2 == Poly.parse("z^9*zb^5*A*B").scale(N)
        assert int(N.re) == PINNED_N
        rep = ellipsoid_winding_certificate(EllipsoidFamily(1, 1))
        assert rep.winding == 4


@pytest.mark.criterion(10, "Q0 formula on z^p wb^p and annihilation")
def test_c10_q0():
    with within(30):
        for p in (2, 3, 4, 5):
            coeff = (p + 2) * (p + 1) * p * p * (p - 1) ** 2
            assert q0_operator(Z**p * WB**p) == coeff * Z ** (p + 2) * WB ** (p - 2)
        for a in range(0, 4):
            for b in range(0, 4):
                for mono in (Z**a * ZB**b, W**a * WB**b, Z**a * WB**b):
                    if min(a, b) < 2:
                        assert q0_operator(mono).is_zero()


@pytest.mark.criterion(11, "eps^1 coefficient = det D_3(rho0) * Q0(rho')")
def test_c11_linear_coefficient():
    rng = random.Random(11)
    specs = [AC] + [random_real_poly(rng, 4, nterms=3) for _ in range(2)]
    pts = rational_sphere_points(20)
    with within(300):
        for rp in specs:
            direct, factored = linear_eps_coefficient(PerturbationSpec(rp))
            assert not factored.is_zero()
            for pt in pts:
                assert direct.eval(pt) == factored.eval(pt)


@pytest.mark.criterion(12, "argument principle identity and Schur-Cohn agreement")
def test_c12_argp():
    rng = random.Random(12)
    with within(120):
        Q = q0_operator(AC)
        P, p, m = great_circle_restriction(Q, (1, 0))
        n = count_roots_in_unit_disk(p)
        assert (numeric_circle_winding(P), n, m) == (4, 8, 4)
        done = 0
        while done < 5:
            rp = random_real_poly(rng, 4, nterms=3, max_shift=3)
            Q = q0_operator(rp)
            Z0 = find_good_circle(Q, seed=done) if not Q.is_zero() else None
            if Z0 is None:
                continue
            P, p, m = great_circle_restriction(Q, Z0)
            assert numeric_circle_winding(P) == count_roots_in_unit_disk(p) - m
            done += 1
        checked = 0
        while checked < 100:
            deg = rng.randint(1, 10)
            cs = [GR(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(deg)] + [GR(rng.randint(1, 9))]
            u = UnivariatePoly(cs)
            if has_root_on_unit_circle(u):
                continue
            assert count_roots_in_unit_disk(u, cross_check=False) == argument_principle_count(u)
            checked += 1


@pytest.mark.criterion(13, "end-to-end certificate via the CLI")
def test_c13_certificate(capsys):
    fix = files("umbilic") / "fixtures"
    with within(180):
        code = main(["--seed", "0", "perturb", str(fix / "ac-example.poly"), "--certify"])
        first = capsys.readouterr().out
        rep = json.loads(first)
        assert code == 0 and rep["verdict"] == "certified"
        assert "almost circular: True" in rep["notes"]
        assert rep["hypothesis_ii"]["passed"] and rep["hypothesis_i_prime"]["passed"]
        assert rep["winding"] == 4
        assert main(["--seed", "0", "perturb", str(fix / "ac-example.poly"), "--certify"]) == 0
        assert capsys.readouterr().out == first

        code = main(["--seed", "0", "perturb", str(fix / "quadratic.poly")])
        rep = json.loads(capsys.readouterr().out)
        assert code == 1 and rep["verdict"] == "rejected"
        assert rep["constants"]["Q0"] == "0"
        assert any("Q0(rho') vanishes identically" in n for n in rep["notes"])


@pytest.mark.criterion(14, "winding decomposition on the eps = 0.01 scan")
def test_c14_stokes():
    with within(300):
        res = sigma_stokes_check(PerturbationSpec(AC), 0.01)
        assert res["holds"]
        assert res["outer_winding"] == sum(res["inner_windings"])
        assert res["inner_windings"], "no crossings detected"
        for text, w in zip(res["indices"], res["inner_windings"]):
            d = json.loads(text)
            assert d["winding"] == w and Fraction(d["index"]) == Fraction(-w, 2)
        assert Fraction(res["outer_index"]) == Fraction(-res["outer_winding"], 2)
        assert Fraction(res["index_sum"]) == Fraction(res["outer_index"])
