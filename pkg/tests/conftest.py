import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from umbilic.algebra import GaussianRational, Poly

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_rat = st.fractions(min_value=-5, max_value=5, max_denominator=4)
gaussian = st.builds(GaussianRational, small_rat, small_rat)


@st.composite
def polys(draw, max_terms=4, max_exp=2, params=False, nonzero=False):
    nv = 7 if params else 4
    n = draw(st.integers(1 if nonzero else 0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, max_exp)) for _ in range(nv)) + (0,) * (7 - nv)
        terms[e] = draw(gaussian)
    p = Poly(terms)
    if nonzero and p.is_zero():
        p = Poly.const(1)
    return p


@st.composite
def real_polys(draw, **kw):
    p = draw(polys(**kw))
    return p + p.conjugate()


def sphere_points(count, seed=None):
    from umbilic.experiments import rational_sphere_points

    return rational_sphere_points(count, seed)


# acceptance reporting: one line per criterion in the terminal summary

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _RESULTS.get(n, (title, True))
        _RESULTS[n] = (title, prev[1] and rep.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
