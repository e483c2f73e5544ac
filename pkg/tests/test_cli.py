import json
from importlib.resources import files

import numpy as np
import pytest

from umbilic.cli import main
from umbilic.experiments import PINNED_N
from umbilic.topology import SampledLoop

FIX = files("umbilic") / "fixtures"


def fixture(name):
    return str(FIX / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def poly_file(tmp_path):
    def make(text, name="p.poly"):
        p = tmp_path / name
        p.write_text(text + "\n")
        return str(p)

    return make


class TestDetA:
    def test_sphere_reduces_to_zero(self, capsys):
        code, out, _ = run(capsys, "detA", "--rho", fixture("sphere.poly"), "--reduce", "sphere")
        assert code == 0 and out.strip() == "0"

    def test_minor_at_point(self, capsys):
        code, out, _ = run(capsys, "detA", "--rho", fixture("sphere.poly"), "--n", "1", "--minor", "--at", "z=3/5,w=(4/5i)")
        assert code == 0 and out.strip() == "-1"

    def test_D3_sphere_at_point(self, capsys):
        code, out, _ = run(capsys, "detA", "--rho", fixture("sphere.poly"), "--minor", "--at", "z=1,w=0")
        assert code == 0 and out.strip() == "12"

    def test_parse_errors(self, capsys, poly_file):
        code, _, err = run(capsys, "detA", "--rho", poly_file("z*("))
        assert code == 3 and "error" in err
        assert run(capsys, "detA", "--rho", "/nonexistent.poly")[0] == 3
        assert run(capsys, "detA", "--rho", fixture("sphere.poly"), "--at", "q=1")[0] == 3

    def test_not_real(self, capsys, poly_file):
        code, _, err = run(capsys, "detA", "--rho", poly_file("(1i)*z + z*zb"))
        assert code == 2 and "reality" in err

    def test_output_file(self, capsys, tmp_path):
        out = tmp_path / "det.txt"
        code, stdout, _ = run(capsys, "--out", str(out), "detA", "--rho", fixture("sphere.poly"), "--reduce", "sphere")
        assert code == 0 and stdout == "" and out.read_text() == "0\n"


class TestEllipsoid:
    def test_symbolic(self, capsys):
        code, out, _ = run(capsys, "ellipsoid")
        d = json.loads(out)
        assert code == 0 and d["eps0"] == "0" and d["eps1"] == "0"
        assert d["eps2"] == f"{PINNED_N}*z^9*zb^5*A*B" and d["N"] == PINNED_N

    def test_certified(self, capsys):
        code, out, _ = run(capsys, "ellipsoid", "--A", "1", "--B", "1")
        d = json.loads(out)
        assert code == 0 and d["winding"] == 4 and d["verdict"] == "certified"

    def test_degenerate(self, capsys):
        code, out, _ = run(capsys, "ellipsoid", "--A", "1", "--B", "0")
        assert code == 2 and json.loads(out)["verdict"] == "degenerate"
        assert run(capsys, "ellipsoid", "--A", "0", "--B", "0")[0] == 2
        assert run(capsys, "ellipsoid", "--A", "x", "--B", "1")[0] == 3


class TestPerturb:
    def test_certify(self, capsys):
        code, out, _ = run(capsys, "perturb", fixture("ac-example.poly"), "--certify")
        d = json.loads(out)
        assert code == 0 and d["verdict"] == "certified" and d["winding"] == 4

    def test_reject(self, capsys):
        code, out, _ = run(capsys, "perturb", fixture("quadratic.poly"))
        d = json.loads(out)
        assert code == 1 and d["verdict"] == "rejected"
        assert any("vanishes identically" in n for n in d["notes"])

    def test_checks(self, capsys, poly_file):
        ac = fixture("ac-example.poly")
        assert run(capsys, "perturb", ac, "--check", "ac")[:2] == (0, "true\n")
        assert run(capsys, "perturb", poly_file("z^5*zb + z*zb^5"), "--check", "ac")[0] == 1
        code, out, _ = run(capsys, "perturb", poly_file("z^2*zb^6 + z^6*zb^2"), "--check", "ii")
        assert code == 1 and json.loads(out)["offenders"] == [[4, 4]]
        code, out, _ = run(capsys, "perturb", ac, "--check", "circle")
        assert code == 0 and json.loads(out) == {"found": True, "witness": ["1", "0"]}

    def test_scan(self, capsys):
        code, out, err = run(capsys, "perturb", fixture("ac-example.poly"), "--scan", "0.01", "6")
        assert code == 0
        assert out.splitlines()[0].startswith("phi,theta1,theta2")
        assert json.loads(err)["samples"] == 3 * 6 * 6
        assert run(capsys, "perturb", fixture("ac-example.poly"), "--scan", "x", "6")[0] == 3

    def test_pi_scan(self, capsys):
        code, out, _ = run(capsys, "perturb", fixture("ac-example.poly"), "--pi-scan", "16")
        assert code == 0 and json.loads(out)["flagged"] == 4

    def test_deterministic(self, capsys):
        a = run(capsys, "--seed", "0", "perturb", fixture("ac-example.poly"))
        b = run(capsys, "--seed", "0", "perturb", fixture("ac-example.poly"))
        assert a == b


class TestWinding:
    def test_csv(self, capsys, tmp_path):
        loop = SampledLoop.from_function(lambda t: np.exp(3j * t), 64)
        path = tmp_path / "loop.csv"
        path.write_text(loop.to_csv())
        assert run(capsys, "winding", str(path))[:2] == (0, "3\n")

    def test_failures(self, capsys, tmp_path):
        path = tmp_path / "loop.csv"
        t = 2 * np.pi * np.arange(64) / 64
        path.write_text(SampledLoop(t, np.exp(1j * t) - 1).to_csv())
        assert run(capsys, "winding", str(path))[0] == 2
        path.write_text(SampledLoop(t[::8], np.exp(6j * t[::8])).to_csv())
        assert run(capsys, "winding", str(path))[0] == 1
        path.write_text("t,re,im\n0,a,b\n")
        assert run(capsys, "winding", str(path))[0] == 3


class TestVerify:
    @pytest.mark.parametrize("suite", ["transform", "factor", "argp"])
    def test_suites(self, capsys, suite):
        code, out, _ = run(capsys, "verify", suite)
        assert code == 0 and out.strip().endswith("all checks passed")
        assert "FAIL" not in out

    def test_normalform_constants(self, capsys):
        code, out, _ = run(capsys, "verify", "normalform")
        assert code == 0
        assert "c_3 = -9/4096" in out and "c_4 = 81/8388608" in out
