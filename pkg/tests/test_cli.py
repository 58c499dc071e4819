import json
import subprocess
import sys

import pytest

from poisson_rat.cli import main
from poisson_rat.ratfun import RationalMap


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _stable(report):
    return {k: v for k, v in report.items() if k not in ("wall_time", "version")}


@pytest.fixture
def map_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(RationalMap([0], [1]).to_json())
    return str(path)


class TestVerify:
    def test_contour_pass(self, capsys):
        code, out, _ = _run(["verify", "--hierarchy", "contour", "--f-degree", "1",
                             "--N", "2", "--seeds", "0,1"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["status"] == "pass"
        assert {r["check_name"] for r in rep["records"]} >= {
            "skew_symmetry", "closed_form_agreement", "jacobi_defect_contour"}
        for r in rep["records"]:
            assert set(r) == {"check_name", "seed", "status", "measured",
                              "tolerance", "comparison"}

    def test_ansatz_z2(self, capsys):
        code, out, _ = _run(["verify", "--hierarchy", "ansatz", "--f-degree", "2",
                             "--N", "2", "--seeds", "0"], capsys)
        rep = json.loads(out)
        assert code == 0
        assert any(r["check_name"] == "ansatz_jacobiator_nonvanishing" for r in rep["records"])

    def test_deriv_n2_findings(self, capsys):
        code, out, _ = _run(["verify", "--hierarchy", "deriv", "--n", "2",
                             "--N", "2", "--seeds", "3"], capsys)
        rep = json.loads(out)
        assert code == 0
        assert rep["findings"][0]["is_constant"] is False
        assert rep["findings"][0]["corrected_shift"] == [-2.0, 0.0]

    def test_deterministic(self, capsys, tmp_path):
        argv = ["verify", "--hierarchy", "deriv", "--n", "1", "--N", "3",
                "--seeds", "0,1,2"]
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            assert main(argv + ["--json", str(p)]) == 0
        a, b = (json.loads(p.read_text()) for p in paths)
        assert _stable(a) == _stable(b)

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"hierarchy": "contour", "f_coeffs": ["1", "0", "1j"],
                                   "N": 1, "seeds": [4]}))
        code, out, _ = _run(["verify", "--config", str(cfg)], capsys)
        rep = json.loads(out)
        assert code == 0
        assert rep["config"]["f_coeffs"] == [[1, 0], [0, 0], [0, 1]]

    def test_failure_exit_code(self, capsys):
        code, out, _ = _run(["verify", "--hierarchy", "contour", "--N", "1",
                             "--seeds", "0", "--tol", "1e-30"], capsys)
        assert code == 1 and json.loads(out)["status"] == "fail"

    @pytest.mark.parametrize("argv", [
        ["verify", "--hierarchy", "deriv", "--N", "2"],
        ["verify", "--hierarchy", "contour", "--N", "2", "--n", "1"],
        ["verify", "--hierarchy", "contour", "--N", "0"],
        ["verify", "--hierarchy", "contour", "--N", "2", "--f-degree", "1",
         "--f-coeffs", "1,2"],
        ["verify", "--hierarchy", "bogus", "--N", "2"],
        ["verify", "--config", "/nonexistent.json"],
        ["nosuch"],
    ])
    def test_usage_errors(self, argv, capsys):
        code, _, err = _run(argv, capsys)
        assert code == 2 and "usage error" in err


class TestBracket:
    def test_ah(self, map_file, capsys):
        code, out, _ = _run(["bracket", "--method", "ah", "--map", map_file,
                             "--p", "1,0", "--q", "2,0"], capsys)
        d = json.loads(out)
        assert code == 0 and d["method"] == "closed_form"
        assert d["value"][0] == pytest.approx(-0.25)

    def test_contour(self, map_file, capsys):
        code, out, _ = _run(["bracket", "--method", "contour", "--map", map_file,
                             "--p", "1,0", "--q", "2,0"], capsys)
        assert json.loads(out)["value"][0] == pytest.approx(-0.25, abs=1e-12)

    def test_deriv(self, map_file, capsys):
        code, out, _ = _run(["bracket", "--method", "deriv", "--n", "0", "--map", map_file,
                             "--p", "1,0", "--q", "2,0"], capsys)
        assert json.loads(out)["value"][0] == pytest.approx(-0.25)

    def test_at_pole(self, map_file, capsys):
        code, _, err = _run(["bracket", "--method", "contour", "--map", map_file,
                             "--p", "0,0", "--q", "2,0"], capsys)
        assert code == 3 and err.startswith("EvalAtPole")

    def test_bad_point(self, map_file, capsys):
        code, _, _ = _run(["bracket", "--method", "ah", "--map", map_file,
                           "--p", "1", "--q", "2,0"], capsys)
        assert code == 2


class TestDarboux:
    def test_n0(self, capsys):
        code, out, _ = _run(["darboux", "--n", "0", "--N", "3", "--samples", "4"], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["rank"] == 2 and d["nullity"] == 4 and d["casimir_count"] == 4
        assert d["I_Theta"]["abs"] == pytest.approx(1, abs=1e-12)
        assert d["chart"]["is_constant"] and "corrected_chart" not in d

    def test_n2_corrected(self, capsys):
        code, out, _ = _run(["darboux", "--n", "2", "--N", "2", "--samples", "4"], capsys)
        d = json.loads(out)
        assert not d["chart"]["is_constant"]
        assert d["corrected_chart"]["shift"] == [-2.0, 0.0]
        assert d["corrected_chart"]["report"]["is_constant"]


class TestIdentities:
    def test_pass(self, capsys):
        code, out, _ = _run(["identities"], capsys)
        d = json.loads(out)
        assert code == 0 and d["status"] == "pass" and len(d["identities"]) == 9

    def test_perturb(self, capsys, tmp_path):
        path = tmp_path / "sub" / "id.json"
        code = main(["identities", "--perturb", "--json", str(path)])
        d = json.loads(path.read_text())
        assert code == 1 and d["status"] == "fail"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "poisson_rat", "identities"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
