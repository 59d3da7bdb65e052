import json
from pathlib import Path

import pytest

from jetsuff.cli import main

GERMS = Path(__file__).resolve().parent.parent / "germs"


def run_cli(*args):
    return main([str(a) for a in args])


class TestExitCodes:
    def test_check_holds(self, tmp_path):
        code = run_cli("--germ", GERMS / "x2.json", "--cmd", "check",
                       "--out", tmp_path)
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["estimate"]["verdict"] == "holds"
        assert doc["estimate"]["C_hat"] == pytest.approx(2.0, abs=0.02)
        assert (tmp_path / "annuli.csv").exists()

    def test_check_fails_with_sequence(self, tmp_path):
        code = run_cli("--germ", GERMS / "x3.json", "--cmd", "check",
                       "--out", tmp_path)
        assert code == 2
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["estimate"]["verdict"] == "fails"
        assert doc["violation_sequence"] is not None

    def test_exponent(self, tmp_path):
        code = run_cli("--germ", GERMS / "x2.json", "--cmd", "exponent",
                       "--out", tmp_path)
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["fitted_exponent"] == pytest.approx(1.0, abs=0.05)

    def test_corollary_pass_and_fail(self, tmp_path):
        assert run_cli("--germ", GERMS / "x2.json", "--pair",
                       GERMS / "x2_plus_x4.json", "--cmd", "corollary",
                       "--out", tmp_path / "a") == 0
        assert run_cli("--germ", GERMS / "x2.json", "--pair",
                       GERMS / "x2_plus_x.json", "--cmd", "corollary",
                       "--out", tmp_path / "b") == 2

    def test_malformed_germ_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli("--germ", bad, "--cmd", "check", "--out", tmp_path) == 1

    def test_missing_pair(self, tmp_path):
        assert run_cli("--germ", GERMS / "x2.json", "--cmd", "corollary",
                       "--out", tmp_path) == 1


def _strip_timestamp(path: Path) -> str:
    doc = json.loads(path.read_text())
    doc.pop("timestamp")
    return json.dumps(doc, sort_keys=True)


class TestDeterminism:
    @pytest.mark.parametrize("args", [
        ("--cmd", "check"),
        ("--cmd", "exponent"),
    ])
    def test_reports_byte_identical_modulo_timestamp(self, tmp_path, args):
        # identical invocations, same output directory
        assert run_cli("--germ", GERMS / "x2.json", *args, "--seed", 7,
                       "--out", tmp_path) in (0, 2)
        first = _strip_timestamp(tmp_path / "report.json")
        assert run_cli("--germ", GERMS / "x2.json", *args, "--seed", 7,
                       "--out", tmp_path) in (0, 2)
        assert first == _strip_timestamp(tmp_path / "report.json")

    def test_csv_identical(self, tmp_path):
        for d in ("r1", "r2"):
            run_cli("--germ", GERMS / "x3.json", "--cmd", "check", "--seed", 3,
                    "--out", tmp_path / d)
        assert ((tmp_path / "r1" / "annuli.csv").read_bytes()
                == (tmp_path / "r2" / "annuli.csv").read_bytes())

    def test_report_carries_provenance(self, tmp_path):
        run_cli("--germ", GERMS / "x2.json", "--cmd", "check", "--out", tmp_path)
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["config_hash"]
        assert doc["version"]
