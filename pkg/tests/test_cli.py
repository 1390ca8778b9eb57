from __future__ import annotations

import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from seirqso.calibration import epidemic_days
from seirqso.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main, read_trajectory_csv
from seirqso.core import Params, step
from seirqso.qso import load_tensor

from helpers import UZBEKISTAN

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


@pytest.fixture
def uzbekistan_run(tmp_path):
    code, text = run("simulate", "--config", str(SCENARIOS / "uzbekistan.json"), "--out", str(tmp_path))
    assert code == EXIT_OK
    return tmp_path, json.loads(text)


class TestSimulate:
    def test_summary(self, uzbekistan_run):
        out, summary = uzbekistan_run
        assert abs(summary["peak_day"] - 140) <= 10
        assert summary["m_entry_day"] == 145
        assert summary["bound_ok"] is True
        assert summary["completion_threshold"] == 1 / 34_000_000
        assert json.loads((out / "summary.json").read_text()) == summary

    def test_csv_format(self, uzbekistan_run):
        out, _ = uzbekistan_run
        raw = (out / "trajectory.csv").read_bytes()
        assert raw.startswith(b"n,s,e,i,r\n")
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert len(lines) == 302
        assert lines[1] == "0,0.99999000000000005,0,1.0000000000000001e-05,0"

    def test_csv_round_trip(self, uzbekistan_run):
        out, _ = uzbekistan_run
        with open(out / "trajectory.csv") as fh:
            states = read_trajectory_csv(fh)
        for n in range(len(states) - 1):
            nxt = step(states[n], UZBEKISTAN)
            assert np.abs(np.array(nxt) - states[n + 1]).max() <= 1e-12

    def test_counts_equal_fractions(self, tmp_path):
        frac, counts = tmp_path / "frac", tmp_path / "counts"
        common = ["simulate", "--steps", "200"]
        assert run(*common, "--s0", "0.99999", "--e0", "0", "--i0", "0.00001", "--r0", "0",
                   "--out", str(frac))[0] == EXIT_OK
        assert run(*common, "--counts", "--population", "1000000", "--s0", "999990", "--e0", "0",
                   "--i0", "10", "--r0", "0", "--out", str(counts))[0] == EXIT_OK
        assert (frac / "trajectory.csv").read_bytes() == (counts / "trajectory.csv").read_bytes()

    def test_fixed_point_start(self, tmp_path):
        cfg = tmp_path / "fixed.json"
        cfg.write_text(json.dumps({"s0": 0.4, "e0": 0.0, "i0": 0.0, "r0": 0.6, "steps": 20}))
        code, text = run("simulate", "--config", str(cfg), "--out", str(tmp_path))
        assert code == EXIT_OK
        assert json.loads(text)["peak_day"] == 0
        with open(tmp_path / "trajectory.csv") as fh:
            states = read_trajectory_csv(fh)
        assert (states == states[0]).all()

    def test_flags_override_config(self, tmp_path):
        code, text = run("simulate", "--config", str(SCENARIOS / "uzbekistan.json"), "--steps", "10",
                         "--out", str(tmp_path))
        assert code == EXIT_OK and json.loads(text)["steps"] == 10

    def test_json_format(self, tmp_path):
        assert run("simulate", "--steps", "5", "--format", "json", "--out", str(tmp_path))[0] == EXIT_OK
        doc = json.loads((tmp_path / "trajectory.json").read_text())
        assert doc["columns"] == ["n", "s", "e", "i", "r"] and len(doc["rows"]) == 6
        assert not (tmp_path / "trajectory.csv").exists()

    @pytest.mark.parametrize(
        "extra, fragment",
        [
            (["--beta", "0.8", "--q", "2"], "βq ≤ 1"),
            (["--s0", "0.5"], "simplex"),
            (["--counts", "--population", "100", "--s0", "10", "--i0", "1"], "sum"),
            (["--steps", "-1"], "steps"),
        ],
    )
    def test_invalid_input_exits_2(self, tmp_path, capsys, extra, fragment):
        code, _ = run("simulate", "--out", str(tmp_path), *extra)
        assert code == EXIT_INPUT
        assert fragment in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"gamma": 0.1}))
        assert run("simulate", "--config", str(cfg))[0] == EXIT_INPUT
        assert "gamma" in capsys.readouterr().err


class TestAnalyze:
    def test_sweep_flips_between_03_and_04(self):
        code, text = run("analyze", "--sweep", "0", "1", "0.1")
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["critical_alpha"] == pytest.approx(0.3313253012048193)
        regimes = [r["regime"] for r in doc["reports"]]
        assert len(regimes) == 11
        assert regimes[:4] == ["below"] * 4 and regimes[4:] == ["above"] * 7
        assert all("critical_alpha" not in r for r in doc["reports"])

    def test_alpha_zero(self):
        rep = json.loads(run("analyze", "--alpha", "0")[1])["reports"][0]
        assert (rep["mu1"], rep["mu2"], rep["mu3"]) == pytest.approx((1.0, 0.934, 0.9), abs=1e-15)

    def test_alpha_critical(self):
        rep = json.loads(run("analyze", "--alpha", "critical")[1])["reports"][0]
        assert rep["regime"] == "at" and rep["dims"] == [1, 2, 0]

    def test_inadmissible(self):
        assert run("analyze", "--beta", "0.8", "--q", "2")[0] == EXIT_INPUT


class TestQso:
    def test_admissible(self, capsys):
        code, dump = run("qso")
        assert code == EXIT_OK
        t = load_tensor(dump)
        assert t[0, 1, 0] == pytest.approx(0.44, abs=1e-15)
        report = json.loads(capsys.readouterr().err)
        assert report["passed"] and report["failures"] == []
        assert report["stochasticity"]["worst"]["amount"] <= 1e-15

    def test_inadmissible_still_dumps(self, capsys):
        code, dump = run("qso", "--beta", "0.9", "--q", "2")
        assert code == EXIT_VERIFY
        assert dump.startswith("1 1 1 1\n")
        assert "non-negativity" in capsys.readouterr().err

    def test_boundary_product(self, tmp_path):
        dump_path, report_path = tmp_path / "t.txt", tmp_path / "r.json"
        code, _ = run("qso", "--beta", "1", "--q", "1", "--out", str(dump_path), "--report", str(report_path))
        assert code == EXIT_OK
        assert load_tensor(dump_path.read_text())[0, 1, 0] == 0.0
        assert json.loads(report_path.read_text())["non_negativity"]["passed"]


class TestFit:
    def test_planted_round_trip(self):
        # A grid point of the 5-per-axis default box: a = 0.285, b = 0.075, beta = 0.2.
        planted = Params(beta=0.2, q=1.0, a=0.285, b=0.075)
        peak, _ = epidemic_days(planted, (0.99999, 0, 0.00001, 0), 1 / 34e6, need_completion=False)
        code, text = run("fit", "--target-peak", str(peak), "--resolution", "5")
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["loss"] == 0.0 and doc["evaluated"] == 125

    def test_reported_peak(self):
        doc = json.loads(run("fit", "--target-peak", "140")[1])
        best = Params(**doc["best"])
        peak, _ = epidemic_days(best, (0.99999, 0, 0.00001, 0), 1 / 34e6, need_completion=False)
        assert abs(peak - 140) <= 2

    def test_range_flags(self):
        doc = json.loads(run("fit", "--target-peak", "145", "--a-range", "0.1", "0.1", "1",
                             "--b-range", "0.066", "0.066", "1", "--beta-range", "0.12", "0.12", "1")[1])
        assert doc["best"] == UZBEKISTAN.as_dict() and doc["loss"] == 0.0

    def test_box_file(self, tmp_path):
        box = tmp_path / "box.json"
        box.write_text(json.dumps({"a": [0.1, 0.1, 1], "b": [0.066, 0.066, 1], "beta": [0.1, 0.14, 3]}))
        doc = json.loads(run("fit", "--target-peak", "145", "--box", str(box))[1])
        assert doc["evaluated"] == 3 and doc["best"]["beta"] == pytest.approx(0.12, abs=1e-15)

    def test_grid_too_large(self, capsys):
        code, _ = run("fit", "--target-peak", "140", "--resolution", "101")
        assert code == EXIT_INPUT
        assert "grid too large" in capsys.readouterr().err

    def test_inadmissible_box(self, capsys):
        code, _ = run("fit", "--target-peak", "140", "--q-range", "5", "5", "1")
        assert code == EXIT_INPUT
        assert "admissible" in capsys.readouterr().err

    def test_deterministic(self):
        assert run("fit", "--target-peak", "150", "--resolution", "8") == run(
            "fit", "--target-peak", "150", "--resolution", "8"
        )


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "seirqso", "analyze", "--alpha", "1"], capture_output=True, text=True, cwd=tmp_path
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["reports"][0]["regime"] == "above"


def test_argparse_errors_use_input_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--steps", "many"])
    assert exc.value.code == EXIT_INPUT
