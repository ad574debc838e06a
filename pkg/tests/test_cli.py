import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

import brwss
from brwss.cli import (FIG1A_HEADER, FIG2_HEADER, PREDICT_HEADER,
                       SAMPLES_HEADER, main, read_csv, write_csv)


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(main, args, catch_exceptions=False)


class TestPredict:
    def test_m_zero_trivial(self, runner):
        res = invoke(runner, ["predict", "--b", "2", "--d", "100", "--rho", "1.5", "--m", "0"])
        assert res.exit_code == 0
        header, rows = res.output.strip().split("\n")[0], res.output.strip().split("\n")[1:]
        assert header == ",".join(PREDICT_HEADER)
        cells = rows[0].split(",")
        assert float(cells[PREDICT_HEADER.index("t_predicted")]) == 0.0
        assert "m=0" in cells[PREDICT_HEADER.index("warnings")]

    def test_slow_prediction_values(self, runner, tmp_path):
        out = tmp_path / "pred.csv"
        res = invoke(runner, ["predict", "--b", "2", "--d", "50", "--rho", "1.5",
                              "--m", "2", "--out", str(out)])
        assert res.exit_code == 0
        header, rows = read_csv(out)
        assert header == PREDICT_HEADER
        t_root = float(rows[0][PREDICT_HEADER.index("t_root")])
        p = brwss.ModelParams.from_rho(2, 50, 1.5)
        assert t_root == pytest.approx(brwss.solve_first_moment(p, 2), rel=1e-12)
        assert (out.parent / (out.name + ".manifest.json")).exists()

    def test_m_range_sweep(self, runner):
        res = invoke(runner, ["predict", "--b", "4", "--d", "200", "--rho", "2",
                              "--m-range", "0:5"])
        assert res.exit_code == 0
        lines = res.output.strip().split("\n")
        assert len(lines) == 7  # header + 6 records

    def test_rho_range_sweep_decreasing_root(self, runner):
        res = invoke(runner, ["predict", "--b", "2", "--d", "300", "--rho-range", "2:5",
                              "--rho-points", "7", "--m", "1"])
        lines = res.output.strip().split("\n")[1:]
        roots = [float(l.split(",")[PREDICT_HEADER.index("t_root")]) for l in lines]
        assert all(a > b for a, b in zip(roots, roots[1:]))

    def test_regime_mismatch_exits_2(self, runner):
        res = runner.invoke(main, ["predict", "--b", "2", "--d", "50", "--rho", "5.0",
                                   "--m", "1", "--regime", "slow"])
        assert res.exit_code == 2

    def test_numeric_failure_exits_3(self, runner, monkeypatch):
        def boom(*a, **k):
            raise brwss.NoRootError("no sign change", (1.0, 2.0), (-1.0, -0.5))
        monkeypatch.setattr("brwss.cli.predict_slow", boom)
        res = runner.invoke(main, ["predict", "--b", "2", "--d", "50", "--rho", "1.5",
                                   "--m", "1", "--regime", "slow"])
        assert res.exit_code == 3

    def test_json_format(self, runner):
        res = invoke(runner, ["predict", "--b", "2", "--d", "50", "--rho", "1.5",
                              "--m", "1", "--format", "json"])
        payload = json.loads(res.output)
        assert payload["records"][0]["regime"] == "slow"
        assert payload["manifest"]["tool_version"] == brwss.__version__

    def test_raw_time_rescales(self, runner):
        common = ["--b", "2", "--d", "40", "--lambda1", "0.5", "--lambda2", "2.0", "--m", "1"]
        res_resc = invoke(runner, ["predict"] + common)
        res_raw = invoke(runner, ["predict"] + common + ["--raw-time"])
        t_resc = float(res_resc.output.strip().split("\n")[1].split(",")[PREDICT_HEADER.index("t_root")])
        t_raw = float(res_raw.output.strip().split("\n")[1].split(",")[PREDICT_HEADER.index("t_root")])
        assert t_raw == pytest.approx(t_resc / 2.0, rel=1e-12)

    def test_ultraslow_regime(self, runner):
        res = invoke(runner, ["predict", "--b", "2", "--d", "400", "--rho", "1.05",
                              "--m", "1", "--regime", "ultraslow"])
        lines = res.output.strip().split("\n")
        cells = lines[1].split(",")
        corr = float(cells[PREDICT_HEADER.index("term_correction")])
        assert corr < 0

    def test_config_file_precedence(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("rho=1.5\nm=3\n# comment\n")
        res = invoke(runner, ["predict", "--b", "2", "--d", "60", "--config", str(cfg)])
        assert res.exit_code == 0
        cells = res.output.strip().split("\n")[1].split(",")
        assert cells[PREDICT_HEADER.index("m")] == "3"
        # explicit flag wins over the file
        res2 = invoke(runner, ["predict", "--b", "2", "--d", "60", "--m", "1",
                               "--config", str(cfg)])
        cells2 = res2.output.strip().split("\n")[1].split(",")
        assert cells2[PREDICT_HEADER.index("m")] == "1"


class TestSimulate:
    def test_deterministic_outputs(self, runner, tmp_path):
        args = ["simulate", "--b", "2", "--d", "10", "--rho", "1.5", "--m", "1",
                "--replicas", "50", "--seed", "7"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert invoke(runner, args + ["--out-dir", str(out1)]).exit_code == 0
        assert invoke(runner, args + ["--out-dir", str(out2)]).exit_code == 0
        assert (out1 / "samples.csv").read_bytes() == (out2 / "samples.csv").read_bytes()
        s1 = json.loads((out1 / "stats.json").read_text())
        s2 = json.loads((out2 / "stats.json").read_text())
        for s in (s1, s2):
            del s["manifest"]["started_at"], s["manifest"]["finished_at"]
        assert s1 == s2

    def test_samples_schema_and_roundtrip(self, runner, tmp_path):
        out = tmp_path / "sim"
        invoke(runner, ["simulate", "--b", "2", "--d", "8", "--rho", "1.5", "--m", "2",
                        "--replicas", "20", "--seed", "3", "--out-dir", str(out)])
        header, rows = read_csv(out / "samples.csv")
        assert header == SAMPLES_HEADER
        assert len(rows) == 20
        stats = json.loads((out / "stats.json").read_text())
        assert stats["manifest"]["master_seed"] == 3
        assert "xoshiro256++" in stats["manifest"]["rng_name"]

    def test_median_close_to_root(self, runner, tmp_path):
        out = tmp_path / "sim"
        invoke(runner, ["simulate", "--b", "2", "--d", "20", "--rho", "1.5", "--m", "1",
                        "--replicas", "400", "--seed", "11", "--out-dir", str(out)])
        stats = json.loads((out / "stats.json").read_text())
        p = brwss.ModelParams.from_rho(2, 20, 1.5)
        t_root = brwss.solve_first_moment(p, 1)
        assert abs(stats["quantiles"]["median"] - t_root) <= 5.0

    def test_full_mode_memory_guard_exits_2(self, runner, tmp_path):
        res = runner.invoke(main, ["simulate", "--b", "2", "--d", "40", "--rho", "1.5",
                                   "--m", "1", "--replicas", "2", "--mode", "full",
                                   "--cover", "--out-dir", str(tmp_path)])
        assert res.exit_code == 2

    def test_cover_flag(self, runner, tmp_path):
        out = tmp_path / "cov"
        res = invoke(runner, ["simulate", "--b", "2", "--d", "4", "--rho", "1.5",
                              "--m", "0", "--replicas", "30", "--seed", "5",
                              "--mode", "full", "--cover", "--out-dir", str(out)])
        assert res.exit_code == 0
        header, rows = read_csv(out / "samples.csv")
        times = [float(r[1]) for r in rows if r[2] == "none"]
        assert len(times) == 30
        assert min(times) > 0


class TestBallotCmd:
    def test_table_with_exact_column(self, runner, tmp_path):
        out = tmp_path / "ballot.csv"
        res = invoke(runner, ["ballot", "--n-grid", "1,10", "--lambda-grid", "1",
                              "--replicas", "20000", "--exact-max-n", "50",
                              "--seed", "4", "--out", str(out)])
        assert res.exit_code == 0
        header, rows = read_csv(out)
        assert header[:5] == ["lambda", "n", "p_mc", "std_err", "normalized"]
        n1 = rows[0]
        assert float(n1[2]) == 1.0  # (n=1, lambda=1) is certain
        for row in rows:
            p_mc, se, p_exact = float(row[2]), float(row[3]), float(row[5])
            assert abs(p_mc - p_exact) <= 4 * max(se, 1e-9)

    def test_invalid_cells_skipped_with_warning_rows(self, runner, tmp_path):
        out = tmp_path / "ballot.csv"
        res = invoke(runner, ["ballot", "--n-grid", "4,100", "--lambda-grid", "3",
                              "--replicas", "1000", "--out", str(out)])
        assert res.exit_code == 0
        header, rows = read_csv(out)
        notes = [r[6] for r in rows]
        assert any("skipped" in n for n in notes)
        manifest = json.loads((tmp_path / "ballot.csv.manifest.json").read_text())
        assert manifest["hypotheses_warnings"]


class TestFigures:
    def test_bundle_schemas_and_monotonicity(self, runner, tmp_path):
        out = tmp_path / "figs"
        res = invoke(runner, ["figures", "--out", str(out), "--fig2-d", "200"])
        assert res.exit_code == 0
        h1a, rows1a = read_csv(out / "fig1a.csv")
        assert h1a == FIG1A_HEADER
        x0s = [float(r[1]) for r in rows1a]
        rs = [float(r[2]) for r in rows1a]
        assert all(a > b for a, b in zip(x0s, x0s[1:]))
        assert all(a < b for a, b in zip(rs, rs[1:]))
        h2, rows2 = read_csv(out / "fig2.csv")
        assert h2 == FIG2_HEADER
        roots = [float(r[1]) for r in rows2]
        assert all(a > b for a, b in zip(roots, roots[1:]))
        manifest = json.loads((out / "figures.manifest.json").read_text())
        assert manifest["config"]["fig2_d"] == 200

    def test_unwritable_directory_exits_2(self, runner, tmp_path):
        # a regular file where a path component should be blocks even root
        blocker = tmp_path / "blocked"
        blocker.write_text("")
        res = runner.invoke(main, ["figures", "--out", str(blocker / "figs")])
        assert res.exit_code == 2


class TestCsvRoundTrip:
    def test_floats_roundtrip_exactly(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = [[1, math.pi, 1e-300], [2, 0.1 + 0.2, float(np.float64(1) / 3)]]
        write_csv(path, ["i", "x", "y"], rows)
        header, got = read_csv(path)
        assert header == ["i", "x", "y"]
        for want_row, got_row in zip(rows, got):
            assert float(got_row[1]) == want_row[1]
            assert float(got_row[2]) == want_row[2]

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["a"], [[1.5]])
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")
