import json

import numpy as np
import pytest

from tasproc.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    main,
    parse_mu0,
    parse_range,
    parse_window,
)
from tasproc.model import IsotropicGaussian, UniformInterval, Window


def run_simulate(tmp_path, name="pat.csv", seed=5, extra=()):
    out = tmp_path / name
    code = main(["simulate", "--alpha", "0.6", "--lambda", "0.4",
                 "--mu0", "uniform:1", "--window=-50:50",
                 "--seed", str(seed), "--out", str(out), *extra])
    assert code == EXIT_OK
    return out


class TestParsers:
    def test_parse_window(self):
        w = parse_window("-1:2,0:5")
        assert w == Window([-1, 0], [2, 5])

    def test_parse_mu0(self):
        assert parse_mu0("uniform:1.5") == UniformInterval(1.5)
        assert parse_mu0("gauss:2:0.7") == IsotropicGaussian(2, 0.7)

    def test_parse_range_inclusive(self):
        grid = parse_range("0.3:1.0:0.1")
        assert len(grid) == 8
        assert grid[0] == 0.3
        assert grid[-1] == 1.0

    def test_help_for_each_subcommand(self, capsys):
        parser = build_parser()
        for cmd in ("simulate", "fit", "gcurve", "replicate"):
            with pytest.raises(SystemExit) as exc:
                parser.parse_args([cmd, "--help"])
            assert exc.value.code == 0
            assert cmd in capsys.readouterr().out


class TestSimulate:
    def test_deterministic_byte_identical(self, tmp_path):
        a = run_simulate(tmp_path, "a.csv")
        b = run_simulate(tmp_path, "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self, tmp_path):
        a = run_simulate(tmp_path, "a.csv", seed=5)
        b = run_simulate(tmp_path, "b.csv", seed=6)
        assert a.read_bytes() != b.read_bytes()

    def test_sidecar_written_with_metadata(self, tmp_path):
        out = run_simulate(tmp_path)
        side = json.loads((tmp_path / "pat.csv.json").read_text())
        assert side["lower"] == [-50.0]
        assert side["metadata"]["seed"] == 5

    def test_invalid_alpha_usage_error(self, tmp_path, capsys):
        code = main(["simulate", "--alpha", "1.2", "--lambda", "0.4",
                     "--mu0", "uniform:1", "--window=-50:50",
                     "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_labels_column(self, tmp_path):
        out = run_simulate(tmp_path, extra=("--labels",))
        header = out.read_text().splitlines()[0]
        assert header == "x,cluster"


class TestFit:
    def test_void_json_contract(self, tmp_path):
        pat = run_simulate(tmp_path)
        out = tmp_path / "fit.json"
        code = main(["fit", "--in", str(pat), "--method", "void",
                     "--mu0", "uniform:1", "--out", str(out)])
        assert code in (EXIT_OK, EXIT_NUMERIC)
        blob = json.loads(out.read_text())
        for key in ("alpha_hat", "lambda_hat", "objective_value", "method",
                    "n_iterations", "converged"):
            assert key in blob
        assert 0 < blob["alpha_hat"] < 1

    def test_void_thinned_uses_sidecar_window(self, tmp_path):
        pat = run_simulate(tmp_path)
        code = main(["fit", "--in", str(pat), "--method", "void-thinned",
                     "--mu0", "uniform:1", "--p", "0.5:1.0:0.25"])
        assert code in (EXIT_OK, EXIT_NUMERIC)

    def test_cluster_sizes_singletons(self, tmp_path, capsys):
        pat = tmp_path / "singles.csv"
        pat.write_text("x,cluster\n" +
                       "".join("%d,c%d\n" % (i, i) for i in range(20)))
        out = tmp_path / "cs.json"
        code = main(["fit", "--in", str(pat), "--window=-5:30",
                     "--method", "cluster-sizes", "--out", str(out)])
        assert code == EXIT_OK
        blob = json.loads(out.read_text())
        assert blob["alpha_hat"] == 1.0
        assert blob["n_clusters"] == 20

    def test_missing_window_and_sidecar(self, tmp_path):
        pat = tmp_path / "orphan.csv"
        pat.write_text("x\n0\n1\n")
        code = main(["fit", "--in", str(pat), "--method", "void",
                     "--mu0", "uniform:1"])
        assert code == EXIT_USAGE

    def test_missing_mu0(self, tmp_path):
        pat = run_simulate(tmp_path)
        code = main(["fit", "--in", str(pat), "--method", "void"])
        assert code == EXIT_USAGE


class TestGcurve:
    def test_writes_empirical_and_analytic_csv(self, tmp_path):
        pat = run_simulate(tmp_path)
        out = tmp_path / "g.csv"
        code = main(["gcurve", "--in", str(pat), "--out", str(out),
                     "--mu0", "uniform:1", "--alpha", "0.6",
                     "--lambda", "0.4"])
        assert code == EXIT_OK
        rows = out.read_text().splitlines()
        assert rows[0] == "r,G"
        vals = np.array([row.split(",") for row in rows[1:]], dtype=float)
        assert np.all(np.diff(vals[:, 0]) > 0)
        assert np.all((vals[:, 1] >= 0) & (vals[:, 1] <= 1))
        analytic = (tmp_path / "g.csv.analytic.csv").read_text().splitlines()
        assert analytic[0] == "r,G"
        assert len(analytic) == len(rows)


class TestReplicate:
    def test_fig3_small_run(self, tmp_path, capsys):
        out = tmp_path / "fig3.csv"
        code = main(["replicate", "fig3", "--reps", "2", "--seed", "1",
                     "--out", str(out)])
        assert code == EXIT_OK
        rows = out.read_text().splitlines()
        assert rows[0] == "p,relative_error"
        assert len(rows) > 5
        assert "relative_error" in capsys.readouterr().out

    def test_table1_small_run(self, tmp_path):
        code = main(["replicate", "table1", "--reps", "1", "--seed", "0",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        assert len(report["rows"]) == 4
        assert (tmp_path / "report.csv").exists()
