import json
import subprocess
import sys

import numpy as np
import pytest

from nullproj.cli import main, parse_solver_arg
from nullproj.errors import ConfigError
from nullproj.harness import read_csv
from nullproj.io import read_matrix_csv, write_descriptor, write_matrix_csv, write_omega_csv
from nullproj.signals import gen_low_rank, gen_sensing, gen_sparse_signal, subsample_matrix


@pytest.fixture
def sparse_files(tmp_path):
    op = gen_sensing("gaussian", 30, 60, 1)
    x = gen_sparse_signal(60, 4, 1).values
    write_matrix_csv(tmp_path / "phi.csv", op.matrix)
    write_matrix_csv(tmp_path / "y.csv", op.matrix @ x)
    write_matrix_csv(tmp_path / "x.csv", x)
    write_descriptor(tmp_path / "op.json", op)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


class TestSolverArg:
    def test_forms(self):
        assert parse_solver_arg("omp") == ("omp", {})
        assert parse_solver_arg("lasso:lam_ratio=0.01,tune=true") == (
            "lasso", {"lam_ratio": 0.01, "tune": True})
        assert parse_solver_arg("max_iter=5") == (None, {"max_iter": 5})
        assert parse_solver_arg("inpmat:threshold_source=previous")[1] == {
            "threshold_source": "previous"}

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_solver_arg("lasso:lam_ratio")


class TestRecover:
    def test_matrix_input(self, sparse_files, capsys):
        d = sparse_files
        assert run("recover", "--phi", d / "phi.csv", "--y", d / "y.csv", "--truth", d / "x.csv",
                   "--out-dir", d / "out") == 0
        summary = json.loads((d / "out" / "summary.json").read_text())
        assert summary["snr_db"] > 100 and summary["solver"] == "inpmat"
        est = read_matrix_csv(d / "out" / "estimate.csv")[:, 0]
        assert np.allclose(est, read_matrix_csv(d / "x.csv")[:, 0], atol=1e-8)
        assert (d / "out" / "trace.csv").read_text().startswith("iter,")
        assert json.loads(capsys.readouterr().out) == summary

    def test_descriptor_and_baseline(self, sparse_files):
        d = sparse_files
        assert run("recover", "--operator", d / "op.json", "--y", d / "y.csv", "--solver", "omp",
                   "--sparsity", 4, "--out-dir", d / "o2") == 0

    @pytest.mark.parametrize("extra", [
        [],  # neither --phi nor --operator
        ["--phi", "phi.csv", "--operator", "op.json"],
        ["--phi", "phi.csv", "--solver", "omp"],  # missing --sparsity
        ["--phi", "phi.csv", "--solver", "nosuch"],
        ["--phi", "phi.csv", "--solver", "mimat"],
        ["--phi", "phi.csv", "--solver", "lasso:bogus=1"],
        ["--phi", "missing.csv"],
    ])
    def test_config_errors(self, sparse_files, extra, capsys):
        d = sparse_files
        argv = ["recover", "--y", d / "y.csv", "--out-dir", d / "bad"]
        argv += [d / a if a.endswith((".csv", ".json")) else a for a in extra]
        assert run(*argv) == 2
        assert "error" in capsys.readouterr().err

    def test_shape_mismatch(self, sparse_files):
        d = sparse_files
        write_matrix_csv(d / "short.csv", np.ones(5))
        assert run("recover", "--phi", d / "phi.csv", "--y", d / "short.csv",
                   "--out-dir", d / "bad") == 2


class TestComplete:
    def test_roundtrip(self, tmp_path):
        M = gen_low_rank(12, 14, 2, 3)
        p = subsample_matrix(M, 0.3, 3)
        write_matrix_csv(tmp_path / "a.csv", p.observed)
        write_omega_csv(tmp_path / "omega.csv", p.omega)
        write_matrix_csv(tmp_path / "m.csv", M)
        for solver in ("mimat", "svt", "soft-impute:grid_points=4"):
            out = tmp_path / solver.split(":")[0]
            assert run("complete", "--observed", tmp_path / "a.csv", "--omega",
                       tmp_path / "omega.csv", "--truth", tmp_path / "m.csv", "--solver", solver,
                       "--out-dir", out) == 0
            summary = json.loads((out / "summary.json").read_text())
            assert np.isfinite(summary["rmse"])
            assert read_matrix_csv(out / "estimate.csv").shape == (12, 14)

    def test_errors(self, tmp_path):
        write_matrix_csv(tmp_path / "a.csv", np.ones((3, 3)))
        write_omega_csv(tmp_path / "omega.csv", [(0, 0), (5, 5)])
        assert run("complete", "--observed", tmp_path / "a.csv", "--omega",
                   tmp_path / "omega.csv", "--out-dir", tmp_path) == 2
        write_omega_csv(tmp_path / "omega.csv", [(0, 0)])
        assert run("complete", "--observed", tmp_path / "a.csv", "--omega",
                   tmp_path / "omega.csv", "--solver", "omp", "--out-dir", tmp_path) == 2


class TestBench:
    ARGS = ["--set", "n=40", "--set", "s=3", "--set", "rates=[0.5, 0.7]", "--trials", 2,
            "--solver", "inpmat", "--solver", "omp"]

    def test_outputs(self, tmp_path, capsys):
        out = tmp_path / "b"
        assert run("bench", "snr-vs-rate", *self.ARGS, "--out-dir", out) == 0
        for name in ("spec.json", "records.csv", "timing.csv", "snr-vs-rate.svg"):
            assert (out / name).exists()
        assert len(read_csv(out / "records.csv")) == 2 * 2 * 2
        assert "wrote 8 records" in capsys.readouterr().out

    def test_repeatable_with_seed(self, tmp_path):
        for name in ("a", "b"):
            assert run("bench", "snr-vs-rate", *self.ARGS, "--seed", 7, "--no-plot",
                       "--out-dir", tmp_path / name) == 0
        assert ((tmp_path / "a" / "records.csv").read_bytes()
                == (tmp_path / "b" / "records.csv").read_bytes())

    def test_spec_file_and_shared_override(self, tmp_path):
        spec = {"family": "snr-vs-rate", "n": 40, "s": 3, "rates": [0.5], "trials": 1,
                "solvers": ["lasso", "iht"]}
        (tmp_path / "spec.json").write_text(json.dumps(spec))
        assert run("bench", "snr-vs-rate", "--spec", tmp_path / "spec.json", "--solver",
                   "max_iter=50", "--no-plot", "--out-dir", tmp_path / "o") == 0
        saved = json.loads((tmp_path / "o" / "spec.json").read_text())
        assert all(s["params"] == {"max_iter": 50} for s in saved["solvers"])

    @pytest.mark.parametrize("argv", [
        ["--set", "bogus=1"],
        ["--set", "rates=[]"],
        ["--solver", "mimat"],
        ["--solver", "nonsense_key=3"],
        ["--trials", "0"],
        ["--set", "noequals"],
    ])
    def test_bad_config(self, tmp_path, argv):
        assert run("bench", "snr-vs-rate", *argv, "--out-dir", tmp_path) == 2

    def test_bad_spec_file(self, tmp_path):
        (tmp_path / "s.json").write_text("[1, 2]")
        assert run("bench", "mc-rmse", "--spec", tmp_path / "s.json", "--out-dir", tmp_path) == 2
        (tmp_path / "s.json").write_text('{"family": "mc-rmse"}')
        assert run("bench", "snr-vs-rate", "--spec", tmp_path / "s.json",
                   "--out-dir", tmp_path) == 2

    def test_unknown_family_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("bench", "nope", "--out-dir", tmp_path)
        assert exc.value.code != 0


class TestPhaseAndPlot:
    def test_phase_then_plot(self, tmp_path, capsys):
        out = tmp_path / "p"
        assert run("phase", "--set", "n=30", "--set", "deltas=[0.4, 0.8]", "--set",
                   "rhos=[0.1, 0.5]", "--trials", 2, "--solver", "inpmat", "--out-dir", out) == 0
        assert (out / "grid.csv").exists() and (out / "phase.svg").exists()
        assert "50% contour" in capsys.readouterr().out
        assert run("plot", "--records", out / "records.csv", "--out", tmp_path / "re.svg") == 0
        assert (tmp_path / "re.svg").stat().st_size > 0

    def test_plot_errors(self, tmp_path):
        assert run("plot", "--records", tmp_path / "none.csv", "--out", tmp_path / "x.svg") == 2
        (tmp_path / "bad.csv").write_text("a,b\r\n")
        assert run("plot", "--records", tmp_path / "bad.csv", "--out", tmp_path / "x.svg") == 2


def test_console_script_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nullproj.cli", "plot", "--records",
                           str(tmp_path / "none.csv"), "--out", str(tmp_path / "x.svg")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "error" in proc.stderr
