import json
import subprocess
import sys

import numpy as np
import pytest

from lrtc_tspn.cli import main
from lrtc_tspn.io_config import read_key_values, read_mask, read_tensor, write_csv, write_mask, write_tensor
from lrtc_tspn.patterns import MissingSpec, generate_mask
from lrtc_tspn.solver import SolverConfig, solve
from lrtc_tspn.tensor_core import MaskTensor, Tensor3
from oracles import low_rank_tensor, masked_relative_error

DIMS = (20, 20, 10)


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def truth():
    return low_rank_tensor(DIMS, seed=1)


def pipeline(tmp, truth, pattern="rm", seed=3):
    write_csv(tmp / "data.csv", Tensor3(truth))
    assert run("convert", "--csv", tmp / "data.csv", "--dims", "20,20,10",
               "--out-tensor", tmp / "data.tsr", "--out-mask", tmp / "native.msk") == 0
    assert run("mask", "--dims", "20,20,10", "--pattern", pattern, "--rate", 0.5, "--seed", seed,
               "--out", tmp / "obs.msk", "--native-mask", tmp / "native.msk",
               "--score-out", tmp / "score.msk") == 0
    assert run("impute", "--data", tmp / "data.tsr", "--mask", tmp / "obs.msk",
               "--native-mask", tmp / "native.msk", "--theta0", 0.05, "--beta", 0,
               "--out", tmp / "imputed.tsr", "--report", tmp / "impute.txt") == 0
    assert run("eval", "--truth", tmp / "data.tsr", "--imputed", tmp / "imputed.tsr",
               "--score-mask", tmp / "score.msk", "--report", tmp / "eval.txt") == 0


def test_pipeline_reproduces_in_process_number(tmp_path, truth):
    pipeline(tmp_path, truth)
    report = read_key_values(tmp_path / "eval.txt")
    P = generate_mask(DIMS, MissingSpec("rm", 0.5, 3))
    X = solve(truth, P, SolverConfig(p=0.5, theta=0.05)).X_hat
    err = masked_relative_error(truth, X, P.complement())
    assert err < 0.05
    imputed = read_tensor(tmp_path / "imputed.tsr")
    assert imputed == X
    mae = np.abs(X.data - truth)[~P.as_bool()].mean()
    assert float(report["mae"]) == pytest.approx(mae, rel=1e-12)
    imp = read_key_values(tmp_path / "impute.txt")
    assert imp["converged"] == "true" and float(imp["mae"]) == float(report["mae"])


def test_impute_keeps_observations(tmp_path, truth):
    pipeline(tmp_path, truth, pattern="fm1", seed=8)
    obs = read_mask(tmp_path / "obs.msk").as_bool()
    np.testing.assert_array_equal(read_tensor(tmp_path / "imputed.tsr").data[obs], truth[obs])


def test_impute_fully_observed_has_no_score(tmp_path):
    data = np.arange(1.0, 25.0).reshape(2, 3, 4)
    write_tensor(tmp_path / "d.tsr", Tensor3(data))
    write_mask(tmp_path / "m.msk", MaskTensor.ones(data.shape))
    assert run("impute", "--data", tmp_path / "d.tsr", "--mask", tmp_path / "m.msk",
               "--native-mask", tmp_path / "m.msk", "--out", tmp_path / "o.tsr",
               "--report", tmp_path / "r.json", "--json") == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert "mae" not in rep and rep["converged"] is True
    assert rep["config"]["solver.mu0"] == 1e-5 and rep["theta0"] == 0.1 and rep["beta"] == 2.0


def test_impute_config_file_and_flag_precedence(tmp_path, truth):
    write_tensor(tmp_path / "d.tsr", Tensor3(truth))
    write_mask(tmp_path / "m.msk", generate_mask(DIMS, MissingSpec("rm", 0.3, 0)))
    (tmp_path / "s.cfg").write_text("p=0.3\ntheta0=0.15\nbeta=1.5\nmax_iters=7\n")
    assert run("impute", "--data", tmp_path / "d.tsr", "--mask", tmp_path / "m.msk",
               "--config", tmp_path / "s.cfg", "--max-iters", 5,
               "--alpha", "0.333,0.333,0.334", "--out", tmp_path / "o.tsr",
               "--report", tmp_path / "r.txt") == 0
    rep = read_key_values(tmp_path / "r.txt")
    assert rep["solver.p"] == "0.3" and rep["iterations"] == "5" and rep["solver.alpha"] == "0.333,0.333,0.334"


def test_unknown_flag_usage_on_stderr():
    proc = subprocess.run([sys.executable, "-m", "lrtc_tspn", "mask", "--bogus"], capture_output=True, text=True)
    assert proc.returncode != 0 and "usage:" in proc.stderr and proc.stdout == ""


def test_error_is_one_json_line(tmp_path, capsys):
    (tmp_path / "bad.tsr").write_bytes(b"XXXX" + bytes(28))
    code = run("impute", "--data", tmp_path / "bad.tsr", "--mask", tmp_path / "bad.tsr", "--out", tmp_path / "o.tsr")
    err = capsys.readouterr().err.strip().splitlines()
    assert code == 1 and len(err) == 1
    payload = json.loads(err[0])
    assert payload["error"] == "FormatError" and "offset 0" in payload["message"]


def test_missing_file_error(tmp_path, capsys):
    assert run("eval", "--truth", tmp_path / "nope", "--imputed", tmp_path / "nope",
               "--score-mask", tmp_path / "nope", "--report", tmp_path / "r") == 1
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_eval_json(tmp_path):
    write_tensor(tmp_path / "a.tsr", Tensor3(np.ones((1, 1, 2))))
    write_tensor(tmp_path / "b.tsr", Tensor3(np.array([[[2.0, -2.0]]])))
    write_mask(tmp_path / "m.msk", MaskTensor.ones((1, 1, 2)))
    assert run("eval", "--truth", tmp_path / "a.tsr", "--imputed", tmp_path / "b.tsr",
               "--score-mask", tmp_path / "m.msk", "--report", tmp_path / "r.json", "--json") == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["mae"] == 2.0 and rep["masked_count"] == 2


def test_sweep_command(tmp_path):
    dims = (8, 6, 5)
    write_tensor(tmp_path / "d.tsr", Tensor3(low_rank_tensor(dims, seed=2)))
    (tmp_path / "grid.cfg").write_text(
        "data=d.tsr\np_values=0.5,1.0\ntheta0_values=0.1\nbeta_values=2\n"
        "rates=0.3\npatterns=rm,fm-0\nrepetitions=2\nbase_seed=5\nmax_iters=20\n"
    )
    assert run("sweep", "--config", tmp_path / "grid.cfg", "--out", tmp_path / "s.tsv") == 0
    lines = (tmp_path / "s.tsv").read_text().splitlines()
    assert len(lines) == 9 and lines[0].startswith("index\tpattern")
    assert [ln.split("\t")[7] for ln in lines[1:]] == [str(s) for s in range(5, 13)]


def test_sweep_config_errors(tmp_path, capsys):
    (tmp_path / "g.cfg").write_text("data=x.tsr\nfoo=1\n")
    assert run("sweep", "--config", tmp_path / "g.cfg", "--out", tmp_path / "s.tsv") == 1
    assert "foo" in json.loads(capsys.readouterr().err)["message"]


def test_mask_command_default_native(tmp_path):
    assert run("mask", "--dims", "4,3,2", "--pattern", "fm0", "--rate", 0.5, "--seed", 42,
               "--out", tmp_path / "m.msk", "--score-out", tmp_path / "s.msk") == 0
    m, s = read_mask(tmp_path / "m.msk"), read_mask(tmp_path / "s.msk")
    assert m == generate_mask((4, 3, 2), MissingSpec("fm0", 0.5, 42))
    assert s == m.complement()
