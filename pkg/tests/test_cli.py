"""CLI parsing, exit codes, artifacts, and run-to-run determinism."""

import json
import os

import numpy as np
import pytest

from pdq.cli import parse_args, run
from pdq.io import read_matrix, read_matrix_market, write_matrix_market, write_tensor
from pdq.matrices import DenseMatrix, SparseMatrix
from pdq.tensor import DenseTensor


def cli(argv):
    return run(parse_args(argv))


@pytest.fixture
def low_rank_file(tmp_path):
    rng = np.random.default_rng(1)
    arr = rng.standard_normal((20, 4)) @ rng.standard_normal((4, 20))
    path = tmp_path / "A.mtx"
    write_matrix_market(DenseMatrix(arr), path)
    return str(path)


# -------------------------------------------------------------------- parsing


def test_parse_defaults():
    cfg = parse_args(["factor", "A.mtx", "-k", "10", "--seed", "7"])
    assert cfg.command == "factor"
    assert cfg.solver.rank == 10
    assert cfg.solver.tol == 1e-10
    assert cfg.solver.seed == 7
    assert cfg.solver.init == "svd"
    assert cfg.solver.orthonormalize
    assert cfg.reg.kind == "ridge"
    assert (cfg.reg.lam, cfg.reg.mu, cfg.reg.nu) == (0.0, 0.0, 0.0)


def test_parse_perturb_flags():
    cfg = parse_args(["perturb", "A.mtx", "-k", "5", "--epsilons", "1e-4,1e-3,1e-2"])
    assert cfg.command == "perturb"
    assert cfg.epsilons == [1e-4, 1e-3, 1e-2]
    assert cfg.trials == 5


def test_parse_gen_flags():
    cfg = parse_args(
        ["gen", "--kind", "sparse", "--size", "1000", "--density", "0.10", "--seed", "3",
         "--out", "A.mtx"]
    )
    assert cfg.kind == "sparse"
    assert cfg.size == (1000, 1000)
    assert cfg.density == 0.10
    assert cfg.seed == 3


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        parse_args(["factor", "A.mtx", "-k", "3", "--frobulate"])
    assert err.value.code == 2


def test_missing_rank_exits_2(capsys):
    with pytest.raises(SystemExit) as err:
        parse_args(["factor", "A.mtx"])
    assert err.value.code == 2
    assert "--rank" in capsys.readouterr().err


def test_missing_epsilons_exits_2(capsys):
    with pytest.raises(SystemExit) as err:
        parse_args(["perturb", "A.mtx", "-k", "3"])
    assert err.value.code == 2
    assert "--epsilons" in capsys.readouterr().err


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("PDQ_SEED", "99")
    cfg = parse_args(["factor", "A.mtx", "-k", "2"])
    assert cfg.solver.seed == 99
    monkeypatch.delenv("PDQ_SEED")
    cfg = parse_args(["factor", "A.mtx", "-k", "2"])
    assert cfg.solver.seed == 0


# ------------------------------------------------------------------- commands


def test_factor_writes_artifacts(low_rank_file, tmp_path, capsys):
    out = tmp_path / "fact"
    assert cli(["factor", low_rank_file, "-k", "4", "--out", str(out)]) == 0
    line = capsys.readouterr().out
    assert "objective=" in line and "residual=" in line and "sweeps=" in line
    meta = json.loads((out / "meta.json").read_text())
    assert meta["converged"] is True
    assert meta["residual"] <= 1e-8
    assert (out / "P.mtx").exists() and (out / "D.mtx").exists() and (out / "Q.mtx").exists()


def test_factor_deterministic_artifacts(low_rank_file, tmp_path):
    out1, out2 = tmp_path / "f1", tmp_path / "f2"
    args = ["factor", low_rank_file, "-k", "4", "--seed", "5"]
    assert cli(args + ["--out", str(out1)]) == 0
    assert cli(args + ["--out", str(out2)]) == 0
    for name in ("P.mtx", "D.mtx", "Q.mtx"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    m1 = json.loads((out1 / "meta.json").read_text())
    m2 = json.loads((out2 / "meta.json").read_text())
    m1.pop("timestamp"), m2.pop("timestamp")
    assert m1 == m2


def test_gen_roundtrip_identical(tmp_path):
    path = tmp_path / "S.mtx"
    assert cli(["gen", "--kind", "sparse", "--size", "50", "--density", "0.10",
                "--seed", "3", "--out", str(path)]) == 0
    a = read_matrix(str(path))
    assert isinstance(a, SparseMatrix)
    second = tmp_path / "S2.mtx"
    assert cli(["gen", "--kind", "sparse", "--size", "50", "--density", "0.10",
                "--seed", "3", "--out", str(second)]) == 0
    assert path.read_bytes() == second.read_bytes()


def test_gen_invalid_density_exits_2(tmp_path, capsys):
    rc = cli(["gen", "--kind", "sparse", "--size", "10", "--density", "2.0",
              "--out", str(tmp_path / "x.mtx")])
    assert rc == 2
    assert "density" in capsys.readouterr().err


def test_missing_file_exits_1(tmp_path, capsys):
    rc = cli(["factor", str(tmp_path / "nope.mtx"), "-k", "2", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_malformed_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix array real general\n2 2\n1.0\nbroken\n5.0\n2.0\n")
    rc = cli(["factor", str(bad), "-k", "1", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert ":4:" in capsys.readouterr().err


def test_factor_sym_command(tmp_path, capsys):
    rng = np.random.default_rng(2)
    b = rng.standard_normal((8, 8))
    path = tmp_path / "S.mtx"
    write_matrix_market(DenseMatrix(b.T @ b), path)
    assert cli(["factor-sym", str(path), "-k", "8", "--out", str(tmp_path / "o")]) == 0
    p = read_matrix_market(tmp_path / "o" / "P.mtx")
    q = read_matrix_market(tmp_path / "o" / "Q.mtx")
    assert np.array_equal(q.data, p.data.T)


def test_compare_writes_json_table(low_rank_file, tmp_path):
    out = tmp_path / "cmp"
    assert cli(["compare", low_rank_file, "-k", "4", "--out", str(out)]) == 0
    data = json.loads((out / "compare-report.json").read_text())
    assert data["schema"] == "pdq-report/1"
    assert [r["method"] for r in data["rows"]] == [
        "d-decomposition", "truncated-svd", "qr-rank-k", "lu-full",
    ]


def test_reduce_prints_captured_energy(low_rank_file, tmp_path, capsys):
    out = tmp_path / "red"
    assert cli(["reduce", low_rank_file, "-k", "4", "--out", str(out)]) == 0
    assert "captured-energy=" in capsys.readouterr().out
    assert (out / "column_means.mtx").exists()


def test_perturb_command(tmp_path, low_rank_file, capsys):
    out = tmp_path / "pert"
    rc = cli(["perturb", low_rank_file, "-k", "4", "--epsilons", "1e-3,1e-2,1e-1",
              "--trials", "2", "--out", str(out)])
    assert rc == 0
    assert "fitted-slope=" in capsys.readouterr().out
    data = json.loads((out / "perturb-report.json").read_text())
    assert len(data["d_errors"]) == 3


def test_stability_command(tmp_path, low_rank_file, capsys):
    out = tmp_path / "stab"
    assert cli(["stability", low_rank_file, "-k", "4", "--out", str(out)]) == 0
    assert "alpha=" in capsys.readouterr().out


def test_scaling_command(tmp_path, capsys):
    out = tmp_path / "scal"
    rc = cli(["scaling", "-k", "4", "--sizes", "32,64", "--max-sweeps", "2", "--out", str(out)])
    assert rc == 0
    assert "flop-slope=" in capsys.readouterr().out


def test_scaling_sparse_reports_lu_ratio(tmp_path, capsys):
    out = tmp_path / "scal2"
    rc = cli(["scaling", "-k", "4", "--sizes", "32,64", "--density", "0.2",
              "--max-sweeps", "2", "--out", str(out)])
    assert rc == 0
    assert "lu-flop-ratios=" in capsys.readouterr().out


def test_tucker_command(tmp_path, capsys):
    rng = np.random.default_rng(4)
    t = DenseTensor(rng.standard_normal((4, 5, 3)))
    path = tmp_path / "t.tns"
    write_tensor(t, path)
    out = tmp_path / "tuck"
    rc = cli(["tucker", str(path), "--tucker-ranks", "2,2,2", "--out", str(out)])
    assert rc == 0
    assert (out / "core.tns").exists()
    assert (out / "factor_1.mtx").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["ranks"] == [2, 2, 2]


def test_csv_format_on_gen(tmp_path):
    path = tmp_path / "A.csv"
    assert cli(["gen", "--kind", "low-rank", "--size", "12,9", "-k", "3",
                "--format", "csv", "--out", str(path)]) == 0
    a = read_matrix(str(path))
    assert a.shape == (12, 9)


def test_report_csv_format(tmp_path, low_rank_file):
    out = tmp_path / "stab"
    assert cli(["stability", low_rank_file, "-k", "4", "--format", "csv",
                "--out", str(out)]) == 0
    assert (out / "stability-report.csv").exists()
