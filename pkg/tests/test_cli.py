import math

import numpy as np
import pytest

from entropybench.cli import (
    CSV_COLUMNS,
    ExperimentConfig,
    UsageError,
    config_from_args,
    build_parser,
    main,
    parse_config_file,
    rows_to_csv,
    run_experiment,
)


def test_csv_schema_and_pass_column():
    cfg = ExperimentConfig(mode="renyi", alpha=2.0, d=4, rank=4, eps=0.1, trials=3, seed=5)
    rows, summary = run_experiment(cfg)
    assert len(rows) == 3
    csv = rows_to_csv(rows)
    lines = csv.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    for r in rows:
        assert r["pass"] == int(float(r["abs_err"]) <= float(r["eps"]))
    assert "coverage" in summary


def test_byte_identical_reruns():
    cfg = ExperimentConfig(mode="renyi", alpha=1.5, d=4, rank=3, eps=0.1, trials=4, seed=9)
    rows1, _ = run_experiment(cfg)
    cfg2 = ExperimentConfig(mode="renyi", alpha=1.5, d=4, rank=3, eps=0.1, trials=4, seed=9)
    rows2, _ = run_experiment(cfg2)
    assert rows_to_csv(rows1) == rows_to_csv(rows2)


def test_different_seeds_differ():
    a = ExperimentConfig(mode="renyi", alpha=1.5, d=4, rank=3, eps=0.1, trials=2, seed=1)
    b = ExperimentConfig(mode="renyi", alpha=1.5, d=4, rank=3, eps=0.1, trials=2, seed=2)
    assert rows_to_csv(run_experiment(a)[0]) != rows_to_csv(run_experiment(b)[0])


def test_explicit_spectrum():
    cfg = ExperimentConfig(
        mode="renyi", alpha=2.0, d=8, spectrum=[0.5, 0.3, 0.2], eps=0.1, trials=2, seed=3
    )
    rows, _ = run_experiment(cfg)
    assert rows[0]["rank"] == 3 and rows[0]["d"] == 8
    assert float(rows[0]["exact"]) == pytest.approx(-math.log(0.38))


def test_log_base_2():
    cfg = ExperimentConfig(
        mode="renyi", alpha=2.0, d=4, spectrum=[0.25] * 4, eps=0.1, trials=1, seed=3,
        log_base="2", ideal=True,
    )
    rows, _ = run_experiment(cfg)
    assert float(rows[0]["estimate"]) == pytest.approx(2.0, abs=1e-9)  # log2(4) bits


def test_vonneumann_modes():
    for approach in ("qsvt", "poly"):
        cfg = ExperimentConfig(
            mode="vonneumann", d=4, spectrum=[0.25] * 4, eps=0.1, trials=2, seed=7,
            approach=approach,
        )
        rows, _ = run_experiment(cfg)
        assert all(r["branch"] == "von_neumann" for r in rows)
        assert float(rows[0]["exact"]) == pytest.approx(math.log(4))


def test_sweep_eps_slope_near_two():
    cfg = ExperimentConfig(
        mode="sweep", var="eps", grid=[0.2, 0.1, 0.05, 0.025], alpha=2.0,
        d=8, spectrum=[0.5, 0.3, 0.2], trials=2, seed=11,
    )
    rows, summary = run_experiment(cfg)
    assert len(rows) == 8
    slope_line = [l for l in summary.splitlines() if "log(shots)" in l][0]
    slope = float(slope_line.split(":")[1].split("+/-")[0])
    assert abs(slope - 2.0) <= 0.3


def test_sweep_requires_three_points():
    cfg = ExperimentConfig(mode="sweep", var="eps", grid=[0.1, 0.05], alpha=2.0, d=4, rank=4)
    with pytest.raises(UsageError, match="grid"):
        run_experiment(cfg)


def test_validate_quick_passes(tmp_path):
    cfg = ExperimentConfig(mode="validate", seed=3, quick=True)
    rows, summary = run_experiment(cfg)
    coverage = sum(r["pass"] for r in rows) / len(rows)
    assert coverage >= 0.9
    assert "PASS" in summary


def test_cli_main_renyi(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(
        [
            "renyi", "--alpha", "2", "--dim", "8", "--spectrum", "0.5,0.3,0.2",
            "--eps", "0.1", "--trials", "2", "--seed", "4", "--out", str(out),
        ]
    )
    assert code == 0
    text = out.read_text()
    assert text.startswith(",".join(CSV_COLUMNS))
    assert text.endswith("\n") and "\r" not in text


def test_cli_usage_error_exit_code():
    assert main(["renyi", "--alpha", "-3", "--dim", "4", "--rank", "4"]) == 1
    assert main(["renyi"]) == 1  # missing required --alpha
    assert main(["sweep", "--var", "eps", "--grid", "0.1,0.05", "--alpha", "2"]) == 1


def test_cli_validate_exit_codes():
    assert main(["validate", "--quick", "--seed", "6"]) == 0


def test_env_seed_fallback(monkeypatch):
    monkeypatch.setenv("ENTROPYBENCH_SEED", "123")
    ns = build_parser().parse_args(["renyi", "--alpha", "2", "--dim", "4", "--rank", "4"])
    cfg = config_from_args(ns)
    assert cfg.seed == 123


def test_config_file_with_cli_override(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# comment\nalpha=2.0\ndim=4\nrank=4\neps=0.2\ntrials=2\nseed=8\n")
    ns = build_parser().parse_args(["renyi", "--alpha", "3", "--config", str(path)])
    cfg = config_from_args(ns)
    assert cfg.alpha == 3.0  # flag wins
    assert cfg.eps == 0.2 and cfg.d == 4 and cfg.seed == 8


def test_config_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("alpha 2.0\n")
    with pytest.raises(UsageError):
        parse_config_file(str(path))


def test_validate_ideal_pure_rows_exact():
    cfg = ExperimentConfig(mode="validate", seed=12, quick=True, ideal=True)
    rows, _ = run_experiment(cfg)
    pure_rows = [r for r in rows if r["rank"] == 1]
    assert pure_rows
    assert all(float(r["abs_err"]) < 1e-6 for r in pure_rows)
    assert sum(r["pass"] for r in rows) == len(rows)  # coverage 1.0


def test_sweep_rank_trend_integer_order():
    # at integer order 3 the shot ledger tracks rank^(2*3-2) = rank^4
    cfg = ExperimentConfig(
        mode="sweep", var="rank", grid=[2.0, 3.0, 4.0], alpha=3.0,
        d=8, rank=2, trials=1, seed=13, ideal=True,
    )
    rows, summary = run_experiment(cfg)
    xs = [math.log(r) for r in (2, 3, 4)]
    ys = [math.log(float(r["ledger_samples"])) for r in rows]
    slope = float(np.polyfit(xs, ys, 1)[0])
    assert abs(slope - 4.0) <= 0.3
    assert "rank exponent 4" in summary


def test_invalid_config_lists_all_offenders():
    cfg = ExperimentConfig(mode="renyi", alpha=-2.0, d=4, rank=9, eps=-0.1, trials=0)
    with pytest.raises(UsageError) as exc:
        run_experiment(cfg)
    msg = str(exc.value)
    for field in ("trials 0", "eps -0.1", "alpha -2.0", "rank/dim pair (9, 4)"):
        assert field in msg


def test_validate_failure_exit_code(monkeypatch):
    import entropybench.cli as cli

    def fake_run(cfg):
        row = {c: 0 for c in CSV_COLUMNS}
        row["pass"] = 0
        return [row] * 10, "forced failure"

    monkeypatch.setattr(cli, "run_experiment", fake_run)
    assert cli.main(["validate", "--quick"]) == 2
