import json

import numpy as np
import pytest

from coherence_cs import (
    ConfigError,
    ExperimentConfig,
    IOFailure,
    emit_csv,
    emit_json,
    load_config,
    run_experiment,
    worker_count,
)
from coherence_cs.harness import CSV_COLUMNS, PASS_SLACK


BASE = {
    "model": "lasso",
    "m": 16,
    "n": 32,
    "k": 2,
    "noise": {"kind": "l2_ball", "epsilon": 0.05},
    "lambda": 0.05,
    "trials": 4,
    "seed": 3,
}


def _cfg(**overrides):
    raw = dict(BASE)
    raw.update(overrides)
    return load_config(raw)


# ---------------------------------------------------------------------------
# configuration


def test_load_config_defaults():
    cfg = _cfg()
    assert cfg.signal_structure == "sparse"
    assert cfg.noise_kind == "l2_ball"
    assert cfg.d == 1
    assert cfg.variant == "proof"
    assert cfg.tolerance == 1e-8
    assert not cfg.record_timing


def test_load_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        load_config({**BASE, "mystery": 1})
    with pytest.raises(ConfigError, match="unknown keys in 'solver'"):
        load_config({**BASE, "solver": {"step": 2}})


def test_load_config_missing_required():
    with pytest.raises(ConfigError, match="missing required"):
        load_config({"model": "lasso", "m": 8, "n": 16})


def test_load_config_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(BASE))
    assert load_config(path).m == 16
    with pytest.raises(IOFailure):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_validation_rules():
    with pytest.raises(ConfigError):
        _cfg(model="ridge")
    with pytest.raises(ConfigError):
        _cfg(k=1)  # bound factors need k >= 2
    with pytest.raises(ConfigError):
        _cfg(trials=0)
    with pytest.raises(ConfigError):
        _cfg(noise={"kind": "ds_type", "epsilon": 0.1})  # wrong pairing for lasso
    with pytest.raises(ConfigError):
        load_config({**BASE, "lambda": "equal_epsilon", "noise": {"kind": "l2_ball"}})
    with pytest.raises(ConfigError):
        load_config({**BASE, "lambda": -1.0})
    with pytest.raises(ConfigError):
        _cfg(signal={"magnitude": "uniform", "lo": 2.0, "hi": 1.0})


def test_equal_epsilon_lambda_resolution():
    cfg = load_config({**BASE, "lambda": "equal_epsilon"})
    assert cfg.resolved_lambda == 0.05


def test_group_model_k_counts_blocks():
    cfg = load_config(
        {
            "model": "group_lasso",
            "m": 16,
            "n": 32,
            "k": 2,
            "d": 2,
            "noise": {"kind": "l2_ball", "epsilon": 0.05},
            "lambda": 0.05,
        }
    )
    assert cfg.k == 2
    with pytest.raises(ConfigError, match="block count"):
        load_config(
            {
                "model": "group_lasso",
                "m": 16,
                "n": 32,
                "k": 17,
                "d": 2,
                "noise": {"kind": "l2_ball", "epsilon": 0.05},
                "lambda": 0.05,
            }
        )


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("COHERENCE_CS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("COHERENCE_CS_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.setenv("COHERENCE_CS_THREADS", "0")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.delenv("COHERENCE_CS_THREADS")
    assert worker_count() >= 1


# ---------------------------------------------------------------------------
# experiment runs


def test_smoke_run_records_and_summary():
    records, summary = run_experiment(_cfg())
    assert len(records) == 4
    assert summary["failed_trials"] == 0
    assert summary["converged_trials"] == 4
    assert summary["backend"] in ("python", "compiled")
    for r in records:
        assert r.trial in range(4)
        assert np.isfinite(r.sig_error)
        assert r.wall_ms == 0.0  # record_timing defaults off


def test_epsilon_zero_sparse_signal_reduces_to_constant_bounds():
    # m large enough that the cap mu < 1/3 is reachable by rejection
    cfg = load_config(
        {
            "model": "lasso",
            "m": 256,
            "n": 512,
            "k": 2,
            "noise": {"kind": "none"},
            "lambda": 0.05,
            "trials": 3,
            "seed": 1,
            "matrix": {"coherence_cap": 1.0 / 3.0},
        }
    )
    records, summary = run_experiment(cfg)
    assert summary["condition_strict"]
    bounds = summary["bounds"]
    for r in records:
        assert r.tail_l1 == 0.0  # exactly k-sparse
        assert r.bound_meas == bounds["C2"]
        assert r.bound_sig == bounds["C4"]
        assert r.pass_meas and r.pass_sig


def test_violated_condition_gates_pass_flags():
    # an 8x12 gaussian matrix never has mu < 1/9, so k=5 fails the condition
    records, summary = run_experiment(_cfg(m=8, n=12, k=5, trials=2))
    assert not summary["condition_strict"]
    assert summary["bounds"] is None
    for r in records:
        assert r.pass_meas is None and r.pass_sig is None
        assert r.bound_meas is None and r.bound_sig is None
    assert summary["evaluated_trials_meas"] == 0


def test_record_timing_opt_in():
    records, _ = run_experiment(_cfg(record_timing=True, trials=2))
    assert all(r.wall_ms > 0.0 for r in records)


def test_run_is_deterministic_across_thread_counts(monkeypatch, tmp_path):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("COHERENCE_CS_THREADS", threads)
        records, _ = run_experiment(_cfg(trials=6))
        path = tmp_path / f"t{threads}.csv"
        emit_csv(records, path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_ds_model_uses_correlated_residual_side():
    cfg = load_config(
        {
            "model": "ds_reg",
            "m": 256,
            "n": 512,
            "k": 2,
            "noise": {"kind": "ds_type", "epsilon": 0.05},
            "lambda": 0.05,
            "trials": 2,
            "seed": 5,
            "matrix": {"coherence_cap": 1.0 / 3.0},
        }
    )
    records, summary = run_experiment(cfg)
    for r in records:
        assert r.pass_meas is not None
        # the flag must reflect ds_error, not ||Ah||_2
        assert r.pass_meas == (r.ds_error <= r.bound_meas * (1.0 + PASS_SLACK))


# ---------------------------------------------------------------------------
# emission


def test_emit_csv_shape_and_round_trip(tmp_path):
    records, _ = run_experiment(
        _cfg(m=256, n=512, trials=3, matrix={"coherence_cap": 1.0 / 3.0})
    )
    path = tmp_path / "out.csv"
    emit_csv(records, path)
    lines = path.read_text().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5  # header + 3 rows + trailing newline
    assert lines[-1] == ""
    # recompute the pass flags from the emitted numbers alone
    header = lines[0].split(",")
    for line in lines[1:4]:
        row = dict(zip(header, line.split(",")))
        for err_col, bound_col, flag_col in (
            ("meas_error", "bound_meas", "pass_meas"),
            ("sig_error", "bound_sig", "pass_sig"),
        ):
            err = float(row[err_col])
            bound = float(row[bound_col])
            expected = "true" if err <= bound * (1.0 + PASS_SLACK) else "false"
            assert row[flag_col] == expected


def test_emit_csv_single_record(tmp_path):
    records, _ = run_experiment(_cfg(trials=1))
    path = tmp_path / "one.csv"
    emit_csv(records, path)
    assert path.read_text().count("\n") == 2


def test_emit_csv_empty_is_error(tmp_path):
    path = tmp_path / "never.csv"
    with pytest.raises(ValueError):
        emit_csv([], path)
    assert not path.exists()


def test_emit_csv_io_failure(tmp_path):
    records, _ = run_experiment(_cfg(trials=1))
    with pytest.raises(IOFailure):
        emit_csv(records, tmp_path / "no" / "such" / "dir.csv")


def test_emit_json_summary(tmp_path):
    _, summary = run_experiment(_cfg(trials=2))
    path = tmp_path / "summary.json"
    emit_json(summary, path)
    loaded = json.loads(path.read_text())
    assert loaded["model"] == "lasso"
    assert loaded["trials"] == 2


def test_direct_experiment_config_construction():
    cfg = ExperimentConfig(model="lasso", m=8, n=16, k=2, epsilon=0.1, lam=0.1)
    assert cfg.resolved_lambda == 0.1
    with pytest.raises(ConfigError):
        ExperimentConfig(model="lasso", m=8, n=16, k=2)  # equal_epsilon, eps=0
