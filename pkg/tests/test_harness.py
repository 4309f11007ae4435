import numpy as np
import pytest

from pulserecon import PulseSignal
from pulserecon.harness import (
    ExperimentConfig,
    TrialReport,
    loglog_slope,
    rmse,
    run_cell,
    run_experiment,
    simulate,
    summarize,
)


def test_rmse_identical(bump):
    assert rmse(bump, bump) == 0.0


def test_rmse_triangle_vs_zero(tri):
    zero = PulseSignal([0.0, 1.0], [0.0, 0.0])
    # closed form: integral of (1 - |2t - 1|)^2 over (0, 1) is 1/3
    assert rmse(tri, zero) == pytest.approx(np.sqrt(1 / 3), abs=1e-4)


def test_rmse_constant_offset():
    t = np.linspace(0, 1, 1001)
    p = PulseSignal(t, np.where((t > 0) & (t < 1), 1.0, 0.0))
    q = PulseSignal(t, np.where((t > 0) & (t < 1), 1.25, 0.0))
    assert rmse(p, q) == pytest.approx(0.25, rel=2e-3)


def test_rmse_uses_longer_support(tri):
    longer = tri.scaled(time=2.0)
    t = np.linspace(0, 2, 200_001)
    expected = np.sqrt(np.trapezoid((tri(t) - longer(t)) ** 2, t) / 2)
    assert rmse(tri, longer) == pytest.approx(expected, rel=1e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(tau_frac=1.5)
    with pytest.raises(ValueError):
        ExperimentConfig(n=[0, 4])
    with pytest.raises(ValueError):
        ExperimentConfig(mode="batch")


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"d": [2, 3], "n": [16], "trials": 7, "mode": "direct"}')
    cfg = ExperimentConfig.from_json(path, trials=3)
    assert cfg.d == [2, 3] and cfg.n == [16] and cfg.trials == 3 and cfg.mode == "direct"
    path.write_text('{"bogus": 1}')
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(path)


def test_run_cell_count():
    cfg = ExperimentConfig(d=[2], n=[16], trials=25, seed=3)
    reports = run_cell(cfg, 2, 16)
    assert len(reports) == 25
    assert [r.trial for r in reports] == list(range(25))
    assert all(r.rmse >= 0 for r in reports if r.ok)


def test_cells_reproducible_and_exchangeable():
    a = run_experiment(ExperimentConfig(d=[2, 3], n=[8, 32], trials=6, seed=11, mode="direct"))
    b = run_experiment(ExperimentConfig(d=[3, 2], n=[32, 8], trials=6, seed=11, mode="direct"))
    assert a == b
    alone = run_cell(ExperimentConfig(trials=6, seed=11, mode="direct"), 3, 32)
    assert [r for r in a if (r.d, r.N) == (3, 32)] == alone


def test_simulate_outputs_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        cfg = ExperimentConfig(d=[2], n=[8, 16], trials=10, seed=5, out=str(tmp_path / name))
        simulate(cfg)
        outs.append((tmp_path / name / "reports.csv").read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header == "cell,d,N,trial,outcome,Tp_hat,rmse"
    summary = (tmp_path / "a" / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("cell,d,N,median,q1,q3,fail_prob")
    assert len(summary) == 3


def test_summarize_identical_errors():
    reports = [TrialReport(2, 64, k, True, 1.0, 0.125) for k in range(9)]
    (s,) = summarize(reports)
    assert s.median == 0.125 and s.iqr == 0.0 and s.fail_prob == 0.0
    assert s.whisker_lo == s.whisker_hi == 0.125


def test_summarize_failure_probability():
    reports = [TrialReport(2, 8, k, k >= 250, 1.0, 0.1, "" if k >= 250 else "nn_crust") for k in range(1000)]
    (s,) = summarize(reports)
    assert s.fail_prob == 0.25
    assert s.n_ok == 750


def test_summarize_all_failed():
    (s,) = summarize([TrialReport(2, 8, 0, False, stage="orient")])
    assert s.fail_prob == 1.0 and np.isnan(s.median)


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_loglog_slope():
    ns = np.array([32, 128, 512, 2048])
    assert loglog_slope(ns, 3.0 * ns**-0.5) == pytest.approx(-0.5)


def test_failure_probability_drops_with_n():
    """One-sided two-proportion test: failures at N=64 are fewer than at N=8."""
    reports = run_experiment(ExperimentConfig(d=[2], n=[8, 64], trials=200, seed=1, mode="direct"))
    small, large = summarize(reports)
    p1, p2, n = small.fail_prob, large.fail_prob, 200
    pooled = (p1 + p2) / 2
    z = (p1 - p2) / np.sqrt(2 * pooled * (1 - pooled) / n)
    assert z > 1.645


def test_median_rmse_decreases_with_n():
    reports = run_experiment(ExperimentConfig(d=[2], n=[1000, 10_000], trials=10, seed=2))
    small, large = summarize(reports)
    assert large.median < small.median
