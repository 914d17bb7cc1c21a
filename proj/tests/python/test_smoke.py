import math
import os
from pathlib import Path

import pytest

import stimloss

ROOT = Path(os.environ.get("STIMLOSS_SOURCE_DIR", Path(__file__).resolve().parents[2]))
TABLE1 = ROOT / "datasets" / "table1.json"


def test_median_iqr_conversion():
    mean, sd = stimloss.median_iqr_to_mean_sd(25, 17)
    assert mean == 25
    assert sd == pytest.approx(12.602, abs=5e-4)
    with pytest.raises(ValueError):
        stimloss.median_iqr_to_mean_sd(25, -1)


def test_quantile_and_rails():
    assert stimloss.quantile([1, 2, 3, 4, 5, 6, 7, 8], 0.75) == pytest.approx(6.25)
    assert stimloss.make_rails(5.0, 4) == [1.25, 2.5, 3.75, 5.0]
    assert stimloss.efficiency(243e-6, 331.7e-6) == pytest.approx(0.423, abs=5e-4)


def test_losses():
    entry = stimloss.ChannelEntry(67, 47)
    assert entry.v_load == pytest.approx(3.149)
    fixed = stimloss.loss_fixed(entry, 8.1)
    assert fixed.p_loss == pytest.approx(331.7e-6, abs=0.05e-6)
    assert fixed.efficiency == pytest.approx(0.389, abs=5e-4)

    stepped = stimloss.loss_stepped(stimloss.ChannelEntry(1000, 2.6), [1.25, 2.5, 3.75, 5.0])
    assert stepped.v_supply_used == 3.75
    assert stepped.p_loss == pytest.approx(1.15e-3)

    assert stimloss.loss_ideal(entry).p_loss == 0.0
    subset = [stimloss.ChannelEntry(1000, v) for v in (1, 2, 4)]
    assert [l.p_loss for l in stimloss.loss_global(subset)] == pytest.approx([3e-3, 2e-3, 0.0])

    with pytest.raises(stimloss.ComplianceViolation):
        stimloss.loss_fixed(stimloss.ChannelEntry(100, 60), 5.0)
    with pytest.raises(stimloss.StimlossError):
        stimloss.loss_fixed(stimloss.ChannelEntry(100, 60), 5.0)


def test_samplers():
    xs = stimloss.sample_trunc_normal(19, 17, 50000, seed=1, lower=1)
    assert min(xs) >= 1
    assert sum(xs) / len(xs) > 19
    assert xs == stimloss.sample_trunc_normal(19, 17, 50000, seed=1, lower=1)
    with pytest.raises(stimloss.SamplingInfeasible):
        stimloss.sample_trunc_normal(0, 1, 10, lower=7)

    model = stimloss.fit_kde([0.1, 0.4, 0.5, 0.9, 1.3])
    assert model.bandwidth > 0
    draws = stimloss.sample_kde(model, 0.0, 1000, seed=2)
    assert len(draws) == 1000 and min(draws) >= 0


def test_dataset_summary():
    summary = stimloss.load_dataset_summary(str(TABLE1))
    assert [a["name"] for a in summary["applications"]] == ["V1", "Retina", "iPNS", "PNS"]
    assert len(summary["subjects"]) == 26
    with pytest.raises(stimloss.ConfigError):
        stimloss.load_dataset_summary("/nonexistent.json")


def test_run_small():
    report = stimloss.run(TABLE1, seed=42, n_repeats=50, population_size=20000,
                          yield_sweep=(0.75, 1.0))
    assert len(report["normalized"]) == 20
    fixed = [r for r in report["normalized"] if r["strategy"] == "fixed"]
    assert all(r["eff_ratio"] == 1 and r["ploss_ratio"] == 1 for r in fixed)
    rows = {(r["group"], r["strategy"]): r for r in report["summary_application"]}
    for app in ("V1", "Retina", "iPNS", "PNS"):
        assert rows[(app, "stepped:8")]["median_ploss_W"] <= rows[(app, "fixed")]["median_ploss_W"]
        assert rows[(app, "ideal")]["median_ploss_W"] == 0
    assert math.isfinite(report["v_fixed"][0]["v_fixed_V"])
    with pytest.raises(stimloss.ValidationError):
        stimloss.run(TABLE1, strategies=())
