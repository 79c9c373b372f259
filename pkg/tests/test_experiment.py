import csv
import io
import math

import pytest

from rrhpilot.config import ConfigError, ExperimentConfig
from rrhpilot.experiment import COLUMNS, ResultRow, bound_rows, emit_csv, run_experiment, sites_to_match


def test_csv_header_and_rows(tmp_path):
    path = tmp_path / "empty.csv"
    text = emit_csv([], path)
    assert text == ",".join(COLUMNS) + "\n" and path.read_text() == text
    one = emit_csv([ResultRow("bound", "m_max", math.pi)])
    assert len(one.splitlines()) == 2
    row = next(csv.DictReader(io.StringIO(one)))
    assert float(row["value"]) == math.pi and row["N"] == ""


def test_csv_sorted_by_axes():
    rows = [ResultRow("s", "gain", 1.0, axes=dict(N=8, K=2)), ResultRow("s", "gain", 2.0, axes=dict(N=2, K=9)),
            ResultRow("s", "collision_prob", 0.5, axes=dict(N=2, K=9))]
    lines = emit_csv(rows).splitlines()[1:]
    assert [line.split(",")[1] for line in lines] == ["2", "2", "8"]
    assert lines[0].split(",")[-4] == "collision_prob"


def test_row_validation():
    with pytest.raises(ValueError):
        ResultRow("s", "x", 1.0, axes=dict(M=3))
    with pytest.raises(ValueError):
        ResultRow("s", "x", 1.0, stderr=-1)


def _small_gain_cfg(**kw):
    base = dict(scenario="random_random", N=[16, 64], q=[1, 2], Q=2, K=[2, 6, 12], trials=6, seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_gain_sweep_rows():
    rows = run_experiment(_small_gain_cfg())
    gain_opt = [r for r in rows if r.metric == "gain_opt"]
    assert len(gain_opt) == 4
    for r in gain_opt:
        curve = [x.value for x in rows if x.metric == "gain" and x.axes["N"] == r.axes["N"]
                 and x.axes["q"] == r.axes["q"]]
        assert r.value == max(curve)
    assert {r.metric for r in rows} == {"gain", "collision_prob", "gain_opt"}


def test_same_seed_gives_identical_bytes_for_any_job_count(tmp_path):
    a = emit_csv(run_experiment(_small_gain_cfg()), tmp_path / "a.csv")
    b = emit_csv(run_experiment(_small_gain_cfg(jobs=2)), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a == b
    c = emit_csv(run_experiment(_small_gain_cfg(seed=4)))
    assert c != a


def test_sites_to_match():
    rows = run_experiment(ExperimentConfig("sectorized", N=[4, 40, 400], q=[1], Q=1, S=[4], theta=[math.pi / 6],
                                           K=[1, 4, 16, 64], target_N=60, trials=4, seed=0))
    match = [r for r in rows if r.metric == "sites_to_match"]
    assert len(match) == 1 and match[0].value in (4, 40, 400)
    fake = [ResultRow("reference", "gain_opt", 5.0, axes=dict(N=100, q=1, Q=1, S=1, theta=math.pi)),
            ResultRow("x", "gain_opt", 1.0, axes=dict(N=3, q=1, Q=1, S=4, theta=0.5))]
    assert math.isnan(sites_to_match(fake, "x")[0].value)


def test_lattice_rrh_and_lattice_users():
    rows = run_experiment(ExperimentConfig("lattice_rrh", N=[32], Q=1, K=[4, 8], trials=3))
    assert any(r.metric == "gain_opt" for r in rows)
    rows = run_experiment(ExperimentConfig("lattice_users", c=3, beta=[1.0, 2.0], N=[0, 50], trials=3))
    by = {(r.metric, r.axes["beta"], r.axes["N"]): r.value for r in rows}
    assert by[("gain", 1.0, 0)] == 0 and by[("bound_formula", 2.0, 50)] == 0
    assert all(r.axes["K"] == 18 for r in rows)


def test_code_and_phy_rows():
    rows = run_experiment(ExperimentConfig("code_efficiency", L=[5], K=[1, 6, 10]))
    eff = {r.axes["K"]: r.value for r in rows if r.metric == "efficiency"}
    assert eff == {1: 1.0, 6: 5 / 6, 10: 5 / 7}
    rows = run_experiment(ExperimentConfig("phy_validation", M=[1, 64], K=[0, 2], L=[5], ell=[3], trials=300))
    assert len(rows) == 8
    assert all(0 <= r.value <= 1 for r in rows)


def test_invalid_config_raises_named_error():
    cfg = ExperimentConfig("random_random")
    cfg.K = []
    with pytest.raises(ConfigError) as e:
        run_experiment(cfg)
    assert e.value.key == "K"


def test_bound_rows():
    rows = bound_rows(10, [0, 1000])
    assert rows[0].value == pytest.approx(31.41592653589793)
    assert rows[1].value == 0 and rows[2].value > 0
