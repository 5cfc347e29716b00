import math

import pytest

import emgrl


QUICK = {
    "corpus": {"synthetic": {"farms": 3, "length": 700}},
    "window": 16,
    "pretrain": {"epochs": 1, "samples_per_epoch": 100},
    "pool": [{"kind": "persistence"}, {"kind": "autoregressive", "order": 2}],
    "agent": {"steps": 200},
    "repetitions": 1,
    "seed": 3,
}


def test_metrics():
    assert emgrl.mae([0.0, 2.0], [1.0, 1.0]) == 1.0
    assert emgrl.rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5))
    assert emgrl.improvement_pct(1.0509, 1.1520) == pytest.approx(8.776, abs=1e-3)
    assert emgrl.improvement_pct(0.1435, 0.1550) == pytest.approx(7.419, abs=1e-3)


def test_one_hot_weights_select_a_forecast():
    assert emgrl.ensemble_predict([0.2, 0.7, 0.4], [0.0, 1.0, 0.0]) == 0.7


def test_knn_graph():
    farms = [("f0", 0.0, 0.0), ("f1", 0.0, 1.0), ("f3", 0.0, 3.0)]
    assert emgrl.knn_graph(farms, 1) == [[1], [0], [1]]
    assert emgrl.haversine_km(0, 0, 0, 1) == pytest.approx(111.195, rel=1e-4)


def test_synthetic_corpus_is_seeded():
    a = emgrl.synthetic(QUICK)
    b = emgrl.synthetic(QUICK)
    assert a["series"] == b["series"]
    assert len(a["farms"]) == 3
    assert len(a["regimes"]) == 700
    assert all(min(v) == 0.0 and max(v) == 1.0 for v in a["series"].values())


def test_invalid_config_raises():
    with pytest.raises(emgrl.ConfigError):
        emgrl.resolve_config({"agent": {"discount": 2.0}})
    assert emgrl.resolve_config(QUICK)["seed"] == 3


def test_gradient_suite_passes():
    results = emgrl.gradient_suite(points=5, seed=1)
    assert results and all(r["passed"] for r in results)


def test_experiment_report():
    report = emgrl.run_experiment(QUICK)
    assert report["format"] == "emgrl.report"
    assert report == emgrl.run_experiment(QUICK)


def test_cli_exit_codes():
    code, out, _ = emgrl.run_cli(["--help"])
    assert code == 0 and "compare" in out
    code, _, _ = emgrl.run_cli(["--bogus"])
    assert code == 2
