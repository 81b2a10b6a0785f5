import json
import math
import os

import numpy as np
import pytest

import qarcast

FIXTURES = os.environ.get("QARCAST_FIXTURE_DIR", os.path.join(os.path.dirname(__file__), "..", "fixtures"))


def test_methods_listed():
    assert len(qarcast.methods()) == 11
    assert "qar-proot" in qarcast.methods()


def test_intervals_nested_and_ordered():
    y = qarcast.simulate("M1", n=60, seed=3, phi1=0.6)
    pis = qarcast.prediction_intervals(y, method="ar-perc", k=2, levels=[0.9, 0.95], B=200, seed=4)
    assert len(pis) == 4
    for k in (1, 2):
        narrow = next(pi for pi in pis if pi.horizon == k and pi.level == 0.9)
        wide = next(pi for pi in pis if pi.horizon == k and pi.level == 0.95)
        assert wide.lower <= narrow.lower <= narrow.upper <= wide.upper
    again = qarcast.prediction_intervals(y, method="ar-perc", k=2, levels=[0.9, 0.95], B=200, seed=4)
    assert [(p.lower, p.upper) for p in pis] == [(p.lower, p.upper) for p in again]


def test_bj_matches_closed_form():
    y = np.asarray(qarcast.simulate("M1", n=80, seed=5))
    (pi,) = qarcast.prediction_intervals(y, method="bj")
    x = np.column_stack([np.ones(79), y[:-1]])
    coef, rss, *_ = np.linalg.lstsq(x, y[1:], rcond=None)
    sigma = math.sqrt(rss[0] / 79)
    assert pi.upper - pi.lower == pytest.approx(2 * 1.959963984540054 * sigma, rel=1e-10)
    assert pi.point == pytest.approx(coef[0] + coef[1] * y[-1], rel=1e-10)


def test_solver_median_of_sample():
    y = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0])
    coefs, obj = qarcast.solve_qr(np.ones((7, 1)), y, 0.5)
    assert coefs[0] == pytest.approx(3.0)
    assert obj == pytest.approx(np.abs(y - 3.0).sum() / 2)


def test_root_decomposition():
    y = qarcast.simulate("M1", n=50, seed=9)
    d = qarcast.bootstrap_draws(y, method="qar-proot", B=300, seed=2)
    assert d["root_based"]
    total = np.asarray(d["estimation_part"]) + np.asarray(d["innovation_part"])
    assert np.allclose(total, d["values"][0], atol=1e-12)


def test_errors_carry_kind():
    with pytest.raises(qarcast.QarcastError) as info:
        qarcast.prediction_intervals([1.0, 2.0, 3.0], method="ar-perc")
    assert info.value.kind == "SeriesTooShort"


def test_small_experiment():
    cfg = {
        "dgp": {"model": "M1", "phi1": 0.5},
        "n": 30, "horizons": [1], "S": 4, "F": 50, "beta": 0.9, "seed": 1,
        "methods": ["bj", {"method": "ar-perc", "B": 50}],
    }
    rep = qarcast.run_experiment(json.dumps(cfg), workers=2)
    assert len(rep["cells"]) == 2
    for cell in rep["cells"]:
        assert 0.0 <= cell["beta_bar"] <= 1.0


def test_backtest_fixture():
    values, labels = qarcast.load_series_csv(os.path.join(FIXTURES, "semiannual_ar2.csv"))
    assert len(values) == len(labels) == 120
    rep = qarcast.backtest(values, window=50, p=2, methods=["bj", "cb"], seed=3)
    bj = rep["methods"][0]
    assert bj["windows"] == [70, 69, 68, 67]
    assert bj["D_bar"] == pytest.approx(np.mean(np.abs(np.asarray(bj["coverage"]) - 95.0)), abs=1e-12)
