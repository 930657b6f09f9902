import math

import numpy as np
import pytest

import lsirm


def test_distance_metrics():
    assert lsirm.distance([0, 0], [3, 4]) == pytest.approx(5.0)
    assert lsirm.distance([0, 0], [3, 4], "l1") == pytest.approx(7.0)
    assert lsirm.distance([0, 0], [3, 4], "linf") == pytest.approx(4.0)


def test_rasch_log_likelihood_matches_numpy():
    data, truth = lsirm.simulate("rasch", n=20, items=5, seed=3)
    alpha = np.array(truth["parameters"]["alpha"])
    beta = np.array(truth["parameters"]["beta"])
    eta = alpha[:, None] + beta[None, :]
    expected = np.sum(data * eta - np.logaddexp(0.0, eta))
    got = lsirm.log_likelihood(data, alpha, beta, kernel="none")
    assert got == pytest.approx(expected, rel=1e-12)


def test_missing_cells_are_skipped():
    data = np.array([[1.0, np.nan], [0.0, 1.0]])
    full = lsirm.log_likelihood(np.array([[1, 0], [0, 1]]), [0, 0], [0, 0], kernel="none")
    masked = lsirm.log_likelihood(data, [0, 0], [0, 0], kernel="none")
    assert masked == pytest.approx(full * 3 / 4)


def test_simulate_is_deterministic():
    a, _ = lsirm.simulate("lsirm", n=30, items=6, seed=5)
    b, _ = lsirm.simulate("lsirm", n=30, items=6, seed=5)
    assert a.shape == (30, 6)
    assert np.array_equal(a, b)


def test_fit_summary_and_ppc():
    data, _ = lsirm.simulate("lsirm", n=40, items=6, seed=2)
    result = lsirm.fit(data, iters=600, burnin=300, thin=3, chains=2, seed=7)
    summary = result.summary
    assert summary["kernel"] == "distance"
    assert len(summary["respondent_positions"]) == 40
    assert result.trace("gamma").shape == (2, 100)
    assert np.all(result.trace("sigma2") > 0)
    report = result.ppc(replications=100, seed=1)
    assert len(report["items"]) == 6


def test_fit_rasch_via_fixed_gamma():
    data, _ = lsirm.simulate("rasch", n=30, items=5, seed=4)
    result = lsirm.fit(data, iters=200, burnin=100, thin=1, chains=1, gamma_fixed=0)
    assert result.summary["kernel"] == "none"


def test_select_reports_inclusion():
    data, _ = lsirm.simulate("lsirm", n=40, items=6, seed=8)
    out = lsirm.select(data, iters=300, burnin=100, chains=1, seed=2)
    assert 0.0 <= out["inclusion_probability"] <= 1.0
    assert out["chosen_model"] in ("rasch", "latent_space")


def test_procrustes_recovers_rotation():
    rng = np.random.default_rng(1)
    ref_a = rng.normal(size=(10, 2))
    ref_b = rng.normal(size=(4, 2))
    c, s = math.cos(0.7), math.sin(0.7)
    rot = np.array([[c, -s], [s, c]])
    a, b = lsirm.procrustes(ref_a @ rot + 3.0, ref_b @ rot + 3.0, ref_a, ref_b)
    assert np.allclose(a, ref_a, atol=1e-10)
    assert np.allclose(b, ref_b, atol=1e-10)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        lsirm.fit(np.array([[1, 2], [0, 1]]), iters=10, burnin=5)
    with pytest.raises(ValueError):
        lsirm.fit(np.array([[np.nan, np.nan], [0, 1]]), iters=10, burnin=5)
