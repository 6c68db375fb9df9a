"""Smoke tests for the python extension module."""

import math

import numpy as np
import pytest

import sigre


def test_time_augment_shape():
    values = np.array([[5.0], [7.0]])
    out = sigre.time_augment(values)
    assert out.shape == (2, 2)
    assert out[0, 0] == 0.0
    assert out[1, 0] == 1.0
    assert out[0, 1] == 5.0


def test_median_pairwise_sq_dist():
    values = np.array([[0.0], [1.0], [2.0]])
    assert sigre.median_pairwise_sq_dist(values) == pytest.approx(1.0)


def test_signature_kernel_bessel_value():
    seg = np.array([[0.0], [1.0]])
    value = sigre.signature_kernel(
        seg, seg, static_kernel="linear", dyadic_order=4, time_augment=False
    )
    i0_2 = sum(1.0 / math.factorial(m) ** 2 for m in range(25))
    assert value == pytest.approx(i0_2, rel=1e-3)


def test_signature_kernel_matches_truncated_oracle():
    rng = np.random.default_rng(7)
    x = rng.normal(scale=0.5, size=(4, 2))
    y = rng.normal(scale=0.5, size=(4, 2))
    pde = sigre.signature_kernel(x, y, static_kernel="linear", dyadic_order=4, time_augment=False)
    oracle = sigre.truncated_sig_inner(x, y, depth=12)
    assert pde == pytest.approx(oracle, rel=1e-3)


def test_mmd_hand_value():
    pts = np.array([[0.0], [1.0]])
    assert sigre.mmd_sq_unbiased(pts, pts, 1.0) == pytest.approx(math.exp(-1) - 1, abs=1e-12)
    assert sigre.k2_kernel(pts, pts, epsilon=1.0, chi_bandwidth=1.0) == pytest.approx(
        math.exp(1 - math.exp(-1)), abs=1e-12
    )


def test_simulators_shapes_and_determinism():
    ou = sigre.simulate_ou(0.5, 1.0, seed=3)
    assert ou.shape == (51, 1)
    assert np.array_equal(ou, sigre.simulate_ou(0.5, 1.0, seed=3))

    ma2 = sigre.simulate_ma2(0.6, 0.2, seed=4)
    assert ma2.shape == (50, 1)

    gse = sigre.simulate_gse(0.01, 0.1, seed=5)
    assert gse.shape == (101, 2)
    assert gse[:, 0].max() <= 95
    assert (gse.sum(axis=1) <= 100).all()


def test_logliks_finite():
    x = sigre.simulate_ou(0.5, 1.0, seed=6)
    assert math.isfinite(sigre.ou_loglik(x, 0.5, 1.0))
    y = sigre.simulate_ma2(0.6, 0.2, seed=7)
    assert math.isfinite(sigre.ma2_loglik(y, 0.6, 0.2))


def test_bespoke_summaries():
    x = sigre.simulate_gse(0.01, 0.1, seed=8)
    s = sigre.bespoke_summaries(x, "gse")
    assert s.shape == (9,)


def test_wasserstein_values():
    a = np.array([[0.0], [1.0], [2.0]])
    b = np.array([[0.0], [3.0]])
    assert sigre.wasserstein(a, a) == pytest.approx(0.0, abs=1e-12)
    assert sigre.wasserstein(a, b) == pytest.approx(5.0 / 6.0)
    assert sigre.mean_distance(a, b) == pytest.approx(0.5)


def test_bootstrap_ci():
    low, mean, high = sigre.bootstrap_ci([1.0, 2.0, 3.0, 4.0], seed=9)
    assert low <= mean <= high
    assert mean == pytest.approx(2.5)


def test_sir_resample():
    atoms = np.array([[0.0], [1.0]])
    out = sigre.sir_resample(atoms, [math.log(1.0), math.log(3.0)], draws=20000, seed=10)
    assert out.shape == (20000, 1)
    assert out.mean() == pytest.approx(0.75, abs=0.02)


def test_metropolis_hastings_standard_normal():
    samples, acceptance = sigre.metropolis_hastings(
        lambda t: -0.5 * float(t @ t),
        init=np.zeros(2),
        trial_std=np.full(2, 0.5),
        trial_steps=5000,
        main_steps=20000,
        thin=20,
        seed=11,
    )
    assert samples.shape == (1000, 2)
    assert 0.05 < acceptance < 0.95
    assert np.abs(samples.mean(axis=0)).max() < 0.15


def test_fit_ratio_end_to_end():
    rng = np.random.default_rng(12)
    n, length = 60, 6
    thetas = rng.uniform(-2.0, 2.0, size=(n, 1))
    series = [thetas[i, 0] + np.cumsum(rng.normal(size=(length, 1)), axis=0) for i in range(n)]
    obs = 0.5 + np.cumsum(rng.normal(size=(length, 1)), axis=0)
    est = sigre.fit_ratio(
        series,
        thetas,
        obs,
        prior_lows=np.array([-2.0]),
        prior_highs=np.array([2.0]),
        trials=3,
        folds=3,
        q=40,
        seed=13,
    )
    assert est.label == "signature"
    assert math.isfinite(est.cv_logloss)
    grid = np.linspace(-2.0, 2.0, 9).reshape(-1, 1)
    values = est.log_ratio_profile(obs, grid)
    assert values.shape == (9,)
    assert np.isfinite(values).all()
    # calibration identity
    lr = est.log_ratio(obs, np.array([0.5]))
    d = est.decision(obs, np.array([0.5]))
    assert 1.0 / (1.0 + math.exp(-lr)) == pytest.approx(d, abs=1e-12)
    blob = est.to_json()
    assert '"method"' in blob
