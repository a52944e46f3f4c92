import math

import numpy as np
import pytest
from scipy import stats

import specstop as ss


def test_diagonal_problem():
    p = ss.make_diagonal_problem(3, 2.0, 1.0, np.ones(3))
    np.testing.assert_allclose(p.sigma, [1.0, 0.5, 1.0 / 3.0])
    np.testing.assert_array_equal(p.yhat, p.sigma * p.xhat)
    assert p.m == 3
    assert p.decay_q == 2.0
    with pytest.raises(ValueError):
        ss.make_diagonal_problem(0, 2.0, 1.0, np.ones(0))


def test_deriv2_against_numpy():
    d2 = ss.make_deriv2(100)
    a = d2.a.entries
    np.testing.assert_allclose(a, a.T, atol=1e-15)
    s = np.linalg.svd(a, compute_uv=False)
    np.testing.assert_allclose(ss.svd(a).sigma, s, rtol=1e-10, atol=1e-16)
    assert abs(s[0] * math.pi**2 - 1.0) < 0.01


def test_symmetrized_problem_and_csv(tmp_path):
    p = ss.make_deriv2_problem(40)
    assert p.has_factor
    path = tmp_path / "p.csv"
    ss.write_problem_csv(p, path)
    back = ss.read_problem_csv(path)
    np.testing.assert_array_equal(back.sigma, p.sigma)
    np.testing.assert_array_equal(back.xhat, p.xhat)


def test_gpd_matches_scipy_quantile():
    # The inverse cdf at u is the scipy quantile at 1 - u.
    scale = ss.gpd_unit_scale(0.2)
    assert scale == pytest.approx(math.sqrt(0.64 * 0.6))
    draws = ss.sample_gpd(0.2, scale, 200000, 3)
    assert abs(draws.mean()) < 0.01
    assert draws.var(ddof=1) == pytest.approx(1.0, rel=0.05)
    shifted = np.sort(draws + scale / 0.8)
    qs = [0.1, 0.5, 0.9]
    expected = stats.genpareto.ppf(qs, 0.2, scale=scale)
    got = [shifted[int(q * len(shifted))] for q in qs]
    np.testing.assert_allclose(got, expected, rtol=0.02)
    with pytest.raises(ValueError):
        ss.sample_gpd(0.3, 1.0, 10, 1)


def test_batches_and_summaries():
    p = ss.make_diagonal_problem(6, 2.0, 1.0, np.linspace(1, 0.1, 6))
    model = ss.NoiseModel.gaussian(2.0, 1.0)
    a = ss.sample_batch(p, model, 5000, 7)
    b = ss.sample_batch(p, model, 5000, 7)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    s = ss.summarize(a)
    np.testing.assert_allclose(s.mean, a.coeffs.mean(axis=0), rtol=1e-13)
    np.testing.assert_allclose(s.s2, a.coeffs.var(axis=0, ddof=1), rtol=1e-12)
    assert ss.noise_level_sample(a) == pytest.approx(math.sqrt(s.s2.sum() / 5000))
    np.testing.assert_allclose(ss.true_component_variances(p, model), np.arange(1, 7) ** -2.0)


def test_stopping_rules_examples():
    assert ss.plain_discrepancy(np.array([3.0, 1.0, 0.1]), 0.5, 3).k == 2
    w = ss.algorithm1_weights(np.array([1.0, 0.125, 1 / 27]), np.array([1.0, 0.5, 1 / 3]), 0.5, 3)
    np.testing.assert_allclose(w.d**2, [1.0, 3.2866, 6.0383], rtol=1e-4)
    assert ss.known_p_weights(2.0, 0.5, 4).d[3] == pytest.approx(4**0.25)
    assert ss.a_priori_k(1024, 1.0, 1.0, 2.0, 4.0) == 32
    with pytest.raises(ss.DegenerateNoise):
        ss.algorithm1_weights(np.zeros(2), np.array([1.0, 0.5]), 0.3, 2)


def test_rates():
    assert ss.minimax_rate(100, ss.RateParams(q=1, p=3)) == pytest.approx(0.01)
    assert ss.minimax_rate(100, ss.RateParams(q=2, p=2)) == pytest.approx(100 ** (-2 / 3))
    assert ss.theorem3_bound(1e4, ss.RateParams(q=2, p=2, eps2=0.1)) == pytest.approx(10 ** (-2 / 1.55), rel=1e-12)


def test_run_experiment_round_trip(tmp_path):
    text = "\n".join(
        [
            "problem = diagonal",
            "m = 30",
            "n_list = 50, 500",
            "replications = 5",
            "rule = plain, algorithm1, oracle",
        ]
    )
    table = ss.run_experiment(text, threads=2)
    assert len(table.rows) == 8
    assert len(table.raw) == 40
    assert all(r.q25 <= r.median_err <= r.q75 for r in table.rows)
    again = ss.run_experiment(text)
    assert [r.rel_err for r in again.raw] == [r.rel_err for r in table.raw]
    table.to_csv(tmp_path / "risk.csv")
    header = (tmp_path / "risk.csv").read_text().splitlines()[0]
    assert header == "rule,n,R,median_err,q25,q75,min,max,mean_k,seed"
    assert (tmp_path / "risk_raw.csv").exists()
    with pytest.raises(ss.ConfigurationError):
        ss.run_experiment(text + "\ncolour = blue")
    assert issubclass(ss.ConfigurationError, ss.SpecstopError)


def test_selfcheck():
    results = ss.selfcheck()
    assert len(results) == 3
    assert all(passed for _, passed, _ in results)
