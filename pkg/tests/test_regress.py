import math

import numpy as np
import pytest

from pvarstat import (
    DegenerateDesignError,
    FilterSpec,
    InnovationSpec,
    PowerFunction,
    RegressionScenario,
    Series,
    StepFunction,
    beta_clt_study,
    eval_grid,
    ks_distance,
    lse_beta,
    qn_stat,
    simulate_path,
    simulate_regression,
    weighted_sum,
    wn_stat,
)
from pvarstat.rng import make_rng


def scenario(beta=1.0, f=None, phi=0.5, n=64, seed=5, innov=None):
    return RegressionScenario(
        beta=beta,
        f=f or PowerFunction(1),
        filter_spec=FilterSpec.geometric(phi),
        innovations=innov or InnovationSpec("normal"),
        n=n,
        seed=seed,
    )


class TestSimulateRegression:
    def test_zero_slope_equals_noise_path(self):
        s = scenario(beta=0.0)
        y = simulate_regression(s)
        x = simulate_path(s.filter_spec, s.innovations, s.n, s.seed)
        assert (y.values == x.values).all()

    def test_noiseless_identifiability(self):
        # an effectively-zero noise path recovers beta exactly
        s = scenario(beta=2.5, innov=InnovationSpec("normal", sigma_eta=1.0))
        g = eval_grid(s.f, s.n)
        y = Series(2.5 * g, origin="raw")
        assert lse_beta(y, s.f) == pytest.approx(2.5, rel=1e-14)

    def test_degenerate_design_rejected(self):
        zero = StepFunction((0.0, 1.0), (0.0,), value_at_zero=0.0)
        with pytest.raises(DegenerateDesignError):
            RegressionScenario(1.0, zero, FilterSpec.finite([1.0]),
                               InnovationSpec("normal"), 8, 1)


class TestLseBeta:
    def test_exact_multiple_of_design(self):
        g = eval_grid(PowerFunction(2), 20)
        assert lse_beta(3.0 * g, PowerFunction(2)) == pytest.approx(3.0, rel=1e-14)

    def test_constant_weight_gives_sample_mean(self):
        rng = make_rng(3)
        y = rng.standard_normal(50)
        assert lse_beta(y, PowerFunction(0)) == pytest.approx(y.mean(), rel=1e-13)

    def test_two_pass_arithmetic_oracle(self):
        rng = make_rng(4)
        y = rng.standard_normal(16)
        f = PowerFunction(1)
        num = math.fsum(y[j] * ((j + 1) / 16) for j in range(16))
        den = math.fsum(((j + 1) / 16) ** 2 for j in range(16))
        assert lse_beta(y, f) == pytest.approx(num / den, rel=1e-13)

    def test_zero_energy_error(self):
        zero = StepFunction((0.0, 1.0), (0.0,), value_at_zero=0.0)
        with pytest.raises(DegenerateDesignError):
            lse_beta(np.ones(4), zero)


class TestStatistics:
    def test_noiseless_statistics_vanish(self):
        g = eval_grid(PowerFunction(1), 32)
        y = 1.7 * g
        assert wn_stat(y, PowerFunction(1), 1.7) == pytest.approx(0.0, abs=1e-12)
        assert qn_stat(y, PowerFunction(1), 1.7) == pytest.approx(0.0, abs=1e-12)

    def test_constant_weight_reduces_to_scaled_mean(self):
        rng = make_rng(6)
        x = rng.standard_normal(25)
        got = wn_stat(x, PowerFunction(0), 0.0)
        assert got == pytest.approx(x.sum() / math.sqrt(25), rel=1e-12)
        assert qn_stat(x, PowerFunction(0), 0.0) == pytest.approx(
            x.sum() / math.sqrt(25), rel=1e-12)

    def test_weighted_error_identity(self):
        # sum f^2 (betahat - beta) == sum X f, so wn equals the scaled
        # noise sum whenever the noise path is observable
        for seed in range(10):
            s = scenario(beta=0.8, seed=seed, n=128)
            y = simulate_regression(s)
            x = simulate_path(s.filter_spec, s.innovations, s.n, s.seed)
            wn = wn_stat(y, s.f, s.beta)
            direct = weighted_sum(x, s.f) / math.sqrt(s.n)
            assert wn == pytest.approx(direct, rel=1e-10)

    def test_qn_wn_algebra(self):
        s = scenario(seed=11, n=96)
        y = simulate_regression(s)
        g = eval_grid(s.f, s.n)
        i_n = float(np.mean(g ** 2))
        assert qn_stat(y, s.f, s.beta) == pytest.approx(
            wn_stat(y, s.f, s.beta) / math.sqrt(i_n), rel=1e-12)


class TestCltStudy:
    def test_beta_invariance_bitwise(self):
        a = beta_clt_study(scenario(beta=0.0, seed=42), reps=20)
        b = beta_clt_study(scenario(beta=5.0, seed=42), reps=20)
        assert (a.values == b.values).all()

    def test_study_agrees_with_estimator_path(self):
        s = scenario(beta=1.5, seed=44, n=128)
        sample = beta_clt_study(s, reps=25)
        recomputed = []
        for r in range(25):
            y = simulate_regression(s, stream=(r,))
            recomputed.append(math.sqrt(s.n) * (lse_beta(y, s.f) - s.beta))
        np.testing.assert_allclose(np.sort(recomputed), sample.values, rtol=1e-10)

    def test_worker_invariance(self):
        a = beta_clt_study(scenario(seed=43), reps=16, workers=1)
        b = beta_clt_study(scenario(seed=43), reps=16, workers=2)
        assert (a.values == b.values).all()

    def test_constant_weight_identity_filter_limit_standard_normal(self):
        s = RegressionScenario(0.0, PowerFunction(0), FilterSpec.finite([1.0]),
                               InnovationSpec("normal"), 512, 7)
        sample = beta_clt_study(s, reps=2000)
        ref = make_rng(1234).standard_normal(2000)
        assert ks_distance(sample.values, ref) < 1.628 * math.sqrt(2 / 2000) * 1.25

    def test_limit_variance_linear_weight(self):
        # sigma^2 A^2 / I(f^2) = 4 * 3 = 12 for f(x) = x, geometric(0.5)
        s = scenario(beta=1.0, n=1024, seed=9)
        sample = beta_clt_study(s, reps=1500)
        assert np.var(sample.values) == pytest.approx(12.0, rel=0.15)

    def test_rms_halves_when_n_quadruples(self):
        small = beta_clt_study(scenario(n=256, seed=10), reps=600)
        big = beta_clt_study(scenario(n=1024, seed=10), reps=600)
        # sqrt(n)-normalized errors have comparable spread, so raw errors shrink
        rms_small = np.sqrt(np.mean((small.values / math.sqrt(256)) ** 2))
        rms_big = np.sqrt(np.mean((big.values / math.sqrt(1024)) ** 2))
        assert rms_big == pytest.approx(rms_small / 2, rel=0.25)
