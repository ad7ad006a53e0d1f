import math

import numpy as np
import pytest
from scipy import stats

from secrecy_capacity.analytic import cop_fixed, sop_lower, sop_upper
from secrecy_capacity.model import ConstantNoise, FixedDistance, NearestReceiver, NetworkParams
from secrecy_capacity.simulator import (
    BLOCK_SIZE,
    McEstimate,
    SimWindow,
    draw_fading,
    run_cop_trials,
    run_sop_trials,
    sample_ppp,
    simulate_trial,
    trial_rng,
)

W3 = ConstantNoise(1e-3)


class TestWindow:
    @pytest.mark.parametrize("lt,side", [(0.1, 100.0), (1e-3, 100.0), (5e-4, 300.0), (1e-4, 300.0)])
    def test_table(self, lt, side):
        assert SimWindow.for_density(lt).side == side

    def test_sparse_grows(self):
        a, b = SimWindow.for_density(1e-5), SimWindow.for_density(1e-6)
        assert 300 < a.side < b.side
        assert a.area * 1e-5 == pytest.approx(9.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            SimWindow(0.0)


class TestPpp:
    def test_counts_are_poisson(self):
        win = SimWindow(5.0)
        counts = np.array([sample_ppp(0.2, win, trial_rng(7, i)).shape[0] for i in range(4000)])
        mean = 0.2 * win.area
        assert counts.mean() == pytest.approx(mean, rel=0.02)
        assert counts.var() == pytest.approx(mean, rel=0.08)
        # chi-square goodness of fit on the central bins
        ks = np.arange(10, 31)
        observed = np.array([(counts == k).sum() for k in ks])
        expected = stats.poisson.pmf(ks, mean) * counts.size
        observed = np.append(observed, counts.size - observed.sum())
        expected = np.append(expected, counts.size - expected.sum())
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    def test_points_uniform(self):
        win = SimWindow(10.0)
        pts = np.concatenate([sample_ppp(0.5, win, trial_rng(3, i)) for i in range(50)])
        for axis in range(2):
            assert stats.kstest(pts[:, axis], stats.uniform(-10, 20).cdf).pvalue > 1e-3

    def test_empty(self):
        assert sample_ppp(0.0, SimWindow(1.0), trial_rng(0, 0)).shape == (0, 2)
        with pytest.raises(ValueError):
            sample_ppp(-1.0, SimWindow(1.0), trial_rng(0, 0))


class TestStreams:
    def test_fading_unit_mean(self):
        g = draw_fading(trial_rng(1, 0), 1_000_000)
        assert g.mean() == pytest.approx(1.0, abs=4 * 1 / math.sqrt(1e6))
        assert stats.kstest(g[:20000], "expon").pvalue > 1e-3

    def test_trials_are_distinct(self):
        a = trial_rng(5, 0).random(4)
        b = trial_rng(5, 1).random(4)
        c = trial_rng(6, 0).random(4)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)
        assert np.array_equal(a, trial_rng(5, 0).random(4))


class TestTrial:
    def test_outcome_fields(self):
        net = NetworkParams(0.01, eve_density=0.01)
        out = simulate_trial(net, W3, FixedDistance(1.0), 0.5, 0.1, trial_rng(0, 0))
        assert out.sinr_receiver > 0
        assert out.connection_outage == (out.sinr_receiver < 0.5)

    def test_no_eavesdroppers(self):
        out = simulate_trial(NetworkParams(0.01), W3, FixedDistance(1.0), 0.5, 0.1, trial_rng(0, 0))
        assert out.max_eavesdropper_sinr is None and not out.secrecy_outage


class TestEstimators:
    def test_from_counts(self):
        est = McEstimate.from_counts(25, 100, 3)
        assert est.estimate == 0.25
        assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))

    def test_cop_matches_analytic(self):
        net = NetworkParams(0.01)
        est = run_cop_trials(net, W3, FixedDistance(1.0), 0.5, trials=20_000, seed=11)
        assert abs(est.estimate - cop_fixed(net, W3, 0.5, 1.0)) <= 3 * est.stderr

    def test_sop_between_bounds(self):
        net = NetworkParams(0.01, eve_density=0.001)
        est = run_sop_trials(net, W3, 0.1, trials=4000, seed=5)
        assert sop_lower(net, W3, 0.1) - 3 * est.stderr <= est.estimate
        assert est.estimate <= sop_upper(net, W3, 0.1) + 3 * est.stderr

    def test_sop_zero_without_eavesdroppers(self):
        assert run_sop_trials(NetworkParams(0.01), W3, 0.1, trials=500).estimate == 0.0

    def test_cop_zero_at_tiny_threshold(self):
        est = run_cop_trials(NetworkParams(0.01), W3, FixedDistance(1.0), 1e-12, trials=1000)
        assert est.estimate == 0.0

    def test_sop_decreasing_in_noise(self):
        net = NetworkParams(0.01, eve_density=0.001)
        lo = run_sop_trials(net, ConstantNoise(1e-4), 0.1, trials=3000, seed=2)
        hi = run_sop_trials(net, ConstantNoise(1e-2), 0.1, trials=3000, seed=2)
        assert lo.estimate > hi.estimate

    def test_zero_trials(self):
        with pytest.raises(ValueError):
            run_cop_trials(NetworkParams(0.01), W3, FixedDistance(1.0), 0.5, trials=0)

    def test_nrt_empty_window_is_outage(self):
        # receiver density so small that the window almost never holds one
        net = NetworkParams(0.01)
        est = run_cop_trials(net, W3, NearestReceiver(1e-9), 0.5, trials=200)
        assert est.estimate > 0.99

    def test_jobs_do_not_change_result(self):
        net = NetworkParams(0.01, eve_density=0.001)
        trials = 2 * BLOCK_SIZE + 17
        one = run_sop_trials(net, W3, 0.1, trials=trials, seed=9, jobs=1)
        many = run_sop_trials(net, W3, 0.1, trials=trials, seed=9, jobs=3)
        assert one == many

    def test_window_edge_effect_small(self):
        # same seeds on a window twice as wide: interference from the rim is negligible
        net = NetworkParams(0.01)
        base = SimWindow.for_density(0.01)
        wide = SimWindow(2 * base.half_width)
        a = run_cop_trials(net, W3, FixedDistance(1.0), 0.5, trials=4000, seed=4, window=base)
        b = run_cop_trials(net, W3, FixedDistance(1.0), 0.5, trials=4000, seed=4, window=wide)
        assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr)
