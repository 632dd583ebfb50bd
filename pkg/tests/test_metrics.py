import math

import numpy as np
import pytest

from repunet_sim.core import DimensionError
from repunet_sim.metrics import (
    FlowHistory,
    FractionHistory,
    LatencyHistory,
    SimilarityWeights,
    change_observation,
    fraction_changed_score,
    fraction_within_limits,
    latency_score,
    measure_latency,
    message_flow_score,
    missing_model_penalty,
    model_similarity,
    similarity_components,
)


class TestSimilarity:
    def test_identical_models(self):
        v = np.array([0.3, -1.2, 4.0])
        for g in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (0.25,) * 4]:
            assert model_similarity(v, v, SimilarityWeights(*g)) == pytest.approx(1.0)

    def test_tiny_perturbation(self):
        a = np.array([1.0, 2.0, 3.0])
        assert model_similarity(a, a + 1e-12) == pytest.approx(1.0, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            model_similarity([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_zero_vectors(self):
        cos_both, *_ = similarity_components([0.0, 0.0], [0.0, 0.0])
        cos_one, *_, pearson_one = similarity_components([0.0, 0.0], [1.0, 2.0])
        assert cos_both == 1.0
        assert cos_one == 0.0
        assert pearson_one == 0.0

    def test_constant_vector_pearson(self):
        # a constant vector has zero variance, handled like a zero-norm vector
        *_, p = similarity_components([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert p == 0.0

    def test_opposite_vectors(self):
        cos, _, _, pearson = similarity_components([1.0, 2.0], [-1.0, -2.0])
        assert cos == pytest.approx(0.0)
        assert pearson == pytest.approx(0.0)

    def test_distance_components(self):
        _, euc, man, _ = similarity_components([0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0])
        assert euc == pytest.approx(1.0 / (1.0 + 2.0 / 2.0))
        assert man == pytest.approx(1.0 / (1.0 + 4.0 / 4.0))

    def test_weights_validation(self):
        with pytest.raises(ValueError):
            SimilarityWeights(0.5, 0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            SimilarityWeights(-0.25, 0.75, 0.25, 0.25)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            model_similarity([np.nan, 1.0], [1.0, 1.0])


class TestFraction:
    def test_no_anomaly_is_perfect(self):
        hist = FractionHistory([0.2, 0.3], [1.0, 2.0], prev_final=1.0, lam=1.0)
        assert fraction_changed_score(hist, 0.25, 1.5) == 1.0

    def test_empty_history_is_neutral(self):
        hist = FractionHistory(prev_final=1.0)
        assert fraction_changed_score(hist, 0.9, 100.0) == 1.0

    def test_zero_mean_guard(self):
        hist = FractionHistory([0.0, 0.0], [1.0, 1.0], lam=1.0)
        s = fraction_changed_score(hist, 0.5, 1.0)
        # P = 0.5 / 1e-6 drives S_f to 0, leaving only the t half
        assert s == pytest.approx(0.5)

    def test_t_anomaly(self):
        hist = FractionHistory([0.25, 0.25], [1.0, 1.0], lam=1.0)
        s = fraction_changed_score(hist, 0.25, 3.0)
        assert s == pytest.approx(0.5 + 0.5 / (1 + math.e ** 2))

    def test_within_limits(self):
        hist = FractionHistory([0.2, 0.2], [1.0, 1.0])
        assert fraction_within_limits(hist, 0.21, 1.1)
        assert not fraction_within_limits(hist, 0.22, 1.0)
        assert not fraction_within_limits(hist, 0.2, 1.2)
        assert fraction_within_limits(FractionHistory(), 1.0, 1e9)

    def test_change_observation_modes(self):
        start = np.zeros(8)
        own = np.full(8, 0.1)
        remote = np.array([0.0, 0.05, 0.05, 0.2, 0.2, 0.2, 0.3, 0.4])
        f, t = change_observation(remote, start, own, mode="own")
        assert f == pytest.approx(5 / 8)
        assert t == pytest.approx(np.percentile(np.abs(remote), 75))
        f2, t2 = change_observation(remote, start, own, mode="threshold")
        assert f2 == f and t2 == pytest.approx(0.1)
        f3, t3 = change_observation(remote, start, own, mode="literal")
        assert f3 == pytest.approx(np.mean(np.abs(remote) > t3))
        with pytest.raises(ValueError):
            change_observation(remote, start, own, mode="bogus")

    def test_change_observation_dim_check(self):
        with pytest.raises(DimensionError):
            change_observation(np.zeros(3), np.zeros(4), np.zeros(4))


class TestMissingModel:
    def test_halving(self):
        assert missing_model_penalty(1.0) == 0.5

    def test_zero_fixed_point(self):
        assert missing_model_penalty(0.0) == 0.0


class TestLatency:
    def test_within_threshold(self):
        hist = LatencyHistory(samples=[2.0, 2.0, 2.0], mu_smooth=1.0)
        assert latency_score(hist, 2.0, round=5) == 1.0
        assert latency_score(hist, 3.0, round=5) == 1.0

    def test_discontinuity_at_threshold(self):
        hist = LatencyHistory(samples=[2.0, 2.0, 2.0], mu_smooth=1.0)
        assert latency_score(hist, 3.0 + 1e-9, round=5) < 0.5

    def test_smoothing(self):
        hist = LatencyHistory(samples=[2.0, 2.0, 2.0], prev_smoothed=0.2, mu_smooth=0.7)
        assert latency_score(hist, 2.0, round=5) == pytest.approx(0.7 + 0.3 * 0.2)

    def test_empty_history_round_zero(self):
        assert latency_score(LatencyHistory(), 1.0, round=0) == pytest.approx(0.95)

    def test_round_one_baseline(self):
        hist = LatencyHistory(samples=[1.0, 21.0, 21.0], mu_smooth=1.0)
        assert latency_score(hist, 21.0, 3, attack_from_round_one=True) < 0.01
        assert latency_score(hist, 21.0, 3) == 1.0

    def test_negative_latency(self):
        with pytest.raises(ValueError):
            latency_score(LatencyHistory(), -1.0, 0)

    def test_measure_latency_branches(self):
        starts = [0.0, 30.0, 60.0]
        assert measure_latency(61.5, 2, 2, starts) == pytest.approx(1.5)
        # a stale model from round 1 delivered in round 2
        assert measure_latency(62.0, 1, 2, starts) == pytest.approx(32.0)


class TestFlow:
    def test_at_reference(self):
        flow = FlowHistory(current={(0, 1): 10}, previous=[10, 10, 10, 10])
        assert message_flow_score(flow, (0, 1), 1) == 1.0

    def test_below_reference(self):
        flow = FlowHistory(current={(0, 1): 2}, previous=[10, 10, 10, 10])
        assert message_flow_score(flow, (0, 1), 1) == 1.0

    def test_round_zero_neutral(self):
        flow = FlowHistory(current={(0, 1): 500}, previous=[3, 3])
        assert message_flow_score(flow, (0, 1), 0) == 1.0

    def test_silent_network_guard(self):
        flow = FlowHistory(current={(0, 1): 5}, previous=[0, 0, 0, 0])
        s = message_flow_score(flow, (0, 1), 1)
        assert 0.0 <= s < 1.0

    def test_floor(self):
        flow = FlowHistory(current={(0, 1): 40}, previous=[10, 10, 10, 10])
        assert message_flow_score(flow, (0, 1), 1) == pytest.approx(0.05)

    def test_floor_shrinks_with_consecutive_low_rounds(self):
        flow = FlowHistory(current={(0, 1): 40}, previous=[10, 10, 10, 10],
                           scores={(0, 1): [0.0] * 10})
        # the floor is gone after ten low rounds; smoothing mixes in the old zeros
        assert message_flow_score(flow, (0, 1), 11) == pytest.approx(0.0, abs=1e-9)

    def test_recurrence_penalty(self):
        base = FlowHistory(current={(0, 1): 14}, previous=[10, 10, 10, 10])
        plain = message_flow_score(base, (0, 1), 1)
        rec = FlowHistory(current={(0, 1): 14}, previous=[10, 10, 10, 10],
                          scores={(0, 1): [0.4, 0.4, 0.4]})
        s = message_flow_score(rec, (0, 1), 4)
        assert s == pytest.approx((0.6 * plain * 0.8 + 0.3 * 0.4 + 0.1 * 0.4) / 1.0)

    def test_smoothing_renormalized(self):
        flow = FlowHistory(current={(0, 1): 10}, previous=[10, 10], scores={(0, 1): [0.5]})
        assert message_flow_score(flow, (0, 1), 2) == pytest.approx((0.6 * 1.0 + 0.3 * 0.5) / 0.9)
