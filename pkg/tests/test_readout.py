import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from weakqc.orderfind import DenominatorDistribution, ideal_denominator_distribution
from weakqc.qstate import DiagonalMixture
from weakqc.readout import (
    DecisionSpec,
    error_probability,
    overall_failure_bound,
    plan_budget,
    required_samples,
    required_samples_real,
    run_bisection,
    sample_bound,
    simulate_union_failures,
    totient_floor,
)
from weakqc.stats import erf
from weakqc.weakmeter import MeterConfig

PI6 = MeterConfig(math.pi / 6)


class TestDecisionSpec:
    def test_snr_and_threshold(self):
        spec = DecisionSpec(signal_one=0.4, worst_case_sigma=2.0)
        assert spec.snr == pytest.approx(0.2)
        assert spec.threshold == pytest.approx(0.2)

    def test_from_meter(self):
        spec = DecisionSpec.for_meter(PI6, 0.25)
        assert spec.worst_case_sigma == pytest.approx(1.0)
        assert spec.snr == pytest.approx(0.25)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            DecisionSpec(0.0, 1.0)
        with pytest.raises(ValueError):
            DecisionSpec(1.0, 0.0)
        with pytest.raises(ValueError):
            DecisionSpec.for_meter(MeterConfig(math.pi / 4), 0.3)


class TestRequiredSamples:
    def test_erf_one_gives_eight(self):
        eps = (1 - erf(1.0)) / 2
        assert required_samples(DecisionSpec.from_snr(1.0), eps, 1) == 8

    def test_monotone_in_epsilon(self):
        spec = DecisionSpec.from_snr(0.5)
        ms = [required_samples(spec, eps, 10) for eps in (0.3, 0.1, 0.03, 0.01, 1e-3, 1e-6)]
        assert ms == sorted(ms)
        assert ms[0] < ms[-1]

    def test_inverse_square_snr(self):
        a = required_samples_real(DecisionSpec.from_snr(0.3), 0.05, 7)
        b = required_samples_real(DecisionSpec.from_snr(0.6), 0.05, 7)
        assert b / a == pytest.approx(0.25, rel=1e-12)

    def test_trivial_tolerance(self):
        assert required_samples(DecisionSpec.from_snr(1.0), 0.5, 1) == 1

    @pytest.mark.parametrize("eps, n", [(0.0, 3), (1.0, 3), (0.6, 1), (0.1, 0)])
    def test_invalid(self, eps, n):
        with pytest.raises(ValueError):
            required_samples(DecisionSpec.from_snr(1.0), eps, n)

    def test_plan_budget(self):
        budget = plan_budget(DecisionSpec.from_snr(1.0), 0.1, 9)
        assert budget.per_bit_error == pytest.approx(0.1 / 9)
        assert budget.total_samples == 9 * budget.samples_per_bit


class TestErrorProbability:
    def test_no_samples_is_coin_flip(self):
        assert error_probability(DecisionSpec.from_snr(1.0), 0) == 0.5

    def test_decreasing(self):
        spec = DecisionSpec.from_snr(0.2)
        values = [error_probability(spec, M) for M in (1, 10, 100, 1000, 10_000)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-20

    def test_deep_tail_budget(self):
        # per-bit error ~1e-15: 1 - 2 eps/n would lose most of its digits
        spec = DecisionSpec.from_snr(0.5)
        M = required_samples(spec, 1e-9, 10**6)
        assert error_probability(spec, M) <= 1e-15
        assert error_probability(spec, M - 1) > 1e-15

    def test_round_trip_random_triples(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            snr = 10 ** rng.uniform(-2, 0.5)
            eps = 10 ** rng.uniform(-6, -0.4)
            n = int(rng.integers(1, 5000))
            spec = DecisionSpec.from_snr(snr)
            M = required_samples(spec, eps, n)
            assert error_probability(spec, M) <= eps / n * (1 + 1e-9)
            if M > 1:
                assert error_probability(spec, M - 1) > eps / n

    @given(st.floats(0.01, 3.0), st.floats(1e-6, 0.49), st.integers(1, 10**6))
    @example(0.01171875, 1e-6, 313431)
    def test_round_trip_property(self, snr, eps, n):
        spec = DecisionSpec.from_snr(snr)
        M = required_samples(spec, eps, n)
        assert error_probability(spec, M) <= eps / n * (1 + 1e-9)


class TestFailureBound:
    def test_nine_bits(self):
        assert overall_failure_bound(0.01, 9) == pytest.approx(0.08648275251635917, rel=1e-12)
        assert overall_failure_bound(0.01, 9) < 0.09

    @given(st.floats(0.0, 0.99))
    def test_single_bit(self, eps):
        assert overall_failure_bound(eps, 1) == pytest.approx(eps, rel=1e-12, abs=1e-300)

    def test_zero(self):
        assert overall_failure_bound(0.0, 20) == 0.0

    @given(st.floats(1e-9, 0.5), st.integers(1, 1000))
    def test_below_union_bound(self, eps, n):
        assert overall_failure_bound(eps, n) <= n * eps + 1e-15

    def test_simulation(self):
        rng = np.random.default_rng(8)
        eps, n, trials = 0.02, 10, 50_000
        observed = simulate_union_failures(eps, n, trials, rng)
        expected = overall_failure_bound(eps, n)
        assert abs(observed - expected) <= 5 * math.sqrt(expected * (1 - expected) / trials)


class TestSampleBound:
    @pytest.mark.parametrize("snr", [0.1, 1.0, 3.0])
    @pytest.mark.parametrize("eps", [0.01, 0.1, 0.4])
    def test_chain_holds(self, snr, eps):
        spec = DecisionSpec.from_snr(snr)
        for k in range(1, 21):
            n = 2**k
            assert required_samples_real(spec, eps, n) <= sample_bound(snr, eps, n)
            assert required_samples(spec, eps, n) <= sample_bound(snr, eps, n) + 1

    def test_ratio_bounded(self):
        snr, eps = 1.0, 0.1
        spec = DecisionSpec.from_snr(snr)
        cap = (2 * math.sqrt(2) / snr) ** 2 * (1 - math.log(eps * math.sqrt(math.pi)) / math.log(2)) ** 2
        ratios = [required_samples_real(spec, eps, 2**k) / math.log(2**k) ** 2 for k in range(1, 21)]
        assert max(ratios) <= cap
        # the ratio settles rather than growing
        assert ratios[-1] < ratios[5]


def bits_of(v, n):
    return format(v, f"0{n}b")


class TestBisection:
    def test_hand_traced_example(self):
        dist = DenominatorDistribution.from_mass(3, {1: 0.25, 2: 0.25, 4: 0.5})
        result = run_bisection(dist, MeterConfig(0.0), 0.1, signal_floor=0.5, exact=True)
        assert result.value == 4
        assert [d.prefix for d in result.transcript] == ["1##", "11#", "101"]
        assert [d.decision for d in result.transcript] == [1, 0, 0]

    def test_order_432_exact(self):
        dist = ideal_denominator_distribution(432, 9)
        result = run_bisection(dist, PI6, 0.1, signal_floor=totient_floor(432), exact=True)
        assert result.value == 432
        assert result.bits == "110110000"
        assert len(result.transcript) == 9

    def test_point_distribution_sampled(self):
        rng = np.random.default_rng(99)
        v, n = 11, 4
        dist = DenominatorDistribution.from_mass(n, {v: 1.0})
        failures = sum(
            run_bisection(dist, PI6, 0.1, rng, signal_floor=1.0).value != v for _ in range(200)
        )
        assert failures / 200 <= 0.1

    def test_switched_off_meter_rejected(self):
        dist = DenominatorDistribution.from_mass(2, {3: 1.0})
        with pytest.raises(ValueError, match="pi/4"):
            run_bisection(dist, MeterConfig(math.pi / 4), 0.1, signal_floor=0.5, exact=True)

    def test_missing_floor_without_modulus(self):
        dist = DenominatorDistribution.from_mass(2, {3: 1.0})
        with pytest.raises(ValueError, match="signal_floor"):
            run_bisection(dist, PI6, 0.1, exact=True)

    def test_sampling_needs_rng(self):
        dist = DenominatorDistribution.from_mass(2, {3: 1.0})
        with pytest.raises(ValueError):
            run_bisection(dist, PI6, 0.1, signal_floor=0.5)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            DenominatorDistribution(2, [0.5, 0.5, 0.5, 0.0])

    def test_plain_mixture_accepted(self):
        mix = DiagonalMixture.from_mass(3, {5: 0.6, 2: 0.4})
        assert run_bisection(mix, PI6, 0.1, signal_floor=0.6, exact=True).value == 5

    def test_reproducible(self):
        dist = ideal_denominator_distribution(12, 4)
        a = run_bisection(dist, PI6, 0.1, np.random.default_rng(5), signal_floor=0.3)
        b = run_bisection(dist, PI6, 0.1, np.random.default_rng(5), signal_floor=0.3)
        assert a == b

    def test_noiseless_matches_max_scan(self):
        rng = np.random.default_rng(31337)
        for _ in range(1000):
            n = int(rng.integers(1, 9))
            dim = 1 << n
            k = int(rng.integers(1, min(dim, 12) + 1))
            support = rng.choice(dim, size=k, replace=False)
            weights = rng.dirichlet(np.ones(k))
            p = np.zeros(dim)
            p[support] = weights
            top = int(support.max())
            floor = p[top] * rng.uniform(0.05, 0.999)
            dist = DenominatorDistribution(n, p)
            result = run_bisection(dist, PI6, 0.1, signal_floor=floor, exact=True)
            assert result.value == top
            assert len(result.transcript) == n

    def test_per_bit_and_overall_error_within_budget(self):
        rng = np.random.default_rng(4242)
        dist = ideal_denominator_distribution(432, 9)
        floor = totient_floor(432)
        eps, n, trials = 0.1, 9, 300
        truth = bits_of(432, n)
        bit_errors = run_errors = 0
        for _ in range(trials):
            result = run_bisection(dist, PI6, eps, rng, signal_floor=floor)
            # count a bit as wrong only while the prefix so far is still right
            for i, d in enumerate(result.transcript):
                if d.prefix[:i] != truth[:i]:
                    break
                bit_errors += d.decision != int(truth[i])
            run_errors += result.value != 432
        decisions = trials * n
        p_bit = eps / n
        assert bit_errors / decisions <= p_bit + 5 * math.sqrt(p_bit * (1 - p_bit) / decisions)
        assert run_errors / trials <= eps + 5 * math.sqrt(eps * (1 - eps) / trials)
