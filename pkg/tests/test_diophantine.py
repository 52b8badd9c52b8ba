import math

import pytest

from qpresponse.diophantine import (
    alpha_n,
    epsilon_n,
    estimate_epsilon_bar,
    min_small_divisor,
    profile,
    recheck_bounds,
)
from qpresponse.errors import GuardExceededError, ResonanceError
from qpresponse.systems import AnalyticityEnvelope

PHI = (1 + math.sqrt(5)) / 2
GOLDEN = (1.0, PHI)
# sum_{j<=4} 10^{-j!}; the last term is below double resolution
LIOUVILLE = (1.0, 1e-1 + 1e-2 + 1e-6 + 1e-24)
# same with a 0.1 offset (the robustness-test vector)
LIOUVILLE_OFFSET = (1.0, 0.1 + 1e-1 + 1e-2 + 1e-6 + 1e-24)


class TestAlphaN:
    def test_golden_n1(self):
        value, arg = alpha_n(GOLDEN, 1)
        assert value == pytest.approx(PHI - 1.0, abs=1e-14)
        assert arg == (1, -1)

    def test_golden_n2_ball_decides(self):
        # brute force over the radius-4 ball: (2, -1) wins at 2 - phi;
        # the better combination (-3, 2) has l1 norm 5 and is excluded
        value, arg = alpha_n(GOLDEN, 2)
        assert value == pytest.approx(2.0 - PHI, abs=1e-14)
        assert arg == (2, -1)

    def test_one_dimensional(self):
        for n in (0, 3):
            value, arg = alpha_n((1.0,), n)
            assert value == 1.0
            assert arg == (1,)

    def test_resonant_raises(self):
        with pytest.raises(ResonanceError):
            alpha_n((1.0, 2.0), 2)  # ball radius 4 contains (2, -1)

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            alpha_n(GOLDEN, 13)  # 8192 > default d=2 guard
        with pytest.raises(GuardExceededError):
            alpha_n((1.0, PHI, math.sqrt(2)), 7)  # 128 > default d=3 guard

    def test_three_dimensional(self):
        value, arg = alpha_n((1.0, PHI, math.sqrt(2)), 2)
        # independent brute force
        import itertools

        best = min(
            abs(1.0 * a + PHI * b + math.sqrt(2) * c)
            for a, b, c in itertools.product(range(-4, 5), repeat=3)
            if (a, b, c) != (0, 0, 0) and abs(a) + abs(b) + abs(c) <= 4
        )
        assert value == pytest.approx(best, abs=1e-15)


class TestProfile:
    def test_golden_decays(self):
        prof = profile(GOLDEN, 8)
        assert prof.alpha == sorted(prof.alpha, reverse=True)
        assert prof.eps[8] < prof.eps[2]
        # partial sums visibly converging: late increments much smaller
        inc_late = prof.bryuno_partial[8] - prof.bryuno_partial[7]
        inc_early = prof.bryuno_partial[2] - prof.bryuno_partial[1]
        assert inc_late < 0.2 * inc_early
        assert prof.classification == "diophantine-like"

    def test_liouville_spikes(self):
        prof = profile(LIOUVILLE, 8)
        spikes = [n for n in range(len(prof.eps) - 1)
                  if prof.eps[n + 1] > prof.eps[n]]
        assert spikes, "expected a spike where a near-resonance enters the ball"
        # the 10^{-2!} layer enters at radius 16: alpha drops hard
        assert prof.alpha[4] == pytest.approx(0.009991, abs=1e-12)
        assert prof.classification == "liouville-suspect"

    def test_one_dimensional_degenerate(self):
        prof = profile((0.7,), 6)
        assert prof.n_max == 0
        assert len(prof.alpha) == 1
        assert prof.alpha[0] == pytest.approx(0.7)
        assert prof.eps[0] == pytest.approx(math.log(1 / 0.7))

    def test_r_table_consistency(self):
        prof = profile(GOLDEN, 5, N_list=(1, 2, 4, 8, 16, 32, 20))
        for n in range(6):
            assert prof.r_table[2**n] == prof.alpha[n]
        assert prof.r_table[20] <= prof.r_table[16]


class TestEpsilonBounds:
    def envelope(self):
        # matches the cubic acceptance system at xi = 0.5, rho = 0.5
        return AnalyticityEnvelope(xi=0.5, rho=0.5, Phi=2 * math.exp(0.5),
                                   Gamma=0.5)

    def test_irregular_frequency_needs_more_dissipation(self):
        env = self.envelope()
        b_gold = estimate_epsilon_bar(env, 1.0, GOLDEN)
        for omega in (LIOUVILLE, LIOUVILLE_OFFSET):
            b_liou = estimate_epsilon_bar(env, 1.0, omega)
            assert b_liou.n0 == b_gold.n0  # identical envelopes
            assert b_liou.eps_bar < b_gold.eps_bar

    def test_A_scaling_with_pinned_n0(self):
        env = self.envelope()
        b1 = estimate_epsilon_bar(env, 1.0, GOLDEN, A_fraction=0.4, n0=4)
        b2 = estimate_epsilon_bar(env, 1.0, GOLDEN, A_fraction=0.8, n0=4)
        assert b2.eps_bar / b1.eps_bar == pytest.approx(4.0, rel=1e-12)

    def test_C0_scaling_with_pinned_A_and_n0(self):
        env = self.envelope()
        doubled = AnalyticityEnvelope(xi=env.xi, rho=env.rho, Phi=2 * env.Phi,
                                      Gamma=2 * env.Gamma)
        A = 0.3 * min(
            estimate_epsilon_bar(env, 1.0, GOLDEN).C0,
            estimate_epsilon_bar(doubled, 1.0, GOLDEN).C0,
        )
        b1 = estimate_epsilon_bar(env, 1.0, GOLDEN, A=A, n0=4)
        b2 = estimate_epsilon_bar(doubled, 1.0, GOLDEN, A=A, n0=4)
        assert b2.C0 == pytest.approx(2 * b1.C0)
        assert b1.eps_bar / b2.eps_bar == pytest.approx(4.0, rel=1e-12)

    def test_recheck_theorem1(self):
        env = self.envelope()
        bounds = estimate_epsilon_bar(env, 1.0, GOLDEN, theorem=1)
        assert all(recheck_bounds(bounds, 1.0).values())

    def test_recheck_theorem2(self):
        env = AnalyticityEnvelope(xi=0.4, rho=0.5, Phi=0.5, Gamma=1.2)
        bounds = estimate_epsilon_bar(env, 1.0, GOLDEN, theorem=2)
        assert bounds.beta is not None
        assert all(recheck_bounds(bounds, 1.0).values())

    def test_guard_limited_flag(self):
        # a thin strip forces a huge n0; the guard caps the ball
        env = AnalyticityEnvelope(xi=1e-3, rho=0.5, Phi=1.0, Gamma=1.0)
        bounds = estimate_epsilon_bar(env, 1.0, GOLDEN, guard=64)
        assert bounds.guard_limited
        assert bounds.eps_bar > 0

    def test_monotone_alpha(self):
        prof = profile(GOLDEN, 9)
        for a, b in zip(prof.alpha, prof.alpha[1:]):
            assert b <= a


def test_min_small_divisor_matches_brute_force():
    import itertools

    omega = (0.83, 1.37)
    value, arg = min_small_divisor(omega, 6)
    best = min(
        (abs(omega[0] * a + omega[1] * b), (a, b))
        for a, b in itertools.product(range(-6, 7), repeat=2)
        if (a, b) != (0, 0) and abs(a) + abs(b) <= 6
    )
    assert value == pytest.approx(best[0], abs=1e-15)


def test_epsilon_n_formula():
    assert epsilon_n(0.25, 2) == pytest.approx(math.log(4.0) / 4.0)
