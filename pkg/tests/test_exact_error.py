import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binom

from egl.exact_error import (
    EnumerationBudgetError,
    TieRule,
    balanced_two_block_error,
    compositions,
    conditional_error,
    conditional_error_mc,
    full_error,
    normal_approx_error,
    normal_snr,
)
from egl.model import Design, channel_rates, errorful_block_matrix


def brute_conditional(n_vec, Bt, pi):
    """Joint enumeration with Fraction scores; ties lose with probability (m-1)/m."""
    K = len(n_vec)
    err = 0.0
    for k in range(K):
        for ds in itertools.product(*(range(n + 1) for n in n_vec)):
            p = np.prod([binom.pmf(d, n, Bt[k][j]) for j, (d, n) in enumerate(zip(ds, n_vec))])
            scores = [Fraction(d, n) if n else Fraction(0) for d, n in zip(ds, n_vec)]
            top = max(scores)
            winners = [j for j, s in enumerate(scores) if s == top]
            if k in winners:
                err += pi[k] * p * (len(winners) - 1) / len(winners)
            else:
                err += pi[k] * p
    return err


def brute_full_n3(Bt, pi):
    """n = 3: enumerate labels of the two labeled vertices, the held-out label and both edges."""
    err = 0.0
    for y_star in range(2):
        for labs in itertools.product(range(2), repeat=2):
            p_lab = pi[y_star] * pi[labs[0]] * pi[labs[1]]
            for edges in itertools.product((0, 1), repeat=2):
                p_e = np.prod([Bt[y_star][l] if e else 1 - Bt[y_star][l] for l, e in zip(labs, edges)])
                n = [labs.count(0), labs.count(1)]
                d = [sum(e for l, e in zip(labs, edges) if l == k) for k in range(2)]
                s = [Fraction(d[k], n[k]) if n[k] else Fraction(0) for k in range(2)]
                winners = [k for k in range(2) if s[k] == max(s)]
                loss = (len(winners) - 1) / len(winners) if y_star in winners else 1.0
                err += p_lab * p_e * loss
    return err


class TestConditionalError:
    def test_coin_flip_regime(self):
        assert conditional_error([4, 4], [[0.3, 0.3], [0.3, 0.3]], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-14)

    def test_perfect_signal_hand_oracle(self):
        # D1 = 5 and D2 = 0 surely: never a tie, never an error
        e = conditional_error([5, 5], [[1, 0], [0, 1]], [0.5, 0.5])
        assert e < 2.0**-5
        assert e == pytest.approx(0.0, abs=1e-15)

    def test_single_class(self):
        assert conditional_error([7], [[0.4]], [1.0]) == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_fraction_brute_force(self, seed):
        r = np.random.default_rng(seed)
        K = int(r.integers(2, 4))
        n_vec = r.integers(0, 5, size=K)
        n_vec[0] = max(n_vec[0], 1)
        B = r.uniform(size=(K, K))
        B = (B + B.T) / 2
        pi = r.dirichlet(np.ones(K))
        assert conditional_error(n_vec, B, pi) == pytest.approx(brute_conditional(n_vec, B, pi), abs=1e-12)

    def test_empty_block_only_wins_by_full_tie(self):
        # block 2 has no labeled vertices: scores 0/0 := 0
        e = conditional_error([3, 0], [[0.6, 0.2], [0.6, 0.2]], [0.5, 0.5])
        assert e == pytest.approx(brute_conditional([3, 0], [[0.6, 0.2], [0.6, 0.2]], [0.5, 0.5]), abs=1e-14)

    def test_budget(self):
        with pytest.raises(EnumerationBudgetError, match="conditional_error_mc"):
            conditional_error([99, 99], np.full((2, 2), 0.5), [0.5, 0.5], budget=100)

    def test_tie_rule_enum(self):
        assert TieRule("uniform") is TieRule.UNIFORM_AMONG_ARGMAX

    @pytest.mark.parametrize("seed", range(20))
    def test_monte_carlo_agreement(self, seed):
        r = np.random.default_rng(100 + seed)
        K = int(r.integers(2, 4))
        n_vec = r.integers(1, 8, size=K)
        B = r.uniform(size=(K, K))
        B = (B + B.T) / 2
        pi = r.dirichlet(np.ones(K))
        est, se = conditional_error_mc(n_vec, B, pi, draws=10**6, seed=seed)
        exact = conditional_error(n_vec, B, pi)
        assert abs(est - exact) <= 4 * se + 1e-12


class TestFullError:
    def test_single_class(self):
        assert full_error(10, [[0.3]], [1.0]) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_n3_brute_force(self, seed):
        r = np.random.default_rng(seed)
        B = r.uniform(size=(2, 2))
        B = (B + B.T) / 2
        pi = r.dirichlet([1, 1])
        assert full_error(3, B, pi) == pytest.approx(brute_full_n3(B, pi), abs=1e-13)

    @pytest.mark.parametrize("n", [3, 8, 21])
    def test_constant_is_coin_flip(self, n):
        assert full_error(n, np.full((2, 2), 0.37), [0.5, 0.5]) == pytest.approx(0.5, abs=1e-12)

    def test_compositions(self):
        comps = list(compositions(4, 3))
        assert len(comps) == 15
        assert all(sum(c) == 4 for c in comps)

    def test_concentrates_toward_balanced(self):
        # diagnostic only: the gap shrinks as n grows
        B = np.array([[0.6, 0.3], [0.3, 0.6]])
        gaps = [abs(full_error(n, B, [0.5, 0.5]) - balanced_two_block_error((n - 1) // 2, 0.6, 0.3))
                for n in (11, 41)]
        assert gaps[1] < gaps[0]


class TestBalanced:
    @pytest.mark.parametrize("b", [0.0, 0.13, 0.5, 0.99, 1.0])
    @pytest.mark.parametrize("n1", [1, 4, 25])
    def test_equal_is_half(self, n1, b):
        assert balanced_two_block_error(n1, b, b) == 0.5

    def test_n1_2_hand_table(self):
        # D1, D2 in {0,1,2}; true class 1 loses if D1 < D2, half on D1 == D2
        f1 = [0.1**2, 2 * 0.9 * 0.1, 0.9**2]
        f2 = [0.9**2, 2 * 0.9 * 0.1, 0.1**2]
        want = sum(f1[a] * f2[b] * (1.0 if a < b else 0.5 if a == b else 0.0)
                   for a in range(3) for b in range(3))
        assert balanced_two_block_error(2, 0.9, 0.1) == pytest.approx(want, abs=1e-15)

    def test_demo_value(self, demo, beta_fm):
        Bt = errorful_block_matrix(demo, channel_rates(beta_fm, Design(3.5, 0.6)))
        assert balanced_two_block_error(25, Bt[0, 0], Bt[0, 1]) == pytest.approx(0.161, abs=0.0015)

    def test_equals_conditional(self):
        r = np.random.default_rng(3)
        for _ in range(10):
            n1 = int(r.integers(1, 20))
            b11, b12 = r.uniform(size=2)
            want = conditional_error([n1, n1], [[b11, b12], [b12, b11]], [0.5, 0.5])
            assert balanced_two_block_error(n1, b11, b12) == pytest.approx(want, abs=1e-10)

    def test_nonincreasing_in_b11(self):
        b12 = 0.2
        vals = balanced_two_block_error(12, np.linspace(0.2, 1.0, 81), np.full(81, b12))
        assert np.all(np.diff(vals) <= 1e-15)

    def test_vectorized(self):
        v = balanced_two_block_error(5, np.array([0.5, 0.7]), np.array([0.5, 0.2]))
        assert v.shape == (2,)
        assert v[1] == pytest.approx(balanced_two_block_error(5, 0.7, 0.2))

    def test_bad_n1(self):
        with pytest.raises(ValueError):
            balanced_two_block_error(0, 0.5, 0.4)


class TestNormalApprox:
    def test_zero_signal(self):
        assert normal_approx_error(50, 0.3, 0.3) == 0.5

    def test_degenerate_limits(self):
        assert normal_approx_error(50, 1.0, 0.0) == 0.0
        assert normal_approx_error(50, 0.0, 1.0) == 1.0
        assert normal_approx_error(50, 0.0, 0.0) == 0.5

    def test_formula(self):
        mu, sigma = normal_snr(50, 0.6, 0.2)
        assert mu == pytest.approx(25 * 0.4)
        assert sigma**2 == pytest.approx(25 * (0.6 * 0.4 + 0.2 * 0.8))

    def test_monotone_in_snr(self):
        b11 = np.linspace(0.3, 0.9, 50)
        vals = normal_approx_error(50, b11, np.full(50, 0.3))
        assert np.all(np.diff(vals) < 0)

    def test_close_to_exact_on_demo_curve(self, demo, beta_fm):
        from egl.model import rates_along_tau

        Bt = errorful_block_matrix(demo, rates_along_tau(beta_fm, 3.5, np.linspace(0, 1, 201)))
        gap = np.max(np.abs(normal_approx_error(50, Bt[:, 0, 0], Bt[:, 0, 1])
                            - balanced_two_block_error(25, Bt[:, 0, 0], Bt[:, 0, 1])))
        # reported, loosely bounded: the approximation tracks the same curve
        print(f"max |L_normal - L| along tau at kappa=3.5: {gap:.4f}")
        assert gap < 0.1
