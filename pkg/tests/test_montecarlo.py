"""Simulation oracle: reproducibility, backend equivalence, CDF distances."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import ndtr

from varmdp import (DeterministicPolicy, MarkovRewardProcess, PreconditionError,
                    exact_total_reward_distribution, induced_mrp, ks_distance,
                    simulate, transform)
from varmdp._kernels import HAS_NUMBA

F = Fraction


def deterministic_chain():
    return MarkovRewardProcess(
        horizon=4, states=("a", "b"), kernel=((F(0), F(1)), (F(0), F(1))),
        reward_on="state", state_reward=(F(2), F(-1)), transition_reward=None,
        mu0=(F(1), F(0)), salvage=(F(0), F(5)))


@pytest.fixture(scope="module")
def printed_chain_mrp(printed_sas):
    pol = DeterministicPolicy.from_stationary({0: 2, 1: 0, 2: 0})
    return induced_mrp(printed_sas, pol)


class TestSimulate:
    def test_deterministic_chain_single_value(self):
        ecdf = simulate(deterministic_chain(), samples=500, seed=1)
        # path: a,b,b,b,b -> rewards 2,-1,-1,-1 plus salvage 5
        assert np.all(ecdf.samples == 2 - 1 - 1 - 1 + 5)

    def test_reproducible_from_seed(self, printed_chain_mrp):
        a = simulate(printed_chain_mrp, samples=5000, seed=99)
        b = simulate(printed_chain_mrp, samples=5000, seed=99)
        c = simulate(printed_chain_mrp, samples=5000, seed=100)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    @pytest.mark.skipif(not HAS_NUMBA, reason="numba unavailable")
    def test_backends_bit_identical(self, printed_chain_mrp):
        jit = simulate(printed_chain_mrp, samples=20_000, seed=7, backend="numba")
        plain = simulate(printed_chain_mrp, samples=20_000, seed=7, backend="numpy")
        assert np.array_equal(jit.samples, plain.samples)
        # transition- and state-reward kernels both dispatch
        t = transform(printed_chain_mrp)
        jit2 = simulate(t, samples=20_000, seed=8, backend="numba")
        plain2 = simulate(t, samples=20_000, seed=8, backend="numpy")
        assert np.array_equal(jit2.samples, plain2.samples)

    def test_empirical_matches_exact_short_horizon(self, printed_chain_mrp):
        # step-vs-step: both CDFs are constant between support points, so the
        # sup distance is attained on the exact support grid
        exact = exact_total_reward_distribution(printed_chain_mrp)
        ecdf = simulate(printed_chain_mrp, samples=1_000_000, seed=2024)
        grid = [float(s) for s in exact.support]
        # at 1e6 samples the two-sided DKW bound at 95% is about 0.0014
        assert ks_distance(exact, ecdf, grid) <= 0.005

    def test_transformed_and_original_agree(self, printed_chain_mrp):
        orig = simulate(printed_chain_mrp, samples=200_000, seed=31)
        trans = simulate(transform(printed_chain_mrp), samples=200_000, seed=77)
        grid = np.unique(orig.samples)
        assert ks_distance(orig.evaluate, trans.evaluate, grid) <= 0.01

    def test_salvage_and_final_epoch_accounting(self, printed_chain_mrp):
        exact = exact_total_reward_distribution(transform(printed_chain_mrp),
                                                path_budget=100)
        ecdf = simulate(transform(printed_chain_mrp), samples=300_000, seed=5)
        grid = [float(s) for s in exact.support]
        assert ks_distance(exact, ecdf, grid) <= 0.005

    def test_invalid_sample_count(self, printed_chain_mrp):
        with pytest.raises(PreconditionError):
            simulate(printed_chain_mrp, samples=0, seed=1)

    def test_dkw_rate(self, printed_chain_mrp):
        exact = exact_total_reward_distribution(printed_chain_mrp)
        grid = [float(s) for s in exact.support]
        d3 = ks_distance(exact, simulate(printed_chain_mrp, samples=1_000, seed=11),
                         grid)
        d5 = ks_distance(exact, simulate(printed_chain_mrp, samples=100_000, seed=11),
                         grid)
        assert d5 < d3
        assert d3 / d5 > 2          # consistent with 1/sqrt(n) over two decades
        assert d5 < 0.01


class TestKsDistance:
    def test_identical_cdfs(self):
        f = lambda t: ndtr(t)
        assert ks_distance(f, f, np.linspace(-3, 3, 100)) == 0.0

    def test_shifted_normal_closed_form(self):
        delta = 0.8
        a = lambda t: ndtr(t)
        b = lambda t: ndtr(t - delta)
        # the gap peaks at the midpoint: 2 g(delta/2) - 1
        grid = np.linspace(-6, 6, 4001)  # includes delta/2 = 0.4 up to grid spacing
        expected = 2 * ndtr(delta / 2) - 1
        assert ks_distance(a, b, grid) == pytest.approx(expected, abs=1e-6)

    def test_symmetry_and_objects(self, printed_chain_mrp):
        exact = exact_total_reward_distribution(printed_chain_mrp)
        ecdf = simulate(printed_chain_mrp, samples=10_000, seed=3)
        grid = np.unique(ecdf.samples)
        assert ks_distance(exact, ecdf, grid) == ks_distance(ecdf, exact, grid)

    def test_empty_grid_rejected(self):
        with pytest.raises(PreconditionError, match="grid"):
            ks_distance(lambda t: 0.0, lambda t: 0.0, [])
