"""Augmented-state threshold solving: reachable slices, induction values, argmax sets."""

import random
from fractions import Fraction

import pytest

from varmdp import (BudgetExceededError, build_augmented,
                    augmented_policy_distribution, solve_threshold_var,
                    simplify_reward)

from conftest import random_mdp

F = Fraction


def path_sums_oracle(mdp):
    """Brute-force cumulative sums along positive-probability paths, per epoch."""
    sums = {0: {(x, F(0)) for x, p in enumerate(mdp.mu0) if p > 0}}
    for t in range(mdp.horizon):
        nxt = set()
        for x, c in sums[t]:
            for a in mdp.actions[x]:
                for y, p in mdp.transitions(x, a):
                    nxt.add((y, c + mdp.reward(x, a, y)))
        sums[t + 1] = nxt
    return sums


def exceedance_oracle(mdp, rules, tau):
    """P(total >= tau) of a reward-dependent policy by direct trajectory recursion."""
    def walk(t, x, c):
        if t == mdp.horizon:
            return F(1) if c + mdp.salvage[x] >= tau else F(0)
        a = rules[t][(x, c)]
        return sum((p * walk(t + 1, y, c + mdp.reward(x, a, y))
                    for y, p in mdp.transitions(x, a)), F(0))
    return sum((p * walk(0, x, F(0)) for x, p in enumerate(mdp.mu0) if p > 0), F(0))


class TestBuildAugmented:
    def test_published_first_slice_pairs(self, short_sas):
        aug = build_augmented(short_sas, 9)
        layer1 = set(aug.layers[1])
        for pair in [(0, F(2)), (0, F(8)), (1, F(0)), (1, F(6)), (2, F(-2))]:
            assert pair in layer1
        # full slice from the formulas
        assert layer1 == {(0, F(0)), (0, F(2)), (0, F(8)), (1, F(-6)), (1, F(0)),
                          (1, F(6)), (2, F(-8)), (2, F(-2)), (3, F(-10))}

    def test_initial_slice_and_mass(self, short_sas):
        aug = build_augmented(short_sas, 9)
        assert aug.layers[0] == ((0, F(0)),)
        assert aug.initial_mass((0, F(0))) == 1

    def test_zero_reward_collapses_to_base_states(self):
        rng = random.Random(3)
        mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas")
        flat = {k: F(0) for k in mdp.sas_reward}
        from dataclasses import replace
        mdp = replace(mdp, sas_reward=flat)
        aug = build_augmented(mdp, 1)
        assert aug.cumulative_values == {F(0)}
        for layer in aug.layers:
            assert all(c == 0 for _, c in layer)

    def test_reachable_sums_match_bruteforce(self):
        for seed in range(8):
            rng = random.Random(40 + seed)
            mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas", max_actions=2)
            aug = build_augmented(mdp, 0)
            oracle = path_sums_oracle(mdp)
            for t, layer in enumerate(aug.layers):
                assert set(layer) == oracle[t]

    def test_budget_guard(self, short_sas):
        with pytest.raises(BudgetExceededError, match="pairs"):
            build_augmented(short_sas, 9, max_states=3)


class TestSolveThreshold:
    def test_sas_value_and_first_action(self, short_sas):
        sol = solve_threshold_var(short_sas, 9)
        assert sol.eta == F(5, 16)
        assert float(sol.eta) == 0.3125
        assert sol.policy[0][(0, F(0))] == 2
        assert set(sol.argmax_sets[0][(0, F(0))]) == {2, 3}

    def test_sa_value(self, short_sa):
        sol = solve_threshold_var(short_sa, 9)
        assert sol.eta == F(3, 16)
        assert sol.policy[0][(0, F(0))] == 2
        # the published simplified-instance rule at the only winning slice pair
        assert sol.policy[1][(2, F(0))] == 0
        assert sol.argmax_sets[1][(2, F(0))] == (0,)

    def test_published_tie_sets_at_second_epoch(self, short_sas):
        sol = solve_threshold_var(short_sas, 9)
        sets = sol.argmax_sets[1]
        assert set(sets[(0, F(2))]) == {2, 3}      # listed representative: 2
        assert set(sets[(0, F(8))]) == {1, 2}      # published "1 or 2"
        assert set(sets[(1, F(0))]) == {1, 2}      # published "1 or 2"
        assert set(sets[(1, F(6))]) == {0, 1}      # published "0 or 1"
        assert set(sets[(2, F(-2))]) == {0, 1}     # published "0 or 1"

    def test_simplification_loses_threshold_value(self, short_sas, short_sa):
        assert solve_threshold_var(short_sas, 9).eta > solve_threshold_var(short_sa, 9).eta

    def test_threshold_below_all_paths_gives_one(self, short_sas):
        assert solve_threshold_var(short_sas, -100).eta == 1

    def test_eta_antitone_in_tau(self, short_sas):
        taus = [F(-20), F(0), F(5), F(15, 2), F(9), F(12), F(20)]
        etas = [solve_threshold_var(short_sas, t).eta for t in taus]
        assert all(a >= b for a, b in zip(etas, etas[1:]))

    def test_eta_antitone_random(self):
        rng = random.Random(77)
        mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas", max_actions=2)
        taus = sorted(rng.randint(-10, 10) for _ in range(6))
        etas = [solve_threshold_var(mdp, t).eta for t in taus]
        assert all(a >= b for a, b in zip(etas, etas[1:]))


class TestPolicyValueConsistency:
    def test_optimal_policy_value_matches_trajectory_oracle(self, short_sas, short_sa):
        for mdp, tau in [(short_sas, F(9)), (short_sa, F(9)), (short_sas, F(15, 2))]:
            sol = solve_threshold_var(mdp, tau)
            assert exceedance_oracle(mdp, sol.policy, tau) == sol.eta

    def test_arbitrary_fixed_policy_matches_oracle(self):
        for seed in range(10):
            rng = random.Random(900 + seed)
            mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas", max_actions=2)
            tau = F(rng.randint(-6, 6))
            aug = build_augmented(mdp, tau)
            rules = tuple({pair: rng.choice(mdp.actions[pair[0]]) for pair in aug.layers[t]}
                          for t in range(mdp.horizon))
            dist = augmented_policy_distribution(mdp, rules)
            assert dist.prob_geq(tau) == exceedance_oracle(mdp, rules, tau)

    def test_simplified_threshold_differs_at_off_grid_tau(self, short_sas, short_sa):
        # the two conventions disagree away from tau=9 as well
        assert solve_threshold_var(short_sas, F(15, 2)).eta == F(11, 16)
        assert solve_threshold_var(short_sa, F(15, 2)).eta == F(5, 16)
