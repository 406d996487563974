"""Core model operations: simplification, induction, induced chains, exact CDFs."""

import random
from dataclasses import replace
from fractions import Fraction
from itertools import product

import pytest

from varmdp import (BudgetExceededError, DeterministicPolicy, FiniteMdp,
                    MarkovRewardProcess, PreconditionError,
                    exact_total_reward_distribution, expected_backward_induction,
                    evaluate_policy, induced_mrp, simplify_reward)

from conftest import random_mdp

F = Fraction


def enumerate_paths_oracle(mdp: FiniteMdp, policy: DeterministicPolicy):
    """Independent enumeration: iterate bare successor tuples, no recursion sharing."""
    masses = {}
    frontier = [(x, mdp.mu0[x], F(0)) for x in range(mdp.n_states) if mdp.mu0[x] > 0]
    for t in range(mdp.horizon):
        nxt = []
        for x, mass, total in frontier:
            a = policy.action(t, x)
            for y, p in mdp.transitions(x, a):
                nxt.append((y, mass * p, total + mdp.reward(x, a, y)))
        frontier = nxt
    for x, mass, total in frontier:
        key = total + mdp.salvage[x]
        masses[key] = masses.get(key, F(0)) + mass
    return masses


class TestSimplifyReward:
    def test_paper_value_r02(self, short_sas):
        sa = simplify_reward(short_sas)
        assert sa.sa_reward[(0, 2)] == 0
        # the underlying average: 1/4*(-8) + 1/2*0 + 1/4*8
        assert F(1, 4) * -8 + F(1, 2) * 0 + F(1, 4) * 8 == 0

    def test_constant_in_destination(self):
        rng = random.Random(11)
        mdp = random_mdp(rng, n_states=3, reward_kind="sas")
        flat = {key: F(5, 2) for key in mdp.sas_reward}
        mdp = replace(mdp, sas_reward=flat)
        sa = simplify_reward(mdp)
        assert all(v == F(5, 2) for v in sa.sa_reward.values())

    def test_random_against_direct_sum(self):
        for seed in range(25):
            rng = random.Random(seed)
            mdp = random_mdp(rng, n_states=3, reward_kind="sas", max_actions=3)
            sa = simplify_reward(mdp)
            for (x, a), rows in mdp.kernel.items():
                expected = sum((p * mdp.sas_reward[(x, a, y)] for y, p in rows), F(0))
                assert sa.sa_reward[(x, a)] == expected

    def test_rejects_sa_input(self, short_sa):
        with pytest.raises(PreconditionError):
            simplify_reward(short_sa)

    def test_other_fields_unchanged(self, short_sas):
        sa = simplify_reward(short_sas)
        assert sa.reward_kind == "sa"
        assert sa.kernel == short_sas.kernel
        assert sa.mu0 == short_sas.mu0
        assert sa.salvage == short_sas.salvage


class TestInducedMrp:
    def test_inventory_kernel_row(self, printed_sas):
        pol = DeterministicPolicy.from_stationary({0: 2, 1: 0, 2: 0})
        mrp = induced_mrp(printed_sas, pol)
        assert mrp.kernel[0] == (F(1, 4), F(1, 2), F(1, 4))
        assert mrp.reward_on == "transition"
        assert mrp.transition_reward[(0, 1)] == 0   # order 2, sell 1, net zero
        assert mrp.mu0 == printed_sas.mu0

    def test_identity_kernel(self):
        n = 3
        mdp = FiniteMdp(
            horizon=2, states=("a", "b", "c"),
            actions=((0,),) * n,
            kernel={(x, 0): ((x, F(1)),) for x in range(n)},
            reward_kind="sa", sas_reward=None,
            sa_reward={(x, 0): F(x) for x in range(n)},
            mu0=(F(1), F(0), F(0)), salvage=(F(0),) * n)
        mrp = induced_mrp(mdp, DeterministicPolicy.from_stationary({x: 0 for x in range(n)}))
        for x in range(n):
            assert mrp.kernel[x][x] == 1
        assert mrp.reward_on == "state"

    def test_random_lookup(self):
        for seed in range(10):
            rng = random.Random(100 + seed)
            mdp = random_mdp(rng, n_states=4, reward_kind="sas", max_actions=3)
            rule = {x: rng.choice(mdp.actions[x]) for x in range(4)}
            mrp = induced_mrp(mdp, DeterministicPolicy.from_stationary(rule))
            for x in range(4):
                for y, p in mdp.transitions(x, rule[x]):
                    assert mrp.kernel[x][y] == p
                    assert mrp.transition_reward[(x, y)] == mdp.sas_reward[(x, rule[x], y)]

    def test_illegal_action_names_state(self, printed_sas):
        with pytest.raises(PreconditionError, match="state 1"):
            induced_mrp(printed_sas, DeterministicPolicy.from_stationary({0: 0, 1: 9, 2: 0}))

    def test_markov_policy_rejected(self, printed_sas):
        markov = DeterministicPolicy(rules=({0: 0, 1: 0, 2: 0},) * 2, stationary=False)
        with pytest.raises(PreconditionError):
            induced_mrp(printed_sas, markov)


class TestBackwardInduction:
    def test_short_instance_value_and_policy(self, short_sas):
        value, policy = expected_backward_induction(short_sas)
        assert value == F(105, 16)
        assert float(value) == 6.5625
        assert policy.rules[0] == {0: 3, 1: 2, 2: 0, 3: 0}
        assert policy.rules[1] == {0: 2, 1: 0, 2: 0, 3: 0}

    def test_sa_same_value_same_policy(self, short_sas, short_sa):
        vs, ps = expected_backward_induction(short_sas)
        va, pa = expected_backward_induction(short_sa)
        assert vs == va == F(105, 16)
        assert ps == pa

    def test_printed_instance_matches_published_policy(self, printed_sas):
        # the published first-epoch rule (order 2 at level 0, else nothing)
        value, policy = expected_backward_induction(printed_sas)
        assert value == F(45, 8)
        assert policy.rules[0][0] == 2
        assert policy.rules[0][1] == 0 and policy.rules[0][2] == 0

    def test_zero_rewards_single_action(self):
        # value reduces to the propagated expected salvage
        kernel = {(0, 0): ((0, F(1, 2)), (1, F(1, 2))), (1, 0): ((0, F(1),),)}
        mdp = FiniteMdp(
            horizon=2, states=("a", "b"), actions=((0,), (0,)),
            kernel=kernel, reward_kind="sa", sas_reward=None,
            sa_reward={(0, 0): F(0), (1, 0): F(0)},
            mu0=(F(1), F(0)), salvage=(F(3), F(7)))
        value, _ = expected_backward_induction(mdp)
        # mu propagation: (1,0) -> (1/2,1/2) -> (3/4,1/4); E[v] = 3*3/4 + 7*1/4
        assert value == F(3) * F(3, 4) + F(7) * F(1, 4)

    def test_simplify_then_induct_equivalence_random(self):
        for seed in range(20):
            rng = random.Random(300 + seed)
            mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas", max_actions=3)
            vs, ps = expected_backward_induction(mdp)
            va, pa = expected_backward_induction(simplify_reward(mdp))
            assert vs == va
            assert ps == pa


class TestExactDistribution:
    def test_mean_matches_optimal_value(self, short_sas):
        value, policy = expected_backward_induction(short_sas)
        dist = exact_total_reward_distribution(short_sas, policy)
        assert dist.mean() == value == F(105, 16)

    def test_frozen_supports_under_optimal_policy(self, short_sas, short_sa):
        _, policy = expected_backward_induction(short_sas)
        sas = exact_total_reward_distribution(short_sas, policy)
        sa = exact_total_reward_distribution(short_sa, policy)
        assert sas.support == (F(-7), F(0), F(7), F(14))
        assert sas.prob == (F(1, 16), F(1, 4), F(3, 8), F(5, 16))
        assert sa.support == (F(4), F(5), F(6), F(7), F(8), F(9))
        assert sa.prob == (F(3, 16), F(1, 16), F(1, 8), F(5, 16), F(1, 4), F(1, 16))
        assert sas != sa          # averaging changes the distribution
        assert sas.mean() == sa.mean()

    def test_against_independent_enumeration(self, short_sas, short_sa):
        _, policy = expected_backward_induction(short_sas)
        for mdp in (short_sas, short_sa):
            dist = exact_total_reward_distribution(mdp, policy)
            oracle = enumerate_paths_oracle(mdp, policy)
            assert dict(zip(dist.support, dist.prob)) == oracle

    def test_deterministic_chain_single_point(self):
        kernel = {(0, 0): ((1, F(1)),), (1, 0): ((1, F(1)),)}
        mdp = FiniteMdp(
            horizon=3, states=("a", "b"), actions=((0,), (0,)), kernel=kernel,
            reward_kind="sa", sas_reward=None,
            sa_reward={(0, 0): F(2), (1, 0): F(5)},
            mu0=(F(1), F(0)), salvage=(F(0), F(1)))
        dist = exact_total_reward_distribution(
            mdp, DeterministicPolicy.from_stationary({0: 0, 1: 0}))
        assert dist.support == (F(2) + F(5) + F(5) + F(1),)
        assert dist.prob == (F(1),)

    def test_masses_sum_to_one_random(self):
        for seed in range(15):
            rng = random.Random(500 + seed)
            mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind="sas")
            _, policy = expected_backward_induction(mdp)
            dist = exact_total_reward_distribution(mdp, policy)
            assert sum(dist.prob, F(0)) == 1

    def test_mean_equals_policy_evaluation_random(self):
        for seed in range(15):
            rng = random.Random(700 + seed)
            kind = "sas" if seed % 2 else "sa"
            mdp = random_mdp(rng, n_states=3, horizon=3, reward_kind=kind, max_actions=2)
            rule = {x: rng.choice(mdp.actions[x]) for x in range(3)}
            policy = DeterministicPolicy.from_stationary(rule)
            dist = exact_total_reward_distribution(mdp, policy)
            assert dist.mean() == evaluate_policy(mdp, policy)

    def test_constant_destination_rewards_give_identical_cdfs(self):
        rng = random.Random(42)
        mdp = random_mdp(rng, n_states=2, horizon=2, reward_kind="sas", max_actions=2)
        flat = {(x, a, y): F(x - a, 2) for (x, a, y) in mdp.sas_reward}
        mdp = replace(mdp, sas_reward=flat)
        sa = simplify_reward(mdp)
        all_rules = [dict(enumerate(c))
                     for c in product(*(mdp.actions[x] for x in range(mdp.n_states)))]
        for r0 in all_rules:
            for r1 in all_rules:
                policy = DeterministicPolicy(rules=(r0, r1), stationary=False)
                assert exact_total_reward_distribution(mdp, policy) == \
                    exact_total_reward_distribution(sa, policy)

    def test_budget_refusal_mentions_estimator(self, short_sas):
        big = replace(short_sas, horizon=10)
        _, policy = expected_backward_induction(big)
        with pytest.raises(BudgetExceededError, match="long-horizon"):
            exact_total_reward_distribution(big, policy)

    def test_mrp_variant_and_final_epoch_reward(self):
        mrp = MarkovRewardProcess(
            horizon=2, states=("a", "b"),
            kernel=((F(0), F(1)), (F(1), F(0))),
            reward_on="state", state_reward=(F(1), F(10)), transition_reward=None,
            mu0=(F(1), F(0)), salvage=None)
        dist = exact_total_reward_distribution(mrp)
        assert dist.support == (F(11),)                    # epochs 0,1: 1 + 10
        final = replace(mrp, include_final_reward=True)
        dist2 = exact_total_reward_distribution(final)
        assert dist2.support == (F(12),)                   # plus the final state's 1
