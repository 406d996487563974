"""Shared fixtures: paper presets and exact-rational random instance generators."""

import random
from fractions import Fraction

import numpy as np
import pytest

from varmdp import (FiniteMdp, MarkovRewardProcess, paper_short,
                    paper_short_printed, simplify_reward)

ZERO = Fraction(0)


@pytest.fixture(scope="session")
def short_sas() -> FiniteMdp:
    return paper_short()


@pytest.fixture(scope="session")
def short_sa(short_sas) -> FiniteMdp:
    return simplify_reward(short_sas)


@pytest.fixture(scope="session")
def printed_sas() -> FiniteMdp:
    return paper_short_printed()


@pytest.fixture(scope="session")
def printed_sa(printed_sas) -> FiniteMdp:
    return simplify_reward(printed_sas)


def random_distribution(rng: random.Random, n: int, max_support: int | None = None):
    """Exact rational probability vector with random support."""
    k = rng.randint(1, n if max_support is None else min(max_support, n))
    support = rng.sample(range(n), k)
    weights = [rng.randint(1, 4) for _ in support]
    total = sum(weights)
    probs = [ZERO] * n
    for idx, w in zip(support, weights):
        probs[idx] = Fraction(w, total)
    return probs


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-8, 8), rng.choice([1, 1, 2, 4]))


def random_mdp(rng: random.Random, n_states: int = 3, horizon: int = 2,
               reward_kind: str = "sas", max_actions: int = 2,
               max_support: int | None = None) -> FiniteMdp:
    states = tuple(f"s{i}" for i in range(n_states))
    actions = tuple(tuple(range(rng.randint(1, max_actions))) for _ in range(n_states))
    kernel = {}
    sas = {}
    sa = {}
    for x in range(n_states):
        for a in actions[x]:
            probs = random_distribution(rng, n_states, max_support)
            rows = tuple((y, p) for y, p in enumerate(probs) if p > 0)
            kernel[(x, a)] = rows
            for y, _ in rows:
                sas[(x, a, y)] = random_rational(rng)
            sa[(x, a)] = random_rational(rng)
    mu0 = tuple(random_distribution(rng, n_states))
    salvage = tuple(random_rational(rng) for _ in range(n_states))
    return FiniteMdp(
        horizon=horizon, states=states, actions=actions, kernel=kernel,
        reward_kind=reward_kind,
        sas_reward=sas if reward_kind == "sas" else None,
        sa_reward=sa if reward_kind == "sa" else None,
        mu0=mu0, salvage=salvage)


def random_transition_mrp(rng: random.Random, n_states: int, horizon: int,
                          with_salvage: bool = False,
                          max_support: int | None = None) -> MarkovRewardProcess:
    states = tuple(f"s{i}" for i in range(n_states))
    kernel = []
    reward = {}
    for x in range(n_states):
        probs = random_distribution(rng, n_states, max_support)
        kernel.append(tuple(probs))
        for y, p in enumerate(probs):
            if p > 0:
                reward[(x, y)] = random_rational(rng)
    return MarkovRewardProcess(
        horizon=horizon, states=states, kernel=tuple(kernel),
        reward_on="transition", state_reward=None, transition_reward=reward,
        mu0=tuple(random_distribution(rng, n_states)),
        salvage=tuple(random_rational(rng) for _ in range(n_states))
        if with_salvage else None)


def random_ergodic_chain(seed: int, n: int):
    """Fully positive float kernel (hence irreducible and aperiodic) plus a reward."""
    gen = np.random.default_rng(seed)
    P = gen.uniform(0.05, 1.0, size=(n, n))
    P /= P.sum(axis=1, keepdims=True)
    r = gen.uniform(-2.0, 2.0, size=n)
    return P, r
