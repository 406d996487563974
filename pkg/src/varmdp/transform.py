"""Pair-state transformation: transition-rewarded chain -> state-rewarded chain.

A chain that pays ``r(x, y)`` per transition cannot be fed to the
long-horizon CDF estimator, which wants a reward per state.  Averaging
the reward over successors would change the total-reward distribution,
so instead the transitions themselves become states: the new chain
lives on pairs ``(x, y)`` and pays ``r(x, y)`` on arrival.  Out of pair
``(x, y)`` only pairs ``(y, z)`` are reachable, with the original
probability ``p(z | y)`` — each original state acts as a router between
its incoming and outgoing pairs.

Accounting: the original total over a horizon of ``N`` epochs has ``N``
transition-reward terms.  The transformed chain has horizon ``N - 1``
but collects its state reward at every epoch including the last
(``include_final_reward``), which is again ``N`` terms and makes the
two total-reward distributions identical, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import PreconditionError
from .mdp import MarkovRewardProcess, ZERO


@dataclass(frozen=True)
class TransformedMrp(MarkovRewardProcess):
    """State-rewarded pair chain; ``pairs[i]`` is the (x, y) behind state i."""

    pairs: tuple[tuple[int, int], ...] = ()
    source_states: tuple[str, ...] = ()


def transform(mrp: MarkovRewardProcess) -> TransformedMrp:
    """Build the pair chain with the same total-reward distribution.

    Requires a transition-rewarded process with horizon >= 2.  Pairs
    that are neither initially charged nor reachable from the support
    of ``mu0`` are pruned, which keeps the chain on one communicating
    class whenever the original visits one.  A salvage function carries
    over as ``v((x, y)) = v(y)``.
    """
    if mrp.reward_on == "state":
        raise PreconditionError("transform: process is already state-rewarded")
    if mrp.horizon < 2:
        raise PreconditionError("transform: horizon must be at least 2")

    reachable = {x for x, p in enumerate(mrp.mu0) if p > 0}
    frontier = list(reachable)
    while frontier:
        x = frontier.pop()
        for y, _ in mrp.successors(x):
            if y not in reachable:
                reachable.add(y)
                frontier.append(y)
    pairs = [(x, y) for x in sorted(reachable) for y, _ in mrp.successors(x)]
    index = {pair: i for i, pair in enumerate(pairs)}
    m = len(pairs)

    kernel = []
    for (x, y) in pairs:
        row = [ZERO] * m
        for z, p in mrp.successors(y):
            row[index[(y, z)]] = p
        kernel.append(tuple(row))
    state_reward = tuple(mrp.transition_reward[pair] for pair in pairs)
    mu0 = tuple(mrp.mu0[x] * mrp.kernel[x][y] for (x, y) in pairs)
    salvage = None
    if mrp.salvage is not None:
        salvage = tuple(mrp.salvage[y] for (_, y) in pairs)

    return TransformedMrp(
        horizon=mrp.horizon - 1,
        states=tuple(f"{mrp.states[x]}->{mrp.states[y]}" for (x, y) in pairs),
        kernel=tuple(kernel),
        reward_on="state",
        state_reward=state_reward,
        transition_reward=None,
        mu0=mu0,
        salvage=salvage,
        include_final_reward=True,
        pairs=tuple(pairs),
        source_states=mrp.states,
    )


def transformed_salvage(mrp: MarkovRewardProcess, salvage) -> TransformedMrp:
    """Transform with an explicit terminal value ``v`` over the original states.

    The pair chain ends in ``(X_{N-1}, X_N)``, so ``v((x, y)) = v(y)``
    contributes exactly the original salvage ``v(X_N)``.
    """
    salvage = tuple(Fraction(v) for v in salvage)
    if len(salvage) != mrp.n_states:
        raise PreconditionError("transformed_salvage: salvage length must match states")
    return transform(replace(mrp, salvage=salvage))
