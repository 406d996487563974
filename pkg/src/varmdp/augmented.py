"""Cumulative-reward state augmentation and exact threshold-percentile solving.

The threshold criterion ("what is the best achievable probability that
the total reward reaches tau?") is not solvable by plain backward
induction because it is not time-consistent.  Augmenting each state
with the reward accumulated so far restores an expectation criterion:
give every in-horizon transition reward zero and pay a terminal 0/1
salvage ``1[c + v(x) >= tau]``; the optimal expected value of the
augmented model is exactly the optimal exceedance probability.

Cumulative values are enumerated exactly (rationals), epoch by epoch,
and the induction only ever touches the reachable per-epoch slices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import BudgetExceededError
from .mdp import Action, DeterministicPolicy, FiniteMdp, StepCdf, ZERO, ONE, check_policy

AugState = tuple[int, Fraction]  # (state index, accumulated reward)


@dataclass(frozen=True)
class AugmentedMdp:
    """Augmented model: base MDP, threshold, and per-epoch reachable slices.

    ``layers[t]`` lists the reachable (state, accumulated reward) pairs
    at epoch ``t``; ``layers[0]`` pairs every mu0-positive state with 0.
    The kernel is inherited from the base MDP: from ``(x, c)`` under
    ``a``, the successor ``(y, c + r(x, a, y))`` has probability
    ``p(y | x, a)``.
    """

    base: FiniteMdp
    tau: Fraction
    layers: tuple[tuple[AugState, ...], ...]

    @property
    def horizon(self) -> int:
        return self.base.horizon

    @property
    def n_augmented_states(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def cumulative_values(self) -> frozenset[Fraction]:
        """All reachable accumulated-reward values across epochs."""
        return frozenset(c for layer in self.layers for _, c in layer)

    def actions(self, pair: AugState) -> tuple[Action, ...]:
        return self.base.actions[pair[0]]

    def step(self, pair: AugState, a: Action) -> list[tuple[AugState, Fraction]]:
        x, c = pair
        return [((y, c + self.base.reward(x, a, y)), p)
                for y, p in self.base.transitions(x, a)]

    def terminal_indicator(self, pair: AugState) -> Fraction:
        x, c = pair
        return ONE if c + self.base.salvage[x] >= self.tau else ZERO

    def initial_mass(self, pair: AugState) -> Fraction:
        x, c = pair
        return self.base.mu0[x] if c == 0 else ZERO


@dataclass(frozen=True)
class VarSolution:
    """Optimal exceedance probability at a threshold, with witnesses.

    ``policy[t]`` maps each reachable (state, accumulated reward) pair to
    the tie-broken optimal action; ``argmax_sets[t]`` keeps the full set
    of optimal actions so reported ties can be inspected.
    """

    tau: Fraction
    eta: Fraction
    policy: tuple[Mapping[AugState, Action], ...]
    argmax_sets: tuple[Mapping[AugState, tuple[Action, ...]], ...]

    def listing(self, states: tuple[str, ...]) -> str:
        """Stable text form: one "(state, cum_reward) -> action" line per pair."""
        lines = []
        for t, rule in enumerate(self.policy):
            for (x, c) in sorted(rule):
                lines.append(f"t={t} ({states[x]}, {c}) -> {rule[(x, c)]}")
        return "\n".join(lines)


def build_augmented(mdp: FiniteMdp, tau, max_states: int = 200_000) -> AugmentedMdp:
    """Enumerate reachable (state, accumulated reward) pairs epoch by epoch."""
    tau = Fraction(tau)
    layer = sorted((x, ZERO) for x, p in enumerate(mdp.mu0) if p > 0)
    layers = [tuple(layer)]
    total = len(layer)
    for _ in range(mdp.horizon):
        nxt: set[AugState] = set()
        for x, c in layer:
            for a in mdp.actions[x]:
                for y, p in mdp.transitions(x, a):
                    nxt.add((y, c + mdp.reward(x, a, y)))
        layer = sorted(nxt)
        total += len(layer)
        if total > max_states:
            raise BudgetExceededError(
                f"augmented model refused: more than {max_states} reachable "
                f"(state, reward) pairs")
        layers.append(tuple(layer))
    return AugmentedMdp(base=mdp, tau=tau, layers=tuple(layers))


def solve_threshold_var(mdp: FiniteMdp, tau, max_states: int = 200_000) -> VarSolution:
    """Best achievable P(total reward >= tau), by induction on the augmented model.

    The terminal value of ``(x, c)`` is ``1[c + v(x) >= tau]``; interior
    values maximize the expected successor value (all interior rewards
    are zero).  Ties are broken toward the earliest action in the
    state's action list; the full argmax set is reported alongside.
    """
    aug = build_augmented(mdp, tau, max_states=max_states)
    u: dict[AugState, Fraction] = {pair: aug.terminal_indicator(pair)
                                   for pair in aug.layers[-1]}
    policy: list[dict[AugState, Action]] = []
    argmax: list[dict[AugState, tuple[Action, ...]]] = []
    for t in reversed(range(aug.horizon)):
        nu: dict[AugState, Fraction] = {}
        rule: dict[AugState, Action] = {}
        sets: dict[AugState, tuple[Action, ...]] = {}
        for pair in aug.layers[t]:
            best = None
            ties: list[Action] = []
            for a in aug.actions(pair):
                q = sum((p * u[nxt] for nxt, p in aug.step(pair, a)), ZERO)
                if best is None or q > best:
                    best, ties = q, [a]
                elif q == best:
                    ties.append(a)
            nu[pair] = best
            rule[pair] = ties[0]
            sets[pair] = tuple(ties)
        u = nu
        policy.insert(0, rule)
        argmax.insert(0, sets)
    eta = sum((aug.initial_mass(pair) * u[pair] for pair in aug.layers[0]), ZERO)
    return VarSolution(tau=aug.tau, eta=eta, policy=tuple(policy), argmax_sets=tuple(argmax))


def augmented_policy_distribution(mdp: FiniteMdp,
                                  rules: tuple[Mapping[AugState, Action], ...]) -> StepCdf:
    """Exact total-reward distribution of a reward-dependent policy.

    ``rules[t]`` assigns an action to every reachable (state, accumulated
    reward) pair at epoch ``t``, so decisions may depend on the running
    total.  Mass is propagated forward over the reachable slices; the
    total collects salvage at the final state.
    """
    dist: dict[AugState, Fraction] = {}
    for x, p in enumerate(mdp.mu0):
        if p > 0:
            dist[(x, ZERO)] = p
    for t in range(mdp.horizon):
        nxt: dict[AugState, Fraction] = {}
        for (x, c), mass in dist.items():
            a = rules[t][(x, c)]
            for y, p in mdp.transitions(x, a):
                key = (y, c + mdp.reward(x, a, y))
                nxt[key] = nxt.get(key, ZERO) + mass * p
        dist = nxt
    masses: dict[Fraction, Fraction] = {}
    for (x, c), mass in dist.items():
        total = c + mdp.salvage[x]
        masses[total] = masses.get(total, ZERO) + mass
    return StepCdf.from_masses(masses)


def markov_policy_to_augmented_rules(mdp: FiniteMdp, policy: DeterministicPolicy,
                                     aug: AugmentedMdp | None = None):
    """Lift a plain (reward-independent) policy onto the augmented slices."""
    check_policy(mdp, policy)
    if aug is None:
        aug = build_augmented(mdp, 0)
    return tuple({pair: policy.action(t, pair[0]) for pair in aug.layers[t]}
                 for t in range(mdp.horizon))
