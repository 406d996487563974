"""Core finite-horizon MDP model with exact rational arithmetic.

Everything here is exact: probabilities, rewards and salvage values are
``fractions.Fraction``.  Rewards come in two conventions that are tagged
on the instance:

* ``"sas"`` — the reward ``r(x, a, y)`` depends on the transition taken;
* ``"sa"``  — the reward ``r'(x, a)`` is the kernel-average of an SAS
  table and only depends on the current state and action.

Averaging preserves expectations but not distributions, which is the
reason both conventions are first-class citizens throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .errors import BudgetExceededError, PreconditionError, ValidationError

Action = Hashable

ZERO = Fraction(0)
ONE = Fraction(1)


def _check_distribution(values: Sequence[Fraction], what: str) -> None:
    total = sum(values, ZERO)
    if any(v < 0 for v in values):
        raise ValidationError(f"{what}: negative probability")
    if total != 1:
        raise ValidationError(f"{what}: probabilities sum to {total}, expected 1")


@dataclass(frozen=True)
class FiniteMdp:
    """Finite-horizon MDP ``(horizon, states, actions, rewards, kernel, mu0, salvage)``.

    ``kernel[(x, a)]`` lists the positive-probability successors of state
    index ``x`` under action ``a`` as ``(y, p)`` pairs.  Exactly one of
    ``sas_reward`` / ``sa_reward`` is set, matching ``reward_kind``.
    Action order inside ``actions[x]`` is significant: argmax ties are
    broken in favour of the earliest action listed.
    """

    horizon: int
    states: tuple[str, ...]
    actions: tuple[tuple[Action, ...], ...]
    kernel: Mapping[tuple[int, Action], tuple[tuple[int, Fraction], ...]]
    reward_kind: str
    sas_reward: Mapping[tuple[int, Action, int], Fraction] | None
    sa_reward: Mapping[tuple[int, Action], Fraction] | None
    mu0: tuple[Fraction, ...]
    salvage: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValidationError("horizon: must be a positive integer")
        n = len(self.states)
        if len(set(self.states)) != n:
            raise ValidationError("states: names must be unique")
        if len(self.actions) != n or len(self.mu0) != n or len(self.salvage) != n:
            raise ValidationError("actions/mu0/salvage: length must match states")
        if self.reward_kind not in ("sas", "sa"):
            raise ValidationError(f"reward_kind: {self.reward_kind!r} not in {{'sas','sa'}}")
        if (self.reward_kind == "sas") != (self.sas_reward is not None):
            raise ValidationError("reward tables must match reward_kind")
        if (self.reward_kind == "sa") != (self.sa_reward is not None):
            raise ValidationError("reward tables must match reward_kind")
        _check_distribution(self.mu0, "mu0")
        for x, acts in enumerate(self.actions):
            if not acts:
                raise ValidationError(f"actions: state {self.states[x]} has no actions")
            if len(set(acts)) != len(acts):
                raise ValidationError(f"actions: duplicates at state {self.states[x]}")
            for a in acts:
                rows = self.kernel.get((x, a))
                if not rows:
                    raise ValidationError(
                        f"kernel: no transitions for state {self.states[x]}, action {a!r}")
                _check_distribution([p for _, p in rows],
                                    f"kernel row ({self.states[x]}, {a!r})")
                for y, p in rows:
                    if p <= 0:
                        raise ValidationError(
                            f"kernel: nonpositive mass on ({self.states[x]}, {a!r}, "
                            f"{self.states[y]})")
                    if self.reward_kind == "sas" and (x, a, y) not in self.sas_reward:
                        raise ValidationError(
                            f"reward: missing r({self.states[x]}, {a!r}, {self.states[y]})")
                if self.reward_kind == "sa" and (x, a) not in self.sa_reward:
                    raise ValidationError(
                        f"reward: missing r'({self.states[x]}, {a!r})")

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_sas(self) -> bool:
        return self.reward_kind == "sas"

    def transitions(self, x: int, a: Action) -> tuple[tuple[int, Fraction], ...]:
        return self.kernel[(x, a)]

    def reward(self, x: int, a: Action, y: int) -> Fraction:
        """One-step reward of the tagged convention for the (x, a, y) transition."""
        if self.is_sas:
            return self.sas_reward[(x, a, y)]
        return self.sa_reward[(x, a)]


@dataclass(frozen=True)
class DeterministicPolicy:
    """Deterministic decision rules, either one per epoch or a single stationary rule."""

    rules: tuple[Mapping[int, Action], ...]
    stationary: bool = False

    def __post_init__(self) -> None:
        if not self.rules:
            raise ValidationError("policy: no decision rules")
        if self.stationary and len(self.rules) != 1:
            raise ValidationError("policy: a stationary policy has exactly one rule")

    def action(self, t: int, x: int) -> Action:
        rule = self.rules[0] if self.stationary else self.rules[t]
        try:
            return rule[x]
        except KeyError:
            raise PreconditionError(f"policy: no action assigned at state index {x}") from None

    @classmethod
    def from_stationary(cls, rule: Mapping[int, Action]) -> "DeterministicPolicy":
        return cls(rules=(dict(rule),), stationary=True)


def check_policy(mdp: FiniteMdp, policy: DeterministicPolicy) -> None:
    """Reject policies that use an illegal action, naming the state."""
    if not policy.stationary and len(policy.rules) < mdp.horizon:
        raise PreconditionError(
            f"policy: {len(policy.rules)} rules for horizon {mdp.horizon}")
    for t in range(mdp.horizon):
        for x in range(mdp.n_states):
            a = policy.action(t, x)
            if a not in mdp.actions[x]:
                raise PreconditionError(
                    f"policy: action {a!r} is illegal at state {mdp.states[x]}")


@dataclass(frozen=True)
class MarkovRewardProcess:
    """A policy-induced chain with a state- or transition-reward function.

    The total reward over ``horizon`` epochs is

    * ``reward_on == "state"``:      sum of ``state_reward[X_t]`` for
      ``t = 0..horizon-1`` (plus the final epoch when
      ``include_final_reward`` is set), plus salvage if present;
    * ``reward_on == "transition"``: sum of ``transition_reward[(X_t, X_{t+1})]``
      for ``t = 0..horizon-1``, plus salvage if present.
    """

    horizon: int
    states: tuple[str, ...]
    kernel: tuple[tuple[Fraction, ...], ...]
    reward_on: str
    state_reward: tuple[Fraction, ...] | None
    transition_reward: Mapping[tuple[int, int], Fraction] | None
    mu0: tuple[Fraction, ...]
    salvage: tuple[Fraction, ...] | None = None
    include_final_reward: bool = False

    def __post_init__(self) -> None:
        n = len(self.states)
        if self.horizon < 1:
            raise ValidationError("horizon: must be a positive integer")
        if self.reward_on not in ("state", "transition"):
            raise ValidationError(f"reward_on: {self.reward_on!r} not in {{'state','transition'}}")
        if (self.reward_on == "state") != (self.state_reward is not None):
            raise ValidationError("reward table must match reward_on")
        if (self.reward_on == "transition") != (self.transition_reward is not None):
            raise ValidationError("reward table must match reward_on")
        if len(self.kernel) != n or any(len(row) != n for row in self.kernel):
            raise ValidationError("kernel: must be a square matrix over states")
        for x, row in enumerate(self.kernel):
            _check_distribution(row, f"kernel row {self.states[x]}")
        _check_distribution(self.mu0, "mu0")
        if self.include_final_reward and self.reward_on != "state":
            raise ValidationError("include_final_reward only applies to state rewards")
        if self.reward_on == "transition":
            for x in range(n):
                for y in range(n):
                    if self.kernel[x][y] > 0 and (x, y) not in self.transition_reward:
                        raise ValidationError(
                            f"reward: missing r({self.states[x]}, {self.states[y]})")

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def reward_term_count(self) -> int:
        """Number of reward summands in the total reward."""
        if self.reward_on == "state" and self.include_final_reward:
            return self.horizon + 1
        return self.horizon

    def successors(self, x: int) -> list[tuple[int, Fraction]]:
        return [(y, p) for y, p in enumerate(self.kernel[x]) if p > 0]


@dataclass(frozen=True)
class StepCdf:
    """Exact finitely-supported total-reward distribution.

    ``cdf(tau)`` is the right-continuous distribution function
    ``P(total <= tau)``; ``prob_geq(tau)`` is ``P(total >= tau)``.
    """

    support: tuple[Fraction, ...]
    prob: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.prob) or not self.support:
            raise ValidationError("StepCdf: support/prob length mismatch or empty")
        if any(self.support[i] >= self.support[i + 1] for i in range(len(self.support) - 1)):
            raise ValidationError("StepCdf: support must be strictly increasing")
        if any(p <= 0 for p in self.prob):
            raise ValidationError("StepCdf: masses must be positive")
        if sum(self.prob, ZERO) != 1:
            raise ValidationError("StepCdf: masses must sum to 1 exactly")

    @classmethod
    def from_masses(cls, masses: Mapping[Fraction, Fraction]) -> "StepCdf":
        support = tuple(sorted(k for k, v in masses.items() if v != 0))
        return cls(support=support, prob=tuple(masses[s] for s in support))

    def cdf(self, tau) -> Fraction:
        tau = Fraction(tau)
        return sum((p for s, p in zip(self.support, self.prob) if s <= tau), ZERO)

    def prob_geq(self, tau) -> Fraction:
        tau = Fraction(tau)
        return sum((p for s, p in zip(self.support, self.prob) if s >= tau), ZERO)

    def mean(self) -> Fraction:
        return sum((s * p for s, p in zip(self.support, self.prob)), ZERO)

    def evaluate(self, tau) -> float:
        """Float CDF value, for comparisons against estimated/empirical CDFs."""
        if isinstance(tau, float):
            tau = Fraction(repr(float(tau)))  # exact decimal, also for numpy scalars
        return float(self.cdf(tau))


def simplify_reward(mdp: FiniteMdp) -> FiniteMdp:
    """Average an SAS reward table over successors: r'(x,a) = sum_y r(x,a,y) p(y|x,a)."""
    if not mdp.is_sas:
        raise PreconditionError("simplify_reward: instance is already SA-tagged")
    sa = {}
    for (x, a), rows in mdp.kernel.items():
        sa[(x, a)] = sum((p * mdp.sas_reward[(x, a, y)] for y, p in rows), ZERO)
    return replace(mdp, reward_kind="sa", sas_reward=None, sa_reward=sa)


def induced_mrp(mdp: FiniteMdp, policy: DeterministicPolicy,
                keep_salvage: bool = True) -> MarkovRewardProcess:
    """Fix a stationary policy, yielding a Markov reward process.

    SAS instances induce a transition-rewarded chain, SA instances a
    state-rewarded one; ``mu0`` and the horizon carry over.
    """
    if not policy.stationary:
        raise PreconditionError("induced_mrp: policy must be stationary")
    check_policy(mdp, policy)
    n = mdp.n_states
    kernel = []
    trans_reward: dict[tuple[int, int], Fraction] = {}
    state_reward: list[Fraction] = []
    for x in range(n):
        a = policy.action(0, x)
        row = [ZERO] * n
        for y, p in mdp.transitions(x, a):
            row[y] = p
            if mdp.is_sas:
                trans_reward[(x, y)] = mdp.sas_reward[(x, a, y)]
        kernel.append(tuple(row))
        if not mdp.is_sas:
            state_reward.append(mdp.sa_reward[(x, a)])
    return MarkovRewardProcess(
        horizon=mdp.horizon,
        states=mdp.states,
        kernel=tuple(kernel),
        reward_on="transition" if mdp.is_sas else "state",
        state_reward=None if mdp.is_sas else tuple(state_reward),
        transition_reward=trans_reward if mdp.is_sas else None,
        mu0=mdp.mu0,
        salvage=mdp.salvage if keep_salvage else None,
    )


def restrict_to_reachable(mrp: MarkovRewardProcess) -> MarkovRewardProcess:
    """Drop states unreachable from the support of mu0 (renormalization-free)."""
    reach = {x for x, p in enumerate(mrp.mu0) if p > 0}
    frontier = list(reach)
    while frontier:
        x = frontier.pop()
        for y, _ in mrp.successors(x):
            if y not in reach:
                reach.add(y)
                frontier.append(y)
    keep = sorted(reach)
    if len(keep) == mrp.n_states:
        return mrp
    index = {x: i for i, x in enumerate(keep)}
    return MarkovRewardProcess(
        horizon=mrp.horizon,
        states=tuple(mrp.states[x] for x in keep),
        kernel=tuple(tuple(mrp.kernel[x][y] for y in keep) for x in keep),
        reward_on=mrp.reward_on,
        state_reward=None if mrp.state_reward is None
        else tuple(mrp.state_reward[x] for x in keep),
        transition_reward=None if mrp.transition_reward is None
        else {(index[x], index[y]): r for (x, y), r in mrp.transition_reward.items()
              if x in index and y in index},
        mu0=tuple(mrp.mu0[x] for x in keep),
        salvage=None if mrp.salvage is None else tuple(mrp.salvage[x] for x in keep),
        include_final_reward=mrp.include_final_reward,
    )


def expected_backward_induction(mdp: FiniteMdp) -> tuple[Fraction, DeterministicPolicy]:
    """Optimal expected total reward and an argmax Markov policy.

    Ties are broken toward the earliest action in the state's action
    list, so the returned policy is deterministic and reproducible.
    """
    u = list(mdp.salvage)
    rules: list[dict[int, Action]] = []
    for _ in range(mdp.horizon):
        nu = [ZERO] * mdp.n_states
        rule: dict[int, Action] = {}
        for x in range(mdp.n_states):
            best_q = None
            best_a = None
            for a in mdp.actions[x]:
                q = sum((p * (mdp.reward(x, a, y) + u[y]) for y, p in mdp.transitions(x, a)),
                        ZERO) if mdp.is_sas else \
                    mdp.sa_reward[(x, a)] + sum((p * u[y] for y, p in mdp.transitions(x, a)),
                                                ZERO)
                if best_q is None or q > best_q:
                    best_q, best_a = q, a
            nu[x], rule[x] = best_q, best_a
        u = nu
        rules.insert(0, rule)
    value = sum((p * u[x] for x, p in enumerate(mdp.mu0)), ZERO)
    return value, DeterministicPolicy(rules=tuple(rules), stationary=False)


def evaluate_policy(mdp: FiniteMdp, policy: DeterministicPolicy) -> Fraction:
    """Expected total reward of a fixed (Markov or stationary) policy."""
    check_policy(mdp, policy)
    u = list(mdp.salvage)
    for t in reversed(range(mdp.horizon)):
        nu = []
        for x in range(mdp.n_states):
            a = policy.action(t, x)
            nu.append(sum((p * (mdp.reward(x, a, y) + u[y])
                           for y, p in mdp.transitions(x, a)), ZERO))
        u = nu
    return sum((p * u[x] for x, p in enumerate(mdp.mu0)), ZERO)


def _check_path_budget(horizon: int, n_states: int, path_budget: int) -> None:
    if horizon * n_states > path_budget:
        raise BudgetExceededError(
            f"exact enumeration refused: horizon*states = {horizon * n_states} exceeds "
            f"budget {path_budget}; use the long-horizon CDF estimator instead")


def exact_total_reward_distribution(process, policy: DeterministicPolicy | None = None,
                                    path_budget: int = 24) -> StepCdf:
    """Exact distribution of the total reward by depth-first trajectory enumeration.

    Accepts either a ``FiniteMdp`` together with a policy, or a
    ``MarkovRewardProcess`` (no policy).  Zero-probability branches are
    pruned; equal totals are merged.  Refuses instances whose
    ``horizon * n_states`` exceeds ``path_budget``.
    """
    masses: dict[Fraction, Fraction] = {}

    if isinstance(process, FiniteMdp):
        if policy is None:
            raise PreconditionError("exact_total_reward_distribution: an MDP needs a policy")
        mdp = process
        check_policy(mdp, policy)
        _check_path_budget(mdp.horizon, mdp.n_states, path_budget)

        def walk(t: int, x: int, mass: Fraction, total: Fraction) -> None:
            if t == mdp.horizon:
                key = total + mdp.salvage[x]
                masses[key] = masses.get(key, ZERO) + mass
                return
            a = policy.action(t, x)
            for y, p in mdp.transitions(x, a):
                walk(t + 1, y, mass * p, total + mdp.reward(x, a, y))

        for x, p in enumerate(mdp.mu0):
            if p > 0:
                walk(0, x, p, ZERO)
        return StepCdf.from_masses(masses)

    if isinstance(process, MarkovRewardProcess):
        if policy is not None:
            raise PreconditionError(
                "exact_total_reward_distribution: a Markov reward process takes no policy")
        mrp = process
        _check_path_budget(mrp.horizon, mrp.n_states, path_budget)
        on_state = mrp.reward_on == "state"

        def walk(t: int, x: int, mass: Fraction, total: Fraction) -> None:
            if t == mrp.horizon:
                if on_state and mrp.include_final_reward:
                    total = total + mrp.state_reward[x]
                if mrp.salvage is not None:
                    total = total + mrp.salvage[x]
                masses[total] = masses.get(total, ZERO) + mass
                return
            if on_state:
                total = total + mrp.state_reward[x]
            for y, p in mrp.successors(x):
                step = total if on_state else total + mrp.transition_reward[(x, y)]
                walk(t + 1, y, mass * p, step)

        for x, p in enumerate(mrp.mu0):
            if p > 0:
                walk(0, x, p, ZERO)
        return StepCdf.from_masses(masses)

    raise PreconditionError(
        f"exact_total_reward_distribution: unsupported input {type(process).__name__}")
