"""Pareto front of the total-reward CDF set, exact (short horizon) or estimated.

The front is the pointwise infimum of the CDFs of all deterministic
policies; both risk queries read off it.  For exact fronts the policies
range over decision rules on the reachable (state, accumulated reward)
pairs — decisions may depend on the running total, and a plain
state-feedback policy class would be strictly too small.

Atom convention of exact fronts: the stored value at a grid point
``tau`` is ``inf_pi P(total < tau)`` (the left limit), so that
``1 - value(tau)`` equals the non-strict exceedance optimum
``eta(tau) = sup_pi P(total >= tau)`` at every point, including atoms.
Between grid points the front evaluates as a left-continuous step
(constant on ``(grid[k-1], grid[k]]``), which keeps that identity
literal for every real threshold.  Estimated fronts hold float values
on a float grid and evaluate by linear interpolation.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

import numpy as np

from .augmented import build_augmented
from .errors import BudgetExceededError, PreconditionError, ValidationError
from .mdp import FiniteMdp, ZERO, ONE
from .rationals import parse_rational


@dataclass(frozen=True)
class ParetoFront:
    """Pointwise-infimum front over a threshold grid, with per-point witnesses."""

    kind: str                      # "exact" (rational grid) or "estimated" (float grid)
    grid: tuple
    value: tuple
    witness: tuple[int, ...]
    policies: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "estimated"):
            raise ValidationError(f"front kind: {self.kind!r}")
        if not (len(self.grid) == len(self.value) == len(self.witness)) or not self.grid:
            raise ValidationError("front: grid/value/witness lengths differ or empty")
        if any(self.grid[i] >= self.grid[i + 1] for i in range(len(self.grid) - 1)):
            raise ValidationError("front: grid must be strictly increasing")
        if any(v < 0 or v > 1 for v in self.value):
            raise ValidationError("front: values must lie in [0, 1]")
        if any(self.value[i] > self.value[i + 1] for i in range(len(self.value) - 1)):
            raise ValidationError("front: values must be nondecreasing")


def pareto_front_exact(mdp: FiniteMdp, max_policies: int = 200_000) -> ParetoFront:
    """Exact front by enumerating deterministic policies on the augmented slices.

    Every assignment of an action to each reachable (state, accumulated
    reward) pair at each decision epoch is one policy.  Each policy's
    exact total-reward distribution is computed by forward mass
    propagation; the grid is the union of all support points and the
    stored values are pointwise minima of the left limits ``P(total < tau)``.
    """
    aug = build_augmented(mdp, 0)
    slots = [(t, pair) for t in range(mdp.horizon) for pair in aug.layers[t]]
    choice_sets = [mdp.actions[pair[0]] for _, pair in slots]
    count = 1
    for cs in choice_sets:
        count *= len(cs)
        if count > max_policies:
            raise BudgetExceededError(
                f"exact front refused: at least {count} deterministic policies on the "
                f"augmented slices exceed budget {max_policies}")
    slot_index = {key: i for i, key in enumerate(slots)}

    per_policy: list[tuple[tuple[Fraction, ...], tuple[Fraction, ...]]] = []
    chosen: list[tuple] = []
    for choices in product(*choice_sets):
        dist: dict = {}
        for x, p in enumerate(mdp.mu0):
            if p > 0:
                dist[(x, ZERO)] = p
        for t in range(mdp.horizon):
            nxt: dict = {}
            for (x, c), mass in dist.items():
                a = choices[slot_index[(t, (x, c))]]
                for y, p in mdp.transitions(x, a):
                    key = (y, c + mdp.reward(x, a, y))
                    nxt[key] = nxt.get(key, ZERO) + mass * p
            dist = nxt
        masses: dict[Fraction, Fraction] = {}
        for (x, c), mass in dist.items():
            total = c + mdp.salvage[x]
            masses[total] = masses.get(total, ZERO) + mass
        support = tuple(sorted(masses))
        per_policy.append((support, tuple(masses[s] for s in support)))
        chosen.append(choices)

    grid = sorted({s for support, _ in per_policy for s in support})
    best = [ONE] * len(grid)
    witness = [-1] * len(grid)
    for pid, (support, prob) in enumerate(per_policy):
        j = 0
        below = ZERO
        for i, tau in enumerate(grid):
            while j < len(support) and support[j] < tau:
                below += prob[j]
                j += 1
            if below < best[i]:
                best[i] = below
                witness[i] = pid

    listings = {}
    for pid in sorted(set(witness)):
        lines = [f"t={t} ({mdp.states[pair[0]]}, {pair[1]}) -> "
                 f"{chosen[pid][slot_index[(t, pair)]]}"
                 for (t, pair) in slots]
        listings[pid] = "\n".join(lines)
    return ParetoFront(kind="exact", grid=tuple(grid), value=tuple(best),
                       witness=tuple(witness), policies=listings)


def _eta_exact(front: ParetoFront, tau: Fraction) -> Fraction:
    if tau > front.grid[-1]:
        return ZERO
    idx = bisect_left(front.grid, tau)
    return 1 - front.value[idx]


def query_eta(front: ParetoFront, tau):
    """Best exceedance probability ``1 - P(tau)`` read off the front.

    Exact fronts evaluate as left-continuous steps (below the grid the
    front carries no mass, above it all mass); estimated fronts
    interpolate linearly and clamp outside the grid span.
    """
    if front.kind == "exact":
        return _eta_exact(front, parse_rational(tau, "tau"))
    return 1.0 - float(np.interp(float(tau), front.grid, front.value))


def query_rho(front: ParetoFront, alpha):
    """Best threshold at exceedance level alpha: ``sup {tau : P(tau) <= 1 - alpha}``.

    Exact step fronts use the sup-of-level-set reading; strictly
    increasing estimated fronts invert the interpolated front, which is
    the unique preimage.  Out-of-range levels return signed infinity.
    """
    if isinstance(alpha, float) and not math.isfinite(alpha):
        raise PreconditionError("alpha: must be finite")
    if front.kind == "exact":
        a = parse_rational(alpha, "alpha")
        if a < 0 or a > 1:
            raise PreconditionError(f"alpha: {a} outside [0, 1]")
        if a == 0:
            return math.inf
        target = 1 - a
        idx = bisect_right(front.value, target) - 1
        if idx < 0:
            return -math.inf
        return front.grid[idx]
    a = float(alpha)
    if not 0.0 <= a <= 1.0:
        raise PreconditionError(f"alpha: {a} outside [0, 1]")
    values = np.asarray(front.value, dtype=float)
    if np.any(np.diff(values) <= 0):
        raise PreconditionError("query_rho: estimated front is not strictly increasing")
    target = 1.0 - a
    if target < values[0]:
        return -math.inf
    if target > values[-1]:
        return math.inf
    return float(np.interp(target, values, np.asarray(front.grid, dtype=float)))
