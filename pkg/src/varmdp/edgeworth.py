"""Long-horizon total-reward CDF estimation for ergodic state-rewarded chains.

For an ergodic chain with stationary distribution ``xi`` and state
reward ``r``, the ``N``-step total is asymptotically normal with mean
``N * zeta`` (``zeta = xi . r``) and variance ``sigma^2 * N``.  The
estimate used here sharpens the normal limit by the first Edgeworth
correction term,

    F(tau) ~= g(y) + gamma(y)/(sigma sqrt(N)) *
              [kappa/(6 sigma^2) * (1 - y^2) - rhat_start],
    y = (tau - N zeta) / (sigma sqrt(N)),

with ``g``/``gamma`` the standard normal CDF/density, ``kappa`` the
asymptotic third cumulant of the total per step, and ``rhat`` the
solution of the Poisson equation ``P rhat = rhat - r + zeta 1``
(averaged over the start distribution).  All chain-level quantities come
out of the fundamental kernel ``Z = (I - P - Xi)^{-1}`` where ``Xi``
stacks ``xi`` row-wise.

Geometric ergodicity is certified structurally: a finite chain that is
one strongly connected aperiodic class qualifies; anything else is
rejected with an ergodicity error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import ndtr

from .errors import (BudgetExceededError, ConvergenceError, DegenerateVarianceError,
                     ErgodicityError, PreconditionError)
from .mdp import (DeterministicPolicy, FiniteMdp, MarkovRewardProcess, induced_mrp,
                  restrict_to_reachable)
from .pareto import ParetoFront
from .transform import transform

logger = logging.getLogger(__name__)

_XI_TOL = 1e-12
_POISSON_TOL = 1e-10
_SIGMA2_FLOOR = -1e-12
_DEGENERATE_SIGMA2 = 1e-12


def check_ergodic_structure(P: np.ndarray) -> None:
    """Require one strongly connected, aperiodic class; else raise with the classes."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    n_comp, labels = connected_components(P > 0, directed=True, connection="strong")
    if n_comp != 1:
        classes = [sorted(np.nonzero(labels == k)[0].tolist()) for k in range(n_comp)]
        raise ErgodicityError(
            f"chain is reducible: {n_comp} communicating classes {classes}")
    if n == 1:
        return
    # period = gcd over edges (u, v) of d(u) + 1 - d(v) for any BFS labeling d
    dist = np.full(n, -1)
    dist[0] = 0
    queue = [0]
    while queue:
        u = queue.pop(0)
        for v in np.nonzero(P[u] > 0)[0]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    g = 0
    for u in range(n):
        for v in np.nonzero(P[u] > 0)[0]:
            g = math.gcd(g, int(dist[u]) + 1 - int(dist[v]))
    if abs(g) != 1:
        raise ErgodicityError(f"chain is periodic with period {abs(g)}")


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Solve ``xi P = xi``, ``sum xi = 1`` on a single aperiodic recurrent class."""
    P = np.asarray(P, dtype=float)
    check_ergodic_structure(P)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        xi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ErgodicityError(f"stationary solve failed: {exc}") from exc
    xi = np.where(np.abs(xi) < 1e-15, 0.0, xi)
    if xi.min() < -1e-12:
        raise ErgodicityError(f"stationary solve produced negative mass {xi.min():.3e}")
    xi = np.clip(xi, 0.0, None)
    xi /= xi.sum()
    residual = np.abs(xi @ P - xi).max()
    if residual > _XI_TOL:
        raise ErgodicityError(f"stationary residual {residual:.3e} exceeds {_XI_TOL}")
    return xi


@dataclass(frozen=True)
class ChainSpectralData:
    """Stationary/spectral quantities of one ergodic state-rewarded chain."""

    P: np.ndarray
    r: np.ndarray
    xi: np.ndarray
    zeta: float
    rhat: np.ndarray
    sigma2: float
    z_kernel: np.ndarray   # (I - P - Xi)^{-1}
    h_kernel: np.ndarray   # I - P - Xi
    cond_h: float


def solve_poisson(P: np.ndarray, r: np.ndarray):
    """Return ``(zeta, rhat, Z)`` with ``P rhat = rhat - r + zeta 1`` and ``xi rhat = 0``.

    ``Z`` is the fundamental kernel ``(I - P - Xi)^{-1}``; the residual
    is checked against 1e-10 and the solution re-centered to the
    ``xi . rhat = 0`` gauge.
    """
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    xi = stationary_distribution(P)
    zeta = float(xi @ r)
    n = P.shape[0]
    H = np.eye(n) - P - np.tile(xi, (n, 1))
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > 1e14:
        raise ErgodicityError(f"fundamental kernel is numerically singular (cond ~ {cond:.3e})")
    Z = np.linalg.inv(H)
    rhat = Z @ (r - zeta)
    rhat = rhat - float(xi @ rhat)  # gauge: stationary mean zero
    residual = np.abs(P @ rhat - rhat + r - zeta).max()
    if residual > _POISSON_TOL:
        raise ErgodicityError(
            f"Poisson residual {residual:.3e} exceeds {_POISSON_TOL} (cond ~ {cond:.3e})")
    return zeta, rhat, Z


def spectral_data(P: np.ndarray, r: np.ndarray) -> ChainSpectralData:
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    xi = stationary_distribution(P)
    zeta, rhat, Z = solve_poisson(P, r)
    n = P.shape[0]
    H = np.eye(n) - P - np.tile(xi, (n, 1))
    data = ChainSpectralData(P=P, r=r, xi=xi, zeta=zeta, rhat=rhat,
                             sigma2=0.0, z_kernel=Z, h_kernel=H,
                             cond_h=float(np.linalg.cond(H)))
    sigma2 = asymptotic_variance(data)
    return ChainSpectralData(P=P, r=r, xi=xi, zeta=zeta, rhat=rhat, sigma2=sigma2,
                             z_kernel=Z, h_kernel=H, cond_h=data.cond_h)


def asymptotic_variance(data: ChainSpectralData) -> float:
    """``sigma^2 = sum_x [rhat(x)^2 - (P rhat)(x)^2] xi(x)``, clamped at zero."""
    Pr = data.P @ data.rhat
    sigma2 = float(((data.rhat ** 2 - Pr ** 2) * data.xi).sum())
    if sigma2 < _SIGMA2_FLOOR:
        raise ErgodicityError(f"asymptotic variance {sigma2:.3e} is negative")
    return max(sigma2, 0.0)


def mixing_truncation(P: np.ndarray, xi: np.ndarray, tol: float = 1e-12,
                      t_cap: int = 200_000) -> int:
    """Smallest power of two T with ``max |P^T - 1 xi|`` row-sum below ``tol``."""
    limit = np.tile(xi, (P.shape[0], 1))
    M = np.asarray(P, dtype=float)
    T = 1
    while np.abs(M - limit).sum(axis=1).max() > tol:
        if T >= t_cap:
            ev = np.sort(np.abs(np.linalg.eigvals(P)))[-2] if P.shape[0] > 1 else 0.0
            raise ConvergenceError(
                f"mixing truncation cap {t_cap} reached; second eigenvalue modulus "
                f"~ {ev:.6f} implies mixing time beyond the cap")
        M = M @ M
        T *= 2
    return T


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    k1: float
    k2: float
    k3: float
    truncation: int


def third_moment_constant(P: np.ndarray, r: np.ndarray,
                          start_distribution: np.ndarray | None = None,
                          truncation: int | None = None, tol: float = 1e-12,
                          t_cap: int = 200_000, one_sided: bool = False) -> KappaResult:
    """Asymptotic third-cumulant constant ``kappa = k1 + k2 + k3`` of the total per step.

    With the centered reward ``rt = r - zeta`` and start weights ``mu``
    (the stationary ``xi`` unless ``start_distribution`` is given):

        k1 = E_mu[rt(X_0)^3]
        k2 = 3 * sum_{i>=1} (E_mu[rt^2(X_0) rt(X_i)] + E_mu[rt(X_0) rt^2(X_i)])
        k3 = 6 * sum_{i,j>=1} E_mu[rt(X_0) rt(X_i) rt(X_{i+j})]

    Sums are truncated at the mixing time (geometric ergodicity makes the
    tails negligible at the chosen tolerance).  ``one_sided=True`` keeps
    only the first ordering inside k2, for the reading of the lag sum
    that starts at lag one and ignores the mirrored ordering; the default
    two-sided form is the one that matches the third cumulant.
    """
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    xi = stationary_distribution(P)
    zeta = float(xi @ r)
    rt = r - zeta
    mu = xi if start_distribution is None else np.asarray(start_distribution, dtype=float)
    if truncation is None:
        truncation = mixing_truncation(P, xi, tol=tol, t_cap=t_cap)
    T = int(truncation)

    k1 = float((rt ** 3 * mu).sum())
    w = rt.copy()
    w2 = rt * rt
    s = np.zeros_like(rt)
    k2 = 0.0
    for _ in range(T):
        w = P @ w
        w2 = P @ w2
        k2 += float((mu * rt * rt) @ w)
        if not one_sided:
            k2 += float((mu * rt) @ w2)
        s += w
    k2 *= 3.0
    v = rt * s
    k3 = 0.0
    for _ in range(T):
        v = P @ v
        k3 += float((mu * rt) @ v)
    k3 *= 6.0
    return KappaResult(kappa=k1 + k2 + k3, k1=k1, k2=k2, k3=k3, truncation=T)


@dataclass(frozen=True)
class EdgeworthCdf:
    """Normal-plus-correction estimate of the total-reward CDF after ``n_steps``."""

    n_steps: int
    zeta: float
    sigma2: float
    kappa: float
    rhat_start: float
    cond_h: float = float("nan")
    truncation: int = 0

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def evaluate(self, tau):
        tau = np.asarray(tau, dtype=float)
        scale = self.sigma * math.sqrt(self.n_steps)
        y = (tau - self.n_steps * self.zeta) / scale
        density = np.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi)
        correction = density / scale * (
            self.kappa / (6.0 * self.sigma2) * (1.0 - y * y) - self.rhat_start)
        out = np.clip(ndtr(y) + correction, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def normal_reference(self, tau):
        """The plain normal limit with the same mean and scale (no correction)."""
        tau = np.asarray(tau, dtype=float)
        scale = self.sigma * math.sqrt(self.n_steps)
        out = ndtr((tau - self.n_steps * self.zeta) / scale)
        return float(out) if out.ndim == 0 else out


def float_chain(mrp: MarkovRewardProcess):
    """Float (P, r, mu0) arrays of a state-rewarded process."""
    if mrp.reward_on != "state":
        raise PreconditionError(
            "float_chain: transition-rewarded process; apply the pair-state "
            "transformation first")
    P = np.array([[float(p) for p in row] for row in mrp.kernel])
    r = np.array([float(v) for v in mrp.state_reward])
    mu0 = np.array([float(p) for p in mrp.mu0])
    return P, r, mu0


def estimate_cdf(mrp: MarkovRewardProcess, n_steps: int,
                 kappa_start: str = "stationary", truncation: int | None = None,
                 one_sided_kappa: bool = False) -> EdgeworthCdf:
    """Estimate the CDF of the ``n_steps``-term total reward of an ergodic chain.

    ``n_steps`` is the number of reward summands.  The start distribution
    enters through ``rhat_start = E_mu0[rhat]``; the third-moment
    constant is computed under the stationary law unless
    ``kappa_start="initial"``.  Degenerate variance is refused.
    """
    P, r, mu0 = float_chain(mrp)
    return estimate_cdf_arrays(P, r, mu0, n_steps, kappa_start=kappa_start,
                               truncation=truncation, one_sided_kappa=one_sided_kappa)


def estimate_cdf_arrays(P, r, mu0, n_steps: int, kappa_start: str = "stationary",
                        truncation: int | None = None,
                        one_sided_kappa: bool = False) -> EdgeworthCdf:
    """Array-level variant of ``estimate_cdf`` for chains given as float matrices."""
    if n_steps < 1:
        raise PreconditionError("estimate_cdf: n_steps must be >= 1")
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    data = spectral_data(P, r)
    if data.sigma2 <= _DEGENERATE_SIGMA2:
        raise DegenerateVarianceError(
            f"asymptotic variance {data.sigma2:.3e} is (numerically) zero; "
            f"the normalized total reward is degenerate")
    if kappa_start == "stationary":
        start = None
    elif kappa_start == "initial":
        start = mu0
    else:
        raise PreconditionError(f"estimate_cdf: unknown kappa_start {kappa_start!r}")
    kap = third_moment_constant(P, r, start_distribution=start, truncation=truncation,
                                one_sided=one_sided_kappa)
    return EdgeworthCdf(
        n_steps=int(n_steps), zeta=data.zeta, sigma2=data.sigma2, kappa=kap.kappa,
        rhat_start=float(mu0 @ data.rhat), cond_h=data.cond_h, truncation=kap.truncation)


def enumerate_stationary_policies(mdp: FiniteMdp) -> list[DeterministicPolicy]:
    """All stationary deterministic policies, in lexicographic action order."""
    combos = product(*(mdp.actions[x] for x in range(mdp.n_states)))
    return [DeterministicPolicy.from_stationary(dict(enumerate(c))) for c in combos]


def policy_chain(mdp: FiniteMdp, policy: DeterministicPolicy) -> MarkovRewardProcess:
    """Induced chain of a stationary policy, prepared for long-horizon estimation.

    Salvage is dropped (a bounded terminal term is negligible at long
    horizons and the estimator does not model it), the chain is
    restricted to states reachable from the start, and SAS instances are
    routed through the pair-state transformation.
    """
    mrp = restrict_to_reachable(induced_mrp(mdp, policy, keep_salvage=False))
    if mrp.reward_on == "transition":
        return transform(mrp)
    return mrp


def pareto_front_long(mdp: FiniteMdp, n_steps: int, tau_grid: Sequence[float],
                      max_policies: int = 10_000) -> ParetoFront:
    """Estimated front: pointwise minimum of per-policy CDF estimates.

    Enumerates stationary deterministic policies; non-ergodic or
    degenerate-variance chains are skipped with a logged warning.  The
    number of reward terms is ``n_steps`` for both reward conventions
    (an SAS chain over ``n_steps`` epochs pays ``n_steps`` transition
    rewards; its pair chain pays the same count of state rewards).
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or len(taus) < 2 or np.any(np.diff(taus) <= 0):
        raise PreconditionError("pareto_front_long: grid must be strictly increasing")
    count = 1
    for acts in mdp.actions:
        count *= len(acts)
    if count > max_policies:
        raise BudgetExceededError(
            f"long-horizon front refused: {count} stationary policies exceed "
            f"budget {max_policies}")
    policies = enumerate_stationary_policies(mdp)
    best = np.full(len(taus), np.inf)
    witness = np.full(len(taus), -1, dtype=int)
    listings: dict[int, str] = {}
    used = 0
    for pid, policy in enumerate(policies):
        try:
            cdf = estimate_cdf(policy_chain(mdp, policy), n_steps)
        except (ErgodicityError, DegenerateVarianceError) as exc:
            logger.warning("policy %d skipped: %s", pid, exc)
            continue
        used += 1
        values = cdf.evaluate(taus)
        improved = values < best
        best = np.where(improved, values, best)
        witness = np.where(improved, pid, witness)
        listings[pid] = "\n".join(
            f"{mdp.states[x]} -> {policy.action(0, x)}" for x in range(mdp.n_states))
    if used == 0:
        raise ErgodicityError("no stationary policy induces an ergodic chain")
    best = np.maximum.accumulate(best)  # guard against float non-monotonicity in far tails
    present = {int(w) for w in witness if w >= 0}
    return ParetoFront(kind="estimated", grid=tuple(float(t) for t in taus),
                       value=tuple(float(v) for v in best),
                       witness=tuple(int(w) for w in witness),
                       policies={pid: listings[pid] for pid in sorted(present)})
