"""Maximum-entropy IRL over the 12 state-action pairs.

The forward model is discounted soft value iteration, which yields a
stationary stochastic policy. ``maxent_irl`` fits the linear reward
``r = theta @ f`` by gradient ascent on the discounted MaxEnt log-likelihood
of the observed actions. Its per-pair ascent direction is the difference
between two pair-visitation vectors of equal mass: the one obtained by
starting from the observed steps and the one obtained by starting from the
observed states and following the current policy.

Accounts are independent, so every routine here has a batched core that
fits many accounts at once. Each account keeps its own convergence test, so
a batched fit gives the same numbers as fitting the account alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from trollirl.mdp import N_ACTIONS, N_PAIRS, N_STATES

GRADIENTS = ("likelihood", "visitation")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class IrlConfig:
    gamma: float = 0.9
    learning_rate: float = 0.01
    epochs: int = 200
    vi_tolerance: float = 1e-6
    # None means "use the trajectory length".
    horizon: Optional[int] = None
    seed: int = 0
    max_vi_iterations: int = 10_000
    # "likelihood": exact gradient of the discounted MaxEnt log-likelihood.
    # "visitation": finite-horizon forward visitation from the first state.
    gradient: str = "likelihood"

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.vi_tolerance <= 0:
            raise ValueError("vi_tolerance must be positive")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.max_vi_iterations < 1:
            raise ValueError("max_vi_iterations must be positive")
        if self.gradient not in GRADIENTS:
            raise ValueError(f"gradient must be one of {GRADIENTS}, got {self.gradient!r}")


def _probs(T) -> np.ndarray:
    return np.asarray(getattr(T, "probs", T), dtype=float)


def logsumexp_rows(q: np.ndarray) -> np.ndarray:
    """Overflow-safe log-sum-exp over the last axis."""
    m = q.max(axis=-1)
    return m + np.log(np.exp(q - m[..., None]).sum(axis=-1))


def _backup(r, probs, v, gamma):
    # r: (N, 3, 4), probs: (N, 3, 4, 3), v: (N, 3)
    return r + gamma * (probs * v[:, None, None, :]).sum(axis=-1)


def soft_value_iteration_batch(probs, r, gamma: float, tol: float = 1e-6,
                               max_iter: int = 10_000, v_init=None):
    """Batched soft value iteration.

    Returns ``(pi, q, v, residual)``; accounts whose residual is still
    ``>= tol`` after ``max_iter`` sweeps did not converge.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    n = len(probs)
    r = np.asarray(r, dtype=float).reshape(n, N_STATES, N_ACTIONS)
    v = np.zeros((n, N_STATES)) if v_init is None else np.array(v_init, dtype=float)
    residual = np.full(n, np.inf)
    active = np.arange(n)
    for _ in range(max_iter):
        v_new = logsumexp_rows(_backup(r[active], probs[active], v[active], gamma))
        res = np.max(np.abs(v_new - v[active]), axis=1)
        v[active] = v_new
        residual[active] = res
        active = active[res >= tol]
        if active.size == 0:
            break
    q = _backup(r, probs, v, gamma)
    v = logsumexp_rows(q)
    pi = np.exp(q - v[..., None])
    return pi, q, v, residual


def soft_value_iteration(T, r, gamma: float, tol: float = 1e-6, max_iter: int = 10_000,
                         v_init=None):
    """Soft Bellman fixed point ``V(s) = logsumexp_a Q(s, a)``.

    ``Q(s, a) = r(s, a) + gamma * sum_s' T[s, a, s'] V(s')``. Iterates until
    the max-abs change in V drops below ``tol`` and returns ``(pi, Q)``,
    both 3x4, with ``pi[s, a] = exp(Q[s, a] - V[s])``.
    """
    probs = _probs(T)[None]
    v0 = None if v_init is None else np.asarray(v_init, dtype=float)[None]
    pi, q, _, residual = soft_value_iteration_batch(probs, np.asarray(r)[None], gamma, tol,
                                                    max_iter, v0)
    if residual[0] >= tol:
        raise ConvergenceError(
            f"soft value iteration did not converge in {max_iter} iterations "
            f"(residual {residual[0]:.3g})", float(residual[0]))
    return pi[0], q[0]


def soft_residuals(T, r, gamma: float, n_iter: int) -> np.ndarray:
    """Max-abs change in V for each of the first ``n_iter`` sweeps from V = 0."""
    probs = _probs(T)[None]
    r = np.asarray(r, dtype=float).reshape(1, N_STATES, N_ACTIONS)
    v = np.zeros((1, N_STATES))
    out = np.empty(n_iter)
    for i in range(n_iter):
        v_new = logsumexp_rows(_backup(r, probs, v, gamma))
        out[i] = np.max(np.abs(v_new - v))
        v = v_new
    return out


def pair_transitions(T, pi) -> np.ndarray:
    """12x12 chain over pairs: ``P[(s,a), (s',a')] = T[s,a,s'] pi[s',a']``.

    Accepts a leading batch axis on both arguments.
    """
    probs = _probs(T)
    pi = np.asarray(pi, dtype=float)
    lead = probs.shape[:-3]
    P = probs.reshape(*lead, N_PAIRS, N_STATES)[..., None] * pi[..., None, :, :]
    return P.reshape(*lead, N_PAIRS, N_PAIRS)


def expected_visitation(T, pi, rho0, horizon: int) -> np.ndarray:
    """Expected pair visits over ``horizon`` steps of the stationary policy.

    ``d_0 = rho0`` and ``d_{t+1}(s') = sum_{s,a} d_t(s) pi[s,a] T[s,a,s']``;
    the result accumulates ``d_t(s) pi[s,a]`` and so sums to ``horizon``.
    """
    if horizon < 1:
        raise ValueError("horizon must be positive")
    rho0 = np.asarray(rho0, dtype=float)
    if abs(rho0.sum() - 1.0) > 1e-9:
        raise ValueError("rho0 must sum to 1")
    return _visitation_batch(_probs(T)[None], np.asarray(pi, dtype=float)[None], rho0[None],
                             np.array([horizon]))[0]


def _visitation_batch(probs, pi, rho0, horizons) -> np.ndarray:
    d = rho0.copy()
    visits = np.zeros(pi.shape)
    for t in range(int(horizons.max())):
        sa = d[:, :, None] * pi
        live = (t < horizons)[:, None, None]
        visits += np.where(live, sa, 0.0)
        d = (sa[..., None] * probs).sum(axis=(1, 2))
    return visits.reshape(len(pi), N_PAIRS)


def _pair_indices(traj) -> np.ndarray:
    if hasattr(traj, "pair_indices"):
        return np.asarray(traj.pair_indices(), dtype=int)
    idx = np.asarray(traj, dtype=int)
    if idx.ndim == 2:
        idx = N_ACTIONS * idx[:, 0] + idx[:, 1]
    return idx.reshape(-1)


def empirical_counts(traj,horizon: Optional[int] = None) -> np.ndarray:
    """Pair visit counts of a trajectory, rescaled to total mass ``horizon``.

    ``traj`` is a Trajectory, a list of (state, action) steps or of pair indices.
    """
    idx = _pair_indices(traj)
    if idx.size == 0:
        raise ValueError("empty trajectory")
    counts = np.bincount(idx, minlength=N_PAIRS).astype(float)
    if horizon is not None:
        counts *= horizon / idx.size
    return counts


def initial_distribution(traj) -> np.ndarray:
    steps = getattr(traj, "steps", traj)
    if len(steps) == 0:
        raise ValueError("empty trajectory")
    rho0 = np.zeros(N_STATES)
    rho0[int(steps[0][0])] = 1.0
    return rho0


@dataclass
class Demonstrations:
    """Per-account sufficient statistics for a batch of IRL fits."""

    probs: np.ndarray   # (N, 3, 4, 3) transition models
    counts: np.ndarray  # (N, 12) raw pair counts
    rho0: np.ndarray    # (N, 3) first-state indicators

    @classmethod
    def from_trajectories(cls, Ts: Sequence, trajs: Sequence) -> "Demonstrations":
        if len(Ts) != len(trajs):
            raise ValueError("one transition model per trajectory")
        return cls(np.stack([_probs(T) for T in Ts]),
                   np.stack([empirical_counts(t) for t in trajs]),
                   np.stack([initial_distribution(t) for t in trajs]))

    def __len__(self) -> int:
        return len(self.counts)

    def take(self, idx) -> "Demonstrations":
        return Demonstrations(self.probs[idx], self.counts[idx], self.rho0[idx])


def reward_gradient_batch(demos: Demonstrations, r, cfg: IrlConfig, v_init=None):
    """Per-pair ascent directions ``D_emp - D_model``, shape (N, 12).

    Returns ``(direction, pi, v, residual)``; ``v`` warm-starts the next call.
    """
    n = len(demos)
    pi, _, v, residual = soft_value_iteration_batch(demos.probs, r, cfg.gamma, cfg.vi_tolerance,
                                                    cfg.max_vi_iterations, v_init)
    counts = demos.counts
    length = counts.sum(axis=1)
    if cfg.gradient == "visitation":
        horizons = np.full(n, cfg.horizon) if cfg.horizon else length.astype(int)
        d_emp = counts * (horizons / length)[:, None]
        d_model = _visitation_batch(demos.probs, pi, demos.rho0, horizons)
        return d_emp - d_model, pi, v, residual
    states = counts.reshape(n, N_STATES, N_ACTIONS).sum(axis=2)
    model_counts = (states[:, :, None] * pi).reshape(n, N_PAIRS)
    # Discounted successor visitation: (1 - gamma) (I - gamma P^T)^-1 c.
    A = np.eye(N_PAIRS) - cfg.gamma * np.swapaxes(pair_transitions(demos.probs, pi), 1, 2)
    diff = np.linalg.solve(A, (counts - model_counts)[..., None])[..., 0]
    return (1.0 - cfg.gamma) * diff, pi, v, residual


def reward_gradient(T, r, traj, cfg: IrlConfig, v_init=None):
    """Single-account ``reward_gradient_batch``: ``(direction, pi, v)``."""
    demos = Demonstrations.from_trajectories([T], [traj])
    v0 = None if v_init is None else np.asarray(v_init, dtype=float)[None]
    direction, pi, v, residual = reward_gradient_batch(demos, np.asarray(r)[None], cfg, v0)
    if residual[0] >= cfg.vi_tolerance:
        raise ConvergenceError("soft value iteration did not converge", float(residual[0]))
    return direction[0], pi[0], v[0]


def log_likelihood(T, r, traj, gamma: float, tol: float = 1e-12, max_iter: int = 100_000):
    """``(1 - gamma) * sum_t log pi(a_t | s_t)`` under the soft policy of ``r``.

    The objective whose exact gradient ``reward_gradient`` returns in
    "likelihood" mode. ``r`` may be (12,) or a batch (N, 12).
    """
    r = np.asarray(r, dtype=float)
    batch = r.reshape(-1, N_PAIRS)
    probs = np.broadcast_to(_probs(T), (len(batch), N_STATES, N_ACTIONS, N_STATES))
    pi, _, _, residual = soft_value_iteration_batch(probs, batch, gamma, tol, max_iter)
    if np.any(residual >= tol):
        raise ConvergenceError("soft value iteration did not converge", float(residual.max()))
    ll = (1.0 - gamma) * np.log(pi.reshape(-1, N_PAIRS)) @ empirical_counts(traj)
    return float(ll[0]) if r.ndim == 1 else ll


@dataclass
class BatchFit:
    params: np.ndarray            # (N, ...) fitted parameters
    rewards: np.ndarray           # (N, 12)
    errors: list[Optional[Exception]]


def run_gradient_ascent(demos: Demonstrations, params, rewards_of, grad_of,
                        cfg: IrlConfig) -> BatchFit:
    """Shared ascent loop; failing accounts are frozen and reported, not dropped.

    ``rewards_of(params, idx)`` maps parameters to (n, 12) rewards and
    ``grad_of(params, idx, direction)`` pulls per-pair directions back to
    parameter space.
    """
    n = len(demos)
    params = np.array(params, dtype=float)
    errors: list[Optional[Exception]] = [None] * n
    v = np.zeros((n, N_STATES))
    live = np.arange(n)
    for epoch in range(cfg.epochs):
        if live.size == 0:
            break
        r = rewards_of(params[live], live)
        direction, _, v_live, residual = reward_gradient_batch(demos.take(live), r, cfg, v[live])
        v[live] = v_live
        step = grad_of(params[live], live, direction)
        bad_vi = residual >= cfg.vi_tolerance
        bad_num = ~np.all(np.isfinite(step.reshape(len(live), -1)), axis=1)
        for j in np.flatnonzero(bad_vi | bad_num):
            if bad_vi[j]:
                errors[live[j]] = ConvergenceError(
                    f"soft value iteration did not converge at epoch {epoch} "
                    f"(residual {residual[j]:.3g})", float(residual[j]))
            else:
                errors[live[j]] = FloatingPointError(f"non-finite gradient at epoch {epoch}")
        ok = ~(bad_vi | bad_num)
        params[live[ok]] += cfg.learning_rate * step[ok]
        live = live[ok]
    rewards = rewards_of(params, np.arange(n))
    return BatchFit(params, rewards, errors)


def maxent_irl_batch(f, demos: Demonstrations, cfg: IrlConfig = IrlConfig()) -> BatchFit:
    """Linear MaxEnt IRL for many accounts; ``params`` holds each theta."""
    f = np.asarray(f, dtype=float)
    theta0 = np.zeros((len(demos), f.shape[0]))
    return run_gradient_ascent(
        demos, theta0,
        rewards_of=lambda theta, idx: theta @ f,
        grad_of=lambda theta, idx, direction: direction @ f.T,
        cfg=cfg)


def maxent_irl(f, T, traj, cfg: IrlConfig = IrlConfig()):
    """Fit ``theta`` (5) so that the soft policy of ``r = theta @ f`` explains ``traj``.

    Plain gradient ascent from ``theta = 0``. Returns ``(r, theta)``.
    """
    fit = maxent_irl_batch(f, Demonstrations.from_trajectories([T], [traj]), cfg)
    if fit.errors[0] is not None:
        raise fit.errors[0]
    return fit.rewards[0], fit.params[0]
