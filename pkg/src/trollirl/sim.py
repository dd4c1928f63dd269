"""Synthetic accounts acting in the Twitter MDP with known rewards.

An agent in state ``s`` draws an action from the tempered soft-optimal
policy of its true reward, and the environment answers with the next state
drawn from ``response[action]``. Only feedback other than NT and actions
other than nt leave a line in the log, so silence is unrecorded exactly as
in real data. When ``response[nt, NT] == 0`` the logged events rebuild the
hidden trajectory minus its (NT, nt) steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from trollirl.activity import KIND_OF_ACTION, KIND_OF_STATE, ActivityEvent
from trollirl.irl import soft_value_iteration
from trollirl.mdp import N_ACTIONS, N_FEATURES, N_PAIRS, N_STATES, Action, State, feature_matrix

# Rows: tw, rt, rp, nt.  Columns: RT, RP, NT.
DEFAULT_RESPONSE = (
    (0.35, 0.15, 0.50),
    (0.20, 0.10, 0.70),
    (0.15, 0.45, 0.40),
    (0.55, 0.45, 0.00),
)

# Feature order: RT, RP, tw, rt, rp.
USER_THETA = (0.6, 0.5, 0.0, 0.2, 0.3)
TROLL_THETA = (-0.2, 0.0, 0.9, 0.5, -0.1)


@dataclass(frozen=True)
class EnvironmentModel:
    response: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_RESPONSE))

    def __post_init__(self):
        response = np.asarray(self.response, dtype=float)
        if response.shape != (N_ACTIONS, N_STATES):
            raise ValueError(f"response must be 4x3, got {response.shape}")
        if np.any(response < 0) or not np.allclose(response.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("response rows must be probability distributions")
        object.__setattr__(self, "response", response)

    def transitions(self) -> np.ndarray:
        """The MDP dynamics: the next state depends only on the action."""
        return np.broadcast_to(self.response, (N_STATES, N_ACTIONS, N_STATES)).copy()


@dataclass(frozen=True)
class AgentSpec:
    theta_true: Optional[Sequence[float]] = None
    r_true: Optional[Sequence[float]] = None
    temperature: float = 1.0
    label: str = "user"

    def __post_init__(self):
        if (self.theta_true is None) == (self.r_true is None):
            raise ValueError("give exactly one of theta_true and r_true")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.theta_true is not None and len(self.theta_true) != N_FEATURES:
            raise ValueError("theta_true must have 5 entries")
        if self.r_true is not None and len(self.r_true) != N_PAIRS:
            raise ValueError("r_true must have 12 entries")

    def reward(self) -> np.ndarray:
        if self.r_true is not None:
            return np.asarray(self.r_true, dtype=float)
        return np.asarray(self.theta_true, dtype=float) @ feature_matrix()


def agent_policy(spec: AgentSpec, env: EnvironmentModel, gamma: float = 0.9,
                 tol: float = 1e-10) -> np.ndarray:
    """``softmax(Q_soft(s, .) / temperature)`` for the agent's true reward."""
    _, q = soft_value_iteration(env.transitions(), spec.reward(), gamma, tol)
    z = q / spec.temperature
    z = z - z.max(axis=1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=1, keepdims=True)


def sample_trajectory(pi: np.ndarray, env: EnvironmentModel, steps: int,
                      rng: np.random.Generator, start: State = State.NT):
    """Hidden (state, action) sequence of ``steps`` interactions."""
    if steps < 1:
        raise ValueError("steps must be positive")
    cum_pi = np.cumsum(pi, axis=1)
    cum_resp = np.cumsum(env.response, axis=1)
    u = rng.random((steps, 2))
    s = int(start)
    out = []
    for t in range(steps):
        a = min(int(np.searchsorted(cum_pi[s], u[t, 0], side="right")), N_ACTIONS - 1)
        out.append((State(s), Action(a)))
        s = min(int(np.searchsorted(cum_resp[a], u[t, 1], side="right")), N_STATES - 1)
    return out


def render_events(account_id: str, steps, rng: np.random.Generator, t0: int = 0,
                  label: Optional[str] = None) -> list[ActivityEvent]:
    """Log lines for a hidden trajectory: feedback first, then the reaction."""
    events = []
    ts = t0
    for s, a in steps:
        if s is not State.NT:
            ts += int(rng.integers(1_000, 600_000))
            events.append(ActivityEvent(account_id, ts, KIND_OF_STATE[s], label))
        if a is not Action.nt:
            ts += int(rng.integers(1_000, 600_000))
            events.append(ActivityEvent(account_id, ts, KIND_OF_ACTION[a], label))
    return events


def simulate_agent(spec: AgentSpec, env: EnvironmentModel, steps: int, seed,
                   account_id: str = "agent", gamma: float = 0.9, t0: int = 0,
                   with_label: bool = False) -> list[ActivityEvent]:
    rng = np.random.default_rng(seed)
    pi = agent_policy(spec, env, gamma)
    hidden = sample_trajectory(pi, env, steps, rng)
    return render_events(account_id, hidden, rng, t0, spec.label if with_label else None)


def observed_dynamics(env: EnvironmentModel, pi: np.ndarray) -> np.ndarray:
    """Dynamics of the trajectory rebuilt from the log.

    Dropping an unlogged (NT, nt) step sends the chain straight on to the
    state the environment draws after nt, so NT mass is partly rerouted.
    """
    resp = env.response
    nt, NT = int(Action.nt), int(State.NT)
    if resp[nt, NT] != 0:
        raise ValueError("rebuilt dynamics need response[nt, NT] == 0")
    q = pi[NT, nt]
    rows = resp.copy()
    rows[:, NT] = resp[:, NT] * (1.0 - q)
    for s in (int(State.RT), int(State.RP)):
        rows[:, s] = resp[:, s] + resp[:, NT] * q * resp[nt, s]
    return np.broadcast_to(rows, (N_STATES, N_ACTIONS, N_STATES)).copy()


StepSpec = Union[int, tuple[int, int]]


def _draw_steps(steps: StepSpec, rng: np.random.Generator) -> int:
    if isinstance(steps, (int, np.integer)):
        return int(steps)
    lo, hi = steps
    return int(round(np.exp(rng.uniform(np.log(lo), np.log(hi)))))


def generate_population(n_troll: int, n_user: int, troll_spec: Optional[AgentSpec] = None,
                        user_spec: Optional[AgentSpec] = None,
                        env: Optional[EnvironmentModel] = None, steps: StepSpec = 200,
                        seed: int = 0, spread: float = 0.35, gamma: float = 0.9):
    """Simulate a labelled population; returns ``(events, labels)``.

    Every account gets its own reward, the class reward jittered by
    ``spread`` standard deviations per feature, and its own child seed of
    ``seed``. ``steps`` may be a ``(lo, hi)`` range sampled log-uniformly.
    Account ids are neutral and the two classes are interleaved.
    """
    if n_troll < 1 or n_user < 1:
        raise ValueError("both classes need at least one account")
    troll_spec = troll_spec or AgentSpec(theta_true=TROLL_THETA, label="troll")
    user_spec = user_spec or AgentSpec(theta_true=USER_THETA, label="user")
    env = env or EnvironmentModel()
    n = n_troll + n_user
    root = np.random.SeedSequence(seed)
    order_rng = np.random.default_rng(root.spawn(1)[0])
    labels_in_order = ["troll"] * n_troll + ["user"] * n_user
    perm = order_rng.permutation(n)
    children = root.spawn(n)
    width = len(str(n - 1))
    events: list[ActivityEvent] = []
    labels: dict[str, str] = {}
    for i in range(n):
        label = labels_in_order[perm[i]]
        base = troll_spec if label == "troll" else user_spec
        rng = np.random.default_rng(children[i])
        account_id = f"acct{i:0{width}d}"
        r = base.reward() + spread * (rng.standard_normal(N_FEATURES) @ feature_matrix())
        spec = AgentSpec(r_true=tuple(r), temperature=base.temperature, label=label)
        pi = agent_policy(spec, env, gamma)
        hidden = sample_trajectory(pi, env, _draw_steps(steps, rng), rng)
        t0 = int(rng.integers(1_400_000_000_000, 1_500_000_000_000))
        events.extend(render_events(account_id, hidden, rng, t0, label))
        labels[account_id] = label
    return events, labels
