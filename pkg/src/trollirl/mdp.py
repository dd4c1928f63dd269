"""The Twitter interaction MDP: states, actions, pair features and transitions."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class State(IntEnum):
    """Feedback the environment gives the account."""

    RT = 0  # passive retweet
    RP = 1  # passive reply or mention
    NT = 2  # no engagement


class Action(IntEnum):
    """What the account does."""

    tw = 0  # original tweet
    rt = 1  # retweet
    rp = 2  # reply or mention
    nt = 3  # stays silent


N_STATES = len(State)
N_ACTIONS = len(Action)
N_PAIRS = N_STATES * N_ACTIONS
N_FEATURES = 5

FEATURE_NAMES = ("RT", "RP", "tw", "rt", "rp")


def pair_index(s: State, a: Action) -> int:
    return N_ACTIONS * int(s) + int(a)


def pair_from_index(p: int) -> tuple[State, Action]:
    if not 0 <= p < N_PAIRS:
        raise ValueError(f"pair index out of range: {p}")
    return State(p // N_ACTIONS), Action(p % N_ACTIONS)


def pair_code(p: int) -> str:
    s, a = pair_from_index(p)
    return f"{s.name}_{a.name}"


PAIR_CODES = tuple(pair_code(p) for p in range(N_PAIRS))


def encode_features(s: State, a: Action) -> np.ndarray:
    """Binary (RT, RP, tw, rt, rp) indicator vector of a state-action pair.

    NT and nt have no indicator of their own, so (NT, nt) encodes as all zeros.
    """
    v = np.zeros(N_FEATURES)
    if s is not State.NT:
        v[int(s)] = 1.0
    if a is not Action.nt:
        v[2 + int(a)] = 1.0
    return v


def feature_matrix() -> np.ndarray:
    """The 5x12 matrix whose column p is the encoding of pair p."""
    f = np.zeros((N_FEATURES, N_PAIRS))
    for p in range(N_PAIRS):
        f[:, p] = encode_features(*pair_from_index(p))
    return f


@dataclass(frozen=True)
class TransitionModel:
    """Per-account dynamics ``probs[s, a, s']`` with the counts behind them."""

    probs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (N_STATES, N_ACTIONS, N_STATES):
            raise ValueError(f"probs must be 3x4x3, got {self.probs.shape}")
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if not np.allclose(self.probs.sum(axis=2), 1.0, rtol=0, atol=1e-9):
            raise ValueError("transition rows must sum to 1")

    @classmethod
    def from_probs(cls, probs) -> "TransitionModel":
        probs = np.asarray(probs, dtype=float)
        return cls(probs=probs, counts=np.zeros(probs.shape, dtype=np.int64))

    @classmethod
    def uniform(cls) -> "TransitionModel":
        return cls.from_probs(np.full((N_STATES, N_ACTIONS, N_STATES), 1.0 / N_STATES))


def estimate_transitions(steps) -> TransitionModel:
    """Count (s, a, s') triplets over consecutive steps and row-normalise.

    ``steps`` is a sequence of (State, Action) pairs or a ``Trajectory``.
    Rows never observed fall back to the uniform distribution.
    """
    steps = getattr(steps, "steps", steps)
    if len(steps) < 2:
        raise ValueError("need at least two steps to estimate transitions")
    counts = np.zeros((N_STATES, N_ACTIONS, N_STATES), dtype=np.int64)
    for (s, a), (s_next, _) in zip(steps[:-1], steps[1:]):
        counts[s, a, s_next] += 1
    totals = counts.sum(axis=2, keepdims=True)
    probs = np.where(totals > 0, counts / np.maximum(totals, 1), 1.0 / N_STATES)
    return TransitionModel(probs=probs, counts=counts)
