"""Deep MaxEnt IRL: the linear reward map replaced by a small tanh network.

Each pair's 5-feature column goes through the same fully connected network
to give its scalar reward. Training uses the same per-pair ascent direction
as the linear fit, backpropagated through the network. Parameters travel as
one flat vector per account so batches of accounts train together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trollirl.irl import BatchFit, Demonstrations, IrlConfig, run_gradient_ascent


@dataclass(frozen=True)
class NetShape:
    sizes: tuple[int, ...]  # input, hidden..., 1

    @classmethod
    def build(cls, n_inputs: int, hidden: Sequence[int]) -> "NetShape":
        if len(hidden) < 1 or any(h < 1 for h in hidden):
            raise ValueError("need at least one non-empty hidden layer")
        return cls((n_inputs, *hidden, 1))

    @property
    def n_params(self) -> int:
        return sum(m * n + n for m, n in zip(self.sizes[:-1], self.sizes[1:]))

    def unflatten(self, flat: np.ndarray):
        """(N, P) -> per-layer weights (N, m, n) and biases (N, n)."""
        flat = np.atleast_2d(flat)
        weights, biases, i = [], [], 0
        for m, n in zip(self.sizes[:-1], self.sizes[1:]):
            weights.append(flat[:, i:i + m * n].reshape(-1, m, n))
            i += m * n
        for n in self.sizes[1:]:
            biases.append(flat[:, i:i + n])
            i += n
        return weights, biases

    def init(self, seed: int = 0, scale: float = 0.5) -> np.ndarray:
        """Uniform(-scale, scale) / sqrt(fan_in) weights, zero biases."""
        rng = np.random.default_rng(seed)
        parts = [rng.uniform(-scale, scale, m * n) / np.sqrt(m)
                 for m, n in zip(self.sizes[:-1], self.sizes[1:])]
        parts += [np.zeros(n) for n in self.sizes[1:]]
        return np.concatenate(parts)


def forward(shape: NetShape, params: np.ndarray, F: np.ndarray):
    """Rewards (N, 12) for pair features ``F`` (12, 5) and the activations."""
    weights, biases = shape.unflatten(params)
    h = np.broadcast_to(F, (len(weights[0]), *F.shape))
    acts = [h]
    for W, b in zip(weights[:-1], biases[:-1]):
        h = np.tanh(np.einsum("npi,nio->npo", h, W) + b[:, None, :])
        acts.append(h)
    out = np.einsum("npi,nio->npo", h, weights[-1]) + biases[-1][:, None, :]
    return out[..., 0], acts


def backward(shape: NetShape, params: np.ndarray, acts, grad_out: np.ndarray) -> np.ndarray:
    """Flat parameter gradients (N, P) given d(objective)/d(reward) (N, 12)."""
    weights, _ = shape.unflatten(params)
    delta = grad_out[..., None]
    gW, gb = [None] * len(weights), [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        gW[layer] = np.einsum("npi,npo->nio", acts[layer], delta)
        gb[layer] = delta.sum(axis=1)
        if layer:
            h = acts[layer]
            delta = np.einsum("npo,nio->npi", delta, weights[layer]) * (1.0 - h * h)
    n = len(grad_out)
    return np.concatenate([g.reshape(n, -1) for g in (*gW, *gb)], axis=1)


def deep_maxent_irl_batch(f, demos: Demonstrations, cfg: IrlConfig = IrlConfig(),
                          hidden: Sequence[int] = (8,), params=None) -> BatchFit:
    """Deep MaxEnt IRL for many accounts; ``params`` holds each flat network."""
    f = np.asarray(f, dtype=float)
    shape = NetShape.build(f.shape[0], hidden)
    F = f.T
    if params is None:
        params = np.tile(shape.init(cfg.seed), (len(demos), 1))

    def rewards_of(p, idx):
        return forward(shape, p, F)[0]

    def grad_of(p, idx, direction):
        _, acts = forward(shape, p, F)
        return backward(shape, p, acts, direction)

    return run_gradient_ascent(demos, params, rewards_of, grad_of, cfg)


def deep_maxent_irl(f, T, traj, cfg: IrlConfig = IrlConfig(), hidden: Sequence[int] = (8,),
                    params=None):
    """Returns ``(r, params)``: the 12 learned rewards and the flat network."""
    init = None if params is None else np.asarray(params, dtype=float)[None]
    fit = deep_maxent_irl_batch(f, Demonstrations.from_trajectories([T], [traj]), cfg,
                                hidden, init)
    if fit.errors[0] is not None:
        raise fit.errors[0]
    return fit.rewards[0], fit.params[0]
