import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_steps
from test_irl import RT_RP_PAIRS, TW_PAIRS, always_tw_trajectory
from trollirl.deep import NetShape, backward, deep_maxent_irl, forward
from trollirl.irl import IrlConfig, log_likelihood, reward_gradient, soft_value_iteration
from trollirl.mdp import estimate_transitions, feature_matrix

F = feature_matrix().T


def test_zero_init_gives_zero_reward_and_uniform_policy():
    shape = NetShape.build(5, (8,))
    r, _ = forward(shape, np.zeros(shape.n_params), F)
    np.testing.assert_array_equal(r, 0.0)
    pi, _ = soft_value_iteration(np.full((3, 4, 3), 1 / 3), r[0], 0.9)
    np.testing.assert_allclose(pi, 0.25)


def test_shape_bookkeeping():
    shape = NetShape.build(5, (8, 4))
    assert shape.sizes == (5, 8, 4, 1)
    assert shape.n_params == 5 * 8 + 8 * 4 + 4 + 8 + 4 + 1
    p = shape.init(3)
    np.testing.assert_array_equal(p, shape.init(3))
    weights, biases = shape.unflatten(p)
    assert [w.shape[1:] for w in weights] == [(5, 8), (8, 4), (4, 1)]
    assert all(np.all(b == 0) for b in biases)
    with pytest.raises(ValueError):
        NetShape.build(5, ())


@given(st.integers(0, 10_000))
def test_forward_matches_loop(seed):
    shape = NetShape.build(5, (6,))
    p = np.random.default_rng(seed).normal(size=shape.n_params)
    (W1, W2), (b1, b2) = shape.unflatten(p)
    expected = [float(np.tanh(x @ W1[0] + b1[0]) @ W2[0, :, 0] + b2[0, 0]) for x in F]
    np.testing.assert_allclose(forward(shape, p, F)[0][0], expected, atol=1e-12)


@pytest.mark.parametrize("hidden", [(8,), (4, 3)])
def test_parameter_gradient_finite_difference(hidden):
    rng = np.random.default_rng(11)
    steps = random_steps(rng, 40)
    T = estimate_transitions(steps)
    shape = NetShape.build(5, hidden)
    p = shape.init(5, scale=2.0)
    p[-1] = 0.3
    cfg = IrlConfig(vi_tolerance=1e-12, max_vi_iterations=100_000)
    r, acts = forward(shape, p, F)
    direction, _, _ = reward_gradient(T, r[0], steps, cfg)
    analytic = backward(shape, p, acts, direction[None])[0]

    def objective(q):
        return log_likelihood(T, forward(shape, q, F)[0][0], steps, cfg.gamma)

    h = 1e-5
    numeric = np.array([(objective(p + h * e) - objective(p - h * e)) / (2 * h)
                        for e in np.eye(len(p))])
    assert np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric) < 1e-4


def test_deterministic_given_seed(rng):
    steps = random_steps(rng, 60)
    T = estimate_transitions(steps)
    a = deep_maxent_irl(feature_matrix(), T, steps, IrlConfig(epochs=30, seed=4))
    b = deep_maxent_irl(feature_matrix(), T, steps, IrlConfig(epochs=30, seed=4))
    c = deep_maxent_irl(feature_matrix(), T, steps, IrlConfig(epochs=30, seed=5))
    np.testing.assert_array_equal(a[0], b[0])
    assert not np.array_equal(a[1], c[1])


def test_always_tw_ranking():
    traj = always_tw_trajectory()
    r, _ = deep_maxent_irl(feature_matrix(), estimate_transitions(traj), traj)
    assert r[TW_PAIRS].min() > r[RT_RP_PAIRS].max()
