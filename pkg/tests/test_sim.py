import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trollirl.activity import (build_trajectory, filter_accounts, parse_activity_log,
                               write_activity_log)
from trollirl.mdp import Action, State, estimate_transitions
from trollirl.sim import (AgentSpec, EnvironmentModel, agent_policy, generate_population,
                          observed_dynamics, render_events, sample_trajectory,
                          simulate_agent)

ENV = EnvironmentModel()


def action_counts(events):
    return Counter(a for _, a in build_trajectory(events).steps)


def test_zero_reward_uniform_actions():
    steps = sample_trajectory(agent_policy(AgentSpec(r_true=(0.0,) * 12), ENV), ENV, 10_000,
                              np.random.default_rng(0))
    freq = Counter(a for _, a in steps)
    for a in Action:
        assert abs(freq[a] / 10_000 - 0.25) <= 0.05


def test_tw_bonus_is_modal():
    r = np.zeros(12)
    r[[0, 4, 8]] = 10.0
    counts = action_counts(simulate_agent(AgentSpec(r_true=tuple(r)), ENV, 2_000, 1))
    assert counts.most_common(1)[0][0] is Action.tw


def test_temperature_flattens_policy():
    spec = dict(theta_true=(0.0, 0.0, 2.0, 0.0, 0.0))
    cold = agent_policy(AgentSpec(**spec, temperature=0.5), ENV)
    hot = agent_policy(AgentSpec(**spec, temperature=5.0), ENV)
    assert cold[0, Action.tw] > hot[0, Action.tw] > 0.25


def test_same_seed_same_log():
    spec = AgentSpec(theta_true=(0.3, -0.2, 0.5, 0.1, 0.0))

    def dump(seed):
        buf = io.StringIO()
        write_activity_log(simulate_agent(spec, ENV, 300, seed), buf)
        return buf.getvalue()

    assert dump(4) == dump(4)
    assert dump(4) != dump(5)


@given(st.integers(0, 10_000), st.integers(1, 300))
def test_schema_closure_and_timestamps(seed, steps):
    spec = AgentSpec(theta_true=(0.3, -0.2, 0.5, 0.1, 0.0))
    events = simulate_agent(spec, ENV, steps, seed, account_id="x", with_label=True)
    buf = io.StringIO()
    write_activity_log(events, buf)
    parsed = parse_activity_log(io.StringIO(buf.getvalue()))
    assert parsed == events
    ts = [e.timestamp for e in events]
    assert all(b > a for a, b in zip(ts, ts[1:]))


@given(st.integers(0, 10_000))
def test_log_rebuilds_hidden_trajectory(seed):
    rng = np.random.default_rng(seed)
    pi = agent_policy(AgentSpec(theta_true=tuple(rng.normal(size=5))), ENV)
    hidden = sample_trajectory(pi, ENV, 200, rng)
    events = render_events("a", hidden, rng)
    visible = [(s, a) for s, a in hidden if (s, a) != (State.NT, Action.nt)]
    if events:
        assert list(build_trajectory(events).steps) == visible


def test_observed_dynamics_rows_and_long_run():
    pi = agent_policy(AgentSpec(theta_true=(0.6, 0.5, 0.0, 0.2, 0.3)), ENV)
    truth = observed_dynamics(ENV, pi)
    np.testing.assert_allclose(truth.sum(axis=2), 1.0, atol=1e-12)
    spec = AgentSpec(theta_true=(0.6, 0.5, 0.0, 0.2, 0.3))
    T = estimate_transitions(build_trajectory(simulate_agent(spec, ENV, 200_000, 0)))
    seen = T.counts.sum(axis=2) > 0
    assert np.abs(T.probs - truth)[seen].max() < 0.015


def test_observed_dynamics_needs_silent_nt():
    env = EnvironmentModel(np.full((4, 3), 1 / 3))
    with pytest.raises(ValueError):
        observed_dynamics(env, np.full((3, 4), 0.25))


def test_spec_and_env_validation():
    with pytest.raises(ValueError):
        AgentSpec()
    with pytest.raises(ValueError):
        AgentSpec(theta_true=(0,) * 5, r_true=(0,) * 12)
    with pytest.raises(ValueError):
        AgentSpec(theta_true=(0,) * 5, temperature=0)
    with pytest.raises(ValueError):
        EnvironmentModel(np.ones((4, 3)))
    with pytest.raises(ValueError):
        sample_trajectory(np.full((3, 4), 0.25), ENV, 0, np.random.default_rng(0))


def test_population_retention_at_k10():
    events, labels = generate_population(50, 50, steps=200, seed=0)
    assert Counter(labels.values()) == {"troll": 50, "user": 50}
    assert len(filter_accounts(events, 10)) >= 95


def test_population_streams_distinct_and_reproducible():
    events, labels = generate_population(10, 20, steps=(8, 60), seed=3)
    again, _ = generate_population(10, 20, steps=(8, 60), seed=3)
    assert events == again
    streams = {}
    for e in events:
        streams.setdefault(e.account_id, []).append((e.timestamp, e.kind))
    assert len({tuple(v) for v in streams.values()}) == len(streams) == 30
    assert {e.label for e in events} == {"troll", "user"}


def test_population_rejects_empty_class():
    with pytest.raises(ValueError):
        generate_population(0, 10)
