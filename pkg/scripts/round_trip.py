"""IRL recovery on agents with known rewards, for both gradient modes and several gammas.

    python3 scripts/round_trip.py --agents 20 --steps 500
"""

import argparse

import numpy as np

from trollirl.activity import Trajectory
from trollirl.irl import IrlConfig, maxent_irl, soft_value_iteration
from trollirl.mdp import estimate_transitions, feature_matrix
from trollirl.sim import AgentSpec, EnvironmentModel, agent_policy, sample_trajectory


def policy_errors(n_agents, steps, gamma, mode, seed):
    f, env = feature_matrix(), EnvironmentModel()
    rng = np.random.default_rng(seed)
    errors = []
    for i in range(n_agents):
        pi_true = agent_policy(AgentSpec(theta_true=tuple(rng.normal(size=5))), env, gamma)
        traj = Trajectory(f"agent{i}", tuple(sample_trajectory(
            pi_true, env, steps, np.random.default_rng([seed, i]))))
        T = estimate_transitions(traj)
        r, _ = maxent_irl(f, T, traj, IrlConfig(gamma=gamma, gradient=mode))
        pi_hat, _ = soft_value_iteration(T, r, gamma, tol=1e-10)
        errors.append(np.abs(pi_hat - pi_true).mean())
    return np.array(errors)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=20)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for mode in ("likelihood", "visitation"):
        for gamma in (0.5, 0.9, 0.99):
            e = policy_errors(args.agents, args.steps, gamma, mode, args.seed)
            print(f"{mode:10s} gamma {gamma:4}: policy MAE mean {e.mean():.3f}  max {e.max():.3f}",
                  flush=True)


if __name__ == "__main__":
    main()
