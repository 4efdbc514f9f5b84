"""Run a few reference policies over the apartment episodes and score them.

The oracle follows shortest paths, the stop policy never moves, and the
scripted policy is a seeded random walk. Together they bracket what a real
model behind the gateway should achieve.

    python3 demos/02_navigate_and_score.py
"""

from ssgnav.metrics import aggregate, evaluate_episode, format_table
from ssgnav.nav import Environment, OraclePolicy, RunConfig, ScriptedPolicy, StopPolicy, run_episode
from ssgnav.ssg import build_ssg
from ssgnav.synthetic import apartment_layout, make_scene


def main():
    scene = make_scene(apartment_layout())
    graph, _ = build_ssg(scene.cloud, scene.annotations)
    env = Environment(graph, scene.nav)
    cfg = RunConfig()

    ep = scene.episodes[0]
    print(f"episode {ep.id}: {ep.instruction!r} from {ep.start_viewpoint}")
    traj = run_episode(env, OraclePolicy(scene.nav), ep, cfg,
                       on_step=lambda obs, a: print(f"  step {obs.step}: at {obs.viewpoint}, "
                                                    f"{len(obs.candidates)} candidates -> {a}"))
    print(f"  ended: {traj.reason} after {traj.steps} move(s)\n")

    policies = {
        "oracle": lambda: OraclePolicy(scene.nav),
        "scripted": lambda: ScriptedPolicy(seed=1),
        "stop": StopPolicy,
    }
    rows = {}
    for name, make in policies.items():
        results = [evaluate_episode(run_episode(env, make(), e, cfg), e, scene.nav) for e in scene.episodes]
        rows[name] = aggregate(results)
    print(format_table(rows))


if __name__ == "__main__":
    main()
