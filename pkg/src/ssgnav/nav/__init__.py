"""Discrete navigation harness: graph, episode loop and policies."""

from .env import (
    STOP,
    Action,
    Candidate,
    Environment,
    MoveTo,
    ObservationBundle,
    RunConfig,
    Trajectory,
    build_observation,
    relative_sector,
    run_episode,
)
from .gateway import GatewayPolicy, HttpTransport, ReplayTransport, TranscriptWriter, gateway_policy, replay_policy
from .graph import Episode, NavGraph, episodes_from_list, load_episodes, load_nav_graph, nav_graph_from_dict
from .policies import (
    FirstCandidatePolicy,
    OraclePolicy,
    Policy,
    ReferencePolicy,
    ScriptedPolicy,
    StopPolicy,
    oracle_policy,
)

__all__ = [
    "STOP", "Action", "Candidate", "Environment", "Episode", "FirstCandidatePolicy",
    "GatewayPolicy", "HttpTransport", "MoveTo", "NavGraph", "ObservationBundle",
    "OraclePolicy", "Policy", "ReferencePolicy", "ReplayTransport", "RunConfig",
    "ScriptedPolicy", "StopPolicy", "Trajectory", "TranscriptWriter", "build_observation",
    "episodes_from_list", "gateway_policy", "load_episodes", "load_nav_graph",
    "nav_graph_from_dict", "oracle_policy", "relative_sector", "replay_policy", "run_episode",
]
