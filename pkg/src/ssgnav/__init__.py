"""Spatial scene graphs for indoor navigation: construction from point
clouds, agent-centric queries, observation rendering and an episode harness."""

__version__ = "0.1.0"
