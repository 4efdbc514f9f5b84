"""Observation images: the agent-centric spatial map and the compass composite."""

from .compass import (
    ABBREVIATIONS,
    CELL_OF,
    DIRECTIONS,
    CompassConfig,
    cell_centers,
    compose_compass,
    placeholder_views,
)
from .image_io import decode_image, encode_image, load_view_dir, png_bytes
from .spatial_map import MapConfig, agent_marker_box, category_color, render_spatial_map

__all__ = [
    "ABBREVIATIONS",
    "CELL_OF",
    "DIRECTIONS",
    "CompassConfig",
    "MapConfig",
    "agent_marker_box",
    "category_color",
    "cell_centers",
    "compose_compass",
    "decode_image",
    "encode_image",
    "load_view_dir",
    "placeholder_views",
    "png_bytes",
    "render_spatial_map",
]
