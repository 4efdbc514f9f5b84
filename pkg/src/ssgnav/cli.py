"""Command-line entry point: build, inspect, render, run and evaluate.

Exit codes: 0 on success, 1 on a domain error (the error class name is
printed on stderr), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .errors import IoError, SSGNavError
from .geometry import Pose

log = logging.getLogger("ssgnav")

LAYOUTS = ("two_room", "hall", "apartment")
POLICIES = ("oracle", "scripted", "stop", "reference", "gateway", "replay")


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path, doc) -> None:
    _write_text(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


# -- flag groups mirroring the config dataclasses ------------------------------


def _add_segmentation_flags(p):
    from .ssg import SegmentationParams as S

    d = S()
    g = p.add_argument_group("segmentation parameters")
    g.add_argument("--bin", type=float, default=d.histogram_bin, help="height histogram bin width (m)")
    g.add_argument("--eps", type=float, default=d.dbscan_eps, help="DBSCAN neighbourhood radius over peak heights (m)")
    g.add_argument("--min-pts", type=int, default=d.dbscan_min_pts, help="DBSCAN minimum cluster size")
    g.add_argument("--peak-fraction", type=float, default=d.peak_fraction,
                   help="histogram peak threshold relative to the tallest bin")
    g.add_argument("--grid-res", type=float, default=d.grid_resolution, help="occupancy grid cell size (m)")
    g.add_argument("--wall-band", type=float, nargs=2, default=list(d.wall_band), metavar=("LOW", "HIGH"),
                   help="height band above the floor counted as wall (m)")
    g.add_argument("--wall-point-threshold", type=int, default=d.wall_point_threshold,
                   help="points in the wall band that make a cell a wall")
    g.add_argument("--min-room-area", type=float, default=d.min_room_area,
                   help="regions smaller than this merge into a neighbour (m^2)")
    g.add_argument("--review-area", type=float, default=d.review_area,
                   help="rooms larger than this get a review flag (m^2)")
    g.add_argument("--marker-separation", type=float, default=d.marker_separation,
                   help="minimum distance between watershed seeds (m)")
    g.add_argument("--marker-prominence", type=float, default=d.marker_prominence,
                   help="minimum persistence of a distance-transform peak to seed a room (m)")


def _segmentation_params(a):
    from .ssg import SegmentationParams

    return SegmentationParams(
        histogram_bin=a.bin, dbscan_eps=a.eps, dbscan_min_pts=a.min_pts, peak_fraction=a.peak_fraction,
        grid_resolution=a.grid_res, wall_band=tuple(a.wall_band), wall_point_threshold=a.wall_point_threshold,
        min_room_area=a.min_room_area, review_area=a.review_area, marker_separation=a.marker_separation,
        marker_prominence=a.marker_prominence,
    )


def _add_map_flags(p):
    from .render import MapConfig

    d = MapConfig()
    g = p.add_argument_group("spatial map")
    g.add_argument("--map-size", type=int, default=d.map_size, help="map width and height (px)")
    g.add_argument("--resolution", type=float, default=d.resolution, help="map scale (m per px)")
    g.add_argument("--palette", default=None, help="JSON file mapping room category to [r, g, b, a]")
    g.add_argument("--no-labels", dest="draw_labels", action="store_false",
                   help="omit room and place labels (default: labels drawn)")


def _map_config(a):
    from .render import MapConfig

    palette = {}
    if a.palette:
        with open(a.palette) as fh:
            palette = {k: tuple(int(c) for c in v) for k, v in json.load(fh).items()}
    return MapConfig(map_size=a.map_size, resolution=a.resolution, palette=palette, draw_labels=a.draw_labels)


def _add_compass_flags(p):
    from .render import CompassConfig

    d = CompassConfig()
    g = p.add_argument_group("compass image")
    g.add_argument("--output-size", type=int, default=d.output_size, help="compass image width and height (px)")
    g.add_argument("--cell", type=int, default=d.cell, help="view cell size (px)")


def _compass_config(a):
    from .render import CompassConfig

    return CompassConfig(output_size=a.output_size, cell=a.cell)


# -- subcommands -----------------------------------------------------------------


def cmd_build_ssg(a) -> int:
    from .pointcloud import load_point_cloud
    from .ssg import build_ssg, load_room_categories, save_ssg

    params = _segmentation_params(a)
    cloud = load_point_cloud(a.cloud)
    categories = load_room_categories(a.categories) if a.categories else None
    graph, result = build_ssg(cloud, a.annotations, params, categories)
    save_ssg(graph, a.out)
    log.info("wrote %s: %d floor(s), %d room(s), %d object(s)", a.out, len(graph.floors),
             len(graph.rooms), len(graph.objects))
    return 0


def cmd_inspect(a) -> int:
    from .ssg import load_ssg

    g = load_ssg(a.ssg)
    print(f"floors: {len(g.floors)}")
    print(f"rooms: {len(g.rooms)}")
    print(f"objects: {len(g.objects)}")
    for f in g.floors:
        rooms = g.rooms_on_floor(f.index)
        print(f"  floor {f.index}: base {f.z_base:.2f} m, ceiling {f.z_ceiling:.2f} m, {len(rooms)} room(s)")
    flagged = [r for r in g.rooms if r.review_flag]
    print(f"review-flagged rooms: {len(flagged)}")
    for r in flagged:
        print(f"  {r.id} ({r.category or 'unlabeled'}): {r.area:.2f} m^2")
    return 0


def cmd_render_map(a) -> int:
    from .query import query_receptive_field
    from .render import encode_image, render_spatial_map
    from .ssg import load_ssg

    g = load_ssg(a.ssg)
    x, y, z, heading = a.pose
    ctx = query_receptive_field(g, Pose((x, y, z), heading), a.radius)
    encode_image(render_spatial_map(ctx, _map_config(a)), a.out)
    return 0


def cmd_compose_compass(a) -> int:
    from .render import compose_compass, encode_image, load_view_dir, placeholder_views

    views = load_view_dir(a.views_dir) if a.views_dir else placeholder_views()
    encode_image(compose_compass(views, _compass_config(a)), a.out)
    return 0


def _policy_factory(a, nav, transcript):
    from .nav import gateway as gw
    from .nav import policies

    if a.policy == "oracle":
        return lambda: policies.OraclePolicy(nav, success_radius=a.success_radius)
    if a.policy == "scripted":
        return lambda: policies.ScriptedPolicy(a.seed)
    if a.policy == "stop":
        return policies.StopPolicy
    if a.policy == "reference":
        return policies.ReferencePolicy
    if a.policy == "gateway":
        if not a.endpoint:
            raise _Usage("--policy gateway needs --endpoint")
        token = os.environ.get(a.auth_env) if a.auth_env else None
        transport = gw.HttpTransport(a.endpoint, token, a.timeout)
        return lambda: gw.GatewayPolicy(transport, a.retries, a.backoff, transcript)
    if not a.replay:
        raise _Usage("--policy replay needs --replay TRANSCRIPT")
    transport = gw.ReplayTransport(a.replay)
    return lambda: gw.GatewayPolicy(transport, a.retries, 0.0, transcript, sleep=lambda s: None)


def cmd_run(a) -> int:
    from .nav import Environment, RunConfig, load_episodes, load_nav_graph, run_episode
    from .nav.gateway import TranscriptWriter
    from .render import encode_image
    from .ssg import load_ssg

    cfg = RunConfig(max_steps=a.max_steps, success_radius=a.success_radius,
                    perception_radius=a.perception_radius, seed=a.seed)
    ssg = load_ssg(a.ssg)
    nav = load_nav_graph(a.nav_graph)
    episodes = load_episodes(a.episodes, nav)
    os.makedirs(a.out_dir, exist_ok=True)
    env = Environment(ssg, nav, _map_config(a), _compass_config(a), a.views_dir)
    transcript = None
    if a.policy in ("gateway", "replay"):
        transcript = TranscriptWriter(a.transcript or os.path.join(a.out_dir, "transcript.jsonl"))
    make_policy = _policy_factory(a, nav, transcript)

    def one(ep):
        hook = None
        if a.save_images:
            img_dir = os.path.join(a.out_dir, "images", ep.id)
            os.makedirs(img_dir, exist_ok=True)

            def hook(obs, action):
                encode_image(obs.map_image, os.path.join(img_dir, f"step{obs.step:03d}_map.png"))
                encode_image(obs.compass_image, os.path.join(img_dir, f"step{obs.step:03d}_compass.png"))

        return run_episode(env, make_policy(), ep, cfg, on_step=hook)

    jobs = a.jobs or os.cpu_count() or 1
    if jobs == 1:
        trajs = [one(ep) for ep in episodes]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(one, episodes))
    out = os.path.join(a.out_dir, "trajectories.json")
    _write_json(out, [t.to_dict() for t in trajs])
    reasons = {}
    for t in trajs:
        reasons[t.reason] = reasons.get(t.reason, 0) + 1
    log.info("ran %d episode(s) -> %s %s", len(trajs), out, dict(sorted(reasons.items())))
    return 0


def cmd_eval(a) -> int:
    from . import metrics
    from .errors import SchemaError
    from .nav import Trajectory, load_episodes, load_nav_graph

    nav = load_nav_graph(a.nav_graph)
    episodes = {e.id: e for e in load_episodes(a.episodes, nav)}
    with open(a.trajectories) as fh:
        docs = json.load(fh)
    results = []
    for doc in docs:
        t = Trajectory.from_dict(doc)
        if t.episode_id not in episodes:
            raise SchemaError(f"trajectory for unknown episode {t.episode_id!r}")
        results.append(metrics.evaluate_episode(t, episodes[t.episode_id], nav, a.success_radius,
                                                a.ndtw_threshold))
    report = metrics.build_report(results, a.label, a.success_radius, a.ndtw_threshold)
    table = metrics.format_table({a.label: metrics.aggregate(results)})
    if a.report:
        _write_text(a.report, metrics.dumps_report(report))
    if a.table:
        _write_text(a.table, table)
    sys.stdout.write(f"# success radius {a.success_radius} m, nDTW threshold {a.ndtw_threshold} m\n")
    sys.stdout.write(table)
    return 0


def cmd_generate_scene(a) -> int:
    from . import synthetic

    if a.spec:
        with open(a.spec) as fh:
            spec = json.load(fh)
        spec.setdefault("seed", a.seed)
    else:
        spec = getattr(synthetic, f"{a.layout}_layout")(a.seed)
    paths = synthetic.generate_synthetic_scene(spec, a.out_dir, binary=not a.ascii)
    for role, path in sorted(paths.items()):
        log.info("%s: %s", role, path)
    return 0


# -- parser ----------------------------------------------------------------------


class _Usage(Exception):
    pass


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    # skip the auto default when the help already states one
    def _get_help_string(self, action):
        if "(default:" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _Formatter
    p = argparse.ArgumentParser(prog="ssgnav", description="Spatial scene graphs for graph-based navigation.",
                                formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    s = sub.add_parser("build-ssg", help="segment a point cloud into a scene graph", formatter_class=fmt)
    s.add_argument("--cloud", required=True, help="input PLY point cloud")
    s.add_argument("--annotations", default=None, help="room/object annotation JSON")
    s.add_argument("--categories", default=None, help="room category list (one per line)")
    s.add_argument("--out", required=True, help="output scene graph JSON")
    _add_segmentation_flags(s)
    s.set_defaults(func=cmd_build_ssg)

    s = sub.add_parser("inspect", help="print scene graph counts", formatter_class=fmt)
    s.add_argument("--ssg", required=True, help="scene graph JSON")
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("render-map", help="render the agent-centric map for one pose", formatter_class=fmt)
    s.add_argument("--ssg", required=True, help="scene graph JSON")
    s.add_argument("--pose", type=float, nargs=4, required=True, metavar=("X", "Y", "Z", "HEADING"),
                   help="agent position (m) and heading (rad, CCW from +X)")
    s.add_argument("--radius", type=float, default=7.68, help="perception radius (m)")
    s.add_argument("--out", required=True, help="output PNG")
    _add_map_flags(s)
    s.set_defaults(func=cmd_render_map)

    s = sub.add_parser("compose-compass", help="compose eight views into the compass image", formatter_class=fmt)
    s.add_argument("--views-dir", default=None, help="directory of <direction>.png views; placeholders if omitted")
    s.add_argument("--out", required=True, help="output PNG")
    _add_compass_flags(s)
    s.set_defaults(func=cmd_compose_compass)

    from .nav.env import RunConfig
    from .nav.gateway import DEFAULT_BACKOFF, DEFAULT_RETRIES, DEFAULT_TIMEOUT

    rc = RunConfig()
    s = sub.add_parser("run", help="run a policy over episodes", formatter_class=fmt)
    s.add_argument("--ssg", required=True, help="scene graph JSON")
    s.add_argument("--nav-graph", required=True, help="navigation graph JSON")
    s.add_argument("--episodes", required=True, help="episode list JSON")
    s.add_argument("--policy", choices=POLICIES, default="oracle", help="decision maker")
    s.add_argument("--endpoint", default=None, help="gateway URL (gateway policy)")
    s.add_argument("--auth-env", default=None, help="environment variable holding the gateway bearer token")
    s.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="gateway request timeout (s)")
    s.add_argument("--retries", type=int, default=DEFAULT_RETRIES, help="gateway retries per step")
    s.add_argument("--backoff", type=float, default=DEFAULT_BACKOFF, help="first retry delay (s), doubling")
    s.add_argument("--transcript", default=None, help="transcript output (default: OUT_DIR/transcript.jsonl)")
    s.add_argument("--replay", default=None, help="transcript to replay (replay policy)")
    s.add_argument("--max-steps", type=int, default=rc.max_steps, help="step budget per episode")
    s.add_argument("--success-radius", type=float, default=rc.success_radius, help="oracle stop radius (m)")
    s.add_argument("--perception-radius", type=float, default=rc.perception_radius,
                   help="radius of the map's receptive field (m)")
    s.add_argument("--seed", type=int, default=rc.seed, help="seed for the scripted policy")
    s.add_argument("--views-dir", default=None, help="root holding <viewpoint>/<direction>.png")
    s.add_argument("--jobs", type=int, default=0, help="parallel episodes (0: logical cores)")
    s.add_argument("--save-images", action="store_true", help="write every step's map and compass PNGs")
    s.add_argument("--out-dir", required=True, help="output directory")
    _add_map_flags(s)
    _add_compass_flags(s)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("eval", help="score trajectories", formatter_class=fmt)
    s.add_argument("--trajectories", required=True, help="trajectories JSON from run")
    s.add_argument("--episodes", required=True, help="episode list JSON")
    s.add_argument("--nav-graph", required=True, help="navigation graph JSON")
    s.add_argument("--report", default=None, help="structured JSON report output")
    s.add_argument("--table", default=None, help="plain-text table output")
    s.add_argument("--label", default="run", help="row label in the table")
    s.add_argument("--success-radius", type=float, default=3.0, help="success radius (m)")
    s.add_argument("--ndtw-threshold", type=float, default=3.0, help="nDTW distance threshold (m)")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("generate-scene", help="write a synthetic test scene", formatter_class=fmt)
    s.add_argument("--layout", choices=LAYOUTS, default="two_room", help="stock layout")
    s.add_argument("--spec", default=None, help="layout JSON file (overrides --layout)")
    s.add_argument("--seed", type=int, default=0, help="sampling seed")
    s.add_argument("--ascii", action="store_true", help="write ASCII PLY instead of binary")
    s.add_argument("--out-dir", required=True, help="output directory")
    s.set_defaults(func=cmd_generate_scene)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"ssgnav: error: {exc}", file=sys.stderr)
        return 2
    except SSGNavError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # invalid configuration values caught by the dataclass validators
        print(f"error: ValueError: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {IoError.__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
