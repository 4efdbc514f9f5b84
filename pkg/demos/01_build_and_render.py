"""Build a scene graph from a synthetic apartment scan and look at it.

Walks through the offline half of the pipeline: sample a point cloud,
segment floors and rooms, attach annotated objects, then render what an
agent standing in the living room would be shown.

    python3 demos/01_build_and_render.py [OUT_DIR]
"""

import math
import sys
import tempfile
from pathlib import Path

from ssgnav.geometry import Pose
from ssgnav.query import format_remote_report, localize, query_receptive_field, remote_objects
from ssgnav.render import compose_compass, encode_image, placeholder_views, render_spatial_map
from ssgnav.ssg import build_ssg, save_ssg
from ssgnav.synthetic import apartment_layout, make_scene


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    scene = make_scene(apartment_layout(seed=0))
    print(f"sampled {len(scene.cloud):,} points over {len(scene.ground_truth['rooms'])} ground-truth rooms")

    graph, result = build_ssg(scene.cloud, scene.annotations)
    save_ssg(graph, out / "apartment_ssg.json")
    for f in graph.floors:
        print(f"floor {f.index}: z in [{f.z_base:.2f}, {f.z_ceiling:.2f}) m")
    for room in graph.rooms:
        flag = "  <- review (> 20 m^2)" if room.review_flag else ""
        print(f"  {room.id:10s} {room.category or '?':12s} {room.area:6.2f} m^2{flag}")
    if result.warnings:
        print(f"{len(result.warnings)} room label(s) could not be placed")
    print(f"{len(graph.objects)} objects, {sum(len(v) for v in graph.unassigned.values())} outside every room")

    # stand in the living room looking toward the kitchen
    pose = Pose((3.0, 2.0, 1.5), 0.0)
    print("agent at", pose.position, "->", localize(graph, pose))
    for place in [(5.0, 1.0, 1.5), (8.0, 3.0, 1.5), (2.0, 8.0, 1.5)]:
        print("  " + format_remote_report(remote_objects(graph, place, f"{place[0]:g},{place[1]:g}")))

    for heading in (0.0, math.pi / 2):
        ctx = query_receptive_field(graph, Pose(pose.position, heading))
        name = out / f"map_heading_{int(math.degrees(heading)):03d}.png"
        encode_image(render_spatial_map(ctx), name)
        print(f"wrote {name.name}: {len(ctx.rooms)} room(s) within {ctx.radius} m")
    encode_image(compose_compass(placeholder_views()), out / "compass.png")
    print(f"images in {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="ssgnav_demo_"))
