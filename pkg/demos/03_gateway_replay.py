"""Drive the agent through the HTTP gateway contract, then replay offline.

A tiny local server stands in for the multimodal model: it reads the
instruction, looks for a candidate whose remote object text names the
target room, and otherwise explores through hallways. Every
exchange lands in a transcript, and replaying that transcript reproduces
the run without any server.

    python3 demos/03_gateway_replay.py
"""

import json
import tempfile
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from ssgnav.metrics import evaluate_episode
from ssgnav.nav import Environment, RunConfig, TranscriptWriter, gateway_policy, replay_policy, run_episode
from ssgnav.ssg import build_ssg
from ssgnav.synthetic import apartment_layout, make_scene


_chosen = {}  # (instruction, history so far) -> remote text of the place we moved to


def toy_brain(request):
    """Stop after stepping into the target room; otherwise prefer unvisited
    candidates in the target room, then hallways, then anything new."""
    words = request["instruction"].lower().rstrip(".").split()
    target = "(" + words[words.index("the") + 1] if "the" in words else "?"
    history = request["history"]
    here = _chosen.get(json.dumps([request["instruction"], history[:-1]]), "")
    if target in here.lower():
        return {"action": "stop", "rationale": "arrived"}
    visited = {h["viewpoint"] for h in history}
    fresh = [c for c in request["candidates"] if c["id"] not in visited]
    if not fresh or len(history) >= 6:
        return {"action": "stop", "rationale": "giving up"}
    rank = lambda c: (target not in c["remote_text"].lower(), "(hallway" not in c["remote_text"].lower())
    pick = min(fresh, key=rank)
    _chosen[json.dumps([request["instruction"], history])] = pick["remote_text"]
    return {"action": "move", "target_id": pick["id"], "rationale": "explore"}


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        data = json.dumps(toy_brain(req)).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def main():
    scene = make_scene(apartment_layout())
    graph, _ = build_ssg(scene.cloud, scene.annotations)
    env = Environment(graph, scene.nav)
    episodes = scene.episodes[:3]
    transcript = Path(tempfile.mkdtemp(prefix="ssgnav_gateway_")) / "transcript.jsonl"

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    url = f"http://127.0.0.1:{server.server_address[1]}/act"
    writer = TranscriptWriter(transcript)
    live = []
    for ep in episodes:
        traj = run_episode(env, gateway_policy(url, transcript=writer, backoff=0.0), ep, RunConfig(max_steps=8))
        res = evaluate_episode(traj, ep, scene.nav)
        print(f"{ep.id} {ep.instruction!r}: {' -> '.join(traj.viewpoints)} "
              f"({traj.reason}, NE {res.ne:.2f} m, success {res.success})")
        live.append(traj)
    server.shutdown()
    print(f"transcript: {transcript} ({sum(1 for _ in open(transcript))} exchanges)")

    replayed = [run_episode(env, replay_policy(transcript), ep, RunConfig(max_steps=8)) for ep in episodes]
    print("offline replay identical:", replayed == live)


if __name__ == "__main__":
    main()
