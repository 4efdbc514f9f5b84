"""Policy backed by an external model gateway, with transcript record/replay.

The gateway is reached through a *transport*: any object with
``send(request: dict, key: tuple) -> dict``. ``HttpTransport`` posts JSON over
HTTP; ``ReplayTransport`` answers from a recorded transcript so that runs can
be repeated offline. ``key`` is ``(episode_id, step, attempt)`` and is only
used by replay.
"""

from __future__ import annotations

import base64
import copy
import hashlib
import json
import logging
import socket
import threading
import time
import urllib.error
import urllib.request
from typing import Callable, Dict, Optional, Tuple

from ..errors import AuthError, GatewayTimeout, PolicyFailure, ProtocolError
from ..render import png_bytes
from .env import STOP, Action, MoveTo, ObservationBundle
from .policies import Policy

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF = 1.0
IMAGE_ENCODING = "base64-lossless-raster"

_ERRORS = {cls.__name__: cls for cls in (GatewayTimeout, AuthError, ProtocolError)}


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def serialize_observation(obs: ObservationBundle) -> dict:
    """Wire-format request body for one decision."""
    return {
        "instruction": obs.instruction,
        "history": [{"viewpoint": v, "direction": d} for v, d in obs.history],
        "candidates": [
            {"id": c.place_id, "direction": c.direction, "remote_text": c.remote_text}
            for c in obs.candidates
        ],
        "images": [
            {"role": "compass", "encoding": IMAGE_ENCODING,
             "data": base64.b64encode(png_bytes(obs.compass_image)).decode("ascii")},
            {"role": "map", "encoding": IMAGE_ENCODING,
             "data": base64.b64encode(png_bytes(obs.map_image)).decode("ascii")},
        ],
    }


def digest_request(request: dict) -> dict:
    """Request with image payloads replaced by their sha256, as stored in transcripts."""
    out = copy.deepcopy(request)
    for img in out.get("images", []):
        data = img.pop("data", "")
        img["sha256"] = hashlib.sha256(data.encode("ascii")).hexdigest()
    return out


def parse_response(resp, candidate_ids) -> Action:
    if not isinstance(resp, dict):
        raise ProtocolError("response is not an object")
    kind = resp.get("action")
    if kind == "stop":
        return STOP
    if kind == "move":
        target = resp.get("target_id")
        if not isinstance(target, str):
            raise ProtocolError("move without a string target_id")
        if target not in candidate_ids:
            raise ProtocolError(f"target {target!r} is not a candidate")
        return MoveTo(target)
    raise ProtocolError(f"unknown action {kind!r}")


class HttpTransport:
    """POST the request as JSON; expects a JSON response body.

    Each call opens its own connection, so one instance may serve many
    episodes concurrently."""

    def __init__(self, endpoint: str, auth: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.auth = auth
        self.timeout = timeout

    def send(self, request: dict, key=None) -> dict:
        body = json.dumps(request).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.auth:
            headers["Authorization"] = f"Bearer {self.auth}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                raw = resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code in (401, 403):
                raise AuthError(f"gateway refused credentials (HTTP {exc.code})") from None
            raise ProtocolError(f"gateway returned HTTP {exc.code}") from None
        except (socket.timeout, TimeoutError) as exc:
            raise GatewayTimeout(f"no answer within {self.timeout} s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise GatewayTimeout(f"no answer within {self.timeout} s") from None
            raise ProtocolError(f"gateway unreachable: {exc.reason}") from None
        try:
            return json.loads(raw)
        except (ValueError, UnicodeDecodeError):
            raise ProtocolError("response body is not JSON") from None


class TranscriptWriter:
    """Thread-safe JSON-lines sink; one record per gateway attempt."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        open(path, "w").close()

    def write(self, record: dict) -> None:
        line = _canonical(record) + "\n"
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)


class ReplayTransport:
    """Answers from a transcript. A request that differs from the recorded
    one (by digest) means the run diverged and raises ProtocolError."""

    def __init__(self, path):
        self.records: Dict[Tuple[str, int, int], dict] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    self.records[(rec["episode"], rec["step"], rec["attempt"])] = rec

    def send(self, request: dict, key=None) -> dict:
        rec = self.records.get(tuple(key) if key else None)
        if rec is None:
            raise ProtocolError(f"no transcript record for {key}")
        if rec["request"] != digest_request(request):
            raise ProtocolError(f"request at {key} diverges from the transcript")
        if rec.get("error"):
            raise _ERRORS.get(rec["error"], ProtocolError)(f"replayed {rec['error']}")
        return rec["response"]


class GatewayPolicy(Policy):
    """Ask the gateway for each action. Invalid or failed answers are retried
    ``retries`` times with exponential backoff, then PolicyFailure is raised.

    Keeps per-episode state: use one instance per concurrently running episode
    (they may share a transport and transcript writer)."""

    def __init__(self, transport, retries: int = DEFAULT_RETRIES, backoff: float = DEFAULT_BACKOFF,
                 transcript: Optional[TranscriptWriter] = None, sleep: Callable[[float], None] = time.sleep):
        if retries < 0 or backoff < 0:
            raise ValueError("retries and backoff must be non-negative")
        self.transport = transport
        self.retries = retries
        self.backoff = backoff
        self.transcript = transcript
        self.sleep = sleep
        self.episode_id = ""

    def reset(self, episode):
        self.episode_id = episode.id

    def act(self, obs: ObservationBundle) -> Action:
        request = serialize_observation(obs)
        last = None
        for attempt in range(self.retries + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            key = (self.episode_id, obs.step, attempt)
            resp, err = None, None
            try:
                resp = self.transport.send(request, key)
            except (GatewayTimeout, AuthError, ProtocolError) as exc:
                err = exc
            if self.transcript is not None:
                self.transcript.write({
                    "episode": key[0], "step": key[1], "attempt": key[2],
                    "request": digest_request(request),
                    "response": resp,
                    "error": type(err).__name__ if err else None,
                })
            if err is None:
                try:
                    return parse_response(resp, obs.candidate_ids)
                except ProtocolError as exc:
                    err = exc
            log.warning("gateway attempt %d for %s step %d failed: %s", attempt, key[0], key[1], err)
            last = err
        raise PolicyFailure(f"gateway gave no usable action after {self.retries + 1} attempts: {last}")


def gateway_policy(endpoint: str, auth: Optional[str] = None, retries: int = DEFAULT_RETRIES,
                   backoff: float = DEFAULT_BACKOFF, timeout: float = DEFAULT_TIMEOUT,
                   transcript: Optional[TranscriptWriter] = None) -> GatewayPolicy:
    return GatewayPolicy(HttpTransport(endpoint, auth, timeout), retries, backoff, transcript)


def replay_policy(transcript_path) -> GatewayPolicy:
    return GatewayPolicy(ReplayTransport(transcript_path), backoff=0.0, sleep=lambda s: None)
