"""Tracker/detector backends living in a child process.

Requests and replies are single ASCII lines on the child's stdin/stdout::

    INIT <id> <frame_path> <x> <y> <w> <h>   ->  OK <id>
    TRACK <id> <frame_path>                  ->  BOX <id> <x> <y> <w> <h>
    DETECT <id> <frame_path> [class]         ->  DETS <id> <n>
                                                 DET <class_id> <conf> <x> <y> <w> <h>  (n times)

Ids strictly increase and every reply echoes its request id.
"""

import os
import queue
import shlex
import subprocess
import tempfile
import threading
import time
from pathlib import Path
from typing import Optional

from ..errors import BackendUnavailable, NotInitialized, ProtocolViolation
from ..imaging import BBox, Frame, write_frame
from .base import Detection, Detector, Tracker, roi_contains

DEFAULT_TIMEOUT = 0.5
_EOF = object()


class LineBridge:
    """One child process; requests are serialized."""

    def __init__(self, cmd, timeout: float = DEFAULT_TIMEOUT):
        if isinstance(cmd, (str, os.PathLike)):
            cmd = shlex.split(str(cmd))
        self.cmd = list(cmd)
        self.timeout = float(timeout)
        self._lock = threading.Lock()
        self._next_id = 1
        self._stale: set[int] = set()
        self._lines: queue.Queue = queue.Queue()
        self._tmpdir = None
        try:
            self._proc = subprocess.Popen(
                self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True, bufsize=1)
        except OSError as exc:
            raise BackendUnavailable(f"cannot start {self.cmd!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is not None and proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=1.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        if self._tmpdir is not None:
            self._tmpdir.cleanup()
            self._tmpdir = None

    @property
    def alive(self) -> bool:
        return self._proc.poll() is None

    def frame_path(self, frame: Frame) -> str:
        if frame.path:
            return str(frame.path)
        if self._tmpdir is None:
            self._tmpdir = tempfile.TemporaryDirectory(prefix="refusion-bridge-")
        suffix = ".ppm" if frame.channels == "RGB8" else ".pgm"
        path = Path(self._tmpdir.name) / f"{frame.index:06d}{suffix}"
        write_frame(frame, path)
        return str(path)

    def _readline(self, deadline: float) -> str:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise queue.Empty
        item = self._lines.get(timeout=remaining)
        if item is _EOF:
            self._lines.put(_EOF)
            raise BackendUnavailable("backend process exited")
        return item

    def request(self, verb: str, *args) -> tuple[list[str], list[list[str]]]:
        """Send one request; return the reply tokens and any DET lines."""
        with self._lock:
            rid = self._next_id
            self._next_id += 1
            line = " ".join([verb, str(rid), *(str(a) for a in args)])
            if not self.alive:
                raise BackendUnavailable("backend process is not running")
            try:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                raise BackendUnavailable(f"write failed: {exc}") from exc
            deadline = time.monotonic() + self.timeout
            try:
                return self._await(rid, deadline)
            except queue.Empty:
                self._stale.add(rid)
                raise BackendUnavailable(
                    f"no reply to request {rid} within {self.timeout:.3f}s") from None

    def _await(self, rid, deadline):
        while True:
            toks = self._readline(deadline).split()
            if len(toks) < 2:
                raise ProtocolViolation(f"malformed reply {toks!r}")
            try:
                got = int(toks[1])
            except ValueError:
                raise ProtocolViolation(f"non-integer reply id in {toks!r}") from None
            extra = []
            if toks[0] == "DETS":
                try:
                    n = int(toks[2])
                except (IndexError, ValueError):
                    raise ProtocolViolation(f"malformed DETS reply {toks!r}") from None
                for _ in range(n):
                    extra.append(self._readline(deadline).split())
            if got in self._stale:
                # late answer to a request that already timed out
                self._stale.discard(got)
                continue
            if got != rid:
                raise ProtocolViolation(f"reply id {got} does not match request id {rid}")
            return toks, extra


def _floats(tokens, n, what):
    if len(tokens) != n:
        raise ProtocolViolation(f"{what}: expected {n} fields, got {tokens!r}")
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ProtocolViolation(f"{what}: non-numeric field in {tokens!r}") from None


def _box(vals, what):
    try:
        return BBox(*vals)
    except ValueError as exc:
        raise ProtocolViolation(f"{what}: invalid box {vals!r}") from exc


class ExternalTracker(Tracker):
    def __init__(self, bridge: LineBridge):
        self.bridge = bridge
        self._ready = False

    def init(self, frame: Frame, bbox: BBox) -> None:
        toks, _ = self.bridge.request("INIT", self.bridge.frame_path(frame),
                                      *(repr(float(v)) for v in bbox.as_tuple()))
        if toks[0] != "OK" or len(toks) != 2:
            raise ProtocolViolation(f"expected OK, got {toks!r}")
        self._ready = True

    def track(self, frame: Frame) -> BBox:
        if not self._ready:
            raise NotInitialized("track() called before init()")
        toks, _ = self.bridge.request("TRACK", self.bridge.frame_path(frame))
        if toks[0] != "BOX":
            raise ProtocolViolation(f"expected BOX, got {toks!r}")
        return _box(_floats(toks[2:], 4, "BOX"), "BOX")


class ExternalDetector(Detector):
    def __init__(self, bridge: LineBridge):
        self.bridge = bridge

    def detect(self, frame: Frame, roi: Optional[BBox] = None,
               class_id: Optional[int] = None) -> list[Detection]:
        args = [self.bridge.frame_path(frame)]
        if class_id is not None:
            args.append(int(class_id))
        toks, extra = self.bridge.request("DETECT", *args)
        if toks[0] != "DETS" or len(toks) != 3:
            raise ProtocolViolation(f"expected DETS, got {toks!r}")
        out = []
        for rec in extra:
            if not rec or rec[0] != "DET":
                raise ProtocolViolation(f"expected DET line, got {rec!r}")
            vals = _floats(rec[1:], 6, "DET")
            if not 0.0 <= vals[1] <= 1.0:
                raise ProtocolViolation(f"DET confidence out of range: {vals[1]}")
            b = _box(vals[2:], "DET").clamp(frame.width, frame.height)
            if b is None or not roi_contains(roi, b):
                continue
            if class_id is not None and int(vals[0]) != class_id:
                continue
            out.append(Detection(b, int(vals[0]), vals[1]))
        return out
