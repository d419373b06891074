"""
Binary snapshots and small text exports.

Snapshot layout::

    SKWV1\\n
    <n_cells>\\n
    <r_max>\\n          shortest round-trip decimal
    <time>\\n
    <model id>\\n       0 wavemap, 1 adkins-nappi, 2 linear
    u[0..n) v[0..n)    float64, little endian
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .evolve import FieldState, SpacetimeRecord
from .grid import make_grid
from .model import ModelKind

MAGIC = b"SKWV1\n"
MODEL_IDS = {ModelKind.WAVE_MAP: 0, ModelKind.ADKINS_NAPPI: 1, ModelKind.LINEAR: 2}
_MODEL_BY_ID = {v: k for k, v in MODEL_IDS.items()}
_LE = np.dtype("<f8")


class SnapshotError(ValueError):
    pass


def encode_snapshot(state: FieldState) -> bytes:
    g = state.grid
    header = f"{g.n_cells}\n{g.r_max!r}\n{float(state.t)!r}\n{MODEL_IDS[state.model]}\n"
    payload = state.u.astype(_LE).tobytes() + state.v.astype(_LE).tobytes()
    return MAGIC + header.encode("ascii") + payload


def decode_snapshot(blob: bytes) -> FieldState:
    if not blob.startswith(MAGIC):
        raise SnapshotError("bad magic: not an SKWV1 snapshot")
    pos = len(MAGIC)
    fields = []
    for _ in range(4):
        end = blob.find(b"\n", pos)
        if end < 0:
            raise SnapshotError("truncated header")
        fields.append(blob[pos:end].decode("ascii", errors="replace"))
        pos = end + 1
    try:
        n = int(fields[0])
        r_max = float(fields[1])
        t = float(fields[2])
        model = _MODEL_BY_ID[int(fields[3])]
        grid = make_grid(r_max, n)
    except (ValueError, KeyError) as exc:
        raise SnapshotError(f"bad header: {exc}") from None
    payload = blob[pos:]
    if len(payload) != 2 * n * 8:
        raise SnapshotError(f"payload has {len(payload)} bytes, expected {2 * n * 8}")
    arr = np.frombuffer(payload, dtype=_LE).astype(float)
    return FieldState(t, arr[:n].copy(), arr[n:].copy(), grid, model)


def write_snapshot(path, state: FieldState) -> None:
    Path(path).write_bytes(encode_snapshot(state))


def read_snapshot(path) -> FieldState:
    return decode_snapshot(Path(path).read_bytes())


def save_record(directory, rec: SpacetimeRecord, stride: int = 1) -> list[Path]:
    """Write every ``stride``-th snapshot (and the last) as snap_NNNNNN.skwv."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    idx = list(range(0, rec.times.size, stride))
    if idx[-1] != rec.times.size - 1:
        idx.append(rec.times.size - 1)
    paths = []
    for k in idx:
        p = d / f"snap_{k:06d}.skwv"
        write_snapshot(p, rec.state(k))
        paths.append(p)
    return paths


def load_record(directory) -> SpacetimeRecord:
    files = sorted(Path(directory).glob("*.skwv"))
    if not files:
        raise SnapshotError(f"no snapshots in {directory}")
    states = [read_snapshot(p) for p in files]
    states.sort(key=lambda s: s.t)
    g, m = states[0].grid, states[0].model
    if any(s.grid != g or s.model is not m for s in states):
        raise SnapshotError("snapshots disagree on grid or model")
    return SpacetimeRecord(g, m, [s.t for s in states],
                           np.array([s.u for s in states]), np.array([s.v for s in states]))


def write_profile_csv(path, profile) -> None:
    """Columns ``r,u``; '#' lines above the header record slope, dr, r_max and gap."""
    with open(path, "w", newline="") as fh:
        for key in ("slope", "dr", "r_max", "gap"):
            fh.write(f"# {key}={float(getattr(profile, key)):.17g}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u"])
        for r, u in zip(profile.r, profile.u):
            w.writerow([f"{r:.17g}", f"{u:.17g}"])


def read_profile_csv(path):
    """(r, u, meta) from a file written by :func:`write_profile_csv`."""
    meta = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            k, v = line[1:].strip().split("=", 1)
            meta[k] = float(v)
        else:
            body.append(line)
    if not body or body[0] != "r,u":
        raise ValueError(f"{path}: missing 'r,u' header")
    data = np.array([[float(x) for x in row.split(",")] for row in body[1:] if row]).reshape(-1, 2)
    return data[:, 0], data[:, 1], meta


def git_blob_hash(data: bytes) -> str:
    """SHA-1 of a git blob object holding ``data``."""
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()
