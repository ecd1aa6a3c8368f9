"""Deterministic artifact persistence.

CSV bodies are byte-reproducible: floats are printed with 17 significant
digits (lossless for float64) and row order is fixed by the caller. Every
file is written to a temp name in the target directory and renamed, and
each artifact directory gets its manifest last, so a directory containing
a manifest is always complete.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from .params import NormalizedParams
from .simulation import RunResult, FieldSnapshot
from .statistics import build_histogram

MANIFEST_NAME = "manifest.json"


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def atomic_write_text(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, data


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return None if math.isnan(v) else v
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(path: Path, payload: dict):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    atomic_write_text(path, text + "\n")


def read_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def content_hash(*chunks: str) -> str:
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk.encode())
    return digest.hexdigest()


def base_manifest(params: NormalizedParams | None = None, **extra) -> dict:
    payload = {
        "tool": "wavebox",
        "version": __version__,
        "created_unix": time.time(),
    }
    if params is not None:
        payload["params"] = params.to_dict()
        payload["input_hash"] = content_hash(json.dumps(params.to_dict(), sort_keys=True))
    payload.update(extra)
    return payload


def save_run(result: RunResult, out_dir: Path, wall_clock_s: float | None = None):
    """Persist one run: trajectory, histogram, snapshots, manifest (last)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "trajectory.csv", ["t", "x_p", "v_p"],
              zip(result.t, result.x, result.v))
    hist = result.histogram
    write_csv(out_dir / "histogram.csv", ["bin_left", "bin_right", "count", "density"],
              zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, hist.density))
    for snap in result.field_snapshots:
        write_csv(out_dir / f"snapshot_t{snap.time:.6f}.csv", ["x", "xi"],
                  zip(snap.x, snap.xi))
    manifest = base_manifest(
        result.params,
        kind="run",
        status={
            "escaped": result.escaped,
            "escape_time": result.escape_time,
            "failed": result.failed,
            "failure_reason": result.failure_reason,
            "mean_kinetic": result.mean_kinetic,
            "n_samples": int(len(result.t)),
        },
        snapshot_times=[snap.time for snap in result.field_snapshots],
        wall_clock_s=wall_clock_s,
    )
    write_json(out_dir / MANIFEST_NAME, manifest)


def run_is_complete(out_dir: Path) -> bool:
    return (Path(out_dir) / MANIFEST_NAME).is_file()


def load_run(out_dir: Path) -> RunResult:
    """Reconstruct a RunResult from a persisted run directory."""
    out_dir = Path(out_dir)
    manifest = read_json(out_dir / MANIFEST_NAME)
    params = NormalizedParams.from_dict(manifest["params"])
    _, data = read_csv(out_dir / "trajectory.csv")
    t, x, v = data[:, 0], data[:, 1], data[:, 2]
    status = manifest["status"]
    snapshots = []
    for ts in manifest.get("snapshot_times", []):
        _, grid = read_csv(out_dir / f"snapshot_t{ts:.6f}.csv")
        snapshots.append(FieldSnapshot(ts, grid[:, 0], grid[:, 1]))
    hist = build_histogram(t, x, params.t_transient, params.box_length)
    return RunResult(
        epsilon=params.epsilon,
        t=t, x=x, v=v,
        histogram=hist,
        mean_kinetic=status["mean_kinetic"],
        escaped=status["escaped"],
        escape_time=status["escape_time"],
        failed=status["failed"],
        failure_reason=status["failure_reason"],
        params=params,
        field_snapshots=snapshots,
    )
