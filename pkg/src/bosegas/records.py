"""Result records, tabular writers, and binary snapshot formats.

Every emitted number carries either a standard error or an explicit exact
tag; the writers enforce that.  Binary payloads (field snapshots, chain
checkpoints) are flat arrays plus a JSON sidecar describing shape, grid, and
versions, so they remain readable without this package.
"""

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__


@dataclass
class ResultRecord:
    config_hash: str
    observable: str
    value: float
    std_error: float | None = None  # None means exact
    ess: float | None = None
    wall_time: float = 0.0
    code_version: str = __version__

    def __post_init__(self):
        if self.std_error is None:
            self.tag = "exact"
        else:
            self.tag = "estimated"


def config_hash(payload) -> str:
    """Stable hash of a run configuration (dict of plain values)."""
    canon = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(canon).hexdigest()[:16]


CSV_FIELDS = ["config_hash", "observable", "value", "std_error", "tag", "ess", "wall_time", "code_version"]


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in records:
            row = asdict(r)
            row["tag"] = r.tag
            row["std_error"] = "" if r.std_error is None else repr(r.std_error)
            row["value"] = repr(r.value)
            row["ess"] = "" if r.ess is None else repr(r.ess)
            w.writerow({k: row[k] for k in CSV_FIELDS})


def write_records_json(records, path):
    out = []
    for r in records:
        d = asdict(r)
        d["tag"] = r.tag
        out.append(d)
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)


def numerics_only(records) -> bytes:
    """Canonical byte serialization of the numbers (wall time excluded), used
    by the determinism contract."""
    rows = [
        {
            "config_hash": r.config_hash,
            "observable": r.observable,
            "value": repr(r.value),
            "std_error": None if r.std_error is None else repr(r.std_error),
            "ess": None if r.ess is None else repr(r.ess),
        }
        for r in records
    ]
    return json.dumps(rows, sort_keys=True).encode()


def save_field_snapshot(values: np.ndarray, grid_meta: dict, path_base: str):
    """Flat float64 binary plus a JSON sidecar with shape and grid data."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    arr.tofile(path_base + ".bin")
    sidecar = {
        "format": "bosegas-field-snapshot",
        "version": 1,
        "dtype": "float64",
        "order": "C",
        "shape": list(arr.shape),
        "grid": grid_meta,
        "code_version": __version__,
    }
    with open(path_base + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)


def load_field_snapshot(path_base: str):
    with open(path_base + ".json") as fh:
        sidecar = json.load(fh)
    arr = np.fromfile(path_base + ".bin", dtype=np.float64).reshape(sidecar["shape"])
    return arr, sidecar


def save_loop_checkpoint(config, region_meta: dict, rng_state: dict, path_base: str, sweep: int):
    """Self-describing chain checkpoint: loop arrays in an npz blob plus sidecar."""
    arrays = {}
    meta_loops = []
    for i, lp in enumerate(config.loops):
        arrays[f"path_{i}"] = lp.path
        meta_loops.append({"winding": int(lp.winding), "image": [int(v) for v in lp.image]})
    np.savez_compressed(path_base + ".npz", **arrays)
    sidecar = {
        "format": "bosegas-loop-checkpoint",
        "version": 1,
        "sweep": sweep,
        "region": region_meta,
        "loops": meta_loops,
        "rng_state": rng_state,
        "code_version": __version__,
    }
    with open(path_base + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)


def load_loop_checkpoint(path_base: str):
    from .loopgas.loops import BridgeLoop, LoopConfiguration

    with open(path_base + ".json") as fh:
        sidecar = json.load(fh)
    blobs = np.load(path_base + ".npz")
    loops = []
    for i, meta in enumerate(sidecar["loops"]):
        path = blobs[f"path_{i}"]
        loops.append(
            BridgeLoop(
                base=path[0].copy(),
                winding=meta["winding"],
                path=path,
                image=np.array(meta["image"], dtype=int),
            )
        )
    return LoopConfiguration(loops=loops), sidecar

