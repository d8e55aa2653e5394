"""CSV/JSON artifact writers with stable, versioned schemas.

All floats are written with 17 significant digits so downstream log-scale
fits reproduce bit-for-bit; repeated runs of the same configuration
produce byte-identical CSVs (wall time lives only in meta.json).
"""

from __future__ import annotations

import csv
import json
import os
import platform

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def base_meta(command: str, extra: dict) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "package": {"name": "sfholo", "version": __version__},
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
    }
    meta.update(extra)
    return meta


def write_pmd_csv(path: str, pmd) -> None:
    pz_mesh, pp_mesh = pmd.grid.mesh()
    rows = zip(pz_mesh.ravel(), pp_mesh.ravel(), pmd.values.ravel())
    write_csv(path, ["pz", "pperp", "value"], rows)


def write_fisher_map_csv(path: str, fisher) -> None:
    pz_mesh, pp_mesh = fisher.grid.mesh()
    rows = zip(pz_mesh.ravel(), pp_mesh.ravel(), fisher.density.ravel())
    write_csv(path, ["pz", "pperp", "density"], rows)
