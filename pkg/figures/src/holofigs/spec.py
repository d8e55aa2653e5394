"""Figure specification: a JSON document naming inputs, panels and outputs.

Two kinds are supported::

    {"kind": "pmd_panels",
     "inputs": {"cs": ".../pmd.csv", "as": ".../pmd.csv", "ps": ".../pmd.csv",
                "meta": ".../meta.json"},
     "output": {"path": "out/fig_pmd", "formats": ["png", "svg"]}}

    {"kind": "scaling_panels",
     "inputs": {"visibility_vs_r": ".../visibility_vs_r.csv",
                "squeeze_fit": ".../fit.json",
                "visibility_vs_lambda": ".../visibility_vs_lambda.csv",   # optional
                "wavelength_fit": ".../fit.json",                          # optional
                "fisher_vs_r": ".../fisher_vs_r.csv"},                     # optional
     "output": {"path": "out/fig_scaling", "formats": ["png", "svg"]}}

All inputs are validated (existence and schema) before anything is
rendered, so a bad spec never leaves partial output behind.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field


class FigureError(RuntimeError):
    pass


PMD_HEADER = ["pz", "pperp", "value"]
VIS_R_HEADER = ["state", "r", "pz", "visibility"]
VIS_LAMBDA_HEADER = ["state", "lambda_um", "visibility"]
FISHER_R_HEADER = ["r", "cfi", "cfi_over_sql"]

KINDS = ("pmd_panels", "scaling_panels")

#: Momentum maps use a log color scale spanning this many decades below
#: each figure's maximum.
FIGURE_DECADES = 4


@dataclass
class FigureSpec:
    kind: str
    inputs: dict
    output_path: str
    formats: tuple = ("png", "svg")
    log_scale: dict = field(default_factory=dict)


def load_spec(path: str) -> FigureSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise FigureError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FigureError(f"malformed spec JSON: {exc}") from exc
    kind = doc.get("kind")
    if kind not in KINDS:
        raise FigureError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    output = doc.get("output", {})
    if "path" not in output:
        raise FigureError("spec output.path is required")
    formats = tuple(output.get("formats", ("png", "svg")))
    for fmt in formats:
        if fmt not in ("png", "svg"):
            raise FigureError(f"unsupported output format {fmt!r}")
    return FigureSpec(
        kind=kind,
        inputs=dict(doc.get("inputs", {})),
        output_path=output["path"],
        formats=formats,
        log_scale=dict(doc.get("log_scale", {})),
    )


def read_csv_columns(path: str, expected_header: list[str]) -> dict:
    if not os.path.exists(path):
        raise FigureError(f"input file missing: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise FigureError(f"empty input file: {path}") from exc
        if header != expected_header:
            raise FigureError(
                f"schema mismatch in {path}: header {header} != {expected_header}"
            )
        columns: dict = {name: [] for name in header}
        for row in reader:
            if len(row) != len(header):
                raise FigureError(f"ragged row in {path}: {row}")
            for name, cell in zip(header, row):
                columns[name].append(cell)
    return columns


def read_meta(path: str) -> dict:
    if not os.path.exists(path):
        raise FigureError(f"input file missing: {path}")
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FigureError(f"malformed meta JSON in {path}: {exc}") from exc
