"""Command-line orchestrator for the holography pipelines.

Commands: pmd, lineout, visibility-scan, wavelength-scan, fisher.
Global flags: --config PATH, --out DIR, --seed N, --threads N (threads
affect speed only, never results).

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys

import numpy as np

from .analysis import (
    cfi_at,
    darkport_fraction,
    fit_quartic_wavelength,
    fit_single_exponential,
    fit_squeeze_decay,
    fit_wavelength_power,
    fringe_visibility,
    lineout,
    log_slope,
)
from .config import ConfigError, RunConfig, load_config
from .ensemble import ensemble_pmd
from .field import LaserParams, to_atomic_units
from .gaussian import SqueezedState, squeezing_to_db
from .io import base_meta, write_csv, write_fisher_map_csv, write_json, write_pmd_csv
from .saddles import MomentumGrid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

STATE_LABELS = ("CS", "AS", "PS")


def _state_for(label: str, alpha: float, r: float) -> SqueezedState:
    if label == "CS":
        return SqueezedState(alpha=alpha, r=0.0, theta=0.0)
    if label == "AS":
        return SqueezedState(alpha=alpha, r=r, theta=0.0)
    if label == "PS":
        return SqueezedState(alpha=alpha, r=r, theta=math.pi)
    raise ConfigError(f"unknown state label {label!r}")


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "laser": dataclasses.asdict(cfg.laser),
        "state": {"alpha": cfg.alpha, "r": cfg.r, "theta": cfg.theta},
        "grid": dataclasses.asdict(cfg.grid),
        "ensemble": dataclasses.asdict(cfg.ensemble),
        "engine": dataclasses.asdict(cfg.engine),
        "scan": dataclasses.asdict(cfg.scan),
        "threads": cfg.threads,
        "squeezing_db": squeezing_to_db(cfg.r),
    }


def _constants_echo(laser: LaserParams) -> dict:
    const = to_atomic_units(laser)
    return {"e0": const.e0, "omega": const.omega, "up": const.up, "p_2up": const.p_2up}


def cmd_pmd(cfg: RunConfig) -> None:
    state = SqueezedState(alpha=cfg.alpha, r=cfg.r, theta=cfg.theta)
    pmd, report = ensemble_pmd(
        state, cfg.laser, cfg.grid, cfg.ensemble, cfg.engine, workers=cfg.threads
    )
    out = cfg.output_dir
    write_pmd_csv(os.path.join(out, "pmd.csv"), pmd)
    if "lineout" in cfg.emit:
        pz, spec = lineout(pmd, cfg.grid.pperp_min)
        write_csv(os.path.join(out, "lineout.csv"), ["pz", "value"], zip(pz, spec))
    write_json(
        os.path.join(out, "meta.json"),
        base_meta(
            "pmd",
            {
                "config": _config_echo(cfg),
                "constants": _constants_echo(cfg.laser),
                "dropped_nodes": report.dropped_nodes,
                "realized_samples": report.realized_samples,
                "wall_time_s": report.wall_time,
            },
        ),
    )


def cmd_lineout(cfg: RunConfig) -> None:
    state = SqueezedState(alpha=cfg.alpha, r=cfg.r, theta=cfg.theta)
    grid = cfg.scan_grid()
    pmd, report = ensemble_pmd(
        state, cfg.laser, grid, cfg.ensemble, cfg.engine, workers=cfg.threads
    )
    pz, spec = lineout(pmd, grid.pperp_min)
    out = cfg.output_dir
    write_csv(os.path.join(out, "lineout.csv"), ["pz", "value"], zip(pz, spec))
    write_json(
        os.path.join(out, "meta.json"),
        base_meta(
            "lineout",
            {
                "config": _config_echo(cfg),
                "constants": _constants_echo(cfg.laser),
                "grid": dataclasses.asdict(grid),
                "dropped_nodes": report.dropped_nodes,
                "wall_time_s": report.wall_time,
            },
        ),
    )


def _probe_visibility(cfg: RunConfig, state: SqueezedState, laser: LaserParams,
                      grid: MomentumGrid) -> float:
    pmd, _ = ensemble_pmd(state, laser, grid, cfg.ensemble, cfg.engine, workers=cfg.threads)
    pz, spec = lineout(pmd, grid.pperp_min)
    curve = fringe_visibility(pz, spec)
    if curve.pz.size == 0:
        return 0.0
    return curve.at(cfg.scan.pz_probe)


def cmd_visibility_scan(cfg: RunConfig) -> None:
    if not cfg.scan.r_values:
        raise ConfigError("visibility-scan needs a nonempty scan.r_values list")
    grid = cfg.scan_grid()
    rows = []
    per_state: dict[str, list[tuple[float, float]]] = {s: [] for s in STATE_LABELS}
    v_cs = _probe_visibility(cfg, _state_for("CS", cfg.alpha, 0.0), cfg.laser, grid)
    for r in cfg.scan.r_values:
        for label in STATE_LABELS:
            if label == "CS" or r == 0.0:
                v = v_cs
            else:
                v = _probe_visibility(cfg, _state_for(label, cfg.alpha, r), cfg.laser, grid)
            rows.append((label, r, cfg.scan.pz_probe, v))
            per_state[label].append((r, v))
    out = cfg.output_dir
    write_csv(
        os.path.join(out, "visibility_vs_r.csv"),
        ["state", "r", "pz", "visibility"],
        rows,
    )
    fits = {}
    ps_points = per_state["PS"]
    fit = fit_squeeze_decay(ps_points)
    single = fit_single_exponential(ps_points)
    fits["PS"] = {
        "model": fit.model,
        "eta": fit.params[0],
        "offset": fit.params[1],
        "goodness": fit.goodness,
    }
    fits["PS_single_exponential"] = {
        "model": single.model,
        "eta": single.params[0],
        "offset": single.params[1],
        "goodness": single.goodness,
    }
    write_json(os.path.join(out, "fit.json"), fits)
    write_json(
        os.path.join(out, "meta.json"),
        base_meta(
            "visibility-scan",
            {
                "config": _config_echo(cfg),
                "constants": _constants_echo(cfg.laser),
                "grid": dataclasses.asdict(grid),
            },
        ),
    )


def cmd_wavelength_scan(cfg: RunConfig) -> None:
    if not cfg.scan.wavelengths_um:
        raise ConfigError("wavelength-scan needs a nonempty scan.wavelengths_um list")
    rows = []
    per_state: dict[str, list[tuple[float, float]]] = {s: [] for s in STATE_LABELS}
    lam_ref_um = cfg.laser.wavelength_nm / 1000.0
    for lam_um in cfg.scan.wavelengths_um:
        laser = dataclasses.replace(cfg.laser, wavelength_nm=1000.0 * lam_um)
        const = to_atomic_units(laser)
        if cfg.scan.alpha_scales_with_wavelength:
            # fixed classical intensity: the mode photon number grows with
            # wavelength, so the effective displacement scales as sqrt(lambda)
            alpha = cfg.alpha * math.sqrt(lam_um / lam_ref_um)
        else:
            alpha = cfg.alpha
        grid = cfg.scan_grid(pz_max=const.p_2up + 0.45)
        for label in STATE_LABELS:
            r = 0.0 if label == "CS" else (cfg.r if cfg.r > 0 else 1.0)
            v = _probe_visibility(cfg, _state_for(label, alpha, r), laser, grid)
            rows.append((label, lam_um, v))
            per_state[label].append((lam_um, v))
    out = cfg.output_dir
    write_csv(
        os.path.join(out, "visibility_vs_lambda.csv"),
        ["state", "lambda_um", "visibility"],
        rows,
    )
    fits = {}
    for label in STATE_LABELS:
        pts = per_state[label]
        if sum(1 for _, v in pts if v > 0) < 4:
            continue
        quartic = fit_quartic_wavelength(pts)
        fits[label] = {
            "model": quartic.model,
            "beta": quartic.params[0],
            "offset": quartic.params[1],
            "goodness": quartic.goodness,
            "alternatives": {
                f"lambda^{int(p)}": fit_wavelength_power(pts, p).goodness
                for p in (2.0, 3.0)
            },
        }
    write_json(os.path.join(out, "fit.json"), fits)
    write_json(
        os.path.join(out, "meta.json"),
        base_meta(
            "wavelength-scan",
            {"config": _config_echo(cfg), "constants": _constants_echo(cfg.laser)},
        ),
    )


#: Desk-scale Fisher grid: one emission hemisphere past the classical
#: cutoff, transverse band where the tunneling tail carries information.
#: Computed fine, then box-averaged so each detector bin integrates over
#: at least one fringe (point-sampled fringe minima carry a different,
#: slower squeezing scaling than the envelope and tail channels).
FISHER_GRID = MomentumGrid(
    pz_min=0.0, pz_max=2.6, pz_steps=208,
    pperp_min=0.0, pperp_max=0.45, pperp_steps=12,
)
FISHER_ORDER = 14
FISHER_REBIN = (8, 3)


def cmd_fisher(cfg: RunConfig) -> None:
    r_values = [r for r in cfg.scan.r_values if r >= 0]
    if len([r for r in r_values if r > 0]) < 3:
        raise ConfigError("fisher needs at least 3 positive r values in scan.r_values")
    ens = dataclasses.replace(cfg.ensemble, order=min(cfg.ensemble.order, FISHER_ORDER))
    delta = cfg.scan.cfi_delta
    theta = math.pi  # phase-squeezed family
    alpha = cfg.scan.fisher_alpha
    options = cfg.engine
    if cfg.scan.fisher_direct_only:
        options = dataclasses.replace(options, include_rescattered=False)
    sql = cfi_at(
        0.0, alpha, theta, cfg.laser, FISHER_GRID, ens, delta,
        options=options, workers=cfg.threads, rebin_factors=FISHER_REBIN,
    ).integrated
    rows = []
    largest_map = None
    for r in sorted(r for r in r_values if r > 0):
        fisher = cfi_at(
            r, alpha, theta, cfg.laser, FISHER_GRID, ens, delta,
            options=options, workers=cfg.threads, rebin_factors=FISHER_REBIN,
        )
        rows.append((r, fisher.integrated, fisher.integrated / sql))
        largest_map = (r, fisher)
    out = cfg.output_dir
    write_csv(os.path.join(out, "fisher_vs_r.csv"), ["r", "cfi", "cfi_over_sql"], rows)
    r_big, fisher_big = largest_map
    write_fisher_map_csv(os.path.join(out, "fisher_map.csv"), fisher_big)
    const = to_atomic_units(cfg.laser)
    f_frac, y_frac = darkport_fraction(fisher_big, const)
    write_json(
        os.path.join(out, "darkport.json"),
        {
            "r": r_big,
            "fisher_fraction": f_frac,
            "yield_fraction": y_frac,
            "p_2up": const.p_2up,
        },
    )
    rs = np.array([row[0] for row in rows])
    fs = np.array([row[1] for row in rows])
    slope = None
    if (rs >= cfg.scan.slope_r_min).sum() >= 2:
        slope = log_slope(rs, fs, x_min=cfg.scan.slope_r_min)
    write_json(
        os.path.join(out, "meta.json"),
        base_meta(
            "fisher",
            {
                "config": _config_echo(cfg),
                "constants": _constants_echo(cfg.laser),
                "grid": dataclasses.asdict(FISHER_GRID),
                "cfi_order": ens.order,
                "cfi_delta": delta,
                "fisher_alpha": alpha,
                "fisher_direct_only": cfg.scan.fisher_direct_only,
                "sql": sql,
                "ln_slope_vs_r": slope,
            },
        ),
    )


COMMANDS = {
    "pmd": cmd_pmd,
    "lineout": cmd_lineout,
    "visibility-scan": cmd_visibility_scan,
    "wavelength-scan": cmd_wavelength_scan,
    "fisher": cmd_fisher,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfholo",
        description="Squeezed-light strong-field photoelectron holography pipelines",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="TOML configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="ensemble seed override")
    parser.add_argument(
        "--threads", type=int, default=None,
        help="worker threads (speed only, never results)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
        if args.seed is not None:
            cfg = dataclasses.replace(
                cfg, ensemble=dataclasses.replace(cfg.ensemble, seed=args.seed)
            )
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg = dataclasses.replace(cfg, threads=args.threads)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG

    try:
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("I/O error: %s (path: %s)", exc, getattr(exc, "filename", "?"))
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
