"""Incoherent ensemble average of single-shot momentum distributions.

The ensemble PMD is

    P(p) = sum_i w_i |M(p; alpha_i)|^2

with phase-space points alpha_i drawn from the driver's Gaussian Wigner
distribution, either by tensor-product Gauss-Hermite quadrature (default:
the integrand is smooth in the two quadratures and the weight is exactly
Gaussian) or by counter-based Monte Carlo (retained for cross-validation).

Reduction is deterministic: per-sample results are accumulated with
compensated (Kahan) summation in fixed sample order, independent of how
many workers evaluated them, so a given configuration is bit-reproducible.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import math
import time

import numpy as np

from .engine import EngineOptions, MomentumDistribution, single_shot_pmd
from .field import LaserParams, to_atomic_units
from .gaussian import (
    SqueezedState,
    WignerGaussian,
    gauss_hermite_nodes,
    realize_field,
    sample_quadratures,
    wigner_of_state,
)
from .saddles import MomentumGrid

#: A run aborts when more than this fraction of sample-node contributions
#: was dropped as non-finite (silent-bias guard).
MAX_DROPPED_FRACTION = 0.01


@dataclass(frozen=True)
class EnsembleConfig:
    """How to average over the Wigner distribution."""

    method: str = "gauss_hermite"  # or "monte_carlo"
    order: int = 20                # tensor order per quadrature axis
    samples: int = 10_000          # Monte Carlo sample count
    seed: int = 0
    phase_coupling: bool = True
    cov_scale: float = 1.0         # 0 collapses the Wigner cloud to its mean

    def __post_init__(self) -> None:
        if self.method not in ("gauss_hermite", "monte_carlo"):
            raise ValueError(f"unknown ensemble method {self.method!r}")
        if self.method == "gauss_hermite" and not 1 <= self.order <= 64:
            raise ValueError(f"quadrature order must be in [1, 64], got {self.order}")
        if self.method == "monte_carlo" and self.samples < 1:
            raise ValueError(f"sample count must be >= 1, got {self.samples}")
        if self.cov_scale < 0:
            raise ValueError("covariance scale must be nonnegative")


@dataclass
class EnsembleReport:
    realized_samples: int
    dropped_nodes: int
    statistical_error_map: np.ndarray | None  # per-node standard error (MC)
    wall_time: float


class _KahanAccumulator:
    """Compensated elementwise summation over a fixed index order."""

    def __init__(self, shape: tuple[int, ...]):
        self.total = np.zeros(shape)
        self._comp = np.zeros(shape)

    def add(self, values: np.ndarray) -> None:
        y = values - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


def _ensemble_points(
    state: SqueezedState, cfg: EnsembleConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Phase-space points and weights for the configured method."""
    w = wigner_of_state(state)
    if cfg.cov_scale == 0.0:
        # delta-distribution limit: single node at the mean, weight exactly 1
        return w.mean[None, :], np.array([1.0])
    if cfg.cov_scale != 1.0:
        w = WignerGaussian(mean=w.mean, cov=cfg.cov_scale * w.cov)
    if cfg.method == "gauss_hermite":
        return gauss_hermite_nodes(w, cfg.order)
    nodes = sample_quadratures(w, cfg.seed, cfg.samples)
    return nodes, np.full(cfg.samples, 1.0 / cfg.samples)


def ensemble_pmd(
    state: SqueezedState,
    laser: LaserParams,
    grid: MomentumGrid,
    cfg: EnsembleConfig = EnsembleConfig(),
    options: EngineOptions = EngineOptions(),
    workers: int = 1,
) -> tuple[MomentumDistribution, EnsembleReport]:
    """Wigner-averaged PMD, deterministic for a given configuration."""
    t_start = time.perf_counter()
    const = to_atomic_units(laser)
    nodes, weights = _ensemble_points(state, cfg)
    n_samples = nodes.shape[0]

    def one(sample: np.ndarray) -> tuple[np.ndarray, int]:
        f = realize_field(sample, state, const, cfg.phase_coupling, cep=laser.cep)
        shot = single_shot_pmd(grid, f, laser.target_atom_ip, options)
        return shot.values, shot.metadata.get("flagged_nodes", 0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, nodes))
    else:
        results = [one(s) for s in nodes]

    acc = _KahanAccumulator(grid.shape)
    acc_sq = _KahanAccumulator(grid.shape) if cfg.method == "monte_carlo" else None
    dropped = 0
    for w_i, (values, flagged) in zip(weights, results):
        acc.add(w_i * values)
        if acc_sq is not None:
            acc_sq.add(w_i * values**2)
        dropped += flagged
    if dropped > MAX_DROPPED_FRACTION * n_samples * grid.node_count():
        raise ArithmeticError(
            f"{dropped} dropped sample-node contributions exceed the "
            f"{MAX_DROPPED_FRACTION:.0%} budget"
        )
    total = np.maximum(acc.total, 0.0)

    error_map = None
    if acc_sq is not None and n_samples > 1:
        var = np.maximum(acc_sq.total - total**2, 0.0)
        error_map = np.sqrt(var / (n_samples - 1))

    meta = {
        "state": {
            "alpha_abs": abs(state.alpha),
            "alpha_arg": math.atan2(state.alpha.imag, state.alpha.real),
            "r": state.r,
            "theta": state.theta,
        },
        "laser": {
            "wavelength_nm": laser.wavelength_nm,
            "peak_intensity_w_cm2": laser.peak_intensity_w_cm2,
            "cep": laser.cep,
            "ip": laser.target_atom_ip,
        },
        "constants": {
            "e0": const.e0,
            "omega": const.omega,
            "up": const.up,
            "p_2up": const.p_2up,
        },
        "grid": {
            "pz_min": grid.pz_min, "pz_max": grid.pz_max, "pz_steps": grid.pz_steps,
            "pperp_min": grid.pperp_min, "pperp_max": grid.pperp_max,
            "pperp_steps": grid.pperp_steps,
        },
        "ensemble": {
            "method": cfg.method,
            "order": cfg.order,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "phase_coupling": cfg.phase_coupling,
            "cov_scale": cfg.cov_scale,
            "realized_samples": n_samples,
        },
        "engine": {
            "include_rescattered": options.include_rescattered,
            "include_backscattered": options.include_backscattered,
            "w_resc": options.w_resc,
            "contact_strength": options.contact_strength,
        },
        "dropped_nodes": dropped,
    }
    report = EnsembleReport(
        realized_samples=n_samples,
        dropped_nodes=dropped,
        statistical_error_map=error_map,
        wall_time=time.perf_counter() - t_start,
    )
    return MomentumDistribution(grid=grid, values=total, metadata=meta), report


@dataclass
class ConvergenceRow:
    count: int
    max_standard_error: float | None
    visibility_drift: float | None


def convergence_scan(
    state: SqueezedState,
    laser: LaserParams,
    grid: MomentumGrid,
    cfg: EnsembleConfig,
    schedule: list[int],
    pz_probe: float = 0.8,
    options: EngineOptions = EngineOptions(),
) -> list[ConvergenceRow]:
    """Error decay along an increasing sample-count (or order) schedule.

    For Monte Carlo the counter-based sampler makes prefix averages exact:
    accumulating to each checkpoint reproduces an independent run of that
    size bit for bit.  Visibility drift is measured at ``pz_probe`` on the
    lowest-p_perp lineout.
    """
    from .analysis import fringe_visibility, lineout

    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")

    def probe_visibility(pmd: MomentumDistribution) -> float | None:
        pz, spec = lineout(pmd, pmd.grid.pperp_min)
        curve = fringe_visibility(pz, spec)
        if curve.pz.size == 0:
            return None
        return float(np.interp(pz_probe, curve.pz, curve.v))

    rows: list[ConvergenceRow] = []
    prev_v: float | None = None
    if cfg.method == "monte_carlo":
        const = to_atomic_units(laser)
        wig = wigner_of_state(state)
        if cfg.cov_scale != 1.0:
            wig = WignerGaussian(mean=wig.mean, cov=cfg.cov_scale * wig.cov)
        acc = _KahanAccumulator(grid.shape)
        acc_sq = _KahanAccumulator(grid.shape)
        done = 0
        for count in schedule:
            nodes = sample_quadratures(wig, cfg.seed, count - done, start=done)
            for sample in nodes:
                f = realize_field(sample, state, const, cfg.phase_coupling, cep=laser.cep)
                shot = single_shot_pmd(grid, f, laser.target_atom_ip, options)
                acc.add(shot.values)
                acc_sq.add(shot.values**2)
            done = count
            mean = acc.total / count
            if count > 1:
                var = np.maximum(acc_sq.total / count - mean**2, 0.0)
                max_se = float(np.sqrt(var / (count - 1)).max())
            else:
                max_se = None
            pmd = MomentumDistribution(grid=grid, values=np.maximum(mean, 0.0))
            v = probe_visibility(pmd)
            drift = abs(v - prev_v) if (v is not None and prev_v is not None) else None
            rows.append(ConvergenceRow(count, max_se, drift))
            prev_v = v
    else:
        for order in schedule:
            pmd, _ = ensemble_pmd(state, laser, grid, replace(cfg, order=order), options)
            v = probe_visibility(pmd)
            drift = abs(v - prev_v) if (v is not None and prev_v is not None) else None
            rows.append(ConvergenceRow(order, None, drift))
            prev_v = v
    return rows
