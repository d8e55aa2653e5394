"""Declarative run configuration: one TOML document, CLI flags override.

Sections mirror the domain types::

    [laser]     wavelength_nm, peak_intensity_w_cm2, cep, ip
    [state]     alpha, r, theta        (alpha real > 0; label shortcuts in scans)
    [grid]      pz_min, pz_max, pz_steps, pperp_min, pperp_max, pperp_steps
    [ensemble]  method, order, samples, seed, phase_coupling, cov_scale
    [engine]    include_rescattered, include_backscattered, w_resc, contact_strength
    [scan]      r_values, wavelengths_um, pz_probe, alpha_scales_with_wavelength,
                cfi_delta, slope_r_min
    [output]    dir, emit

Everything flows through the config or flags; no environment variables.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .engine import EngineOptions
from .ensemble import EnsembleConfig
from .field import LaserParams
from .saddles import MomentumGrid


class ConfigError(ValueError):
    pass


#: Desk-scale default map grid (minutes-scale, resolves plateau fringes).
DEFAULT_MAP_GRID = MomentumGrid(
    pz_min=-2.2, pz_max=2.2, pz_steps=240,
    pperp_min=0.0, pperp_max=1.0, pperp_steps=120,
)

DEFAULT_SCAN_PZ_STEP = 0.003
DEFAULT_SCAN_PPERP = 0.04


@dataclass(frozen=True)
class ScanConfig:
    r_values: tuple = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5)
    wavelengths_um: tuple = (0.8, 1.2, 1.6, 2.0)
    pz_probe: float = 0.8
    alpha_scales_with_wavelength: bool = True
    cfi_delta: float = 0.05
    slope_r_min: float = 0.75
    # The Fisher pipeline estimates the squeezing magnitude in the
    # linear-response regime (weak relative U_p noise) from the smooth
    # direct-electron observable; at figure-scale noise the shape
    # information saturates channel by channel and the e^{4r} asymptote
    # is not defined.
    fisher_alpha: float = 640.0
    fisher_direct_only: bool = True


@dataclass(frozen=True)
class RunConfig:
    laser: LaserParams = LaserParams(wavelength_nm=1500.0, peak_intensity_w_cm2=1e14)
    alpha: float = 50.0
    r: float = 0.0
    theta: float = 0.0
    grid: MomentumGrid = DEFAULT_MAP_GRID
    ensemble: EnsembleConfig = EnsembleConfig()
    engine: EngineOptions = EngineOptions()
    scan: ScanConfig = ScanConfig()
    output_dir: str = "out"
    emit: tuple = ("pmd", "lineout", "visibility", "fisher")
    threads: int = 1

    def scan_grid(self, pz_max: float | None = None) -> MomentumGrid:
        """Fine lineout grid used by the scan commands."""
        hi = pz_max if pz_max is not None else 2.0
        steps = max(int(round(hi / DEFAULT_SCAN_PZ_STEP)), 200)
        return MomentumGrid(
            pz_min=0.0, pz_max=hi, pz_steps=steps,
            pperp_min=0.0, pperp_max=DEFAULT_SCAN_PPERP, pperp_steps=2,
        )


def _take(section: dict, mapping: dict, where: str) -> dict:
    unknown = set(section) - set(mapping)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in [{where}]")
    return {mapping[k]: v for k, v in section.items()}


def load_config(path: str | None) -> RunConfig:
    """Parse the TOML config file; missing sections keep defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc

    cfg = RunConfig()
    try:
        if "laser" in doc:
            kw = _take(
                doc["laser"],
                {
                    "wavelength_nm": "wavelength_nm",
                    "peak_intensity_w_cm2": "peak_intensity_w_cm2",
                    "cep": "cep",
                    "ip": "target_atom_ip",
                },
                "laser",
            )
            cfg = replace(cfg, laser=LaserParams(**kw))
        if "state" in doc:
            kw = _take(doc["state"], {"alpha": "alpha", "r": "r", "theta": "theta"}, "state")
            cfg = replace(cfg, **kw)
        if "grid" in doc:
            kw = _take(
                doc["grid"],
                {k: k for k in (
                    "pz_min", "pz_max", "pz_steps", "pperp_min", "pperp_max", "pperp_steps"
                )},
                "grid",
            )
            cfg = replace(cfg, grid=MomentumGrid(**kw))
        if "ensemble" in doc:
            kw = _take(
                doc["ensemble"],
                {k: k for k in (
                    "method", "order", "samples", "seed", "phase_coupling", "cov_scale"
                )},
                "ensemble",
            )
            cfg = replace(cfg, ensemble=EnsembleConfig(**kw))
        if "engine" in doc:
            kw = _take(
                doc["engine"],
                {k: k for k in (
                    "include_rescattered", "include_backscattered", "w_resc", "contact_strength"
                )},
                "engine",
            )
            cfg = replace(cfg, engine=EngineOptions(**kw))
        if "scan" in doc:
            kw = _take(
                doc["scan"],
                {k: k for k in (
                    "r_values", "wavelengths_um", "pz_probe",
                    "alpha_scales_with_wavelength", "cfi_delta", "slope_r_min",
                    "fisher_alpha", "fisher_direct_only"
                )},
                "scan",
            )
            for key in ("r_values", "wavelengths_um"):
                if key in kw:
                    kw[key] = tuple(float(v) for v in kw[key])
            cfg = replace(cfg, scan=ScanConfig(**kw))
        if "output" in doc:
            kw = _take(doc["output"], {"dir": "output_dir", "emit": "emit"}, "output")
            if "emit" in kw:
                kw["emit"] = tuple(kw["emit"])
            cfg = replace(cfg, **kw)
        unknown = set(doc) - {"laser", "state", "grid", "ensemble", "engine", "scan", "output"}
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if cfg.alpha <= 0:
        raise ConfigError("state alpha must be positive")
    if not math.isfinite(cfg.alpha):
        raise ConfigError("state alpha must be finite")
    return cfg
