"""Reduced two-trajectory hologram model.

The interference phase between the rescattered (signal) and direct
(reference) wavepackets is approximated as linear in the ponderomotive
energy,

    dS(p) ~ alpha0 * U_p * tau_exc(p) + C,

with tau_exc the real part of the excursion time of the dominant forward
rescattered saddle.  ``alpha0`` and ``C`` are fitted once per configuration
against the full saddle-point phase difference; the trajectory sensitivity
kappa(p) = d(dS)/dU_p = alpha0 * tau_exc(p) feeds the analytic dephasing
law.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .engine import action_z
from .field import FieldRealization
from .saddles import direct_saddle_times, rescattering_saddles_grid


@dataclass(frozen=True)
class ReducedHologramModel:
    """Calibrated linear-in-U_p hologram phase model."""

    alpha0: float
    c_offset: float
    up: float
    pz: np.ndarray          # calibration momenta
    tau_exc: np.ndarray     # excursion times at the calibration momenta
    delta_s_full: np.ndarray  # full saddle-point phase differences

    def predict(self, tau_exc) -> np.ndarray:
        return self.alpha0 * self.up * np.asarray(tau_exc) + self.c_offset

    def kappa(self, tau_exc) -> np.ndarray:
        """Sensitivity d(dS)/dU_p at the given excursion time."""
        return self.alpha0 * np.asarray(tau_exc)


def hologram_phases(
    pz, pperp, f: FieldRealization, ip: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-model phase difference and excursion time per momentum.

    Returns (delta_s, tau_exc, ok): the real phase difference between the
    dominant forward rescattered saddle and the dominant direct saddle,
    the excursion time Re(tr - t0), and a mask of momenta where a forward
    saddle exists.
    """
    pz = np.atleast_1d(np.asarray(pz, dtype=float))
    pperp_arr = np.broadcast_to(np.asarray(pperp, dtype=float), pz.shape)
    ts = direct_saddle_times(pz, pperp_arr, f, ip)
    s_dir = action_z(pz[:, None], pperp_arr[:, None], ts, f, ip)

    sad = rescattering_saddles_grid(pz, pperp_arr, f, ip)
    n = pz.size
    delta_s = np.zeros(n)
    tau = np.zeros(n)
    ok = np.zeros(n, dtype=bool)
    if sad.width == 0 or ts.shape[-1] == 0:
        return delta_s, tau, ok
    s_comb = (
        action_z(pz[:, None], pperp_arr[:, None], sad.tr, f, ip)
        - action_z(sad.k, 0.0, sad.tr, f, ip)
        + action_z(sad.k, 0.0, sad.t0, f, ip)
    )
    use = sad.forward & (s_comb.imag > 0)
    weight = np.where(use, np.exp(-s_comb.imag), 0.0)
    has = use.any(axis=1)
    dom_r = np.argmax(weight, axis=1)
    s_comb_dom = np.take_along_axis(s_comb, dom_r[:, None], axis=1)[:, 0]
    t0_dom = np.take_along_axis(sad.t0.real, dom_r[:, None], axis=1)[:, 0]
    tau_dom = np.take_along_axis(
        (sad.tr - sad.t0).real, dom_r[:, None], axis=1
    )[:, 0]
    # the signal orbit shares its birth with one of the direct saddles; the
    # holographic reference is the other one (most distant birth time)
    ref = np.argmax(np.abs(ts.real - t0_dom[:, None]), axis=1)
    s_dir_ref = np.take_along_axis(s_dir, ref[:, None], axis=1)[:, 0]
    delta_s[has] = (s_comb_dom.real - s_dir_ref.real)[has]
    tau[has] = tau_dom[has]
    ok = has
    return delta_s, tau, ok


def up_sensitivity(
    pz, pperp, f: FieldRealization, ip: float, rel_step: float = 5e-4
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trajectory sensitivity kappa(p) = d(dS)/dU_p by central difference.

    The field amplitude is scaled so the ponderomotive energy moves by
    +-rel_step relatively; returns (kappa, tau_exc, ok).
    """
    from dataclasses import replace

    up = f.constants().up
    f_plus = replace(f, e0=f.e0 * math.sqrt(1.0 + rel_step))
    f_minus = replace(f, e0=f.e0 * math.sqrt(1.0 - rel_step))
    ds_plus, _, ok_p = hologram_phases(pz, pperp, f_plus, ip)
    ds_minus, _, ok_m = hologram_phases(pz, pperp, f_minus, ip)
    _, tau, ok_0 = hologram_phases(pz, pperp, f, ip)
    ok = ok_p & ok_m & ok_0
    kappa = (ds_plus - ds_minus) / (2.0 * up * rel_step)
    return kappa, tau, ok


def calibrate_hologram_model(
    f: FieldRealization,
    ip: float,
    pz_band: tuple[float, float] = (0.3, 1.3),
    n_points: int = 48,
    pperp: float = 0.0,
) -> ReducedHologramModel:
    """Least-squares fit of (alpha0, C) against the full phase difference."""
    pz = np.linspace(pz_band[0], pz_band[1], n_points)
    delta_s, tau, ok = hologram_phases(pz, pperp, f, ip)
    if ok.sum() < 4:
        raise ValueError("too few momenta with forward rescattered saddles to calibrate")
    up = f.constants().up
    x = up * tau[ok]
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, delta_s[ok], rcond=None)
    return ReducedHologramModel(
        alpha0=float(coef[0]),
        c_offset=float(coef[1]),
        up=up,
        pz=pz[ok],
        tau_exc=tau[ok],
        delta_s_full=delta_s[ok],
    )


def reduced_phase_difference(
    p: tuple[float, float],
    f: FieldRealization,
    ip: float,
    model: ReducedHologramModel,
) -> float | None:
    """Model phase difference at one momentum; None when no forward
    rescattered saddle exists there."""
    _, tau, ok = hologram_phases(np.array([p[0]]), np.array([p[1]]), f, ip)
    if not ok[0]:
        return None
    return float(model.predict(tau[0]))


def local_fringe_spacing(model: ReducedHologramModel) -> np.ndarray:
    """Fringe spacing 2 pi / |d(dS)/dp_z| along the calibration band."""
    dphase = np.gradient(model.predict(model.tau_exc), model.pz)
    return 2.0 * np.pi / np.abs(dphase)
