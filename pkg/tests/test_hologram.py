import numpy as np
import pytest

from sfholo.field import LaserParams, reference_realization
from sfholo.hologram import (
    ReducedHologramModel,
    calibrate_hologram_model,
    hologram_phases,
    local_fringe_spacing,
    reduced_phase_difference,
    up_sensitivity,
)

IP = 0.5


@pytest.fixture(scope="module")
def f():
    return reference_realization(LaserParams(wavelength_nm=1500.0, peak_intensity_w_cm2=1e14))


@pytest.fixture(scope="module")
def model(f):
    return calibrate_hologram_model(f, IP)


def test_calibration_matches_full_phases(model):
    predicted = model.predict(model.tau_exc)
    rel = np.abs(predicted - model.delta_s_full) / np.abs(model.delta_s_full)
    assert rel.max() < 0.15


def test_vanishing_up_leaves_offset():
    toy = ReducedHologramModel(
        alpha0=2.0, c_offset=1.25, up=0.0,
        pz=np.array([0.5]), tau_exc=np.array([100.0]), delta_s_full=np.array([1.25]),
    )
    assert toy.predict(123.0) == pytest.approx(1.25)


def test_phase_is_linear_in_up_times_tau(model):
    # d(dS)/d(up) at fixed excursion time equals alpha0 * tau
    tau = 110.0
    up1, up2 = model.up, model.up * 1.01
    toy1 = ReducedHologramModel(model.alpha0, model.c_offset, up1, model.pz,
                                model.tau_exc, model.delta_s_full)
    toy2 = ReducedHologramModel(model.alpha0, model.c_offset, up2, model.pz,
                                model.tau_exc, model.delta_s_full)
    slope = (toy2.predict(tau) - toy1.predict(tau)) / (up2 - up1)
    assert slope == pytest.approx(model.alpha0 * tau, rel=1e-12)
    assert model.kappa(tau) == pytest.approx(model.alpha0 * tau, rel=1e-12)


def test_reduced_phase_difference_in_plateau(f, model):
    value = reduced_phase_difference((0.8, 0.0), f, IP, model)
    assert value is not None
    full, _, ok = hologram_phases(np.array([0.8]), 0.0, f, IP)
    assert ok[0]
    assert value == pytest.approx(full[0], rel=0.15)


def test_reduced_phase_difference_unavailable(f, model):
    # far beyond every forward-rescattering cutoff no signal orbit exists
    assert reduced_phase_difference((4.5, 1.0), f, IP, model) is None


def test_long_trajectories_make_denser_fringes(model):
    spacing = local_fringe_spacing(model)
    tau = model.tau_exc
    # excursion time falls with p_z; fringe spacing must grow with p_z
    long_side = spacing[tau > np.median(tau)].mean()
    short_side = spacing[tau < np.median(tau)].mean()
    assert long_side < short_side


def test_kappa_magnitude_decreases_toward_cutoff(model):
    kappa = np.abs(model.kappa(model.tau_exc))
    assert kappa[0] > kappa[-1]


def test_field_scaling_matches_kappa_prediction(f):
    # scale e0 by (1 + eps): the measured change of the full phase difference
    # must match kappa * d(up) with kappa the derived trajectory sensitivity
    from dataclasses import replace

    eps = 1e-3
    up = f.constants().up
    f_plus = replace(f, e0=f.e0 * (1.0 + eps))
    pz = np.array([0.6, 0.8, 1.0])
    base, tau, ok1 = hologram_phases(pz, 0.0, f, IP)
    pert, _, ok2 = hologram_phases(pz, 0.0, f_plus, IP)
    assert ok1.all() and ok2.all()
    d_up = up * ((1.0 + eps) ** 2 - 1.0)
    measured = pert - base
    kappa, _, ok = up_sensitivity(pz, 0.0, f, IP)
    assert ok.all()
    predicted = kappa * d_up
    assert np.all(np.abs(measured - predicted) <= 0.10 * np.abs(measured))


def test_up_sensitivity_tracks_excursion_time(f):
    # kappa is roughly proportional to tau_exc across the plateau
    pz = np.linspace(0.4, 1.2, 9)
    kappa, tau, ok = up_sensitivity(pz, 0.0, f, IP)
    assert ok.all()
    ratio = kappa / tau
    assert np.std(ratio) / abs(np.mean(ratio)) < 0.15
