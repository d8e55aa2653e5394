"""Squeezed-light strong-field photoelectron holography toolkit."""

__version__ = "0.1.0"

from .field import (
    FieldConstants,
    FieldRealization,
    LaserParams,
    field_and_potential,
    reference_realization,
    to_atomic_units,
)
from .gaussian import (
    PhotonStatistics,
    SqueezedState,
    WignerGaussian,
    amplitude_squeezed_state,
    coherent_state,
    gauss_hermite_nodes,
    phase_squeezed_state,
    photon_statistics,
    realize_field,
    sample_quadratures,
    squeezing_to_db,
    wigner_of_state,
)
from .saddles import MomentumGrid, SaddleSet, direct_saddles, rescattering_saddles
from .engine import EngineOptions, MomentumDistribution, single_shot_pmd, transition_amplitude
from .ensemble import EnsembleConfig, EnsembleReport, convergence_scan, ensemble_pmd
from .analysis import (
    FisherMap,
    ScalingFit,
    VisibilityCurve,
    analytic_visibility,
    cfi_map,
    darkport_fraction,
    fit_quartic_wavelength,
    fit_squeeze_decay,
    fringe_visibility,
    lineout,
)
from .hologram import ReducedHologramModel, calibrate_hologram_model, reduced_phase_difference
