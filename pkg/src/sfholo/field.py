"""Laser parameters, atomic-unit conversion, and the single-cycle field.

The driving field is modelled as a monochromatic carrier at the peak
envelope value, gated to exactly one optical period.  Inside the window

    A(t) = (E0 / omega) * sin(omega * t + cep)
    E(t) = -dA/dt      = -E0 * cos(omega * t + cep)

and both vanish outside.  With the default ``cep = 0`` the field maximum
sits at the window centre, which is the standard choice for intracycle
holography.  All quantities are in Hartree atomic units unless noted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

# Pinned conversion constants (CODATA-derived, fixed for bit-exact tests):
# atomic unit of irradiance in W/cm^2, and omega_au * lambda_nm.
INTENSITY_AU_W_CM2 = 3.50945e16
OMEGA_LAMBDA_AU_NM = 45.5634

#: Ionization potential of atomic hydrogen (hartree).
HYDROGEN_IP = 0.5


@dataclass(frozen=True)
class LaserParams:
    """Experiment-facing laser description (lab units)."""

    wavelength_nm: float
    peak_intensity_w_cm2: float
    cep: float = 0.0
    target_atom_ip: float = HYDROGEN_IP

    def __post_init__(self) -> None:
        if self.wavelength_nm <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength_nm}")
        if self.peak_intensity_w_cm2 <= 0:
            raise ValueError(
                f"peak intensity must be positive, got {self.peak_intensity_w_cm2}"
            )
        if self.target_atom_ip <= 0:
            raise ValueError(f"ionization potential must be positive, got {self.target_atom_ip}")


@dataclass(frozen=True)
class FieldConstants:
    """Derived single-color field constants in atomic units.

    ``up`` is constructed as e0^2 / (4 omega^2) and ``p_2up = 2 sqrt(up)``
    exactly, so recomputing them from the stored ``e0``/``omega``
    reproduces the stored values bit for bit.
    """

    e0: float
    omega: float
    up: float = field(init=False)
    p_2up: float = field(init=False)
    quiver_amplitude: float = field(init=False)

    def __post_init__(self) -> None:
        if self.e0 < 0:
            raise ValueError(f"field amplitude must be nonnegative, got {self.e0}")
        if self.omega <= 0:
            raise ValueError(f"angular frequency must be positive, got {self.omega}")
        object.__setattr__(self, "up", self.e0**2 / (4.0 * self.omega**2))
        object.__setattr__(self, "p_2up", 2.0 * math.sqrt(self.up))
        object.__setattr__(self, "quiver_amplitude", self.e0 / self.omega**2)


@dataclass(frozen=True)
class FieldRealization:
    """One sampled classical field: amplitude, frequency, CEP, and a
    closed time window spanning exactly one optical period."""

    e0: float
    omega: float
    cep: float
    window: tuple[float, float]

    def __post_init__(self) -> None:
        if self.e0 < 0:
            raise ValueError(f"field amplitude must be nonnegative, got {self.e0}")
        if self.omega <= 0:
            raise ValueError(f"angular frequency must be positive, got {self.omega}")
        period = 2.0 * math.pi / self.omega
        length = self.window[1] - self.window[0]
        if abs(length - period) > 1e-12 * period:
            raise ValueError(
                f"window length {length} must equal one period {period} "
                "to within 1e-12 relative"
            )

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def a0(self) -> float:
        """Vector-potential amplitude e0/omega (equals p_2up of the
        matching FieldConstants)."""
        return self.e0 / self.omega

    def constants(self) -> FieldConstants:
        return FieldConstants(e0=self.e0, omega=self.omega)


def to_atomic_units(params: LaserParams) -> FieldConstants:
    """Convert lab-frame laser parameters to atomic-unit field constants."""
    e0 = math.sqrt(params.peak_intensity_w_cm2 / INTENSITY_AU_W_CM2)
    omega = OMEGA_LAMBDA_AU_NM / params.wavelength_nm
    return FieldConstants(e0=e0, omega=omega)


def reference_realization(params: LaserParams) -> FieldRealization:
    """Single-cycle realization at the mean (unsampled) field.

    The window is centred on the field peak: |E| is maximal where
    cos(omega t + cep) = +-1, and we centre on t_peak = -cep/omega so the
    cep = 0 case has its peak at t = 0.
    """
    const = to_atomic_units(params)
    t_peak = -params.cep / const.omega
    half = math.pi / const.omega
    return FieldRealization(
        e0=const.e0,
        omega=const.omega,
        cep=params.cep,
        window=(t_peak - half, t_peak + half),
    )


def vector_potential(t, f: FieldRealization):
    """A(t) inside the window, zero outside.  Accepts scalars or arrays."""
    t = np.asarray(t)
    inside = (t >= f.window[0]) & (t <= f.window[1])
    a = (f.e0 / f.omega) * np.sin(f.omega * t + f.cep)
    return np.where(inside, a, 0.0)


def electric_field(t, f: FieldRealization):
    """E(t) = -dA/dt inside the window, zero outside."""
    t = np.asarray(t)
    inside = (t >= f.window[0]) & (t <= f.window[1])
    e = -f.e0 * np.cos(f.omega * t + f.cep)
    return np.where(inside, e, 0.0)


def field_and_potential(t, f: FieldRealization):
    """Return (E(t), A(t)) with window gating applied to both."""
    return electric_field(t, f), vector_potential(t, f)


def vector_potential_analytic(t, f: FieldRealization):
    """A(t) without window gating, valid for complex times.

    The saddle-point machinery evaluates the carrier on the analytic
    continuation of the in-window formula; gating is a real-axis concept.
    """
    return (f.e0 / f.omega) * np.sin(f.omega * t + f.cep)


def electric_field_analytic(t, f: FieldRealization):
    """E(t) = -dA/dt without window gating, valid for complex times."""
    return -f.e0 * np.cos(f.omega * t + f.cep)
