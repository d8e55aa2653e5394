"""Single-shot SFA transition amplitudes via complex saddle points.

The semiclassical phase is the closed-form action

    S(p, t) = int_{window start}^{t} [ (p_z + A(tau))^2 / 2
                                       + p_perp^2 / 2 + I_p ] dtau

evaluated on the analytic continuation of the monochromatic carrier.

Per-saddle contributions use the modified stationary-phase result for a
hydrogen 1s initial state: the length-gauge dipole d(v) ~ v/(v^2 + 2 I_p)^3
has a third-order pole exactly at the saddle (v^2 + 2 I_p = 2 dS/dt = 0),
so the naive prefactor sqrt(2 pi i / S'') d(v) is singular.  Integrating by
parts reduces the integrand to a simple pole whose half-residue gives the
finite, equivalent per-saddle amplitude

    a_s = c_ion * exp(i S(t_s)) / S''(t_s),      c_ion = (2 I_p)^{5/4} / sqrt(2).

Rescattered orbits carry the same ionization factor at (t0, k), a
free-spreading factor (2 pi / (i (tr - t0)))^{3/2} from the transverse and
longitudinal intermediate-momentum integrals, a contact (momentum
independent) rescattering amplitude, and the stationary-phase factor
sqrt(2 pi i / S''_r) of the rescattering-time integral.  The square root
branch is chosen continuously along each p_z row, and its magnitude is
capped at the half-period coherence bound pi/omega, which regularizes both
trajectory-coalescence cutoffs and the strictly-forward axis caustic where
S''_r -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .field import FieldRealization
from .saddles import (
    MomentumGrid,
    RescatteredSaddles,
    direct_saddle_times,
    rescattering_saddles_grid,
)

#: Relative strength of the contact rescattering vertex.  The hologram
#: contrast, not the absolute yield, is the observable of interest; this
#: value puts the mid-plateau signal/reference amplitude ratio near 1/2
#: at the default hydrogen / 1.5 um / 1e14 W/cm^2 configuration.
CONTACT_STRENGTH = 110.0


@dataclass(frozen=True)
class EngineOptions:
    """Switches for the amplitude assembly.

    Backscattered saddles are always computed; by default only forward
    (same-hemisphere) rescattering contributes to the hologram.  Including
    backscattering mixes trajectory families born in opposite half-cycles,
    which in a time-gated single cycle carries a genuine hemispheric
    asymmetry.
    """

    include_rescattered: bool = True
    include_backscattered: bool = False
    w_resc: float = 1.0
    contact_strength: float = CONTACT_STRENGTH


@dataclass
class MomentumDistribution:
    """Nonnegative yield on a momentum grid plus provenance metadata."""

    grid: MomentumGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("momentum distribution values must be finite and nonnegative")
        self.values = values


def _aint(t, f: FieldRealization):
    return -(f.e0 / f.omega**2) * np.cos(f.omega * t + f.cep)


def _aint2_half(t, f: FieldRealization):
    """Antiderivative of A(t)^2 / 2."""
    a0 = f.e0 / f.omega
    return (a0**2 / 4.0) * (t - np.sin(2.0 * (f.omega * t + f.cep)) / (2.0 * f.omega))


def action_z(pz, pperp, t, f: FieldRealization, ip: float):
    """Closed-form action for (possibly complex) longitudinal momentum."""
    wa = f.window[0]
    const = (pz**2 + np.asarray(pperp) ** 2) / 2.0 + ip
    return (
        const * (t - wa)
        + pz * (_aint(t, f) - _aint(wa, f))
        + (_aint2_half(t, f) - _aint2_half(wa, f))
    )


def action(p: tuple[float, float], t, f: FieldRealization, ip: float):
    """Action S(p, t) with S(window start) = 0."""
    return action_z(p[0], p[1], t, f, ip)


def action_second_derivative(pz, t, f: FieldRealization):
    """d^2S/dt^2 = (p_z + A(t)) * A'(t)."""
    a0 = f.e0 / f.omega
    theta = f.omega * t + f.cep
    return (pz + a0 * np.sin(theta)) * f.e0 * np.cos(theta)


def _continuous_sign_rows(unit: np.ndarray, valid: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Square-root sign chosen continuously along each p_z row.

    ``unit`` holds unit-magnitude square-root phases, (n_nodes, width) with
    nodes p_z-major.  Walking up in p_z per p_perp column and slot, the sign
    flips whenever the phase lands closer to the previous valid value's
    antipode.  Returns a +-1 array.
    """
    n_pz, n_pp = shape
    width = unit.shape[1]
    u3 = unit.reshape(n_pz, n_pp, width).copy()
    v3 = valid.reshape(n_pz, n_pp, width)
    sign = np.ones((n_pz, n_pp, width))
    prev = np.ones((n_pp, width), dtype=complex)
    has_prev = np.zeros((n_pp, width), dtype=bool)
    for i in range(n_pz):
        cur = u3[i]
        ok = v3[i] & np.isfinite(cur)
        flip = has_prev & ok & ((cur * np.conj(prev)).real < 0)
        sign[i] = np.where(flip, -1.0, 1.0)
        cur = np.where(flip, -cur, cur)
        prev = np.where(ok, cur, prev)
        has_prev |= ok
    return sign.reshape(n_pz * n_pp, width)


def transition_amplitude_grid(
    grid: MomentumGrid,
    f: FieldRealization,
    ip: float,
    options: EngineOptions = EngineOptions(),
) -> tuple[np.ndarray, dict]:
    """Complex amplitude M(p) on every grid node.

    Returns (M, diagnostics); M has the grid shape.  Non-finite nodes are
    zeroed and counted in the diagnostics.
    """
    if ip <= 0:
        raise ValueError(f"ionization potential must be positive, got {ip}")
    pz_mesh, pp_mesh = grid.mesh()
    pz = pz_mesh.ravel()
    pp = pp_mesh.ravel()
    n_nodes = pz.size
    diag = {"flagged_nodes": 0, "clamped_nodes": 0, "dropped_seeds": 0}
    m = np.zeros(n_nodes, dtype=complex)
    c_ion = (2.0 * ip) ** 1.25 / math.sqrt(2.0)

    bad = np.zeros(n_nodes, dtype=bool)
    if f.e0 > 0.0:
        ts = direct_saddle_times(pz, pp, f, ip)  # (n_nodes, 2)
        with np.errstate(over="ignore", invalid="ignore"):
            s_dir = action_z(pz[:, None], pp[:, None], ts, f, ip)
            sdd = action_second_derivative(pz[:, None], ts, f)
            contrib = c_ion * np.exp(1j * s_dir) / sdd
        finite = np.isfinite(contrib)
        bad |= ~finite.all(axis=1)
        m += np.where(finite, contrib, 0.0).sum(axis=1)

    if f.e0 > 0.0 and options.include_rescattered:
        sad = rescattering_saddles_grid(pz, pp, f, ip)
        diag["dropped_seeds"] = sad.dropped_seeds
        if sad.width:
            m_resc, clamped, bad_resc = _rescattered_amplitude(
                pz, pp, sad, f, ip, grid.shape, options
            )
            diag["clamped_nodes"] = clamped
            bad |= bad_resc
            m += m_resc

    bad |= ~np.isfinite(m)
    if bad.any():
        diag["flagged_nodes"] = int(bad.sum())
        m[bad] = 0.0
    return m.reshape(grid.shape), diag


def _rescattered_terms(
    pz: np.ndarray,
    pp: np.ndarray,
    sad: RescatteredSaddles,
    f: FieldRealization,
    ip: float,
    shape: tuple[int, int],
    options: EngineOptions,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-saddle prefactor and phase of the rescattered amplitude.

    Returns (prefactor, s_comb, use, capped): each (n_nodes, width).  The
    contribution of a retained saddle is prefactor * exp(i s_comb).
    """
    c_ion = (2.0 * ip) ** 1.25 / math.sqrt(2.0)
    use = sad.valid if options.include_backscattered else (sad.valid & sad.forward)
    t0, tr, k = sad.t0, sad.tr, sad.k
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        s_comb = (
            action_z(pz[:, None], pp[:, None], tr, f, ip)
            - action_z(k, 0.0, tr, f, ip)
            + action_z(k, 0.0, t0, f, ip)
        )
        # root-finding also lands on sheets the steepest-descent contour
        # never visits; those contributions grow instead of decaying
        use = use & (s_comb.imag > 0)
        a0 = f.e0 / f.omega
        adot_t0 = f.e0 * np.cos(f.omega * t0 + f.cep)
        adot_tr = f.e0 * np.cos(f.omega * tr + f.cep)
        a_tr = a0 * np.sin(f.omega * tr + f.cep)
        sdd_ion = (k + a0 * np.sin(f.omega * t0 + f.cep)) * adot_t0
        spread = (2.0 * math.pi / (1j * (tr - t0))) ** 1.5
        # rescattering-time Hessian S''_r = (p_z - k) A'(tr).  On exact
        # solutions (p_z - k) = -p_perp^2 / (v_out + v_in); that form is the
        # conditioned one for forward saddles (where p_z - k is cancellation
        # noise, identically zero on the axis), while the plain difference
        # is conditioned for backscattering (where v_out + v_in nearly
        # cancels instead).
        q_diff = pz[:, None] - k
        v_sum = pz[:, None] + k + 2.0 * a_tr
        identity_form = np.abs(v_sum) > np.abs(q_diff)
        pp_col = pp[:, None]
        z_diff = 2.0j * math.pi / (q_diff * adot_tr)
        z_red = -2.0j * math.pi * v_sum / adot_tr  # = z_diff * p_perp^2
        sqrt_z = np.where(identity_form, np.sqrt(z_red), np.sqrt(z_diff))
        unit = sqrt_z / np.abs(sqrt_z)
        sign = _continuous_sign_rows(unit, use, shape)
        mag = np.abs(sqrt_z)
        mag = np.where(
            identity_form,
            np.divide(mag, pp_col, out=np.full_like(mag, np.inf), where=pp_col > 0),
            mag,
        )
        # coherence cap: a flat rescattering phase cannot gather more than
        # about half a period, so |sqrt factor| <= pi/omega; this also
        # regularizes coalescence cutoffs and the forward axis caustic
        cap = math.pi / f.omega
        over = use & (mag > cap)
        sqrt_resc = sign * np.minimum(mag, cap) * unit
        g0 = options.contact_strength / (2.0 * math.pi) ** 3
        prefactor = options.w_resc * g0 * c_ion * spread * sqrt_resc / sdd_ion
    return prefactor, s_comb, use, over


def _rescattered_amplitude(
    pz: np.ndarray,
    pp: np.ndarray,
    sad: RescatteredSaddles,
    f: FieldRealization,
    ip: float,
    shape: tuple[int, int],
    options: EngineOptions,
) -> tuple[np.ndarray, int, np.ndarray]:
    prefactor, s_comb, use, over = _rescattered_terms(pz, pp, sad, f, ip, shape, options)
    with np.errstate(over="ignore", invalid="ignore"):
        contrib = prefactor * np.exp(1j * s_comb)
    finite = np.isfinite(contrib)
    bad = (use & ~finite).any(axis=1)
    contrib = np.where(use & finite, contrib, 0.0)
    clamped = int(np.count_nonzero(over.any(axis=1)))
    return contrib.sum(axis=1), clamped, bad


def transition_amplitude(
    p: tuple[float, float],
    f: FieldRealization,
    ip: float,
    options: EngineOptions = EngineOptions(),
) -> complex:
    """Amplitude at a single momentum pair (2x2 helper grid, corner node)."""
    eps_z = 1e-4
    eps_p = 1e-4
    grid = MomentumGrid(
        pz_min=p[0], pz_max=p[0] + eps_z, pz_steps=2,
        pperp_min=p[1], pperp_max=p[1] + eps_p, pperp_steps=2,
    )
    m, _ = transition_amplitude_grid(grid, f, ip, options)
    return complex(m[0, 0])


def single_shot_pmd(
    grid: MomentumGrid,
    f: FieldRealization,
    ip: float,
    options: EngineOptions = EngineOptions(),
) -> MomentumDistribution:
    """|M(p)|^2 at every node of the grid for one field realization."""
    m, diag = transition_amplitude_grid(grid, f, ip, options)
    values = np.abs(m) ** 2
    return MomentumDistribution(grid=grid, values=values, metadata=diag)
