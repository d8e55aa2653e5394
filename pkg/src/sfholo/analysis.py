"""Lineouts, fringe visibility, dephasing scaling fits, and Classical
Fisher Information.

Visibility extractor (pinned definition): the log-spectrum is detrended by
a centered moving-average baseline of width ``window_width`` (a linear
envelope is removed exactly; fringes survive as the oscillatory residual);
adjacent local extrema of the detrended spectrum give Michelson contrasts
(P_max - P_min)/(P_max + P_min) attributed to the pair midpoint, with
three-point parabolic refinement of the extrema and a separation cap that
rejects non-fringe extrema pairs; the estimates are then resampled onto a
uniform momentum grid.  A locally constant baseline cancels exactly in the
Michelson ratio, so the extractor reads multiplicative fringe contrast
down to the quadrature-ripple floor even on steeply decaying spectra.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np

from .engine import MomentumDistribution
from .ensemble import EnsembleConfig, ensemble_pmd
from .engine import EngineOptions
from .field import FieldConstants, LaserParams
from .gaussian import SqueezedState
from .saddles import MomentumGrid

logger = logging.getLogger(__name__)

DEFAULT_VISIBILITY_WINDOW = 0.4
DEFAULT_CFI_FLOOR = 1e-12
DEFAULT_CFI_DELTA = 0.05
#: Extrema pairs farther apart than this fraction of the window are
#: envelope structure, not fringes.
PAIR_SEPARATION_FRACTION = 0.45


@dataclass
class VisibilityCurve:
    pz: np.ndarray
    v: np.ndarray
    window_width: float

    def at(self, pz: float) -> float:
        if self.pz.size == 0:
            raise ValueError("empty visibility curve")
        return float(np.interp(pz, self.pz, self.v))


@dataclass
class ScalingFit:
    model: str
    params: tuple
    goodness: float


@dataclass
class FisherMap:
    grid: MomentumGrid
    density: np.ndarray      # per-bin CFI contribution
    integrated: float
    p_ref: np.ndarray        # normalized reference probability per bin
    parameter: str
    delta: float
    excluded_bins: int


def lineout(pmd: MomentumDistribution, pperp: float) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum along p_z at fixed p_perp, linearly interpolated between rows."""
    pp = pmd.grid.pperp
    if not pp[0] <= pperp <= pp[-1]:
        raise ValueError(f"pperp {pperp} outside grid range [{pp[0]}, {pp[-1]}]")
    j = int(np.searchsorted(pp, pperp, side="right") - 1)
    j = min(j, pp.size - 2)
    frac = (pperp - pp[j]) / (pp[j + 1] - pp[j])
    values = (1.0 - frac) * pmd.values[:, j] + frac * pmd.values[:, j + 1]
    return pmd.grid.pz.copy(), values


def _refined_extrema(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior local extrema with three-point parabolic refinement."""
    dy_l = y[1:-1] - y[:-2]
    dy_r = y[1:-1] - y[2:]
    is_ext = (dy_l * dy_r > 0) & (np.abs(dy_l) + np.abs(dy_r) > 0)
    idx = np.nonzero(is_ext)[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = y[idx - 1], y[idx], y[idx + 1]
    denom = ym - 2.0 * y0 + yp
    shift = np.where(np.abs(denom) > 0, 0.5 * (ym - yp) / np.where(denom == 0, 1, denom), 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    xe = x[idx] + shift * (x[idx + 1] - x[idx])  # assumes uniform spacing locally
    ye = y0 - 0.25 * (ym - yp) * shift
    return xe, ye


def _detrend_log(pz: np.ndarray, y: np.ndarray, window_width: float) -> np.ndarray:
    """exp(log-spectrum minus a centered moving-average baseline)."""
    positive = y > 0
    floor = y[positive].min() * 1e-3 if positive.any() else 1.0
    logy = np.log(np.maximum(y, floor))
    step = float(np.median(np.diff(pz)))
    half = max(int(round(0.5 * window_width / step)), 1)
    kernel = np.ones(2 * half + 1)
    norm = np.convolve(np.ones_like(logy), kernel, mode="same")
    baseline = np.convolve(logy, kernel, mode="same") / norm
    return np.exp(logy - baseline)


def fringe_visibility(
    pz: np.ndarray,
    spectrum: np.ndarray,
    window_width: float = DEFAULT_VISIBILITY_WINDOW,
    median_filter: bool = False,
) -> VisibilityCurve:
    """Fringe visibility along a 1-D spectrum (see module docstring)."""
    pz = np.asarray(pz, dtype=float)
    y = np.asarray(spectrum, dtype=float)
    if y.max() > 0:
        y = y / y.max()  # contrast is scale free
    if median_filter and y.size >= 3:
        stacked = np.column_stack([y[:-2], y[1:-1], y[2:]])
        y = y.copy()
        y[1:-1] = np.median(stacked, axis=1)
    detrended = _detrend_log(pz, y, window_width)
    xe, _ = _refined_extrema(pz, detrended)
    if xe.size >= 6:
        # snap the baseline window to an integer number of fringe periods so
        # spectral leakage of the moving average does not bias the contrast
        period = 2.0 * float(np.median(np.diff(xe)))
        if 0.02 * window_width <= period <= window_width:
            cycles = max(int(round(window_width / period)), 1)
            detrended = _detrend_log(pz, y, cycles * period)
    xe, ye = _refined_extrema(pz, detrended)
    if xe.size < 2:
        logger.info("fringe_visibility: fewer than one extrema pair, empty curve")
        return VisibilityCurve(np.empty(0), np.empty(0), window_width)
    hi = np.maximum(ye[:-1], ye[1:])
    lo = np.minimum(ye[:-1], ye[1:])
    sep = np.diff(xe)
    mid_all = 0.5 * (xe[:-1] + xe[1:])
    denom = hi + lo
    # keep genuine interior fringe pairs: close enough to be a fringe, large
    # enough to rise above arithmetic noise, away from the baseline's edge
    good = (
        (denom > 0)
        & (lo >= 0)
        & (sep <= PAIR_SEPARATION_FRACTION * window_width)
        & (np.maximum(np.abs(np.log(np.maximum(hi, 1e-300))), np.abs(np.log(np.maximum(lo, 1e-300)))) > 1e-9)
        & (mid_all >= pz[0] + 0.75 * window_width)
        & (mid_all <= pz[-1] - 0.75 * window_width)
    )
    mids = mid_all[good]
    vis = ((hi - lo) / np.where(denom > 0, denom, 1.0))[good]
    if mids.size == 0:
        logger.info("fringe_visibility: no usable extrema pairs, empty curve")
        return VisibilityCurve(np.empty(0), np.empty(0), window_width)
    out_pz = np.arange(mids[0], mids[-1] + 1e-12, window_width / 8.0)
    if out_pz.size < 2:
        out_pz = np.array([mids[0], mids[-1]])
    half = window_width / 2.0
    sums = np.zeros(out_pz.size)
    counts = np.zeros(out_pz.size)
    for m, v in zip(mids, vis):
        sel = np.abs(out_pz - m) <= half
        sums[sel] += v
        counts[sel] += 1
    fallback = np.interp(out_pz, mids, vis)
    v_out = np.where(counts > 0, sums / np.maximum(counts, 1), fallback)
    return VisibilityCurve(out_pz, np.clip(v_out, 0.0, 1.0), window_width)


def analytic_visibility(kappa: float, sigma_up: float) -> float:
    """Gaussian dephasing law: |<exp(i kappa dU)>| for dU ~ N(0, sigma_up^2)."""
    if sigma_up < 0:
        raise ValueError(f"sigma_up must be nonnegative, got {sigma_up}")
    return math.exp(-0.5 * kappa**2 * sigma_up**2)


def _log_linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares y = a x + b; returns (a, b, R^2 clipped to [0, 1])."""
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-30:
        r2 = 1.0 if ss_res <= 1e-30 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), min(max(r2, 0.0), 1.0)


def _clean_points(points) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float)
    keep = pts[:, 1] > 0
    if not keep.all():
        logger.info("excluding %d nonpositive-visibility points from fit", (~keep).sum())
    return pts[keep, 0], np.log(pts[keep, 1])


def fit_squeeze_decay(points) -> ScalingFit:
    """Fit ln V = -eta exp(2r) + c to (r, V) points."""
    r, logv = _clean_points(points)
    if r.size < 4:
        raise ValueError(f"need at least 4 positive-visibility points, got {r.size}")
    slope, c, r2 = _log_linear_fit(np.exp(2.0 * r), logv)
    return ScalingFit(model="squeeze_decay", params=(-slope, c), goodness=r2)


def fit_single_exponential(points) -> ScalingFit:
    """Competing model ln V = -eta' r + c."""
    r, logv = _clean_points(points)
    if r.size < 4:
        raise ValueError(f"need at least 4 positive-visibility points, got {r.size}")
    slope, c, r2 = _log_linear_fit(r, logv)
    return ScalingFit(model="single_exponential", params=(-slope, c), goodness=r2)


def fit_quartic_wavelength(points) -> ScalingFit:
    """Fit ln V = -beta lambda^4 + c to (lambda, V) points."""
    lam, logv = _clean_points(points)
    if lam.size < 4:
        raise ValueError(f"need at least 4 positive-visibility points, got {lam.size}")
    slope, c, r2 = _log_linear_fit(lam**4, logv)
    return ScalingFit(model="quartic_wavelength", params=(-slope, c), goodness=r2)


def fit_wavelength_power(points, power: float) -> ScalingFit:
    """Competing model ln V = -beta lambda^power + c."""
    lam, logv = _clean_points(points)
    if lam.size < 4:
        raise ValueError(f"need at least 4 positive-visibility points, got {lam.size}")
    slope, c, r2 = _log_linear_fit(lam**power, logv)
    return ScalingFit(model=f"lambda^{power:g}", params=(-slope, c), goodness=r2)


def rebin(pmd: MomentumDistribution, factor_z: int, factor_p: int) -> MomentumDistribution:
    """Box-average the distribution into coarser bins (detector resolution).

    The Fisher pipeline uses this so every bin integrates over at least one
    holographic fringe: point-sampling a deep fringe pattern puts near-zero
    probabilities in the minima, whose diverging relative sensitivity
    follows a different (slower) squeezing scaling than the envelope and
    tail channels.
    """
    if factor_z < 1 or factor_p < 1:
        raise ValueError("rebin factors must be >= 1")
    g = pmd.grid
    nz = (g.pz_steps // factor_z) * factor_z
    npp = (g.pperp_steps // factor_p) * factor_p
    if nz == 0 or npp == 0 or nz // factor_z < 2 or npp // factor_p < 2:
        raise ValueError("rebin factors too large for the grid")
    values = (
        pmd.values[:nz, :npp]
        .reshape(nz // factor_z, factor_z, npp // factor_p, factor_p)
        .mean(axis=(1, 3))
    )
    coarse = MomentumGrid(
        pz_min=g.pz_min, pz_max=g.pz_max, pz_steps=nz // factor_z,
        pperp_min=g.pperp_min, pperp_max=g.pperp_max, pperp_steps=npp // factor_p,
    )
    return MomentumDistribution(grid=coarse, values=values, metadata=dict(pmd.metadata))


def cfi_map(
    pmd_minus: MomentumDistribution,
    pmd_plus: MomentumDistribution,
    delta: float,
    floor: float = DEFAULT_CFI_FLOOR,
    parameter: str = "r",
) -> FisherMap:
    """Classical Fisher Information density from a central difference.

    Both PMDs are normalized to bin probabilities; bins whose mean
    probability falls below ``floor`` (relative to unit total) are excluded
    and counted.
    """
    if pmd_minus.grid != pmd_plus.grid:
        raise ValueError("PMDs must share one grid")
    if delta <= 0:
        raise ValueError(f"parameter step must be positive, got {delta}")
    p_minus = pmd_minus.values / pmd_minus.values.sum()
    p_plus = pmd_plus.values / pmd_plus.values.sum()
    p_bar = 0.5 * (p_minus + p_plus)
    keep = p_bar >= floor
    deriv = (p_plus - p_minus) / (2.0 * delta)
    density = np.where(keep, deriv**2 / np.where(keep, p_bar, 1.0), 0.0)
    return FisherMap(
        grid=pmd_minus.grid,
        density=density,
        integrated=float(density.sum()),
        p_ref=p_bar,
        parameter=parameter,
        delta=delta,
        excluded_bins=int((~keep).sum()),
    )


def darkport_fraction(
    fisher: FisherMap, constants: FieldConstants
) -> tuple[float, float]:
    """Share of CFI and of probability beyond the classical 2U_p cutoff."""
    pz_mesh, _ = fisher.grid.mesh()
    mask = np.abs(pz_mesh) > constants.p_2up
    total = fisher.integrated
    fisher_fraction = float(fisher.density[mask].sum() / total) if total > 0 else 0.0
    yield_fraction = float(fisher.p_ref[mask].sum() / fisher.p_ref.sum())
    return fisher_fraction, yield_fraction


def squeezed_family_state(alpha: complex, r: float, theta: float) -> SqueezedState:
    """State on a squeezing family, continued through r = 0.

    Negative r means squeezing along the conjugate axis, which is the same
    Gaussian as (|r|, theta + pi); this keeps central differences in r
    meaningful at the coherent point.
    """
    if r >= 0:
        return SqueezedState(alpha=alpha, r=r, theta=theta)
    return SqueezedState(alpha=alpha, r=-r, theta=theta + math.pi)


def cfi_at(
    r: float,
    alpha: complex,
    theta: float,
    laser: LaserParams,
    grid: MomentumGrid,
    cfg: EnsembleConfig,
    delta: float = DEFAULT_CFI_DELTA,
    floor: float = DEFAULT_CFI_FLOOR,
    options: EngineOptions = EngineOptions(),
    workers: int = 1,
    rebin_factors: tuple[int, int] | None = None,
) -> FisherMap:
    """CFI of the ensemble PMD with respect to the squeezing magnitude."""
    pmd_minus, _ = ensemble_pmd(
        squeezed_family_state(alpha, r - delta, theta), laser, grid, cfg, options, workers
    )
    pmd_plus, _ = ensemble_pmd(
        squeezed_family_state(alpha, r + delta, theta), laser, grid, cfg, options, workers
    )
    if rebin_factors is not None:
        pmd_minus = rebin(pmd_minus, *rebin_factors)
        pmd_plus = rebin(pmd_plus, *rebin_factors)
    return cfi_map(pmd_minus, pmd_plus, delta, floor)


def log_slope(x: np.ndarray, f: np.ndarray, x_min: float | None = None) -> float:
    """Least-squares slope of ln f against x, optionally restricted to
    x >= x_min."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    sel = np.ones(x.size, dtype=bool) if x_min is None else (x >= x_min)
    if sel.sum() < 2:
        raise ValueError("need at least two points for a slope")
    slope, _, _ = _log_linear_fit(x[sel], np.log(f[sel]))
    return slope


def cfi_scaling_scan(
    r_values,
    alpha: complex,
    theta: float,
    laser: LaserParams,
    grid: MomentumGrid,
    cfg: EnsembleConfig,
    delta: float = DEFAULT_CFI_DELTA,
    slope_r_min: float = 0.75,
    options: EngineOptions = EngineOptions(),
    workers: int = 1,
    rebin_factors: tuple[int, int] | None = None,
) -> tuple[list[tuple[float, float, float]], float]:
    """Integrated CFI across a squeezing family plus the ln F slope.

    Returns ([(r, F, ln F)...], slope of ln F vs r over r >= slope_r_min).
    """
    r_values = sorted(float(r) for r in r_values)
    rows = []
    for r in r_values:
        fisher = cfi_at(
            r, alpha, theta, laser, grid, cfg, delta,
            options=options, workers=workers, rebin_factors=rebin_factors,
        )
        rows.append((r, fisher.integrated, math.log(fisher.integrated)))
    rs = np.array([row[0] for row in rows])
    fs = np.array([row[1] for row in rows])
    slope = log_slope(rs, fs, x_min=slope_r_min)
    return rows, slope
