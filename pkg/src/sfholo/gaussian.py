"""Squeezed coherent states as Gaussian Wigner distributions.

Conventions (pinned):

* Quadratures X = (a + a^dag)/sqrt(2), P = (a - a^dag)/(i sqrt(2)), so the
  vacuum has variance 1/2 per quadrature and every pure Gaussian state has
  det(cov) = 1/4.
* A state displaced by ``alpha`` has Wigner mean sqrt(2)*(Re alpha, Im alpha).
* Squeezing angle ``theta = 0`` squeezes the quadrature aligned with a real
  displacement (amplitude squeezing, "AS"); ``theta = pi`` squeezes the
  conjugate quadrature (phase squeezing, "PS").  The covariance minor axis is
  rotated by theta/2 from the X1 axis.
* A phase-space point X read back as a complex amplitude is
  alpha = (X1 + i X2)/sqrt(2).

Sampling is counter based (Philox keyed by the seed, fixed two uniform
draws per sample plus Box-Muller), so disjoint index ranges can be produced
concurrently and bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .field import FieldConstants, FieldRealization


@dataclass(frozen=True)
class SqueezedState:
    """Driver description: displacement alpha, squeezing magnitude r and
    angle theta (folded to [0, 2 pi))."""

    alpha: complex
    r: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.r < 0:
            raise ValueError(f"squeezing magnitude must be nonnegative, got {self.r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * math.pi))

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2 + math.sinh(self.r) ** 2


def coherent_state(alpha: complex) -> SqueezedState:
    return SqueezedState(alpha=alpha, r=0.0, theta=0.0)


def amplitude_squeezed_state(alpha: float, r: float) -> SqueezedState:
    """Real displacement, squeezing axis along it (photon-number noise
    suppressed)."""
    return SqueezedState(alpha=alpha, r=r, theta=0.0)


def phase_squeezed_state(alpha: float, r: float) -> SqueezedState:
    """Real displacement, squeezing axis orthogonal to it (photon-number
    noise amplified)."""
    return SqueezedState(alpha=alpha, r=r, theta=math.pi)


@dataclass(frozen=True)
class WignerGaussian:
    """Gaussian phase-space distribution: mean quadrature pair and 2x2
    symmetric positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-14):
            raise ValueError("covariance must be symmetric")
        eigvals = np.linalg.eigvalsh(cov)
        if np.any(eigvals <= 0):
            raise ValueError(f"covariance must be positive definite, eigenvalues {eigvals}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def sqrt_cov(self) -> np.ndarray:
        """Principal symmetric square root of the covariance."""
        vals, vecs = np.linalg.eigh(self.cov)
        return (vecs * np.sqrt(vals)) @ vecs.T


@dataclass(frozen=True)
class PhotonStatistics:
    mean_n: float
    var_n: float

    def __post_init__(self) -> None:
        if self.mean_n < 0 or self.var_n < 0:
            raise ValueError("photon statistics must be nonnegative")


def wigner_of_state(state: SqueezedState) -> WignerGaussian:
    """Wigner mean and covariance of a squeezed coherent state.

    Eigenvalues of the covariance are exp(-2r)/2 (minor axis, rotated by
    theta/2 from X1) and exp(+2r)/2.
    """
    mean = math.sqrt(2.0) * np.array([state.alpha.real, state.alpha.imag])
    half = 0.5 * state.theta
    c, s = math.cos(half), math.sin(half)
    rot = np.array([[c, -s], [s, c]])
    diag = np.diag([0.5 * math.exp(-2.0 * state.r), 0.5 * math.exp(2.0 * state.r)])
    cov = rot @ diag @ rot.T
    cov = 0.5 * (cov + cov.T)
    return WignerGaussian(mean=mean, cov=cov)


def photon_statistics(state: SqueezedState) -> PhotonStatistics:
    """Exact closed-form photon-number mean and variance.

    For real alpha with theta = pi and |alpha|^2 >> 1 the variance
    approaches |alpha|^2 exp(2r) (anti-squeezed shot noise).
    """
    a = state.alpha
    r = state.r
    sh, ch = math.sinh(r), math.cosh(r)
    mean_n = abs(a) ** 2 + sh**2
    var_n = abs(a * ch - a.conjugate() * cmath.exp(1j * state.theta) * sh) ** 2
    var_n += 2.0 * sh**2 * ch**2
    return PhotonStatistics(mean_n=mean_n, var_n=var_n)


def squeezing_to_db(r: float) -> float:
    """Noise-reduction factor exp(2r) expressed in decibels."""
    if r < 0:
        raise ValueError(f"squeezing magnitude must be nonnegative, got {r}")
    return 10.0 * math.log10(math.exp(2.0 * r))


# Sample i owns Philox block i (one 256-bit block = four float64 draws;
# Box-Muller consumes the first two), so any index range can be generated
# independently and identically.
_WORDS_PER_BLOCK = 4


def _standard_normal_pairs(seed: int, start: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=seed)
    if start:
        bitgen.advance(start)  # advance() counts whole blocks
    u = np.random.Generator(bitgen).random(_WORDS_PER_BLOCK * count)
    u = u.reshape(count, _WORDS_PER_BLOCK)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * math.pi * u[:, 1]
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def sample_quadratures(
    w: WignerGaussian, seed: int, count: int, start: int = 0
) -> np.ndarray:
    """Draw ``count`` quadrature pairs from the Gaussian Wigner distribution.

    Deterministic in (seed, index): the pair at absolute index i is the same
    whether generated in one batch or in disjoint chunks via ``start``.
    """
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    z = _standard_normal_pairs(seed, start, count)
    return w.mean[None, :] + z @ w.sqrt_cov().T


def gauss_hermite_nodes(w: WignerGaussian, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Gauss-Hermite nodes/weights for the Gaussian ``w``.

    Returns (nodes, weights) with nodes of shape (order**2, 2); the weights
    sum to 1 within 1e-12.  order = 1 degenerates to the mean with weight 1.
    """
    if not 1 <= order <= 64:
        raise ValueError(f"quadrature order must be in [1, 64], got {order}")
    x, wt = np.polynomial.hermite.hermgauss(order)
    xi = np.sqrt(2.0) * x  # unit-variance abscissas
    g1, g2 = np.meshgrid(xi, xi, indexing="ij")
    z = np.column_stack([g1.ravel(), g2.ravel()])
    nodes = w.mean[None, :] + z @ w.sqrt_cov().T
    weights = np.outer(wt, wt).ravel() / math.pi
    return nodes, weights


def quadrature_to_amplitude(sample: np.ndarray) -> complex | np.ndarray:
    """Read a phase-space point (or array of points) as a complex amplitude."""
    sample = np.asarray(sample, dtype=float)
    if sample.ndim == 1:
        return complex(sample[0], sample[1]) / math.sqrt(2.0)
    return (sample[..., 0] + 1j * sample[..., 1]) / math.sqrt(2.0)


def realize_field(
    sample: np.ndarray,
    reference: SqueezedState,
    constants: FieldConstants,
    phase_coupling: bool = True,
    cep: float = 0.0,
) -> FieldRealization:
    """Map one sampled phase-space point to a classical field realization.

    The peak amplitude scales with the sampled |alpha| relative to the
    reference displacement; with ``phase_coupling`` the CEP additionally
    shifts by the sampled phase.  The single-cycle window is recentred on
    the field peak in either case.
    """
    alpha_bar = reference.alpha
    if alpha_bar == 0:
        raise ValueError("reference displacement must be nonzero")
    alpha_s = quadrature_to_amplitude(np.asarray(sample, dtype=float).reshape(2))
    e0 = constants.e0 * abs(alpha_s) / abs(alpha_bar)
    if phase_coupling and alpha_s != 0:
        cep_s = cep + cmath.phase(alpha_s) - cmath.phase(alpha_bar)
    else:
        cep_s = cep
    t_peak = -cep_s / constants.omega
    half = math.pi / constants.omega
    return FieldRealization(
        e0=e0, omega=constants.omega, cep=cep_s, window=(t_peak - half, t_peak + half)
    )
