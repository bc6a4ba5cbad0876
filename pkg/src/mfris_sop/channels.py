"""Statistics and samplers for the cascaded RIS channels.

Every hop carries unit-power Rician fading; path loss and amplification
are applied separately as deterministic gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .numerics import bessel_i, kummer_1f1, regularized_lower_gamma


@dataclass(frozen=True)
class RicianSpec:
    """Rician K-factor of one hop. ``kappa == 0`` is Rayleigh fading."""

    kappa: float

    def __post_init__(self) -> None:
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise ValueError(f"Rician factor must be finite and >= 0, got {self.kappa}")


KappaLike = Union[RicianSpec, float, int]


def _kappa(k: KappaLike) -> float:
    return k.kappa if isinstance(k, RicianSpec) else RicianSpec(float(k)).kappa


@dataclass(frozen=True)
class GammaFit:
    """Gamma(shape=k, scale=l) model of the coherent cascade sum."""

    k: float
    l: float

    def __post_init__(self) -> None:
        if not (self.k > 0 and self.l > 0 and math.isfinite(self.k) and math.isfinite(self.l)):
            raise ValueError(f"GammaFit needs finite positive k, l; got k={self.k}, l={self.l}")


@dataclass(frozen=True)
class EveCascadeSpec:
    """Exponential model of the eavesdropper cascade power |H_be|^2.

    ``upsilon`` is the exponential rate; the mean power is ``M * xi_be**2``.
    """

    xi_be: float
    upsilon: float

    @classmethod
    def from_geometry(cls, M: int, xi_be: float) -> "EveCascadeSpec":
        if M < 1 or xi_be <= 0:
            raise ValueError("EveCascadeSpec needs M >= 1 and xi_be > 0")
        return cls(xi_be, 1.0 / (M * xi_be * xi_be))


def rician_mean_magnitude(k: KappaLike) -> float:
    """E|h| for a unit-power Rician hop."""
    kappa = _kappa(k)
    return 0.5 * math.sqrt(math.pi) * kummer_1f1(-0.5, 1.0, -kappa) / math.sqrt(kappa + 1.0)


def cascade_mean(kb: KappaLike, kp: KappaLike) -> float:
    """E|h_phi h_b| for one element (hypergeometric form)."""
    kb_, kp_ = _kappa(kb), _kappa(kp)
    return (
        0.25 * math.pi
        * kummer_1f1(-0.5, 1.0, -kb_) * kummer_1f1(-0.5, 1.0, -kp_)
        / math.sqrt((kb_ + 1.0) * (kp_ + 1.0))
    )


def cascade_var(kb: KappaLike, kp: KappaLike) -> float:
    """Var|h_phi h_b| for one element; equals 1 - mean^2 since E|h h|^2 = 1."""
    return 1.0 - cascade_mean(kb, kp) ** 2


def _bessel_factor(kappa: float) -> float:
    return (kappa + 1.0) * bessel_i(0, 0.5 * kappa) + kappa * bessel_i(1, 0.5 * kappa)


def cascade_mean_bessel(kb: KappaLike, kp: KappaLike) -> float:
    """Same quantity as :func:`cascade_mean`, written with I0/I1."""
    kb_, kp_ = _kappa(kb), _kappa(kp)
    # exp(-k/2) I_v(k/2) is formed as a product of two moderate numbers for k up to ~1400
    return (
        0.25 * math.pi
        * math.exp(-0.5 * kb_) * _bessel_factor(kb_)
        * math.exp(-0.5 * kp_) * _bessel_factor(kp_)
        / math.sqrt((kb_ + 1.0) * (kp_ + 1.0))
    )


def cascade_var_bessel(kb: KappaLike, kp: KappaLike) -> float:
    return 1.0 - cascade_mean_bessel(kb, kp) ** 2


def fit_gamma(M: int, kb: KappaLike, kp: KappaLike) -> GammaFit:
    """Moment-matched Gamma model of sum_m |h_phi,m h_b,m| over M elements."""
    if M < 1:
        raise ValueError(f"element count must be >= 1, got {M}")
    mean = cascade_mean(kb, kp)
    var = cascade_var(kb, kp)
    return GammaFit(k=M * mean * mean / var, l=var / mean)


def legit_cdf(x, fit: GammaFit):
    """CDF of the squared coherent cascade sum, gamma(k, sqrt(x)/l) / Gamma(k)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("legit_cdf requires x >= 0")
    out = regularized_lower_gamma(fit.k, np.sqrt(x) / fit.l)
    return float(out) if out.ndim == 0 else out


def legit_pdf(x, fit: GammaFit):
    """Density of the squared coherent cascade sum."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("legit_pdf is defined for x > 0 only")
    root = np.sqrt(x)
    log_f = (
        (0.5 * fit.k - 1.0) * np.log(x) - root / fit.l
        - math.log(2.0) - fit.k * math.log(fit.l) - math.lgamma(fit.k)
    )
    out = np.exp(log_f)
    return float(out) if out.ndim == 0 else out


def eve_cdf(x, spec: EveCascadeSpec):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("eve_cdf requires x >= 0")
    out = -np.expm1(-spec.upsilon * x)
    return float(out) if out.ndim == 0 else out


def thermal_gain(M: int, k: KappaLike) -> float:
    """Mean of |sum_m h_m|^2 over M unit-power Rician hops with a common LoS term."""
    if M < 1:
        raise ValueError(f"element count must be >= 1, got {M}")
    kappa = _kappa(k)
    return M * (M * kappa + 1.0) / (kappa + 1.0)


def omega_br(M: int, kb: KappaLike, kr: KappaLike) -> float:
    """E|sum_m |h_r,m h_b,m||^2 = M D + (M E)^2, Bessel-form moments."""
    if M < 1:
        raise ValueError(f"element count must be >= 1, got {M}")
    mean = cascade_mean_bessel(kb, kr)
    return M * (1.0 - mean * mean) + (M * mean) ** 2


def highsnr_coeff(kb: KappaLike, kp: KappaLike) -> float:
    """16 (1 + kb)(1 + kp) / (3 exp(kb + kp)), the small-argument density constant."""
    kb_, kp_ = _kappa(kb), _kappa(kp)
    return 16.0 * (1.0 + kb_) * (1.0 + kp_) / (3.0 * math.exp(kb_ + kp_))


def sample_rician(k: KappaLike, rng: np.random.Generator, size=None, los_phase=None):
    """Draw unit-power Rician amplitudes.

    ``los_phase`` rotates the line-of-sight term; pass an array broadcastable
    against ``size`` to share one LoS phase across a channel vector.
    """
    kappa = _kappa(k)
    if math.isinf(kappa):
        raise ValueError("kappa must be finite")
    g = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    los = math.sqrt(kappa / (kappa + 1.0))
    if los_phase is not None:
        los = los * np.exp(1j * np.asarray(los_phase))
    out = los + math.sqrt(1.0 / (kappa + 1.0)) * g / math.sqrt(2.0)
    return complex(out) if size is None and np.ndim(out) == 0 else out


def sample_user_distance(R_d: float, rng: np.random.Generator, size=None):
    """Distance of a user uniformly placed on a disc of radius ``R_d``."""
    if not R_d > 0:
        raise ValueError(f"R_d must be positive, got {R_d}")
    return R_d * np.sqrt(rng.random(size))
