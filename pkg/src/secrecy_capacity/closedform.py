"""Closed forms for constant noise power and path-loss exponent 4.

These are the fast paths and the independent oracles for :mod:`analytic`.
Every ``exp(z**2) * erfc(z)`` product goes through :func:`erfcx`; for small
noise ``z`` is in the tens of thousands and the naive product overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analytic import RatePair, StcResult
from .model import FixedDistance
from .numerics import erfcx

__all__ = [
    "Alpha4Params",
    "cop_alpha4",
    "beta_t_alpha4",
    "sop_upper_alpha4",
    "sop_lower_alpha4",
    "beta_e_alpha4",
    "stc_alpha4",
    "positive_stc_margin",
    "positive_stc_condition",
]

_PI_3_2 = math.pi**1.5


@dataclass(frozen=True)
class Alpha4Params:
    tx_density: float
    eve_density: float
    noise_power: float
    power: float = 1.0
    distance: float = 1.0
    theta: float = field(init=False)

    def __post_init__(self):
        if not self.tx_density > 0:
            raise ValueError("tx_density must be positive")
        if not self.eve_density >= 0:
            raise ValueError("eve_density must be >= 0")
        if not self.noise_power >= 0:
            raise ValueError("noise_power must be >= 0")
        if not (self.power > 0 and self.distance > 0):
            raise ValueError("power and distance must be positive")
        # Gamma(1/2) Gamma(3/2) = pi / 2
        object.__setattr__(self, "theta", math.pi**2 * self.tx_density / 2.0)


def _needs_noise(p):
    if p.noise_power <= 0:
        raise ValueError(
            "closed-form SOP needs noise_power > 0; use the analytic path for the SIR limit"
        )


def _log_inv_complement(x):
    # ln(1 / (1 - x))
    return -math.log1p(-x)


def cop_alpha4(p: Alpha4Params, beta_t: float) -> float:
    """``1 - exp(-w (beta_t/rho) L^4 - theta sqrt(beta_t/rho) L^2)``."""
    b = beta_t / p.power
    L2 = p.distance**2
    return -math.expm1(-p.noise_power * b * L2 * L2 - p.theta * math.sqrt(b) * L2)


def beta_t_alpha4(p: Alpha4Params, sigma: float) -> float:
    """Threshold at which :func:`cop_alpha4` equals ``sigma``.

    The quadratic root ``(-theta + sqrt(theta^2 + 4 w l)) / (2 w L^2)`` is
    rewritten as ``2 l / (L^2 (theta + sqrt(theta^2 + 4 w l)))``. The two are
    equal for w > 0 and the second stays exact as w -> 0, where it becomes the
    interference-limited inverse ``(l / (theta L^2))^2 rho``.
    """
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma!r}")
    ell = _log_inv_complement(sigma)
    th = p.theta
    root = 2.0 * ell / (p.distance**2 * (th + math.sqrt(th * th + 4.0 * p.noise_power * ell)))
    return p.power * root * root


def _noise_erfcx_term(p):
    # exp(theta^2 / 4w) Erfc(theta / 2 sqrt(w))
    return erfcx(p.theta / (2.0 * math.sqrt(p.noise_power)))


def sop_upper_alpha4(p: Alpha4Params, beta_e: float) -> float:
    _needs_noise(p)
    if p.eve_density == 0:
        return 0.0
    mass = (
        0.5 * _PI_3_2 * p.eve_density
        * math.sqrt(p.power / (beta_e * p.noise_power))
        * _noise_erfcx_term(p)
    )
    return -math.expm1(-mass)


def sop_lower_alpha4(p: Alpha4Params, beta_e: float) -> float:
    _needs_noise(p)
    if p.eve_density == 0:
        return 0.0
    b = beta_e / p.power
    quartic = p.noise_power * b
    quadratic = p.theta * math.sqrt(b) + math.pi * p.eve_density
    return (
        0.5 * _PI_3_2 * p.eve_density
        * math.sqrt(p.power / (beta_e * p.noise_power))
        * erfcx(quadratic / (2.0 * math.sqrt(quartic)))
    )


def beta_e_alpha4(p: Alpha4Params, epsilon: float) -> float:
    """Threshold at which :func:`sop_upper_alpha4` equals ``epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    _needs_noise(p)
    ratio = _PI_3_2 * p.eve_density * _noise_erfcx_term(p) / (2.0 * _log_inv_complement(epsilon))
    return p.power / p.noise_power * ratio * ratio


def stc_alpha4(p: Alpha4Params, sigma: float, epsilon: float) -> StcResult:
    """Capacity lower bound from the closed-form thresholds.

    The rate cost uses the upper SOP bound, so this is the capacity *lower*
    bound, whatever superscript the literature attaches to it.
    """
    rates = RatePair(beta_t_alpha4(p, sigma), beta_e_alpha4(p, epsilon))
    return StcResult(
        tau=(1.0 - sigma) * p.tx_density * rates.rate_s,
        rates=rates,
        sop_bound="upper",
        scheme=FixedDistance(p.distance),
        sigma=sigma,
        epsilon=epsilon,
        tx_density=p.tx_density,
    )


def positive_stc_margin(p: Alpha4Params, sigma: float, epsilon: float) -> float:
    """Left-hand side of the positive-capacity test; capacity > 0 iff this exceeds 1.

    It is ``sqrt(beta_t / beta_e)`` written out in the model constants.
    """
    _needs_noise(p)
    if p.eve_density == 0:
        return math.inf
    ell_s = _log_inv_complement(sigma)
    ell_e = _log_inv_complement(epsilon)
    th, w = p.theta, p.noise_power
    # -theta + sqrt(theta^2 + 4 w l), without cancellation
    numerator = 4.0 * w * ell_s / (th + math.sqrt(th * th + 4.0 * w * ell_s))
    denominator = (
        _PI_3_2 * p.distance**2 * p.eve_density * math.sqrt(w) * _noise_erfcx_term(p)
    )
    return numerator * ell_e / denominator


def positive_stc_condition(p: Alpha4Params, sigma: float, epsilon: float) -> bool:
    return positive_stc_margin(p, sigma, epsilon) > 1.0
