"""Outage probabilities and secrecy transmission capacity for general noise and alpha.

All functions are pure. Integrals over the distance ``r`` are evaluated by
:func:`~secrecy_capacity.numerics.integrate_semi_infinite` with the Gaussian
decay length of the integrand as the substitution scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .model import (
    FixedDistance,
    NearestReceiver,
    NetworkParams,
    NoiseModel,
    OutageConstraints,
    TransmissionScheme,
)
from .numerics import (
    DEFAULT_BRACKET,
    DEFAULT_QUADRATURE,
    BracketSpec,
    InversionRangeError,
    QuadratureSpec,
    gamma_product_theta,
    integrate_semi_infinite,
    invert_monotone,
)

__all__ = [
    "RatePair",
    "StcResult",
    "theta",
    "cop_fixed",
    "cop_nrt",
    "cop",
    "sop_upper",
    "sop_lower",
    "sop_bound",
    "invert_cop",
    "invert_sop",
    "rate_from_threshold",
    "threshold_from_rate",
    "stc",
]

Bound = Literal["upper", "lower"]


def rate_from_threshold(beta: float) -> float:
    """Rate in bits per channel use decodable at SINR threshold ``beta``."""
    return math.log1p(beta) / math.log(2.0)


def threshold_from_rate(rate: float) -> float:
    return math.expm1(rate * math.log(2.0))


@dataclass(frozen=True)
class RatePair:
    """Wyner code rates with the SINR thresholds they came from."""

    beta_t: float
    beta_e: float
    rate_t: float = field(init=False)
    rate_e: float = field(init=False)
    rate_s: float = field(init=False)

    def __post_init__(self):
        if self.beta_t < 0 or self.beta_e < 0:
            raise ValueError("SINR thresholds must be >= 0")
        rate_t = rate_from_threshold(self.beta_t)
        rate_e = rate_from_threshold(self.beta_e)
        object.__setattr__(self, "rate_t", rate_t)
        object.__setattr__(self, "rate_e", rate_e)
        object.__setattr__(self, "rate_s", max(rate_t - rate_e, 0.0))


@dataclass(frozen=True)
class StcResult:
    """Secrecy transmission capacity at one operating point.

    ``sop_bound`` names the SOP bound that produced ``beta_e``; the upper SOP
    bound yields the capacity lower bound and vice versa (see
    :attr:`capacity_bound`). ``secrecy_binding`` is False when the secrecy
    target exceeds every value the SOP bound attains, in which case the rate
    cost is zero.
    """

    tau: float
    rates: RatePair
    sop_bound: Bound
    scheme: TransmissionScheme
    sigma: float
    epsilon: float
    tx_density: float
    secrecy_binding: bool = True

    @property
    def capacity_bound(self) -> str:
        return "lower" if self.sop_bound == "upper" else "upper"


def theta(net: NetworkParams) -> float:
    return gamma_product_theta(net.tx_density, net.alpha)


def _check_threshold(name, beta):
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"{name} must be positive and finite, got {beta!r}")


def cop_fixed(
    net: NetworkParams, noise: NoiseModel, beta_t: float, distance: float
) -> float:
    """Connection outage probability at fixed link length ``distance``.

    ``1 - exp(-theta (beta_t/rho)^(2/alpha) L^2) * L_W(beta_t/rho * L^alpha)``
    """
    _check_threshold("beta_t", beta_t)
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance!r}")
    b = beta_t / net.power
    exponent = -theta(net) * b ** (2.0 / net.alpha) * distance**2
    exponent += float(noise.log_laplace(b * distance**net.alpha))
    return -math.expm1(exponent)


def cop_nrt(
    net: NetworkParams,
    noise: NoiseModel,
    beta_t: float,
    rx_density: Optional[float] = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Connection outage probability under nearest-receiver transmission.

    The fixed-distance COP is averaged over the nearest-receiver distance law
    ``2 pi lambda_R r exp(-pi lambda_R r^2)``. Integrating the outage (rather
    than one minus the success) keeps small probabilities accurate.
    """
    _check_threshold("beta_t", beta_t)
    lam_r = net.rx_density if rx_density is None else rx_density
    if not lam_r > 0:
        raise ValueError(f"receiver density must be positive, got {lam_r!r}")
    b = beta_t / net.power
    a = theta(net) * b ** (2.0 / net.alpha)
    alpha = net.alpha

    def integrand(r):
        r2 = r * r
        outage = -np.expm1(-a * r2 + noise.log_laplace(b * r**alpha))
        return outage * 2.0 * math.pi * lam_r * r * np.exp(-math.pi * lam_r * r2)

    scale = 1.0 / math.sqrt(math.pi * lam_r)
    return min(integrate_semi_infinite(integrand, quad, scale), 1.0)


def cop(
    net: NetworkParams,
    noise: NoiseModel,
    scheme: TransmissionScheme,
    beta_t: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Dispatch to :func:`cop_fixed` or :func:`cop_nrt` by scheme."""
    if isinstance(scheme, FixedDistance):
        return cop_fixed(net, noise, beta_t, scheme.distance)
    if isinstance(scheme, NearestReceiver):
        return cop_nrt(net, noise, beta_t, scheme.rx_density, quad)
    raise TypeError(f"unknown transmission scheme {scheme!r}")


def _eavesdropper_integral(net, noise, beta_e, extra, quad):
    # int_0^inf exp(-(theta (beta_e/rho)^(2/alpha) + extra) r^2) L_W(beta_e/rho r^alpha) r dr
    b = beta_e / net.power
    a = theta(net) * b ** (2.0 / net.alpha) + extra
    alpha = net.alpha

    def integrand(r):
        return np.exp(-a * r * r + noise.log_laplace(b * r**alpha)) * r

    return integrate_semi_infinite(integrand, quad, 1.0 / math.sqrt(a))


def sop_upper(
    net: NetworkParams,
    noise: NoiseModel,
    beta_e: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Upper bound on the secrecy outage probability (PGFL plus Jensen)."""
    _check_threshold("beta_e", beta_e)
    if net.eve_density == 0:
        return 0.0
    integral = _eavesdropper_integral(net, noise, beta_e, 0.0, quad)
    return -math.expm1(-2.0 * math.pi * net.eve_density * integral)


def sop_lower(
    net: NetworkParams,
    noise: NoiseModel,
    beta_e: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Lower bound on the secrecy outage probability from the nearest eavesdropper."""
    _check_threshold("beta_e", beta_e)
    lam_e = net.eve_density
    if lam_e == 0:
        return 0.0
    integral = _eavesdropper_integral(net, noise, beta_e, math.pi * lam_e, quad)
    return 2.0 * math.pi * lam_e * integral


def sop_bound(net, noise, beta_e, bound: Bound = "upper", quad=DEFAULT_QUADRATURE):
    if bound == "upper":
        return sop_upper(net, noise, beta_e, quad)
    if bound == "lower":
        return sop_lower(net, noise, beta_e, quad)
    raise ValueError(f"bound must be 'upper' or 'lower', not {bound!r}")


def invert_cop(
    net: NetworkParams,
    noise: NoiseModel,
    scheme: TransmissionScheme,
    sigma: float,
    bracket: BracketSpec = DEFAULT_BRACKET,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """SINR threshold ``beta_t`` whose connection outage equals ``sigma``."""
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma!r}")
    return invert_monotone(
        lambda beta: cop(net, noise, scheme, beta, quad), sigma, "increasing", bracket
    )


def invert_sop(
    net: NetworkParams,
    noise: NoiseModel,
    epsilon: float,
    bound: Bound = "upper",
    bracket: BracketSpec = DEFAULT_BRACKET,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Eavesdropper threshold ``beta_e`` at which the chosen SOP bound equals ``epsilon``.

    Raises :class:`InversionRangeError` when ``epsilon`` is above everything
    the bound reaches on the widest bracket (e.g. no eavesdroppers).
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if bound not in ("upper", "lower"):
        raise ValueError(f"bound must be 'upper' or 'lower', not {bound!r}")
    if net.eve_density == 0:
        raise InversionRangeError(
            "no eavesdroppers: secrecy outage is identically 0",
            bracket.lower, bracket.upper, 0.0, 0.0,
        )
    return invert_monotone(
        lambda beta: sop_bound(net, noise, beta, bound, quad), epsilon, "decreasing", bracket
    )


def stc(
    net: NetworkParams,
    noise: NoiseModel,
    scheme: TransmissionScheme,
    constraints: OutageConstraints,
    bound: Bound = "upper",
    bracket: BracketSpec = DEFAULT_BRACKET,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> StcResult:
    """Secrecy transmission capacity ``(1 - sigma) lambda_T [R_t - R_e]^+``.

    ``bound`` picks the SOP bound used for the rate cost R_e: ``"upper"``
    gives the capacity lower bound, ``"lower"`` the capacity upper bound.
    If ``epsilon`` cannot be reached by that bound the secrecy constraint is
    slack and R_e = 0.
    """
    beta_t = invert_cop(net, noise, scheme, constraints.sigma, bracket, quad)
    binding = True
    try:
        beta_e = invert_sop(net, noise, constraints.epsilon, bound, bracket, quad)
    except InversionRangeError as exc:
        # only the "epsilon above the supremum" side means the constraint is slack
        if exc.value_lower >= constraints.epsilon:
            raise
        beta_e = 0.0
        binding = False
    rates = RatePair(beta_t, beta_e)
    tau = (1.0 - constraints.sigma) * net.tx_density * rates.rate_s
    return StcResult(
        tau=tau,
        rates=rates,
        sop_bound=bound,
        scheme=scheme,
        sigma=constraints.sigma,
        epsilon=constraints.epsilon,
        tx_density=net.tx_density,
        secrecy_binding=binding,
    )
