"""System-model value objects: network densities, noise, transmission scheme."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from .numerics import DEFAULT_QUADRATURE, integrate_semi_infinite

__all__ = [
    "NetworkParams",
    "NoiseModel",
    "ConstantNoise",
    "ExponentialNoise",
    "CustomNoise",
    "FixedDistance",
    "NearestReceiver",
    "TransmissionScheme",
    "OutageConstraints",
    "laplace_at",
]


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def _check_probability(name, value):
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


@dataclass(frozen=True)
class NetworkParams:
    """Densities and propagation constants of the ad hoc network.

    The transmitter density is what enters the interference constant; the
    receiver density is only used by nearest-receiver transmission. When
    ``rx_density`` is omitted the ALOHA probability is taken as 1/2, i.e.
    ``rx_density == tx_density``. Use :meth:`from_aloha` to build the object
    from the total legitimate density and the ALOHA access probability.
    """

    tx_density: float
    eve_density: float = 0.0
    alpha: float = 4.0
    power: float = 1.0
    rx_density: Optional[float] = None

    def __post_init__(self):
        _check_positive("tx_density", self.tx_density)
        if not (self.eve_density >= 0 and math.isfinite(self.eve_density)):
            raise ValueError(f"eve_density must be >= 0, got {self.eve_density!r}")
        if not (self.alpha > 2 and math.isfinite(self.alpha)):
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha!r}")
        _check_positive("power", self.power)
        if self.rx_density is None:
            object.__setattr__(self, "rx_density", float(self.tx_density))
        _check_positive("rx_density", self.rx_density)

    @classmethod
    def from_aloha(cls, density, aloha_p, eve_density=0.0, alpha=4.0, power=1.0):
        """Thin a legitimate PPP of ``density`` with access probability ``aloha_p``."""
        _check_positive("density", density)
        _check_probability("aloha_p", aloha_p)
        return cls(
            tx_density=aloha_p * density,
            eve_density=eve_density,
            alpha=alpha,
            power=power,
            rx_density=(1.0 - aloha_p) * density,
        )

    @property
    def density(self) -> float:
        return self.tx_density + self.rx_density

    @property
    def aloha_p(self) -> float:
        return self.tx_density / self.density

    def with_(self, **changes) -> "NetworkParams":
        return replace(self, **changes)


class NoiseModel:
    """Distribution of the per-location noise power W.

    Subclasses provide the Laplace transform (vectorised over ``s``) and a
    sampler that takes an explicit ``numpy.random.Generator``.
    """

    kind: str = "abstract"

    def laplace(self, s):
        raise NotImplementedError

    def log_laplace(self, s):
        with np.errstate(divide="ignore"):
            return np.log(self.laplace(s))

    def sample(self, rng, size=None):
        raise NotImplementedError

    density: Optional[Callable] = None


@dataclass(frozen=True)
class ConstantNoise(NoiseModel):
    """Deterministic noise power ``power`` (``0`` gives the SIR model)."""

    power: float = 0.0
    kind = "constant"

    def __post_init__(self):
        if not (self.power >= 0 and math.isfinite(self.power)):
            raise ValueError(f"noise power must be >= 0, got {self.power!r}")

    def laplace(self, s):
        return np.exp(self.log_laplace(s))

    def log_laplace(self, s):
        s = np.asarray(s, dtype=float)
        if self.power == 0.0:
            # avoids inf * 0 when s overflows
            return np.zeros_like(s)
        return -s * self.power

    def sample(self, rng, size=None):
        if size is None:
            return self.power
        return np.full(size, self.power)


@dataclass(frozen=True)
class ExponentialNoise(NoiseModel):
    """Exponentially distributed noise power with the given mean."""

    mean: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        _check_positive("noise mean", self.mean)

    def laplace(self, s):
        return 1.0 / (1.0 + self.mean * np.asarray(s, dtype=float))

    def log_laplace(self, s):
        return -np.log1p(self.mean * np.asarray(s, dtype=float))

    def sample(self, rng, size=None):
        return rng.exponential(self.mean, size)

    def density(self, w):
        w = np.asarray(w, dtype=float)
        return np.where(w >= 0, np.exp(-w / self.mean) / self.mean, 0.0)


@dataclass(frozen=True)
class CustomNoise(NoiseModel):
    """User-supplied noise law.

    Either ``laplace`` or ``density`` must be given; with only a density the
    transform is evaluated by quadrature. ``sampler(rng, size)`` is needed
    only for simulation. Callables may be scalar-only; they are vectorised
    here.
    """

    laplace_fn: Optional[Callable[[float], float]] = None
    sampler: Optional[Callable] = None
    density_fn: Optional[Callable[[float], float]] = None
    kind = "custom"
    _vec: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.laplace_fn is None and self.density_fn is None:
            raise ValueError("custom noise needs a Laplace transform or a density")
        if self.laplace_fn is not None:
            vec = np.vectorize(self.laplace_fn, otypes=[float])
        else:
            dens = np.vectorize(self.density_fn, otypes=[float])

            def transform(s):
                return integrate_semi_infinite(
                    lambda w: np.exp(-s * w) * dens(w), DEFAULT_QUADRATURE
                )

            vec = np.vectorize(transform, otypes=[float])
        object.__setattr__(self, "_vec", vec)

    def laplace(self, s):
        return self._vec(np.asarray(s, dtype=float))

    @property
    def density(self):
        return self.density_fn

    def sample(self, rng, size=None):
        if self.sampler is None:
            raise ValueError("this custom noise model has no sampler")
        return self.sampler(rng, size)


def laplace_at(noise: NoiseModel, s: float) -> float:
    """Laplace transform E[exp(-s W)] of the noise power at ``s >= 0``."""
    if not s >= 0:
        raise ValueError(f"Laplace argument must be >= 0, got {s!r}")
    return float(noise.laplace(s))


@dataclass(frozen=True)
class FixedDistance:
    """Every transmitter talks to a receiver ``distance`` away."""

    distance: float = 1.0
    kind = "fixed"

    def __post_init__(self):
        _check_positive("distance", self.distance)


@dataclass(frozen=True)
class NearestReceiver:
    """Every transmitter talks to its nearest receiver of a PPP of ``rx_density``."""

    rx_density: float = 0.1
    kind = "nearest"

    def __post_init__(self):
        _check_positive("rx_density", self.rx_density)


TransmissionScheme = Union[FixedDistance, NearestReceiver]


@dataclass(frozen=True)
class OutageConstraints:
    """Connection outage target ``sigma`` and secrecy outage target ``epsilon``."""

    sigma: float
    epsilon: float

    def __post_init__(self):
        _check_probability("sigma", self.sigma)
        _check_probability("epsilon", self.epsilon)
