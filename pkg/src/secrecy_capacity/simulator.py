"""Monte Carlo snapshots of the Poisson network around a typical transmitter.

Each trial draws its own ``numpy.random.Generator`` backed by Philox with the
run seed as key and the trial index in the top counter word. A trial's random
stream therefore depends only on ``(seed, trial)``, and any split of the trial
range over worker processes gives bit-identical totals.
"""

from __future__ import annotations

import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import FixedDistance, NearestReceiver, NetworkParams, NoiseModel, TransmissionScheme

__all__ = [
    "SimWindow",
    "TrialOutcome",
    "McEstimate",
    "trial_rng",
    "draw_fading",
    "sample_ppp",
    "receiver_sinr",
    "eavesdropper_sinrs",
    "simulate_trial",
    "run_cop_trials",
    "run_sop_trials",
    "BLOCK_SIZE",
]

# trials per work unit; fixed so that the chunking never depends on --jobs
BLOCK_SIZE = 2048
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimWindow:
    """Square observation window ``[-half_width, half_width]^2`` centred on the typical transmitter."""

    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def side(self) -> float:
        return 2.0 * self.half_width

    @property
    def area(self) -> float:
        return self.side**2

    @classmethod
    def for_density(cls, tx_density: float) -> "SimWindow":
        """Side 100 for tx_density >= 1e-3, side 300 below that.

        For densities under 1e-4 the side grows as ``3 / sqrt(tx_density)``,
        which keeps the same expected interferer count as at 1e-4.
        """
        if tx_density >= 1e-3:
            side = 100.0
        elif tx_density >= 1e-4:
            side = 300.0
        else:
            side = 3.0 / math.sqrt(tx_density)
        return cls(side / 2.0)


@dataclass(frozen=True)
class TrialOutcome:
    sinr_receiver: float
    max_eavesdropper_sinr: Optional[float]
    connection_outage: bool
    secrecy_outage: bool


@dataclass(frozen=True)
class McEstimate:
    """Binomial proportion estimate with its standard error."""

    estimate: float
    trials: int
    stderr: float
    seed: int
    events: int

    @classmethod
    def from_counts(cls, events: int, trials: int, seed: int) -> "McEstimate":
        p = events / trials
        return cls(p, trials, math.sqrt(p * (1.0 - p) / trials), seed, events)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial: Philox keyed by ``seed``, counter offset by ``trial``."""
    return np.random.Generator(
        np.random.Philox(key=int(seed) & _U64, counter=[0, 0, 0, int(trial)])
    )


def draw_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power gains (Rayleigh amplitude fading)."""
    return rng.standard_exponential(size)


def sample_ppp(density: float, window: SimWindow, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on ``window`` as an ``(n, 2)`` array."""
    if density < 0:
        raise ValueError("density must be >= 0")
    if density == 0:
        return np.empty((0, 2))
    n = rng.poisson(density * window.area)
    h = window.half_width
    return rng.uniform(-h, h, size=(n, 2))


def _path_gain(dist, alpha):
    with np.errstate(divide="ignore"):
        return dist ** (-alpha)


def receiver_sinr(
    net: NetworkParams,
    noise: NoiseModel,
    receiver: np.ndarray,
    interferers: np.ndarray,
    rng: np.random.Generator,
) -> float:
    """SINR at ``receiver`` for a signal from the origin, all ``interferers`` active."""
    rho, alpha = net.power, net.alpha
    signal = rho * draw_fading(rng) * _path_gain(math.hypot(receiver[0], receiver[1]), alpha)
    d = np.hypot(interferers[:, 0] - receiver[0], interferers[:, 1] - receiver[1])
    interference = rho * float(np.dot(draw_fading(rng, d.shape[0]), _path_gain(d, alpha)))
    with np.errstate(divide="ignore", invalid="ignore"):
        return signal / (float(noise.sample(rng)) + interference)


def eavesdropper_sinrs(
    net: NetworkParams,
    noise: NoiseModel,
    eavesdroppers: np.ndarray,
    interferers: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """SINR of the origin's signal at every eavesdropper, independent noise per location."""
    rho, alpha = net.power, net.alpha
    n_e = eavesdroppers.shape[0]
    if n_e == 0:
        return np.empty(0)
    d_sig = np.hypot(eavesdroppers[:, 0], eavesdroppers[:, 1])
    signal = rho * draw_fading(rng, n_e) * _path_gain(d_sig, alpha)
    dx = eavesdroppers[:, 0, None] - interferers[None, :, 0]
    dy = eavesdroppers[:, 1, None] - interferers[None, :, 1]
    gains = draw_fading(rng, dx.shape) * _path_gain(np.hypot(dx, dy), alpha)
    interference = rho * gains.sum(axis=1)
    noise_w = np.asarray(noise.sample(rng, n_e), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return signal / (noise_w + interference)


def _place_receiver(scheme, window, rng):
    if isinstance(scheme, FixedDistance):
        phi = rng.uniform(0.0, 2.0 * math.pi)
        return np.array([scheme.distance * math.cos(phi), scheme.distance * math.sin(phi)])
    if isinstance(scheme, NearestReceiver):
        candidates = sample_ppp(scheme.rx_density, window, rng)
        if candidates.shape[0] == 0:
            return None
        idx = np.argmin(np.einsum("ij,ij->i", candidates, candidates))
        return candidates[idx]
    raise TypeError(f"unknown transmission scheme {scheme!r}")


def simulate_trial(
    net: NetworkParams,
    noise: NoiseModel,
    scheme: TransmissionScheme,
    beta_t: float,
    beta_e: float,
    rng: np.random.Generator,
    window: Optional[SimWindow] = None,
) -> TrialOutcome:
    """One network snapshot: receiver SINR and the strongest eavesdropper SINR."""
    window = window or SimWindow.for_density(net.tx_density)
    interferers = sample_ppp(net.tx_density, window, rng)
    receiver = _place_receiver(scheme, window, rng)
    sinr_rx = 0.0 if receiver is None else receiver_sinr(net, noise, receiver, interferers, rng)
    eves = sample_ppp(net.eve_density, window, rng)
    sinrs = eavesdropper_sinrs(net, noise, eves, interferers, rng)
    max_e = float(sinrs.max()) if sinrs.size else None
    return TrialOutcome(
        sinr_receiver=sinr_rx,
        max_eavesdropper_sinr=max_e,
        connection_outage=sinr_rx < beta_t,
        secrecy_outage=max_e is not None and max_e > beta_e,
    )


def _cop_block(net, noise, scheme, beta_t, window, seed, start, stop):
    events = 0
    for trial in range(start, stop):
        rng = trial_rng(seed, trial)
        interferers = sample_ppp(net.tx_density, window, rng)
        receiver = _place_receiver(scheme, window, rng)
        if receiver is None:
            events += 1
            continue
        if receiver_sinr(net, noise, receiver, interferers, rng) < beta_t:
            events += 1
    return events


def _sop_block(net, noise, beta_e, window, seed, start, stop):
    events = 0
    for trial in range(start, stop):
        rng = trial_rng(seed, trial)
        interferers = sample_ppp(net.tx_density, window, rng)
        eves = sample_ppp(net.eve_density, window, rng)
        if eves.shape[0] and eavesdropper_sinrs(net, noise, eves, interferers, rng).max() > beta_e:
            events += 1
    return events


def _run_blocks(fn, args, seed, trials, jobs, executor):
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    bounds = [(s, min(s + BLOCK_SIZE, trials)) for s in range(0, trials, BLOCK_SIZE)]
    if executor is None and jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return _run_blocks(fn, args, seed, trials, jobs, pool)
    if executor is None:
        return sum(fn(*args, seed, a, b) for a, b in bounds)
    futures = [executor.submit(fn, *args, seed, a, b) for a, b in bounds]
    return sum(f.result() for f in futures)


def run_cop_trials(
    net: NetworkParams,
    noise: NoiseModel,
    scheme: TransmissionScheme,
    beta_t: float,
    trials: int = 100_000,
    seed: int = 0,
    window: Optional[SimWindow] = None,
    jobs: int = 1,
    executor: Optional[Executor] = None,
) -> McEstimate:
    """Estimate the connection outage probability of the typical link.

    The typical transmitter sits at the centre of ``window`` (sized from the
    transmitter density by default); its receiver is either ``L`` away in a
    uniform direction or the nearest point of an independent receiver PPP.
    A trial with no receiver in the window counts as an outage.
    """
    window = window or SimWindow.for_density(net.tx_density)
    events = _run_blocks(_cop_block, (net, noise, scheme, beta_t, window), seed, trials, jobs, executor)
    return McEstimate.from_counts(events, trials, seed)


def run_sop_trials(
    net: NetworkParams,
    noise: NoiseModel,
    beta_e: float,
    trials: int = 10_000,
    seed: int = 0,
    window: Optional[SimWindow] = None,
    jobs: int = 1,
    executor: Optional[Executor] = None,
) -> McEstimate:
    """Estimate the secrecy outage probability of the typical transmitter.

    Eavesdroppers are drawn on the same window as the interferers; secrecy
    outage means at least one of them sees SINR above ``beta_e``.
    """
    window = window or SimWindow.for_density(net.tx_density)
    events = _run_blocks(_sop_block, (net, noise, beta_e, window), seed, trials, jobs, executor)
    return McEstimate.from_counts(events, trials, seed)
