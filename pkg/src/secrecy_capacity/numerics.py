"""Numerical kernels shared by the analytic and closed-form paths.

Three pieces live here:

* ``integrate_semi_infinite``: globally adaptive Gauss-Legendre quadrature on
  [0, inf) after the substitution ``t = scale * x / (1 - x)``.
* ``invert_monotone``: bracket expansion followed by Brent refinement.
* ``erfcx`` and ``gamma_product_theta``: the special functions the outage
  formulas need.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

__all__ = [
    "NumericalError",
    "IntegrationError",
    "InversionRangeError",
    "QuadratureSpec",
    "BracketSpec",
    "DEFAULT_QUADRATURE",
    "DEFAULT_BRACKET",
    "integrate_semi_infinite",
    "invert_monotone",
    "erfcx",
    "gamma_product_theta",
]

_EPS = np.finfo(float).eps
_SQRT_PI = math.sqrt(math.pi)


class NumericalError(ArithmeticError):
    """Base class for quadrature and root-finding failures."""


class IntegrationError(NumericalError):
    """Quadrature did not converge or the integrand misbehaved.

    ``estimate`` carries the partial integral (``nan`` when the integrand
    produced a non-finite value) and ``abscissa`` the offending point, if any.
    """

    def __init__(self, message, estimate=math.nan, abscissa=None):
        super().__init__(message)
        self.estimate = estimate
        self.abscissa = abscissa


class InversionRangeError(NumericalError):
    """The target is not attained inside the largest bracket tried."""

    def __init__(self, message, lower, upper, value_lower, value_upper):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.value_lower = value_lower
        self.value_upper = value_upper


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 400
    order: int = 15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.order < 2:
            raise ValueError("order must be >= 2")


@dataclass(frozen=True)
class BracketSpec:
    lower: float = 1e-9
    upper: float = 1e3
    expansion_factor: float = 10.0
    max_expansions: int = 60
    tolerance: float = 1e-13
    max_iterations: int = 200

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("bracket lower end must be below upper end")
        if not self.expansion_factor > 1:
            raise ValueError("expansion_factor must exceed 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_expansions < 0:
            raise ValueError("max_expansions must be >= 0")


DEFAULT_QUADRATURE = QuadratureSpec()
DEFAULT_BRACKET = BracketSpec()


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order):
    rule = _GL_CACHE.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = rule
    return rule


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    scale: float = 1.0,
) -> float:
    """Integrate ``f`` over [0, inf).

    ``f`` is called with 1-d numpy arrays of abscissae and must return an
    array of the same shape. ``scale`` should be the length over which ``f``
    decays; it only affects efficiency, never the answer.

    Each panel is estimated with a Gauss-Legendre rule on the whole panel and
    on its two halves; the difference is the panel's error estimate and the
    panel with the largest error is bisected until the summed error meets
    ``max(abs_tol, rel_tol * |integral|)``.

    >>> round(integrate_semi_infinite(lambda t: t * np.exp(-t * t)), 12)
    0.5
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"scale must be positive and finite, got {scale!r}")
    nodes, weights = _gauss_legendre(spec.order)

    def panel(a, b):
        half = 0.5 * (b - a)
        x = a + half * (nodes + 1.0)
        one_minus = 1.0 - x
        t = scale * x / one_minus
        with np.errstate(over="ignore", under="ignore"):
            values = np.asarray(f(t), dtype=float)
        if values.shape != t.shape:
            raise TypeError("integrand must be vectorised: output shape must match input")
        bad = ~np.isfinite(values)
        if bad.any():
            where = float(t[np.argmax(bad)])
            raise IntegrationError(
                f"integrand returned {values[bad][0]!r} at t={where!r}", abscissa=where
            )
        jac = scale / (one_minus * one_minus)
        return half * float(np.dot(weights, values * jac))

    def refine(a, b, coarse):
        m = 0.5 * (a + b)
        left = panel(a, m)
        right = panel(m, b)
        return left, right, left + right, abs(left + right - coarse)

    # heap entries: (-error, a, b, coarse, left, right)
    whole = panel(0.0, 1.0)
    left, right, fine, err = refine(0.0, 1.0, whole)
    heap = [(-err, 0.0, 1.0, left, right, fine)]
    n_panels = 1
    while True:
        total = math.fsum(entry[5] for entry in heap)
        total_err = math.fsum(-entry[0] for entry in heap)
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        if n_panels >= spec.max_subdivisions:
            raise IntegrationError(
                f"no convergence after {n_panels} panels "
                f"(estimate {total!r}, error {total_err:.3e})",
                estimate=total,
            )
        neg_err, a, b, left, right, _ = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not (a < m < b):
            raise IntegrationError(
                f"panel [{a!r}, {b!r}] cannot be bisected further", estimate=total
            )
        for lo, hi, coarse in ((a, m, left), (m, b, right)):
            l2, r2, fine2, err2 = refine(lo, hi, coarse)
            heapq.heappush(heap, (-err2, lo, hi, l2, r2, fine2))
        n_panels += 1


# ---------------------------------------------------------------------------
# monotone inversion
# ---------------------------------------------------------------------------


def _expand(h, lo, hi, spec):
    """Grow [lo, hi] until h changes sign. ``h`` is increasing."""
    factor = spec.expansion_factor
    h_lo, h_hi = h(lo), h(hi)
    expansions = 0
    while h_lo > 0 and expansions < spec.max_expansions:
        hi, h_hi = lo, h_lo
        lo = lo / factor if lo > 0 else lo - (hi - lo) * factor
        h_lo = h(lo)
        expansions += 1
    while h_hi < 0 and expansions < spec.max_expansions:
        lo, h_lo = hi, h_hi
        hi = hi * factor if hi > 0 else hi + (hi - lo) * factor
        h_hi = h(hi)
        expansions += 1
    return lo, hi, h_lo, h_hi


def _brent(h, a, b, fa, fb, ftol, max_iter):
    """Brent's zeroin on a sign-changing bracket, stopping on |h| <= ftol."""
    if abs(fa) <= ftol:
        return a
    if abs(fb) <= ftol:
        return b
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        xtol = 2.0 * _EPS * abs(b) + 1e-300
        m = 0.5 * (c - b)
        if abs(fb) <= ftol or abs(m) <= xtol:
            return b
        if abs(e) >= xtol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(xtol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > xtol else math.copysign(xtol, m)
        fb = h(b)
    return b


def invert_monotone(
    g: Callable[[float], float],
    target: float,
    direction: Literal["increasing", "decreasing"] = "increasing",
    bracket: BracketSpec = DEFAULT_BRACKET,
) -> float:
    """Solve ``g(x) = target`` for a strictly monotone ``g``.

    The bracket is expanded geometrically (at most ``max_expansions`` steps)
    until it straddles the target, then refined with Brent's method. The
    returned ``x`` satisfies ``|g(x) - target| <= tolerance * max(1, |target|)``
    unless the bracket collapses to machine precision first.

    Raises
    ------
    InversionRangeError
        If the target lies outside the range reached by the widest bracket.
    """
    if direction == "increasing":
        sign = 1.0
    elif direction == "decreasing":
        sign = -1.0
    else:
        raise ValueError(f"direction must be 'increasing' or 'decreasing', not {direction!r}")

    def h(x):
        value = g(x)
        if math.isnan(value):
            raise NumericalError(f"function returned NaN at x={x!r}")
        return sign * (value - target)

    lo, hi, h_lo, h_hi = _expand(h, bracket.lower, bracket.upper, bracket)
    if h_lo > 0 or h_hi < 0:
        g_lo, g_hi = sign * h_lo + target, sign * h_hi + target
        raise InversionRangeError(
            f"target {target!r} outside attained range [{min(g_lo, g_hi)!r}, "
            f"{max(g_lo, g_hi)!r}] on bracket [{lo!r}, {hi!r}]",
            lo,
            hi,
            g_lo,
            g_hi,
        )
    ftol = bracket.tolerance * max(1.0, abs(target))
    return _brent(h, lo, hi, h_lo, h_hi, ftol, bracket.max_iterations)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

_ERFCX_SERIES_START = 8.0


def _square_split(x):
    """Return (hi, lo) with hi + lo == x*x exactly (Dekker splitting)."""
    c = 134217729.0 * x  # 2**27 + 1
    xh = c - (c - x)
    xl = x - xh
    hi = x * x
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    return hi, lo


def erfcx(x: float) -> float:
    """Scaled complementary error function ``exp(x**2) * erfc(x)`` for x >= 0.

    Below x = 8 the product is formed directly with an exactly split ``x**2``;
    above it the asymptotic series is summed until its terms stop shrinking,
    which never overflows.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("erfcx of NaN")
    if x < 0:
        raise ValueError(f"erfcx is only defined here for x >= 0, got {x!r}")
    if x < _ERFCX_SERIES_START:
        hi, lo = _square_split(x)
        return math.exp(hi) * math.exp(lo) * math.erfc(x)
    if math.isinf(x):
        return 0.0
    # 1/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!! / (2x^2)^n
    inv = 1.0 / (2.0 * x * x)
    term = 1.0
    total = 1.0
    n = 1
    while True:
        nxt = -term * (2 * n - 1) * inv
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17 * total:
            break
        total += nxt
        term = nxt
        n += 1
    return total / (x * _SQRT_PI)


def gamma_product_theta(tx_density: float, alpha: float) -> float:
    """``pi * tx_density * Gamma(1 - 2/alpha) * Gamma(1 + 2/alpha)``.

    This is the interference constant of a Rayleigh-faded PPP of transmitters
    with path-loss exponent ``alpha``.
    """
    if not alpha > 2:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha!r}")
    if not tx_density > 0:
        raise ValueError(f"transmitter density must be positive, got {tx_density!r}")
    delta = 2.0 / alpha
    return math.pi * tx_density * math.gamma(1.0 - delta) * math.gamma(1.0 + delta)
