"""Non-stationary heating channel: y_k = x_k + sqrt(sigma^2 + heat_k) * u_k.

The heat term at time k is the coefficient-weighted sum of all past input
powers, ``sum_{l=1}^{k-1} alpha_{k-l} * x_l**2``, so the noise floor only
ever rises with past activity and depends on the inputs through their
powers alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .coeffs import CoefficientSpec, tail_sum_bound
from .errors import SpecValidationError
from .rng import as_seedseq, rng_from

__all__ = [
    "NoiseDistribution",
    "ChannelParams",
    "noise_variance",
    "variance_profile",
    "geometric_fast_variance",
    "simulate_block",
    "simulate_with_feedback",
]

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class NoiseDistribution:
    """Zero-mean, unit-variance noise law with finite fourth moment.

    Two built-ins: ``gaussian`` (standard normal) and ``uniform`` (uniform
    on [-sqrt(3), sqrt(3)]).  Both have finite differential entropy and a
    density bounded by 1, which the converse-constant machinery relies on.
    """

    kind: str

    @classmethod
    def gaussian(cls) -> "NoiseDistribution":
        return cls("gaussian")

    @classmethod
    def uniform(cls) -> "NoiseDistribution":
        return cls("uniform")

    @classmethod
    def parse(cls, text: str) -> "NoiseDistribution":
        kind = text.strip().lower()
        if kind in ("gaussian", "uniform"):
            return cls(kind)
        raise SpecValidationError(f"unknown noise distribution {text!r} (gaussian|uniform)")

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        return rng.uniform(-_SQRT3, _SQRT3, size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        return np.where(np.abs(x) <= _SQRT3, 1.0 / (2.0 * _SQRT3), 0.0)

    def entropy(self) -> float:
        """Differential entropy h(U) in nats."""
        if self.kind == "gaussian":
            return 0.5 * math.log(2.0 * math.pi * math.e)
        return math.log(2.0 * _SQRT3)

    def fourth_moment(self) -> float:
        return 3.0 if self.kind == "gaussian" else 9.0 / 5.0

    def support(self, density_floor: float = 1e-30):
        """Interval outside which the density stays below `density_floor`."""
        if self.kind == "gaussian":
            # exp(-x^2/2)/sqrt(2*pi) < floor  <=>  |x| > sqrt(-2*log(floor*sqrt(2*pi)))
            return (-12.0, 12.0) if density_floor >= 1e-30 else (-40.0, 40.0)
        return (-_SQRT3, _SQRT3)


@dataclass(frozen=True)
class ChannelParams:
    """Ambient noise variance, noise law, and average input power budget."""

    sigma2: float
    noise: NoiseDistribution = NoiseDistribution.gaussian()
    power: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise SpecValidationError(f"sigma2 must be > 0, got {self.sigma2!r}")
        if self.power < 0.0:
            raise SpecValidationError(f"power must be >= 0, got {self.power!r}")

    @property
    def snr(self) -> float:
        return self.power / self.sigma2


def noise_variance(spec: CoefficientSpec, sigma2: float, x_prefix, k: int) -> float:
    """Noise variance at time k given inputs x_1..x_{k-1} (exact summation)."""
    x = np.asarray(x_prefix, dtype=float)
    if not 1 <= k <= x.size + 1:
        raise SpecValidationError(f"need 1 <= k <= len(x)+1, got k={k} with len={x.size}")
    if k == 1:
        return float(sigma2)
    xsq = x[:k - 1] ** 2
    alphas = spec.eval_range(k - 1)  # alpha_1 .. alpha_{k-1}
    # weight alpha_{k-l} multiplies x_l: reverse the coefficient vector
    return float(sigma2 + np.dot(alphas[::-1], xsq))


def variance_profile(spec: CoefficientSpec, sigma2: float, x,
                     truncate_tol: float | None = None) -> np.ndarray:
    """Noise variances at times 1..n for the input block x (length n).

    Exact O(n^2) evaluation by default (a single convolution).  The
    geometric family takes an O(n) recursion instead.  With `truncate_tol`
    set, coefficients beyond a window W are dropped once the certified tail
    ``sum_{l>W} alpha_l * max(x^2)`` falls below the tolerance.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        return np.zeros(0)
    if spec.family == "geometric":
        return geometric_fast_variance(spec.rho, sigma2, x)[:n]
    xsq = x * x
    width = n - 1
    if truncate_tol is not None and width > 1:
        peak = float(xsq.max())
        if peak > 0.0:
            w = 1
            while w < width and tail_sum_bound(spec, w + 1) * peak >= truncate_tol:
                w += 1
            width = w
    if width == 0:
        return np.full(n, float(sigma2))
    avec = spec.eval_range(width)  # alpha_1 .. alpha_width
    heat = np.convolve(xsq, avec)[:n - 1]
    out = np.empty(n)
    out[0] = sigma2
    out[1:] = sigma2 + heat
    return out


def geometric_fast_variance(rho: float, sigma2: float, x_prefix) -> np.ndarray:
    """O(n) variance recursion for geometric coefficients.

    Returns the n+1 variances at times 1..n+1, using
    ``S_k = rho * (S_{k-1} + x_{k-1}^2)`` with S_1 = 0, variance = sigma2 + S_k.
    """
    if not 0.0 < rho < 1.0:
        raise SpecValidationError(f"rho must lie in (0,1), got {rho!r}")
    x = np.asarray(x_prefix, dtype=float)
    xsq = x * x
    n = x.size
    out = np.empty(n + 1)
    out[0] = sigma2
    if n == 0:
        return out
    heat = lfilter([0.0, rho], [1.0, -rho], xsq)  # heat[j] = S at time j+1
    out[1:n] = sigma2 + heat[1:]
    out[n] = sigma2 + rho * (heat[-1] + xsq[-1])
    return out


def simulate_block(spec: CoefficientSpec, params: ChannelParams, x, seed) -> np.ndarray:
    """Transmit the block x through the channel; deterministic given seed."""
    x = np.asarray(x, dtype=float)
    if x.size and not np.all(np.isfinite(x)):
        raise SpecValidationError("channel inputs must be finite")
    var = variance_profile(spec, params.sigma2, x)
    u = params.noise.sample(rng_from(seed), x.size)
    return x + np.sqrt(var) * u


def simulate_with_feedback(spec: CoefficientSpec, params: ChannelParams,
                           encoder, message, n: int, seed):
    """Causally interleave encoder calls and channel draws.

    ``encoder(message, y_so_far)`` must return the next channel input given
    the outputs observed so far.  An encoder that ignores its second
    argument reproduces :func:`simulate_block` exactly on the same seed
    (the noise stream is consumed in the same order).
    """
    if n < 0:
        raise SpecValidationError("block length must be >= 0")
    rng = rng_from(as_seedseq(seed))
    xs = np.zeros(n)
    ys = np.zeros(n)
    geometric = spec.family == "geometric"
    heat = 0.0
    for k in range(1, n + 1):
        xk = float(encoder(message, ys[:k - 1]))
        xs[k - 1] = xk
        if geometric:
            var_k = params.sigma2 + heat
        else:
            var_k = noise_variance(spec, params.sigma2, xs[:k - 1], k)
        u = float(params.noise.sample(rng))
        ys[k - 1] = xk + math.sqrt(var_k) * u
        if geometric:
            heat = spec.rho * (heat + xk * xk)
    return xs, ys
