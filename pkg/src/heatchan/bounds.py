"""Rate formulas, the converse constant, and the expected-log machinery.

All rates are in nats per channel use.  The central quantities:

* pre-limit achievable rate of the period-L Gaussian scheme, valid for any
  exponent parameter s < 0, and its optimizer s* = -1 / (2 (1 + a P)) where
  a is the subsampled coefficient sum;
* the asymptotic rate (1 / 2L) log(1 + 1/a) reached as the power budget
  grows;
* the converse-side constant K - log(beta_tilde) bounding the feedback
  capacity for coefficient ratios bounded away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .channel import NoiseDistribution
from .coeffs import CoefficientSpec
from .errors import NumericError, PreconditionError, SpecValidationError
from .rng import rng_from

__all__ = [
    "RateReport",
    "ConverseReport",
    "achievable_rate_pre_limit",
    "achievable_rate_opt",
    "rho_rate_lower_bound",
    "truncated_rate",
    "beta_tilde",
    "h_minus",
    "converse_constant",
    "lemma1_empirical",
]

# relative slack for float comparisons of mathematically exact ratios
_REL_SLACK = 1e-9


@dataclass(frozen=True)
class RateReport:
    L: int
    P: float
    sigma2: float
    alphaL: float
    eps: float
    s_used: float
    pre_limit_rate: float
    asymptotic_rate: float
    rho_lower_bound: float | None = None


@dataclass(frozen=True)
class ConverseReport:
    rho: float
    l0: int
    beta_tilde: float
    h_noise: float
    h_minus_noise: float
    delta: float
    eta: float
    eps_delta_eta: float
    K: float
    bound: float


def achievable_rate_pre_limit(P: float, sigma2: float, alphaL: float, L: int,
                              eps: float, s: float) -> float:
    """Rate threshold of the Chernoff-bound error analysis at exponent s < 0.

    Evaluates
    ``(s/L) (sigma2 + a P + eps) + (1/2L) log(1 - 2 s P)
    - (s/L) (sigma2 + P + a P - eps) / (1 - 2 s P)``
    with a = alphaL.
    """
    if not s < 0.0:
        raise SpecValidationError(f"exponent s must be < 0, got {s!r}")
    if L < 1:
        raise SpecValidationError(f"period L must be >= 1, got {L!r}")
    if not (alphaL >= 0.0 and math.isfinite(alphaL)):
        raise SpecValidationError(f"alphaL must be finite and >= 0, got {alphaL!r}")
    if P < 0.0:
        raise SpecValidationError(f"P must be >= 0, got {P!r}")
    r = 1.0 - 2.0 * s * P  # > 1 automatically for s < 0
    return (s / L) * (sigma2 + alphaL * P + eps) \
        + math.log(r) / (2.0 * L) \
        - (s / L) * (sigma2 + P + alphaL * P - eps) / r


def achievable_rate_opt(P: float, sigma2: float, alphaL: float, L: int,
                        eps: float = 0.0) -> RateReport:
    """Pre-limit rate at the closed-form exponent optimizer, plus its P -> inf limit.

    Uses s* = -1 / (2 (1 + alphaL * P)).  The asymptotic rate is
    ``(1/2L) log(1 + 1/alphaL)``, taken as +inf when alphaL = 0 (the
    subsampled channel is then memoryless and the rate grows without bound).
    """
    if not (alphaL >= 0.0 and math.isfinite(alphaL)):
        raise SpecValidationError(f"alphaL must be finite and >= 0, got {alphaL!r}")
    s_star = -0.5 / (1.0 + alphaL * P)
    pre = achievable_rate_pre_limit(P, sigma2, alphaL, L, eps, s_star)
    if alphaL == 0.0:
        asym = math.inf
    else:
        asym = math.log1p(1.0 / alphaL) / (2.0 * L)
    return RateReport(L=int(L), P=float(P), sigma2=float(sigma2), alphaL=float(alphaL),
                      eps=float(eps), s_used=s_star, pre_limit_rate=pre,
                      asymptotic_rate=asym)


def rho_rate_lower_bound(rho: float, L: int) -> float:
    """(1/2L) log(1 - rho**L) + (1/2) log(1/rho).

    Lower-bounds the asymptotic rate whenever the coefficients decay below
    rho**l; increases to (1/2) log(1/rho) as L grows.
    """
    if not 0.0 < rho < 1.0:
        raise SpecValidationError(f"rho must lie in (0,1), got {rho!r}")
    if L < 1:
        raise SpecValidationError(f"L must be >= 1, got {L!r}")
    return math.log1p(-rho ** L) / (2.0 * L) + 0.5 * math.log(1.0 / rho)


def truncated_rate(l0: int, L: int, snr: float) -> float:
    """(1/2L) log(1 + L*snr), valid once the period clears the memory span."""
    if L < l0:
        raise SpecValidationError(
            f"period L={L} is shorter than the memory span l0={l0}; "
            "the gap does not clear the heating")
    if snr < 0.0:
        raise SpecValidationError(f"snr must be >= 0, got {snr!r}")
    return math.log1p(L * snr) / (2.0 * L)


def beta_tilde(spec: CoefficientSpec, rho: float, l0: int, horizon: int = 256) -> float:
    """Scale constant of the converse's Cauchy output distribution.

    Validates the ratio condition ``alpha_{l+1} / alpha_l >= rho`` for
    l0 <= l <= horizon and ``alpha_{l0} > 0``, evaluates
    ``min(rho**(l0-1) * alpha_{l0} / max_{0 <= l' < l0} alpha_{l'},
    alpha_{l0}, rho**l0)``, and checks the domination inequality
    ``beta_tilde * alpha_l <= alpha_{l + l0}`` over the horizon.
    """
    if not 0.0 < rho < 1.0:
        raise SpecValidationError(f"rho must lie in (0,1), got {rho!r}")
    if l0 < 1 or int(l0) != l0:
        raise SpecValidationError(f"l0 must be an integer >= 1, got {l0!r}")
    l0 = int(l0)
    if horizon < l0 + 1:
        raise SpecValidationError("horizon must exceed l0")
    alphas = spec.eval_range(horizon + l0 + 1)  # alpha_1 .. alpha_{horizon + l0 + 1}

    def a(l):
        return 1.0 if l == 0 else alphas[l - 1]

    if not a(l0) > 0.0:
        raise PreconditionError(f"alpha_{l0} = 0; the ratio condition needs it positive",
                                index=l0)
    for l in range(l0, horizon + 1):
        if a(l) == 0.0 or a(l + 1) / a(l) < rho * (1.0 - _REL_SLACK):
            raise PreconditionError(
                f"ratio alpha_{l + 1}/alpha_{l} falls below rho={rho} at l={l}",
                index=l)
    head_max = max(a(lp) for lp in range(0, l0))
    bt = min(rho ** (l0 - 1) * a(l0) / head_max, a(l0), rho ** l0)
    if not 0.0 < bt < 1.0:
        raise PreconditionError(f"beta_tilde={bt} falls outside (0,1)")
    for l in range(0, horizon + 1):
        if bt * a(l) > a(l + l0) * (1.0 + _REL_SLACK):
            raise PreconditionError(
                f"domination beta_tilde*alpha_{l} <= alpha_{l + l0} fails at l={l}",
                index=l)
    return bt


def _resolve_density(density, support):
    if isinstance(density, NoiseDistribution):
        return density.pdf, density.support()
    if callable(density):
        if support is None:
            raise SpecValidationError("a callable density needs an explicit support")
        return density, (float(support[0]), float(support[1]))
    raise SpecValidationError("density must be a NoiseDistribution or a callable")


def h_minus(density, support=None, *, scan_points: int = 4097,
            abs_tol: float = 1e-9) -> float:
    """Integral of f log f over the region where the density f exceeds 1.

    Zero for any density bounded by 1 (both built-in noise laws).  The
    region is located by scanning `scan_points` samples of f - 1 and
    refining each crossing by bisection, then integrated adaptively.
    """
    pdf, (lo, hi) = _resolve_density(density, support)
    xs = np.linspace(lo, hi, scan_points)
    above = np.asarray(pdf(xs), dtype=float) > 1.0
    if not above.any():
        return 0.0
    # interval edges: refine sign changes of f - 1 between scan samples
    edges = []
    g = lambda x: float(pdf(x)) - 1.0
    for i in range(scan_points - 1):
        if above[i] != above[i + 1]:
            edges.append(brentq(g, xs[i], xs[i + 1], xtol=1e-13))
    starts = [lo] if above[0] else []
    bounds = starts + edges + ([hi] if above[-1] else [])
    total = 0.0
    for a, b in zip(bounds[0::2], bounds[1::2]):
        val, _ = quad(lambda x: pdf(x) * np.log(pdf(x)), a, b,
                      epsabs=abs_tol, limit=200)
        total += val
    return max(0.0, total)


def converse_constant(spec: CoefficientSpec, rho: float, l0: int,
                      noise: NoiseDistribution, delta: float, eta: float,
                      eps_delta_eta: float, horizon: int = 256) -> ConverseReport:
    """Converse-side constant K and the asymptotic upper bound K - log(beta_tilde).

    ``K = (2/eta) h^-(U) - h(U) + 2 eps(delta, eta) + log(2 pi / (beta_tilde
    delta^2))``.  The slack term eps(delta, eta) has no closed form here and
    enters as an explicit input (0 gives the optimistic constant).
    """
    if not 0.0 < delta <= 1.0:
        raise SpecValidationError(f"delta must lie in (0,1], got {delta!r}")
    if not 0.0 < eta < 1.0:
        raise SpecValidationError(f"eta must lie in (0,1), got {eta!r}")
    if eps_delta_eta < 0.0:
        raise SpecValidationError(f"eps(delta,eta) must be >= 0, got {eps_delta_eta!r}")
    bt = beta_tilde(spec, rho, l0, horizon)
    h_noise = noise.entropy()
    hm = h_minus(noise)
    K = (2.0 / eta) * hm - h_noise + 2.0 * eps_delta_eta \
        + math.log(2.0 * math.pi / (bt * delta * delta))
    if not math.isfinite(K):
        raise NumericError("converse constant K is not finite")
    return ConverseReport(rho=float(rho), l0=int(l0), beta_tilde=bt, h_noise=h_noise,
                          h_minus_noise=hm, delta=float(delta), eta=float(eta),
                          eps_delta_eta=float(eps_delta_eta), K=K,
                          bound=K - math.log(bt))


def lemma1_empirical(noise: NoiseDistribution, delta: float, c_grid,
                     trials: int, seed) -> float:
    """Monte Carlo estimate of max over c of E[log(1/|X+c|); |X+c| <= delta].

    The same sample of X is reused across the shift grid (common random
    numbers), and draws landing exactly on zero are excluded (a
    zero-probability event for the built-in densities).
    """
    if not 0.0 < delta <= 1.0:
        raise SpecValidationError(f"delta must lie in (0,1], got {delta!r}")
    if trials < 10_000:
        raise SpecValidationError(f"trials must be >= 10000, got {trials}")
    c_grid = np.atleast_1d(np.asarray(c_grid, dtype=float))
    if c_grid.size == 0:
        raise SpecValidationError("c_grid must be non-empty")
    x = np.asarray(noise.sample(rng_from(seed), trials), dtype=float)
    best = -math.inf
    for c in c_grid:
        t = np.abs(x + c)
        mask = (t <= delta) & (t > 0.0)
        val = float(np.sum(-np.log(t[mask])) / trials)
        best = max(best, val)
    return best
