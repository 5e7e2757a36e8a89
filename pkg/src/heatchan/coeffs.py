"""Heating-coefficient sequences: evaluation, summation, classification.

A coefficient sequence ``alpha_1, alpha_2, ...`` weights how strongly the
input power transmitted ``l`` steps ago raises the current noise variance.
The built-in families cover the qualitatively different decay regimes:

* ``geometric``   alpha_l = rho**l, 0 < rho < 1 (bounded-capacity regime)
* ``truncated``   alpha_l = level for l < cutoff, 0 afterwards
* ``superexp``    alpha_l = rho**(l*l) (faster-than-exponential decay)
* ``example1``    1 at even indices, 0 at odd indices (mixed regime)
* ``example2``    1 at odd indices, 0 at even positive indices
* ``custom``      explicit list from index 1 up, with a declared tail rule

``alpha_0 = 1`` by convention for every family; the channel law never uses
it but the converse-constant machinery does.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentSumError, SpecValidationError

__all__ = [
    "CoefficientSpec",
    "ClassifyPolicy",
    "Classification",
    "Verdict",
    "eval_coeff",
    "eval_coeff_range",
    "alpha_total",
    "alpha_L",
    "tail_sum_bound",
    "capacity_per_unit_cost",
    "classify",
    "parse_spec",
]

DIVERGENT = math.inf


class Verdict(str, enum.Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class CoefficientSpec:
    """One coefficient family plus its parameters.

    Use the named constructors (:meth:`geometric`, :meth:`truncated`, ...)
    rather than calling the dataclass directly; they validate parameters.
    """

    family: str
    rho: float = 0.0
    cutoff: int = 0
    level: float = 0.0
    values: tuple = ()
    tail: str = "zero"
    label: str = field(default="", compare=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def geometric(cls, rho: float) -> "CoefficientSpec":
        if not 0.0 < rho < 1.0:
            raise SpecValidationError(f"geometric rho must lie in (0,1), got {rho!r}")
        return cls("geometric", rho=float(rho), label=f"geometric:{rho:g}")

    @classmethod
    def truncated(cls, cutoff: int, level: float) -> "CoefficientSpec":
        if int(cutoff) != cutoff or cutoff < 1:
            raise SpecValidationError(f"truncated cutoff must be an integer >= 1, got {cutoff!r}")
        if not level > 0.0:
            raise SpecValidationError(f"truncated level must be > 0, got {level!r}")
        return cls("truncated", cutoff=int(cutoff), level=float(level),
                   label=f"truncated:{int(cutoff)}:{level:g}")

    @classmethod
    def superexponential(cls, rho: float) -> "CoefficientSpec":
        if not 0.0 < rho < 1.0:
            raise SpecValidationError(f"superexp rho must lie in (0,1), got {rho!r}")
        return cls("superexp", rho=float(rho), label=f"superexp:{rho:g}")

    @classmethod
    def even_one(cls) -> "CoefficientSpec":
        return cls("example1", label="example1")

    @classmethod
    def odd_one(cls) -> "CoefficientSpec":
        return cls("example2", label="example2")

    @classmethod
    def custom(cls, values, tail: str = "zero", label: str = "") -> "CoefficientSpec":
        vals = tuple(float(v) for v in values)
        if any(v < 0.0 for v in vals):
            raise SpecValidationError("custom coefficients must be non-negative")
        if any(not math.isfinite(v) for v in vals):
            raise SpecValidationError("custom coefficients must be finite")
        if tail not in ("zero", "geometric"):
            raise SpecValidationError(f"tail rule must be 'zero' or 'geometric', got {tail!r}")
        if tail == "geometric":
            if len(vals) < 2 or vals[-1] <= 0.0 or vals[-2] <= 0.0:
                raise SpecValidationError(
                    "geometric tail continuation needs two positive trailing entries")
            if vals[-1] / vals[-2] > 1.0:
                raise SpecValidationError(
                    "geometric tail ratio > 1 violates coefficient boundedness")
        return cls("custom", values=vals, tail=tail, label=label or "custom")

    # -- evaluation ---------------------------------------------------------

    def eval(self, ell: int) -> float:
        """alpha_ell for ell >= 0 (alpha_0 = 1 by convention)."""
        if ell < 0:
            raise SpecValidationError(f"coefficient index must be >= 0, got {ell}")
        if ell == 0:
            return 1.0
        f = self.family
        if f == "geometric":
            return self.rho ** ell
        if f == "truncated":
            return self.level if ell < self.cutoff else 0.0
        if f == "superexp":
            # rho**(ell*ell) underflows to exactly 0 for large ell; the
            # classifier's 0/0 convention absorbs that.
            return self.rho ** (ell * ell)
        if f == "example1":
            return 1.0 if ell % 2 == 0 else 0.0
        if f == "example2":
            return 1.0 if ell % 2 == 1 else 0.0
        if f == "custom":
            if ell <= len(self.values):
                return self.values[ell - 1]
            if self.tail == "zero" or not self.values:
                return 0.0
            ratio = self.values[-1] / self.values[-2]
            return self.values[-1] * ratio ** (ell - len(self.values))
        raise SpecValidationError(f"unknown coefficient family {f!r}")

    def eval_range(self, n: int) -> np.ndarray:
        """Vector (alpha_1, ..., alpha_n)."""
        if n <= 0:
            return np.zeros(0)
        ells = np.arange(1, n + 1)
        f = self.family
        if f == "geometric":
            return self.rho ** ells.astype(float)
        if f == "truncated":
            return np.where(ells < self.cutoff, self.level, 0.0)
        if f == "superexp":
            with np.errstate(under="ignore"):
                return self.rho ** (ells.astype(float) ** 2)
        if f == "example1":
            return (ells % 2 == 0).astype(float)
        if f == "example2":
            return (ells % 2 == 1).astype(float)
        return np.array([self.eval(int(l)) for l in ells])

    @property
    def sup_bound(self) -> float:
        """A constant bounding every alpha_ell (family-specific)."""
        if self.family in ("geometric", "superexp"):
            return 1.0
        if self.family == "truncated":
            return max(1.0, self.level)
        if self.family in ("example1", "example2"):
            return 1.0
        return max((1.0, *self.values))


def eval_coeff(spec: CoefficientSpec, ell: int) -> float:
    return spec.eval(ell)


def eval_coeff_range(spec: CoefficientSpec, n: int) -> np.ndarray:
    return spec.eval_range(n)


# -- lattice sums -----------------------------------------------------------


def alpha_L(spec: CoefficientSpec, L: int, tol: float = 1e-12) -> float:
    """Sum of alpha_{l*L} over l >= 1, to within `tol`.

    Returns ``math.inf`` when the lattice sum diverges (the tail cannot be
    bounded below `tol`), e.g. for the example1 family at any period.
    """
    if L < 1 or int(L) != L:
        raise SpecValidationError(f"period L must be an integer >= 1, got {L!r}")
    if not tol > 0.0:
        raise SpecValidationError("tol must be > 0")
    L = int(L)
    f = spec.family
    if f == "geometric":
        r = spec.rho ** L
        return r / (1.0 - r)
    if f == "truncated":
        # nonzero exactly at lattice points l*L <= cutoff-1
        return spec.level * ((spec.cutoff - 1) // L)
    if f == "superexp":
        logr = math.log(spec.rho)
        total = 0.0
        ratio_cap = math.exp(logr * L * L)  # term ratio is <= rho**(L*L)
        for l in range(1, 100000):
            term = math.exp(logr * (l * L) ** 2)
            total += term
            tail_bound = term * ratio_cap / (1.0 - ratio_cap)
            if tail_bound < tol:
                return total
        raise DivergentSumError("superexp lattice sum failed to certify its tail")
    if f == "example1":
        # every period hits infinitely many even indices
        return DIVERGENT
    if f == "example2":
        return 0.0 if L % 2 == 0 else DIVERGENT
    if f == "custom":
        n_given = len(spec.values)
        total = sum(spec.values[l * L - 1] for l in range(1, n_given // L + 1))
        if spec.tail == "zero" or n_given == 0:
            return total
        ratio = spec.values[-1] / spec.values[-2]
        if ratio >= 1.0:
            return DIVERGENT
        first = (n_given // L + 1) * L
        rl = ratio ** L
        return total + spec.values[-1] * ratio ** (first - n_given) / (1.0 - rl)
    raise SpecValidationError(f"unknown coefficient family {f!r}")


def alpha_total(spec: CoefficientSpec, tol: float = 1e-12) -> float:
    """Sum of alpha_l over l >= 1 (``math.inf`` when divergent)."""
    return alpha_L(spec, 1, tol)


def tail_sum_bound(spec: CoefficientSpec, start: int) -> float:
    """Certified upper bound on the tail sum of alpha_l over l >= start."""
    if start < 1:
        raise SpecValidationError("start must be >= 1")
    f = spec.family
    if f == "geometric":
        return spec.rho ** start / (1.0 - spec.rho)
    if f == "truncated":
        return spec.level * max(0, spec.cutoff - start)
    if f == "superexp":
        # alpha_l <= rho**(start*l) for l >= start
        r = spec.rho ** start
        return r ** start / (1.0 - r)
    if f in ("example1", "example2"):
        return DIVERGENT
    if f == "custom":
        finite = sum(spec.values[start - 1:])
        if spec.tail == "zero" or not spec.values:
            return finite
        ratio = spec.values[-1] / spec.values[-2]
        if ratio >= 1.0:
            return DIVERGENT
        n_given = len(spec.values)
        geom_tail = spec.values[-1] * ratio / (1.0 - ratio)
        if start <= n_given:
            return finite + geom_tail
        return spec.values[-1] * ratio ** (start - n_given) / (1.0 - ratio)
    raise SpecValidationError(f"unknown coefficient family {f!r}")


def capacity_per_unit_cost(spec: CoefficientSpec, tol: float = 1e-12) -> float:
    """(1 + alpha) / 2 in nats per unit SNR; inf when alpha diverges."""
    return (1.0 + alpha_total(spec, tol)) / 2.0


# -- boundedness classification ----------------------------------------------


@dataclass(frozen=True)
class ClassifyPolicy:
    """Thresholds for the finite-horizon boundedness heuristic."""

    positive_floor: float = 1e-6
    zero_ceiling: float = 1e-6
    divergence_threshold: float = 20.0


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    liminf_ratio_estimate: float
    limsup_ratio_estimate: float
    decay_stat: float
    horizon: int


def _ratio(num: float, den: float) -> float:
    # conventions: a/0 = inf for a > 0, 0/0 = 0
    if den == 0.0:
        return math.inf if num > 0.0 else 0.0
    return num / den


def classify(spec: CoefficientSpec, horizon: int,
             policy: ClassifyPolicy = ClassifyPolicy()) -> Classification:
    """Finite-horizon estimate of the bounded/unbounded capacity dichotomy.

    Successive-coefficient ratios are scanned over the tail window
    ``[horizon // 2, horizon]``.  The verdict is Bounded when every tail
    ratio stays above ``positive_floor``, Unbounded when either all tail
    ratios collapse below ``zero_ceiling`` or the per-index decay exponent
    ``log(1 / alpha_l) / l`` stays above ``divergence_threshold`` across the
    whole window, and Indeterminate otherwise.  Indeterminate is an honest
    output: the asymptotic conditions are not decidable from finitely many
    terms.
    """
    if horizon < 16:
        raise SpecValidationError(f"horizon must be >= 16, got {horizon}")
    lo = horizon // 2
    alphas = spec.eval_range(horizon + 1)  # alpha_1 .. alpha_{horizon+1}
    ratios = [_ratio(alphas[l], alphas[l - 1]) for l in range(lo, horizon + 1)]
    liminf_est = min(ratios)
    limsup_est = max(ratios)
    decay_terms = []
    for l in range(lo, horizon + 1):
        a = alphas[l - 1]
        decay_terms.append(math.inf if a == 0.0 else -math.log(a) / l)
    decay_stat = min(decay_terms)

    if liminf_est >= policy.positive_floor:
        verdict = Verdict.BOUNDED
    elif limsup_est <= policy.zero_ceiling or decay_stat >= policy.divergence_threshold:
        verdict = Verdict.UNBOUNDED
    else:
        verdict = Verdict.INDETERMINATE
    return Classification(verdict, liminf_est, limsup_est, decay_stat, horizon)


# -- text syntax --------------------------------------------------------------


def parse_spec(text: str) -> CoefficientSpec:
    """Parse the coefficient spec syntax used by the CLI and config files.

    ``geometric:0.5`` | ``truncated:4:1.0`` | ``superexp:0.5`` |
    ``example1`` | ``example2`` | ``custom:<path>`` where the file holds one
    non-negative decimal per line (index 1 upward) after an optional header
    line ``tail=zero`` or ``tail=geometric``.
    """
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "geometric" and len(parts) == 2:
            return CoefficientSpec.geometric(float(parts[1]))
        if kind == "truncated" and len(parts) == 3:
            return CoefficientSpec.truncated(int(parts[1]), float(parts[2]))
        if kind == "superexp" and len(parts) == 2:
            return CoefficientSpec.superexponential(float(parts[1]))
        if kind == "example1" and len(parts) == 1:
            return CoefficientSpec.even_one()
        if kind == "example2" and len(parts) == 1:
            return CoefficientSpec.odd_one()
        if kind == "custom" and len(parts) >= 2:
            path = ":".join(parts[1:])
            return _load_custom(path)
    except SpecValidationError:
        raise
    except ValueError as exc:
        raise SpecValidationError(f"bad coefficient spec {text!r}: {exc}") from exc
    raise SpecValidationError(
        f"unrecognized coefficient spec {text!r}; expected geometric:RHO, "
        "truncated:CUTOFF:LEVEL, superexp:RHO, example1, example2, or custom:PATH")


def _load_custom(path: str) -> CoefficientSpec:
    tail = "zero"
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("tail="):
                tail = line.split("=", 1)[1].strip()
                continue
            values.append(float(line))
    return CoefficientSpec.custom(values, tail=tail, label=f"custom:{path}")
