"""Periodic random Gaussian codebooks with nearest-neighbor decoding.

A codeword of block length n is zero everywhere except at the active slots
1, L+1, 2L+1, ... where entries are drawn IID Gaussian.  Decoding compares
the received sequence to each codeword over the active slots only and picks
the closest in squared Euclidean distance, breaking exact ties with a fair
coin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .channel import ChannelParams, simulate_block
from .coeffs import CoefficientSpec
from .errors import ResourceLimitError, SpecValidationError
from .rng import as_seedseq, child, rng_from, run_indexed

__all__ = [
    "SchemeParams",
    "Codebook",
    "ErrorEstimate",
    "generate_codebook",
    "power_violation_fraction",
    "nn_decode",
    "scheme_error_probability",
    "wilson_interval",
]

# Codebook rows are drawn in fixed chunks keyed by (seed, chunk index) so
# that large books can be streamed without materialization and a single row
# can be regenerated cheaply.  Changing this constant changes codebooks.
CODEBOOK_CHUNK = 1 << 20

DEFAULT_MEMORY_BUDGET = 4 << 30  # bytes of active-entry storage per codebook

# stream tags under the caller's seed
_T_CODEBOOK, _T_MESSAGE, _T_CHANNEL, _T_TIE = 0, 1, 2, 3


@dataclass(frozen=True)
class SchemeParams:
    """Coding-scheme parameters: period, power budget, book size, block length."""

    L: int
    P: float
    message_count: int
    n: int

    def __post_init__(self):
        if self.L < 1:
            raise SpecValidationError(f"period L must be >= 1, got {self.L}")
        if self.P < 0.0:
            raise SpecValidationError(f"power budget must be >= 0, got {self.P}")
        if self.message_count < 1:
            raise SpecValidationError("message_count must be >= 1")
        if self.n < 1:
            raise SpecValidationError("block length n must be >= 1")
        if self.n < self.L:
            raise SpecValidationError("block length n must be >= period L")

    @property
    def active_count(self) -> int:
        return self.n // self.L

    @property
    def active_indices(self) -> np.ndarray:
        """0-based positions of the active slots kL+1, k = 0..floor(n/L)-1."""
        return np.arange(self.active_count) * self.L

    @property
    def rate_nats(self) -> float:
        return math.log(self.message_count) / self.n

    def active_variance(self, mode: str = "lp") -> float:
        """Per-slot codeword variance: full budget L*P ('lp') or plain P ('p')."""
        if mode == "lp":
            return self.L * self.P
        if mode == "p":
            return self.P
        raise SpecValidationError(f"variance mode must be 'lp' or 'p', got {mode!r}")


@dataclass(frozen=True)
class Codebook:
    """Materialized codebook; `active` holds the (messages, slots) entries."""

    active: np.ndarray
    n: int
    L: int
    variance: float

    @property
    def message_count(self) -> int:
        return self.active.shape[0]

    @property
    def active_indices(self) -> np.ndarray:
        return np.arange(self.active.shape[1]) * self.L

    def full(self) -> np.ndarray:
        """Dense (messages, n) codewords with zeros at inactive slots."""
        out = np.zeros((self.message_count, self.n), dtype=self.active.dtype)
        out[:, self.active_indices] = self.active
        return out


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo block-error estimate with a Wilson 95% interval."""

    trials: int
    errors: int
    err_prob: float
    ci_lo: float
    ci_hi: float


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise SpecValidationError("trials must be >= 1")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def _chunk_rows(seed_cb, chunk_index: int, rows: int, slots: int, dtype,
                out: np.ndarray | None = None) -> np.ndarray:
    """Unscaled standard-normal rows of one codebook chunk."""
    rng = rng_from(child(seed_cb, chunk_index))
    if out is None:
        return rng.standard_normal((rows, slots), dtype=dtype)
    view = out[:rows]
    rng.standard_normal(dtype=dtype, out=view)
    return view


def generate_codebook(params: SchemeParams, variance: float, seed,
                      dtype=np.float64, max_bytes: int = DEFAULT_MEMORY_BUDGET) -> Codebook:
    """Draw a full codebook; deterministic in seed.

    Active entries are IID N(0, variance) across messages and slots.  Raises
    :class:`ResourceLimitError` when the active-entry storage
    ``message_count * floor(n/L) * itemsize`` exceeds `max_bytes`.
    """
    if not variance >= 0.0:
        raise SpecValidationError(f"variance must be >= 0, got {variance!r}")
    dtype = np.dtype(dtype)
    m = params.active_count
    nbytes = params.message_count * m * dtype.itemsize
    if nbytes > max_bytes:
        raise ResourceLimitError(
            f"codebook needs {nbytes} bytes of active entries "
            f"({params.message_count} x {m}), over the {max_bytes}-byte budget")
    seed_cb = as_seedseq(seed)
    scale = dtype.type(math.sqrt(variance))
    active = np.empty((params.message_count, m), dtype=dtype)
    for ci, lo in enumerate(range(0, params.message_count, CODEBOOK_CHUNK)):
        hi = min(lo + CODEBOOK_CHUNK, params.message_count)
        active[lo:hi] = _chunk_rows(seed_cb, ci, hi - lo, m, dtype)
    active *= scale
    return Codebook(active=active, n=params.n, L=params.L, variance=float(variance))


def power_violation_fraction(cb: Codebook, P: float) -> float:
    """Fraction of codewords whose per-block average power exceeds P."""
    block_power = (cb.active.astype(np.float64) ** 2).sum(axis=1) / cb.n
    return float(np.mean(block_power > P))


def nn_decode(cb: Codebook, y, seed) -> int:
    """Nearest codeword to y over the active slots; exact ties by fair coin.

    Returns the 0-based message index.
    """
    y = np.asarray(y, dtype=float)
    if y.size != cb.n:
        raise SpecValidationError(f"need len(y) == n == {cb.n}, got {y.size}")
    ya = y[cb.active_indices].astype(cb.active.dtype)
    diff = cb.active - ya
    d = np.einsum("ij,ij->i", diff, diff)
    best = d.min()
    ties = np.flatnonzero(d == best)
    if ties.size == 1:
        return int(ties[0])
    return int(ties[rng_from(seed).integers(ties.size)])


def _scheme_trial(t: int, spec: CoefficientSpec, params: ChannelParams,
                  scheme: SchemeParams, variance: float, root, dtype,
                  fixed_codebook_seed) -> int:
    """One Monte Carlo trial; returns 1 on block error, else 0.

    The codebook is streamed chunk by chunk: scores
    ``|x'|^2 - 2 <y, x'>`` order messages identically to squared distances,
    so only the running minimum, its tie count, and the transmitted
    codeword's own score are kept.
    """
    dtype = np.dtype(dtype)
    seed_cb = fixed_codebook_seed if fixed_codebook_seed is not None \
        else child(root, _T_CODEBOOK, t)
    M = scheme.message_count
    m = scheme.active_count
    msg = int(rng_from(child(root, _T_MESSAGE, t)).integers(M))

    scale = dtype.type(math.sqrt(variance))
    # the transmitted codeword's chunk is needed up front (the channel heats
    # before decoding); keep it so the scoring pass does not redraw it
    msg_chunk = msg // CODEBOOK_CHUNK
    lo = msg_chunk * CODEBOOK_CHUNK
    hi = min(lo + CODEBOOK_CHUNK, M)
    g_msg = _chunk_rows(seed_cb, msg_chunk, hi - lo, m, dtype)
    row = g_msg[msg - lo] * scale

    x = np.zeros(scheme.n)
    x[scheme.active_indices] = row.astype(np.float64)
    y = simulate_block(spec, params, x, child(root, _T_CHANNEL, t))
    ya = y[scheme.active_indices].astype(dtype)

    var_c = dtype.type(variance)
    two_scale = dtype.type(2.0 * math.sqrt(variance))
    best = np.inf
    tie_count = 0
    own_score = None
    buf = np.empty((min(CODEBOOK_CHUNK, M), m), dtype=dtype)
    for ci, clo in enumerate(range(0, M, CODEBOOK_CHUNK)):
        chi = min(clo + CODEBOOK_CHUNK, M)
        if ci == msg_chunk:
            g = g_msg
        else:
            g = _chunk_rows(seed_cb, ci, chi - clo, m, dtype, out=buf)
        scores = var_c * np.einsum("ij,ij->i", g, g) - two_scale * (g @ ya)
        if clo <= msg < chi:
            own_score = float(scores[msg - clo])
            scores[msg - clo] = np.inf
        cmin = float(scores.min())
        if cmin < best:
            best = cmin
            tie_count = int(np.count_nonzero(scores == cmin))
        elif cmin == best:
            tie_count += int(np.count_nonzero(scores == cmin))
    if M == 1:
        return 0
    if best < own_score:
        return 1
    if best == own_score:
        # fair coin among the tie_count + 1 tied codewords
        u = rng_from(child(root, _T_TIE, t)).random()
        return int(u >= 1.0 / (tie_count + 1))
    return 0


def scheme_error_probability(spec: CoefficientSpec, params: ChannelParams,
                             scheme: SchemeParams, variance: float, trials: int,
                             seed, *, redraw_codebook: bool = True,
                             dtype=np.float64, workers: int = 1,
                             max_bytes: int = DEFAULT_MEMORY_BUDGET) -> ErrorEstimate:
    """Monte Carlo block-error probability of the periodic Gaussian scheme.

    Each trial draws a fresh codebook (matching the averaged-over-codebooks
    error quantity), a uniform message, transmits through the heating
    channel, and decodes by nearest neighbor over the active slots.  Set
    ``redraw_codebook=False`` to fix one codebook across trials for
    variance-reduction studies.

    Deterministic in (seed, parameters): trials derive independent
    substreams, so any worker count produces the identical estimate.
    """
    if trials < 1:
        raise SpecValidationError("trials must be >= 1")
    dt = np.dtype(dtype)
    nbytes = scheme.message_count * scheme.active_count * dt.itemsize
    if nbytes > max_bytes:
        raise ResourceLimitError(
            f"codebook needs {nbytes} bytes of active entries, over the "
            f"{max_bytes}-byte budget")
    root = as_seedseq(seed)
    fixed_cb = None if redraw_codebook else child(root, _T_CODEBOOK)
    fn = partial(_scheme_trial, spec=spec, params=params, scheme=scheme,
                 variance=float(variance), root=root, dtype=dt,
                 fixed_codebook_seed=fixed_cb)
    flags = run_indexed(trials, fn, workers)
    errors = int(sum(flags))
    lo, hi = wilson_interval(errors, trials)
    return ErrorEstimate(trials=trials, errors=errors,
                         err_prob=errors / trials, ci_lo=lo, ci_hi=hi)
