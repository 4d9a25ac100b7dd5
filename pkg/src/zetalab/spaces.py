"""Weighted sequence-space norms, the telescoping quadratic form, and the
norm-trend experiments for the approximation errors F_m.

Indexing convention: sequence element u(n) (n >= 1) is the coefficient of
z^{n-1}, so its weight is n^alpha.  (The proof-side convention (n+1)^alpha
differs by a factor bounded by 2^|alpha|; boundedness and vanishing
statements are unaffected.)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import approx, ntcore
from .errors import ParameterError
from .ntcore import SieveTables

_FSUM_CAP = 2_000_000  # exact (fsum) accumulation below this length, pairwise above


@dataclass(frozen=True)
class WeightParams:
    p: float
    alpha: float

    def __post_init__(self):
        if not 1.0 <= self.p <= 2.0:
            raise ParameterError(f"p must lie in [1,2], got {self.p}")
        if not math.isfinite(self.alpha):
            raise ParameterError("alpha must be finite")


@dataclass(frozen=True)
class NormResult:
    """Truncated norm plus a rigorous bound on the omitted tail.

    tail_bound is None when no growth envelope was supplied, and +inf when
    the supplied envelope does not give a convergent tail.  When finite, the
    true norm lies in [truncated_value, (truncated_value^p + tail_bound^p)^(1/p)].
    """

    truncated_value: float
    tail_bound: float | None
    truncation_index: int


def _accumulate(terms: np.ndarray) -> float:
    if len(terms) <= _FSUM_CAP:
        return math.fsum(terms)
    return float(np.sum(terms))


def _power_tail(c: float, n_from: int) -> float:
    """Integral-comparison bound: sum_{n > N} n^c <= N^(c+1)/|c+1| for c < -1."""
    if c >= -1.0:
        return math.inf
    return n_from ** (c + 1.0) / abs(c + 1.0)


def weighted_norm(values, w: WeightParams, truncation: int | None = None,
                  envelope: tuple[float, float] | None = None) -> NormResult:
    """(sum_{n=1..truncation} |u(n)|^p n^alpha)^(1/p) with an envelope tail.

    `values` holds u(1), u(2), ... ; `envelope` = (A, b) asserts
    |u(n)| <= A * n^b beyond the truncation.
    """
    u = np.asarray(values, dtype=np.float64)
    if truncation is None:
        truncation = len(u)
    if truncation < 1:
        raise ParameterError("truncation must be >= 1")
    u = np.abs(u[:truncation])
    n = np.arange(1, len(u) + 1, dtype=np.float64)
    p, alpha = w.p, w.alpha
    if p == 1.0:
        terms = u * n**alpha
    elif p == 2.0:
        terms = u * u * n**alpha
    else:
        terms = np.zeros_like(u)
        nz = u > 0
        terms[nz] = np.exp(p * np.log(u[nz]) + alpha * np.log(n[nz]))
    value = _accumulate(terms) ** (1.0 / p)
    tail = None
    if envelope is not None:
        a_env, b_env = envelope
        tail = a_env * _power_tail(b_env * p + alpha, truncation) ** (1.0 / p) \
            if _power_tail(b_env * p + alpha, truncation) < math.inf else math.inf
    return NormResult(value, tail, truncation)


def beurling_quadratic_form(values, s: float, truncation: int | None = None) -> NormResult:
    """sum_n |u(n)|^2 (n^{-2s} - (n+1)^{-2s}), the telescoping quadratic form.

    truncated_value is the form itself (no p-th root); for bounded u the tail
    is sup|u|^2 * (N+1)^{-2s}.
    """
    if s <= 0:
        raise ParameterError("s must be positive")
    u = np.asarray(values, dtype=np.float64)
    if truncation is None:
        truncation = len(u)
    u = np.abs(u[:truncation])
    n = np.arange(1, len(u) + 1, dtype=np.float64)
    weights = n ** (-2.0 * s) - (n + 1.0) ** (-2.0 * s)
    value = _accumulate(u * u * weights)
    sup = float(np.max(u)) if len(u) else 0.0
    tail = sup * sup * (truncation + 1.0) ** (-2.0 * s)
    return NormResult(value, tail, truncation)


def default_truncation(m: int) -> int:
    return max(10**6, m * m)


@dataclass(frozen=True)
class TrendReport:
    w: WeightParams
    per_m: dict[int, NormResult]
    max_value: float
    last_first_ratio: float

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            wtr = csv.writer(fh)
            wtr.writerow(["m", "truncated_value", "tail_bound", "truncation_index"])
            for m, res in sorted(self.per_m.items()):
                wtr.writerow([m, repr(res.truncated_value), repr(res.tail_bound),
                              res.truncation_index])


def fm_norm(m: int, w: WeightParams, tables: SieveTables,
            truncation: int | None = None, chunk: int = 1 << 21) -> NormResult:
    """Norm of F_m under w, streamed in chunks so large truncations stay cheap.

    The tail bound comes from the envelope |F_m(n)| < 2m.
    """
    if truncation is None:
        truncation = default_truncation(m)
    tables.check_range(m, "m")
    prefix = ntcore.mobius_harmonic_prefix(tables, m).value
    mu = tables.mu
    p, alpha = w.p, w.alpha
    chunk_sums = []
    g_offset = 0
    lo = 0
    while lo < truncation:
        hi = min(lo + chunk, truncation)
        size = hi - lo
        delta = np.zeros(size, np.int32)
        for k in range(1, m + 1):
            muk = mu[k]
            if muk:
                start = lo + k - lo % k  # first multiple of k above lo
                if start <= hi:
                    delta[start - lo - 1 :: k] += muk
        g = np.cumsum(delta, dtype=np.int64) + g_offset
        g_offset = int(g[-1])
        n = np.arange(lo + 1, hi + 1, dtype=np.int64)
        f = np.abs(1.0 - g + (m * (n // m)).astype(np.float64) * prefix)
        if lo < m - 1:  # F_m vanishes below the n = m boundary
            f[: min(m - 1 - lo, size)] = 0.0
        nf = n.astype(np.float64)
        if p == 1.0:
            terms = f * nf**alpha
        elif p == 2.0:
            terms = f * f * nf**alpha
        else:
            terms = np.where(f > 0, np.exp(p * np.log(np.where(f > 0, f, 1.0)) + alpha * np.log(nf)), 0.0)
        chunk_sums.append(math.fsum(terms))
        lo = hi
    value = math.fsum(chunk_sums) ** (1.0 / p)
    t = _power_tail(alpha, truncation)
    tail = 2 * m * t ** (1.0 / p) if t < math.inf else math.inf
    return NormResult(value, tail, truncation)


def fm_norm_trend(m_list, w: WeightParams, tables: SieveTables,
                  truncation=None) -> TrendReport:
    """Per-m norms of F_m plus the trend statistics used by the vanishing
    and boundedness experiments.  `truncation` may be an int or a callable m -> int."""
    per_m = {}
    for m in m_list:
        trunc = truncation(m) if callable(truncation) else truncation
        per_m[m] = fm_norm(m, w, tables, trunc)
    ms = sorted(per_m)
    if not ms:
        raise ParameterError("m_list must be nonempty")
    values = [per_m[m].truncated_value for m in ms]
    first = values[0]
    ratio = values[-1] / first if first > 0 else math.inf
    return TrendReport(w, per_m, max(values), ratio)
