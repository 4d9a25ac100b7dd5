"""Riemann zeta on Re(s) > 0, the Beurling integral identity, and the
Mobius-sum growth-condition scanner with resumable checkpoints.

Scan reports describe results as "verified for scanned range" only: a finite
scan corroborates the growth hypothesis on the scanned pairs and can never
establish it for all m.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import approx, kernels, ntcore
from .approx import AdmissibleCombo
from .errors import CheckpointError, OutOfRangeError, ParameterError
from .ntcore import MobiusPrefix, SieveTables


class AccuracyWarning(UserWarning):
    """Raised when an evaluation leaves its documented accuracy window."""


# --- zeta ------------------------------------------------------------------

ZETA_RE_MIN = 0.3
ZETA_IM_MAX = 100.0


@lru_cache(maxsize=32)
def _eta_coefficients(n: int) -> tuple:
    """Alternating-series acceleration weights e_k = (d_k - d_n)/d_n.

    d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), computed exactly in
    big integers so the float weights carry no cancellation error.
    """
    fact = math.factorial
    d = []
    acc = 0
    for i in range(n + 1):
        acc += fact(n + i - 1) * 4**i // (fact(n - i) * fact(2 * i))
        d.append(n * acc)
    dn = d[-1]
    return tuple(float(Fraction(dk - dn, dn)) for dk in d[:-1])


def zeta_eval(s: complex) -> complex:
    """zeta(s) for Re(s) > 0, s != 1, via the accelerated eta series.

    Documented window: Re(s) >= 0.3 and |Im(s)| <= 100 (relative error
    <= 1e-10 inside); outside, an AccuracyWarning is emitted.
    """
    s = complex(s)
    if s == 1:
        raise ParameterError("zeta has a pole at s = 1")
    if s.real <= 0:
        raise ParameterError("zeta_eval requires Re(s) > 0")
    if s.real < ZETA_RE_MIN or abs(s.imag) > ZETA_IM_MAX:
        warnings.warn(f"s={s} outside the documented accuracy window", AccuracyWarning)
    n = 48 + int(math.ceil(0.95 * abs(s.imag)))
    e = np.array(_eta_coefficients(n))
    k = np.arange(1, n + 1, dtype=np.float64)
    powers = np.exp(-s * np.log(k))
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    eta = -np.sum(signs * e * powers)
    value = eta / (1.0 - 2.0 ** (1.0 - s))
    return complex(value)


# --- Beurling integral identity -------------------------------------------

@dataclass(frozen=True)
class BoundedComplex:
    value: complex
    tail_bound: float
    truncation_index: int


def beurling_lhs(combo: AdmissibleCombo, s: complex, truncation: int = 10**6) -> BoundedComplex:
    """sum_n S(n) (n^{-s} - (n+1)^{-s})/s where S(n) = 1 + f(1/n) for the
    admissible step function f; explicitly S(n) = 1 + sum_{k>=2} (c_k/k) r_k(n).

    The tail uses |S(n)| <= 1 + sum_{k>=2} |c_k| (each r_k(n)/k < 1) and the
    telescoping majorant on |n^{-s} - (n+1)^{-s}|.
    """
    s = complex(s)
    if s.real <= 0:
        raise ParameterError("requires Re(s) > 0")
    n = np.arange(1, truncation + 1, dtype=np.float64)
    S = np.ones(truncation)
    for k, ck in enumerate(combo.tail_coefficients(), start=2):
        S += (float(ck) / k) * (np.arange(1, truncation + 1) % k)
    log_n = np.log(n)
    pows = np.exp(-s * log_n)
    pows1 = np.exp(-s * np.log(n + 1.0))
    value = complex(np.sum(S * (pows - pows1)) / s)
    bound_s = 1.0 + sum(abs(float(ck)) for ck in combo.tail_coefficients())
    tail = bound_s * (truncation + 1.0) ** (-s.real) / s.real
    return BoundedComplex(value, tail, truncation)


def beurling_rhs(combo: AdmissibleCombo, s: complex) -> complex:
    """(1 - zeta(s) * sum_{k>=1} c_k k^{-s}) / s.

    The k = 1 coefficient must be included: term by term the fractional-part
    integral is -zeta(s) k^{-s}/s + 1/(k(s-1)), and only the second parts
    cancel under the admissibility constraint sum c_k/k = 0.
    """
    s = complex(s)
    dirichlet = sum(complex(ck) * complex(k) ** (-s)
                    for k, ck in enumerate(combo.c, start=1))
    return (1.0 - zeta_eval(s) * dirichlet) / s


# --- condition (6) ---------------------------------------------------------

@dataclass(frozen=True)
class OmegaSpec:
    """Affine nondecreasing weight omega(t) = c0 + c1*t on [0, inf)."""

    c0: float
    c1: float

    def __post_init__(self):
        if self.c1 < 0:
            raise ParameterError("c1 must be >= 0 (omega nondecreasing)")
        if not math.isfinite(self.c0 + 0.5 * self.c1):
            raise ParameterError("omega(1/2) must be finite")

    def __call__(self, t: float) -> float:
        return self.c0 + self.c1 * t

    def label(self) -> str:
        return f"{self.c0:g}+{self.c1:g}t"


def _rhs_value(m: int, n: int, s: float, omega: OmegaSpec, t: float) -> float:
    return (m**s + n**s / math.sqrt(math.log(n)) + (n / m) ** (s / (1 - s))) * omega(t)


def condition6_check(m: int, n: int, s: float, omega: OmegaSpec,
                     tables: SieveTables, prefix: MobiusPrefix):
    """Pointwise check |G(n,m)| <= rhs; near-threshold cases re-adjudicated
    with an exact rational prefix and 50-digit arithmetic."""
    if not 0.5 <= s < 1.0:
        raise ParameterError("s must lie in [1/2, 1)")
    if n < 2 or m < 2:
        raise ParameterError("need n >= 2 and m >= 2")
    if prefix.m != m:
        raise ParameterError(f"prefix is for m={prefix.m}, not {m}")
    lhs = abs(approx.G_mertens(n, m, tables))
    rhs = _rhs_value(m, n, s, omega, prefix.scaled_t)
    if abs(lhs - rhs) <= rhs * kernels.NEAR_MARGIN:
        ok = _adjudicate(m, n, lhs, s, omega, tables)
    else:
        ok = lhs <= rhs
    return lhs, rhs, ok


def _adjudicate(m: int, n: int, lhs: int, s: float, omega: OmegaSpec,
                tables: SieveTables) -> bool:
    """Settle a near-threshold comparison: exact t, 50-digit right-hand side."""
    t_exact = m * abs(ntcore.exact_mobius_harmonic(tables, m))
    with mpmath.workdps(50):
        t = mpmath.mpf(t_exact.numerator) / t_exact.denominator
        ms = mpmath.mpf(s)
        rhs = (mpmath.mpf(m) ** ms + mpmath.mpf(n) ** ms / mpmath.sqrt(mpmath.log(n))
               + (mpmath.mpf(n) / m) ** (ms / (1 - ms))) * (omega.c0 + omega.c1 * t)
        return mpmath.mpf(lhs) <= rhs


@dataclass
class ScanReport:
    s: float
    omega: OmegaSpec
    m_lo: int
    m_hi: int
    n_cap: int
    violations: list  # (m, n, lhs, rhs)
    max_ratio: float
    max_arg: tuple[int, int]
    checkpoints: list = field(default_factory=list)
    per_m_maxima: dict[int, float] = field(default_factory=dict)

    @property
    def region_label(self) -> str:
        return f"Re(z) > {self.s:g} (verified for scanned range only)"

    def to_json_dict(self) -> dict:
        return {
            "params": {"s": self.s, "omega": self.omega.label(),
                       "m_lo": self.m_lo, "m_hi": self.m_hi, "n_cap": self.n_cap},
            "region_label": self.region_label,
            "violations": [list(v) for v in self.violations],
            "max_ratio": self.max_ratio,
            "max_arg": list(self.max_arg),
            "checkpoints": list(self.checkpoints),
        }

    def per_m_csv_rows(self):
        for m in sorted(self.per_m_maxima):
            yield m, self.per_m_maxima[m]


class _ScanArrays:
    """Shared read-only inputs for the scan kernels, built once per sieve."""

    def __init__(self, tables: SieveTables, n_cap: int):
        if n_cap > tables.limit:
            raise OutOfRangeError(f"n_cap {n_cap} exceeds sieve limit {tables.limit}")
        self.mert = tables.mertens[: n_cap + 1].astype(np.int64)
        mu_over_k = np.zeros(n_cap + 1)
        k = np.arange(1, n_cap + 1)
        mu_over_k[1:] = tables.mu[1 : n_cap + 1] / k
        prefix = np.cumsum(mu_over_k)
        self.t = np.abs(prefix) * np.arange(n_cap + 1, dtype=np.float64)
        # cumsum rounding: <= n*eps on a partial-sum magnitude <= 1
        err = 2.0 * np.finfo(np.float64).eps * np.arange(n_cap + 1, dtype=np.float64)
        t_lo = np.maximum(self.t - np.arange(n_cap + 1) * err, 0.0)
        self.mmin = kernels.build_sparse_min(self.mert)
        self.mmax = kernels.build_sparse_max(self.mert)
        self.tmin = kernels.build_sparse_min(t_lo)
        self.lg = kernels.build_log_table(n_cap)


def _params_digest(s, omega, m_lo, m_hi, n_cap, chunk_size):
    blob = json.dumps([s, omega.c0, omega.c1, m_lo, m_hi, n_cap, chunk_size])
    return hashlib.sha256(blob.encode()).hexdigest()


def condition6_scan(m_range: tuple[int, int], n_cap: int, s: float, omega: OmegaSpec,
                    tables: SieveTables, parallelism: int = 1,
                    checkpoint_path: str | None = None, chunk_size: int = 8192,
                    per_m_detail: bool = False) -> ScanReport:
    """Exhaustive scan of the growth condition over m in m_range, n in
    (m, min(m^(1/s), n_cap)].

    Chunks of the m-range run on a thread pool (the kernels drop the GIL);
    results merge in ascending m order, so the report is identical for any
    worker count and chunk size.  With a checkpoint path, completed chunks
    are persisted and a later call resumes after the last finished prefix.
    """
    if not 0.5 <= s < 1.0:
        raise ParameterError("s must lie in [1/2, 1)")
    m_lo, m_hi = m_range
    if m_lo > m_hi:
        return ScanReport(s, omega, m_lo, m_hi, n_cap, [], 0.0, (0, 0))
    m_lo = max(m_lo, 2)
    arrays = _ScanArrays(tables, n_cap)
    digest = _params_digest(s, omega, m_lo, m_hi, n_cap, chunk_size)

    chunks = []
    lo = m_lo
    while lo <= m_hi:
        chunks.append((lo, min(lo + chunk_size - 1, m_hi)))
        lo += chunk_size

    done: dict[int, dict] = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        done = _load_checkpoint(checkpoint_path, digest)

    def run(chunk):
        clo, chi = chunk
        best, am, an, cm, cn, ncand, overflow = kernels.scan_chunk(
            arrays.mert, arrays.t, arrays.mmin, arrays.mmax, arrays.tmin,
            arrays.lg, clo, chi, n_cap, s, omega.c0, omega.c1)
        if overflow:
            raise ParameterError("candidate buffer overflow; scan chunk too dense")
        return {"lo": clo, "hi": chi, "best": best, "arg": [int(am), int(an)],
                "cands": [[int(a), int(b)] for a, b in zip(cm, cn)]}

    pending = [c for c in chunks if c[0] not in done]
    results = dict(done)
    if pending:
        with ThreadPoolExecutor(max_workers=max(parallelism, 1)) as pool:
            for res in pool.map(run, pending):
                results[res["lo"]] = res
                if checkpoint_path:
                    _save_checkpoint(checkpoint_path, digest, results, chunks)

    max_ratio, max_arg = 0.0, (0, 0)
    candidates = []
    checkpoints = []
    for clo, chi in chunks:
        res = results[clo]
        checkpoints.append(chi + 1)
        if res["best"] > max_ratio:
            max_ratio = res["best"]
            max_arg = tuple(res["arg"])
        candidates.extend((m, n) for m, n in res["cands"])

    violations = []
    for m, n in sorted(candidates):
        lhs = abs(approx.G_mertens(n, m, tables))
        if not _adjudicate(m, n, lhs, s, omega, tables):
            prefix = ntcore.mobius_harmonic_prefix(tables, m)
            violations.append((m, n, lhs, _rhs_value(m, n, s, omega, prefix.scaled_t)))

    report = ScanReport(s, omega, m_lo, m_hi, n_cap, violations,
                        max_ratio, max_arg, checkpoints)
    if per_m_detail:
        ratios = kernels.per_m_max_ratios(
            arrays.mert, arrays.t, tables.spf.astype(np.int64),
            tables.mu.astype(np.int64), m_lo, m_hi, n_cap, s, omega.c0, omega.c1)
        report.per_m_maxima = {m_lo + i: float(v) for i, v in enumerate(ratios)}
    return report


def _save_checkpoint(path: str, digest: str, results: dict, chunks) -> None:
    finished = sorted(results)
    next_m = None
    for clo, chi in chunks:
        if clo not in results:
            next_m = clo
            break
    payload = {"digest": digest, "next_m": next_m,
               "results": {str(k): v for k, v in results.items()}}
    payload["partial_report_digest"] = hashlib.sha256(
        json.dumps(payload["results"], sort_keys=True).encode()).hexdigest()
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def _load_checkpoint(path: str, digest: str) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
        if payload["digest"] != digest:
            raise CheckpointError("checkpoint was written for different scan parameters")
        expect = hashlib.sha256(
            json.dumps(payload["results"], sort_keys=True).encode()).hexdigest()
        if payload["partial_report_digest"] != expect:
            raise CheckpointError("checkpoint digest mismatch (corrupt file)")
        return {int(k): v for k, v in payload["results"].items()}
    except (json.JSONDecodeError, KeyError, OSError) as exc:
        raise CheckpointError(f"cannot resume from {path}: {exc}") from exc
