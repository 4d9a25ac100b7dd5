"""Number-theoretic kernels: sieves, Mertens lookups, Mobius harmonic prefixes,
Selberg sign-change points, primorials and coprime counting.

All tables are built once by a linear sieve and are immutable afterwards;
every query below is a pure read, so a single SieveTables instance can be
shared freely across worker threads.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import CapacityError, OutOfRangeError, ParameterError

_EPS = np.finfo(np.float64).eps

# bytes per sieve entry: mu(i8) + omega(i8) + spf(i32) + phi(i32) + mertens(i32)
_BYTES_PER_ENTRY = 14

#: Default memory budget for sieve construction (entries * _BYTES_PER_ENTRY).
DEFAULT_MEMORY_BUDGET = 4 * 2**30

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


@dataclass(frozen=True)
class SieveTables:
    """Precomputed multiplicative-function tables for 1..limit.

    Arrays are indexed directly by n (index 0 is unused padding).
    """

    limit: int
    mu: np.ndarray        # int8, mu[n] in {-1, 0, 1}
    mertens: np.ndarray   # int32, mertens[n] = sum_{k<=n} mu[k]
    phi: np.ndarray       # int32, Euler totient
    spf: np.ndarray       # int32, smallest prime factor (spf[1] = 1)
    primes: np.ndarray    # int32, ascending primes <= limit
    omega: np.ndarray     # int8, number of distinct prime factors

    def check_range(self, n: int, what: str = "index") -> None:
        if not 1 <= n <= self.limit:
            raise OutOfRangeError(f"{what} {n} outside table range 1..{self.limit}")


@njit(cache=True)
def _linear_sieve(limit):
    spf = np.zeros(limit + 1, np.int32)
    mu = np.zeros(limit + 1, np.int8)
    phi = np.zeros(limit + 1, np.int32)
    omega = np.zeros(limit + 1, np.int8)
    primes = np.empty(max(limit // 2, 1), np.int32)
    np_count = 0
    mu[1] = 1
    phi[1] = 1
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[np_count] = i
            np_count += 1
            mu[i] = -1
            phi[i] = i - 1
            omega[i] = 1
        for j in range(np_count):
            p = primes[j]
            if p > spf[i] or i * p > limit:
                break
            ip = i * p
            spf[ip] = p
            if p == spf[i]:
                mu[ip] = 0
                phi[ip] = phi[i] * p
                omega[ip] = omega[i]
                break
            mu[ip] = -mu[i]
            phi[ip] = phi[i] * (p - 1)
            omega[ip] = omega[i] + 1
    return spf, mu, phi, omega, primes[:np_count]


def build_sieve(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTables:
    """Build all tables up to `limit` with a single O(limit) linear sieve."""
    if limit < 1:
        raise ParameterError(f"sieve limit must be >= 1, got {limit}")
    needed = (limit + 1) * _BYTES_PER_ENTRY
    if needed > memory_budget:
        raise CapacityError(
            f"sieve up to {limit} needs ~{needed} bytes, budget is {memory_budget}"
        )
    spf, mu, phi, omega, primes = _linear_sieve(limit)
    mertens = np.cumsum(mu, dtype=np.int64).astype(np.int32)
    for a in (spf, mu, phi, omega, primes, mertens):
        a.setflags(write=False)
    return SieveTables(limit, mu, mertens, phi, spf, primes, omega)


def mertens_at_quotients(tables: SieveTables, n: int, m: int):
    """Return [(t, M(n // t)) for t = 1..n // m], computing each distinct
    quotient value only once."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    tables.check_range(n, "n")
    mertens = tables.mertens
    out = []
    cache: dict[int, int] = {}
    for t in range(1, n // m + 1):
        q = n // t
        v = cache.get(q)
        if v is None:
            v = int(mertens[q])
            cache[q] = v
        out.append((t, v))
    return out


@dataclass(frozen=True)
class MobiusPrefix:
    """Snapshot of sum_{k<=m} mu(k)/k with a rigorous rounding bound.

    `scaled_t` is m * |value|, the growth-condition argument used by the
    condition-(6) machinery.
    """

    m: int
    value: float
    abs_error_bound: float
    scaled_t: float


class MobiusPrefixAccumulator:
    """Neumaier-compensated accumulator for sum mu(k)/k, extendable in O(1).

    Per-term error: one division (eps/k) plus compensated addition (eps per
    term on the running magnitude, which stays <= 1).  The published bound is
    4*eps*(log m + 2), comfortably below the C*m*eps contract.
    """

    def __init__(self, tables: SieveTables):
        self.tables = tables
        self.m = 0
        self._sum = 0.0
        self._comp = 0.0
        self._err = 0.0

    def advance_to(self, m: int) -> MobiusPrefix:
        if m < self.m:
            raise ParameterError("accumulator cannot move backwards")
        self.tables.check_range(m, "m")
        mu = self.tables.mu
        s, c = self._sum, self._comp
        for k in range(self.m + 1, m + 1):
            mk = mu[k]
            if mk == 0:
                continue
            term = mk / k
            t = s + term
            if abs(s) >= abs(term):
                c += (s - t) + term
            else:
                c += (term - t) + s
            s = t
        self._sum, self._comp = s, c
        self.m = m
        self._err = 4.0 * _EPS * (math.log(max(m, 1)) + 2.0)
        return self.snapshot()

    def snapshot(self) -> MobiusPrefix:
        v = self._sum + self._comp
        return MobiusPrefix(self.m, v, self._err, self.m * abs(v))


def mobius_harmonic_prefix(tables: SieveTables, m: int) -> MobiusPrefix:
    """Compensated float evaluation of sum_{k<=m} mu(k)/k."""
    acc = MobiusPrefixAccumulator(tables)
    return acc.advance_to(m)


def exact_mobius_harmonic(tables: SieveTables, m: int) -> Fraction:
    """Exact rational sum_{k<=m} mu(k)/k (adjudication / oracle path)."""
    tables.check_range(m, "m")
    mu = tables.mu
    s = Fraction(0)
    for k in range(1, m + 1):
        if mu[k]:
            s += Fraction(int(mu[k]), k)
    return s


def selberg_points(tables: SieveTables, limit: int, threshold) -> list[int]:
    """All m <= limit with m * |sum_{k<=m} mu(k)/k| <= threshold.

    The scan runs in compensated doubles; any m whose value lands within the
    accumulated error bound of the threshold is settled in exact rationals.
    """
    if limit > tables.limit:
        raise OutOfRangeError(f"limit {limit} exceeds table limit {tables.limit}")
    thr = Fraction(threshold) if not isinstance(threshold, Fraction) else threshold
    if thr <= 0:
        raise ParameterError("threshold must be positive")
    thr_f = float(thr)
    acc = MobiusPrefixAccumulator(tables)
    out = []
    exact_sum = None  # lazily started exact rescan, kept in sync once needed
    mu = tables.mu
    for m in range(1, limit + 1):
        p = acc.advance_to(m)
        margin = m * p.abs_error_bound
        if abs(p.scaled_t - thr_f) <= margin:
            if exact_sum is None:
                exact_sum = exact_mobius_harmonic(tables, m)
                exact_at = m
            else:
                for k in range(exact_at + 1, m + 1):
                    if mu[k]:
                        exact_sum += Fraction(int(mu[k]), k)
                exact_at = m
            if m * abs(exact_sum) <= thr:
                out.append(m)
        elif p.scaled_t <= thr_f:
            out.append(m)
    return out


def selberg_points_exact(tables: SieveTables, limit: int, threshold) -> list[int]:
    """Brute-force all-rational rescan; reference oracle for selberg_points."""
    if limit > tables.limit:
        raise OutOfRangeError(f"limit {limit} exceeds table limit {tables.limit}")
    thr = Fraction(threshold)
    mu = tables.mu
    s = Fraction(0)
    out = []
    for m in range(1, limit + 1):
        if mu[m]:
            s += Fraction(int(mu[m]), m)
        if m * abs(s) <= thr:
            out.append(m)
    return out


def primorial(t: int) -> int:
    """Product of the first t primes; primorial(0) = 1 (empty product)."""
    if t < 0:
        raise ParameterError("t must be >= 0")
    if t > len(_SMALL_PRIMES):
        raise CapacityError(f"primorial({t}) does not fit 64-bit unsigned (t <= 15)")
    out = 1
    for p in _SMALL_PRIMES[:t]:
        out *= p
    return out


def is_primorial(m: int) -> bool:
    out = 1
    for p in _SMALL_PRIMES:
        if out == m:
            return True
        out *= p
        if out > m:
            return False
    return out == m


def distinct_prime_factors(m: int, tables: SieveTables | None = None) -> list[int]:
    """Ascending distinct prime factors of m, via spf table when available."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    ps = []
    if tables is not None and m <= tables.limit:
        spf = tables.spf
        while m > 1:
            p = int(spf[m])
            ps.append(p)
            while m % p == 0:
                m //= p
        return ps
    d = 2
    while d * d <= m:
        if m % d == 0:
            ps.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        ps.append(m)
    return ps


def squarefree_divisors(m: int, tables: SieveTables | None = None) -> list[tuple[int, int]]:
    """(d, mu(d)) over all squarefree divisors d of rad(m)."""
    divs = [(1, 1)]
    for p in distinct_prime_factors(m, tables):
        divs += [(d * p, -s) for d, s in divs]
    return divs


def coprime_count(n: int, m: int, tables: SieveTables | None = None) -> int:
    """#{1 <= k <= n : gcd(k, m) = 1} by inclusion-exclusion over the
    squarefree divisors of rad(m); cost O(2^omega(m))."""
    if n < 0 or m < 1:
        raise ParameterError("need n >= 0 and m >= 1")
    if n == 0:
        return 0
    return sum(s * (n // d) for d, s in squarefree_divisors(m, tables))


# --- optional binary cache -------------------------------------------------
#
# Layout (little-endian): magic "NTCO", version u32, limit u64, then the
# 2-bit-packed mu array (values mu+1), mertens as i64 and phi as u64.

_MAGIC = b"NTCO"
_CACHE_VERSION = 1


def save_sieve(tables: SieveTables, path: str) -> None:
    packed = _pack_mu(tables.mu)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQ", _CACHE_VERSION, tables.limit))
        fh.write(packed.tobytes())
        fh.write(tables.mertens.astype("<i8").tobytes())
        fh.write(tables.phi.astype("<u8").tobytes())
    os.replace(tmp, path)


def load_sieve(path: str, spot_checks: int = 64, seed: int = 0) -> SieveTables:
    """Load a cached sieve, validating the header and spot-checking entries
    against direct recomputation."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != _MAGIC:
            raise CapacityError(f"{path}: not a sieve cache (bad magic)")
        version, limit = struct.unpack("<IQ", head[4:])
        if version != _CACHE_VERSION:
            raise CapacityError(f"{path}: unsupported cache version {version}")
        n_packed = (limit + 1 + 3) // 4
        mu = _unpack_mu(np.frombuffer(fh.read(n_packed), np.uint8), limit)
        mertens = np.frombuffer(fh.read(8 * (limit + 1)), "<i8").astype(np.int32)
        phi = np.frombuffer(fh.read(8 * (limit + 1)), "<u8").astype(np.int32)
    spf, mu_ref, phi_ref, omega, primes = _linear_sieve(limit)
    rng = np.random.default_rng(seed)
    for n in rng.integers(1, limit + 1, size=spot_checks):
        if mu[n] != mu_ref[n] or phi[n] != phi_ref[n]:
            raise CapacityError(f"{path}: cache corrupt at n={n}")
    mexp = np.cumsum(mu, dtype=np.int64).astype(np.int32)
    if not np.array_equal(mertens, mexp):
        raise CapacityError(f"{path}: Mertens column inconsistent with mu column")
    for a in (spf, mu, phi, omega, primes, mertens):
        a.setflags(write=False)
    return SieveTables(int(limit), mu, mertens, phi, spf, primes, omega)


def _pack_mu(mu: np.ndarray) -> np.ndarray:
    vals = (mu.astype(np.int16) + 1).astype(np.uint8)
    pad = (-len(vals)) % 4
    if pad:
        vals = np.concatenate([vals, np.zeros(pad, np.uint8)])
    vals = vals.reshape(-1, 4)
    return (vals[:, 0] | (vals[:, 1] << 2) | (vals[:, 2] << 4) | (vals[:, 3] << 6)).astype(np.uint8)


def _unpack_mu(packed: np.ndarray, limit: int) -> np.ndarray:
    out = np.empty(len(packed) * 4, np.uint8)
    out[0::4] = packed & 3
    out[1::4] = (packed >> 2) & 3
    out[2::4] = (packed >> 4) & 3
    out[3::4] = (packed >> 6) & 3
    return (out[: limit + 1].astype(np.int8) - 1).astype(np.int8)
