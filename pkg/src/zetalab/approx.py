"""Approximation sequences and their exact identities.

Everything here is exact: window values are rationals (with an integer fast
path), and float output only appears in the vectorized bulk evaluator used by
the norm scans, where the caller gets a tracked error model instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ntcore
from .errors import ParameterError
from .ntcore import MobiusPrefix, SieveTables


def r(k: int, n: int) -> int:
    """r_k(n) = k * frac(n/k) = n mod k."""
    if k < 2 or n < 1:
        raise ParameterError("need k >= 2 and n >= 1")
    return n % k


def G_direct(n: int, m: int, tables: SieveTables) -> int:
    """sum_{k<=m} mu(k) * floor(n/k), evaluated term by term."""
    tables.check_range(m, "m")
    k = np.arange(1, m + 1, dtype=np.int64)
    return int(np.dot(tables.mu[1 : m + 1].astype(np.int64), n // k))


def H_direct(n: int, m: int, tables: SieveTables) -> Fraction:
    """sum_{k=2..m} mu(k) * frac(n/k), as an exact rational."""
    tables.check_range(m, "m")
    mu = tables.mu
    s = Fraction(0)
    for k in range(2, m + 1):
        if mu[k]:
            s += Fraction(int(mu[k]) * (n % k), k)
    return s


def G_mertens(n: int, m: int, tables: SieveTables) -> int:
    """G via the Mertens form 1 + sum_{t<=floor(n/m)} (M(m) - M(floor(n/t)))."""
    tables.check_range(n, "n")
    if m < 1:
        raise ParameterError("m must be >= 1")
    mm = int(tables.mertens[m]) if m <= tables.limit else int(tables.mertens[n])
    mertens = tables.mertens
    t_top = n // m
    total = 1 + t_top * mm
    t = 1
    while t <= t_top:
        q = n // t
        t_hi = min(n // q, t_top)  # the whole block [t, t_hi] shares M(n//t)
        total -= (t_hi - t + 1) * int(mertens[q])
        t = t_hi + 1
    return total


def F(m: int, n: int, tables: SieveTables, prefix=None):
    """F_m(n) = 1 - G(n,m) + m*floor(n/m)*sum_{k<=m} mu(k)/k.

    `prefix` may be a Fraction (exact result), a MobiusPrefix (float result),
    or None to compute the exact prefix on demand.  F_m(n) = 0 for n < m; the
    defining formula is used verbatim at the n = m boundary, where it does
    not vanish (F_2(2) = 1).
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if n < m:
        return Fraction(0)
    if prefix is None:
        prefix = ntcore.exact_mobius_harmonic(tables, m)
    g = G_mertens(n, m, tables) if n <= tables.limit else G_direct(n, m, tables)
    if isinstance(prefix, MobiusPrefix):
        if prefix.m != m:
            raise ParameterError(f"prefix is for m={prefix.m}, not m={m}")
        return 1 - g + m * (n // m) * prefix.value
    return 1 - g + m * (n // m) * Fraction(prefix)


def fm_values(m: int, truncation: int, tables: SieveTables, prefix_value: float | None = None) -> np.ndarray:
    """Float F_m(n) for n = 1..truncation, vectorized.

    G is accumulated by adding mu(k) at every multiple of k and prefix-summing
    (the bulk form of the incremental recurrence G(n+1)-G(n) = sum of mu over
    divisors of n+1 up to m); values are exact integers until the single float
    multiplication by the Mobius harmonic prefix.
    """
    tables.check_range(m, "m")
    if prefix_value is None:
        prefix_value = ntcore.mobius_harmonic_prefix(tables, m).value
    mu = tables.mu
    delta = np.zeros(truncation + 1, np.int32)
    for k in range(1, min(m, truncation) + 1):
        muk = mu[k]
        if muk:
            delta[k::k] += muk
    g = np.cumsum(delta[1:], dtype=np.int32)
    n = np.arange(1, truncation + 1, dtype=np.int64)
    out = 1.0 - g.astype(np.float64) + (m * (n // m)).astype(np.float64) * prefix_value
    out[: min(m - 1, truncation)] = 0.0
    return out


# --- divisor-restricted sequences (primorial m) ----------------------------

def _require_primorial(m: int) -> None:
    if not ntcore.is_primorial(m) or m < 2:
        raise ParameterError(f"m={m} is not a primorial >= 2")


def g_prime(n: int, m: int, tables: SieveTables | None = None) -> int:
    """G'(n,m) = sum over divisors d of m of mu(d)*floor(n/d)."""
    return sum(s * (n // d) for d, s in ntcore.squarefree_divisors(m, tables))


def h_prime_times_m(n: int, m: int, tables: SieveTables | None = None) -> int:
    """m * H'(n,m); integral because every divisor of m divides m."""
    return sum(s * (n % d) * (m // d) for d, s in ntcore.squarefree_divisors(m, tables) if d >= 2)


def F_prime_formula(n: int, m: int, tables: SieveTables | None = None) -> int:
    """F'_m(n) = 1 - G'(n,m) + floor(n/m) * phi(m), the divisor-sum route.

    Uses m * sum_{d|m} mu(d)/d = phi(m) to keep the arithmetic integral.
    """
    _require_primorial(m)
    phi_m = 1
    for p in ntcore.distinct_prime_factors(m, tables):
        phi_m *= p - 1
    return 1 - g_prime(n, m, tables) + (n // m) * phi_m


def F_prime(m: int, n: int, tables: SieveTables | None = None) -> int:
    """F'_m(n) for primorial m: m-periodic, integer valued.

    For 1 <= n < m this is -#{1 < k <= n : gcd(k,m) = 1} (the counting form);
    a general n is reduced by m-periodicity and the representative evaluated
    by the divisor-sum formula.  Both routes agree everywhere.
    """
    _require_primorial(m)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if n < m:
        return -(ntcore.coprime_count(n, m, tables) - 1)
    n0 = n % m
    if n0 == 0:
        n0 = m
    return F_prime_formula(n0, m, tables)


def s_t_eval(t: int, n: int) -> Fraction:
    """s_t(n) = (phi(m)-1)/(m - p_t) * (r_{p_t}(n) - r_m(n)), m = primorial(t)."""
    if t < 1 or n < 1:
        raise ParameterError("need t >= 1 and n >= 1")
    m = ntcore.primorial(t)
    p_t = ntcore._SMALL_PRIMES[t - 1]
    phi_m = 1
    for p in ntcore._SMALL_PRIMES[:t]:
        phi_m *= p - 1
    if m == p_t:  # t = 1: m = p_t = 2, the prefactor degenerates
        raise ParameterError("s_t needs t >= 2 so that m > p_t")
    return Fraction(phi_m - 1, m - p_t) * ((n % p_t) - (n % m))


# --- admissible combinations ----------------------------------------------

@dataclass(frozen=True)
class AdmissibleCombo:
    """Coefficients c_1..c_N with sum c_k / k = 0 (c_1 is forced)."""

    N: int
    c: tuple

    def __post_init__(self):
        if self.N < 2 or len(self.c) != self.N:
            raise ParameterError("need N >= 2 and exactly N coefficients")
        s = sum(Fraction(ck) / k if isinstance(ck, (int, Fraction)) else ck / k
                for k, ck in enumerate(self.c, start=1))
        if isinstance(s, Fraction):
            if s != 0:
                raise ParameterError(f"sum c_k/k = {s} != 0")
        elif abs(s) > 1e-12:
            raise ParameterError(f"sum c_k/k = {s} exceeds 1e-12")

    def tail_coefficients(self):
        """c_2..c_N, the ones entering S(n) and the Dirichlet polynomial."""
        return self.c[1:]


def make_admissible(*c_rest) -> AdmissibleCombo:
    """Build an AdmissibleCombo from c_2..c_N; c_1 = -sum_{k>=2} c_k/k."""
    if not c_rest:
        raise ParameterError("need at least c_2")
    exact = all(isinstance(x, (int, Fraction)) for x in c_rest)
    if exact:
        c1 = -sum(Fraction(ck) / k for k, ck in enumerate(c_rest, start=2))
    else:
        c1 = -sum(ck / k for k, ck in enumerate(c_rest, start=2))
    return AdmissibleCombo(len(c_rest) + 1, (c1, *c_rest))


# --- evaluation windows ----------------------------------------------------

@dataclass(frozen=True)
class SequenceWindow:
    """Contiguous exact evaluation of one approximation sequence."""

    kind: str              # "F", "Fprime", "S_t" or "custom"
    m: int
    n_start: int
    n_end: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.n_end - self.n_start + 1:
            raise ParameterError("window length does not match index range")

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"kind={self.kind}", f"m={self.m}",
                        f"range={self.n_start}..{self.n_end}"])
            w.writerow(["n", "value_num", "value_den"])
            for n, v in zip(range(self.n_start, self.n_end + 1), self.values):
                f = Fraction(v)
                w.writerow([n, f.numerator, f.denominator])


def window_F(m: int, n_start: int, n_end: int, tables: SieveTables) -> SequenceWindow:
    prefix = ntcore.exact_mobius_harmonic(tables, m)
    vals = tuple(F(m, n, tables, prefix) for n in range(n_start, n_end + 1))
    return SequenceWindow("F", m, n_start, n_end, vals)


def window_Fprime(m: int, n_start: int, n_end: int, tables: SieveTables | None = None) -> SequenceWindow:
    vals = tuple(F_prime(m, n, tables) for n in range(n_start, n_end + 1))
    return SequenceWindow("Fprime", m, n_start, n_end, vals)


def window_s_t(t: int, n_start: int, n_end: int) -> SequenceWindow:
    vals = tuple(s_t_eval(t, n) for n in range(n_start, n_end + 1))
    return SequenceWindow("S_t", ntcore.primorial(t), n_start, n_end, vals)
