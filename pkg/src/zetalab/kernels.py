"""Numba kernels for the growth-condition range scan.

The scan is pair-exhaustive over (m, n) with m < n <= min(m^(1/s), n_cap),
but never touches most pairs individually: for fixed n, the left-hand side
|G(n,m)| restricted to a quotient block q = floor(n/m) is an affine function
of the Mertens value M(m), so a sparse-table range min/max of M bounds the
block exactly.  Blocks whose bound cannot beat the running maximum ratio
(nor reach the violation threshold) are skipped; the rest are bisected down
to direct per-m evaluation.  The reported maximum and candidate set are
exact, hence independent of chunking and worker count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NEAR_MARGIN = 1e-9  # relative band around rhs re-adjudicated at high precision
MAX_CANDIDATES = 65536


def build_sparse_min(arr: np.ndarray) -> np.ndarray:
    """Sparse table for range-minimum queries over arr[1..N]."""
    n = len(arr) - 1
    levels = max(int(np.floor(np.log2(n))) + 1, 1)
    tbl = np.full((levels, len(arr)), arr.max(), dtype=arr.dtype)
    tbl[0] = arr
    for lv in range(1, levels):
        half = 1 << (lv - 1)
        span = 1 << lv
        tbl[lv, 1 : n - span + 2] = np.minimum(
            tbl[lv - 1, 1 : n - span + 2], tbl[lv - 1, 1 + half : n - half + 2]
        )
    return tbl


def build_sparse_max(arr: np.ndarray) -> np.ndarray:
    return -build_sparse_min(-arr)


def build_log_table(n: int) -> np.ndarray:
    lg = np.zeros(n + 1, np.int8)
    for i in range(2, n + 1):
        lg[i] = lg[i >> 1] + 1
    return lg


@njit(cache=True, inline="always")
def _rmq_min(tbl, lg, lo, hi):
    k = lg[hi - lo + 1]
    a = tbl[k, lo]
    b = tbl[k, hi - (1 << k) + 1]
    return a if a < b else b


@njit(cache=True, inline="always")
def _rmq_max(tbl, lg, lo, hi):
    k = lg[hi - lo + 1]
    a = tbl[k, lo]
    b = tbl[k, hi - (1 << k) + 1]
    return a if a > b else b


@njit(cache=True, inline="always")
def _g_mertens(mert, n, m):
    """G(n, m) = 1 + sum_{t=1..n//m} (M(m) - M(n//t)), quotients deduplicated."""
    if m < 1:
        return 1
    total = 1
    mm = mert[m]
    cap = n // m
    t = 1
    while t <= cap:
        q = n // t
        t2 = n // q
        if t2 > cap:
            t2 = cap
        total += (t2 - t + 1) * (mm - mert[q])
        t = t2 + 1
    return total


@njit(cache=True, inline="always")
def _m_floor(n, s):
    """Smallest m >= 2 with n <= m^(1/s), i.e. m >= n^s."""
    if s == 0.5:
        r = int(np.sqrt(n - 1))
        while r * r >= n:
            r -= 1
        while (r + 1) * (r + 1) < n:
            r += 1
        m = r + 1
    else:
        m = int(np.ceil(n**s))
        while m > 2 and (m - 1) ** (1.0 / s) >= n:
            m -= 1
        while m ** (1.0 / s) < n:
            m += 1
    return m if m >= 2 else 2


@njit(cache=True)
def scan_chunk(mert, t_arr, mmin_tbl, mmax_tbl, tmin_tbl, lg,
               m_lo, m_hi, n_cap, s, w0, w1):
    """Exhaustive check of |G(n,m)| <= rhs over the chunk m in [m_lo, m_hi].

    Returns (max_ratio, arg_m, arg_n, cand_m, cand_n, n_cand, overflow):
    candidates are pairs within NEAR_MARGIN of the threshold (or beyond) and
    must be re-adjudicated at high precision by the caller.
    """
    expo = s / (1.0 - s)
    best = 0.0
    arg_m = 0
    arg_n = 0
    cand_m = np.empty(MAX_CANDIDATES, np.int64)
    cand_n = np.empty(MAX_CANDIDATES, np.int64)
    n_cand = 0
    overflow = False
    stack_lo = np.empty(64, np.int64)
    stack_hi = np.empty(64, np.int64)

    n_top = min(n_cap, (m_hi * m_hi) if s == 0.5 else int(m_hi ** (1.0 / s)))
    for n in range(m_lo + 1, n_top + 1):
        lo = _m_floor(n, s)
        if lo < m_lo:
            lo = m_lo
        if lo < 2:
            lo = 2
        hi = m_hi if m_hi < n - 1 else n - 1
        if lo > hi:
            continue
        mid_term = n**s / np.sqrt(np.log(n))
        g_base = _g_mertens(mert, n, lo - 1)
        k1 = lo
        while k1 <= hi:
            q = n // k1
            k2 = n // q
            if k2 > hi:
                k2 = hi
            base2 = g_base - q * mert[k1 - 1]
            # branch-and-bound over the block [k1, k2]
            sp = 0
            stack_lo[0] = k1
            stack_hi[0] = k2
            sp = 1
            while sp > 0:
                sp -= 1
                blo = stack_lo[sp]
                bhi = stack_hi[sp]
                gmax = base2 + q * _rmq_max(mmax_tbl, lg, blo, bhi)
                gmin = base2 + q * _rmq_min(mmin_tbl, lg, blo, bhi)
                absmax = gmax if gmax > -gmin else -gmin
                tmn = _rmq_min(tmin_tbl, lg, blo, bhi)
                rhs_lb = (blo**s + mid_term + (n / bhi) ** expo) * (w0 + w1 * tmn)
                ub = absmax / rhs_lb
                if ub <= best and ub < 1.0 - NEAR_MARGIN:
                    continue
                if bhi - blo < 16:
                    for m in range(blo, bhi + 1):
                        g = base2 + q * mert[m]
                        lhs = float(g if g >= 0 else -g)
                        rhs = (m**s + mid_term + (n / m) ** expo) * (w0 + w1 * t_arr[m])
                        ratio = lhs / rhs
                        if ratio > best:
                            best = ratio
                            arg_m = m
                            arg_n = n
                        if ratio >= 1.0 - NEAR_MARGIN:
                            if n_cand < MAX_CANDIDATES:
                                cand_m[n_cand] = m
                                cand_n[n_cand] = n
                                n_cand += 1
                            else:
                                overflow = True
                else:
                    mid = (blo + bhi) >> 1
                    stack_lo[sp] = blo
                    stack_hi[sp] = mid
                    sp += 1
                    stack_lo[sp] = mid + 1
                    stack_hi[sp] = bhi
                    sp += 1
            g_base = base2 + q * mert[k2]
            k1 = k2 + 1
    return best, arg_m, arg_n, cand_m[:n_cand], cand_n[:n_cand], n_cand, overflow


@njit(cache=True)
def per_m_max_ratios(mert, t_arr, spf, mu, m_lo, m_hi, n_cap, s, w0, w1):
    """Exact per-m maximum of |G(n,m)|/rhs over each m's window.

    Walks n incrementally per m, updating G through the divisors of n that
    are squarefree and <= m.  Intended for modest m-ranges (detail/CSV use)."""
    expo = s / (1.0 - s)
    out = np.zeros(m_hi - m_lo + 1)
    divisors = np.empty(1 << 10, np.int64)
    primes = np.empty(16, np.int64)
    for m in range(m_lo, m_hi + 1):
        n_top = min(n_cap, (m * m) if s == 0.5 else int(m ** (1.0 / s)))
        if n_top <= m:
            continue
        g = 1  # G(m, m)
        wt = w0 + w1 * t_arr[m]
        best = 0.0
        for n in range(m + 1, n_top + 1):
            # distinct primes of n via spf
            x = n
            np_count = 0
            while x > 1:
                p = spf[x]
                primes[np_count] = p
                np_count += 1
                while x % p == 0:
                    x //= p
            # mu-weighted sum over squarefree divisors of n that are <= m
            divisors[0] = 1
            n_div = 1
            inc = 0
            for j in range(np_count):
                p = primes[j]
                cur = n_div
                for i in range(cur):
                    d = divisors[i] * p
                    divisors[n_div] = d
                    n_div += 1
            for i in range(n_div):
                d = divisors[i]
                if d <= m:
                    inc += mu[d]
            g += inc
            lhs = float(g if g >= 0 else -g)
            rhs = (m**s + n**s / np.sqrt(np.log(n)) + (n / m) ** expo) * wt
            ratio = lhs / rhs
            if ratio > best:
                best = ratio
        out[m - m_lo] = best
    return out
