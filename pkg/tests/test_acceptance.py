"""Acceptance gate: thirteen numbered criteria covering the exact
arithmetic identities, the two reproducible numerical claims, and the
regression baselines frozen from independent oracle runs.

Each test prints a single `criterion NN: PASS/FAIL` line outside pytest's
capture so the verdicts appear inline in any run log.
"""

import contextlib
import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from zetalab import analytic, approx, ntcore, series, spaces

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is installed in CI
    mpz = int


# regression values frozen from independent oracle runs; deterministic
# reproductions, not tolerances of convenience
SCAN_MAX_RATIO = 0.6840592788253071
SCAN_MAX_ARG = (592, 350459)
TREND_BOUND_ALPHA2 = 0.04          # measured max 0.03682 over the m grid
SPAN_K8_BASELINE = 0.0061769865375692805
GRAM_EIG_MIN = 0.10779869165694045
GRAM_EIG_MAX = 10.930083284430323
B_PRIME = 5.0                      # measured k*|norm^2-1| <= 4.60
ZETA_3 = 1.2020569031595942854
ZETA_HALF = -1.4603545088095868128


@contextlib.contextmanager
def criterion(capsys, num, desc):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"criterion {num:>2}: FAIL  {desc}")
        raise
    with capsys.disabled():
        print(f"criterion {num:>2}: PASS  {desc}  "
              f"[{time.perf_counter() - t0:.1f}s]")


def test_criterion_01_exact_identities(capsys, tables_big):
    with criterion(capsys, 1, "sum mu(k)*floor(n/k) = 1 and divisor-sum "
                              "delta, all n <= 1e5, exact"):
        n_top = 10**5
        mu = tables_big.mu[: n_top + 1].astype(np.int64)
        divsum = np.zeros(n_top + 1, dtype=np.int64)
        for k in range(1, n_top + 1):
            if mu[k]:
                divsum[k::k] += mu[k]
        # sum_{k|d} mu(k) = [d=1]
        assert divsum[1] == 1
        assert not divsum[2:].any()
        # the two identities are telescopes of each other:
        # sum_{k<=n} mu(k) floor(n/k) accumulates exactly the divisor sums
        assert (np.cumsum(divsum[1:]) == 1).all()


def test_criterion_02_mertens_form(capsys, tables_big):
    with criterion(capsys, 2, "G_direct == G_mertens on 1e4 random pairs, "
                              "n <= 1e6, exact"):
        rng = np.random.default_rng(7)
        for _ in range(10**4):
            n = int(rng.integers(1, 10**6 + 1))
            # log-uniform m covers every scale while keeping the direct
            # O(m) evaluation affordable
            m = int(math.exp(rng.uniform(0.0, math.log(n + 1))))
            m = min(max(m, 1), n)
            assert approx.G_direct(n, m, tables_big) == \
                approx.G_mertens(n, m, tables_big)


def test_criterion_03_rational_identity(capsys, tables_big):
    with criterion(capsys, 3, "G + H = n * sum mu(k)/k in exact rationals, "
                              "all n, m <= 2000"):
        top = 2000
        q = mpz(math.lcm(*range(1, top + 1)))
        qk = [0] + [q // k for k in range(1, top + 1)]
        mu = [int(x) for x in tables_big.mu[: top + 1]]
        zero = mpz(0)
        for n in range(1, top + 1):
            g = zero
            h_bar = zero   # cleared-denominator H: sum mu(k)(n mod k) q/k
            p = zero       # cleared-denominator sum mu(k)/k
            for m in range(1, top + 1):
                mum = mu[m]
                if mum:
                    g += mum * (n // m)
                    h_bar += mum * (n % m) * qk[m]
                    p += mum * qk[m]
                assert g * q + h_bar == n * p, (n, m)


def test_criterion_04_divisor_restricted_counting(capsys, tables_big):
    with criterion(capsys, 4, "divisor-restricted F' equals the negated "
                              "coprime count below m, plus periodicity"):
        for t in range(1, 6):  # m in {6, 30, 210, 2310, 30030}
            m = ntcore.primorial(t + 1)
            count = 0
            for n in range(1, m):
                if n > 1 and math.gcd(n, m) == 1:
                    count += 1
                assert approx.F_prime_formula(n, m, tables_big) == -count, (m, n)
            # at the period boundary the sequence returns to its n = m value
            assert approx.F_prime_formula(m, m, tables_big) == 1
            # m-periodicity spot checks through the periodic evaluator
            rng = np.random.default_rng(m)
            for _ in range(20):
                n = int(rng.integers(1, m + 1))
                j = int(rng.integers(1, 5))
                assert approx.F_prime(m, n + j * m, tables_big) == \
                    approx.F_prime(m, n, tables_big)


def test_criterion_05_growth_condition_scan(capsys, tables_big):
    with criterion(capsys, 5, "full scan s=1/2, omega=1+t, n_cap=360000: "
                              "zero violations, frozen max ratio"):
        om = analytic.OmegaSpec(1.0, 1.0)
        report = analytic.condition6_scan(
            (2, 360_000 - 1), 360_000, 0.5, om, tables_big, parallelism=8)
        assert report.violations == []
        assert report.max_arg == SCAN_MAX_ARG
        assert abs(report.max_ratio - SCAN_MAX_RATIO) < 1e-12


def test_criterion_06_selberg_points(capsys, tables_big):
    with criterion(capsys, 6, "fast Selberg-point scan to 1e4 matches an "
                              "exact-rational rescan element-for-element"):
        limit = 10**4
        fast = ntcore.selberg_points(tables_big, limit, Fraction(1, 2))
        acc = Fraction(0)
        brute = []
        for m in range(1, limit + 1):
            mu = int(tables_big.mu[m])
            if mu:
                acc += Fraction(mu, m)
            if m * abs(acc) <= Fraction(1, 2):
                brute.append(m)
        assert fast == brute
        assert 3 in fast and 5 in fast


def test_criterion_07_norm_trends(capsys, tables_big):
    with criterion(capsys, 7, "weighted norm trends of F_m bounded/vanishing; "
                              "m=2 closed form pi^2/24 within 1e-10"):
        ms = [2**j for j in range(4, 14)]
        bounded = spaces.fm_norm_trend(ms, spaces.WeightParams(1.0, -2.0),
                                       tables_big)
        assert bounded.max_value <= TREND_BOUND_ALPHA2
        vanishing = spaces.fm_norm_trend(ms, spaces.WeightParams(1.0, -2.5),
                                         tables_big)
        assert vanishing.last_first_ratio < 0.2

        trunc = 2 * 10**6
        res = spaces.fm_norm(2, spaces.WeightParams(1.0, -2.0), tables_big,
                             truncation=trunc)
        # exact tail of sum_{even n > N} n^{-2} via the trigamma function
        tail = float(mpmath.polygamma(1, trunc // 2 + 1)) / 4.0
        assert abs(res.truncated_value + tail - math.pi**2 / 24) < 1e-10


def test_criterion_08_integral_identity(capsys):
    with criterion(capsys, 8, "integral identity on 50 random admissible "
                              "combos at s in {2, 3, 1.5+2i}, <= 1e-6 rel"):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            coeffs = [Fraction(int(rng.integers(-3, 4)),
                               int(rng.integers(1, 5)))
                      for _ in range(int(rng.integers(1, 8)))]
            combo = approx.make_admissible(*coeffs)
            for s in (2.0, 3.0, 1.5 + 2j):
                lhs = analytic.beurling_lhs(combo, s, 10**6)
                rhs = analytic.beurling_rhs(combo, s)
                assert abs(lhs.value - rhs) <= lhs.tail_bound \
                    + 1e-12 * abs(rhs)
                assert lhs.tail_bound + 1e-12 * abs(rhs) <= 1e-6 * abs(rhs)


def test_criterion_09_zeta_oracle(capsys):
    with criterion(capsys, 9, "zeta values against closed form and frozen "
                              "high-precision oracles"):
        assert abs(analytic.zeta_eval(2.0) - math.pi**2 / 6) < 1e-12
        assert abs(analytic.zeta_eval(3.0) - ZETA_3) < 1e-9
        assert abs(analytic.zeta_eval(0.5) - ZETA_HALF) < 1e-9


def test_criterion_10_operator_identities(capsys):
    with criterion(capsys, 10, "operator identities: T_1 h_k = r_k for "
                               "k <= 16; two-parameter grid at 1e-9"):
        order = 256
        for k in range(2, 17):
            got = series.apply_T_a(series.hk_series(k, order), 1.0).coeffs
            want = np.arange(1, len(got) + 1) % k
            assert float(np.max(np.abs(got - want))) <= 1e-9, k
        grid_order = 64
        for a in (1.0, 1.5, 2.0):
            for b in (0.5, 1.0, 2.0):
                f = series.binomial_series(b - a, grid_order).scale(-1.0 / b)
                got = series.apply_T_ab(f, a, b).coeffs
                assert float(np.max(np.abs(got - 1.0))) <= 1e-9, (a, b)
            k = 3
            f = series.hk_series(k, grid_order).conv(
                series.binomial_series(1 - a, grid_order))
            got = series.apply_T_ab(f, a, 1.0).coeffs
            want = np.arange(1, len(got) + 1) % k
            assert float(np.max(np.abs(got - want))) <= 1e-9, a


def test_criterion_11_cubic_and_contraction(capsys):
    with criterion(capsys, 11, "cubic values H(-3)=76, H(-2)=25; C1 < 1 on "
                               "the (alpha, a) grid"):
        _, _, h3 = series.riesz_constants(series.OperatorParams(1.0, -3.0))
        _, _, h2 = series.riesz_constants(series.OperatorParams(1.0, -2.0))
        assert h3 == 76.0
        # the stated companion value 23 is an arithmetic slip: the cubic
        # -2a^3 + 3a^2 + 2a + 1 gives 25 at a = -2, and re-deriving the
        # contraction inequality's constant term symbolically reproduces
        # the same cubic.  The honest check is 25; the literal 23 is
        # carried as an expected failure below.
        assert h2 == 25.0
        for ia in range(0, 21):
            alpha = -3.0 + 0.05 * ia
            for ja in range(1, 101):
                a = 0.05 * ja
                _, c1, _ = series.riesz_constants(
                    series.OperatorParams(a, alpha))
                assert c1 < 1.0, (a, alpha)


@pytest.mark.xfail(strict=True,
                   reason="stated companion value 23 contradicts the cubic's "
                          "own definition, which gives 25 at -2; recorded as "
                          "an expected failure rather than patched over")
def test_criterion_11_stated_companion_value(capsys):
    _, _, h2 = series.riesz_constants(series.OperatorParams(1.0, -2.0))
    with capsys.disabled():
        print(f"criterion 11*: FAIL (expected)  stated companion value 23 "
              f"vs computed {h2:g}")
    assert h2 == 23.0


def test_criterion_12_riesz_diagnostics(capsys):
    with criterion(capsys, 12, "basis normalization |norm^2 - 1| <= B'/k and "
                               "frozen Gram eigenvalue extremes"):
        params = series.OperatorParams(1.0, -2.5)
        for k in (10, 100, 1000):
            g = series.g_basis(k, params, k + 1)
            n2 = series.weighted_dot(g, g, params.alpha + 2)
            assert abs(n2 - 1.0) <= B_PRIME / k, k
        basis = [series.g_basis(k, params, 201) for k in range(201)]
        diag = series.dalpha_gram(basis, params.alpha + 2, params)
        assert diag.eig_min > 0.05
        assert abs(diag.eig_min - GRAM_EIG_MIN) < 1e-6
        assert abs(diag.eig_max - GRAM_EIG_MAX) < 1e-6


def test_criterion_13_span_distance(capsys):
    with criterion(capsys, 13, "span distances monotone, zero in span, K=8 "
                               "baseline within 1e-8 of the dense oracle"):
        order = 2048
        alpha = -2.5
        target = series.binomial_series(0.0, order)  # the constant sequence
        basis = [series.hk_series(k, order) for k in range(2, 9)]
        dists = [series.span_distance(target, basis[: j + 1], alpha)
                 for j in range(len(basis))]
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        assert abs(dists[-1] - SPAN_K8_BASELINE) < 1e-8
        in_span = basis[0].scale(2.0) + basis[3].scale(-0.5)
        assert series.span_distance(in_span, basis, alpha) < 1e-8
