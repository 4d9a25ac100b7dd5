"""Truncated power-series engine: binomial series, the log-quotient family
h_k, the weighted-derivation operators, the explicit polynomial basis g_k,
Gram diagnostics and span distances.

All series are plain float coefficient vectors a_0..a_N; arithmetic never
extends the declared order, so every operation is exact formal manipulation
of the retained coefficients (up to float rounding).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedBasisError, ParameterError


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: np.ndarray  # float64, a_0..a_order

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1 or len(c) < 1:
            raise ParameterError("coeffs must be a nonempty 1-d vector")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(len(self.coeffs), len(other.coeffs))
        return TruncatedSeries(self.coeffs[:n] + other.coeffs[:n])

    def scale(self, c: float) -> "TruncatedSeries":
        return TruncatedSeries(c * self.coeffs)

    def conv(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Cauchy product truncated to the smaller declared order."""
        n = min(len(self.coeffs), len(other.coeffs))
        return TruncatedSeries(np.convolve(self.coeffs, other.coeffs)[:n])

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ParameterError("truncate cannot extend a series")
        return TruncatedSeries(self.coeffs[: order + 1])


def ones_series(order: int) -> TruncatedSeries:
    """f_0 = 1/(1-z), the constant-1 coefficient sequence."""
    return TruncatedSeries(np.ones(order + 1))


def binomial_series(c: float, order: int) -> TruncatedSeries:
    """(1-z)^c via the stable ratio recurrence a_n = a_{n-1} (n-1-c)/n."""
    if order < 0:
        raise ParameterError("order must be >= 0")
    a = np.empty(order + 1)
    a[0] = 1.0
    for n in range(1, order + 1):
        a[n] = a[n - 1] * (n - 1 - c) / n
    return TruncatedSeries(a)


def series_log(u: TruncatedSeries) -> TruncatedSeries:
    """log of a series with u(0) = 1, by the derivative recurrence
    n b_n = n u_n - sum_{j<n} j b_j u_{n-j}."""
    c = u.coeffs
    if abs(c[0] - 1.0) > 1e-14:
        raise ParameterError("series_log expects constant term 1")
    n_len = len(c)
    b = np.zeros(n_len)
    jb = np.zeros(n_len)  # j * b_j, kept to make the inner product a dot
    for n in range(1, n_len):
        acc = n * c[n] - float(np.dot(jb[1:n], c[n - 1 : 0 : -1]))
        b[n] = acc / n
        jb[n] = acc
    return TruncatedSeries(b)


def hk_series(k: int, order: int) -> TruncatedSeries:
    """Coefficients of (1/(1-z)) * log((1 + z + ... + z^{k-1})/k).

    The log argument is normalized by the scalar 1/k so the series log sees
    constant term 1; -log k is restored on a_0.  The 1/(1-z) factor is a
    cumulative sum.
    """
    if k < 2:
        raise ParameterError("k must be >= 2")
    poly = np.zeros(order + 1)
    poly[: min(k, order + 1)] = 1.0
    lg = series_log(TruncatedSeries(poly)).coeffs.copy()
    lg[0] = -math.log(k)
    return TruncatedSeries(np.cumsum(lg))


def apply_T_a(f: TruncatedSeries, a: float) -> TruncatedSeries:
    """((1-z)^a f)'/(1-z)^a = f' - a f/(1-z); output loses one order."""
    if f.order < 1:
        raise ParameterError("input order must be >= 1 (derivative loses one order)")
    c = f.coeffs
    d = c[1:] * np.arange(1, len(c))
    return TruncatedSeries(d - a * np.cumsum(c)[:-1])


def apply_T_ab(f: TruncatedSeries, a: float, b: float) -> TruncatedSeries:
    """T_{a,h} with the multiplier h = (1-z)^{a-b}."""
    if a <= 0:
        raise ParameterError("a must be positive")
    if b == 0:
        raise ParameterError("b must be nonzero")
    g = apply_T_a(f, a)
    return g.conv(binomial_series(a - b, g.order))


@dataclass(frozen=True)
class OperatorParams:
    a: float
    alpha: float
    b: float | None = None

    def __post_init__(self):
        if self.a <= 0:
            raise ParameterError("a must be positive")
        if not -3.0 <= self.alpha <= -2.0:
            raise ParameterError("alpha must lie in [-3,-2]")

    @property
    def bijective(self) -> bool:
        """Whether a >= -(1+alpha)/2, the bijectivity range of the operator."""
        return self.a >= -(1.0 + self.alpha) / 2.0


def t_weight(k: int, alpha: float) -> float:
    return (k + 1) * (k + 2) ** (alpha / 2.0)


def delta_weight(k: int, a: float, alpha: float) -> float:
    """delta_k = (k+1)^{a - alpha + 1/2} / (a - alpha + 1/2); delta_{-1} = 0."""
    if k < 0:
        return 0.0
    e = a - alpha + 0.5
    return (k + 1) ** e / e


def g_basis(k: int, params: OperatorParams, order: int) -> TruncatedSeries:
    """g_k = (1/t_k) (z^{k+1} - sum_{s=0}^k (delta_s - delta_{s-1}) z^s / delta_k).

    Degree is exactly k+1 and the coefficients sum to 0 (the telescoping sum
    of the delta differences equals delta_k), so g_k lies in (1-z)P.
    """
    if order < k + 1:
        raise ParameterError("order must be at least k+1")
    a, alpha = params.a, params.alpha
    tk = t_weight(k, alpha)
    s = np.arange(0, k + 1, dtype=np.float64)
    e = a - alpha + 0.5
    deltas = (s + 1.0) ** e / e
    diffs = np.diff(np.concatenate([[0.0], deltas]))
    c = np.zeros(order + 1)
    c[: k + 1] = -diffs / (tk * deltas[-1])
    c[k + 1] = 1.0 / tk
    return TruncatedSeries(c)


def weighted_dot(f: TruncatedSeries, g: TruncatedSeries, alpha: float) -> float:
    n = min(len(f.coeffs), len(g.coeffs))
    wt = np.arange(1, n + 1, dtype=np.float64) ** alpha  # (n+1)^alpha for index n
    return float(np.dot(f.coeffs[:n] * wt, g.coeffs[:n]))


def power_iteration_extremes(gram: np.ndarray, residual_tol: float = 1e-9,
                             max_iter: int = 100_000) -> tuple[float, float]:
    """(eig_min, eig_max) of a symmetric PSD matrix by shifted power iteration."""
    lam_max = _power_iterate(gram, residual_tol, max_iter)
    shifted = lam_max * np.eye(len(gram)) - gram
    lam_min = lam_max - _power_iterate(shifted, residual_tol, max_iter)
    return lam_min, lam_max


def _power_iterate(mat: np.ndarray, residual_tol: float, max_iter: int) -> float:
    n = len(mat)
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = mat @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x_new = y / ny
        lam = float(x_new @ (mat @ x_new))
        if np.linalg.norm(mat @ x_new - lam * x_new) <= residual_tol * max(abs(lam), 1.0):
            return lam
        x = x_new
    return lam


@dataclass(frozen=True)
class RieszDiagnostics:
    alpha: float
    gram: np.ndarray
    eig_min: float
    eig_max: float
    C0: float = math.nan
    C1: float = math.nan
    H_of_alpha: float = math.nan
    t_k: object = field(default=None, repr=False)
    delta_k: object = field(default=None, repr=False)

    def gram_to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "value"])
            n = len(self.gram)
            for i in range(n):
                for j in range(i, n):
                    w.writerow([i, j, repr(float(self.gram[i, j]))])


def riesz_constants(params: OperatorParams) -> tuple[float, float, float]:
    """Closed forms of the crossed-term constants and the cubic H(alpha)."""
    a, al = params.a, params.alpha
    c0 = (a - al + 0.5) * (a + 1.5) / (2 * a - al + 2)
    c1 = (0.5 - al) * (a + 1) * (2 * a + 2 - al) / (
        (a - al + 1.5) * (a + (3 - al) / 2) * (a + (1 - al) / 2)
    )
    h = -2 * al**3 + 3 * al**2 + 2 * al + 1
    return c0, c1, h


def dalpha_gram(basis: list[TruncatedSeries], alpha: float,
                params: OperatorParams | None = None) -> RieszDiagnostics:
    """Gram matrix of the basis under the (n+1)^alpha coefficient weight,
    with its eigenvalue extremes."""
    if not basis:
        raise ParameterError("basis must be nonempty")
    order = min(f.order for f in basis)
    mat = np.stack([f.coeffs[: order + 1] for f in basis])
    wt = np.arange(1, order + 2, dtype=np.float64) ** alpha
    gram = (mat * wt) @ mat.T
    gram = 0.5 * (gram + gram.T)
    eig_min, eig_max = power_iteration_extremes(gram)
    if params is not None:
        c0, c1, h = riesz_constants(params)
        return RieszDiagnostics(
            alpha, gram, eig_min, eig_max, c0, c1, h,
            t_k=lambda k: t_weight(k, params.alpha),
            delta_k=lambda k: delta_weight(k, params.a, params.alpha),
        )
    return RieszDiagnostics(alpha, gram, eig_min, eig_max)


def span_distance(target: TruncatedSeries, basis: list[TruncatedSeries],
                  alpha: float, regularization: float = 1e-12,
                  condition_cap: float = 1e14) -> float:
    """Distance from target to span(basis) in the (n+1)^alpha-weighted 2-norm,
    via regularized normal equations and a Cholesky solve."""
    if not basis:
        raise ParameterError("basis must be nonempty")
    order = min([f.order for f in basis] + [target.order])
    mat = np.stack([f.coeffs[: order + 1] for f in basis])
    wt = np.arange(1, order + 2, dtype=np.float64) ** alpha
    gram = (mat * wt) @ mat.T
    gram = 0.5 * (gram + gram.T) + regularization * np.eye(len(basis))
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > condition_cap:
        raise IllConditionedBasisError(
            f"basis Gram condition estimate {cond:.3e} beyond tolerance", cond)
    t = target.coeffs[: order + 1]
    b = mat @ (wt * t)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedBasisError(
            f"Gram not positive definite after regularization: {exc}", cond) from exc
    y = np.linalg.solve(chol, b)
    coeffs = np.linalg.solve(chol.T, y)
    # explicit residual: unlike the normal-equation identity
    # ||t||^2 - b.G^{-1}b, it does not inflate an in-span target by the
    # regularization shift
    resid = t - coeffs @ mat
    return math.sqrt(max(float(np.dot(resid * wt, resid)), 0.0))


def series_to_csv(f: TruncatedSeries, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "a_n"])
        for n, a_n in enumerate(f.coeffs):
            w.writerow([n, repr(float(a_n))])
