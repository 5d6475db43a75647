"""Shared numerical infrastructure.

Quadrature rules on (0, pi), chamber integration, pivoted-LU determinants,
overflow-safe sinh ratios, and certified tail bounds for geometric and
polynomial-times-geometric series.  Everything downstream (rectangle kernels,
passage densities, correlation kernels) builds on these primitives.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import lu_factor

from .errors import DomainError, PrecisionError


class TailBoundedValue(NamedTuple):
    """A computed value together with a certified bound on the truncation error."""

    value: float
    bound: float


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation policy for sine-series evaluations.

    Parameters
    ----------
    tol : float
        Absolute truncation target.  Series evaluators stop once their
        certified tail bound drops below this (they may keep a few extra
        terms for free relative accuracy, but never fewer).
    n_max : int
        Hard cap on the series index; exceeding it raises TruncationError.
    min_gap : float
        Smallest geometric gap (distance to the boundary, or |x - x'| in
        kernel tails) accepted before the evaluator refuses to certify.
    """

    tol: float = 1e-12
    n_max: int = 100_000
    min_gap: float = 1e-3

    def __post_init__(self):
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise PrecisionError("tol must be a positive finite number")
        if self.n_max < 1:
            raise PrecisionError("n_max must be at least 1")
        if not (self.min_gap > 0.0):
            raise PrecisionError("min_gap must be positive")


DEFAULT_POLICY = SeriesPolicy()


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integration over an interval (default (0, pi))."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise DomainError("nodes and weights must be matching 1-d arrays")
        if np.any(np.diff(nodes) <= 0.0):
            raise DomainError("nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def order(self):
        return self.nodes.size


@lru_cache(maxsize=None)
def _leggauss_cached(order, a, b):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (b - a) * (x + 1.0) + a
    weights = 0.5 * (b - a) * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(order, a=0.0, b=math.pi):
    """Gauss-Legendre rule with `order` nodes on (a, b); exact through degree 2*order-1."""
    if order < 1:
        raise DomainError("order must be at least 1")
    if not b > a:
        raise DomainError("need b > a")
    nodes, weights = _leggauss_cached(int(order), float(a), float(b))
    return QuadratureRule(nodes, weights)


def chamber_integrate(f, rule, ndim):
    """Integrate a symmetric function over the ordered chamber 0 < t_1 < ... < t_ndim < b.

    The integrand is evaluated on the full tensor-product grid and the cube
    integral is divided by ndim!; the two agree exactly when f is invariant
    under coordinate permutations (the only supported use).

    Parameters
    ----------
    f : callable
        Accepts an array of shape (m, ndim) and returns shape (m,).
    rule : QuadratureRule
        One-dimensional rule, used in tensor product.
    ndim : int
        Number of coordinates.
    """
    if ndim < 1:
        raise DomainError("ndim must be at least 1")
    grids = np.meshgrid(*([rule.nodes] * ndim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wt = rule.weights
    for _ in range(ndim - 1):
        wt = np.multiply.outer(wt, rule.weights)
    vals = np.asarray(f(pts), dtype=float).ravel()
    if vals.shape != (pts.shape[0],):
        raise DomainError("integrand must return one value per point")
    return float(wt.ravel() @ vals) / math.factorial(ndim)


def det_lu(a):
    """Determinant via LU with partial pivoting.

    Singular input returns exactly 0.0.  Matrices larger than 64 x 64 are
    rejected; the library never needs them and the restriction keeps the
    plain product of pivots safe from gratuitous overflow.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("det_lu needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n > 64:
        raise DomainError("det_lu is limited to 64 x 64")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on exact singularity
        lu, piv = lu_factor(a, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        return 0.0
    sign = -1.0 if (np.sum(piv != np.arange(n)) % 2) else 1.0
    return float(sign * np.prod(diag))


def sinh_ratio(n, num, den):
    """sinh(n*num) / sinh(n*den) for positive arguments, in exponential form.

    Stable for arbitrarily large n*den when num <= den (never forms a large
    sinh).  For num > den the result grows like exp(n*(num-den)) and will
    overflow in the usual float sense; callers on that branch keep n*(num-den)
    moderate.
    """
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0.0):
        raise DomainError("n must be positive")
    if not (num > 0.0 and den > 0.0):
        raise DomainError("num and den must be positive")
    out = np.exp(n * (num - den)) * (np.expm1(-2.0 * n * num) / np.expm1(-2.0 * n * den))
    if out.ndim == 0:
        return float(out)
    return out


def geometric_tail(coeff, ratio, n_start):
    """Upper bound for sum_{n >= n_start} coeff * ratio**n, for 0 <= ratio < 1."""
    if not (0.0 <= ratio < 1.0):
        raise DomainError("ratio must lie in [0, 1)")
    return coeff * ratio**n_start / (1.0 - ratio)


def poly_geom_tail(q, factors, n_start):
    """Upper bound for sum_{n >= n_start} q**n * prod_i (n + c_i)**p_i.

    factors is a sequence of (c, p) pairs with c > -n_start and p >= 0.  The
    sum is accumulated term by term until the one-step ratio drops below
    (1+q)/2, at which point a geometric majorant closes the tail; the ratio
    is monotone decreasing, so the bound is rigorous.
    """
    if not (0.0 < q < 1.0):
        raise DomainError("q must lie in (0, 1)")
    cutoff = 0.5 * (1.0 + q)

    def term(n):
        t = q**n
        for c, p in factors:
            t *= (n + c) ** p
        return t

    total = 0.0
    n = n_start
    t = term(n)
    while True:
        r = q
        for c, p in factors:
            r *= ((n + 1.0 + c) / (n + c)) ** p
        if r <= cutoff:
            return total + t / (1.0 - r)
        total += t
        n += 1
        t = term(n)


def ordered_minor_sum(m):
    """Sum of det M[:, (c_1..c_N)] over all strictly increasing column tuples.

    m has shape (N, K) with N <= 12.  Dynamic programming over columns with
    row-subset states; O(K * 2**N * N) time, exact up to rounding.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DomainError("need a 2-d array")
    nrows, ncols = m.shape
    if nrows > 12:
        raise DomainError("ordered_minor_sum is limited to 12 rows")
    # acc[s] = sum over ordered column tuples (within processed columns) of the
    # minor on the row subset encoded by bitmask s.
    acc = np.zeros(1 << nrows)
    acc[0] = 1.0
    rows_of = [[r for r in range(nrows) if s >> r & 1] for s in range(1 << nrows)]
    for k in range(ncols):
        new = acc.copy()
        for s in range(1, 1 << nrows):
            rows = rows_of[s]
            # expand det along the appended (last) column; the cofactor of the
            # bottom-most row is +1 and signs alternate upward
            val = 0.0
            sign = 1.0
            for idx in range(len(rows) - 1, -1, -1):
                r = rows[idx]
                val += sign * m[r, k] * acc[s & ~(1 << r)]
                sign = -sign
            new[s] += val
        acc = new
    return float(acc[(1 << nrows) - 1])
