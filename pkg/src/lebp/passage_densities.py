"""First-passage-point densities for N nonintersecting loop-erased paths.

Paths start on the left edge of the rectangle (0, L) x (0, pi) at ordered
angles phi and are conditioned to reach the right edge with their loop
erasures mutually avoiding.  The density of their ordered first-passage
points on a vertical cut is a ratio of boundary determinants and chamber
integrals of interior determinants.

The chamber integrals (norms) are evaluated by expanding the kernel
determinant in its separable sine series and integrating each antisymmetric
sine determinant over the ordered chamber in closed form.  A single
determinant is antisymmetric, so symmetrized cube quadrature would pick up a
non-smooth sign factor; the series route keeps spectral accuracy and yields
certified geometric tails.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import DomainError, PrecisionError, TruncationError
from .numerics import poly_geom_tail
from .rect_kernels import (
    RectConfig,
    WeylPoint,
    as_weyl,
    boundary_poisson_rect,
    fomin_boundary_det,
    fomin_inner_det,
    hat_h,
)

_TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class ChamberSequence:
    """Ordered cut positions 0 < x_1 < ... < x_M, optionally inside (0, L)."""

    cuts: tuple
    L: float = None

    def __post_init__(self):
        cuts = tuple(float(x) for x in self.cuts)
        if not cuts:
            raise DomainError("need at least one cut")
        if cuts[0] <= 0.0 or any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DomainError("cuts must be strictly increasing and positive")
        if self.L is not None and not (float(self.L) > cuts[-1]):
            raise DomainError("L must exceed the last cut")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "L", None if self.L is None else float(self.L))

    @property
    def m(self):
        return len(self.cuts)


# --- exact ordered integrals of sine determinants ---------------------------


@lru_cache(maxsize=None)
def _iterated_sine_integral(freqs):
    """I(m_1..m_k) = integral over 0 < t_1 < ... < t_k < pi of prod_i sin(m_i t_i).

    The running antiderivative stays a cosine polynomial with integer
    frequencies (sin times cos never produces secular terms), so the iterated
    integral is exact up to rounding.
    """
    poly = {0: 1.0}  # F(t) = sum_w poly[w] * cos(w t)
    for m in freqs:
        nxt = {}
        for w, cw in poly.items():
            # integral_0^t sin(m s) cos(w s) ds, split by product-to-sum
            for freq in (m + w, m - w):
                if freq == 0:
                    continue  # the sin(0 * s) piece vanishes
                half = 0.5 * cw / freq
                nxt[0] = nxt.get(0, 0.0) + half
                af = abs(freq)
                nxt[af] = nxt.get(af, 0.0) - half
        poly = nxt
    return sum(c * (1.0 if w % 2 == 0 else -1.0) for w, c in poly.items())


def _permutation_sign(perm):
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1.0 if inv % 2 else 1.0


@lru_cache(maxsize=None)
def ordered_sine_det_integral(freqs):
    """Integral of det[sin(freqs_i * t_k)] over the ordered chamber in (0, pi)^k."""
    k = len(freqs)
    total = 0.0
    for perm in permutations(range(k)):
        total += _permutation_sign(perm) * _iterated_sine_integral(
            tuple(freqs[p] for p in perm)
        )
    return total


# --- separable series for the norms -----------------------------------------


def _distinct_tuples(total, parts, minimum=1):
    """Strictly increasing tuples of `parts` integers >= minimum summing to total."""
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    rest_min = (parts - 1) * (minimum + 1) + (parts - 1) * (parts - 2) // 2
    first = minimum
    while first + rest_min + (parts - 1) * (first - minimum) <= total:
        # remaining parts are > first; their minimal sum given that is
        remaining = total - first
        for tail in _distinct_tuples(remaining, parts - 1, first + 1):
            yield (first,) + tail
        first += 1


@lru_cache(maxsize=64)
def _norm_series(kind, L, x, n, tol, n_max):
    """Series data for a chamber norm: frequency tuples and coefficients.

    Enumerates strictly increasing frequency tuples graded by total s, with
    per-tuple coefficient prod_i coeff(n_i) * T(tuple), where T is the
    ordered chamber integral of the sine determinant.  Stops once the
    certified tail (geometric in the total, polynomial corrections from
    tuple counting and coefficient growth) is below the target.

    kind "boundary" uses the boundary-kernel coefficients (x ignored); kind
    "inner" the interior ones at cut x.  Returns (freq_tuples, coefficients,
    tail_bound); the arrays are cached, callers must not mutate them.
    """
    if kind == "boundary":
        gap_rate = L

        def coeff(f):
            return _TWO_OVER_PI * 2.0 * f * math.exp(-f * L) / -math.expm1(-2.0 * f * L)

        extra_power = 1  # the factor n in the coefficient
    else:
        gap_rate = L - x

        def coeff(f):
            return _TWO_OVER_PI * math.exp(-f * (L - x)) * (
                -math.expm1(-2.0 * f * x)
            ) / -math.expm1(-2.0 * f * L)

        extra_power = 0
    q = math.exp(-gap_rate)
    cw = 2.0 / -math.expm1(-2.0 * L)  # bound on the sinh-denominator factor
    const = (_TWO_OVER_PI * cw) ** n * math.pi**n * math.factorial(n)
    factors = [(1.0, n - 1)]
    if extra_power:
        factors.append((0.0, n * extra_power))

    def tail(s_done):
        return const * poly_geom_tail(q, factors, s_done + 1)

    s_min = n * (n + 1) // 2
    # absolute target from the policy, sharpened toward the leading term's
    # own scale so exponentially small norms keep relative accuracy for free
    lead = abs(
        math.prod(coeff(i) for i in range(1, n + 1))
        * ordered_sine_det_integral(tuple(range(1, n + 1)))
    )
    target = min(tol, max(lead * 1e-15, 5e-324)) if lead > 0.0 else tol

    freqs, coefs = [], []
    s = s_min
    while tail(s - 1) > target:
        if s > n_max:
            raise TruncationError(
                f"norm series reached frequency budget {n_max}",
                achieved=tail(s - 1),
            )
        for tup in _distinct_tuples(s, n):
            t_val = ordered_sine_det_integral(tup)
            if t_val == 0.0:
                continue
            c = t_val
            for f in tup:
                c *= coeff(f)
            freqs.append(tup)
            coefs.append(c)
        s += 1
    return tuple(freqs), np.asarray(coefs), tail(s - 1)


def _sine_det_grid(freq_tuples, theta):
    """det[sin(f_i * theta_k)] for each frequency tuple, vectorized over a
    (..., N) angle array.  Returns shape (len(freq_tuples),) + theta.shape[:-1]."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    flat = theta.reshape(-1, n)
    all_freqs = sorted({f for tup in freq_tuples for f in tup})
    index = {f: i for i, f in enumerate(all_freqs)}
    # sines[i, p, k] = sin(f_i * theta[p, k])
    sines = np.sin(np.asarray(all_freqs, float)[:, None, None] * flat[None, :, :])
    out = np.zeros((len(freq_tuples), flat.shape[0]))
    perms = [(p, _permutation_sign(p)) for p in permutations(range(n))]
    for t, tup in enumerate(freq_tuples):
        acc = out[t]
        for perm, sign in perms:
            prod = sines[index[tup[perm[0]]], :, 0].copy()
            for k in range(1, n):
                prod *= sines[index[tup[perm[k]]], :, k]
            acc += sign * prod
    return out.reshape((len(freq_tuples),) + theta.shape[:-1])


def norm_boundary(cfg, pol, phi):
    """Chamber integral over rho of det[H_boundary(i*phi_j, L + i*rho_k)].

    The total crossing weight of N paths started at phi, summed over ordered
    right-edge exits.  The series is summed down to pol.tol or to machine
    relative precision of its leading term, whichever is sharper, so the value
    carries full relative accuracy even when it is exponentially small.
    """
    phi = as_weyl(phi)
    freqs, coefs, _ = _norm_series("boundary", cfg.L, 0.0, phi.n, pol.tol, pol.n_max)
    dets = _sine_det_grid(freqs, phi.angles[None, :])[:, 0]
    return float(coefs @ dets)


def _check_cut(cfg, pol, x):
    if not (0.0 < x < cfg.L):
        raise DomainError("need 0 < x < L")
    if cfg.L - x < pol.min_gap:
        raise PrecisionError(f"gap {cfg.L - x:.3g} below policy min_gap")


def norm_inner(cfg, pol, x, theta):
    """Chamber integral over rho of det[H(x + i*theta_j, L + i*rho_k)].

    The total crossing weight of N paths currently at (x, theta), summed over
    ordered right-edge exits.  Tolerance handling as in norm_boundary.
    """
    theta = as_weyl(theta)
    _check_cut(cfg, pol, x)
    freqs, coefs, _ = _norm_series("inner", cfg.L, x, theta.n, pol.tol, pol.n_max)
    dets = _sine_det_grid(freqs, theta.angles[None, :])[:, 0]
    return float(coefs @ dets)


def _norm_inner_grid(cfg, pol, x, theta):
    """norm_inner evaluated on a (..., N) array of (not necessarily ordered)
    angle tuples; antisymmetric continuation off the ordered chamber."""
    theta = np.asarray(theta, dtype=float)
    _check_cut(cfg, pol, x)
    freqs, coefs, _ = _norm_series("inner", cfg.L, x, theta.shape[-1], pol.tol, pol.n_max)
    dets = _sine_det_grid(freqs, theta)
    return np.tensordot(coefs, dets, axes=(0, 0))


def _boundary_det_grid(cfg, pol, phi, theta):
    """det[H_boundary(i*phi_j, x-cut angles theta_k)] on a (..., N) angle array."""
    phi = as_weyl(phi)
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    if phi.n != n:
        raise DomainError("phi and theta tuples must have equal length")
    flat = theta.reshape(-1, n)
    # entries[j, p, k] = H_boundary(phi_j, theta[p, k]); one series pass
    entries = boundary_poisson_rect(
        cfg, pol, phi.angles[:, None, None], flat[None, :, :]
    ).value
    out = np.zeros(flat.shape[0])
    for perm in permutations(range(n)):
        sign = _permutation_sign(perm)
        prod = entries[perm[0], :, 0].copy()
        for k in range(1, n):
            prod *= entries[perm[k], :, k]
        out += sign * prod
    return out.reshape(theta.shape[:-1])


# --- densities ---------------------------------------------------------------


def pdf_first_passage_finite(cfg, pol, x, theta, phi):
    """Density of the ordered first-passage points theta on the cut at x for N
    paths from phi, in the rectangle of length L = cfg.L.

    Ratio of the crossing determinant at the cut, the remaining norm from the
    cut, and the total norm from the start.
    """
    theta, phi = as_weyl(theta), as_weyl(phi)
    if theta.n != phi.n:
        raise DomainError("theta and phi must have equal length")
    L = cfg.L
    if not (0.0 < x < L):
        raise DomainError("need 0 < x < L")
    cut = fomin_boundary_det(RectConfig(x), pol, phi, theta)
    return cut * norm_inner(cfg, pol, x, theta) / norm_boundary(cfg, pol, phi)


def start_weight(x, n):
    """prod_{j=1..N} sinh(j x) / N!, the infinite-strip norm prefactor."""
    if not (x > 0.0):
        raise DomainError("x must be positive")
    w = 1.0
    for j in range(1, n + 1):
        w *= math.sinh(j * x)
    return w / math.factorial(n)


def pdf_first_passage(pol, x, theta, phi):
    """Infinite-strip first-passage density on the cut at x.

    The large-L limit of pdf_first_passage_finite: the norm ratio collapses
    to start_weight(x) * hat_h(theta) / hat_h(phi).
    """
    theta, phi = as_weyl(theta), as_weyl(phi)
    if theta.n != phi.n:
        raise DomainError("theta and phi must have equal length")
    cut = fomin_boundary_det(RectConfig(x), pol, phi, theta)
    return cut * start_weight(x, theta.n) * hat_h(theta) / hat_h(phi)


def transition_factor(cfg, pol, x_m, theta_m, x_next, theta_next):
    """Conditional density factor for the passage points at the next cut.

    Finite L (cfg.L a number): norm ratio times the interior determinant of
    the sub-rectangle ending at x_next.  Infinite strip (cfg None or L=inf):
    the norm ratio collapses to start-weight and hat_h ratios.
    """
    theta_m, theta_next = as_weyl(theta_m), as_weyl(theta_next)
    if theta_m.n != theta_next.n:
        raise DomainError("angle tuples must have equal length")
    if not (0.0 < x_m < x_next):
        raise DomainError("cuts must satisfy 0 < x_m < x_next")
    det = fomin_inner_det(RectConfig(x_next), pol, x_m, theta_m, theta_next)
    if cfg is None or not math.isfinite(cfg.L):
        ratio = (
            start_weight(x_next, theta_m.n)
            * hat_h(theta_next)
            / (start_weight(x_m, theta_m.n) * hat_h(theta_m))
        )
        return det * ratio
    if not (x_next < cfg.L):
        raise DomainError("cuts must lie inside (0, L)")
    ratio = norm_inner(cfg, pol, x_next, theta_next) / norm_inner(cfg, pol, x_m, theta_m)
    return det * ratio


def joint_pdf(cfg, pol, seq, thetas, phi):
    """Joint density of the ordered passage points at every cut of `seq`.

    Telescoped product of the first-cut density and the transition factors:
    the boundary determinant at the first cut, interior determinants between
    consecutive cuts, and a single norm ratio at the last cut.  cfg of None
    (or seq.L None) selects the infinite strip.
    """
    phi = as_weyl(phi)
    thetas = [as_weyl(t) for t in thetas]
    if len(thetas) != seq.m:
        raise DomainError("need one angle tuple per cut")
    if any(t.n != phi.n for t in thetas):
        raise DomainError("all angle tuples must match phi in length")
    finite = cfg is not None and math.isfinite(cfg.L)
    if finite and seq.L is not None and abs(seq.L - cfg.L) > 0.0:
        raise DomainError("sequence and config disagree about L")
    cuts = seq.cuts
    if finite and not (cuts[-1] < cfg.L):
        raise DomainError("cuts must lie inside (0, L)")

    value = fomin_boundary_det(RectConfig(cuts[0]), pol, phi, thetas[0])
    for m in range(seq.m - 1):
        value *= fomin_inner_det(
            RectConfig(cuts[m + 1]), pol, cuts[m], thetas[m], thetas[m + 1]
        )
    if finite:
        value *= norm_inner(cfg, pol, cuts[-1], thetas[-1]) / norm_boundary(cfg, pol, phi)
    else:
        value *= start_weight(cuts[-1], phi.n) * hat_h(thetas[-1]) / hat_h(phi)
    return value
