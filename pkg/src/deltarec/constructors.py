"""Closed-form solution families and their parameter equations.

Negative-margin problems admit exactly the discrete supports with gaps
of at least |delta|; positive-margin problems with bounded support
admit exactly the finite atom chains ending with a gap of 1/c.  On
unbounded support the exponential family solves the continuous problem
when theta * exp(-theta*delta) = c, the geometric family solves the
lattice problem when p * (1-p)**delta = c, and at the tangent values of
c*delta the gamma-exponential and geometric/negative-binomial mixtures
appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ClosedForm,
    ContinuousSolution,
    DiscreteSurvival,
    ProblemParams,
    ValidationError,
)

__all__ = [
    "RateRoots",
    "construct_neg_delta",
    "neg_delta_pinned_g0",
    "construct_bounded",
    "solve_exponential_rates",
    "solve_geometric_params",
    "gamma_exp_mixture",
    "geom_negbin_mixture",
    "exponential_member",
    "geometric_member",
    "continuous_threshold",
    "lattice_threshold",
    "tangent_continuous_params",
    "tangent_lattice_params",
]

_REGIME_RTOL = 1e-12


@dataclass(frozen=True)
class RateRoots:
    """Roots of the transcendental rate equation for one family.

    regime is "none" above the tangency threshold, "tangent" at it
    (single root), and "two" below it (roots straddling the maximiser).
    """

    regime: str
    roots: tuple

    def to_dict(self) -> dict:
        return {"regime": self.regime, "roots": list(self.roots)}


def continuous_threshold() -> float:
    return 1.0 / math.e


def lattice_threshold(delta: int) -> float:
    """Largest c*delta admitting lattice solutions: (delta/(delta+1))**(delta+1)."""
    delta = _positive_int(delta)
    return (delta / (delta + 1.0)) ** (delta + 1)


def tangent_continuous_params(delta: float) -> ProblemParams:
    return ProblemParams(c=1.0 / (math.e * delta), delta=delta)


def tangent_lattice_params(delta: int) -> ProblemParams:
    delta = _positive_int(delta)
    return ProblemParams(c=lattice_threshold(delta) / delta, delta=delta)


# ---------------------------------------------------------------------------
# delta < 0: discrete supports with gaps >= |delta|


def neg_delta_pinned_g0(params: ProblemParams, first_gap: float) -> float:
    """The initial survival value forced by a zero residual at the leftmost
    atom: G(a0) = 1 / (1 + c*(a1 - a0))."""
    return 1.0 / (1.0 + params.c * first_gap)


def construct_neg_delta(
    params: ProblemParams,
    points,
    g0: float | None = None,
    n_max: int | None = None,
) -> DiscreteSurvival:
    """Survival values on a delta<0 support chain.

    Each G(a_n) consumes the forward gap a_{n+1}-a_n, so the table keeps
    one atom fewer than the points supplied; the dropped point fixes
    valid_to and the exact remaining tail integral survival[-1]/c.
    With g0=None the leftmost value is pinned to 1/(1+c*(a1-a0)), the
    unique choice with zero residual at a0; an explicit g0 in (0, 1) is
    accepted and the certificate then reports the a0 residual honestly.
    """
    if params.delta >= 0:
        raise ValidationError("construct_neg_delta requires delta < 0")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size < 2:
        raise ValidationError("need at least two support points")
    gaps = np.diff(pts)
    bad = np.nonzero(gaps < abs(params.delta) - 1e-12)[0]
    if bad.size:
        raise ValidationError(
            f"gap a[{bad[0]+1}]-a[{bad[0]}]={gaps[bad[0]]:g} is below |delta|={abs(params.delta):g}"
        )
    if n_max is None:
        n_max = pts.size - 1
    if n_max < 1 or pts.size < n_max + 1:
        raise ValidationError("need at least n_max+1 points (the formula consumes forward gaps)")
    if g0 is None:
        g0 = neg_delta_pinned_g0(params, gaps[0])
    elif not 0.0 < g0 < 1.0:
        raise ValidationError("G(a0) must lie in (0, 1)")
    # G(a_n) = g0 * prod_{i=1..n} 1/(1 + c*(a_{i+1}-a_i))
    factors = 1.0 / (1.0 + params.c * gaps[1:n_max])
    survival = g0 * np.concatenate(([1.0], np.cumprod(factors)))
    return DiscreteSurvival(
        pts[:n_max],
        survival,
        truncated=True,
        valid_to=float(pts[n_max]),
        tail_beyond=float(survival[-1]) / params.c,
    )


# ---------------------------------------------------------------------------
# delta > 0, bounded support


def construct_bounded(params: ProblemParams, points, g0: float) -> DiscreteSurvival:
    """The finite chain a_0 < ... < a_m with gaps in (delta, 1/c), final gap
    exactly 1/c, and survival G(a_n) = g0 * prod (1 - c*gap_i), G(a_m) = 0."""
    if params.delta <= 0:
        raise ValidationError("construct_bounded requires delta > 0")
    if params.c * params.delta >= 1.0:
        raise ValidationError(f"bounded supports need c*delta < 1, got {params.c * params.delta:g}")
    if not 0.0 < g0 < 1.0:
        raise ValidationError("G(a0) must lie in (0, 1)")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size < 2:
        raise ValidationError("need m >= 1, i.e. at least two support points")
    gaps = np.diff(pts)
    inv_c = 1.0 / params.c
    for i, g in enumerate(gaps[:-1]):
        if g <= params.delta:
            raise ValidationError(f"gap a[{i+1}]-a[{i}]={g:g} must exceed delta={params.delta:g}")
        if g >= inv_c:
            raise ValidationError(f"gap a[{i+1}]-a[{i}]={g:g} must be below 1/c={inv_c:g}")
    if abs(gaps[-1] - inv_c) > 1e-12 * max(1.0, inv_c):
        raise ValidationError(f"final gap must equal 1/c={inv_c:g}, got {gaps[-1]:g}")
    factors = 1.0 - params.c * gaps[:-1]
    survival = np.concatenate((g0 * np.concatenate(([1.0], np.cumprod(factors))), [0.0]))
    return DiscreteSurvival(pts, survival, truncated=False)


# ---------------------------------------------------------------------------
# rate equations


def _bisect(f, lo: float, hi: float, increasing: bool) -> float:
    """Root of f on a sign-changing bracket, bisected to machine width.

    Guaranteed convergence is worth more than speed here: near the
    tangent configuration the function is nearly flat at the root and
    derivative methods stall.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise ValidationError("bisection bracket does not change sign")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def solve_exponential_rates(params: ProblemParams) -> RateRoots:
    """Roots of theta * exp(-theta*delta) = c.

    The map is unimodal with maximum 1/(e*delta) at theta = 1/delta, so
    roots are bracketed on (0, 1/delta] and [1/delta, B) with B grown
    until the map falls back below c.
    """
    if params.delta <= 0:
        raise ValidationError("the exponential rate equation applies to delta > 0")
    c, d = params.c, params.delta
    prod = c * d
    thr = continuous_threshold()
    if prod > thr * (1.0 + _REGIME_RTOL):
        return RateRoots("none", ())
    if abs(prod - thr) <= thr * _REGIME_RTOL:
        return RateRoots("tangent", (1.0 / d,))

    def f(th: float) -> float:
        return th * math.exp(-th * d) - c

    lo = c  # theta > c since exp(-theta*delta) < 1 at the lower root
    while f(lo) > 0:
        lo *= 0.5
    th1 = _bisect(f, lo, 1.0 / d, increasing=True)
    hi = 2.0 / d
    while f(hi) > 0:
        hi *= 2.0
    th2 = _bisect(f, 1.0 / d, hi, increasing=False)
    return RateRoots("two", (th1, th2))


def solve_geometric_params(c: float, delta: int) -> RateRoots:
    """Roots of p * (1-p)**delta = c on (0, 1), straddling 1/(delta+1)."""
    delta = _positive_int(delta)
    if c <= 0:
        raise ValidationError("c must be positive")
    pmax = 1.0 / (delta + 1.0)
    peak = pmax * (1.0 - pmax) ** delta
    thr = lattice_threshold(delta)
    prod = c * delta
    if prod > thr * (1.0 + _REGIME_RTOL):
        return RateRoots("none", ())
    if abs(prod - thr) <= thr * _REGIME_RTOL:
        return RateRoots("tangent", (pmax,))

    def f(p: float) -> float:
        return p * (1.0 - p) ** delta - c

    p1 = _bisect(f, 1e-300, pmax, increasing=True)
    hi = 1.0 - 1e-16
    if f(hi) > 0:  # pathological c below float resolution of the right branch
        raise ValidationError("right bracket failed; c too small to resolve")
    p2 = _bisect(f, pmax, hi, increasing=False)
    return RateRoots("two", (p1, p2))


# ---------------------------------------------------------------------------
# tangent-case mixture families


def gamma_exp_mixture(
    delta: float,
    alpha: float,
    horizon_delays: int = 30,
    points_per_delay: int = 1024,
) -> ContinuousSolution:
    """G(t) = (alpha*t + 1) * exp(-t/delta), a member at c = 1/(e*delta).

    Mixture of the rate-1/delta exponential and the shape-2 gamma with
    weights 1 - alpha*delta and alpha*delta; alpha in [0, 1/delta]
    keeps G decreasing.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    if not 0.0 <= alpha <= 1.0 / delta + 1e-15:
        raise ValidationError("alpha must lie in [0, 1/delta] for a decreasing survival")
    params = tangent_continuous_params(delta)
    h = delta / points_per_delay
    t = np.arange(horizon_delays * points_per_delay + 1) * h
    cf = ClosedForm("gamma_exp_mixture", {"alpha": float(alpha), "delta": float(delta)})
    return ContinuousSolution(
        params=params,
        grid_step=h,
        values=np.asarray(cf.value(t), dtype=float),
        closed_form=cf,
        error_estimate=0.0,
    )


def geom_negbin_mixture(delta: int, alpha: float, n_max: int = 200) -> DiscreteSurvival:
    """G(t) = (alpha*floor(t) + 1) * r**(floor(t)+1) with r = delta/(delta+1),
    a lattice member at c = r**(delta+1)/delta; alpha in (0, 1/delta)."""
    delta = _positive_int(delta)
    if not 0.0 < alpha < 1.0 / delta:
        raise ValidationError("alpha must lie in (0, 1/delta)")
    r = delta / (delta + 1.0)
    i = np.arange(n_max + 1, dtype=float)
    survival = (alpha * i + 1.0) * r ** (i + 1.0)
    m = n_max + 1
    # exact geometric-series tails: sum_{j>=m} r^j and sum_{j>=m} j r^j
    s_geo = r**m / (1.0 - r)
    s_lin = r**m * (m - (m - 1) * r) / (1.0 - r) ** 2
    tail = r * (alpha * s_lin + s_geo)
    return DiscreteSurvival(
        i, survival, truncated=True, valid_to=float(n_max + 1), tail_beyond=float(tail)
    )


# ---------------------------------------------------------------------------
# plain members used throughout the tests and the verifier


def exponential_member(
    params: ProblemParams,
    theta: float,
    horizon_delays: int = 30,
    points_per_delay: int = 1024,
) -> ContinuousSolution:
    """The Exp(theta) survival as a grid solution with its exact closed form
    attached; theta must solve the rate equation for params."""
    resid = abs(theta * math.exp(-theta * params.delta) - params.c)
    if resid > 1e-9 * params.c:
        raise ValidationError(
            f"theta={theta:g} does not solve the rate equation (residual {resid:.2e})"
        )
    h = params.delta / points_per_delay
    t = np.arange(horizon_delays * points_per_delay + 1) * h
    cf = ClosedForm("exponential", {"theta": float(theta)})
    return ContinuousSolution(
        params=params,
        grid_step=h,
        values=np.exp(-theta * t),
        closed_form=cf,
        error_estimate=0.0,
    )


def geometric_member(p: float, n_max: int = 200) -> DiscreteSurvival:
    """Geom(p) on {0, 1, ...}: G(i) = (1-p)**(i+1), with the exact tail."""
    if not 0.0 < p < 1.0:
        raise ValidationError("p must lie in (0, 1)")
    i = np.arange(n_max + 1, dtype=float)
    q = 1.0 - p
    return DiscreteSurvival(
        i,
        q ** (i + 1.0),
        truncated=True,
        valid_to=float(n_max + 1),
        tail_beyond=float(q ** (n_max + 2) / p),
    )


def _positive_int(delta) -> int:
    if isinstance(delta, float) and not delta.is_integer():
        raise ValidationError("lattice problems require integer delta")
    delta = int(delta)
    if delta < 1:
        raise ValidationError("delta must be a positive integer")
    return delta
