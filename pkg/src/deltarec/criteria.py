"""Positivity criteria on initial functions and the sandwich bounds.

Whether an admissible initial segment extends to a positive solution
is controlled by its value at delta relative to two averaged
functionals of its shape (I1, I2 on the continuum; S1, S2 on the
lattice).  Positivity of the value three delays out gives a necessary
lower bound N; a linear two-term recurrence minorising the values at
delay multiples gives a sufficient bound beta, valid when
a < 3 - 2*sqrt(2) (a = c*delta/2 continuous, c*(delta+1)/2 lattice);
and on the continuum a shape-free sufficient bound 2a/(1-lambda2)
follows from concavity of the prefix integral.  The same recurrence
sequence, paired with a geometric envelope, sandwiches the solution at
delay multiples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InitialFunction, ProblemParams, ValidationError
from .constructors import continuous_threshold, lattice_threshold

__all__ = [
    "A_LIMIT",
    "RecurrenceParams",
    "InitialFunctionals",
    "CriterionReport",
    "DominationReport",
    "SandwichBounds",
    "recurrence_params",
    "recurrence_solution",
    "dominated_sequence_bound",
    "discrete_convex_sum_bound",
    "check_continuous",
    "check_lattice",
    "sandwich_bounds",
    "gap_region_table",
    "random_phi_continuous",
    "random_phi_lattice",
    "retarget_initial",
]

A_LIMIT = 3.0 - 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class RecurrenceParams:
    """Characteristic data of x**2 - (1-a)x + a: real roots in (0, 1)."""

    a: float
    D: float
    lambda1: float
    lambda2: float


def recurrence_params(a: float) -> RecurrenceParams:
    if not 0.0 < a < A_LIMIT:
        raise ValidationError(
            f"a={a:g} outside (0, 3-2*sqrt(2)); the characteristic roots are not real"
        )
    D = (1.0 - a) ** 2 - 4.0 * a
    sq = math.sqrt(D)
    l1 = 0.5 * (1.0 - a + sq)
    l2 = 0.5 * (1.0 - a - sq)
    return RecurrenceParams(a=a, D=D, lambda1=l1, lambda2=l2)


def recurrence_solution(rp: RecurrenceParams, a0: float, a1: float, n: int) -> np.ndarray:
    """Closed form A*l1**k + B*l2**k for a_k = (1-a) a_{k-1} - a a_{k-2}."""
    sq = math.sqrt(rp.D)
    A = (a1 - a0 * rp.lambda2) / sq
    B = (a0 * rp.lambda1 - a1) / sq
    k = np.arange(n + 1)
    return A * rp.lambda1**k + B * rp.lambda2**k


@dataclass(frozen=True)
class DominationReport:
    dominated: bool
    min_margin: float
    reference: np.ndarray


def dominated_sequence_bound(rp: RecurrenceParams, x) -> DominationReport:
    """Check x_k >= (1-a) x_{k-1} - a x_{k-2} for k >= 2 and conclude
    x_k >= a_k, where (a_k) runs the exact recurrence from x_0, x_1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValidationError("need a sequence of at least three terms")
    lhs = x[2:]
    rhs = (1.0 - rp.a) * x[1:-1] - rp.a * x[:-2]
    bad = np.nonzero(lhs < rhs - 1e-12)[0]
    if bad.size:
        k = int(bad[0]) + 2
        raise ValidationError(
            f"recurrence inequality fails at k={k}: x_k={lhs[bad[0]]:.6g} < {rhs[bad[0]]:.6g}"
        )
    if x[0] <= 0 or x[1] <= rp.lambda2 * x[0]:
        raise ValidationError("reference sequence needs x0 > 0 and x1 > lambda2*x0")
    ref = recurrence_solution(rp, float(x[0]), float(x[1]), x.size - 1)
    margin = float(np.min(x - ref))
    return DominationReport(dominated=bool(margin >= -1e-12), min_margin=margin, reference=ref)


def discrete_convex_sum_bound(g) -> tuple[float, float]:
    """For decreasing, discrete-convex g on {m..m+n}:
    sum g(i) <= (n+1)/2 * (g(m) + g(m+n)).  Returns (sum, bound)."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValidationError("need at least two values")
    d = np.diff(g)
    if np.any(d >= 0):
        raise ValidationError("g must be strictly decreasing")
    if g.size > 2 and np.any(np.diff(d) < -1e-12):
        raise ValidationError("forward differences of g must be nondecreasing (discrete convexity)")
    lhs = float(np.sum(g))
    rhs = g.size / 2.0 * float(g[0] + g[-1])
    return lhs, rhs


# ---------------------------------------------------------------------------
# the criterion report


@dataclass(frozen=True)
class InitialFunctionals:
    first: float  # I1 or S1
    second: float  # I2 or S2


@dataclass(frozen=True)
class CriterionReport:
    regime: str  # "continuous" | "lattice"
    a: float
    lambda2: float | None
    phi_delta: float
    functionals: InitialFunctionals
    necessary_bound: float
    sufficient_bound: float | None  # None when a >= 3-2*sqrt(2)
    uniform_bound: float | None  # continuous regime only
    verdict: str

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "a": self.a,
            "lambda2": self.lambda2,
            "phi_delta": self.phi_delta,
            "functionals": [self.functionals.first, self.functionals.second],
            "necessary_bound": self.necessary_bound,
            "sufficient_bound": self.sufficient_bound,
            "uniform_bound": self.uniform_bound,
            "verdict": self.verdict,
        }


def _verdict(phi_delta, necessary, sufficient, uniform) -> str:
    if phi_delta <= necessary:
        return "violates-necessary"
    if uniform is not None and phi_delta > uniform:
        return "sufficient-uniform"
    if sufficient is not None and phi_delta > sufficient:
        return "sufficient"
    return "inconclusive"


def check_continuous(phi: InitialFunction, params: ProblemParams) -> CriterionReport:
    """Classify an admissible initial function on [0, delta].

    "violates-necessary" certifies the extension turns nonpositive by
    three delays; "sufficient" and "sufficient-uniform" certify
    positivity on the whole half-line; "inconclusive" is the explicit
    gap verdict, never silently resolved by solving.
    """
    if params.delta <= 0:
        raise ValidationError("continuous criteria require delta > 0")
    prod = params.c * params.delta
    thr = continuous_threshold()
    if prod > thr * (1.0 + 1e-12):
        raise ValidationError(
            f"c*delta={prod:g} exceeds the oscillation threshold 1/e; "
            "no distribution solves these parameters"
        )
    phi.validate()
    if phi.kind == "lattice":
        raise ValidationError("lattice initial functions belong to check_lattice")
    a = 0.5 * prod
    i1, i2 = phi.functionals()
    phi_delta = float(phi(params.delta))
    necessary = 2.0 * a * (i1 - 2.0 * a * i2) / (1.0 - 2.0 * a)
    sufficient = uniform = lam2 = None
    if a < A_LIMIT:
        rp = recurrence_params(a)
        lam2 = rp.lambda2
        denom = 1.0 - rp.lambda2 - 2.0 * a
        if denom > 0:  # guaranteed on a < 3-2*sqrt(2); re-validated, not extrapolated
            sufficient = 2.0 * a * ((1.0 - rp.lambda2) * i1 - 2.0 * a * i2) / denom
            uniform = 2.0 * a / (1.0 - rp.lambda2)
    return CriterionReport(
        regime="continuous",
        a=a,
        lambda2=lam2,
        phi_delta=phi_delta,
        functionals=InitialFunctionals(i1, i2),
        necessary_bound=necessary,
        sufficient_bound=sufficient,
        uniform_bound=uniform,
        verdict=_verdict(phi_delta, necessary, sufficient, uniform),
    )


def check_lattice(phi: InitialFunction, params: ProblemParams) -> CriterionReport:
    """Lattice analogue with S1, S2 and a = c*(delta+1)/2.

    No shape-free tier here: the continuous bound 2a/(1-lambda2) can
    fall below the lattice sufficient bound, so only the necessary and
    the shaped sufficient comparisons are offered.
    """
    d = params.delta
    if d < 1 or abs(d - round(d)) > 1e-12:
        raise ValidationError("lattice criteria require a positive integer delta")
    d = int(round(d))
    prod = params.c * d
    thr = lattice_threshold(d)
    if prod > thr * (1.0 + 1e-12):
        raise ValidationError(
            f"c*delta={prod:g} exceeds the lattice threshold {thr:g}; "
            "no distribution solves these parameters"
        )
    if phi.kind != "lattice":
        raise ValidationError("check_lattice needs a lattice initial function")
    phi.validate()
    s1, s2 = phi.functionals()
    phi_delta = float(phi.values[-1])
    necessary = prod / (1.0 - prod) * (s1 - prod * s2)
    a = 0.5 * params.c * (d + 1)
    sufficient = lam2 = None
    if a < A_LIMIT:
        rp = recurrence_params(a)
        lam2 = rp.lambda2
        denom = 1.0 - rp.lambda2 - 2.0 * a
        if denom > 0:
            sufficient = 2.0 * a * ((1.0 - rp.lambda2) * s1 - 2.0 * a * s2) / denom
    return CriterionReport(
        regime="lattice",
        a=a,
        lambda2=lam2,
        phi_delta=phi_delta,
        functionals=InitialFunctionals(s1, s2),
        necessary_bound=necessary,
        sufficient_bound=sufficient,
        uniform_bound=None,
        verdict=_verdict(phi_delta, necessary, sufficient, None),
    )


# ---------------------------------------------------------------------------
# sandwich bounds at delay multiples


@dataclass(frozen=True)
class SandwichBounds:
    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def rows(self):
        return zip(self.x, self.lower, self.upper)


def sandwich_bounds(phi: InitialFunction, params: ProblemParams, n_max: int) -> SandwichBounds:
    """Bracket the extension at x = (n+2)*delta for 2 <= n <= n_max:

        a_n <= y((n+2) delta) <= a_1 (1-2a)^(n-1),

    where (a_n) runs the minorising recurrence from the exact values
    a_0 = y(2 delta), a_1 = y(3 delta).  The first four rows (x = 0,
    delta, 2 delta, 3 delta) are the exact closed-form values.
    """
    report = check_continuous(phi, params)
    a = report.a
    if report.sufficient_bound is None:
        raise ValidationError("sandwich bounds need a < 3-2*sqrt(2)")
    if report.phi_delta <= report.sufficient_bound:
        raise ValidationError(
            "sandwich bounds need the sufficient condition: "
            f"phi(delta)={report.phi_delta:g} <= beta={report.sufficient_bound:g}"
        )
    i1, i2 = report.functionals.first, report.functionals.second
    phid = report.phi_delta
    a0 = phid - 2.0 * a * i1
    a1 = (1.0 - 2.0 * a) * phid - 2.0 * a * (i1 - 2.0 * a * i2)
    rp = recurrence_params(a)
    seq = recurrence_solution(rp, a0, a1, n_max)
    d = params.delta
    xs = [0.0, d, 2.0 * d, 3.0 * d]
    lower = [1.0, phid, a0, a1]
    upper = [1.0, phid, a0, a1]
    for n in range(2, n_max + 1):
        xs.append((n + 2.0) * d)
        lower.append(float(seq[n]))
        upper.append(a1 * (1.0 - 2.0 * a) ** (n - 1))
    return SandwichBounds(np.asarray(xs), np.asarray(lower), np.asarray(upper))


def gap_region_table(a_grid, r_values) -> np.ndarray:
    """Rows (a, r, N, S) of the normalised necessary and sufficient curves
    phi(delta)/I1 > N(a, r), phi(delta)/I1 > S(a, r) with r = I2/I1."""
    rows = []
    for a in np.atleast_1d(np.asarray(a_grid, dtype=float)):
        if not 0.0 < a < A_LIMIT:
            raise ValidationError(f"a={a:g} outside the valid range (0, 3-2*sqrt(2))")
        rp = recurrence_params(float(a))
        for r in np.atleast_1d(np.asarray(r_values, dtype=float)):
            n_curve = 2.0 * a * (1.0 - 2.0 * a * r) / (1.0 - 2.0 * a)
            s_curve = (
                2.0 * a * ((1.0 - rp.lambda2) - 2.0 * a * r) / (1.0 - 2.0 * a - rp.lambda2)
            )
            rows.append((float(a), float(r), n_curve, s_curve))
    return np.asarray(rows)


# ---------------------------------------------------------------------------
# random initial functions for the property suites


def random_phi_continuous(
    rng: np.random.Generator,
    delta: float,
    n_knots: int = 6,
    phi_delta: float | None = None,
) -> InitialFunction:
    """Piecewise-linear member of the admissible class: sorted random
    interior knots, strictly decreasing values from 1, optionally rescaled
    to a prescribed value at delta."""
    xs = np.concatenate(([0.0], np.sort(rng.uniform(0.0, delta, n_knots)), [delta]))
    xs = np.unique(xs)
    drops = rng.uniform(0.05, 1.0, xs.size - 1)
    end = rng.uniform(0.05, 0.9)
    ys = 1.0 - (1.0 - end) * np.concatenate(([0.0], np.cumsum(drops))) / np.sum(drops)
    phi = InitialFunction.from_table(xs, ys)
    if phi_delta is not None:
        phi = retarget_initial(phi, phi_delta)
    phi.validate()
    return phi


def random_phi_lattice(
    rng: np.random.Generator,
    delta: int,
    phi_delta: float | None = None,
) -> InitialFunction:
    head = rng.uniform(0.3, 0.99)
    drops = rng.uniform(0.05, 1.0, delta)
    end = rng.uniform(0.02, 0.9) * head
    vals = head - (head - end) * np.concatenate(([0.0], np.cumsum(drops))) / np.sum(drops)
    phi = InitialFunction.lattice_table(vals)
    if phi_delta is not None:
        phi = retarget_initial(phi, phi_delta)
    phi.validate()
    return phi


def retarget_initial(phi: InitialFunction, phi_delta: float) -> InitialFunction:
    """Affine rescale pinning the left value and moving the value at delta
    to the target; preserves monotonicity and the piecewise shape."""
    if phi.kind == "lattice":
        head, end = float(phi.values[0]), float(phi.values[-1])
        if not 0.0 < phi_delta < head:
            raise ValidationError("target must lie in (0, phi(0))")
        scale = (head - phi_delta) / (head - end)
        return InitialFunction.lattice_table(head - scale * (head - phi.values))
    d = phi.delta
    end = float(phi(d))
    if not 0.0 < phi_delta < 1.0:
        raise ValidationError("target must lie in (0, 1)")
    scale = (1.0 - phi_delta) / (1.0 - end)
    if phi.kind == "poly":
        # phi_s = (1 - scale) + scale * phi
        coeffs = scale * phi.coeffs
        coeffs[0] += 1.0 - scale
        return InitialFunction.polynomial(coeffs, d)
    return InitialFunction.from_table(phi.xs, 1.0 - scale * (1.0 - phi.ys))
