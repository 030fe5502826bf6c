"""Survival-function representations and the membership residual.

A pair of parameters ``(c, delta)`` defines the problem of finding
distributions ``F`` for which the count of delta-records, compensated by
``c`` times the running maximum, is a martingale.  Membership is
equivalent to the residual

    H(x) = G(x + delta) - c * integral_x^inf G(t) dt

vanishing on (a probability-one subset of) the support, where
``G = 1 - F`` is the survival function.

This module holds the two survival representations (discrete atom
tables and uniform-grid continuous solutions), the initial-function
class used by the delay solvers, the residual evaluation, and the two
solution-preserving transforms (convex mixtures and tail
distributions).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

__all__ = [
    "ValidationError",
    "HorizonError",
    "ProblemParams",
    "ClosedForm",
    "DiscreteSurvival",
    "ContinuousSolution",
    "InitialFunction",
    "ResidualCertificate",
    "eval_survival",
    "residual_H",
    "residual_sup",
    "mix",
    "tail_condition",
    "default_tolerance",
    "mean_of",
    "to_json",
    "from_json",
    "to_csv",
    "format_float",
]

EXACT_TOL = 1e-10  # default residual tolerance for closed-form families


class ValidationError(ValueError):
    """A precondition on user-supplied data failed."""


class HorizonError(ValidationError):
    """A query needs data beyond the horizon of a truncated representation."""


def format_float(x: float) -> str:
    return f"{float(x):.10g}"


# ---------------------------------------------------------------------------
# problem parameters


@dataclass(frozen=True)
class ProblemParams:
    """The pair (c, delta): compensation rate and record margin."""

    c: float
    delta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValidationError(f"c must be a positive finite real, got {self.c}")
        if not (math.isfinite(self.delta) and self.delta != 0):
            raise ValidationError(f"delta must be a nonzero finite real, got {self.delta}")

    def to_dict(self) -> dict:
        return {"c": self.c, "delta": self.delta}


# ---------------------------------------------------------------------------
# closed-form survival families (attached to grid solutions for exact
# evaluation of values and tail integrals where a formula is known)


@dataclass(frozen=True)
class ClosedForm:
    """Exact survival formula: value, tail integral and, where cheap, the
    inverse survival (used for exact sampling)."""

    family: str
    args: dict

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "exponential":
            th = self.args["theta"]
            return np.where(x < 0.0, 1.0, np.exp(-th * np.maximum(x, 0.0)))
        if self.family == "gamma_exp_mixture":
            al, d = self.args["alpha"], self.args["delta"]
            xp = np.maximum(x, 0.0)
            return np.where(x < 0.0, 1.0, (al * xp + 1.0) * np.exp(-xp / d))
        if self.family == "tail_of":
            base, x0, g0 = self._base(), self.args["x0"], self.args["g0"]
            return np.where(x < x0, 1.0, base.value(np.maximum(x, x0)) / g0)
        raise ValidationError(f"unknown closed form family {self.family!r}")

    def tail_integral(self, x):
        """integral_x^inf of the survival value."""
        x = np.asarray(x, dtype=float)
        if self.family == "exponential":
            th = self.args["theta"]
            xp = np.maximum(x, 0.0)
            return np.exp(-th * xp) / th + np.where(x < 0.0, -x, 0.0)
        if self.family == "gamma_exp_mixture":
            al, d = self.args["alpha"], self.args["delta"]
            xp = np.maximum(x, 0.0)
            tail = d * np.exp(-xp / d) * (al * xp + al * d + 1.0)
            return tail + np.where(x < 0.0, -x, 0.0)
        if self.family == "tail_of":
            base, x0, g0 = self._base(), self.args["x0"], self.args["g0"]
            xc = np.maximum(x, x0)
            return base.tail_integral(xc) / g0 + np.where(x < x0, x0 - x, 0.0)
        raise ValidationError(f"unknown closed form family {self.family!r}")

    def ppf(self, s):
        """x with survival(x) = s, for s in (0, 1].  None if not available."""
        if self.family == "exponential":
            th = self.args["theta"]
            return -np.log(np.asarray(s, dtype=float)) / th
        if self.family == "tail_of":
            base = self._base()
            inner = base.ppf(np.asarray(s, dtype=float) * self.args["g0"])
            return None if inner is None else np.maximum(inner, self.args["x0"])
        return None

    def shifted_tail(self, x0: float) -> "ClosedForm":
        g0 = float(self.value(x0))
        return ClosedForm("tail_of", {"base": self.to_dict(), "x0": float(x0), "g0": g0})

    def _base(self) -> "ClosedForm":
        b = self.args["base"]
        return ClosedForm(b["family"], {k: v for k, v in b.items() if k != "family"})

    def to_dict(self) -> dict:
        return {"family": self.family, **self.args}

    @staticmethod
    def from_dict(d: dict) -> "ClosedForm":
        return ClosedForm(d["family"], {k: v for k, v in d.items() if k != "family"})


# ---------------------------------------------------------------------------
# discrete survival tables


@dataclass(frozen=True)
class DiscreteSurvival:
    """Survival values at the atoms of a purely discrete distribution.

    ``G(x)`` is the right-continuous step function equal to
    ``survival[k]`` on ``[points[k], points[k+1])`` and 1 left of the
    support.  ``truncated`` marks a finite prefix of an infinite-support
    solution; such tables are only valid for ``x < valid_to`` and carry
    the exact remaining tail integral ``tail_beyond`` when the
    constructor knows it.
    """

    points: np.ndarray
    survival: np.ndarray
    truncated: bool = False
    valid_to: float | None = None  # first x the table says nothing about
    tail_beyond: float | None = None  # integral of G over [valid_to, inf)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        sv = np.asarray(self.survival, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "survival", sv)
        if pts.ndim != 1 or pts.size == 0 or pts.shape != sv.shape:
            raise ValidationError("points and survival must be 1-d arrays of equal length")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(sv)):
            raise ValidationError("non-finite entries in survival table")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise ValidationError("support points must be strictly increasing")
        if sv[0] >= 1.0 or np.any(sv < 0.0):
            raise ValidationError("survival values must lie in [0, 1) with survival[0] < 1")
        pos = sv > 0
        dif = np.diff(sv)
        if np.any(dif[pos[1:]] >= 0):
            raise ValidationError("survival must be strictly decreasing while positive")
        if self.truncated:
            if np.any(sv <= 0.0):
                raise ValidationError("a truncated table must have strictly positive values")
            if self.valid_to is None:
                object.__setattr__(self, "valid_to", float(pts[-1]))
            elif self.valid_to < pts[-1]:
                raise ValidationError("valid_to must not precede the last tabulated atom")
        else:
            if sv[-1] != 0.0:
                raise ValidationError("a complete finite-support table must end with survival 0")
            object.__setattr__(self, "valid_to", None)
            object.__setattr__(self, "tail_beyond", None)
        pts.flags.writeable = False
        sv.flags.writeable = False

    # -- evaluation ---------------------------------------------------

    @property
    def alpha(self) -> float:
        return float(self.points[0])

    def survival_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.truncated and np.any(x >= self.valid_to):
            raise HorizonError(
                f"query at x >= {self.valid_to:g} on a truncated table "
                f"(last atom {self.points[-1]:g})"
            )
        idx = np.searchsorted(self.points, x, side="right") - 1
        out = np.where(idx < 0, 1.0, self.survival[np.clip(idx, 0, None)])
        return out if out.ndim else float(out)

    def tail_integral(self, x: float) -> float:
        """integral_x^inf G(t) dt, exact for the tabulated step function."""
        x = float(x)
        pts, sv = self.points, self.survival
        if x <= pts[0]:
            head = (pts[0] - x) * 1.0
            x = pts[0]
        else:
            head = 0.0
        end = self.valid_to if self.truncated else pts[-1]
        if x >= end:
            if not self.truncated:
                return head  # G is identically 0 beyond a complete support
            raise HorizonError(f"tail integral from x={x:g} beyond valid_to={end:g}")
        k = int(np.searchsorted(pts, x, side="right") - 1)
        total = head
        seg_end = pts[k + 1] if k + 1 < pts.size else end
        total += sv[k] * (seg_end - x)
        if k + 1 < pts.size:
            widths = np.diff(np.append(pts[k + 1 :], end))
            total += float(np.dot(sv[k + 1 :], widths))
        if self.truncated:
            if self.tail_beyond is None:
                raise HorizonError("truncated table without a known tail integral")
            total += self.tail_beyond
        return total

    def atom_masses(self) -> np.ndarray:
        prev = np.concatenate(([1.0], self.survival[:-1]))
        return prev - self.survival

    def to_dict(self) -> dict:
        d = {
            "kind": "discrete",
            "points": [float(p) for p in self.points],
            "survival": [float(s) for s in self.survival],
            "truncated": self.truncated,
        }
        if self.truncated:
            d["valid_to"] = self.valid_to
            d["tail_beyond"] = self.tail_beyond
        return d


# ---------------------------------------------------------------------------
# continuous grid solutions


@dataclass(frozen=True)
class ContinuousSolution:
    """A survival function tabulated on a uniform grid over [0, horizon].

    Built by the delay solver one delay-interval at a time;
    ``step_boundaries`` are the knot indices at multiples of delta.
    Between knots the function is evaluated by linear interpolation.
    The tail beyond the horizon is bounded by the exponential envelope
    ``y(T) * exp(-c (t - T))``, which is certified for positive
    solutions; ``closed_form``, when present, replaces both the value
    and the tail with exact formulas.
    """

    params: ProblemParams
    grid_step: float
    values: np.ndarray
    step_boundaries: np.ndarray = field(default=None)
    initial: "InitialFunction | None" = None
    closed_form: ClosedForm | None = None
    error_estimate: float = 0.0
    survival_like: bool = True  # False for the fundamental function

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValidationError("values must be a 1-d array with at least two knots")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("non-finite values in grid solution")
        if self.grid_step <= 0:
            raise ValidationError("grid_step must be positive")
        if self.survival_like and abs(vals[0] - 1.0) > 1e-9:
            raise ValidationError("a survival grid must start at value 1")
        if self.step_boundaries is None:
            per = int(round(self.params.delta / self.grid_step))
            nb = np.arange(0, vals.size, max(per, 1))
            object.__setattr__(self, "step_boundaries", nb)
        sb = np.asarray(self.step_boundaries, dtype=int)
        object.__setattr__(self, "step_boundaries", sb)
        vals.flags.writeable = False
        sb.flags.writeable = False

    @property
    def knots(self) -> np.ndarray:
        return np.arange(self.values.size) * self.grid_step

    @property
    def horizon(self) -> float:
        return (self.values.size - 1) * self.grid_step

    def survival_at(self, x):
        """Linear interpolation on the grid; 1 left of 0; error beyond the
        horizon (every grid solution is a truncated view of its tail)."""
        if self.closed_form is not None:
            return self.closed_form.value(x)
        x = np.asarray(x, dtype=float)
        if np.any(x > self.horizon * (1 + 1e-12) + 1e-300):
            raise HorizonError(f"query beyond grid horizon {self.horizon:g}")
        out = np.interp(np.clip(x, 0.0, self.horizon), self.knots, self.values)
        out = np.where(x < 0.0, 1.0, out)
        return out if out.ndim else float(out)

    def tail_integral(self, x: float) -> float:
        """integral_x^inf G: trapezoid on the grid plus the decay-envelope
        tail y(T)/c beyond the horizon (0 once the grid reached machine zero)."""
        if self.closed_form is not None:
            return float(self.closed_form.tail_integral(x))
        x = float(x)
        head = 0.0
        if x < 0.0:
            head = -x
            x = 0.0
        h, vals = self.grid_step, self.values
        T = self.horizon
        if x > T * (1 + 1e-12):
            raise HorizonError(f"tail integral from x={x:g} beyond horizon {T:g}")
        yT = float(vals[-1])
        if yT < 0.0:
            if yT < -1e-9:
                raise HorizonError("solution is not positive at the horizon; no tail envelope")
            yT = 0.0
        tail = yT / self.params.c if yT > 1e-300 else 0.0
        j0 = int(math.ceil(x / h - 1e-12))
        j0 = min(j0, vals.size - 1)
        tj0 = j0 * h
        part = 0.0
        if tj0 > x:  # partial first cell, integrate the linear interpolant
            ya = float(np.interp(x, self.knots, vals))
            part = (ya + vals[j0]) * (tj0 - x) / 2.0
        grid = float(_trapezoid(vals[j0:], dx=h)) if vals.size - j0 >= 2 else 0.0
        return head + part + grid + tail

    def to_dict(self) -> dict:
        d = {
            "kind": "continuous",
            "params": self.params.to_dict(),
            "grid_step": self.grid_step,
            "values": [float(v) for v in self.values],
        }
        if self.closed_form is not None:
            d["closed_form"] = self.closed_form.to_dict()
        return d


# ---------------------------------------------------------------------------
# initial functions


class InitialFunction:
    """The prescribed survival segment on [0, delta] (or {0..delta}).

    Continuous kinds: ``poly`` (coefficients in ascending degree,
    integrated exactly) and ``table`` (piecewise linear).  The class
    requires value 1 at 0, a non-increasing profile with a strict
    overall drop, and a positive value at delta.  ``lattice`` holds the
    integer table with values in (0, 1), strictly decreasing.
    """

    def __init__(self, kind: str, delta: float, *, coeffs=None, xs=None, ys=None, values=None):
        self.kind = kind
        self.delta = float(delta)
        if kind == "poly":
            self.coeffs = np.asarray(coeffs, dtype=float)
        elif kind == "table":
            self.xs = np.asarray(xs, dtype=float)
            self.ys = np.asarray(ys, dtype=float)
            if self.xs.shape != self.ys.shape or self.xs.ndim != 1 or self.xs.size < 2:
                raise ValidationError("table initial function needs matching 1-d xs, ys")
            if abs(self.xs[0]) > 1e-12 or abs(self.xs[-1] - self.delta) > 1e-9:
                raise ValidationError("table must span [0, delta]")
            if not np.all(np.diff(self.xs) > 0):
                raise ValidationError("table abscissae must be strictly increasing")
        elif kind == "lattice":
            self.values = np.asarray(values, dtype=float)
            if self.values.size != int(delta) + 1:
                raise ValidationError("lattice initial function needs delta+1 values")
        else:
            raise ValidationError(f"unknown initial function kind {kind!r}")

    # -- constructors

    @staticmethod
    def polynomial(coeffs: Sequence[float], delta: float) -> "InitialFunction":
        return InitialFunction("poly", delta, coeffs=coeffs)

    @staticmethod
    def from_table(xs: Sequence[float], ys: Sequence[float]) -> "InitialFunction":
        return InitialFunction("table", float(np.asarray(xs)[-1]), xs=xs, ys=ys)

    @staticmethod
    def lattice_table(values: Sequence[float]) -> "InitialFunction":
        return InitialFunction("lattice", len(values) - 1, values=values)

    # -- evaluation

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "poly":
            out = np.polynomial.polynomial.polyval(t, self.coeffs)
        elif self.kind == "table":
            out = np.interp(t, self.xs, self.ys)
        else:
            idx = np.clip(t.astype(int), 0, self.values.size - 1)
            out = self.values[idx]
        return out if out.ndim else float(out)

    def integral(self, t):
        """integral_0^t of the initial function, exact for its kind."""
        t = np.asarray(t, dtype=float)
        if self.kind == "poly":
            anti = np.polynomial.polynomial.polyint(self.coeffs)
            out = np.polynomial.polynomial.polyval(t, anti)
        elif self.kind == "table":
            # exact prefix integral of the piecewise-linear interpolant
            seg = np.concatenate(
                ([0.0], np.cumsum(np.diff(self.xs) * (self.ys[:-1] + self.ys[1:]) / 2.0))
            )
            k = np.clip(np.searchsorted(self.xs, t, side="right") - 1, 0, self.xs.size - 2)
            x0, y0 = self.xs[k], self.ys[k]
            slope = (self.ys[k + 1] - y0) / (self.xs[k + 1] - x0)
            dt = t - x0
            out = seg[k] + y0 * dt + slope * dt * dt / 2.0
        else:
            raise ValidationError("integral is a continuous-kind operation")
        return out if out.ndim else float(out)

    def functionals(self) -> tuple[float, float]:
        """(I1, I2) for continuous kinds; (S1, S2) for the lattice kind."""
        d = self.delta
        if self.kind == "lattice":
            dd = int(d)
            v = self.values
            s1 = float(np.sum(v[:dd])) / dd
            s2 = sum(float(np.sum(v[: j - dd])) for j in range(dd, 2 * dd)) / dd**2
            return s1, s2
        if self.kind == "poly":
            a1 = np.polynomial.polynomial.polyint(self.coeffs)
            a2 = np.polynomial.polynomial.polyint(a1)
            i1 = float(np.polynomial.polynomial.polyval(d, a1)) / d
            i2 = float(np.polynomial.polynomial.polyval(d, a2)) / d**2
            return i1, i2
        i1 = float(self.integral(d)) / d
        # I2 via exact integration of the piecewise-quadratic prefix integral
        xs, ys = self.xs, self.ys
        seg = np.concatenate(([0.0], np.cumsum(np.diff(xs) * (ys[:-1] + ys[1:]) / 2.0)))
        total = 0.0
        for k in range(xs.size - 1):
            w = xs[k + 1] - xs[k]
            slope = (ys[k + 1] - ys[k]) / w
            # integral over the cell of seg[k] + y_k (t-x_k) + slope (t-x_k)^2/2
            total += seg[k] * w + ys[k] * w * w / 2.0 + slope * w**3 / 6.0
        return i1, float(total) / d**2

    def grid_values(self, n_per_delta: int) -> np.ndarray:
        t = np.linspace(0.0, self.delta, n_per_delta + 1)
        return np.asarray(self(t), dtype=float)

    # -- class membership

    def validate(self) -> None:
        if self.kind == "lattice":
            v = self.values
            if np.any(v <= 0.0) or np.any(v >= 1.0):
                raise ValidationError("lattice initial values must lie in (0, 1)")
            if np.any(np.diff(v) >= 0.0):
                raise ValidationError("lattice initial values must be strictly decreasing")
            return
        probe = self.grid_values(512)
        if abs(probe[0] - 1.0) > 1e-9:
            raise ValidationError("initial function must equal 1 at 0")
        if probe[-1] <= 0.0:
            raise ValidationError("initial function must stay positive at delta")
        if np.any(np.diff(probe) > 1e-12):
            raise ValidationError("initial function must be non-increasing on [0, delta]")
        if probe[-1] >= probe[0] - 1e-12:
            raise ValidationError("initial function must decrease overall")

    def to_dict(self) -> dict:
        if self.kind == "poly":
            return {"kind": "poly", "delta": self.delta, "coeffs": [float(c) for c in self.coeffs]}
        if self.kind == "table":
            return {
                "kind": "table",
                "delta": self.delta,
                "xs": [float(x) for x in self.xs],
                "ys": [float(y) for y in self.ys],
            }
        return {"kind": "lattice", "values": [float(v) for v in self.values]}


# ---------------------------------------------------------------------------
# residual machinery


def eval_survival(dist, x):
    """G(x) for either representation (1 left of the support; 0 beyond a
    complete finite support; error beyond a truncated horizon)."""
    return dist.survival_at(x)


def residual_H(dist, params: ProblemParams, x) -> float:
    """H(x) = G(x + delta) - c * integral_x^inf G.

    Vanishes (to numerical tolerance) at every support point of a
    member distribution.
    """
    x = float(x)
    gx = float(dist.survival_at(x + params.delta))
    return gx - params.c * dist.tail_integral(x)


@dataclass(frozen=True)
class ResidualCertificate:
    residual_sup: float
    tolerance: float
    member: bool
    n_probes: int
    worst_x: float

    def to_dict(self) -> dict:
        return {
            "residual_sup": self.residual_sup,
            "tolerance": self.tolerance,
            "member": self.member,
            "n_probes": self.n_probes,
            "worst_x": self.worst_x,
        }


def default_tolerance(dist) -> float:
    """1e-10 for closed-form families; 10x the truncation estimate plus the
    tail-envelope allowance for grid solutions; exact arithmetic otherwise."""
    if isinstance(dist, ContinuousSolution):
        if dist.closed_form is not None:
            return EXACT_TOL
        envelope_slack = float(dist.values[-1]) if dist.values[-1] > 0 else 0.0
        return max(10.0 * dist.error_estimate + envelope_slack, 1e-8)
    return 1e-12


def residual_sup(dist, params: ProblemParams, probe_points, tolerance: float | None = None) -> ResidualCertificate:
    """Max |H| over the probe points with a membership certificate."""
    probes = np.atleast_1d(np.asarray(probe_points, dtype=float))
    if probes.size == 0:
        raise ValidationError("at least one probe point is required")
    worst, worst_x = -1.0, probes[0]
    for x in probes:
        r = abs(residual_H(dist, params, x))
        if r > worst:
            worst, worst_x = r, x
    tol = default_tolerance(dist) if tolerance is None else float(tolerance)
    return ResidualCertificate(worst, tol, bool(worst <= tol), probes.size, float(worst_x))


def support_probes(dist, params: ProblemParams, max_points: int = 512) -> np.ndarray:
    """Default probe set: the atoms (discrete) or a support grid reaching
    delta short of the horizon (continuous)."""
    if isinstance(dist, DiscreteSurvival):
        pts = dist.points
        if params.delta > 0 and dist.truncated:
            pts = pts[pts + params.delta < dist.valid_to]
        return pts
    hi = dist.horizon - max(params.delta, 0.0)
    if dist.closed_form is not None:
        hi = max(hi, 20.0 * abs(params.delta))
    if hi <= 0:
        raise HorizonError("horizon too short to probe the residual")
    return np.linspace(0.0, hi, max_points)


# ---------------------------------------------------------------------------
# solution-preserving transforms


def mix(d1, d2, lam: float):
    """Convex combination of two same-support members; the residual is the
    same combination of the input residuals, so membership is preserved."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("mixture weight must lie in [0, 1]")
    if isinstance(d1, DiscreteSurvival) and isinstance(d2, DiscreteSurvival):
        if d1.points.shape != d2.points.shape or not np.allclose(
            d1.points, d2.points, rtol=0.0, atol=1e-12
        ):
            raise ValidationError("mixture requires identical support points")
        if d1.truncated != d2.truncated:
            raise ValidationError("mixture requires matching truncation")
        tail = None
        valid_to = None
        if d1.truncated:
            valid_to = min(d1.valid_to, d2.valid_to)
            if d1.tail_beyond is not None and d2.tail_beyond is not None:
                if abs(d1.valid_to - d2.valid_to) > 1e-12:
                    raise ValidationError("mixture requires matching valid_to")
                tail = lam * d1.tail_beyond + (1.0 - lam) * d2.tail_beyond
        return DiscreteSurvival(
            d1.points,
            lam * d1.survival + (1.0 - lam) * d2.survival,
            truncated=d1.truncated,
            valid_to=valid_to,
            tail_beyond=tail,
        )
    if isinstance(d1, ContinuousSolution) and isinstance(d2, ContinuousSolution):
        if d1.values.size != d2.values.size or abs(d1.grid_step - d2.grid_step) > 1e-15:
            raise ValidationError("mixture requires identical grids")
        if d1.params != d2.params:
            raise ValidationError("mixture requires identical problem parameters")
        return ContinuousSolution(
            params=d1.params,
            grid_step=d1.grid_step,
            values=lam * d1.values + (1.0 - lam) * d2.values,
            step_boundaries=d1.step_boundaries,
            error_estimate=max(d1.error_estimate, d2.error_estimate),
        )
    raise ValidationError("mixture requires two representations of the same kind")


def tail_condition(dist, x0: float):
    """The conditional distribution given exceedance of x0: survival 1 left
    of x0 and G(x)/G(x0) beyond.  Members map to members."""
    x0 = float(x0)
    if isinstance(dist, DiscreteSurvival):
        g0 = float(dist.survival_at(x0))
        if g0 <= 0.0:
            raise ValidationError("x0 must satisfy G(x0) > 0")
        keep = dist.points > x0 + 1e-15
        if not np.any(keep):
            raise ValidationError("x0 leaves no support to the right")
        tail = None
        if dist.truncated and dist.tail_beyond is not None:
            tail = dist.tail_beyond / g0
        return DiscreteSurvival(
            dist.points[keep],
            dist.survival[keep] / g0,
            truncated=dist.truncated,
            valid_to=dist.valid_to,
            tail_beyond=tail,
        )
    if isinstance(dist, ContinuousSolution):
        h = dist.grid_step
        k0 = int(round(x0 / h))
        if not 0 <= k0 < dist.values.size:
            raise ValidationError("x0 must lie inside [0, horizon)")
        if abs(k0 * h - x0) > h / 2 + 1e-15:
            raise ValidationError("x0 must sit on a grid knot")
        g0 = float(dist.values[k0])
        if g0 <= 0.0:
            raise ValidationError("x0 must satisfy G(x0) > 0")
        vals = np.concatenate((np.ones(k0), dist.values[k0:] / g0))
        cf = dist.closed_form.shifted_tail(k0 * h) if dist.closed_form is not None else None
        return ContinuousSolution(
            params=dist.params,
            grid_step=h,
            values=vals,
            step_boundaries=dist.step_boundaries,
            closed_form=cf,
            error_estimate=dist.error_estimate / g0,
        )
    raise ValidationError("unsupported representation for tail conditioning")


def mean_of(dist) -> float:
    """E[X] = alpha_F + integral_{alpha_F}^inf G for X >= alpha_F."""
    if isinstance(dist, DiscreteSurvival):
        a = dist.alpha
        return a + dist.tail_integral(a)
    return dist.tail_integral(0.0)


# ---------------------------------------------------------------------------
# serialisation


def to_json(dist, params: ProblemParams | None = None) -> str:
    d = dist.to_dict()
    d["format"] = "survival-v1"
    if params is not None and "params" not in d:
        d["params"] = params.to_dict()
    return json.dumps(_round_floats(d), indent=2, sort_keys=True)


def from_json(text: str):
    d = json.loads(text)
    kind = d.get("kind")
    if kind == "discrete":
        return DiscreteSurvival(
            np.asarray(d["points"], dtype=float),
            np.asarray(d["survival"], dtype=float),
            truncated=bool(d.get("truncated", False)),
            valid_to=d.get("valid_to"),
            tail_beyond=d.get("tail_beyond"),
        )
    if kind == "continuous":
        cf = d.get("closed_form")
        return ContinuousSolution(
            params=ProblemParams(**d["params"]),
            grid_step=float(d["grid_step"]),
            values=np.asarray(d["values"], dtype=float),
            closed_form=ClosedForm.from_dict(cf) if cf else None,
        )
    raise ValidationError(f"unknown survival document kind {kind!r}")


def to_csv(dist) -> str:
    """The common x,G table: one row per atom or per grid knot."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "G"])
    if isinstance(dist, DiscreteSurvival):
        xs, gs = dist.points, dist.survival
    else:
        xs, gs = dist.knots, dist.values
    for x, g in zip(xs, gs):
        w.writerow([format_float(x), format_float(g)])
    return buf.getvalue()


def _round_floats(obj):
    if isinstance(obj, float):
        return float(format_float(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj
