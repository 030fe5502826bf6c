"""Discrete method of steps for Delta y(i) + c*y(i - delta) = 0 on Z+.

The lattice analogue of the continuous solver: integer delta, exact
arithmetic (no quadrature), positivity possible iff
c*delta <= (delta/(delta+1))**(delta+1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscreteSurvival, InitialFunction, ProblemParams, ValidationError
from .dde import PositivityVerdict

__all__ = [
    "LatticeSolution",
    "solve_steps_lattice",
    "threshold_lattice",
    "decay_bound_check",
    "positivity_scan_lattice",
]


@dataclass(frozen=True)
class LatticeSolution:
    params: ProblemParams
    values: np.ndarray  # y(0), y(1), ..., y(n_horizon)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        vals.flags.writeable = False

    @property
    def delta(self) -> int:
        return int(self.params.delta)

    def to_survival(self, tail_beyond: float | None = None) -> DiscreteSurvival:
        """View the (positive prefix of the) solution as a survival table."""
        n = self.values.size
        return DiscreteSurvival(
            np.arange(n, dtype=float),
            self.values,
            truncated=True,
            valid_to=float(n),
            tail_beyond=tail_beyond,
        )


def _check_integer_delta(params: ProblemParams) -> int:
    d = params.delta
    if d <= 0 or abs(d - round(d)) > 1e-12:
        raise ValidationError(
            f"lattice supports need a positive integer delta, got {d:g}; "
            "non-integer margins are rejected rather than floored"
        )
    return int(round(d))


def solve_steps_lattice(
    params: ProblemParams, phi: InitialFunction, n_horizon: int
) -> LatticeSolution:
    """Exact extension of a lattice initial segment: y(i+1) = y(i) - c*y(i-delta)."""
    d = _check_integer_delta(params)
    if phi.kind != "lattice":
        raise ValidationError("lattice solver needs a lattice initial function")
    if phi.values.size != d + 1:
        raise ValidationError("initial segment must cover {0, ..., delta}")
    phi.validate()
    if n_horizon < d:
        raise ValidationError("horizon must reach at least delta")
    y = np.empty(n_horizon + 1)
    y[: d + 1] = phi.values
    c = params.c
    for i in range(d, n_horizon):
        y[i + 1] = y[i] - c * y[i - d]
    return LatticeSolution(params, y)


def threshold_lattice(delta: int) -> float:
    """Largest c*delta with positive lattice solutions; increasing in delta
    and approaching the continuous threshold 1/e from below."""
    if delta < 1 or int(delta) != delta:
        raise ValidationError("delta must be a positive integer")
    delta = int(delta)
    return (delta / (delta + 1.0)) ** (delta + 1)


def decay_bound_check(sol: LatticeSolution) -> float:
    """Max violation of y(k) <= y(delta) * (1-c)**(k-delta) over k >= delta."""
    d = sol.delta
    if sol.params.c >= 1.0:
        raise ValidationError("the decay bound needs c < 1")
    if np.any(sol.values <= 0.0):
        raise ValidationError("decay bound applies to positive solutions")
    k = np.arange(d, sol.values.size)
    envelope = sol.values[d] * (1.0 - sol.params.c) ** (k - d)
    return float(np.max(sol.values[d:] - envelope))


def positivity_scan_lattice(
    sol: LatticeSolution, tolerance: float | None = None
) -> PositivityVerdict:
    d = sol.delta
    y = sol.values[d:]
    if tolerance is None:
        tolerance = 1e-12 * (abs(float(y[0])) or 1.0)
    below = np.nonzero(y <= -tolerance)[0]
    if below.size:
        return PositivityVerdict(False, float(below[0] + d), False)
    machine_zero = bool(np.any(np.abs(y) <= tolerance))
    return PositivityVerdict(True, None, machine_zero)
