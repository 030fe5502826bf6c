"""Laplace transform and raw-moment recurrence for continuous members.

Both reduce to data on the initial interval: the transform is a ratio
driven by integral_0^delta exp(-u t) F(dt), and each moment follows
from the previous ones plus integral_0^delta t^n F(dt).  The
distribution function is only available through the survival grid (or
closed form), so those Stieltjes integrals are rewritten by parts
against F(t) = 1 - G(t); no density is ever estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import ContinuousSolution, ValidationError, _trapezoid, residual_sup, support_probes

__all__ = ["MomentTable", "laplace", "moments"]

MAX_ORDER = 12  # the recurrence subtracts near-equal terms; deeper orders drift


def _require_member(member: ContinuousSolution) -> None:
    """Both formulas hold only for solutions; refuse uncertified input."""
    cert = residual_sup(member, member.params, support_probes(member, member.params))
    if not cert.member:
        raise ValidationError(
            f"input is not a certified member (residual {cert.residual_sup:.3e} "
            f"above tolerance {cert.tolerance:.3e} at x={cert.worst_x:g})"
        )


def _cdf_integral(member: ContinuousSolution, weight, smooth: bool) -> float:
    """integral_0^delta weight(t) * F(t) dt."""
    d = member.params.delta
    if member.closed_form is not None and smooth:
        val, _ = quad(
            lambda t: weight(t) * (1.0 - float(member.closed_form.value(t))),
            0.0,
            d,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=200,
        )
        return float(val)
    h = member.grid_step
    n = int(round(d / h))
    t = np.arange(n + 1) * h
    f = weight(t) * (1.0 - member.values[: n + 1])
    return float(_trapezoid(f, dx=h))


def _initial_stieltjes(member: ContinuousSolution, n: int) -> float:
    """L_n = integral_0^delta t^n F(dt) = delta^n F(delta) - n * integral t^(n-1) F(t) dt."""
    d = member.params.delta
    f_delta = 1.0 - float(member.survival_at(d))
    if n == 0:
        return f_delta
    part = _cdf_integral(member, lambda t: np.power(t, n - 1), smooth=True)
    return d**n * f_delta - n * part


def laplace(member: ContinuousSolution, u: float, check_membership: bool = True) -> float:
    """E[exp(-u X)] for a certified member, u > 0.

    The denominator 1 + c*exp(-u*delta)/u exceeds 1 for every u > 0,
    so the ratio is always well defined and lies in (0, 1).
    """
    if u <= 0:
        raise ValidationError("the transform is defined for u > 0")
    if check_membership:
        _require_member(member)
    c, d = member.params.c, member.params.delta
    # integral_0^delta e^{-ut} F(dt), by parts against the cdf
    lf = math.exp(-u * d) * (1.0 - float(member.survival_at(d))) + u * _cdf_integral(
        member, lambda t: np.exp(-u * t), smooth=True
    )
    ratio = c * math.exp(-u * d) / u
    value = (lf + ratio) / (1.0 + ratio)
    if not 0.0 < value < 1.0 + 1e-12:
        raise ValidationError(f"transform left (0, 1): {value:g}; is the member certified?")
    return value


@dataclass(frozen=True)
class MomentTable:
    mu: np.ndarray  # mu[k] = E X^(k+1)
    initial_integrals: np.ndarray  # L_0 .. L_n
    condition: np.ndarray  # crude per-order amplification estimates
    mu1_from_grid: bool = True  # the seed has no closed form; it is quadrature

    def moment(self, n: int) -> float:
        return float(self.mu[n - 1])

    def to_dict(self) -> dict:
        return {
            "mu": [float(m) for m in self.mu],
            "initial_integrals": [float(v) for v in self.initial_integrals],
            "condition": [float(v) for v in self.condition],
            "mu1_from_grid": self.mu1_from_grid,
        }


def moments(
    member: ContinuousSolution,
    n_max: int,
    max_order: int = MAX_ORDER,
    check_membership: bool = True,
) -> MomentTable:
    """Raw moments mu_1..mu_n via the member recurrence.

    mu_1 is seeded numerically as integral_0^inf G (the tail envelope
    covers the truncation); each later order consumes one initial
    Stieltjes integral and all earlier moments.
    """
    if n_max < 1:
        raise ValidationError("n_max must be at least 1")
    if check_membership:
        _require_member(member)
    if n_max > max_order:
        raise ValidationError(
            f"n_max={n_max} beyond the default cap {max_order}; "
            "raise max_order explicitly if the loss of precision is acceptable"
        )
    c, d = member.params.c, member.params.delta
    L = [_initial_stieltjes(member, n) for n in range(n_max + 1)]
    mu = np.empty(n_max)
    cond = np.empty(n_max)
    mu[0] = member.tail_integral(0.0)
    cond[0] = 1.0
    for n in range(1, n_max):
        lead = (n + 1) / c * ((1.0 - c * d) * mu[n - 1] - L[n])
        cross = 0.0
        cross_mag = 0.0
        for k in range(1, n):
            term = math.comb(n + 1, k) * mu[k - 1] * d ** (n + 1 - k)
            cross += term
            cross_mag += abs(term)
        mu[n] = lead - cross
        if mu[n] <= 0:
            raise ValidationError(
                f"moment recurrence produced a nonpositive mu_{n+1}; "
                "the input is likely not a member"
            )
        gross = (n + 1) / c * (abs(1.0 - c * d) * mu[n - 1] + abs(L[n])) + cross_mag
        cond[n] = gross / mu[n]
    return MomentTable(mu=mu, initial_integrals=np.asarray(L), condition=cond)
