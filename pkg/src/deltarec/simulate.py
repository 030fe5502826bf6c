"""Monte Carlo verification of the compensated record-count martingale.

For a candidate distribution the increment of Z_n = N_n - c*M_n has
conditional mean H(M_n) given the past, so a member must show no drift
in the pooled increments and a flat mean of Z_n.  The harness samples
paths by inverse transform from the survival representation, pools the
martingale differences, and compares against 4-standard-error bands
(per-suite false-alarm rate around 1e-3 under the normal
approximation).  Everything is keyed by a counter-based generator:
one seed, one uniform matrix, replicate r = row r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContinuousSolution,
    DiscreteSurvival,
    ProblemParams,
    ValidationError,
    mean_of,
    residual_H,
)

__all__ = [
    "PathState",
    "Path",
    "MartingaleReport",
    "BinRow",
    "sample",
    "run_path",
    "martingale_test",
    "conditional_residual_probe",
]

MAX_CLAMP_MASS = 1e-9  # sampling refuses truncated tables with more tail mass


def _uniforms(seed: int, shape) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random(shape)


def _ppf_closed_form(cf, s: np.ndarray) -> np.ndarray:
    direct = cf.ppf(s)
    if direct is not None:
        return np.asarray(direct, dtype=float)
    # monotone bisection on the exact survival; ~1e-13 in ~80 halvings
    lo = np.zeros_like(s)
    hi = np.ones_like(s)
    for _ in range(200):
        mask = np.asarray(cf.value(hi)) > s
        if not mask.any():
            break
        hi[mask] *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = np.asarray(cf.value(mid)) > s
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _inverse_survival(member, s: np.ndarray) -> np.ndarray:
    """x with G(x) = s for uniform survival levels s in (0, 1)."""
    if isinstance(member, DiscreteSurvival):
        sv = member.survival
        if member.truncated and sv[-1] > MAX_CLAMP_MASS:
            raise ValidationError(
                f"tail mass {sv[-1]:.3g} beyond the truncated table is too large to sample; "
                "rebuild the member with a longer horizon"
            )
        idx = np.searchsorted(-sv, -s, side="left")
        idx = np.minimum(idx, sv.size - 1)  # beyond-horizon levels clamp to the last atom
        return member.points[idx]
    if isinstance(member, ContinuousSolution):
        if member.closed_form is not None:
            return _ppf_closed_form(member.closed_form, s)
        vals, knots = member.values, member.knots
        y_end = float(vals[-1])
        if y_end < 0.0:
            raise ValidationError("cannot sample a solution that is not positive on its grid")
        rv, rt = vals[::-1], knots[::-1]
        keep = np.empty(rv.size, dtype=bool)
        keep[0] = True
        keep[1:] = rv[1:] > rv[:-1]  # rightmost knot of each survival plateau
        xs, ts = rv[keep], rt[keep]
        x = np.interp(s, xs, ts)
        low = s < xs[0]
        if low.any():
            if xs[0] <= 0.0:
                raise ValidationError("degenerate grid: zero survival at the horizon")
            # decay-envelope extension beyond the horizon
            x = np.where(low, member.horizon + np.log(xs[0] / np.maximum(s, 1e-300)) / member.params.c, x)
        return x
    raise ValidationError("unsupported representation for sampling")


def sample(member, count: int, seed: int) -> np.ndarray:
    """iid draws from the member by inverse transform; deterministic in seed."""
    if count < 1:
        raise ValidationError("count must be positive")
    return _inverse_survival(member, _uniforms(seed, count))


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PathState:
    n: int
    M: float
    N: int
    Z: float


@dataclass(frozen=True)
class Path:
    x: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Z: np.ndarray

    def state(self, i: int) -> PathState:
        return PathState(n=i + 1, M=float(self.M[i]), N=int(self.N[i]), Z=float(self.Z[i]))

    def states(self):
        return [self.state(i) for i in range(self.x.size)]


def _path_arrays(x: np.ndarray, params: ProblemParams):
    """Vectorised path statistics; x has shape (replicates, n)."""
    m = np.maximum.accumulate(x, axis=1)
    ind = np.empty(x.shape)
    ind[:, 0] = 1.0  # the first observation is a record by convention
    ind[:, 1:] = (x[:, 1:] > m[:, :-1] + params.delta).astype(float)
    n_rec = np.cumsum(ind, axis=1)
    z = n_rec - params.c * m
    return m, ind, n_rec, z


def run_path(member, params: ProblemParams, n: int, seed: int) -> Path:
    if n < 1:
        raise ValidationError("n must be at least 1")
    x = _inverse_survival(member, _uniforms(seed, (1, n)))
    m, _, n_rec, z = _path_arrays(x, params)
    return Path(x=x[0], M=m[0], N=n_rec[0].astype(int), Z=z[0])


# ---------------------------------------------------------------------------
# the martingale harness


@dataclass(frozen=True)
class MartingaleReport:
    replicates: int
    n: int
    seed: int
    reference: float  # E Z_1 = 1 - c*E[X]
    pooled_mean_increment: float
    pooled_se: float
    n_increments: int
    step_means: np.ndarray = field(repr=False)
    step_se: np.ndarray = field(repr=False)
    mean_z_by_n: np.ndarray = field(repr=False)
    se_z_by_n: np.ndarray = field(repr=False)
    z_checkpoints: tuple  # (step, mean, se) triples
    pass_increment: bool
    pass_z: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "n": self.n,
            "seed": self.seed,
            "reference": self.reference,
            "pooled_mean_increment": self.pooled_mean_increment,
            "pooled_se": self.pooled_se,
            "n_increments": self.n_increments,
            "z_checkpoints": [
                {"n": int(k), "mean_Z": m, "se": s} for (k, m, s) in self.z_checkpoints
            ],
            "pass_increment": self.pass_increment,
            "pass_z": self.pass_z,
            "passed": self.passed,
        }


def martingale_test(
    member, params: ProblemParams, n: int, replicates: int, seed: int
) -> MartingaleReport:
    """Drift test on D_k = I_{k+1} - c*(M_{k+1} - M_k) pooled over paths,
    plus mean-Z checks at a few steps against 1 - c*E[X]; both at 4 SE."""
    if replicates < 100:
        raise ValidationError("at least 100 replicates are needed for the SE rule")
    if n < 2:
        raise ValidationError("n must be at least 2 to form increments")
    x = _inverse_survival(member, _uniforms(seed, (replicates, n)))
    m, ind, _, z = _path_arrays(x, params)
    d = ind[:, 1:] - params.c * np.diff(m, axis=1)
    count = d.size
    pooled = float(d.mean())
    pooled_se = float(d.std(ddof=1) / math.sqrt(count))
    step_means = d.mean(axis=0)
    step_se = d.std(axis=0, ddof=1) / math.sqrt(replicates)
    mean_z = z.mean(axis=0)
    se_z = z.std(axis=0, ddof=1) / math.sqrt(replicates)
    reference = 1.0 - params.c * mean_of(member)
    checkpoints = sorted({1, max(n // 4, 1), max(n // 2, 1), max(3 * n // 4, 1), n})
    z_checks = tuple(
        (k, float(mean_z[k - 1]), float(se_z[k - 1])) for k in checkpoints
    )
    pass_inc = abs(pooled) <= 4.0 * pooled_se
    pass_z = all(
        abs(mz - reference) <= 4.0 * max(sz, 1e-300) for (_, mz, sz) in z_checks
    )
    return MartingaleReport(
        replicates=replicates,
        n=n,
        seed=seed,
        reference=reference,
        pooled_mean_increment=pooled,
        pooled_se=pooled_se,
        n_increments=count,
        step_means=step_means,
        step_se=step_se,
        mean_z_by_n=mean_z,
        se_z_by_n=se_z,
        z_checkpoints=z_checks,
        pass_increment=bool(pass_inc),
        pass_z=bool(pass_z),
        passed=bool(pass_inc and pass_z),
    )


# ---------------------------------------------------------------------------
# conditional drift against the analytic residual


@dataclass(frozen=True)
class BinRow:
    lo: float
    hi: float
    center: float
    count: int
    mean_increment: float
    se: float
    residual_at_center: float
    residual_bin_mean: float  # mean of H over the sampled maxima in the bin
    populated: bool
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "center": self.center,
            "count": self.count,
            "mean_increment": self.mean_increment,
            "se": self.se,
            "residual_at_center": self.residual_at_center,
            "residual_bin_mean": self.residual_bin_mean,
            "populated": self.populated,
            "consistent": self.consistent,
        }


def conditional_residual_probe(
    member,
    params: ProblemParams,
    bins: int,
    paths: int,
    n: int = 100,
    seed: int = 0,
    min_count: int = 30,
) -> list[BinRow]:
    """Empirical E[D | M in bin] against the analytic residual H.

    Bins are running-maximum quantiles (distinct atoms when the member
    is discrete with few of them).  Under-populated bins are reported
    with populated=False, never dropped.
    """
    x = _inverse_survival(member, _uniforms(seed, (paths, n)))
    m, ind, _, _ = _path_arrays(x, params)
    d = ind[:, 1:] - params.c * np.diff(m, axis=1)
    cond = m[:, :-1].ravel()
    dd = d.ravel()
    uniq = np.unique(cond)
    if uniq.size <= bins:
        edges = np.concatenate((uniq, [uniq[-1] + 1.0]))
    else:
        qs = np.quantile(cond, np.linspace(0.0, 1.0, bins + 1))
        edges = np.unique(qs)
        edges[-1] = edges[-1] + 1e-12
    rows: list[BinRow] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (cond >= lo) & (cond < hi)
        cnt = int(mask.sum())
        center = float(np.median(cond[mask])) if cnt else 0.5 * (lo + hi)
        h_center = residual_H(member, params, center)
        if cnt:
            vals = dd[mask]
            mean = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(cnt)) if cnt > 1 else float("inf")
            # exact conditional target: average H over the maxima seen in the bin
            h_mean = float(np.mean(_residual_over(member, params, cond[mask])))
            consistent = abs(mean - h_mean) <= 4.0 * se
        else:
            mean, se, h_mean, consistent = 0.0, float("inf"), h_center, False
        rows.append(
            BinRow(
                lo=float(lo),
                hi=float(hi),
                center=center,
                count=cnt,
                mean_increment=mean,
                se=se,
                residual_at_center=float(h_center),
                residual_bin_mean=h_mean,
                populated=cnt >= min_count,
                consistent=bool(consistent),
            )
        )
    return rows


def _residual_over(member, params: ProblemParams, xs: np.ndarray) -> np.ndarray:
    uniq, inverse = np.unique(xs, return_inverse=True)
    vals = np.asarray([residual_H(member, params, float(u)) for u in uniq])
    return vals[inverse]
