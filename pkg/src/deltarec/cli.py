"""Command-line front end.

Exit codes: 0 on success, 2 on validation errors (bad parameters, an
inadmissible initial function, infeasible thresholds) with a
machine-readable JSON diagnostic on stdout, 1 on internal failure.
Stdout carries either nothing (files written via --out) or a single
JSON document; logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import constructors, core, criteria, dde, lattice, simulate, transforms
from .core import InitialFunction, ProblemParams, ValidationError

ENV_RESIDUAL_TOL = "DELTAREC_RESIDUAL_TOL"
ENV_RESOLUTION = "DELTAREC_RESOLUTION"


def _env_float(name: str, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"bad value for {name}: {raw!r}") from exc


def _default_resolution() -> int:
    return int(_env_float(ENV_RESOLUTION, 1024))


# ---------------------------------------------------------------------------
# small parsers


def parse_phi(spec: str, delta: float) -> InitialFunction:
    """poly:a0,a1,...  |  table:path.csv  |  lattice:v0,v1,...,vdelta"""
    kind, _, rest = spec.partition(":")
    if kind == "poly":
        coeffs = [float(v) for v in rest.split(",") if v]
        return InitialFunction.polynomial(coeffs, delta)
    if kind == "table":
        xs, ys = [], []
        with open(rest, newline="") as fh:
            for row in csv.DictReader(fh):
                xs.append(float(row["x"]))
                ys.append(float(row["G"]))
        return InitialFunction.from_table(xs, ys)
    if kind == "lattice":
        vals = [float(v) for v in rest.split(",") if v]
        return InitialFunction.lattice_table(vals)
    raise ValidationError(f"unknown initial function spec {spec!r}")


def parse_grid(spec: str) -> np.ndarray:
    """lo:hi:step or a comma-separated list."""
    if ":" in spec:
        lo, hi, step = (float(v) for v in spec.split(":"))
        return np.arange(lo if lo > 0 else step, hi + step / 2, step)
    return np.asarray([float(v) for v in spec.split(",") if v])


def _emit(doc: dict | None, args, files: dict[str, str] | None = None) -> None:
    """Single JSON doc on stdout, or files under --out with empty stdout."""
    if getattr(args, "out", None):
        for suffix, text in (files or {}).items():
            path = args.out + suffix
            with open(path, "w") as fh:
                fh.write(text)
            print(f"wrote {path}", file=sys.stderr)
    elif doc is not None:
        print(json.dumps(core._round_floats(doc), indent=2, sort_keys=True))


def _member_files(dist, params, certificate=None) -> dict[str, str]:
    files = {".csv": core.to_csv(dist), ".json": core.to_json(dist, params)}
    if certificate is not None:
        files[".cert.json"] = json.dumps(
            core._round_floats(certificate.to_dict()), indent=2, sort_keys=True
        )
    return files


def _certify(dist, params, tolerance=None):
    probes = core.support_probes(dist, params)
    tol = _env_float(ENV_RESIDUAL_TOL, tolerance)
    return core.residual_sup(dist, params, probes, tolerance=tol)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_construct(args) -> int:
    sub = args.family
    if sub in ("neg-delta", "bounded", "exp-roots", "geom-roots") and args.c is None:
        raise ValidationError(f"construct {sub} needs --c")
    if sub == "exp-roots":
        roots = constructors.solve_exponential_rates(ProblemParams(args.c, args.delta))
        _emit(roots.to_dict(), args)
        return 0
    if sub == "geom-roots":
        roots = constructors.solve_geometric_params(args.c, int(args.delta))
        _emit(roots.to_dict(), args)
        return 0
    if sub == "neg-delta":
        params = ProblemParams(args.c, args.delta)
        if args.gaps is None:
            raise ValidationError("construct neg-delta needs --gaps")
        if args.gaps.startswith("uniform:"):
            h = float(args.gaps.split(":", 1)[1])
            n = args.n or 200
            points = np.arange(n + 1) * h
        else:
            gaps = np.asarray([float(v) for v in args.gaps.split(",") if v])
            points = np.concatenate(([0.0], np.cumsum(gaps)))
        dist = constructors.construct_neg_delta(params, points, g0=args.g0, n_max=args.n)
    elif sub == "bounded":
        params = ProblemParams(args.c, args.delta)
        if args.points is None:
            raise ValidationError("construct bounded needs --points")
        points = np.asarray([float(v) for v in args.points.split(",") if v])
        dist = constructors.construct_bounded(params, points, args.g0 if args.g0 is not None else 0.5)
    elif sub in ("gamma-mix", "negbin-mix"):
        if args.alpha is None:
            raise ValidationError(f"construct {sub} needs --alpha")
        if sub == "gamma-mix":
            dist = constructors.gamma_exp_mixture(
                args.delta, args.alpha, points_per_delay=_default_resolution()
            )
            params = dist.params
        else:
            dist = constructors.geom_negbin_mixture(int(args.delta), args.alpha, n_max=args.n or 200)
            params = constructors.tangent_lattice_params(int(args.delta))
    else:
        raise ValidationError(f"unknown construct family {sub!r}")
    cert = _certify(dist, params)
    _emit(
        {"member": dist.to_dict(), "params": params.to_dict(), "certificate": cert.to_dict()},
        args,
        _member_files(dist, params, cert),
    )
    return 0


def cmd_solve_dde(args) -> int:
    params = ProblemParams(args.c, args.delta)
    phi = parse_phi(args.phi, params.delta)
    config = dde.StepSolverConfig(
        points_per_delay=args.resolution or _default_resolution(),
        horizon_delays=args.horizon,
    )
    sol = dde.solve_steps(params, phi, config)
    verdict = dde.positivity_scan(sol)
    doc = {
        "params": params.to_dict(),
        "verdict": {
            "positive": verdict.positive_on_horizon,
            "first_nonpositive_t": verdict.first_nonpositive_t,
            "machine_zero": verdict.machine_zero_reached,
            "step_residual": sol.error_estimate,
        },
    }
    files = {
        ".csv": core.to_csv(sol),
        ".json": json.dumps(core._round_floats(doc), indent=2, sort_keys=True),
    }
    doc_full = dict(doc)
    doc_full["values"] = [float(v) for v in sol.values]
    doc_full["grid_step"] = sol.grid_step
    _emit(doc_full, args, files)
    return 0


def cmd_solve_lattice(args) -> int:
    params = ProblemParams(args.c, args.delta)
    phi = InitialFunction.lattice_table([float(v) for v in args.phi.split(",") if v])
    sol = lattice.solve_steps_lattice(params, phi, args.n)
    verdict = lattice.positivity_scan_lattice(sol)
    doc = {
        "params": params.to_dict(),
        "verdict": {
            "positive": verdict.positive_on_horizon,
            "first_nonpositive_t": verdict.first_nonpositive_t,
            "machine_zero": verdict.machine_zero_reached,
            "step_residual": 0.0,
        },
        "values": [float(v) for v in sol.values],
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "G"])
    for i, v in enumerate(sol.values):
        w.writerow([i, core.format_float(v)])
    _emit(doc, args, {".csv": buf.getvalue(), ".json": json.dumps(core._round_floats(doc))})
    return 0


def cmd_check(args) -> int:
    params = ProblemParams(args.c, args.delta)
    phi = parse_phi(args.phi, params.delta)
    if args.regime == "continuous":
        report = criteria.check_continuous(phi, params)
    else:
        report = criteria.check_lattice(phi, params)
    doc = report.to_dict()
    if args.resolve_by_solving and report.verdict == "inconclusive":
        if args.regime == "continuous":
            sol = dde.solve_steps(params, phi)
            verdict = dde.positivity_scan(sol)
        else:
            sol = lattice.solve_steps_lattice(params, phi, n_horizon=30 * int(params.delta))
            verdict = lattice.positivity_scan_lattice(sol)
        doc["resolved_by_solving"] = verdict.to_dict()
    _emit(doc, args)
    return 0


def cmd_gap_table(args) -> int:
    rows = criteria.gap_region_table(parse_grid(args.a_grid), parse_grid(args.r))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "r", "N", "S"])
    for a, r, n_curve, s_curve in rows:
        w.writerow([core.format_float(v) for v in (a, r, n_curve, s_curve)])
    _emit({"rows": [[float(v) for v in row] for row in rows]}, args, {".csv": buf.getvalue()})
    return 0


def cmd_bounds(args) -> int:
    params = ProblemParams(args.c, args.delta)
    phi = parse_phi(args.phi, params.delta)
    table = criteria.sandwich_bounds(phi, params, args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "lower", "upper"])
    for x, lo, hi in table.rows():
        w.writerow([core.format_float(v) for v in (x, lo, hi)])
    doc = {"rows": [[float(x), float(lo), float(hi)] for x, lo, hi in table.rows()]}
    _emit(doc, args, {".csv": buf.getvalue()})
    return 0


def cmd_transform(args) -> int:
    with open(args.member) as fh:
        member = core.from_json(fh.read())
    if not isinstance(member, core.ContinuousSolution):
        raise ValidationError("transforms apply to continuous members")
    doc: dict = {}
    if args.laplace:
        us = [float(v) for v in args.laplace.split(",") if v]
        doc["laplace"] = {core.format_float(u): transforms.laplace(member, u) for u in us}
    if args.moments:
        table = transforms.moments(member, args.moments)
        doc["moments"] = {str(k + 1): float(m) for k, m in enumerate(table.mu)}
        doc["moment_condition"] = [float(v) for v in table.condition]
    _emit(doc, args)
    return 0


def cmd_verify_mc(args) -> int:
    with open(args.member) as fh:
        member = core.from_json(fh.read())
    if isinstance(member, core.ContinuousSolution) and args.c is None:
        params = member.params
    else:
        if args.c is None or args.delta is None:
            raise ValidationError("discrete members need --c and --delta")
        params = ProblemParams(args.c, args.delta)
    report = simulate.martingale_test(member, params, args.n, args.replicates, args.seed)
    files = {".json": json.dumps(core._round_floats(report.to_dict()), indent=2, sort_keys=True)}
    if args.z_csv or args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "mean_Z", "SE"])
        for i, (mz, sz) in enumerate(zip(report.mean_z_by_n, report.se_z_by_n), start=1):
            w.writerow([i, core.format_float(mz), core.format_float(sz)])
        if args.z_csv:
            with open(args.z_csv, "w") as fh:
                fh.write(buf.getvalue())
        else:
            files[".z.csv"] = buf.getvalue()
    _emit(report.to_dict(), args, files)
    return 0


def cmd_residual(args) -> int:
    with open(args.member) as fh:
        member = core.from_json(fh.read())
    if isinstance(member, core.ContinuousSolution) and args.c is None:
        params = member.params
    else:
        if args.c is None or args.delta is None:
            raise ValidationError("discrete members need --c and --delta")
        params = ProblemParams(args.c, args.delta)
    probes = parse_grid(args.probes) if args.probes else core.support_probes(member, params)
    tol = args.tolerance if args.tolerance is not None else _env_float(ENV_RESIDUAL_TOL, None)
    cert = core.residual_sup(member, params, probes, tolerance=tol)
    _emit(cert.to_dict(), args)
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deltarec", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, c_required=True):
        sp.add_argument("--c", type=float, required=c_required)
        sp.add_argument("--delta", type=float, required=c_required)
        sp.add_argument("--out", help="output path prefix; suppresses stdout")

    sp = sub.add_parser("construct", help="closed-form families")
    sp.add_argument("family", choices=["neg-delta", "bounded", "exp-roots", "geom-roots", "gamma-mix", "negbin-mix"])
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--gaps", help="csv of gaps or uniform:h (neg-delta)")
    sp.add_argument("--points", help="csv of support points (bounded)")
    sp.add_argument("--g0", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("solve-dde", help="method of steps on [0, horizon]")
    common(sp)
    sp.add_argument("--phi", required=True, help="poly:a0,a1,... | table:file.csv")
    sp.add_argument("--horizon", type=int, default=30, help="horizon in delays")
    sp.add_argument("--resolution", type=int, help="points per delay")
    sp.set_defaults(func=cmd_solve_dde)

    sp = sub.add_parser("solve-lattice", help="discrete method of steps")
    common(sp)
    sp.add_argument("--phi", required=True, help="v0,v1,...,vdelta")
    sp.add_argument("--n", type=int, default=60, help="horizon index")
    sp.set_defaults(func=cmd_solve_lattice)

    sp = sub.add_parser("check", help="positivity criteria for an initial function")
    common(sp)
    sp.add_argument("--regime", choices=["continuous", "lattice"], required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--resolve-by-solving", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("gap-table", help="necessary/sufficient curves as data")
    sp.add_argument("--r", default="0.55,0.75,0.95")
    sp.add_argument("--a-grid", default="0.002:0.17:0.002")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gap_table)

    sp = sub.add_parser("bounds", help="sandwich bounds at delay multiples")
    common(sp)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--n", type=int, default=18)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("transform", help="Laplace transform and moments")
    sp.add_argument("--member", required=True)
    sp.add_argument("--laplace", help="comma-separated u values")
    sp.add_argument("--moments", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("verify-mc", help="Monte Carlo martingale verification")
    sp.add_argument("--member", required=True)
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--replicates", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--z-csv", help="write the (n, mean_Z, SE) table here")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify_mc)

    sp = sub.add_parser("residual", help="membership residual certificate")
    sp.add_argument("--member", required=True)
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--probes", help="lo:hi:step or csv of probe points")
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_residual)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(json.dumps({"error": {"code": "validation", "message": str(exc)}}))
        return 2
    except OSError as exc:
        print(json.dumps({"error": {"code": "io", "message": str(exc)}}))
        return 2
    except Exception:  # internal failure: trace to stderr, exit 1
        import traceback

        traceback.print_exc()
        return 1


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
