"""Command-line entry point: ``nullproj {recover,complete,bench,phase,plot}``.

Exit status is 0 on success, 2 for configuration or input/output errors
and 1 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import ConfigError, InvalidParameterError, NumericalError
from .io import read_descriptor, read_matrix_csv, read_omega_csv, read_vector_csv, write_matrix_csv
from .signals import CompletionProblem, rmse, snr_db

log = logging.getLogger("nullproj")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_solver_arg(text: str) -> tuple[str | None, dict]:
    """``NAME``, ``NAME:k=v,k=v`` or a bare ``k=v,...`` (applies to all solvers)."""
    name, _, rest = text.partition(":")
    if "=" in name:
        name, rest = None, text
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or not key:
            raise ConfigError(f"cannot parse solver option {item!r}; expected key=value")
        params[key.strip()] = _parse_value(val.strip())
    return (name.strip() if name else None), params


def _solver_specs(args_solvers, current):
    """Merge ``--solver`` flags into the spec's solver list.

    Named flags replace the list (in flag order); bare ``k=v`` flags update
    every solver that has that parameter.
    """
    parsed = [parse_solver_arg(s) for s in args_solvers or []]
    named = [(n, p) for n, p in parsed if n is not None]
    shared = {}
    for n, p in parsed:
        if n is None:
            shared.update(p)
    solvers = [harness.SolverSpec(n, p) for n, p in named] if named else list(current)
    if shared:
        out, used = [], set()
        for sp in solvers:
            allowed = {f for f in sp.entry().params.__dataclass_fields__}
            take = {k: v for k, v in shared.items() if k in allowed}
            used |= set(take)
            out.append(harness.SolverSpec(sp.name, {**sp.params, **take}))
        missing = set(shared) - used
        if missing:
            raise ConfigError(f"no selected solver accepts {sorted(missing)}")
        solvers = out
    return solvers


def _load_spec(args, family: str) -> harness.ExperimentSpec:
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.spec}: invalid JSON ({exc})") from exc
        if not isinstance(d, dict):
            raise ConfigError(f"{args.spec}: spec must be a JSON object")
        if d.setdefault("family", family) != family:
            raise ConfigError(f"{args.spec}: spec family {d['family']!r} does not match {family!r}")
    else:
        d = {"family": family}
    for item in args.set or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        d[key.strip()] = _parse_value(val)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.trials is not None:
        d["trials"] = args.trials
    if args.known_sparsity:
        d["known_sparsity"] = True
    spec = harness.ExperimentSpec.from_dict(d)
    if args.solver:
        spec.solvers = _solver_specs(args.solver, spec.solvers)
        spec.validate()
    return spec


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress(verbose):
    if not verbose:
        return None

    def report(point, trial):
        log.info("point %d trial %d done", point, trial)
    return report


def cmd_bench(args, family=None) -> int:
    from .plotting import emit_plot

    family = family or args.family
    spec = _load_spec(args, family)
    out = _out_dir(args.out_dir)
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")
    progress = _progress(args.verbose)
    if family == "phase-transition":
        grid, records = harness.run_phase_transition(spec, progress)
        grid.to_csv(out / "grid.csv")
    else:
        records = harness.run_sweep(spec, progress)
        grid = None
    harness.emit_csv(records, out / "records.csv")
    harness.emit_timing_csv(records, out / "timing.csv")
    if not args.no_plot:
        if grid is not None:
            emit_plot(grid, "heatmap", out / "phase.svg")
        else:
            emit_plot(records, "line", out / f"{family}.svg")
    stats = harness.summarize(records)
    for (solver, point), (mean, se, count) in sorted(stats.items()):
        print(f"{solver:12s} point {point:3d}  mean {mean:12.4f}  stderr {se:10.4f}  n={count}")
    if grid is not None:
        for name in sorted(grid.success):
            c = ", ".join("-" if math.isnan(v) else f"{v:.3f}" for v in grid.contour(name))
            print(f"{name} 50% contour (rho per delta): {c}")
    print(f"wrote {len(records)} records to {out / 'records.csv'}")
    return 0


def cmd_phase(args) -> int:
    return cmd_bench(args, "phase-transition")


def _single_solver(args, default):
    name, params = parse_solver_arg(args.solver) if args.solver else (default, {})
    return harness.SolverSpec(name or default, params)


def cmd_recover(args) -> int:
    if (args.phi is None) == (args.operator is None):
        raise ConfigError("give exactly one of --phi or --operator")
    Phi = read_matrix_csv(args.phi) if args.phi else read_descriptor(args.operator).matrix
    y = read_vector_csv(args.y)
    sp = _single_solver(args, "inpmat")
    entry = sp.entry()
    if entry.kind != "sparse":
        raise ConfigError(f"solver {sp.name!r} is a matrix-completion solver; use 'complete'")
    needs_s = sp.name in ("omp", "cosamp") or args.known_sparsity or (
        sp.name == "iht" and "s" not in sp.params and "threshold" not in sp.params)
    if needs_s and args.sparsity is None:
        raise ConfigError(f"solver {sp.name!r} needs --sparsity")
    truth = read_vector_csv(args.truth) if args.truth else np.zeros(Phi.shape[1])
    trial = harness.SparseTrial(Phi, y, truth, args.sparsity or 0, 0.0)
    if sp.name == "lasso" and sp.config().tune and not args.truth:
        raise ConfigError("lasso tuning needs --truth")
    result = entry.run(sp.config(), trial, args.known_sparsity)
    out = _out_dir(args.out_dir)
    write_matrix_csv(out / "estimate.csv", result.estimate)
    result.trace.to_csv(out / "trace.csv")
    summary = {"solver": sp.name, "fingerprint": sp.fingerprint(), "iterations": result.iterations,
               "termination": str(result.termination),
               "residual": float(np.linalg.norm(y - Phi @ result.estimate))}
    if args.truth:
        summary["snr_db"] = snr_db(truth, result.estimate)
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_complete(args) -> int:
    A = read_matrix_csv(args.observed)
    omega = read_omega_csv(args.omega)
    for i, j in omega:
        if not (0 <= i < A.shape[0] and 0 <= j < A.shape[1]):
            raise ConfigError(f"observed index ({i}, {j}) outside a {A.shape} matrix")
    truth = read_matrix_csv(args.truth) if args.truth else None
    problem = CompletionProblem.from_omega(A, omega, A.shape, truth)
    sp = _single_solver(args, "mimat")
    if sp.entry().kind != "completion":
        raise ConfigError(f"solver {sp.name!r} is a sparse-recovery solver; use 'recover'")
    result = sp.entry().run(sp.config(), problem)
    out = _out_dir(args.out_dir)
    write_matrix_csv(out / "estimate.csv", result.estimate)
    result.trace.to_csv(out / "trace.csv")
    summary = {"solver": sp.name, "fingerprint": sp.fingerprint(),
               "outer_passes": result.outer_passes, "inner_iterations": result.inner_iterations,
               "fit_residual": result.fit_residual, "termination": str(result.termination)}
    if truth is not None:
        summary["rmse"] = rmse(truth, result.estimate)
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_plot(args) -> int:
    from .plotting import emit_plot

    records = harness.read_csv(args.records)
    if not records:
        raise ConfigError(f"{args.records}: no records to plot")
    kind = args.kind
    if kind == "auto":
        kind = "heatmap" if records[0].family == "phase-transition" else "line"
    kw = {"success_tol": args.success_tol} if kind == "heatmap" else {}
    path = emit_plot(records, kind, args.out, **kw)
    print(f"wrote {path}")
    return 0


def _add_sweep_flags(p):
    p.add_argument("--spec", help="JSON experiment spec (family defaults fill the rest)")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--trials", type=int, help="trials per sweep point")
    p.add_argument("--solver", action="append", metavar="NAME[:k=v,...]|k=v",
                   help="select a solver (repeatable) or override a parameter for all solvers")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a spec field; VALUE is parsed as JSON when possible")
    p.add_argument("--known-sparsity", action="store_true", help="run INPMAT with known sparsity")
    p.add_argument("--out-dir", default="results", help="output directory (default: results)")
    p.add_argument("--no-plot", action="store_true", help="skip the SVG figure")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nullproj", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="recover a sparse vector from y = Phi x")
    p.add_argument("--phi", help="sensing matrix CSV")
    p.add_argument("--operator", help="one-line JSON operator descriptor")
    p.add_argument("--y", required=True, help="measurement vector CSV")
    p.add_argument("--solver", help="NAME[:k=v,...] (default inpmat)")
    p.add_argument("--sparsity", type=int, help="sparsity for omp, cosamp, iht, known-sparsity")
    p.add_argument("--known-sparsity", action="store_true")
    p.add_argument("--truth", help="true signal CSV, reported as output SNR")
    p.add_argument("--out-dir", default=".", help="where estimate.csv and trace.csv go")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("complete", help="fill in a partially observed low-rank matrix")
    p.add_argument("--observed", required=True, help="matrix CSV (unobserved entries ignored)")
    p.add_argument("--omega", required=True, help="CSV of observed (row, col) pairs")
    p.add_argument("--solver", help="mimat, svt or soft-impute, with :k=v options")
    p.add_argument("--truth", help="true matrix CSV, reported as RMSE")
    p.add_argument("--out-dir", default=".", help="where estimate.csv and trace.csv go")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("bench", help="run an experiment family")
    p.add_argument("family", choices=harness.FAMILIES)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("phase", help="phase-transition grid (same as 'bench phase-transition')")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("plot", help="render an SVG from a records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--kind", choices=("auto", "line", "heatmap"), default="auto")
    p.add_argument("--success-tol", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError, OSError) as exc:
        print(f"nullproj: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"nullproj: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
