"""Seeded experiment sweeps, trial records and their CSV form.

An :class:`ExperimentSpec` names a family and its sweep.  Each family expands
into points; every (point, trial) pair gets its own signal, operator and
noise seeds derived from the base seed, so records are independent of run
order and of which other solvers are in the spec.  Every solver sees the
same data at a given (point, trial), which makes solver comparisons paired.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .baselines import (CosampConfig, IhtConfig, ImatConfig, LassoConfig, OmpConfig,
                        Sl0Config, cosamp, iht, imat, lasso_admm, lasso_tune, omp, sl0)
from .completion import MimatConfig, default_lambda_grid, mimat, soft_impute, svt
from .errors import ConfigError, InvalidParameterError
from .inpmat import InpmatConfig, inpmat, inpmat_known_sparsity
from .rng import derive_seed
from .signals import (add_noise_at_snr, gen_low_rank, gen_sensing, gen_sparse_signal,
                      measure, rmse, snr_db, subsample_matrix, synthesis_matrix)

FAMILIES = ("snr-vs-rate", "snr-vs-input-snr", "phase-transition", "rs-vs-gaussian", "mc-rmse")

# dB values are capped here before averaging so an exact recovery (inf dB)
# does not swamp a mean; raw values are kept in the records.
SNR_CAP_DB = 300.0


# ---------------------------------------------------------------- solvers

@dataclass(frozen=True)
class LassoParams:
    """Harness-level LASSO settings; ``lam = lam_ratio * ||Phi^T y||_inf``.

    With ``tune`` the penalty is instead picked from a log grid over
    ``[1e-4, 1] * ||Phi^T y||_inf`` by best output SNR against the truth.
    """

    lam_ratio: float = 1e-4
    rho: float = 1.0
    max_iter: int = 10000
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    adaptive_rho: bool = True
    tune: bool = False
    grid_points: int = 20

    def __post_init__(self):
        if not self.lam_ratio >= 0:
            raise InvalidParameterError("lam_ratio must be non-negative")
        if self.grid_points < 1:
            raise InvalidParameterError("grid_points must be at least 1")
        self.solver_config()

    def solver_config(self, lam=None) -> LassoConfig:
        return LassoConfig(lam=lam, rho=self.rho, max_iter=self.max_iter, abs_tol=self.abs_tol,
                           rel_tol=self.rel_tol, adaptive_rho=self.adaptive_rho)


@dataclass(frozen=True)
class IhtParams:
    """IHT settings; with neither ``s`` nor ``threshold`` the trial's true sparsity is used."""

    s: int | None = None
    threshold: float | None = None
    step: float | None = None
    max_iter: int = 1000
    residual_tol: float = 1e-10

    def __post_init__(self):
        self.solver_config(1)

    def solver_config(self, s_true) -> IhtConfig:
        s = self.s if self.s is not None or self.threshold is not None else s_true
        return IhtConfig(s=s, threshold=self.threshold, step=self.step,
                         max_iter=self.max_iter, residual_tol=self.residual_tol)


@dataclass(frozen=True)
class ImatParams(ImatConfig):
    """IMAT with the non-expansive step by default, so noisy sweeps stay bounded."""

    relaxation: float | None = None


@dataclass(frozen=True)
class SvtParams:
    tau: float | None = None
    step: float | None = None
    max_iter: int = 500
    tol: float = 1e-4


@dataclass(frozen=True)
class SoftImputeParams:
    grid_points: int = 20
    max_iter: int = 500
    tol: float = 1e-6


@dataclass
class SparseTrial:
    Phi: np.ndarray
    y: np.ndarray
    x: np.ndarray
    s: int
    noise_energy: float


def _run_inpmat(cfg: InpmatConfig, t: SparseTrial, known_sparsity=False):
    if t.noise_energy > 0 and cfg.eps is None and cfg.noise_var is None:
        cfg = dataclasses.replace(cfg, eps=t.noise_energy)
    if known_sparsity:
        r = inpmat_known_sparsity(t.Phi, t.y, t.s, cfg)
    else:
        r = inpmat(t.Phi, t.y, cfg)
    return r


def _run_lasso(p: LassoParams, t: SparseTrial, known_sparsity=False):
    if p.tune:
        r, _ = lasso_tune(t.Phi, t.y, t.x, p.solver_config(), points=p.grid_points)
    else:
        lam = p.lam_ratio * float(np.max(np.abs(t.Phi.T @ t.y)))
        r = lasso_admm(t.Phi, t.y, p.solver_config(lam))
    return r


def _with_s(fn):
    def run(cfg, t: SparseTrial, known_sparsity=False):
        return fn(t.Phi, t.y, t.s, cfg)
    return run


def _plain(fn):
    def run(cfg, t: SparseTrial, known_sparsity=False):
        return fn(t.Phi, t.y, cfg)
    return run


def _run_iht(p: IhtParams, t: SparseTrial, known_sparsity=False):
    r = iht(t.Phi, t.y, p.solver_config(t.s))
    return r


def _run_mimat(cfg: MimatConfig, problem, known_sparsity=False):
    r = mimat(problem, cfg)
    return r


def _run_svt(p: SvtParams, problem, known_sparsity=False):
    r = svt(problem, tau=p.tau, step=p.step, max_iter=p.max_iter, tol=p.tol)
    return r


def _run_soft_impute(p: SoftImputeParams, problem, known_sparsity=False):
    grid = default_lambda_grid(problem, p.grid_points)
    r = soft_impute(problem, grid, max_iter=p.max_iter, tol=p.tol)
    return r


@dataclass(frozen=True)
class SolverEntry:
    name: str
    kind: str  # "sparse" or "completion"
    params: type
    run: Callable


SOLVERS = {e.name: e for e in [
    SolverEntry("inpmat", "sparse", InpmatConfig, _run_inpmat),
    SolverEntry("lasso", "sparse", LassoParams, _run_lasso),
    SolverEntry("omp", "sparse", OmpConfig, _with_s(omp)),
    SolverEntry("cosamp", "sparse", CosampConfig, _with_s(cosamp)),
    SolverEntry("iht", "sparse", IhtParams, _run_iht),
    SolverEntry("imat", "sparse", ImatParams, _plain(imat)),
    SolverEntry("sl0", "sparse", Sl0Config, _plain(sl0)),
    SolverEntry("mimat", "completion", MimatConfig, _run_mimat),
    SolverEntry("svt", "completion", SvtParams, _run_svt),
    SolverEntry("soft-impute", "completion", SoftImputeParams, _run_soft_impute),
]}


@dataclass(frozen=True)
class SolverSpec:
    name: str
    params: dict = field(default_factory=dict)

    def entry(self) -> SolverEntry:
        try:
            return SOLVERS[self.name]
        except KeyError:
            raise ConfigError(f"unknown solver {self.name!r}; known: {sorted(SOLVERS)}") from None

    def config(self):
        entry = self.entry()
        allowed = {f.name for f in fields(entry.params)}
        unknown = set(self.params) - allowed
        if unknown:
            raise ConfigError(f"solver {self.name!r} has no parameter(s) {sorted(unknown)}; "
                              f"allowed: {sorted(allowed)}")
        try:
            return entry.params(**self.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad parameters for solver {self.name!r}: {exc}") from exc

    def fingerprint(self) -> str:
        """First 12 hex digits of sha256 over the fully resolved config."""
        payload = {"solver": self.name, "config": dataclasses.asdict(self.config())}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def parse(cls, obj) -> "SolverSpec":
        if isinstance(obj, str):
            return cls(obj)
        if isinstance(obj, dict) and "name" in obj and set(obj) <= {"name", "params"}:
            params = obj.get("params") or {}
            if not isinstance(params, dict):
                raise ConfigError(f"params for solver {obj['name']!r} must be an object")
            return cls(str(obj["name"]), dict(params))
        raise ConfigError(f"cannot read solver entry {obj!r}")


# ---------------------------------------------------------------- specs

_DEFAULTS: dict[str, dict[str, Any]] = {
    "snr-vs-rate": dict(n=700, s=40, rates=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                        input_snr_db=40.0, operator="gaussian", trials=10,
                        solvers=["inpmat", "lasso", "omp", "cosamp", "iht", "imat", "sl0"]),
    "snr-vs-input-snr": dict(n=700, s=40, m=350, input_snrs=[0, 10, 20, 30, 40, 50, 60],
                             operator="gaussian", trials=10,
                             solvers=["inpmat", "lasso", "omp", "cosamp", "iht", "imat", "sl0"]),
    "phase-transition": dict(n=200, deltas=[round(0.1 * i, 2) for i in range(1, 11)],
                             rhos=[round(0.1 * i, 2) for i in range(1, 11)], success_tol=1e-3,
                             operator="gaussian", trials=20, solvers=["inpmat", "lasso"]),
    "rs-vs-gaussian": dict(n=400, s=23, rates=[0.25, 0.375, 0.5, 0.75],
                           input_snrs=[40, 80, 120, 160], synthesis="dct", trials=10,
                           solvers=["inpmat"]),
    "mc-rmse": dict(rows=60, cols=110, rank=10,
                    missing=[0.0, 0.2, 0.4, 0.5, 0.6, 0.65, 0.7, 0.8, 0.9], trials=10,
                    solvers=["mimat", "svt", "soft-impute"]),
}

_USED = {
    "snr-vs-rate": {"n", "s", "rates", "input_snr_db", "operator"},
    "snr-vs-input-snr": {"n", "s", "m", "input_snrs", "operator"},
    "phase-transition": {"n", "deltas", "rhos", "success_tol", "operator"},
    "rs-vs-gaussian": {"n", "s", "rates", "input_snrs", "synthesis"},
    "mc-rmse": {"rows", "cols", "rank", "missing"},
}


@dataclass
class ExperimentSpec:
    """One experiment family with its sweep, solvers and seeding.

    Fields a family does not use stay ``None``.  :meth:`create` fills the
    family defaults and validates; unknown JSON keys are rejected.
    """

    family: str
    solvers: list = field(default_factory=list)
    trials: int = 10
    seed: int = 0
    known_sparsity: bool = False
    n: int | None = None
    s: int | None = None
    m: int | None = None
    rates: list | None = None
    input_snr_db: float | None = None
    input_snrs: list | None = None
    operator: str | None = None
    synthesis: str | None = None
    deltas: list | None = None
    rhos: list | None = None
    success_tol: float | None = None
    rows: int | None = None
    cols: int | None = None
    rank: int | None = None
    missing: list | None = None

    @classmethod
    def create(cls, family: str, **overrides) -> "ExperimentSpec":
        if family not in FAMILIES:
            raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
        known = {f.name for f in fields(cls)} - {"family"}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown spec key(s) {sorted(unknown)}")
        extra = {k for k, v in overrides.items() if v is not None} - _USED[family] - {
            "solvers", "trials", "seed", "known_sparsity"}
        if extra:
            raise ConfigError(f"key(s) {sorted(extra)} do not apply to family {family!r}")
        values = dict(_DEFAULTS[family])
        values.update({k: v for k, v in overrides.items() if v is not None})
        values["solvers"] = [SolverSpec.parse(x) if not isinstance(x, SolverSpec) else x
                             for x in values["solvers"]]
        spec = cls(family=family, **values)
        spec.validate()
        return spec

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        if not isinstance(d, dict) or "family" not in d:
            raise ConfigError("spec must be a JSON object with a 'family' key")
        d = dict(d)
        return cls.create(d.pop("family"), **d)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        out = {"family": self.family, "trials": self.trials, "seed": self.seed,
               "known_sparsity": self.known_sparsity,
               "solvers": [{"name": sp.name, "params": dict(sp.params)} for sp in self.solvers]}
        for k in sorted(_USED[self.family]):
            out[k] = getattr(self, k)
        return out

    def validate(self) -> None:
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        kind = "completion" if self.family == "mc-rmse" else "sparse"
        names = [sp.name for sp in self.solvers]
        if len(set(names)) != len(names):
            raise ConfigError("each solver may appear only once in a spec")
        for sp in self.solvers:
            if sp.entry().kind != kind:
                raise ConfigError(f"solver {sp.name!r} does not apply to family {self.family!r}")
            sp.config()
        for key in ("rates", "input_snrs", "deltas", "rhos", "missing"):
            v = getattr(self, key)
            if key in _USED[self.family] and (not isinstance(v, list) or not v):
                raise ConfigError(f"sweep {key!r} must be a non-empty list")
        f = self.family
        if f in ("snr-vs-rate", "rs-vs-gaussian"):
            if any(not 0 < r <= 1 for r in self.rates):
                raise ConfigError("rates must lie in (0, 1]")
        if f == "phase-transition":
            if any(not 0 < d <= 1 for d in self.deltas) or any(not 0 < r <= 1 for r in self.rhos):
                raise ConfigError("deltas and rhos must lie in (0, 1]")
            if len(set(self.deltas)) < 2 or len(set(self.rhos)) < 2:
                raise ConfigError("degenerate phase grid: need at least two deltas and two rhos")
            if not self.success_tol > 0:
                raise ConfigError("success_tol must be positive")
        if f == "mc-rmse":
            if any(not 0 <= x < 1 for x in self.missing):
                raise ConfigError("missing fractions must lie in [0, 1)")
            if not 1 <= self.rank <= min(self.rows, self.cols):
                raise ConfigError("rank must lie in [1, min(rows, cols)]")
        elif f != "phase-transition" and not 1 <= self.s <= self.n:
            raise ConfigError("need 1 <= s <= n")
        if f == "snr-vs-input-snr" and not self.s <= self.m <= self.n:
            raise ConfigError("need s <= m <= n")
        if self.operator is not None and self.operator not in ("gaussian", "random-sampling"):
            raise ConfigError(f"unknown operator {self.operator!r}")


# ---------------------------------------------------------------- records

@dataclass
class TrialRecord:
    """One solver run at one sweep point and trial.

    Sweep columns a family does not use are ``None`` (empty in CSV).
    ``wall_ms`` is kept in memory and in the timing sidecar only, so the
    main CSV stays byte-identical across reruns.
    """

    family: str
    solver: str
    point: int
    trial: int
    seed: int
    metric: str
    value: float
    iterations: int
    termination: str
    config_fingerprint: str
    n: int | None = None
    m: int | None = None
    s: int | None = None
    rate: float | None = None
    input_snr_db: float | None = None
    operator: str | None = None
    delta: float | None = None
    rho: float | None = None
    rows: int | None = None
    cols: int | None = None
    rank: int | None = None
    missing: float | None = None
    wall_ms: float = math.nan

    def key(self):
        return (self.family, self.solver, self.point, self.trial)


CSV_COLUMNS = [f.name for f in fields(TrialRecord) if f.name != "wall_ms"]
_INT_COLS = {"point", "trial", "seed", "iterations", "n", "m", "s", "rows", "cols", "rank"}
_FLOAT_COLS = {"value", "rate", "input_snr_db", "delta", "rho", "missing"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sorted(records):
    keys = [r.key() for r in records]
    if len(set(keys)) != len(keys):
        raise InvalidParameterError("records are not uniquely keyed")
    return sorted(records, key=TrialRecord.key)


def emit_csv(records, path) -> Path:
    """Write records sorted by key with an RFC-4180 header row."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in _sorted(records):
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def emit_timing_csv(records, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["family", "solver", "point", "trial", "wall_ms"])
        for r in _sorted(records):
            w.writerow([r.family, r.solver, r.point, r.trial, f"{r.wall_ms:.3f}"])
    return path


def read_csv(path) -> list[TrialRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_COLUMNS:
        raise ConfigError(f"{path}: not a trial-record CSV (unexpected header)")
    out = []
    for row in rows[1:]:
        if len(row) != len(CSV_COLUMNS):
            raise ConfigError(f"{path}: malformed row {row!r}")
        kw = {}
        for col, text in zip(CSV_COLUMNS, row):
            if text == "":
                kw[col] = None
            elif col in _INT_COLS:
                kw[col] = int(text)
            elif col in _FLOAT_COLS:
                kw[col] = float(text)
            else:
                kw[col] = text
        out.append(TrialRecord(**kw))
    return out


# ---------------------------------------------------------------- sweeps

def _point_seeds(spec: ExperimentSpec, problem_key: str, operator_key: str, trial: int):
    base = (spec.seed, spec.family)
    return (derive_seed(*base, "signal", problem_key, trial),
            derive_seed(*base, "operator", operator_key, trial),
            derive_seed(*base, "noise", problem_key, trial))


def _sparse_trial(n, m, s, operator, input_snr, seeds, synthesis=None) -> SparseTrial:
    sig_seed, op_seed, noise_seed = seeds
    x = gen_sparse_signal(n, s, sig_seed).values
    if operator == "random-sampling":
        Phi = gen_sensing("random-sampling", m, n, op_seed, synthesis or "dct").matrix
    else:
        Phi = gen_sensing("gaussian", m, n, op_seed).matrix
        if synthesis is not None:
            # same sparse coefficients, measured through the synthesis transform
            Phi = Phi @ synthesis_matrix(synthesis, n)
    y_clean = measure(Phi, x).y
    y = add_noise_at_snr(y_clean, input_snr, noise_seed).y
    return SparseTrial(Phi, y, x, s, float(np.sum((y - y_clean) ** 2)))


def _sparse_points(spec: ExperimentSpec):
    """Yield ``(point fields, problem key, operator key, trial builder)``."""
    f, n = spec.family, spec.n
    if f == "snr-vs-rate":
        for rate in spec.rates:
            m = max(1, round(rate * n))
            pt = dict(n=n, m=m, s=spec.s, rate=float(rate), input_snr_db=float(spec.input_snr_db),
                      operator=spec.operator)
            key = f"m={m}"
            yield pt, key, key, lambda seeds, m=m: _sparse_trial(
                n, m, spec.s, spec.operator, spec.input_snr_db, seeds)
    elif f == "snr-vs-input-snr":
        for snr in spec.input_snrs:
            pt = dict(n=n, m=spec.m, s=spec.s, rate=spec.m / n, input_snr_db=float(snr),
                      operator=spec.operator)
            key = f"snr={float(snr)!r}"
            yield pt, key, "fixed", lambda seeds, snr=snr: _sparse_trial(
                n, spec.m, spec.s, spec.operator, float(snr), seeds)
    elif f == "rs-vs-gaussian":
        for rate in spec.rates:
            m = max(1, round(rate * n))
            for snr in spec.input_snrs:
                for kind in ("gaussian", "random-sampling"):
                    pt = dict(n=n, m=m, s=spec.s, rate=float(rate), input_snr_db=float(snr),
                              operator=kind)
                    key = f"m={m},snr={float(snr)!r}"
                    yield pt, key, f"{kind},m={m}", lambda seeds, m=m, snr=snr, kind=kind: (
                        _sparse_trial(n, m, spec.s, kind, float(snr), seeds, spec.synthesis))
    elif f == "phase-transition":
        for delta in spec.deltas:
            m = max(1, round(delta * n))
            for rho in spec.rhos:
                s = min(m, max(1, round(rho * m)))
                pt = dict(n=n, m=m, s=s, delta=float(delta), rho=float(rho),
                          operator=spec.operator)
                key = f"m={m},s={s}"
                yield pt, key, key, lambda seeds, m=m, s=s: _sparse_trial(
                    n, m, s, spec.operator, math.inf, seeds)


def _solve(entry, cfg, data, known_sparsity):
    """Run one solver; ``None`` when its preconditions rule the point out."""
    t0 = time.perf_counter()
    try:
        out = entry.run(cfg, data, known_sparsity)
    except InvalidParameterError:
        # e.g. 3s > m for CoSaMP
        out = None
    return out, (time.perf_counter() - t0) * 1e3


def _iterations(result) -> int:
    if hasattr(result, "inner_iterations"):
        return result.inner_iterations
    return result.iterations


def run_sweep(spec: ExperimentSpec, progress: Callable | None = None) -> list[TrialRecord]:
    """Run every (point, trial, solver) of a family and return its records."""
    spec.validate()
    if spec.family == "mc-rmse":
        return _run_mc(spec, progress)
    phase = spec.family == "phase-transition"
    metric = "rel_err" if phase else "snr_db"
    solvers = [(sp, sp.entry(), sp.config(), sp.fingerprint()) for sp in spec.solvers]
    records = []
    for p_idx, (pt, key, op_key, build) in enumerate(_sparse_points(spec)):
        for trial in range(spec.trials):
            seeds = _point_seeds(spec, key, op_key, trial)
            data = build(seeds)
            for sp, entry, cfg, fp in solvers:
                out, ms = _solve(entry, cfg, data, spec.known_sparsity)
                if out is None:
                    value, iters, term = math.nan, 0, "skipped"
                elif phase:
                    value = float(np.linalg.norm(out.estimate - data.x) / np.linalg.norm(data.x))
                    iters, term = _iterations(out), str(out.termination)
                else:
                    value = snr_db(data.x, out.estimate)
                    iters, term = _iterations(out), str(out.termination)
                records.append(TrialRecord(spec.family, sp.name, p_idx, trial, seeds[0], metric,
                                           value, iters, term, fp, wall_ms=ms, **pt))
            if progress:
                progress(p_idx, trial)
    return records


def _run_mc(spec: ExperimentSpec, progress=None) -> list[TrialRecord]:
    solvers = [(sp, sp.entry(), sp.config(), sp.fingerprint()) for sp in spec.solvers]
    records = []
    for p_idx, frac in enumerate(spec.missing):
        for trial in range(spec.trials):
            mat_seed = derive_seed(spec.seed, spec.family, "matrix", trial)
            mask_seed = derive_seed(spec.seed, spec.family, "mask", f"missing={float(frac)!r}", trial)
            M = gen_low_rank(spec.rows, spec.cols, spec.rank, mat_seed)
            problem = subsample_matrix(M, float(frac), mask_seed)
            for sp, entry, cfg, fp in solvers:
                out, ms = _solve(entry, cfg, problem, False)
                value = math.nan if out is None else rmse(M, out.estimate)
                iters, term = (0, "skipped") if out is None else (_iterations(out),
                                                                  str(out.termination))
                records.append(TrialRecord(spec.family, sp.name, p_idx, trial, mat_seed, "rmse",
                                           value, iters, term, fp, rows=spec.rows, cols=spec.cols,
                                           rank=spec.rank, missing=float(frac), wall_ms=ms))
            if progress:
                progress(p_idx, trial)
    return records


def run_snr_vs_rate(spec: ExperimentSpec, progress=None) -> list[TrialRecord]:
    _expect(spec, "snr-vs-rate")
    return run_sweep(spec, progress)


def run_snr_vs_input_snr(spec: ExperimentSpec, progress=None) -> list[TrialRecord]:
    _expect(spec, "snr-vs-input-snr")
    return run_sweep(spec, progress)


def run_rs_vs_gaussian(spec: ExperimentSpec, progress=None) -> list[TrialRecord]:
    _expect(spec, "rs-vs-gaussian")
    return run_sweep(spec, progress)


def run_mc_benchmark(spec: ExperimentSpec, progress=None) -> list[TrialRecord]:
    _expect(spec, "mc-rmse")
    return run_sweep(spec, progress)


def _expect(spec, family):
    if spec.family != family:
        raise ConfigError(f"spec family is {spec.family!r}, expected {family!r}")


# ---------------------------------------------------------------- summaries

def summarize(records, by=("solver", "point")):
    """Mean and standard error of ``value`` grouped by ``by``.

    Returns ``{group: (mean, stderr, count)}``; NaN values (skipped runs) are
    left out and dB values are capped at :data:`SNR_CAP_DB` first.
    """
    groups: dict = {}
    for r in records:
        v = r.value
        if v is None or math.isnan(v):
            continue
        if r.metric == "snr_db":
            v = min(v, SNR_CAP_DB)
        groups.setdefault(tuple(getattr(r, b) for b in by), []).append(v)
    out = {}
    for g, vals in groups.items():
        a = np.asarray(vals)
        se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
        out[g] = (float(a.mean()), se, int(a.size))
    return out


@dataclass
class PhaseGrid:
    """Success rates on a (delta, rho) grid, one matrix per solver.

    ``success[name][i, j]`` is the success rate at ``deltas[i]``, ``rhos[j]``;
    a trial succeeds when its relative error is at most ``success_tol``.
    """

    deltas: np.ndarray
    rhos: np.ndarray
    success: dict
    success_tol: float

    def __post_init__(self):
        for name, S in self.success.items():
            if S.shape != (len(self.deltas), len(self.rhos)):
                raise InvalidParameterError(f"grid for {name!r} does not match its axes")
            if np.any((S < 0) | (S > 1)):
                raise InvalidParameterError("success rates must lie in [0, 1]")

    @classmethod
    def from_records(cls, records, success_tol: float) -> "PhaseGrid":
        recs = [r for r in records if r.family == "phase-transition"]
        if not recs:
            raise InvalidParameterError("no phase-transition records")
        deltas = np.array(sorted({r.delta for r in recs}))
        rhos = np.array(sorted({r.rho for r in recs}))
        di = {d: i for i, d in enumerate(deltas)}
        ri = {r: j for j, r in enumerate(rhos)}
        hits, counts = {}, {}
        for r in recs:
            if r.solver not in hits:
                hits[r.solver] = np.zeros((deltas.size, rhos.size))
                counts[r.solver] = np.zeros((deltas.size, rhos.size))
            i, j = di[r.delta], ri[r.rho]
            counts[r.solver][i, j] += 1
            hits[r.solver][i, j] += float(r.value <= success_tol)  # NaN counts as failure
        success = {k: np.divide(hits[k], counts[k], out=np.zeros_like(hits[k]),
                                where=counts[k] > 0) for k in hits}
        return cls(deltas, rhos, success, success_tol)

    def contour(self, solver: str, level: float = 0.5) -> np.ndarray:
        """Per-delta rho at which success first drops below ``level``.

        Linear interpolation between the last cell at or above ``level`` and
        the first one below it; NaN where the row never crosses.
        """
        S = self.success[solver]
        out = np.full(self.deltas.size, np.nan)
        for i, row in enumerate(S):
            below = np.nonzero(row < level)[0]
            if below.size == 0 or below[0] == 0:
                continue
            j = below[0]
            r0, r1, a, b = self.rhos[j - 1], self.rhos[j], row[j - 1], row[j]
            out[i] = r0 + (a - level) / (a - b) * (r1 - r0)
        return out

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["solver", "delta", "rho", "success_rate"])
            for name in sorted(self.success):
                for i, d in enumerate(self.deltas):
                    for j, r in enumerate(self.rhos):
                        w.writerow([name, repr(float(d)), repr(float(r)),
                                    repr(float(self.success[name][i, j]))])
        return path


def run_phase_transition(spec: ExperimentSpec, progress=None) -> tuple[PhaseGrid, list]:
    """Run the phase-transition sweep; returns the grid and the raw records."""
    _expect(spec, "phase-transition")
    records = run_sweep(spec, progress)
    return PhaseGrid.from_records(records, spec.success_tol), records


__all__ = ["FAMILIES", "SOLVERS", "ExperimentSpec", "SolverSpec", "TrialRecord", "PhaseGrid",
           "LassoParams", "IhtParams", "ImatParams", "SvtParams", "SoftImputeParams", "emit_csv", "emit_timing_csv",
           "read_csv", "run_sweep", "run_snr_vs_rate", "run_snr_vs_input_snr",
           "run_phase_transition", "run_rs_vs_gaussian", "run_mc_benchmark", "summarize",
           "CSV_COLUMNS", "SNR_CAP_DB"]
