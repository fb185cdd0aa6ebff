"""Command line harness: ``generate``, ``run``, ``sweep`` and ``bound``.

All configuration comes from JSON spec files; the flags only name files and
override a few scalar settings.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .algorithm import HrPcaConfig, run
from .baselines import IllConditionedError, mvt, pca_baseline, pp_approx
from .datagen import GenSpec, GroundTruth, generate, load_dataset, save_dataset
from .kernel import KernelFn, run_kernel
from .metrics import expressed_variance, rve
from .tailbound import TailModel, bound_curve

RESULT_FIELDS = [
    "cell_id", "method", "lambda", "sigma", "mag", "n", "m", "d",
    "trial", "seed", "ev", "opt", "status", "runtime_ms",
]
SUMMARY_FIELDS = [
    "cell_id", "method", "lambda", "sigma", "mag", "n", "m", "d",
    "mean_ev", "std_ev", "trials", "failures",
]
BOUND_FIELDS = ["lambda", "bound", "model", "t_hat_ratio"]
METHODS = ("pca", "hrpca", "kernel", "mvt", "pp")
NA = "NA"


class SpecError(ValueError):
    pass


def fmt(x) -> str:
    """Lossless text for CSV cells."""
    if x is None:
        return NA
    if isinstance(x, (float, np.floating)):
        return NA if math.isnan(x) else repr(float(x))
    return str(x)


def trial_seed(base_seed: int, cell: int, trial: int) -> int:
    """Independent 64-bit seed per (cell, trial), stable under adding methods."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(cell), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class MethodOptions:
    """Per-method settings shared by ``run`` and ``sweep``."""

    d: int | None = None
    t_hat: int | str | None = None  # None: ceil(n/2); "t": number of authentic points
    t_bar: int | None = None
    center: bool = False
    mvt: dict = field(default_factory=dict)
    pp: dict = field(default_factory=dict)
    kernel: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> MethodOptions:
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise SpecError(f"unknown method options: {sorted(unknown)}")
        opts = cls(**raw)
        if not (opts.t_hat is None or opts.t_hat == "t" or isinstance(opts.t_hat, int)):
            raise SpecError('t_hat must be an integer, "t" or null')
        return opts

    def resolve_t_hat(self, n: int, truth: GroundTruth | None) -> int:
        if self.t_hat == "t":
            if truth is not None:
                return n - len(truth.outlier_indices)
            return math.ceil(n / 2)
        return math.ceil(n / 2) if self.t_hat is None else int(self.t_hat)


def evaluate(Y: np.ndarray, truth: GroundTruth | None, method: str, d: int,
             opts: MethodOptions, seed: int) -> dict:
    """Run one method on one data set; returns ev, opt, status and runtime."""
    if method not in METHODS:
        raise SpecError(f"unknown method {method!r}; choose from {METHODS}")
    n = Y.shape[0]
    t_hat = opts.resolve_t_hat(n, truth)
    ev = opt = math.nan
    status = "ok"
    start = time.perf_counter()
    try:
        basis = None
        if method in ("hrpca", "kernel"):
            cfg = HrPcaConfig(d=d, t_bar=opts.t_bar, t_hat=t_hat, seed=seed, center=opts.center)
            if method == "hrpca":
                res = run(Y, cfg)
                basis = res.basis
            else:
                kern = KernelFn.from_dict(opts.kernel) if opts.kernel else KernelFn.linear()
                res = run_kernel(Y, kern, cfg)
                if kern.kind == "linear" and res.model.rank == d:
                    basis = res.model.input_space_basis()
            opt = res.opt
        else:
            if method == "pca":
                basis = pca_baseline(Y, d)
            elif method == "mvt":
                basis = mvt(Y, d, **opts.mvt)
            else:
                basis = pp_approx(Y, d, **opts.pp)
            opt = rve(basis, Y, t_hat)
        if truth is not None and basis is not None:
            ev = expressed_variance(basis, truth).ev
    except IllConditionedError:
        status = "ill_conditioned"
    except (ValueError, np.linalg.LinAlgError) as exc:
        status = f"error:{type(exc).__name__}"
    runtime_ms = 1000.0 * (time.perf_counter() - start)
    return {"ev": ev, "opt": opt, "status": status, "runtime_ms": runtime_ms}


def result_row(cell_id, method, spec_fields: dict, trial, seed, outcome: dict) -> dict:
    row = {"cell_id": cell_id, "method": method, **spec_fields, "trial": trial, "seed": seed}
    row.update(outcome)
    row["runtime_ms"] = f"{outcome['runtime_ms']:.3f}"
    return {k: fmt(row[k]) if k != "runtime_ms" else row[k] for k in RESULT_FIELDS}


def write_csv(path, fields, rows, append: bool = False) -> None:
    if path is None or str(path) == "-":
        w = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
        if not append:
            w.writeheader()
        w.writerows(rows)
        return
    path = Path(path)
    new = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        if new:
            w.writeheader()
        w.writerows(rows)


def read_json(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise SpecError(f"{path}: expected a JSON object")
    return raw


# -- generate ---------------------------------------------------------------

def cmd_generate(spec_path, out, seed=None) -> tuple[Path, Path]:
    raw = read_json(spec_path)
    if seed is not None:
        raw["seed"] = seed
    try:
        spec = GenSpec.from_dict(raw)
    except TypeError as exc:
        raise SpecError(str(exc)) from None
    Y, truth = generate(spec)
    return save_dataset(out, Y, truth)


# -- run --------------------------------------------------------------------

def cmd_run(dataset, method, out=None, spec_path=None, t_hat=None, t_bar=None, seed=None) -> dict:
    Y, header, truth = load_dataset(dataset)
    opts = MethodOptions.from_dict(read_json(spec_path) if spec_path else {})
    if t_hat is not None:
        opts.t_hat = t_hat
    if t_bar is not None:
        opts.t_bar = t_bar
    d = opts.d or header["d"]
    seed = header["seed"] if seed is None else seed
    gen = truth.spec if truth is not None else None
    spec_fields = {
        "lambda": header["lambda"],
        "sigma": gen.sigma if gen else None,
        "mag": gen.mag if gen else None,
        "n": header["n"],
        "m": header["m"],
        "d": d,
    }
    outcome = evaluate(Y, truth, method, d, opts, seed)
    row = result_row(0, method, spec_fields, 0, seed, outcome)
    write_csv(out, RESULT_FIELDS, [row], append=True)
    return row


# -- sweep ------------------------------------------------------------------

EXPERIMENT_KEYS = {
    "lambdas", "sigmas", "mags", "ns", "ms", "ds", "methods", "trials", "base_seed",
    "output", "paired_nm", "outlier_lines", "signal_marginal", "workers",
} | set(MethodOptions.__dataclass_fields__) - {"d"}


@dataclass
class ExperimentSpec:
    lambdas: list
    sigmas: list
    mags: list
    ns: list
    ms: list
    ds: list
    methods: list
    trials: int = 20
    base_seed: int = 0
    output: str | None = None
    paired_nm: bool = False  # zip ns with ms instead of taking their product
    outlier_lines: int | None = None
    signal_marginal: str = "gaussian"
    workers: int = 1
    options: MethodOptions = field(default_factory=MethodOptions)

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentSpec:
        unknown = set(raw) - EXPERIMENT_KEYS
        if unknown:
            raise SpecError(f"unknown experiment fields: {sorted(unknown)}")
        raw = dict(raw)
        opt_keys = set(MethodOptions.__dataclass_fields__) - {"d"}
        options = MethodOptions.from_dict({k: raw.pop(k) for k in list(raw) if k in opt_keys})
        missing = {"lambdas", "sigmas", "mags", "ns", "methods"} - set(raw)
        if missing:
            raise SpecError(f"missing experiment fields: {sorted(missing)}")
        raw.setdefault("ms", raw["ns"])
        raw.setdefault("ds", [1])
        spec = cls(options=options, **raw)
        spec.validate()
        return spec

    def cells(self) -> list[GenSpec]:
        nm = list(zip(self.ns, self.ms)) if self.paired_nm else list(itertools.product(self.ns, self.ms))
        out = []
        for lam, sigma, mag, (n, m), d in itertools.product(self.lambdas, self.sigmas, self.mags, nm, self.ds):
            out.append(GenSpec(n=int(n), m=int(m), d=int(d), lam=float(lam), sigma=float(sigma),
                               mag=float(mag), outlier_lines=self.outlier_lines,
                               signal_marginal=self.signal_marginal))
        return out

    def validate(self) -> None:
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if self.paired_nm and len(self.ns) != len(self.ms):
            raise SpecError("paired_nm needs ns and ms of equal length")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise SpecError(f"unknown methods {bad}; choose from {METHODS}")
        try:
            cells = self.cells()
        except ValueError as exc:
            raise SpecError(f"invalid cell: {exc}") from None
        if not cells:
            raise SpecError("experiment has no cells")


def _trial_job(args) -> list[dict]:
    cell_id, trial, gen, methods, opts, base_seed = args
    seed = trial_seed(base_seed, cell_id, trial)
    gen = replace(gen, seed=seed)
    Y, truth = generate(gen)
    spec_fields = {"lambda": gen.lam, "sigma": gen.sigma, "mag": gen.mag,
                   "n": gen.n, "m": gen.m, "d": gen.d}
    rows = []
    for method in methods:
        outcome = evaluate(Y, truth, method, gen.d, opts, seed)
        rows.append(result_row(cell_id, method, spec_fields, trial, seed, outcome))
    return rows


def summary_path(out) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".summary" + (p.suffix or ".csv"))


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((int(r["cell_id"]), r["method"]), []).append(r)
    order = {m: i for i, m in enumerate(METHODS)}
    out = []
    for (cell, method), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        evs = [float(r["ev"]) for r in rs if r["status"] == "ok" and r["ev"] != NA]
        first = rs[0]
        out.append({
            **{k: first[k] for k in ("cell_id", "method", "lambda", "sigma", "mag", "n", "m", "d")},
            "mean_ev": fmt(float(np.mean(evs))) if evs else NA,
            "std_ev": fmt(float(np.std(evs))) if evs else NA,
            "trials": str(len(evs)),
            "failures": str(len(rs) - len(evs)),
        })
    return out


def cmd_sweep(spec_path, out=None, seed=None) -> tuple[list[dict], list[dict]]:
    spec = ExperimentSpec.from_dict(read_json(spec_path))
    if seed is not None:
        spec.base_seed = seed
    out = out or spec.output
    jobs = [
        (cell_id, trial, gen, list(spec.methods), spec.options, spec.base_seed)
        for cell_id, gen in enumerate(spec.cells())
        for trial in range(spec.trials)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches = list(pool.map(_trial_job, jobs))
    else:
        batches = [_trial_job(j) for j in jobs]
    order = {m: i for i, m in enumerate(METHODS)}
    rows = sorted(
        (r for b in batches for r in b),
        key=lambda r: (int(r["cell_id"]), order[r["method"]], int(r["trial"])),
    )
    summary = summarize(rows)
    write_csv(out, RESULT_FIELDS, rows)
    if out is not None and str(out) != "-":
        write_csv(summary_path(out), SUMMARY_FIELDS, summary)
    return rows, summary


# -- bound ------------------------------------------------------------------

def _tail_model(entry) -> tuple[str, TailModel]:
    if isinstance(entry, str):
        return entry, TailModel.from_name(entry)
    if isinstance(entry, dict) and entry.get("kind") == "empirical":
        if "samples" in entry:
            samples = entry["samples"]
        elif "samples_file" in entry:
            samples = np.loadtxt(entry["samples_file"])
        else:
            raise SpecError("empirical model needs 'samples' or 'samples_file'")
        return entry.get("name", "empirical"), TailModel.empirical(samples)
    raise SpecError(f"bad tail model entry {entry!r}")


def cmd_bound(spec_path=None, out=None) -> list[dict]:
    raw = read_json(spec_path) if spec_path else {}
    unknown = set(raw) - {"models", "t_hat_ratio", "lambdas", "kappa_points"}
    if unknown:
        raise SpecError(f"unknown bound fields: {sorted(unknown)}")
    models = raw.get("models", ["gaussian", "uniform"])
    ratio = float(raw.get("t_hat_ratio", 1.0))
    lambdas = raw.get("lambdas", [round(0.05 * i, 2) for i in range(10)])
    grid = None
    if "kappa_points" in raw:
        grid = tuple(np.logspace(-4, 4, int(raw["kappa_points"])))
    rows = []
    for entry in models:
        name, model = _tail_model(entry)
        for lam, b in bound_curve(model, lambdas, ratio, grid):
            rows.append({"lambda": fmt(lam), "bound": fmt(b), "model": name, "t_hat_ratio": fmt(ratio)})
    write_csv(out, BOUND_FIELDS, rows)
    return rows


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrpca", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a synthetic contaminated data set")
    g.add_argument("--spec", required=True, help="generator JSON")
    g.add_argument("--out", required=True, help="data file; truth goes to <out>.truth.json")
    g.add_argument("--seed", type=int)

    r = sub.add_parser("run", help="run one method on a data file, append a CSV row")
    r.add_argument("dataset")
    r.add_argument("--method", required=True, choices=METHODS)
    r.add_argument("--spec", help="method options JSON")
    r.add_argument("--out", help="results CSV (appended); stdout when omitted")
    r.add_argument("--t-hat", dest="t_hat", type=int)
    r.add_argument("--t-bar", dest="t_bar", type=int)
    r.add_argument("--seed", type=int)

    s = sub.add_parser("sweep", help="Monte-Carlo sweep over an experiment grid")
    s.add_argument("--spec", required=True, help="experiment JSON")
    s.add_argument("--out", help="per-trial CSV (overrides the experiment's output field)")
    s.add_argument("--seed", type=int, help="overrides base_seed")

    b = sub.add_parser("bound", help="asymptotic lower-bound curves")
    b.add_argument("--spec", help="bound JSON (models, t_hat_ratio, lambdas)")
    b.add_argument("--out", help="CSV path; stdout when omitted")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cmd_generate(args.spec, args.out, args.seed)
        elif args.command == "run":
            cmd_run(args.dataset, args.method, args.out, args.spec, args.t_hat, args.t_bar, args.seed)
        elif args.command == "sweep":
            cmd_sweep(args.spec, args.out, args.seed)
        else:
            cmd_bound(args.spec, args.out)
    except (SpecError, ValueError, OSError) as exc:
        print(f"hrpca {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
