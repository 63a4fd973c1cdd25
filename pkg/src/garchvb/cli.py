"""Command-line interface: ``garchvb <command> [options]``.

Every command writes its primary output plus ``<output>.manifest.json``
recording the resolved configuration, the seed and library versions.
``garchvb rerun <manifest>`` replays a run and checks that the numeric
outputs are bit-identical.

Options may also come from a JSON file given with ``--config``; keys are
option names (``max_iters`` or ``max-iters``) and explicit flags win.
The default output directory is ``$GARCHVB_OUTPUT_DIR`` (else the current
directory).
"""

import argparse
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .data import load_returns, write_returns
from .evaluation import accuracy, aic_bic, kde
from .exceptions import DimensionMismatch, GarchVBError
from .mcmc import McmcConfig, diagnostics, mle, rwmh
from .params import GarchParams, InnovationKind, constrained_array, param_names
from .results import (SCHEMA_VERSION, fit_to_doc, numeric_digest, read_json, read_samples_csv,
                      state_from_doc, write_json, write_samples_csv, write_table)
from .sequential import SequentialMode, UpdateSchedule, run_sequential
from .simulate import SimConfig, simulate_garch, spawn_seeds
from .variational import FitResult, Method, OptimizerConfig, StopReason, fit_svb

__all__ = ["main", "run_command", "build_parser", "UsageError"]

OUTPUT_DIR_ENV = "GARCHVB_OUTPUT_DIR"
SIM_DEFAULTS = dict(omega=0.1, alpha=0.2, beta=0.75, nu=4.0, xi=0.8)
DEFAULT_SAMPLES = {Method.CV: 10, Method.MEAN_FIELD_CV: 10, Method.RT: 5}
SEQUENTIAL_METHODS = ("uvb", "seqsvb")


class UsageError(Exception):
    """Bad command-line usage; reported with the usage text and exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _csv_list(text):
    return [s.strip() for s in str(text).split(",") if s.strip()]


def _int_list(text):
    return [int(s) for s in _csv_list(text)]


# ---------------------------------------------------------------- helpers

def _default_out(name):
    return str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / name)


def _manifest_path(out):
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def _versions():
    import scipy
    import sklearn

    return {
        "garchvb": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


def _load(args):
    return load_returns(args.input, prices=args.prices,
                        scale_percent=not args.no_scale_percent).values


def _opt_config(args, n_samples, seed):
    return OptimizerConfig(beta1=args.beta1, beta2=args.beta2, eta0=args.eta0, tau=args.tau,
                           t_w=args.t_w, patience=args.patience, n_samples=n_samples,
                           max_iters=args.max_iters, seed=seed)


def _posterior_summary(state, kind, n_draws, seed):
    draws = constrained_array(state.sample(n_draws, np.random.default_rng(seed)), kind)
    names = param_names(kind)
    return (dict(zip(names, draws.mean(axis=0).tolist())),
            dict(zip(names, draws.std(axis=0, ddof=1).tolist())))


def _print_table(header, rows, stream=None):
    stream = stream or sys.stdout
    print("\t".join(header), file=stream)
    for row in rows:
        print("\t".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row), file=stream)


# ---------------------------------------------------------------- commands

def cmd_simulate(args):
    kind = InnovationKind.parse(args.model)
    p = GarchParams(args.omega, args.alpha, args.beta,
                    args.nu if kind.dim >= 4 else None, args.xi if kind.dim == 5 else None)
    series = simulate_garch(SimConfig(p, kind, args.length, args.seed))
    write_returns(args.out, series)
    return [args.out], {}


def cmd_fit(args):
    y = _load(args)
    kind = InnovationKind.parse(args.model)
    method = Method.parse(args.method)
    seed_opt, seed_draw = spawn_seeds(args.seed, 2)
    config = _opt_config(args, args.samples or DEFAULT_SAMPLES[method], seed_opt)
    init = state_from_doc(read_json(args.init)) if args.init else None
    res = fit_svb(y, kind, method, config, init=init)
    mean, sd = _posterior_summary(res.state, kind, args.draws, seed_draw)
    doc = fit_to_doc(res, seed=args.seed, n_obs=int(y.size), input=str(args.input),
                     posterior_mean=mean, posterior_sd=sd)
    write_json(args.out, doc)
    print(f"{method.value}: {res.iterations} iterations ({res.stopped_by.value}), "
          f"final ELBO {res.final_elbo():.3f}")
    return [args.out], {"wall_time": res.wall_time}


def cmd_mcmc(args):
    y = _load(args)
    kind = InnovationKind.parse(args.model)
    config = McmcConfig(args.iterations, args.burnin, args.scale, args.seed)
    t0 = time.perf_counter()
    post = rwmh(y, kind, config)
    wall = time.perf_counter() - t0
    write_samples_csv(args.out, post.names, post.samples)
    diag = diagnostics(post)
    summary = {
        "acceptance_rate": post.acceptance_rate,
        "proposal_fallback": post.proposal_fallback,
        "ess": dict(zip(post.names, diag.ess.tolist())),
        "posterior_mean": dict(zip(post.names, post.samples.mean(axis=0).tolist())),
        "wall_time": wall,
    }
    print(f"acceptance rate {post.acceptance_rate:.3f}, {post.samples.shape[0]} draws kept")
    return [args.out], summary


def _q_draws(args):
    if bool(args.posterior) == bool(args.q_samples):
        raise UsageError("give exactly one of --posterior or --q-samples")
    if args.posterior:
        doc = read_json(args.posterior)
        kind = InnovationKind.parse(doc["model"])
        state = state_from_doc(doc)
        rng = np.random.default_rng(args.seed)
        return list(param_names(kind)), constrained_array(state.sample(args.draws, rng), kind)
    return read_samples_csv(args.q_samples)


def cmd_accuracy(args):
    q_names, q = _q_draws(args)
    p_names, p = read_samples_csv(args.reference)
    if q_names != p_names:
        raise DimensionMismatch(f"parameter sets differ: {q_names} vs {p_names}")
    rows = [(name, accuracy(q[:, j], p[:, j], args.grid_size)) for j, name in enumerate(q_names)]
    write_table(args.out, ["parameter", "accuracy"], rows)
    _print_table(["parameter", "accuracy"], rows)
    return [args.out], {}


def _fit_from_doc(doc):
    kind = InnovationKind.parse(doc["model"])
    return FitResult(state_from_doc(doc), np.asarray(doc.get("elbo_trace", [np.nan])),
                     int(doc.get("iterations", 0)), StopReason(doc.get("stopped_by", "patience")),
                     float(doc.get("wall_time", 0.0)), Method.parse(doc.get("method", "rt")), kind)


def _update_doc(res, window):
    return {
        "window": list(window),
        "state": res.state.to_dict(),
        "elbo_trace": np.asarray(res.elbo_trace).tolist(),
        "iterations": int(res.iterations),
        "stopped_by": res.stopped_by.value,
    }


def cmd_sequential(args):
    y = _load(args)
    kind = InnovationKind.parse(args.model)
    mode = SequentialMode.parse(args.mode)
    schedule = UpdateSchedule(args.initial, args.updates, args.total or y.size)
    seed_run, seed_draw = spawn_seeds(args.seed, 2)
    config = _opt_config(args, args.samples or 5, seed_run)
    initial = _fit_from_doc(read_json(args.init)) if args.init else None
    res = run_sequential(y, kind, mode, schedule, config, initial=initial)
    mean, sd = _posterior_summary(res.final_state, kind, args.draws, seed_draw)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "type": "sequential",
        "model": kind.value,
        "mode": mode.value,
        "seed": args.seed,
        "parameter_names": list(param_names(kind)),
        "schedule": {"initial": schedule.initial, "updates": schedule.updates,
                     "total": schedule.total},
        "initial": _update_doc(res.initial, (0, schedule.initial)),
        "updates": [_update_doc(u, w) for u, w in zip(res.updates, schedule.windows())],
        "final_state": res.final_state.to_dict(),
        "posterior_mean": mean,
        "posterior_sd": sd,
        "wall_times": res.wall_times,
    }
    write_json(args.out, doc)
    print(f"{mode.value}: {schedule.updates} updates, mean update time "
          f"{np.mean(res.wall_times):.3f}s")
    return [args.out], {"wall_times": res.wall_times}


def cmd_ic(args):
    header = ["model", "k", "T", "loglik", "aic", "bic"]
    rows = []
    if args.loglik is not None:
        if args.k is None or args.n_obs is None:
            raise UsageError("--loglik needs --k and --n-obs")
        aic, bic = aic_bic(args.loglik, args.k, args.n_obs)
        rows.append(("given", args.k, args.n_obs, args.loglik, aic, bic))
    else:
        if not args.input:
            raise UsageError("give --input, or --loglik with --k and --n-obs")
        y = _load(args)
        for name in args.models:
            kind = InnovationKind.parse(name)
            res = mle(y, kind)
            aic, bic = aic_bic(res.loglik, kind.dim, y.size)
            rows.append((kind.value, kind.dim, int(y.size), float(res.loglik), aic, bic))
    write_table(args.out, header, rows)
    _print_table(header, rows)
    return [args.out], {}


def cmd_density_grid(args):
    q_names, q = _q_draws(args) if (args.posterior or args.q_samples) else (None, None)
    if q_names is None:
        raise UsageError("give --posterior or --q-samples")
    if args.column not in q_names:
        raise UsageError(f"unknown --column {args.column!r}; choose from {q_names}")
    grid = kde(q[:, q_names.index(args.column)], args.grid_size)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    grid.to_csv(args.out)
    return [args.out], {}


def _replicate_one(task):
    """One replicate: simulate, run the oracle, then every (method, S) cell."""
    rep, seed, args = task
    kind = InnovationKind.parse(args["model"])
    cells = [(m, s) for m in args["methods"] for s in args["samples_grid"][m]]
    seeds = spawn_seeds(seed, 2 + 2 * len(cells))
    p = GarchParams(args["omega"], args["alpha"], args["beta"],
                    args["nu"] if kind.dim >= 4 else None, args["xi"] if kind.dim == 5 else None)
    y = simulate_garch(SimConfig(p, kind, args["length"], seeds[0])).values
    t0 = time.perf_counter()
    post = rwmh(y, kind, McmcConfig(args["mcmc_iterations"], seed=seeds[1]))
    records = [("mcmc", args["mcmc_iterations"], "all", np.nan, time.perf_counter() - t0)]
    names = param_names(kind)
    for j, (m, s) in enumerate(cells):
        base = dict(args["optimizer"], n_samples=s, seed=seeds[2 + 2 * j])
        config = OptimizerConfig(**base)
        if m in SEQUENTIAL_METHODS:
            schedule = UpdateSchedule(args["initial"], args["updates"], y.size)
            res = run_sequential(y, kind, m, schedule, config)
            state, seconds = res.final_state, float(np.mean(res.wall_times))
        else:
            res = fit_svb(y, kind, m, config)
            state, seconds = res.state, res.wall_time
        rng = np.random.default_rng(seeds[3 + 2 * j])
        q = constrained_array(state.sample(args["draws"], rng), kind)
        for k, name in enumerate(names):
            records.append((m, s, name, accuracy(q[:, k], post.samples[:, k]), seconds))
    return rep, records


def cmd_replicate(args):
    kind = InnovationKind.parse(args.model)
    methods = []
    for m in args.methods:
        methods.append(m.lower() if m.lower() in SEQUENTIAL_METHODS else Method.parse(m).value)
    samples_grid = {m: args.samples or [DEFAULT_SAMPLES.get(Method.parse(m), 5)
                                        if m not in SEQUENTIAL_METHODS else 5] for m in methods}
    if any(m in SEQUENTIAL_METHODS for m in methods) and args.initial is None:
        raise UsageError("sequential methods need --initial")
    shared = {
        "model": kind.value, "methods": methods, "samples_grid": samples_grid,
        "length": args.length, "mcmc_iterations": args.mcmc_iterations, "draws": args.draws,
        "initial": args.initial, "updates": args.updates,
        "omega": args.omega, "alpha": args.alpha, "beta": args.beta, "nu": args.nu,
        "xi": args.xi,
        "optimizer": dict(beta1=args.beta1, beta2=args.beta2, eta0=args.eta0, tau=args.tau,
                          t_w=args.t_w, patience=args.patience, max_iters=args.max_iters),
    }
    tasks = [(r, s, shared) for r, s in enumerate(spawn_seeds(args.seed, args.replicates))]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_replicate_one, tasks))
    else:
        results = [_replicate_one(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    groups = {}
    for _, records in results:
        for m, s, name, acc, sec in records:
            groups.setdefault((m, s, name), []).append((acc, sec))
    header = ["method", "S", "parameter", "mean_accuracy", "mean_seconds"]
    rows = []
    for (m, s, name), vals in groups.items():
        acc = np.array([v[0] for v in vals])
        rows.append((m, s, name, float(np.mean(acc)) if np.all(np.isfinite(acc)) else np.nan,
                     float(np.mean([v[1] for v in vals]))))
    write_table(args.out, header, rows)
    _print_table(header, rows)
    return [args.out], {}


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "mcmc": cmd_mcmc,
    "accuracy": cmd_accuracy,
    "sequential": cmd_sequential,
    "ic": cmd_ic,
    "density-grid": cmd_density_grid,
    "replicate": cmd_replicate,
}

DEFAULT_OUT = {
    "simulate": "returns.csv",
    "fit": "posterior.json",
    "mcmc": "mcmc_samples.csv",
    "accuracy": "accuracy.csv",
    "sequential": "sequential.json",
    "ic": "ic.csv",
    "density-grid": "density.csv",
    "replicate": "replicate.csv",
}


# ---------------------------------------------------------------- parser

def _add_common(p, model_default="gaussian"):
    p.add_argument("--seed", type=int, default=None,
                   help="master seed; drawn from entropy and recorded when omitted")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--config", default=None, help="JSON file of option values")
    p.add_argument("--model", default=model_default, choices=["gaussian", "t", "skewt"])


def _add_input(p, required=True):
    p.add_argument("--input", required=required, help="CSV with one column of returns or prices")
    p.add_argument("--prices", action="store_true", help="input holds prices")
    p.add_argument("--no-scale-percent", action="store_true",
                   help="keep price log-differences unscaled")


def _add_optimizer(p, samples_type=int):
    p.add_argument("--samples", type=samples_type, default=None,
                   help="Monte Carlo draws per iteration")
    p.add_argument("--eta0", type=float, default=0.02)
    p.add_argument("--tau", type=float, default=1000.0)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.9)
    p.add_argument("--t-w", type=int, default=25, help="stopping-rule window")
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--max-iters", type=int, default=10_000)


def _add_sim_params(p):
    for name, value in SIM_DEFAULTS.items():
        p.add_argument(f"--{name}", type=float, default=value)


def _add_q_source(p):
    p.add_argument("--posterior", default=None, help="fit or sequential document")
    p.add_argument("--q-samples", default=None, help="CSV of draws with a header row")
    p.add_argument("--draws", type=int, default=10_000)


def build_parser():
    parser = _Parser(prog="garchvb", description="Bayesian GARCH(1,1) inference.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    subs = {}

    p = subs["simulate"] = sub.add_parser("simulate", help="simulate a GARCH(1,1) series")
    _add_common(p)
    p.add_argument("--length", type=int, default=1000)
    _add_sim_params(p)

    p = subs["fit"] = sub.add_parser("fit", help="batch stochastic variational Bayes")
    _add_common(p)
    _add_input(p)
    p.add_argument("--method", default="rt", choices=["cv", "rt", "mfcv"])
    _add_optimizer(p)
    p.add_argument("--init", default=None, help="document to warm-start from")
    p.add_argument("--draws", type=int, default=10_000,
                   help="draws used for the posterior summary")

    p = subs["mcmc"] = sub.add_parser("mcmc", help="random-walk Metropolis-Hastings")
    _add_common(p)
    _add_input(p)
    p.add_argument("--iterations", type=int, default=50_000)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--scale", type=float, default=None, help="proposal scale")

    p = subs["accuracy"] = sub.add_parser("accuracy", help="accuracy against MCMC draws")
    _add_common(p)
    _add_q_source(p)
    p.add_argument("--reference", required=True, help="MCMC samples CSV")
    p.add_argument("--grid-size", type=int, default=512)

    p = subs["sequential"] = sub.add_parser("sequential", help="UVB or Seq-SVB updating")
    _add_common(p, model_default="skewt")
    _add_input(p)
    p.add_argument("--mode", default="uvb", choices=["uvb", "seqsvb"])
    p.add_argument("--initial", type=int, required=True, help="observations in the batch fit")
    p.add_argument("--updates", type=int, default=1, help="number of update blocks")
    p.add_argument("--total", type=int, default=None, help="observations used overall")
    _add_optimizer(p)
    p.add_argument("--init", default=None, help="fit document for the initial window")
    p.add_argument("--draws", type=int, default=10_000)

    p = subs["ic"] = sub.add_parser("ic", help="AIC and BIC at the maximum likelihood")
    _add_common(p)
    _add_input(p, required=False)
    p.add_argument("--models", type=_csv_list, default=["gaussian", "t", "skewt"])
    p.add_argument("--loglik", type=float, default=None, help="maximized log-likelihood")
    p.add_argument("--k", type=int, default=None, help="number of parameters")
    p.add_argument("--n-obs", type=int, default=None, help="number of observations")

    p = subs["density-grid"] = sub.add_parser("density-grid", help="KDE on a grid as CSV")
    _add_common(p)
    _add_q_source(p)
    p.add_argument("--column", required=True, help="parameter name")
    p.add_argument("--grid-size", type=int, default=512)

    p = subs["replicate"] = sub.add_parser("replicate", help="replicated accuracy study")
    _add_common(p)
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--length", type=int, default=1000)
    _add_sim_params(p)
    p.add_argument("--methods", type=_csv_list, default=["cv", "rt", "mfcv"])
    _add_optimizer(p, samples_type=_int_list)
    p.add_argument("--mcmc-iterations", type=int, default=50_000)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--initial", type=int, default=None, help="batch size for uvb/seqsvb")
    p.add_argument("--updates", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=None, help="write outputs here instead")
    return parser, subs


def _apply_config(subparser, path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    values = json.loads(p.read_text())
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    known = {a.dest for a in subparser._actions}
    cleaned = {}
    for key, value in values.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        cleaned[dest] = value
    subparser.set_defaults(**cleaned)


def parse_args(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage() + "garchvb: error: a command is required")
    if getattr(args, "config", None):
        _apply_config(subs[args.command], args.config)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- driver

def _resolve(args):
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint32)[0])
    if args.out is None:
        args.out = _default_out(DEFAULT_OUT[args.command])
    args.out = str(Path(args.out).resolve())
    for key in ("input", "init", "posterior", "q_samples", "reference"):
        if getattr(args, key, None):
            setattr(args, key, str(Path(getattr(args, key)).resolve()))
    return args


def _execute(args):
    outputs, summary = COMMANDS[args.command](args)
    config = {k: v for k, v in vars(args).items() if k != "config"}
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "seed": args.seed,
        "config": config,
        "versions": _versions(),
        "outputs": [{"path": str(Path(o).resolve()), "digest": numeric_digest(o)}
                    for o in outputs],
        "summary": summary,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    write_json(_manifest_path(args.out), manifest)
    return manifest


def _rerun(args):
    manifest = read_json(args.manifest)
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema {manifest.get('schema_version')!r}")
    ns = argparse.Namespace(**manifest["config"], config=None)
    if args.out_dir:
        ns.out = str(Path(args.out_dir) / Path(ns.out).name)
    fresh = _execute(ns)
    ok = True
    for old, new in zip(manifest["outputs"], fresh["outputs"]):
        same = old["digest"] == new["digest"]
        ok &= same
        print(f"{'identical' if same else 'DIFFERS'}: {new['path']}")
    return 0 if ok else 1


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        if args.command == "rerun":
            return _rerun(args)
        _execute(_resolve(args))
        return 0
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (GarchVBError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"garchvb: error: {exc}", file=sys.stderr)
        return 1


run_command = main

if __name__ == "__main__":
    sys.exit(main())
