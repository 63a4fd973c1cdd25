"""Shared replicate studies and the acceptance summary printer.

The simulation studies are expensive, so each is computed once per session
and reused by every test that needs it.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pytest

from garchvb.evaluation import accuracy
from garchvb.mcmc import McmcConfig, rwmh
from garchvb.params import GarchParams, InnovationKind, constrained_array, param_names
from garchvb.sequential import UpdateSchedule, run_sequential
from garchvb.simulate import SimConfig, simulate_garch, spawn_seeds
from garchvb.variational import Method, OptimizerConfig, fit_svb

MCMC_ITERS = 50_000
Q_DRAWS = 10_000
T_LEN = 1000
BATCH_METHODS = {"cv": (Method.CV, 10), "rt": (Method.RT, 5), "mfcv": (Method.MEAN_FIELD_CV, 10)}
UPDATE_COUNTS = (1, 2, 5, 10)

_RESULTS = pytest.StashKey[Dict[int, tuple]]()


def state_accuracy(state, kind, reference, seed):
    """Per-parameter accuracy of a variational state against oracle draws."""
    q = constrained_array(state.sample(Q_DRAWS, np.random.default_rng(seed)), kind)
    return np.array([accuracy(q[:, j], reference[:, j]) for j in range(kind.dim)])


@dataclass
class BatchStudy:
    kind: InnovationKind
    accuracy: Dict[str, np.ndarray] = field(default_factory=dict)   # (replicates, d)
    elbo: Dict[str, np.ndarray] = field(default_factory=dict)
    seconds: Dict[str, np.ndarray] = field(default_factory=dict)
    mcmc_seconds: np.ndarray = None
    inside_95: Dict[str, np.ndarray] = field(default_factory=dict)


def run_batch_study(kind, params, n_rep, master_seed, methods):
    kind = InnovationKind.parse(kind)
    acc = {m: [] for m in methods}
    elbo = {m: [] for m in methods}
    secs = {m: [] for m in methods}
    inside = {m: [] for m in methods}
    mcmc_secs = []
    for rep_seed in spawn_seeds(master_seed, n_rep):
        seeds = spawn_seeds(rep_seed, 2 + 2 * len(methods))
        y = simulate_garch(SimConfig(params, kind, T_LEN, seeds[0])).values
        t0 = time.perf_counter()
        oracle = rwmh(y, kind, McmcConfig(MCMC_ITERS, seed=seeds[1]))
        mcmc_secs.append(time.perf_counter() - t0)
        lo, hi = np.percentile(oracle.samples, [2.5, 97.5], axis=0)
        for j, name in enumerate(methods):
            method, n_samples = BATCH_METHODS[name]
            res = fit_svb(y, kind, method, OptimizerConfig(n_samples=n_samples,
                                                           seed=seeds[2 + 2 * j]))
            acc[name].append(state_accuracy(res.state, kind, oracle.samples, seeds[3 + 2 * j]))
            elbo[name].append(res.final_elbo())
            secs[name].append(res.wall_time)
            mean = constrained_array(res.state.sample(Q_DRAWS, np.random.default_rng(
                seeds[3 + 2 * j])), kind).mean(axis=0)
            inside[name].append((mean >= lo) & (mean <= hi))
    study = BatchStudy(kind)
    for m in methods:
        study.accuracy[m] = np.array(acc[m])
        study.elbo[m] = np.array(elbo[m])
        study.seconds[m] = np.array(secs[m])
        study.inside_95[m] = np.array(inside[m])
    study.mcmc_seconds = np.array(mcmc_secs)
    return study


@pytest.fixture(scope="session")
def gaussian_study():
    """20 Gaussian replicates at (0.1, 0.2, 0.75) with CV, RT and mean-field fits."""
    return run_batch_study("gaussian", GarchParams(0.1, 0.2, 0.75), 20, 20240101,
                           ["cv", "rt", "mfcv"])


@pytest.fixture(scope="session")
def heavy_tail_studies():
    """10 Student-t and 10 skew-t replicates with nu=4 and xi=0.8."""
    return {
        "t": run_batch_study("t", GarchParams(0.1, 0.2, 0.75, 4.0), 10, 20240202, ["cv", "rt"]),
        "skewt": run_batch_study("skewt", GarchParams(0.1, 0.2, 0.75, 4.0, 0.8), 10, 20240303,
                                 ["cv", "rt"]),
    }


@dataclass
class SequentialStudy:
    names: tuple
    # accuracy[mode][c] -> (series, d)
    accuracy: Dict[str, Dict[int, np.ndarray]]
    cold_batch: np.ndarray
    update_seconds: Dict[str, Dict[int, List[float]]]


@pytest.fixture(scope="session")
def sequential_study():
    """5 skew-t series, T=1000, initial window 600, c in {1, 2, 5, 10} for both updaters.

    Also times a single update after initial windows of 500 and 950.
    """
    kind = InnovationKind.SKEW_T
    params = GarchParams(0.1, 0.2, 0.75, 4.0, 0.8)
    acc = {mode: {c: [] for c in UPDATE_COUNTS} for mode in ("uvb", "seqsvb")}
    cold = []
    timing = {mode: {500: [], 950: []} for mode in ("uvb", "seqsvb")}
    for series_seed in spawn_seeds(20240404, 5):
        seeds = iter(spawn_seeds(series_seed, 64))
        y = simulate_garch(SimConfig(params, kind, T_LEN, next(seeds))).values
        oracle = rwmh(y, kind, McmcConfig(MCMC_ITERS, seed=next(seeds))).samples
        cfg = lambda: OptimizerConfig(n_samples=5, seed=next(seeds))
        initial = fit_svb(y[:600], kind, Method.RT, cfg())
        for mode in ("uvb", "seqsvb"):
            for c in UPDATE_COUNTS:
                res = run_sequential(y, kind, mode, UpdateSchedule(600, c, T_LEN), cfg(),
                                     initial=initial)
                acc[mode][c].append(state_accuracy(res.final_state, kind, oracle, next(seeds)))
        batch = fit_svb(y, kind, Method.RT, cfg())
        cold.append(state_accuracy(batch.state, kind, oracle, next(seeds)))
        for t_n in (500, 950):
            start = fit_svb(y[:t_n], kind, Method.RT, cfg())
            for mode in ("uvb", "seqsvb"):
                res = run_sequential(y, kind, mode, UpdateSchedule(t_n, 1, T_LEN), cfg(),
                                     initial=start)
                timing[mode][t_n].append(res.wall_times[0])
    return SequentialStudy(
        param_names(kind),
        {m: {c: np.array(v) for c, v in d.items()} for m, d in acc.items()},
        np.array(cold),
        timing,
    )


@pytest.fixture
def criterion(request):
    """Record the outcome of a numbered acceptance criterion for the summary."""

    def record(number, title, passed, detail=""):
        results = request.config.stash.setdefault(_RESULTS, {})
        results[number] = (title, bool(passed), detail)
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
        print(line + (f" [{detail}]" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
