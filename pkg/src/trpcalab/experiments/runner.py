"""Experiment runner: expands a config into trials, runs them and collects records."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import pandas as pd

from .config import ExperimentConfig
from .trials import MEASUREMENTS, TRIAL_FUNCTIONS, TrialTask

logger = logging.getLogger(__name__)

PARAMETER_COLUMNS = ["experiment", "seed", "trial", "n1", "n2", "n3", "r", "rho"]
# Excluded from the byte-identity contract of the CSV output.
TIMING_COLUMNS = ["runtime_s", "timestamp"]


def columns_for(kind: str) -> list[str]:
    """Fixed CSV column order for an experiment kind."""
    return PARAMETER_COLUMNS + MEASUREMENTS[kind] + TIMING_COLUMNS


def build_tasks(config: ExperimentConfig) -> list[TrialTask]:
    """Work units in (parameter point, trial) order."""
    return [
        TrialTask(
            kind=config.kind,
            seed=config.seed,
            point_index=index,
            trial=trial,
            n=n,
            n3=config.n3,
            r=r,
            rho=rho,
            tol=config.tol,
            max_iter=config.max_iter,
            success_tol=config.success_tol,
            j0=config.j0,
        )
        for index, (n, r, rho) in enumerate(config.points)
        for trial in range(config.trials)
    ]


def _execute(task: TrialTask) -> dict:
    started = time.perf_counter()
    measured = TRIAL_FUNCTIONS[task.kind](task)
    return {
        "experiment": task.kind,
        "seed": task.seed,
        "trial": task.trial,
        "n1": task.n,
        "n2": task.n,
        "n3": task.n3,
        "r": task.r,
        "rho": task.rho,
        **measured,
        "runtime_s": time.perf_counter() - started,
    }


def run_experiment(config: ExperimentConfig) -> pd.DataFrame:
    """Run every trial of the config and return one record per trial.

    Trials run in a process pool when config.workers > 1. Records come back
    in (parameter point, trial) order whatever the completion order.
    """
    tasks = build_tasks(config)
    timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    logger.info("Running %s: %d points x %d trials on %d worker(s)",
                config.kind, len(config.points), config.trials, config.workers)

    if config.workers == 1:
        records = [_execute(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))

    frame = pd.DataFrame.from_records(records)
    frame["timestamp"] = timestamp
    logger.info("Finished %s: %d records", config.kind, len(frame))
    return frame.reindex(columns=columns_for(config.kind))


def _grid(values) -> tuple:
    if isinstance(values, (list, tuple)):
        return tuple(values)
    return (values,)


def exp_sign_spectral(n, n3: int, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Spectral norm of Bernoulli sign tensors relative to sqrt(n n3)."""
    return run_experiment(ExperimentConfig(kind="sign", n=_grid(n), n3=n3, r=(0,), rho=_grid(rho),
                                           trials=trials, seed=seed, **options))


def exp_pt_concentration(n, n3: int, r, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Deviation ||P_T - rho^-1 P_T P_Omega P_T|| over a rho grid."""
    return run_experiment(ExperimentConfig(kind="pt", n=_grid(n), n3=n3, r=_grid(r), rho=_grid(rho),
                                           trials=trials, seed=seed, **options))


def exp_pt_omega_norm(n, n3: int, r, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Excess ||P_Omega P_T||^2 - rho."""
    return run_experiment(ExperimentConfig(kind="ptomega", n=_grid(n), n3=n3, r=_grid(r),
                                           rho=_grid(rho), trials=trials, seed=seed, **options))


def exp_infty_contraction(n, n3: int, r, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Entrywise contraction of Z - rho^-1 P_T P_Omega Z for Z in T."""
    return run_experiment(ExperimentConfig(kind="infty", n=_grid(n), n3=n3, r=_grid(r),
                                           rho=_grid(rho), trials=trials, seed=seed, **options))


def exp_spectral_deviation(n, n3: int, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Empirical sqrt(C0) of the spectral deviation bound."""
    return run_experiment(ExperimentConfig(kind="dev", n=_grid(n), n3=n3, r=(0,), rho=_grid(rho),
                                           trials=trials, seed=seed, **options))


def exp_certificate(n, n3: int, r, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Dual-certificate construction and verification on planted instances."""
    return run_experiment(ExperimentConfig(kind="certify", n=_grid(n), n3=n3, r=_grid(r),
                                           rho=_grid(rho), trials=trials, seed=seed, **options))


def exp_phase_grid(n, n3: int, r, rho, trials: int, seed: int = 0, **options) -> pd.DataFrame:
    """Exact-recovery success over a (rank, corruption) grid."""
    return run_experiment(ExperimentConfig(kind="phase", n=_grid(n), n3=n3, r=_grid(r),
                                           rho=_grid(rho), trials=trials, seed=seed, **options))
