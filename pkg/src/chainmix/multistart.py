"""Random initialization and multi-restart orchestration for EM / VEM fits.

Both fitting algorithms are nonconvex and sensitive to initialization, so
the standard remedy is many independent restarts from uniform random
responsibilities, keeping the run with the best final objective.  Restart
r draws its random stream from SeedSequence(master, spawn_key=(r,)), which
makes every restart reproducible on its own and the whole report
independent of worker scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .em import EmConfig, em_fit
from .errors import NumericalError, ValidationError
from .metrics import accuracy
from .model_core import FitResult, Responsibilities, SufficientStats, as_rng, uniform_simplex
from .vem import DirichletPosterior, VemConfig, vem_fit


def sample_simplex_rows(n: int, k: int, seed=None) -> Responsibilities:
    """Draw N rows independently and uniformly from the (k-1)-simplex.

    Each row normalizes k independent exponential variates, the standard
    construction of the flat simplex distribution.  Deterministic given seed.
    """
    if n < 1 or k < 1:
        raise ValidationError("n and k must be >= 1")
    return Responsibilities(uniform_simplex(as_rng(seed), n, k))


def restart_seed_sequence(master_entropy, index: int) -> np.random.SeedSequence:
    """The documented stream for restart `index` under a master seed."""
    return np.random.SeedSequence(master_entropy, spawn_key=(index,))


def _master_entropy(seed) -> int:
    """Reduce any accepted seed form to a master entropy integer."""
    if seed is None:
        return np.random.SeedSequence().entropy
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, np.uint64)[0])
    return int(seed)


@dataclass(frozen=True)
class MultistartReport:
    """Outcome of a batch of restarts.

    best/best_posterior hold the run maximizing the final objective (ties
    broken by lowest restart index); failed restarts record NaN objectives.
    """

    best: FitResult
    best_posterior: DirichletPosterior | None
    best_index: int
    all_objectives: np.ndarray
    all_iterations: np.ndarray
    all_accuracies: np.ndarray | None
    seeds: tuple
    master_seed: int
    failures: tuple


def _run_restart(index, master_entropy, stats, algorithm, config, true_labels):
    seq = restart_seed_sequence(master_entropy, index)
    k = config.k if algorithm == "em" else config.k_max
    init = sample_simplex_rows(stats.n, k, seq)
    if algorithm == "em":
        fit = em_fit(stats, init, max_iters=config.max_iters,
                     tol_scale=config.tol_scale)
        posterior = None
    else:
        fit, posterior = vem_fit(stats, init, config)
    acc = None
    if true_labels is not None:
        acc, _ = accuracy(true_labels, fit.labels)
    return fit, posterior, acc


def multistart_fit(stats: SufficientStats, algorithm: str, restarts: int,
                   config, seed=None, true_labels=None,
                   threads: int = 1) -> MultistartReport:
    """Fit with `restarts` independent initializations; keep the best run.

    algorithm is "em" (config: EmConfig) or "vem" (config: VemConfig).
    Per-restart seeds derive from the master seed by spawn index, so the
    report is identical for any thread count.  When `true_labels` is given,
    per-restart permutation-matched accuracies are recorded.

    Raises NumericalError if every restart fails numerically.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    if algorithm == "em":
        if not isinstance(config, EmConfig):
            raise ValidationError("algorithm 'em' requires an EmConfig")
    elif algorithm == "vem":
        if not isinstance(config, VemConfig):
            raise ValidationError("algorithm 'vem' requires a VemConfig")
    else:
        raise ValidationError(f"unknown algorithm {algorithm!r}")

    master_entropy = _master_entropy(seed)

    def job(r):
        try:
            return r, _run_restart(r, master_entropy, stats, algorithm, config,
                                   true_labels), None
        except NumericalError as exc:
            return r, None, exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(job, range(restarts)))
    else:
        raw = [job(r) for r in range(restarts)]
    raw.sort(key=lambda item: item[0])

    objectives = np.full(restarts, np.nan)
    iterations = np.zeros(restarts, dtype=np.int64)
    accuracies = np.full(restarts, np.nan) if true_labels is not None else None
    results = [None] * restarts
    failures = []
    for r, outcome, exc in raw:
        if exc is not None:
            failures.append((r, str(exc)))
            continue
        fit, posterior, acc = outcome
        results[r] = (fit, posterior)
        objectives[r] = fit.objective
        iterations[r] = fit.iterations
        if accuracies is not None and acc is not None:
            accuracies[r] = acc

    if len(failures) == restarts:
        detail = "; ".join(f"restart {r}: {msg}" for r, msg in failures)
        raise NumericalError(f"all {restarts} restarts failed: {detail}")

    best_index = -1
    best_value = -np.inf
    for r in range(restarts):
        if results[r] is not None and objectives[r] > best_value:
            best_value = objectives[r]
            best_index = r
    best_fit, best_posterior = results[best_index]

    seeds = tuple(
        int(restart_seed_sequence(master_entropy, r).generate_state(1)[0])
        for r in range(restarts)
    )
    return MultistartReport(
        best=best_fit,
        best_posterior=best_posterior,
        best_index=best_index,
        all_objectives=objectives,
        all_iterations=iterations,
        all_accuracies=accuracies,
        seeds=seeds,
        master_seed=master_entropy,
        failures=tuple(failures),
    )
