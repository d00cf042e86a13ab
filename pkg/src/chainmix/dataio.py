"""File formats: trajectory text files, label sidecars, JSON parameter and
posterior documents, CSV diagnostics.

Trajectory files hold one trajectory per line, whitespace- or
comma-separated integer states, with an optional header line `# s=<int>`
declaring the state count.  States are 0-based by default; pass
one_based=True to convert on read/write.  Ground-truth labels live in a
sidecar file with one integer per line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .clustering import SpectralModel
from .errors import ValidationError
from .model_core import MixtureParams, TrajectoryDataset
from .theory import KlReport
from .vem import DirichletPosterior


def read_trajectories(path, one_based: bool = False) -> TrajectoryDataset:
    """Parse a trajectory file; infers s from the data unless a header declares it."""
    declared_s = None
    rows = []
    offset = 1 if one_based else 0
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if body.startswith("s="):
                    declared_s = int(body[2:].strip())
                continue
            try:
                states = [int(tok) - offset for tok in text.replace(",", " ").split()]
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            if not states:
                raise ValidationError(f"{path}:{lineno}: empty trajectory")
            rows.append(np.asarray(states, dtype=np.int64))
    if not rows:
        raise ValidationError(f"{path}: no trajectories found")
    s = declared_s if declared_s is not None else int(max(r.max() for r in rows)) + 1
    return TrajectoryDataset(tuple(rows), s=s)


def write_trajectories(path, data: TrajectoryDataset, one_based: bool = False):
    offset = 1 if one_based else 0
    with open(path, "w") as handle:
        handle.write(f"# s={data.s}\n")
        for traj in data.trajectories:
            handle.write(" ".join(str(int(v) + offset) for v in traj) + "\n")


def read_labels(path, one_based: bool = False) -> np.ndarray:
    offset = 1 if one_based else 0
    labels = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                labels.append(int(text) - offset)
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not labels:
        raise ValidationError(f"{path}: no labels found")
    return np.asarray(labels, dtype=np.int64)


def write_labels(path, labels, one_based: bool = False):
    offset = 1 if one_based else 0
    with open(path, "w") as handle:
        for value in labels:
            handle.write(f"{int(value) + offset}\n")


def read_params(path) -> MixtureParams:
    with open(path) as handle:
        payload = json.load(handle)
    for key in ("k", "s", "mu", "nu", "P"):
        if key not in payload:
            raise ValidationError(f"{path}: missing field {key!r}")
    params = MixtureParams(
        mu=np.asarray(payload["mu"], dtype=np.float64),
        nu=np.asarray(payload["nu"], dtype=np.float64),
        P=np.asarray(payload["P"], dtype=np.float64),
    )
    if params.k != payload["k"] or params.s != payload["s"]:
        raise ValidationError(f"{path}: declared k/s disagree with array shapes")
    return params


def write_params(path, params: MixtureParams):
    payload = {
        "k": params.k,
        "s": params.s,
        "mu": params.mu.tolist(),
        "nu": params.nu.tolist(),
        "P": params.P.tolist(),
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def write_posterior(path, posterior: DirichletPosterior, elbo_trace):
    payload = {
        "N_hat": posterior.n_hat.tolist(),
        "N_i_hat": posterior.n_i_hat.tolist(),
        "N_ialpha_hat": posterior.n_ialpha_hat.tolist(),
        "responsibilities": posterior.responsibilities.gamma.tolist(),
        "elbo_trace": np.asarray(elbo_trace).tolist(),
    }
    with open(path, "w") as handle:
        json.dump(payload, handle)
        handle.write("\n")


def read_posterior(path):
    """Returns (DirichletPosterior, elbo_trace array)."""
    from .model_core import Responsibilities

    with open(path) as handle:
        payload = json.load(handle)
    posterior = DirichletPosterior(
        n_hat=np.asarray(payload["N_hat"], dtype=np.float64),
        n_i_hat=np.asarray(payload["N_i_hat"], dtype=np.float64),
        n_ialpha_hat=np.asarray(payload["N_ialpha_hat"], dtype=np.float64),
        responsibilities=Responsibilities(np.asarray(payload["responsibilities"])),
    )
    return posterior, np.asarray(payload["elbo_trace"], dtype=np.float64)


def write_restart_csv(path, report):
    """Per-restart diagnostics: index, seed, final objective, iterations, accuracy."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["restart", "seed", "final_objective", "iterations", "accuracy"])
        for r in range(len(report.seeds)):
            acc = ""
            if report.all_accuracies is not None and np.isfinite(report.all_accuracies[r]):
                acc = f"{report.all_accuracies[r]:.6f}"
            obj = report.all_objectives[r]
            writer.writerow([
                r,
                report.seeds[r],
                "" if np.isnan(obj) else repr(float(obj)),
                int(report.all_iterations[r]),
                acc,
            ])


def write_confusion_csv(path, matrix):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["true\\est"] + [str(c) for c in matrix.col_labels])
        for i, row_label in enumerate(matrix.row_labels):
            writer.writerow([str(row_label)] + [int(v) for v in matrix.counts[i]])


def _json_safe(value):
    """Map infinities to the string 'inf' so documents stay standard JSON."""
    if isinstance(value, float) and not np.isfinite(value):
        return "inf" if value > 0 else "-inf"
    return value


def write_kl_report(path, report: KlReport):
    payload = {
        "horizon": report.horizon,
        "pairwise": [[_json_safe(float(v)) for v in row] for row in report.pairwise],
        "rates": [[_json_safe(float(v)) for v in row] for row in report.rates],
        "bound": float(report.bound),
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def read_points_csv(path) -> np.ndarray:
    """Read real-valued point vectors, one per line, comma- or space-separated."""
    rows = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in text.replace(",", " ").split()])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: no points found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: inconsistent point dimensions {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def write_points_csv(path, points):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row in np.asarray(points, dtype=np.float64):
            writer.writerow([repr(float(v)) for v in row])


def write_assignments_csv(path, assignments):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "cluster"])
        for i, c in enumerate(assignments):
            writer.writerow([i, int(c)])


def write_spectral_model(path, model: SpectralModel):
    with open(path, "w") as handle:
        json.dump(model.to_dict(), handle)
        handle.write("\n")


def read_spectral_model(path) -> SpectralModel:
    with open(path) as handle:
        return SpectralModel.from_dict(json.load(handle))


def write_misa_csv(path, trajectory):
    """Per-sample rows: time, protein counts, and gene condition codes like '10'."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "a", "b", "gene_a", "gene_b"])
        for idx in range(trajectory.times.size):
            ga = trajectory.gene_a[idx]
            gb = trajectory.gene_b[idx]
            writer.writerow([
                f"{trajectory.times[idx]:g}",
                int(trajectory.a[idx]),
                int(trajectory.b[idx]),
                f"{ga[0]}{ga[1]}",
                f"{gb[0]}{gb[1]}",
            ])


def write_table(path, header, rows, fmt: str = "csv"):
    """Write a result table as CSV or as a JSON list of row objects."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_json_safe(v) for v in row])
    elif fmt == "json":
        payload = [dict(zip(header, [_json_safe(v) for v in row])) for row in rows]
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    else:
        raise ValidationError(f"unknown table format {fmt!r}")
