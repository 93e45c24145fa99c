"""End-to-end runs: simulate, perturb, image, normalize, emit, report."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..forward import EXCITATIONS, KINDS, DataMatrix, excitation_incidences, measure, solve_batch
from ..geometry import distance_to_curves
from ..imaging import SamplingGrid, image, normalize, required_data
from .config import ExperimentConfig
from .dataio import load_matrix, save_matrix
from .noise import NoiseSpec, add_noise
from .render import emit_grid

ARGMAX_TOLERANCE = 0.5


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: str
    passed: bool
    detail: str = ""


@dataclass
class RunReport:
    checks: list[CheckResult] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def to_json(self, timings: bool = False) -> str:
        """Stable JSON; timings are left out by default so reports are reproducible."""
        body = {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}
        if timings:
            body["timings"] = dict(self.timings)
        return json.dumps(body, indent=2, sort_keys=False) + "\n"


class StageError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


def delta_tag(delta: float) -> str:
    return f"{delta:g}"


def stream_index(kind: str, excitation: str) -> int:
    """Noise stream for a data set; independent of which indicators are requested."""
    return KINDS.index(kind) * len(EXCITATIONS) + EXCITATIONS.index(excitation)


def data_filename(kind: str, excitation: str, delta: float) -> str:
    return f"data_{kind}_{excitation}_{delta_tag(delta)}.txt"


def image_basename(j: int, scene: str, delta: float) -> str:
    return f"I{j}_{scene}_{delta_tag(delta)}"


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------


def simulate_data(config: ExperimentConfig) -> dict[tuple[str, str], DataMatrix]:
    """Clean data for every (kind, excitation) the indicators need, one solve per excitation."""
    out: dict[tuple[str, str], DataMatrix] = {}
    solutions = {}
    for kind, exc in config.data_requests():
        if exc not in solutions:
            incidences = excitation_incidences(config.array, exc)
            solutions[exc] = solve_batch(config.params, config.curves, config.bc, incidences, config.backend, config.mfs)
        out[(kind, exc)] = measure(solutions[exc], config.array, kind, exc)
    return out


def noisy_data(config: ExperimentConfig, clean: dict, delta: float) -> dict:
    return {
        key: add_noise(d, NoiseSpec(delta, config.seed, stream_index(*key))) for key, d in clean.items()
    }


def localization(grid: SamplingGrid, curves, kappa: float) -> CheckResult:
    """Argmax within 0.5 of the boundary and near-boundary mean above the far mean.

    ``grid`` should already be normalized.
    """
    pts = grid.points()
    dist = distance_to_curves(pts, list(curves))
    d_arg = float(distance_to_curves(grid.argmax_point()[None], list(curves))[0])
    near = float(grid.values[dist < 1 / kappa].mean())
    far = float(grid.values[dist > 3 / kappa].mean())
    ok = d_arg <= ARGMAX_TOLERANCE and near > far
    return CheckResult(
        f"localize {grid.label}", d_arg, f"<= {ARGMAX_TOLERANCE}", bool(ok),
        f"near mean {near:.4f} far mean {far:.4f}",
    )


def ridge_clusters(grid: SamplingGrid, level: float = 0.5) -> list[np.ndarray]:
    """Connected components (8-neighbour) of ``values > level`` as point arrays."""
    labels, n = ndimage.label(grid.values > level, structure=np.ones((3, 3)))
    pts = grid.points()
    return [pts[labels == k] for k in range(1, n + 1)]


def multiplicity(grid: SamplingGrid, curves, level: float = 0.5, separation: float = 2.0) -> CheckResult:
    """Above-``level`` clusters attach to distinct components and stay ``separation`` apart.

    Each cluster is assigned to its nearest true component (by median
    distance).  Passes when every component receives a cluster and the
    closest pair of clusters belonging to different components is at least
    ``separation`` apart.
    """
    clusters = ridge_clusters(grid, level)
    owner = []
    for c in clusters:
        d = np.stack([distance_to_curves(c, [cv]) for cv in curves])
        owner.append(int(np.argmin(np.median(d, axis=1))))
    gap = np.inf
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            if owner[a] != owner[b]:
                dd = np.linalg.norm(clusters[a][:, None] - clusters[b][None], axis=-1).min()
                gap = min(gap, float(dd))
    covered = set(owner) == set(range(len(curves)))
    ok = covered and gap >= separation
    return CheckResult(
        f"multiplicity {grid.label}", gap if np.isfinite(gap) else 0.0, f">= {separation}", bool(ok),
        f"{len(clusters)} clusters, owners {owner}",
    )


def compute_images(config: ExperimentConfig, data: dict) -> dict[int, SamplingGrid]:
    out = {}
    for j in config.indicators:
        g = image(j, data[required_data(j)], config.grid)
        out[j] = normalize(g, config.normalization)
    return out


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # re-raised with context
        raise StageError(f"{name}: {type(exc).__name__}: {exc}") from exc


def run_simulate(config: ExperimentConfig, out_dir) -> RunReport:
    """Write clean and noisy data files for every noise level."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    t = time.perf_counter()
    clean = _stage("simulate", simulate_data, config)
    report.timings["simulate"] = time.perf_counter() - t
    for delta in config.deltas:
        data = _stage("noise", noisy_data, config, clean, delta)
        for (kind, exc), d in data.items():
            save_matrix(d, out / data_filename(kind, exc, delta))
    return report


def run_images(config: ExperimentConfig, data_by_delta: dict, out_dir, report: RunReport | None = None) -> RunReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = report or RunReport()
    for delta in config.deltas:
        t = time.perf_counter()
        grids = _stage(f"image delta={delta_tag(delta)}", compute_images, config, data_by_delta[delta])
        report.timings[f"image {delta_tag(delta)}"] = time.perf_counter() - t
        for j, g in grids.items():
            base = image_basename(j, config.name, delta)
            emit_grid(g, out / f"{base}.csv", out / f"{base}.ppm", config.curves)
            if config.curves:
                c = localization(g, config.curves, config.params.kappa)
                c.name = f"localize I{j} delta={delta_tag(delta)}"
                report.add(c)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    return report


def load_data(config: ExperimentConfig, data_dir) -> dict:
    """Read the files written by :func:`run_simulate` back in."""
    d = Path(data_dir)
    out = {}
    for delta in config.deltas:
        out[delta] = {
            key: _stage("load", load_matrix, d / data_filename(*key, delta)) for key in config.data_requests()
        }
    return out


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunReport:
    """Simulate, add noise, image, normalize and emit; returns the report."""
    out_dir = out_dir or config.out_dir
    report = RunReport()
    t = time.perf_counter()
    clean = _stage("simulate", simulate_data, config)
    report.timings["simulate"] = time.perf_counter() - t
    data = {delta: _stage("noise", noisy_data, config, clean, delta) for delta in config.deltas}
    return run_images(config, data, out_dir, report)


def image_only(config: ExperimentConfig) -> dict[float, dict[int, SamplingGrid]]:
    """In-memory images for every noise level (no files)."""
    clean = simulate_data(config)
    return {delta: compute_images(config, noisy_data(config, clean, delta)) for delta in config.deltas}
