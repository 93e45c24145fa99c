"""Reverse-time-migration imaging functions I_1 .. I_11 on a sampling grid.

Every indicator has the form::

    I(z) = c * kappa^p * Part sum_{a, b} K_rec(z, a) K_src(z, b) conj(D[a, b]) w_a w_b

where ``a`` runs over receivers (or observation directions), ``b`` over
sources (or incident directions) and ``Part`` is Re or Im.  The table
``INDICATORS`` lists the slots for each ``j``; one engine evaluates all.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, NormalizationError
from .forward import DataMatrix
from .geometry import ArrayGeometry
from .specfun import KernelKind, WaveParams, kernel

CHUNK = 1024
PHASELESS_DIVISOR_FLOOR = 1e-14


@dataclass(frozen=True)
class IndicatorSpec:
    """Slots of one imaging function.

    ``receiver``: ``"point"`` for Phi_k(z, x_r) or ``"far"`` for exp(-i k z.xhat).
    ``source``: ``"point"`` for Phi_k(z, x_s) or ``"plane"`` for exp(i k z.d).
    Prefactor is ``coef * kappa**power``.
    """

    j: int
    kind: str
    excitation: str
    receiver: str
    source: str
    coef: float
    power: int
    part: str

    def prefactor(self, kappa: float) -> float:
        return self.coef * kappa**self.power


_4PI = 1.0 / (4 * np.pi)

INDICATORS: dict[int, IndicatorSpec] = {
    1: IndicatorSpec(1, "u", "point", "point", "point", -2.0, 4, "im"),
    2: IndicatorSpec(2, "dnu", "point", "point", "point", -2.0, 3, "re"),
    3: IndicatorSpec(3, "Mu", "point", "point", "point", 2.0, 2, "im"),
    4: IndicatorSpec(4, "Nu", "point", "point", "point", -2.0, 1, "re"),
    5: IndicatorSpec(5, "u", "plane", "point", "plane", -_4PI, 3, "im"),
    6: IndicatorSpec(6, "dnu", "plane", "point", "plane", -_4PI, 2, "re"),
    7: IndicatorSpec(7, "Mu", "plane", "point", "plane", _4PI, 1, "im"),
    8: IndicatorSpec(8, "Nu", "plane", "point", "plane", -_4PI, 0, "re"),
    9: IndicatorSpec(9, "far", "point", "far", "point", -_4PI, 3, "im"),
    10: IndicatorSpec(10, "far", "plane", "far", "plane", -1.0 / (32 * np.pi**2), 2, "im"),
    11: IndicatorSpec(11, "abs_total", "point", "point", "point", -2.0, 4, "im"),
}


def required_data(j: int) -> tuple[str, str]:
    """(kind, excitation) of the measurements indicator ``j`` consumes."""
    spec = _spec(j)
    return spec.kind, spec.excitation


def _spec(j: int) -> IndicatorSpec:
    try:
        return INDICATORS[int(j)]
    except (KeyError, ValueError):
        raise ContractError(f"indicator index must be in 1..11, got {j!r}") from None


@dataclass(frozen=True)
class GridSpec:
    bounds: tuple[float, float, float, float] = (-6.0, 6.0, -6.0, 6.0)
    nx: int = 121
    ny: int = 121

    def __post_init__(self):
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax) or self.nx < 2 or self.ny < 2:
            raise ContractError("degenerate sampling grid")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.bounds[0], self.bounds[1], self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.bounds[2], self.bounds[3], self.ny)

    def points(self) -> np.ndarray:
        """Sampling points, shape ``(nx, ny, 2)``; ``[i, j]`` is ``(x_i, y_j)``."""
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        return np.stack([xx, yy], axis=-1)


@dataclass(frozen=True)
class SamplingGrid:
    """Real indicator values on a :class:`GridSpec`, shape ``(nx, ny)``."""

    spec: GridSpec
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.values.shape != (self.spec.nx, self.spec.ny):
            raise ContractError("grid values do not match the grid shape")
        if np.iscomplexobj(self.values) or not np.all(np.isfinite(self.values)):
            raise ContractError("grid values must be finite reals")

    @property
    def bounds(self):
        return self.spec.bounds

    def points(self) -> np.ndarray:
        return self.spec.points()

    def argmax_point(self) -> np.ndarray:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return self.points()[i, j]


def _threads() -> int:
    env = os.environ.get("BHM_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _receiver_kernel(spec: IndicatorSpec, params: WaveParams, array: ArrayGeometry, z):
    if spec.receiver == "point":
        return kernel(KernelKind.HELMHOLTZ, params, z[:, None, :], array.receivers[None, :, :]), array.receiver_weight
    return np.exp(-1j * params.kappa * (z @ array.directions.T)), array.direction_weight


def _source_kernel(spec: IndicatorSpec, params: WaveParams, array: ArrayGeometry, z):
    if spec.source == "point":
        return kernel(KernelKind.HELMHOLTZ, params, z[:, None, :], array.sources[None, :, :]), array.source_weight
    return np.exp(1j * params.kappa * (z @ array.directions.T)), array.direction_weight


def _accumulate(spec: IndicatorSpec, params: WaveParams, array: ArrayGeometry, conj_data: np.ndarray, z: np.ndarray):
    """Complex double sum for a flat block of sampling points."""
    kr, wr = _receiver_kernel(spec, params, array, z)
    ks, ws = _source_kernel(spec, params, array, z)
    return np.einsum("ps,ps->p", kr @ conj_data, ks) * (wr * ws)


def migrate(spec: IndicatorSpec, conj_data: np.ndarray, grid: GridSpec, array: ArrayGeometry, params: WaveParams) -> SamplingGrid:
    """The shared engine: evaluate ``spec`` against already-conjugated data."""
    if spec.receiver == "point" or spec.source == "point":
        radii = []
        if spec.receiver == "point":
            radii.append(array.R_r)
        if spec.source == "point":
            radii.append(array.R_s)
        xmin, xmax, ymin, ymax = grid.bounds
        far = max(np.hypot(x, y) for x in (xmin, xmax) for y in (ymin, ymax))
        if far >= min(radii):
            raise DomainError(f"sampling domain reaches radius {far:.3g}, not inside the arrays")
    pts = grid.points().reshape(-1, 2)
    blocks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    workers = _threads()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _accumulate(spec, params, array, conj_data, b), blocks))
    else:
        parts = [_accumulate(spec, params, array, conj_data, b) for b in blocks]
    acc = np.concatenate(parts)
    real = acc.imag if spec.part == "im" else acc.real
    values = spec.prefactor(params.kappa) * real
    return SamplingGrid(grid, values.reshape(grid.nx, grid.ny), label=f"I{spec.j}")


def _check_data(spec: IndicatorSpec, data: DataMatrix):
    if (data.kind, data.excitation) != (spec.kind, spec.excitation):
        raise ContractError(
            f"I{spec.j} needs {spec.kind}/{spec.excitation} data, got {data.kind}/{data.excitation}"
        )


def _resolve(data: DataMatrix, array, params):
    return array or data.array, params or data.params


def image_nearfield_point(j: int, data: DataMatrix, grid: GridSpec, array: ArrayGeometry | None = None,
                          params: WaveParams | None = None) -> SamplingGrid:
    """I_1 .. I_4: receivers on the receiver circle, point sources on the source circle."""
    if j not in (1, 2, 3, 4):
        raise ContractError("near-field point-source indicators are 1..4")
    spec = INDICATORS[j]
    _check_data(spec, data)
    array, params = _resolve(data, array, params)
    return migrate(spec, np.conj(data.values), grid, array, params)


def image_nearfield_plane(j: int, data: DataMatrix, grid: GridSpec, array: ArrayGeometry | None = None,
                          params: WaveParams | None = None) -> SamplingGrid:
    """I_5 .. I_8: receivers on the receiver circle, plane-wave incidence."""
    if j not in (5, 6, 7, 8):
        raise ContractError("near-field plane-wave indicators are 5..8")
    spec = INDICATORS[j]
    _check_data(spec, data)
    array, params = _resolve(data, array, params)
    return migrate(spec, np.conj(data.values), grid, array, params)


def image_farfield(j: int, data: DataMatrix, grid: GridSpec, array: ArrayGeometry | None = None,
                   params: WaveParams | None = None) -> SamplingGrid:
    """I_9 (point sources) and I_10 (plane waves) from far-field patterns."""
    if j not in (9, 10):
        raise ContractError("far-field indicators are 9 and 10")
    spec = INDICATORS[j]
    _check_data(spec, data)
    array, params = _resolve(data, array, params)
    return migrate(spec, np.conj(data.values), grid, array, params)


def phaseless_ratio(data: DataMatrix, array: ArrayGeometry, params: WaveParams) -> np.ndarray:
    """``(|u|^2 - |Phi_k(x_r, x_s)|^2) / Phi_k(x_r, x_s)`` per entry."""
    phi = kernel(KernelKind.HELMHOLTZ, params, array.receivers[:, None, :], array.sources[None, :, :])
    small = np.abs(phi) < PHASELESS_DIVISOR_FLOOR
    if np.any(small):
        r, s = np.argwhere(small)[0]
        raise DomainError(f"|Phi(x_r, x_s)| below {PHASELESS_DIVISOR_FLOOR:g} at entry ({r}, {s})")
    return (data.values**2 - np.abs(phi) ** 2) / phi


def image_phaseless(data: DataMatrix, grid: GridSpec, array: ArrayGeometry | None = None,
                    params: WaveParams | None = None) -> SamplingGrid:
    """I_11 from total-field magnitudes.  The ratio enters unconjugated."""
    spec = INDICATORS[11]
    _check_data(spec, data)
    array, params = _resolve(data, array, params)
    # the engine expects data already conjugated; the printed formula uses the ratio itself
    ratio = phaseless_ratio(data, array, params)
    return migrate(spec, ratio, grid, array, params)


def image(j: int, data: DataMatrix, grid: GridSpec) -> SamplingGrid:
    """Dispatch on the indicator index."""
    j = _spec(j).j
    if j <= 4:
        return image_nearfield_point(j, data, grid)
    if j <= 8:
        return image_nearfield_plane(j, data, grid)
    if j <= 10:
        return image_farfield(j, data, grid)
    return image_phaseless(data, grid)


def normalize(grid: SamplingGrid, mode: str = "signed") -> SamplingGrid:
    """Divide by the grid maximum.

    ``mode="signed"`` divides by ``max I`` as the reconstruction algorithm
    prints it; ``mode="abs"`` divides by ``max |I|``.
    """
    v = grid.values
    if mode == "signed":
        m = v.max()
        if m == 0 or not np.any(v):
            raise NormalizationError("grid maximum is zero")
        if m < 0:
            raise NormalizationError("grid maximum is negative; signed normalization would flip it")
    elif mode == "abs":
        m = np.abs(v).max()
        if m == 0:
            raise NormalizationError("grid is identically zero")
    else:
        raise ContractError(f"unknown normalization {mode!r}")
    return SamplingGrid(grid.spec, v / m, grid.label)
