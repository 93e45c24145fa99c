"""Exterior biharmonic scattering: Fourier-mode series on circles, the method
of fundamental solutions (MFS) on general curves, field / far-field
evaluation, and synthetic measurement matrices.

The scattered field is split as ``u_sc = u_pr + u_ev`` with
``(Delta + k^2) u_pr = 0`` (radiating) and ``(Delta - k^2) u_ev = 0``
(evanescent).  Both solvers keep the two parts separate: the modal solver
as ``alpha_n H_n(kr)`` / ``beta_n K_n(kr)`` terms, MFS as ``Phi_k`` /
``Phi_ik`` source densities.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ContractError, DomainError, ExcludedWavenumberError, GeometryError, SingularityError, SolveError
from .geometry import (
    ArrayGeometry,
    BoundaryNodes,
    Circle,
    Curve,
    apply_M,
    apply_M_polar,
    apply_N,
    apply_N_polar,
    discretize,
    discretize_all,
    distance_to_curves,
    inside_any,
    polar_derivatives,
)
from .jets import Jet3, jet_from_wirtinger
from .specfun import KernelKind, WaveParams, kernel, kernel_jet

logger = logging.getLogger(__name__)

FAR_FIELD_CONSTANT = np.exp(1j * np.pi / 4) / np.sqrt(8 * np.pi)  # divide by sqrt(kappa)
MFS_FAILURE_RESIDUAL = 1e-3
EXCLUDED_CONDITION = 1e12


class BoundaryCondition(enum.Enum):
    CLAMPED = ("u", "dn")
    SIMPLY_SUPPORTED = ("u", "M")
    ROLLER = ("dn", "N")
    FREE = ("M", "N")

    @property
    def traces(self) -> tuple[str, str]:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "clamped": cls.CLAMPED, "i": cls.CLAMPED,
            "simply_supported": cls.SIMPLY_SUPPORTED, "simply": cls.SIMPLY_SUPPORTED, "ii": cls.SIMPLY_SUPPORTED,
            "roller": cls.ROLLER, "roller_supported": cls.ROLLER, "iii": cls.ROLLER,
            "free": cls.FREE, "iv": cls.FREE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown boundary condition {text!r}") from None


# --------------------------------------------------------------------------
# incidences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PlaneWave:
    direction: tuple[float, float]

    def __post_init__(self):
        if abs(np.hypot(*self.direction) - 1.0) > 1e-12:
            raise DomainError("plane-wave direction must be a unit vector")


@dataclass(frozen=True)
class PointSource:
    location: tuple[float, float]


@dataclass(frozen=True)
class Regularized:
    """Incident field ``Im Phi_k(x, z) = J0(k |x - z|) / 4``."""

    center: tuple[float, float]


Incidence = PlaneWave | PointSource | Regularized


def plane_wave(angle: float) -> PlaneWave:
    return PlaneWave((float(np.cos(angle)), float(np.sin(angle))))


def _bessel_j_jet(params: WaveParams, x, z, scale) -> Jet3:
    # D^a Dbar^b J0(k rho) = (-k)^a k^b J_{a-b}(k rho) e^{i(a-b) phi}; smooth at rho = 0
    d = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    rho = np.hypot(d[..., 0], d[..., 1])
    phi = np.arctan2(d[..., 1], d[..., 0])
    k = params.kappa
    w = {}
    for a in range(4):
        for b in range(4 - a):
            m = a - b
            w[(a, b)] = scale * (-k) ** a * k**b * special.jv(m, k * rho) * np.exp(1j * m * phi)
    return jet_from_wirtinger(w)


def incident_jet(incidence: Incidence, params: WaveParams, x) -> Jet3:
    """Incident field and its derivatives through order 3 at ``x``."""
    x = np.asarray(x, dtype=float)
    k = params.kappa
    if isinstance(incidence, PlaneWave):
        d1, d2 = incidence.direction
        val = np.exp(1j * k * (x[..., 0] * d1 + x[..., 1] * d2))
        a, b = 1j * k * d1, 1j * k * d2
        return Jet3(
            v=val, x=a * val, y=b * val,
            xx=a * a * val, xy=a * b * val, yy=b * b * val,
            xxx=a**3 * val, xxy=a * a * b * val, xyy=a * b * b * val, yyy=b**3 * val,
        )
    if isinstance(incidence, PointSource):
        return kernel_jet(KernelKind.HELMHOLTZ, params, x, np.asarray(incidence.location, dtype=float))
    if isinstance(incidence, Regularized):
        return _bessel_j_jet(params, x, incidence.center, 0.25)
    raise ContractError(f"unknown incidence {incidence!r}")


def _incident_batch(incidences: Sequence[Incidence], params: WaveParams, points) -> Jet3:
    """Jets with shape ``(len(points), len(incidences))``."""
    points = np.asarray(points, dtype=float)
    if incidences and all(isinstance(i, PointSource) for i in incidences):
        locs = np.array([i.location for i in incidences], dtype=float)
        return kernel_jet(KernelKind.HELMHOLTZ, params, points[:, None, :], locs[None, :, :])
    if incidences and all(isinstance(i, PlaneWave) for i in incidences):
        dirs = np.array([i.direction for i in incidences], dtype=float)
        k = params.kappa
        val = np.exp(1j * k * (points @ dirs.T))
        a, b = 1j * k * dirs[:, 0], 1j * k * dirs[:, 1]
        return Jet3(
            v=val, x=a * val, y=b * val,
            xx=a * a * val, xy=a * b * val, yy=b * b * val,
            xxx=a**3 * val, xxy=a * a * b * val, xyy=a * b * b * val, yyy=b**3 * val,
        )
    jets = [incident_jet(i, params, points) for i in incidences]
    return Jet3(**{name: np.stack([getattr(j, name) for j in jets], axis=-1) for name in Jet3.__dataclass_fields__})


def boundary_trace(name: str, jet: Jet3, normals, curvature, nu: float) -> np.ndarray:
    """One of the four plate traces ``u``, ``dn`` (normal derivative), ``M``, ``N``."""
    if name == "u":
        return jet.v
    if name == "dn":
        return jet.normal_derivative(normals)
    if name == "M":
        return apply_M(jet, normals, nu)
    if name == "N":
        return apply_N(jet, normals, curvature, nu)
    raise ContractError(f"unknown trace {name!r}")


def _node_broadcast(nodes: BoundaryNodes, ndim: int):
    extra = (1,) * (ndim - 1)
    normals = nodes.normals.reshape((-1,) + extra + (2,))
    curv = nodes.curvature.reshape((-1,) + extra)
    return normals, curv


# --------------------------------------------------------------------------
# scene
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Scene:
    params: WaveParams
    curves: tuple[Curve, ...]
    bc: BoundaryCondition = BoundaryCondition.CLAMPED
    incidence: Incidence | None = None

    def with_incidence(self, incidence: Incidence) -> "Scene":
        return Scene(self.params, self.curves, self.bc, incidence)

    @property
    def is_centered_circle(self) -> bool:
        return len(self.curves) == 1 and isinstance(self.curves[0], Circle)


BOUNDARY_TOLERANCE = 1e-5


def _check_exterior(curves, x):
    """Reject points inside an obstacle; points on the boundary are allowed."""
    if not curves:
        return
    flat = np.asarray(x, dtype=float).reshape(-1, 2)
    inside = inside_any(flat, curves)
    if np.any(inside) and np.any(distance_to_curves(flat[inside], curves) > BOUNDARY_TOLERANCE):
        raise DomainError("evaluation point lies inside an obstacle")


# --------------------------------------------------------------------------
# Fourier-mode series on a circle
# --------------------------------------------------------------------------


def _radial(kind: str, n: np.ndarray, z: np.ndarray, m: int) -> np.ndarray:
    """``d^m/dz^m`` of the order-``n`` radial function (integer ``n`` of any sign)."""
    an = np.abs(n)
    sign = np.where((n < 0) & (an % 2 == 1), -1.0, 1.0)
    if kind == "H":
        out = special.hankel1(an, z) if m == 0 else special.h1vp(an, z, m)
        return sign * out
    if kind == "J":
        out = special.jv(an, z) if m == 0 else special.jvp(an, z, m)
        return sign * out
    if kind == "K":
        return special.kv(an, z) if m == 0 else special.kvp(an, z, m)
    raise ValueError(kind)


def _mode_traces(kind: str, n: np.ndarray, kappa: float, a: float, nu: float) -> dict[str, np.ndarray]:
    """The four boundary traces of ``f_n(k r) e^{i n theta}`` on ``r = a``
    (coefficient of ``e^{i n theta}``), outward normal ``e_r``."""
    z = kappa * a
    f0, f1, f2, f3 = (kappa**m * _radial(kind, n, z, m) for m in range(4))
    n2 = n.astype(float) ** 2
    dlap = f3 + f2 / a - f1 / a**2 - n2 * f1 / a**2 + 2 * n2 * f0 / a**3
    return {
        "u": f0,
        "dn": f1,
        "M": f2 + nu * (f1 / a - n2 * f0 / a**2),
        "N": -dlap + (1 - nu) * (n2 / a**2) * (f1 - f0 / a),
    }


def _incident_modes(incidence: Incidence, params: WaveParams, center, n: np.ndarray) -> np.ndarray:
    """Coefficients ``a_n`` with ``u_in = sum_n a_n J_n(k r') e^{i n theta'}`` about ``center``."""
    k = params.kappa
    c = np.asarray(center, dtype=float)
    if isinstance(incidence, PlaneWave):
        d = np.asarray(incidence.direction)
        th = np.arctan2(d[1], d[0])
        return np.exp(1j * k * c @ d) * (1j) ** n * np.exp(-1j * n * th)
    if isinstance(incidence, (PointSource, Regularized)):
        p = np.asarray(incidence.location if isinstance(incidence, PointSource) else incidence.center) - c
        rho, phi = np.hypot(*p), np.arctan2(p[1], p[0])
        if isinstance(incidence, PointSource):
            return 0.25j * _radial("H", n, k * rho, 0) * np.exp(-1j * n * phi)
        return 0.25 * _radial("J", n, k * rho, 0) * np.exp(-1j * n * phi)
    raise ContractError(f"unknown incidence {incidence!r}")


@dataclass(frozen=True)
class ModalSolution:
    """``u_sc = sum_n [alpha_n H_n(k r) + beta_n K_n(k r)] e^{i n theta}`` about ``center``.

    ``alpha``/``beta`` have shape ``(2N+1,)`` or ``(2N+1, m)`` for ``m``
    simultaneous incidences; modes run ``n = -N..N``.
    """

    params: WaveParams
    center: tuple[float, float]
    radius: float
    modes: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    residual: float = 0.0

    @property
    def curves(self) -> tuple[Curve, ...]:
        return (Circle(self.center, self.radius),)

    def scaled(self, c) -> "ModalSolution":
        return ModalSolution(self.params, self.center, self.radius, self.modes, c * self.alpha, c * self.beta, self.residual)

    def _local(self, x):
        x = np.asarray(x, dtype=float)
        d = x - np.asarray(self.center)
        r = np.hypot(d[..., 0], d[..., 1])
        if np.any(r < self.radius * (1 - 1e-12)):
            raise DomainError("evaluation point lies inside the obstacle")
        return r, np.arctan2(d[..., 1], d[..., 0])

    def jet(self, x) -> Jet3:
        r, th = self._local(x)
        k = self.params.kappa
        r, th = r.ravel(), th.ravel()
        w = {}
        for a in range(4):
            for b in range(4 - a):
                s = a - b
                shifted = self.modes + s
                ph = np.exp(1j * th[:, None] * shifted[None, :])
                hb = _radial("H", shifted[None, :], k * r[:, None], 0) * ph
                kb = _radial("K", shifted[None, :], k * r[:, None], 0) * ph
                w[(a, b)] = (-k) ** a * k**b * (hb @ self.alpha) + (-k) ** (a + b) * (kb @ self.beta)
        jet = jet_from_wirtinger(w)
        shape = np.shape(x)[:-1] + np.shape(self.alpha)[1:]
        return jet._map(lambda v: v.reshape(shape))

    def propagating(self, x) -> np.ndarray:
        r, th = self._local(x)
        k = self.params.kappa
        ph = np.exp(1j * th.ravel()[:, None] * self.modes[None, :])
        out = (_radial("H", self.modes[None, :], k * r.ravel()[:, None], 0) * ph) @ self.alpha
        return out.reshape(np.shape(x)[:-1] + np.shape(self.alpha)[1:])

    def farfield(self, directions) -> np.ndarray:
        d = np.asarray(directions, dtype=float)
        th = np.arctan2(d[..., 1], d[..., 0]).ravel()
        k = self.params.kappa
        shift = np.exp(-1j * k * (d.reshape(-1, 2) @ np.asarray(self.center, dtype=float)))
        coef = 4 * (-1j) ** (self.modes + 1)
        out = (np.exp(1j * th[:, None] * self.modes[None, :]) * coef[None, :]) @ self.alpha
        out = out * shift.reshape((-1,) + (1,) * (out.ndim - 1))
        return out.reshape(np.shape(d)[:-1] + np.shape(self.alpha)[1:])


def default_max_mode(kappa: float, radius: float) -> int:
    return int(np.ceil(kappa * radius)) + 20


def _solve_modes(params, circle: Circle, bc: BoundaryCondition, incidences, max_mode: int | None) -> ModalSolution:
    a = circle.radius
    N = default_max_mode(params.kappa, a) if max_mode is None else int(max_mode)
    n = np.arange(-N, N + 1)
    th = {kind: _mode_traces(kind, n, params.kappa, a, params.nu) for kind in ("H", "K", "J")}
    b1, b2 = bc.traces
    A = np.empty((len(n), 2, 2), dtype=complex)
    A[:, 0, 0], A[:, 0, 1] = th["H"][b1], th["K"][b1]
    A[:, 1, 0], A[:, 1, 1] = th["H"][b2], th["K"][b2]
    inc = np.stack([_incident_modes(i, params, circle.center, n) for i in incidences], axis=-1)
    rhs = -np.stack([th["J"][b1][:, None] * inc, th["J"][b2][:, None] * inc], axis=1)

    # row/column equilibration before the 2x2 solves
    rs = 1.0 / np.max(np.abs(A), axis=2)
    As = A * rs[:, :, None]
    cs = 1.0 / np.max(np.abs(As), axis=1)
    As = As * cs[:, None, :]
    cond = np.linalg.cond(As)
    bad = cond > EXCLUDED_CONDITION
    if np.any(bad):
        worst = float(np.max(cond))
        if bc is BoundaryCondition.FREE:
            raise ExcludedWavenumberError(
                f"free-plate mode system singular (cond {worst:.3g}) at kappa={params.kappa}", residual=worst
            )
        raise SolveError(f"mode system singular (cond {worst:.3g})", residual=worst)
    sol = np.linalg.solve(As, rhs * rs[:, :, None]) * cs[:, :, None]
    resid = np.einsum("nij,njm->nim", A, sol) - rhs
    scale = np.maximum(np.abs(rhs).max(axis=1), 1e-300)
    residual = float(np.max(np.abs(resid).max(axis=1) / scale))
    alpha, beta = sol[:, 0, :], sol[:, 1, :]
    return ModalSolution(params, tuple(circle.center), a, n, alpha, beta, residual)


def solve_circle_modes(scene: Scene, max_mode: int | None = None) -> ModalSolution:
    """Per-mode 2x2 boundary solve for a single circular obstacle."""
    if not scene.is_centered_circle:
        raise ContractError("modal solver needs a single circular obstacle")
    if scene.incidence is None:
        raise ContractError("scene has no incidence")
    sol = _solve_modes(scene.params, scene.curves[0], scene.bc, [scene.incidence], max_mode)
    return ModalSolution(sol.params, sol.center, sol.radius, sol.modes, sol.alpha[:, 0], sol.beta[:, 0], sol.residual)


# --------------------------------------------------------------------------
# method of fundamental solutions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MfsConfig:
    """MFS discretization.

    ``placement="shrink"`` puts the sources on the curve scaled by ``offset``
    about an interior point.  ``placement="normal"`` moves each source
    inward along the normal by ``spacings`` local source spacings, which
    copes with non-convex curves where a uniform shrink does not.
    """

    offset: float = 0.8
    sources: int = 96
    collocation: int = 256
    placement: str = "shrink"
    spacings: float = 4.0
    tolerance: float = 1e-6
    rcond: float = 1e-13


GENERAL_MFS = MfsConfig(sources=320, collocation=768, placement="normal")


def default_mfs_config(curves: Sequence[Curve]) -> MfsConfig:
    """Shrunk-copy defaults for circles, normal offsets otherwise."""
    return MfsConfig() if all(isinstance(c, Circle) for c in curves) else GENERAL_MFS


@dataclass(frozen=True)
class MfsSolution:
    """``u_sc = sum_j c_j Phi_k(x, y_j) + sum_j d_j Phi_ik(x, y_j)``."""

    params: WaveParams
    curves: tuple[Curve, ...]
    sources: np.ndarray
    c: np.ndarray
    d: np.ndarray
    residual: float
    warning: bool = False

    def scaled(self, s) -> "MfsSolution":
        return MfsSolution(self.params, self.curves, self.sources, s * self.c, s * self.d, self.residual, self.warning)

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        _check_exterior(self.curves, x)
        return x

    def jet(self, x) -> Jet3:
        x = self._points(x)
        flat = x.reshape(-1, 2)
        jk = kernel_jet(KernelKind.HELMHOLTZ, self.params, flat[:, None, :], self.sources[None, :, :])
        jm = kernel_jet(KernelKind.MODIFIED, self.params, flat[:, None, :], self.sources[None, :, :])
        jet = jk.dot(self.c) + jm.dot(self.d)
        shape = x.shape[:-1] + np.shape(self.c)[1:]
        return jet._map(lambda v: v.reshape(shape))

    def propagating(self, x) -> np.ndarray:
        x = self._points(x)
        flat = x.reshape(-1, 2)
        out = kernel(KernelKind.HELMHOLTZ, self.params, flat[:, None, :], self.sources[None, :, :]) @ self.c
        return out.reshape(x.shape[:-1] + np.shape(self.c)[1:])

    def farfield(self, directions) -> np.ndarray:
        d = np.asarray(directions, dtype=float)
        flat = d.reshape(-1, 2)
        out = np.exp(-1j * self.params.kappa * flat @ self.sources.T) @ self.c
        return out.reshape(d.shape[:-1] + np.shape(self.c)[1:])


@dataclass(frozen=True)
class NullSolution:
    """Obstacle-free scene: the scattered field vanishes identically."""

    params: WaveParams
    width: int | None = None
    curves: tuple = ()
    residual: float = 0.0

    def _zeros(self, x):
        shape = np.shape(x)[:-1] + (() if self.width is None else (self.width,))
        return np.zeros(shape, dtype=complex)

    def jet(self, x) -> Jet3:
        return Jet3.zeros(self._zeros(x).shape)

    def propagating(self, x):
        return self._zeros(x)

    def farfield(self, directions):
        return self._zeros(directions)

    def scaled(self, s):
        return self


Solution = ModalSolution | MfsSolution | NullSolution


def mfs_source_points(curve: Curve, config: MfsConfig) -> np.ndarray:
    """Interior source points for one obstacle."""
    count = config.sources
    t = 2 * np.pi * np.arange(count) / count
    if config.placement == "shrink":
        if not (0 < config.offset < 1):
            raise GeometryError(f"MFS offset factor must lie in (0, 1), got {config.offset}")
        x, _, _ = curve.derivatives(t)
        p = curve.interior_point()
        pts = p + config.offset * (x - p)
    elif config.placement == "normal":
        nodes = discretize(curve, count)
        depth = config.spacings * nodes.jacobian * 2 * np.pi / count
        if np.any(depth * nodes.curvature > 0.5):
            raise GeometryError("normal source offset exceeds the local radius of curvature")
        pts = nodes.points - depth[:, None] * nodes.normals
    else:
        raise ContractError(f"unknown MFS placement {config.placement!r}")
    if not np.all(inside_any(pts, [curve])):
        raise GeometryError("MFS source curve leaves the obstacle")
    return pts


def _basis_traces(params, nodes: BoundaryNodes, sources: np.ndarray, names) -> np.ndarray:
    jk = kernel_jet(KernelKind.HELMHOLTZ, params, nodes.points[:, None, :], sources[None, :, :])
    jm = kernel_jet(KernelKind.MODIFIED, params, nodes.points[:, None, :], sources[None, :, :])
    normals, curv = _node_broadcast(nodes, 2)
    rows = []
    for name in names:
        rows.append(
            np.hstack([boundary_trace(name, jk, normals, curv, params.nu), boundary_trace(name, jm, normals, curv, params.nu)])
        )
    return np.vstack(rows)


def _incident_traces(params, nodes: BoundaryNodes, incidences, names) -> np.ndarray:
    jet = _incident_batch(incidences, params, nodes.points)
    normals, curv = _node_broadcast(nodes, 2)
    return np.vstack([boundary_trace(name, jet, normals, curv, params.nu) for name in names])


def _solve_mfs(params, curves, bc, incidences, cfg: MfsConfig) -> MfsSolution:
    if cfg.collocation < 2 * cfg.sources:
        raise ContractError("MFS needs at least twice as many collocation nodes as sources per obstacle")
    sources = np.vstack([mfs_source_points(c, cfg) for c in curves])
    nodes = discretize_all(curves, cfg.collocation)
    names = bc.traces
    A = _basis_traces(params, nodes, sources, names)
    B = -_incident_traces(params, nodes, incidences, names)

    nn = len(nodes)
    row_scale = np.ones(A.shape[0])
    for i in range(len(names)):
        blk = slice(i * nn, (i + 1) * nn)
        row_scale[blk] = 1.0 / np.sqrt(np.mean(np.abs(A[blk]) ** 2))
    As = A * row_scale[:, None]
    col_scale = 1.0 / np.linalg.norm(As, axis=0)
    As = As * col_scale[None, :]
    U, s, Vh = np.linalg.svd(As, full_matrices=False)
    keep = s > cfg.rcond * s[0]
    coef = (Vh[keep].conj().T @ ((U[:, keep].conj().T @ (B * row_scale[:, None])) / s[keep, None])) * col_scale[:, None]

    ns = len(sources)
    c, d = coef[:ns], coef[ns:]
    resid = A @ coef - B
    residual = 0.0
    for i in range(len(names)):
        blk = slice(i * nn, (i + 1) * nn)
        ref = np.max(np.abs(B[blk]), axis=0)
        residual = max(residual, float(np.max(np.max(np.abs(resid[blk]), axis=0) / np.maximum(ref, 1e-300))))
    if residual > MFS_FAILURE_RESIDUAL:
        err = ExcludedWavenumberError if bc is BoundaryCondition.FREE else SolveError
        raise err(f"MFS boundary residual {residual:.3g} exceeds {MFS_FAILURE_RESIDUAL}", residual=residual)
    warning = residual > cfg.tolerance
    if warning:
        logger.warning("MFS residual %.3g above tolerance %.3g", residual, cfg.tolerance)
    return MfsSolution(params, tuple(curves), sources, c, d, residual, warning)


def solve_mfs(scene: Scene, config: MfsConfig | None = None) -> MfsSolution:
    """Least-squares MFS solve enforcing both boundary conditions at every node."""
    if scene.incidence is None:
        raise ContractError("scene has no incidence")
    config = config or default_mfs_config(scene.curves)
    sol = _solve_mfs(scene.params, scene.curves, scene.bc, [scene.incidence], config)
    return MfsSolution(sol.params, sol.curves, sol.sources, sol.c[:, 0], sol.d[:, 0], sol.residual, sol.warning)


def solve_batch(
    params: WaveParams,
    curves: Sequence[Curve],
    bc: BoundaryCondition,
    incidences: Sequence[Incidence],
    backend: str = "auto",
    mfs: MfsConfig | None = None,
    max_mode: int | None = None,
) -> Solution:
    """One solve per incidence, returned as a single solution whose
    coefficients carry a trailing incidence axis."""
    curves = tuple(curves)
    if not curves:
        return NullSolution(params, len(incidences))
    if backend == "auto":
        backend = "modal" if len(curves) == 1 and isinstance(curves[0], Circle) else "mfs"
    if backend == "modal":
        if not (len(curves) == 1 and isinstance(curves[0], Circle)):
            raise ContractError("modal backend needs a single circular obstacle")
        return _solve_modes(params, curves[0], bc, incidences, max_mode)
    if backend == "mfs":
        return _solve_mfs(params, curves, bc, incidences, mfs or default_mfs_config(curves))
    raise ValueError(f"unknown backend {backend!r}")


def solve(scene: Scene, backend: str = "auto", mfs: MfsConfig | None = None) -> Solution:
    if scene.incidence is None:
        raise ContractError("scene has no incidence")
    sol = solve_batch(scene.params, scene.curves, scene.bc, [scene.incidence], backend, mfs)
    return _squeeze(sol)


def _squeeze(sol):
    if isinstance(sol, ModalSolution):
        return ModalSolution(sol.params, sol.center, sol.radius, sol.modes, sol.alpha[:, 0], sol.beta[:, 0], sol.residual)
    if isinstance(sol, MfsSolution):
        return MfsSolution(sol.params, sol.curves, sol.sources, sol.c[:, 0], sol.d[:, 0], sol.residual, sol.warning)
    return NullSolution(sol.params, None)


def eval_scattered_jet(solution: Solution, x) -> Jet3:
    """Scattered field and derivatives through order 3 at exterior points."""
    return solution.jet(x)


def eval_farfield(solution: Solution, direction) -> np.ndarray:
    """Far-field pattern, normalized so that
    ``u_sc ~ e^{i pi/4} / sqrt(8 pi k) * e^{ikr} / sqrt(r) * u_inf``."""
    return solution.farfield(direction)


def propagating_part(solution: Solution, x) -> np.ndarray:
    """Radiating part ``u_pr = -(Delta u_sc - k^2 u_sc) / (2 k^2)``."""
    return solution.propagating(x)


def farfield_constant(kappa: float) -> complex:
    return FAR_FIELD_CONSTANT / np.sqrt(kappa)


# --------------------------------------------------------------------------
# measurement matrices
# --------------------------------------------------------------------------

KINDS = ("u", "dnu", "Mu", "Nu", "far", "abs_total")
EXCITATIONS = ("point", "plane")


@dataclass
class DataMatrix:
    """Measurements, rows = receivers / observation directions, columns =
    sources / incident directions.

    ``total`` keeps the complex total field behind an ``abs_total`` matrix
    so noise can be applied before the magnitude is taken.
    """

    kind: str
    excitation: str
    values: np.ndarray
    array: ArrayGeometry
    params: WaveParams
    total: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown data kind {self.kind!r}")
        if self.excitation not in EXCITATIONS:
            raise ContractError(f"unknown excitation {self.excitation!r}")
        if self.kind == "abs_total":
            if self.excitation != "point":
                raise ContractError("phaseless total-field data needs point-source excitation")
            vals = np.asarray(self.values)
            if np.iscomplexobj(vals) or np.any(vals < 0):
                raise ContractError("phaseless entries must be real and nonnegative")
        if self.values.shape != self.expected_shape:
            raise ContractError(f"{self.kind}/{self.excitation} data must have shape {self.expected_shape}, got {self.values.shape}")

    @property
    def expected_shape(self) -> tuple[int, int]:
        rows = self.array.N_dir if self.kind == "far" else self.array.N_r
        cols = self.array.N_s if self.excitation == "point" else self.array.N_dir
        return rows, cols

    @property
    def is_complex(self) -> bool:
        return self.kind != "abs_total"


def excitation_incidences(array: ArrayGeometry, excitation: str) -> list[Incidence]:
    if excitation == "point":
        return [PointSource(tuple(p)) for p in array.sources]
    if excitation == "plane":
        return [PlaneWave(tuple(d)) for d in array.directions]
    raise ContractError(f"unknown excitation {excitation!r}")


def measure(solution: Solution, array: ArrayGeometry, kind: str, excitation: str) -> DataMatrix:
    """Turn a batch solution (one column per source / direction) into data."""
    params = solution.params
    if kind == "abs_total" and excitation != "point":
        raise ContractError("phaseless total-field data needs point-source excitation")
    if kind == "far":
        values = solution.farfield(array.directions)
        return DataMatrix(kind, excitation, np.asarray(values, dtype=complex), array, params)
    xr = array.receivers
    if kind == "u":
        values = solution.jet(xr).v
    elif kind == "abs_total":
        us = solution.jet(xr).v
        inc = kernel(KernelKind.HELMHOLTZ, params, xr[:, None, :], array.sources[None, :, :])
        total = us + inc
        return DataMatrix(kind, excitation, np.abs(total), array, params, total=total)
    else:
        jet = solution.jet(xr)
        if kind == "dnu":
            normals = (xr / array.R_r)[:, None, :]
            values = jet.normal_derivative(normals)
        else:
            pd = polar_derivatives(jet, xr[:, None, :], array.R_r)
            values = apply_M_polar(pd, params.nu) if kind == "Mu" else apply_N_polar(pd, params.nu)
    return DataMatrix(kind, excitation, np.asarray(values, dtype=complex), array, params)


def simulate(
    scene: Scene,
    array: ArrayGeometry,
    kind: str,
    excitation: str | None = None,
    backend: str = "auto",
    mfs: MfsConfig | None = None,
) -> DataMatrix:
    """Full measurement matrix of ``kind`` for the scene's obstacle(s).

    The scene's own incidence is ignored; the excitation set (point sources
    on the source circle, or plane waves from the direction set) is implied
    by ``excitation`` (default: point sources).
    """
    excitation = excitation or "point"
    if kind not in KINDS:
        raise ContractError(f"unknown data kind {kind!r}")
    if kind == "abs_total" and excitation != "point":
        raise ContractError("phaseless total-field data needs point-source excitation")
    for c in scene.curves:
        if np.any(inside_any(array.receivers, [c])):
            raise GeometryError("receiver inside an obstacle")
    incidences = excitation_incidences(array, excitation)
    sol = solve_batch(scene.params, scene.curves, scene.bc, incidences, backend, mfs)
    return measure(sol, array, kind, excitation)
