"""Obstacle curves, periodic trapezoid discretization, and the Kirchhoff
plate boundary operators (bending moment M, transverse force N)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ContractError, GeometryError
from .jets import Jet3

DEFAULT_NU = 0.25


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------


class Curve:
    """Closed counterclockwise parametric curve on [0, 2pi)."""

    def derivatives(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``x(t), x'(t), x''(t)`` with a trailing axis of length 2."""
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(Curve):
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        a = self.radius
        x = np.stack([self.center[0] + a * c, self.center[1] + a * s], axis=-1)
        dx = np.stack([-a * s, a * c], axis=-1)
        ddx = np.stack([-a * c, -a * s], axis=-1)
        return x, dx, ddx

    def interior_point(self):
        return np.array(self.center, dtype=float)


@dataclass(frozen=True)
class Kite(Curve):
    """``center + scale * (cos t + 0.65 cos 2t, 1.5 sin t)``.

    With the default center the curve is
    ``(0.65 cos 2t + cos t - 0.65, 1.5 sin t)``.
    """

    center: tuple[float, float] = (-0.65, 0.0)
    scale: float = 1.0

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        s = self.scale
        x = np.stack(
            [self.center[0] + s * (np.cos(t) + 0.65 * np.cos(2 * t)), self.center[1] + s * 1.5 * np.sin(t)], axis=-1
        )
        dx = np.stack([s * (-np.sin(t) - 1.3 * np.sin(2 * t)), s * 1.5 * np.cos(t)], axis=-1)
        ddx = np.stack([s * (-np.cos(t) - 2.6 * np.cos(2 * t)), -s * 1.5 * np.sin(t)], axis=-1)
        return x, dx, ddx

    def interior_point(self):
        return np.array(self.center, dtype=float) + self.scale * np.array([0.35, 0.0])


@dataclass(frozen=True)
class TrigPolynomial(Curve):
    """``x_i(t) = center_i + sum_k (a_ik cos kt + b_ik sin kt)``, ``k = 1..K``.

    ``coefficients`` is a sequence of ``(ax, bx, ay, by)`` rows, row ``k-1``
    holding the degree-``k`` terms.
    """

    coefficients: tuple[tuple[float, float, float, float], ...]
    center: tuple[float, float] = (0.0, 0.0)

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        out = []
        for m in range(3):
            acc = np.zeros(t.shape + (2,))
            if m == 0:
                acc[...] = self.center
            for k, (ax, bx, ay, by) in enumerate(self.coefficients, start=1):
                c = k**m * np.cos(k * t + m * np.pi / 2)
                s = k**m * np.sin(k * t + m * np.pi / 2)
                acc[..., 0] += ax * c + bx * s
                acc[..., 1] += ay * c + by * s
            out.append(acc)
        return tuple(out)

    def interior_point(self):
        return np.array(self.center, dtype=float)


# --------------------------------------------------------------------------
# nodes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryNode:
    t: float
    point: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    jacobian: float
    curvature: float
    weight: float = float("nan")


@dataclass(frozen=True)
class BoundaryNodes:
    """Struct-of-arrays node set; possibly several closed components.

    ``component[k]`` is the index of the curve node ``k`` belongs to; each
    component occupies a contiguous, equispaced block.
    """

    t: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    jacobian: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray
    component: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.component is None:
            object.__setattr__(self, "component", np.zeros(len(self.t), dtype=int))

    def __len__(self):
        return len(self.t)

    def __getitem__(self, k: int) -> BoundaryNode:
        return BoundaryNode(
            float(self.t[k]), self.points[k], self.normals[k], self.tangents[k],
            float(self.jacobian[k]), float(self.curvature[k]), float(self.weights[k]),
        )

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    def blocks(self):
        """Yield index slices, one per component."""
        for c in np.unique(self.component):
            idx = np.flatnonzero(self.component == c)
            yield slice(idx[0], idx[-1] + 1)

    def reversed_orientation(self) -> "BoundaryNodes":
        """Same points with the normal flipped (inner boundary of an annulus).

        Flipping ``n`` also flips ``tau = (-n2, n1)`` and the signed curvature.
        """
        return BoundaryNodes(
            self.t, self.points, -self.normals, -self.tangents, self.jacobian,
            -self.curvature, self.weights, self.component,
        )

    @staticmethod
    def concatenate(parts: Sequence["BoundaryNodes"]) -> "BoundaryNodes":
        comp = np.concatenate([np.full(len(p), i) for i, p in enumerate(parts)])
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts])  # noqa: E731
        return BoundaryNodes(
            cat("t"), cat("points"), cat("normals"), cat("tangents"),
            cat("jacobian"), cat("curvature"), cat("weights"), comp,
        )


def _frame(x, dx, ddx):
    jac = np.hypot(dx[..., 0], dx[..., 1])
    if np.any(jac < 1e-12):
        raise GeometryError("degenerate parametrization: |x'(t)| vanishes")
    normal = np.stack([dx[..., 1], -dx[..., 0]], axis=-1) / jac[..., None]
    tangent = dx / jac[..., None]
    curv = (dx[..., 0] * ddx[..., 1] - dx[..., 1] * ddx[..., 0]) / jac**3
    return normal, tangent, jac, curv


def curve_eval(curve: Curve, t: float) -> BoundaryNode:
    """Position, outward normal ``(x2', -x1')/|x'|``, tangent, jacobian, curvature."""
    x, dx, ddx = curve.derivatives(t)
    normal, tangent, jac, curv = _frame(x, dx, ddx)
    return BoundaryNode(float(t), x, normal, tangent, float(jac), float(curv))


def discretize(curve: Curve, n: int) -> BoundaryNodes:
    """Equispaced trapezoid nodes ``t_k = 2 pi k / n``, weights ``(2pi/n)|x'(t_k)|``."""
    if n < 16 or n % 2:
        raise GeometryError(f"node count must be even and >= 16, got {n}")
    t = 2 * np.pi * np.arange(n) / n
    x, dx, ddx = curve.derivatives(t)
    normal, tangent, jac, curv = _frame(x, dx, ddx)
    return BoundaryNodes(t, x, normal, tangent, jac, curv, (2 * np.pi / n) * jac)


def discretize_all(curves: Sequence[Curve], n: int) -> BoundaryNodes:
    return BoundaryNodes.concatenate([discretize(c, n) for c in curves])


def spectral_diff(samples: np.ndarray, order: int = 1, axis: int = 0) -> np.ndarray:
    """``d^order/dt^order`` of periodic samples on ``t_k = 2 pi k / n``."""
    samples = np.asarray(samples)
    n = samples.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * samples.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(samples, axis=axis) * mult.reshape(shape), axis=axis)
    return out if np.iscomplexobj(samples) else out.real


def winding_number(curve: Curve, point, n: int = 512) -> int:
    x, dx, _ = curve.derivatives(2 * np.pi * np.arange(n) / n)
    d = x - np.asarray(point, dtype=float)
    ang = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    total = ang[-1] - ang[0] + np.angle(np.exp(1j * (np.arctan2(d[0, 1], d[0, 0]) - ang[-1])))
    return int(np.round(total / (2 * np.pi)))


def distance_to_curves(points: np.ndarray, curves: Sequence[Curve], n: int = 4096) -> np.ndarray:
    """Distance from each point to the nearest curve, by dense sampling."""
    points = np.asarray(points, dtype=float)
    t = 2 * np.pi * np.arange(n) / n
    samples = np.vstack([c.derivatives(t)[0] for c in curves])
    best, _ = cKDTree(samples).query(points.reshape(-1, 2))
    return best.reshape(points.shape[:-1])


def inside_any(points: np.ndarray, curves: Sequence[Curve], n: int = 1024) -> np.ndarray:
    """Point-in-polygon test against a fine polygonal approximation."""
    points = np.asarray(points, dtype=float)
    flat = points.reshape(-1, 2)
    out = np.zeros(len(flat), dtype=bool)
    t = 2 * np.pi * np.arange(n) / n
    for c in curves:
        x, _, _ = c.derivatives(t)
        xa, xb = x, np.roll(x, -1, axis=0)
        px, py = flat[:, None, 0], flat[:, None, 1]
        cond = (xa[None, :, 1] > py) != (xb[None, :, 1] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = xa[None, :, 0] + (py - xa[None, :, 1]) * (xb[None, :, 0] - xa[None, :, 0]) / (
                xb[None, :, 1] - xa[None, :, 1]
            )
        crossings = np.sum(cond & (px < xint), axis=1)
        out |= crossings % 2 == 1
    return out.reshape(points.shape[:-1])


# --------------------------------------------------------------------------
# plate boundary operators
# --------------------------------------------------------------------------


def _n(normal):
    normal = np.asarray(normal, dtype=float)
    return normal[..., 0], normal[..., 1]


def apply_M0(jet: Jet3, normal) -> np.ndarray:
    n1, n2 = _n(normal)
    return n1**2 * jet.xx + 2 * n1 * n2 * jet.xy + n2**2 * jet.yy


def apply_N0(jet: Jet3, normal) -> np.ndarray:
    n1, n2 = _n(normal)
    return -((jet.xx - jet.yy) * n1 * n2 - jet.xy * (n1**2 - n2**2))


def apply_M(jet: Jet3, normal, nu: float = DEFAULT_NU) -> np.ndarray:
    """Bending moment ``nu Delta v + (1 - nu) M0 v``."""
    return nu * jet.lap + (1 - nu) * apply_M0(jet, normal)


def apply_N(jet: Jet3, normal, curvature, nu: float = DEFAULT_NU) -> np.ndarray:
    """Transverse force ``-d_n Delta v - (1 - nu) d_s N0 v`` from third-order jets.

    ``d_s`` is the derivative along the curve in the direction
    ``tau = (-n2, n1)``; moving the frame contributes the curvature terms
    ``d_s n = kappa_c tau``.
    """
    n1, n2 = _n(normal)
    curvature = np.asarray(curvature, dtype=float)
    if jet.xxx is None:
        raise ContractError("transverse force needs third derivatives")
    t1, t2 = -n2, n1
    dn_lap = n1 * jet.lap_x + n2 * jet.lap_y
    # tangential derivatives of the second-derivative fields (v11 - v22) and v12
    ds_diff = t1 * (jet.xxx - jet.xyy) + t2 * (jet.xxy - jet.yyy)
    ds_mixed = t1 * jet.xxy + t2 * jet.xyy
    ds_n0 = -(ds_diff * n1 * n2 - ds_mixed * (n1**2 - n2**2))
    ds_n0 = ds_n0 - curvature * ((jet.xx - jet.yy) * (n1**2 - n2**2) + 4 * jet.xy * n1 * n2)
    return -dn_lap - (1 - nu) * ds_n0


def apply_N_spectral(jet: Jet3, nodes: BoundaryNodes, nu: float = DEFAULT_NU) -> np.ndarray:
    """Transverse force with ``d_s N0 v`` from spectral differentiation of
    ``N0 v`` samples along each closed component.

    The jet's leading axis runs over ``nodes``; trailing axes are carried
    through unchanged.
    """
    normals = _col_normals(nodes.normals, jet.xx)
    n0 = apply_N0(jet, normals)
    ds_n0 = np.empty_like(n0)
    for blk in nodes.blocks():
        ds_n0[blk] = spectral_diff(n0[blk], axis=0) / _col(nodes.jacobian[blk], n0[blk])
    dn_lap = normals[..., 0] * jet.lap_x + normals[..., 1] * jet.lap_y
    return -dn_lap - (1 - nu) * ds_n0


def _col(a, like):
    """Reshape a per-node vector to broadcast along the leading axis of ``like``."""
    like = np.asarray(like)
    return np.asarray(a).reshape((-1,) + (1,) * (like.ndim - 1))


def _col_normals(normals, like):
    """Reshape ``(n, 2)`` normals to ``(n, 1, ..., 2)`` matching ``like``'s rank."""
    like = np.asarray(like)
    return np.asarray(normals).reshape((-1,) + (1,) * (like.ndim - 1) + (2,))


# --------------------------------------------------------------------------
# polar forms on circles centered at the origin
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarDerivatives:
    """Polar-coordinate data needed by the polar M and N formulas.

    ``w_thth = d^2 w / d theta^2`` and
    ``g_th = d/d theta (d^2 w / dr d theta - (1/r) dw/d theta)``.
    """

    r: np.ndarray
    lap: np.ndarray
    w_r: np.ndarray
    w_thth: np.ndarray
    dr_lap: np.ndarray
    g_th: np.ndarray


def polar_derivatives(jet: Jet3, points, radius: float | None = None) -> PolarDerivatives:
    """Polar derivatives from Cartesian jets at ``points`` (analytic)."""
    points = np.asarray(points, dtype=float)
    r = np.hypot(points[..., 0], points[..., 1])
    if radius is not None and np.any(np.abs(r - radius) > 1e-10 * max(radius, 1.0)):
        raise ContractError("polar boundary operators need nodes on a circle centered at the origin")
    c, s = points[..., 0] / r, points[..., 1] / r
    w_r = c * jet.x + s * jet.y
    h_rr = c * c * jet.xx + 2 * c * s * jet.xy + s * s * jet.yy
    h_tt = s * s * jet.xx - 2 * c * s * jet.xy + c * c * jet.yy
    # T(e_r, e_th, e_th) with e_r = (c, s), e_th = (-s, c)
    t_rtt = c * s * s * jet.xxx + (s**3 - 2 * c * c * s) * jet.xxy + (c**3 - 2 * c * s * s) * jet.xyy + c * c * s * jet.yyy
    w_thth = r**2 * h_tt - r * w_r
    g_th = r * (h_tt - h_rr) + r**2 * t_rtt
    dr_lap = c * jet.lap_x + s * jet.lap_y
    return PolarDerivatives(r, jet.lap, w_r, w_thth, dr_lap, g_th)


def polar_derivatives_spectral(w, w_r, lap, dr_lap, radius: float, axis: int = 0) -> PolarDerivatives:
    """Polar derivatives with every angular derivative taken spectrally from
    samples on ``N`` equispaced angles of the circle ``|x| = radius``."""
    w_th = spectral_diff(w, 1, axis)
    w_thth = spectral_diff(w, 2, axis)
    w_rth = spectral_diff(w_r, 1, axis)
    g_th = spectral_diff(w_rth - w_th / radius, 1, axis)
    r = np.full(np.shape(w), float(radius))
    return PolarDerivatives(r, np.asarray(lap), np.asarray(w_r), w_thth, np.asarray(dr_lap), g_th)


def apply_M_polar(pd: PolarDerivatives, nu: float = DEFAULT_NU) -> np.ndarray:
    """``Delta w - (1-nu)(w_r / r + w_thth / r^2)``."""
    return pd.lap - (1 - nu) * (pd.w_r / pd.r + pd.w_thth / pd.r**2)


def apply_N_polar(pd: PolarDerivatives, nu: float = DEFAULT_NU) -> np.ndarray:
    """``-d_r Delta w - (1-nu) r^-2 d_theta(w_r theta - w_theta / r)``."""
    return -pd.dr_lap - (1 - nu) * pd.g_th / pd.r**2


# --------------------------------------------------------------------------
# measurement arrays
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ArrayGeometry:
    """Receiver circle, source circle, and direction set on the unit circle.

    Sources sit at angles ``2 pi (k + source_offset) / N_s``; the default
    half-step stagger keeps receivers and sources apart when the two radii
    coincide.
    """

    R_r: float = 10.0
    R_s: float = 10.0
    N_r: int = 128
    N_s: int = 128
    N_dir: int = 128
    source_offset: float = 0.5

    def __post_init__(self):
        if self.R_r <= 0 or self.R_s <= 0:
            raise GeometryError("array radii must be positive")
        for n in (self.N_r, self.N_s, self.N_dir):
            if n < 1:
                raise GeometryError("point counts must be positive")

    @staticmethod
    def _ring(n, radius=1.0, offset=0.0):
        th = 2 * np.pi * (np.arange(n) + offset) / n
        return radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    @property
    def receivers(self) -> np.ndarray:
        return self._ring(self.N_r, self.R_r)

    @property
    def sources(self) -> np.ndarray:
        return self._ring(self.N_s, self.R_s, self.source_offset)

    @property
    def directions(self) -> np.ndarray:
        return self._ring(self.N_dir)

    @property
    def receiver_weight(self) -> float:
        return 2 * np.pi * self.R_r / self.N_r

    @property
    def source_weight(self) -> float:
        return 2 * np.pi * self.R_s / self.N_s

    @property
    def direction_weight(self) -> float:
        return 2 * np.pi / self.N_dir

    def check_contains(self, bounds) -> None:
        """Raise unless the closed box ``bounds`` lies strictly inside both circles."""
        xmin, xmax, ymin, ymax = bounds
        far = max(np.hypot(x, y) for x in (xmin, xmax) for y in (ymin, ymax))
        if far >= min(self.R_r, self.R_s):
            raise GeometryError(f"sampling domain reaches radius {far:.3g}, not inside the arrays")
