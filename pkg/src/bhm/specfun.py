"""Cylinder functions and the Helmholtz / modified-Helmholtz / biharmonic
fundamental solutions, with analytic Cartesian derivatives through order 3.

Conventions::

    Phi_k(x, y)   = (i/4) H0(k |x-y|)          (Delta + k^2) Phi_k   = -delta
    Phi_ik(x, y)  = (i/4) H0(i k |x-y|)
                  = K0(k |x-y|) / (2 pi)       (Delta - k^2) Phi_ik  = -delta
    G(x, y)       = (Phi_ik - Phi_k) / (2 k^2) (Delta^2 - k^4) G     = -delta
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, RangeError, SingularityError
from .jets import Jet3, radial_jet

SINGULAR_RADIUS = 1e-12
MAX_ORDER = 200


@dataclass(frozen=True)
class WaveParams:
    """Wavenumber ``kappa`` and Poisson ratio ``nu`` of the plate."""

    kappa: float
    nu: float = 0.25

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not (0.0 <= self.nu < 0.5):
            raise DomainError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")


class KernelKind(enum.Enum):
    HELMHOLTZ = "helmholtz"
    MODIFIED = "modified"
    BIHARMONIC = "biharmonic"


def _check_args(order, t):
    if int(order) != order or order < 0 or order > MAX_ORDER:
        raise DomainError(f"order must be an integer in [0, {MAX_ORDER}], got {order}")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("Bessel argument must be positive")
    return int(order), t


def bessel_eval(kind: str, order: int, t):
    """J, Y, I or K of integer ``order`` at positive real ``t``."""
    order, t = _check_args(order, t)
    if kind == "J":
        out = special.jv(order, t)
    elif kind == "Y":
        out = special.yv(order, t)
    elif kind == "I":
        out = special.iv(order, t)
        if np.any(np.isinf(out)):
            raise RangeError(f"I_{order} overflows at t = {np.max(t):g}", saturated=True)
    elif kind == "K":
        out = special.kv(order, t)
        if np.any(np.isinf(out)):
            raise RangeError(f"K_{order} overflows at t = {np.min(t):g}", saturated=True)
    else:
        raise DomainError(f"unknown cylinder function {kind!r}")
    return out[()] if np.ndim(out) == 0 else out


def bessel_deriv(kind: str, order: int, t, n: int = 1):
    """``n``-th derivative in ``t`` of :func:`bessel_eval`."""
    order, t = _check_args(order, t)
    fn = {"J": special.jvp, "Y": special.yvp, "I": special.ivp, "K": special.kvp}[kind]
    out = fn(order, t, n)
    return out[()] if np.ndim(out) == 0 else out


def hankel1(order: int, t):
    """Hankel function of the first kind, ``J_n(t) + i Y_n(t)``."""
    order, t = _check_args(order, t)
    out = special.hankel1(order, t)
    return out[()] if np.ndim(out) == 0 else out


def hankel1_imag_axis(order: int, t):
    """``H_n^(1)(i t)`` for real ``t > 0``, routed through ``K_n``.

    ``H_n^(1)(i t) = (2 / (i pi)) i^(-n) K_n(t)``.
    """
    order, t = _check_args(order, t)
    return (2.0 / (1j * np.pi)) * (-1j) ** order * special.kv(order, t)


def radial_derivatives(kind: KernelKind, kappa: float, r) -> tuple:
    """Value and first three ``r``-derivatives of the radial kernel profile."""
    r = np.asarray(r, dtype=float)
    # derivatives from orders 0 and 1 via the recurrences, two evaluations instead of ten
    if kind is KernelKind.HELMHOLTZ:
        z = kappa * r
        h0, h1 = special.hankel1(0, z), special.hankel1(1, z)
        d = (h0, -h1, h1 / z - h0, h1 + h0 / z - 2 * h1 / z**2)
        return tuple(0.25j * kappa**m * f for m, f in enumerate(d))
    if kind is KernelKind.MODIFIED:
        z = kappa * r
        k0, k1 = special.kv(0, z), special.kv(1, z)
        d = (k0, -k1, k0 + k1 / z, -k1 - k0 / z - 2 * k1 / z**2)
        return tuple(kappa**m * f / (2 * np.pi) for m, f in enumerate(d))
    if kind is KernelKind.BIHARMONIC:
        h = radial_derivatives(KernelKind.HELMHOLTZ, kappa, r)
        k = radial_derivatives(KernelKind.MODIFIED, kappa, r)
        c = 1.0 / (2.0 * kappa**2)
        return tuple(c * (km - hm) for km, hm in zip(k, h))
    raise DomainError(f"unknown kernel kind {kind!r}")


def _separation(x, y):
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r < SINGULAR_RADIUS):
        raise SingularityError("kernel evaluated at coincident points")
    return d, r


def kernel(kind: KernelKind, params: WaveParams, x, y) -> np.ndarray:
    """Kernel value only (broadcast over the leading axes of ``x`` and ``y``)."""
    _, r = _separation(x, y)
    z = params.kappa * r
    if kind is KernelKind.HELMHOLTZ:
        return 0.25j * special.hankel1(0, z)
    if kind is KernelKind.MODIFIED:
        return special.kv(0, z) / (2 * np.pi) + 0j
    if kind is KernelKind.BIHARMONIC:
        return (special.kv(0, z) / (2 * np.pi) - 0.25j * special.hankel1(0, z)) / (2 * params.kappa**2)
    raise DomainError(f"unknown kernel kind {kind!r}")


def kernel_jet(kind: KernelKind, params: WaveParams, x, y) -> Jet3:
    """Kernel value and all x-derivatives through order 3.

    ``x`` and ``y`` are arrays of points with a trailing axis of length 2 and
    broadcast against each other.  Derivatives in ``y`` follow from
    ``kernel_jet(kind, params, y, x)`` since every kernel is radial.
    """
    d, r = _separation(x, y)
    f = radial_derivatives(kind, params.kappa, r)
    return radial_jet(*f, d)


def pde_residual_check(kind: KernelKind, params: WaveParams, x, y, h: float) -> float:
    """Finite-difference residual of the kernel's own PDE at ``x``.

    Helmholtz: ``(Delta + k^2)``; modified: ``(Delta - k^2)``; biharmonic:
    ``(Delta^2 - k^4)``, all with the 5-point Laplacian (O(h^2)).
    """
    x = np.asarray(x, dtype=float)
    offs = np.arange(-2, 3)
    ii, jj = np.meshgrid(offs, offs, indexing="ij")
    pts = x + h * np.stack([ii, jj], axis=-1)
    f = kernel(kind, params, pts, y)

    def lap(a):
        return (a[2:, 1:-1] + a[:-2, 1:-1] + a[1:-1, 2:] + a[1:-1, :-2] - 4 * a[1:-1, 1:-1]) / h**2

    k2 = params.kappa**2
    if kind is KernelKind.BIHARMONIC:
        res = lap(lap(f))[0, 0] - k2**2 * f[2, 2]
    elif kind is KernelKind.HELMHOLTZ:
        res = lap(f)[1, 1] + k2 * f[2, 2]
    else:
        res = lap(f)[1, 1] - k2 * f[2, 2]
    return float(abs(res))
