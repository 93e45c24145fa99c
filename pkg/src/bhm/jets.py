"""Third-order jets: a field value together with every Cartesian partial
derivative of total order <= 3, stored as broadcastable arrays."""

from __future__ import annotations

from dataclasses import dataclass, fields
from math import comb

import numpy as np

from .errors import SingularityError

__all__ = ["Jet3", "MULTI_INDICES", "SingularityError", "radial_jet", "jet_from_wirtinger"]

# (a1, a2) -> attribute name; a1 counts d/dx1, a2 counts d/dx2
MULTI_INDICES: dict[tuple[int, int], str] = {
    (0, 0): "v",
    (1, 0): "x",
    (0, 1): "y",
    (2, 0): "xx",
    (1, 1): "xy",
    (0, 2): "yy",
    (3, 0): "xxx",
    (2, 1): "xxy",
    (1, 2): "xyy",
    (0, 3): "yyy",
}


@dataclass(frozen=True)
class Jet3:
    v: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xx: np.ndarray
    xy: np.ndarray
    yy: np.ndarray
    xxx: np.ndarray
    xxy: np.ndarray
    xyy: np.ndarray
    yyy: np.ndarray

    def __getitem__(self, alpha: tuple[int, int]) -> np.ndarray:
        return getattr(self, MULTI_INDICES[alpha])

    @classmethod
    def from_dict(cls, parts: dict[tuple[int, int], np.ndarray]) -> "Jet3":
        return cls(**{name: np.asarray(parts[a]) for a, name in MULTI_INDICES.items()})

    @classmethod
    def zeros(cls, shape=(), dtype=complex) -> "Jet3":
        return cls(**{name: np.zeros(shape, dtype=dtype) for name in MULTI_INDICES.values()})

    def _map(self, fn) -> "Jet3":
        return Jet3(**{f.name: fn(getattr(self, f.name)) for f in fields(self)})

    def _zip(self, other: "Jet3", fn) -> "Jet3":
        return Jet3(**{f.name: fn(getattr(self, f.name), getattr(other, f.name)) for f in fields(self)})

    def __add__(self, other: "Jet3") -> "Jet3":
        return self._zip(other, np.add)

    def __sub__(self, other: "Jet3") -> "Jet3":
        return self._zip(other, np.subtract)

    def __neg__(self) -> "Jet3":
        return self._map(np.negative)

    def __mul__(self, c) -> "Jet3":
        return self._map(lambda a: a * c)

    __rmul__ = __mul__

    def conj(self) -> "Jet3":
        return self._map(np.conj)

    def dot(self, coeffs: np.ndarray) -> "Jet3":
        """Contract the trailing axis of every entry with ``coeffs``."""
        return self._map(lambda a: a @ coeffs)

    def sum(self, axis=-1) -> "Jet3":
        return self._map(lambda a: a.sum(axis=axis))

    def take(self, index) -> "Jet3":
        return self._map(lambda a: a[index])

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.v)

    @property
    def lap(self) -> np.ndarray:
        return self.xx + self.yy

    @property
    def lap_x(self) -> np.ndarray:
        return self.xxx + self.xyy

    @property
    def lap_y(self) -> np.ndarray:
        return self.xxy + self.yyy

    def normal_derivative(self, normal: np.ndarray) -> np.ndarray:
        normal = np.asarray(normal)
        return normal[..., 0] * self.x + normal[..., 1] * self.y


def radial_jet(f0, f1, f2, f3, d: np.ndarray) -> Jet3:
    """Jet of ``f(|d|)`` from the radial derivatives ``f0..f3`` at ``r = |d|``.

    Uses the chain rule through ``e = d / r``::

        d_i f      = f' e_i
        d_ij f     = f'' e_i e_j + (f'/r)(delta_ij - e_i e_j)
        d_ijk f    = f''' e_i e_j e_k
                     + (f''/r - f'/r^2)(delta_ij e_k + delta_ik e_j + delta_jk e_i - 3 e_i e_j e_k)
    """
    r = np.hypot(d[..., 0], d[..., 1])
    e1, e2 = d[..., 0] / r, d[..., 1] / r
    g = f1 / r
    a = f2 / r - f1 / r**2
    e = (e1, e2)

    def second(i, j):
        delta = 1.0 if i == j else 0.0
        return f2 * e[i] * e[j] + g * (delta - e[i] * e[j])

    def third(i, j, k):
        dij = 1.0 if i == j else 0.0
        dik = 1.0 if i == k else 0.0
        djk = 1.0 if j == k else 0.0
        eee = e[i] * e[j] * e[k]
        return f3 * eee + a * (dij * e[k] + dik * e[j] + djk * e[i] - 3.0 * eee)

    return Jet3(
        v=f0 * np.ones_like(r),
        x=f1 * e1,
        y=f1 * e2,
        xx=second(0, 0),
        xy=second(0, 1),
        yy=second(1, 1),
        xxx=third(0, 0, 0),
        xxy=third(0, 0, 1),
        xyy=third(0, 1, 1),
        yyy=third(1, 1, 1),
    )


def jet_from_wirtinger(w: dict[tuple[int, int], np.ndarray]) -> Jet3:
    """Convert complex-derivative data to Cartesian partials.

    ``w[(a, b)]`` holds ``D^a Dbar^b f`` with ``D = d1 + i d2`` and
    ``Dbar = d1 - i d2``; then ``d1 = (D + Dbar)/2``, ``d2 = (D - Dbar)/(2i)``.
    """
    parts = {}
    for (p, q) in MULTI_INDICES:
        acc = 0.0
        # (D + Dbar)^p (D - Dbar)^q / (2^p (2i)^q)
        for k in range(p + 1):
            for m in range(q + 1):
                coeff = comb(p, k) * comb(q, m) * (-1) ** (q - m)
                a = k + m
                b = (p - k) + (q - m)
                acc = acc + coeff * w[(a, b)]
        parts[(p, q)] = acc / (2.0**p * (2.0j) ** q)
    return Jet3.from_dict(parts)
