"""Multiplicative complex noise with a reproducible counter-based RNG.

Algorithm (so seeds reproduce outside numpy):

* uniforms come from Philox4x64-10 keyed by ``(seed, stream)`` with the
  counter starting at zero, converted to doubles as ``(x >> 11) * 2**-53``
  (numpy's ``Generator.random``);
* consecutive uniform pairs ``(u1, u2)`` map to ``v = 2u - 1``; pairs with
  ``0 < s = v1^2 + v2^2 < 1`` are accepted in stream order (Marsaglia's polar
  method) and give ``xi = v * sqrt(-2 ln s / s)``;
* entry ``m`` of a matrix (row-major) uses the ``m``-th accepted pair.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ContractError, DomainError
from ..forward import DataMatrix

_BATCH = 4096


@dataclass(frozen=True)
class NoiseSpec:
    delta: float = 0.0
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not (self.delta >= 0 and np.isfinite(self.delta)):
            raise DomainError(f"noise level must be nonnegative, got {self.delta}")
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise DomainError("seed and stream must be 64-bit unsigned integers")


def gaussian_pairs(n: int, seed: int, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``n`` standard normal pairs ``(xi1, xi2)`` by the polar method."""
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))
    got1, got2, have = [], [], 0
    while have < n:
        u = gen.random(2 * _BATCH).reshape(-1, 2)
        v = 2.0 * u - 1.0
        s = v[:, 0] ** 2 + v[:, 1] ** 2
        ok = (s > 0) & (s < 1)
        v, s = v[ok], s[ok]
        f = np.sqrt(-2.0 * np.log(s) / s)
        got1.append(v[:, 0] * f)
        got2.append(v[:, 1] * f)
        have += len(s)
    return np.concatenate(got1)[:n], np.concatenate(got2)[:n]


def _perturb(values: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    xi1, xi2 = gaussian_pairs(values.size, spec.seed, spec.stream)
    xi = (xi1 + 1j * xi2).reshape(values.shape)
    return values + spec.delta * np.abs(values) * xi / np.abs(xi)


def add_noise(data: DataMatrix, spec: NoiseSpec) -> DataMatrix:
    """``u + delta |u| (xi1 + i xi2) / |xi1 + i xi2|`` entrywise.

    Phaseless data are perturbed through the complex total field, then the
    magnitude is taken.
    """
    if spec.delta == 0:
        return replace(data, values=data.values.copy(), total=None if data.total is None else data.total.copy())
    if data.kind == "abs_total":
        if data.total is None:
            raise ContractError("phaseless data without its total field cannot be perturbed")
        total = _perturb(data.total, spec)
        return replace(data, values=np.abs(total), total=total)
    return replace(data, values=_perturb(data.values, spec))
