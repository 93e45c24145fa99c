"""Flat ``key = value`` experiment configuration with dotted sections.

Example::

    scene.name = example1
    scene.kappa = 2*pi
    scene.bc = clamped
    scene.curves = c1
    curve.c1.kind = circle
    curve.c1.center = 0, 0
    curve.c1.radius = 1
    imaging.indicators = 1,2,3,4,5,6,7,8,9,10,11
    noise.delta = 0, 0.05, 0.1

Numbers may be arithmetic in ``pi`` (``2*pi``, ``pi/2``).  ``#`` starts a
comment.  Unknown keys are rejected.
"""

from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ContractError
from ..forward import BoundaryCondition, MfsConfig
from ..geometry import ArrayGeometry, Circle, Curve, Kite, TrigPolynomial
from ..imaging import INDICATORS, GridSpec
from ..specfun import WaveParams

_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos,
}
_NAMES = {"pi": 3.141592653589793}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or a small arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ContractError(f"not a number: {text!r}") from None


def _numbers(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _int(text: str) -> int:
    x = parse_number(text)
    if x != int(x):
        raise ContractError(f"expected an integer, got {text!r}")
    return int(x)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "scene"
    params: WaveParams = WaveParams(2 * 3.141592653589793)
    curves: tuple[Curve, ...] = (Circle(),)
    bc: BoundaryCondition = BoundaryCondition.CLAMPED
    array: ArrayGeometry = ArrayGeometry()
    indicators: tuple[int, ...] = tuple(range(1, 12))
    grid: GridSpec = GridSpec()
    normalization: str = "signed"
    deltas: tuple[float, ...] = (0.0,)
    seed: int = 0
    backend: str = "auto"
    mfs: MfsConfig | None = None
    out_dir: str = "out"

    def __post_init__(self):
        bad = [j for j in self.indicators if j not in INDICATORS]
        if bad:
            raise ContractError(f"unknown indicators {bad}")
        if any(d < 0 for d in self.deltas):
            raise ContractError("noise levels must be nonnegative")
        if self.normalization not in ("signed", "abs"):
            raise ContractError(f"unknown normalization {self.normalization!r}")
        if self.backend not in ("auto", "modal", "mfs"):
            raise ContractError(f"unknown backend {self.backend!r}")
        if any(j != 10 for j in self.indicators):
            self.array.check_contains(self.grid.bounds)

    def data_requests(self) -> list[tuple[str, str]]:
        """Distinct (kind, excitation) pairs in first-use order."""
        out = []
        for j in self.indicators:
            s = INDICATORS[j]
            if (s.kind, s.excitation) not in out:
                out.append((s.kind, s.excitation))
        return out


_TOP_KEYS = {
    "scene.name", "scene.kappa", "scene.nu", "scene.bc", "scene.curves",
    "array.R_r", "array.R_s", "array.N_r", "array.N_s", "array.N_dir", "array.source_offset",
    "imaging.indicators", "imaging.grid.bounds", "imaging.grid.n", "imaging.grid.nx", "imaging.grid.ny",
    "imaging.normalization", "noise.delta", "noise.seed", "forward.backend",
    "forward.mfs.offset", "forward.mfs.sources", "forward.mfs.collocation", "forward.mfs.placement",
    "forward.mfs.spacings", "forward.mfs.tolerance", "output.dir",
}
_CURVE_KEYS = {"kind", "center", "radius", "scale", "coefficients"}


def parse_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ContractError(f"config line {n}: expected key = value")
        parts = key.split(".")
        if key not in _TOP_KEYS and not (len(parts) == 3 and parts[0] == "curve" and parts[2] in _CURVE_KEYS):
            raise ContractError(f"config line {n}: unknown key {key!r}")
        if key in entries:
            raise ContractError(f"config line {n}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _curve(cid: str, e: dict[str, str]) -> Curve:
    def get(name, default=None):
        return e.get(f"curve.{cid}.{name}", default)

    kind = get("kind")
    if kind is None:
        raise ContractError(f"curve {cid!r} has no kind")
    center = get("center")
    c = tuple(_numbers(center)) if center else None
    if c is not None and len(c) != 2:
        raise ContractError(f"curve {cid!r}: center needs two numbers")
    if kind == "circle":
        return Circle(c or (0.0, 0.0), parse_number(get("radius", "1")))
    if kind == "kite":
        return Kite(c or (-0.65, 0.0), parse_number(get("scale", "1")))
    if kind == "trig":
        rows = [tuple(_numbers(r)) for r in get("coefficients", "").split(";") if r.strip()]
        if not rows or any(len(r) != 4 for r in rows):
            raise ContractError(f"curve {cid!r}: coefficients need rows of four numbers separated by ';'")
        return TrigPolynomial(tuple(rows), c or (0.0, 0.0))
    raise ContractError(f"curve {cid!r}: unknown kind {kind!r}")


def config_from_entries(e: dict[str, str]) -> ExperimentConfig:
    d = ExperimentConfig.__dataclass_fields__
    params = WaveParams(parse_number(e.get("scene.kappa", "2*pi")), parse_number(e.get("scene.nu", "0.25")))
    ids = [s.strip() for s in e.get("scene.curves", "").split(",") if s.strip()]
    curves = tuple(_curve(cid, e) for cid in ids)
    stray = {k.split(".")[1] for k in e if k.startswith("curve.")} - set(ids)
    if stray:
        raise ContractError(f"curves {sorted(stray)} are defined but not listed in scene.curves")
    a0 = ArrayGeometry()
    array = ArrayGeometry(
        R_r=parse_number(e.get("array.R_r", str(a0.R_r))),
        R_s=parse_number(e.get("array.R_s", str(a0.R_s))),
        N_r=_int(e.get("array.N_r", str(a0.N_r))),
        N_s=_int(e.get("array.N_s", str(a0.N_s))),
        N_dir=_int(e.get("array.N_dir", str(a0.N_dir))),
        source_offset=parse_number(e.get("array.source_offset", str(a0.source_offset))),
    )
    ind_text = e.get("imaging.indicators", "all")
    indicators = tuple(range(1, 12)) if ind_text.strip() == "all" else tuple(_int(t) for t in ind_text.split(","))
    g0 = GridSpec()
    n = e.get("imaging.grid.n")
    nx = _int(e.get("imaging.grid.nx", n or str(g0.nx)))
    ny = _int(e.get("imaging.grid.ny", n or str(g0.ny)))
    bounds = tuple(_numbers(e["imaging.grid.bounds"])) if "imaging.grid.bounds" in e else g0.bounds
    if len(bounds) != 4:
        raise ContractError("imaging.grid.bounds needs xmin, xmax, ymin, ymax")
    mfs = None
    mfs_keys = [k for k in e if k.startswith("forward.mfs.")]
    if mfs_keys:
        base = MfsConfig(placement=e.get("forward.mfs.placement", "shrink"))
        mfs = MfsConfig(
            offset=parse_number(e.get("forward.mfs.offset", str(base.offset))),
            sources=_int(e.get("forward.mfs.sources", str(base.sources))),
            collocation=_int(e.get("forward.mfs.collocation", str(base.collocation))),
            placement=base.placement,
            spacings=parse_number(e.get("forward.mfs.spacings", str(base.spacings))),
            tolerance=parse_number(e.get("forward.mfs.tolerance", str(base.tolerance))),
        )
    seed = _int(e.get("noise.seed", "0"))
    return ExperimentConfig(
        name=e.get("scene.name", d["name"].default),
        params=params,
        curves=curves,
        bc=BoundaryCondition.parse(e.get("scene.bc", "clamped")),
        array=array,
        indicators=indicators,
        grid=GridSpec(bounds, nx, ny),
        normalization=e.get("imaging.normalization", "signed"),
        deltas=tuple(_numbers(e.get("noise.delta", "0"))),
        seed=seed,
        backend=e.get("forward.backend", "auto"),
        mfs=mfs,
        out_dir=e.get("output.dir", d["out_dir"].default),
    )


def load_config(path) -> ExperimentConfig:
    return config_from_entries(parse_text(Path(path).read_text(encoding="utf-8")))
