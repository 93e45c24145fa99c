"""Plain-text persistence for :class:`~bhm.forward.DataMatrix`.

Line 1::

    bhm-data v1; <kind>; <excitation>; <N_rows>; <N_cols>; <kappa>; <nu>; <R_r>; <R_s>; source_offset=<f>

followed by one line per entry in row-major order, ``row col re im`` for
complex data or ``row col value`` for total-field magnitudes.  Floats are
written with 17 significant digits so a round trip is bit-exact.  The
trailing ``source_offset`` field is optional on input (default 0.5).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from ..forward import EXCITATIONS, KINDS, DataMatrix
from ..geometry import ArrayGeometry
from ..specfun import WaveParams

MAGIC = "bhm-data v1"


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def save_matrix(data: DataMatrix, path) -> None:
    a = data.array
    rows, cols = data.values.shape
    header = "; ".join(
        [MAGIC, data.kind, data.excitation, str(rows), str(cols), repr(float(data.params.kappa)),
         repr(float(data.params.nu)), repr(float(a.R_r)), repr(float(a.R_s)), f"source_offset={a.source_offset!r}"]
    )
    lines = [header]
    v = data.values
    if data.is_complex:
        for i in range(rows):
            for j in range(cols):
                lines.append(f"{i} {j} {_fmt(v[i, j].real)} {_fmt(v[i, j].imag)}")
    else:
        for i in range(rows):
            for j in range(cols):
                lines.append(f"{i} {j} {_fmt(v[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _float(text: str, line: int, what: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise DataFormatError(f"cannot parse {what} {text!r}", line) from None
    if not np.isfinite(x):
        raise DataFormatError(f"non-finite {what}", line)
    return x


def _int(text: str, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataFormatError(f"cannot parse {what} {text!r}", line) from None


def _array_for(kind, excitation, rows, cols, R_r, R_s, offset) -> ArrayGeometry:
    n_dir = rows if kind == "far" else (cols if excitation == "plane" else 128)
    n_r = rows if kind != "far" else 128
    n_s = cols if excitation == "point" else 128
    return ArrayGeometry(R_r=R_r, R_s=R_s, N_r=n_r, N_s=n_s, N_dir=n_dir, source_offset=offset)


def load_matrix(path) -> DataMatrix:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise DataFormatError("empty file", 1)
    fields = [f.strip() for f in lines[0].split(";")]
    if len(fields) not in (9, 10) or fields[0] != MAGIC:
        raise DataFormatError("malformed header", 1)
    kind, excitation = fields[1], fields[2]
    if kind not in KINDS:
        raise DataFormatError(f"unknown data kind {kind!r}", 1)
    if excitation not in EXCITATIONS:
        raise DataFormatError(f"unknown excitation {excitation!r}", 1)
    rows, cols = _int(fields[3], 1, "row count"), _int(fields[4], 1, "column count")
    if rows < 1 or cols < 1:
        raise DataFormatError("matrix dimensions must be positive", 1)
    kappa, nu, R_r, R_s = (_float(f, 1, name) for f, name in zip(fields[5:9], ("kappa", "nu", "R_r", "R_s")))
    offset = 0.5
    if len(fields) == 10:
        key, _, val = fields[9].partition("=")
        if key.strip() != "source_offset":
            raise DataFormatError(f"unknown header field {fields[9]!r}", 1)
        offset = _float(val, 1, "source_offset")

    complex_kind = kind != "abs_total"
    width = 4 if complex_kind else 3
    values = np.zeros((rows, cols), dtype=complex if complex_kind else float)
    seen = np.zeros((rows, cols), dtype=bool)
    body = lines[1:]
    for n, raw in enumerate(body, start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != width:
            raise DataFormatError(f"expected {width} fields, found {len(parts)}", n)
        i, j = _int(parts[0], n, "row index"), _int(parts[1], n, "column index")
        if not (0 <= i < rows and 0 <= j < cols):
            raise DataFormatError(f"entry ({i}, {j}) outside a {rows}x{cols} matrix", n)
        if seen[i, j]:
            raise DataFormatError(f"duplicate entry ({i}, {j})", n)
        seen[i, j] = True
        if complex_kind:
            values[i, j] = complex(_float(parts[2], n, "real part"), _float(parts[3], n, "imaginary part"))
        else:
            x = _float(parts[2], n, "value")
            if x < 0:
                raise DataFormatError("magnitude must be nonnegative", n)
            values[i, j] = x
    missing = rows * cols - int(seen.sum())
    if missing:
        raise DataFormatError(f"truncated: {missing} of {rows * cols} entries missing", len(lines) + 1)
    try:
        params = WaveParams(kappa, nu)
        array = _array_for(kind, excitation, rows, cols, R_r, R_s, offset)
        return DataMatrix(kind, excitation, values, array, params)
    except ValueError as exc:
        raise DataFormatError(str(exc), 1) from None
