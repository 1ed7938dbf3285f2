"""File formats: binary tensors/masks, long CSV, key=value configs, reports.

Binary layout (all little-endian)::

    offset  size  field
    0       4     magic, b"TSR3" (tensor) or b"MSK3" (mask)
    4       4     version, uint32 = 1
    8       24    dims, 3 x uint64
    32      ...   payload: float64 per entry (tensor) or one byte in {0, 1}
                  per entry (mask), row-major over (interval, location, day)

Report records are ``key=value`` lines in a fixed key order; ``wall_time``
is the only field that varies between identical runs.
"""

from __future__ import annotations

import csv
import json
import math
import os
import struct
from dataclasses import asdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, FormatError, ParameterError, TruncationError
from .tensor_core import MaskTensor, Tensor3, _check_dims

TENSOR_MAGIC = b"TSR3"
MASK_MAGIC = b"MSK3"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sI3Q")
HEADER_SIZE = _HEADER.size

CSV_COLUMNS = ("interval", "location", "day", "value")


def _write_binary(path, magic: bytes, dims, payload: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, FORMAT_VERSION, *dims))
        fh.write(payload)


def _read_binary(path, magic: bytes, itemsize: int):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise TruncationError(HEADER_SIZE, len(raw))
    got_magic, version, *dims = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise FormatError(f"bad magic {got_magic!r}, expected {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}, expected {FORMAT_VERSION}", offset=4)
    try:
        dims = _check_dims(dims)
    except DimensionError as exc:
        raise FormatError(str(exc), offset=8) from None
    expected = dims[0] * dims[1] * dims[2] * itemsize
    payload = raw[HEADER_SIZE:]
    if len(payload) != expected:
        raise TruncationError(HEADER_SIZE + expected, len(raw))
    return dims, payload


def write_tensor(path, t: Tensor3) -> None:
    t = t if isinstance(t, Tensor3) else Tensor3(t)
    _write_binary(path, TENSOR_MAGIC, t.dims, t.flat().astype("<f8").tobytes())


def read_tensor(path) -> Tensor3:
    dims, payload = _read_binary(path, TENSOR_MAGIC, 8)
    values = np.frombuffer(payload, dtype="<f8")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError("non-finite tensor value", offset=HEADER_SIZE + 8 * int(bad[0]))
    return Tensor3(values.astype(np.float64).reshape(dims))


def write_mask(path, m: MaskTensor) -> None:
    m = m if isinstance(m, MaskTensor) else MaskTensor(m)
    _write_binary(path, MASK_MAGIC, m.dims, np.asarray(m).astype(np.uint8).tobytes())


def read_mask(path) -> MaskTensor:
    dims, payload = _read_binary(path, MASK_MAGIC, 1)
    bits = np.frombuffer(payload, dtype=np.uint8)
    bad = np.flatnonzero(bits > 1)
    if bad.size:
        raise FormatError(
            f"mask byte {int(bits[bad[0]])} not in {{0, 1}}", offset=HEADER_SIZE + int(bad[0])
        )
    return MaskTensor(bits.reshape(dims))


def parse_dims(text: str) -> Tuple[int, int, int]:
    try:
        dims = tuple(int(x) for x in str(text).split(","))
    except ValueError:
        raise ParameterError(f"dims must look like n1,n2,n3, got {text!r}") from None
    return _check_dims(dims)


def ingest_csv(path, dims: Optional[Sequence[int]] = None) -> Tuple[Tensor3, MaskTensor]:
    """Load a long-format ``interval,location,day,value`` CSV.

    Lines starting with ``#`` are comments; ``# dims=n1,n2,n3`` declares
    the extents when ``dims`` is not given. Absent keys and empty values
    become unobserved entries holding 0.
    """
    declared = None
    rows: List[Tuple[int, List[str]]] = []
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped[1:].strip()
                if body.startswith("dims="):
                    declared = parse_dims(body[len("dims="):])
                continue
            fields = next(csv.reader([stripped]))
            if not header_seen:
                if tuple(f.strip().lower() for f in fields) != CSV_COLUMNS:
                    raise FormatError(f"line {lineno}: expected header {','.join(CSV_COLUMNS)}")
                header_seen = True
                continue
            rows.append((lineno, fields))
    if not header_seen:
        raise FormatError(f"{path}: missing header {','.join(CSV_COLUMNS)}")
    if dims is None:
        if declared is None:
            raise ParameterError("dims not given and no '# dims=' line in the CSV")
        dims = declared
    dims = _check_dims(dims)

    values = np.zeros(dims)
    observed = np.zeros(dims, dtype=np.uint8)
    seen = {}
    for lineno, fields in rows:
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            idx = tuple(int(f) for f in fields[:3])
        except ValueError:
            raise FormatError(f"line {lineno}: indices must be integers") from None
        if any(not 0 <= i < d for i, d in zip(idx, dims)):
            raise FormatError(f"line {lineno}: index {idx} outside dims {dims}")
        if idx in seen:
            raise FormatError(f"line {lineno}: duplicate key {idx} (first on line {seen[idx]})")
        seen[idx] = lineno
        raw = fields[3].strip()
        if raw == "":
            continue
        try:
            v = float(raw)
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse value {raw!r}") from None
        if not math.isfinite(v):
            raise FormatError(f"line {lineno}: non-finite value {raw!r}")
        values[idx] = v
        observed[idx] = 1
    return Tensor3(values), MaskTensor(observed)


def write_csv(path, t: Tensor3, mask: Optional[MaskTensor] = None) -> None:
    """Inverse of :func:`ingest_csv`; unobserved entries are omitted."""
    data = np.asarray(t)
    keep = np.ones(data.shape, bool) if mask is None else np.asarray(mask).astype(bool)
    with open(path, "w", newline="") as fh:
        fh.write("# dims={},{},{}\n".format(*data.shape))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for idx in zip(*np.nonzero(keep)):
            w.writerow([*map(int, idx), repr(float(data[idx]))])


def read_key_values(path) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment line."""
    out: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}: line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in out:
                raise FormatError(f"{path}: line {lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_format_value(x) for x in v)
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def report_record(fields: Dict[str, object]) -> str:
    """Serialize a flat or one-level-nested mapping as ``key=value`` lines."""
    lines = []
    for key, value in fields.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                lines.append(f"{sub}={_format_value(v)}")
        elif value is None:
            continue
        else:
            lines.append(f"{key}={_format_value(value)}")
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "value"):
        return v.value
    return v


def write_report(path, fields: Dict[str, object], as_json: bool = False) -> None:
    text = (
        json.dumps(_jsonable(fields), indent=2) + "\n" if as_json else report_record(fields)
    )
    with open(path, "w") as fh:
        fh.write(text)


def read_report(path) -> Dict[str, str]:
    return read_key_values(path)


SWEEP_COLUMNS = (
    "index", "pattern", "rate", "p", "theta0", "beta", "repetition", "seed",
    "theta", "mae", "rmse", "masked_count", "realized_missing_rate",
    "iterations", "converged", "wall_time", "error",
)


def write_sweep_table(path, rows: Iterable) -> None:
    """Tab-separated table, one line per sweep row, header first."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            rep = row.report
            cells = {
                "index": row.index, "pattern": row.pattern, "rate": row.rate, "p": row.p,
                "theta0": row.theta0, "beta": row.beta, "repetition": row.repetition,
                "seed": row.seed, "error": row.error or "",
            }
            if rep is not None:
                cells.update(
                    theta=rep.theta, mae=rep.mae, rmse=rep.rmse, masked_count=rep.masked_count,
                    realized_missing_rate=rep.realized_missing_rate,
                    iterations=rep.iterations, converged=rep.converged, wall_time=rep.wall_time,
                )
            w.writerow([_format_value(cells[c]) if c in cells else "" for c in SWEEP_COLUMNS])


def read_sweep_table(path) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))
