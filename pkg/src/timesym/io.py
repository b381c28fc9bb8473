"""JSON file formats for maps, supermaps, states and instruments.

Complex numbers are ``[re, im]`` pairs of decimal strings with 17 significant
digits, which round-trip IEEE doubles exactly. Plain JSON numbers are accepted
on input. Every document carries ``format_version`` and ``kind``; parse errors
name the offending field path (and line/column for JSON syntax errors).
"""

from __future__ import annotations

import enum
import json
from pathlib import Path

import numpy as np

from timesym.errors import (
    DimensionMismatch,
    EmptyInstrument,
    InvalidKraus,
    InvalidState,
    InvariantViolation,
    NotCP,
    NotTraceNonIncreasing,
    NotUnitVector,
    ParseError,
)
from timesym.operations import Instrument, QuantumOperation, choi_from_kraus
from timesym.states import DensityMatrix
from timesym.symmetry import SuperMap

FORMAT_VERSION = "1.0"
KINDS = ("channel", "supermap", "state", "instrument")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[fmt(z.real), fmt(z.imag)] for z in row] for row in m]


def encode_vector(v) -> list:
    return [[fmt(z.real), fmt(z.imag)] for z in np.asarray(v, dtype=np.complex128).reshape(-1)]


def _number(x, path: str) -> float:
    if isinstance(x, bool):
        raise ParseError(f"{path}: expected a number, got a boolean", path=path)
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            pass
    raise ParseError(f"{path}: expected a decimal number, got {x!r}", path=path)


def _complex(x, path: str) -> complex:
    if not isinstance(x, list) or len(x) != 2:
        raise ParseError(f"{path}: expected a [re, im] pair, got {x!r}", path=path)
    return complex(_number(x[0], f"{path}[0]"), _number(x[1], f"{path}[1]"))


def decode_vector(data, path: str = "vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path}: expected a non-empty list of [re, im] pairs", path=path)
    return np.array([_complex(z, f"{path}[{i}]") for i, z in enumerate(data)], dtype=np.complex128)


def decode_matrix(data, path: str = "data", shape: tuple | None = None) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError(f"{path}: expected a non-empty list of rows", path=path)
    rows = [decode_vector(r, f"{path}[{i}]") for i, r in enumerate(data)]
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ParseError(f"{path}: rows have different lengths {sorted(width)}", path=path)
    m = np.array(rows)
    if shape is not None and m.shape != tuple(shape):
        raise ParseError(f"{path}: shape {m.shape} does not match the declared dimensions {tuple(shape)}",
                         path=path)
    return m


def _field(doc: dict, key: str, path: str = ""):
    if key not in doc:
        raise ParseError(f"{path}{key}: required field missing", path=f"{path}{key}")
    return doc[key]


def _dim(doc: dict, key: str, path: str = "") -> int:
    v = _field(doc, key, path)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{path}{key}: expected a positive integer, got {v!r}", path=f"{path}{key}")
    return v


def _dims_pair(doc: dict, key: str) -> tuple[int, int]:
    v = _field(doc, key)
    if not isinstance(v, list) or len(v) != 2 or any(isinstance(x, bool) or not isinstance(x, int) or x < 1 for x in v):
        raise ParseError(f"{key}: expected two positive integers, got {v!r}", path=key)
    return int(v[0]), int(v[1])


def _invariant(exc: Exception, what: str) -> InvariantViolation:
    details = dict(getattr(exc, "details", {}))
    return InvariantViolation(f"{what} violates {type(exc).__name__}: {exc}", invariant=type(exc).__name__, **details)


# ---------------------------------------------------------------------------
# documents


def read_document(path, kind: str | None = None) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})", path=str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object", path="")
    version = _field(doc, "format_version")
    if str(version).split(".")[0] != FORMAT_VERSION.split(".")[0]:
        raise ParseError(f"format_version: unsupported version {version!r}", path="format_version")
    found = _field(doc, "kind")
    if found not in KINDS:
        raise ParseError(f"kind: unknown kind {found!r}", path="kind")
    if kind is not None and found != kind:
        raise ParseError(f"kind: expected {kind!r}, got {found!r}", path="kind")
    return doc


def write_document(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _operation_from_fields(doc: dict, d_in: int, d_out: int, path: str = "") -> QuantumOperation:
    rep = _field(doc, "representation", path)
    data = _field(doc, "data", path)
    try:
        if rep == "choi":
            n = d_in * d_out
            choi = decode_matrix(data, f"{path}data", (n, n))
            return QuantumOperation(d_in, d_out, choi)
        if rep == "kraus":
            if not isinstance(data, list) or not data:
                raise ParseError(f"{path}data: expected a non-empty list of Kraus matrices", path=f"{path}data")
            ops = [decode_matrix(k, f"{path}data[{i}]", (d_out, d_in)) for i, k in enumerate(data)]
            return choi_from_kraus(ops)
    except (NotCP, NotTraceNonIncreasing, InvalidKraus) as exc:
        raise _invariant(exc, f"{path or 'operation'}") from exc
    raise ParseError(f"{path}representation: expected 'kraus' or 'choi', got {rep!r}", path=f"{path}representation")


def parse_channel(doc: dict) -> QuantumOperation:
    op = _operation_from_fields(doc, _dim(doc, "d_in"), _dim(doc, "d_out"))
    prov = {"name": doc.get("name", "")}
    return QuantumOperation(op.d_in, op.d_out, op.choi, prov)


def load_channel(path) -> QuantumOperation:
    return parse_channel(read_document(path, "channel"))


def channel_document(q, name: str = "", metadata: dict | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "channel",
        "name": name,
        "d_in": q.d_in,
        "d_out": q.d_out,
        "representation": "choi",
        "data": encode_matrix(q.choi),
        "metadata": jsonable(metadata or {}),
    }


def kraus_channel_document(ops, name: str = "", metadata: dict | None = None) -> dict:
    ops = [np.asarray(k, dtype=np.complex128) for k in ops]
    return {
        "format_version": FORMAT_VERSION,
        "kind": "channel",
        "name": name,
        "d_in": ops[0].shape[1],
        "d_out": ops[0].shape[0],
        "representation": "kraus",
        "data": [encode_matrix(k) for k in ops],
        "metadata": jsonable(metadata or {}),
    }


def parse_supermap(doc: dict) -> SuperMap:
    in_dims = _dims_pair(doc, "in_dims")
    out_dims = _dims_pair(doc, "out_dims")
    shape = ((out_dims[0] * out_dims[1]) ** 2, (in_dims[0] * in_dims[1]) ** 2)
    m = decode_matrix(_field(doc, "data"), "data", shape)
    return SuperMap(in_dims, out_dims, m, {"name": doc.get("name", "")})


def load_supermap(path) -> SuperMap:
    return parse_supermap(read_document(path, "supermap"))


def supermap_document(s: SuperMap, name: str = "", metadata: dict | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "supermap",
        "name": name,
        "in_dims": list(s.in_dims),
        "out_dims": list(s.out_dims),
        "data": encode_matrix(s.matrix),
        "metadata": jsonable(metadata or {}),
    }


def parse_state(doc: dict) -> DensityMatrix:
    d = _dim(doc, "dim")
    try:
        if "vector" in doc:
            v = decode_vector(doc["vector"], "vector")
            if v.size != d:
                raise ParseError(f"vector: length {v.size} does not match dim {d}", path="vector")
            return DensityMatrix.pure(v)
        return DensityMatrix(decode_matrix(_field(doc, "data"), "data", (d, d)))
    except (InvalidState, NotUnitVector) as exc:
        raise _invariant(exc, "state") from exc


def load_state(path) -> DensityMatrix:
    return parse_state(read_document(path, "state"))


def state_document(rho, name: str = "") -> dict:
    m = np.asarray(rho.mat if isinstance(rho, DensityMatrix) else rho)
    return {"format_version": FORMAT_VERSION, "kind": "state", "name": name, "dim": m.shape[0],
            "data": encode_matrix(m)}


def parse_instrument(doc: dict) -> Instrument:
    d_in, d_out = _dim(doc, "d_in"), _dim(doc, "d_out")
    branches = _field(doc, "branches")
    if not isinstance(branches, list):
        raise ParseError("branches: expected a list", path="branches")
    ops = []
    for i, b in enumerate(branches):
        if not isinstance(b, dict):
            raise ParseError(f"branches[{i}]: expected an object", path=f"branches[{i}]")
        ops.append(_operation_from_fields(b, d_in, d_out, f"branches[{i}]."))
    try:
        return Instrument(tuple(ops))
    except (EmptyInstrument, DimensionMismatch) as exc:
        raise _invariant(exc, "instrument") from exc


def load_instrument(path) -> Instrument:
    return parse_instrument(read_document(path, "instrument"))


def instrument_document(inst: Instrument, name: str = "", labels=None) -> dict:
    labels = labels or [str(n) for n in range(len(inst))]
    return {
        "format_version": FORMAT_VERSION,
        "kind": "instrument",
        "name": name,
        "d_in": inst.d_in,
        "d_out": inst.d_out,
        "branches": [
            {"label": lab, "representation": "choi", "data": encode_matrix(b.choi)}
            for lab, b in zip(labels, inst.branches)
        ],
    }


def jsonable(x):
    """Reports and metadata as JSON-ready values: arrays become ``[re, im]`` string matrices."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            return encode_matrix(x)
        if x.ndim == 1:
            return encode_vector(x)
        return jsonable(x.item())
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [fmt(x.real), fmt(x.imag)]
    return x
