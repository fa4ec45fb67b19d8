"""JSON model files.

A model file is a JSON object::

    {
      "basis": "pauli" | "gellmann" | "tensor_pauli",
      "d": 2,                      # or "n": 2 for tensor_pauli
      "parameters": {"x": 1.0},    # optional defaults, overridable in scans
      "A": [[...], ...],           # dense rows, or {"entries": [[i, j, value], ...]}
      "B": ..., "C": ...,          # omitted blocks are zero
      "h1": [...], "h2": [...],    # dense, or {"entries": [[i, value], ...]}
      "h12": [[...], ...]
    }

Indices are zero-based in the basis ordering. A complex value is written
``[re, im]``; a real value is a bare number. Any number may instead be a
string expression over the declared parameters using ``+``, ``-``, ``*`` and
parentheses, e.g. ``"1 + z"`` or ``"-2*x"``. Sparse entries are not mirrored,
so a Hermitian block lists both ``(i, j)`` and ``(j, i)``.
"""
from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .basis import BasisSet, basis_from_name
from .generator import GeneratorModel, HamiltonianSpec, KossakowskiBlocks

__all__ = [
    "ModelFileError",
    "ModelSpec",
    "parse_model",
    "load_model",
    "serialize",
    "model_to_spec",
    "evaluate_expression",
]

_HERM_TOL = 1e-12
_BLOCKS = ("A", "B", "C")
_VECTORS = ("h1", "h2")
_KNOWN_KEYS = {"basis", "d", "n", "parameters", "description", "h12", *_BLOCKS, *_VECTORS}


class ModelFileError(ValueError):
    """Malformed model file; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# --------------------------------------------------------------------------
# expressions
# --------------------------------------------------------------------------

_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}


def evaluate_expression(text: str, params: Mapping[str, float], path: str = "") -> float:
    """Evaluate ``text`` using only numbers, parameter names, ``+``, ``-`` and ``*``.

    >>> evaluate_expression("2*(1 + z)", {"z": -0.5})
    1.0
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ModelFileError(f"cannot parse expression {text!r}", path) from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise ModelFileError(f"unknown parameter {node.id!r} in {text!r}", path)
            return float(params[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ModelFileError(f"unsupported syntax in expression {text!r}", path)

    return ev(tree)


def _names_in(value) -> set[str]:
    if isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
        except SyntaxError:
            return set()
        return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}
    if isinstance(value, Mapping):
        return set().union(*(_names_in(v) for v in value.values())) if value else set()
    if isinstance(value, (list, tuple)):
        return set().union(*(_names_in(v) for v in value)) if value else set()
    return set()


def _real(value, params, path) -> float:
    if isinstance(value, bool):
        raise ModelFileError("expected a number", path)
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        out = evaluate_expression(value, params, path)
    else:
        raise ModelFileError(f"expected a real number or expression, got {type(value).__name__}", path)
    if not np.isfinite(out):
        raise ModelFileError("value is not finite", path)
    return out


def _complex(value, params, path) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ModelFileError("complex numbers are written [re, im]", path)
        return complex(_real(value[0], params, path + "[0]"), _real(value[1], params, path + "[1]"))
    return complex(_real(value, params, path), 0.0)


def _matrix(value, n, params, path, complex_entries=True) -> np.ndarray:
    conv = _complex if complex_entries else _real
    out = np.zeros((n, n), dtype=np.complex128 if complex_entries else np.float64)
    if isinstance(value, Mapping):
        extra = set(value) - {"entries"}
        if extra:
            raise ModelFileError(f"unexpected keys {sorted(extra)} in sparse matrix", path)
        entries = value.get("entries")
        if not isinstance(entries, list):
            raise ModelFileError("sparse matrix needs an 'entries' list", path)
        seen = set()
        for k, item in enumerate(entries):
            p = f"{path}.entries[{k}]"
            if not isinstance(item, list) or len(item) != 3:
                raise ModelFileError("sparse entries are [i, j, value]", p)
            i, j = _index(item[0], n, p + "[0]"), _index(item[1], n, p + "[1]")
            if (i, j) in seen:
                raise ModelFileError(f"duplicate entry ({i}, {j})", p)
            seen.add((i, j))
            out[i, j] = conv(item[2], params, p + "[2]")
        return out
    if not isinstance(value, list) or len(value) != n:
        raise ModelFileError(f"expected {n} rows", path)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise ModelFileError(f"expected {n} entries", f"{path}[{i}]")
        for j, v in enumerate(row):
            out[i, j] = conv(v, params, f"{path}[{i}][{j}]")
    return out


def _vector(value, n, params, path) -> np.ndarray:
    out = np.zeros(n)
    if isinstance(value, Mapping):
        entries = value.get("entries")
        if set(value) != {"entries"} or not isinstance(entries, list):
            raise ModelFileError("sparse vector is {'entries': [[i, value], ...]}", path)
        for k, item in enumerate(entries):
            p = f"{path}.entries[{k}]"
            if not isinstance(item, list) or len(item) != 2:
                raise ModelFileError("sparse vector entries are [i, value]", p)
            out[_index(item[0], n, p + "[0]")] = _real(item[1], params, p + "[1]")
        return out
    if not isinstance(value, list) or len(value) != n:
        raise ModelFileError(f"expected {n} entries", path)
    for i, v in enumerate(value):
        out[i] = _real(v, params, f"{path}[{i}]")
    return out


def _index(value, n, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < n:
        raise ModelFileError(f"index must be an integer in [0, {n})", path)
    return value


# --------------------------------------------------------------------------
# model spec
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Parsed but not yet instantiated model file.

    ``fields`` keeps the raw JSON values of the blocks and Hamiltonian terms so
    the document can be re-instantiated with new parameter values.
    """

    basis: BasisSet
    parameters: dict[str, float]
    fields: dict[str, Any]
    description: str = ""
    raw: dict[str, Any] = field(default_factory=dict)

    def instantiate(self, overrides: Mapping[str, float] | None = None) -> GeneratorModel:
        params = dict(self.parameters)
        for name, val in (overrides or {}).items():
            if name not in params:
                raise ModelFileError(f"unknown parameter {name!r}; the model declares {sorted(params)}")
            params[name] = float(val)
        n = self.basis.size
        blocks = {}
        for name in _BLOCKS:
            raw = self.fields.get(name)
            blocks[name] = np.zeros((n, n), dtype=np.complex128) if raw is None else _matrix(raw, n, params, name)
        for name in ("A", "C"):
            m = blocks[name]
            err = float(np.max(np.abs(m - m.conj().T)))
            if err > _HERM_TOL * max(1.0, float(np.max(np.abs(m)))):
                i, j = np.unravel_index(np.argmax(np.abs(m - m.conj().T)), m.shape)
                raise ModelFileError(
                    f"block is not Hermitian: entry ({i}, {j}) = {m[i, j]} but ({j}, {i}) = {m[j, i]}", name
                )
        vecs = {}
        for name in _VECTORS:
            raw = self.fields.get(name)
            vecs[name] = np.zeros(n) if raw is None else _vector(raw, n, params, name)
        raw = self.fields.get("h12")
        h12 = np.zeros((n, n)) if raw is None else _matrix(raw, n, params, "h12", complex_entries=False)
        return GeneratorModel(
            self.basis,
            KossakowskiBlocks(blocks["A"], blocks["B"], blocks["C"]),
            HamiltonianSpec(vecs["h1"], vecs["h2"], h12),
        )


def parse_model(doc: Any) -> ModelSpec:
    """Validate a decoded JSON document and return its :class:`ModelSpec`.

    The document is instantiated once at its default parameters so that shape
    and Hermiticity errors surface here rather than mid-computation.
    """
    if not isinstance(doc, Mapping):
        raise ModelFileError("model file must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ModelFileError(f"unknown keys {sorted(unknown)}")
    kind = doc.get("basis")
    if not isinstance(kind, str):
        raise ModelFileError("missing basis selector (pauli, gellmann or tensor_pauli)", "basis")
    for key in ("d", "n"):
        if key in doc and (isinstance(doc[key], bool) or not isinstance(doc[key], int)):
            raise ModelFileError("must be an integer", key)
    try:
        basis = basis_from_name(kind, doc.get("d"), doc.get("n"))
    except ValueError as exc:
        raise ModelFileError(str(exc), "basis") from exc
    params_raw = doc.get("parameters", {})
    if not isinstance(params_raw, Mapping):
        raise ModelFileError("parameters must be an object of name: number", "parameters")
    params = {}
    for name, val in params_raw.items():
        if not name.isidentifier():
            raise ModelFileError(f"invalid parameter name {name!r}", "parameters")
        params[name] = _real(val, {}, f"parameters.{name}")
    fields = {k: doc[k] for k in (*_BLOCKS, *_VECTORS, "h12") if k in doc}
    undeclared = _names_in(fields) - set(params)
    if undeclared:
        raise ModelFileError(f"expressions use undeclared parameters {sorted(undeclared)}", "parameters")
    desc = doc.get("description", "")
    if not isinstance(desc, str):
        raise ModelFileError("must be a string", "description")
    spec = ModelSpec(basis, params, fields, desc, dict(doc))
    spec.instantiate()
    return spec


def load_model(path) -> ModelSpec:
    """Read and parse a model file; JSON syntax errors report line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise ModelFileError("model file is empty", str(path))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)) from exc
    return parse_model(doc)


def _dump(value, level: int, indent: int) -> str:
    # short lists (matrix rows, sparse entries, [re, im] pairs) stay on one line
    flat = json.dumps(value)
    if not isinstance(value, (dict, list)) or (isinstance(value, list) and len(flat) <= 100 and "{" not in flat):
        return flat
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(value, dict):
        items = [f"{inner}{json.dumps(k)}: {_dump(v, level + 1, indent)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    items = [inner + _dump(v, level + 1, indent) for v in value]
    return "[\n" + ",\n".join(items) + "\n" + pad + "]"


def serialize(spec: ModelSpec, indent: int | None = 2) -> str:
    """JSON text that parses back to an identical spec.

    With ``indent=None`` the document is written on a single line.
    """
    doc: dict[str, Any] = {"basis": spec.basis.kind}
    if spec.basis.kind == "tensor_pauli":
        doc["n"] = spec.basis.n_qubits
    else:
        doc["d"] = spec.basis.d
    if spec.description:
        doc["description"] = spec.description
    if spec.parameters:
        doc["parameters"] = dict(spec.parameters)
    for key in (*_BLOCKS, *_VECTORS, "h12"):
        if key in spec.fields:
            doc[key] = spec.fields[key]
    if indent is None:
        return json.dumps(doc)
    return _dump(doc, 0, indent) + "\n"


def _sparse_complex(m: np.ndarray) -> dict:
    entries = []
    for i, j in zip(*np.nonzero(m)):
        v = m[i, j]
        entries.append([int(i), int(j), float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]])
    return {"entries": entries}


def model_to_spec(model: GeneratorModel, description: str = "") -> ModelSpec:
    """Spec with the numerical values of ``model`` as sparse literal entries."""
    k, h = model.kossakowski, model.hamiltonian
    fields: dict[str, Any] = {}
    for name, m in zip(_BLOCKS, (k.A, k.B, k.C)):
        if np.any(m):
            fields[name] = _sparse_complex(m)
    for name, v in zip(_VECTORS, (h.h1, h.h2)):
        if np.any(v):
            fields[name] = {"entries": [[int(i), float(v[i])] for i in np.flatnonzero(v)]}
    if np.any(h.h12):
        fields["h12"] = {"entries": [[int(i), int(j), float(h.h12[i, j])] for i, j in zip(*np.nonzero(h.h12))]}
    return ModelSpec(model.basis, {}, fields, description)
