"""JSON documents for triples, twisting operators and run reports.

Complex entries are stored as ``[re, im]`` pairs. Canonical output uses sorted
keys, fixed separators and Python's shortest round-trip float repr, so that
export -> import -> export is byte-identical.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .linalg import AntiUnitary
from .triple import COMPLEX, REAL, FiniteSpectralTriple, RealStructure

SCHEMA_VERSION = "1.0"


class DocumentError(ValueError):
    """Parse or schema error; ``where`` is a line/column or a field path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


def _num(x: float) -> Union[float, int]:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value cannot be serialized")
    return x + 0.0  # folds -0.0 into 0.0


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_num(z.real), _num(z.imag)] for z in row] for row in m]


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return encode_matrix(x) if x.ndim == 2 else _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _num(x)
    return x


def canonical_dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def pretty_dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- decoding ------------------------------------------------------------------

def decode_matrix(obj: Any, where: str, dim: Optional[int] = None) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise DocumentError(where, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != len(obj):
            raise DocumentError(f"{where}[{i}]", f"expected a row of {len(obj)} entries")
        vals = []
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                raise DocumentError(f"{where}[{i}][{j}]", "expected a [re, im] pair of numbers")
            if not all(math.isfinite(v) for v in z):
                raise DocumentError(f"{where}[{i}][{j}]", "non-finite entry")
            vals.append(complex(z[0], z[1]))
        rows.append(vals)
    m = np.array(rows, dtype=complex)
    if dim is not None and m.shape != (dim, dim):
        raise DocumentError(where, f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def _require(doc: dict, key: str, where: str = "") -> Any:
    if key not in doc:
        raise DocumentError(f"{where}{key}", "missing required field")
    return doc[key]


def _sign(value: Any, where: str, optional: bool = False) -> Optional[int]:
    if value is None and optional:
        return None
    if value not in (1, -1) or isinstance(value, bool):
        raise DocumentError(where, "expected +1 or -1" + (" or null" if optional else ""))
    return int(value)


def triple_to_document(t: FiniteSpectralTriple) -> dict:
    rs = None
    if t.real_structure is not None:
        r = t.real_structure
        rs = {"M": encode_matrix(r.j.matrix), "eps": r.eps, "eps_prime": r.eps_prime, "eps_second": r.eps_second}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "triple",
        "name": t.name,
        "hilbert_dim": t.hilbert_dim,
        "scalar_field": t.scalar_field,
        "algebra_basis": [encode_matrix(b) for b in t.algebra_basis],
        "dirac": encode_matrix(t.dirac),
        "real_structure": rs,
        "grading": None if t.grading is None else encode_matrix(t.grading),
        "metadata": _jsonable(t.metadata),
    }


def document_to_triple(doc: Any) -> FiniteSpectralTriple:
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected a JSON object")
    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentError("schema_version", f"unsupported version {version!r}")
    if doc.get("kind", "triple") != "triple":
        raise DocumentError("kind", f"expected 'triple', got {doc.get('kind')!r}")
    n = _require(doc, "hilbert_dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DocumentError("hilbert_dim", "expected a positive integer")
    field_ = doc.get("scalar_field", COMPLEX)
    if field_ not in (REAL, COMPLEX):
        raise DocumentError("scalar_field", "expected 'real' or 'complex'")
    basis = _require(doc, "algebra_basis")
    if not isinstance(basis, list) or not basis:
        raise DocumentError("algebra_basis", "expected a non-empty list of matrices")
    algebra = [decode_matrix(b, f"algebra_basis[{i}]", n) for i, b in enumerate(basis)]
    dirac = decode_matrix(_require(doc, "dirac"), "dirac", n)
    grading = doc.get("grading")
    grading = None if grading is None else decode_matrix(grading, "grading", n)
    rs_doc = doc.get("real_structure")
    rs = None
    if rs_doc is not None:
        if not isinstance(rs_doc, dict):
            raise DocumentError("real_structure", "expected an object or null")
        m = decode_matrix(_require(rs_doc, "M", "real_structure."), "real_structure.M", n)
        eps = _sign(_require(rs_doc, "eps", "real_structure."), "real_structure.eps")
        eps_prime = _sign(_require(rs_doc, "eps_prime", "real_structure."), "real_structure.eps_prime")
        eps_second = _sign(rs_doc.get("eps_second"), "real_structure.eps_second", optional=True)
        try:
            rs = RealStructure(AntiUnitary(m, eps), eps_prime, eps_second)
        except ValueError as exc:
            raise DocumentError("real_structure", str(exc)) from None
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise DocumentError("metadata", "expected an object")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise DocumentError("name", "expected a string")
    return FiniteSpectralTriple(tuple(algebra), dirac, rs, grading, field_, name, meta)


def loads_triple(text: str) -> FiniteSpectralTriple:
    return document_to_triple(_loads(text))


def dumps_triple(t: FiniteSpectralTriple) -> str:
    return canonical_dumps(triple_to_document(t))


def read_triple(path: Union[str, Path]) -> FiniteSpectralTriple:
    return loads_triple(Path(path).read_text(encoding="utf-8"))


def write_triple(path: Union[str, Path], t: FiniteSpectralTriple) -> None:
    atomic_write(path, dumps_triple(t))


def twist_to_document(m, name: str = "") -> dict:
    m = np.asarray(m)
    return {"schema_version": SCHEMA_VERSION, "kind": "twist", "name": name,
            "dim": int(m.shape[0]), "matrix": encode_matrix(m)}


def loads_twist(text: str) -> np.ndarray:
    doc = _loads(text)
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected a JSON object")
    if _require(doc, "schema_version") != SCHEMA_VERSION:
        raise DocumentError("schema_version", f"unsupported version {doc['schema_version']!r}")
    if doc.get("kind", "twist") != "twist":
        raise DocumentError("kind", f"expected 'twist', got {doc.get('kind')!r}")
    dim = doc.get("dim")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 1):
        raise DocumentError("dim", "expected a positive integer")
    return decode_matrix(_require(doc, "matrix"), "matrix", dim)


def dumps_twist(m, name: str = "") -> str:
    return canonical_dumps(twist_to_document(m, name))


def read_twist(path: Union[str, Path]) -> np.ndarray:
    return loads_twist(Path(path).read_text(encoding="utf-8"))


def write_twist(path: Union[str, Path], m, name: str = "") -> None:
    atomic_write(path, dumps_twist(m, name))
