"""JSON and CSV formats, with atomic file writes.

Matrix polynomial JSON::

    {"field": "real" | "complex", "n": int, "degree": int,
     "coefficients": [P_0, ..., P_degree]}

Each ``P_j`` is a list of ``n`` rows of ``n`` entries; complex entries are
``[re, im]`` pairs. Non-finite floats in reports are written as the strings
``"infinity"`` / ``"-infinity"`` / ``"nan"``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from .polymat import MatrixPolynomial

__all__ = [
    "POLYNOMIAL_SCHEMA",
    "poly_to_json",
    "poly_from_json",
    "load_polynomial",
    "encode_floats",
    "decode_floats",
    "dumps",
    "write_atomic",
]

_REAL = {"type": "number"}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

POLYNOMIAL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["field", "n", "degree", "coefficients"],
    "additionalProperties": False,
    "properties": {
        "field": {"enum": ["real", "complex"]},
        "n": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 1},
        "coefficients": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "minItems": 1,
                      "items": {"type": "array", "minItems": 1,
                                "items": {"anyOf": [_REAL, _COMPLEX]}}},
        },
    },
}


def poly_to_json(P: MatrixPolynomial) -> dict:
    if P.field == "real":
        coeffs = P.coeffs.tolist()
    else:
        coeffs = np.stack([P.coeffs.real, P.coeffs.imag], axis=-1).tolist()
    return {"field": P.field, "n": P.n, "degree": P.d, "coefficients": coeffs}


def poly_from_json(obj: dict) -> MatrixPolynomial:
    """Validate against ``POLYNOMIAL_SCHEMA`` and the declared sizes, then build."""
    jsonschema.validate(obj, POLYNOMIAL_SCHEMA)
    n, deg, field = obj["n"], obj["degree"], obj["field"]
    coeffs = obj["coefficients"]
    if len(coeffs) != deg + 1:
        raise ValueError(f"expected {deg + 1} coefficient matrices, got {len(coeffs)}")
    out = np.zeros((deg + 1, n, n), dtype=complex)
    for j, M in enumerate(coeffs):
        if len(M) != n or any(len(row) != n for row in M):
            raise ValueError(f"coefficient {j} is not {n}x{n}")
        for i, row in enumerate(M):
            for k, e in enumerate(row):
                if isinstance(e, list):
                    if field == "real":
                        raise ValueError("complex entry in a real polynomial")
                    out[j, i, k] = complex(e[0], e[1])
                else:
                    out[j, i, k] = e
    return MatrixPolynomial(out, field)


def load_polynomial(path) -> MatrixPolynomial:
    with open(path) as fh:
        return poly_from_json(json.load(fh))


def encode_floats(obj):
    """Replace non-finite floats by string sentinels, recursively."""
    if isinstance(obj, dict):
        return {k: encode_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode_floats(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "infinity" if x > 0 else "-infinity"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


_SENTINELS = {"infinity": math.inf, "-infinity": -math.inf, "nan": math.nan}


def decode_floats(obj):
    if isinstance(obj, dict):
        return {k: decode_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode_floats(v) for v in obj]
    if isinstance(obj, str) and obj in _SENTINELS:
        return _SENTINELS[obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(encode_floats(obj), indent=2, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
