"""JSON encodings of algebras, elements, amplified elements, maps and estimates.

Complex numbers are ``[re, im]`` pairs.  Matrices are nested row lists of
such pairs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraSpec, Block, Element
from .lp import AmplifiedElement
from .maps import LinearMap


class InputError(ValueError):
    """Malformed or inconsistent input document."""


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_to_json(a: np.ndarray) -> list:
    return [[_cplx(z) for z in row] for row in np.asarray(a)]


def _matrix_from_json(rows, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Nested rows of ``[re, im]``; a flat row-major list of pairs is accepted too."""
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim == 2 and arr.shape[-1] == 2 and shape is not None and arr.shape[0] == shape[0] * shape[1]:
        arr = arr.reshape(shape + (2,))
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InputError(f"expected a matrix of [re, im] pairs, got array of shape {arr.shape}")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and out.shape != shape:
        raise InputError(f"matrix has shape {out.shape}, expected {shape}")
    return out


# algebras --------------------------------------------------------------------------

def spec_to_json(spec: AlgebraSpec) -> dict:
    return {"blocks": [{"n": b.n, "weights": list(b.weights)} for b in spec.blocks]}


def spec_from_json(d: Any) -> AlgebraSpec:
    try:
        blocks = d["blocks"]
        out = []
        for b in blocks:
            n = b["n"]
            if isinstance(n, bool) or not float(n).is_integer():
                raise InputError(f"block size must be an integer, got {n!r}")
            out.append(Block(int(n), tuple(float(w) for w in b["weights"])))
        return AlgebraSpec(tuple(out))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid algebra spec: {exc}") from exc


# elements -------------------------------------------------------------------------

def element_to_json(x: Element) -> dict:
    blocks = []
    pos = 0
    for b in x.spec.blocks:
        blocks.append([_matrix_to_json(x.data[pos + k]) for k in range(len(b.weights))])
        pos += len(b.weights)
    return {"algebra": spec_to_json(x.spec), "blocks": blocks}


def element_from_json(d: Any, spec: AlgebraSpec | None = None) -> Element:
    try:
        if spec is None:
            spec = spec_from_json(d["algebra"])
        blocks = d["blocks"]
        if len(blocks) != len(spec.blocks):
            raise InputError(f"element has {len(blocks)} blocks, algebra has {len(spec.blocks)}")
        data = []
        for b, pts in zip(spec.blocks, blocks):
            if len(pts) != len(b.weights):
                raise InputError(f"block M_{b.n} has {len(b.weights)} points, element gives {len(pts)}")
            data.extend(_matrix_from_json(a, (b.n, b.n)) for a in pts)
        return Element(spec, data)
    except InputError:
        raise
    except (KeyError, TypeError) as exc:
        raise InputError(f"invalid element: {exc}") from exc


def amplified_to_json(X: AmplifiedElement) -> dict:
    entries = [[{"blocks": element_to_json(X.entry(i, j))["blocks"]} for j in range(X.m)] for i in range(X.m)]
    return {"algebra": spec_to_json(X.base), "m": X.m, "entries": entries}


def amplified_from_json(d: Any, spec: AlgebraSpec | None = None) -> AmplifiedElement:
    try:
        if spec is None:
            spec = spec_from_json(d["algebra"])
        m = int(d["m"])
        rows = d["entries"]
        if len(rows) != m or any(len(r) != m for r in rows):
            raise InputError(f"entries must be an {m} x {m} array")
        ents = [[element_from_json(e if isinstance(e, dict) else {"blocks": e}, spec) for e in row]
                for row in rows]
        return AmplifiedElement.from_entries(ents)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid amplified element: {exc}") from exc


# maps --------------------------------------------------------------------------------

def map_to_json(T: LinearMap) -> dict:
    return {"source": spec_to_json(T.source), "target": spec_to_json(T.target), "p": T.p,
            "matrix": _matrix_to_json(T.matrix)}


def map_from_json(d: Any, p: float | None = None) -> LinearMap:
    try:
        source = spec_from_json(d["source"])
        target = spec_from_json(d["target"])
        pp = float(d.get("p", 1.0) if p is None else p)
        mat = _matrix_from_json(d["matrix"], (target.dim, source.dim))
        return LinearMap(source, target, pp, mat)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid linear map: {exc}") from exc


# estimates ---------------------------------------------------------------------------

def estimate_to_json(est) -> dict:
    upper = est.upper if est.upper is not None and np.isfinite(est.upper) else None
    return {
        "lower": float(est.lower),
        "upper": None if upper is None else float(upper),
        "converged": bool(est.converged),
        "iterations": int(est.iterations),
        "witness": None if est.witness is None else amplified_to_json(est.witness),
        "per_m": {str(k): float(v) for k, v in est.per_m.items()},
        "details": est.details,
    }


def load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
