"""JSON encodings of matrices, states, channels, observables and couplings.

A matrix is ``{"rows", "cols", "entries"}`` with ``entries`` a flat row-major
list of ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import linalg
from .coupling import Coupling
from .errors import ParameterError
from .objects import (
    DensityMatrix,
    KrausChannel,
    ObservableSet,
    make_observables,
    validate_channel,
    validate_state,
)


def matrix_to_json(m) -> dict:
    m = linalg.as_cmatrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ParameterError(f"matrix has {len(entries)} entries, expected {rows} x {cols}")
    try:
        arr = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    return linalg.as_cmatrix(arr.reshape(rows, cols))


def state_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "mat": matrix_to_json(rho.mat)}


def state_from_json(obj) -> DensityMatrix:
    rho = validate_state(matrix_from_json(_get(obj, "mat")))
    if "dim" in obj and int(obj["dim"]) != rho.dim:
        raise ParameterError(f"state declares dim {obj['dim']} but matrix is {rho.dim}")
    return rho


def channel_to_json(phi: KrausChannel) -> dict:
    out = {
        "din": phi.din,
        "dout": phi.dout,
        "kraus": [matrix_to_json(k) for k in phi.kraus],
    }
    if phi.embedding is not None:
        out["embedding"] = matrix_to_json(phi.embedding)
    return out


def channel_from_json(obj) -> KrausChannel:
    kraus = [matrix_from_json(k) for k in _get(obj, "kraus")]
    emb = matrix_from_json(obj["embedding"]) if obj.get("embedding") is not None else None
    return validate_channel(kraus, int(_get(obj, "din")), int(_get(obj, "dout")), embedding=emb)


def observables_to_json(obs: ObservableSet) -> dict:
    return {"dim": obs.dim, "observables": [matrix_to_json(a) for a in obs.observables]}


def observables_from_json(obj) -> ObservableSet:
    obs = make_observables([matrix_from_json(a) for a in _get(obj, "observables")])
    if "dim" in obj and int(obj["dim"]) != obs.dim:
        raise ParameterError(f"observable set declares dim {obj['dim']} but matrices are {obs.dim}")
    return obs


def coupling_to_json(pi: Coupling) -> dict:
    return {
        "d": pi.d,
        "mat": matrix_to_json(pi.mat),
        "first_marginal": matrix_to_json(pi.first_marginal.mat),
        "second_marginal_T": matrix_to_json(pi.second_marginal_T),
    }


def coupling_from_json(obj) -> Coupling:
    pi = Coupling.from_matrix(matrix_from_json(_get(obj, "mat")))
    if "d" in obj and int(obj["d"]) != pi.d:
        raise ParameterError(f"coupling declares d={obj['d']} but matrix has d={pi.d}")
    return pi


def _get(obj, key):
    try:
        return obj[key]
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"missing field {key!r}") from exc


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())
