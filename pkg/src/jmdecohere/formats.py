"""JSON interchange: complex numbers as ``[re, im]``, matrices as row-major nested lists."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import Generator, gkls_generator
from .errors import JMError, ShapeMismatch
from .jmcheck import JmVerdict, Status
from .observables import BiObservable, Observable

OBSERVABLE_KEYS = {"dim", "outcomes", "effects"}
GENERATOR_KEYS = {"dim", "hamiltonian", "lindblad_ops", "divisible"}


class FormatError(JMError, ValueError):
    """Malformed or inconsistent input document."""


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data, d: int | None = None) -> np.ndarray:
    try:
        A = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix is not a nested numeric array: {exc}") from None
    if A.ndim != 3 or A.shape[2] != 2 or A.shape[0] != A.shape[1]:
        raise FormatError(f"expected a square matrix of [re, im] pairs, got shape {A.shape}")
    if d is not None and A.shape[0] != d:
        raise FormatError(f"matrix dimension {A.shape[0]} != declared dim {d}")
    return A[..., 0] + 1j * A[..., 1]


def _keys(doc, allowed: set[str], kind: str) -> None:
    if not isinstance(doc, dict):
        raise FormatError(f"{kind} document must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise FormatError(f"unknown {kind} keys: {sorted(unknown)}")


def observable_to_dict(E: Observable) -> dict:
    return {"dim": E.dim, "outcomes": list(E.outcomes), "effects": [encode_matrix(A) for A in E.effects]}


def observable_from_dict(doc) -> Observable:
    _keys(doc, OBSERVABLE_KEYS, "observable")
    if "effects" not in doc:
        raise FormatError("observable document needs 'effects'")
    d = doc.get("dim")
    effects = [decode_matrix(m, d) for m in doc["effects"]]
    if not effects:
        raise FormatError("observable has no effects")
    try:
        return Observable(np.array(effects), tuple(doc.get("outcomes") or ()))
    except ShapeMismatch as exc:
        raise FormatError(str(exc)) from None


def generator_to_dict(gen: Generator) -> dict:
    return {
        "dim": gen.dim,
        "hamiltonian": encode_matrix(gen.hamiltonian),
        "lindblad_ops": [encode_matrix(L) for L in gen.lindblad_ops],
        "divisible": bool(gen.divisible),
    }


def generator_from_dict(doc) -> Generator:
    _keys(doc, GENERATOR_KEYS, "generator")
    if "hamiltonian" not in doc:
        raise FormatError("generator document needs 'hamiltonian'")
    d = doc.get("dim")
    H = decode_matrix(doc["hamiltonian"], d)
    ops = [decode_matrix(L, H.shape[0]) for L in doc.get("lindblad_ops", [])]
    divisible = doc.get("divisible", True)
    if not isinstance(divisible, bool):
        raise FormatError("'divisible' must be a boolean")
    return gkls_generator(H, ops, divisible)


def _finite(x: float):
    return float(x) if np.isfinite(x) else None


def verdict_to_dict(v: JmVerdict, certificate: bool = False) -> dict:
    doc = {
        "status": v.status.value,
        "criterion": v.criterion,
        "certified": bool(v.certified),
        "residual": float(v.residual),
        "iterations": int(v.iterations),
        "bounds": [_finite(b) for b in v.bounds],
    }
    if certificate and v.certificate is not None:
        G = v.certificate
        doc["certificate"] = {
            "row_outcomes": list(G.row_outcomes),
            "col_outcomes": list(G.col_outcomes),
            "grid": [[encode_matrix(A) for A in row] for row in G.grid],
        }
    return doc


def verdict_from_dict(doc) -> JmVerdict:
    lo, hi = doc.get("bounds", [None, None])
    cert = None
    if "certificate" in doc:
        c = doc["certificate"]
        grid = np.array([[decode_matrix(A) for A in row] for row in c["grid"]])
        cert = BiObservable(grid, tuple(c["row_outcomes"]), tuple(c["col_outcomes"]))
    return JmVerdict(
        Status(doc["status"]),
        certificate=cert,
        residual=float(doc["residual"]),
        iterations=int(doc["iterations"]),
        criterion=doc["criterion"],
        certified=bool(doc["certified"]),
        bounds=(-np.inf if lo is None else float(lo), np.inf if hi is None else float(hi)),
    )


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None


def load_observable(path) -> Observable:
    return observable_from_dict(load_json(path))


def load_generator(path) -> Generator:
    return generator_from_dict(load_json(path))


def dumps(doc) -> str:
    """Deterministic JSON text (sorted keys, no NaN/Infinity)."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
