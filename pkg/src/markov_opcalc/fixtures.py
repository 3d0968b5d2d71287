"""Deterministic matrix fixtures and random generators.

Every fixture is a JSON-ready dict carrying its provenance (generator
version and seed) so the same call always produces identical bytes.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from .matrixcore import as_matrix, matrix_from_dict, matrix_to_dict
from .opclass import ritt_inverse_plus_identity, ritt_operator

GENERATOR_VERSION = "1"
KINDS = ("diag", "jordan", "ritt-inverse", "random-normal", "random-nonnormal", "rank-one-pair")


# -- generators ----------------------------------------------------------------

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_spectrum(n: int, rng: np.random.Generator, re=(-3.0, -0.3), im=(-1.0, 1.0)):
    return rng.uniform(*re, n) + 1j * rng.uniform(*im, n)


def random_normal(n: int, rng: np.random.Generator, re=(-3.0, -0.3), im=(-1.0, 1.0),
                  real_spectrum: bool = False) -> np.ndarray:
    """``Q diag(w) Q*`` with ``w`` uniform in the given box."""
    w = random_spectrum(n, rng, re, (0.0, 0.0) if real_spectrum else im)
    Q = random_unitary(n, rng)
    return (Q * w) @ Q.conj().T


def random_nonnormal(n: int, rng: np.random.Generator, re=(-3.0, -0.3), im=(-1.0, 1.0),
                     skew: float = 0.3) -> np.ndarray:
    """``V diag(w) V^{-1}`` with ``V = I + skew G / sqrt(n)`` (well-conditioned, not normal)."""
    w = random_spectrum(n, rng, re, im)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = np.eye(n) + skew * G / math.sqrt(2 * n)
    return np.linalg.solve(V.T, (V * w).T).T


def random_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def rank_one_pair(n: int, rng: np.random.Generator, sigma: float = 0.1, re=(-3.0, -0.3),
                  im=(-1.0, 1.0), normal: bool = True):
    """``(A, A + sigma u v*)`` with unit ``u``, ``v``."""
    A = random_normal(n, rng, re, im) if normal else random_nonnormal(n, rng, re, im)
    u, v = random_vector(n, rng), random_vector(n, rng)
    return A, A + sigma * np.outer(u, v.conj())


def jordan(eigenvalue: complex, size: int) -> np.ndarray:
    return as_matrix(eigenvalue * np.eye(size) + np.eye(size, k=1))


# -- fixture files -------------------------------------------------------------

def _provenance(kind: str, params: dict, seed: Optional[int]) -> dict:
    return {
        "generator": "markov_opcalc.fixtures",
        "generator_version": GENERATOR_VERSION,
        "kind": kind,
        "params": params,
        "seed": seed,
    }


def _complex_list(values):
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def _parse_complex_list(raw) -> np.ndarray:
    out = []
    for v in raw:
        if isinstance(v, (list, tuple)):
            out.append(complex(float(v[0]), float(v[1]) if len(v) > 1 else 0.0))
        else:
            out.append(complex(v))
    return np.array(out, dtype=complex)


def make_fixture(kind: str, params: Optional[dict] = None, seed: Optional[int] = None) -> dict:
    """Build one fixture document.

    ``diag``: ``values`` (list of reals or ``[re, im]``).
    ``jordan``: ``eigenvalue``, ``size``.
    ``ritt-inverse``: either ``T_diag`` (diagonal of ``T``) or ``n`` plus seed.
    ``random-normal`` / ``random-nonnormal``: ``n``, optional ``re``, ``im`` ranges.
    ``rank-one-pair``: ``n``, ``sigma``, optional ``normal``.
    """
    params = dict(params or {})
    if kind not in KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}; choose from {', '.join(KINDS)}")
    rng = np.random.default_rng(seed)
    prov = _provenance(kind, params, seed)
    try:
        if kind == "diag":
            vals = _parse_complex_list(params["values"])
            if vals.size == 0:
                raise ValueError("diag needs at least one value")
            return {"matrix": matrix_to_dict(np.diag(vals)), "provenance": prov}
        if kind == "jordan":
            ev = _parse_complex_list([params.get("eigenvalue", -1.0)])[0]
            size = int(params.get("size", 2))
            if size < 1:
                raise ValueError("size must be >= 1")
            return {"matrix": matrix_to_dict(jordan(ev, size)), "provenance": prov}
        if kind == "ritt-inverse":
            if "T_diag" in params:
                T = as_matrix(np.diag(_parse_complex_list(params["T_diag"])))
            else:
                T = ritt_operator(int(params.get("n", 4)), rng)
            return {"matrix": matrix_to_dict(ritt_inverse_plus_identity(T)),
                    "T": matrix_to_dict(T), "interval": [0.0, 1.0], "provenance": prov}
        n = int(params.get("n", 4))
        if n < 1:
            raise ValueError("n must be >= 1")
        re = tuple(params.get("re", (-3.0, -0.3)))
        im = tuple(params.get("im", (-1.0, 1.0)))
        if kind == "random-normal":
            return {"matrix": matrix_to_dict(random_normal(n, rng, re, im)), "provenance": prov}
        if kind == "random-nonnormal":
            skew = float(params.get("skew", 0.3))
            return {"matrix": matrix_to_dict(random_nonnormal(n, rng, re, im, skew)),
                    "provenance": prov}
        A, B = rank_one_pair(n, rng, float(params.get("sigma", 0.1)), re, im,
                             bool(params.get("normal", True)))
        return {"A": matrix_to_dict(A), "B": matrix_to_dict(B), "provenance": prov}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"invalid parameters for {kind}: {exc}") from None


def dumps(doc) -> str:
    """Canonical JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def matrix_from_document(doc: dict, key: Optional[str] = None) -> np.ndarray:
    """Extract a matrix from a bare matrix literal or a fixture document."""
    if not isinstance(doc, dict):
        raise ValueError("matrix document must be a JSON object")
    if key is not None and key in doc:
        return matrix_from_dict(doc[key])
    if "re" in doc:
        return matrix_from_dict(doc)
    if "matrix" in doc:
        return matrix_from_dict(doc["matrix"])
    raise ValueError("no matrix found in document")
