"""Dense complex matrix kernel: resolvents, ideal norms, trace, eigen-decomposition."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import SpectrumHitError

RCOND_MIN = 1e-14
DEFECTIVE_COND = 1e12
ILL_COND = 1e6


def as_matrix(A) -> np.ndarray:
    """Validate and return ``A`` as a square, finite, complex ndarray."""
    M = np.array(A, dtype=complex, copy=True)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def resolvent(A: np.ndarray, t: complex) -> np.ndarray:
    """``(tI - A)^{-1}`` via LU with partial pivoting.

    Raises :class:`SpectrumHitError` when the reciprocal 1-norm condition
    estimate of ``tI - A`` is below ``1e-14``.
    """
    n = A.shape[0]
    T = t * np.eye(n, dtype=complex) - A
    anorm = np.linalg.norm(T, 1)
    if anorm == 0.0:
        raise SpectrumHitError(f"tI - A vanishes at t={t!r}", t=t, rcond=0.0)
    lu, piv, info = lapack.zgetrf(T)
    if info > 0:
        raise SpectrumHitError(f"tI - A is singular at t={t!r}", t=t, rcond=0.0)
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if not rcond >= RCOND_MIN:
        raise SpectrumHitError(
            f"t={t!r} is numerically in the spectrum (rcond={rcond:.3g})", t=t, rcond=rcond
        )
    R, info = lapack.zgetrs(lu, piv, np.eye(n, dtype=complex))
    return R


@dataclass(frozen=True)
class IdealNorm:
    """Selector for an operator-ideal norm computed from singular values.

    ``kind`` is one of ``operator``, ``trace``, ``schatten`` (with ``p >= 1``)
    or ``hilbert_schmidt``.
    """

    kind: str = "operator"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("operator", "trace", "schatten", "hilbert_schmidt"):
            raise ValueError(f"unknown ideal norm kind {self.kind!r}")
        if self.kind == "schatten" and not self.p >= 1.0:
            raise ValueError("Schatten exponent must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "IdealNorm":
        """Parse ``op``, ``operator``, ``trace``, ``hs`` or ``schatten:p``."""
        t = text.strip().lower()
        if t in ("op", "operator", "spectral"):
            return cls("operator")
        if t in ("trace", "nuclear", "s1"):
            return cls("trace")
        if t in ("hs", "hilbert_schmidt", "frobenius"):
            return cls("hilbert_schmidt")
        if t.startswith("schatten:"):
            return cls("schatten", float(t.split(":", 1)[1]))
        raise ValueError(f"cannot parse ideal norm {text!r}")

    @property
    def label(self) -> str:
        return f"schatten:{self.p:g}" if self.kind == "schatten" else self.kind

    def __call__(self, S) -> float:
        return norm(S, self)


OPERATOR = IdealNorm("operator")
TRACE = IdealNorm("trace")


def norm(S, which: IdealNorm = OPERATOR) -> float:
    """Ideal norm of ``S`` from its singular values."""
    s = sla.svdvals(np.atleast_2d(np.asarray(S, dtype=complex)))
    if s.size == 0:
        return 0.0
    if which.kind == "operator":
        return float(s[0])
    if which.kind == "trace":
        return float(np.sum(s))
    if which.kind == "hilbert_schmidt":
        return float(np.sqrt(np.sum(s * s)))
    return float(np.sum(s ** which.p) ** (1.0 / which.p))


def opnorm(S) -> float:
    return norm(S, OPERATOR)


def trace(S) -> complex:
    return complex(np.trace(np.asarray(S)))


@dataclass
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    condition: float
    residual: float
    defective: bool
    ill_conditioned: bool


def eig(A) -> EigResult:
    """Eigen-decomposition with residual and eigenbasis condition number.

    Never raises for defective input; ``defective`` and ``ill_conditioned``
    flag bases with condition above ``1e12`` and ``1e6`` respectively.
    """
    A = as_matrix(A)
    w, V = np.linalg.eig(A)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond):
        cond = np.inf
    res = float(np.linalg.norm(A @ V - V * w, 2) / max(1.0, np.linalg.norm(A, 2)))
    return EigResult(w, V, cond, res, cond > DEFECTIVE_COND, cond > ILL_COND)


def commutator(X, Y) -> np.ndarray:
    return X @ Y - Y @ X


# -- I/O ---------------------------------------------------------------------

def matrix_to_dict(A, provenance: dict | None = None) -> dict:
    A = as_matrix(A)
    out = {"n": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}
    if provenance is not None:
        out["provenance"] = provenance
    return out


def matrix_from_dict(data: dict) -> np.ndarray:
    try:
        re = np.array(data["re"], dtype=float)
        im = np.array(data.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix literal: {exc}") from None
    if re.shape != im.shape:
        raise ValueError("re and im parts differ in shape")
    A = as_matrix(re + 1j * im)
    if "n" in data and int(data["n"]) != A.shape[0]:
        raise ValueError(f"declared n={data['n']} but matrix is {A.shape[0]}x{A.shape[0]}")
    return A


def load_matrix(path) -> np.ndarray:
    """Load a matrix from ``.json`` (``{"n", "re", "im"}``) or real ``.csv``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        return as_matrix(np.array([[float(x) for x in r] for r in rows]))
    return matrix_from_dict(json.loads(text))
