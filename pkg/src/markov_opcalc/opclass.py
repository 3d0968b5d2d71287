"""Operator-class certificates: the resolvent constants ``M_A``, ``m_A``, ``delta_A``.

``V(0,b]``: ``(0, b]`` lies in the resolvent set and ``||R(t,A)|| <= M_A / t``.
``V[a,b]``: ``[a, b]`` lies in the resolvent set; ``m_A = max ||R(t,A)||`` and
``delta_A = 1 / m_A``, the radius of admissible perturbations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import config
from .errors import CertificateMismatchError, NotInClassError
from .matrixcore import as_matrix, opnorm, resolvent

SAFETY = 1.0 + 1e-6
CUTOFF = 1e-8
REFINE_RTOL = 1e-6
SPECTRUM_TOL = 1e-10


@dataclass(frozen=True)
class OperatorCertificate:
    """Certified resolvent constants of one matrix on one interval.

    ``kind`` is ``"V0b"`` for the half-open class ``(0, b]`` and ``"Vab"`` for
    the closed class ``[a, b]``.  ``M_A`` is ``sup t ||R(t,A)||``; ``m_A`` is
    ``sup ||R(t,A)||`` (``inf`` if unbounded, e.g. ``0`` in the spectrum of a
    ``V0b`` matrix) and ``delta_A = 1/m_A``.  Both suprema are the refined grid
    maxima times ``1 + 1e-6``.
    """

    kind: str
    a: float
    b: float
    M_A: float
    m_A: float
    delta_A: float
    grid: tuple = field(repr=False, default=())
    margin: float = 0.0
    matrix_id: Optional[str] = None
    flags: tuple = ()

    def covers(self, lo: float, hi: float) -> bool:
        """Whether a measure supported in ``[lo, hi]`` is admissible with this certificate."""
        if self.kind == "V0b":
            return self.a == 0.0 and lo >= 0.0 and hi <= self.b
        return lo >= self.a and hi <= self.b

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "interval": [self.a, self.b],
            "M_A": self.M_A,
            "m_A": None if math.isinf(self.m_A) else self.m_A,
            "delta_A": self.delta_A,
            "grid_size": len(self.grid),
            "grid_min": min(self.grid) if self.grid else None,
            "grid_max": max(self.grid) if self.grid else None,
            "margin": self.margin,
            "matrix_id": self.matrix_id,
            "flags": list(self.flags),
        }


def _check_spectrum(A, lo, hi, closed_left, label):
    w = np.linalg.eigvals(A)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    for lam in w:
        if abs(lam.imag) > SPECTRUM_TOL * scale:
            continue
        x = lam.real
        inside = (lo - SPECTRUM_TOL * scale <= x if closed_left else lo < x - SPECTRUM_TOL * scale)
        if inside and x <= hi + SPECTRUM_TOL * scale:
            raise NotInClassError(
                f"eigenvalue {complex(lam)!r} lies in {label}", eigenvalue=complex(lam)
            )
    return w


def _refined_max(fun, grid, log: bool):
    """Max of ``fun`` over ``grid``, refined by bounded Brent/golden search
    around the three best local maxima."""
    vals = np.array(config.pmap(fun, grid))
    order = np.argsort(vals)[::-1]
    best = float(vals[order[0]])
    arg = float(grid[order[0]])
    seen = 0
    for i in order:
        if seen == 3:
            break
        left = vals[i - 1] if i > 0 else -np.inf
        right = vals[i + 1] if i + 1 < len(grid) else -np.inf
        if vals[i] < left or vals[i] < right:
            continue
        seen += 1
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        if hi <= lo:
            continue
        if log:
            g = lambda s: -fun(math.exp(s))
            res = minimize_scalar(g, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                  options={"xatol": REFINE_RTOL})
            x = math.exp(res.x)
        else:
            res = minimize_scalar(lambda s: -fun(s), bounds=(lo, hi), method="bounded",
                                  options={"xatol": REFINE_RTOL * max(abs(hi), 1.0)})
            x = float(res.x)
        v = -float(res.fun)
        if v > best:
            best, arg = v, x
    return best, arg, vals


def certify_V0b(A, b: float, grid_size: int = 256, matrix_id: Optional[str] = None
                ) -> OperatorCertificate:
    """Certify ``A`` in ``V(0,b]`` and estimate ``M_A = sup_{0<t<=b} t ||R(t,A)||``.

    The envelope is sampled on a log grid over ``[1e-8 b, b]`` and refined
    around its maxima; the result is inflated by ``1 + 1e-6``.  If ``0`` is
    not an eigenvalue, ``m_A`` and ``delta_A`` over ``[0, b]`` are recorded as
    well.  Raises :class:`NotInClassError` for an eigenvalue in ``(0, b]``.
    """
    A = as_matrix(A)
    if not b > 0:
        raise ValueError("b must be positive")
    w = _check_spectrum(A, 0.0, b, closed_left=False, label=f"(0, {b:g}]")
    eps = CUTOFF * b
    grid = np.logspace(math.log10(eps), math.log10(b), int(grid_size))
    grid[-1] = b

    def envelope(t):
        return t * opnorm(resolvent(A, t))

    best, _, vals = _refined_max(envelope, grid, log=True)
    flags = []
    if vals[0] > vals[1] * (1.0 + 1e-9):
        flags.append("envelope_rising_at_cutoff")
    scale = max(1.0, float(np.max(np.abs(w))))
    zero_in_spectrum = bool(np.any(np.abs(w) <= SPECTRUM_TOL * scale))
    if zero_in_spectrum:
        flags.append("zero_in_spectrum")
        m_A, delta_A = math.inf, 0.0
    else:
        lin = np.linspace(0.0, b, int(grid_size))
        m_best, _, _ = _refined_max(lambda t: opnorm(resolvent(A, t)), lin, log=False)
        m_A = m_best * SAFETY
        delta_A = 1.0 / m_A
    margin = float(np.min(np.abs(w - np.clip(w.real, 0.0, b)))) if w.size else math.inf
    return OperatorCertificate(
        kind="V0b", a=0.0, b=float(b), M_A=best * SAFETY, m_A=m_A, delta_A=delta_A,
        grid=tuple(float(x) for x in grid), margin=margin, matrix_id=matrix_id,
        flags=tuple(flags),
    )


def certify_Vab(A, a: float, b: float, grid_size: int = 256,
                matrix_id: Optional[str] = None) -> OperatorCertificate:
    """Certify ``A`` in ``V[a,b]``; ``m_A = max ||R(t,A)||``, ``delta_A = 1/m_A``.

    ``M_A = max t ||R(t,A)||`` over the same interval is recorded too.
    Raises :class:`NotInClassError` for an eigenvalue in ``[a, b]``.
    """
    A = as_matrix(A)
    if not b > a:
        raise ValueError("need a < b")
    w = _check_spectrum(A, a, b, closed_left=True, label=f"[{a:g}, {b:g}]")
    grid = np.linspace(a, b, int(grid_size))
    m_best, _, _ = _refined_max(lambda t: opnorm(resolvent(A, t)), grid, log=False)
    M_best, _, _ = _refined_max(lambda t: abs(t) * opnorm(resolvent(A, t)), grid, log=False)
    m_A = m_best * SAFETY
    margin = float(np.min(np.abs(w - np.clip(w.real, a, b)))) if w.size else math.inf
    return OperatorCertificate(
        kind="Vab", a=float(a), b=float(b), M_A=M_best * SAFETY, m_A=m_A, delta_A=1.0 / m_A,
        grid=tuple(float(x) for x in grid), margin=margin, matrix_id=matrix_id,
    )


def certify_for(symbol, A, grid_size: int = 256) -> OperatorCertificate:
    """Certificate matching the class of ``symbol``: ``V(0,b]`` for ZR(0,b], else ``V[a,b]``."""
    from .symbols import SymbolClass

    a, b = symbol.interval
    if symbol.class_tag is SymbolClass.ZR_0b and a == 0.0:
        return certify_V0b(A, b, grid_size)
    return certify_Vab(A, a, b, grid_size)


def check_covers(cert: Optional[OperatorCertificate], measure) -> None:
    """Raise :class:`CertificateMismatchError` unless ``cert`` covers the measure's support."""
    if cert is None:
        return
    hull = measure.support_hull
    if hull is None:
        return
    lo, hi = hull
    if not cert.covers(lo, hi):
        raise CertificateMismatchError(
            f"{cert.kind} certificate on [{cert.a:g}, {cert.b:g}] does not cover support "
            f"[{lo:g}, {hi:g}]"
        )


def perturbation_budget(cert: OperatorCertificate) -> float:
    """``delta_A``: every ``dA`` with ``||dA|| < delta_A`` keeps ``A + dA`` in ``V[a,b]``."""
    if cert.kind != "Vab" and not cert.delta_A > 0:
        raise ValueError("perturbation budget needs a certificate with finite m_A")
    return cert.delta_A


# -- Ritt fixtures -------------------------------------------------------------

def ritt_operator(n: int, rng: np.random.Generator, angle: float = math.pi / 4,
                  nilpotent_scale: float = 0.1) -> np.ndarray:
    """Upper-triangular Ritt operator: eigenvalues in a Stolz-type region at 1.

    Eigenvalues ``mu = 1 - r exp(i phi)`` with ``|phi| <= angle`` and
    ``r`` chosen so that ``0.2 <= |mu| < 1``; a small strictly upper part makes
    the matrix non-normal.
    """
    mus = []
    while len(mus) < n:
        r = rng.uniform(0.05, 0.8)
        phi = rng.uniform(-angle, angle)
        mu = 1.0 - r * np.exp(1j * phi)
        if 0.2 <= abs(mu) < 1.0:
            mus.append(mu)
    T = np.diag(np.array(mus, dtype=complex))
    N = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 1)
    if n > 1:
        T = T + nilpotent_scale * N / max(1.0, np.linalg.norm(N, 2))
    return T


def ritt_inverse_plus_identity(T) -> np.ndarray:
    """``T^{-1} + I``, which lies in ``V(0,1]`` for an invertible Ritt operator ``T``."""
    T = as_matrix(T)
    return np.linalg.inv(T) + np.eye(T.shape[0])
