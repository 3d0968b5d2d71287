"""Fréchet derivative, the derived function ``f'(A)``, and Taylor series in the
perturbation parameter.

For ``A`` with ``[a, b]`` in its resolvent set:

* ``D_A(B) = int R(t,A) B R(t,A) t dtau(t)`` is the Fréchet derivative of
  ``A -> f(A)`` in direction ``B``;
* ``f(A + zB) - f(A) = sum_{n>=1} z^n C_n`` with
  ``C_n = int (R(t,A) B)^n R(t,A) t dtau(t)`` for ``|z| < delta_A / ||B||``.

Coefficients are always computed by quadrature; finite differences appear only
in the tests, as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotInClassError, RadiusError
from .funcalc import apply
from .matrixcore import OPERATOR, IdealNorm, as_matrix, norm, opnorm, resolvent
from .measure import MAX_ORDER, first_moment, integrate_adaptive
from .opclass import OperatorCertificate, certify_Vab, check_covers
from .symbols import MarkovSymbol

FRECHET_RTOL = 1e-12
TAYLOR_TAIL_TOL = 1e-10
TAYLOR_MAX_TERMS = 64


def _vab_cert(f: MarkovSymbol, A, cert: Optional[OperatorCertificate]) -> OperatorCertificate:
    if cert is None:
        a, b = f.interval
        return certify_Vab(A, a, b)
    check_covers(cert, f.measure)
    if not math.isfinite(cert.m_A):
        raise NotInClassError("certificate has unbounded m_A on the support")
    return cert


def frechet_derivative(f: MarkovSymbol, A, B, cert: Optional[OperatorCertificate] = None,
                       rtol: float = FRECHET_RTOL) -> np.ndarray:
    """``int R(t,A) B R(t,A) t dtau(t)``; linear in ``B``."""
    A, B = as_matrix(A), as_matrix(B)
    if cert is not None:
        check_covers(cert, f.measure)

    def integrand(t):
        R = resolvent(A, t)
        return t * (R @ B @ R)

    return integrate_adaptive(f.measure, integrand, rtol=rtol, max_order=MAX_ORDER).value


def fprime_of_A(f: MarkovSymbol, A, cert: Optional[OperatorCertificate] = None,
                rtol: float = FRECHET_RTOL) -> np.ndarray:
    """``f'(A) = int R(t,A)^2 t dtau(t)``."""
    A = as_matrix(A)
    if cert is not None:
        check_covers(cert, f.measure)

    def integrand(t):
        R = resolvent(A, t)
        return t * (R @ R)

    return integrate_adaptive(f.measure, integrand, rtol=rtol, max_order=MAX_ORDER).value


def taylor_coeffs(f: MarkovSymbol, A, B, N: int, cert: Optional[OperatorCertificate] = None,
                  rtol: float = FRECHET_RTOL) -> np.ndarray:
    """Stack ``[C_1, ..., C_N]`` sharing one resolvent per quadrature node."""
    A, B = as_matrix(A), as_matrix(B)
    if N < 1:
        raise ValueError("need N >= 1")
    if cert is not None:
        check_covers(cert, f.measure)

    def integrand(t):
        R = resolvent(A, t)
        RB = R @ B
        out = np.empty((N,) + R.shape, dtype=complex)
        P = R
        for k in range(N):
            P = RB @ P
            out[k] = t * P
        return out

    return integrate_adaptive(f.measure, integrand, rtol=rtol, max_order=MAX_ORDER).value


def taylor_coeff(f: MarkovSymbol, A, B, n: int, cert: Optional[OperatorCertificate] = None
                 ) -> np.ndarray:
    """``C_n = int (R(t,A) B)^n R(t,A) t dtau(t)``, ``n >= 1``."""
    return taylor_coeffs(f, A, B, n, cert)[n - 1]


def path_derivative(f: MarkovSymbol, A, B, z: complex, cert=None) -> np.ndarray:
    """``d/dz f(A + zB) = D_{A+zB}(B)`` at any ``z`` in the convergence disc."""
    A, B = as_matrix(A), as_matrix(B)
    return frechet_derivative(f, A + z * B, B)


@dataclass
class TaylorResult:
    value: np.ndarray
    radius: float
    truncation_bound: float
    terms: int
    ratio_bound: float

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "truncation_bound": self.truncation_bound,
            "terms": self.terms,
            "ratio_bound": self.ratio_bound,
        }


def taylor_radius(cert: OperatorCertificate, B) -> float:
    """``delta_A / ||B||`` (infinite for ``B = 0``)."""
    nb = opnorm(B)
    return math.inf if nb == 0 else cert.delta_A / nb


def taylor_eval(f: MarkovSymbol, A, B, z: complex, N: Optional[int] = None,
                cert: Optional[OperatorCertificate] = None) -> TaylorResult:
    """Partial sum ``sum_{n=1}^N z^n C_n`` approximating ``f(A + zB) - f(A)``.

    The tail after ``N`` terms is bounded by
    ``m_A * int t dtau * q^(N+1) / (1 - q)`` with ``q = |z| m_A ||B||``.
    Without ``N`` the smallest ``N`` with tail below ``1e-10`` is used (at
    most 64).  Raises :class:`RadiusError` when ``|z| >= delta_A/||B||``.
    """
    A, B = as_matrix(A), as_matrix(B)
    cert = _vab_cert(f, A, cert)
    radius = taylor_radius(cert, B)
    if abs(z) >= radius:
        raise RadiusError(f"|z|={abs(z):.6g} is outside the disc of radius {radius:.6g}")
    n = A.shape[0]
    if z == 0 or opnorm(B) == 0:
        return TaylorResult(np.zeros((n, n), dtype=complex), radius, 0.0, 0, 0.0)
    q = abs(z) * cert.m_A * opnorm(B)
    fm = first_moment(f.measure)
    lead = cert.m_A * fm / (1.0 - q)
    if N is None:
        N = 1
        while lead * q ** (N + 1) >= TAYLOR_TAIL_TOL and N < TAYLOR_MAX_TERMS:
            N += 1
    w = np.linalg.eigvals(A + z * B)
    a, b = cert.a, cert.b
    hit = [lam for lam in w if abs(lam.imag) <= 1e-12 and a <= lam.real <= b]
    if hit:
        raise NotInClassError(f"A + zB has eigenvalue {hit[0]!r} in [{a:g}, {b:g}]",
                              eigenvalue=hit[0])
    C = taylor_coeffs(f, A, B, N, cert)
    powers = z ** np.arange(1, N + 1)
    value = np.tensordot(powers, C, axes=(0, 0))
    return TaylorResult(value, radius, lead * q ** (N + 1), N, q)


def partial_sums(f: MarkovSymbol, A, B, z: complex, N: int, cert=None) -> np.ndarray:
    """All partial sums ``S_1 .. S_N`` (for convergence-rate measurements)."""
    C = taylor_coeffs(f, A, B, N, cert)
    powers = z ** np.arange(1, N + 1)
    return np.cumsum(powers[:, None, None] * C, axis=0)


@dataclass
class ContinuityProbe:
    value: float
    bound: float
    distance: float
    in_window: bool

    @property
    def holds(self) -> bool:
        return (not self.in_window) or self.value <= self.bound * (1 + 1e-8) + 1e-14


def frechet_continuity_probe(f: MarkovSymbol, A, A2, B, which: IdealNorm = OPERATOR,
                             cert: Optional[OperatorCertificate] = None) -> ContinuityProbe:
    """``||(D_{A'} - D_A)(B)||_I / ||B||_I`` against ``8 m_A^4 (int t dtau) ||A' - A||_I``.

    The bound is asserted only when ``||A' - A||_I < 1 / (2 m_A)``;
    outside that window ``in_window`` is false and the probe is reported only.
    """
    A, A2, B = as_matrix(A), as_matrix(A2), as_matrix(B)
    cert = _vab_cert(f, A, cert)
    nB = norm(B, which)
    dist = norm(A2 - A, which)
    if nB == 0:
        return ContinuityProbe(0.0, 0.0, dist, True)
    diff = frechet_derivative(f, A2, B) - frechet_derivative(f, A, B)
    value = norm(diff, which) / nB
    bound = 8.0 * cert.m_A ** 4 * first_moment(f.measure) * dist
    return ContinuityProbe(value, bound, dist, dist < 1.0 / (2.0 * cert.m_A))


def resolvent_perturbation(A, dA, t: complex):
    """Both sides of ``||R(t,A+dA) - R(t,A)|| <= ||dA|| ||R||^2 / (1 - ||dA|| ||R||)``.

    Requires ``||dA|| ||R(t,A)|| < 1``.
    """
    A, dA = as_matrix(A), as_matrix(dA)
    R = resolvent(A, t)
    r, d = opnorm(R), opnorm(dA)
    if not d * r < 1.0:
        raise ValueError("need ||dA|| ||R(t,A)|| < 1")
    lhs = opnorm(resolvent(A + dA, t) - R)
    return lhs, d * r * r / (1.0 - d * r)


FD_STEPS = (1e-3, 1e-4, 1e-5, 1e-6)


@dataclass
class FDCheck:
    steps: tuple
    errors: list
    slope: float
    order: int

    def to_dict(self) -> dict:
        return {"steps": list(self.steps), "errors": self.errors, "slope": self.slope,
                "quadrature_order": self.order}


def fd_order_check(f: MarkovSymbol, A, B, steps=FD_STEPS, order: Optional[int] = None) -> FDCheck:
    """Slope of ``log ||f(A+hB) - f(A) - h D_A(B)||`` against ``log h``.

    ``f`` is evaluated with one fixed quadrature order so that both matrix
    functions share their nodes; the slope should be about 2.
    """
    A, B = as_matrix(A), as_matrix(B)
    if order is None:
        _, res = apply(f, A, info=True)
        order = 2 * res.order if res is not None else 64
    F0 = apply(f, A, order=order)
    D = frechet_derivative(f, A, B)
    errs = [opnorm(apply(f, A + h * B, order=order) - F0 - h * D) for h in steps]
    x = np.log(np.asarray(steps))
    y = np.log(np.maximum(np.asarray(errs), 1e-300))
    slope = float(np.polyfit(x, y, 1)[0])
    return FDCheck(tuple(steps), [float(e) for e in errs], slope, int(order))
