"""Matrix functions ``f(A) = int A R(t,A) dtau(t)`` and two independent oracles."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .config import pmap
from .contours import ContourSpec, integrate_closed
from .errors import ContourError, IllConditionedError
from .matrixcore import as_matrix, eig, resolvent
from .measure import MAX_ORDER, QuadResult, integrate, integrate_adaptive, total_mass
from .opclass import OperatorCertificate, check_covers
from .symbols import MarkovSymbol, evaluate

APPLY_RTOL = 1e-10
EIG_COND_MAX = 1e6


def apply(f: MarkovSymbol, A, cert: Optional[OperatorCertificate] = None,
          rtol: float = APPLY_RTOL, max_order: int = MAX_ORDER, info: bool = False,
          order: Optional[int] = None):
    """``f(A)`` by quadrature of ``-I + t R(t,A)`` against the representing measure.

    The integrand is the stabilized form of ``A R(t,A)``; the two agree
    identically but the former does not amplify ``||A||`` for small ``t``.
    Quadrature order doubles until the relative change is below ``rtol``.

    Parameters
    ----------
    f : MarkovSymbol
    A : array_like
        Square matrix; its spectrum must avoid the support of the measure.
    cert : OperatorCertificate, optional
        If given, it must cover the support of ``f``'s measure.
    info : bool
        Also return the :class:`~markov_opcalc.measure.QuadResult`.
    order : int, optional
        Use exactly this many nodes per density part (no doubling); keeps the
        nodes identical across calls, as finite-difference checks require.
    """
    A = as_matrix(A)
    check_covers(cert, f.measure)
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    if f.measure.is_empty:
        out = np.zeros((n, n), dtype=complex)
        return (out, None) if info else out

    def integrand(t):
        return -eye + t * resolvent(A, t)

    if order is not None:
        res = QuadResult(integrate(f.measure, integrand, order), order, float("nan"), True)
    else:
        res = integrate_adaptive(f.measure, integrand, rtol=rtol, max_order=max_order)
    out = np.asarray(res.value, dtype=complex).reshape(n, n)
    return (out, res) if info else out


def oracle_eig(f: MarkovSymbol, A) -> np.ndarray:
    """``V diag(f(lambda_i)) V^{-1}`` with scalar evaluation of ``f``.

    Raises :class:`IllConditionedError` if the eigenbasis condition number
    exceeds ``1e6`` (this includes defective matrices).
    """
    A = as_matrix(A)
    e = eig(A)
    if e.condition > EIG_COND_MAX:
        raise IllConditionedError(
            f"eigenbasis condition {e.condition:.3g} exceeds {EIG_COND_MAX:g}"
        )
    fv = np.asarray(evaluate(f, e.values), dtype=complex).reshape(-1)
    V = e.vectors
    return np.linalg.solve(V.T, (V * fv).T).T


def default_contour(f: MarkovSymbol, A) -> ContourSpec:
    """Ellipse with foci at the ends of the support hull, half-way to the spectrum."""
    lo, hi = f.measure.support_hull
    w = np.linalg.eigvals(as_matrix(A))
    d = float(np.min(np.abs(w - np.clip(w.real, lo, hi))))
    if not d > 0:
        raise ContourError("spectrum touches the support; no separating contour exists")
    return ContourSpec.around_interval(lo, hi, 0.5 * d)


def oracle_contour(f: MarkovSymbol, A, contour: Optional[ContourSpec] = None,
                   rtol: float = 1e-9, max_nodes: int = 2 ** 14) -> np.ndarray:
    """``f(A)`` from a Cauchy integral over a closed contour.

    Two placements are accepted.  A contour enclosing the spectrum but not
    the support gives ``(1/2 pi i) oint f(z) R(z,A) dz``.  A contour
    enclosing the support but not the spectrum (the default) gives
    ``f(inf) I - (1/2 pi i) oint f(z) R(z,A) dz`` with ``f(inf) = -tau(total)``;
    the sign accounts for the exterior region being bounded by the contour
    traversed clockwise.  Nodes double until the result is stable to ``rtol``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if contour is None:
        contour = default_contour(f, A)
    w = np.linalg.eigvals(A)
    lo, hi = f.measure.support_hull
    supp_pts = np.array([t for t, _ in f.measure.atoms]
                        + (list(np.linspace(f.measure.a, f.measure.b, 33))
                           if f.measure.densities else []))
    spec_in = contour.contains(w)
    supp_in = contour.contains(supp_pts)
    if np.all(spec_in) and not np.any(supp_in):
        mode = "spectrum"
    elif np.all(supp_in) and not np.any(spec_in):
        mode = "support"
    else:
        raise ContourError("contour must separate the spectrum from the support of the measure")
    if contour.distance_to(np.concatenate([w, supp_pts])) <= 0.0:
        raise ContourError("contour passes through the spectrum or the support")

    def integrand(z):
        fz = np.asarray(evaluate(f, z), dtype=complex).reshape(-1)
        Rs = pmap(lambda zk: resolvent(A, zk), list(z))
        return fz[:, None, None] * np.stack(Rs)

    val, _, _ = integrate_closed(contour, integrand, rtol=rtol, max_nodes=max_nodes)
    val = val / (2j * np.pi)
    if mode == "spectrum":
        return val
    return -total_mass(f.measure) * np.eye(n, dtype=complex) - val
