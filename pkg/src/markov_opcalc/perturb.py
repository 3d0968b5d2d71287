"""Perturbation bounds for ``f(A) - f(B)`` and their numerical verification.

Each ``bound_*`` function computes both sides of one inequality and returns a
:class:`BoundReport`.  The inequalities are theorems, so ``holds`` must be
true for any valid input; a false value indicates a defect somewhere in the
computation (quadrature, certification, or the inputs violating a hypothesis).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CertificateMismatchError, PreconditionError
from .funcalc import apply
from .matrixcore import OPERATOR, IdealNorm, as_matrix, commutator, norm, opnorm, resolvent
from .measure import total_mass
from .opclass import OperatorCertificate, certify_V0b, check_covers
from .symbols import MarkovSymbol, evaluate, fprime_at_zero

BOUND_IDS = ("thm1", "thm2", "thm3", "cor1", "cor2", "cor4")
REL_TOL = 1e-8


@dataclass
class BoundReport:
    bound_id: str
    lhs: float
    rhs: float
    tolerance: float
    constants: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.tolerance

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "tolerance": self.tolerance,
            "constants": self.constants,
        }


def _report(bound_id, lhs, rhs, **constants) -> BoundReport:
    lhs, rhs = float(lhs), float(rhs)
    return BoundReport(bound_id, lhs, rhs, REL_TOL * (1.0 + abs(rhs)), constants)


def _scalar(f: MarkovSymbol, x: float) -> float:
    # closed forms stay exact for arguments near the support endpoint 0
    return float(np.real(evaluate(f, x, use_closed_form=f.closed_form is not None)))


def _cert(f: MarkovSymbol, A, cert: Optional[OperatorCertificate]) -> OperatorCertificate:
    if cert is None:
        return certify_V0b(A, f.interval[1])
    if cert.kind != "V0b":
        raise CertificateMismatchError("perturbation bounds need V(0,b] certificates")
    check_covers(cert, f.measure)
    return cert


def min_inequality(a: float, d: float, t: float):
    """Both sides of ``min(a, 1/t) <= (1 + a d) / (t + d)`` for ``a, d, t > 0``."""
    return min(a, 1.0 / t), (1.0 + a * d) / (t + d)


def bound_thm1(f: MarkovSymbol, A, B, cert_A=None, cert_B=None) -> BoundReport:
    """``||f(A) - f(B)|| <= -(M_A + M_B + M_A M_B) f(-||A - B||)`` in operator norm."""
    A, B = as_matrix(A), as_matrix(B)
    cA, cB = _cert(f, A, cert_A), _cert(f, B, cert_B)
    d = opnorm(A - B)
    lhs = opnorm(apply(f, A, cA) - apply(f, B, cB))
    K = cA.M_A + cB.M_A + cA.M_A * cB.M_A
    rhs = -K * _scalar(f, -d) if d > 0 else 0.0
    return _report("thm1", lhs, rhs, M_A=cA.M_A, M_B=cB.M_A, norm_A_minus_B=d, ideal="operator")


def commutation_defect(A, B, nodes) -> float:
    """``max_t ||[A - B, R(t,B)]|| / (||A - B|| ||R(t,B)||)`` over ``nodes``."""
    D = A - B
    dn = opnorm(D)
    if dn == 0:
        return 0.0
    worst = 0.0
    for t in nodes:
        R = resolvent(B, t)
        worst = max(worst, opnorm(commutator(D, R)) / (dn * opnorm(R)))
    return worst


def bound_thm2_pointwise(f: MarkovSymbol, A, B, x, cert_A=None, cert_B=None,
                         threshold: float = 1e-10) -> BoundReport:
    """``||(f(A) - f(B)) x|| <= -(M_A + M_B + M_A M_B) f(-||(A - B) x||)``.

    Requires ``A - B`` to commute with ``R(t,B)`` at every quadrature node;
    raises :class:`PreconditionError` otherwise.
    """
    A, B = as_matrix(A), as_matrix(B)
    x = np.asarray(x, dtype=complex).reshape(-1)
    cA, cB = _cert(f, A, cert_A), _cert(f, B, cert_B)
    ts, _ = f.measure.nodes()
    defect = commutation_defect(A, B, ts)
    if defect > threshold:
        raise PreconditionError(
            f"A - B does not commute with R(t,B): relative commutator {defect:.3g}"
        )
    d = float(np.linalg.norm((A - B) @ x))
    lhs = float(np.linalg.norm((apply(f, A, cA) - apply(f, B, cB)) @ x))
    K = cA.M_A + cB.M_A + cA.M_A * cB.M_A
    rhs = -K * _scalar(f, -d) if d > 0 else 0.0
    return _report("thm2", lhs, rhs, M_A=cA.M_A, M_B=cB.M_A, norm_x=float(np.linalg.norm(x)),
                   norm_dx=d, commutation_defect=defect)


def bound_thm3_ideal(f: MarkovSymbol, A, B, which: IdealNorm = OPERATOR,
                     cert_A=None, cert_B=None) -> BoundReport:
    """``||f(A) - f(B)||_I <= M_A M_B f'(-0) ||A - B||_I``."""
    A, B = as_matrix(A), as_matrix(B)
    cA, cB = _cert(f, A, cert_A), _cert(f, B, cert_B)
    fp0 = fprime_at_zero(f)
    lhs = norm(apply(f, A, cA) - apply(f, B, cB), which)
    dI = norm(A - B, which)
    rhs = cA.M_A * cB.M_A * fp0 * dI
    return _report("thm3", lhs, rhs, M_A=cA.M_A, M_B=cB.M_A, fprime0=fp0, ideal=which.label,
                   norm_A_minus_B=dI)


def moment_inequalities(f: MarkovSymbol, A, x, cert=None):
    """Reports for ``||f(A)x|| <= -(2M_A + 1) f(-||Ax||)`` and
    ``||f(A)x|| <= (2M_A + 1) f'(-0) ||Ax||``, ``x`` normalized first.

    The first right-hand side never exceeds the second (``-f(-s) <= f'(-0) s``);
    this ordering is recorded in both reports.
    """
    A = as_matrix(A)
    x = np.asarray(x, dtype=complex).reshape(-1)
    nx = float(np.linalg.norm(x))
    if nx == 0:
        raise ValueError("x must be nonzero")
    x = x / nx
    c = _cert(f, A, cert)
    s = float(np.linalg.norm(A @ x))
    lhs = float(np.linalg.norm(apply(f, A, c) @ x))
    K = 2.0 * c.M_A + 1.0
    fp0 = fprime_at_zero(f)
    r1 = -K * _scalar(f, -s) if s > 0 else 0.0
    r2 = K * fp0 * s
    ordered = r1 <= r2 * (1.0 + REL_TOL) + REL_TOL
    common = dict(M_A=c.M_A, norm_Ax=s, input_norm=nx, fprime0=fp0, rhs_ordered=bool(ordered))
    return _report("cor1", lhs, r1, **common), _report("cor2", lhs, r2, **common)


def commutator_bound(f: MarkovSymbol, A, U, which: IdealNorm = OPERATOR, cert=None,
                     unitary_tol: float = 1e-10) -> BoundReport:
    """``||[f(A), U]||_I <= M_A^2 f'(-0) ||[A, U]||_I`` for unitary ``U``.

    For a general invertible ``U`` the constant becomes
    ``M_A M_{UAU^-1} ||U|| ||U^-1||`` (the similarity changes resolvent norms);
    it reduces to ``M_A^2`` when ``U`` is unitary.
    """
    A, U = as_matrix(A), as_matrix(U)
    sv = np.linalg.svd(U, compute_uv=False)
    if sv[-1] <= 1e-14 * max(sv[0], 1.0):
        raise PreconditionError("U is singular")
    c = _cert(f, A, cert)
    fp0 = fprime_at_zero(f)
    unitary = bool(np.max(np.abs(sv - 1.0)) <= unitary_tol)
    if unitary:
        M_sim = c.M_A
        kappa = 1.0
    else:
        Uinv = np.linalg.inv(U)
        M_sim = certify_V0b(U @ A @ Uinv, c.b).M_A
        kappa = float(sv[0] / sv[-1])
    lhs = norm(commutator(apply(f, A, c), U), which)
    cn = norm(commutator(A, U), which)
    rhs = c.M_A * M_sim * kappa * fp0 * cn
    return _report("cor4", lhs, rhs, M_A=c.M_A, M_UAU_inv=M_sim, cond_U=kappa, unitary=unitary,
                   fprime0=fp0, ideal=which.label, norm_commutator=cn)


@dataclass
class SweepReport:
    ratios: list
    bounds: list
    lhs: list
    distances: list
    holds: bool
    decays: bool
    constants_bounded: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def stability_sweep(f: MarkovSymbol, pairs: Sequence, which: IdealNorm = OPERATOR,
                    const_limit: float = 1e6) -> SweepReport:
    """Track ``||f(A_n) - f(B_n)||_I`` along a sequence of pairs.

    Each ratio ``||f(A_n)-f(B_n)||_I / ||A_n-B_n||_I`` is checked against
    ``M_{A_n} M_{B_n} f'(-0)``.  ``decays`` reports whether the differences
    shrink whenever ``||A_n - B_n||_I`` does.
    """
    fp0 = fprime_at_zero(f)
    ratios, bounds, lhs_list, dists, Ms = [], [], [], [], []
    holds = True
    for A, B in pairs:
        r = bound_thm3_ideal(f, A, B, which)
        d = r.constants["norm_A_minus_B"]
        lhs_list.append(r.lhs)
        dists.append(d)
        ratios.append(r.lhs / d if d > 0 else 0.0)
        bounds.append(r.constants["M_A"] * r.constants["M_B"] * fp0)
        Ms += [r.constants["M_A"], r.constants["M_B"]]
        holds = holds and r.holds
    bounded = max(Ms, default=0.0) <= const_limit
    if not bounded:
        raise PreconditionError(f"certified constants reach {max(Ms):.3g} across the sweep")
    decays = all(
        (l1 <= l0 * (1 + 1e-9) + 1e-15) for (l0, l1, d0, d1)
        in zip(lhs_list, lhs_list[1:], dists, dists[1:]) if d1 < d0
    )
    return SweepReport(ratios, bounds, lhs_list, dists, holds, decays, bounded)


def continuity_chain(symbols: Sequence[MarkovSymbol], A, cert=None):
    """For symbols with ``f_n'(-0) -> 0``: rows of
    ``(||f_n(A)||, (1 + M_A) tau_n-mass, (1 + M_A) b f_n'(-0))``, each bounded by the next."""
    A = as_matrix(A)
    rows = []
    for f in symbols:
        c = _cert(f, A, cert)
        val = opnorm(apply(f, A, c))
        mass = (1.0 + c.M_A) * total_mass(f.measure)
        top = (1.0 + c.M_A) * f.interval[1] * fprime_at_zero(f)
        rows.append((val, mass, top))
    return rows
