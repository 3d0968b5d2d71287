"""Representing measures and integration against them.

A representing measure is a finite sum of point masses and Jacobi-type
densities ``c * (t - a)**p * (b - t)**q * h(t)`` on ``[a, b]``.  Densities are
integrated with Gauss-Jacobi rules whose weight matches the endpoint exponents,
so algebraic endpoint singularities cost nothing and smooth integrands converge
geometrically in the number of nodes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.special import gammaln

from .config import pmap
from .errors import DivergenceError, QuadratureError

DEFAULT_ORDER = 64
MAX_ORDER = 1024
MOMENT_RTOL = 1e-8


def gauss_jacobi(n: int, alpha: float, beta: float):
    """Gauss rule for the weight ``(1 - x)**alpha * (1 + x)**beta`` on ``[-1, 1]``.

    Nodes are eigenvalues of the Jacobi matrix (Golub-Welsch); weights are
    reciprocals of the Christoffel sum ``sum_k p_k(x)**2`` of the orthonormal
    polynomials, which stays accurate to larger ``n`` than derivative-based
    weight formulas when the endpoint exponents are negative.
    """
    k = np.arange(n, dtype=float)
    s = 2.0 * k + alpha + beta
    with np.errstate(invalid="ignore", divide="ignore"):
        diag = (beta * beta - alpha * alpha) / (s * (s + 2.0))
    diag[0] = (beta - alpha) / (alpha + beta + 2.0)
    kk = k[1:]
    ss = 2.0 * kk + alpha + beta
    with np.errstate(invalid="ignore", divide="ignore"):
        off2 = (4.0 * kk * (kk + alpha) * (kk + beta) * (kk + alpha + beta)
                / (ss * ss * (ss + 1.0) * (ss - 1.0)))
    if n > 1:
        # k = 1 has a removable 0/0 when alpha + beta = -1
        off2[0] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + alpha + beta) ** 2 * (3.0 + alpha + beta))
    off = np.sqrt(off2)
    x = eigvalsh_tridiagonal(diag, off) if n > 1 else diag.copy()
    mu0 = math.exp((alpha + beta + 1.0) * math.log(2.0) + gammaln(alpha + 1.0)
                   + gammaln(beta + 1.0) - gammaln(alpha + beta + 2.0))
    prev = np.zeros_like(x)
    cur = np.full_like(x, 1.0 / math.sqrt(mu0))
    acc = cur * cur
    for j in range(n - 1):
        nxt = ((x - diag[j]) * cur - (off[j - 1] * prev if j > 0 else 0.0)) / off[j]
        prev, cur = cur, nxt
        acc += cur * cur
    w = 1.0 / acc
    # the weights must sum to the zeroth moment; enforcing it halves the error
    return x, w * (mu0 / np.sum(w))


@lru_cache(maxsize=256)
def _jacobi_reference(n: int, p: float, q: float):
    # (1 - x)**q pairs with (b - t)**q, (1 + x)**p with (t - a)**p
    x, w = gauss_jacobi(n, q, p)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def jacobi_rule(a: float, b: float, p: float, q: float, n: int):
    """Nodes and weights for ``int_a^b (t-a)**p (b-t)**q g(t) dt``."""
    x, w = _jacobi_reference(int(n), float(p), float(q))
    half = 0.5 * (b - a)
    t = a + half * (1.0 + x)
    return t, w * half ** (p + q + 1.0)


@dataclass(frozen=True)
class JacobiDensity:
    """Density ``c (t-a)^p (b-t)^q h(t)`` on the support interval of the measure."""

    p: float
    q: float
    c: float = 1.0
    factor: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.p > -1.0 and self.q > -1.0):
            raise ValueError(f"endpoint exponents must exceed -1, got p={self.p}, q={self.q}")
        if not self.c > 0.0:
            raise ValueError(f"density coefficient must be positive, got c={self.c}")

    def weights(self, a, b, n, shift=0.0):
        """Rule for this part with the power ``(t-a)**shift`` absorbed into the weight."""
        p = self.p + shift
        if p <= -1.0:
            raise DivergenceError(
                f"(t-a)^{p:g} is not integrable at the left endpoint t={a:g}"
            )
        t, w = jacobi_rule(a, b, p, self.q, n)
        w = self.c * w
        if self.factor is not None:
            w = w * np.asarray(self.factor(t), dtype=float)
        return t, w


@dataclass(frozen=True)
class RepresentingMeasure:
    """Positive measure on ``(a, b]`` (or ``[a, b]``) made of atoms and densities.

    Parameters
    ----------
    a, b : float
        Support interval, ``0 <= a < b``.
    atoms : tuple of (position, weight)
        Point masses; positions must lie in ``(a, b]`` when ``a == 0`` and in
        ``[a, b]`` otherwise.
    densities : tuple of JacobiDensity
    order : int
        Gauss-Jacobi nodes per density part.
    """

    a: float
    b: float
    atoms: tuple = ()
    densities: tuple = ()
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (a >= 0.0 and b > a):
            raise ValueError(f"support must satisfy 0 <= a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        for t, w in atoms:
            if not w > 0.0:
                raise ValueError(f"atom weight must be positive, got {w} at t={t}")
            if t == 0.0:
                raise ValueError("atom at t=0 makes the inverse moment diverge")
            if not (a <= t <= b):
                raise ValueError(f"atom position {t} outside [{a}, {b}]")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "densities", tuple(self.densities))
        if int(self.order) < 1:
            raise ValueError("quadrature order must be >= 1")
        object.__setattr__(self, "order", int(self.order))

    # -- structure ---------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        return not self.atoms and not self.densities

    @property
    def support_hull(self):
        """Smallest interval containing all mass, or ``None`` for the zero measure."""
        pts = [t for t, _ in self.atoms]
        if self.densities:
            pts += [self.a, self.b]
        if not pts:
            return None
        return min(pts), max(pts)

    def distance_to_support(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        d = np.full(z.shape, np.inf)
        for t, _ in self.atoms:
            d = np.minimum(d, np.abs(z - t))
        if self.densities:
            x = np.clip(z.real, self.a, self.b)
            d = np.minimum(d, np.abs(z - x))
        return d

    def nodes(self, order: Optional[int] = None, shift: float = 0.0):
        """All quadrature nodes and weights (atoms first, then density parts).

        ``shift`` multiplies the measure by ``(t - a)**shift`` exactly when
        ``a == 0`` by moving the power into the Jacobi weight; used for moments
        that are singular at the origin.
        """
        n = self.order if order is None else int(order)
        ts, ws = [], []
        if self.atoms:
            t = np.array([t for t, _ in self.atoms])
            w = np.array([w for _, w in self.atoms])
            if shift:
                w = w * (t - self.a) ** shift
            ts.append(t)
            ws.append(w)
        for part in self.densities:
            t, w = part.weights(self.a, self.b, n, shift)
            ts.append(t)
            ws.append(w)
        if not ts:
            return np.empty(0), np.empty(0)
        return np.concatenate(ts), np.concatenate(ws)

    def with_order(self, order: int) -> "RepresentingMeasure":
        return replace(self, order=int(order))

    def scaled(self, c: float) -> "RepresentingMeasure":
        """The measure ``c * tau`` for ``c > 0``."""
        if not c > 0:
            raise ValueError("scale must be positive")
        atoms = tuple((t, c * w) for t, w in self.atoms)
        dens = tuple(replace(d, c=c * d.c) for d in self.densities)
        return replace(self, atoms=atoms, densities=dens)

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        for d in self.densities:
            if d.factor is not None:
                raise ValueError("densities with a smooth factor are not serializable")
        return {
            "a": self.a,
            "b": self.b,
            "atoms": [[t, w] for t, w in self.atoms],
            "densities": [{"p": d.p, "q": d.q, "c": d.c, "kind": "jacobi"} for d in self.densities],
            "order": self.order,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RepresentingMeasure":
        dens = []
        for d in data.get("densities", []):
            kind = d.get("kind", "jacobi")
            if kind != "jacobi":
                raise ValueError(f"unsupported density kind {kind!r}")
            dens.append(JacobiDensity(p=float(d["p"]), q=float(d["q"]), c=float(d.get("c", 1.0))))
        return cls(
            a=float(data["a"]),
            b=float(data["b"]),
            atoms=tuple((float(t), float(w)) for t, w in data.get("atoms", [])),
            densities=tuple(dens),
            order=int(data.get("order", DEFAULT_ORDER)),
        )


def _accumulate(ts, ws, integrand):
    total = None
    comp = None
    values = pmap(integrand, [float(t) for t in ts])
    for t, w, v in zip(ts, ws, values):
        v = np.asarray(v) if not np.isscalar(v) else v
        if not np.all(np.isfinite(v)):
            raise QuadratureError(f"integrand is not finite at node t={t!r}", node=float(t))
        term = w * v
        if total is None:
            total = term
            comp = 0.0 * term
            continue
        # Neumaier compensated sum keeps the order-dependence below roundoff.
        s = total + term
        big = np.abs(total) >= np.abs(term)
        comp = comp + np.where(big, (total - s) + term, (term - s) + total)
        total = s
    if total is None:
        return 0.0
    out = total + comp
    if np.ndim(out) == 0:
        return out.item() if isinstance(out, np.ndarray) else out
    return out


def integrate(measure: RepresentingMeasure, integrand: Callable[[float], Any],
              order: Optional[int] = None, shift: float = 0.0):
    """Sum of ``w_k * g(t_k)`` over atoms and Gauss-Jacobi nodes.

    ``integrand`` takes a real ``t`` and returns a scalar or an ndarray.
    Raises :class:`QuadratureError` on a non-finite integrand value.
    """
    ts, ws = measure.nodes(order, shift)
    return _accumulate(ts, ws, integrand)


@dataclass
class QuadResult:
    value: Any
    order: int
    error: float
    converged: bool


def _norm(x) -> float:
    return float(np.max(np.abs(x))) if np.ndim(x) else abs(x)


def integrate_adaptive(measure: RepresentingMeasure, integrand, rtol: float = 1e-10,
                       max_order: int = MAX_ORDER, order: Optional[int] = None,
                       shift: float = 0.0) -> QuadResult:
    """Integrate with density order doubling until the relative change is below ``rtol``.

    Atoms are exact and are evaluated once.  Emits a ``RuntimeWarning`` if
    ``max_order`` is reached without convergence.
    """
    n = measure.order if order is None else int(order)
    atom_only = replace(measure, densities=())
    atom_part = integrate(atom_only, integrand, shift=shift) if measure.atoms else 0.0
    if not measure.densities:
        return QuadResult(atom_part, n, 0.0, True)
    dens_only = replace(measure, atoms=())
    prev = integrate(dens_only, integrand, n, shift)
    while True:
        n2 = 2 * n
        cur = integrate(dens_only, integrand, n2, shift)
        err = _norm(cur - prev)
        scale = 1.0 + _norm(atom_part + cur)
        if err <= rtol * scale:
            return QuadResult(atom_part + cur, n2, err, True)
        if n2 >= max_order:
            warnings.warn(
                f"quadrature did not reach rtol={rtol:g} by order {n2} (change {err:.3g})",
                RuntimeWarning,
                stacklevel=2,
            )
            return QuadResult(atom_part + cur, n2, err, False)
        prev, n = cur, n2


def total_mass(measure: RepresentingMeasure) -> float:
    return float(integrate(measure, lambda t: 1.0))


def _stable_moment(measure: RepresentingMeasure, power: int) -> float:
    # Exact when density factors are polynomial; checked by order doubling otherwise.
    if measure.a == 0.0:
        vals = [integrate(measure, lambda t: 1.0, n, shift=float(power))
                for n in (measure.order, 2 * measure.order)]
    else:
        vals = [integrate(measure, lambda t: t ** power, n)
                for n in (measure.order, 2 * measure.order)]
    lo, hi = (float(np.real(v)) for v in vals)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DivergenceError(f"moment of order {power} is not finite")
    if abs(hi - lo) > MOMENT_RTOL * max(abs(hi), 1e-300):
        raise DivergenceError(
            f"moment of order {power} unstable under order doubling: {lo!r} -> {hi!r}"
        )
    return hi


def inverse_moment(measure: RepresentingMeasure) -> float:
    """``int dtau(t) / t``; equals ``f'(-0)`` of the associated symbol.

    Raises :class:`DivergenceError` when the density is too singular at the
    origin or the value is unstable under order doubling.
    """
    if measure.is_empty:
        return 0.0
    return _stable_moment(measure, -1)


def first_moment(measure: RepresentingMeasure) -> float:
    """``int t dtau(t)``."""
    if measure.is_empty:
        return 0.0
    return _stable_moment(measure, 1)
