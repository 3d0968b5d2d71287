"""Spectral shift function and the trace formula
``tr(f(A) - f(B)) = (1/2 pi i) oint xi(z) f'(z) dz``.

``phi(z) = tr(R(z,A) (A - B) R(z,B))`` is analytic near ``[a, b]`` when that
interval lies in both resolvent sets; ``xi`` is an antiderivative of ``phi``,
built numerically by integrating ``phi`` along the contour from an anchor.
``xi`` is only defined up to an additive constant, which drops out of the
contour integral because ``oint f'(z) dz = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .config import pmap
from .contours import ContourSpec
from .errors import ContourError
from .funcalc import apply
from .matrixcore import TRACE, as_matrix, norm, opnorm, resolvent, trace
from .measure import integrate_adaptive
from .opclass import certify_Vab
from .symbols import MarkovSymbol, eval_derivative

ARC_GL = 8
CLOSURE_RTOL = 1e-9
CONTOUR_RTOL = 1e-10
MAX_NODES = 2 ** 13


@lru_cache(maxsize=8)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def phi(A, B, z) -> complex:
    """``tr(R(z,A) (A - B) R(z,B))``."""
    A, B = as_matrix(A), as_matrix(B)
    return _phi(A, B, A - B, z)


def _phi(A, B, D, z):
    RA = resolvent(A, z)
    RB = resolvent(B, z)
    return complex(np.einsum("ij,ji->", RA, D @ RB))


def _phi_many(A, B, D, zs):
    return np.array(pmap(lambda z: _phi(A, B, D, z), list(np.ravel(zs))), dtype=complex)


def _segment_integral(A, B, D, z0, z1, panels: int = 4):
    x, w = _gl(ARC_GL)
    edges = np.linspace(0.0, 1.0, panels + 1)
    total = 0j
    for e0, e1 in zip(edges[:-1], edges[1:]):
        u = e0 + (e1 - e0) * x
        zs = z0 + u * (z1 - z0)
        total += np.sum(w * _phi_many(A, B, D, zs)) * (e1 - e0) * (z1 - z0)
    return total


def phi_cauchy_check(A, B, z: complex, radius: float, nodes: int = 64) -> float:
    """``|phi(z) - (1/2 pi i) oint phi(w)/(w - z) dw|`` over a circle around ``z``.

    Small values certify that ``phi`` is analytic in the disc.
    """
    A, B = as_matrix(A), as_matrix(B)
    D = A - B
    th = 2.0 * math.pi * np.arange(nodes) / nodes
    w = z + radius * np.exp(1j * th)
    vals = _phi_many(A, B, D, w)
    # dw / (w - z) = i dth
    cauchy = np.mean(vals)
    return abs(_phi(A, B, D, z) - cauchy)


def default_anchor(contour: ContourSpec) -> complex:
    """Real point left of the enclosed interval: ``a - minor/2``."""
    c = contour.center
    if contour.kind == "ellipse":
        e = math.sqrt(max(contour.rx ** 2 - contour.ry ** 2, 0.0))
        return complex(c.real - e - 0.5 * contour.ry, c.imag)
    return complex(c.real - 0.5 * contour.length - 0.5 * contour.radius, c.imag)


@dataclass
class ShiftFunction:
    """Values of ``xi`` at the quadrature nodes of a contour."""

    anchor: complex
    contour: ContourSpec
    s: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    dz: np.ndarray = field(repr=False)
    closure_defect: float
    path_rule: str = f"gauss-legendre-{ARC_GL}-per-arc"
    _ops: tuple = field(default=(), repr=False)

    def value_at(self, z: complex) -> complex:
        """``xi(z)`` by integrating ``phi`` along the segment from the anchor."""
        A, B, D = self._ops
        return _segment_integral(A, B, D, self.anchor, complex(z))

    def to_rows(self):
        return [(float(zk.real), float(zk.imag), float(v.real), float(v.imag))
                for zk, v in zip(self.z, self.values)]


def build_xi(A, B, contour: ContourSpec, anchor: Optional[complex] = None,
             n: Optional[int] = None) -> ShiftFunction:
    """Antiderivative of ``phi`` at the contour nodes, ``xi(anchor) = 0``.

    ``xi`` is accumulated arc by arc (Gauss-Legendre per arc) starting from the
    contour's leftmost point, which is joined to the anchor by a segment.
    Raises :class:`ContourError` if the integral of ``phi`` around the contour
    does not vanish to ``1e-9 (1 + max|xi|)`` (the contour then leaves the
    region where ``phi`` is analytic) or if the contour encloses an eigenvalue.
    """
    A, B = as_matrix(A), as_matrix(B)
    D = A - B
    eigs = np.concatenate([np.linalg.eigvals(A), np.linalg.eigvals(B)])
    if np.any(contour.contains(eigs)):
        raise ContourError("contour encloses an eigenvalue of A or B; shrink it")
    anchor = default_anchor(contour) if anchor is None else complex(anchor)
    s, wq = contour.rule(n)
    z, zd = contour.point(s)
    z0, _ = contour.point(np.array([0.0]))
    start = _segment_integral(A, B, D, anchor, complex(z0[0]))

    x, w = _gl(ARC_GL)
    edges = np.concatenate([[0.0], s, [1.0]])
    edges = np.unique(edges)
    lo, hi = edges[:-1], edges[1:]
    u = lo[:, None] + (hi - lo)[:, None] * x[None, :]
    zu, dzu = contour.point(u.ravel())
    ph = _phi_many(A, B, D, zu).reshape(u.shape)
    arcs = np.sum(ph * dzu.reshape(u.shape) * w[None, :], axis=1) * (hi - lo)
    cum = start + np.concatenate([[0.0], np.cumsum(arcs)])
    # cum[k] is xi at edges[k]; pick the nodes s
    idx = np.searchsorted(edges, s)
    values = cum[idx]
    closure = abs(np.sum(arcs))
    scale = 1.0 + float(np.max(np.abs(values)))
    if closure > CLOSURE_RTOL * scale:
        raise ContourError(
            f"phi does not integrate to zero around the contour (defect {closure:.3g}); "
            "the contour leaves the analyticity region, shrink it"
        )
    return ShiftFunction(anchor, contour, s, z, values, zd * wq, closure, _ops=(A, B, D))


def contour_for_pair(A, B, a: float, b: float, node_count: int = 256) -> ContourSpec:
    """Ellipse with foci ``a``, ``b`` and minor semi-axis half the distance to the spectra."""
    eigs = np.concatenate([np.linalg.eigvals(as_matrix(A)), np.linalg.eigvals(as_matrix(B))])
    d = float(np.min(np.abs(eigs - np.clip(eigs.real, a, b))))
    if not d > 0:
        raise ContourError("spectrum touches [a, b]")
    return ContourSpec.around_interval(a, b, 0.5 * d, node_count)


@dataclass
class TraceFormulaReport:
    direct: complex
    kernel: complex
    contour: complex
    nodes: int
    closure_defect: float
    fprime_loop: float
    anchor_shift_delta: float
    cauchy_points: list
    cauchy_max_error: float
    bilinear_ratio: float
    tolerance: float
    xi: Optional[ShiftFunction] = field(default=None, repr=False)

    @property
    def agree(self) -> bool:
        tol = self.tolerance * (1.0 + abs(self.direct))
        return (abs(self.kernel - self.direct) <= tol
                and abs(self.contour - self.direct) <= tol)

    def to_dict(self) -> dict:
        c = lambda v: [float(np.real(v)), float(np.imag(v))]
        return {
            "direct": c(self.direct),
            "kernel": c(self.kernel),
            "contour": c(self.contour),
            "agree": self.agree,
            "tolerance": self.tolerance,
            "nodes": self.nodes,
            "closure_defect": self.closure_defect,
            "fprime_loop": self.fprime_loop,
            "anchor_shift_delta": self.anchor_shift_delta,
            "cauchy_max_error": self.cauchy_max_error,
            "bilinear_ratio": self.bilinear_ratio,
            "contour_spec": self.xi.contour.to_dict() if self.xi else None,
        }


def _contour_value(f, xi: ShiftFunction):
    dz = xi.dz
    fp = np.asarray(eval_derivative(f, xi.z), dtype=complex)
    return np.sum(xi.values * fp * dz) / (2j * math.pi), abs(np.sum(fp * dz))


def trace_formula_check(f: MarkovSymbol, A, B, contour: Optional[ContourSpec] = None,
                        anchor: Optional[complex] = None, tolerance: float = 1e-7,
                        cauchy_count: int = 5) -> TraceFormulaReport:
    """Compute ``tr(f(A) - f(B))`` three ways.

    (i) directly from the two matrix functions; (ii) as ``int phi(t) t dtau``;
    (iii) as ``(1/2 pi i) oint xi f' dz``, doubling contour nodes until the
    value is stable to ``1e-10``.  Also records the closure defect of ``xi``,
    ``|oint f'|``, the change of (iii) under a shifted anchor, the Cauchy
    identity ``phi(t) = (1/2 pi i) oint xi(z) / (z-t)^2 dz`` at interior points,
    and the largest ratio ``|phi| / (||R_A|| ||R_B|| ||A-B||_1)`` on the contour.
    """
    A, B = as_matrix(A), as_matrix(B)
    a, b = f.measure.a, f.measure.b
    certify_Vab(A, a, b)
    certify_Vab(B, a, b)
    if contour is None:
        contour = contour_for_pair(A, B, a, b)
    if not np.all(contour.contains(np.array([a, b, 0.5 * (a + b)]))):
        raise ContourError("contour does not enclose [a, b]")
    D = A - B

    direct = trace(apply(f, A) - apply(f, B))
    kern = integrate_adaptive(f.measure, lambda t: t * _phi(A, B, D, t), rtol=1e-13).value

    n = contour.node_count
    xi = build_xi(A, B, contour, anchor, n)
    val, loop = _contour_value(f, xi)
    while True:
        if 2 * n > MAX_NODES:
            raise ContourError("contour value not stable under node doubling")
        xi2 = build_xi(A, B, contour, anchor, 2 * n)
        val2, loop = _contour_value(f, xi2)
        n *= 2
        done = abs(val2 - val) <= CONTOUR_RTOL * (1.0 + abs(val2))
        xi, val = xi2, val2
        if done:
            break

    # anchor independence
    shift = 0.25 * (contour.ry if contour.kind == "ellipse" else contour.radius)
    other = xi.anchor + complex(0.0, shift)
    xi_b = build_xi(A, B, contour, other, n)
    val_b, _ = _contour_value(f, xi_b)

    # Cauchy derivative identity at interior points
    z, dz = xi.z, xi.dz
    ts = a + (b - a) * (np.arange(1, cauchy_count + 1) / (cauchy_count + 1))
    pts = []
    worst = 0.0
    for t in ts:
        direct_phi = _phi(A, B, D, t)
        via = np.sum(xi.values / (z - t) ** 2 * dz) / (2j * math.pi)
        err = abs(via - direct_phi) / (1.0 + abs(direct_phi))
        worst = max(worst, err)
        pts.append((float(t), complex(direct_phi), complex(via)))

    # nuclear-norm estimate of phi at a subsample of nodes
    dn = norm(D, TRACE)
    ratio = 0.0
    if dn > 0:
        for zk in z[:: max(1, len(z) // 64)]:
            RA, RB = resolvent(A, zk), resolvent(B, zk)
            ph = abs(np.einsum("ij,ji->", RA, D @ RB))
            ratio = max(ratio, ph / (opnorm(RA) * opnorm(RB) * dn))

    return TraceFormulaReport(
        direct=complex(direct), kernel=complex(kern), contour=complex(val), nodes=n,
        closure_defect=xi.closure_defect, fprime_loop=float(loop),
        anchor_shift_delta=float(abs(val_b - val)), cauchy_points=pts,
        cauchy_max_error=worst, bilinear_ratio=ratio, tolerance=tolerance, xi=xi,
    )
