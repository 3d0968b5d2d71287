"""Scalar Markov-type symbols ``f(z) = int z / (t - z) dtau(t)``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, DomainError
from .measure import (
    JacobiDensity,
    RepresentingMeasure,
    inverse_moment,
)

SCALAR_RTOL = 1e-13
SCALAR_MAX_ORDER = 512
MEMBERSHIP_TOL = 1e-12


class SymbolClass(str, enum.Enum):
    ZR_0b = "ZR_0b"  # z g(z), g Markov on [0, b] and continuous at 0
    ZR_ab = "ZR_ab"  # z g(z), g Markov on [a, b]


@dataclass(frozen=True)
class MarkovSymbol:
    """A symbol given by its representing measure, optionally with a closed form.

    ``measure`` may be ``None`` only for hand-built test functions that carry a
    closed form and nothing else; such objects can be checked for membership
    but cannot be applied to matrices.
    """

    measure: Optional[RepresentingMeasure]
    class_tag: SymbolClass = SymbolClass.ZR_0b
    closed_form: Optional[Callable] = field(default=None, compare=False)
    closed_form_derivative: Optional[Callable] = field(default=None, compare=False)
    name: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        if self.measure is None and self.closed_form is None:
            raise ValueError("a symbol needs a measure or a closed form")
        object.__setattr__(self, "class_tag", SymbolClass(self.class_tag))

    @property
    def interval(self):
        return (self.measure.a, self.measure.b)

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z):
        return eval_derivative(self, z)

    def scaled(self, c: float) -> "MarkovSymbol":
        cf = self.closed_form
        cd = self.closed_form_derivative
        return MarkovSymbol(
            measure=None if self.measure is None else self.measure.scaled(c),
            class_tag=self.class_tag,
            closed_form=None if cf is None else (lambda z, cf=cf: c * cf(z)),
            closed_form_derivative=None if cd is None else (lambda z, cd=cd: c * cd(z)),
            name=f"{c:g}*{self.name}",
            params=self.params,
        )

    def to_dict(self) -> dict:
        out = {"builtin": None, "measure": None}
        if self.name in ("example1a", "example1b") and self.params:
            alpha, b = self.params
            out.update(builtin=self.name, alpha=alpha, b=b)
        if self.measure is not None:
            out["measure"] = self.measure.to_dict()
        out["class"] = self.class_tag.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MarkovSymbol":
        builtin = data.get("builtin")
        if builtin == "example1a":
            return example1a(float(data["alpha"]), float(data["b"]))
        if builtin == "example1b":
            return example1b(float(data["alpha"]), float(data["b"]))
        if builtin is not None:
            raise ValueError(f"unknown builtin symbol {builtin!r}")
        if data.get("measure") is None:
            raise ValueError("symbol literal needs a measure or a builtin")
        m = RepresentingMeasure.from_dict(data["measure"])
        tag = data.get("class") or (SymbolClass.ZR_0b if m.a == 0.0 else SymbolClass.ZR_ab)
        return cls(measure=m, class_tag=SymbolClass(tag))


def _check_domain(symbol: MarkovSymbol, z: np.ndarray):
    if symbol.measure is None:
        return
    d = symbol.measure.distance_to_support(z)
    bad = np.flatnonzero(d <= 0.0)
    if bad.size:
        raise DomainError(f"z={z.ravel()[bad[0]]!r} lies on the support of the measure")


def _measure_sum(measure: RepresentingMeasure, kernel, z: np.ndarray):
    """Vectorized ``sum_k w_k kernel(t_k, z)`` with density order doubling."""
    zf = z.ravel()
    atoms = RepresentingMeasure(measure.a, measure.b, measure.atoms, (), measure.order)
    dens = RepresentingMeasure(measure.a, measure.b, (), measure.densities, measure.order)

    def apply(m, order):
        t, w = m.nodes(order)
        out = np.zeros(zf.shape, dtype=complex)
        if t.size == 0:
            return out
        step = max(1, 2**20 // t.size)
        for i in range(0, zf.size, step):
            out[i:i + step] = kernel(t[None, :], zf[i:i + step, None]) @ w
        return out

    base = apply(atoms, None)
    if not measure.densities:
        return base.reshape(z.shape)
    n = measure.order
    prev = apply(dens, n)
    while True:
        cur = apply(dens, 2 * n)
        scale = 1.0 + np.abs(base + cur)
        done = np.abs(cur - prev) <= SCALAR_RTOL * scale
        n *= 2
        if np.all(done) or n >= SCALAR_MAX_ORDER:
            return (base + cur).reshape(z.shape)
        prev = cur


def _at_nonzero(symbol, za, kernel, at_zero):
    # z = 0 is admissible even when 0 is in the support: the integrand of f
    # vanishes there, and that of f' tends to 1/t.
    zero = za == 0
    if not np.any(zero) or symbol.measure is None:
        _check_domain(symbol, za)
        return kernel(za)
    out = np.empty(za.shape, dtype=complex)
    nz = ~zero
    if np.any(nz):
        _check_domain(symbol, za[nz])
        out[nz] = kernel(za[nz])
    out[zero] = at_zero()
    return out


def evaluate(symbol: MarkovSymbol, z, use_closed_form: bool = False):
    """``f(z) = int z / (t - z) dtau(t)``.

    Evaluation goes through the representing measure unless
    ``use_closed_form`` is set (or the symbol has no measure).  Accepts scalars
    and arrays.  ``f(0) = 0``; any other ``z`` on the support raises
    :class:`DomainError`.
    """
    za = np.asarray(z, dtype=complex)
    if symbol.measure is None or (use_closed_form and symbol.closed_form is not None):
        kern = lambda w: np.asarray(symbol.closed_form(w), dtype=complex)
    else:
        kern = lambda w: _measure_sum(symbol.measure, lambda t, z: z / (t - z), w)
    out = _at_nonzero(symbol, za, kern, lambda: 0.0)
    return out.item() if out.ndim == 0 else out


def eval_derivative(symbol: MarkovSymbol, z, use_closed_form: bool = False):
    """``f'(z) = int t / (t - z)**2 dtau(t)``; at ``z = 0`` the inverse moment."""
    za = np.asarray(z, dtype=complex)
    if symbol.measure is None or (use_closed_form and symbol.closed_form_derivative is not None):
        if symbol.closed_form_derivative is None:
            raise ValueError("symbol has no closed-form derivative")
        kern = lambda w: np.asarray(symbol.closed_form_derivative(w), dtype=complex)
    else:
        kern = lambda w: _measure_sum(symbol.measure, lambda t, z: t / (t - z) ** 2, w)
    out = _at_nonzero(symbol, za, kern, lambda: fprime_at_zero(symbol))
    return out.item() if out.ndim == 0 else out


def fprime_at_zero(symbol: MarkovSymbol) -> float:
    """``f'(-0) = lim f(z)/z`` as ``z -> -0``, i.e. the inverse moment of the measure."""
    return inverse_moment(symbol.measure)


# -- built-ins ------------------------------------------------------------

def _pow_ratio(z, b, alpha):
    # principal branch of (z/(z-b))**alpha; the cut maps onto [0, b]
    return (z / (z - b)) ** alpha


def example1a(alpha: float = 0.5, b: float = 1.0) -> MarkovSymbol:
    """``z (1 - (z/(z-b))**alpha)``, a member of ZR(0, b] for ``0 < alpha < 1``.

    Representing density ``sin(pi alpha)/pi * (t/(b-t))**alpha`` on ``(0, b]``;
    total mass ``alpha * b`` and ``f'(-0) = 1``.
    """
    if not 0.0 < alpha < 1.0 or not b > 0.0:
        raise ValueError("need 0 < alpha < 1 and b > 0")
    c = math.sin(math.pi * alpha) / math.pi
    m = RepresentingMeasure(0.0, b, (), (JacobiDensity(p=alpha, q=-alpha, c=c),))

    def f(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z * (1.0 - _pow_ratio(z, b, alpha))
        return np.where(z == 0, 0.0, out)

    def df(z):
        z = np.asarray(z, dtype=complex)
        r = _pow_ratio(z, b, alpha)
        # d/dz (z/(z-b)) = -b/(z-b)**2, so d/dz r = alpha r * (-b) / (z (z-b))
        return 1.0 - r + alpha * b * r / (z - b)

    return MarkovSymbol(m, SymbolClass.ZR_0b, f, df, "example1a", (alpha, b))


def example1b(alpha: float = 0.5, b: float = 1.0) -> MarkovSymbol:
    """``z/(b-z) * (z/(z-b))**(alpha-1)``: in ZR[0, b] but not in ZR(0, b].

    Representing density ``sin(pi alpha)/pi * t**(alpha-1) (b-t)**(-alpha)``;
    total mass 1, inverse moment divergent.
    """
    if not 0.0 < alpha < 1.0 or not b > 0.0:
        raise ValueError("need 0 < alpha < 1 and b > 0")
    c = math.sin(math.pi * alpha) / math.pi
    m = RepresentingMeasure(0.0, b, (), (JacobiDensity(p=alpha - 1.0, q=-alpha, c=c),))

    def f(z):
        z = np.asarray(z, dtype=complex)
        return z / (b - z) * _pow_ratio(z, b, alpha - 1.0)

    def df(z):
        z = np.asarray(z, dtype=complex)
        r = _pow_ratio(z, b, alpha - 1.0)
        # log-derivative: 1/z + 1/(b-z) + (alpha-1)(-b)/(z(z-b))
        return z / (b - z) * r * (1.0 / z + 1.0 / (b - z) - (alpha - 1.0) * b / (z * (z - b)))

    return MarkovSymbol(m, SymbolClass.ZR_ab, f, df, "example1b", (alpha, b))


def atom_symbol(atoms, a: float = 0.0, b: Optional[float] = None,
                class_tag: Optional[SymbolClass] = None) -> MarkovSymbol:
    """Symbol of a purely atomic measure ``sum w_k delta_{t_k}``.

    Closed form ``sum w_k z / (t_k - z)`` is attached for cross-checks.
    """
    atoms = tuple((float(t), float(w)) for t, w in atoms)
    if b is None:
        b = max(t for t, _ in atoms)
    m = RepresentingMeasure(a, b, atoms)
    ts = np.array([t for t, _ in atoms])
    ws = np.array([w for _, w in atoms])

    def f(z):
        z = np.asarray(z, dtype=complex)
        return (z[..., None] / (ts - z[..., None])) @ ws

    def df(z):
        z = np.asarray(z, dtype=complex)
        return (ts / (ts - z[..., None]) ** 2) @ ws

    tag = class_tag or (SymbolClass.ZR_0b if a == 0.0 else SymbolClass.ZR_ab)
    return MarkovSymbol(m, tag, f, df, "atoms", atoms)


def jacobi_symbol(a: float, b: float, p: float, q: float, c: float = 1.0,
                  order: int = 64) -> MarkovSymbol:
    """Symbol of a single Jacobi density on ``[a, b]`` (no closed form)."""
    m = RepresentingMeasure(a, b, (), (JacobiDensity(p=p, q=q, c=c),), order)
    tag = SymbolClass.ZR_0b if a == 0.0 and p > 0.0 else SymbolClass.ZR_ab
    return MarkovSymbol(m, tag, name="custom")


# -- membership -----------------------------------------------------------

@dataclass
class MembershipReport:
    symbol: str
    class_tag: str
    sample_count: int
    tolerance: float
    violations: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "class": self.class_tag,
            "sample_count": self.sample_count,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "checks": self.checks,
            "violations": self.violations,
        }


def _sample(symbol, z):
    # Closed forms are exact near the support where quadrature is slow.
    if symbol.closed_form is not None:
        return np.asarray(symbol.closed_form(np.asarray(z, dtype=complex)), dtype=complex)
    return np.asarray(evaluate(symbol, z), dtype=complex)


def check_membership(symbol: MarkovSymbol, sample_count: int = 32,
                     tol: float = MEMBERSHIP_TOL,
                     as_class: Optional[SymbolClass] = None) -> MembershipReport:
    """Sampling test of the intrinsic characterization of ZR(0,b] / ZR[a,b].

    Checks: real and negative values on ``(-inf, 0)`` and ``(b, inf)``;
    ``Im(f(z)/z) >= 0`` on an upper half-plane polar grid; for ZR(0,b]
    additionally that ``f(z)/z`` has a finite limit as ``z -> -0``.
    Violations are collected, never raised.  ``as_class`` overrides the
    class the symbol is tested against.
    """
    cls = SymbolClass(as_class) if as_class is not None else symbol.class_tag
    if sample_count < 8:
        raise ValueError("sample_count must be >= 8")
    if symbol.measure is not None:
        b = symbol.interval[1]
    else:
        b = float(symbol.params[1]) if len(symbol.params) > 1 else 1.0
    rep = MembershipReport(symbol.name, cls.value, sample_count, tol)
    s = np.logspace(-3, 3, sample_count) * b

    def record(name, ok, detail=None):
        rep.checks[name] = bool(ok)
        if not ok:
            rep.violations.append({"check": name, "detail": detail})

    left = -s
    right = b + s
    for label, zs in (("negative_on_left", left), ("negative_on_right", right)):
        vals = _sample(symbol, zs)
        scale = 1.0 + np.abs(vals)
        bad = (np.abs(vals.imag) > tol * scale) | (vals.real > tol * scale)
        idx = np.flatnonzero(bad)
        record(label, idx.size == 0,
               None if idx.size == 0 else {"z": float(zs[idx[0]]), "f": str(vals[idx[0]])})

    r = np.logspace(-3, 3, sample_count) * b
    th = np.linspace(0.0, math.pi, sample_count + 2)[1:-1]
    zz = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    g = _sample(symbol, zz) / zz
    bad = g.imag < -tol * (1.0 + np.abs(g))
    idx = np.flatnonzero(bad)
    record("upper_half_plane", idx.size == 0,
           None if idx.size == 0 else {"z": str(zz[idx[0]]), "im_f_over_z": float(g.imag[idx[0]])})

    if cls is SymbolClass.ZR_0b:
        ok, detail = True, None
        if symbol.measure is not None:
            try:
                detail = {"inverse_moment": inverse_moment(symbol.measure)}
            except DivergenceError as exc:
                ok, detail = False, {"inverse_moment": str(exc)}
        if ok:
            # f(-s)/(-s) increases as s -> 0; a finite limit needs shrinking increments
            sk = 10.0 ** -np.arange(2, 12) * b
            gk = (_sample(symbol, -sk) / -sk).real
            inc = np.abs(np.diff(gk))
            grow = inc[1:] > inc[:-1] * (1.0 + 1e-9) + tol
            if np.any(grow) and inc[-1] > tol * (1.0 + abs(gk[-1])):
                ok = False
                detail = {"g_near_zero": gk.tolist()}
        record("continuous_at_zero", ok, detail)
    return rep
