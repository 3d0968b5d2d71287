"""Acceptance criteria 1-9, at their stated tolerances.

Each test is named ``test_criterion_<k>_...``; the terminal summary prints one
PASS/FAIL line per criterion with the measured worst case.
"""

import math

import numpy as np
import pytest

from markov_opcalc.errors import RadiusError
from markov_opcalc.fixtures import random_nonnormal, random_normal, random_unitary, rank_one_pair
from markov_opcalc.frechet import (fd_order_check, fprime_of_A, frechet_derivative, partial_sums,
                                   resolvent_perturbation, taylor_eval)
from markov_opcalc.funcalc import apply, oracle_contour, oracle_eig
from markov_opcalc.matrixcore import TRACE, IdealNorm, OPERATOR, opnorm, resolvent
from markov_opcalc.measure import inverse_moment, total_mass
from markov_opcalc.opclass import (certify_V0b, certify_Vab, ritt_inverse_plus_identity,
                                   ritt_operator)
from markov_opcalc.perturb import min_inequality
from markov_opcalc.shift import trace_formula_check
from markov_opcalc.suites import oracle_fixture, run_bound_suite
from markov_opcalc.symbols import example1a, example1b

SEED = 20240611


def _detail(record_property, text):
    record_property("detail", text)


# 1 -----------------------------------------------------------------------------

def test_criterion_1_oracle_triangle(record_property):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    # dimensions 1..8, plus the top of the desk-scale range
    dims = [int(rng.integers(1, 9)) for _ in range(46)] + [16, 32, 48, 64]
    for k, n in enumerate(dims):
        A = oracle_fixture(n, rng, normal=k % 2 == 0)
        cert = certify_V0b(A, 1.0)
        for f in (example1a(0.5, 1.0), example1b(0.5, 1.0)):
            F = apply(f, A, cert)
            E = oracle_eig(f, A)
            C = oracle_contour(f, A)
            scale = 1.0 + opnorm(F)
            d = max(opnorm(F - E), opnorm(F - C), opnorm(E - C)) / scale
            worst = max(worst, d)
    _detail(record_property, f"100 comparisons, worst scaled difference {worst:.2e} (tol 1e-8)")
    assert worst <= 1e-8


# 2 -----------------------------------------------------------------------------

SUITES = [("thm1", None), ("thm3", OPERATOR), ("thm3", TRACE),
          ("thm3", IdealNorm("schatten", 2.0)), ("cor1", None), ("cor2", None), ("cor4", None)]


@pytest.mark.parametrize("bound,ideal", SUITES,
                         ids=[b + ("-" + i.label if i else "") for b, i in SUITES])
def test_criterion_2_bound_suites(bound, ideal, record_property):
    reps = run_bound_suite(bound, 100, SEED + 2, ideals=[ideal] if ideal else None)
    bad = [r for r in reps if not r.lhs <= r.rhs + 1e-8 * (1 + abs(r.rhs))]
    tight = max(r.lhs / r.rhs for r in reps if r.rhs > 0)
    _detail(record_property, f"{len(reps)} trials, {len(bad)} violations, max lhs/rhs {tight:.3f}")
    assert len(reps) == 100 and not bad


# 3 -----------------------------------------------------------------------------

def test_criterion_3_frechet_order(record_property):
    rng = np.random.default_rng(SEED + 3)
    slopes = []
    for k in range(20):
        n = int(rng.integers(1, 7))
        A = oracle_fixture(n, rng, normal=k % 2 == 0)
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        B /= opnorm(B)
        f = example1a(0.5, 1.0) if k % 2 == 0 else example1b(0.5, 1.0)
        slopes.append(fd_order_check(f, A, B, (1e-3, 1e-4, 1e-5, 1e-6)).slope)
    _detail(record_property, f"20 fixtures, min slope {min(slopes):.4f} (need >= 1.9)")
    assert min(slopes) >= 1.9


# 4 -----------------------------------------------------------------------------

def test_criterion_4_commuting_derivative(record_property):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for k in range(20):
        n = int(rng.integers(1, 7))
        w = rng.uniform(-3, -0.3, n) + 1j * rng.uniform(-1, 1, n)
        d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        # half plain diagonal, half diagonal in a random unitary basis
        Q = np.eye(n) if k % 2 == 0 else random_unitary(n, rng)
        A = (Q * w) @ Q.conj().T
        B = (Q * d) @ Q.conj().T
        f = example1a(0.25 + 0.25 * (k % 3), 1.0)
        ref = fprime_of_A(f, A) @ B
        err = opnorm(frechet_derivative(f, A, B) - ref) / (1 + opnorm(ref))
        worst = max(worst, err)
    _detail(record_property, f"20 fixtures, worst scaled difference {worst:.2e} (tol 1e-9)")
    assert worst <= 1e-9


# 5 -----------------------------------------------------------------------------

def _tail_ratio(errs, floor):
    """Geometric decay rate of the partial-sum errors above the noise floor."""
    idx = [n for n, e in enumerate(errs) if n >= 3 and e > floor]
    if len(idx) < 5:
        return None
    e = np.log([errs[n] for n in idx])
    return float(math.exp(np.polyfit(idx, e, 1)[0]))


def test_criterion_5_taylor_random(record_property):
    rng = np.random.default_rng(SEED + 5)
    worst, ratios = 0.0, []
    for k in range(20):
        n = int(rng.integers(1, 7))
        A = oracle_fixture(n, rng, normal=k % 2 == 0)
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        f = example1a(0.5, 1.0) if k % 2 == 0 else example1b(0.5, 1.0)
        cert = certify_Vab(A, 0.0, 1.0)
        z = 0.5 * cert.delta_A / opnorm(B) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        direct = apply(f, A + z * B) - apply(f, A)
        S = partial_sums(f, A, B, z, 40, cert)
        errs = [opnorm(s - direct) for s in S]
        worst = max(worst, errs[-1] / (1 + opnorm(direct)))
        q = abs(z) * cert.m_A * opnorm(B)
        r = _tail_ratio(errs, 1e-10)
        if r is not None:
            ratios.append(r / q)
        res = taylor_eval(f, A, B, z, 40, cert)
        assert opnorm(res.value - S[-1]) < 1e-12 * (1 + opnorm(direct))
        with pytest.raises(RadiusError):
            taylor_eval(f, A, B, 1.01 * cert.delta_A / opnorm(B), cert=cert)
        with pytest.raises(RadiusError):
            taylor_eval(f, A, B, cert.delta_A / opnorm(B), cert=cert)
    _detail(record_property, f"N=40 worst error {worst:.2e} (tol 1e-8), "
            f"max measured ratio / q {max(ratios):.3f} (<= 2)")
    assert worst <= 1e-8
    assert max(ratios) <= 2.0


def test_criterion_5_taylor_aligned_ratio(record_property):
    # normal A, B = v v* with v the eigenvector closest to [0, 1]: the
    # resolvent bound is attained in the direction of B, so the decay rate
    # should match q = |z| m_A ||B|| from both sides
    rng = np.random.default_rng(SEED + 55)
    rel = []
    for k in range(10):
        n = int(rng.integers(1, 6))
        w = rng.uniform(-3, -0.3, n) + 0j
        Q = random_unitary(n, rng)
        A = (Q * w) @ Q.conj().T
        v = Q[:, int(np.argmax(w.real))]
        B = np.outer(v, v.conj())
        f = example1a(0.25 + 0.25 * (k % 3), 1.0)
        cert = certify_Vab(A, 0.0, 1.0)
        z = 0.5 * cert.delta_A * np.exp(1j * rng.uniform(0, 2 * math.pi))
        direct = apply(f, A + z * B) - apply(f, A)
        errs = [opnorm(s - direct) for s in partial_sums(f, A, B, z, 40, cert)]
        r = _tail_ratio(errs, 1e-10)
        rel.append(r / (abs(z) * cert.m_A))
    _detail(record_property, f"ratio / q in [{min(rel):.3f}, {max(rel):.3f}] (need [0.5, 2])")
    assert 0.5 <= min(rel) and max(rel) <= 2.0


# 6 -----------------------------------------------------------------------------

def _trace_pairs(rng):
    pairs = []
    for k in range(29):
        n = int(rng.integers(2, 7))
        kind = k % 3
        if kind == 0:
            A, B = rank_one_pair(n, rng, sigma=0.3, normal=True)
        elif kind == 1:
            A, B = rank_one_pair(n, rng, sigma=0.3, normal=False)
        else:
            A, B = random_nonnormal(n, rng), random_nonnormal(n, rng)
        pairs.append((A, B))
    return pairs


def test_criterion_6_trace_formula(record_property):
    rng = np.random.default_rng(SEED + 6)
    worst = dict(agree=0.0, anchor=0.0, cauchy=0.0)
    for k, (A, B) in enumerate(_trace_pairs(rng)):
        f = (example1a, example1b)[k % 2](0.25 + 0.25 * (k % 3), 1.0)
        rep = trace_formula_check(f, A, B, tolerance=1e-7, cauchy_count=5)
        scale = 1 + abs(rep.direct)
        worst["agree"] = max(worst["agree"], abs(rep.kernel - rep.direct) / scale,
                             abs(rep.contour - rep.direct) / scale,
                             abs(rep.kernel - rep.contour) / scale)
        worst["anchor"] = max(worst["anchor"], rep.anchor_shift_delta)
        worst["cauchy"] = max(worst["cauchy"], rep.cauchy_max_error)
        assert len(rep.cauchy_points) == 5
    _detail(record_property, "29 random pairs + 1x1 case: agreement {agree:.1e} (1e-7), anchor shift "
            "{anchor:.1e} (1e-9), Cauchy {cauchy:.1e} (1e-7)".format(**worst))
    assert worst["agree"] <= 1e-7 and worst["anchor"] <= 1e-9 and worst["cauchy"] <= 1e-7


def test_criterion_6_scalar_closed_form(record_property):
    f = example1b(0.5, 1.0)
    al, be = -1.0, -2.0
    exact = f.closed_form(al) - f.closed_form(be)
    rep = trace_formula_check(f, [[al]], [[be]], tolerance=1e-7)
    err = max(abs(rep.direct - exact), abs(rep.kernel - exact), abs(rep.contour - exact))
    _detail(record_property, f"1x1 case worst error {err:.1e} (tol 1e-10)")
    assert err <= 1e-10
    assert rep.anchor_shift_delta <= 1e-9 and rep.cauchy_max_error <= 1e-7


# 7 -----------------------------------------------------------------------------

def test_criterion_7_scalar_identities(record_property):
    worst_im = worst_mass = 0.0
    for alpha in (0.25, 0.5, 0.75):
        for b in (0.5, 1.0, 2.0):
            m = example1a(alpha, b).measure
            worst_im = max(worst_im, abs(inverse_moment(m) - 1.0))
            worst_mass = max(worst_mass, abs(total_mass(m) - alpha * b))
    _detail(record_property, f"inverse moment error {worst_im:.1e}, mass error {worst_mass:.1e} "
            "(tol 1e-10)")
    assert worst_im <= 1e-10 and worst_mass <= 1e-10


# 8 -----------------------------------------------------------------------------

def _normal_envelope(eigs, b):
    # sup_{0<t<=b} t/|t - lambda| per eigenvalue, maximized over the spectrum
    best = 0.0
    for lam in eigs:
        x, y = lam.real, lam.imag
        if x > 0 and y != 0 and abs(lam) ** 2 / x <= b:
            best = max(best, abs(lam) / abs(y))
        else:
            best = max(best, b / abs(b - lam))
    return best


def test_criterion_8_certification(record_property):
    rng = np.random.default_rng(SEED + 8)
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(1, 9))
        b = float(rng.choice([0.5, 1.0, 2.0]))
        w = rng.uniform(-3, 4, n) + 1j * rng.uniform(-2, 2, n)
        w = np.where((w.real > 0) & (w.real <= b) & (np.abs(w.imag) < 0.1), w + 0.5j, w)
        Q = random_unitary(n, rng)
        A = (Q * w) @ Q.conj().T
        ref = _normal_envelope(w, b)
        worst = max(worst, abs(certify_V0b(A, b).M_A - ref) / ref)
    ritt_ok = True
    for _ in range(10):
        T = ritt_operator(int(rng.integers(1, 7)), rng)
        c = certify_V0b(ritt_inverse_plus_identity(T), 1.0)
        ritt_ok = ritt_ok and c.kind == "V0b" and math.isfinite(c.M_A)
    _detail(record_property, f"50 normal fixtures, worst relative gap {worst:.1e} (tol 1e-5); "
            f"Ritt fixtures certified: {ritt_ok}")
    assert worst <= 1e-5 and ritt_ok


# 9 -----------------------------------------------------------------------------

def test_criterion_9_analytic_inequalities(record_property):
    rng = np.random.default_rng(SEED + 9)
    worst_res = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 6))
        A = random_nonnormal(n, rng) if rng.uniform() < 0.5 else random_normal(n, rng)
        t = rng.uniform(0, 2) + 1j * rng.uniform(-1, 1)
        dA = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        dA *= rng.uniform(0.0, 0.99) / (opnorm(dA) * opnorm(resolvent(A, t)))
        lhs, rhs = resolvent_perturbation(A, dA, t)
        assert lhs <= rhs + 1e-12 * max(1.0, rhs)
        worst_res = max(worst_res, lhs / rhs if rhs > 0 else 0.0)
    worst_min = 0.0
    for _ in range(500):
        a, d, t = 10.0 ** rng.uniform(-4, 4, 3)
        lhs, rhs = min_inequality(a, d, t)
        assert lhs <= rhs + 1e-12 * max(1.0, rhs)
        worst_min = max(worst_min, lhs / rhs)
    _detail(record_property, f"500 + 500 samples, max lhs/rhs {worst_res:.4f} and "
            f"{worst_min:.4f}")
