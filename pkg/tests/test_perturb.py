import numpy as np
import pytest
from hypothesis import given, strategies as st

from markov_opcalc.errors import PreconditionError
from markov_opcalc.fixtures import random_normal, random_unitary, random_vector
from markov_opcalc.matrixcore import OPERATOR, TRACE, IdealNorm
from markov_opcalc.perturb import (bound_thm1, bound_thm2_pointwise, bound_thm3_ideal,
                                   commutator_bound, continuity_chain, min_inequality,
                                   moment_inequalities, stability_sweep)
from markov_opcalc.suites import run_bound_suite
from markov_opcalc.symbols import evaluate, example1a


F = example1a(0.5, 1.0)


def test_thm1_equal_pair_zero():
    A = np.diag([-1.0, -2.0])
    r = bound_thm1(F, A, A)
    assert r.lhs == 0 and r.rhs == 0 and r.holds


def test_thm1_diag_scalar_case():
    A, B = np.diag([-1.0, -2.0]), np.diag([-1.1, -2.0])
    r = bound_thm1(F, A, B)
    exact = abs(evaluate(F, -1.0, use_closed_form=True) - evaluate(F, -1.1, use_closed_form=True))
    assert r.lhs == pytest.approx(exact, rel=1e-9)
    K = r.constants["M_A"] + r.constants["M_B"] + r.constants["M_A"] * r.constants["M_B"]
    assert r.rhs == pytest.approx(-K * evaluate(F, -0.1, use_closed_form=True).real, rel=1e-12)
    assert r.holds and r.slack > 0


def test_thm1_small_commuting_pairs(rng):
    for _ in range(100):
        w = rng.uniform(-3, -0.2, 3)
        A = np.diag(w)
        B = np.diag(w + 1e-3 * rng.choice([-1, 1], 3) * rng.uniform(0, 1, 3))
        r = bound_thm1(F, A, B)
        assert r.holds and r.slack > 0


def test_thm2_equal_and_scalar_reduction():
    A = np.diag([-1.0, -2.0])
    assert bound_thm2_pointwise(F, A, A, [1.0, 0.0]).lhs == 0
    B = np.diag([-1.5, -2.5])
    r = bound_thm2_pointwise(F, A, B, [1.0, 0.0])
    exact = abs(evaluate(F, -1.0, use_closed_form=True) - evaluate(F, -1.5, use_closed_form=True))
    assert r.lhs == pytest.approx(exact, rel=1e-9)
    assert r.constants["norm_dx"] == pytest.approx(0.5)
    assert r.holds


def test_thm2_requires_commutation(rng):
    A = random_normal(3, rng)
    B = random_normal(3, rng)
    with pytest.raises(PreconditionError):
        bound_thm2_pointwise(F, A, B, [1.0, 0.0, 0.0])


def test_thm3_ideals(rng):
    A = random_normal(3, rng)
    assert bound_thm3_ideal(F, A, A, TRACE).lhs == pytest.approx(0, abs=1e-14)
    for which in (OPERATOR, TRACE, IdealNorm("schatten", 2.0)):
        B = A + 0.1 * random_normal(3, rng)
        assert bound_thm3_ideal(F, A, B, which).holds


def test_thm3_rank_one_trace_dominates_operator(rng):
    A = random_normal(4, rng)
    u, v = random_vector(4, rng), random_vector(4, rng)
    B = A + 0.2 * np.outer(u, v.conj())
    rt = bound_thm3_ideal(F, A, B, TRACE)
    ro = bound_thm3_ideal(F, A, B, OPERATOR)
    assert rt.constants["norm_A_minus_B"] == pytest.approx(ro.constants["norm_A_minus_B"], rel=1e-12)
    assert rt.lhs >= ro.lhs * (1 - 1e-12)


def test_moment_inequalities_eigenvector():
    A = np.diag([-1.0, -2.0])
    r1, r2 = moment_inequalities(F, A, [1.0, 0.0])
    assert r1.lhs == pytest.approx(abs(evaluate(F, -1.0, use_closed_form=True)), rel=1e-9)
    assert r1.holds and r2.holds
    assert r1.rhs <= r2.rhs and r1.constants["rhs_ordered"]


def test_moment_inequalities_zero_matrix_and_zero_vector():
    r1, r2 = moment_inequalities(F, np.zeros((2, 2)), [0.0, 3.0])
    assert r1.lhs < 1e-14 and r1.rhs == 0 and r2.rhs == 0 and r1.holds
    assert r1.constants["input_norm"] == 3.0
    with pytest.raises(ValueError):
        moment_inequalities(F, np.zeros((2, 2)), [0.0, 0.0])


def test_commutator_bound_trivial_cases(rng):
    A = random_normal(3, rng)
    assert commutator_bound(F, A, np.eye(3)).lhs == pytest.approx(0, abs=1e-14)
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    A2 = (V * np.array([-1.0, -2.0, -3.0])) @ V.conj().T
    U = (V * np.exp(1j * np.array([0.3, 1.0, 2.0]))) @ V.conj().T
    r = commutator_bound(F, A2, U)
    assert r.lhs < 1e-12 and r.holds
    with pytest.raises(PreconditionError):
        commutator_bound(F, A, np.zeros((3, 3)))


def test_commutator_bound_unitary_uses_M_A_squared(rng):
    A = random_normal(3, rng)
    r = commutator_bound(F, A, random_unitary(3, rng))
    assert r.constants["unitary"] and r.constants["M_UAU_inv"] == r.constants["M_A"]
    assert r.holds


def test_commutator_bound_nonunitary(rng):
    A = random_normal(3, rng)
    U = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    r = commutator_bound(F, A, U)
    assert not r.constants["unitary"] and r.holds


@pytest.mark.parametrize("bound", ["thm1", "thm3", "cor1", "cor2", "cor4"])
def test_suites_small(bound):
    reps = run_bound_suite(bound, 15, seed=11)
    assert all(r.holds for r in reps)


def test_stability_sweep(rng):
    A = random_normal(3, rng)
    E = random_normal(3, rng)
    E /= np.linalg.norm(E, 2)
    pairs = [(A, A + E / n) for n in range(1, 11)]
    rep = stability_sweep(F, pairs, TRACE)
    assert rep.holds and rep.decays and rep.constants_bounded
    assert all(r <= b * (1 + 1e-8) for r, b in zip(rep.ratios, rep.bounds))
    const = stability_sweep(F, [(A, A + E)] * 3)
    assert max(const.lhs) - min(const.lhs) < 1e-12


def test_continuity_chain(rng):
    A = random_normal(3, rng)
    # the scaled symbols c*f have f'(-0) = c -> 0
    syms = [F.scaled(2.0 ** -k) for k in range(8)]
    rows = continuity_chain(syms, A)
    for val, mass, top in rows:
        assert val <= mass * (1 + 1e-8) + 1e-12 and mass <= top * (1 + 1e-12)
    assert rows[-1][0] < rows[0][0] / 100


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_min_inequality(a, d, t):
    lhs, rhs = min_inequality(a, d, t)
    assert lhs <= rhs * (1 + 1e-12)
