"""Seeded randomized suites shared by the command line and the self-test."""

from __future__ import annotations

import math

import numpy as np

from .errors import NotInClassError
from .fixtures import random_nonnormal, random_normal, random_unitary, random_vector
from .matrixcore import OPERATOR, TRACE, IdealNorm
from .opclass import certify_V0b
from .perturb import bound_thm1, bound_thm3_ideal, commutator_bound, moment_inequalities
from .symbols import example1a, example1b

SUITE_BOUNDS = ("thm1", "thm3", "cor1", "cor2", "cor4")
ALPHAS = (0.25, 0.5, 0.75)


def mixed_spectrum(n, rng, b=1.0):
    """Eigenvalues off ``(0, b]``: mostly left of 0, some right of ``b``."""
    w = np.empty(n, dtype=complex)
    for k in range(n):
        if rng.uniform() < 0.75:
            w[k] = complex(rng.uniform(-2.5, -0.05), rng.uniform(-1.0, 1.0))
        else:
            w[k] = complex(rng.uniform(b + 0.3, b + 2.0), rng.uniform(-1.0, 1.0))
    return w


def random_V0b(n, rng, b=1.0, normal=None):
    """Random matrix certified in ``V(0,b]``; normal or mildly non-normal."""
    if normal is None:
        normal = bool(rng.uniform() < 0.5)
    w = mixed_spectrum(n, rng, b)
    if normal:
        Q = random_unitary(n, rng)
        return (Q * w) @ Q.conj().T
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = np.eye(n) + 0.2 * G / math.sqrt(2 * n)
    return np.linalg.solve(V.T, (V * w).T).T


def random_symbol(rng, b=1.0):
    return example1a(float(rng.choice(ALPHAS)), b)


def perturbed(A, rng, b=1.0):
    """``A + eps E`` staying in ``V(0,b]``; ``eps`` log-uniform in ``[1e-3, 1]``."""
    n = A.shape[0]
    for _ in range(50):
        E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        E /= np.linalg.norm(E, 2)
        B = A + 10.0 ** rng.uniform(-3, 0) * E
        try:
            return B, certify_V0b(B, b)
        except NotInClassError:
            continue
    raise RuntimeError("could not draw a certified perturbation")


def run_bound_suite(bound: str, trials: int, seed: int, ideals=None, dim=(2, 6)):
    """Run one randomized bound suite; returns a list of :class:`BoundReport`."""
    rng = np.random.default_rng(seed)
    ideals = ideals or [OPERATOR, TRACE, IdealNorm("schatten", 2.0)]
    reports = []
    for k in range(trials):
        n = int(rng.integers(dim[0], dim[1] + 1))
        f = random_symbol(rng)
        A = random_V0b(n, rng)
        cA = certify_V0b(A, 1.0)
        if bound == "thm1":
            B, cB = perturbed(A, rng)
            reports.append(bound_thm1(f, A, B, cA, cB))
        elif bound == "thm3":
            B, cB = perturbed(A, rng)
            reports.append(bound_thm3_ideal(f, A, B, ideals[k % len(ideals)], cA, cB))
        elif bound in ("cor1", "cor2"):
            r1, r2 = moment_inequalities(f, A, random_vector(n, rng), cA)
            reports.append(r1 if bound == "cor1" else r2)
        elif bound == "cor4":
            U = random_unitary(n, rng)
            reports.append(commutator_bound(f, A, U, ideals[k % len(ideals)], cA))
        else:
            raise ValueError(f"unknown bound {bound!r}")
    return reports


def builtin_symbols(b=1.0, alpha=0.5):
    return [example1a(alpha, b), example1b(alpha, b)]


def oracle_fixture(n, rng, normal=True):
    """Diagonalizable matrix with spectrum in the open left half-plane."""
    if normal:
        return random_normal(n, rng, (-3.0, -0.3), (-1.0, 1.0))
    return random_nonnormal(n, rng, (-3.0, -0.3), (-1.0, 1.0), skew=0.3)
