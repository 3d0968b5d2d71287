import numpy as np
import pytest

from markov_opcalc import fixtures as fx
from markov_opcalc.opclass import certify_V0b


@pytest.mark.parametrize("kind", fx.KINDS)
def test_seed_stability(kind):
    params = {"values": [-1.0, -2.0]} if kind == "diag" else {}
    a = fx.dumps(fx.make_fixture(kind, params, seed=5))
    b = fx.dumps(fx.make_fixture(kind, params, seed=5))
    assert a == b and a.endswith("\n")
    doc = fx.make_fixture(kind, params, seed=5)
    prov = doc["provenance"]
    assert prov["kind"] == kind and prov["seed"] == 5
    assert prov["generator_version"] == fx.GENERATOR_VERSION


def test_different_seeds_differ():
    a = fx.make_fixture("random-normal", {"n": 3}, seed=1)
    b = fx.make_fixture("random-normal", {"n": 3}, seed=2)
    assert a["matrix"] != b["matrix"]


def test_diag_exact():
    doc = fx.make_fixture("diag", {"values": [-1.0, [-2.0, 0.5]]})
    M = fx.matrix_from_document(doc)
    assert np.array_equal(M, np.diag([-1.0, -2.0 + 0.5j]))


def test_ritt_inverse_from_diagonal():
    doc = fx.make_fixture("ritt-inverse", {"T_diag": [0.5]})
    M = fx.matrix_from_document(doc)
    assert M[0, 0] == pytest.approx(3.0)
    assert doc["interval"] == [0.0, 1.0]
    assert certify_V0b(M, 1.0).M_A == pytest.approx(0.5, rel=1e-5)


def test_ritt_inverse_random_certifies():
    doc = fx.make_fixture("ritt-inverse", {"n": 4}, seed=3)
    c = certify_V0b(fx.matrix_from_document(doc), 1.0)
    assert np.isfinite(c.M_A) and c.M_A > 0


def test_rank_one_pair_document():
    doc = fx.make_fixture("rank-one-pair", {"n": 3, "sigma": 0.25}, seed=9)
    A = fx.matrix_from_document(doc, "A")
    B = fx.matrix_from_document(doc, "B")
    s = np.linalg.svd(B - A, compute_uv=False)
    assert s[0] == pytest.approx(0.25) and s[1] < 1e-12


def test_jordan_fixture():
    M = fx.matrix_from_document(fx.make_fixture("jordan", {"eigenvalue": -0.5, "size": 3}))
    assert np.array_equal(M, [[-0.5, 1, 0], [0, -0.5, 1], [0, 0, -0.5]])


def test_random_spectra_in_requested_box(rng):
    A = fx.random_nonnormal(6, rng, re=(-2.0, -1.0), im=(-0.5, 0.5))
    w = np.linalg.eigvals(A)
    assert np.all((w.real > -2 - 1e-9) & (w.real < -1 + 1e-9) & (np.abs(w.imag) <= 0.5 + 1e-9))


@pytest.mark.parametrize("kind,params", [
    ("diag", {}), ("diag", {"values": []}), ("jordan", {"size": 0}), ("random-normal", {"n": 0}),
])
def test_invalid_parameters(kind, params):
    with pytest.raises(ValueError):
        fx.make_fixture(kind, params)


def test_unknown_kind():
    with pytest.raises(ValueError):
        fx.make_fixture("hilbert")


def test_document_without_matrix():
    with pytest.raises(ValueError):
        fx.matrix_from_document({"provenance": {}})
