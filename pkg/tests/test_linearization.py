import json

import numpy as np
import pytest

from freejac.errors import ShapeError, SingularPencilError
from freejac.linearization import (derivative_matrix, singularity_certificate, sylvester_operator,
                                   sylvester_solve, sylvester_unique)
from freejac.matrixeval import MatrixTuple, jet_eval
from freejac.parser import parse_map

from conftest import random_map, random_tuple, relerr

SQUARE = parse_map("vars X; (X^2)")


def test_square_matrix_formula(rng):
    for n in (1, 2, 3):
        X = random_tuple(rng, 1, n)
        D = derivative_matrix(SQUARE, X)
        I = np.eye(n)
        np.testing.assert_allclose(D.matrix, np.kron(I, X[0]) + np.kron(X[0].T, I), atol=1e-14)


def test_identity_map_gives_identity(rng):
    P = parse_map("vars X; (X)")
    D = derivative_matrix(P, random_tuple(rng, 1, 3))
    np.testing.assert_array_equal(D.matrix, np.eye(9))


def test_square_spectrum_is_pairwise_sums():
    D = derivative_matrix(SQUARE, [np.diag([1.0, 2.0])])
    eig = np.sort(np.linalg.eigvals(D.matrix).real)
    lam = np.array([1.0, 2.0])
    oracle = np.sort((lam[:, None] + lam[None, :]).ravel())
    np.testing.assert_allclose(eig, oracle)
    np.testing.assert_allclose(eig, [2, 3, 3, 4])


def test_matrix_agrees_with_block_jet(rng):
    for _ in range(200):
        N = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        P = random_map(rng, N, int(rng.integers(1, 4)), 5)
        X, H = random_tuple(rng, N, n), random_tuple(rng, N, n)
        D = derivative_matrix(P, X)
        assert D.shape == (P.num_outputs * n * n, N * n * n)
        assert relerr(D.matrix @ H.vec(), jet_eval(P, X, H).derivative.vec()) < 1e-9
        assert relerr(D.apply(H), jet_eval(P, X, H).derivative) < 1e-9


def test_derivative_shape_mismatch(rng):
    with pytest.raises(ShapeError):
        derivative_matrix(SQUARE, random_tuple(rng, 2, 2))


def test_provenance_digests(rng):
    X = random_tuple(rng, 1, 2)
    D1, D2 = derivative_matrix(SQUARE, X), derivative_matrix(SQUARE, X)
    assert D1.provenance == D2.provenance
    assert D1.provenance != derivative_matrix(parse_map("vars X; (X^3)"), X).provenance


def test_certificate_identity():
    cert = singularity_certificate(np.eye(4))
    assert cert.verdict == "nonsingular" and cert.sigma_min == 1.0
    assert cert.kernel_vector is None


def test_certificate_square_at_plus_minus_one():
    X = np.diag([1.0, -1.0])
    cert = singularity_certificate(derivative_matrix(SQUARE, [X]))
    assert cert.verdict == "singular"
    H = cert.kernel_vector[0]
    assert abs(np.linalg.norm(H) - 1) < 1e-12
    # kernel is E_12 up to phase
    assert abs(abs(H[0, 1]) - 1) < 1e-12
    assert np.abs(H[[0, 1, 1], [0, 0, 1]]).max() < 1e-12
    assert np.abs(X @ H + H @ X).max() < 1e-12


def test_certificate_square_at_diag_one_two():
    cert = singularity_certificate(derivative_matrix(SQUARE, [np.diag([1.0, 2.0])]))
    assert cert.verdict == "nonsingular"
    assert cert.sigma_min >= 2 - cert.tolerance


def test_certificate_wide_matrix_is_singular():
    cert = singularity_certificate(np.array([[1.0, 0.0]]))
    assert cert.singular and cert.sigma_min == 0.0
    np.testing.assert_allclose(np.abs(cert.kernel_raw), [0, 1], atol=1e-15)


def test_certificate_json(rng):
    cert = singularity_certificate(derivative_matrix(SQUARE, [np.diag([1.0, -1.0])]))
    d = json.loads(json.dumps(cert.to_dict()))
    assert set(d) == {"verdict", "sigma_min", "sigma_max", "tolerance", "margin", "kernel"}
    assert MatrixTuple.from_dict(d["kernel"]) == cert.kernel_vector
    assert d["margin"] < 0


def test_kernel_certificate_feeds_back(rng):
    sym = parse_map("vars X,Y; (X + Y, X^2 + Y^2)")
    for _ in range(20):
        n = int(rng.integers(2, 4))
        S = random_tuple(rng, 1, n)[0] + 2 * np.eye(n)
        d = np.concatenate([[1.0, -1.0], rng.standard_normal(n - 2)])
        Y = random_tuple(rng, 1, n)[0]
        X = Y + S @ np.diag(d) @ np.linalg.inv(S)
        cert = singularity_certificate(derivative_matrix(sym, [X, Y]))
        assert cert.singular
        K = cert.kernel_vector
        assert jet_eval(sym, [X, Y], K).derivative.norm() <= 1e-7 * max(1.0, cert.sigma_max)


def test_sylvester_solve_examples():
    np.testing.assert_allclose(sylvester_solve([[1]], [[1]], [[2]]), [[1]])
    H = sylvester_solve(np.diag([1, 2]), np.diag([3, 4]), np.ones((2, 2)))
    lam, mu = np.array([1, 2]), np.array([3, 4])
    np.testing.assert_allclose(H, 1 / (lam[:, None] + mu[None, :]))
    np.testing.assert_allclose(H, [[1 / 4, 1 / 5], [1 / 5, 1 / 6]])
    X = np.diag([1.0, 2.0])
    np.testing.assert_array_equal(sylvester_solve(X, X, np.zeros((2, 2))), np.zeros((2, 2)))


def test_sylvester_solve_residual_and_methods(rng):
    for _ in range(100):
        p, q = (int(k) for k in rng.integers(1, 5, size=2))
        A, B = random_tuple(rng, 1, p)[0], random_tuple(rng, 1, q)[0]
        C = rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))
        if not sylvester_unique(A, B):
            continue
        for method in ("kron", "schur"):
            H = sylvester_solve(A, B, C, method=method)
            bound = 1e-9 * (np.linalg.norm(A, 2) + np.linalg.norm(B, 2)) * np.linalg.norm(H) + 1e-12
            assert np.linalg.norm(A @ H + H @ B - C) <= bound


def test_sylvester_solve_rejects_singular_pencil():
    X = np.diag([1.0, -1.0])
    with pytest.raises(SingularPencilError) as info:
        sylvester_solve(X, X, np.eye(2))
    assert info.value.details["margin"] < 1e-12
    with pytest.raises(ShapeError):
        sylvester_solve(np.eye(2), np.eye(3), np.eye(2))
    with pytest.raises(ValueError):
        sylvester_solve(np.eye(2), np.eye(2), np.eye(2), method="lu")


def test_sylvester_unique_examples(rng):
    v = sylvester_unique(np.diag([1, 2]), np.diag([3, 4]))
    assert v.unique and v.margin == pytest.approx(4)
    D = np.diag([1.0, -1.0])
    assert not sylvester_unique(D, D)
    A = random_tuple(rng, 1, 4)[0]
    A = A + (abs(np.linalg.eigvals(A).real.min()) + 0.1) * np.eye(4)
    assert sylvester_unique(A, A)


def plant_degenerate(rng, p, q):
    """A, B with lam(A) + mu(B) = 0 for one planted pair."""
    lam = rng.standard_normal(p) + 1j * rng.standard_normal(p)
    mu = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    mu[0] = -lam[0]
    S1 = random_tuple(rng, 1, p)[0] + 2 * np.eye(p)
    S2 = random_tuple(rng, 1, q)[0] + 2 * np.eye(q)
    return S1 @ np.diag(lam) @ np.linalg.inv(S1), S2 @ np.diag(mu) @ np.linalg.inv(S2)


def test_sylvester_verdict_matches_kronecker_certificate(rng):
    agree = ambiguous = degenerate_singular = 0
    for k in range(500):
        p, q = (int(s) for s in rng.integers(1, 4, size=2))
        if k < 50:
            A, B = plant_degenerate(rng, p, q)
        else:
            A, B = random_tuple(rng, 1, p)[0], random_tuple(rng, 1, q)[0]
        v = sylvester_unique(A, B)
        cert = singularity_certificate(sylvester_operator(A, B))
        near_v = v.tolerance / 10 <= v.margin <= 10 * v.tolerance
        near_c = cert.tolerance / 10 <= cert.sigma_min <= 10 * cert.tolerance
        if near_v and near_c:
            ambiguous += 1
            continue
        assert v.unique == (not cert.singular), (k, v, cert.sigma_min)
        agree += 1
        degenerate_singular += k < 50 and cert.singular
    assert degenerate_singular == 50
    assert agree + ambiguous == 500
