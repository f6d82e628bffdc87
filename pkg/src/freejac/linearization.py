"""The derivative ``H -> DP(X)[H]`` as a dense matrix, singularity
certificates for it, and Sylvester equations ``AH + HB = C``.

Vectorization is column stacking throughout, so that
``vec(L H R) = (R^T kron L) vec(H)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeError, SingularPencilError
from .matrixeval import MatrixTuple, _word_products, as_tuple
from .ncpoly import FreePolyMap

SINGULAR_RTOL = 1e-8
SYLVESTER_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class DerivativeMatrix:
    """Dense matrix of ``DP(X)``: ``matrix @ H.vec() == DP(X)[H].vec()``.

    Rows are grouped by output component and columns by variable, each block
    being ``n^2`` wide.
    """

    matrix: np.ndarray
    num_outputs: int
    num_vars: int
    size: int
    provenance: tuple = ("", "")

    @property
    def shape(self):
        return self.matrix.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def apply(self, H) -> MatrixTuple:
        H = as_tuple(H)
        if H.count != self.num_vars or H.size != self.size:
            raise ShapeError("direction does not match the derivative's domain")
        return MatrixTuple.from_vec(self.matrix @ H.vec(), self.num_outputs, self.size)


def _map_digest(P):
    from .parser import print_map

    return hashlib.sha256(print_map(P).encode()).hexdigest()[:16]


def derivative_matrix(P: FreePolyMap, X) -> DerivativeMatrix:
    """Materialize ``DP(X)``.

    Every occurrence of variable ``j`` in a word ``L x_j R`` of output
    component ``k`` adds ``coeff * kron(R(X)^T, L(X))`` to block ``(k, j)``.
    """
    X = as_tuple(X)
    if P.num_vars != X.count:
        raise ShapeError(f"map in {P.num_vars} variables, point has {X.count} matrices")
    n, nn = X.size, X.size ** 2
    prefix = _word_products(X)
    suffix = _word_products(MatrixTuple([A.T for A in X.data]))
    M = np.zeros((P.num_outputs * nn, P.num_vars * nn), dtype=complex)
    for k, comp in enumerate(P.components):
        rows = slice(k * nn, (k + 1) * nn)
        for w, c in comp.items():
            for t, j in enumerate(w):
                L = prefix(w[:t])
                # R^T = (x_a x_b ...)^T = x_..^T x_b^T x_a^T
                Rt = suffix(w[t + 1:][::-1])
                M[rows, j * nn:(j + 1) * nn] += c * np.kron(Rt, L)
    return DerivativeMatrix(M, P.num_outputs, P.num_vars, n, (_map_digest(P), X.digest()))


@dataclass(frozen=True, eq=False)
class SingularityCertificate:
    verdict: str  # "nonsingular" or "singular"
    sigma_min: float
    sigma_max: float
    tolerance: float
    kernel_vector: MatrixTuple | None = None
    kernel_raw: np.ndarray | None = None

    @property
    def singular(self):
        return self.verdict == "singular"

    @property
    def margin(self):
        """Distance of ``sigma_min`` above the singularity threshold."""
        return self.sigma_min - self.tolerance

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "tolerance": self.tolerance,
            "margin": self.margin,
            "kernel": None if self.kernel_vector is None else self.kernel_vector.to_dict(),
        }


def singularity_certificate(M, rtol=SINGULAR_RTOL) -> SingularityCertificate:
    """Decide singularity of ``M`` from its full SVD.

    Singular iff ``sigma_min <= rtol * max(1, sigma_max)``.  A matrix with
    more columns than rows always has a kernel, so ``sigma_min`` is 0.  For
    a singular matrix the unit right singular vector of ``sigma_min`` is
    kept in ``kernel_raw`` and, reshaped into a direction tuple, in
    ``kernel_vector`` (plain square-sized inputs reshape to one matrix).
    """
    A = np.asarray(M, dtype=complex)
    rows, cols = A.shape
    if cols == 0:
        return SingularityCertificate("nonsingular", 0.0, 0.0, rtol)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    sigma_max = float(s[0]) if s.size else 0.0
    sigma_min = float(s[-1]) if rows >= cols else 0.0
    tol = rtol * max(1.0, sigma_max)
    if sigma_min > tol:
        return SingularityCertificate("nonsingular", sigma_min, sigma_max, tol)
    v = Vh[-1].conj()
    # fix the phase so the largest entry is real positive
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    if isinstance(M, DerivativeMatrix):
        kernel = MatrixTuple.from_vec(v, M.num_vars, M.size)
    else:
        n = int(round(np.sqrt(cols)))
        kernel = MatrixTuple.from_vec(v, 1, n) if n * n == cols else None
    return SingularityCertificate("singular", sigma_min, sigma_max, tol, kernel, v)


def certify(P: FreePolyMap, X) -> SingularityCertificate:
    return singularity_certificate(derivative_matrix(P, X))


def sylvester_operator(A, B):
    """Matrix of ``H -> AH + HB`` acting on column-stacked ``H``."""
    A, B = _square(A), _square(B)
    return np.kron(np.eye(B.shape[0]), A) + np.kron(B.T, np.eye(A.shape[0]))


@dataclass(frozen=True)
class SylvesterVerdict:
    unique: bool
    margin: float
    tolerance: float
    pair: tuple  # (eigenvalue of A, eigenvalue of B) attaining the margin

    def __bool__(self):
        return self.unique


def sylvester_unique(A, B, rtol=SYLVESTER_RTOL) -> SylvesterVerdict:
    """Whether ``AH + HB = C`` has a unique solution.

    The margin is ``min |lambda_i(A) + mu_j(B)|``; the equation is uniquely
    solvable iff it exceeds ``rtol * (||A|| + ||B||)``.
    """
    A, B = _square(A), _square(B)
    lam = np.linalg.eigvals(A)
    mu = np.linalg.eigvals(B)
    sums = np.abs(lam[:, None] + mu[None, :])
    i, j = np.unravel_index(np.argmin(sums), sums.shape)
    margin = float(sums[i, j])
    tol = rtol * (np.linalg.norm(A, 2) + np.linalg.norm(B, 2))
    return SylvesterVerdict(bool(margin > tol), margin, float(tol), (complex(lam[i]), complex(mu[j])))


def sylvester_solve(A, B, C, method="kron"):
    """Solve ``AH + HB = C``.

    ``method="kron"`` solves the ``pq x pq`` Kronecker system;
    ``method="schur"`` uses the Bartels-Stewart solver from SciPy.
    Raises :class:`SingularPencilError` when ``spec(A)`` and ``spec(-B)``
    meet within tolerance.
    """
    A, B = _square(A), _square(B)
    C = np.asarray(C, dtype=complex)
    p, q = A.shape[0], B.shape[0]
    if C.shape != (p, q):
        raise ShapeError(f"right-hand side has shape {C.shape}, expected {(p, q)}")
    verdict = sylvester_unique(A, B)
    if not verdict.unique:
        lam, mu = verdict.pair
        raise SingularPencilError(
            f"spec(A) and spec(-B) nearly meet: |{lam:.6g} + {mu:.6g}| = {verdict.margin:.3g}",
            margin=verdict.margin,
            eigenvalue_a=[lam.real, lam.imag],
            eigenvalue_b=[mu.real, mu.imag],
        )
    if method == "kron":
        h = np.linalg.solve(sylvester_operator(A, B), C.ravel(order="F"))
        return h.reshape((p, q), order="F")
    if method == "schur":
        return scipy.linalg.solve_sylvester(A, B, C)
    raise ValueError(f"unknown method {method!r}")


def _square(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {A.shape}")
    return A
