"""Evaluation of free polynomial maps on tuples of square matrices.

Also provides the free-map operations on tuples (direct sum, joint
similarity), block-jet evaluation of directional derivatives, and seeded
samplers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import DomainSpec, NormBound, SpectralHalfPlane, WeightedNormSum, op_norm
from .errors import DomainUnsatisfiableError, IllConditionedError, ShapeError
from .ncpoly import FreePoly, FreePolyMap

MAX_CONDITION = 1e12
HALFPLANE_SHIFT = 0.1
MAX_ATTEMPTS = 1000


class MatrixTuple:
    """N square complex matrices of a common size n, stored read-only as an
    array of shape ``(N, n, n)``."""

    __slots__ = ("_data",)

    def __init__(self, matrices):
        if isinstance(matrices, MatrixTuple):
            data = matrices._data
        else:
            data = np.array([np.asarray(m, dtype=complex) for m in matrices], dtype=complex) \
                if isinstance(matrices, (list, tuple)) else np.array(matrices, dtype=complex)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise ShapeError(f"expected N square matrices, got array of shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError("a matrix tuple needs N >= 1 matrices of size n >= 1")
        if not np.all(np.isfinite(data)):
            raise ValueError("matrix tuple has non-finite entries")
        data = data.copy()
        data.setflags(write=False)
        self._data = data

    @property
    def data(self):
        return self._data

    @property
    def size(self):
        return self._data.shape[1]

    n = size

    @property
    def count(self):
        return self._data.shape[0]

    def __len__(self):
        return self._data.shape[0]

    def __getitem__(self, k):
        return self._data[k]

    def __iter__(self):
        return iter(self._data)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, MatrixTuple):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    __hash__ = None

    def __add__(self, other):
        return MatrixTuple(self._data + _data(other))

    def __sub__(self, other):
        return MatrixTuple(self._data - _data(other))

    def __neg__(self):
        return MatrixTuple(-self._data)

    def __mul__(self, c):
        return MatrixTuple(self._data * complex(c))

    __rmul__ = __mul__

    def norm(self):
        """Frobenius norm of the whole tuple (2-norm of its vectorization)."""
        return float(np.linalg.norm(self._data.ravel()))

    def op_norms(self):
        return [op_norm(A) for A in self._data]

    def vec(self):
        """Concatenated column-stacked vectorizations of the matrices."""
        return np.concatenate([A.ravel(order="F") for A in self._data])

    @classmethod
    def from_vec(cls, v, count, size):
        v = np.asarray(v, dtype=complex)
        if v.shape != (count * size * size,):
            raise ShapeError(f"vector of length {v.size} does not hold {count} {size}x{size} matrices")
        return cls([v[k * size * size:(k + 1) * size * size].reshape((size, size), order="F")
                    for k in range(count)])

    def concat(self, other):
        """The tuple ``(self..., other...)`` of N1 + N2 matrices."""
        if other.size != self.size:
            raise ShapeError("cannot concatenate tuples of different sizes")
        return MatrixTuple(np.concatenate([self._data, other._data]))

    def block(self, rows, cols):
        return MatrixTuple(self._data[:, rows, cols])

    def allclose(self, other, rtol=1e-9, atol=0.0):
        other = _data(other)
        if other.shape != self._data.shape:
            return False
        return relative_error(self._data, other) <= rtol or \
            float(np.linalg.norm((self._data - other).ravel())) <= atol

    def digest(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    # JSON: {"n": int, "matrices": [[[re, im], ...], ...]}, row-major entries

    def to_dict(self):
        return {
            "n": self.size,
            "matrices": [[[float(z.real), float(z.imag)] for z in A.ravel()] for A in self._data],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["n"])
            raw = d["matrices"]
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"matrix-tuple JSON needs 'n' and 'matrices': {exc}") from None
        mats = []
        for m in raw:
            arr = np.asarray(m, dtype=float)
            if arr.ndim == 3:  # nested rows, also accepted
                arr = arr.reshape(-1, 2)
            if arr.shape != (n * n, 2):
                raise ShapeError(f"matrix entry list of shape {arr.shape} does not fit n={n}")
            mats.append((arr[:, 0] + 1j * arr[:, 1]).reshape(n, n))
        return cls(mats)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"MatrixTuple(count={self.count}, size={self.size})"


def _data(x):
    return x.data if isinstance(x, MatrixTuple) else np.asarray(x, dtype=complex)


def as_tuple(X):
    return X if isinstance(X, MatrixTuple) else MatrixTuple(X)


def relative_error(a, b):
    """``||a - b|| / max(1, ||b||)`` in the Frobenius norm."""
    a, b = _data(a), _data(b)
    return float(np.linalg.norm((a - b).ravel()) / max(1.0, np.linalg.norm(b.ravel())))


def _word_products(X):
    eye = np.eye(X.size, dtype=complex)
    cache = {(): eye}

    def product(word):
        if word in cache:
            return cache[word]
        k = len(word) - 1
        while word[:k] not in cache:
            k -= 1
        M = cache[word[:k]]
        for j in range(k, len(word)):
            M = M @ X[word[j]]
            cache[word[:j + 1]] = M
        return M

    return product


def eval_poly(p: FreePoly, X, _product=None) -> np.ndarray:
    X = as_tuple(X)
    if p.num_vars != X.count:
        raise ShapeError(f"polynomial in {p.num_vars} variables evaluated on {X.count} matrices")
    product = _product or _word_products(X)
    out = np.zeros((X.size, X.size), dtype=complex)
    for w, c in p.items():
        out += c * product(w)
    return out


def eval_map(P: FreePolyMap, X) -> MatrixTuple:
    """Evaluate every component of ``P`` at the tuple ``X``.

    Words are multiplied left to right; prefix products are shared across
    all components.
    """
    X = as_tuple(X)
    if P.num_vars != X.count:
        raise ShapeError(f"map in {P.num_vars} variables evaluated on {X.count} matrices")
    product = _word_products(X)
    return MatrixTuple([eval_poly(c, X, product) for c in P.components])


def direct_sum(A, B) -> MatrixTuple:
    A, B = as_tuple(A), as_tuple(B)
    if A.count != B.count:
        raise ShapeError(f"direct sum of tuples with {A.count} and {B.count} components")
    n, m = A.size, B.size
    out = np.zeros((A.count, n + m, n + m), dtype=complex)
    out[:, :n, :n] = A.data
    out[:, n:, n:] = B.data
    return MatrixTuple(out)


def similarity(A, S) -> MatrixTuple:
    """Joint similarity ``S^{-1} A_i S`` of every component."""
    A = as_tuple(A)
    S = np.asarray(S, dtype=complex)
    if S.shape != (A.size, A.size):
        raise ShapeError(f"similarity matrix of shape {S.shape} for size-{A.size} tuple")
    cond = np.linalg.cond(S)
    if not cond < MAX_CONDITION:
        raise IllConditionedError(
            f"similarity matrix is singular or ill-conditioned (cond ~ {cond:.3g})",
            condition=float(cond) if np.isfinite(cond) else None,
        )
    return MatrixTuple([np.linalg.solve(S, Ai @ S) for Ai in A.data])


def block_jet(X, H) -> MatrixTuple:
    """The tuple of upper-triangular blocks ``[[X_i, H_i], [0, X_i]]``."""
    X, H = as_tuple(X), as_tuple(H)
    if X.count != H.count or X.size != H.size:
        raise ShapeError("point and direction tuples differ in shape")
    n = X.size
    out = np.zeros((X.count, 2 * n, 2 * n), dtype=complex)
    out[:, :n, :n] = X.data
    out[:, n:, n:] = X.data
    out[:, :n, n:] = H.data
    return MatrixTuple(out)


class Jet(NamedTuple):
    value: MatrixTuple
    derivative: MatrixTuple
    full: MatrixTuple


def jet_eval(P: FreePolyMap, X, H) -> Jet:
    """Value and directional derivative of ``P`` at ``X`` along ``H``,
    read off from ``P`` evaluated on the block jet."""
    X, H = as_tuple(X), as_tuple(H)
    if X.count != P.num_vars:
        raise ShapeError(f"map in {P.num_vars} variables, point has {X.count} matrices")
    n = X.size
    full = eval_map(P, block_jet(X, H))
    top, bottom = slice(0, n), slice(n, 2 * n)
    return Jet(full.block(top, top), full.block(top, bottom), full)


def eval_derivative(P: FreePolyMap, X, H) -> MatrixTuple:
    """``DP(X)[H]`` by evaluating the formal derivative on ``(X, H)``."""
    XH = as_tuple(X).concat(as_tuple(H))
    product = _word_products(XH)
    return MatrixTuple([eval_poly(d, XH, product) for d in P.derivative()])


# sampling


@dataclass(frozen=True)
class SampleConfig:
    size: int
    count: int
    seed: int
    distribution: str = "ginibre"
    domain: DomainSpec | None = None

    def __post_init__(self):
        if self.size < 1 or self.count < 1:
            raise ValueError("size and count must be at least 1")
        if self.distribution not in ("ginibre", "hermitian-ginibre"):
            raise ValueError(f"unknown distribution {self.distribution!r}")


def ginibre(rng, n):
    """Standard complex normal entries scaled by ``1/sqrt(n)``."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G / np.sqrt(2 * n)


def _draw(rng, n, count, distribution):
    mats = [ginibre(rng, n) for _ in range(count)]
    if distribution == "hermitian-ginibre":
        mats = [(G + G.conj().T) / 2 for G in mats]
    return mats


def _enforce(mats, domain, rng):
    n = mats[0].shape[0]
    for c in domain.constraints:
        if isinstance(c, SpectralHalfPlane):
            alpha = c.margin(mats[c.var])
            mats[c.var] = mats[c.var] + (abs(alpha) + HALFPLANE_SHIFT) * np.exp(1j * c.angle) * np.eye(n)
    for c in domain.constraints:
        if isinstance(c, NormBound):
            norm = op_norm(mats[c.var])
            if norm >= c.bound:
                mats[c.var] = mats[c.var] * (c.bound * rng.uniform(0.05, 0.999) / norm)
    for c in domain.constraints:
        if isinstance(c, WeightedNormSum):
            total = c.value(mats)
            if total >= c.bound:
                t = c.bound * rng.uniform(0.05, 0.999) / total
                for i, w in enumerate(c.weights):
                    if w:
                        mats[i] = mats[i] * t
    return mats


def sample_tuple(cfg: SampleConfig, count_vars: int) -> list[MatrixTuple]:
    """Draw ``cfg.count`` tuples of ``count_vars`` matrices of size ``cfg.size``.

    Deterministic in ``cfg.seed``.  Samples outside ``cfg.domain`` are
    shifted (spectral constraints) and rescaled (norm constraints); a sample
    that still fails is redrawn, up to ``MAX_ATTEMPTS`` times.
    """
    if count_vars < 1:
        raise ValueError("count_vars must be at least 1")
    domain = cfg.domain or DomainSpec()
    domain.check_arity(count_vars)
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.count):
        for _attempt in range(MAX_ATTEMPTS):
            mats = _enforce(_draw(rng, cfg.size, count_vars, cfg.distribution), domain, rng)
            if domain.contains(mats):
                out.append(MatrixTuple(mats))
                break
        else:
            raise DomainUnsatisfiableError(
                f"no sample satisfied the domain after {MAX_ATTEMPTS} attempts",
                domain=domain.to_dict(),
            )
    return out


def sample_commuting_tuple(size: int, count_vars: int, seed: int, degree: int = 3) -> MatrixTuple:
    """``(p_1(T), ..., p_N(T))`` for one Ginibre ``T`` and random polynomials
    ``p_i`` of degree at most ``degree``."""
    if size < 1 or count_vars < 1:
        raise ValueError("size and count must be at least 1")
    rng = np.random.default_rng(seed)
    T = ginibre(rng, size)
    eye = np.eye(size, dtype=complex)
    mats = []
    for _ in range(count_vars):
        coeffs = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / np.sqrt(2)
        M = coeffs[-1] * eye
        for c in coeffs[-2::-1]:
            M = M @ T + c * eye
        mats.append(M)
    return MatrixTuple(mats)
