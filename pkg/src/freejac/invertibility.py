"""Injectivity witnesses, series and Newton inversion, and Jacobian scans.

A singular derivative and a collision of images are interchangeable:

* a kernel direction ``H`` at ``X`` gives the distinct pair
  ``[[X, H], [0, X]]`` and ``X + X`` (direct sum) with equal images;
* a collision ``P(X1) = P(X2)`` gives the kernel direction
  ``[[0, X1 - X2], [0, 0]]`` at ``X1 + X2``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import DomainSpec
from .errors import (ConvergenceError, SeriesInversionError, ShapeError,
                     SingularDerivativeError, WitnessError)
from .linearization import derivative_matrix, singularity_certificate
from .matrixeval import (MatrixTuple, SampleConfig, as_tuple, block_jet, direct_sum, eval_map,
                         jet_eval, sample_tuple, similarity)
from .ncpoly import FreePoly, FreePolyMap

WITNESS_RTOL = 1e-8
COLLISION_RTOL = 1e-10
KERNEL_RECHECK_RTOL = 1e-7


def witness_scale(P, X):
    """``max(1, ||X||, ||P(X)||)`` for the tolerance of witness checks."""
    return max(1.0, X.norm(), eval_map(P, X).norm())


@dataclass(frozen=True, eq=False)
class KernelWitness:
    """A nonzero direction ``H`` with ``DP(X)[H]`` (nearly) zero.

    ``residual`` is ``||DP(X)[H]|| / ||H||``.
    """

    X: MatrixTuple
    H: MatrixTuple
    residual: float

    @classmethod
    def build(cls, P, X, H):
        X, H = as_tuple(X), as_tuple(H)
        h = H.norm()
        if h == 0:
            raise WitnessError("kernel direction must be nonzero")
        return cls(X, H, jet_eval(P, X, H).derivative.norm() / h)

    def verify(self, P, rtol=WITNESS_RTOL):
        fresh = KernelWitness.build(P, self.X, self.H)
        return fresh.residual <= rtol * witness_scale(P, self.X)

    def to_dict(self):
        return {"X": self.X.to_dict(), "H": self.H.to_dict(), "residual": self.residual}


@dataclass(frozen=True, eq=False)
class CollisionWitness:
    """Distinct tuples ``X_a != X_b`` with ``P(X_a) = P(X_b)``."""

    X_a: MatrixTuple
    X_b: MatrixTuple
    image_gap: float

    def verify(self, P, rtol=WITNESS_RTOL):
        scale = max(witness_scale(P, self.X_a), witness_scale(P, self.X_b))
        gap = (eval_map(P, self.X_a) - eval_map(P, self.X_b)).norm()
        return (self.X_a - self.X_b).norm() > 1e-10 * scale and gap <= rtol * scale

    def to_dict(self):
        return {"X_a": self.X_a.to_dict(), "X_b": self.X_b.to_dict(), "image_gap": self.image_gap}


def collision_from_kernel(P: FreePolyMap, w: KernelWitness) -> CollisionWitness:
    """Turn a kernel direction into a pair of distinct tuples with equal image."""
    H_norm = w.H.norm()
    if H_norm == 0:
        raise WitnessError("kernel direction must be nonzero")
    fresh = KernelWitness.build(P, w.X, w.H)
    scale = witness_scale(P, w.X)
    if fresh.residual > WITNESS_RTOL * scale:
        raise WitnessError(
            "kernel residual too large to certify a collision",
            residual=fresh.residual,
            bound=WITNESS_RTOL * scale,
            image_gap_bound=fresh.residual * H_norm,
        )
    X_a = block_jet(w.X, w.H)
    X_b = direct_sum(w.X, w.X)
    gap = (eval_map(P, X_a) - eval_map(P, X_b)).norm()
    scale_ab = max(witness_scale(P, X_a), witness_scale(P, X_b))
    if gap > WITNESS_RTOL * scale_ab:
        raise WitnessError("collision image gap exceeds tolerance",
                           image_gap=gap, bound=WITNESS_RTOL * scale_ab)
    return CollisionWitness(X_a, X_b, gap)


def kernel_from_collision(P: FreePolyMap, X1, X2) -> KernelWitness:
    """Turn ``P(X1) = P(X2)`` with ``X1 != X2`` into a kernel direction at
    ``X1 + X2`` (direct sum), supported on the upper-right block."""
    X1, X2 = as_tuple(X1), as_tuple(X2)
    if X1.count != X2.count or X1.size != X2.size:
        raise ShapeError("colliding tuples must have the same shape")
    scale = max(witness_scale(P, X1), witness_scale(P, X2))
    gap = (eval_map(P, X1) - eval_map(P, X2)).norm()
    if gap > COLLISION_RTOL * scale:
        raise WitnessError("images differ; not a collision", image_gap=gap,
                           bound=COLLISION_RTOL * scale)
    diff = X1 - X2
    if diff.norm() <= 1e-10 * scale:
        raise WitnessError("X1 and X2 coincide; not a collision")
    n = X1.size
    H = np.zeros((X1.count, 2 * n, 2 * n), dtype=complex)
    H[:, :n, n:] = diff.data
    w = KernelWitness.build(P, direct_sum(X1, X2), MatrixTuple(H))
    if w.residual > WITNESS_RTOL * witness_scale(P, w.X):
        raise WitnessError("constructed kernel direction does not verify", residual=w.residual)
    return w


def corner_conjugation(X1, X2):
    """The block similarity that moves ``X1 - X2`` into a corner.

    Returns ``(S, Y, S^{-1} Y S)`` where ``Y = X1 + X2 + X1 + X2`` (direct
    sums) and ``S`` is the identity plus an identity block in block position
    (1, 4).  The conjugate equals ``Y`` except for ``X1 - X2`` in that block.
    """
    X1, X2 = as_tuple(X1), as_tuple(X2)
    n = X1.size
    S = np.eye(4 * n, dtype=complex)
    S[:n, 3 * n:] = np.eye(n)
    Y = direct_sum(direct_sum(X1, X2), direct_sum(X1, X2))
    return S, Y, similarity(Y, S)


# series inversion


@dataclass(frozen=True, eq=False)
class SeriesMap:
    """Truncated compositional inverse; ``valid`` records that
    ``P o Q = id`` was verified through ``degree``."""

    map: FreePolyMap
    degree: int
    valid: bool

    def __call__(self, W):
        return eval_map(self.map, W)


def inverse_names(names):
    """Variable names for an inverse: ``Y`` for one variable, otherwise
    the original names."""
    names = list(names)
    if len(names) == 1:
        return ["X"] if names[0] == "Y" else ["Y"]
    return names


def _linear_combination(matrix, polys, num_vars):
    out = []
    for row in matrix:
        acc = FreePoly.zero(num_vars)
        for c, p in zip(row, polys):
            if c != 0:
                acc = acc + p.scale(c)
        out.append(acc)
    return out


def series_inverse(P: FreePolyMap, degree: int, names=None, max_condition=1e10) -> SeriesMap:
    """Compositional inverse ``Q`` of ``P`` as a free power series through
    ``degree``.

    ``P = L X + (higher-order terms)`` with ``L`` invertible and no constant
    term.  Iterates ``Q <- L^{-1} (Y - higher(Q))`` truncated at ``degree``;
    each pass fixes one more degree.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    N = P.num_vars
    if P.num_outputs != N:
        raise SeriesInversionError(f"map has {P.num_outputs} outputs for {N} variables")
    if np.any(P.constant_part() != 0):
        raise SeriesInversionError("map has a constant term; shift it to fix the origin")
    L = P.linear_part()
    cond = np.linalg.cond(L)
    if not cond < max_condition:
        raise SeriesInversionError(
            "linear part is singular (the derivative at the origin is singular)",
            condition=float(cond) if np.isfinite(cond) else None,
        )
    Linv = np.linalg.inv(L)
    higher = FreePolyMap(
        [FreePoly(N, {w: c for w, c in comp.items() if len(w) >= 2}) for comp in P], num_vars=N
    )
    Y = FreePolyMap.identity(N)
    Q = FreePolyMap(_linear_combination(Linv, Y.components, N), num_vars=N)
    for _ in range(degree):
        R = higher.compose(Q, max_degree=degree)
        Q = FreePolyMap(
            _linear_combination(Linv, [y - r for y, r in zip(Y, R)], N), num_vars=N
        )
    if names is None:
        from .parser import default_names

        names = inverse_names(P.names if P.names is not None else default_names(N))
    Q = Q.with_names(names)
    valid = P.compose(Q, max_degree=degree).isclose(Y)
    return SeriesMap(Q, degree, valid)


# Newton inversion


@dataclass(frozen=True, eq=False)
class NewtonResult:
    Z: MatrixTuple
    iterations: int
    residual: float


def newton_invert(P: FreePolyMap, W, Z0, tol=1e-12, max_iter=50, damping=False) -> NewtonResult:
    """Solve ``P(Z) = W`` by Newton's method from ``Z0``.

    Stops when ``||P(Z) - W|| <= tol * max(1, ||W||)``.  Each step solves
    ``DP(Z)[H] = W - P(Z)``; with ``damping`` the step is halved while the
    residual grows.

    Raises
    ------
    SingularDerivativeError
        The derivative at an iterate is singular; carries the certificate.
    ConvergenceError
        ``max_iter`` steps without convergence; carries the best iterate.
    """
    W, Z = as_tuple(W), as_tuple(Z0)
    if P.num_outputs != P.num_vars:
        raise ShapeError("Newton inversion needs as many outputs as variables")
    if W.count != P.num_vars or Z.count != P.num_vars or W.size != Z.size:
        raise ShapeError("target and starting point do not match the map")
    target = tol * max(1.0, W.norm())
    F = eval_map(P, Z) - W
    r = F.norm()
    best = (r, Z)
    for it in range(max_iter + 1):
        if r <= target:
            return NewtonResult(Z, it, r)
        if it == max_iter:
            break
        D = derivative_matrix(P, Z)
        cert = singularity_certificate(D)
        if cert.singular:
            raise SingularDerivativeError(
                f"derivative is singular at iterate {it} (sigma_min={cert.sigma_min:.3g})",
                certificate=cert, iterate=Z, iterations=it,
            )
        step = MatrixTuple.from_vec(np.linalg.solve(D.matrix, -F.vec()), P.num_vars, Z.size)
        t = 1.0
        while True:
            Z_new = Z + step * t
            F_new = eval_map(P, Z_new) - W
            r_new = F_new.norm()
            if not damping or r_new < r or t < 2.0**-30:
                break
            t /= 2
        Z, F, r = Z_new, F_new, r_new
        if r < best[0]:
            best = (r, Z)
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (best residual {best[0]:.3g})",
        best=best[1], residual=best[0], iterations=max_iter,
    )


# Jacobian scans


@dataclass(frozen=True, eq=False)
class ScanHit:
    index: int
    sigma_min: float
    witness: KernelWitness
    verified: bool

    def to_dict(self):
        return {"index": self.index, "sigma_min": self.sigma_min, "verified": self.verified,
                "witness": self.witness.to_dict()}


@dataclass(frozen=True, eq=False)
class SizeRecord:
    size: int
    samples: int
    min_sigma: float
    argmin_index: int
    argmin_digest: str
    hits: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {"n": self.size, "samples": self.samples, "min_sigma": self.min_sigma,
                "argmin_index": self.argmin_index, "argmin_digest": self.argmin_digest,
                "hits": [h.to_dict() for h in self.hits]}


@dataclass(frozen=True, eq=False)
class ScanReport:
    records: tuple
    domain: DomainSpec
    seed: int

    @property
    def free_domain(self):
        return self.domain.is_free

    @property
    def total_hits(self):
        return sum(len(r.hits) for r in self.records)

    @property
    def min_sigma(self):
        return min(r.min_sigma for r in self.records)

    def to_dict(self):
        return {
            "domain": self.domain.to_dict(),
            "free_domain": self.free_domain,
            "seed": self.seed,
            "total_hits": self.total_hits,
            "sizes": [r.to_dict() for r in self.records],
            "note": "sampled evidence, not a proof of nonsingularity",
        }


def size_seed(seed, size):
    """Independent per-size seed derived from the scan seed."""
    return int(np.random.SeedSequence([seed, size]).generate_state(1, np.uint64)[0])


def _threads():
    try:
        return max(1, int(os.environ.get("FREEJAC_THREADS", "1")))
    except ValueError:
        return 1


def _examine(P, X):
    cert = singularity_certificate(derivative_matrix(P, X))
    if not cert.singular:
        return cert, None
    w = KernelWitness.build(P, X, cert.kernel_vector)
    # unit kernel vector: residual is the derivative norm itself
    verified = w.residual <= KERNEL_RECHECK_RTOL * max(1.0, cert.sigma_max)
    return cert, (w, verified)


def jacobian_scan(P: FreePolyMap, domain: DomainSpec | None, sizes, cfg: SampleConfig,
                  planted=()) -> ScanReport:
    """Certify ``DP`` on ``cfg.count`` samples from ``domain`` for each size.

    ``cfg.size`` is ignored in favour of ``sizes``; the sampling seed for
    size ``n`` is derived from ``(cfg.seed, n)``.  ``planted`` tuples are
    certified in addition, under the record of their size.  Work is spread
    over ``FREEJAC_THREADS`` threads; results are merged by sample index.
    """
    domain = domain or DomainSpec()
    planted = [as_tuple(X) for X in planted]
    records = []
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        for n in sizes:
            size_cfg = replace(cfg, size=n, seed=size_seed(cfg.seed, n), domain=domain)
            samples = sample_tuple(size_cfg, P.num_vars)
            samples += [X for X in planted if X.size == n]
            results = list(pool.map(lambda X: _examine(P, X), samples))
            sigmas = [cert.sigma_min for cert, _ in results]
            k = int(np.argmin(sigmas))
            hits = tuple(
                ScanHit(i, cert.sigma_min, hit[0], hit[1])
                for i, (cert, hit) in enumerate(results) if hit is not None
            )
            records.append(SizeRecord(n, len(samples), float(sigmas[k]), k,
                                      samples[k].digest(), hits))
    return ScanReport(tuple(records), domain, cfg.seed)
