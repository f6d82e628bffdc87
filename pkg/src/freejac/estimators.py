"""Estimator-style wrappers so inversion and scanning compose with
scikit-learn tooling (``get_params``, ``clone``, pipelines of configs).

``fit`` takes the polynomial map (object or source text); ``transform``
and ``predict`` take matrix tuples.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .invertibility import jacobian_scan, newton_invert, series_inverse
from .linearization import derivative_matrix, singularity_certificate
from .matrixeval import SampleConfig, eval_map
from .validation import check_map, check_tuple, check_tuples


class SeriesInverter(BaseEstimator):
    """Truncated compositional inverse of a map with invertible linear part.

    Parameters
    ----------
    degree : int
        Working degree of the inverse series.

    Attributes
    ----------
    map_ : FreePolyMap
    inverse_ : SeriesMap
    """

    def __init__(self, degree=5):
        self.degree = degree

    def fit(self, P, y=None):
        self.map_ = check_map(P)
        self.inverse_ = series_inverse(self.map_, self.degree)
        self.n_vars_ = self.map_.num_vars
        return self

    def transform(self, W):
        check_is_fitted(self, "inverse_")
        return eval_map(self.inverse_.map, check_tuple(W, self.n_vars_))

    def inverse_transform(self, Z):
        check_is_fitted(self, "map_")
        return eval_map(self.map_, check_tuple(Z, self.n_vars_))


class NewtonInverter(BaseEstimator):
    """Pointwise inverse ``W -> Z`` with ``P(Z) = W`` by Newton's method.

    With ``warm_start_degree`` set, iterations start from the truncated
    series inverse evaluated at ``W``; otherwise from ``W`` itself.
    """

    def __init__(self, tol=1e-12, max_iter=50, damping=False, warm_start_degree=None):
        self.tol = tol
        self.max_iter = max_iter
        self.damping = damping
        self.warm_start_degree = warm_start_degree

    def fit(self, P, y=None):
        self.map_ = check_map(P)
        self.n_vars_ = self.map_.num_vars
        self.series_ = (series_inverse(self.map_, self.warm_start_degree)
                         if self.warm_start_degree else None)
        return self

    def transform(self, W, Z0=None):
        check_is_fitted(self, "map_")
        W = check_tuple(W, self.n_vars_)
        if Z0 is None:
            Z0 = self.series_(W) if self.series_ is not None else W
        res = newton_invert(self.map_, W, check_tuple(Z0, self.n_vars_, W.size),
                            tol=self.tol, max_iter=self.max_iter, damping=self.damping)
        self.n_iter_ = res.iterations
        self.residual_ = res.residual
        return res.Z

    def inverse_transform(self, Z):
        check_is_fitted(self, "map_")
        return eval_map(self.map_, check_tuple(Z, self.n_vars_))


class JacobianScanner(BaseEstimator):
    """Sampled search for points where the derivative is singular.

    ``fit`` runs the scan and stores the report; ``predict`` classifies
    given tuples (True = singular derivative) and ``decision_function``
    returns ``sigma_min / max(1, sigma_max)`` for each.
    """

    def __init__(self, domain=None, sizes=(2, 3), n_samples=100, seed=0,
                 distribution="ginibre"):
        self.domain = domain
        self.sizes = sizes
        self.n_samples = n_samples
        self.seed = seed
        self.distribution = distribution

    def fit(self, P, y=None):
        self.map_ = check_map(P)
        cfg = SampleConfig(size=max(self.sizes), count=self.n_samples, seed=self.seed,
                           distribution=self.distribution)
        self.report_ = jacobian_scan(self.map_, self.domain, list(self.sizes), cfg)
        self.n_hits_ = self.report_.total_hits
        self.min_sigma_ = self.report_.min_sigma
        return self

    def _certificates(self, Xs):
        check_is_fitted(self, "map_")
        return [singularity_certificate(derivative_matrix(self.map_, X))
                for X in check_tuples(Xs, self.map_.num_vars)]

    def predict(self, Xs):
        return np.array([c.singular for c in self._certificates(Xs)])

    def decision_function(self, Xs):
        return np.array([c.sigma_min / max(1.0, c.sigma_max) for c in self._certificates(Xs)])
