import numpy as np
import pytest
from hypothesis import strategies as st

from freejac.matrixeval import MatrixTuple, ginibre
from freejac.ncpoly import FreePoly, FreePolyMap


def random_poly(rng, num_vars, max_degree, n_terms=6, constant=True):
    terms = {}
    for _ in range(n_terms):
        d = int(rng.integers(0 if constant else 1, max_degree + 1))
        word = tuple(int(i) for i in rng.integers(0, num_vars, size=d))
        terms[word] = complex(rng.standard_normal(), rng.standard_normal())
    return FreePoly(num_vars, terms)


def random_map(rng, num_vars, num_outputs, max_degree, n_terms=6):
    return FreePolyMap([random_poly(rng, num_vars, max_degree, n_terms)
                        for _ in range(num_outputs)])


def random_tuple(rng, count, size):
    return MatrixTuple([ginibre(rng, size) for _ in range(count)])


def relerr(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.linalg.norm((a - b).ravel()) / max(1.0, np.linalg.norm(b.ravel()))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


coeffs = st.one_of(
    st.integers(-5, 5).map(complex),
    st.builds(complex, st.floats(-10, 10, allow_nan=False, width=32),
              st.floats(-10, 10, allow_nan=False, width=32)),
)


def free_polys(num_vars, max_degree=4, max_terms=6):
    words = st.lists(st.integers(0, num_vars - 1), max_size=max_degree).map(tuple)
    return st.dictionaries(words, coeffs, max_size=max_terms).map(
        lambda d: FreePoly(num_vars, d))
