"""Input coercion shared by the estimators and the CLI."""

import numpy as np

from .errors import ShapeError
from .matrixeval import MatrixTuple
from .ncpoly import FreePolyMap
from .parser import parse_map


def check_map(P):
    """Accept a :class:`FreePolyMap` or its source text."""
    if isinstance(P, FreePolyMap):
        return P
    if isinstance(P, str):
        return parse_map(P)
    raise TypeError(f"expected a FreePolyMap or map source text, got {type(P).__name__}")


def check_tuple(X, num_vars=None, size=None):
    """Coerce ``X`` to a :class:`MatrixTuple` and check its shape.

    Accepts a ``MatrixTuple``, an array of shape ``(N, n, n)``, a sequence of
    square matrices, or, when ``num_vars == 1``, a single square matrix.
    """
    if not isinstance(X, MatrixTuple):
        arr = np.asarray(X, dtype=complex)
        if arr.ndim == 2 and num_vars == 1:
            arr = arr[None]
        X = MatrixTuple(arr)
    if num_vars is not None and X.count != num_vars:
        raise ShapeError(f"expected {num_vars} matrices, got {X.count}")
    if size is not None and X.size != size:
        raise ShapeError(f"expected {size}x{size} matrices, got {X.size}x{X.size}")
    return X


def check_tuples(Xs, num_vars=None):
    if isinstance(Xs, MatrixTuple):
        return [check_tuple(Xs, num_vars)]
    arr = Xs if isinstance(Xs, (list, tuple)) else np.asarray(Xs, dtype=complex)
    if isinstance(arr, np.ndarray) and arr.ndim == 3:
        return [check_tuple(arr, num_vars)]
    return [check_tuple(X, num_vars) for X in arr]
