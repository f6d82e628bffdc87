"""Sparse polynomials in noncommuting variables with complex coefficients.

A monomial is a *word*: a tuple of 0-based variable indices, with ``()`` the
unit monomial.  Words are ordered by length, then lexicographically, and every
polynomial iterates its terms in that order.
"""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ShapeError

Word = tuple  # tuple[int, ...]

PRUNE_THRESHOLD = 1e-14
COEFF_RTOL = 1e-9


def word_key(word):
    return (len(word), word)


def _coerce_scalar(c):
    c = complex(c)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


class FreePoly:
    """Immutable polynomial over C in ``num_vars`` noncommuting variables.

    Parameters
    ----------
    num_vars : int
        Number of variables N; every letter of every word is ``< N``.
    terms : mapping or iterable of (word, coefficient) pairs
        Repeated words are summed.  Coefficients of magnitude below
        ``PRUNE_THRESHOLD`` are dropped.
    """

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping | Iterable = ()):
        num_vars = int(num_vars)
        if num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc = {}
        for word, c in terms:
            word = tuple(int(i) for i in word)
            for i in word:
                if not 0 <= i < num_vars:
                    raise ShapeError(
                        f"variable index {i} out of range for {num_vars} variables"
                    )
            acc[word] = acc.get(word, 0j) + _coerce_scalar(c)
        self.num_vars = num_vars
        self._terms = _canonical(acc)
        self._hash = None

    @classmethod
    def _raw(cls, num_vars, acc):
        # trusted constructor for words already validated
        out = object.__new__(cls)
        out.num_vars = num_vars
        out._terms = _canonical(acc)
        out._hash = None
        return out

    # constructors

    @classmethod
    def zero(cls, num_vars):
        return cls(num_vars)

    @classmethod
    def constant(cls, num_vars, c=1.0):
        return cls(num_vars, {(): c})

    @classmethod
    def one(cls, num_vars):
        return cls.constant(num_vars, 1.0)

    @classmethod
    def var(cls, num_vars, index, coeff=1.0):
        return cls(num_vars, {(index,): coeff})

    @classmethod
    def monomial(cls, num_vars, word, coeff=1.0):
        return cls(num_vars, {tuple(word): coeff})

    # inspection

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def words(self):
        return list(self._terms)

    def coeff(self, word):
        return self._terms.get(tuple(word), 0j)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self):
        return not self._terms

    @property
    def degree(self):
        """Length of the longest word; -1 for the zero polynomial."""
        return max((len(w) for w in self._terms), default=-1)

    def max_abs_coeff(self):
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def homogeneous_part(self, d):
        return FreePoly._raw(
            self.num_vars, {w: c for w, c in self._terms.items() if len(w) == d}
        )

    # comparisons

    def __eq__(self, other):
        if not isinstance(other, FreePoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, tuple(self._terms.items())))
        return self._hash

    def isclose(self, other, rtol=COEFF_RTOL):
        """Coefficientwise comparison with tolerance ``rtol`` times the
        largest coefficient magnitude of either operand (at least 1)."""
        _check_same_vars(self, other)
        scale = max(1.0, self.max_abs_coeff(), other.max_abs_coeff())
        for w in set(self._terms) | set(other._terms):
            if abs(self.coeff(w) - other.coeff(w)) > rtol * scale:
                return False
        return True

    # ring structure

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return poly_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return FreePoly._raw(self.num_vars, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return poly_add(self, -other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return poly_add(other, -self)

    def __mul__(self, other):
        if isinstance(other, FreePoly):
            return poly_mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = FreePoly.one(self.num_vars)
        for _ in range(int(k)):
            out = poly_mul(out, self)
        return out

    def scale(self, c):
        c = _coerce_scalar(c)
        return FreePoly._raw(self.num_vars, {w: c * v for w, v in self._terms.items()})

    def _lift(self, other):
        if isinstance(other, FreePoly):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return FreePoly.constant(self.num_vars, other)
        return NotImplemented

    def __repr__(self):
        from .parser import print_poly

        return f"FreePoly({self.num_vars}, {print_poly(self)!r})"


class BiPoly(FreePoly):
    """A polynomial in X-variables ``0..N-1`` and H-variables ``N..2N-1``.

    Produced by :func:`formal_derivative`; shares all arithmetic with
    :class:`FreePoly` (results of arithmetic are plain ``FreePoly``).
    """

    __slots__ = ("base_vars",)

    def __init__(self, base_vars, terms=()):
        super().__init__(2 * base_vars, terms)
        self.base_vars = int(base_vars)

    @classmethod
    def _raw(cls, base_vars, acc):
        out = FreePoly._raw.__func__(cls, 2 * base_vars, acc)
        out.base_vars = base_vars
        return out

    @property
    def h_linear(self):
        return all(sum(1 for i in w if i >= self.base_vars) == 1 for w in self._terms)


def _canonical(acc):
    return {
        w: acc[w] for w in sorted(acc, key=word_key) if abs(acc[w]) >= PRUNE_THRESHOLD
    }


def _check_same_vars(p, q):
    if p.num_vars != q.num_vars:
        raise ShapeError(
            f"variable-count mismatch: {p.num_vars} vs {q.num_vars}",
        )


def poly_add(p: FreePoly, q: FreePoly) -> FreePoly:
    _check_same_vars(p, q)
    acc = dict(p._terms)
    for w, c in q._terms.items():
        acc[w] = acc.get(w, 0j) + c
    return FreePoly._raw(p.num_vars, acc)


def poly_mul(p: FreePoly, q: FreePoly, max_degree: int | None = None) -> FreePoly:
    """Noncommutative product; words of length above ``max_degree`` are
    never formed."""
    _check_same_vars(p, q)
    acc = {}
    for u, a in p._terms.items():
        for v, b in q._terms.items():
            if max_degree is not None and len(u) + len(v) > max_degree:
                continue
            w = u + v
            acc[w] = acc.get(w, 0j) + a * b
    return FreePoly._raw(p.num_vars, acc)


def truncate(p: FreePoly, d: int) -> FreePoly:
    if d < 0:
        raise ValueError("truncation degree must be nonnegative")
    return FreePoly._raw(p.num_vars, {w: c for w, c in p._terms.items() if len(w) <= d})


def embed(p: FreePoly, num_vars: int) -> FreePoly:
    """View ``p`` as a polynomial in ``num_vars >= p.num_vars`` variables."""
    if num_vars < p.num_vars:
        raise ShapeError("cannot embed into fewer variables")
    return FreePoly._raw(num_vars, dict(p._terms))


def formal_derivative(p: FreePoly) -> BiPoly:
    """Directional derivative ``Dp(X)[H]`` as an H-linear polynomial.

    Each occurrence of a letter ``i`` in a word is, in turn, replaced by the
    H-letter ``N + i``; the contributions are summed.
    """
    n = p.num_vars
    acc = {}
    for w, c in p._terms.items():
        for k, i in enumerate(w):
            dw = w[:k] + (n + i,) + w[k + 1:]
            acc[dw] = acc.get(dw, 0j) + c
    return BiPoly._raw(n, acc)


def compose(p: FreePoly, subs: Sequence[FreePoly], max_degree: int | None = None) -> FreePoly:
    """Substitute ``subs[i]`` for variable ``i`` of ``p``.

    Products of substituted letters are memoized by word prefix.  With
    ``max_degree`` set, all intermediate products are truncated, which gives
    the composition modulo words longer than ``max_degree``.
    """
    subs = list(subs)
    if len(subs) != p.num_vars:
        raise ShapeError(f"compose needs {p.num_vars} substitutions, got {len(subs)}")
    if not subs:
        m = 0
    else:
        m = subs[0].num_vars
        for s in subs:
            if s.num_vars != m:
                raise ShapeError("substitutions do not share a variable count")
    cache = {(): FreePoly.one(m)}

    def product(word):
        if word not in cache:
            cache[word] = poly_mul(product(word[:-1]), subs[word[-1]], max_degree)
        return cache[word]

    acc = {}
    for w, c in p._terms.items():
        for u, a in product(w)._terms.items():
            acc[u] = acc.get(u, 0j) + c * a
    out = FreePoly._raw(m, acc)
    return truncate(out, max_degree) if max_degree is not None else out


class FreePolyMap:
    """An ordered tuple of free polynomials in a common set of variables.

    ``names`` records the variable identifiers used for printing; it takes no
    part in equality.
    """

    __slots__ = ("num_vars", "components", "names")

    def __init__(self, components: Sequence[FreePoly], names: Sequence[str] | None = None,
                 num_vars: int | None = None):
        components = tuple(components)
        if not components:
            raise ShapeError("a polynomial map needs at least one component")
        if num_vars is None:
            num_vars = components[0].num_vars
        for c in components:
            if not isinstance(c, FreePoly):
                raise TypeError("components must be FreePoly")
            if c.num_vars != num_vars:
                raise ShapeError("components do not share a variable count")
        if names is not None:
            names = tuple(names)
            if len(names) != num_vars:
                raise ShapeError(f"{len(names)} names for {num_vars} variables")
        self.num_vars = num_vars
        self.components = components
        self.names = names

    @classmethod
    def identity(cls, num_vars, names=None):
        return cls([FreePoly.var(num_vars, i) for i in range(num_vars)], names)

    @property
    def num_outputs(self):
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, k):
        return self.components[k]

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        if not isinstance(other, FreePolyMap):
            return NotImplemented
        return self.num_vars == other.num_vars and self.components == other.components

    def __hash__(self):
        return hash((self.num_vars, self.components))

    def isclose(self, other, rtol=COEFF_RTOL):
        return len(self) == len(other) and all(
            a.isclose(b, rtol) for a, b in zip(self, other)
        )

    @property
    def degree(self):
        return max(c.degree for c in self.components)

    def with_names(self, names):
        return FreePolyMap(self.components, names, self.num_vars)

    def constant_part(self):
        return np.array([c.coeff(()) for c in self.components], dtype=complex)

    def linear_part(self):
        """Coefficient matrix of the degree-one terms, shape (outputs, vars)."""
        out = np.zeros((self.num_outputs, self.num_vars), dtype=complex)
        for k, c in enumerate(self.components):
            for j in range(self.num_vars):
                out[k, j] = c.coeff((j,))
        return out

    def compose(self, inner: "FreePolyMap", max_degree=None) -> "FreePolyMap":
        """The map ``X -> self(inner(X))``."""
        return FreePolyMap(
            [compose(c, inner.components, max_degree) for c in self.components],
            inner.names,
            inner.num_vars,
        )

    def truncate(self, d):
        return FreePolyMap([truncate(c, d) for c in self.components], self.names, self.num_vars)

    def derivative(self):
        return [formal_derivative(c) for c in self.components]

    def __repr__(self):
        from .parser import print_map

        return f"FreePolyMap({print_map(self)!r})"
