"""Constraint sets of matrix tuples used for sampling and Jacobian scans.

Norms are operator (spectral) norms of the individual matrices.  All
inequalities are strict.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def op_norm(A):
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


@dataclass(frozen=True)
class NormBound:
    """``||X_var|| < bound``."""

    var: int
    bound: float

    def __post_init__(self):
        if not self.bound > 0:
            raise ValueError("norm bound must be positive")

    def holds(self, X):
        return op_norm(X[self.var]) < self.bound

    def to_dict(self):
        return {"type": "norm_bound", "var": self.var, "bound": self.bound}


@dataclass(frozen=True)
class WeightedNormSum:
    """``sum_i weights[i] * ||X_i|| < bound``."""

    weights: tuple
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.bound > 0:
            raise ValueError("weighted-sum bound must be positive")
        if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
            raise ValueError("weights must be nonnegative with at least one positive")

    def value(self, X):
        return sum(w * op_norm(X[i]) for i, w in enumerate(self.weights) if w)

    def holds(self, X):
        return self.value(X) < self.bound

    def to_dict(self):
        return {"type": "weighted_norm_sum", "weights": list(self.weights), "bound": self.bound}


@dataclass(frozen=True)
class SpectralHalfPlane:
    """Every eigenvalue ``lam`` of ``X_var`` has ``Re(exp(-i*angle) * lam) > 0``."""

    var: int
    angle: float = 0.0

    def margin(self, A):
        lam = np.linalg.eigvals(A)
        return float(np.min((np.exp(-1j * self.angle) * lam).real))

    def holds(self, X):
        return self.margin(X[self.var]) > 0

    def to_dict(self):
        return {"type": "spectral_halfplane", "var": self.var, "angle": self.angle}


_KINDS = {
    "norm_bound": NormBound,
    "weighted_norm_sum": WeightedNormSum,
    "spectral_halfplane": SpectralHalfPlane,
}


@dataclass(frozen=True)
class DomainSpec:
    constraints: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def contains(self, X):
        return all(c.holds(X) for c in self.constraints)

    def check_arity(self, num_vars):
        for c in self.constraints:
            idx = [i for i, w in enumerate(c.weights) if w] if isinstance(c, WeightedNormSum) \
                else [c.var]
            if any(not 0 <= i < num_vars for i in idx):
                raise ValueError(f"constraint {c.to_dict()} refers to a variable "
                                 f"outside 0..{num_vars - 1}")

    @property
    def is_free(self):
        """Whether the set is closed under direct sums.

        ``||A + B|| = max(||A||, ||B||)`` and ``spec(A + B) = spec(A) | spec(B)``
        for direct sums, so per-variable bounds and half-planes survive; a
        weighted sum over two or more variables does not.
        """
        return not any(
            isinstance(c, WeightedNormSum) and sum(1 for w in c.weights if w > 0) > 1
            for c in self.constraints
        )

    def to_dict(self):
        return {"constraints": [c.to_dict() for c in self.constraints]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d, names=None):
        """Build from the JSON form.  ``var`` may be an index or, when
        ``names`` is given, a variable name."""
        out = []
        for item in d.get("constraints", []):
            item = dict(item)
            kind = item.pop("type")
            if kind not in _KINDS:
                raise ValueError(f"unknown constraint type {kind!r}")
            if "var" in item and isinstance(item["var"], str):
                if names is None or item["var"] not in names:
                    raise ValueError(f"unknown variable {item['var']!r} in domain")
                item["var"] = list(names).index(item["var"])
            if kind == "weighted_norm_sum" and isinstance(item.get("weights"), dict):
                w = item["weights"]
                if names is None or any(k not in names for k in w):
                    raise ValueError("named weights need known variable names")
                item["weights"] = [w.get(name, 0.0) for name in names]
            out.append(_KINDS[kind](**item))
        return cls(tuple(out))

    @classmethod
    def from_json(cls, text, names=None):
        return cls.from_dict(json.loads(text), names)


UNCONSTRAINED = DomainSpec()
