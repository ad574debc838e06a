"""Model parameters and genotypes for the branching random walk on {0,..,b-1}^d.

Particles branch at rate ``lambda1`` (a copy appears at the same vertex) and
mutate at rate ``lambda2`` (one uniformly chosen coordinate is replaced by a
uniformly chosen different symbol).  All asymptotics are driven by the
effective growth parameter ``rho = exp(lambda1/lambda2)``: after rescaling
time by ``lambda2`` the walk has unit transition rate and the expected
population size at time t is ``rho**t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class ModelParams:
    """Alphabet size b, genome length d, branching rate lambda1, mutation rate lambda2."""

    b: int
    d: int
    lambda1: float
    lambda2: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.b, (int, np.integer)) and self.b >= 2):
            raise DomainError(f"alphabet size b must be an integer >= 2, got {self.b}")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise DomainError(f"genome length d must be an integer >= 1, got {self.d}")
        if not self.lambda1 > 0:
            raise DomainError(f"branching rate lambda1 must be > 0, got {self.lambda1}")
        if not self.lambda2 > 0:
            raise DomainError(f"mutation rate lambda2 must be > 0, got {self.lambda2}")

    def rho(self) -> float:
        """Effective growth parameter exp(lambda1/lambda2), always > 1."""
        return math.exp(self.lambda1 / self.lambda2)

    def log_rho(self) -> float:
        return self.lambda1 / self.lambda2

    def rescaled(self) -> "ModelParams":
        """Equivalent parameter set with lambda2 = 1; times scale by 1/lambda2."""
        return ModelParams(self.b, self.d, self.lambda1 / self.lambda2, 1.0)

    @classmethod
    def from_rho(cls, b: int, d: int, rho: float) -> "ModelParams":
        """Rescaled parameters (lambda2 = 1) with the given growth parameter."""
        if not rho > 1.0:
            raise DomainError(f"rho must be > 1, got {rho}")
        return cls(b, d, math.log(rho), 1.0)


class Genotype:
    """A length-d sequence over the alphabet {0, ..., b-1}.

    Stored as a small integer numpy array; the alphabet size travels with the
    genotype so validity does not depend on external context.
    """

    __slots__ = ("symbols", "b")

    def __init__(self, symbols, b: int):
        arr = np.asarray(symbols, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 1:
            raise DimensionError("genotype must be a non-empty 1-d sequence")
        if b < 2:
            raise DomainError(f"alphabet size b must be >= 2, got {b}")
        if arr.min() < 0 or arr.max() >= b:
            raise DomainError(f"genotype symbols must lie in [0, {b})")
        self.symbols = arr
        self.b = int(b)

    def __len__(self):
        return self.symbols.size

    def __eq__(self, other):
        return (isinstance(other, Genotype) and self.b == other.b
                and np.array_equal(self.symbols, other.symbols))

    def __repr__(self):
        body = "".join(str(s) for s in self.symbols[:32])
        tail = "..." if len(self) > 32 else ""
        return f"Genotype({body}{tail}, b={self.b})"

    @classmethod
    def zeros(cls, d: int, b: int) -> "Genotype":
        return cls(np.zeros(d, dtype=np.int64), b)

    @classmethod
    def at_distance(cls, d: int, b: int, m: int) -> "Genotype":
        """Canonical genotype at Hamming distance m from the all-zeros vertex."""
        if not 0 <= m <= d:
            raise DomainError(f"distance m must lie in [0, {d}], got {m}")
        sym = np.zeros(d, dtype=np.int64)
        sym[:m] = 1
        return cls(sym, b)
