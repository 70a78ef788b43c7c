"""Finite probability spaces and random variables with exact integration.

Nonatomic behaviour is approximated by dyadic refinements of [0, 1]: a
dyadic space at level L has 2**L equal cells, and refining a random
variable replicates cell values across subcells, so integrals are
preserved exactly.  General weighted spaces are supported but cannot be
refined.  All types are immutable and all operations are pure.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "IncompatibleSpaces",
    "NotDyadic",
    "ProbabilitySpace",
    "RandomVariable",
    "common_refinement",
    "integrate",
    "pairing",
    "refine",
]

_WEIGHT_TOL = 1e-12


class IncompatibleSpaces(ValueError):
    """Neither random variable's space refines to the other's."""


class NotDyadic(ValueError):
    """Operation requires a dyadic discretisation of [0, 1]."""


@dataclass(frozen=True)
class ProbabilitySpace:
    """Finite weighted sample space.

    ``points`` are ordered labels and ``weights`` the strictly positive
    probabilities per point (summing to one within 1e-12).  ``level`` is
    set only for dyadic discretisations of [0, 1], which must consist of
    exactly ``2**level`` cells of weight ``2**-level``.
    """

    points: tuple[str, ...]
    weights: tuple[float, ...]
    level: int | None = None

    def __post_init__(self) -> None:
        if not self.points or len(self.points) != len(self.weights):
            raise ValueError("points and weights must be nonempty and equal-length")
        for w in self.weights:
            if not math.isfinite(w) or w <= 0.0:
                raise ValueError(f"weights must be finite and > 0, got {w}")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1 within 1e-12")
        if self.level is not None:
            n, w = 2**self.level, 2.0**-self.level
            if len(self.points) != n or any(wi != w for wi in self.weights):
                raise ValueError(
                    f"dyadic space at level {self.level} needs {n} cells of weight {w}"
                )

    @classmethod
    def dyadic(cls, level: int) -> ProbabilitySpace:
        """The 2**level equal cells of [0, 1)."""
        if level < 0:
            raise ValueError("level must be >= 0")
        n = 2**level
        labels = tuple(f"[{j}/{n},{j + 1}/{n})" for j in range(n))
        return cls(labels, (2.0**-level,) * n, level)

    @classmethod
    def uniform(cls, n: int) -> ProbabilitySpace:
        """n equally likely points (not refinable unless n is dyadic-labelled)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls(tuple(f"p{i}" for i in range(n)), (1.0 / n,) * n)

    @classmethod
    def weighted(cls, points: tuple[str, ...], weights: tuple[float, ...]) -> ProbabilitySpace:
        return cls(tuple(points), tuple(float(w) for w in weights))

    @property
    def size(self) -> int:
        return len(self.points)

    @cached_property
    def weight_array(self) -> np.ndarray:
        arr = np.asarray(self.weights, dtype=float)
        arr.flags.writeable = False
        return arr

    def to_json(self) -> str:
        return json.dumps(
            {"points": list(self.points), "weights": list(self.weights), "level": self.level}
        )

    @classmethod
    def from_json(cls, text: str) -> ProbabilitySpace:
        data = json.loads(text)
        return cls(tuple(data["points"]), tuple(data["weights"]), data.get("level"))


@dataclass(frozen=True)
class RandomVariable:
    """Real values on the point set of a probability space."""

    space: ProbabilitySpace
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.space.size:
            raise ValueError("one value per sample point required")
        for v in self.values:
            if not math.isfinite(v):
                raise ValueError("values must be finite (no NaN or infinity)")

    @classmethod
    def from_values(cls, space: ProbabilitySpace, values) -> RandomVariable:
        return cls(space, tuple(float(v) for v in values))

    @classmethod
    def constant(cls, space: ProbabilitySpace, c: float) -> RandomVariable:
        return cls(space, (float(c),) * space.size)

    @classmethod
    def zero(cls, space: ProbabilitySpace) -> RandomVariable:
        return cls.constant(space, 0.0)

    @classmethod
    def ones(cls, space: ProbabilitySpace) -> RandomVariable:
        return cls.constant(space, 1.0)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.values, dtype=float)
        arr.flags.writeable = False
        return arr

    def abs(self) -> RandomVariable:
        return RandomVariable(self.space, tuple(abs(v) for v in self.values))

    def map(self, fn) -> RandomVariable:
        return RandomVariable.from_values(self.space, [fn(v) for v in self.values])

    def __add__(self, other: RandomVariable) -> RandomVariable:
        f, g = common_refinement(self, other)
        return RandomVariable(f.space, tuple(a + b for a, b in zip(f.values, g.values)))

    def __sub__(self, other: RandomVariable) -> RandomVariable:
        f, g = common_refinement(self, other)
        return RandomVariable(f.space, tuple(a - b for a, b in zip(f.values, g.values)))

    def __mul__(self, scalar: float) -> RandomVariable:
        return RandomVariable(self.space, tuple(scalar * v for v in self.values))

    __rmul__ = __mul__

    def sup_abs(self) -> float:
        return max(abs(v) for v in self.values)

    def to_csv(self) -> str:
        """One row per point, columns ``index,weight,value``."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["index", "weight", "value"])
        for i, (w, v) in enumerate(zip(self.space.weights, self.values)):
            writer.writerow([i, repr(w), repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, level: int | None = None) -> RandomVariable:
        rows = list(csv.DictReader(io.StringIO(text)))
        weights = tuple(float(r["weight"]) for r in rows)
        values = tuple(float(r["value"]) for r in rows)
        points = tuple(f"p{r['index']}" for r in rows)
        if level is not None:
            return cls(ProbabilitySpace.dyadic(level), values)
        return cls(ProbabilitySpace(points, weights), values)


def integrate(f: RandomVariable) -> float:
    """Expectation of ``f``: the weighted sum of its values.

    Computed with compensated summation so the result does not depend on
    incidental evaluation order and refinement preserves it exactly.
    """
    return math.fsum(v * w for v, w in zip(f.values, f.space.weights))


def refine(f: RandomVariable, level: int) -> RandomVariable:
    """Replicate each cell value of a dyadic variable down to ``level``."""
    if f.space.level is None:
        raise NotDyadic("only dyadic spaces can be refined")
    if level < f.space.level:
        raise ValueError(f"cannot refine level {f.space.level} down to {level}")
    if level == f.space.level:
        return f
    reps = 2 ** (level - f.space.level)
    values = tuple(v for v in f.values for _ in range(reps))
    return RandomVariable(ProbabilitySpace.dyadic(level), values)


def common_refinement(f: RandomVariable, g: RandomVariable) -> tuple[RandomVariable, RandomVariable]:
    """Bring two variables onto one space, refining dyadic levels as needed."""
    if f.space == g.space:
        return f, g
    if f.space.level is not None and g.space.level is not None:
        level = max(f.space.level, g.space.level)
        return refine(f, level), refine(g, level)
    raise IncompatibleSpaces(
        "variables live on different spaces and at least one is not dyadic"
    )


def pairing(f: RandomVariable, g: RandomVariable) -> float:
    """The bilinear duality pairing: the integral of the product f*g."""
    f, g = common_refinement(f, g)
    return math.fsum(a * b * w for a, b, w in zip(f.values, g.values, f.space.weights))
