"""Lower-semicontinuity checks along norm-bounded a.e.-convergent sequences,
canonical test sequences, and extraction of a.e.-convergent subsequences.

Sequences live on dyadic refinements of [0, 1].  The generators cover the
standard phenomena: spikes (norm-bounded, a.e. null, expectation 1),
typewriter blocks (norm-null, nowhere convergent), oscillation (no a.e.
limit, constant distance from 0), and constants.

``extract_ae_subsequence`` realises the constructive step that turns a
sequence converging to the limit in a strictly positive weighted L1 sense
into an a.e.-convergent subsequence: indices are chosen greedily so the
k-th certificate integral is at most 2**-k, which makes the certificate
series summable; the pointwise verdict then re-checks convergence at
every cell of the finest generated level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex import ConvexFunctional
from .measure import (
    ProbabilitySpace,
    RandomVariable,
    common_refinement,
    integrate,
    pairing,
    refine,
)
from .orlicz import OrliczFunction, luxemburg_norm

__all__ = [
    "ExtractionResult",
    "ExtractionStalled",
    "LscReport",
    "NormBoundReport",
    "NotConvergent",
    "NotNormBounded",
    "TestSequence",
    "UnknownName",
    "check_bounded_uo_lsc",
    "extract_ae_subsequence",
    "generate",
    "verify_norm_bounded",
]


class NotConvergent(ValueError):
    """The sequence has no declared limit to compare against."""


class NotNormBounded(RuntimeError):
    """Sequence norms exceed the configured bound; the hypothesis fails."""


class ExtractionStalled(RuntimeError):
    """No remaining index meets the current certificate bound."""


class UnknownName(ValueError):
    """No generator with that name."""


@dataclass(frozen=True, eq=False)
class TestSequence:
    """A sequence of random variables on dyadic spaces, 1-indexed.

    ``generator`` must return element n on a space of level at least
    ceil(log2 n).  ``ae_convergent`` records what is known about almost
    everywhere convergence of the full sequence (None when unknown).
    """

    name: str
    generator: callable
    declared_limit: RandomVariable | None = None
    ae_convergent: bool | None = None

    def element(self, n: int) -> RandomVariable:
        if n < 1:
            raise ValueError("elements are 1-indexed")
        return self.generator(n)


def _spike_element(n: int) -> RandomVariable:
    """n * indicator of [0, 1/n], realised with an exact unit integral.

    The boundary cell carries the exact dyadic remainder of the mass, so
    the integral equals 1 for every n, not only for powers of two.
    """
    level = max(0, math.ceil(math.log2(n))) if n > 1 else 0
    cells = 2**level
    width = 2.0**-level
    full = cells // n
    values = [0.0] * cells
    for j in range(full):
        values[j] = float(n)
    remainder = 1.0 - full * n * width
    if remainder > 0.0 and full < cells:
        values[full] = remainder / width
    return RandomVariable.from_values(ProbabilitySpace.dyadic(level), values)


def _typewriter_element(n: int) -> RandomVariable:
    """Stage k = floor(log2 n) sweeps 2**k blocks of width 2**-k.

    The within-stage start position rotates with the stage index, so the
    subsequence picked by the greedy certificate extraction (the first
    index of each stage) moves across [0, 1] instead of nesting at 0.
    Every stage still sweeps every block exactly once, so every cell is
    hit once per stage and the full sequence converges nowhere.
    """
    k = n.bit_length() - 1
    i = n - 2**k
    block = (i + k) % (2**k) if k > 0 else 0
    level = max(k, math.ceil(math.log2(n))) if n > 1 else 0
    values = [0.0] * (2**level)
    width = 2 ** (level - k)
    for j in range(block * width, (block + 1) * width):
        values[j] = 1.0
    return RandomVariable.from_values(ProbabilitySpace.dyadic(level), values)


def _oscillating_element(n: int) -> RandomVariable:
    level = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    cells = 2**level
    sign = -1.0 if n % 2 else 1.0
    values = [sign] * (cells // 2) + [0.0] * (cells - cells // 2)
    return RandomVariable.from_values(ProbabilitySpace.dyadic(level), values)


def generate(name: str, limit_value: RandomVariable | None = None) -> TestSequence:
    """Canonical test sequences by name.

    spike       n * 1_[0,1/n]; limit 0, L1 norm exactly 1.
    typewriter  sweeping indicator blocks; no a.e. limit (flagged).
    oscillating (-1)^n * 1_[0,1/2]; no a.e. limit (flagged).
    constant    constant sequence equal to ``limit_value``.
    """
    zero = RandomVariable.zero(ProbabilitySpace.dyadic(0))
    if name == "spike":
        return TestSequence("spike", _spike_element, zero, ae_convergent=True)
    if name == "typewriter":
        return TestSequence("typewriter", _typewriter_element, None, ae_convergent=False)
    if name == "oscillating":
        return TestSequence("oscillating", _oscillating_element, None, ae_convergent=False)
    if name == "constant":
        if limit_value is None:
            raise ValueError("constant sequence needs limit_value")
        f = limit_value

        def element(n: int, f=f) -> RandomVariable:
            if f.space.level is not None and 2**f.space.level < n:
                return refine(f, math.ceil(math.log2(n)))
            return f

        return TestSequence("constant", element, f, ae_convergent=True)
    raise UnknownName(f"no sequence generator named {name!r}")


@dataclass(frozen=True, eq=False)
class LscReport:
    """Finite-horizon comparison of rho at the limit with liminf rho(f_n)."""

    name: str
    n_max: int
    values: tuple[float, ...]
    liminf: float
    rho_at_limit: float
    verdict: str  # "satisfied-evidence" | "violated"
    tol: float

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_max": self.n_max,
            "values": list(self.values),
            "liminf": self.liminf,
            "rho_at_limit": self.rho_at_limit,
            "verdict": self.verdict,
            "tol": self.tol,
        }


def check_bounded_uo_lsc(
    rho: ConvexFunctional,
    s: TestSequence,
    n_max: int,
    tol: float,
    norm_bound: float = 1e6,
) -> LscReport:
    """Test rho(limit) <= liminf rho(f_n) along a norm-bounded sequence.

    The liminf at a finite horizon is estimated as the minimum over the
    last half of the evaluated indices; tol separates a genuine violation
    from estimation noise.  The L1 norms of the elements must stay below
    ``norm_bound``, otherwise the boundedness hypothesis fails and the
    comparison would be meaningless.
    """
    if n_max < 16:
        raise ValueError("n_max must be >= 16")
    if s.declared_limit is None:
        raise NotConvergent(f"sequence {s.name!r} has no declared limit")
    values = []
    for n in range(1, n_max + 1):
        f = s.element(n)
        l1 = integrate(f.abs())
        if l1 > norm_bound:
            raise NotNormBounded(f"element {n} has L1 norm {l1:g} > bound {norm_bound:g}")
        values.append(rho.evaluate(f))
    liminf = min(values[n_max // 2 :])
    at_limit = rho.evaluate(s.declared_limit)
    verdict = "violated" if at_limit > liminf + tol else "satisfied-evidence"
    return LscReport(s.name, n_max, tuple(values), liminf, at_limit, verdict, tol)


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Extracted indices with their certificates and the pointwise verdict.

    ``certificates[k-1] <= 2**-k`` holds for every position k by
    construction and can be re-checked from the report.  The a.e. verdict
    records, for every cell of the finest generated level, whether the
    extracted values converge to the limit there; a cell tolerates visits
    in fewer than half of the last-half positions, since the final
    extracted element always covers some cell.
    """

    indices: tuple[int, ...]
    certificates: tuple[float, ...]
    level: int
    ae_ok: bool
    failing_cells: tuple[int, ...]
    tol: float

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "certificates": list(self.certificates),
            "level": self.level,
            "ae_verdict": "pass" if self.ae_ok else "fail",
            "failing_cells": list(self.failing_cells),
            "tol": self.tol,
        }


def extract_ae_subsequence(
    s: TestSequence,
    phi_weight: RandomVariable | None,
    limit: RandomVariable | None,
    n_max: int,
    tol: float = 1e-9,
) -> ExtractionResult:
    """Greedy extraction of a fast-converging subsequence, then an a.e. check.

    The certificate of index n is the integral of |f_n - limit| against the
    strictly positive weight; position k demands a certificate at most
    2**-k, and the smallest qualifying index after the previous pick is
    taken.  If qualifying indices run out before the horizon is exhausted,
    the weighted distances are not tending to 0 and ExtractionStalled is
    raised.  Summability of the certificates is what forces almost
    everywhere convergence; the verdict re-checks it cell by cell.
    """
    if limit is None:
        limit = s.declared_limit
    if limit is None:
        raise NotConvergent(f"sequence {s.name!r} has no declared limit; pass one explicitly")
    if phi_weight is None:
        phi_weight = RandomVariable.ones(ProbabilitySpace.dyadic(0))
    if any(v <= 0.0 for v in phi_weight.values):
        raise ValueError("phi_weight must be strictly positive at every point")

    def certificate(f: RandomVariable) -> float:
        a, b = common_refinement(f, limit)
        diff = RandomVariable(a.space, tuple(abs(x - y) for x, y in zip(a.values, b.values)))
        return pairing(diff, phi_weight)

    indices: list[int] = []
    certificates: list[float] = []
    prev = 0
    k = 1
    while prev < n_max:
        bound = 2.0**-k
        pick = None
        for n in range(prev + 1, n_max + 1):
            c = certificate(s.element(n))
            if c <= bound:
                pick = (n, c)
                break
        if pick is None:
            raise ExtractionStalled(
                f"no index in ({prev}, {n_max}] has certificate <= 2**-{k}; "
                "the weighted distances do not tend to 0"
            )
        prev, cert = pick
        indices.append(prev)
        certificates.append(cert)
        k += 1

    chosen = [s.element(n) for n in indices]
    level = max(
        [limit.space.level or 0] + [f.space.level or 0 for f in chosen]
    )
    lim_fine = refine(limit, level) if limit.space.level is not None else limit
    diffs = np.array(
        [np.abs(refine(f, level).array - lim_fine.array) for f in chosen]
    )
    half = len(indices) // 2
    tail_rows = diffs[half:]
    violations = (tail_rows > tol).sum(axis=0)
    allowed = tail_rows.shape[0] / 2.0
    failing = tuple(int(c) for c in np.nonzero(violations > allowed)[0])
    return ExtractionResult(
        tuple(indices), tuple(certificates), level, not failing, failing, tol
    )


@dataclass(frozen=True, eq=False)
class NormBoundReport:
    """Running Luxemburg norms of the sequence and a boundedness verdict."""

    norms: tuple[float, ...]
    bound: float
    verdict: str  # "bounded" | "unbounded-evidence"

    def to_dict(self) -> dict:
        return {"norms": list(self.norms), "bound": self.bound, "verdict": self.verdict}


def verify_norm_bounded(
    s: TestSequence,
    phi: OrliczFunction,
    n_max: int,
    tol: float = 1e-6,
) -> NormBoundReport:
    """Max Luxemburg norm over the horizon, flagging monotone growth.

    The flag is evidence only: the running maximum growing through the
    last quarter of the horizon (beyond bisection noise) suggests the
    sequence is not norm bounded under this Orlicz function.
    """
    norms = [luxemburg_norm(s.element(n), phi, tol).value for n in range(1, n_max + 1)]
    running = np.maximum.accumulate(norms)
    q = max(1, n_max // 4)
    grew = running[-1] > running[-q] * (1.0 + 1e-3) + 10.0 * tol
    return NormBoundReport(
        tuple(norms), float(running[-1]), "unbounded-evidence" if grew else "bounded"
    )
