"""Orlicz functions, conjugates by numerical Legendre transform, and Luxemburg norms.

An Orlicz function is convex, nondecreasing, vanishes at 0 and is not
identically 0.  The conjugate ``psi(t) = sup { s*t - phi(s) : s >= 0 }``
is computed on a truncated s-range by a grid sweep refined with ternary
search (the objective is concave in s, so the refinement is exact up to
bracket width).  The Luxemburg norm ``inf { lam > 0 : E[phi(|f|/lam)] <= 1 }``
is bracketed by doubling/halving and then bisected; the upper bracket
endpoint is returned, a conservative over-estimate of the infimum.

Growth diagnostics (superlinearity, the doubling ratio phi(2t)/phi(t)) are
evidence-graded heuristics: limits are not finitely decidable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .measure import RandomVariable

__all__ = [
    "DomainExceeded",
    "GridTooCoarse",
    "GrowthReport",
    "Delta2Report",
    "LuxemburgResult",
    "ModularDegenerate",
    "OrliczFunction",
    "ZeroDenominator",
    "conjugate",
    "delta2_ratio",
    "delta2_report",
    "luxemburg_norm",
    "superlinear_growth",
    "young_gap",
]

_CONVEXITY_TOL = 1e-9


class GridTooCoarse(RuntimeError):
    """Grid refinement moved conjugate values by more than the tolerance."""


class DomainExceeded(ValueError):
    """Argument lies beyond the function's trusted domain cap."""


class ModularDegenerate(RuntimeError):
    """The modular never straddles 1 over the probed scale range."""


class ZeroDenominator(ValueError):
    """phi vanishes at a probe where a ratio is required."""


@dataclass(frozen=True)
class OrliczFunction:
    """Convex nondecreasing function with phi(0) = 0.

    Three kinds: ``power`` (scale * s**p), ``exp`` (exp(rate*s) - 1), and
    ``sampled`` (linear interpolation on a strictly increasing grid, linear
    extrapolation beyond the last knot).  ``domain_cap`` marks the largest
    argument with a trusted value; sampled functions are extrapolated but
    not trusted beyond it.
    """

    kind: str
    p: float = 1.0
    scale: float = 1.0
    rate: float = 1.0
    grid_s: tuple[float, ...] | None = None
    grid_y: tuple[float, ...] | None = None
    domain_cap: float = math.inf

    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> OrliczFunction:
        if p < 1:
            raise ValueError("power exponent must be >= 1 for convexity")
        if scale <= 0:
            raise ValueError("scale must be > 0")
        return cls("power", p=float(p), scale=float(scale))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> OrliczFunction:
        if rate <= 0:
            raise ValueError("rate must be > 0")
        # exp overflows past ~709/rate; cap the trusted range accordingly
        return cls("exp", rate=float(rate), domain_cap=700.0 / rate)

    @classmethod
    def sampled(
        cls,
        grid_s,
        grid_y,
        domain_cap: float | None = None,
        validate: bool = True,
    ) -> OrliczFunction:
        s = tuple(float(v) for v in grid_s)
        y = tuple(float(v) for v in grid_y)
        if len(s) != len(y) or len(s) < 2:
            raise ValueError("sampled grid needs at least two matching knots")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("sample abscissae must be strictly increasing")
        fn = cls(
            "sampled",
            grid_s=s,
            grid_y=y,
            domain_cap=float(domain_cap) if domain_cap is not None else s[-1],
        )
        if validate:
            fn._validate_grid()
        return fn

    def _validate_grid(self) -> None:
        s = np.asarray(self.grid_s)
        y = np.asarray(self.grid_y)
        if s[0] != 0.0 or abs(y[0]) > 1e-12:
            raise ValueError("sampled Orlicz function must start at phi(0) = 0")
        if np.any(np.diff(y) < -1e-12 * max(1.0, float(np.max(np.abs(y))))):
            raise ValueError("sampled values must be nondecreasing")
        if np.max(y) <= 0.0:
            raise ValueError("Orlicz function must not be identically 0")
        # midpoint convexity on the grid: second differences of the slopes
        slopes = np.diff(y) / np.diff(s)
        scale = np.maximum(1.0, np.abs(y[1:-1]))
        if np.any(np.diff(slopes) * np.diff(s)[:-1] < -_CONVEXITY_TOL * scale):
            raise ValueError("sampled values violate convexity on the grid")

    def __call__(self, s):
        """Evaluate at s >= 0 (scalar or array); negative inputs are clipped to 0."""
        arr = np.asarray(s, dtype=float)
        arr = np.maximum(arr, 0.0)
        if self.kind == "power":
            out = self.scale * arr**self.p
        elif self.kind == "exp":
            with np.errstate(over="ignore"):
                out = np.expm1(self.rate * arr)
        elif self.kind == "sampled":
            gs = np.asarray(self.grid_s)
            gy = np.asarray(self.grid_y)
            out = np.interp(arr, gs, gy)
            # np.interp clamps; extend the last segment linearly instead
            last_slope = (gy[-1] - gy[-2]) / (gs[-1] - gs[-2])
            beyond = arr > gs[-1]
            if np.any(beyond):
                if last_slope == 0.0:  # avoid 0 * inf on overflowing arguments
                    extended = np.full_like(out, gy[-1])
                else:
                    extended = gy[-1] + last_slope * (arr - gs[-1])
                out = np.where(beyond, extended, out)
        else:  # pragma: no cover - kinds are fixed by the constructors
            raise ValueError(f"unknown kind {self.kind!r}")
        return float(out) if np.isscalar(s) or np.ndim(s) == 0 else out

    def describe(self) -> str:
        if self.kind == "power":
            return f"{self.scale:g}*s^{self.p:g}"
        if self.kind == "exp":
            return f"exp({self.rate:g}*s)-1"
        return f"sampled[{len(self.grid_s)} knots, cap {self.domain_cap:g}]"

    def to_csv(self) -> str:
        """Sampled form as ``s,phi`` rows (parametric kinds are sampled first)."""
        if self.kind != "sampled":
            raise ValueError("only sampled functions serialise to CSV")
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["s", "phi"])
        for a, b in zip(self.grid_s, self.grid_y):
            writer.writerow([repr(a), repr(b)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> OrliczFunction:
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls.sampled([r["s"] for r in rows], [r["phi"] for r in rows])


@dataclass(frozen=True)
class LuxemburgResult:
    """Outcome of a Luxemburg norm computation.

    ``value`` is the upper endpoint of the final bisection bracket (0 for
    the zero vector), so the modular at ``value`` is always <= 1.
    """

    value: float
    bracket: tuple[float, float]
    modular_at_value: float


def _ternary_max(objective, lo: np.ndarray, hi: np.ndarray, iterations: int = 80):
    """Vectorised ternary search for per-row maxima of concave objectives.

    ``objective`` maps an array of s-values to an array of objective values
    (one independent concave problem per entry).  Returns the refined
    maximal values.
    """
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iterations):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        f1 = objective(m1)
        f2 = objective(m2)
        move_lo = f1 < f2
        lo = np.where(move_lo, m1, lo)
        hi = np.where(move_lo, hi, m2)
        if np.max(hi - lo) < 1e-13 * (1.0 + np.max(np.abs(hi))):
            break
    mid = 0.5 * (lo + hi)
    return np.maximum.reduce([objective(lo), objective(mid), objective(hi)])


def _conjugate_values(phi: OrliczFunction, t_grid: np.ndarray, s_max: float, grid_size: int) -> np.ndarray:
    s_grid = np.linspace(0.0, s_max, grid_size + 1)
    phi_s = np.asarray(phi(s_grid))
    # outer sweep (rows are t, columns are s), chunked to bound memory
    arg = np.empty(t_grid.size, dtype=np.intp)
    grid_best = np.empty(t_grid.size)
    chunk = max(1, 8_000_000 // (grid_size + 1))
    for i in range(0, t_grid.size, chunk):
        rows = t_grid[i : i + chunk, None] * s_grid[None, :] - phi_s[None, :]
        arg[i : i + chunk] = np.argmax(rows, axis=1)
        grid_best[i : i + chunk] = np.max(rows, axis=1)
    lo = s_grid[np.maximum(arg - 1, 0)]
    hi = s_grid[np.minimum(arg + 1, grid_size)]

    def objective(s_vals: np.ndarray) -> np.ndarray:
        return t_grid * s_vals - np.asarray(phi(s_vals))

    # the refinement never falls below the sweep itself (ternary assumes
    # concavity, which holds for valid phi but is not enforced here)
    values = np.maximum(_ternary_max(objective, lo, hi), grid_best)
    values = np.maximum(values, 0.0)
    values[0] = 0.0  # sup_s(-phi(s)) is attained at s = 0
    return values


def conjugate(
    phi: OrliczFunction,
    s_max: float,
    grid_size: int,
    tol: float = 1e-6,
) -> OrliczFunction:
    """Legendre conjugate ``psi(t) = sup { s*t - phi(s) : 0 <= s <= s_max }``.

    The supremum over all s >= 0 is truncated at ``s_max``; the returned
    sampled function is therefore trusted only for t up to roughly the
    slope of phi at ``s_max`` (recorded as its domain cap).  Values are
    grid maxima refined by ternary search, recomputed on a doubled grid;
    if the refinement moves any value by more than ``tol`` the sweep is
    unstable and GridTooCoarse is raised.
    """
    if s_max <= 0:
        raise ValueError("s_max must be > 0")
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    h = s_max / grid_size
    slope = (phi(s_max) - phi(s_max - h)) / h
    if not math.isfinite(slope):
        raise DomainExceeded(f"phi overflows before s_max={s_max:g}; lower s_max")
    t_max = 0.95 * slope
    if t_max <= 0:
        raise GridTooCoarse("phi is flat up to s_max; conjugate range is empty")
    t_grid = np.linspace(0.0, t_max, grid_size + 1)
    coarse = _conjugate_values(phi, t_grid, s_max, grid_size)
    fine_t = np.linspace(0.0, t_max, 2 * grid_size + 1)
    fine = _conjugate_values(phi, fine_t, s_max, 2 * grid_size)
    drift = float(np.max(np.abs(fine[::2] - coarse)))
    if drift > tol:
        raise GridTooCoarse(
            f"doubling the grid moved conjugate values by {drift:.3e} > tol={tol:.3e}"
        )
    return OrliczFunction.sampled(fine_t, fine, domain_cap=t_max)


def young_gap(phi: OrliczFunction, psi: OrliczFunction, s: float, t: float) -> float:
    """Slack phi(s) + psi(t) - s*t of the conjugacy inequality.

    Nonnegative (within numerical error) whenever psi is the conjugate of
    phi and both arguments are inside the trusted domains.
    """
    if s < 0 or t < 0:
        raise DomainExceeded("arguments must be nonnegative")
    if s > phi.domain_cap or t > psi.domain_cap:
        raise DomainExceeded(
            f"(s={s:g}, t={t:g}) exceeds domain caps "
            f"({phi.domain_cap:g}, {psi.domain_cap:g})"
        )
    return phi(s) + psi(t) - s * t


def _modular(abs_values: np.ndarray, weights: np.ndarray, phi: OrliczFunction, lam: float) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(phi(abs_values / lam))
    if np.any(np.isnan(vals)):
        return math.inf
    return float(np.dot(weights, vals))


def luxemburg_norm(f: RandomVariable, phi: OrliczFunction, tol: float) -> LuxemburgResult:
    """Luxemburg norm of ``f``: the smallest scale lam with E[phi(|f|/lam)] <= 1.

    The modular lam -> E[phi(|f|/lam)] is nonincreasing, so the norm is
    bracketed by doubling/halving from sup|f| and then bisected to width
    ``tol``.  The returned value is the upper bracket endpoint.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    abs_values = np.abs(f.array)
    weights = f.space.weight_array
    if not np.any(abs_values > 0.0):
        return LuxemburgResult(0.0, (0.0, 0.0), 0.0)

    lam = float(np.max(abs_values))
    m = _modular(abs_values, weights, phi, lam)
    if m == 1.0:
        return LuxemburgResult(lam, (lam, lam), m)
    if m > 1.0:
        hi = lam
        for _ in range(1200):
            hi *= 2.0
            if _modular(abs_values, weights, phi, hi) <= 1.0:
                break
        else:
            raise ModularDegenerate("modular stays above 1 for all probed scales")
        lo = hi / 2.0
    else:
        lo = lam
        for _ in range(1200):
            lo /= 2.0
            if lo == 0.0 or _modular(abs_values, weights, phi, lo) > 1.0:
                break
        if lo == 0.0 or _modular(abs_values, weights, phi, lo) <= 1.0:
            raise ModularDegenerate(
                "modular is <= 1 for every probed scale; phi vanishes on the range of |f|/lam"
            )
        hi = lo * 2.0

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _modular(abs_values, weights, phi, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return LuxemburgResult(hi, (lo, hi), _modular(abs_values, weights, phi, hi))


@dataclass(frozen=True)
class GrowthReport:
    """Evidence about lim phi(t)/t: the ratios and a graded verdict."""

    probes: tuple[float, ...]
    ratios: tuple[float, ...]
    verdict: str  # increasing-unbounded-evidence | bounded-evidence | inconclusive

    def to_dict(self) -> dict:
        return {"probes": list(self.probes), "ratios": list(self.ratios), "verdict": self.verdict}


def superlinear_growth(phi: OrliczFunction, probes) -> GrowthReport:
    """Grade the growth of phi(t)/t across the tail of the probe list.

    Flat ratios over the last half of the probes are evidence of linear
    (bounded) growth, strictly increasing ratios evidence of superlinear
    growth; anything else is inconclusive.
    """
    pr = tuple(float(t) for t in probes)
    if any(b <= a for a, b in zip(pr, pr[1:])) or not pr:
        raise ValueError("probes must be strictly increasing and nonempty")
    if pr[0] <= 0:
        raise ValueError("probes must be positive")
    if pr[-1] > phi.domain_cap:
        raise DomainExceeded("largest probe exceeds the domain cap")
    ratios = tuple(phi(t) / t for t in pr)
    tail = ratios[len(ratios) // 2 :]
    if len(tail) < 2:
        verdict = "inconclusive"
    else:
        flat = all(abs(b - a) <= 1e-9 * max(1.0, abs(a)) for a, b in zip(tail, tail[1:]))
        increasing = all(b > a * (1.0 + 1e-9) + 1e-15 for a, b in zip(tail, tail[1:]))
        if flat:
            verdict = "bounded-evidence"
        elif increasing:
            verdict = "increasing-unbounded-evidence"
        else:
            verdict = "inconclusive"
    return GrowthReport(pr, ratios, verdict)


@dataclass(frozen=True)
class Delta2Report:
    """Sampled sup of phi(2t)/phi(t); a heuristic, not a decision."""

    probes: tuple[float, ...]
    ratios: tuple[float, ...]
    ratio_max: float
    verdict: str
    note: str = "heuristic: the doubling condition concerns the limit t -> infinity"

    def to_dict(self) -> dict:
        return {
            "probes": list(self.probes),
            "ratios": list(self.ratios),
            "ratio_max": self.ratio_max,
            "verdict": self.verdict,
            "note": self.note,
        }


def delta2_report(phi: OrliczFunction, t_range: tuple[float, float], samples: int) -> Delta2Report:
    lo, hi = float(t_range[0]), float(t_range[1])
    if lo <= 0 or hi <= lo:
        raise ValueError("t_range must be positive and increasing")
    if 2.0 * hi > phi.domain_cap:
        raise DomainExceeded("2 * upper end of t_range exceeds the domain cap")
    if samples < 2:
        raise ValueError("need at least two samples")
    probes = tuple(np.linspace(lo, hi, samples).tolist())
    ratios = []
    for t in probes:
        denom = phi(t)
        if denom == 0.0:
            raise ZeroDenominator(f"phi({t:g}) = 0; ratio undefined")
        ratios.append(phi(2.0 * t) / denom)
    ratio_max = max(ratios)
    tail = ratios[len(ratios) // 2 :]
    growing = len(tail) >= 2 and tail[-1] > 2.0 * tail[0]
    verdict = "unbounded-evidence" if growing or ratio_max > 1e3 else "bounded-evidence"
    return Delta2Report(probes, tuple(ratios), ratio_max, verdict)


def delta2_ratio(phi: OrliczFunction, t_range: tuple[float, float], samples: int) -> float:
    """Max of phi(2t)/phi(t) over a sampled range (heuristic diagnostic)."""
    return delta2_report(phi, t_range, samples).ratio_max
