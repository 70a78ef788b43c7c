"""Convex functionals on finite spaces, numerical Fenchel conjugation, and
dual-representation checking.

The conjugate ``rho*(g) = sup_f ( <f,g> - rho(f) )`` is estimated by
multi-start coordinate ascent inside a box: each coordinate is maximised
by a coarse scan plus golden-section refinement (the objective is concave
in each coordinate for convex rho), sweeps repeat until stationary, and a
polish pass along pair and diagonal directions escapes the ridge points
that pure coordinate moves cannot leave on piecewise-linear objectives.
An ascent that ends on the box boundary is flagged "possibly infinite"
rather than reported as a finite supremum.

The biconjugate over a finite dual grid is a lower bound for the true
lower-semicontinuous convex hull; ``dual_representation_check`` compares
it with rho itself and reports any probe where the gap exceeds the
tolerance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .measure import ProbabilitySpace, RandomVariable, integrate

__all__ = [
    "ConjugateField",
    "ConjugateValue",
    "ConvexFunctional",
    "DualRepReport",
    "EmptyDualGrid",
    "SearchConfig",
    "SearchDiverged",
    "UnknownName",
    "biconjugate",
    "builtin",
    "builtin_names",
    "density_lattice",
    "dual_representation_check",
    "fenchel_conjugate",
    "signed_lattice",
]


class SearchDiverged(RuntimeError):
    """Restarts disagreed beyond tolerance with no boundary escape."""


class EmptyDualGrid(ValueError):
    """Biconjugation requires at least one finite conjugate value."""


class UnknownName(ValueError):
    """No builtin functional with that name."""


@dataclass(frozen=True, eq=False)
class ConvexFunctional:
    """Proper convex functional given by an evaluation oracle.

    ``evaluate`` maps a RandomVariable to an extended real (math.inf for
    points outside the effective domain).  ``witness`` produces a point
    with finite value on any compatible space (properness).  When a
    closed-form conjugate or a maximising dual point is known they are
    attached as oracles for testing and for building adapted dual grids;
    they are never used inside the numerical conjugation itself.
    """

    name: str
    evaluate: callable
    witness: callable = RandomVariable.zero
    known_conjugate: callable | None = None
    dual_witness: callable | None = None
    cash_invariant: bool = False


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the conjugate search; defaults suit spaces of up to ~8 points."""

    box: tuple[float, float] = (-64.0, 64.0)
    extra_starts: int = 1
    max_sweeps: int = 40
    sweep_tol: float = 1e-12
    value_tol: float = 1e-5
    seed: int = 0
    coarse_points: int = 21
    golden_iters: int = 60
    boundary_margin: float = 1e-6


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _scan(fun, xs, best_x: float, best_v: float) -> tuple[float, float]:
    for x in xs:
        v = fun(x)
        if v > best_v:
            best_x, best_v = float(x), v
    return best_x, best_v


def _maximize_1d(fun, lo: float, hi: float, x0: float, cfg: SearchConfig) -> tuple[float, float]:
    """Two-stage scan then golden-section refinement of a concave 1-D slice.

    The scans guard against slices that are -inf on most of the box
    (indicator functionals), where golden section alone could discard the
    finite region.  The current point x0 is always a candidate, so the
    surrounding ascent never regresses.
    """
    best_x, best_v = x0, fun(x0)
    best_x, best_v = _scan(fun, np.linspace(lo, hi, cfg.coarse_points), best_x, best_v)
    step = (hi - lo) / (cfg.coarse_points - 1)
    a = max(lo, best_x - step)
    b = min(hi, best_x + step)
    best_x, best_v = _scan(fun, np.linspace(a, b, 9), best_x, best_v)
    fine = (b - a) / 8.0
    a = max(lo, best_x - fine)
    b = min(hi, best_x + fine)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    # recentre toward the best finite point while both probes sit at -inf
    for _ in range(80):
        if f1 > -math.inf or f2 > -math.inf:
            break
        a = 0.5 * (a + best_x)
        b = 0.5 * (b + best_x)
        x1 = b - _GOLDEN * (b - a)
        x2 = a + _GOLDEN * (b - a)
        f1, f2 = fun(x1), fun(x2)
    for _ in range(cfg.golden_iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fun(x1)
        if b - a < 1e-13 * (1.0 + abs(b)):
            break
    for x, v in ((x1, f1), (x2, f2)):
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v


def _pair_directions(n: int) -> list[np.ndarray]:
    dirs = [np.ones(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = np.zeros(n)
            d[i], d[j] = 1.0, -1.0
            dirs.append(d)
            e = np.zeros(n)
            e[i], e[j] = 1.0, 1.0
            dirs.append(e)
    return dirs


def _ascend(objective, start: np.ndarray, cfg: SearchConfig) -> tuple[np.ndarray, float]:
    lo, hi = cfg.box
    f = np.clip(np.asarray(start, dtype=float), lo, hi)
    n = f.size
    val = objective(f)

    # improvements must clear rounding noise, or flat objectives would
    # drift to the box and be misread as unbounded
    def accepted(v: float) -> bool:
        return v > val + 1e-12 * (1.0 + abs(val))

    for _ in range(3):
        for _ in range(cfg.max_sweeps):
            before = val
            for i in range(n):
                def slice_fun(x, i=i):
                    probe = f.copy()
                    probe[i] = x
                    return objective(probe)

                x, v = _maximize_1d(slice_fun, lo, hi, float(f[i]), cfg)
                if accepted(v):
                    f[i] = x
                    val = v
            if val - before <= cfg.sweep_tol * (1.0 + abs(val)):
                break
        # pair/diagonal polish after the sweeps go stationary: coordinate
        # moves alone can stall on the tie ridges of piecewise-linear
        # objectives; a successful polish move triggers another round
        polished = False
        for d in _pair_directions(n):
            safe = np.where(d != 0.0, d, 1.0)
            up = np.where(d > 0, (hi - f) / safe, np.where(d < 0, (lo - f) / safe, np.inf))
            down = np.where(d > 0, (lo - f) / safe, np.where(d < 0, (hi - f) / safe, -np.inf))
            t_hi = float(np.min(up))
            t_lo = float(np.max(down))
            if t_hi <= t_lo:
                continue

            def line_fun(t, d=d):
                return objective(np.clip(f + t * d, lo, hi))

            t, v = _maximize_1d(line_fun, t_lo, t_hi, 0.0, cfg)
            if accepted(v):
                f = np.clip(f + t * d, lo, hi)
                val = v
                polished = True
        if not polished:
            break
    return f, val


@dataclass(frozen=True)
class ConjugateValue:
    """One conjugate evaluation: best value found plus search diagnostics."""

    value: float
    possibly_infinite: bool
    argmax: tuple[float, ...]
    start_values: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "possibly_infinite": self.possibly_infinite,
            "argmax": list(self.argmax),
            "start_values": list(self.start_values),
        }


def fenchel_conjugate(
    rho: ConvexFunctional,
    g: RandomVariable,
    config: SearchConfig | None = None,
) -> ConjugateValue:
    """Estimate ``sup_f ( <f,g> - rho(f) )`` over the search box.

    Starts from the origin, the properness witness, the (clipped) dual
    point itself, and seeded random points.  If the best maximiser sits on
    the box boundary the supremum may be infinite and the result is
    flagged; otherwise disagreeing restarts raise SearchDiverged.
    """
    cfg = config or SearchConfig()
    space = g.space
    weights = space.weight_array
    wg = weights * g.array

    def objective(f_vals: np.ndarray) -> float:
        rv = RandomVariable(space, tuple(f_vals.tolist()))
        r = rho.evaluate(rv)
        if r == math.inf:
            return -math.inf
        return float(np.dot(wg, f_vals)) - r

    lo, hi = cfg.box
    starts = [np.zeros(space.size), np.asarray(rho.witness(space).values), np.clip(g.array, lo, hi)]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.extra_starts):
        starts.append(rng.uniform(lo / 8.0, hi / 8.0, space.size))
    seen: set[tuple[float, ...]] = set()
    results = []
    for start in starts:
        key = tuple(np.round(start, 12).tolist())
        if key in seen:
            continue
        seen.add(key)
        results.append(_ascend(objective, start, cfg))
    values = [v for _, v in results]
    best_f, best_v = max(results, key=lambda fv: fv[1])

    # a maximiser on the box edge means "possibly infinite" only when the
    # objective is still climbing there; an optimum that merely sits at the
    # edge (e.g. a log pushed toward -inf with zero weight) stays finite
    margin = cfg.boundary_margin * (hi - lo)
    step = (hi - lo) / 256.0
    on_boundary = False
    for i in range(best_f.size):
        at_lo = best_f[i] <= lo + margin
        at_hi = best_f[i] >= hi - margin
        if not (at_lo or at_hi):
            continue
        inner = best_f.copy()
        inner[i] += step if at_lo else -step
        if best_v - objective(inner) > 1e-7 * (1.0 + abs(best_v)):
            on_boundary = True
            break
    finite = [v for v in values if v > -math.inf]
    if not on_boundary and finite and max(finite) - min(finite) > cfg.value_tol * (1.0 + abs(best_v)):
        raise SearchDiverged(
            f"restarts for {rho.name!r} disagree: {sorted(finite)} with no boundary escape"
        )
    return ConjugateValue(best_v, on_boundary, tuple(best_f.tolist()), tuple(values))


@dataclass(frozen=True, eq=False)
class ConjugateField:
    """Conjugate values over a grid of dual points.

    ``dual_matrix`` holds one dual point per row; ``values`` are extended
    reals (math.inf where the search flagged a possibly infinite value or
    an oracle returned infinity).
    """

    space: ProbabilitySpace
    dual_matrix: np.ndarray
    values: np.ndarray
    boundary_flags: np.ndarray
    reports: tuple = ()

    @classmethod
    def compute(
        cls,
        rho: ConvexFunctional,
        dual_points,
        config: SearchConfig | None = None,
    ) -> ConjugateField:
        points = list(dual_points)
        if not points:
            raise EmptyDualGrid("no dual points supplied")
        space = points[0].space
        if any(p.space != space for p in points):
            raise ValueError("dual points must share one space")
        matrix = np.array([p.values for p in points], dtype=float)
        values = np.empty(len(points))
        flags = np.zeros(len(points), dtype=bool)
        reports = []
        for i, p in enumerate(points):
            cv = fenchel_conjugate(rho, p, config)
            flags[i] = cv.possibly_infinite
            values[i] = math.inf if cv.possibly_infinite else cv.value
            reports.append(cv)
        return cls(space, matrix, values, flags, tuple(reports))

    @classmethod
    def from_values(cls, space: ProbabilitySpace, dual_matrix: np.ndarray, values: np.ndarray) -> ConjugateField:
        matrix = np.asarray(dual_matrix, dtype=float)
        vals = np.asarray(values, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != vals.size or matrix.shape[1] != space.size:
            raise ValueError("dual matrix and values have mismatched shapes")
        return cls(space, matrix, vals, np.isinf(vals))

    def dual_point(self, i: int) -> RandomVariable:
        return RandomVariable.from_values(self.space, self.dual_matrix[i])

    def __len__(self) -> int:
        return self.dual_matrix.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["g_index", "value", "boundary_flag"])
        for i, (v, b) in enumerate(zip(self.values, self.boundary_flags)):
            writer.writerow([i, repr(float(v)), int(b)])
        return buf.getvalue()


def biconjugate(field: ConjugateField, f: RandomVariable) -> float:
    """Max of ``<f,g> - rho*(g)`` over the dual grid.

    A lower bound for the lsc convex hull of rho at f; adding dual points
    can only increase it.  Rows with infinite conjugate values contribute
    nothing and are skipped.
    """
    if f.space != field.space:
        raise ValueError("probe must live on the dual grid's space")
    finite = np.isfinite(field.values)
    if len(field) == 0 or not np.any(finite):
        raise EmptyDualGrid("no finite conjugate values on the dual grid")
    scores = field.dual_matrix[finite] @ (field.space.weight_array * f.array)
    return float(np.max(scores - field.values[finite]))


@dataclass(frozen=True, eq=False)
class DualRepReport:
    """Per-probe gaps rho(f) - rho**(f) and the graded verdict."""

    gaps: tuple[float, ...]
    rho_values: tuple[float, ...]
    biconjugate_values: tuple[float, ...]
    verdict: str  # "representable-evidence" | "gap-found"
    witness: int | None
    tol: float

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    def to_dict(self) -> dict:
        return {
            "probes": [
                {"rho": r, "biconjugate": b}
                for r, b in zip(self.rho_values, self.biconjugate_values)
            ],
            "gaps": list(self.gaps),
            "verdict": self.verdict,
            "witness": self.witness,
            "tol": self.tol,
        }


def dual_representation_check(
    rho: ConvexFunctional,
    probes,
    dual_points,
    tol: float,
    config: SearchConfig | None = None,
) -> DualRepReport:
    """Compare rho with its biconjugate over a finite dual grid.

    A gap above tol at any probe (including an infinite gap at a probe
    where rho is declared infinite but the hull is finite) is a witness
    that rho is not represented by the dual grid at this resolution.
    """
    field = ConjugateField.compute(rho, dual_points, config)
    gaps = []
    rho_vals = []
    bi_vals = []
    witness = None
    for i, f in enumerate(probes):
        r = rho.evaluate(f)
        b = biconjugate(field, f)
        gap = r - b
        gaps.append(gap)
        rho_vals.append(r)
        bi_vals.append(b)
        if witness is None and gap > tol:
            witness = i
    verdict = "representable-evidence" if witness is None else "gap-found"
    return DualRepReport(tuple(gaps), tuple(rho_vals), tuple(bi_vals), verdict, witness, tol)


# -- dual grids ---------------------------------------------------------------


def density_lattice(space: ProbabilitySpace, step: float) -> list[RandomVariable]:
    """All densities on the space whose values are multiples of ``step``.

    A density g satisfies g >= 0 and E[g] = 1.  Only spaces with equal
    weights are supported; the lattice grows combinatorially, so the cell
    count times 1/step must stay modest.
    """
    n = space.size
    w = space.weights[0]
    if any(wi != w for wi in space.weights):
        raise ValueError("density lattices need equal weights")
    units = round(1.0 / (step * w))
    if abs(units * step * w - 1.0) > 1e-9:
        raise ValueError("step must divide the total mass")
    out: list[RandomVariable] = []

    def emit(prefix, remaining, cells_left):
        if cells_left == 1:
            out.append(RandomVariable.from_values(space, prefix + [remaining * step]))
            return
        for c in range(remaining + 1):
            emit(prefix + [c * step], remaining - c, cells_left - 1)

    emit([], units, n)
    if len(out) > 2_000_000:  # pragma: no cover - guarded by callers
        raise ValueError("density lattice too large")
    return out


def signed_lattice(space: ProbabilitySpace, step: float, bound: float) -> np.ndarray:
    """Full product lattice of values in [-bound, bound]; returns a matrix."""
    axis = np.arange(-bound, bound + step / 2.0, step)
    grids = np.meshgrid(*([axis] * space.size), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


# -- builtin functionals ------------------------------------------------------


def _weighted_logsumexp(x: np.ndarray, w: np.ndarray) -> float:
    m = float(np.max(x))
    return m + math.log(float(np.dot(w, np.exp(x - m))))


def _avar_value(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    order = np.argsort(-values, kind="stable")
    remaining = alpha
    acc = 0.0
    for i in order:
        take = min(float(weights[i]), remaining)
        acc += take * float(values[i])
        remaining -= take
        if remaining <= 1e-15:
            break
    return acc / alpha


def _avar_tail_density(f: RandomVariable, alpha: float) -> RandomVariable:
    """The maximising density: mass 1/alpha on the worst-outcome cells."""
    values = f.array
    weights = f.space.weight_array
    order = np.argsort(-values, kind="stable")
    g = np.zeros_like(values)
    remaining = alpha
    for i in order:
        take = min(float(weights[i]), remaining)
        g[i] = take / (alpha * float(weights[i]))
        remaining -= take
        if remaining <= 1e-15:
            break
    return RandomVariable.from_values(f.space, g)


def _is_density(g: RandomVariable, tol: float = 1e-9) -> bool:
    return bool(np.all(g.array >= -tol)) and abs(integrate(g) - 1.0) <= tol


def _expectation() -> ConvexFunctional:
    return ConvexFunctional(
        name="expectation",
        evaluate=integrate,
        known_conjugate=lambda g: 0.0 if float(np.max(np.abs(g.array - 1.0))) <= 1e-9 else math.inf,
        dual_witness=lambda f: RandomVariable.ones(f.space),
        cash_invariant=True,
    )


def _neg_expectation() -> ConvexFunctional:
    return ConvexFunctional(
        name="neg-expectation",
        evaluate=lambda f: -integrate(f),
        known_conjugate=lambda g: 0.0 if float(np.max(np.abs(g.array + 1.0))) <= 1e-9 else math.inf,
        dual_witness=lambda f: RandomVariable.constant(f.space, -1.0),
    )


def _entropic(beta: float) -> ConvexFunctional:
    if beta <= 0:
        raise ValueError("beta must be > 0")

    def evaluate(f: RandomVariable) -> float:
        return _weighted_logsumexp(beta * f.array, f.space.weight_array) / beta

    def known_conjugate(g: RandomVariable) -> float:
        if not _is_density(g):
            return math.inf
        arr = np.clip(g.array, 0.0, None)
        ent = np.where(arr > 0.0, arr * np.log(np.where(arr > 0.0, arr, 1.0)), 0.0)
        return float(np.dot(g.space.weight_array, ent)) / beta

    def dual_witness(f: RandomVariable) -> RandomVariable:
        x = beta * f.array
        x = x - np.max(x)
        expo = np.exp(x)
        z = float(np.dot(f.space.weight_array, expo))
        return RandomVariable.from_values(f.space, expo / z)

    return ConvexFunctional(
        name=f"entropic(beta={beta:g})",
        evaluate=evaluate,
        known_conjugate=known_conjugate,
        dual_witness=dual_witness,
        cash_invariant=True,
    )


def _avar(alpha: float) -> ConvexFunctional:
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")

    def evaluate(f: RandomVariable) -> float:
        return _avar_value(f.array, f.space.weight_array, alpha)

    def known_conjugate(g: RandomVariable) -> float:
        ok = _is_density(g) and bool(np.all(g.array <= 1.0 / alpha + 1e-9))
        return 0.0 if ok else math.inf

    return ConvexFunctional(
        name=f"avar(alpha={alpha:g})",
        evaluate=evaluate,
        known_conjugate=known_conjugate,
        dual_witness=lambda f: _avar_tail_density(f, alpha),
        cash_invariant=True,
    )


def _worst_case() -> ConvexFunctional:
    def dual_witness(f: RandomVariable) -> RandomVariable:
        i = int(np.argmax(f.array))
        g = np.zeros(f.space.size)
        g[i] = 1.0 / f.space.weights[i]
        return RandomVariable.from_values(f.space, g)

    return ConvexFunctional(
        name="worst-case",
        evaluate=lambda f: float(np.max(f.array)),
        known_conjugate=lambda g: 0.0 if _is_density(g) else math.inf,
        dual_witness=dual_witness,
        cash_invariant=True,
    )


def _supnorm_ball(radius: float, open_ball: bool) -> ConvexFunctional:
    if radius <= 0:
        raise ValueError("radius must be > 0")

    def evaluate(f: RandomVariable) -> float:
        peak = float(np.max(np.abs(f.array)))
        inside = peak < radius if open_ball else peak <= radius
        return 0.0 if inside else math.inf

    def known_conjugate(g: RandomVariable) -> float:
        # support function of the (closed) ball; the open ball has the same conjugate
        return radius * float(np.dot(g.space.weight_array, np.abs(g.array)))

    return ConvexFunctional(
        name=("open-ball" if open_ball else "supnorm-ball") + f"(radius={radius:g})",
        evaluate=evaluate,
        known_conjugate=known_conjugate,
        dual_witness=lambda f: RandomVariable.zero(f.space),
    )


def builtin(name: str, **params) -> ConvexFunctional:
    """Test zoo of convex functionals with closed-form conjugate oracles."""
    if name == "expectation":
        return _expectation()
    if name == "neg-expectation":
        return _neg_expectation()
    if name == "entropic":
        return _entropic(params.get("beta", 1.0))
    if name == "avar":
        return _avar(params.get("alpha", 0.5))
    if name == "worst-case":
        return _worst_case()
    if name == "supnorm-ball":
        return _supnorm_ball(params.get("radius", 1.0), params.get("open", False))
    if name == "open-ball":
        return _supnorm_ball(params.get("radius", 1.0), True)
    raise UnknownName(f"no builtin functional named {name!r}")


def builtin_names() -> tuple[str, ...]:
    return (
        "expectation",
        "neg-expectation",
        "entropic",
        "avar",
        "worst-case",
        "supnorm-ball",
        "open-ball",
    )
