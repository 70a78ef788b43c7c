import math

import numpy as np
import pytest

from uodual.convex import (
    ConjugateField,
    ConvexFunctional,
    EmptyDualGrid,
    SearchConfig,
    SearchDiverged,
    UnknownName,
    biconjugate,
    builtin,
    builtin_names,
    density_lattice,
    dual_representation_check,
    fenchel_conjugate,
    signed_lattice,
)
from uodual.measure import ProbabilitySpace, RandomVariable, integrate, pairing

SP4 = ProbabilitySpace.dyadic(2)
SP1 = ProbabilitySpace.dyadic(0)


def rv(values, space=SP4):
    return RandomVariable.from_values(space, values)


def dense_grid_conjugate(rho, g, bound=6.0, step=0.25):
    """Independent oracle: brute-force sup over a full coordinate lattice."""
    axis = np.arange(-bound, bound + step / 2, step)
    w = g.space.weight_array
    best = -math.inf
    grids = np.meshgrid(*([axis] * g.space.size), indexing="ij")
    points = np.stack([a.ravel() for a in grids], axis=1)
    for f_vals in points:
        f = RandomVariable.from_values(g.space, f_vals)
        val = float(np.dot(w * g.array, f_vals)) - rho.evaluate(f)
        best = max(best, val)
    return best


class TestFenchelConjugate:
    def test_linear_functional_conjugate(self):
        g0 = rv([1.0, 2.0, -1.0, 0.5])
        rho = ConvexFunctional("linear", evaluate=lambda f: pairing(f, g0))
        cv = fenchel_conjugate(rho, g0)
        assert not cv.possibly_infinite
        assert abs(cv.value) <= 1e-9
        off = fenchel_conjugate(rho, rv([1.0, 2.0, -1.0, 0.75]))
        assert off.possibly_infinite

    def test_quadratic_closed_form(self):
        rho = ConvexFunctional("quadratic", evaluate=lambda f: 0.5 * pairing(f, f))
        rng = np.random.default_rng(2)
        for _ in range(6):
            g = rv(rng.uniform(-3, 3, 4))
            cv = fenchel_conjugate(rho, g)
            assert not cv.possibly_infinite
            assert abs(cv.value - 0.5 * pairing(g, g)) <= 1e-6

    def test_quadratic_against_dense_grid(self):
        sp2 = ProbabilitySpace.dyadic(1)
        rho = ConvexFunctional("quadratic", evaluate=lambda f: 0.5 * pairing(f, f))
        g = RandomVariable.from_values(sp2, [1.5, -2.0])
        cv = fenchel_conjugate(rho, g)
        oracle = dense_grid_conjugate(rho, g, bound=6.0, step=0.05)
        assert cv.value >= oracle - 1e-9
        assert abs(cv.value - 0.5 * pairing(g, g)) <= 1e-6

    def test_entropic_relative_entropy_conjugate(self):
        rho = builtin("entropic", beta=1.0)
        rng = np.random.default_rng(3)
        for _ in range(5):
            raw = rng.uniform(0.05, 2.0, 4)
            dens = raw / float(np.dot(SP4.weight_array, raw))
            g = rv(dens)
            cv = fenchel_conjugate(rho, g)
            assert not cv.possibly_infinite
            assert abs(cv.value - rho.known_conjugate(g)) <= 1e-5

    def test_entropic_non_density_flagged(self):
        rho = builtin("entropic", beta=1.0)
        assert fenchel_conjugate(rho, rv([1.1] * 4)).possibly_infinite
        assert fenchel_conjugate(rho, rv([2.0, 2.0, 0.5, -0.5])).possibly_infinite

    def test_search_diverged_on_nonconvex_oracle(self):
        # two finite basins, mutually invisible along every scanned line
        # direction (axes and diagonals); restarts end in different basins
        sp2 = ProbabilitySpace.dyadic(1)
        a_center = np.array([0.0, 0.0])
        b_center = np.array([15.0, 7.0])

        def two_basins(f):
            v = np.asarray(f.values)
            if np.linalg.norm(v - a_center) <= 1.0:
                return -5.0
            if np.linalg.norm(v - b_center) <= 1.0:
                return -3.0
            return math.inf

        rho = ConvexFunctional("two-basins", evaluate=two_basins)
        g = RandomVariable.from_values(sp2, b_center)
        with pytest.raises(SearchDiverged):
            fenchel_conjugate(rho, g)


class TestConjugateField:
    def test_compute_and_csv(self):
        rho = builtin("expectation")
        pts = [RandomVariable.ones(SP4), rv([2.0, 0.0, 1.0, 1.0])]
        field = ConjugateField.compute(rho, pts)
        assert len(field) == 2
        assert field.values[0] == pytest.approx(0.0, abs=1e-9)
        assert math.isinf(field.values[1])
        text = field.to_csv()
        assert text.splitlines()[0] == "g_index,value,boundary_flag"
        assert len(text.splitlines()) == 3

    def test_empty_grid_rejected(self):
        with pytest.raises(EmptyDualGrid):
            ConjugateField.compute(builtin("expectation"), [])

    def test_values_above_minus_infinity(self):
        rho = builtin("entropic", beta=2.0)
        field = ConjugateField.compute(rho, density_lattice(SP4, 1.0))
        assert np.all(field.values > -math.inf)

    def test_convex_along_dual_segments(self):
        rho = builtin("entropic", beta=1.0)
        g0 = rv([1.0] * 4)
        g1 = rv([2.0, 1.0, 0.5, 0.5])
        mid = rv([1.5, 1.0, 0.75, 0.75])
        field = ConjugateField.compute(rho, [g0, mid, g1])
        assert field.values[1] <= 0.5 * (field.values[0] + field.values[2]) + 1e-6


class TestBiconjugate:
    def test_linear_recovered_exactly(self):
        g0 = rv([1.0, 2.0, -1.0, 0.5])
        rho = ConvexFunctional("linear", evaluate=lambda f: pairing(f, g0))
        field = ConjugateField.compute(rho, [g0])
        f = rv([0.5, 1.0, -2.0, 3.0])
        assert biconjugate(field, f) == pytest.approx(pairing(f, g0), abs=1e-9)

    def test_quadratic_grid_resolution_bound(self):
        rho = ConvexFunctional("quadratic", evaluate=lambda f: 0.5 * pairing(f, f))
        matrix = signed_lattice(SP4, 0.25, 4.0)
        values = 0.5 * (matrix**2 @ SP4.weight_array)
        field = ConjugateField.from_values(SP4, matrix, values)
        rng = np.random.default_rng(4)
        for _ in range(10):
            f = rv(rng.uniform(-3.5, 3.5, 4))
            bi = biconjugate(field, f)
            direct = rho.evaluate(f)
            assert bi <= direct + 1e-12
            assert direct - bi <= 0.05

    def test_open_interval_yields_closed_hull(self):
        rho = builtin("open-ball", radius=1.0)
        grid = [RandomVariable.from_values(SP1, [v]) for v in np.arange(-4.0, 4.01, 0.5)]
        field = ConjugateField.compute(rho, grid)
        boundary = RandomVariable.from_values(SP1, [1.0])
        assert rho.evaluate(boundary) == math.inf
        assert abs(biconjugate(field, boundary)) <= 1e-6

    def test_no_finite_values_rejected(self):
        rho = builtin("expectation")
        field = ConjugateField.compute(rho, [rv([2.0, 0.0, 1.0, 1.0])])
        with pytest.raises(EmptyDualGrid):
            biconjugate(field, rv([1.0] * 4))

    def test_monotone_in_dual_grid(self):
        rho = builtin("entropic", beta=1.0)
        cfg = SearchConfig(extra_starts=0)
        probes = [rv([0.5, -0.5, 1.0, 0.0]), rv([0.0, 0.0, 0.0, 0.0])]
        coarse = density_lattice(SP4, 1.0)
        fine = density_lattice(SP4, 0.5)
        f_coarse = ConjugateField.compute(rho, coarse, cfg)
        f_fine = ConjugateField.compute(rho, fine, cfg)
        for f in probes:
            assert biconjugate(f_fine, f) >= biconjugate(f_coarse, f) - 1e-9


class TestDualRepresentation:
    def test_expectation_is_representable(self):
        rho = builtin("expectation")
        probes = [rv([0.5, -0.5, 1.0, 0.0]), RandomVariable.zero(SP4)]
        grid = density_lattice(SP4, 0.5)
        rep = dual_representation_check(rho, probes, grid, 1e-6)
        assert rep.verdict == "representable-evidence"
        assert rep.max_gap <= 1e-6

    def test_entropic_with_adapted_grid(self):
        rho = builtin("entropic", beta=1.0)
        rng = np.random.default_rng(6)
        probes = [rv(rng.uniform(-1, 1, 4)) for _ in range(4)]
        grid = density_lattice(SP4, 0.5) + [rho.dual_witness(f) for f in probes]
        rep = dual_representation_check(rho, probes, grid, 1e-3, SearchConfig(extra_starts=0))
        assert rep.verdict == "representable-evidence"
        assert all(g >= -1e-3 for g in rep.gaps)

    def test_open_ball_gap_found_at_boundary(self):
        rho = builtin("open-ball", radius=1.0)
        inside = RandomVariable.from_values(SP1, [0.5])
        boundary = RandomVariable.from_values(SP1, [1.0])
        grid = [RandomVariable.from_values(SP1, [v]) for v in np.arange(-4.0, 4.01, 0.5)]
        rep = dual_representation_check(rho, [inside, boundary], grid, 1e-3)
        assert rep.verdict == "gap-found"
        assert rep.witness == 1
        assert rep.gaps[0] <= 1e-3
        assert math.isinf(rep.gaps[1])


class TestBuiltins:
    def test_names_and_unknown(self):
        for name in builtin_names():
            assert builtin(name).name.startswith(name.split("(")[0])
        with pytest.raises(UnknownName):
            builtin("nonsense")

    def test_expectation_of_constants(self):
        assert builtin("expectation").evaluate(RandomVariable.constant(SP4, 3.5)) == pytest.approx(3.5)

    def test_entropic_fixes_constants(self):
        for beta in (0.5, 1.0, 2.0):
            rho = builtin("entropic", beta=beta)
            assert rho.evaluate(RandomVariable.constant(SP4, -1.25)) == pytest.approx(-1.25)

    def test_avar_mean_of_worst_half(self):
        rho = builtin("avar", alpha=0.5)
        two = ProbabilitySpace.uniform(2)
        f = RandomVariable.from_values(two, [0.0, 1.0])
        # oracle: enumerate densities bounded by 1/alpha on a fine grid
        best = -math.inf
        for g1 in np.arange(0.0, 2.001, 0.001):
            g2 = 2.0 - g1
            if 0 <= g2 <= 2.0:
                best = max(best, 0.5 * (g1 * 0.0 + g2 * 1.0))
        assert rho.evaluate(f) == pytest.approx(best) == pytest.approx(1.0)

    def test_avar_alpha_one_is_expectation(self):
        rho = builtin("avar", alpha=1.0)
        rng = np.random.default_rng(8)
        for _ in range(10):
            f = rv(rng.uniform(-3, 3, 4))
            assert rho.evaluate(f) == pytest.approx(integrate(f), abs=1e-12)

    def test_avar_params_validated(self):
        with pytest.raises(ValueError, match="alpha"):
            builtin("avar", alpha=1.5)
        with pytest.raises(ValueError, match="beta"):
            builtin("entropic", beta=0.0)

    def test_worst_case_max(self):
        rho = builtin("worst-case")
        assert rho.evaluate(rv([0.0, 3.0, -1.0, 2.0])) == 3.0

    def test_supnorm_ball_indicator(self):
        closed = builtin("supnorm-ball", radius=1.0)
        assert closed.evaluate(rv([1.0, -1.0, 0.0, 0.5])) == 0.0
        assert closed.evaluate(rv([1.5, 0.0, 0.0, 0.0])) == math.inf
        opened = builtin("open-ball", radius=1.0)
        assert opened.evaluate(rv([1.0, 0.0, 0.0, 0.0])) == math.inf

    def test_cash_invariance(self):
        rng = np.random.default_rng(9)
        for name, params in [("expectation", {}), ("entropic", {"beta": 2.0}), ("avar", {"alpha": 0.25})]:
            rho = builtin(name, **params)
            assert rho.cash_invariant
            for _ in range(5):
                f = rv(rng.uniform(-2, 2, 4))
                c = float(rng.uniform(-3, 3))
                shifted = f + RandomVariable.constant(SP4, c)
                assert rho.evaluate(shifted) == pytest.approx(rho.evaluate(f) + c, abs=1e-8)

    def test_proper_witness_has_finite_value(self):
        for name in builtin_names():
            rho = builtin(name)
            for space in (SP1, SP4):
                assert math.isfinite(rho.evaluate(rho.witness(space))), name

    def test_midpoint_convexity_on_sampled_segments(self):
        rng = np.random.default_rng(14)
        for name, params in [
            ("expectation", {}),
            ("neg-expectation", {}),
            ("entropic", {"beta": 1.0}),
            ("avar", {"alpha": 0.5}),
            ("worst-case", {}),
        ]:
            rho = builtin(name, **params)
            for _ in range(20):
                f = rv(rng.uniform(-3, 3, 4))
                g = rv(rng.uniform(-3, 3, 4))
                mid = 0.5 * (f + g)
                lhs = rho.evaluate(mid)
                rhs = 0.5 * (rho.evaluate(f) + rho.evaluate(g))
                assert lhs <= rhs + 1e-8, name

    def test_dual_witness_attains_conjugate(self):
        rng = np.random.default_rng(10)
        for name, params in [("expectation", {}), ("entropic", {"beta": 1.0}), ("avar", {"alpha": 0.5}), ("worst-case", {})]:
            rho = builtin(name, **params)
            for _ in range(5):
                f = rv(rng.uniform(-2, 2, 4))
                g = rho.dual_witness(f)
                conj = rho.known_conjugate(g)
                assert not math.isinf(conj)
                assert pairing(f, g) - conj == pytest.approx(rho.evaluate(f), abs=1e-9)


class TestFenchelYoung:
    def test_inequality_on_random_pairs(self):
        rng = np.random.default_rng(12)
        rho = builtin("entropic", beta=1.0)
        gs = []
        for _ in range(8):
            raw = rng.uniform(0.05, 2.0, 4)
            gs.append(rv(raw / float(np.dot(SP4.weight_array, raw))))
        field = ConjugateField.compute(rho, gs)
        for i, g in enumerate(gs):
            for _ in range(25):
                f = rv(rng.uniform(-4, 4, 4))
                assert pairing(f, g) <= rho.evaluate(f) + field.values[i] + 1e-7


class TestLattices:
    def test_density_lattice_members_are_densities(self):
        grid = density_lattice(SP4, 0.5)
        for g in grid:
            assert all(v >= 0 for v in g.values)
            assert integrate(g) == pytest.approx(1.0, abs=1e-12)
        assert len(grid) == len({g.values for g in grid})

    def test_density_lattice_step_must_divide(self):
        with pytest.raises(ValueError, match="divide"):
            density_lattice(SP4, 0.3)

    def test_signed_lattice_shape(self):
        m = signed_lattice(ProbabilitySpace.dyadic(1), 1.0, 2.0)
        assert m.shape == (25, 2)
        assert float(np.max(m)) == 2.0 and float(np.min(m)) == -2.0
