import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_not_a_knot, eval_piecewise, legendre_roots_bisection, newton_interpolate
from rpnn.baselines import (
    barycentric_eval,
    barycentric_fit,
    barycentric_weights,
    legendre_interpolant,
    legendre_nodes,
    spline_eval,
    spline_fit,
    spline_interpolant,
)
from rpnn.benchmarks import f2

# spline of sin on 20 equispaced knots in [0, 1] at 0.237, from the dense
# 4(n-1) coefficient system in oracles.dense_not_a_knot
SIN_SPLINE_AT_0237 = 0.2347875425827176


class TestLegendreNodes:
    def test_zero(self):
        assert legendre_nodes(0).tolist() == [0.0]

    def test_one(self):
        assert np.allclose(legendre_nodes(1), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)

    def test_four_against_bisection(self):
        nodes = legendre_nodes(4)
        assert abs(nodes.sum()) <= 1e-15
        assert np.max(np.abs(nodes - legendre_roots_bisection(5))) <= 1e-12

    @pytest.mark.parametrize("N", [1, 2, 7, 30, 100, 399])
    def test_symmetric_and_increasing(self, N):
        nodes = legendre_nodes(N)
        assert nodes.size == N + 1
        assert np.all(np.diff(nodes) > 0)
        assert np.max(np.abs(nodes + nodes[::-1])) <= 1e-14
        assert nodes[0] > -1 and nodes[-1] < 1

    def test_against_numpy_gauss(self):
        ref, _ = np.polynomial.legendre.leggauss(41)
        assert np.max(np.abs(legendre_nodes(40) - ref)) <= 1e-14


class TestBarycentric:
    def test_quadratic_reproduction(self):
        nodes = legendre_nodes(2)
        b = barycentric_fit(nodes, nodes ** 2)
        x = np.random.default_rng(0).uniform(-1, 1, 100)
        assert np.max(np.abs(barycentric_eval(b, x) - x ** 2)) <= 1e-13

    def test_exact_at_nodes(self):
        nodes = legendre_nodes(12)
        vals = np.cos(3 * nodes) + 0.1
        b = barycentric_fit(nodes, vals)
        for k, x in enumerate(nodes):
            assert barycentric_eval(b, x) == vals[k]

    def test_weights_alternate(self):
        w = barycentric_weights(legendre_nodes(25))
        assert np.all(np.sign(w[1:]) == -np.sign(w[:-1]))

    def test_f2_at_thirty_nodes_matches_newton_form(self):
        nodes = legendre_nodes(30)
        b = barycentric_fit(nodes, f2(nodes))
        x = np.linspace(-1, 1, 2001)
        assert np.max(np.abs(barycentric_eval(b, x) - newton_interpolate(nodes, f2(nodes), x))) <= 1e-8

    @given(st.integers(0, 20), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_polynomial_exactness(self, N, seed):
        rng = np.random.default_rng(seed)
        p = np.polynomial.Polynomial(rng.uniform(-1, 1, N + 1))
        nodes = legendre_nodes(N)
        x = rng.uniform(-1, 1, 50)
        assert np.max(np.abs(barycentric_eval(barycentric_fit(nodes, p(nodes)), x) - p(x))) <= 1e-11

    def test_mapped_interval(self):
        interp = legendre_interpolant(np.exp, 20, (0.0, 3.0))
        x = np.linspace(0, 3, 101)
        assert np.max(np.abs(interp(x) - np.exp(x))) <= 1e-12
        assert interp.nodes[0] > 0 and interp.nodes[-1] < 3

    def test_errors(self):
        with pytest.raises(ValueError):
            barycentric_fit([0.0, 0.0], [1.0, 2.0])
        b = barycentric_fit([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            barycentric_eval(b, np.nan)


class TestSpline:
    def test_cubic_reproduction(self):
        knots = np.linspace(-1, 2, 10)
        s = spline_fit(knots, knots ** 3 - 2 * knots)
        x = np.linspace(-1, 2, 1001)
        assert np.max(np.abs(s(x) - (x ** 3 - 2 * x))) <= 1e-12

    def test_linear_data(self):
        knots = np.linspace(0, 1, 8)
        s = spline_fit(knots, 3 * knots - 1)
        assert np.max(np.abs(s.coeffs[:, 2:])) <= 1e-12

    def test_sin_frozen_value(self):
        knots = np.linspace(0, 1, 20)
        s = spline_fit(knots, np.sin(knots))
        assert abs(spline_eval(s, 0.237) - SIN_SPLINE_AT_0237) <= 1e-12

    def test_matches_dense_system(self):
        rng = np.random.default_rng(1)
        knots = np.sort(rng.uniform(0, 5, 15))
        vals = rng.normal(size=15)
        s = spline_fit(knots, vals)
        assert np.max(np.abs(s.coeffs - dense_not_a_knot(knots, vals))) <= 1e-9
        x = rng.uniform(knots[0], knots[-1], 50)
        ref = [eval_piecewise(knots, dense_not_a_knot(knots, vals), t) for t in x]
        assert np.max(np.abs(s(x) - ref)) <= 1e-10

    def test_c2_continuity(self):
        rng = np.random.default_rng(2)
        knots = np.sort(rng.uniform(-3, 3, 12))
        s = spline_fit(knots, rng.normal(size=12))
        h = np.diff(knots)[:-1]
        c, nxt = s.coeffs[:-1], s.coeffs[1:]
        val = c[:, 0] + h * c[:, 1] + h ** 2 * c[:, 2] + h ** 3 * c[:, 3]
        d1 = c[:, 1] + 2 * h * c[:, 2] + 3 * h ** 2 * c[:, 3]
        d2 = 2 * c[:, 2] + 6 * h * c[:, 3]
        assert np.max(np.abs(val - nxt[:, 0])) <= 1e-10
        assert np.max(np.abs(d1 - nxt[:, 1])) <= 1e-10
        assert np.max(np.abs(d2 - 2 * nxt[:, 2])) <= 1e-10
        # not-a-knot: third derivative continuous at the second and penultimate knot
        assert abs(s.coeffs[0, 3] - s.coeffs[1, 3]) <= 1e-10 * max(1, abs(s.coeffs[0, 3]))
        assert abs(s.coeffs[-1, 3] - s.coeffs[-2, 3]) <= 1e-10 * max(1, abs(s.coeffs[-1, 3]))

    def test_extrapolation_flagged(self):
        knots = np.linspace(0, 1, 6)
        s = spline_fit(knots, knots ** 3)
        v, flags = spline_eval(s, [-0.5, 0.5, 1.5], return_flags=True)
        assert flags.tolist() == [True, False, True]
        assert np.allclose(v, [-0.125, 0.125, 3.375], atol=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            spline_fit([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        with pytest.raises(ValueError):
            spline_fit([0.0, 2.0, 1.0, 3.0], [0.0, 1.0, 0.0, 1.0])

    def test_convergence_order(self):
        x = np.linspace(-1, 1, 20001)
        errs = []
        Ns = [20, 40, 80, 160]
        for N in Ns:
            e = (spline_interpolant(f2, N, (-1, 1))(x) - f2(x)) ** 2
            errs.append(np.sqrt(np.sum((e[1:] + e[:-1]) / 2 * np.diff(x))))
        slope = np.polyfit(np.log(Ns), np.log(errs), 1)[0]
        assert -4.5 <= slope <= -3.5

    def test_against_scipy(self):
        scipy_interp = pytest.importorskip("scipy.interpolate")
        knots = np.linspace(0, 2, 17)
        vals = np.exp(-knots) * np.sin(5 * knots)
        x = np.linspace(-0.1, 2.1, 333)
        ref = scipy_interp.CubicSpline(knots, vals, bc_type="not-a-knot")(x)
        assert np.max(np.abs(spline_fit(knots, vals)(x) - ref)) <= 1e-12
