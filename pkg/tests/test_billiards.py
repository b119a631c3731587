"""Outer billiards: the vertex/tangency step, far-field limit and timing."""

import math

import numpy as np
import pytest

from centroaffine import (
    SupportBody,
    absolute_time,
    area_form,
    billiard_orbit,
    far_field_curve,
    far_field_error,
    far_field_flow,
    farfield_gauge,
    gauge_function,
    kepler_residual,
    minkowski_length,
    named_table,
    outer_billiard_step,
    polygon_table,
    signed_area,
    support_table,
)
from centroaffine.errors import (
    InteriorPoint,
    InvariantViolation,
    UndefinedOnSingularSet,
)
from centroaffine.sampling import (
    random_convex_polygon_table,
    random_sl2,
    random_support_table,
)

TWO_PI = 2.0 * math.pi
SQUARE = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])


class TestTables:
    def test_named_tables(self):
        assert named_table("circle").kind == "smooth"
        assert named_table("square").kind == "polygon"
        tri = named_table("triangle")
        assert tri.vertices.shape == (3, 2)
        np.testing.assert_allclose(np.hypot(*tri.vertices.T), 1.0, atol=1e-12)

    def test_unknown_name(self):
        with pytest.raises(InvariantViolation):
            named_table("hexagon")

    def test_polygon_table_rejects_clockwise(self):
        with pytest.raises(InvariantViolation):
            polygon_table(SQUARE[::-1])

    def test_polygon_table_rejects_collinear(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]])
        with pytest.raises(InvariantViolation):
            polygon_table(pts)

    def test_support_table_wraps_body(self):
        body = SupportBody(np.ones(256))
        tab = support_table(body)
        assert tab.kind == "smooth"
        assert tab.support.area() == pytest.approx(math.pi)


class TestStep:
    def test_circle_step_oracle(self):
        # from (2, 0) the tangency sits at angle pi/3, so F doubles it
        got = outer_billiard_step(named_table("circle"), (2.0, 0.0))
        np.testing.assert_allclose(got, [-1.0, math.sqrt(3.0)], atol=1e-9)

    def test_square_step_oracle(self):
        got = outer_billiard_step(named_table("square"), (3.0, 0.0))
        np.testing.assert_allclose(got, [-1.0, 2.0], atol=1e-12)

    def test_circle_step_preserves_radius(self, rng):
        table = named_table("circle")
        for _ in range(10):
            r = rng.uniform(1.5, 6.0)
            theta = rng.uniform(0.0, TWO_PI)
            x = r * np.array([math.cos(theta), math.sin(theta)])
            y = outer_billiard_step(table, x)
            assert np.hypot(*y) == pytest.approx(r, abs=1e-9)

    def test_interior_point_rejected(self):
        with pytest.raises(InteriorPoint):
            outer_billiard_step(named_table("square"), (0.3, -0.2))
        with pytest.raises(InteriorPoint):
            outer_billiard_step(named_table("circle"), (0.5, 0.5))

    def test_singular_direction_rejected(self):
        # (1, -3) sights straight up the right edge of the square
        with pytest.raises(UndefinedOnSingularSet):
            outer_billiard_step(named_table("square"), (1.0, -3.0))

    def test_step_is_involutive_reflection(self, rng):
        # F(x) reflects x in the tangency point, so the midpoint lies on the table
        table = named_table("square")
        x = np.array([2.5, 0.7])
        y = outer_billiard_step(table, x)
        mid = 0.5 * (x + y)
        assert np.max(np.abs(mid)) == pytest.approx(1.0, abs=1e-12)


class TestOrbit:
    def test_orbit_shape_and_start(self):
        orbit = billiard_orbit(named_table("square"), (2.5, 0.7), 12)
        assert orbit.shape == (13, 2)
        np.testing.assert_allclose(orbit[0], [2.5, 0.7])

    def test_square_necklace_closes(self):
        orbit = billiard_orbit(named_table("square"), (2.5, 0.7), 12)
        np.testing.assert_allclose(orbit[12], orbit[0], atol=1e-12)

    def test_circle_orbit_stays_on_circle(self):
        orbit = billiard_orbit(named_table("circle"), (3.0, 0.0), 40)
        np.testing.assert_allclose(np.hypot(*orbit.T), 3.0, atol=1e-9)


class TestFarField:
    def test_square_far_field_is_diamond(self):
        far = far_field_curve(named_table("square"))
        assert far.kind == "polygon"
        diamond = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        # same cyclic set of vertices
        got = {tuple(np.round(p, 12)) for p in far.points}
        want = {tuple(p) for p in diamond}
        assert got == want

    def test_triangle_far_field_is_affine_regular_hexagon(self):
        far = far_field_curve(named_table("triangle"))
        h = far.points
        assert h.shape == (6, 2)
        for i in range(6):
            lhs = h[(i + 1) % 6]
            rhs = h[i] - h[i - 1]
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_circle_far_field_is_unit_circle(self):
        far = far_field_curve(named_table("circle"))
        np.testing.assert_allclose(np.hypot(*far.points.T), 1.0, atol=1e-12)
        assert far.farfield_area == pytest.approx(math.pi, abs=1e-12)

    def test_kepler_residual_named_and_random(self, rng):
        for name in ("circle", "square", "triangle"):
            assert kepler_residual(far_field_curve(named_table(name))) < 1e-12
        for _ in range(5):
            tab = random_convex_polygon_table(rng)
            assert kepler_residual(far_field_curve(tab)) < 1e-10
        for _ in range(5):
            tab = random_support_table(rng)
            assert kepler_residual(far_field_curve(tab)) < 1e-10

    def test_smooth_far_field_dual_area(self, rng):
        tab = random_support_table(rng)
        far = far_field_curve(tab)
        # Gamma encloses the polar dual of the symmetrized table
        shoelace = signed_area(far.points)
        assert far.farfield_area == pytest.approx(shoelace, abs=5e-4)


class TestFlow:
    def test_period_is_half_farfield_area(self, rng):
        for table in (
            named_table("circle"),
            named_table("square"),
            random_convex_polygon_table(rng),
            random_support_table(rng),
        ):
            flow = far_field_flow(table)
            far = far_field_curve(table)
            assert flow.period == pytest.approx(0.5 * far.farfield_area, abs=1e-12)

    def test_times_increase_and_close(self):
        flow = far_field_flow(named_table("triangle"))
        assert np.min(np.diff(flow.times)) > 0.0
        np.testing.assert_allclose(flow.points[-1], flow.points[0], atol=1e-12)

    def test_circle_flow_period(self):
        assert far_field_flow(named_table("circle")).period == pytest.approx(
            math.pi / 2, abs=1e-12
        )

    def test_square_flow_period(self):
        assert far_field_flow(named_table("square")).period == pytest.approx(1.0, abs=1e-12)


class TestAbsoluteTime:
    def test_named_values(self):
        assert absolute_time(named_table("circle")).absolute_period == pytest.approx(
            math.pi / 2, abs=1e-10
        )
        sq = absolute_time(named_table("square"))
        assert sq.absolute_period == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert sq.equals_lower and sq.equals_upper
        tri = absolute_time(named_table("triangle"))
        assert tri.absolute_period == pytest.approx(1.5, abs=1e-9)
        assert tri.equals_upper  # affine-regular hexagon bound 3 sin(pi/6)

    def test_random_tables_inside_sandwich(self, rng):
        lo, hi = math.sqrt(2.0), math.pi / 2
        for _ in range(20):
            rep = absolute_time(random_convex_polygon_table(rng))
            assert lo - 1e-9 <= rep.absolute_period <= rep.upper_bound + 1e-9
            assert rep.upper_bound <= hi + 1e-12
        for _ in range(20):
            rep = absolute_time(random_support_table(rng))
            assert lo - 1e-9 <= rep.absolute_period <= hi + 1e-9

    def test_affine_invariance(self, rng):
        tab = random_convex_polygon_table(rng)
        g = random_sl2(rng, spread=0.7)
        moved = polygon_table(tab.vertices @ g.array.T)
        assert absolute_time(moved).absolute_period == pytest.approx(
            absolute_time(tab).absolute_period, abs=1e-12
        )


class TestFarFieldError:
    def test_triangle_error_decays(self):
        tri = named_table("triangle")
        e1 = far_field_error(tri, 200.0)
        e2 = far_field_error(tri, 800.0)
        assert e2.error < 0.5 * e1.error
        # squared-map orbits go clockwise around the table
        assert e1.winding == pytest.approx(-TWO_PI, abs=0.2)

    def test_needs_positive_radius(self):
        with pytest.raises(InvariantViolation):
            far_field_error(named_table("square"), -5.0)

    def test_gauge_scaling(self):
        far = far_field_curve(named_table("circle"))
        w = np.array([0.3, 0.4])
        assert farfield_gauge(far, w) == pytest.approx(0.5, abs=1e-9)
        assert farfield_gauge(far, 2 * w) == pytest.approx(1.0, abs=1e-9)


class TestMinkowskiGeometry:
    def test_square_gauge_is_max_norm(self):
        gauge = gauge_function(SQUARE)
        vecs = np.array([[2.0, 0.0], [0.5, 0.25], [-3.0, 1.0], [0.2, -2.2]])
        np.testing.assert_allclose(gauge(vecs), np.max(np.abs(vecs), axis=1), atol=1e-12)

    def test_gauge_rejects_off_origin_ball(self):
        shifted = SQUARE + np.array([5.0, 0.0])
        with pytest.raises(InvariantViolation):
            gauge_function(shifted)

    @pytest.mark.parametrize("name", ["circle", "square", "triangle"])
    def test_far_field_curve_solves_isoperimetric_problem(self, name):
        # the far-field curve has Minkowski length 2 A(Gamma) in the
        # symmetrized table's gauge, the isoperimetrix equality case
        table = named_table(name)
        far = far_field_curve(table)
        ball = (
            far.symmetrized
            if far.kind == "polygon"
            else far.symmetrized.boundary_points()
        )
        length = minkowski_length(far, ball)
        assert length == pytest.approx(2.0 * far.farfield_area, rel=1e-6)

    def test_isoperimetrix_equality_random_table(self, rng):
        tab = random_support_table(rng)
        far = far_field_curve(tab)
        length = minkowski_length(far, far.symmetrized.boundary_points())
        assert length == pytest.approx(2.0 * far.farfield_area, rel=1e-5)
