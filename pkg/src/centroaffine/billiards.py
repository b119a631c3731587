"""Outer billiards about a convex table and its far-field limit.

The outer billiard map F sends a point x outside a convex table to its
reflection 2P - x in the tangency point P where the table hugs the left
side of the ray from x through P.  Far from the table the square map F^2
shadows a continuous flow: orbits trace homothets of a fixed centrally
symmetric curve Gamma (the area-form polar of the symmetrized table) and
move with velocity -4 gamma_bar, so angular momentum [Gamma, -2 gamma_bar]
is a conserved quantity equal to 2, a discrete Kepler law.

One revolution of the limiting flow on the unit homothet takes
T_raw = A(Gamma) / 2 steps per unit of homothety; the affine-invariant
normalization T_abs = (1/2) sqrt(A(gamma_bar) A(Gamma)) lies between
sqrt(2) (parallelogram tables) and pi/2 (ellipse tables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duality import central_symmetrize
from .errors import InteriorPoint, InvariantViolation, UndefinedOnSingularSet
from .planar import TWO_PI, SampledCurve, SupportBody, area_form, signed_area, spectral_derivative

# Normalized cross products below this are treated as tangency ties.
EPS_SINGULAR = 1e-12
# Margin for the outside-the-table test, relative to the point scale.
EPS_OUTSIDE = 1e-12


@dataclass(frozen=True)
class ConvexTable:
    """Convex billiard table, either a polygon or a smooth support body."""

    kind: str
    vertices: np.ndarray | None = None
    support: SupportBody | None = None

    def __post_init__(self):
        if self.kind == "polygon":
            pts = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
                raise InvariantViolation("polygon table needs at least 3 vertices")
            if not np.all(np.isfinite(pts)):
                raise InvariantViolation("polygon table has non-finite vertices")
            edges = np.roll(pts, -1, axis=0) - pts
            turn = area_form(edges, np.roll(edges, -1, axis=0))
            scale = float(np.max(np.hypot(edges[:, 0], edges[:, 1]))) ** 2
            if np.min(turn) <= 1e-12 * max(scale, 1e-30):
                raise InvariantViolation(
                    "polygon table must be strictly convex and counterclockwise"
                )
            pts.setflags(write=False)
            object.__setattr__(self, "vertices", pts)
        elif self.kind == "smooth":
            if not isinstance(self.support, SupportBody):
                raise InvariantViolation("smooth table needs a SupportBody")
        else:
            raise InvariantViolation(f"unknown table kind {self.kind!r}")

    @property
    def n(self) -> int:
        return 0 if self.kind == "smooth" else self.vertices.shape[0]


def polygon_table(vertices) -> ConvexTable:
    return ConvexTable(kind="polygon", vertices=np.asarray(vertices, dtype=float))


def support_table(support) -> ConvexTable:
    if not isinstance(support, SupportBody):
        support = SupportBody(np.asarray(support, dtype=float))
    return ConvexTable(kind="smooth", support=support)


def named_table(name: str, grid: int = 1024) -> ConvexTable:
    """Builtin tables: "triangle", "square" (polygons) and "circle" (smooth)."""
    if name == "triangle":
        ang = np.array([0.5, 7.0 / 6.0, 11.0 / 6.0]) * math.pi
        return polygon_table(np.column_stack([np.cos(ang), np.sin(ang)]))
    if name == "square":
        return polygon_table([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    if name == "circle":
        return support_table(np.ones(grid))
    raise InvariantViolation(f"unknown table name {name!r}")


def _point_in_polygon(pts: np.ndarray, x: np.ndarray, margin: float) -> bool:
    """True when x is inside or within margin of the closed polygon."""
    edges = np.roll(pts, -1, axis=0) - pts
    side = area_form(edges, x[None, :] - pts)
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    return bool(np.min(side / lengths) > -margin)


class _SmoothStepper:
    """Cached trigonometric series of a support body for fast tangency solves."""

    def __init__(self, support: SupportBody):
        values = support.values
        n = values.shape[0]
        coeffs = np.fft.rfft(values)
        weights = np.full(coeffs.shape[0], 2.0 / n)
        weights[0] = 1.0 / n
        if n % 2 == 0:
            weights[-1] = 1.0 / n
        self.series = weights * coeffs
        self.orders = np.arange(coeffs.shape[0], dtype=float)
        self.grid = support.grid
        self.values = values
        self.units = np.column_stack([np.cos(self.grid), np.sin(self.grid)])

    def value(self, t: float) -> float:
        return float(np.real(np.exp(1j * t * self.orders) @ self.series))

    def slope(self, t: float) -> float:
        return float(np.real(np.exp(1j * t * self.orders) @ (1j * self.orders * self.series)))

    def tangency(self, x: np.ndarray) -> float:
        """Parameter of the tangent point with the table left of the ray x -> P."""
        h = self.values - self.units @ x
        scale = max(1.0, float(np.hypot(x[0], x[1])))
        if float(np.min(h)) > -EPS_OUTSIDE * scale:
            raise InteriorPoint(
                "point is inside the table or on its boundary; the outer "
                "billiard map is undefined there"
            )
        sign = np.where(h == 0.0, 1e-300, h)
        flips = np.nonzero(sign * np.roll(sign, -1) < 0.0)[0]
        n = self.values.shape[0]
        step = TWO_PI / n
        chosen = []
        for i in flips:
            lo = self.grid[i]
            hi = lo + step
            flo = h[i]
            for _ in range(48):
                mid = 0.5 * (lo + hi)
                fmid = self.value(mid) - (math.cos(mid) * x[0] + math.sin(mid) * x[1])
                if (flo > 0.0) == (fmid > 0.0):
                    lo, flo = mid, fmid
                else:
                    hi = mid
            t_root = 0.5 * (lo + hi)
            lam = (math.cos(t_root) * x[1] - math.sin(t_root) * x[0]) - self.slope(t_root)
            if lam < 0.0:
                chosen.append(t_root)
        if len(chosen) != 1:
            raise UndefinedOnSingularSet(
                f"found {len(chosen)} forward tangencies instead of 1; the point "
                "sits on the singular set of the map"
            )
        return chosen[0]

    def boundary_point(self, t: float) -> np.ndarray:
        p = self.value(t)
        dp = self.slope(t)
        return np.array(
            [p * math.cos(t) - dp * math.sin(t), p * math.sin(t) + dp * math.cos(t)]
        )

    def step(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.boundary_point(self.tangency(x)) - x


def _polygon_step(pts: np.ndarray, x: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.hypot(x[0], x[1])))
    if _point_in_polygon(pts, x, EPS_OUTSIDE * scale):
        raise InteriorPoint(
            "point is inside the table or on its boundary; the outer billiard "
            "map is undefined there"
        )
    d = pts - x[None, :]
    norms = np.hypot(d[:, 0], d[:, 1])
    cross = (d[:, 0][:, None] * d[:, 1][None, :] - d[:, 1][:, None] * d[:, 0][None, :])
    cross = cross / (norms[:, None] * norms[None, :])
    np.fill_diagonal(cross, np.inf)
    margins = np.min(cross, axis=1)
    best = int(np.argmax(margins))
    if margins[best] <= EPS_SINGULAR:
        raise UndefinedOnSingularSet(
            "two table vertices are collinear with the point; the tangency "
            "vertex is ambiguous"
        )
    return 2.0 * pts[best] - x


def outer_billiard_step(table: ConvexTable, x) -> np.ndarray:
    """One application of the outer billiard map F(x) = 2 P - x."""
    x = np.asarray(x, dtype=float).reshape(2)
    if table.kind == "polygon":
        return _polygon_step(table.vertices, x)
    return _SmoothStepper(table.support).step(x)


def billiard_orbit(table: ConvexTable, x0, steps: int) -> np.ndarray:
    """Orbit x, F(x), ..., F^steps(x) as a (steps+1, 2) array."""
    steps = int(steps)
    if steps < 0:
        raise InvariantViolation("orbit length must be nonnegative")
    out = np.empty((steps + 1, 2))
    out[0] = np.asarray(x0, dtype=float).reshape(2)
    if table.kind == "polygon":
        for k in range(steps):
            out[k + 1] = _polygon_step(table.vertices, out[k])
    else:
        stepper = _SmoothStepper(table.support)
        for k in range(steps):
            out[k + 1] = stepper.step(out[k])
    return out


@dataclass(frozen=True)
class FarFieldCurve:
    """Limit shape Gamma of far orbits of F^2, with its edge or point speeds.

    For a smooth table, points[i] = Gamma(theta_i) and speeds[i] is the flow
    velocity -2 gamma_bar(theta_i) there.  For a polygon, points holds the
    vertices of the polygonal Gamma and speeds[j] is the constant velocity
    -2 W_{j+1} along the edge from points[j] to points[j+1].
    """

    kind: str
    points: np.ndarray
    speeds: np.ndarray
    table_area: float
    farfield_area: float
    symmetrized: object


def far_field_curve(table: ConvexTable) -> FarFieldCurve:
    """Symmetrize the table and build the far-field curve Gamma."""
    if table.kind == "polygon":
        w = central_symmetrize(table.vertices)
        nxt = np.roll(w, -1, axis=0)
        denom = area_form(w, nxt)
        gamma = (nxt - w) / denom[:, None]
        speeds = -2.0 * nxt
        return FarFieldCurve(
            kind="polygon",
            points=gamma,
            speeds=speeds,
            table_area=float(signed_area(w)),
            farfield_area=float(signed_area(gamma)),
            symmetrized=w,
        )
    sym = central_symmetrize(table.support)
    p = sym.values
    units = np.column_stack([np.cos(sym.grid), np.sin(sym.grid)])
    tangents = np.column_stack([-np.sin(sym.grid), np.cos(sym.grid)])
    gamma = tangents / p[:, None]
    dp = sym.derivative(1)
    boundary = p[:, None] * units + dp[:, None] * tangents
    return FarFieldCurve(
        kind="smooth",
        points=gamma,
        speeds=-2.0 * boundary,
        table_area=float(sym.area()),
        farfield_area=float(0.5 * TWO_PI * np.mean(1.0 / p**2)),
        symmetrized=sym,
    )


def kepler_residual(far: FarFieldCurve) -> float:
    """Worst deviation of the angular momentum [Gamma, v] from 2."""
    if far.kind == "smooth":
        return float(np.max(np.abs(area_form(far.points, far.speeds) - 2.0)))
    nxt = np.roll(far.points, -1, axis=0)
    res_tail = np.abs(area_form(far.points, far.speeds) - 2.0)
    res_head = np.abs(area_form(nxt, far.speeds) - 2.0)
    return float(max(np.max(res_tail), np.max(res_head)))


@dataclass(frozen=True)
class FlowTrajectory:
    """One closed revolution of the far-field flow on the unit homothet."""

    times: np.ndarray
    points: np.ndarray
    period: float
    kepler_residual: float


def _periodic_antiderivative(values: np.ndarray, period: float) -> np.ndarray:
    """Antiderivative of the zero-mean part, vanishing at the first node."""
    n = values.shape[0]
    coeffs = np.fft.rfft(values)
    omega = TWO_PI / period
    k = np.arange(coeffs.shape[0], dtype=float)
    out = np.zeros_like(coeffs)
    out[1:] = coeffs[1:] / (1j * omega * k[1:])
    if n % 2 == 0:
        out[-1] = 0.0
    part = np.fft.irfft(out, n)
    return part - part[0]


def far_field_flow(table: ConvexTable) -> FlowTrajectory:
    """Integrate dy/dtau = -4 gamma_bar along Gamma for one revolution.

    Time is measured in F^2 steps per unit homothety, so the period equals
    A(Gamma) / 2 exactly.
    """
    far = far_field_curve(table)
    if far.kind == "polygon":
        gamma = far.points
        nxt = np.roll(gamma, -1, axis=0)
        w_next = -0.5 * far.speeds
        coef = np.hypot(*(nxt - gamma).T) / np.hypot(*w_next.T)
        times = np.concatenate([[0.0], np.cumsum(coef / 4.0)])
        points = np.vstack([gamma, gamma[:1]])
        return FlowTrajectory(
            times=times,
            points=points,
            period=float(times[-1]),
            kepler_residual=kepler_residual(far),
        )
    p = far.symmetrized.values
    rate = 1.0 / (4.0 * p**2)
    tau = _periodic_antiderivative(rate, TWO_PI) + float(np.mean(rate)) * far.symmetrized.grid
    period = float(np.mean(rate)) * TWO_PI
    times = np.concatenate([tau, [period]])
    points = np.vstack([far.points, far.points[:1]])
    return FlowTrajectory(
        times=times,
        points=points,
        period=period,
        kepler_residual=kepler_residual(far),
    )


@dataclass(frozen=True)
class AbsoluteTimeReport:
    """Affine-invariant revolution time of the far-field flow with its bounds."""

    kind: str
    table_area: float
    farfield_area: float
    raw_period: float
    absolute_period: float
    lower_bound: float
    upper_bound: float
    equals_lower: bool
    equals_upper: bool


def absolute_time(table: ConvexTable, tol: float = 1e-9) -> AbsoluteTimeReport:
    """T_abs = (1/2) sqrt(A(gamma_bar) A(Gamma)), between sqrt(2) and pi/2.

    A polygon table whose symmetrization has 2m vertices obeys the sharper
    upper bound m sin(pi/(2m)); the lower bound is attained exactly on
    parallelograms, the smooth upper bound on ellipses.
    """
    far = far_field_curve(table)
    t_abs = 0.5 * math.sqrt(far.table_area * far.farfield_area)
    lower = math.sqrt(2.0)
    if far.kind == "polygon":
        # symmetrized table has 2m vertices; the sharp bound is m sin(pi/2m)
        half = far.points.shape[0] // 2
        upper = half * math.sin(math.pi / (2.0 * half))
    else:
        upper = 0.5 * math.pi
    return AbsoluteTimeReport(
        kind=far.kind,
        table_area=far.table_area,
        farfield_area=far.farfield_area,
        raw_period=0.5 * far.farfield_area,
        absolute_period=float(t_abs),
        lower_bound=lower,
        upper_bound=float(upper),
        equals_lower=bool(abs(t_abs - lower) <= tol),
        equals_upper=bool(abs(t_abs - upper) <= tol),
    )


def farfield_gauge(far: FarFieldCurve, w) -> float:
    """Minkowski gauge of w in the body bounded by Gamma: max_t [gamma_bar, w]."""
    w = np.asarray(w, dtype=float).reshape(2)
    if far.kind == "polygon":
        return float(np.max(area_form(far.symmetrized, w[None, :])))
    boundary = -0.5 * far.speeds
    vals = area_form(boundary, w[None, :])
    return _refined_max(vals)


def _refined_max(vals: np.ndarray) -> float:
    """Parabolic refinement of a grid maximum of a smooth periodic sample."""
    i = int(np.argmax(vals))
    v0 = vals[i]
    vm = vals[i - 1]
    vp = vals[(i + 1) % vals.shape[0]]
    denom = 2.0 * v0 - vm - vp
    if denom <= 0.0:
        return float(v0)
    return float(v0 + (vp - vm) ** 2 / (8.0 * denom))


def _dist_to_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the boundary of a closed polygon."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    e = b - a
    ee = np.sum(e * e, axis=1)
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pmd,md->pm", rel, e) / ee[None, :], 0.0, 1.0)
    foot = a[None, :, :] + t[:, :, None] * e[None, :, :]
    d = np.min(np.hypot(*(points[:, None, :] - foot).transpose(2, 0, 1)), axis=1)
    return d


@dataclass(frozen=True)
class FarFieldError:
    """Largest relative gap between one F^2 revolution and its homothet of Gamma."""

    radius: float
    gauge: float
    steps: int
    winding: float
    error: float


def far_field_error(table: ConvexTable, radius: float, direction=None) -> FarFieldError:
    """Run F^2 for one revolution from radius * direction and measure the gap.

    The orbit is compared against lambda_0 Gamma where lambda_0 is the
    Gamma-gauge of the start point; the maximum distance scales like 1/radius.
    The squared map circulates clockwise around the table (its limit flow is
    the time reverse of the sectorial-area parametrization), so the winding
    is accumulated with sign and the orbit stops after one full turn either
    way.
    """
    radius = float(radius)
    if radius <= 0.0:
        raise InvariantViolation("radius must be positive")
    if direction is None:
        direction = (math.cos(0.3), math.sin(0.3))
    d = np.asarray(direction, dtype=float).reshape(2)
    d = d / np.hypot(d[0], d[1])
    far = far_field_curve(table)
    x0 = radius * d
    lam = farfield_gauge(far, x0)
    expected = lam * 0.5 * far.farfield_area
    max_steps = int(math.ceil(2.0 * expected)) + 64
    stepper = None
    if table.kind == "smooth":
        stepper = _SmoothStepper(table.support)
    pts = [x0]
    winding = 0.0
    angle = math.atan2(x0[1], x0[0])
    y = x0
    for _ in range(max_steps):
        if table.kind == "polygon":
            y = _polygon_step(table.vertices, _polygon_step(table.vertices, y))
        else:
            y = stepper.step(stepper.step(y))
        pts.append(y)
        new_angle = math.atan2(y[1], y[0])
        delta = new_angle - angle
        if delta <= -math.pi:
            delta += TWO_PI
        elif delta > math.pi:
            delta -= TWO_PI
        winding += delta
        angle = new_angle
        if abs(winding) >= TWO_PI:
            break
    else:
        raise InvariantViolation(
            "far-field orbit did not close a revolution within the step budget"
        )
    orbit = np.asarray(pts)
    dist = _dist_to_polygon(orbit, lam * far.points)
    return FarFieldError(
        radius=radius,
        gauge=float(lam),
        steps=2 * (orbit.shape[0] - 1),
        winding=float(winding),
        error=float(np.max(dist) / radius),
    )


def gauge_function(ball):
    """Minkowski functional of a convex body containing the origin.

    Accepts a ConvexTable, a SupportBody, or a polygon vertex array, and
    returns a callable mapping an (M, 2) array of vectors to their gauges.
    """
    if isinstance(ball, ConvexTable):
        ball = ball.vertices if ball.kind == "polygon" else ball.support
    if isinstance(ball, SupportBody):
        p = ball.values
        units = np.column_stack([np.cos(ball.grid), np.sin(ball.grid)])

        def gauge(vectors: np.ndarray) -> np.ndarray:
            vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
            vals = (units @ vectors.T) / p[:, None]
            i = np.argmax(vals, axis=0)
            cols = np.arange(vals.shape[1])
            v0 = vals[i, cols]
            vm = vals[(i - 1) % vals.shape[0], cols]
            vp = vals[(i + 1) % vals.shape[0], cols]
            denom = 2.0 * v0 - vm - vp
            bump = np.where(denom > 0.0, (vp - vm) ** 2 / np.where(denom > 0.0, 8.0 * denom, 1.0), 0.0)
            return v0 + bump

        return gauge
    pts = np.asarray(ball, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InvariantViolation("gauge ball must be a polygon or a support body")
    nxt = np.roll(pts, -1, axis=0)
    denom = area_form(pts, nxt)
    if np.min(denom) <= 0.0:
        raise InvariantViolation("gauge ball must contain the origin strictly inside")

    def gauge(vectors: np.ndarray) -> np.ndarray:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        num = area_form(vectors[:, None, :], nxt[None, :, :]) - area_form(
            vectors[:, None, :], pts[None, :, :]
        )
        return np.max(num / denom[None, :], axis=1)

    return gauge


def minkowski_length(path, ball) -> float:
    """Length of a closed path measured in the gauge of the given unit ball.

    Polygonal paths (vertex arrays or polygonal FarFieldCurve objects) sum
    the gauge of their edges; smooth sample sets integrate the gauge of the
    tangent spectrally over the period.
    """
    gauge = gauge_function(ball)
    if isinstance(path, FarFieldCurve):
        if path.kind == "polygon":
            pts = path.points
            return float(np.sum(gauge(np.roll(pts, -1, axis=0) - pts)))
        tangent = spectral_derivative(path.points, TWO_PI, 1)
        return float(TWO_PI * np.mean(gauge(tangent)))
    if isinstance(path, SampledCurve):
        doubled = path.doubled()
        tangent = spectral_derivative(doubled, 2.0 * path.period, 1)
        return float(2.0 * path.period * np.mean(gauge(tangent)))
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvariantViolation("path must be an (M, 2) vertex array")
    return float(np.sum(gauge(np.roll(pts, -1, axis=0) - pts)))
