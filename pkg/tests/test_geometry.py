import math

import numpy as np
import pytest

from siaflow.errors import (DegenerateChamberCount, InfeasibleChamber,
                            InvalidAngle, NoFeasibleDesign, NoIntersection)
from siaflow.geometry import (chamber_angle, chamber_params, chamber_offsets,
                              circle_line_intersection, design_actuator,
                              design_csv)


def bisect_roots(r, c, phi, iters=200):
    """Independent root finder for x^2 (1+t^2) - 2 c x + (c^2 - r^2) = 0.

    Any intersection satisfies |x - c| <= r, and the parabola's vertex sits
    between the roots, so each root is bracketed by [c - r, vertex] and
    [vertex, c + r].
    """
    t2 = math.tan(phi) ** 2

    def q(x):
        return x * x * (1.0 + t2) - 2.0 * c * x + (c * c - r * r)

    vertex = c / (1.0 + t2)
    roots = []
    for lo, hi in ((c - r, vertex), (vertex, c + r)):
        flo = q(lo)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if (q(mid) > 0.0) == (flo > 0.0):
                lo, flo = mid, q(mid)
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return min(roots), max(roots)


class TestChamberAngle:
    def test_quarter_turn_four_chambers(self):
        assert chamber_angle(math.radians(90), 4) == pytest.approx(math.radians(15))

    def test_half_turn_two_chambers(self):
        assert chamber_angle(math.pi, 2) == pytest.approx(math.pi / 2)

    def test_single_chamber_degenerate(self):
        with pytest.raises(DegenerateChamberCount):
            chamber_angle(math.radians(90), 1)

    @pytest.mark.parametrize("theta", [0.0, -0.5, math.pi + 0.1])
    def test_angle_range(self, theta):
        with pytest.raises(InvalidAngle):
            chamber_angle(theta, 4)


class TestCircleLineIntersection:
    def test_horizontal_line(self):
        assert circle_line_intersection(1.0, 2.0, 0.0) == (1.0, 0.0, 3.0, 0.0)

    def test_line_misses_circle(self):
        with pytest.raises(NoIntersection):
            circle_line_intersection(1.0, 10.0, math.radians(45))

    def test_against_bisection_oracle(self):
        # (r=1, c=2) at exactly 30 deg is tangent (discriminant 0); solve just
        # inside the tangency so both routes see two clean roots
        x1, y1, x2, y2 = circle_line_intersection(1.0, 1.9, math.radians(30))
        bx1, bx2 = bisect_roots(1.0, 1.9, math.radians(30))
        assert x1 == pytest.approx(bx1, abs=1e-9)
        assert x2 == pytest.approx(bx2, abs=1e-9)
        t = math.tan(math.radians(30))
        assert y1 == pytest.approx(bx1 * t, abs=1e-9)
        assert y2 == pytest.approx(bx2 * t, abs=1e-9)

    def test_tangency_boundary(self):
        # the tangent configuration sits on the NoIntersection boundary; both
        # outcomes are a hair apart, so only require consistency
        try:
            x1, y1, x2, y2 = circle_line_intersection(1.0, 2.0, math.radians(30))
        except NoIntersection:
            return
        assert x2 - x1 == pytest.approx(0.0, abs=1e-6)

    def test_random_sweep_vs_oracle(self):
        rng = np.random.RandomState(11)
        solved = 0
        while solved < 500:
            r = rng.uniform(1.0, 100.0)
            c = rng.uniform(0.0, 3.0 * r)
            phi = math.radians(rng.uniform(0.0, 80.0))
            try:
                x1, _, x2, _ = circle_line_intersection(r, c, phi)
            except NoIntersection:
                continue
            bx1, bx2 = bisect_roots(r, c, phi)
            assert abs(x1 - bx1) <= 1e-9 * r
            assert abs(x2 - bx2) <= 1e-9 * r
            solved += 1

    def test_points_on_circle_and_line(self):
        rng = np.random.RandomState(5)
        solved = 0
        while solved < 300:
            r = rng.uniform(1.0, 100.0)
            c = rng.uniform(0.0, 3.0 * r)
            phi = math.radians(rng.uniform(0.0, 80.0))
            try:
                x1, y1, x2, y2 = circle_line_intersection(r, c, phi)
            except NoIntersection:
                continue
            for x, y in ((x1, y1), (x2, y2)):
                assert abs((x - c) ** 2 + y ** 2 - r * r) <= 1e-9 * r * r
                assert abs(y - x * math.tan(phi)) <= 1e-9 * r
            solved += 1


class TestChamberParams:
    def test_diameter_chord(self):
        ch = chamber_params(1.0, 2.0, 0.0)
        assert ch.bridge == pytest.approx(2.0)
        assert ch.lambda2 == pytest.approx(math.pi)
        assert ch.lambda1 == 0.0
        assert ch.lambda3 == pytest.approx(0.0, abs=1e-15)
        assert ch.alpha == 0.0
        assert ch.gamma == pytest.approx(0.0, abs=1e-15)

    def test_right_angle_chord(self):
        # c = r with phi = 45 deg gives bridge = r * sqrt(2), so lambda2 = pi/2
        ch = chamber_params(1.0, 1.0, math.radians(45))
        assert ch.bridge == pytest.approx(math.sqrt(2.0), rel=1e-12)
        assert ch.lambda2 == pytest.approx(math.pi / 2, rel=1e-12)

    def test_full_solve_vs_oracle(self):
        r, c, phi = 20.0, 60.0, math.radians(15)
        ch = chamber_params(r, c, phi)
        bx1, bx2 = bisect_roots(r, c, phi)
        t = math.tan(phi)
        by1, by2 = bx1 * t, bx2 * t
        bridge = math.hypot(bx2 - bx1, by2 - by1)
        lambda1 = math.asin(by1 / r)
        lambda2 = 2.0 * math.asin(bridge / (2.0 * r))   # chord inverted directly
        lambda3 = math.pi - lambda1 - lambda2
        assert ch.bridge == pytest.approx(bridge, abs=1e-9 * r)
        assert ch.lambda1 == pytest.approx(lambda1, abs=1e-9)
        assert ch.lambda2 == pytest.approx(lambda2, abs=1e-9)
        assert ch.lambda3 == pytest.approx(lambda3, abs=1e-9)
        assert ch.alpha == pytest.approx(r * lambda1, abs=1e-9 * r)
        assert ch.gamma == pytest.approx(r * lambda3, abs=1e-9 * r)

    def test_angle_sum_exact(self):
        rng = np.random.RandomState(23)
        solved = 0
        while solved < 300:
            r = rng.uniform(1.0, 100.0)
            c = rng.uniform(0.0, 3.0 * r)
            phi = math.radians(rng.uniform(0.0, 80.0))
            try:
                ch = chamber_params(r, c, phi)
            except (NoIntersection, InfeasibleChamber):
                continue
            assert abs(ch.lambda1 + ch.lambda2 + ch.lambda3 - math.pi) <= 1e-12
            assert ch.alpha >= 0.0 and ch.gamma >= 0.0 and ch.bridge >= 0.0
            # chord/angle relation through the independent half-angle form
            assert abs(ch.bridge - 2.0 * r * math.sin(ch.lambda2 / 2.0)) <= 1e-9 * r
            solved += 1

    def test_bridge_matches_discriminant_form(self):
        # the chord between the intersections collapses to
        # 2 sqrt(psi / (1 + tan^2 phi)); the point-distance route must agree
        rng = np.random.RandomState(31)
        solved = 0
        while solved < 200:
            r = rng.uniform(1.0, 100.0)
            c = rng.uniform(r, 3.0 * r)
            phi = math.radians(rng.uniform(0.0, 80.0))
            try:
                ch = chamber_params(r, c, phi)
            except (NoIntersection, InfeasibleChamber):
                continue
            t2 = math.tan(phi) ** 2
            psi = r * r + t2 * (r * r - c * c)
            assert ch.bridge == pytest.approx(
                2.0 * math.sqrt(psi / (1.0 + t2)), abs=1e-9 * r)
            solved += 1

    def test_lambda1_weakly_increases_with_phi(self):
        r, c = 1.0, 1.5
        prev = -1.0
        for deg in range(0, 34):
            try:
                ch = chamber_params(r, c, math.radians(deg))
            except NoIntersection:
                break
            assert ch.lambda1 >= prev - 1e-12
            prev = ch.lambda1


class TestDesignActuator:
    def test_feasible_small_angle(self):
        design = design_actuator(math.radians(30), 100.0, 200.0, [15.0, 20.0, 25.0])
        assert design.n_chambers == 2
        assert design.chambers[0].r == 25.0     # largest radius wins the tie
        assert [ch.c for ch in design.chambers] == chamber_offsets(100.0, 25.0, 2)
        assert all(ch.phi == pytest.approx(math.radians(15)) for ch in design.chambers)

    def test_deterministic(self):
        args = (math.radians(30), 100.0, 200.0, [15.0, 17.5, 20.0, 25.0])
        assert design_actuator(*args) == design_actuator(*args)

    def test_stack_does_not_fit(self):
        with pytest.raises(NoFeasibleDesign):
            design_actuator(math.radians(90), 50.0, 300.0, [15.0, 20.0])

    def test_quarter_turn_is_infeasible_under_stacking_rule(self):
        # every (r, n) fails: the outermost chamber needs (2n-1) sin(phi) <= 1
        # and that expression stays above pi/2 for theta = 90 deg
        with pytest.raises(NoFeasibleDesign):
            design_actuator(math.radians(90), 250.0, 300.0,
                            [10.0, 20.0, 30.0, 40.0, 60.0])

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            design_actuator(math.radians(30), 100.0, 200.0, [])

    def test_csv_layout(self):
        design = design_actuator(math.radians(30), 100.0, 200.0, [25.0])
        text = design_csv(design)
        lines = text.strip().split("\n")
        assert lines[0] == ("index,r,c,phi_deg,alpha,bridge,gamma,"
                            "lambda1_deg,lambda2_deg,lambda3_deg")
        assert len(lines) == 1 + design.n_chambers
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[1]) == 25.0
        assert float(first[3]) == pytest.approx(15.0)
