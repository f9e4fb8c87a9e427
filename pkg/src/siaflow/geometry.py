"""Chamber geometry solver for multi-chamber inflatable actuators.

Each chamber is bounded by an in-circle of radius r centred at (c, 0) and a
wall line through the rotation centre O at angle phi to the x-axis.  The two
circle/line intersection points fix the interconnection chord ("bridge") and
split the half-circle into three central angles lambda1..lambda3 whose arcs
give the inner (alpha) and outer (gamma) perimeter cut lengths.

Angles are radians and lengths millimetres throughout this module; degree
conversion happens only at the CLI boundary.
"""

import math
from dataclasses import dataclass

from .errors import (DegenerateChamberCount, InfeasibleChamber, InvalidAngle,
                     NoFeasibleDesign, NoIntersection)


@dataclass(frozen=True)
class ChamberGeometry:
    """Solved construction parameters of a single chamber."""

    r: float
    c: float
    phi: float
    lambda1: float
    lambda2: float
    lambda3: float
    alpha: float
    bridge: float
    gamma: float
    x1: float
    y1: float
    x2: float
    y2: float


@dataclass(frozen=True)
class ActuatorDesign:
    """A full multi-chamber actuator design for one rotary joint."""

    theta: float            # target joint rotation, rad
    height: float           # stack height H, mm
    width: float            # actuator width W, mm (metadata only)
    n_chambers: int
    chambers: tuple         # ChamberGeometry per chamber, outermost first


def chamber_angle(theta, n):
    """Per-chamber half-angle phi = theta / (2n - 2)."""
    if n < 2:
        raise DegenerateChamberCount(f"need n >= 2 chambers, got {n}")
    if not 0.0 < theta <= math.pi:
        raise InvalidAngle(f"theta must be in (0, pi], got {theta}")
    return theta / (2 * n - 2)


def circle_line_intersection(r, c, phi):
    """Intersections of y = x tan(phi) with (x - c)^2 + y^2 = r^2.

    Returns (x1, y1, x2, y2) with x1 <= x2.  Substituting the line into the
    circle gives x^2 (1 + tan^2 phi) - 2 c x + (c^2 - r^2) = 0 with quarter
    discriminant psi = r^2 + tan^2(phi) (r^2 - c^2).
    """
    if r <= 0.0:
        raise InvalidAngle(f"radius must be > 0, got {r}")
    if c < 0.0:
        raise InvalidAngle(f"centre offset must be >= 0, got {c}")
    if not 0.0 <= phi < math.pi / 2:
        raise InvalidAngle(f"phi must be in [0, pi/2), got {phi}")
    t = math.tan(phi)
    psi = r * r + t * t * (r * r - c * c)
    if psi < 0.0:
        raise NoIntersection(
            f"line at phi={phi:g} rad misses circle (r={r:g}, c={c:g})")
    root = math.sqrt(psi)
    denom = 1.0 + t * t
    x1 = (c - root) / denom
    x2 = (c + root) / denom
    return x1, x1 * t, x2, x2 * t


def chamber_params(r, c, phi):
    """Solve one chamber: bridge chord, central angles and perimeter arcs.

    lambda2 follows from the chord on the inner isosceles triangle,
    cos(lambda2) = 1 - bridge^2 / (2 r^2); lambda1 = asin(y1 / r); lambda3
    closes the half circle.  Raises InfeasibleChamber when the arcs cannot
    close (lambda3 < 0).
    """
    x1, y1, x2, y2 = circle_line_intersection(r, c, phi)
    if y1 < 0.0:
        raise InfeasibleChamber(
            f"first intersection below the chamber base for (r={r:g}, c={c:g}, "
            f"phi={phi:g}); arcs would be negative")
    bridge = math.hypot(x2 - x1, y2 - y1)
    cos_l2 = 1.0 - bridge * bridge / (2.0 * r * r)
    lambda2 = math.acos(max(-1.0, min(1.0, cos_l2)))
    lambda1 = math.asin(max(-1.0, min(1.0, y1 / r)))
    lambda3 = math.pi - (lambda1 + lambda2)
    if lambda3 < 0.0:
        raise InfeasibleChamber(
            f"arcs cannot close for (r={r:g}, c={c:g}, phi={phi:g}): "
            f"lambda3={lambda3:g}")
    return ChamberGeometry(
        r=r, c=c, phi=phi,
        lambda1=lambda1, lambda2=lambda2, lambda3=lambda3,
        alpha=r * lambda1, bridge=bridge, gamma=r * lambda3,
        x1=x1, y1=y1, x2=x2, y2=y2)


def chamber_offsets(height, r, n):
    """Stacking rule: in-circle centres at c_i = H - r (2i - 1), outermost first.

    Tiles n circles of radius r inside the stack height; feasible only when
    the innermost centre keeps the rotation centre outside the circle
    (c_n >= r).
    """
    return [height - r * (2 * i - 1) for i in range(1, n + 1)]


def design_actuator(theta, height, width, r_candidates):
    """Grid search over (r, n) for the fewest chambers reaching theta.

    Enumerates every candidate radius against n = 2 .. floor(H / (2 r_min)),
    solves all chambers under the stacking rule, and discards combinations
    where any chamber misses the wall line, cannot close, or the stack does
    not fit.  Deterministic tie-break: fewest chambers, then largest radius,
    then smallest innermost offset.
    """
    if theta <= 0.0 or height <= 0.0 or width <= 0.0:
        raise InvalidAngle("theta, height and width must all be > 0")
    radii = sorted(set(float(r) for r in r_candidates))
    if not radii:
        raise ValueError("r_candidates must be non-empty")
    if any(r <= 0.0 for r in radii):
        raise InvalidAngle("candidate radii must be > 0")

    n_max = int(math.floor(height / (2.0 * radii[0])))
    best = None
    best_key = None
    for n in range(2, n_max + 1):
        phi = chamber_angle(theta, n)
        for r in radii:
            offsets = chamber_offsets(height, r, n)
            if offsets[-1] < r:
                continue
            try:
                chambers = tuple(chamber_params(r, c, phi) for c in offsets)
            except (NoIntersection, InfeasibleChamber):
                continue
            key = (n, -r, offsets[-1])
            if best_key is None or key < best_key:
                best_key = key
                best = ActuatorDesign(theta=theta, height=height, width=width,
                                      n_chambers=n, chambers=chambers)
    if best is None:
        raise NoFeasibleDesign(
            f"no feasible (r, n) combination for theta={math.degrees(theta):g} deg, "
            f"H={height:g} mm over {len(radii)} candidate radii")
    return best


def design_csv(design):
    """CSV table of a design, one row per chamber (angles in degrees)."""
    lines = ["index,r,c,phi_deg,alpha,bridge,gamma,lambda1_deg,lambda2_deg,lambda3_deg"]
    for i, ch in enumerate(design.chambers, start=1):
        vals = (i, ch.r, ch.c, math.degrees(ch.phi), ch.alpha, ch.bridge,
                ch.gamma, math.degrees(ch.lambda1), math.degrees(ch.lambda2),
                math.degrees(ch.lambda3))
        lines.append(",".join(f"{v:.9g}" if isinstance(v, float) else str(v)
                              for v in vals))
    return "\n".join(lines) + "\n"
