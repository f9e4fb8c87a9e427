"""Passive multi-orifice-plate flow resistor model.

A resistor is a straight tube segment holding N thin orifice plates.  Flow
through a single sharp-edged orifice follows the square-root pressure law
Q = xi * sqrt*(dp) with xi = C_D * A_o * sqrt(2/rho); stacking N plates scales
the sustained pressure drop by k(N) = sqrt(N).  Two selectable flow laws map
this onto an edge conductance: a resistance scaling (default) and an
activation-threshold variant that blocks flow below a characteristic drop.
"""

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidGas, InvalidGeometry, InvalidPlateCount, InvalidRatio

DEFAULT_DISCHARGE_COEFF = 0.61   # sharp-edged orifice, handbook value
DEFAULT_GAS_DENSITY = 1.204      # air at 20 C, kg/m^3

# Bench reference for the default activation drop: measured single-plate drop
# of the printed resistor family at its 50 kPa rated input.
REFERENCE_SINGLE_PLATE_DROP = 12.95e3   # Pa
REFERENCE_INPUT_PRESSURE = 50e3         # Pa


class FlowLaw(Enum):
    """Selectable resistor flow laws used by the circuit simulator."""

    SCALED_ORIFICE = "scaled_orifice"
    ACTIVATION_THRESHOLD = "activation_threshold"


@dataclass(frozen=True)
class ResistorSpec:
    """Geometry and gas parameters of one flow resistor.

    All lengths in metres, pressures in Pa.  ``n_plates == 0`` means a plain
    tube with no plates; it still throttles flow as an orifice of the tube's
    own bore (see :func:`effective_xi`).
    """

    n_plates: int
    tube_inner_diameter: float = 4.0e-3
    orifice_diameter: float = 0.98e-3
    plate_thickness: float = 0.5e-3
    tube_length: float = 40.0e-3
    discharge_coeff: float = DEFAULT_DISCHARGE_COEFF
    gas_density: float = DEFAULT_GAS_DENSITY
    activation_drop: float = 0.0

    def __post_init__(self):
        if self.n_plates < 0:
            raise InvalidGeometry(f"n_plates must be >= 0, got {self.n_plates}")
        for name in ("tube_inner_diameter", "orifice_diameter", "plate_thickness",
                     "tube_length"):
            if getattr(self, name) <= 0.0:
                raise InvalidGeometry(f"{name} must be > 0")
        if self.gas_density <= 0.0:
            raise InvalidGas(f"gas_density must be > 0, got {self.gas_density}")
        if self.discharge_coeff <= 0.0:
            raise InvalidGeometry("discharge_coeff must be > 0")
        if self.activation_drop < 0.0:
            raise InvalidGeometry("activation_drop must be >= 0")
        # the square-root law assumes a small orifice in a comparatively wide
        # tube and thin plates
        if self.orifice_diameter > 0.5 * self.tube_inner_diameter:
            raise InvalidGeometry(
                "orifice_diameter must be <= half the tube inner diameter "
                f"({self.orifice_diameter} vs {self.tube_inner_diameter})")
        if self.plate_thickness >= self.tube_inner_diameter:
            raise InvalidGeometry("plate_thickness must be < tube inner diameter")
        # plates need at least one tube-diameter of spacing to fit within L
        needed = self.n_plates * (self.plate_thickness + self.tube_inner_diameter)
        if needed > self.tube_length:
            raise InvalidGeometry(
                f"{self.n_plates} plates need {needed * 1e3:.1f} mm, tube is "
                f"{self.tube_length * 1e3:.1f} mm")

    @property
    def diameter_ratio(self):
        """Orifice-to-tube ratio, always in (0, 0.5] after validation."""
        return self.orifice_diameter / self.tube_inner_diameter


def signed_sqrt(x):
    """Odd square root: sign(x) * sqrt(|x|)."""
    if x >= 0.0:
        return math.sqrt(x)
    return -math.sqrt(-x)


def orifice_area(diameter):
    return math.pi * diameter * diameter / 4.0


def orifice_xi(spec):
    """Construction constant xi = C_D * A_o * sqrt(2/rho)  [m^3/(s*sqrt(Pa))]."""
    if spec.orifice_diameter <= 0.0:
        raise InvalidGeometry("orifice diameter must be > 0")
    if spec.gas_density <= 0.0:
        raise InvalidGas("gas density must be > 0")
    area = orifice_area(spec.orifice_diameter)
    return spec.discharge_coeff * area * math.sqrt(2.0 / spec.gas_density)


def single_orifice_flow(xi, delta_p):
    """Volumetric flow through one orifice at pressure differential delta_p."""
    return xi * signed_sqrt(delta_p)


def plate_scaling(n_plates):
    """Drop scaling k(N) = sqrt(N) of an N-plate resistor relative to one plate."""
    if n_plates <= 0:
        raise InvalidPlateCount(f"plate scaling needs n_plates >= 1, got {n_plates}")
    return math.sqrt(n_plates)


def orifice_coefficient_from_ratio(beta, discharge_coeff=DEFAULT_DISCHARGE_COEFF):
    """Diagnostic orifice coefficient C_o from the porous-media drop model.

    C_o = sqrt((1 - b^2) * (b^-4 - 1) / (2 C_D)) with b the diameter ratio.
    Characterised for reference only; nothing downstream consumes it.
    """
    if beta <= 0.0 or beta >= 1.0:
        raise InvalidRatio(f"diameter ratio must be in (0, 1), got {beta}")
    return math.sqrt((1.0 - beta ** 2) * (beta ** -4 - 1.0)
                     / (2.0 * discharge_coeff))


def orifice_coefficient(spec):
    """C_o of a resistor spec; see :func:`orifice_coefficient_from_ratio`."""
    return orifice_coefficient_from_ratio(
        spec.orifice_diameter / spec.tube_inner_diameter, spec.discharge_coeff)


def default_activation_drop(n_plates, source_pressure):
    """Characteristic drop when no measured value is configured.

    sqrt(N) times the bench single-plate drop, scaled by the ratio of the
    operating source pressure to the 50 kPa the bench value was measured at.
    A plain tube (N = 0) has no plates and therefore no threshold.
    """
    if n_plates <= 0:
        return 0.0
    return (plate_scaling(n_plates) * REFERENCE_SINGLE_PLATE_DROP
            * (source_pressure / REFERENCE_INPUT_PRESSURE))


def effective_xi(spec, law):
    """Edge conductance used by the simulator for the given flow law.

    A plain tube is modelled as an orifice of the tube's own bore.  Under the
    resistance-scaling law, N plates divide xi by k(N) so that the sustained
    drop at fixed flow grows linearly with N.
    """
    if spec.n_plates == 0:
        area = orifice_area(spec.tube_inner_diameter)
        return spec.discharge_coeff * area * math.sqrt(2.0 / spec.gas_density)
    xi = orifice_xi(spec)
    if law is FlowLaw.SCALED_ORIFICE:
        return xi / plate_scaling(spec.n_plates)
    return xi


def effective_threshold(spec, law):
    """Activation threshold in Pa for the given flow law (0 when inactive)."""
    if law is FlowLaw.ACTIVATION_THRESHOLD:
        return spec.activation_drop
    return 0.0


def edge_flow(xi, threshold, delta_p):
    """Signed flow through an edge with conductance xi and optional threshold.

    Mirrors the compiled kernel arithmetic exactly; keep the two in sync.
    """
    if threshold > 0.0:
        m = abs(delta_p) - threshold
        if m <= 0.0:
            return 0.0
        root = math.sqrt(m)
        return xi * root if delta_p >= 0.0 else -xi * root
    if delta_p >= 0.0:
        return xi * math.sqrt(delta_p)
    return -xi * math.sqrt(-delta_p)


def resistor_flow(spec, p_up, p_down, law=FlowLaw.SCALED_ORIFICE):
    """Volumetric flow through a resistor between two node pressures.

    Total in its arguments: never raises, odd and monotone non-decreasing in
    (p_up - p_down) under both laws.
    """
    xi = effective_xi(spec, law)
    threshold = effective_threshold(spec, law)
    return edge_flow(xi, threshold, p_up - p_down)
