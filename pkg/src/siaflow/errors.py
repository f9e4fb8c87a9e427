"""Exception types shared across the package."""


class SiaflowError(Exception):
    """Base class for all siaflow errors."""


class ConfigError(SiaflowError):
    """Invalid configuration input. Carries the offending line number when known."""

    def __init__(self, message, line=None, errors=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.errors = errors or [message]


# --- chamber geometry ---

class DegenerateChamberCount(SiaflowError):
    """Fewer than two chambers: the per-chamber angle is undefined."""


class InvalidAngle(SiaflowError):
    """Angle outside the solvable range."""


class NoIntersection(SiaflowError):
    """The chamber wall line misses the in-circle."""


class InfeasibleChamber(SiaflowError):
    """Intersections exist but the chamber arcs cannot close."""


class NoFeasibleDesign(SiaflowError):
    """Grid search exhausted without a feasible (r, n) combination."""


# --- resistors and gas ---

class InvalidGeometry(SiaflowError):
    """Resistor construction dimensions are out of range."""


class InvalidGas(SiaflowError):
    """Non-physical gas property."""


class InvalidPlateCount(SiaflowError):
    """Plate-count scaling needs at least one plate."""


class InvalidRatio(SiaflowError):
    """Orifice-to-tube diameter ratio outside (0, 1)."""


# --- actuators ---

class VolumeOutOfRange(SiaflowError):
    """Fill volume outside [0, capacity]."""


class PressureOutOfRange(SiaflowError):
    """Pressure outside the actuator's spring curve range."""


class InvalidFlow(SiaflowError):
    """Flow must be strictly positive for a fill-time estimate."""


# --- simulation ---

class NumericalDivergence(SiaflowError):
    """Integration produced a non-finite state."""

    def __init__(self, node, time):
        super().__init__(f"non-finite state at node '{node}' near t={time:g} s")
        self.node = node
        self.time = time


# --- calibration / analysis ---

class InsufficientData(SiaflowError):
    """Not enough samples or rows for the requested operation."""


class MissingBaseline(SiaflowError):
    """No usable single-plate baseline drop."""


class DegenerateFit(SiaflowError):
    """Normal equations are singular."""


class ZeroVariance(SiaflowError):
    """R-squared is undefined for constant observations."""
