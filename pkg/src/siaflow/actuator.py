"""Nonlinear-spring accumulator model of an inflatable actuator.

Gauge pressure is a polynomial in the fill volume, P(v) = sum_n k_n v^n with
no constant term, so an empty bladder sits at ambient.  The spring is time
invariant: no creep or hysteresis.
"""

import math
from dataclasses import dataclass, field

from .errors import InvalidFlow, PressureOutOfRange, VolumeOutOfRange

_MONOTONICITY_SAMPLES = 257


@dataclass(frozen=True)
class ActuatorSpec:
    """Volume capacity (m^3) and spring coefficients (Pa/m^3, Pa/m^6, ...).

    ``spring_coeffs[i]`` multiplies v**(i+1).  The curve must be strictly
    increasing over [0, volume_capacity]; this is checked at construction by
    sampling the polynomial and the sign of its derivative.
    """

    volume_capacity: float
    spring_coeffs: tuple = field(default=())
    initial_volume: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "spring_coeffs",
                           tuple(float(k) for k in self.spring_coeffs))
        if self.volume_capacity <= 0.0:
            raise VolumeOutOfRange(
                f"volume_capacity must be > 0, got {self.volume_capacity}")
        if not self.spring_coeffs:
            raise VolumeOutOfRange("at least one spring coefficient is required")
        if not 0.0 <= self.initial_volume <= self.volume_capacity:
            raise VolumeOutOfRange(
                f"initial_volume {self.initial_volume} outside "
                f"[0, {self.volume_capacity}]")
        for i in range(_MONOTONICITY_SAMPLES + 1):
            v = self.volume_capacity * i / _MONOTONICITY_SAMPLES
            if self._slope(v) <= 0.0:
                raise VolumeOutOfRange(
                    f"spring curve is not strictly increasing near v={v:g} m^3")

    def _slope(self, v):
        """dP/dv by Horner on the analytic derivative."""
        acc = 0.0
        for n in range(len(self.spring_coeffs), 0, -1):
            acc = n * self.spring_coeffs[n - 1] + v * acc
        return acc

    @property
    def max_pressure(self):
        return pressure_from_volume(self, self.volume_capacity)


def pressure_from_volume(spec, v):
    """Gauge pressure at fill volume v, by Horner evaluation."""
    if not 0.0 <= v <= spec.volume_capacity:
        raise VolumeOutOfRange(
            f"volume {v} outside [0, {spec.volume_capacity}]")
    acc = 0.0
    for k in reversed(spec.spring_coeffs):
        acc = k + v * acc
    return v * acc


def volume_from_pressure(spec, p, rel_tol=1e-12):
    """Unique fill volume at gauge pressure p, by bisection.

    Converges to an absolute tolerance of ``rel_tol * volume_capacity``.
    """
    if p < 0.0:
        raise PressureOutOfRange(f"gauge pressure must be >= 0, got {p}")
    p_max = pressure_from_volume(spec, spec.volume_capacity)
    if p > p_max:
        raise PressureOutOfRange(f"pressure {p} above curve maximum {p_max}")
    if p == 0.0:
        return 0.0
    lo, hi = 0.0, spec.volume_capacity
    tol = rel_tol * spec.volume_capacity
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pressure_from_volume(spec, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fill_time_estimate(volume, flow):
    """Coarse fill time T = V / Q at a constant volumetric flow."""
    if flow <= 0.0:
        raise InvalidFlow(f"flow must be > 0, got {flow}")
    if not math.isfinite(flow):
        raise InvalidFlow("flow must be finite")
    return volume / flow
