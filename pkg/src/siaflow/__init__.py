"""Simulation, design and calibration tools for pneumatic circuits of series
inflatable actuators timed by passive multi-orifice flow resistors."""

from ._kernel import kernel_backend
from .actuator import (ActuatorSpec, fill_time_estimate, pressure_from_volume,
                       volume_from_pressure)
from .analysis import activation_time, pressure_drop_at_inflection, release_time
from .calibration import (REFERENCE_MEASUREMENTS, FitResult, MeasurementRow,
                          MeasurementSet, evaluate_fixed_sqrt, fit_all,
                          fit_poly2, fit_scaled_sqrt, goodness)
from .circuit import (ActuatorNode, Circuit, Junction, Outlet, ResistorEdge,
                      SimConfig, Source, TraceSet, ValveEdge, ValveSchedule,
                      compile_circuit, net_flux, simulate, step)
from .config import (build_circuit, build_system, load_system, parse_config,
                     render_config)
from .geometry import (ActuatorDesign, ChamberGeometry, chamber_angle,
                       chamber_params, circle_line_intersection, design_actuator)
from .resistor import (FlowLaw, ResistorSpec, default_activation_drop,
                       orifice_coefficient, orifice_coefficient_from_ratio,
                       orifice_xi, plate_scaling, resistor_flow, signed_sqrt,
                       single_orifice_flow)

__version__ = "0.1.0"
