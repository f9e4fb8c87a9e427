"""Line-oriented circuit configuration format.

Sections declare nodes, edges and simulation settings with engineering units
(kPa, litres, millimetres, seconds); conversion to SI happens exactly once,
when the parsed document is turned into a circuit.

    # comment lines start with '#'
    [source supply]
    pressure_kpa = 50

    [actuator a1]
    volume_l = 1.0
    spring_k1 = 70        # kPa per litre
    spring_k3 = 30        # kPa per litre^3

    [resistor r1]
    from = supply
    to = a1
    n_plates = 1

    [sim]
    dt = 0.001
    t_end = 30

Unknown section kinds or keys are hard errors, reported with line numbers.
"""

import math
import re
from dataclasses import dataclass, field

from . import circuit as _circ
from .actuator import ActuatorSpec
from .errors import ConfigError
from .resistor import (DEFAULT_DISCHARGE_COEFF, DEFAULT_GAS_DENSITY, FlowLaw,
                       ResistorSpec, default_activation_drop)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_HEADER_RE = re.compile(r"^\[\s*([a-z]+)(?:\s+([^\]\s]+))?\s*\]$")

# key -> (parser, required); None sections take no keys
_SCHEMA = {
    "source": {"pressure_kpa": (float, True)},
    "outlet": {"pressure_kpa": (float, True)},
    "junction": {},
    "actuator": {
        "volume_l": (float, True),
        "initial_volume_l": (float, False),
        **{f"spring_k{n}": (float, False) for n in range(1, 10)},
    },
    "resistor": {
        "from": (str, True),
        "to": (str, True),
        "n_plates": (int, True),
        "tube_mm": (float, False),
        "orifice_mm": (float, False),
        "plate_mm": (float, False),
        "length_mm": (float, False),
        "law": (str, False),
        "activation_drop_kpa": (float, False),
        "discharge_coeff": (float, False),
        "gas_density": (float, False),
    },
    "valve": {
        "from": (str, True),
        "to": (str, True),
        "schedule": (str, True),
        "xi_open": (float, True),
    },
    "sim": {
        "dt": (float, False),
        "t_end": (float, False),
        "record_every": (int, False),
        "activation_fraction": (float, False),
    },
}

SIM_DEFAULTS = {"dt": 1e-3, "t_end": 30.0, "record_every": 10,
                "activation_fraction": 0.95}


@dataclass
class ConfigSection:
    kind: str
    name: str            # "" for [sim]
    line: int
    entries: dict = field(default_factory=dict)   # key -> (value, line)

    def get(self, key, default=None):
        if key in self.entries:
            return self.entries[key][0]
        return default


@dataclass
class ConfigDocument:
    sections: list

    def of_kind(self, kind):
        return [s for s in self.sections if s.kind == kind]

    def canonical(self):
        """Order-independent content view, for equivalence comparison."""
        return {
            (s.kind, s.name): {k: v for k, (v, _) in s.entries.items()}
            for s in self.sections
        }


def parse_config(text):
    """Parse and validate config text; raises ConfigError listing all problems."""
    errors = []
    sections = []
    current = None
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            match = _HEADER_RE.match(line)
            if not match:
                errors.append(f"line {lineno}: malformed section header '{line}'")
                current = None
                continue
            kind, name = match.group(1), match.group(2) or ""
            if kind not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section kind '{kind}'")
                current = None
                continue
            if kind == "sim":
                if name:
                    errors.append(f"line {lineno}: [sim] takes no name")
                if any(s.kind == "sim" for s in sections):
                    errors.append(f"line {lineno}: duplicate [sim] section")
            else:
                if not name:
                    errors.append(f"line {lineno}: [{kind}] needs a name")
                elif not _NAME_RE.match(name):
                    errors.append(f"line {lineno}: invalid name '{name}'")
                elif name in names:
                    errors.append(f"line {lineno}: duplicate section name '{name}'")
                names.add(name)
            current = ConfigSection(kind=kind, name=name, line=lineno)
            sections.append(current)
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got '{line}'")
            continue
        if current is None:
            errors.append(f"line {lineno}: entry outside any section")
            continue
        key, _, value = (part.strip() for part in line.partition("="))
        schema = _SCHEMA[current.kind]
        if key not in schema:
            errors.append(
                f"line {lineno}: unknown key '{key}' in [{current.kind}]")
            continue
        if key in current.entries:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        parser = schema[key][0]
        if parser in (int, float):
            try:
                value = parser(value)
            except ValueError:
                errors.append(
                    f"line {lineno}: value for '{key}' is not a number: '{value}'")
                continue
            if not math.isfinite(value):
                errors.append(f"line {lineno}: value for '{key}' is not finite")
                continue
        current.entries[key] = (value, lineno)

    if not sections and not errors:
        errors.append("no sections found")
    for section in sections:
        for key, (_, required) in _SCHEMA[section.kind].items():
            if required and key not in section.entries:
                errors.append(
                    f"line {section.line}: [{section.kind} {section.name}] "
                    f"is missing required key '{key}'")
    if errors:
        raise ConfigError(errors[0] + (f" (+{len(errors) - 1} more)"
                                       if len(errors) > 1 else ""),
                          errors=errors)
    return ConfigDocument(sections=sections)


def render_config(doc):
    """Config text for a document; parse(render(doc)) is equivalent to doc."""
    out = []
    for section in doc.sections:
        header = f"[{section.kind}]" if section.kind == "sim" \
            else f"[{section.kind} {section.name}]"
        out.append(header)
        for key, (value, _) in section.entries.items():
            out.append(f"{key} = {value}")
        out.append("")
    return "\n".join(out)


def parse_schedule(text, line=None):
    """Valve schedule string: optional initial state, then time:state events.

    Examples: "0:open, 12.5:closed" or "closed, 5:open".  The default initial
    state is closed; an event at t=0 overrides it.
    """
    initial_open = False
    events = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if ":" not in token:
            if token not in ("open", "closed"):
                raise ConfigError(f"bad valve state '{token}'", line=line)
            initial_open = token == "open"
            continue
        t_str, _, state = token.partition(":")
        state = state.strip()
        if state not in ("open", "closed"):
            raise ConfigError(f"bad valve state '{state}'", line=line)
        try:
            te = float(t_str)
        except ValueError:
            raise ConfigError(f"bad event time '{t_str}'", line=line) from None
        if te == 0.0:
            initial_open = state == "open"
        else:
            events.append((te, state == "open"))
    events.sort(key=lambda ev: ev[0])
    return _circ.ValveSchedule(initial_open=initial_open, events=tuple(events))


def _spring_coeffs_si(section):
    """spring_k<n> in kPa/L^n to Pa/m^(3n), densely up to the highest power."""
    powers = {}
    for key, (value, line) in section.entries.items():
        if key.startswith("spring_k"):
            powers[int(key[len("spring_k"):])] = (value, line)
    if not powers:
        raise ConfigError(
            f"[actuator {section.name}] needs at least one spring_k<n>",
            line=section.line)
    top = max(powers)
    coeffs = []
    for n in range(1, top + 1):
        value = powers.get(n, (0.0, None))[0]
        coeffs.append(value * 10.0 ** (3 + 3 * n))
    return tuple(coeffs)


def build_system(doc):
    """(Circuit, SimConfig, activation_fraction) from a parsed document."""
    nodes = []
    edges = []
    first_source_kpa = None
    for section in doc.sections:
        if section.kind == "source":
            pressure = section.get("pressure_kpa") * 1e3
            if first_source_kpa is None:
                first_source_kpa = pressure
            nodes.append(_circ.Source(section.name, pressure))
        elif section.kind == "outlet":
            nodes.append(_circ.Outlet(section.name, section.get("pressure_kpa") * 1e3))
        elif section.kind == "junction":
            nodes.append(_circ.Junction(section.name))
        elif section.kind == "actuator":
            spec = ActuatorSpec(
                volume_capacity=section.get("volume_l") * 1e-3,
                spring_coeffs=_spring_coeffs_si(section),
                initial_volume=section.get("initial_volume_l", 0.0) * 1e-3)
            nodes.append(_circ.ActuatorNode(section.name, spec))

    for section in doc.sections:
        if section.kind == "resistor":
            law_name = section.get("law", FlowLaw.SCALED_ORIFICE.value)
            try:
                law = FlowLaw(law_name)
            except ValueError:
                raise ConfigError(
                    f"unknown flow law '{law_name}'",
                    line=section.entries["law"][1]) from None
            n_plates = section.get("n_plates")
            drop_kpa = section.get("activation_drop_kpa")
            if drop_kpa is not None:
                drop = drop_kpa * 1e3
            elif first_source_kpa is not None:
                drop = default_activation_drop(n_plates, first_source_kpa)
            else:
                drop = 0.0
            try:
                spec = ResistorSpec(
                    n_plates=n_plates,
                    tube_inner_diameter=section.get("tube_mm", 4.0) * 1e-3,
                    orifice_diameter=section.get("orifice_mm", 0.98) * 1e-3,
                    plate_thickness=section.get("plate_mm", 0.5) * 1e-3,
                    tube_length=section.get("length_mm", 40.0) * 1e-3,
                    discharge_coeff=section.get("discharge_coeff",
                                                DEFAULT_DISCHARGE_COEFF),
                    gas_density=section.get("gas_density", DEFAULT_GAS_DENSITY),
                    activation_drop=drop)
            except Exception as exc:
                raise ConfigError(str(exc), line=section.line) from None
            edges.append(_circ.ResistorEdge(section.name, section.get("from"),
                                            section.get("to"), spec, law))
        elif section.kind == "valve":
            schedule = parse_schedule(section.get("schedule"),
                                      line=section.entries["schedule"][1])
            edges.append(_circ.ValveEdge(section.name, section.get("from"),
                                         section.get("to"), schedule,
                                         section.get("xi_open")))

    sim_sections = doc.of_kind("sim")
    sim_values = dict(SIM_DEFAULTS)
    if sim_sections:
        for key in ("dt", "t_end", "record_every", "activation_fraction"):
            value = sim_sections[0].get(key)
            if value is not None:
                sim_values[key] = value
    fraction = sim_values.pop("activation_fraction")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"activation_fraction must be in (0, 1), got {fraction}")
    circuit = _circ.Circuit(nodes, edges)
    return circuit, _circ.SimConfig(**sim_values), fraction


def build_circuit(doc):
    """Circuit alone from a parsed document (sim settings discarded)."""
    return build_system(doc)[0]


def load_system(text):
    """parse_config + build_system in one call."""
    return build_system(parse_config(text))
