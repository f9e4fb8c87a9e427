"""Resistor-actuator pneumatic networks and their time integration.

A circuit is a directed graph of pressure nodes (sources, actuators,
regulated outlets, zero-volume junctions) joined by edges carrying either a
flow resistor or a scheduled on/off valve.  The state vector is the set of
actuator fill volumes; node pressures follow from the spring curves (and a
net-flux balance at junctions), and each actuator's volume rate is the sum of
signed edge flows:

    dV_i/dt = sum(inbound flows) - sum(outbound flows)

Integration is fixed-step classical RK4.  Steps are split exactly at valve
switching times, so the right-hand side stays smooth within every step, and
fixed stepping keeps runs deterministic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import actuator as _act
from . import resistor as _res
from ._kernel import Core
from .errors import ConfigError, NumericalDivergence
from .resistor import FlowLaw

_CLAMP_LOG_CAP = 1024

# node kind codes shared with the kernels
_SOURCE, _ACTUATOR, _OUTLET, _JUNCTION = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# graph elements


@dataclass(frozen=True)
class Source:
    name: str
    pressure: float          # Pa gauge


@dataclass(frozen=True)
class ActuatorNode:
    name: str
    spec: _act.ActuatorSpec


@dataclass(frozen=True)
class Outlet:
    name: str
    pressure: float          # Pa gauge, regulated


@dataclass(frozen=True)
class Junction:
    """Zero-volume manifold node; its pressure balances the net flux."""

    name: str


@dataclass(frozen=True)
class ValveSchedule:
    """Initial open/closed state plus strictly increasing switch events."""

    initial_open: bool = False
    events: tuple = field(default=())   # (time_s, open_bool) pairs

    def __post_init__(self):
        events = tuple((float(t), bool(s)) for t, s in self.events)
        object.__setattr__(self, "events", events)
        times = [t for t, _ in events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("valve event times must be strictly increasing")

    def is_open(self, t):
        state = self.initial_open
        for te, st in self.events:
            if te <= t:
                state = st
            else:
                break
        return state


@dataclass(frozen=True)
class ResistorEdge:
    name: str
    src: str
    dst: str
    spec: _res.ResistorSpec
    law: FlowLaw = FlowLaw.SCALED_ORIFICE


@dataclass(frozen=True)
class ValveEdge:
    name: str
    src: str
    dst: str
    schedule: ValveSchedule
    xi_open: float           # conductance when open, m^3/(s*sqrt(Pa))


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    record_every: int = 10

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.t_end < 0.0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")


class Circuit:
    """Validated node/edge network in declaration order."""

    def __init__(self, nodes, edges):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.node_index = {}
        for node in self.nodes:
            if node.name in self.node_index:
                raise ConfigError(f"duplicate node name '{node.name}'")
            self.node_index[node.name] = len(self.node_index)
        edge_names = set()
        for edge in self.edges:
            if edge.name in edge_names or edge.name in self.node_index:
                raise ConfigError(f"duplicate element name '{edge.name}'")
            edge_names.add(edge.name)
            for end in (edge.src, edge.dst):
                if end not in self.node_index:
                    raise ConfigError(
                        f"edge '{edge.name}' references undefined node '{end}'")
            if edge.src == edge.dst:
                raise ConfigError(f"edge '{edge.name}' is a self-loop")
        if not any(isinstance(n, Source) for n in self.nodes):
            raise ConfigError("circuit needs at least one source node")
        self._check_connected()
        self._check_actuator_degree()

    def _check_connected(self):
        if not self.nodes:
            raise ConfigError("circuit has no nodes")
        adj = {n.name: set() for n in self.nodes}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        seen = {self.nodes[0].name}
        stack = [self.nodes[0].name]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        missing = [n.name for n in self.nodes if n.name not in seen]
        if missing:
            raise ConfigError(f"circuit is not connected; unreachable: {missing}")

    def _check_actuator_degree(self):
        degree = {n.name: 0 for n in self.nodes}
        for e in self.edges:
            degree[e.src] += 1
            degree[e.dst] += 1
        for n in self.nodes:
            if isinstance(n, ActuatorNode) and degree[n.name] == 0:
                raise ConfigError(f"actuator '{n.name}' has no incident edge")

    @property
    def actuators(self):
        return [n for n in self.nodes if isinstance(n, ActuatorNode)]

    @property
    def sources(self):
        return [n for n in self.nodes if isinstance(n, Source)]


# ---------------------------------------------------------------------------
# compilation to kernel arrays


class CompiledCircuit:
    """Flattened arrays for the integration kernel, plus name maps."""

    def __init__(self, circuit):
        self.circuit = circuit
        nodes, edges = circuit.nodes, circuit.edges
        n_nodes, n_edges = len(nodes), len(edges)

        node_kind = np.zeros(n_nodes, dtype=np.intc)
        node_fixed = np.zeros(n_nodes)
        node_act = np.full(n_nodes, -1, dtype=np.intc)
        act_node, act_vcap, act_init = [], [], []
        coef_off, coef = [0], []
        jn_nodes = []
        for i, node in enumerate(nodes):
            if isinstance(node, Source):
                node_kind[i] = _SOURCE
                node_fixed[i] = node.pressure
            elif isinstance(node, Outlet):
                node_kind[i] = _OUTLET
                node_fixed[i] = node.pressure
            elif isinstance(node, ActuatorNode):
                node_kind[i] = _ACTUATOR
                node_act[i] = len(act_node)
                act_node.append(i)
                act_vcap.append(node.spec.volume_capacity)
                act_init.append(node.spec.initial_volume)
                coef.extend(node.spec.spring_coeffs)
                coef_off.append(len(coef))
            else:
                node_kind[i] = _JUNCTION
                jn_nodes.append(i)

        edge_from = np.zeros(n_edges, dtype=np.intc)
        edge_to = np.zeros(n_edges, dtype=np.intc)
        edge_xi = np.zeros(n_edges)
        edge_thresh = np.zeros(n_edges)
        self.valve_slots = []        # (edge index, schedule)
        for e, edge in enumerate(edges):
            edge_from[e] = circuit.node_index[edge.src]
            edge_to[e] = circuit.node_index[edge.dst]
            if isinstance(edge, ResistorEdge):
                edge_xi[e] = _res.effective_xi(edge.spec, edge.law)
                edge_thresh[e] = _res.effective_threshold(edge.spec, edge.law)
            else:
                edge_xi[e] = edge.xi_open
                edge_thresh[e] = 0.0
                self.valve_slots.append((e, edge.schedule))

        # per-junction incidence lists (sign +1 when the edge points in)
        jn_edge_off, jn_edge_idx, jn_edge_sign = [0], [], []
        jn_set = set(jn_nodes)
        for j in jn_nodes:
            for e in range(n_edges):
                if edge_to[e] == j:
                    jn_edge_idx.append(e)
                    jn_edge_sign.append(1)
                elif edge_from[e] == j:
                    jn_edge_idx.append(e)
                    jn_edge_sign.append(-1)
            jn_edge_off.append(len(jn_edge_idx))
        single_sweep = not any(
            edge_from[e] in jn_set and edge_to[e] in jn_set for e in range(n_edges))

        self.n_nodes, self.n_edges, self.n_act = n_nodes, n_edges, len(act_node)
        self.act_node = np.asarray(act_node, dtype=np.intc)
        self.initial_volumes = np.asarray(act_init, dtype=np.float64)
        self.node_names = [n.name for n in nodes]
        self.actuator_names = [nodes[i].name for i in act_node]
        self.edge_names = [e.name for e in edges]
        self.core = Core(node_kind, node_fixed, node_act,
                         self.act_node, np.asarray(act_vcap, dtype=np.float64),
                         np.asarray(coef_off, dtype=np.intc),
                         np.asarray(coef, dtype=np.float64),
                         np.asarray(jn_nodes, dtype=np.intc),
                         np.asarray(jn_edge_off, dtype=np.intc),
                         np.asarray(jn_edge_idx, dtype=np.intc),
                         np.asarray(jn_edge_sign, dtype=np.intc),
                         single_sweep,
                         edge_from, edge_to, edge_xi, edge_thresh)

    def open_mask(self, t):
        """Edge open/closed states at time t (resistors are always open)."""
        mask = np.ones(self.n_edges, dtype=np.uint8)
        for e, schedule in self.valve_slots:
            mask[e] = 1 if schedule.is_open(t) else 0
        return mask

    def evaluate(self, volumes, t):
        """Node pressures, edge flows and actuator flux at one state."""
        p = np.zeros(self.n_nodes)
        q = np.zeros(self.n_edges)
        dvdt = np.zeros(self.n_act)
        self.core.evaluate(np.asarray(volumes, dtype=np.float64),
                           self.open_mask(t), p, q, dvdt)
        return p, q, dvdt


def compile_circuit(circuit):
    return CompiledCircuit(circuit)


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceSet:
    """Sampled simulation output: pressures, volumes and flows over time.

    Immutable after production; values are SI (s, Pa, m^3, m^3/s).
    """

    times: np.ndarray
    node_names: tuple
    node_pressures: np.ndarray      # [sample, node]
    actuator_names: tuple
    actuator_volumes: np.ndarray    # [sample, actuator]
    edge_names: tuple
    edge_flows: np.ndarray          # [sample, edge]
    clamp_events: tuple = ()        # (time, actuator name, 'low'|'high')
    clamp_total: int = 0

    def node_pressure(self, name):
        return self.node_pressures[:, self.node_names.index(name)]

    def actuator_volume(self, name):
        return self.actuator_volumes[:, self.actuator_names.index(name)]

    def edge_flow(self, name):
        return self.edge_flows[:, self.edge_names.index(name)]

    def to_csv(self):
        """Deterministic CSV text: 9 significant digits, LF, no trailing comma."""
        header = ["t"]
        header += [f"{n}.P" for n in self.node_names]
        header += [f"{a}.V" for a in self.actuator_names]
        header += [f"{e}.Q" for e in self.edge_names]
        lines = [",".join(header)]
        for s in range(len(self.times)):
            row = [f"{self.times[s]:.9g}"]
            row += [f"{x:.9g}" for x in self.node_pressures[s]]
            row += [f"{x:.9g}" for x in self.actuator_volumes[s]]
            row += [f"{x:.9g}" for x in self.edge_flows[s]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# scheduling and integration


def _schedule_boundaries(compiled, sim):
    """Substep boundary times, record flags and valve-segment splits.

    The base grid is k*dt up to t_end (final point snapped to t_end exactly);
    valve switch times inside (0, t_end) are inserted as extra boundaries so
    each RK4 step sees a constant valve state.  Samples fall on every
    record_every-th grid step, plus t=0 and t_end.
    """
    dt, t_end = sim.dt, sim.t_end
    n_steps = int(math.floor(t_end / dt + 1e-9))
    times = [k * dt for k in range(n_steps + 1)]
    flags = [k % sim.record_every == 0 for k in range(n_steps + 1)]
    if times[-1] < t_end - 1e-9 * dt:
        times.append(t_end)
        flags.append(True)
    else:
        times[-1] = t_end
    flags[-1] = True

    event_times = sorted({te for _, schedule in compiled.valve_slots
                          for te, _ in schedule.events if 0.0 < te < times[-1]})
    for te in event_times:
        idx = 0
        while idx < len(times) and times[idx] < te:
            idx += 1
        if idx >= len(times) or times[idx] != te:
            times.insert(idx, te)
            flags.insert(idx, False)

    segment_starts = [0]
    for te in event_times:
        segment_starts.append(times.index(te))
    segment_starts.append(len(times) - 1)
    return np.asarray(times), np.asarray(flags, dtype=np.uint8), segment_starts


def simulate(circuit, sim):
    """Integrate the circuit's flux equations and return sampled traces."""
    compiled = compile_circuit(circuit)
    volumes = compiled.initial_volumes.copy()

    times, flags, seg_starts = _schedule_boundaries(compiled, sim)
    n_samples = int(flags.sum())
    rec_t = np.zeros(n_samples)
    rec_p = np.zeros((n_samples, compiled.n_nodes))
    rec_v = np.zeros((n_samples, compiled.n_act))
    rec_q = np.zeros((n_samples, compiled.n_edges))
    clamp_t = np.zeros(_CLAMP_LOG_CAP)
    clamp_act = np.zeros(_CLAMP_LOG_CAP, dtype=np.intc)
    clamp_hi = np.zeros(_CLAMP_LOG_CAP, dtype=np.uint8)

    # initial sample, with the valve states in force at t = 0
    mask0 = compiled.open_mask(0.0)
    compiled.core.evaluate(volumes, mask0, rec_p[0], rec_q[0],
                           np.zeros(compiled.n_act))
    rec_t[0] = times[0]
    rec_v[0] = volumes

    row, nclamp = 1, 0
    for k in range(len(seg_starts) - 1):
        i0, i1 = seg_starts[k], seg_starts[k + 1]
        if i1 <= i0:
            continue
        mask = compiled.open_mask(times[i0])
        row, nclamp, bad, bad_t = compiled.core.integrate(
            volumes, mask, times[i0:i1 + 1], flags[i0:i1 + 1],
            rec_t, rec_p, rec_v, rec_q, row,
            clamp_t, clamp_act, clamp_hi, nclamp)
        if bad >= 0:
            raise NumericalDivergence(compiled.actuator_names[bad], bad_t)

    events = tuple(
        (clamp_t[i], compiled.actuator_names[clamp_act[i]],
         "high" if clamp_hi[i] else "low")
        for i in range(min(nclamp, _CLAMP_LOG_CAP)))
    return TraceSet(times=rec_t[:row],
                    node_names=tuple(compiled.node_names),
                    node_pressures=rec_p[:row],
                    actuator_names=tuple(compiled.actuator_names),
                    actuator_volumes=rec_v[:row],
                    edge_names=tuple(compiled.edge_names),
                    edge_flows=rec_q[:row],
                    clamp_events=events,
                    clamp_total=nclamp)


def step(circuit, volumes, dt, t=0.0):
    """One RK4 step; convenience wrapper over the kernel for tests and tools."""
    compiled = compile_circuit(circuit)
    vol = np.asarray(volumes, dtype=np.float64).copy()
    mask = compiled.open_mask(t)
    times = np.asarray([t, t + dt])
    flags = np.zeros(2, dtype=np.uint8)
    _, _, bad, bad_t = compiled.core.integrate(
        vol, mask, times, flags,
        np.zeros(0), np.zeros((0, compiled.n_nodes)),
        np.zeros((0, compiled.n_act)), np.zeros((0, compiled.n_edges)), 0,
        np.zeros(_CLAMP_LOG_CAP), np.zeros(_CLAMP_LOG_CAP, dtype=np.intc),
        np.zeros(_CLAMP_LOG_CAP, dtype=np.uint8), 0)
    if bad >= 0:
        raise NumericalDivergence(compiled.actuator_names[bad], bad_t)
    return vol


def net_flux(circuit, pressures, t=0.0):
    """Per-actuator volume rate for a given node-pressure vector.

    Reference implementation built directly on :func:`resistor_flow`; the
    integration kernel must agree with it (the test suite checks this).
    ``pressures`` maps node name to Pa, or is an array in declaration order.
    """
    index = circuit.node_index
    if isinstance(pressures, dict):
        p = [pressures[n.name] for n in circuit.nodes]
    else:
        p = list(pressures)
    flux = {n.name: 0.0 for n in circuit.actuators}
    for edge in circuit.edges:
        if isinstance(edge, ValveEdge):
            if not edge.schedule.is_open(t):
                continue
            q = edge.xi_open * _res.signed_sqrt(p[index[edge.src]] - p[index[edge.dst]])
        else:
            q = _res.resistor_flow(edge.spec, p[index[edge.src]],
                                   p[index[edge.dst]], edge.law)
        if edge.dst in flux:
            flux[edge.dst] += q
        if edge.src in flux:
            flux[edge.src] -= q
    return np.asarray([flux[n.name] for n in circuit.actuators])
