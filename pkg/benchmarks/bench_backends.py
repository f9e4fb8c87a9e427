#!/usr/bin/env python3
"""Benchmark the compiled integration kernel against the pure-Python fallback.

Runs the same four-actuator series chain (the closed-chain scenario) through
both backends, checks the results are bit-for-bit identical, and reports the
speedup.  Usage: python benchmarks/bench_backends.py [t_end_seconds]
"""

import sys
import time

import numpy as np

import siaflow as sf
from siaflow import _core_py
from siaflow import circuit as circuit_mod

try:
    from siaflow import _core
except ImportError:
    _core = None


def build_circuit():
    act = sf.ActuatorSpec(volume_capacity=1.04e-3,
                          spring_coeffs=(9.6e6, 0.0, 8e13))
    names = ["sia1", "sia2", "sia3", "sia4"]
    nodes = [sf.Source("src", 50e3)] + [sf.ActuatorNode(n, act) for n in names]
    edges = []
    upstream = "src"
    for i, (name, plates) in enumerate(zip(names, (1, 3, 5, 7)), start=1):
        edges.append(sf.ResistorEdge(f"r{i}", upstream, name,
                                     sf.ResistorSpec(n_plates=plates)))
        upstream = name
    return sf.Circuit(nodes, edges)


def run_with(core_cls, circuit, sim):
    original = circuit_mod.Core
    circuit_mod.Core = core_cls
    try:
        start = time.perf_counter()
        trace = sf.simulate(circuit, sim)
        elapsed = time.perf_counter() - start
    finally:
        circuit_mod.Core = original
    return trace, elapsed


def main():
    t_end = float(sys.argv[1]) if len(sys.argv) > 1 else 20.0
    sim = sf.SimConfig(dt=1e-3, t_end=t_end, record_every=10)
    circuit = build_circuit()
    steps = int(t_end / sim.dt)

    print(f"series chain, 4 actuators, dt={sim.dt:g} s, "
          f"t_end={t_end:g} s ({steps} steps)")

    slow_trace, t_py = run_with(_core_py.Core, circuit, sim)
    print(f"  python : {t_py * 1e3:9.1f} ms   "
          f"({steps / t_py:,.0f} steps/s)")

    if _core is None:
        print("  cython : not built (pip install -e . compiles it)")
        return 0

    fast_trace, t_cy = run_with(_core.Core, circuit, sim)
    print(f"  cython : {t_cy * 1e3:9.1f} ms   "
          f"({steps / t_cy:,.0f} steps/s)")
    print(f"  speedup: {t_py / t_cy:.1f}x")

    identical = (np.array_equal(fast_trace.node_pressures, slow_trace.node_pressures)
                 and np.array_equal(fast_trace.actuator_volumes,
                                    slow_trace.actuator_volumes)
                 and np.array_equal(fast_trace.edge_flows, slow_trace.edge_flows))
    print(f"  results bit-identical: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
