"""Event-driven simulation of one training step on the accelerator array.

One step runs forward over all layers, then backward and gradient in
reverse, under a plan matrix. Work is evenly split by any partition, so
compute time per layer and phase is the phase's FLOPs over the array's
aggregate throughput (or the per-accelerator DRAM streaming time if that
is larger). Communication events are generated per hierarchy level from
the cost model and routed on the topology with per-link FIFO
serialization. The array computes in lockstep and logical exchanges
drain one at a time (computation and communication never overlap), so
the only event-level concurrency is between the parallel pair flows
inside one transfer, which contend per link.

Energy charges arithmetic (half adds, half multiplies), SRAM traffic with
a row-stationary reuse factor, DRAM traffic per resident tensor copy
(data-parallel levels replicate kernels, model-parallel levels replicate
the produced feature maps), remote transfers at DRAM-class cost per word,
and one add per weight element for the update.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .commcost import (PAIR_FACTOR, Parallelism, inter_backward_elements,
                       inter_forward_elements, intra_elements)
from .errors import CapacityError, TopologyMismatchError, ValidationError
from .netspec import LayerShapes, NetworkModel, infer_shapes
from .planner import PlanMatrix, level_shapes
from .topology import Topology, level_bandwidth, level_flows

FORWARD = "forward"
BACKWARD = "backward"
GRADIENT = "gradient"
PHASES = (FORWARD, BACKWARD, GRADIENT)

_PJ = 1e-12


@dataclass(frozen=True)
class HardwareConfig:
    """Accelerator-array constants (defaults model a stacked-DRAM node)."""

    compute_throughput: float = 84.0e9   # FLOP/s per accelerator
    clock: float = 250.0e6               # Hz
    dram_bandwidth: float = 320.0e9      # bytes/s per accelerator
    dram_capacity: float = 8.0e9         # bytes per accelerator
    link_bandwidth: float = 1600.0e6     # bits/s per leaf link
    energy_add32: float = 0.9            # pJ per 32-bit add
    energy_mult32: float = 3.7           # pJ per 32-bit multiply
    energy_sram32: float = 5.0           # pJ per 32-bit SRAM access
    energy_dram32: float = 640.0         # pJ per 32-bit DRAM access
    energy_remote32: float = 640.0       # pJ per 32-bit remote transfer
    sram_reuse: float = 12.0             # row-stationary on-chip reuse factor
    precision_bytes: int = 4

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValidationError(f"hardware field {f.name} must be positive")

    def with_overrides(self, overrides: dict) -> "HardwareConfig":
        names = {f.name for f in fields(self)}
        unknown = set(overrides) - names
        if unknown:
            raise ValidationError(
                f"unknown hardware fields: {', '.join(sorted(unknown))}")
        return replace(self, **overrides)


@dataclass(frozen=True)
class PhaseRow:
    layer: int
    phase: str
    compute_time: float
    comm_time: float
    comm_bytes: int

    def payload(self) -> dict:
        return {"layer": self.layer, "phase": self.phase,
                "compute_time": self.compute_time,
                "comm_time": self.comm_time, "comm_bytes": self.comm_bytes}


@dataclass(frozen=True)
class SimReport:
    network: str
    topology: str
    node_count: int
    steps: int
    step_time: float
    energy_joules: float
    comm_bytes: int
    total_flops: int
    per_layer: tuple[PhaseRow, ...]

    def payload(self) -> dict:
        return {
            "network": self.network, "topology": self.topology,
            "node_count": self.node_count, "steps": self.steps,
            "step_time": self.step_time, "energy_joules": self.energy_joules,
            "comm_bytes": self.comm_bytes, "total_flops": self.total_flops,
            "per_layer": [row.payload() for row in self.per_layer],
        }


def _dram_words(geom, ndp: int, nmp: int) -> dict[str, tuple[int, int]]:
    """(array-total, per-accelerator) DRAM words moved per phase.

    Inputs and propagated errors are fully partitioned; kernels are
    replicated across dp levels; the raw multiply output (partial-sum
    buffer) and the incoming output-side error are replicated across mp
    levels.
    """
    nodes = 2 ** (ndp + nmp)
    f_in = geom.elems_input
    w = geom.elems_weight
    raw = geom.elems_raw_output
    e_out = geom.elems_output
    per_acc = {
        FORWARD: f_in // nodes + w // (2 ** nmp) + raw // (2 ** ndp),
        BACKWARD: e_out // (2 ** ndp) + w // (2 ** nmp) + f_in // nodes,
        GRADIENT: f_in // nodes + e_out // (2 ** ndp) + w // (2 ** nmp),
    }
    total = {
        FORWARD: f_in + w * (2 ** ndp) + raw * (2 ** nmp),
        BACKWARD: e_out * (2 ** nmp) + w * (2 ** ndp) + f_in,
        GRADIENT: f_in + e_out * (2 ** nmp) + w * (2 ** ndp),
    }
    return {ph: (total[ph], per_acc[ph]) for ph in PHASES}


@dataclass
class _Transfer:
    layer: int
    phase: str
    # (level, per-pair bytes) legs, executed finest level first
    legs: list[tuple[int, int]]
    report_bytes: int


def _plan_transfers(levels: list[LayerShapes], matrix: PlanMatrix,
                    precision: int, n_layers: int):
    """Per-(layer, phase) communication volumes at every hierarchy level."""
    fwd_psum = [[] for _ in range(n_layers)]
    fwd_boundary = [[] for _ in range(n_layers)]
    bwd_boundary = [[] for _ in range(n_layers)]
    grad_psum = [[] for _ in range(n_layers)]
    for h, (row, shapes) in enumerate(zip(matrix.rows, levels)):
        for l in range(n_layers):
            if row[l] is Parallelism.MP:
                fwd_psum[l].append((h, intra_elements(shapes, l, Parallelism.MP)))
            else:
                grad_psum[l].append((h, intra_elements(shapes, l, Parallelism.DP)))
            if l >= 1:
                e = inter_forward_elements(shapes, l, row[l - 1], row[l])
                if e:
                    fwd_boundary[l].append((h, e))
            if l + 1 < n_layers:
                e = inter_backward_elements(shapes, l + 1, row[l], row[l + 1])
                if e:
                    bwd_boundary[l].append((h, e))

    def build(layer: int, phase: str, vols: list[tuple[int, int]]) -> _Transfer | None:
        legs = [(h, e * precision * PAIR_FACTOR) for h, e in vols if e]
        if not legs:
            return None
        # finest pairs exchange first, then progressively coarser groups
        legs.sort(key=lambda leg: -leg[0])
        report = sum((2 ** h) * b for h, b in legs)
        return _Transfer(layer, phase, legs, report)

    return fwd_psum, fwd_boundary, bwd_boundary, grad_psum, build


def simulate_step(model: NetworkModel, matrix: PlanMatrix, hw: HardwareConfig,
                  topo: Topology) -> SimReport:
    """One mini-batch step: makespan, energy, and communication volumes."""
    if matrix.levels != topo.levels:
        raise TopologyMismatchError(
            f"plan has {matrix.levels} levels but topology hosts "
            f"{topo.node_count} nodes")
    shapes = infer_shapes(model)
    if len(matrix.rows) and any(len(row) != len(shapes) for row in matrix.rows):
        raise ValidationError("plan row length does not match the network")
    levels = level_shapes(shapes, matrix.rows, matrix.mode)
    nodes = topo.node_count
    precision = shapes.precision_bytes

    ndp = [sum(row[l] is Parallelism.DP for row in matrix.rows)
           for l in range(len(shapes))]
    nmp = [matrix.levels - ndp[l] for l in range(len(shapes))]

    # Capacity: peak per-accelerator working set of any single layer phase.
    peak_words = 0
    dram_total = {}
    dram_acc = {}
    for l, geom in enumerate(shapes.layers):
        words = _dram_words(geom, ndp[l], nmp[l])
        for ph, (total, acc) in words.items():
            dram_total[(l, ph)] = total
            dram_acc[(l, ph)] = acc
            peak_words = max(peak_words, acc)
    if peak_words * precision > hw.dram_capacity:
        raise CapacityError(
            f"peak per-accelerator working set "
            f"{peak_words * precision / 1e9:.2f} GB exceeds capacity "
            f"{hw.dram_capacity / 1e9:.2f} GB")

    phase_flops = {}
    for l, geom in enumerate(shapes.layers):
        phase_flops[(l, FORWARD)] = geom.flops_forward
        phase_flops[(l, BACKWARD)] = geom.flops_backward
        phase_flops[(l, GRADIENT)] = geom.flops_gradient

    def compute_seconds(l: int, phase: str) -> float:
        flop_time = phase_flops[(l, phase)] / (nodes * hw.compute_throughput)
        dram_time = dram_acc[(l, phase)] * precision / hw.dram_bandwidth
        return max(flop_time, dram_time)

    fwd_psum, fwd_boundary, bwd_boundary, grad_psum, build = _plan_transfers(
        levels, matrix, precision, len(shapes))

    # Program order of one step; transfers bind to the layer/phase they serve.
    ops: list[tuple[str, object]] = []
    L = len(shapes)
    for l in range(L):
        if l >= 1:
            ops.append(("xfer", build(l, FORWARD, fwd_boundary[l])))
        ops.append(("compute", (l, FORWARD)))
        ops.append(("xfer", build(l, FORWARD, fwd_psum[l])))
    for l in range(L - 1, -1, -1):
        if l < L - 1:
            ops.append(("xfer", build(l, BACKWARD, bwd_boundary[l])))
        ops.append(("compute", (l, BACKWARD)))
        ops.append(("compute", (l, GRADIENT)))
        ops.append(("xfer", build(l, GRADIENT, grad_psum[l])))

    # The array computes in lockstep and the network carries one logical
    # exchange at a time: tasks execute in program order. Event-level
    # concurrency remains inside a transfer, where the parallel pair flows
    # of each leg contend on individual links (FIFO per link).
    comm_time: dict[tuple[int, str], float] = {}
    comm_bytes: dict[tuple[int, str], int] = {}
    now = 0.0
    for kind, op in ops:
        if kind == "compute":
            l, phase = op
            now += compute_seconds(l, phase)
            continue
        if op is None:
            continue
        ready = now
        for h, pair_bytes in op.legs:
            bw = level_bandwidth(topo, hw.link_bandwidth, h)
            link_load: dict = {}
            for pair_index in range(2 ** h):
                for link, load in level_flows(topo, h, pair_index, pair_bytes):
                    link_load[link] = link_load.get(link, 0.0) + load
            now += max(link_load.values()) / bw if link_load else 0.0
        key = (op.layer, op.phase)
        comm_time[key] = comm_time.get(key, 0.0) + (now - ready)
        comm_bytes[key] = comm_bytes.get(key, 0) + op.report_bytes

    step_time = now

    total_flops = shapes.total_flops
    total_macs = total_flops // 2
    total_comm_bytes = sum(comm_bytes.values())
    total_dram_words = sum(dram_total.values())
    weight_elems = sum(g.elems_weight for g in shapes.layers)
    energy = (
        total_macs * (hw.energy_add32 + hw.energy_mult32) * _PJ
        + total_macs * 3.0 / hw.sram_reuse * hw.energy_sram32 * _PJ
        + total_dram_words * hw.energy_dram32 * _PJ
        + (total_comm_bytes / precision) * hw.energy_remote32 * _PJ
        + weight_elems * hw.energy_add32 * _PJ
    )

    rows = tuple(
        PhaseRow(l, phase,
                 compute_seconds(l, phase),
                 comm_time.get((l, phase), 0.0),
                 comm_bytes.get((l, phase), 0))
        for l in range(L) for phase in PHASES)
    return SimReport(model.name, topo.kind, nodes, 1, step_time, energy,
                     total_comm_bytes, total_flops, rows)


def simulate_training(model: NetworkModel, matrix: PlanMatrix,
                      hw: HardwareConfig, topo: Topology,
                      steps: int) -> SimReport:
    """Aggregate over identical steps (the simulator is stateless per step)."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    one = simulate_step(model, matrix, hw, topo)
    if steps == 1:
        return one
    rows = tuple(replace(r, compute_time=r.compute_time * steps,
                         comm_time=r.comm_time * steps,
                         comm_bytes=r.comm_bytes * steps)
                 for r in one.per_layer)
    return replace(one, steps=steps, step_time=one.step_time * steps,
                   energy_joules=one.energy_joules * steps,
                   comm_bytes=one.comm_bytes * steps,
                   total_flops=one.total_flops * steps, per_layer=rows)
