"""Analytical cost model of a multi-sensor head-mounted inference system.

The system consists of V homogeneous smart sensors, one aggregator, and a
shared serial bus. The head of a split network runs on each sensor's NPU, the
transmitted feature crosses the bus, and the tail runs on the aggregator:

    overall latency = T_sen + T_comm + T_agg

with

* ``T_sen  = head OPs / comp_sen`` -- sensors run in parallel, so the head
  cost is per sensor and is NOT multiplied by V;
* ``T_comm = per-sensor feature bytes / (bw_total / V)`` -- the bus is shared,
  each sensor is allocated an equal bandwidth slice;
* ``T_agg  = aggregator OPs / comp_agg`` -- in multi-view deployments the
  aggregator runs any pre-fusion tail layers once per view, plus the fused
  tail once.

Default parameters model a 16nm sensor NPU (125 GOP/s, 2 MB), a 7nm
aggregator NPU (1.25 TOP/s, unconstrained memory) and a 1.2 Gb/s bus, with
weights and activations quantized to 8 bits.

Peak sensor memory is ``M = M_W + M_A``: all head weights resident, plus the
maximum over sequential execution steps of the live activation set (step
input + step output + any tensor held for a pending residual add). MBConv
blocks are stepped sub-conv by sub-conv so the expanded tensor is charged.
One deliberate buffer-allocation convention: a stride-2 *depthwise* step
allocates its output at input resolution (the kernel walks the full input
grid, and the modeled allocator does not shrink the destination line buffer),
so such steps charge ``2 * channels * spatial_in^2`` activation bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .netgraph import (NetworkIR, ShapeMismatchError, count_ops, count_params,
                       infer_shapes, layer_steps, per_layer_ops)

__all__ = [
    "HardwareConfig",
    "CostReport",
    "DEFAULT_SINGLE_VIEW_HW",
    "DEFAULT_MULTI_VIEW_HW",
    "compute_latency",
    "comm_latency",
    "peak_memory",
    "evaluate",
    "hardware_to_dict",
    "hardware_from_dict",
    "load_hardware",
    "COST_CSV_HEADER",
    "cost_csv_row",
]


@dataclass(frozen=True, slots=True)
class HardwareConfig:
    """Sensor / aggregator / bus parameters.

    Throughputs are in OP/s (1 OP = 1 MAC), ``bw_total`` is the shared-bus
    bandwidth in bytes/s, ``mem_sen`` the per-sensor memory budget in bytes.
    """

    comp_sen: float = 125e9
    comp_agg: float = 1.25e12
    bw_total: float = 1.2e9 / 8.0
    mem_sen: float = 2e6
    num_sensors: int = 4
    act_bits: int = 8
    weight_bits: int = 8

    def __post_init__(self):
        if min(self.comp_sen, self.comp_agg, self.bw_total, self.mem_sen) <= 0:
            raise ValueError("hardware rates and memory must be strictly positive")
        if self.num_sensors < 1:
            raise ValueError("num_sensors must be >= 1")
        if self.act_bits < 1 or self.weight_bits < 1:
            raise ValueError("bit widths must be >= 1")


# The single-view system allocates the bus across 4 sensors; the multi-view
# 3D-classification system has 12.
DEFAULT_SINGLE_VIEW_HW = HardwareConfig(num_sensors=4)
DEFAULT_MULTI_VIEW_HW = HardwareConfig(num_sensors=12)


@dataclass(frozen=True, slots=True)
class CostReport:
    """Latency/memory breakdown of one split placement.

    Times are in seconds; ``overall == t_sen + t_comm + t_agg`` exactly.
    ``tail_ops`` is the effective aggregator workload (pre-fusion tail layers
    already multiplied by the view count in multi-view deployments).
    """

    t_sen: float
    t_comm: float
    t_agg: float
    overall: float
    peak_mem_sen: float
    head_params: int
    head_ops: int
    tail_params: int
    tail_ops: int
    comm_bytes: float
    mem_ok: bool

    def to_dict(self) -> dict:
        return {
            "t_sen_ms": self.t_sen * 1e3,
            "t_comm_ms": self.t_comm * 1e3,
            "t_agg_ms": self.t_agg * 1e3,
            "overall_ms": self.overall * 1e3,
            "peak_mem_bytes": self.peak_mem_sen,
            "head_params": self.head_params,
            "head_ops": self.head_ops,
            "tail_params": self.tail_params,
            "tail_ops": self.tail_ops,
            "comm_bytes": self.comm_bytes,
            "mem_ok": self.mem_ok,
        }


ZERO_REPORT = CostReport(0.0, 0.0, 0.0, 0.0, 0.0, 0, 0, 0, 0, 0.0, True)

COST_CSV_HEADER = ("t_sen_ms,t_comm_ms,t_agg_ms,overall_ms,peak_mem_bytes,"
                   "head_ops,tail_ops,comm_bytes,mem_ok")


def cost_csv_row(report: CostReport) -> str:
    fields = [
        f"{report.t_sen * 1e3:.9g}",
        f"{report.t_comm * 1e3:.9g}",
        f"{report.t_agg * 1e3:.9g}",
        f"{report.overall * 1e3:.9g}",
        f"{report.peak_mem_sen:.9g}",
        str(report.head_ops),
        str(report.tail_ops),
        f"{report.comm_bytes:.9g}",
        str(int(report.mem_ok)),
    ]
    return ",".join(fields)


def compute_latency(ops: float, throughput: float) -> float:
    """Seconds to execute ``ops`` MACs on a processor of ``throughput`` OP/s."""
    if throughput <= 0:
        raise ValueError("throughput must be positive")
    return ops / throughput


def feature_bytes(feature_shape: tuple[int, int], hw: HardwareConfig) -> float:
    """Per-sensor payload size of a (channels, spatial) feature."""
    c, s = feature_shape
    return c * s * s * hw.act_bits / 8.0


def comm_latency(feature_shape: tuple[int, int], hw: HardwareConfig) -> float:
    """Bus time for every sensor to upload its feature.

    V sensors serialize on the shared bus, so each sees ``bw_total / V``;
    equivalently the bus carries ``V * bytes`` at full bandwidth.
    """
    return feature_bytes(feature_shape, hw) / (hw.bw_total / hw.num_sensors)


def peak_memory(head: NetworkIR, hw: HardwareConfig) -> float:
    """Peak sensor memory in bytes: resident weights + max live activations."""
    if len(head.layers) == 0:
        return 0.0
    act = hw.act_bits / 8.0
    weights = count_params(head) * hw.weight_bits / 8.0
    shapes = infer_shapes(head)
    peak_act = 0.0
    for layer, (in_shape, _) in zip(head.layers, shapes):
        steps = layer_steps(layer, in_shape[1])
        block_in = in_shape[0] * in_shape[1] * in_shape[1]
        for j, step in enumerate(steps):
            out_s = step.in_s if (step.depthwise and step.stride > 1) else step.out_s
            live = step.in_ch * step.in_s ** 2 + step.out_ch * out_s ** 2
            if layer.residual and j > 0:
                live += block_in  # block input pending for the skip add
            peak_act = max(peak_act, live * act)
    return weights + peak_act


def _fuse_index(net: NetworkIR) -> int | None:
    for i, layer in enumerate(net.layers):
        if layer.kind == "ViewFuse":
            return i
    return None


def evaluate(head: NetworkIR, tail: NetworkIR, hw: HardwareConfig,
             deployment: str = "single") -> CostReport:
    """Cost a (head, tail) placement under a hardware configuration.

    ``deployment`` is "single" or "multi". Multi-view placements require the
    ViewFuse layer to sit in the tail (sensors only ever see their own view)
    and check that its view count matches ``hw.num_sensors``.
    """
    if deployment not in ("single", "multi"):
        raise ValueError(f"unknown deployment {deployment!r}")
    if len(head.layers) == 0 and len(tail.layers) == 0:
        return ZERO_REPORT

    if len(head.layers) > 0:
        head_shapes = infer_shapes(head)
        feature = head_shapes[-1][1]
    else:
        feature = (tail.input_channels, tail.input_resolution)
    if len(tail.layers) > 0 and (tail.input_channels, tail.input_resolution) != feature:
        raise ShapeMismatchError(len(head.layers),
                                 f"tail expects {(tail.input_channels, tail.input_resolution)}, "
                                 f"head produces {feature}")

    head_fuse = _fuse_index(head)
    tail_fuse = _fuse_index(tail)
    if deployment == "multi":
        if head_fuse is not None:
            raise ShapeMismatchError(head_fuse, "ViewFuse cannot run on a sensor")
        if tail_fuse is None:
            raise ValueError("multi-view evaluation requires a ViewFuse layer in the tail")
        fuse_layer = tail.layers[tail_fuse]
        if fuse_layer.num_views != hw.num_sensors:
            raise ShapeMismatchError(len(head.layers) + tail_fuse,
                                     f"ViewFuse joins {fuse_layer.num_views} views, "
                                     f"hardware has {hw.num_sensors} sensors")
    elif head_fuse is not None or tail_fuse is not None:
        raise ValueError("single-view evaluation cannot cost a ViewFuse layer")

    head_ops = count_ops(head)
    head_params = count_params(head)
    tail_params = count_params(tail)
    if deployment == "multi" and len(tail.layers) > 0:
        ops = per_layer_ops(tail)
        per_view = sum(ops[:tail_fuse])  # run once per view on the aggregator
        fused = sum(ops[tail_fuse:])
        tail_ops = hw.num_sensors * per_view + fused
    else:
        tail_ops = count_ops(tail)

    t_sen = compute_latency(head_ops, hw.comp_sen)
    t_comm = comm_latency(feature, hw)  # all-on-sensor: the feature is the logits
    t_agg = compute_latency(tail_ops, hw.comp_agg)
    peak = peak_memory(head, hw)
    return CostReport(
        t_sen=t_sen,
        t_comm=t_comm,
        t_agg=t_agg,
        overall=t_sen + t_comm + t_agg,
        peak_mem_sen=peak,
        head_params=head_params,
        head_ops=head_ops,
        tail_params=tail_params,
        tail_ops=tail_ops,
        comm_bytes=feature_bytes(feature, hw),
        mem_ok=peak <= hw.mem_sen,
    )


# JSON wire format for HardwareConfig; field names are part of the contract.

def hardware_to_dict(hw: HardwareConfig) -> dict:
    return {
        "comp_sen": hw.comp_sen,
        "comp_agg": hw.comp_agg,
        "bw_total": hw.bw_total,
        "mem_sen": hw.mem_sen,
        "num_sensors": hw.num_sensors,
        "act_bits": hw.act_bits,
        "weight_bits": hw.weight_bits,
    }


def hardware_from_dict(data: dict) -> HardwareConfig:
    known = {"comp_sen", "comp_agg", "bw_total", "mem_sen", "num_sensors",
             "act_bits", "weight_bits"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"hardware config: unknown field {sorted(unknown)[0]!r}")
    kwargs = {}
    for key in known & set(data):
        value = data[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"hardware config: field {key!r} must be numeric")
        kwargs[key] = int(value) if key in ("num_sensors", "act_bits", "weight_bits") else float(value)
    return HardwareConfig(**kwargs)


def load_hardware(path) -> HardwareConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return hardware_from_dict(json.load(fh))


def save_hardware(hw: HardwareConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hardware_to_dict(hw), fh, indent=2, sort_keys=True)
        fh.write("\n")
