"""Reference splitting strategies and the bundled reference networks.

Four strategies bracket the design space:

* all-on-sensor: the full network runs on the sensor; only the class logits
  cross the bus (modeled as class-count bytes -- sub-microsecond, reported
  exactly rather than rounded to zero).
* all-on-aggregator: the raw image crosses the bus; for a V-sensor system the
  aggregator also runs every per-view layer V times.
* exhaustive layer-wise search: every boundary is costed, memory-infeasible
  heads are discarded, and the lowest overall latency wins (ties break toward
  the earlier boundary).
* split-at-fusion: multi-view networks split exactly at the ViewFuse layer;
  each sensor ships its own pre-fusion feature.

The bundled IR fixtures are analytic reconstructions of well-known
classification backbones (MobileNet-v2, MNASNet, EfficientNet-B0 and
MobileNet-v3 without their squeeze-excite blocks, ResNet-18/152 and
RegNetX-3.2GF without the residual projection convs, VGG-11), faithful
enough that MAC/parameter totals land within a few percent of the published
models.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .hwmodel import CostReport, HardwareConfig, evaluate
from .netgraph import NetworkIR, network_from_json, split_at

__all__ = [
    "SplitDecision",
    "NoFusionLayerError",
    "all_on_sensor",
    "all_on_aggregator",
    "neurosurgeon_split",
    "split_at_fusion",
    "list_reference_networks",
    "load_reference_network",
    "fixture_path",
    "BASELINE_CSV_HEADER",
    "baseline_csv_row",
]


class NoFusionLayerError(ValueError):
    """split-at-fusion asked of a network without a ViewFuse layer."""


@dataclass(frozen=True, slots=True)
class SplitDecision:
    strategy: str
    split_index: int
    report: CostReport
    feasible: bool


def _decide(strategy: str, net: NetworkIR, hw: HardwareConfig, index: int,
            deployment: str) -> SplitDecision:
    head, tail, _ = split_at(net, index)
    report = evaluate(head, tail, hw, deployment=deployment)
    return SplitDecision(strategy, index, report, report.mem_ok)


def _deployment(net: NetworkIR, override: str | None) -> str:
    if override is not None:
        return override
    return "multi" if any(l.kind == "ViewFuse" for l in net.layers) else "single"


def all_on_sensor(net: NetworkIR, hw: HardwareConfig,
                  deployment: str | None = None) -> SplitDecision:
    return _decide("all-on-sen", net, hw, len(net.layers), _deployment(net, deployment))


def all_on_aggregator(net: NetworkIR, hw: HardwareConfig,
                      deployment: str | None = None) -> SplitDecision:
    return _decide("all-on-agg", net, hw, 0, _deployment(net, deployment))


def neurosurgeon_split(net: NetworkIR, hw: HardwareConfig,
                       deployment: str | None = None) -> SplitDecision:
    """Exhaustively cost every split boundary; best feasible overall latency.

    Boundaries whose head would exceed the sensor memory are discarded no
    matter how fast they are. Index 0 is always feasible (empty head), so the
    scan never comes back empty.
    """
    mode = _deployment(net, deployment)
    fuse = next((i for i, l in enumerate(net.layers) if l.kind == "ViewFuse"), None)
    last = fuse if fuse is not None else len(net.layers)
    best: SplitDecision | None = None
    for index in range(last + 1):
        decision = _decide("neurosurgeon", net, hw, index, mode)
        if not decision.feasible:
            continue
        if best is None or decision.report.overall < best.report.overall:
            best = decision
    assert best is not None  # index 0 has an empty, trivially feasible head
    return best


def split_at_fusion(net: NetworkIR, hw: HardwareConfig) -> SplitDecision:
    """Split a multi-view network exactly at its ViewFuse layer."""
    fuse = next((i for i, l in enumerate(net.layers) if l.kind == "ViewFuse"), None)
    if fuse is None:
        raise NoFusionLayerError("network has no ViewFuse layer to split at")
    return _decide("split-at-fusion", net, hw, fuse, "multi")


STRATEGIES = {
    "all-on-sen": all_on_sensor,
    "all-on-agg": all_on_aggregator,
    "neurosurgeon": neurosurgeon_split,
    "split-at-fusion": lambda net, hw, deployment=None: split_at_fusion(net, hw),
}


# Bundled fixtures -----------------------------------------------------------

def fixture_path(relative: str):
    """Traversable path of a bundled fixture, e.g. fixture_path("ir/vgg11_multiview.json")."""
    return resources.files("edgesplit.fixtures").joinpath(relative)


def list_reference_networks() -> list[str]:
    root = resources.files("edgesplit.fixtures").joinpath("ir")
    return sorted(p.name[:-len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_reference_network(name: str) -> NetworkIR:
    path = fixture_path(f"ir/{name}.json")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no bundled network named {name!r}; "
                       f"available: {list_reference_networks()}") from None
    return network_from_json(text)


BASELINE_CSV_HEADER = ("method,backbone,head_params,head_ops,head_peak_bytes,head_latency_ms,"
                       "comm_bytes,comm_latency_ms,tail_params,tail_ops,tail_latency_ms,"
                       "overall_ms")


def baseline_csv_row(method: str, backbone: str, decision: SplitDecision) -> str:
    r = decision.report
    fields = [
        method,
        backbone,
        str(r.head_params),
        str(r.head_ops),
        f"{r.peak_mem_sen:.9g}",
        f"{r.t_sen * 1e3:.9g}",
        f"{r.comm_bytes:.9g}",
        f"{r.t_comm * 1e3:.9g}",
        str(r.tail_params),
        str(r.tail_ops),
        f"{r.t_agg * 1e3:.9g}",
        f"{r.overall * 1e3:.9g}",
    ]
    return ",".join(fields)
