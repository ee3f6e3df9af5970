"""Sequential network IR: layer descriptors, shape inference, MAC/parameter
counting, and splitting into an on-sensor head and an on-aggregator tail.

The IR is deliberately minimal: an ordered list of layer descriptors plus the
input shape. It carries no weights and is never executed; it exists so that
analytic cost models (operation counts, parameter counts, live-activation
footprints) and split enumeration can run in microseconds.

Conventions used by every counter in this package:

* OPs are multiply-accumulates (1 MAC = 1 OP). Elementwise adds, activations
  and normalizations are not counted.
* Convolutions are bias-free; each conv carries a normalization layer that
  contributes ``2 * out_channels`` parameters and zero OPs. Fully connected
  layers carry a bias.
* Feature maps are square; ``spatial_out = ceil(spatial_in / stride)``.
* An MBConv (inverted-residual) block expands to ``round(e * in_ch)``
  channels internally via a 1x1 conv, applies a depthwise conv (which owns
  the stride), and projects back with a second 1x1 conv. ``e == 1`` blocks
  have no expansion conv.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

__all__ = [
    "LayerDesc",
    "NetworkIR",
    "Step",
    "ShapeMismatchError",
    "LAYER_KINDS",
    "infer_shapes",
    "layer_steps",
    "per_layer_ops",
    "count_ops",
    "per_layer_params",
    "count_params",
    "split_at",
    "network_to_dict",
    "network_from_dict",
    "network_to_json",
    "network_from_json",
    "load_network",
    "save_network",
]

LAYER_KINDS = (
    "Conv",
    "DepthwiseConv",
    "MBConv",
    "Pool",
    "FullyConnected",
    "ConvReduce",
    "ConvRecover",
    "ViewFuse",
)


class ShapeMismatchError(ValueError):
    """An IR violates a structural invariant; carries the offending layer index."""

    def __init__(self, layer_index: int, message: str):
        self.layer_index = layer_index
        super().__init__(f"layer {layer_index}: {message}")


@dataclass(frozen=True, slots=True)
class LayerDesc:
    """One layer of the sequential IR.

    ``expansion`` is only meaningful for MBConv (may be a non-integer ratio;
    the expanded width is ``round(expansion * in_ch)``). ``residual`` marks an
    identity skip around the layer and requires ``stride == 1`` and
    ``in_ch == out_ch``. ``groups`` (Conv only) models grouped convolutions;
    DepthwiseConv is the ``groups == channels`` special case.

    For Pool, ``k == 0`` means global average pooling (output is 1x1);
    ``k >= 2`` is a spatial window pool. ViewFuse concatenates the features
    of ``out_ch // in_ch`` views along the channel axis.
    """

    kind: str
    in_ch: int
    out_ch: int
    k: int = 1
    stride: int = 1
    expansion: float | None = None
    residual: bool = False
    groups: int = 1

    @property
    def hidden_ch(self) -> int:
        """MBConv expanded width."""
        if self.kind != "MBConv":
            raise ValueError("hidden_ch is defined for MBConv layers only")
        return max(1, round((self.expansion if self.expansion is not None else 1.0) * self.in_ch))

    @property
    def num_views(self) -> int:
        """View count of a ViewFuse layer (out_ch / in_ch)."""
        if self.kind != "ViewFuse":
            raise ValueError("num_views is defined for ViewFuse layers only")
        return self.out_ch // self.in_ch


@dataclass(frozen=True, slots=True)
class NetworkIR:
    """Ordered layer list plus the network input shape."""

    layers: tuple[LayerDesc, ...]
    input_channels: int
    input_resolution: int

    def __len__(self) -> int:
        return len(self.layers)


@dataclass(frozen=True, slots=True)
class Step:
    """One sequential execution step (a layer, or one MBConv sub-conv).

    ``depthwise`` flags steps whose conv is channelwise; the memory model
    treats stride-2 depthwise outputs specially (see hwmodel).
    """

    in_ch: int
    in_s: int
    out_ch: int
    out_s: int
    stride: int
    macs: int
    params: int
    depthwise: bool = False


def _validate_layer(i: int, layer: LayerDesc) -> None:
    if layer.kind not in LAYER_KINDS:
        raise ShapeMismatchError(i, f"unknown layer kind {layer.kind!r}")
    if layer.in_ch < 1 or layer.out_ch < 1:
        raise ShapeMismatchError(i, "channel counts must be positive")
    if layer.stride not in (1, 2):
        raise ShapeMismatchError(i, f"stride must be 1 or 2, got {layer.stride}")
    if layer.residual and (layer.stride != 1 or layer.in_ch != layer.out_ch):
        raise ShapeMismatchError(i, "residual requires stride 1 and in_ch == out_ch")
    if layer.kind in ("ConvReduce", "ConvRecover") and (layer.k != 1 or layer.stride != 1):
        raise ShapeMismatchError(i, f"{layer.kind} must have k=1 and stride=1")
    if layer.kind == "DepthwiseConv" and layer.in_ch != layer.out_ch:
        raise ShapeMismatchError(i, "DepthwiseConv requires in_ch == out_ch")
    if layer.kind == "ViewFuse":
        if layer.out_ch % layer.in_ch != 0:
            raise ShapeMismatchError(i, "ViewFuse out_ch must be a multiple of in_ch")
        if layer.stride != 1:
            raise ShapeMismatchError(i, "ViewFuse does not stride")
    if layer.kind == "FullyConnected" and (layer.k != 1 or layer.stride != 1):
        raise ShapeMismatchError(i, "FullyConnected must have k=1 and stride=1")
    if layer.kind == "Conv":
        if layer.groups < 1 or layer.in_ch % layer.groups or layer.out_ch % layer.groups:
            raise ShapeMismatchError(i, "groups must divide in_ch and out_ch")
    elif layer.groups != 1:
        raise ShapeMismatchError(i, "groups is only configurable for Conv layers")
    if layer.kind == "MBConv":
        e = layer.expansion if layer.expansion is not None else 1.0
        if e <= 0:
            raise ShapeMismatchError(i, "MBConv expansion must be positive")
    if layer.kind == "Pool" and layer.k == 0 and layer.stride != 1:
        raise ShapeMismatchError(i, "global Pool takes stride 1")


def _conv_step(c_in: int, c_out: int, k: int, stride: int, s_in: int, groups: int = 1,
               depthwise: bool = False) -> Step:
    s_out = math.ceil(s_in / stride)
    macs = k * k * c_in * c_out * s_out * s_out // groups
    params = k * k * c_in * c_out // groups + 2 * c_out
    return Step(c_in, s_in, c_out, s_out, stride, macs, params, depthwise)


@functools.lru_cache(maxsize=65536)
def layer_steps(layer: LayerDesc, s_in: int) -> tuple[Step, ...]:
    """Decompose a layer into its sequential execution steps at spatial s_in.

    This is the single source of truth for per-layer OPs, parameters and
    tensor shapes; shape inference, the counters and the peak-memory model
    all consume it. Memoized: layer descriptors are immutable values and the
    same (layer, spatial) pairs recur constantly during search.
    """
    kind = layer.kind
    if kind in ("Conv", "ConvReduce", "ConvRecover"):
        return (_conv_step(layer.in_ch, layer.out_ch, layer.k, layer.stride, s_in,
                           groups=layer.groups),)
    if kind == "DepthwiseConv":
        c = layer.in_ch
        s_out = math.ceil(s_in / layer.stride)
        macs = layer.k * layer.k * c * s_out * s_out
        params = layer.k * layer.k * c + 2 * c
        return (Step(c, s_in, c, s_out, layer.stride, macs, params, depthwise=True),)
    if kind == "MBConv":
        hidden = layer.hidden_ch
        steps = []
        if hidden != layer.in_ch:
            steps.append(_conv_step(layer.in_ch, hidden, 1, 1, s_in))
        s_mid = steps[-1].out_s if steps else s_in
        s_out = math.ceil(s_mid / layer.stride)
        dw_macs = layer.k * layer.k * hidden * s_out * s_out
        steps.append(Step(hidden, s_mid, hidden, s_out, layer.stride, dw_macs,
                          layer.k * layer.k * hidden + 2 * hidden, depthwise=True))
        steps.append(_conv_step(hidden, layer.out_ch, 1, 1, s_out))
        return tuple(steps)
    if kind == "Pool":
        if layer.k == 0:
            return (Step(layer.in_ch, s_in, layer.out_ch, 1, 1, 0, 0),)
        s_out = math.ceil(s_in / layer.stride)
        return (Step(layer.in_ch, s_in, layer.out_ch, s_out, layer.stride, 0, 0),)
    if kind == "FullyConnected":
        in_features = layer.in_ch * s_in * s_in
        macs = in_features * layer.out_ch
        params = in_features * layer.out_ch + layer.out_ch
        return (Step(layer.in_ch, s_in, layer.out_ch, 1, 1, macs, params),)
    if kind == "ViewFuse":
        return (Step(layer.in_ch, s_in, layer.out_ch, s_in, 1, 0, 0),)
    raise ValueError(f"unknown layer kind {kind!r}")


def infer_shapes(net: NetworkIR) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Per-layer ((in_ch, in_s), (out_ch, out_s)) annotations.

    Fails with ShapeMismatchError rather than repairing an inconsistent IR:
    adjacent layers must agree on channels, Pool layers must not precede
    spatial convs, etc.
    """
    if len(net.layers) == 0:
        raise ShapeMismatchError(-1, "cannot infer shapes of an empty network")
    if net.input_channels < 1 or net.input_resolution < 1:
        raise ShapeMismatchError(-1, "input shape must be positive")
    shapes = []
    c, s = net.input_channels, net.input_resolution
    fuse_seen = False
    for i, layer in enumerate(net.layers):
        _validate_layer(i, layer)
        if layer.in_ch != c:
            raise ShapeMismatchError(i, f"expects {layer.in_ch} input channels, chain carries {c}")
        if layer.kind != "FullyConnected" and layer.k > s and layer.k > 0:
            raise ShapeMismatchError(i, f"kernel {layer.k} larger than feature map {s}")
        if layer.kind == "ConvReduce" and fuse_seen:
            # When a net uses both, the reducing conv must come before the
            # fusion; fusing raw backbone features (no ConvReduce) is legal.
            raise ShapeMismatchError(i, "ConvReduce must precede ViewFuse")
        if layer.kind == "ViewFuse":
            if fuse_seen:
                raise ShapeMismatchError(i, "at most one ViewFuse per network")
            fuse_seen = True
        steps = layer_steps(layer, s)
        out_c, out_s = steps[-1].out_ch, steps[-1].out_s
        shapes.append(((c, s), (out_c, out_s)))
        c, s = out_c, out_s
    return shapes


def _all_steps(net: NetworkIR) -> list[list[Step]]:
    shapes = infer_shapes(net)
    return [layer_steps(layer, in_shape[1]) for layer, (in_shape, _) in zip(net.layers, shapes)]


def per_layer_ops(net: NetworkIR) -> list[int]:
    """MAC count per layer (MBConv sub-convs summed into their block)."""
    if len(net.layers) == 0:
        return []
    return [sum(s.macs for s in steps) for steps in _all_steps(net)]


def count_ops(net: NetworkIR) -> int:
    """Total multiply-accumulate count of the network (0 for an empty net)."""
    return sum(per_layer_ops(net))


def per_layer_params(net: NetworkIR) -> list[int]:
    if len(net.layers) == 0:
        return []
    return [sum(s.params for s in steps) for steps in _all_steps(net)]


def count_params(net: NetworkIR) -> int:
    """Total parameter count, normalization scale/shift included."""
    return sum(per_layer_params(net))


def split_at(net: NetworkIR, index: int) -> tuple[NetworkIR, NetworkIR, tuple[int, int]]:
    """Split into (head, tail, feature_shape) at a layer boundary.

    ``index == 0`` puts everything on the aggregator (the transmitted feature
    is the raw input); ``index == len(net)`` puts everything on the sensor.
    Concatenating head and tail always reproduces the original network.
    """
    if not 0 <= index <= len(net.layers):
        raise IndexError(f"split index {index} outside [0, {len(net.layers)}]")
    if index == 0:
        feature = (net.input_channels, net.input_resolution)
    else:
        shapes = infer_shapes(net)
        feature = shapes[index - 1][1]
    head = NetworkIR(net.layers[:index], net.input_channels, net.input_resolution)
    tail = NetworkIR(net.layers[index:], feature[0], feature[1])
    return head, tail, feature


# JSON wire format. Field names are part of the package contract:
# {"input_resolution": int, "input_channels": int,
#  "layers": [{"kind", "in_ch", "out_ch", "k", "stride", "expansion"?, "residual"}]}
# "groups" is an optional extension (grouped convolutions), default 1.

def network_to_dict(net: NetworkIR) -> dict:
    layers = []
    for layer in net.layers:
        entry = {
            "kind": layer.kind,
            "in_ch": layer.in_ch,
            "out_ch": layer.out_ch,
            "k": layer.k,
            "stride": layer.stride,
            "residual": layer.residual,
        }
        if layer.kind == "MBConv":
            entry["expansion"] = layer.expansion if layer.expansion is not None else 1.0
        if layer.groups != 1:
            entry["groups"] = layer.groups
        layers.append(entry)
    return {
        "input_resolution": net.input_resolution,
        "input_channels": net.input_channels,
        "layers": layers,
    }


def _require(mapping: dict, key: str, types, where: str):
    if key not in mapping:
        raise ValueError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if isinstance(value, bool) and types is int or not isinstance(value, types):
        raise ValueError(f"{where}: field {key!r} has invalid type {type(value).__name__}")
    return value


def network_from_dict(data: dict) -> NetworkIR:
    resolution = _require(data, "input_resolution", int, "network")
    channels = _require(data, "input_channels", int, "network")
    raw_layers = _require(data, "layers", list, "network")
    layers = []
    for i, entry in enumerate(raw_layers):
        where = f"layers[{i}]"
        if not isinstance(entry, dict):
            raise ValueError(f"{where}: expected an object")
        kind = _require(entry, "kind", str, where)
        if kind not in LAYER_KINDS:
            raise ValueError(f"{where}: field 'kind' has unknown value {kind!r}")
        expansion = entry.get("expansion")
        if expansion is not None:
            expansion = float(expansion)
        layers.append(LayerDesc(
            kind=kind,
            in_ch=_require(entry, "in_ch", int, where),
            out_ch=_require(entry, "out_ch", int, where),
            k=_require(entry, "k", int, where),
            stride=_require(entry, "stride", int, where),
            expansion=expansion,
            residual=bool(entry.get("residual", False)),
            groups=int(entry.get("groups", 1)),
        ))
    return NetworkIR(tuple(layers), channels, resolution)


def network_to_json(net: NetworkIR) -> str:
    return json.dumps(network_to_dict(net), indent=2, sort_keys=True)


def network_from_json(text: str) -> NetworkIR:
    return network_from_dict(json.loads(text))


def load_network(path) -> NetworkIR:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))


def save_network(net: NetworkIR, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(network_to_json(net) + "\n")
