"""Split-aware architecture search space.

A backbone is organized into N phases, each anchored on one stride-2 MBConv
block: ``[depth_before stride-1 blocks] [optional splitting module]
[stride-2 block] [depth_after stride-1 blocks]``. The candidate splitting
module of phase i sits immediately before that phase's stride-2 block and is
enabled by a binary gate g_i:

* single-view: ConvReduce (c -> d) followed by ConvRecover (d -> c), an
  hourglass whose waist is the transmitted feature -- the recover side keeps
  downstream blocks' input width stable whether or not the module is active;
* multi-view: ConvReduce (c -> d) followed by ViewFuse (d -> V*d); every
  layer after the fusion consumes features derived from the V*d-wide concat.

At deployment exactly one gate is set (the network is split at that module's
waist). During weight-sharing training, single-view descriptors may set any
subset of gates; multi-view descriptors are always one-hot because view
fusion can only happen once.

Weight sharing is tracked structurally through parameter-slot identities
(strings), never through weights: two sampled networks share a block's
parameters iff their layers map to the same slot. Single-view slots are
independent of the gate vector; multi-view slots carry an "S:" (sensor-side)
or "A:" (aggregator-side) prefix determined by the fusion position, so the
sensor and aggregator supernets never alias.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .netgraph import LayerDesc, NetworkIR

__all__ = [
    "PhaseSpec",
    "SearchSpace",
    "SubNetDescriptor",
    "PhaseChoice",
    "InvalidChoiceError",
    "DEFAULT_SINGLE_VIEW_SPACE",
    "materialize",
    "share_map",
    "sampling_plan",
    "enumerate_space",
    "space_size",
    "random_descriptor",
    "descriptor_to_dict",
    "descriptor_from_dict",
    "space_to_dict",
    "space_from_dict",
    "load_space",
    "load_descriptor",
    "split_boundary",
]


class InvalidChoiceError(ValueError):
    """A descriptor field falls outside its search-space choice list."""

    def __init__(self, phase: int | None, fld: str, message: str):
        self.phase = phase
        self.field = fld
        where = f"phase {phase} field {fld!r}" if phase is not None else f"field {fld!r}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True, slots=True)
class PhaseSpec:
    """Choice lists of one phase.

    ``channels`` are output-width choices of the phase's stride-2 block;
    blocks before the stride run at the incoming width of the phase.
    ``reduced_d`` lists the splitting module's compressed width d.
    """

    channels: tuple[int, ...]
    expansions: tuple[float, ...]
    depth_before: tuple[int, ...]
    depth_after: tuple[int, ...]
    reduced_d: tuple[int, ...]

    def __post_init__(self):
        for name in ("channels", "expansions", "depth_before", "depth_after", "reduced_d"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"phase choice list {name!r} is empty")
            cast = float if name == "expansions" else int
            object.__setattr__(self, name, tuple(cast(v) for v in values))
        if max(self.reduced_d) >= min(self.channels):
            raise ValueError("every reduced_d choice must be smaller than every channel choice")


@dataclass(frozen=True, slots=True)
class SearchSpace:
    input_resolutions: tuple[int, ...]
    stem_channels: tuple[int, ...]
    phases: tuple[PhaseSpec, ...]
    head_channels: tuple[int, ...]
    num_classes: int = 1000
    input_channels: int = 3

    def __post_init__(self):
        if len(self.phases) < 1:
            raise ValueError("a search space needs at least one phase")
        for name in ("input_resolutions", "stem_channels", "head_channels"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"choice list {name!r} is empty")
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        object.__setattr__(self, "phases", tuple(self.phases))
        # The splitting module compresses the width flowing INTO the phase
        # (the previous phase's output), so d must undercut that as well;
        # this keeps every descriptor of the space materializable.
        incoming = min(self.stem_channels)
        for i, phase in enumerate(self.phases):
            if max(phase.reduced_d) >= incoming:
                raise ValueError(
                    f"phase {i}: reduced_d {max(phase.reduced_d)} does not compress "
                    f"the minimum incoming width {incoming}")
            incoming = min(phase.channels)

    @property
    def num_phases(self) -> int:
        return len(self.phases)


@dataclass(frozen=True, slots=True)
class PhaseChoice:
    channels: int
    expansion: float
    depth_before: int
    depth_after: int
    reduced_d: int

    def __post_init__(self):
        # Canonical field types keep descriptor serializations (and therefore
        # cache / oracle keys) independent of how a descriptor was built.
        object.__setattr__(self, "channels", int(self.channels))
        object.__setattr__(self, "expansion", float(self.expansion))
        object.__setattr__(self, "depth_before", int(self.depth_before))
        object.__setattr__(self, "depth_after", int(self.depth_after))
        object.__setattr__(self, "reduced_d", int(self.reduced_d))


@dataclass(frozen=True, slots=True)
class SubNetDescriptor:
    """One concrete point of a search space, including the gate vector."""

    resolution: int
    stem_channels: int
    phases: tuple[PhaseChoice, ...]
    gates: tuple[int, ...]
    head_channels: int
    view_mode: str = "single"
    num_views: int = 1

    def __post_init__(self):
        object.__setattr__(self, "resolution", int(self.resolution))
        object.__setattr__(self, "stem_channels", int(self.stem_channels))
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "gates", tuple(int(g) for g in self.gates))
        object.__setattr__(self, "head_channels", int(self.head_channels))
        object.__setattr__(self, "num_views", int(self.num_views))

    @property
    def gate_position(self) -> int | None:
        """Index of the active phase for one-hot descriptors, else None."""
        if sum(self.gates) != 1:
            return None
        return self.gates.index(1)

    def key(self) -> str:
        """Canonical serialization, usable as a cache / oracle lookup key."""
        return json.dumps(descriptor_to_dict(self), sort_keys=True)


def validate_descriptor(space: SearchSpace, desc: SubNetDescriptor,
                        require_one_hot: bool = False) -> None:
    def check(phase, fld, value, choices):
        if value not in choices:
            raise InvalidChoiceError(phase, fld, f"{value!r} not in {list(choices)}")

    check(None, "resolution", desc.resolution, space.input_resolutions)
    check(None, "stem_channels", desc.stem_channels, space.stem_channels)
    check(None, "head_channels", desc.head_channels, space.head_channels)
    if len(desc.phases) != space.num_phases:
        raise InvalidChoiceError(None, "phases",
                                 f"expected {space.num_phases} phases, got {len(desc.phases)}")
    if len(desc.gates) != space.num_phases:
        raise InvalidChoiceError(None, "gates",
                                 f"expected {space.num_phases} gates, got {len(desc.gates)}")
    if any(g not in (0, 1) for g in desc.gates):
        raise InvalidChoiceError(None, "gates", "gates must be binary")
    for i, (choice, spec) in enumerate(zip(desc.phases, space.phases)):
        check(i, "channels", choice.channels, spec.channels)
        check(i, "expansion", choice.expansion, spec.expansions)
        check(i, "depth_before", choice.depth_before, spec.depth_before)
        check(i, "depth_after", choice.depth_after, spec.depth_after)
        check(i, "reduced_d", choice.reduced_d, spec.reduced_d)
    if desc.view_mode not in ("single", "multi"):
        raise InvalidChoiceError(None, "view_mode", f"unknown mode {desc.view_mode!r}")
    if desc.view_mode == "multi" and desc.num_views < 2:
        raise InvalidChoiceError(None, "num_views", "multi-view needs num_views >= 2")
    one_hot = sum(desc.gates) == 1
    if desc.view_mode == "multi" and not one_hot:
        raise InvalidChoiceError(None, "gates", "multi-view gates must be one-hot "
                                                "(fusion can only happen once)")
    if require_one_hot and not one_hot:
        raise InvalidChoiceError(None, "gates", "deployment descriptors must be one-hot")


def _walk(space: SearchSpace, desc: SubNetDescriptor):
    """Yield (LayerDesc, slot, on_sensor_side) in materialization order.

    ``on_sensor_side`` is relative to the active splitting module for one-hot
    descriptors (True before the waist). Slots are structural identities; the
    caller decides whether to prefix them by side (multi-view).
    """
    yield LayerDesc("Conv", space.input_channels, desc.stem_channels, k=3, stride=2), "stem", True
    width = desc.stem_channels
    before_split = True
    for i, (choice, gate) in enumerate(zip(desc.phases, desc.gates)):
        e = choice.expansion
        for j in range(choice.depth_before):
            yield (LayerDesc("MBConv", width, width, k=3, stride=1, expansion=e, residual=True),
                   f"p{i}.before.{j}", before_split)
        if gate:
            if choice.reduced_d >= width:
                raise InvalidChoiceError(i, "reduced_d",
                                         f"d={choice.reduced_d} does not compress width {width}")
            yield (LayerDesc("ConvReduce", width, choice.reduced_d), f"p{i}.reduce", True)
            if desc.view_mode == "multi":
                before_split = False
                fused = choice.reduced_d * desc.num_views
                yield (LayerDesc("ViewFuse", choice.reduced_d, fused), f"p{i}.fuse", False)
                width = fused
            else:
                before_split = False
                yield (LayerDesc("ConvRecover", choice.reduced_d, width), f"p{i}.recover", False)
        yield (LayerDesc("MBConv", width, choice.channels, k=3, stride=2, expansion=e),
               f"p{i}.stride", before_split)
        width = choice.channels
        for j in range(choice.depth_after):
            yield (LayerDesc("MBConv", width, width, k=3, stride=1, expansion=e, residual=True),
                   f"p{i}.after.{j}", before_split)
    yield (LayerDesc("Conv", width, desc.head_channels, k=1), "head.conv", before_split)
    yield (LayerDesc("Pool", desc.head_channels, desc.head_channels, k=0), "head.pool", before_split)
    yield (LayerDesc("FullyConnected", desc.head_channels, space.num_classes),
           "head.fc", before_split)


def materialize(space: SearchSpace, desc: SubNetDescriptor) -> NetworkIR:
    """Stitch a descriptor into a concrete NetworkIR.

    Blocks before an active splitting module come from the on-sensor side,
    blocks after it from the on-aggregator side; the module itself is the
    joint. Gate semantics only control module insertion -- depth and width
    choices shape the backbone either way.
    """
    validate_descriptor(space, desc)
    layers = tuple(layer for layer, _, _ in _walk(space, desc))
    return NetworkIR(layers, space.input_channels, desc.resolution)


def share_map(space: SearchSpace, desc: SubNetDescriptor) -> dict[int, str]:
    """IR layer index -> supernet parameter-slot identity.

    Single-view: a block's slot depends only on its structural position, so
    the same backbone shares weights no matter where the gates sit.
    Multi-view: positions before the fusion map into the sensor supernet
    ("S:" namespace) and positions after it into the aggregator supernet
    ("A:"); the two slot sets are disjoint by construction.
    """
    validate_descriptor(space, desc)
    mapping = {}
    for idx, (_, slot, on_sensor) in enumerate(_walk(space, desc)):
        if desc.view_mode == "multi":
            slot = ("S:" if on_sensor else "A:") + slot
        mapping[idx] = slot
    return mapping


def split_boundary(space: SearchSpace, desc: SubNetDescriptor) -> int:
    """Deployment split index: the boundary right after the active ConvReduce.

    The head ends with the compressed d-channel feature; the tail starts with
    ConvRecover (single-view) or ViewFuse (multi-view).
    """
    validate_descriptor(space, desc, require_one_hot=True)
    for idx, (layer, _, _) in enumerate(_walk(space, desc)):
        if layer.kind == "ConvReduce":
            return idx + 1
    raise InvalidChoiceError(None, "gates", "no active splitting module")


def _pick(values, which: str, rng: random.Random):
    if which == "max":
        return max(values)
    if which == "min":
        return min(values)
    return rng.choice(list(values))


def _build(space: SearchSpace, which: str, gates, rng: random.Random,
           view_mode: str, num_views: int) -> SubNetDescriptor:
    phases = tuple(
        PhaseChoice(
            channels=_pick(p.channels, which, rng),
            expansion=_pick(p.expansions, which, rng),
            depth_before=_pick(p.depth_before, which, rng),
            depth_after=_pick(p.depth_after, which, rng),
            reduced_d=_pick(p.reduced_d, which, rng),
        )
        for p in space.phases
    )
    return SubNetDescriptor(
        resolution=_pick(space.input_resolutions, which, rng),
        stem_channels=_pick(space.stem_channels, which, rng),
        phases=phases,
        gates=tuple(gates),
        head_channels=_pick(space.head_channels, which, rng),
        view_mode=view_mode,
        num_views=num_views,
    )


def random_descriptor(space: SearchSpace, rng: random.Random, one_hot: bool = True,
                      view_mode: str = "single", num_views: int = 1) -> SubNetDescriptor:
    """Uniform random descriptor; gate position uniform when one-hot."""
    n = space.num_phases
    if one_hot:
        gates = [0] * n
        gates[rng.randrange(n)] = 1
    else:
        gates = [rng.randint(0, 1) for _ in range(n)]
    return _build(space, "random", gates, rng, view_mode, num_views)


def sampling_plan(space: SearchSpace, mode: str = "single", seed: int = 0,
                  num_views: int = 1) -> list[tuple[str, SubNetDescriptor]]:
    """Per-iteration joint-training sample of sub-networks.

    Single-view trains five: the largest and smallest backbones each with no
    splitting module (the accuracy upper bound / most-shared weights) and
    with every module active (covers all supernet weights / the accuracy
    lower bound), plus one random one-hot network of the kind that is
    eventually deployed. Multi-view fusion can only happen once, so its
    sandwich is max / min / random, all one-hot.
    """
    if mode not in ("single", "multi"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    rng = random.Random(seed)
    n = space.num_phases
    zero, ones = (0,) * n, (1,) * n

    def one_hot_gates():
        gates = [0] * n
        gates[rng.randrange(n)] = 1
        return tuple(gates)

    if mode == "single":
        plan = [
            ("max-zero-hot", _build(space, "max", zero, rng, "single", 1)),
            ("max-all-hot", _build(space, "max", ones, rng, "single", 1)),
            ("min-zero-hot", _build(space, "min", zero, rng, "single", 1)),
            ("min-all-hot", _build(space, "min", ones, rng, "single", 1)),
            ("random-one-hot", random_descriptor(space, rng, one_hot=True)),
        ]
    else:
        if num_views < 2:
            raise ValueError("multi-view sampling needs num_views >= 2")
        plan = [
            ("max-one-hot", _build(space, "max", one_hot_gates(), rng, "multi", num_views)),
            ("min-one-hot", _build(space, "min", one_hot_gates(), rng, "multi", num_views)),
            ("random-one-hot",
             random_descriptor(space, rng, one_hot=True, view_mode="multi", num_views=num_views)),
        ]
    return plan


def space_size(space: SearchSpace) -> int:
    """Number of one-hot descriptors in the space."""
    total = len(space.input_resolutions) * len(space.stem_channels) * len(space.head_channels)
    for p in space.phases:
        total *= (len(p.channels) * len(p.expansions) * len(p.depth_before)
                  * len(p.depth_after) * len(p.reduced_d))
    return total * space.num_phases


def enumerate_space(space: SearchSpace, max_count: int | None = None,
                    view_mode: str = "single", num_views: int = 1):
    """Deterministic lexicographic iterator over valid one-hot descriptors."""
    if max_count is not None and max_count <= 0:
        return
    emitted = 0
    n = space.num_phases

    def phase_choices(p: PhaseSpec):
        for c in p.channels:
            for e in p.expansions:
                for db in p.depth_before:
                    for da in p.depth_after:
                        for d in p.reduced_d:
                            yield PhaseChoice(c, e, db, da, d)

    def rec(i, acc):
        if i == n:
            yield tuple(acc)
            return
        for choice in phase_choices(space.phases[i]):
            acc.append(choice)
            yield from rec(i + 1, acc)
            acc.pop()

    for res in space.input_resolutions:
        for stem in space.stem_channels:
            for phases in rec(0, []):
                for head in space.head_channels:
                    for pos in range(n):
                        gates = tuple(1 if j == pos else 0 for j in range(n))
                        yield SubNetDescriptor(res, stem, phases, gates, head,
                                               view_mode=view_mode, num_views=num_views)
                        emitted += 1
                        if max_count is not None and emitted >= max_count:
                            return


# Default single-view space, mirroring the four-phase MBConv supernet this
# package models: one stride-2 block per phase, per-phase compressed widths
# growing with depth, and an expanded 1x1 + pool + FC classifier head.
DEFAULT_SINGLE_VIEW_SPACE = SearchSpace(
    input_resolutions=(192, 224, 256, 288),
    stem_channels=(16, 24),
    phases=(
        PhaseSpec(channels=(24, 32), expansions=(4, 5, 6),
                  depth_before=(2, 3, 4, 5), depth_after=(1, 2, 3), reduced_d=(4, 6, 8)),
        PhaseSpec(channels=(32, 40), expansions=(4, 5, 6),
                  depth_before=(1, 2, 3), depth_after=(1, 2, 3), reduced_d=(6, 8, 10)),
        PhaseSpec(channels=(112, 120, 128), expansions=(4, 5, 6),
                  depth_before=(1, 2, 3), depth_after=(4, 5, 6, 7, 8, 9), reduced_d=(10, 14, 18)),
        PhaseSpec(channels=(216, 224), expansions=(6,),
                  depth_before=(1, 2, 3, 4), depth_after=(2, 3, 4, 5, 6), reduced_d=(16, 24, 32)),
    ),
    head_channels=(1792, 1984),
    num_classes=1000,
)


# JSON wire formats. Space field names are part of the package contract.

def space_to_dict(space: SearchSpace) -> dict:
    return {
        "input_resolutions": list(space.input_resolutions),
        "stem_channels": list(space.stem_channels),
        "phases": [
            {
                "channels": list(p.channels),
                "expansions": list(p.expansions),
                "depth_before": list(p.depth_before),
                "depth_after": list(p.depth_after),
                "reduced_d": list(p.reduced_d),
            }
            for p in space.phases
        ],
        "head_channels": list(space.head_channels),
        "num_classes": space.num_classes,
        "input_channels": space.input_channels,
    }


def space_from_dict(data: dict) -> SearchSpace:
    def req(mapping, key, where):
        if key not in mapping:
            raise ValueError(f"{where}: missing required field {key!r}")
        return mapping[key]

    phases = []
    for i, entry in enumerate(req(data, "phases", "space")):
        where = f"phases[{i}]"
        phases.append(PhaseSpec(
            channels=tuple(req(entry, "channels", where)),
            expansions=tuple(float(e) for e in req(entry, "expansions", where)),
            depth_before=tuple(req(entry, "depth_before", where)),
            depth_after=tuple(req(entry, "depth_after", where)),
            reduced_d=tuple(req(entry, "reduced_d", where)),
        ))
    return SearchSpace(
        input_resolutions=tuple(req(data, "input_resolutions", "space")),
        stem_channels=tuple(req(data, "stem_channels", "space")),
        phases=tuple(phases),
        head_channels=tuple(req(data, "head_channels", "space")),
        num_classes=int(data.get("num_classes", 1000)),
        input_channels=int(data.get("input_channels", 3)),
    )


def descriptor_to_dict(desc: SubNetDescriptor) -> dict:
    return {
        "resolution": desc.resolution,
        "stem_channels": desc.stem_channels,
        "phases": [
            {
                "channels": p.channels,
                "expansion": p.expansion,
                "depth_before": p.depth_before,
                "depth_after": p.depth_after,
                "reduced_d": p.reduced_d,
            }
            for p in desc.phases
        ],
        "gates": list(desc.gates),
        "head_channels": desc.head_channels,
        "view_mode": desc.view_mode,
        "num_views": desc.num_views,
    }


def descriptor_from_dict(data: dict) -> SubNetDescriptor:
    phases = tuple(
        PhaseChoice(
            channels=int(p["channels"]),
            expansion=float(p["expansion"]),
            depth_before=int(p["depth_before"]),
            depth_after=int(p["depth_after"]),
            reduced_d=int(p["reduced_d"]),
        )
        for p in data["phases"]
    )
    return SubNetDescriptor(
        resolution=int(data["resolution"]),
        stem_channels=int(data["stem_channels"]),
        phases=phases,
        gates=tuple(int(g) for g in data["gates"]),
        head_channels=int(data["head_channels"]),
        view_mode=data.get("view_mode", "single"),
        num_views=int(data.get("num_views", 1)),
    )


def load_space(path) -> SearchSpace:
    with open(path, "r", encoding="utf-8") as fh:
        return space_from_dict(json.load(fh))


def load_descriptor(path) -> SubNetDescriptor:
    with open(path, "r", encoding="utf-8") as fh:
        return descriptor_from_dict(json.load(fh))
