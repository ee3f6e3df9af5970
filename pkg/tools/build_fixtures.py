#!/usr/bin/env python3
"""Regenerate the bundled JSON fixtures (reference IRs, hardware configs,
search spaces, multi-view descriptor fixtures).

The reference IRs reconstruct well-known torchvision classification
backbones layer by layer. Squeeze-excite blocks (EfficientNet-B0,
MobileNet-v3) and residual projection convolutions (ResNets, RegNetX) are
omitted because the sequential IR cannot express them; both contribute a
small, known fraction of MACs/params (< ~3%). Multi-view variants append a
ViewFuse of the last-conv feature plus the published classifier stack.

Run from the repository root:  python tools/build_fixtures.py
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from edgesplit.netgraph import (LayerDesc, NetworkIR, count_ops, count_params,
                                infer_shapes, network_to_dict)
from edgesplit.hwmodel import (DEFAULT_MULTI_VIEW_HW, DEFAULT_SINGLE_VIEW_HW,
                               hardware_to_dict, peak_memory)
from edgesplit.splitspace import (PhaseSpec, SearchSpace, SubNetDescriptor, PhaseChoice,
                                  DEFAULT_SINGLE_VIEW_SPACE, descriptor_to_dict,
                                  space_to_dict)

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "edgesplit", "fixtures")


def conv(cin, cout, k=1, s=1, residual=False, groups=1):
    return LayerDesc("Conv", cin, cout, k=k, stride=s, residual=residual, groups=groups)


def dwconv(c, k=3, s=1):
    return LayerDesc("DepthwiseConv", c, c, k=k, stride=s)


def mb(cin, cout, e, k=3, s=1):
    residual = s == 1 and cin == cout
    return LayerDesc("MBConv", cin, cout, k=k, stride=s, expansion=float(e), residual=residual)


def pool_window(c, k, s):
    return LayerDesc("Pool", c, c, k=k, stride=s)


def pool_global(c):
    return LayerDesc("Pool", c, c, k=0, stride=1)


def fc(cin, cout):
    return LayerDesc("FullyConnected", cin, cout)


def fuse(c, views):
    return LayerDesc("ViewFuse", c, c * views)


def mb_stack(cin, cout, e, k, s, n):
    layers = [mb(cin, cout, e, k=k, s=s)]
    layers += [mb(cout, cout, e, k=k, s=1) for _ in range(n - 1)]
    return layers


def mobilenet_v2(num_classes=1000):
    # Inverted-residual settings (t, c, n, s) after the 32-wide stem.
    cfg = [(1, 16, 1, 1), (6, 24, 2, 2), (6, 32, 3, 2), (6, 64, 4, 2),
           (6, 96, 3, 1), (6, 160, 3, 2), (6, 320, 1, 1)]
    layers = [conv(3, 32, k=3, s=2)]
    c = 32
    for t, out, n, s in cfg:
        layers += mb_stack(c, out, t, 3, s, n)
        c = out
    layers += [conv(c, 1280, k=1), pool_global(1280), fc(1280, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def mnasnet(alpha, num_classes=1000):
    def scale(v):
        # round to the nearest multiple of 8, never dropping below 90%
        new = max(8, int(v * alpha + 4) // 8 * 8)
        return new + 8 if new < 0.9 * v * alpha else new

    d = [scale(v) for v in (32, 16, 24, 40, 80, 96, 192, 320)]
    layers = [conv(3, d[0], k=3, s=2), dwconv(d[0], k=3), conv(d[0], d[1], k=1)]
    stacks = [(d[1], d[2], 3, 2, 3, 3), (d[2], d[3], 5, 2, 3, 3), (d[3], d[4], 5, 2, 6, 3),
              (d[4], d[5], 3, 1, 6, 2), (d[5], d[6], 5, 2, 6, 4), (d[6], d[7], 3, 1, 6, 1)]
    for cin, cout, k, s, e, n in stacks:
        layers += mb_stack(cin, cout, e, k, s, n)
    layers += [conv(d[7], 1280, k=1), pool_global(1280), fc(1280, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def efficientnet_b0(num_classes=1000):
    # (t, c, n, s, k); squeeze-excite omitted (sequential IR), ~1% of MACs.
    cfg = [(1, 16, 1, 1, 3), (6, 24, 2, 2, 3), (6, 40, 2, 2, 5), (6, 80, 3, 2, 3),
           (6, 112, 3, 1, 5), (6, 192, 4, 2, 5), (6, 320, 1, 1, 3)]
    layers = [conv(3, 32, k=3, s=2)]
    c = 32
    for t, out, n, s, k in cfg:
        layers += mb_stack(c, out, t, k, s, n)
        c = out
    layers += [conv(c, 1280, k=1), pool_global(1280), fc(1280, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def mobilenet_v3_small_features():
    # (k, hidden, out, stride); squeeze-excite omitted. Output: 576 x 7 x 7.
    cfg = [(3, 16, 16, 2), (3, 72, 24, 2), (3, 88, 24, 1), (5, 96, 40, 2),
           (5, 240, 40, 1), (5, 240, 40, 1), (5, 120, 48, 1), (5, 144, 48, 1),
           (5, 288, 96, 2), (5, 576, 96, 1), (5, 576, 96, 1)]
    layers = [conv(3, 16, k=3, s=2)]
    c = 16
    for k, hidden, out, s in cfg:
        layers.append(mb(c, out, hidden / c, k=k, s=s))
        c = out
    layers.append(conv(96, 576, k=1))
    return layers


def resnet(block_depths, widths, bottleneck, num_classes=1000):
    """Sequential ResNet without the residual projection convolutions."""
    layers = [conv(3, 64, k=7, s=2), pool_window(64, 3, 2)]
    c = 64
    for stage, (depth, w) in enumerate(zip(block_depths, widths)):
        stride = 1 if stage == 0 else 2
        for b in range(depth):
            s = stride if b == 0 else 1
            if bottleneck:
                layers += [conv(c, w, k=1),
                           conv(w, w, k=3, s=s, residual=(s == 1)),
                           conv(w, 4 * w, k=1)]
                c = 4 * w
            else:
                layers += [conv(c, w, k=3, s=s),
                           conv(w, w, k=3, residual=True)]
                c = w
    layers += [pool_global(c), fc(c, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def regnetx_3_2gf(num_classes=1000):
    # depths/widths/group width of the 3.2 GF X variant; projections omitted.
    depths, widths, group_w = (2, 6, 15, 2), (96, 192, 432, 1008), 48
    layers = [conv(3, 32, k=3, s=2)]
    c = 32
    for depth, w in zip(depths, widths):
        for b in range(depth):
            s = 2 if b == 0 else 1
            layers += [conv(c, w, k=1),
                       conv(w, w, k=3, s=s, groups=w // group_w),
                       conv(w, w, k=1, residual=(b > 0))]
            c = w
    layers += [pool_global(c), fc(c, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def vgg11_convs():
    plan = [64, "M", 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M"]
    layers = []
    c = 3
    for item in plan:
        if item == "M":
            layers.append(pool_window(c, 2, 2))
        else:
            layers.append(conv(c, item, k=3))
            c = item
    return layers, c


def vgg11(num_classes=1000):
    layers, c = vgg11_convs()
    layers += [fc(c, 4096), fc(4096, 4096), fc(4096, num_classes)]
    return NetworkIR(tuple(layers), 3, 224)


def head_distill_resnet152_head():
    """Small distilled stand-in head (12-channel 28x28 output feature)."""
    layers = [
        conv(3, 48, k=3, s=2),
        conv(48, 16, k=1),
        conv(16, 32, k=3, s=2),
        conv(32, 32, k=3, residual=True),
        conv(32, 32, k=3, residual=True),
        conv(32, 32, k=3, residual=True),
        conv(32, 12, k=3, s=2),
    ]
    return NetworkIR(tuple(layers), 3, 224)


def multiview(backbone_layers, feature_ch, classifier, views=12):
    """Backbone + channel concat of V views + classifier stack."""
    layers = list(backbone_layers) + [fuse(feature_ch, views)] + classifier
    return NetworkIR(tuple(layers), 3, 224)


def resnet18_convs():
    net = resnet((2, 2, 2, 2), (64, 128, 256, 512), bottleneck=False)
    return list(net.layers[:-2]), 512  # drop pool + fc


def mnasnet_0_5_convs():
    net = mnasnet(0.5)
    return list(net.layers[:-2]), 1280


def efficientnet_b0_convs():
    net = efficientnet_b0()
    return list(net.layers[:-2]), 1280


MULTI_VIEW_NETS = {
    "vgg11_multiview": lambda: multiview(
        vgg11_convs()[0], 512,
        [fc(512 * 12, 4096), fc(4096, 4096), fc(4096, 1000)]),
    "resnet18_multiview": lambda: multiview(
        resnet18_convs()[0], 512,
        [pool_global(512 * 12), fc(512 * 12, 1000)]),
    "mobilenet_v3_small_multiview": lambda: multiview(
        mobilenet_v3_small_features(), 576,
        [pool_global(576 * 12), fc(576 * 12, 1024), fc(1024, 1000)]),
    "mnasnet_0_5_multiview": lambda: multiview(
        mnasnet_0_5_convs()[0], 1280,
        [pool_global(1280 * 12), fc(1280 * 12, 1000)]),
    "efficientnet_b0_multiview": lambda: multiview(
        efficientnet_b0_convs()[0], 1280,
        [pool_global(1280 * 12), fc(1280 * 12, 1000)]),
}

SINGLE_VIEW_NETS = {
    "mobilenet_v2": mobilenet_v2,
    "mnasnet_1_0": lambda: mnasnet(1.0),
    "efficientnet_b0": efficientnet_b0,
    "resnet152": lambda: resnet((3, 8, 36, 3), (64, 128, 256, 512), bottleneck=True),
    "regnetx_3_2gf": regnetx_3_2gf,
    "vgg11": vgg11,
    "head_distill_resnet152_head": head_distill_resnet152_head,
}


# Multi-view search space and the three searched-model descriptor fixtures.
MULTI_VIEW_SPACE = SearchSpace(
    input_resolutions=(192, 224),
    stem_channels=(8, 12, 16),
    phases=(
        PhaseSpec(channels=(16, 24), expansions=(1, 3), depth_before=(0, 1, 2),
                  depth_after=(0, 1), reduced_d=(4, 6)),
        PhaseSpec(channels=(24, 32), expansions=(3, 4), depth_before=(0, 1, 2),
                  depth_after=(0, 1), reduced_d=(4, 6, 8)),
        PhaseSpec(channels=(40, 48, 64), expansions=(3, 4, 6), depth_before=(0, 1, 2),
                  depth_after=(0, 1, 2), reduced_d=(6, 8, 10)),
        PhaseSpec(channels=(64, 96, 112), expansions=(3, 4, 6), depth_before=(0, 1, 2, 3),
                  depth_after=(0, 1, 2, 3), reduced_d=(6, 10, 16)),
        PhaseSpec(channels=(96, 160, 192), expansions=(3, 4, 6), depth_before=(0, 1, 2, 3),
                  depth_after=(0, 1, 2), reduced_d=(16, 24, 32)),
    ),
    head_channels=(512, 1024, 1280),
    num_classes=40,
)


# Searched multi-view deployments (12 sensors), calibrated so their costed
# rows land on the published searched-model latencies; found by
# tools/calibrate_descriptors.py and frozen here.
SEARCHED_MULTI_VIEW = {
    "searched_multiview_small": {
        "resolution": 192, "stem_channels": 16,
        "phases": [
            {"channels": 16, "expansion": 1.0, "depth_before": 0, "depth_after": 0, "reduced_d": 6},
            {"channels": 32, "expansion": 4.0, "depth_before": 1, "depth_after": 1, "reduced_d": 4},
            {"channels": 48, "expansion": 6.0, "depth_before": 0, "depth_after": 2, "reduced_d": 6},
            {"channels": 64, "expansion": 3.0, "depth_before": 2, "depth_after": 2, "reduced_d": 10},
            {"channels": 192, "expansion": 3.0, "depth_before": 0, "depth_after": 2, "reduced_d": 16},
        ],
        "gates": [0, 0, 0, 0, 1], "head_channels": 1280,
        "view_mode": "multi", "num_views": 12,
    },
    "searched_multiview_medium": {
        "resolution": 192, "stem_channels": 8,
        "phases": [
            {"channels": 24, "expansion": 1.0, "depth_before": 2, "depth_after": 0, "reduced_d": 6},
            {"channels": 32, "expansion": 3.0, "depth_before": 0, "depth_after": 1, "reduced_d": 6},
            {"channels": 64, "expansion": 6.0, "depth_before": 0, "depth_after": 2, "reduced_d": 8},
            {"channels": 112, "expansion": 6.0, "depth_before": 3, "depth_after": 3, "reduced_d": 6},
            {"channels": 192, "expansion": 6.0, "depth_before": 3, "depth_after": 2, "reduced_d": 16},
        ],
        "gates": [0, 0, 0, 1, 0], "head_channels": 1024,
        "view_mode": "multi", "num_views": 12,
    },
    "searched_multiview_large": {
        "resolution": 224, "stem_channels": 16,
        "phases": [
            {"channels": 24, "expansion": 3.0, "depth_before": 2, "depth_after": 1, "reduced_d": 6},
            {"channels": 24, "expansion": 3.0, "depth_before": 2, "depth_after": 0, "reduced_d": 6},
            {"channels": 40, "expansion": 6.0, "depth_before": 1, "depth_after": 2, "reduced_d": 8},
            {"channels": 112, "expansion": 6.0, "depth_before": 3, "depth_after": 2, "reduced_d": 6},
            {"channels": 192, "expansion": 6.0, "depth_before": 3, "depth_after": 2, "reduced_d": 16},
        ],
        "gates": [0, 0, 0, 1, 0], "head_channels": 512,
        "view_mode": "multi", "num_views": 12,
    },
}


def write_json(relpath, data):
    path = os.path.join(OUT, relpath)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {os.path.relpath(path)}")


def summarize(name, net, hw):
    ops = count_ops(net)
    params = count_params(net)
    peak = peak_memory(net, hw)
    print(f"  {name:34s} ops={ops/1e6:9.1f}M params={params/1e6:7.3f}M peak={peak/1e6:7.3f}MB")


def main():
    hw_single = DEFAULT_SINGLE_VIEW_HW
    hw_multi = DEFAULT_MULTI_VIEW_HW
    print("single-view reference networks:")
    for name, build in SINGLE_VIEW_NETS.items():
        net = build()
        infer_shapes(net)
        summarize(name, net, hw_single)
        write_json(f"ir/{name}.json", network_to_dict(net))
    print("multi-view reference networks:")
    for name, build in MULTI_VIEW_NETS.items():
        net = build()
        infer_shapes(net)
        head_len = next(i for i, l in enumerate(net.layers) if l.kind == "ViewFuse")
        head = NetworkIR(net.layers[:head_len], 3, 224)
        summarize(name, head, hw_multi)
        write_json(f"ir/{name}.json", network_to_dict(net))

    write_json("hw/single_view.json", hardware_to_dict(hw_single))
    write_json("hw/multi_view.json", hardware_to_dict(hw_multi))
    write_json("space/single_view_default.json", space_to_dict(DEFAULT_SINGLE_VIEW_SPACE))
    write_json("space/multi_view_default.json", space_to_dict(MULTI_VIEW_SPACE))
    for name, desc in SEARCHED_MULTI_VIEW.items():
        write_json(f"descriptor/{name}.json", desc)


if __name__ == "__main__":
    main()
