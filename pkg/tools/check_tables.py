#!/usr/bin/env python3
"""Development cross-check of the bundled fixtures against published latency
tables. Prints every modeled cell next to its target and the relative error."""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from edgesplit import (DEFAULT_MULTI_VIEW_HW, DEFAULT_SINGLE_VIEW_HW,
                       all_on_aggregator, all_on_sensor, load_reference_network,
                       neurosurgeon_split, split_at_fusion)

HW1 = DEFAULT_SINGLE_VIEW_HW
HW12 = DEFAULT_MULTI_VIEW_HW


def cell(label, ours_ms, target_ms):
    err = (ours_ms - target_ms) / target_ms * 100 if target_ms else 0.0
    flag = "OK " if abs(err) <= 5 else ("ok10" if abs(err) <= 10 else "FAIL")
    print(f"  {label:52s} {ours_ms:10.4f} vs {target_ms:8.3f}  {err:+6.2f}%  {flag}")


def main():
    print("== single view: all-on-sensor ==")
    for name, t_sen, overall in [
        ("mobilenet_v2", 2.46, 2.46), ("mnasnet_1_0", 2.52, 2.52),
        ("efficientnet_b0", 3.09, 3.09), ("resnet152", 92.1, 92.1),
        ("regnetx_3_2gf", 25.4, 25.4),
    ]:
        net = load_reference_network(name)
        d = all_on_sensor(net, HW1)
        cell(f"{name} t_sen", d.report.t_sen * 1e3, t_sen)
        cell(f"{name} overall", d.report.overall * 1e3, overall)
        print(f"    feasible={d.feasible} peak={d.report.peak_mem_sen/1e6:.2f}MB")

    print("== single view: all-on-aggregator ==")
    for name, t_agg, overall in [
        ("mobilenet_v2", 0.24, 4.25), ("mnasnet_1_0", 0.25, 4.26),
        ("efficientnet_b0", 0.31, 4.32), ("resnet152", 9.21, 13.2),
        ("regnetx_3_2gf", 2.54, 6.60),
    ]:
        net = load_reference_network(name)
        d = all_on_aggregator(net, HW1)
        cell(f"{name} t_comm", d.report.t_comm * 1e3, 4.01)
        cell(f"{name} t_agg", d.report.t_agg * 1e3, t_agg)
        cell(f"{name} overall", d.report.overall * 1e3, overall)

    print("== single view: exhaustive layer-wise split ==")
    for name, t_sen, t_agg, overall, idx_note in [
        ("mobilenet_v2", 0.0, 0.24, 4.25, "expect split 0"),
        ("mnasnet_1_0", 0.83, 0.17, None, "expect interior split, comm cell excluded"),
        ("efficientnet_b0", 0.0, 0.31, 4.32, "expect split 0"),
        ("resnet152", 0.0, 9.21, 13.2, "expect split 0"),
        ("regnetx_3_2gf", 0.0, 2.54, 6.60, "expect split 0"),
    ]:
        net = load_reference_network(name)
        d = neurosurgeon_split(net, HW1)
        print(f"  {name}: split index {d.split_index} of {len(net.layers)} ({idx_note})")
        cell(f"{name} t_sen", d.report.t_sen * 1e3, t_sen) if t_sen else None
        cell(f"{name} t_agg", d.report.t_agg * 1e3, t_agg)
        if overall is not None:
            cell(f"{name} overall", d.report.overall * 1e3, overall)
        else:
            print(f"    comm={d.report.t_comm*1e3:.3f}ms (paper cell excluded), "
                  f"overall={d.report.overall*1e3:.3f}ms, peak={d.report.peak_mem_sen/1e6:.2f}MB")

    print("== multi view: all-on-aggregator ==")
    for name, t_agg, overall in [
        ("vgg11_multiview", 73.2, 84.9), ("resnet18_multiview", 17.7, 29.7),
        ("mobilenet_v3_small_multiview", 0.58, 12.6),
        ("mnasnet_0_5_multiview", 1.01, 13.0), ("efficientnet_b0_multiview", 3.76, 15.8),
    ]:
        net = load_reference_network(name)
        d = all_on_aggregator(net, HW12)
        cell(f"{name} t_comm", d.report.t_comm * 1e3, 12.0)
        cell(f"{name} t_agg", d.report.t_agg * 1e3, t_agg)
        cell(f"{name} overall", d.report.overall * 1e3, overall)

    print("== multi view: split at fusion ==")
    for name, t_sen, t_comm, overall, peak, feasible in [
        ("vgg11_multiview", 59.9, 2.00, 62.1, 12.4, False),
        ("resnet18_multiview", 14.5, 2.00, 16.5, 12.8, False),
        ("mobilenet_v3_small_multiview", 0.44, 2.26, 2.71, 1.38, True),
        ("mnasnet_0_5_multiview", 0.83, 5.03, 5.83, 1.54, True),
        ("efficientnet_b0_multiview", 3.08, 5.03, 8.03, 6.42, False),
    ]:
        net = load_reference_network(name)
        d = split_at_fusion(net, HW12)
        cell(f"{name} t_sen", d.report.t_sen * 1e3, t_sen)
        cell(f"{name} t_comm", d.report.t_comm * 1e3, t_comm)
        cell(f"{name} overall", d.report.overall * 1e3, overall)
        print(f"    feasible={d.feasible} (expect {feasible}) "
              f"peak={d.report.peak_mem_sen/1e6:.2f}MB (paper {peak})")


if __name__ == "__main__":
    main()
