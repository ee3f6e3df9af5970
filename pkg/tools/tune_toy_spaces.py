#!/usr/bin/env python3
"""Validate candidate toy spaces for the search tests: size, feasibility mix,
EA-vs-brute-force agreement over 20 seeds, and the sensor-throughput
adaptability property over 10 seeds."""

from __future__ import annotations

import math
import os
import sys
import time
from dataclasses import replace

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from edgesplit.hwmodel import HardwareConfig
from edgesplit.search import (Objective, SearchConfig, SurrogateOracle, brute_force_best,
                              evaluate_descriptor, run)
from edgesplit.splitspace import PhaseSpec, SearchSpace, enumerate_space, space_size

TOY_HW = HardwareConfig(comp_sen=125e9, comp_agg=1.25e12, bw_total=1.2e9 / 8,
                        mem_sen=20_000, num_sensors=4)

TOY_SPACES = {
    "toy_a": SearchSpace(
        input_resolutions=(32, 48), stem_channels=(8,),
        phases=(
            PhaseSpec((16, 24), (2, 4), (1, 2), (1,), (2, 4)),
            PhaseSpec((32, 48), (4,), (1, 2), (1, 2), (4, 8)),
        ),
        head_channels=(64,), num_classes=10),
    "toy_b": SearchSpace(
        input_resolutions=(32,), stem_channels=(8, 12),
        phases=(
            PhaseSpec((16,), (2, 4), (1, 2), (1,), (2, 4)),
            PhaseSpec((24, 32), (4,), (1,), (1, 2), (4,)),
            PhaseSpec((48, 64), (4, 6), (1, 2), (1,), (8,)),
        ),
        head_channels=(96,), num_classes=10),
    "toy_c": SearchSpace(
        input_resolutions=(32, 48, 64), stem_channels=(8,),
        phases=(
            PhaseSpec((16, 24), (4,), (1, 2, 3), (1,), (4,)),
            PhaseSpec((32, 48, 64), (4,), (1, 2), (1, 2), (8, 16)),
        ),
        head_channels=(64,), num_classes=10),
}


def profile_space(name, space):
    stats = []
    for desc in enumerate_space(space):
        report = evaluate_descriptor(space, desc, TOY_HW)
        stats.append((report.mem_ok, report.overall, report.head_ops + report.tail_ops))
    n = len(stats)
    feasible = sum(1 for ok, _, _ in stats if ok)
    ops = sorted(total for _, _, total in stats)
    print(f"{name}: size={space_size(space)} enumerated={n} feasible={feasible} "
          f"({feasible/n:.1%}) median_ops={ops[n//2]/1e6:.3f}M "
          f"log_ref={math.log(ops[n//2]):.2f}")
    return math.log(ops[n // 2])


def agreement(name, space, log_ref, seeds=20):
    oracle = SurrogateOracle(space, log_ops_ref=log_ref)
    objective = Objective(mode="min_latency", acc_floor=0.5)
    best_desc, best_report, best_acc = brute_force_best(space, TOY_HW, oracle, objective)
    print(f"  brute force: overall={best_report.overall*1e6:.2f}us acc={best_acc:.4f} "
          f"key={objective.key(best_report, best_acc)[:2]}")
    hits = 0
    t0 = time.time()
    for seed in range(seeds):
        cfg = SearchConfig(seed=seed, objective=objective)
        front, log = run(space, TOY_HW, oracle, cfg)
        found = min((m for m in front.members),
                    key=lambda m: objective.key(m.report, m.accuracy))
        if found.desc == best_desc:
            hits += 1
        else:
            k1 = objective.key(found.report, found.accuracy)
            k2 = objective.key(best_report, best_acc)
            print(f"    seed {seed}: missed ({k1[:2]} vs {k2[:2]})"
                  f"{' SAME KEY' if k1 == k2 else ''}")
    print(f"  EA hits {hits}/{seeds} in {time.time()-t0:.1f}s")


def adaptability(name, space, log_ref, seeds=10):
    oracle = SurrogateOracle(space, log_ops_ref=log_ref)
    objective = Objective(mode="min_latency", acc_floor=0.5)
    hw4 = replace(TOY_HW, comp_sen=TOY_HW.comp_sen * 4)

    def share(desc, hw):
        report = evaluate_descriptor(space, desc, hw)
        return report.head_ops / (report.head_ops + report.tail_ops)

    d1, r1, _ = brute_force_best(space, TOY_HW, oracle, objective)
    d4, r4, _ = brute_force_best(space, hw4, oracle, objective)
    print(f"  brute: share 1x={share(d1, TOY_HW):.4f} 4x={share(d4, hw4):.4f}")
    ok = 0
    for seed in range(seeds):
        cfg = SearchConfig(seed=seed, objective=objective)
        f1, _ = run(space, TOY_HW, oracle, cfg)
        f4, _ = run(space, hw4, oracle, cfg)
        b1 = min(f1.members, key=lambda m: objective.key(m.report, m.accuracy))
        b4 = min(f4.members, key=lambda m: objective.key(m.report, m.accuracy))
        s1 = b1.report.head_ops / (b1.report.head_ops + b1.report.tail_ops)
        s4 = b4.report.head_ops / (b4.report.head_ops + b4.report.tail_ops)
        if s4 >= s1:
            ok += 1
        else:
            print(f"    seed {seed}: share dropped {s1:.4f} -> {s4:.4f}")
    print(f"  adaptability holds {ok}/{seeds}")


def main():
    for name, space in TOY_SPACES.items():
        log_ref = profile_space(name, space)
        agreement(name, space, log_ref)
    adaptability("toy_a", TOY_SPACES["toy_a"], math.log(2.2e6))


if __name__ == "__main__":
    main()
