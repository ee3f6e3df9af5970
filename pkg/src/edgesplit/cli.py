"""Command-line interface.

Subcommands: profile, split, search, init-check, sample-plan, enumerate.
Configuration comes from files and flags only (environment variables are
never consulted), numeric flags carry their unit in the name, and every
subcommand writes only inside its --out-dir, so a run is reproducible from
its command line alone. Errors exit nonzero with a machine-readable JSON
record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .baselines import (STRATEGIES, BASELINE_CSV_HEADER, baseline_csv_row)
from .hwmodel import (COST_CSV_HEADER, HardwareConfig, cost_csv_row, evaluate,
                      hardware_from_dict, load_hardware)
from .initnum import SCHEMES, gain_mc, variance
from .netgraph import load_network, split_at
from .search import (LOG_CSV_HEADER, Objective, SearchConfig, SurrogateOracle,
                     TableOracle, log_to_csv, run)
from .splitspace import (descriptor_to_dict, enumerate_space, load_space, sampling_plan)


class CliError(Exception):
    def __init__(self, kind: str, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(detail)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_hw(args) -> HardwareConfig:
    hw = load_hardware(args.hw_file)
    overrides = {}
    if args.bw_total_bps is not None:
        overrides["bw_total"] = args.bw_total_bps / 8.0
    if args.mem_sen_bytes is not None:
        overrides["mem_sen"] = float(args.mem_sen_bytes)
    if args.num_sensors is not None:
        overrides["num_sensors"] = args.num_sensors
    if overrides:
        hw = replace(hw, **overrides)
    if args.comp_sen_scale != 1.0:
        hw = replace(hw, comp_sen=hw.comp_sen * args.comp_sen_scale)
    return hw


def _add_hw_flags(p: argparse.ArgumentParser):
    p.add_argument("hw_file", help="hardware config JSON")
    p.add_argument("--bw-total-bps", type=float, default=None,
                   help="override shared-bus bandwidth, bits per second")
    p.add_argument("--mem-sen-bytes", type=float, default=None,
                   help="override per-sensor memory budget, bytes")
    p.add_argument("--num-sensors", type=int, default=None)
    p.add_argument("--comp-sen-scale", type=float, default=1.0,
                   help="multiply sensor throughput (what-if re-planning)")


def cmd_profile(args) -> int:
    net = load_network(args.net_file)
    hw = _load_hw(args)
    deployment = args.deployment
    if deployment == "auto":
        deployment = "multi" if any(l.kind == "ViewFuse" for l in net.layers) else "single"
    if args.split is not None and args.strategy is not None:
        raise CliError("bad-arguments", "--split and --strategy are mutually exclusive")
    if args.split is not None:
        head, tail, _ = split_at(net, args.split)
        report = evaluate(head, tail, hw, deployment=deployment)
        index = args.split
        strategy = f"split@{index}"
    else:
        strategy = args.strategy or "all-on-agg"
        if strategy not in STRATEGIES:
            raise CliError("bad-arguments", f"unknown strategy {strategy!r}")
        decision = STRATEGIES[strategy](net, hw, deployment=deployment)
        report, index = decision.report, decision.split_index
    out = _out_dir(args)
    payload = {"strategy": strategy, "split_index": index, "report": report.to_dict()}
    (out / "profile.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (out / "profile.csv").write_text(COST_CSV_HEADER + "\n" + cost_csv_row(report) + "\n")
    print(f"{strategy} split={index} overall={report.overall*1e3:.4f}ms "
          f"(sen {report.t_sen*1e3:.4f} + comm {report.t_comm*1e3:.4f} + "
          f"agg {report.t_agg*1e3:.4f}), peak={report.peak_mem_sen/1e6:.3f}MB "
          f"mem_ok={report.mem_ok}")
    return 0


def cmd_split(args) -> int:
    net = load_network(args.net_file)
    hw = _load_hw(args)
    backbone = Path(args.net_file).stem
    has_fuse = any(l.kind == "ViewFuse" for l in net.layers)
    if has_fuse:
        strategies = ["all-on-agg", "neurosurgeon", "split-at-fusion"]
    else:
        strategies = ["all-on-sen", "all-on-agg", "neurosurgeon"]
    rows = [BASELINE_CSV_HEADER]
    for strategy in strategies:
        decision = STRATEGIES[strategy](net, hw)
        rows.append(baseline_csv_row(strategy, backbone, decision))
        r = decision.report
        print(f"{strategy:16s} split={decision.split_index:3d} "
              f"overall={r.overall*1e3:9.4f}ms feasible={decision.feasible}")
    out = _out_dir(args)
    (out / "baselines.csv").write_text("\n".join(rows) + "\n")
    return 0


def cmd_search(args) -> int:
    space = load_space(args.space_file)
    hw = _load_hw(args)
    if args.surrogate:
        oracle = SurrogateOracle(space, seed=args.oracle_seed,
                                 log_ops_ref=args.surrogate_log_ops_ref)
    elif args.oracle_file:
        oracle = TableOracle.load(args.oracle_file)
    else:
        raise CliError("bad-arguments", "provide --surrogate or --oracle-file")
    objective = Objective(mode=args.objective.replace("-", "_"),
                          acc_floor=args.acc_floor,
                          latency_cap_s=None if args.latency_cap_ms is None
                          else args.latency_cap_ms / 1e3)
    cfg = SearchConfig(population_size=args.population, generations=args.generations,
                       mutation_rate=args.mutation_rate, crossover_rate=args.crossover_rate,
                       top_k=args.top_k, seed=args.seed, objective=objective)
    front, log = run(space, hw, oracle, cfg, deployment=args.deployment)
    out = _out_dir(args)
    (out / "front.json").write_text(front.to_json() + "\n")
    (out / "log.csv").write_text(log_to_csv(log))
    best = min(front.members, key=lambda m: objective.key(m.report, m.accuracy))
    print(f"searched {len(log)} generations; front size {len(front.members)}; "
          f"best overall={best.report.overall*1e3:.4f}ms acc={best.accuracy:.4f}")
    return 0


def cmd_init_check(args) -> int:
    shapes = []
    for spec_str in args.shapes.split(","):
        parts = spec_str.strip().split(":")
        if len(parts) != 3:
            raise CliError("bad-arguments", f"shape {spec_str!r} is not k:c_in:c_out")
        shapes.append(tuple(int(p) for p in parts))
    schemes = args.schemes.split(",") if args.schemes else list(SCHEMES)
    rows = ["scheme,k,c_in,c_out,variance,forward_gain,backward_gain"]
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise CliError("bad-arguments", f"unknown scheme {scheme!r}")
        for k, c_in, c_out in shapes:
            var = variance(scheme, k, c_in, c_out)
            fwd, bwd = gain_mc(scheme, k, c_in, c_out, spatial=args.spatial,
                               trials=args.trials, seed=args.seed)
            rows.append(f"{scheme},{k},{c_in},{c_out},{var:.9g},{fwd:.6g},{bwd:.6g}")
            print(rows[-1])
    out = _out_dir(args)
    (out / "init_check.csv").write_text("\n".join(rows) + "\n")
    return 0


def cmd_sample_plan(args) -> int:
    space = load_space(args.space_file)
    plan = sampling_plan(space, mode=args.mode, seed=args.seed, num_views=args.num_views)
    payload = [{"tag": tag, "descriptor": descriptor_to_dict(d)} for tag, d in plan]
    out = _out_dir(args)
    (out / "plan.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    for tag, d in plan:
        print(f"{tag:16s} gates={list(d.gates)} resolution={d.resolution}")
    return 0


def cmd_enumerate(args) -> int:
    space = load_space(args.space_file)
    count = 0
    out = _out_dir(args)
    with open(out / "descriptors.jsonl", "w", encoding="utf-8") as fh:
        for desc in enumerate_space(space, max_count=args.max_count):
            fh.write(json.dumps(descriptor_to_dict(desc), sort_keys=True) + "\n")
            count += 1
    print(f"enumerated {count} descriptors")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesplit",
        description="Analytical split planning for sensor/aggregator DNN inference")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="cost one network under one split")
    p.add_argument("net_file")
    _add_hw_flags(p)
    p.add_argument("--split", type=int, default=None, help="explicit split index")
    p.add_argument("--strategy", default=None,
                   choices=sorted(STRATEGIES), help="named baseline strategy")
    p.add_argument("--deployment", default="auto", choices=["auto", "single", "multi"])
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("split", help="run every applicable baseline strategy")
    p.add_argument("net_file")
    _add_hw_flags(p)
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("search", help="resource-constrained evolutionary search")
    p.add_argument("space_file")
    _add_hw_flags(p)
    p.add_argument("--oracle-file", default=None, help="table oracle JSON")
    p.add_argument("--surrogate", action="store_true", help="use the synthetic oracle")
    p.add_argument("--surrogate-log-ops-ref", type=float, default=16.81,
                   help="log-OPs midpoint of the synthetic accuracy curve")
    p.add_argument("--oracle-seed", type=int, default=0)
    p.add_argument("--population", type=int, default=512)
    p.add_argument("--generations", type=int, default=20)
    p.add_argument("--mutation-rate", type=float, default=0.1)
    p.add_argument("--crossover-rate", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objective", default="min-latency",
                   choices=["min-latency", "max-accuracy"])
    p.add_argument("--acc-floor", type=float, default=None)
    p.add_argument("--latency-cap-ms", type=float, default=None)
    p.add_argument("--deployment", default="single", choices=["single", "multi"])
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("init-check", help="initialization variance and gain report")
    p.add_argument("--schemes", default=",".join(SCHEMES))
    p.add_argument("--shapes", default="1:256:8,1:8:256,3:64:64",
                   help="comma-separated k:c_in:c_out triples")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--spatial", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_init_check)

    p = sub.add_parser("sample-plan", help="supernet-training sampling plan")
    p.add_argument("space_file")
    p.add_argument("--mode", default="single", choices=["single", "multi"])
    p.add_argument("--num-views", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_sample_plan)

    p = sub.add_parser("enumerate", help="lexicographic descriptor enumeration")
    p.add_argument("space_file")
    p.add_argument("--max-count", type=int, default=None)
    p.add_argument("--out-dir", default="edgesplit_out")
    p.set_defaults(func=cmd_enumerate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        record = {"error": exc.kind, "detail": exc.detail}
    except FileNotFoundError as exc:
        record = {"error": "missing-file", "detail": str(exc)}
    except (ValueError, KeyError, IndexError) as exc:
        record = {"error": type(exc).__name__, "detail": str(exc)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
