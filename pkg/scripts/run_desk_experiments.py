#!/usr/bin/env python3
"""Desk-scale experiment driver for the Helly pipelines.

Sweeps the instance generators over a seed range and runs the requested
pipeline on each instance, printing one summary row per run and optionally
writing full canonical reports.

Examples:
    python3 scripts/run_desk_experiments.py --pipeline colell --seeds 10
    python3 scripts/run_desk_experiments.py --pipeline theorem1 --kind common-ball \
        --members 3 --seeds 5 --report-dir /tmp/reports
    python3 scripts/run_desk_experiments.py --pipeline saxuso --kind nested-boxes --seeds 3
"""
import argparse
import sys
import time
from pathlib import Path

from quanthelly import (GeneratorSpec, SolverSettings, colell_pipeline,
                        critical_subfamily, generate, saxuso_scenario,
                        theorem1_pipeline)
from quanthelly.errors import QuantHellyError
from quanthelly.instances import emit_report


def class_count(pipeline: str, d: int) -> int:
    if pipeline == "theorem1":
        return 3 * d
    return d * (d + 3) // 2


def run_one(args, seed: int):
    d = args.dimension
    spec = GeneratorSpec(kind=args.kind, seed=seed, dimension=d,
                         class_count=class_count(args.pipeline, d),
                         members_per_class=args.members,
                         target_volume=args.target)
    inst = generate(spec)
    settings = SolverSettings()
    t0 = time.perf_counter()
    if args.pipeline == "ell":
        family = [b for ms in inst.classes.classes for b in ms]
        cert = critical_subfamily(family, settings)
        elapsed = time.perf_counter() - t0
        print(f"seed={seed:4d} kind={args.kind} ell "
              f"selected={len(cert.selected_indices)} "
              f"gap={cert.volume_gap:.3e} time={elapsed:.2f}s")
        return {"selected_members": list(cert.selected_indices),
                "volume_gap": cert.volume_gap}
    if args.pipeline == "colell":
        rep = colell_pipeline(inst.classes, args.target, settings)
    elif args.pipeline == "theorem1":
        rep = theorem1_pipeline(inst.classes, args.target, settings)
    else:
        rep = saxuso_scenario(inst.classes, settings)
    elapsed = time.perf_counter() - t0
    print(f"seed={seed:4d} kind={args.kind} {args.pipeline} "
          f"witness={rep.witness_class} volume={rep.witness_volume:.9g} "
          f"time={elapsed:.2f}s")
    return rep.to_dict()


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pipeline", default="colell",
                   choices=["ell", "colell", "theorem1", "saxuso"])
    p.add_argument("--kind", default="common-ball",
                   choices=["common-ball", "tangent-halfspaces",
                            "nested-boxes", "adversarial"])
    p.add_argument("--dimension", type=int, default=2)
    p.add_argument("--members", type=int, default=2,
                   help="maximum members per class")
    p.add_argument("--target", type=float, default=1.0)
    p.add_argument("--seeds", type=int, default=10,
                   help="number of seeds (0..N-1)")
    p.add_argument("--seed-offset", type=int, default=0)
    p.add_argument("--report-dir", type=str, default=None,
                   help="write one canonical report file per seed")
    args = p.parse_args(argv)

    failures = 0
    for seed in range(args.seed_offset, args.seed_offset + args.seeds):
        try:
            report = run_one(args, seed)
        except QuantHellyError as exc:
            failures += 1
            print(f"seed={seed:4d} kind={args.kind} {args.pipeline} "
                  f"FAILED ({type(exc).__name__}): {exc}")
            continue
        if args.report_dir is not None:
            out = Path(args.report_dir)
            out.mkdir(parents=True, exist_ok=True)
            emit_report(report,
                        out / f"{args.pipeline}-{args.kind}-{seed}.json")
    print(f"done: {args.seeds - failures}/{args.seeds} succeeded")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
