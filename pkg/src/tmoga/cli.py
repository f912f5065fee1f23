"""Command-line driver.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import benchgen, infotheory, metrics
from .graph import DynamicNetwork, NodeRegistry, ParseError, Partition, _iter_pairs, dump_partition, \
    load_dynamic, load_partition, snapshot_files
from .moea import GAParams
from .pipeline import STRATEGIES, compare_initializations, run_tmoga

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# flag name -> GAParams field
GA_FLAGS = {
    "population": "population_size",
    "generations": "generations",
    "cid_threshold": "cid_threshold",
    "max_depth": "max_depth",
    "tp": "transfer_probability",
    "cp": "crossover_probability",
    "mp": "mutation_probability",
    "seed": "seed",
}
VARIANTS = {
    "tmoga": {},
    "tmoga2": {"snapshot_cost": "community_score", "pareto_selector": "modularity"},
    "sde": {"density_estimator": "shift-based"},
}

log = logging.getLogger("tmoga")


class UsageError(Exception):
    pass


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("GA parameters (defaults: population 200, generations 100, "
                             "cid-threshold 0.8, max-depth 5, tp 0.5, cp 0.8, mp 0.2)")
    g.add_argument("--population", type=int)
    g.add_argument("--generations", type=int)
    g.add_argument("--cid-threshold", type=float)
    g.add_argument("--max-depth", type=int)
    g.add_argument("--tp", type=float, help="transfer probability")
    g.add_argument("--cp", type=float, help="crossover probability")
    g.add_argument("--mp", type=float, help="mutation probability")
    g.add_argument("--seed", type=int)
    g.add_argument("--variant", choices=sorted(VARIANTS))
    g.add_argument("--config", type=Path, help="JSON file of parameters; flags override it")
    g.add_argument("--ci", action="store_true", help="require an explicit seed")


def build_params(args: argparse.Namespace) -> GAParams:
    """Defaults, then the config file, then the variant, then explicit flags."""
    values: dict = {}
    names = {f.name for f in fields(GAParams)}
    variant = None
    if getattr(args, "config", None) is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
        for key, value in config.items():
            key = key.replace("-", "_")
            if key == "variant":
                variant = value
            elif key in GA_FLAGS:
                values[GA_FLAGS[key]] = value
            elif key in names:
                values[key] = value
            elif key != "workers":
                raise UsageError(f"{args.config}: unknown parameter {key!r}")
    variant = getattr(args, "variant", None) or variant
    if variant is not None:
        if variant not in VARIANTS:
            raise UsageError(f"unknown variant {variant!r}")
        values.update(VARIANTS[variant])
    for flag, name in GA_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    if getattr(args, "ci", False) and values.get("seed") is None:
        raise UsageError("--ci requires --seed")
    try:
        return GAParams(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _extend_registry(registry: NodeRegistry, files) -> None:
    for path in files:
        with open(path, encoding="utf-8") as fh:
            try:
                for a, _ in _iter_pairs(fh):
                    registry.add(a)
            except ParseError as exc:
                err = ParseError(f"{path}: {exc}")
                err.line = exc.line
                raise err from None


def _read_partitions(files, registry: NodeRegistry) -> list[Partition]:
    out = []
    for path in files:
        with open(path, encoding="utf-8") as fh:
            try:
                out.append(load_partition(fh, registry))
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}") from None
    return out


def load_inputs(snapshots, truth=None) -> tuple[DynamicNetwork, list[Partition] | None]:
    """Snapshots plus optional truth; nodes seen only in truth files become isolated."""
    network = load_dynamic(snapshots)
    if truth is None:
        return network, None
    files = snapshot_files(truth)
    if len(files) != network.T:
        raise UsageError(f"{len(files)} truth files for {network.T} snapshots")
    registry = network.registry.copy()
    _extend_registry(registry, files)
    if len(registry) > network.n:
        network = DynamicNetwork(tuple(s.with_nodes(len(registry)) for s in network), registry)
    return network, _read_partitions(files, network.registry)


def _stems(source) -> list[str]:
    return [p.stem for p in snapshot_files(source)]


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def cmd_generate(args) -> int:
    if args.model in ("synfix", "synvar"):
        z = 3.0 if args.z is None else args.z
        gen = benchgen.gen_synfix if args.model == "synfix" else benchgen.gen_synvar
        seq = gen(z, args.seed)
        extra = {"model": args.model, "z": z, "seed": args.seed}
    else:
        params = benchgen.EventParams()
        changes = {k: v for k, v in (("nodes", args.nodes), ("snapshots", args.snapshots)) if v is not None}
        params = benchgen.EventParams(**{**params.__dict__, **changes})
        seq = benchgen.gen_events(args.model, params, args.seed)
        extra = {"model": args.model, "seed": args.seed, "params": params.__dict__}
    manifest = seq.write(args.output, extra)
    print(f"wrote {manifest['snapshots']} snapshots to {args.output} "
          f"(communities per snapshot: {manifest['community_counts']})")
    return EXIT_OK


def cmd_detect(args) -> int:
    params = build_params(args)
    network, truth = load_inputs(args.snapshots, args.truth)
    report = run_tmoga(network, params, truth, workers=args.workers)
    out = Path(args.output)
    (out / "partitions").mkdir(parents=True, exist_ok=True)
    (out / "fronts").mkdir(parents=True, exist_ok=True)
    ids = network.registry.ids
    stems = _stems(args.snapshots)
    doc = report.to_dict()
    doc["workers"] = args.workers
    doc["variant"] = args.variant or "tmoga"
    for stem, snap, entry in zip(stems, report.snapshots, doc["snapshots"]):
        part_file = Path("partitions") / f"{stem}.txt"
        with open(out / part_file, "w", encoding="utf-8") as fh:
            dump_partition(snap.partition, fh, ids)
        front_dir = Path("fronts") / stem
        (out / front_dir).mkdir(exist_ok=True)
        rows = []
        for i, member in enumerate(snap.front):
            member_file = front_dir / f"member_{i:03d}.txt"
            with open(out / member_file, "w", encoding="utf-8") as fh:
                dump_partition(member.partition, fh, ids)
            row = {"member": i}
            row.update({f"objective_{j}": v for j, v in enumerate(member.objectives)})
            row.update(modularity=member.modularity, community_score=member.community_score,
                       partition_file=str(member_file))
            rows.append(row)
        _write_csv(out / "fronts" / f"{stem}.csv", rows)
        entry["snapshot_file"] = stem
        entry["partition_file"] = str(part_file)
        entry["front_file"] = str(Path("fronts") / f"{stem}.csv")
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
    for s in report.snapshots:
        extra = "" if s.nmi_truth is None else f"  nmi_truth={s.nmi_truth:.4f}"
        print(f"t={s.t:<3d} Q={s.modularity:.4f} k={s.communities}{extra}  {s.seconds:.2f}s "
              f"(transfer {s.transfer_seconds:.3f}s)")
    print(f"total {report.total_seconds:.2f}s, feature transfer {report.transfer_seconds:.2f}s")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.truth is None and args.snapshots is None:
        raise UsageError("evaluate needs --truth and/or --snapshots")
    part_files = snapshot_files(args.partitions)
    network = None
    if args.snapshots is not None:
        network = load_dynamic(args.snapshots)
        if network.T != len(part_files):
            raise UsageError(f"{len(part_files)} partition files for {network.T} snapshots")
        registry = network.registry.copy()
    else:
        registry = NodeRegistry()
    truth_files = None
    if args.truth is not None:
        truth_files = snapshot_files(args.truth)
        if len(truth_files) != len(part_files):
            raise UsageError(f"{len(part_files)} partition files for {len(truth_files)} truth files")
        _extend_registry(registry, truth_files)
    _extend_registry(registry, part_files)
    parts = _read_partitions(part_files, registry)
    truths = _read_partitions(truth_files, registry) if truth_files else None
    rows = []
    for t, part in enumerate(parts, start=1):
        row = {"t": t, "file": part_files[t - 1].name, "communities": part.k}
        if truths is not None:
            row["nmi_truth"] = metrics.nmi(part, truths[t - 1])
        if network is not None:
            snap = network[t - 1].with_nodes(len(registry))
            row["modularity"] = metrics.modularity(snap, part)
        rows.append(row)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "metrics.csv", rows)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump({"schema_version": 1, "rows": rows}, fh, indent=1)
    for row in rows:
        print("  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    return EXIT_OK


def cmd_init_compare(args) -> int:
    params = build_params(args)
    network, truth = load_inputs(args.snapshots, args.truth)
    strategies = args.strategies or list(STRATEGIES)
    rows = compare_initializations(network, truth, strategies, params.seed, params,
                                   solutions=args.solutions, top=args.top)
    _write_csv(Path(args.output), rows)
    for row in rows:
        print("  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rng = np.random.default_rng(args.seed)
    thm1, gap3, kl3, gap4 = [], [], [], []
    ok = True
    for i in range(args.trials):
        inst = infotheory.random_instance(rng, args.max_nodes)
        if args.inject_corruption and i == 0:
            inst = infotheory.corrupt_instance(inst, rng)
        rep = infotheory.verify_theorems(inst)
        ok &= rep.passed()
        thm1.append(rep.thm1)
        gap3.append(rep.thm3_gap)
        kl3.append(rep.thm3_kl)
        gap4.append(rep.thm4_gap)
    exhaustive = all(infotheory.theorem1_exhaustive(n) for n in range(1, args.exhaustive_nodes + 1))
    ok &= exhaustive
    tol = infotheory.TOLERANCE
    gap3, kl3, gap4 = np.array(gap3), np.array(kl3), np.array(gap4)
    table = [
        ("entropy reduction (random)", all(thm1), None),
        (f"entropy reduction (all partitions, n<={args.exhaustive_nodes})", exhaustive, None),
        ("compression gap >= 0", bool(np.all(gap3 >= -tol)), gap3),
        ("compression gap = -KL", bool(np.all(np.abs(gap3 + kl3) <= tol)), gap3 + kl3),
        ("temporal NMI gap >= 0", bool(np.all(gap4 >= -tol)), gap4),
    ]
    print(f"{'check':<44} {'result':<6} {'min':>12} {'median':>12}")
    for name, passed, values in table:
        lo = med = ""
        if values is not None:
            lo, med = f"{values.min():12.3e}", f"{np.median(values):12.3e}"
        print(f"{name:<44} {'PASS' if passed else 'FAIL':<6} {lo:>12} {med:>12}")
    print(f"{args.trials} trials: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmoga", description="Dynamic community detection with feature transfer.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark sequence")
    p.add_argument("model", choices=["synfix", "synvar", *benchgen.EVENT_MODELS])
    p.add_argument("--z", type=float, help="mixing for synfix/synvar (default 3)")
    p.add_argument("--nodes", type=int, help="event models only")
    p.add_argument("--snapshots", type=int, help="event models only")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="detect communities in a snapshot directory")
    p.add_argument("snapshots")
    p.add_argument("--truth", help="truth directory (adds NMI-to-truth to the report)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    _add_ga_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score partition files")
    p.add_argument("partitions")
    p.add_argument("--truth")
    p.add_argument("--snapshots")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("init-compare", help="compare initial-population strategies")
    p.add_argument("snapshots")
    p.add_argument("--truth", required=True)
    p.add_argument("--strategies", nargs="+", choices=STRATEGIES)
    p.add_argument("--solutions", type=int, default=200)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("-o", "--output", required=True)
    _add_ga_flags(p)
    p.set_defaults(func=cmd_init_compare)

    p = sub.add_parser("verify", help="randomised checks of the information-theoretic bounds")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=12)
    p.add_argument("--exhaustive-nodes", type=int, default=6)
    p.add_argument("--inject-corruption", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
