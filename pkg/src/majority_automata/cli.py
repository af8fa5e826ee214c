"""Command-line driver.

Exit codes: 0 success, 1 domain error (bad file, failed run, cap exceeded),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import analysis, dynamics, experiments
from .dynamics import Color, Generation, UpdateRule
from .topology import Topology, lattice_size

DEFAULT_SEED = 0xC0FFEE


class UsageError(Exception):
    pass


def _int(text: str) -> int:
    return int(text, 0)


def _steps(text: str) -> int | str:
    if text == "auto":
        return "auto"
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer or 'auto'")
    return value


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_topology(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--topology", choices=["torus", "grid", "cycle", "graph"], required=required)
    p.add_argument("--n", type=int, help="lattice side or cycle length")
    p.add_argument("--neighborhood", choices=["neumann", "moore"], default="neumann")
    p.add_argument("--graph-file", help="edge list for --topology graph")


def _add_rule(p: argparse.ArgumentParser, choices: Sequence[str]) -> None:
    p.add_argument("--rule", choices=list(choices), required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majority-automata",
        description="Majority and biased-majority cellular automata.",
        allow_abbrev=False,
    )
    parser.add_argument("--json", action="store_true", help="one JSON object per result")
    sub = parser.add_subparsers(dest="command", required=True)
    all_rules = ["majority", "biased", "random", "conservative"]

    p = sub.add_parser("simulate", allow_abbrev=False, help="run one generation to its cycle")
    _add_topology(p)
    _add_rule(p, all_rules)
    p.add_argument("--init-file", help="initial generation (B/R text)")
    p.add_argument("--p-b", type=float, help="random initial density when no --init-file")
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    p.add_argument("--max-steps", type=_steps, default="auto")
    p.add_argument("--dump-steps", metavar="DIR", help="write every generation to DIR")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("sweep", allow_abbrev=False, help="Monte-Carlo sweep over p_b")
    p.add_argument("--config", help="JSON experiment config")
    _add_topology(p, required=False)
    p.add_argument("--rule", choices=all_rules)
    p.add_argument("--p-b", type=_floats, help="comma-separated densities")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    p.add_argument("--max-steps", type=_steps, default="auto")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    verify_help = {
        "verify-robust": "check that a set keeps its color after one step, whatever the outside",
        "verify-eternal": "check that a color never dies out once the set holds it (exhaustive)",
    }
    for name, text in verify_help.items():
        p = sub.add_parser(name, allow_abbrev=False, help=text)
        _add_topology(p)
        _add_rule(p, ["majority", "biased"])
        p.add_argument("--pattern", required=True, help="B/R/. pattern file")
        p.add_argument("--color", help="b or r (defaults to the pattern's color)")
        if name == "verify-eternal":
            p.add_argument("--budget", type=int, default=analysis.DEFAULT_ETERNAL_BUDGET,
                           help="largest number of vertices outside the set")
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("bounds", allow_abbrev=False, help="closed-form bounds")
    _add_topology(p, required=False)
    p.add_argument("--rule", choices=["majority", "biased"])
    p.add_argument("--thresholds", action="store_true", help="also print (p1, p2)")
    p.add_argument("--survival", choices=["disjoint", "azuma"])
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--p-b", type=float)
    p.add_argument("--a", help="comma-separated multiplicities, or @FILE")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("rectangulate", allow_abbrev=False, help="rectangulate a generation's cells")
    _add_topology(p)
    p.add_argument("--generation", required=True, help="B/R generation file")
    p.add_argument("--color", default="b")
    p.add_argument("--components", choices=["topology", "moore"], default="topology")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    return parser


def _topology(args) -> Topology:
    if args.topology == "graph":
        if not args.graph_file:
            raise UsageError("--topology graph needs --graph-file")
        return experiments.TopologySpec("graph", 0, args.neighborhood, args.graph_file).build()
    if args.n is None:
        raise UsageError(f"--topology {args.topology} needs --n")
    return experiments.TopologySpec(args.topology, args.n, args.neighborhood).build()


def _counts(args) -> tuple[int, int]:
    """``(|E|, |V|)``; lattices and cycles are counted without being built."""
    if args.topology in ("torus", "grid"):
        if args.n is None:
            raise UsageError(f"--topology {args.topology} needs --n")
        V, E = lattice_size(args.n, args.neighborhood, args.topology == "torus")
        return E, V
    if args.topology == "cycle":
        if args.n is None:
            raise UsageError("--topology cycle needs --n")
        if args.n < 3:
            raise ValueError("a cycle needs n >= 3")
        return args.n, args.n
    t = _topology(args)
    return t.edge_count, t.vertex_count


def _emit(args, payload: dict, lines: Sequence[str], out) -> None:
    if args.json:
        print(json.dumps(payload), file=out)
    else:
        for line in lines:
            print(line, file=out)


def _kv(payload: dict) -> list[str]:
    return [f"{k}={v}" for k, v in payload.items()]


def cmd_simulate(args, out) -> int:
    if (args.init_file is None) == (args.p_b is None):
        raise UsageError("give exactly one of --init-file and --p-b")
    t = _topology(args)
    if args.init_file:
        g0 = dynamics.read_generation(args.init_file, t)
    else:
        g0 = experiments.random_generation(t, args.p_b, args.seed)
    rule = UpdateRule.parse(args.rule, seed=args.seed)
    observer = None
    if args.dump_steps:
        target = Path(args.dump_steps)
        target.mkdir(parents=True, exist_ok=True)

        def observer(k: int, g: Generation) -> None:
            dynamics.write_generation(target / f"step_{k:06d}.txt", t, g)

    outcome = dynamics.run_to_cycle(t, rule, g0, args.max_steps, observer=observer)
    payload = outcome.as_dict()
    _emit(args, payload, _kv(payload), out)
    return 0


def cmd_sweep(args, out) -> int:
    if args.config:
        cfg = experiments.ExperimentConfig.load(args.config)
    else:
        missing = [f for f in ("topology", "rule", "p_b", "trials") if getattr(args, f) is None]
        if missing:
            raise UsageError("without --config, sweep needs " + ", ".join("--" + m.replace("_", "-") for m in missing))
        if args.topology != "graph" and args.n is None:
            raise UsageError(f"--topology {args.topology} needs --n")
        topo = experiments.TopologySpec(args.topology, args.n or 0, args.neighborhood, args.graph_file)
        cfg = experiments.ExperimentConfig(
            topo, args.rule, tuple(sorted(args.p_b)), args.trials, args.seed, args.max_steps
        )
    summary = experiments.sweep(cfg, workers=args.workers)
    text = summary.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.json:
        for row in summary.rows:
            print(json.dumps({
                "p_b": row.p_b, "trials": row.trials,
                "frac_b_mono": float(row.frac_b_mono), "frac_r_mono": float(row.frac_r_mono),
                "frac_bichromatic": float(row.frac_bichromatic),
                "mean_consensus_time": row.mean_consensus_time,
                "max_consensus_time": row.max_consensus_time,
                "mean_final_blue_density": row.mean_final_blue_density,
            }), file=out)
    elif not args.out:
        out.write(text)
    return 0


def _pattern_set(args, t: Topology) -> tuple[list[int], Color]:
    cells = dynamics.read_pattern(args.pattern, t)
    if not cells:
        raise ValueError(f"{args.pattern}: pattern has no cells")
    if args.color:
        return sorted(cells), Color.parse(args.color)
    colors = set(cells.values())
    if len(colors) != 1:
        raise ValueError(f"{args.pattern}: mixed colors; pass --color")
    return sorted(cells), colors.pop()


def cmd_verify_robust(args, out) -> int:
    t = _topology(args)
    s, c = _pattern_set(args, t)
    result = analysis.is_robust_set(t, args.rule, s, c)
    op = ">" if (args.rule == "biased" and c is Color.RED) else ">="
    check = f"2*|N(v) & S| {op} |N(v)| for every v in S"
    payload = {"robust": result, "color": c.value, "size": len(s), "checked": check}
    _emit(args, payload, [str(result).lower(), f"checked: {check}"], out)
    return 0


def cmd_verify_eternal(args, out) -> int:
    t = _topology(args)
    s, c = _pattern_set(args, t)
    result = analysis.is_eternal_set(t, args.rule, s, c, budget=args.budget)
    free = t.vertex_count - len(s)
    check = f"exhaustive over 2^{free} colorings outside the set"
    payload = {"eternal": result, "color": c.value, "size": len(s), "checked": check}
    _emit(args, payload, [str(result).lower(), f"checked: {check}"], out)
    return 0


def _multiplicities(text: str) -> list[int]:
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    return [int(x) for x in text.replace(",", " ").split()]


def cmd_bounds(args, out) -> int:
    results: list[dict] = []
    if args.survival:
        missing = [f for f in ("k", "s", "p_b") if getattr(args, f) is None]
        if missing:
            raise UsageError("--survival needs " + ", ".join("--" + m.replace("_", "-") for m in missing))
        a = _multiplicities(args.a) if args.a else None
        report = analysis.survival_bound(args.survival, args.k, args.s, args.p_b, a)
        results.append({"survival_bound": report.bound_value, "kind": args.survival,
                        "k": args.k, "s": args.s, "p_b": args.p_b})
    if args.topology:
        if not args.rule:
            raise UsageError("bounds with --topology needs --rule")
        report = analysis.consensus_time_bound_for(*_counts(args), args.rule)
        results.append({"consensus_time_bound": int(report.bound_value), **report.inputs})
        if args.thresholds:
            if args.topology != "torus":
                raise UsageError("--thresholds applies to --topology torus")
            p1, p2 = analysis.threshold_values(args.rule, args.neighborhood, args.n)
            entry = {"p1": p1, "p2": p2}
            if args.rule == "biased":
                entry["note"] = analysis.LOG_NOTE
            results.append(entry)
    if not results:
        raise UsageError("bounds needs --topology/--rule or --survival")
    for entry in results:
        _emit(args, entry, _kv(entry), out)
    return 0


def cmd_rectangulate(args, out) -> int:
    t = _topology(args)
    if t.lattice is None:
        raise UsageError("rectangulate needs a torus or grid")
    g = dynamics.read_generation(args.generation, t)
    m = analysis.covering_rectangles(t, g, args.color, moore=args.components == "moore")
    rects = sorted(analysis.rectangulate(t, m))
    if args.json:
        print(json.dumps({"rectangles": [
            {"anchor_i": r.anchor_i, "anchor_j": r.anchor_j, "l1": r.l1, "l2": r.l2} for r in rects
        ]}), file=out)
    else:
        print(f"rectangles={len(rects)}", file=out)
        for r in rects:
            print(f"anchor=({r.anchor_i},{r.anchor_j}) extent={r.l1}x{r.l2}", file=out)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify-robust": cmd_verify_robust,
    "verify-eternal": cmd_verify_eternal,
    "bounds": cmd_bounds,
    "rectangulate": cmd_rectangulate,
}


def run_cli(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
