"""Command-line entry points: ``plan``, ``bench`` and ``export-dot``.

Exit codes: 0 success, 1 runtime error, 2 no route found (outputs are still
written), 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import BenchmarkManifest, rows_to_csv, run_benchmark
from .errors import InvalidInputError, PlanningError
from .export import dumps, graph_from_json, graph_to_dict, to_dot
from .models import SyntheticWorld, feasibility_model, load_reaction_file
from .planner import POLICIES, RunAborted, run
from .routes import extract_routes
from .svalue import SearchParams

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_ROUTE = 2
EXIT_USAGE = 64

log = logging.getLogger("retrograd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_model(text: str):
    """``synthetic:seed=N[,key=value...]`` or ``file:PATH`` -> (model, inventory)."""
    kind, _, rest = text.partition(":")
    if kind == "synthetic":
        kwargs = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise UsageError(f"bad synthetic option {item!r}; expected key=value")
            kwargs[key.strip()] = _parse_value(val.strip())
        try:
            world = SyntheticWorld(**kwargs)
        except TypeError as exc:
            raise UsageError(f"bad synthetic option: {exc}") from None
        return world, world
    if kind == "file" and rest:
        return load_reaction_file(rest)
    raise UsageError(f"--model must be synthetic:seed=N or file:PATH, got {text!r}")


def parse_eval(text: str) -> tuple[str, int]:
    if text in ("exact", "auto"):
        return text, 10_000
    if text.startswith("mc:"):
        try:
            n = int(text[3:])
        except ValueError:
            n = 0
        if n >= 1:
            return "mc", n
    raise UsageError(f"--eval must be exact, auto or mc:N with N >= 1, got {text!r}")


def parse_exports(text: str) -> set[str]:
    kinds = {k.strip() for k in text.split(",") if k.strip()}
    bad = kinds - {"json", "dot"}
    if bad:
        raise UsageError(f"--export accepts json and dot, got {sorted(bad)}")
    return kinds


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


def cmd_plan(args) -> int:
    try:
        model, inventory = parse_model(args.model)
        method, mc_n = parse_eval(args.eval)
        exports = parse_exports(args.export)
        p = SearchParams(s0=args.s0, theta_m=args.theta_m, theta_r=args.theta_r)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except InvalidInputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    try:
        g, stats = run(args.target, model, feasibility_model(args.feasibility), inventory, p,
                       budget=args.iters, policy=args.algo, seed=args.seed,
                       mc_samples=mc_n, eval_method=method, max_routes=0)
    except RunAborted as exc:
        sys.stderr.write(f"error: {exc}\n")
        g, stats = exc.graph, exc.stats
        status = EXIT_ERROR

    routes = extract_routes(g, args.max_routes)
    if status == EXIT_OK and not routes:
        status = EXIT_NO_ROUTE
    stats.routes_found = len(routes)

    config = {"target": args.target, "model": args.model, "feasibility": args.feasibility,
              "algo": args.algo, "s0": args.s0, "theta_m": args.theta_m, "theta_r": args.theta_r,
              "iters": args.iters, "eval": args.eval, "seed": args.seed}
    _write(out / "run.json", dumps({"config": config, "stats": stats.to_dict()}))
    _write(out / "eval.json", dumps(stats.evaluation))
    _write(out / "routes.json", dumps({"routes": [r.to_dict(g) for r in routes]}))
    if "json" in exports:
        _write(out / "graph.json", dumps(graph_to_dict(g, p)))
    if "dot" in exports:
        _write(out / "graph.dot", to_dot(g, routes[0].nodes if routes else None))

    ev = stats.evaluation
    print(f"target {args.target}: SSP {ev['value']:.6g} ({ev['method']}), "
          f"{len(routes)} route(s), {stats.iterations} iterations, "
          f"{stats.molecules} molecules, {stats.reactions} reactions")
    return status


def cmd_bench(args) -> int:
    try:
        manifest = BenchmarkManifest.load(args.manifest)
    except (InvalidInputError, TypeError) as exc:
        sys.stderr.write(f"error: invalid manifest: {exc}\n")
        return EXIT_ERROR
    if args.out:
        manifest.output_dir = args.out
    rows = run_benchmark(manifest)
    sys.stdout.write(rows_to_csv(rows))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    try:
        g = graph_from_json(Path(args.graph).read_text())
        text = to_dot(g)
    except OSError as exc:
        sys.stderr.write(f"error: cannot read {args.graph}: {exc}\n")
        return EXIT_ERROR
    except (PlanningError, KeyError, TypeError, ValueError, IndexError) as exc:
        sys.stderr.write(f"error: malformed graph JSON {args.graph}: {exc}\n")
        return EXIT_ERROR
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="retrograd", description="Gradient-guided synthesis planning.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    plan = sub.add_parser("plan", help="search for synthesis plans of one target")
    plan.add_argument("--target", required=True)
    plan.add_argument("--model", default="synthetic:seed=0",
                      help="synthetic:seed=N[,key=value...] or file:PATH")
    plan.add_argument("--feasibility", choices=["constant", "rank"], default="constant")
    plan.add_argument("--algo", choices=POLICIES, default="gradient")
    plan.add_argument("--s0", type=float, default=0.05)
    plan.add_argument("--theta-m", type=float, default=1.0)
    plan.add_argument("--theta-r", type=float, default=1.0)
    plan.add_argument("--iters", type=int, default=100)
    plan.add_argument("--eval", default="auto", help="exact, auto or mc:N")
    plan.add_argument("--out", default="plan-out")
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--export", default="json,dot", help="comma list of json, dot")
    plan.add_argument("--max-routes", type=int, default=10)
    plan.set_defaults(func=cmd_plan)

    bench = sub.add_parser("bench", help="run a benchmark manifest")
    bench.add_argument("manifest")
    bench.add_argument("--out", help="override the manifest output directory")
    bench.set_defaults(func=cmd_bench)

    dot = sub.add_parser("export-dot", help="render a graph.json file as Graphviz DOT")
    dot.add_argument("graph")
    dot.add_argument("-o", "--output")
    dot.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "iters", 0) < 0:
        sys.stderr.write("usage error: --iters must be >= 0\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PlanningError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
