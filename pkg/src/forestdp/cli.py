"""Command-line interface: ``forestdp {release,extension,audit,bench}``.

Exit codes: 0 success, 1 unreadable or malformed input (or a failed audit),
2 bad flags, 3 input too large for the requested oracle.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from .audit import run_audit, summary
from .combinatorics import EXACT_STAR_DEGREE_CAP, largest_induced_star_exact
from .errors import CapacityError, ForestDPError, GraphParseError, VertexRangeError
from .graph import Graph, connected_components, gen_geometric, gen_gnp, parse_edge_list
from .mechanisms import PrivacyBudget
from .polytope import eval_extension_bruteforce, eval_lipschitz_extension
from .release import default_beta, private_cc, private_sf
from .rng import make_stream

BENCH_COLUMNS = [
    "model",
    "n",
    "param",
    "epsilon",
    "seed",
    "true_cc",
    "true_sf",
    "released_value",
    "abs_error",
    "chosen_delta",
    "s_of_G",
    "wall_ms",
]

BENCH_EPILOG = (
    "Threat model: the bench operator owns the data, so true_cc and true_sf are "
    "printed next to the private release for error measurement. Only "
    "released_value and chosen_delta are differentially private."
)


class InputError(Exception):
    pass


def _read_graph(path: str) -> Graph:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_edge_list(data)
    except (GraphParseError, VertexRangeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0 or x == float("inf"):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return x


def _probability(text: str) -> float:
    x = _positive(text)
    if not x < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text!r}")
    return x


def _budget(g: Graph, epsilon: float, beta: float | None) -> PrivacyBudget:
    return PrivacyBudget(epsilon, default_beta(g.n) if beta is None else beta)


# -- commands ----------------------------------------------------------------


def cmd_release(args) -> int:
    g = _read_graph(args.input)
    budget = _budget(g, args.epsilon, args.beta)
    release = private_cc if args.stat == "cc" else private_sf
    report = release(g, budget, args.seed)
    print(report.to_json(debug_insecure=args.debug_insecure))
    return 0


def cmd_extension(args) -> int:
    g = _read_graph(args.input)
    if args.brute_force:
        value = eval_extension_bruteforce(g, args.delta)
        out = {"value": value, "oracle": "brute-force", "iterations": None, "rows_added": None}
    else:
        cert = eval_lipschitz_extension(g, args.delta)
        out = {
            "value": cert.value,
            "oracle": "cutting-plane",
            "iterations": cert.iterations,
            "rows_added": cert.rows_added,
        }
    out.update(n=g.n, m=g.m, delta=args.delta)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_audit(args) -> int:
    results = run_audit(args.max_n, args.trials, args.seed, inject_fault=args.inject_fault)
    out = summary(results)
    out.update(max_n=args.max_n, trials=args.trials, seed=args.seed)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if out["passed"] else 1


def _parse_param(text: str, n: int) -> float:
    """``0.002`` or ``c/n`` (for example ``2/n``)."""
    if text.endswith("/n"):
        return float(text[:-2]) / max(n, 1)
    return float(text)


def _s_of_g(g: Graph) -> int | str:
    if g.n <= EXACT_STAR_DEGREE_CAP or g.max_degree() <= EXACT_STAR_DEGREE_CAP:
        return largest_induced_star_exact(g)[0]
    return ""


def bench_row(model: str, g: Graph, param: float, epsilon: float, seed: int, stat: str, beta: float | None) -> dict:
    rng = make_stream(seed)
    start = time.perf_counter()
    budget = _budget(g, epsilon, beta)
    report = (private_cc if stat == "cc" else private_sf)(g, budget, rng)
    wall_ms = (time.perf_counter() - start) * 1000
    cc = connected_components(g).count
    sf = g.n - cc
    truth = cc if stat == "cc" else sf
    return {
        "model": model,
        "n": g.n,
        "param": param,
        "epsilon": epsilon,
        "seed": seed,
        "true_cc": cc,
        "true_sf": sf,
        "released_value": report.noisy_value,
        "abs_error": abs(report.noisy_value - truth),
        "chosen_delta": report.chosen_delta,
        "s_of_G": _s_of_g(g),
        "wall_ms": round(wall_ms, 3),
    }


def bench_graph(model: str, n: int, param: float, seed: int, input_path: str | None) -> Graph:
    """Trial graph for ``seed``; graph and release streams are disjoint children of it."""
    graph_rng = make_stream(np.random.SeedSequence(seed).spawn(1)[0])
    if model == "gnp":
        return gen_gnp(n, param, graph_rng)
    if model == "geometric":
        return gen_geometric(n, param, graph_rng)
    return _read_graph(input_path)


def cmd_bench(args) -> int:
    if args.model == "file" and not args.input:
        raise InputError("--model file needs --input")
    g_file = _read_graph(args.input) if args.model == "file" else None
    n = g_file.n if g_file is not None else args.n
    if n is None:
        raise InputError("--n is required for generated models")
    param = _parse_param(args.param, n) if args.param is not None else float("nan")
    writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for t in range(args.trials):
        seed = args.seed + t
        g = g_file if g_file is not None else bench_graph(args.model, n, param, seed, None)
        writer.writerow(bench_row(args.model, g, param, args.epsilon, seed, args.stat, args.beta))
        sys.stdout.flush()
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forestdp", description="Node-private spanning-forest and component counts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("release", help="privately release f_cc or f_sf of an edge-list graph")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", required=True, type=_positive)
    p.add_argument("--beta", type=_probability, default=None, help="GEM failure probability (default 1/ln ln n, at most 1/2)")
    p.add_argument("--stat", choices=["cc", "sf"], default="cc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--debug-insecure", action="store_true", help="include the non-private pre-noise value")
    p.set_defaults(func=cmd_release)

    p = sub.add_parser("extension", help="evaluate the Lipschitz extension f_Delta")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", required=True, type=float)
    p.add_argument("--brute-force", action="store_true", help="write out every subset row (n <= 14)")
    p.set_defaults(func=cmd_extension)

    p = sub.add_parser("audit", help="run the randomized invariant suites")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("bench", help="benchmark releases on random graph families (CSV)", epilog=BENCH_EPILOG)
    p.add_argument("--model", required=True, choices=["gnp", "geometric", "file"])
    p.add_argument("--n", type=int)
    p.add_argument("--param", help="p for gnp (a number or c/n), r for geometric")
    p.add_argument("--input", help="edge-list file for --model file")
    p.add_argument("--epsilon", required=True, type=_positive)
    p.add_argument("--beta", type=_probability, default=None)
    p.add_argument("--stat", choices=["cc", "sf"], default="cc")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "delta", 1) is not None and getattr(args, "delta", 1) < 1:
        parser.error("--delta must be >= 1")
    if getattr(args, "trials", 0) < 0:
        parser.error("--trials must be non-negative")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"forestdp: error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"forestdp: capacity: {exc}", file=sys.stderr)
        return 3
    except (ForestDPError, ValueError) as exc:
        print(f"forestdp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
