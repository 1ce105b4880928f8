"""
Command-line entry point for the CoDD lab.

Every subcommand prints a RunReport as JSON on stdout: the resolved config,
the library version and the result payload. Exit codes are 0 on success,
1 on domain errors (reported as `error[<category>]: <message>` on stderr)
and 2 on usage errors.
"""

import argparse
import sys
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pydantic

from codd_lab import __version__, logger
from codd_lab.artifacts import BinaryArtifact, CsvArtifact, JsonArtifact
from codd_lab.artifacts.schemas import (
    load_distribution,
    load_labeling,
    load_partition,
    load_program,
    load_relevance,
    load_tree,
    read_codd_binary,
)
from codd_lab.artifacts.writers import dumps_json
from codd_lab.calculus.codd import (
    FuelExhausted,
    codd_size,
    eval_codd,
    find_repeats,
    memoize_all,
    memoize_rewrite,
    tree_to_codd,
)
from codd_lab.calculus.dtree import average_depth, greedy_tree, optimal_tree, tree_to_dict
from codd_lab.calculus.encoding import encode
from codd_lab.calculus.expr import CoddExpr, dag_node_count, parse_expr, render, unfolded_size
from codd_lab.calculus.partitions import (
    Distribution,
    logical_entropy,
    max_logical_entropy,
    shannon_entropy,
)
from codd_lab.calculus.pattern import is_approx_pattern, is_pattern
from codd_lab.core.config import (
    CorrelationConfig,
    EnsembleConfig,
    GrowthConfig,
    ProfileConfig,
)
from codd_lab.core.constants import DEFAULT_FUEL, DEFAULT_SEED, DEFAULT_TRACE_ALPHABET
from codd_lab.core.exceptions import CoddLabError, InvalidParameterError
from codd_lab.core.logging_config import set_console_level, set_log_file
from codd_lab.experiments.growth import (
    entropy_concentration_profile,
    grow_random,
    size_entropy_ensemble,
)
from codd_lab.experiments.synsem import correlation_experiment
from codd_lab.utils import format_rational

Payload = tuple[dict[str, Any], dict[str, Any]]


@dataclass(frozen=True)
class RunReport:
    """Resolved config, version and payload of one run."""

    command: str
    config: dict[str, Any]
    payload: dict[str, Any]
    version: str = __version__
    duration: float | None = None

    def to_dict(self) -> dict[str, Any]:
        report = {
            "command": self.command,
            "config": self.config,
            "payload": self.payload,
            "version": self.version,
        }
        if self.duration is not None:
            report["duration_seconds"] = self.duration
        return report


def _validated(model: type[pydantic.BaseModel], **values: Any) -> Any:
    try:
        return model(**values)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise InvalidParameterError(f"--{field.replace('_', '-')}: {first['msg']}")


def _distribution_for(path: Path | None, n: int) -> Distribution | None:
    if path is None:
        return None
    d = load_distribution(path)
    if d.space.n != n:
        raise InvalidParameterError(f"{path} is a distribution on {d.space.n} bits, expected {n}")
    return d


def _expr_summary(e: CoddExpr) -> dict[str, Any]:
    return {
        "expr": render(e),
        "nodes": dag_node_count(e),
        "unfolded": unfolded_size(e),
        "size": codd_size(e),
    }


# =============================================================================
# Subcommands
# =============================================================================


def cmd_entropy(args: argparse.Namespace) -> Payload:
    p = load_partition(args.partition)
    d = load_distribution(args.dist) if args.dist else Distribution.uniform(p.space)
    config = {"partition": str(args.partition), "dist": str(args.dist) if args.dist else None}
    return config, {
        "cells": p.num_cells,
        "logical_entropy": format_rational(logical_entropy(p, d)),
        "max_logical_entropy": format_rational(max_logical_entropy(d)),
        "shannon_entropy": shannon_entropy(p, d),
    }


def cmd_tree(args: argparse.Namespace) -> Payload:
    lab = load_labeling(args.labeling)
    d = load_distribution(args.dist) if args.dist else Distribution.uniform(lab.space)
    if args.tree_command == "optimal":
        solution = optimal_tree(lab, d, prefer_gain=args.prefer_gain)
        tree, depth = solution.tree, solution.average_depth
    else:
        tree = greedy_tree(lab, d)
        depth = average_depth(tree, d)
    config = {
        "labeling": str(args.labeling),
        "dist": str(args.dist) if args.dist else None,
        "method": args.tree_command,
        "prefer_gain": getattr(args, "prefer_gain", False),
    }
    return config, {"tree": tree_to_dict(tree), "average_depth": format_rational(depth)}


def _read_expr(args: argparse.Namespace) -> CoddExpr:
    if args.expr is not None:
        return parse_expr(args.expr)
    return read_codd_binary(args.input)


def cmd_codd_eval(args: argparse.Namespace) -> Payload:
    e = _read_expr(args)
    operands = [parse_expr(text) for text in args.arg]
    outcome = eval_codd(e, operands, fuel=args.fuel)
    config = {"fuel": args.fuel, "args": list(args.arg), "expr": render(e)}
    if isinstance(outcome, FuelExhausted):
        logger.warning(f"Evaluation ran out of fuel after {outcome.steps} steps")
        return config, {"status": "fuel-exhausted", "steps": outcome.steps}
    if args.out:
        BinaryArtifact(args.out, encode(outcome.value).to_bytes()).write()
    return config, {"status": "normalized", "steps": outcome.steps, **_expr_summary(outcome.value)}


def cmd_codd_encode(args: argparse.Namespace) -> Payload:
    if args.tree is not None:
        t, _ = load_tree(args.tree)
        e = tree_to_codd(t, args.label_bits)
    else:
        e = parse_expr(args.expr)
    encoded = encode(e)
    if args.out:
        BinaryArtifact(args.out, encoded.to_bytes()).write()
    config = {"tree": str(args.tree) if args.tree else None, "label_bits": args.label_bits}
    return config, {"bits": len(encoded), "hex": encoded.to_bytes().hex(), **_expr_summary(e)}


def cmd_codd_decode(args: argparse.Namespace) -> Payload:
    e = read_codd_binary(args.input)
    return {"in": str(args.input)}, _expr_summary(e)


def cmd_codd_memoize(args: argparse.Namespace) -> Payload:
    e = _read_expr(args)
    repeats = find_repeats(e)
    if args.all:
        result = memoize_all(e)
    elif args.pattern is not None:
        result = memoize_rewrite(e, parse_expr(args.pattern))
    elif repeats:
        result = memoize_rewrite(e, repeats[0].pattern)
    else:
        logger.warning("No repeated pattern found; expression left unchanged")
        result = e
    if args.out:
        BinaryArtifact(args.out, encode(result).to_bytes()).write()
    config = {"all": args.all, "pattern": args.pattern}
    return config, {
        "repeats": [
            {"pattern": render(r.pattern), "occurrences": r.occurrences} for r in repeats
        ],
        "before": _expr_summary(e),
        "after": _expr_summary(result),
    }


def cmd_pattern_check(args: argparse.Namespace) -> Payload:
    P = load_program(args.p, args.fuel)
    F = load_program(args.f, args.fuel)
    rho = load_relevance(args.rho)
    d = _distribution_for(args.dist, F.space.n)
    if args.slack is None:
        verdict = is_pattern(P, F, rho, d)
    else:
        verdict = is_approx_pattern(P, F, rho, args.slack, d)
    config = {
        "p": str(args.p),
        "f": str(args.f),
        "rho": str(args.rho),
        "dist": str(args.dist) if args.dist else None,
        "slack": args.slack,
    }
    return config, verdict.to_dict()


def cmd_synsem_correlate(args: argparse.Namespace) -> Payload:
    config = _validated(
        CorrelationConfig,
        n=args.n,
        pairs=args.pairs,
        seed=args.seed,
        schemes=tuple(s.strip() for s in args.scheme.split(",") if s.strip()),
        flip_max=args.flip_max,
        decay=args.decay,
    )
    report = correlation_experiment(config, _distribution_for(args.dist, config.n), args.jobs)
    if args.csv:
        CsvArtifact(args.csv, report.to_frame()).write()
    payload = report.to_dict()
    return payload.pop("config"), payload


def cmd_grow(args: argparse.Namespace) -> Payload:
    config = _validated(
        GrowthConfig, n=args.n, steps=args.steps, seed=args.seed, alphabet=args.alphabet
    )
    trace = grow_random(config, _distribution_for(args.dist, config.n))
    if args.trace:
        CsvArtifact(args.trace, trace.to_frame()).write()
    payload = trace.to_dict()
    payload["decreases"] = trace.violations()
    payload["final_tree"] = tree_to_dict(trace.tree)
    return config.model_dump(mode="json"), payload


def cmd_grow_ensemble(args: argparse.Namespace) -> Payload:
    config = _validated(
        EnsembleConfig,
        n=args.n,
        sizes=args.sizes,
        samples=args.samples,
        seed=args.seed,
        alphabet=args.alphabet,
    )
    report = size_entropy_ensemble(config, _distribution_for(args.dist, config.n), args.jobs)
    if args.out:
        CsvArtifact(args.out, report.table).write()
    payload = report.to_dict()
    return payload.pop("config"), payload


def cmd_grow_profile(args: argparse.Namespace) -> Payload:
    config = _validated(
        ProfileConfig,
        n=args.n,
        size=args.size,
        samples=args.samples,
        seed=args.seed,
        alphabet=args.alphabet,
        delta=args.delta,
    )
    report = entropy_concentration_profile(config, _distribution_for(args.dist, config.n), args.jobs)
    if args.csv:
        CsvArtifact(args.csv, report.to_frame()).write()
    payload = report.to_dict()
    return payload.pop("config"), payload


# =============================================================================
# Argument parsing
# =============================================================================


class _HelpFormatter(argparse.RawDescriptionHelpFormatter, argparse.ArgumentDefaultsHelpFormatter):
    pass


def parse_sizes(text: str) -> tuple[int, ...]:
    """Parse "a..b" (inclusive) or a comma list "1,2,5"."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            sizes = tuple(range(int(low), int(high) + 1))
        else:
            sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sizes {text!r}; use a..b or a,b,c")
    if not sizes:
        raise argparse.ArgumentTypeError(f"empty size range {text!r}")
    return sizes


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Console log level (default: INFO)",
    )
    common.add_argument(
        "--log-file",
        type=Path,
        default=None,
        help="Also write DEBUG records to this file",
    )
    common.add_argument(
        "--jobs",
        type=_positive_int,
        default=1,
        help="Worker processes for ensemble runs; results do not depend on it",
    )
    common.add_argument(
        "--record-timing",
        action="store_true",
        help="Add wall-clock duration to the report (makes output differ run to run)",
    )
    return common


def _add_parser(subparsers, name: str, handler: Callable[[argparse.Namespace], Payload], common, help_text: str):
    parser = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text, formatter_class=_HelpFormatter)
    parser.set_defaults(handler=handler, command=name)
    return parser


def _add_expr_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--in", dest="input", type=Path, help="Encoded expression (.bin)")
    source.add_argument("--expr", default=None, help="Expression text, e.g. 'S K K' or 'D0(L[0], L[1])'")


def build_parser() -> argparse.ArgumentParser:
    """Build the full argument parser."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="codd-lab",
        description="Combinatorial decision dags, distinction-based patterns and entropy experiments",
        formatter_class=_HelpFormatter,
        epilog="""
            Examples:
            # Logical and Shannon entropy of a partition
            codd-lab entropy --partition p.json --dist d.json

            # Smallest-average-depth tree for a labeling
            codd-lab tree optimal --labeling f.json

            # Syntax-semantics correlation with a CSV of per-pair distances
            codd-lab synsem correlate --n 4 --pairs 200 --seed 42 --out report.json --csv report.csv

            # Size-versus-entropy ensemble
            codd-lab grow ensemble --sizes 1..50 --samples 20 --out table.csv
            """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    entropy = _add_parser(commands, "entropy", cmd_entropy, common, "Logical and Shannon entropy of a partition")
    entropy.add_argument("--partition", type=Path, required=True, help="Partition JSON file")
    entropy.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
    entropy.add_argument("--out", dest="report", type=Path, default=None, help="Also write the report here")

    tree = commands.add_parser("tree", help="Decision trees for a labeling")
    tree_commands = tree.add_subparsers(dest="tree_command", required=True, metavar="METHOD")
    for method, help_text in (("optimal", "Exact minimal average depth tree"), ("greedy", "Information-gain greedy tree")):
        sub = _add_parser(tree_commands, method, cmd_tree, common, help_text)
        sub.set_defaults(command=f"tree {method}")
        sub.add_argument("--labeling", type=Path, required=True, help="Labeling JSON file")
        sub.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
        sub.add_argument("--out", dest="report", type=Path, default=None, help="Also write the report here")
        if method == "optimal":
            sub.add_argument("--prefer-gain", action="store_true", help="Among optimal trees prefer larger root gain")

    codd = commands.add_parser("codd", help="Encode, decode, evaluate and memoize CoDD expressions")
    codd_commands = codd.add_subparsers(dest="codd_command", required=True, metavar="ACTION")

    ev = _add_parser(codd_commands, "eval", cmd_codd_eval, common, "Reduce an expression applied to arguments")
    ev.set_defaults(command="codd eval")
    _add_expr_source(ev)
    ev.add_argument("--arg", action="append", default=[], help="Argument expression text, repeatable, applied left to right")
    ev.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="Maximum reduction steps")
    ev.add_argument("--out", type=Path, default=None, help="Write the normal form as .bin")
    ev.add_argument("--report", type=Path, default=None, help="Also write the report here")

    enc = _add_parser(codd_commands, "encode", cmd_codd_encode, common, "Serialize an expression to its bit encoding")
    enc.set_defaults(command="codd encode")
    source = enc.add_mutually_exclusive_group(required=True)
    source.add_argument("--expr", default=None, help="Expression text")
    source.add_argument("--tree", type=Path, default=None, help="Tree JSON file, converted to a first-order CoDD")
    enc.add_argument("--label-bits", type=int, default=None, help="Leaf output width for --tree (default: widest label)")
    enc.add_argument("--out", type=Path, default=None, help="Write the encoding as .bin")
    enc.add_argument("--report", type=Path, default=None, help="Also write the report here")

    dec = _add_parser(codd_commands, "decode", cmd_codd_decode, common, "Decode a .bin expression")
    dec.set_defaults(command="codd decode")
    dec.add_argument("--in", dest="input", type=Path, required=True, help="Encoded expression (.bin)")
    dec.add_argument("--report", type=Path, default=None, help="Also write the report here")

    memo = _add_parser(codd_commands, "memoize", cmd_codd_memoize, common, "Rewrite (P a) (P b) into Sp P a b")
    memo.set_defaults(command="codd memoize")
    _add_expr_source(memo)
    which = memo.add_mutually_exclusive_group()
    which.add_argument("--pattern", default=None, help="Pattern expression text (default: largest repeat)")
    which.add_argument("--all", action="store_true", help="Memoize every repeat, largest first")
    memo.add_argument("--out", type=Path, default=None, help="Write the rewritten expression as .bin")
    memo.add_argument("--report", type=Path, default=None, help="Also write the report here")

    pattern = commands.add_parser("pattern", help="Pattern predicates")
    pattern_commands = pattern.add_subparsers(dest="pattern_command", required=True, metavar="ACTION")
    check = _add_parser(pattern_commands, "check", cmd_pattern_check, common, "Is P a pattern in F relative to rho?")
    check.set_defaults(command="pattern check")
    check.add_argument("--p", type=Path, required=True, help="Program P (labeling, tree or encoded CoDD JSON)")
    check.add_argument("--f", type=Path, required=True, help="Program F (labeling, tree or encoded CoDD JSON)")
    check.add_argument("--rho", type=Path, required=True, help="Relevance function JSON file")
    check.add_argument("--dist", type=Path, default=None, help="Distribution for the runtime comparison")
    check.add_argument("--slack", type=int, default=None, help="Use the approximate predicate with this slack")
    check.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="Fuel per input for encoded programs")
    check.add_argument("--out", dest="report", type=Path, default=None, help="Also write the report here")

    synsem = commands.add_parser("synsem", help="Syntax-semantics correlation")
    synsem_commands = synsem.add_subparsers(dest="synsem_command", required=True, metavar="ACTION")
    corr = _add_parser(synsem_commands, "correlate", cmd_synsem_correlate, common, "Correlate semantic and syntactic distance")
    corr.set_defaults(command="synsem correlate")
    corr.add_argument("--n", type=int, default=4, help="Input bits")
    corr.add_argument("--pairs", type=int, default=200, help="Number of function pairs")
    corr.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="Master seed")
    corr.add_argument("--scheme", default="entropy,depth", help="Comma-separated edit cost schemes")
    corr.add_argument("--flip-max", default="1/2", help="Largest per-input flip probability between f and g")
    corr.add_argument("--decay", default="1/2", help="Per-level cost decay of the depth scheme")
    corr.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
    corr.add_argument("--out", dest="report", type=Path, default=None, help="Write the report JSON here")
    corr.add_argument("--csv", type=Path, default=None, help="Write per-pair distances as CSV")

    grow = _add_parser(commands, "grow", cmd_grow, common, "Random growth trace, or an ensemble/profile")
    grow.add_argument("--n", type=int, default=6, help="Input bits")
    grow.add_argument("--steps", type=int, default=1000, help="Growth steps")
    grow.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="Master seed")
    grow.add_argument("--alphabet", type=int, default=DEFAULT_TRACE_ALPHABET, help="Label alphabet size")
    grow.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
    grow.add_argument("--trace", type=Path, default=None, help="Write the trace as CSV")
    grow.add_argument("--out", dest="report", type=Path, default=None, help="Also write the report here")
    grow_commands = grow.add_subparsers(dest="grow_command", metavar="ACTION")

    ens = _add_parser(grow_commands, "ensemble", cmd_grow_ensemble, common, "Logical entropy by program size")
    ens.set_defaults(command="grow ensemble")
    ens.add_argument("--n", type=int, default=6, help="Input bits")
    ens.add_argument("--sizes", type=parse_sizes, default="1..50", help="Sizes as a..b or a,b,c")
    ens.add_argument("--samples", type=int, default=20, help="Samples per size")
    ens.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="Master seed")
    ens.add_argument("--alphabet", type=int, default=None, help="Label alphabet size (default: 2**n)")
    ens.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
    ens.add_argument("--out", type=Path, default=None, help="Write the per-size table as CSV")
    ens.add_argument("--report", type=Path, default=None, help="Also write the report here")

    prof = _add_parser(grow_commands, "profile", cmd_grow_profile, common, "Entropy concentration at a fixed size")
    prof.set_defaults(command="grow profile")
    prof.add_argument("--n", type=int, default=6, help="Input bits")
    prof.add_argument("--size", type=int, default=30, help="Decision nodes per sample")
    prof.add_argument("--samples", type=int, default=1000, help="Number of samples")
    prof.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="Master seed")
    prof.add_argument("--alphabet", type=int, default=None, help="Label alphabet size (default: 2**n)")
    prof.add_argument("--delta", default="1/10", help="Relative distance from the maximum counted as near it")
    prof.add_argument("--dist", type=Path, default=None, help="Distribution JSON file (default: uniform)")
    prof.add_argument("--out", dest="report", type=Path, default=None, help="Also write the report here")
    prof.add_argument("--csv", type=Path, default=None, help="Write the histogram as CSV")

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0, usage errors 2
        return e.code if isinstance(e.code, int) else 2

    if args.log_level:
        set_console_level(args.log_level)
    if args.log_file:
        set_log_file(args.log_file)

    started = time.perf_counter()
    try:
        config, payload = args.handler(args)
        duration = time.perf_counter() - started if args.record_timing else None
        report = RunReport(args.command, config, payload, duration=duration)
        if getattr(args, "report", None):
            JsonArtifact(args.report, report.to_dict()).write()
    except CoddLabError as e:
        logger.debug(f"{args.command} failed: {e}")
        print(f"error[{e.category}]: {e}", file=sys.stderr)
        return 1

    sys.stdout.write(dumps_json(report.to_dict()))
    return 0


def entry() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    entry()
