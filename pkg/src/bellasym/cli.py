"""Command-line entry point.

Exit codes: 0 on success, 1 for bad input (usage, files, budgets), 2 when a
solver fails.  Everything except ``sweep`` prints one JSON document.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .adversary import KnowledgeBudget, dump_strategy, simulate
from .asymmetry import SweepConfig, check_symmetry, curve_to_csv, sweep_curve
from .errors import BellAsymError, SolverError
from .game_model import GameTable, builtin_game, builtin_names, load_game, serialize_game
from .lhv_core import DEFAULT_ENUMERATION_CAP, classical_bound
from .oracle import coordinate_ascent_oracle
from .solver import DEFAULT_HEIGHTS, solve_adversarial_bound

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; we reserve 2 for solvers
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _num(v):
    if isinstance(v, float):
        return float("%.12g" % v)
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(_num(doc), indent=2) + "\n"
    _write(text, out)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(source: str) -> GameTable:
    """A game file path, or a built-in name when no such file exists."""
    if os.path.exists(source):
        return load_game(source)
    try:
        return builtin_game(source)
    except KeyError:
        raise UsageError(
            f"no game file {source!r} and no built-in of that name (built-ins: {', '.join(builtin_names())})"
        ) from None


def _budget(g: GameTable, args) -> KnowledgeBudget:
    return KnowledgeBudget.for_game(g, args.xi_x, args.xi_y)


def _cmd_bound(args) -> int:
    g = _load(args.game)
    res = classical_bound(g, cap=args.enum_cap)
    _emit({
        "game": g.name,
        "classical_bound": res.value,
        "strategy": {"alice": list(res.strategy.alice), "bob": list(res.strategy.bob)},
        "strategies_enumerated": res.diagnostics["strategies"],
    }, args.out)
    return EXIT_OK


def _cmd_adv_bound(args) -> int:
    g = _load(args.game)
    budget = _budget(g, args)
    res = solve_adversarial_bound(g, budget, args.heights, exact_budget=args.exact_budget)
    kx, ky = res.witness.knowledge(g)
    doc = {
        "game": g.name,
        "xi_x": budget.xi_x,
        "xi_y": budget.xi_y,
        "heights": args.heights,
        "value": res.value,
        "classical_bound": classical_bound(g).value,
        "witness_knowledge": [kx, ky],
        "diagnostics": res.diagnostics,
        "witness": dump_strategy(res.witness),
    }
    if args.oracle:
        orc = coordinate_ascent_oracle(g, budget, restarts=args.restarts, seed=args.seed)
        doc["oracle_value"] = orc.value
        doc["oracle_restart_values"] = orc.diagnostics["restart_values"]
        doc["lp_minus_oracle"] = res.value - orc.value
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    g = _load(args.game)
    cfg = SweepConfig(g, steps=args.steps, heights=args.heights, mode="two-param" if args.two_param else "one-param")
    # the curve is complete before anything is written
    _write(curve_to_csv(sweep_curve(cfg)), args.out)
    return EXIT_OK


def _cmd_check_symmetry(args) -> int:
    g = _load(args.game)
    doc = {"game": g.name}
    doc.update(check_symmetry(g).to_dict())
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    g = _load(args.game)
    budget = _budget(g, args)
    res = solve_adversarial_bound(g, budget, args.heights)
    rep = simulate(g, res.witness, args.shots, args.seed, workers=args.workers)
    z = (rep.empirical_value - res.value) / rep.stderr_value if rep.stderr_value > 0 else 0.0
    doc = {"game": g.name, "xi_x": budget.xi_x, "xi_y": budget.xi_y, "analytic_value": res.value}
    doc.update(rep.to_dict())
    doc["z_score"] = z
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_builtin(args) -> int:
    try:
        g = builtin_game(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    _write(serialize_game(g), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bellasym", description="Knowledge-dependent local bounds of nonlocal games.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def game_cmd(name, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("game", help="game file, or a built-in name")
        s.add_argument("--out", help="write output here instead of stdout")
        return s

    def budget_args(s):
        s.add_argument("--xi-x", type=float, required=True, help="knowledge of Alice's settings in [0, 1]")
        s.add_argument("--xi-y", type=float, required=True, help="knowledge of Bob's settings in [0, 1]")
        s.add_argument("--heights", type=int, default=DEFAULT_HEIGHTS, help="probability levels K per setting count")

    s = game_cmd("bound", "classical bound and an optimal deterministic strategy")
    s.add_argument("--enum-cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    s.set_defaults(func=_cmd_bound)

    s = game_cmd("adv-bound", "bound under a knowledge budget")
    budget_args(s)
    s.add_argument("--exact-budget", action="store_true", help="require the budget to be used exactly")
    s.add_argument("--oracle", action="store_true", help="also run the local-search oracle")
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_adv_bound)

    s = game_cmd("sweep", "asymmetry curve as CSV")
    s.add_argument("--steps", type=int, default=21)
    s.add_argument("--heights", type=int, default=DEFAULT_HEIGHTS)
    s.add_argument("--two-param", action="store_true", help="sweep the full (xi_x, xi_y) grid")
    s.set_defaults(func=_cmd_sweep)

    s = game_cmd("check-symmetry", "is the table invariant under swapping the parties")
    s.set_defaults(func=_cmd_check_symmetry)

    s = game_cmd("simulate", "Monte Carlo check of the optimal strategy")
    budget_args(s)
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("builtin", help="print a built-in game file")
    s.add_argument("name", help=f"one of: {', '.join(builtin_names())}")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_builtin)
    return p


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INPUT
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        if exc.diagnostics:
            sys.stderr.write(json.dumps(_num(exc.diagnostics), default=str) + "\n")
        return EXIT_SOLVER
    except (BellAsymError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())
