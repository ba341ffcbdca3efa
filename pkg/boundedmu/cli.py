"""Command line interface for the bounded mu-calculus checker."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import Settings
from .errors import BoundedMuError, BoundError, ModelFormatError
from .formula import Formula, parse_formula, print_formula
from .game import (
    ChoiceSource,
    ClockPolicy,
    GameSpec,
    Player,
    ScriptedSource,
    StrategySource,
    StreamSource,
    describe_position,
    export_game_tree,
    play,
    solve,
    solve_states,
)
from .harness import generate_instance, load_params, random_sentence, run_corpus
from .kripke import KripkeModel, load_model, save_model
from .ordinal import Ordinal, parse_ordinal, print_ordinal
from .semantics import eval_bounded, eval_standard


logger = logging.getLogger(__name__)


try:
    __CLI_VERSION = metadata.version("boundedmu")
except metadata.PackageNotFoundError:
    __CLI_VERSION = "0.0.0"


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        error = ModelFormatError if what == "model" else BoundedMuError
        raise error(f"{what} file {path} is not valid UTF-8 (byte {exc.start})") from exc


def _read_model(path: str) -> KripkeModel:
    return load_model(_read_text(path, "model"))


def _read_formula(args: argparse.Namespace) -> Formula:
    if args.formula_file:
        text = _read_text(args.formula_file, "formula")
    else:
        text = args.formula
    return parse_formula(text.strip())


def _require_gamma(args: argparse.Namespace) -> Ordinal:
    if args.gamma is None:
        raise BoundError("--gamma is required for this command")
    return parse_ordinal(args.gamma)


def _queried_states(model: KripkeModel, requested: Optional[Sequence[str]]) -> List[str]:
    if not requested:
        return list(model.states)
    for name in requested:
        model.index_of(name)
    return list(requested)


def _add_query_arguments(parser: argparse.ArgumentParser, gamma_required: bool = True) -> None:
    parser.add_argument("--model", required=True, help="Kripke model JSON document")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--formula", help="formula text, e.g. 'mu X. (p | <>X)'")
    source.add_argument("--formula-file", help="file holding the formula text")
    parser.add_argument(
        "--gamma",
        required=gamma_required,
        help="clock value bound as a CNF ordinal (3, w, w^2*2+1)",
    )


def _add_game_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--state", help="initial state (default: first state of the model)")
    parser.add_argument(
        "--policy",
        choices=[policy.value for policy in ClockPolicy],
        default=ClockPolicy.FULL.value,
        help="clock choices offered to players (default: full)",
    )


def _game_from_args(args: argparse.Namespace) -> GameSpec:
    model = _read_model(args.model)
    formula = _read_formula(args)
    state = args.state or model.states[0]
    return GameSpec.create(model, state, formula, _require_gamma(args))


# ------------------------------------------------------------------ check


def _command_check(args: argparse.Namespace, settings: Settings) -> int:
    model = _read_model(args.model)
    formula = _read_formula(args)
    states = _queried_states(model, args.state)
    gamma_text: Optional[str] = None

    if args.semantics == "standard":
        if args.gamma is not None:
            sys.stderr.write("warning: --gamma ignored for standard semantics\n")
        members = eval_standard(model, formula)
        verdicts = {name: model.index_of(name) in members for name in states}
    elif args.semantics == "comp":
        gamma = _require_gamma(args)
        gamma_text = print_ordinal(gamma)
        members = eval_bounded(model, formula, None, gamma)
        verdicts = {name: model.index_of(name) in members for name in states}
    else:
        gamma = _require_gamma(args)
        gamma_text = print_ordinal(gamma)
        winners = solve_states(model, formula, gamma, ClockPolicy(args.policy))
        verdicts = {name: winners[name] is Player.ELOISE for name in states}

    holds = all(verdicts.values())
    if args.format == "json":
        payload = {
            "formula": print_formula(formula),
            "semantics": args.semantics,
            "gamma": gamma_text,
            "states": verdicts,
            "holds": holds,
        }
        json.dump(payload, sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
    elif len(states) == 1:
        sys.stdout.write(f"{str(verdicts[states[0]]).lower()}\n")
    else:
        for name in states:
            sys.stdout.write(f"{name}: {str(verdicts[name]).lower()}\n")
    return 0 if holds else 1


# ------------------------------------------------------------------- game


def _command_game(args: argparse.Namespace, settings: Settings) -> int:
    max_nodes = settings.max_nodes if args.max_nodes is None else args.max_nodes
    if max_nodes < 1:
        raise BoundedMuError(f"--max-nodes must be at least 1, got {max_nodes}")
    game = _game_from_args(args)
    policy = ClockPolicy(args.policy)
    result = solve(game, policy)
    sys.stdout.write(f"winner: {result.winner.value}\n")
    sys.stdout.write(f"positions explored: {result.positions_explored}\n")
    sys.stdout.write(f"longest play: {result.max_play_length}\n")

    if args.emit_dot:
        dot = export_game_tree(game, max_nodes, policy)
        if args.emit_dot == "-":
            sys.stdout.write(dot)
        else:
            Path(args.emit_dot).write_text(dot, encoding="utf-8")
            logger.info("wrote game tree to %s", args.emit_dot)
    return 0


# ------------------------------------------------------------------ trace


def _read_script(path: str) -> List[str]:
    lines = _read_text(path, "script").splitlines()
    return [line.strip() for line in lines if line.strip() and not line.strip().startswith("#")]


def _choice_source(
    words: Sequence[str], player: Player, strategies: Dict[Player, Any]
) -> ChoiceSource:
    kind = words[0]
    if kind == "strategy" and len(words) == 1:
        return StrategySource(strategies[player])
    if kind == "stdin" and len(words) == 1:
        return StreamSource(sys.stdin, sys.stderr)
    if kind == "script" and len(words) == 2:
        return ScriptedSource(_read_script(words[1]))
    raise BoundedMuError(
        f"invalid choice source for {player.value}: {' '.join(words)} "
        "(expected strategy, stdin, or script FILE)"
    )


def _command_trace(args: argparse.Namespace, settings: Settings) -> int:
    game = _game_from_args(args)
    policy = ClockPolicy(args.policy)
    result = solve(game, policy)

    eloise_words = args.eloise or ["strategy"]
    abelard_words = args.abelard or ["strategy"]
    if args.interactive is not None and getattr(args, args.interactive) is not None:
        raise BoundedMuError(
            f"--interactive {args.interactive} cannot be combined with --{args.interactive}"
        )
    if args.interactive == "eloise":
        eloise_words = ["stdin"]
    elif args.interactive == "abelard":
        abelard_words = ["stdin"]

    transcript = play(
        game,
        _choice_source(eloise_words, Player.ELOISE, result.strategies),
        _choice_source(abelard_words, Player.ABELARD, result.strategies),
        policy,
    )
    for number, step in enumerate(transcript.rounds, start=1):
        line = f"{number}. {describe_position(game, step.position)}"
        if step.chooser is not None:
            line += f"  {step.chooser.value} -> {step.choice}"
        sys.stdout.write(line + "\n")
    assert transcript.winner is not None
    sys.stdout.write(f"winner: {transcript.winner.value}\n")
    return 0 if transcript.winner is Player.ELOISE else 1


# ------------------------------------------------------------------- diff


def _command_diff(args: argparse.Namespace, settings: Settings) -> int:
    params = load_params(args.params or settings.params_path)
    if args.instances < 0:
        raise BoundedMuError("--instances must be non-negative")
    jobs = settings.jobs if args.jobs is None else args.jobs
    if jobs < 1:
        raise BoundedMuError(f"--jobs must be at least 1, got {jobs}")
    summary = run_corpus(
        args.seed,
        args.instances,
        params,
        jobs=jobs,
        node_budget=settings.node_budget,
    )
    if args.format == "json":
        payload = summary.to_dict()
        payload["summary"] = summary.summary_line()
        json.dump(payload, sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(summary.summary_line() + "\n")
        for failure in summary.failures:
            checks = ", ".join(item["check"] for item in failure["checks"])
            minimal = failure["minimal"]
            sys.stdout.write(
                f"seed {failure['instance']['seed']}: {checks}; minimal: "
                f"{minimal['formula']} at gamma={minimal['gamma']} "
                f"over {len(minimal['model']['states'])} state(s)\n"
            )
    return 0 if summary.ok else 1


# -------------------------------------------------------------------- gen


def _command_gen(args: argparse.Namespace, settings: Settings) -> int:
    params = load_params(args.params or settings.params_path)
    if args.kind == "model":
        sys.stdout.write(save_model(generate_instance(args.seed, params).model))
    else:
        sentence = random_sentence(args.seed, params, collide=args.collide)
        sys.stdout.write(print_formula(sentence) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundedmu",
        description=(
            "Model-check modal mu-calculus sentences on finite Kripke models "
            "with clock-bounded evaluation games."
        ),
    )
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"boundedmu {__CLI_VERSION}",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="logging level (default: BOUNDEDMU_LOG_LEVEL or WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="evaluate a formula at model states")
    _add_query_arguments(check, gamma_required=False)
    check.add_argument(
        "--semantics",
        choices=["gts", "comp", "standard"],
        default="gts",
        help="game, bounded compositional or standard semantics (default: gts)",
    )
    check.add_argument(
        "--state",
        action="append",
        help="state to query; repeatable (default: every state)",
    )
    check.add_argument("--format", choices=["text", "json"], default="text")
    check.set_defaults(handler=_command_check, policy=ClockPolicy.FULL.value)

    game = commands.add_parser("game", help="solve a game and optionally export its tree")
    _add_query_arguments(game)
    _add_game_arguments(game)
    game.add_argument("--emit-dot", metavar="FILE", help="write the game tree as DOT ('-' for stdout)")
    game.add_argument("--max-nodes", type=int, help="node cap for --emit-dot (default: 500)")
    game.set_defaults(handler=_command_game)

    trace = commands.add_parser("trace", help="replay one play of the evaluation game")
    _add_query_arguments(trace)
    _add_game_arguments(trace)
    for player in ("eloise", "abelard"):
        trace.add_argument(
            f"--{player}",
            nargs="+",
            metavar="SOURCE",
            help="strategy (default), stdin, or script FILE",
        )
    trace.add_argument(
        "--interactive",
        choices=["eloise", "abelard"],
        help="read this player's choices from stdin",
    )
    trace.set_defaults(handler=_command_trace)

    diff = commands.add_parser("diff", help="differential test of game against compositional semantics")
    diff.add_argument("--seed", type=int, default=0)
    diff.add_argument("--instances", type=int, default=100)
    diff.add_argument("--params", help="InstanceParams JSON document")
    diff.add_argument("--jobs", type=int, help="worker processes (default: BOUNDEDMU_JOBS or 1)")
    diff.add_argument("--format", choices=["text", "json"], default="text")
    diff.set_defaults(handler=_command_diff)

    gen = commands.add_parser("gen", help="generate a random model or sentence")
    gen.add_argument("kind", choices=["model", "formula"])
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--params", help="InstanceParams JSON document")
    gen.add_argument(
        "--collide",
        action="store_true",
        help="name every binder X (formula only)",
    )
    gen.set_defaults(handler=_command_gen)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entrypoint for the CLI.

    Args:
        argv: Sequence of command line arguments excluding the program name.

    Returns:
        0 on success or when the queried property holds, 1 when it does
        not, 2 on usage or input errors.
    """

    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        settings = Settings.from_env()
        logging.basicConfig(
            level=args.log_level or settings.log_level,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.handler(args, settings)
    except (BoundedMuError, OSError) as exc:
        sys.stderr.write(f"boundedmu: {exc}\n")
        return 2


def main() -> int:  # pragma: no cover - convenience wrapper
    """Console script entry point."""

    return run()


if __name__ == "__main__":  # pragma: no cover - manual execution
    sys.exit(main())
