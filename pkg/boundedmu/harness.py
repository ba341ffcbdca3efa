"""Differential checks between the game and compositional engines.

Every instance of a seeded corpus is a small model, a sentence and a finite
clock bound. The game winner must match bounded compositional membership at
every state, both must match the standard semantics at bound ``|W| + 1``,
the memoized solver must match plain minimax, the declared winner's
strategy must survive exhaustive verification and every approximant ladder
must be a monotone chain. Any mismatch is an implementation bug.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path as FilePath
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_NODE_BUDGET
from .errors import BoundedMuError, NodeBudgetExceededError, ParamsError
from .formula import (
    Formula,
    Kind,
    box,
    conjunction,
    diamond,
    disjunction,
    free_labels,
    iter_nodes,
    label,
    mu,
    neg_prop,
    nu,
    print_formula,
    prop,
    replace_at,
    to_normal_form,
)
from .game import (
    ClockPolicy,
    GameSpec,
    Player,
    StrategySource,
    gts_truth_set,
    initial_position,
    legal_moves,
    play,
    solve,
    verify_strategy,
)
from .kripke import KripkeModel, StateSet, random_model, restrict, save_model
from .semantics import FixpointKind, build_ladder, eval_bounded, eval_standard, operator_apply


logger = logging.getLogger(__name__)

_LABEL_POOL = ("X", "Y", "Z", "U", "V")


@dataclass(frozen=True)
class InstanceParams:
    min_states: int = 1
    max_states: int = 4
    edge_density: float = 0.4
    prop_count: int = 2
    max_depth: int = 3
    max_fixpoints: int = 2
    gamma_min: int = 1
    gamma_max: int = 5
    label_bias: float = 0.7

    def validate(self) -> "InstanceParams":
        if self.min_states < 1:
            raise ParamsError("min_states must be at least 1", "min_states")
        if self.max_states < self.min_states:
            raise ParamsError("max_states must be at least min_states", "max_states")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ParamsError("edge_density must lie in [0, 1]", "edge_density")
        if not 1 <= self.prop_count <= 10:
            raise ParamsError("prop_count must lie in [1, 10]", "prop_count")
        if self.max_depth < 0:
            raise ParamsError("max_depth must be non-negative", "max_depth")
        if self.max_fixpoints < 0:
            raise ParamsError("max_fixpoints must be non-negative", "max_fixpoints")
        if self.gamma_min < 1:
            raise ParamsError("gamma_min must be at least 1", "gamma_min")
        if self.gamma_max < self.gamma_min:
            raise ParamsError("gamma_max must be at least gamma_min", "gamma_max")
        if not 0.0 <= self.label_bias <= 1.0:
            raise ParamsError("label_bias must lie in [0, 1]", "label_bias")
        return self

    @property
    def props(self) -> Tuple[str, ...]:
        return tuple(chr(ord("p") + index) for index in range(self.prop_count))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "InstanceParams":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParamsError(f"unknown parameter(s): {', '.join(unknown)}")
        try:
            params = cls(**dict(data))
        except TypeError as exc:
            raise ParamsError(f"invalid parameters: {exc}") from exc
        return params.validate()


def load_params(path: Optional[FilePath | str]) -> InstanceParams:
    """Read a params document, falling back to the defaults when it is missing."""

    if path is None:
        return InstanceParams()
    location = FilePath(path)
    if not location.is_file():
        logger.debug("params file %s not found, using defaults", location)
        return InstanceParams()
    try:
        data = json.loads(location.read_text(encoding="utf-8"))
    except UnicodeDecodeError as exc:
        raise ParamsError(f"params file {location} is not valid UTF-8") from exc
    except json.JSONDecodeError as exc:
        raise ParamsError(f"params file {location} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, Mapping):
        raise ParamsError(f"params file {location} must contain a JSON object")
    return InstanceParams.from_mapping(data)


# --------------------------------------------------------------- generation


def random_sentence(seed: int, params: InstanceParams, collide: bool = False) -> Formula:
    """Draw a closed sentence of bounded height and fixpoint count.

    Binders get distinct labels, so the result is in normal form, unless
    ``collide`` is set: then every binder is named ``X`` and inner binders
    shadow outer ones.
    """

    params.validate()
    rng = np.random.default_rng(seed)
    props = params.props
    budget = [params.max_fixpoints]
    counter = [0]

    def fresh_label() -> str:
        if collide:
            return "X"
        index = counter[0]
        counter[0] += 1
        if index < len(_LABEL_POOL):
            return _LABEL_POOL[index]
        return f"X{index}"

    def leaf(bound: Sequence[str]) -> Formula:
        if bound and rng.random() < params.label_bias:
            return label(bound[int(rng.integers(len(bound)))])
        symbol = props[int(rng.integers(len(props)))]
        return neg_prop(symbol) if rng.random() < 0.3 else prop(symbol)

    def grow(depth: int, bound: Tuple[str, ...]) -> Formula:
        if depth == 0:
            return leaf(bound)
        roll = rng.random()
        if roll < 0.15:
            return leaf(bound)
        if budget[0] > 0 and roll < 0.45:
            budget[0] -= 1
            name = fresh_label()
            body = grow(depth - 1, bound + (name,))
            return mu(name, body) if rng.random() < 0.5 else nu(name, body)
        if roll < 0.7:
            child = grow(depth - 1, bound)
            return diamond(child) if rng.random() < 0.5 else box(child)
        left = grow(depth - 1, bound)
        right = grow(depth - 1, bound)
        return disjunction(left, right) if rng.random() < 0.5 else conjunction(left, right)

    return grow(params.max_depth, ())


@dataclass(frozen=True)
class Instance:
    seed: int
    model: KripkeModel
    sentence: Formula
    gamma: int

    def payload(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "model": json.loads(save_model(self.model)),
            "formula": print_formula(self.sentence),
            "gamma": self.gamma,
        }


def generate_instance(seed: int, params: InstanceParams) -> Instance:
    params.validate()
    rng = np.random.default_rng(seed)
    size = int(rng.integers(params.min_states, params.max_states + 1))
    gamma = int(rng.integers(params.gamma_min, params.gamma_max + 1))
    model = random_model(seed, size, params.edge_density, params.props)
    return Instance(seed, model, random_sentence(seed, params), gamma)


# ------------------------------------------------------------------- checks


@dataclass(frozen=True)
class StateRow:
    state: str
    gts: bool
    bounded: bool
    standard: Optional[bool] = None

    @property
    def agrees(self) -> bool:
        values = {self.gts, self.bounded}
        if self.standard is not None:
            values.add(self.standard)
        return len(values) == 1


@dataclass
class DiffReport:
    check: str
    formula: str
    gamma: int
    rows: List[StateRow]
    model: Dict[str, Any]
    counterexample: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return all(row.agrees for row in self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "instance": {"formula": self.formula, "gamma": self.gamma, "model": self.model},
            "verdict": "pass" if self.passed else "fail",
            "states": [asdict(row) for row in self.rows],
            "counterexample": self.counterexample,
        }


def _report(
    check: str, model: KripkeModel, sentence: Formula, gamma: int, rows: List[StateRow]
) -> DiffReport:
    document = json.loads(save_model(model))
    report = DiffReport(check, print_formula(sentence), gamma, rows, document)
    mismatch = next((row for row in rows if not row.agrees), None)
    if mismatch is not None:
        report.counterexample = {
            "model": document,
            "formula": report.formula,
            "gamma": gamma,
            "state": mismatch.state,
        }
    return report


def differential_check(
    model: KripkeModel,
    sentence: Formula,
    gamma: int,
    policy: ClockPolicy = ClockPolicy.FULL,
) -> DiffReport:
    game_set = gts_truth_set(model, sentence, gamma, policy)
    bounded_set = eval_bounded(model, to_normal_form(sentence), None, gamma)
    rows = [
        StateRow(name, index in game_set, index in bounded_set)
        for index, name in enumerate(model.states)
    ]
    return _report("differential", model, sentence, gamma, rows)


def standard_recovery_check(model: KripkeModel, sentence: Formula) -> DiffReport:
    gamma = model.size + 1
    game_set = gts_truth_set(model, sentence, gamma)
    bounded_set = eval_bounded(model, sentence, None, gamma)
    standard_set = eval_standard(model, sentence)
    rows = [
        StateRow(name, index in game_set, index in bounded_set, index in standard_set)
        for index, name in enumerate(model.states)
    ]
    return _report("standard_recovery", model, sentence, gamma, rows)


def naive_solve(game: GameSpec, node_budget: int = DEFAULT_NODE_BUDGET) -> Player:
    """Plain minimax over literal positions, no key sharing."""

    visited = [0]

    def winner(position) -> Player:
        visited[0] += 1
        if visited[0] > node_budget:
            raise NodeBudgetExceededError(node_budget)
        move = legal_moves(game, position)
        if move.is_terminal:
            return move.winner  # type: ignore[return-value]
        mover = move.chooser
        for option in move.options:
            if winner(option.position) is mover:
                return mover  # type: ignore[return-value]
        return mover.opponent  # type: ignore[union-attr]

    return winner(initial_position(game))


def _random_subset(rng: np.random.Generator, size: int) -> StateSet:
    return StateSet(rng.random(size) < 0.5)


def check_ladders(
    model: KripkeModel, sentence: Formula, seed: int, gamma: Optional[int] = None
) -> List[str]:
    """Monotone-chain, stabilization and operator-monotonicity checks."""

    rng = np.random.default_rng(seed)
    bound = gamma if gamma is not None else model.size + 1
    problems: List[str] = []
    for node in iter_nodes(sentence):
        if not node.is_fixpoint:
            continue
        name = node.name or ""
        outer = sorted(free_labels(node))
        assignment = {item: _random_subset(rng, model.size) for item in outer}
        kind = FixpointKind.MU if node.kind is Kind.MU else FixpointKind.NU
        ladder = build_ladder(model, node.body, name, assignment, bound, kind)
        where = f"{kind.value} {name} at {node.path}"
        for lower, upper in zip(ladder.stages, ladder.stages[1:]):
            ordered = lower <= upper if kind is FixpointKind.MU else upper <= lower
            if not ordered:
                problems.append(f"{where}: ladder is not monotone")
                break
        if ladder.stabilization > model.size:
            problems.append(f"{where}: stabilized at {ladder.stabilization} > |W|")
        again = operator_apply(model, node.body, name, assignment, bound, ladder.fixpoint)
        if again != ladder.fixpoint:
            problems.append(f"{where}: last stage is not a fixed point")

        larger = _random_subset(rng, model.size)
        smaller = larger & _random_subset(rng, model.size)
        image_small = operator_apply(model, node.body, name, assignment, bound, smaller)
        image_large = operator_apply(model, node.body, name, assignment, bound, larger)
        if not image_small <= image_large:
            problems.append(f"{where}: operator is not monotone")
    return problems


@dataclass
class InstanceOutcome:
    instance: Instance
    failures: List[Tuple[str, str]] = field(default_factory=list)
    naive_checked: int = 0
    naive_skipped: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def check_instance(instance: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> InstanceOutcome:
    outcome = InstanceOutcome(instance)
    model, sentence, gamma = instance.model, instance.sentence, instance.gamma

    def record(check: str, detail: str) -> None:
        outcome.failures.append((check, detail))

    try:
        report = differential_check(model, sentence, gamma)
        if not report.passed:
            record("differential", json.dumps(report.counterexample, sort_keys=True))
        recovery = standard_recovery_check(model, sentence)
        if not recovery.passed:
            record("standard_recovery", json.dumps(recovery.counterexample, sort_keys=True))

        fast = gts_truth_set(model, sentence, gamma, ClockPolicy.DECREMENT)
        full = gts_truth_set(model, sentence, gamma)
        if fast != full:
            record("decrement_policy", f"{model.names(fast)} != {model.names(full)}")

        for state in model.states:
            game = GameSpec.create(model, state, sentence, gamma)
            result = solve(game)
            winner = result.winner
            try:
                oracle = naive_solve(game, node_budget)
            except NodeBudgetExceededError:
                outcome.naive_skipped += 1
            else:
                outcome.naive_checked += 1
                if oracle is not winner:
                    record("naive_solve", f"state {state}: solve {winner.value}, naive {oracle.value}")

            verdict = verify_strategy(game, winner, result.strategies[winner])
            if not verdict.holds:
                record("verify_strategy", f"state {state}: {verdict.failure}")

            transcript = play(
                game,
                StrategySource(result.strategies[Player.ELOISE]),
                StrategySource(result.strategies[Player.ABELARD]),
            )
            if transcript.winner is not winner or transcript.length > result.max_play_length:
                record("play", f"state {state}: transcript disagrees with solve")

        for problem in check_ladders(model, sentence, instance.seed, gamma):
            record("ladders", problem)
    except BoundedMuError as exc:
        record(type(exc).__name__, str(exc))
    return outcome


# ---------------------------------------------------------------- shrinking


def _closed_replacements(sentence: Formula) -> List[Formula]:
    candidates = []
    for node in iter_nodes(sentence):
        for child in node.children:
            candidate = replace_at(sentence, node.path, child)
            if not free_labels(candidate):
                candidates.append(candidate)
    return candidates


def _shrink_candidates(instance: Instance) -> List[Instance]:
    candidates = []
    if instance.model.size > 1:
        for state in instance.model.states:
            keep = [name for name in instance.model.states if name != state]
            candidates.append(replace(instance, model=restrict(instance.model, keep)))
    for sentence in _closed_replacements(instance.sentence):
        candidates.append(replace(instance, sentence=sentence))
    if instance.gamma > 1:
        candidates.append(replace(instance, gamma=instance.gamma - 1))
    return candidates


def shrink_instance(
    instance: Instance, still_fails: Callable[[Instance], bool], max_steps: int = 200
) -> Instance:
    """Greedily reduce a failing instance while ``still_fails`` holds."""

    current = instance
    for _ in range(max_steps):
        for candidate in _shrink_candidates(current):
            if still_fails(candidate):
                logger.debug(
                    "shrunk to |W|=%d, %s, gamma=%d",
                    candidate.model.size,
                    print_formula(candidate.sentence),
                    candidate.gamma,
                )
                current = candidate
                break
        else:
            return current
    return current


# ------------------------------------------------------------------- corpus


@dataclass
class CorpusSummary:
    total: int = 0
    passed: int = 0
    naive_checked: int = 0
    naive_skipped: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def summary_line(self) -> str:
        return f"{self.passed}/{self.total} pass"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "passed": self.passed,
            "verdict": "pass" if self.ok else "fail",
            "naive_checked": self.naive_checked,
            "naive_skipped": self.naive_skipped,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class _SeedResult:
    seed: int
    failures: Tuple[Tuple[str, str], ...]
    naive_checked: int
    naive_skipped: int


def _run_one(seed: int, params: InstanceParams, node_budget: int) -> _SeedResult:
    # Runs in a worker process; only plain data crosses the process boundary.
    outcome = check_instance(generate_instance(seed, params), node_budget)
    return _SeedResult(seed, tuple(outcome.failures), outcome.naive_checked, outcome.naive_skipped)


def run_corpus(
    seed: int,
    count: int,
    params: InstanceParams,
    jobs: int = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> CorpusSummary:
    """Check ``count`` instances seeded ``seed, seed + 1, ...``."""

    params.validate()
    seeds = [seed + offset for offset in range(count)]
    results: List[Tuple[int, _SeedResult]] = []
    max_workers = max(1, min(jobs, len(seeds) or 1))
    if max_workers == 1:
        results = [(index, _run_one(item, params, node_budget)) for index, item in enumerate(seeds)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as executor:
            future_map = {
                executor.submit(_run_one, item, params, node_budget): index
                for index, item in enumerate(seeds)
            }
            for future in concurrent.futures.as_completed(future_map):
                results.append((future_map[future], future.result()))
    results.sort(key=lambda item: item[0])

    summary = CorpusSummary(total=len(results))
    for _, result in results:
        summary.naive_checked += result.naive_checked
        summary.naive_skipped += result.naive_skipped
        if not result.failures:
            summary.passed += 1
            continue
        instance = generate_instance(result.seed, params)
        checks = sorted({check for check, _ in result.failures})

        def still_fails(candidate: Instance, checks: Sequence[str] = checks) -> bool:
            found = check_instance(candidate, node_budget).failures
            return any(check in checks for check, _ in found)

        minimal = shrink_instance(instance, still_fails)
        summary.failures.append(
            {
                "instance": instance.payload(),
                "checks": [{"check": check, "detail": detail} for check, detail in result.failures],
                "minimal": minimal.payload(),
            }
        )
        logger.info("instance seed %d failed: %s", result.seed, ", ".join(checks))
    return summary
