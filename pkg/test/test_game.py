"""Tests for clock-bounded evaluation games."""

from __future__ import annotations

import io
import os
import re
import sys

import pytest


PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
PACKAGE_ROOT = os.path.dirname(PROJECT_ROOT)
if PACKAGE_ROOT not in sys.path:
    sys.path.insert(0, PACKAGE_ROOT)

from boundedmu.errors import BoundError, BoundedMuError, FormulaError, IllegalChoiceError
from boundedmu.formula import parse_formula
from boundedmu.kripke import KripkeModel
from boundedmu.game import (
    ClockPolicy,
    GameSpec,
    Player,
    Position,
    ScriptedSource,
    StrategySource,
    StreamSource,
    canonical_key,
    clock_map,
    describe_position,
    export_game_tree,
    gts_truth,
    gts_truth_set,
    initial_position,
    legal_moves,
    play,
    progress_measure,
    solve,
    solve_states,
    verify_strategy,
)


def _chain(p_states=("w2",)) -> KripkeModel:
    return KripkeModel.build(["w0", "w1", "w2"], [("w0", "w1"), ("w1", "w2")], {"p": list(p_states)})


def _single() -> KripkeModel:
    return KripkeModel.build(["w"], [], {})


def test_golden_reachability_truth_sets():
    model = _chain()
    formula = parse_formula("mu X.(p|<>X)")

    assert model.names(gts_truth_set(model, formula, 2)) == ("w1", "w2")
    assert model.names(gts_truth_set(model, formula, 3)) == ("w0", "w1", "w2")
    assert gts_truth(model, "w0", formula, 3)
    assert not gts_truth(model, "w0", formula, 2)


def test_golden_safety_truth_sets():
    model = _chain(("w0", "w1", "w2"))
    formula = parse_formula("nu X.(p & <>X)")

    assert model.names(gts_truth_set(model, formula, 2)) == ("w0",)
    assert model.names(gts_truth_set(model, formula, 4)) == ()


@pytest.mark.parametrize("gamma", [1, 2, 5])
def test_trivial_fixpoints_decide_by_clock_exhaustion(gamma):
    model = _chain()

    assert len(gts_truth_set(model, parse_formula("mu X. X"), gamma)) == 0
    assert len(gts_truth_set(model, parse_formula("nu X. X"), gamma)) == model.size


def test_game_requires_finite_positive_bound_and_sentence():
    model = _chain()
    formula = parse_formula("mu X. X")

    with pytest.raises(BoundError):
        GameSpec.create(model, "w0", formula, "w")
    with pytest.raises(BoundError):
        GameSpec.create(model, "w0", formula, 0)
    with pytest.raises(FormulaError):
        GameSpec.create(model, "w0", parse_formula("<>X"), 2)


def test_initial_position_sets_every_clock_to_bound():
    game = GameSpec.create(_chain(), "w0", parse_formula("nu Y. mu X. <>X | Y"), 3)
    start = initial_position(game)

    assert clock_map(game, start) == {(): 3, (0,): 3}
    assert canonical_key(game, start) == (0, (), ())
    assert describe_position(game, start) == "(w0, nu Y. mu X. (<>X | Y), {Y:3, X:3})"


def test_announce_move_offers_every_smaller_clock():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 3)
    move = legal_moves(game, initial_position(game))

    assert move.chooser is Player.ELOISE
    assert move.legal_choices() == (0, 1, 2)
    assert move.resolve("2").position.clocks == (2,)
    with pytest.raises(IllegalChoiceError) as excinfo:
        move.resolve(3)
    assert excinfo.value.legal == (0, 1, 2)


def test_decrement_policy_offers_only_the_largest_clock():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 3)
    move = legal_moves(game, initial_position(game), ClockPolicy.DECREMENT)

    assert move.legal_choices() == (2,)


def test_label_lowers_clock_and_resets_inner_binders():
    formula = parse_formula("mu X. nu Y. <>X | Y")
    game = GameSpec.create(_chain(), "w0", formula, 3)
    # X label sits at (0, 0, 0, 0); its binder is the root.
    position = Position(1, (0, 0, 0, 0), (2, 1))
    move = legal_moves(game, position)

    assert move.chooser is Player.ELOISE
    assert move.legal_choices() == (0, 1)
    assert move.resolve(1).position == Position(1, (0,), (1, 3))


def test_exhausted_clock_ends_the_play():
    game = GameSpec.create(_single(), "w", parse_formula("mu X. X"), 2)
    move = legal_moves(game, Position(0, (0,), (0,)))

    assert move.is_terminal
    assert move.winner is Player.ABELARD


def test_dead_ends_decide_modalities():
    model = _single()
    diamond = GameSpec.create(model, "w", parse_formula("<>p"), 1)
    box = GameSpec.create(model, "w", parse_formula("[]p"), 1)

    assert legal_moves(diamond, initial_position(diamond)).winner is Player.ABELARD
    assert legal_moves(box, initial_position(box)).winner is Player.ELOISE


def test_progress_measure_decreases_along_every_move():
    formula = parse_formula("nu Y. mu X. (p & <>Y) | <>X")
    model = KripkeModel.build(["a", "b"], [("a", "b"), ("b", "a"), ("b", "b")], {"p": ["a"]})
    game = GameSpec.create(model, "a", formula, 2)
    frontier = [initial_position(game)]
    seen = set()
    while frontier:
        position = frontier.pop()
        if position in seen:
            continue
        seen.add(position)
        for option in legal_moves(game, position).options:
            assert progress_measure(game, option.position) < progress_measure(game, position)
            frontier.append(option.position)
    assert len(seen) > 10


def test_solve_reports_strategies_and_play_length():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 3)
    result = solve(game)

    assert result.winner is Player.ELOISE
    assert result.strategies[Player.ELOISE][result.root] == 2
    assert result.max_play_length > 1
    report = verify_strategy(game, Player.ELOISE, result.strategies[Player.ELOISE])
    assert report.holds
    assert report.max_play_length <= result.max_play_length


def test_verify_strategy_reports_a_losing_play():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 3)
    root = canonical_key(game, initial_position(game))
    weak = dict(solve(game).strategies[Player.ELOISE])
    weak[root] = 0

    report = verify_strategy(game, Player.ELOISE, weak)

    assert not report.holds
    assert report.failure
    assert report.counterexample[0].choice == 0


def test_solve_states_matches_per_state_solve():
    model = KripkeModel.build(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")], {"p": ["c"]})
    formula = parse_formula("nu Y. mu X. (p & <>Y) | <>X")
    winners = solve_states(model, formula, 3)

    for state in model.states:
        assert winners[state] is solve(GameSpec.create(model, state, formula, 3)).winner


def test_play_with_optimal_strategies():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 3)
    result = solve(game)
    transcript = play(
        game,
        StrategySource(result.strategies[Player.ELOISE]),
        StrategySource(result.strategies[Player.ABELARD]),
    )

    assert transcript.winner is Player.ELOISE
    assert transcript.length <= result.max_play_length
    assert transcript.rounds[-1].chooser is None


def test_play_from_script_and_stream():
    game = GameSpec.create(_chain(), "w1", parse_formula("mu X.(p|<>X)"), 2)
    eloise = ScriptedSource(["1", "right", "w2", "0", "left"])
    prompts = io.StringIO()
    abelard = StreamSource(io.StringIO(""), prompts)

    transcript = play(game, eloise, abelard)

    assert transcript.winner is Player.ELOISE
    assert [step.choice for step in transcript.rounds[:-1]] == [1, "right", "w2", 0, "left"]
    assert prompts.getvalue() == ""


def test_illegal_scripted_choice_lists_legal_moves():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 2)

    with pytest.raises(IllegalChoiceError, match="legal choices"):
        play(game, ScriptedSource(["7"]), ScriptedSource([]))


def test_exhausted_script_is_reported():
    game = GameSpec.create(_chain(), "w0", parse_formula("mu X.(p|<>X)"), 2)

    with pytest.raises(BoundedMuError, match="script exhausted"):
        play(game, ScriptedSource([]), ScriptedSource([]))


def test_game_tree_export_for_trivial_fixpoint():
    game = GameSpec.create(_single(), "w", parse_formula("mu X. X"), 2)
    dot = export_game_tree(game)
    node_lines = [line for line in dot.splitlines() if re.match(r"^\s*n\d+ \[", line)]

    assert dot.startswith("digraph game_tree {")
    assert len(node_lines) == 4
    assert dot.count("->") == 3
    assert dot.count("peripheries=2") == 2
    assert "truncated" not in dot


def test_game_tree_export_truncates():
    game = GameSpec.create(_chain(), "w0", parse_formula("nu Y. mu X. (p & <>Y) | <>X"), 3)
    dot = export_game_tree(game, max_nodes=5)

    assert "// truncated at 5 nodes" in dot
    assert "style=dashed" in dot
    assert dot.count("->") == 4
