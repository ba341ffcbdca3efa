"""Tests for the standard and bounded compositional semantics."""

from __future__ import annotations

import os
import sys

import pytest


PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
PACKAGE_ROOT = os.path.dirname(PROJECT_ROOT)
if PACKAGE_ROOT not in sys.path:
    sys.path.insert(0, PACKAGE_ROOT)

from boundedmu.errors import BoundError, FormulaError, UnboundLabelError
from boundedmu.formula import parse_formula
from boundedmu.kripke import KripkeModel, random_model
from boundedmu.ordinal import OMEGA, Ordinal
from boundedmu.semantics import (
    FixpointKind,
    approximant,
    build_ladder,
    eval_bounded,
    eval_standard,
    least_refutation,
    least_witness,
    operator_apply,
    truth_set,
)


def _chain(p_states=("w2",)) -> KripkeModel:
    return KripkeModel.build(["w0", "w1", "w2"], [("w0", "w1"), ("w1", "w2")], {"p": list(p_states)})


REACH = parse_formula("mu X.(p|<>X)")
ALWAYS = parse_formula("nu X.(p & <>X)")


def test_reachability_approximants_on_chain():
    model = _chain()

    assert model.names(eval_bounded(model, REACH, None, 1)) == ("w2",)
    assert model.names(eval_bounded(model, REACH, None, 2)) == ("w1", "w2")
    assert model.names(eval_bounded(model, REACH, None, 3)) == ("w0", "w1", "w2")
    assert model.names(eval_standard(model, REACH)) == ("w0", "w1", "w2")


def test_greatest_fixpoint_approximants_on_chain():
    model = _chain(("w0", "w1", "w2"))

    assert model.names(eval_bounded(model, ALWAYS, None, 2)) == ("w0",)
    assert model.names(eval_bounded(model, ALWAYS, None, 1)) == ("w0", "w1")
    assert model.names(eval_standard(model, ALWAYS)) == ()


def test_trivial_fixpoints():
    model = _chain()
    for gamma in (1, 2, 5, "w"):
        assert len(eval_bounded(model, parse_formula("mu X. X"), None, gamma)) == 0
        assert len(eval_bounded(model, parse_formula("nu X. X"), None, gamma)) == model.size


def test_infinite_bound_is_standard_semantics():
    for seed in range(30):
        model = random_model(seed, 3, 0.5, ["p", "q"])
        node = parse_formula("nu Y. mu X. (p & <>Y) | <>X")
        assert eval_bounded(model, node, None, OMEGA) == eval_standard(model, node)
        assert eval_bounded(model, node, None, model.size + 1) == eval_standard(model, node)


def test_truth_set_switches_on_gamma():
    model = _chain()

    assert truth_set(model, REACH) == eval_standard(model, REACH)
    assert model.names(truth_set(model, REACH, 2)) == ("w1", "w2")


def test_zero_bound_is_rejected():
    with pytest.raises(BoundError):
        eval_bounded(_chain(), REACH, None, 0)


def test_free_labels_need_an_assignment():
    model = _chain()
    node = parse_formula("<>Y")

    with pytest.raises(UnboundLabelError) as excinfo:
        eval_bounded(model, node, None, 2)
    assert excinfo.value.labels == ("Y",)
    assert model.names(eval_bounded(model, node, {"Y": model.state_set(["w1"])}, 2)) == ("w0",)


def test_ladder_stages_and_stabilization():
    model = _chain()
    ladder = build_ladder(model, REACH.body, "X", None, 3, FixpointKind.MU)

    assert [model.names(stage) for stage in ladder.stages] == [
        (),
        ("w2",),
        ("w1", "w2"),
        ("w0", "w1", "w2"),
    ]
    assert ladder.stabilization == 3
    assert ladder.stage(10) == ladder.fixpoint
    assert ladder.stage(OMEGA) == ladder.fixpoint
    assert approximant(model, REACH.body, "X", None, 3, FixpointKind.MU, 2) == ladder.stages[2]


def test_operator_apply_is_one_step():
    model = _chain()
    step = operator_apply(model, REACH.body, "X", None, 3, model.state_set(["w2"]))

    assert model.names(step) == ("w1", "w2")


def test_least_witness_on_chain():
    model = _chain()

    assert least_witness(model, "w0", REACH, None, 4) == Ordinal.from_int(2)
    assert least_witness(model, "w2", REACH, None, 4) == Ordinal.from_int(0)
    assert least_witness(model, "w0", REACH, None, 2) is None
    assert least_witness(model, "w0", REACH, None, OMEGA) == Ordinal.from_int(2)


def test_least_refutation_on_chain():
    model = _chain(("w0", "w1", "w2"))

    assert least_refutation(model, "w2", ALWAYS, None, 4) == Ordinal.from_int(0)
    assert least_refutation(model, "w1", ALWAYS, None, 4) == Ordinal.from_int(1)
    assert least_refutation(model, "w0", ALWAYS, None, 2) is None


def test_witness_requires_matching_binder():
    with pytest.raises(FormulaError):
        least_witness(_chain(), "w0", ALWAYS, None, 3)


LEAST_ONLY = [
    parse_formula("mu X.(p | <>X)"),
    parse_formula("mu X.(q & []X) | mu Y.(p | <>(~q & Y))"),
    parse_formula("mu X. mu Y.(p | <>X | []Y)"),
]
GREATEST_ONLY = [
    parse_formula("nu X.(p & <>X)"),
    parse_formula("nu X.(q | []X) & nu Y.(p & <>(~q | Y))"),
    parse_formula("nu X. nu Y.(p & (<>X | []Y))"),
]


def test_bounded_truth_sets_are_monotone_in_gamma_per_fixpoint_kind():
    for seed in range(200):
        model = random_model(seed, 1 + seed % 4, 0.4, ("p", "q"))
        for gamma in range(1, 6):
            for sentence in LEAST_ONLY:
                assert eval_bounded(model, sentence, None, gamma) <= eval_bounded(model, sentence, None, gamma + 1)
            for sentence in GREATEST_ONLY:
                assert eval_bounded(model, sentence, None, gamma + 1) <= eval_bounded(model, sentence, None, gamma)
