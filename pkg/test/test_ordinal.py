"""Tests for Cantor normal form ordinals."""

from __future__ import annotations

import os
import sys

import pytest


PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
PACKAGE_ROOT = os.path.dirname(PROJECT_ROOT)
if PACKAGE_ROOT not in sys.path:
    sys.path.insert(0, PACKAGE_ROOT)

from boundedmu.errors import OrdinalError, OrdinalSyntaxError
from boundedmu.ordinal import (
    OMEGA,
    ONE,
    ZERO,
    Ordinal,
    OrdinalKind,
    Order,
    as_ordinal,
    classify,
    compare,
    parse_ordinal,
    predecessor,
    print_ordinal,
    successor,
    to_finite,
)


def test_parse_and_print_agree_on_canonical_text():
    for text in ["0", "1", "7", "w", "w+1", "w*2+3", "w^2", "w^2*2+w+4", "w^3+w^2*5"]:
        assert print_ordinal(parse_ordinal(text)) == text


def test_parse_ignores_whitespace():
    assert parse_ordinal(" w ^2 * 2 + w + 4 ") == Ordinal(((2, 2), (1, 1), (0, 4)))


@pytest.mark.parametrize("text", ["", "w+w^2", "w+w", "w*0", "omega", "-1", "w^"])
def test_parse_rejects_malformed_text(text):
    with pytest.raises(OrdinalSyntaxError):
        parse_ordinal(text)


def test_order_follows_cantor_normal_form():
    chain = ["0", "1", "5", "w", "w+1", "w+5", "w*2", "w^2", "w^2+w*3+1", "w^3"]
    values = [parse_ordinal(text) for text in chain]
    for lower, upper in zip(values, values[1:]):
        assert lower < upper
        assert compare(lower, upper) is Order.LESS
        assert compare(upper, lower) is Order.GREATER
    assert compare(values[3], parse_ordinal("w")) is Order.EQUAL


def test_classify_zero_successor_limit():
    assert classify(ZERO) is OrdinalKind.ZERO
    assert classify(parse_ordinal("3")) is OrdinalKind.SUCCESSOR
    assert classify(parse_ordinal("w+1")) is OrdinalKind.SUCCESSOR
    assert classify(OMEGA) is OrdinalKind.LIMIT
    assert classify(parse_ordinal("w^2+w")) is OrdinalKind.LIMIT


def test_predecessor_and_successor_are_inverse_on_successors():
    for text in ["1", "4", "w+1", "w^2*2+3"]:
        value = parse_ordinal(text)
        assert successor(predecessor(value)) == value
    assert predecessor(parse_ordinal("w+1")) == OMEGA
    assert successor(OMEGA) == parse_ordinal("w+1")
    assert successor(ZERO) == ONE


@pytest.mark.parametrize("text", ["0", "w", "w^2*3"])
def test_predecessor_undefined_for_zero_and_limits(text):
    with pytest.raises(OrdinalError):
        predecessor(parse_ordinal(text))


def test_finite_conversion_and_coercion():
    assert to_finite(ZERO) == 0
    assert to_finite(parse_ordinal("12")) == 12
    assert to_finite(OMEGA) is None
    assert as_ordinal(3) == Ordinal.from_int(3)
    assert as_ordinal("w") == OMEGA
    assert as_ordinal(OMEGA) is OMEGA
    with pytest.raises(OrdinalError):
        as_ordinal(True)
    with pytest.raises(OrdinalError):
        Ordinal.from_int(-1)


def test_constructor_rejects_non_canonical_terms():
    with pytest.raises(OrdinalError):
        Ordinal(((0, 1), (1, 1)))
    with pytest.raises(OrdinalError):
        Ordinal(((1, 0),))
