"""Ordinals below w^w in Cantor normal form.

An ordinal is a tuple of ``(exponent, coefficient)`` terms with strictly
decreasing exponents and positive coefficients; the empty tuple is zero.
These values serve as clock values and as the clock value bound of the
bounded semantics.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Optional, Tuple, Union

from .errors import OrdinalError, OrdinalSyntaxError


Term = Tuple[int, int]

_TERM_PATTERN = re.compile(
    r"^(?:w\^(?P<exp>\d+)(?:\*(?P<coeff_a>\d+))?|w(?:\*(?P<coeff_b>\d+))?|(?P<const>\d+))$"
)


class Order(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class OrdinalKind(enum.Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    LIMIT = "limit"


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: Tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        previous: Optional[int] = None
        for exponent, coefficient in self.terms:
            if exponent < 0 or coefficient < 1:
                raise OrdinalError(f"invalid Cantor normal form term: {(exponent, coefficient)}")
            if previous is not None and exponent >= previous:
                raise OrdinalError("Cantor normal form exponents must strictly decrease")
            previous = exponent

    @classmethod
    def from_int(cls, value: int) -> "Ordinal":
        if value < 0:
            raise OrdinalError(f"ordinals are non-negative, got {value}")
        return cls(((0, value),)) if value else cls()

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, Ordinal):
            return NotImplemented
        # Lexicographic order on CNF terms is the ordinal order.
        return self.terms < other.terms

    def __str__(self) -> str:
        return print_ordinal(self)

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)


ZERO = Ordinal()
ONE = Ordinal.from_int(1)
OMEGA = Ordinal(((1, 1),))

OrdinalLike = Union[Ordinal, int, str]


def as_ordinal(value: OrdinalLike) -> Ordinal:
    """Coerce an int, CNF text or Ordinal into an Ordinal."""

    if isinstance(value, Ordinal):
        return value
    if isinstance(value, bool):
        raise OrdinalError("booleans are not ordinals")
    if isinstance(value, int):
        return Ordinal.from_int(value)
    if isinstance(value, str):
        return parse_ordinal(value)
    raise OrdinalError(f"cannot interpret {value!r} as an ordinal")


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``w^K*C + ... + C0`` notation; a plain natural is finite."""

    cleaned = re.sub(r"\s+", "", text or "")
    if not cleaned:
        raise OrdinalSyntaxError("empty ordinal")
    if cleaned == "0":
        return ZERO

    terms = []
    for chunk in cleaned.split("+"):
        match = _TERM_PATTERN.match(chunk)
        if match is None:
            raise OrdinalSyntaxError(f"malformed ordinal term {chunk!r} in {text!r}")
        if match.group("const") is not None:
            exponent, coefficient = 0, int(match.group("const"))
        elif match.group("exp") is not None:
            exponent = int(match.group("exp"))
            coefficient = int(match.group("coeff_a") or 1)
        else:
            exponent, coefficient = 1, int(match.group("coeff_b") or 1)
        if coefficient < 1:
            raise OrdinalSyntaxError(f"coefficients must be at least 1 in {text!r}")
        terms.append((exponent, coefficient))

    for (left, _), (right, _) in zip(terms, terms[1:]):
        if right >= left:
            raise OrdinalSyntaxError(f"exponents must strictly decrease in {text!r}")
    return Ordinal(tuple(terms))


def print_ordinal(value: Ordinal) -> str:
    if not value.terms:
        return "0"
    parts = []
    for exponent, coefficient in value.terms:
        if exponent == 0:
            parts.append(str(coefficient))
            continue
        head = "w" if exponent == 1 else f"w^{exponent}"
        parts.append(head if coefficient == 1 else f"{head}*{coefficient}")
    return "+".join(parts)


def compare(left: Ordinal, right: Ordinal) -> Order:
    if left == right:
        return Order.EQUAL
    return Order.LESS if left < right else Order.GREATER


def classify(value: Ordinal) -> OrdinalKind:
    if not value.terms:
        return OrdinalKind.ZERO
    if value.terms[-1][0] == 0:
        return OrdinalKind.SUCCESSOR
    return OrdinalKind.LIMIT


def predecessor(value: Ordinal) -> Ordinal:
    kind = classify(value)
    if kind is not OrdinalKind.SUCCESSOR:
        raise OrdinalError(f"{print_ordinal(value)} is a {kind.value} ordinal and has no predecessor")
    *head, (_, coefficient) = value.terms
    if coefficient == 1:
        return Ordinal(tuple(head))
    return Ordinal(tuple(head) + ((0, coefficient - 1),))


def successor(value: Ordinal) -> Ordinal:
    if value.terms and value.terms[-1][0] == 0:
        *head, (_, coefficient) = value.terms
        return Ordinal(tuple(head) + ((0, coefficient + 1),))
    return Ordinal(value.terms + ((0, 1),))


def to_finite(value: Ordinal) -> Optional[int]:
    if not value.terms:
        return 0
    if value.is_finite:
        return value.terms[0][1]
    return None
