"""Syntax of the modal mu-calculus.

Formulas are immutable trees whose nodes remember their occurrence path, the
sequence of child indices leading from the root to the node. Two equal
subformulas at different places of a formula are therefore different
occurrences, e.g. the two ``p`` of ``p | p`` have paths ``(0,)`` and ``(1,)``.

Surface syntax::

    phi ::= p | ~p | X | phi | phi | phi & phi | <>phi | []phi
          | mu X. phi | nu X. phi | ( phi )

Propositions are lowercase-initial identifiers, labels uppercase-initial.
``&`` binds tighter than ``|``, both associate to the left, and the scope of
``mu``/``nu`` extends as far right as possible.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

from .errors import FormulaError, FormulaSyntaxError


Path = Tuple[int, ...]
OccurrenceSet = Tuple[Path, ...]

_PROP_NAME = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_LABEL_NAME = re.compile(r"^[A-Z][A-Za-z0-9_]*$")
_KEYWORDS = frozenset({"mu", "nu"})
MAX_NESTING = 100
_TOKEN_PATTERN = re.compile(r"\s*(?:(<>|\[\]|[~&|().])|([A-Za-z_][A-Za-z0-9_]*))")


class Kind(enum.Enum):
    PROP = "prop"
    NEG_PROP = "neg_prop"
    LABEL = "label"
    OR = "or"
    AND = "and"
    DIAMOND = "diamond"
    BOX = "box"
    MU = "mu"
    NU = "nu"


_BINARY = (Kind.OR, Kind.AND)
_FIXPOINTS = (Kind.MU, Kind.NU)


@dataclass(frozen=True)
class Formula:
    kind: Kind
    name: Optional[str] = None
    children: Tuple["Formula", ...] = ()
    path: Path = ()

    @property
    def is_fixpoint(self) -> bool:
        return self.kind in _FIXPOINTS

    @property
    def body(self) -> "Formula":
        if not self.is_fixpoint:
            raise FormulaError(f"{self.kind.value} node has no fixpoint body")
        return self.children[0]

    def at(self, path: Path) -> "Formula":
        return subformula(self, path)

    def __str__(self) -> str:
        return print_formula(self)


def _anchor(node: Formula, path: Path = ()) -> Formula:
    children = tuple(
        _anchor(child, path + (index,)) for index, child in enumerate(node.children)
    )
    return Formula(node.kind, node.name, children, path)


def is_proposition_symbol(name: str) -> bool:
    return bool(_PROP_NAME.match(name)) and name not in _KEYWORDS


def _check_prop(name: str) -> str:
    if not is_proposition_symbol(name):
        raise FormulaError(f"{name!r} is not a proposition symbol (lowercase identifier)")
    return name


def _check_label(name: str) -> str:
    if not _LABEL_NAME.match(name):
        raise FormulaError(f"{name!r} is not a label symbol (uppercase identifier)")
    return name


def prop(name: str) -> Formula:
    return Formula(Kind.PROP, _check_prop(name))


def neg_prop(name: str) -> Formula:
    return Formula(Kind.NEG_PROP, _check_prop(name))


def label(name: str) -> Formula:
    return Formula(Kind.LABEL, _check_label(name))


def disjunction(left: Formula, right: Formula) -> Formula:
    return _anchor(Formula(Kind.OR, None, (left, right)))


def conjunction(left: Formula, right: Formula) -> Formula:
    return _anchor(Formula(Kind.AND, None, (left, right)))


def diamond(child: Formula) -> Formula:
    return _anchor(Formula(Kind.DIAMOND, None, (child,)))


def box(child: Formula) -> Formula:
    return _anchor(Formula(Kind.BOX, None, (child,)))


def mu(name: str, body: Formula) -> Formula:
    return _anchor(Formula(Kind.MU, _check_label(name), (body,)))


def nu(name: str, body: Formula) -> Formula:
    return _anchor(Formula(Kind.NU, _check_label(name), (body,)))


# ---------------------------------------------------------------- parsing


def _depth(node: Formula) -> int:
    deepest = 0
    stack = [(node, 1)]
    while stack:
        current, level = stack.pop()
        deepest = max(deepest, level)
        stack.extend((child, level + 1) for child in current.children)
    return deepest


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: List[Tuple[str, int]] = []
        position = 0
        while True:
            match = _TOKEN_PATTERN.match(text, position)
            if match is None:
                remainder = text[position:]
                if remainder.strip():
                    offset = position + (len(remainder) - len(remainder.lstrip()))
                    raise FormulaSyntaxError(f"unexpected character {text[offset]!r}", offset)
                break
            token = match.group(1) or match.group(2)
            self.tokens.append((token, match.start(match.lastindex or 1)))
            position = match.end()
        self.index = 0
        self.depth = 0

    def peek(self) -> Optional[str]:
        if self.index < len(self.tokens):
            return self.tokens[self.index][0]
        return None

    def offset(self) -> int:
        if self.index < len(self.tokens):
            return self.tokens[self.index][1]
        return len(self.text)

    def advance(self) -> str:
        token = self.peek()
        if token is None:
            raise FormulaSyntaxError("unexpected end of formula", len(self.text))
        self.index += 1
        return token

    def expect(self, token: str) -> None:
        if self.peek() != token:
            found = self.peek()
            described = "end of formula" if found is None else repr(found)
            raise FormulaSyntaxError(f"expected {token!r}, found {described}", self.offset())
        self.index += 1

    def parse(self) -> Formula:
        if not self.tokens:
            raise FormulaSyntaxError("empty formula", 0)
        node = self.parse_or()
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected {self.peek()!r}", self.offset())
        if _depth(node) > MAX_NESTING:
            raise FormulaSyntaxError(f"formula nesting too deep (limit {MAX_NESTING})", 0)
        return node

    def parse_or(self) -> Formula:
        node = self.parse_and()
        while self.peek() == "|":
            self.advance()
            node = Formula(Kind.OR, None, (node, self.parse_and()))
        return node

    def parse_and(self) -> Formula:
        node = self.parse_unary()
        while self.peek() == "&":
            self.advance()
            node = Formula(Kind.AND, None, (node, self.parse_unary()))
        return node

    def parse_unary(self) -> Formula:
        if self.depth >= MAX_NESTING:
            raise FormulaSyntaxError(
                f"formula nesting too deep (limit {MAX_NESTING})", self.offset()
            )
        self.depth += 1
        try:
            return self._unary()
        finally:
            self.depth -= 1

    def _unary(self) -> Formula:
        start = self.offset()
        token = self.advance()
        if token == "~":
            operand = self.peek()
            if operand is None or not is_proposition_symbol(operand):
                raise FormulaSyntaxError(
                    "negation applies only to proposition symbols", self.offset()
                )
            self.advance()
            return Formula(Kind.NEG_PROP, operand)
        if token == "<>":
            return Formula(Kind.DIAMOND, None, (self.parse_unary(),))
        if token == "[]":
            return Formula(Kind.BOX, None, (self.parse_unary(),))
        if token in _KEYWORDS:
            name_offset = self.offset()
            name = self.peek()
            if name is None or not _LABEL_NAME.match(name):
                raise FormulaSyntaxError(
                    f"expected a label symbol (uppercase identifier) after {token!r}",
                    name_offset,
                )
            self.advance()
            self.expect(".")
            kind = Kind.MU if token == "mu" else Kind.NU
            return Formula(kind, name, (self.parse_or(),))
        if token == "(":
            node = self.parse_or()
            self.expect(")")
            return node
        if _PROP_NAME.match(token):
            return Formula(Kind.PROP, token)
        if _LABEL_NAME.match(token):
            return Formula(Kind.LABEL, token)
        raise FormulaSyntaxError(f"unexpected {token!r}", start)


def parse_formula(text: str) -> Formula:
    """Parse surface syntax into an occurrence-addressed tree."""

    return _anchor(_Parser(text).parse())


# --------------------------------------------------------------- printing


def _render(node: Formula) -> Tuple[str, bool]:
    """Return the text of ``node`` and whether a binder is open at its right end."""

    kind = node.kind
    if kind is Kind.PROP or kind is Kind.LABEL:
        return node.name or "", False
    if kind is Kind.NEG_PROP:
        return f"~{node.name}", False
    if kind in (Kind.DIAMOND, Kind.BOX):
        child = node.children[0]
        text, open_right = _render(child)
        if child.kind in _BINARY:
            text, open_right = f"({text})", False
        operator = "<>" if kind is Kind.DIAMOND else "[]"
        return operator + text, open_right
    if kind in _FIXPOINTS:
        text, _ = _render(node.body)
        if node.body.kind in _BINARY:
            text = f"({text})"
        return f"{kind.value} {node.name}. {text}", True

    left, right = node.children
    left_text, left_open = _render(left)
    right_text, right_open = _render(right)
    if kind is Kind.OR:
        if left_open:
            left_text = f"({left_text})"
        if right.kind is Kind.OR:
            right_text, right_open = f"({right_text})", False
        return f"{left_text} | {right_text}", right_open
    if left_open or left.kind is Kind.OR:
        left_text = f"({left_text})"
    if right.kind in _BINARY:
        right_text, right_open = f"({right_text})", False
    return f"{left_text} & {right_text}", right_open


def print_formula(node: Formula) -> str:
    return _render(node)[0]


# ------------------------------------------------------------ occurrences


def iter_nodes(node: Formula) -> Iterator[Formula]:
    """Yield every node of the tree in preorder."""

    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children))


def subformula(node: Formula, path: Path) -> Formula:
    current = node
    for step, index in enumerate(path):
        if not 0 <= index < len(current.children):
            raise FormulaError(f"invalid occurrence path {tuple(path)} (fails at step {step})")
        current = current.children[index]
    return current


def occurrences(node: Formula) -> OccurrenceSet:
    return tuple(item.path for item in iter_nodes(node))


def fixpoint_occurrences(node: Formula) -> OccurrenceSet:
    return tuple(item.path for item in iter_nodes(node) if item.is_fixpoint)


def free_labels(node: Formula) -> FrozenSet[str]:
    free: Set[str] = set()

    def visit(current: Formula, bound: FrozenSet[str]) -> None:
        if current.kind is Kind.LABEL:
            if current.name not in bound:
                free.add(current.name or "")
            return
        if current.is_fixpoint:
            bound = bound | {current.name or ""}
        for child in current.children:
            visit(child, bound)

    visit(node, frozenset())
    return frozenset(free)


def is_sentence(node: Formula) -> bool:
    return not free_labels(node)


def binder_scope(node: Formula, path: Path) -> OccurrenceSet:
    """Fixpoint occurrences strictly above ``path``, outermost first."""

    subformula(node, path)
    return tuple(
        path[:depth] for depth in range(len(path)) if subformula(node, path[:depth]).is_fixpoint
    )


def reference_formula(node: Formula, label_occ: Path) -> Path:
    """Return the occurrence of the nearest Mu/Nu binding the label at ``label_occ``."""

    target = subformula(node, label_occ)
    if target.kind is not Kind.LABEL:
        raise FormulaError(
            f"occurrence {tuple(label_occ)} is a {target.kind.value} node, not a label"
        )
    for depth in range(len(label_occ) - 1, -1, -1):
        ancestor = subformula(node, label_occ[:depth])
        if ancestor.is_fixpoint and ancestor.name == target.name:
            return tuple(label_occ[:depth])
    raise FormulaError(f"label {target.name} at {tuple(label_occ)} is free")


def height(node: Formula) -> int:
    if not node.children:
        return 0
    return 1 + max(height(child) for child in node.children)


def replace_at(node: Formula, path: Path, new: Formula) -> Formula:
    """Return ``node`` with the occurrence at ``path`` replaced by ``new``."""

    subformula(node, path)

    def rebuild(current: Formula, depth: int) -> Formula:
        if depth == len(path):
            return new
        index = path[depth]
        children = list(current.children)
        children[index] = rebuild(children[index], depth + 1)
        return Formula(current.kind, current.name, tuple(children))

    return _anchor(rebuild(node, 0))


def label_names(node: Formula) -> FrozenSet[str]:
    return frozenset(
        item.name or ""
        for item in iter_nodes(node)
        if item.kind is Kind.LABEL or item.is_fixpoint
    )


# ------------------------------------------------------------ normal form


def is_normal_form(node: Formula) -> bool:
    seen: Set[str] = set()
    for item in iter_nodes(node):
        if item.is_fixpoint:
            if item.name in seen:
                return False
            seen.add(item.name or "")
    return True


def to_normal_form(node: Formula) -> Formula:
    """Rename binders so that every label is bound by at most one Mu/Nu.

    The first binder of a label in preorder keeps its name; later binders of
    the same label become ``<label><n>`` with the smallest ``n`` not already
    in use, together with the atoms they bind.
    """

    taken: Set[str] = set(label_names(node))
    used_binders: Set[str] = set()

    def fresh(name: str) -> str:
        counter = 1
        while f"{name}{counter}" in taken:
            counter += 1
        candidate = f"{name}{counter}"
        taken.add(candidate)
        return candidate

    def rebuild(current: Formula, renaming: Dict[str, str]) -> Formula:
        if current.kind is Kind.LABEL:
            return replace(current, name=renaming.get(current.name or "", current.name))
        if current.is_fixpoint:
            name = current.name or ""
            new_name = name if name not in used_binders else fresh(name)
            used_binders.add(new_name)
            inner = dict(renaming)
            inner[name] = new_name
            return replace(current, name=new_name, children=(rebuild(current.body, inner),))
        if not current.children:
            return current
        return replace(
            current, children=tuple(rebuild(child, renaming) for child in current.children)
        )

    return rebuild(node, {})
