"""Finite Kripke models and dense state sets."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import ModelFormatError, UnknownStateError
from .formula import is_proposition_symbol


class StateSet:
    """Immutable subset of a model's states, one boolean per state index."""

    __slots__ = ("_mask",)

    def __init__(self, mask: Iterable[bool]) -> None:
        array = np.array(mask, dtype=bool).reshape(-1)
        array.setflags(write=False)
        self._mask = array

    @classmethod
    def empty(cls, size: int) -> "StateSet":
        return cls(np.zeros(size, dtype=bool))

    @classmethod
    def full(cls, size: int) -> "StateSet":
        return cls(np.ones(size, dtype=bool))

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> "StateSet":
        mask = np.zeros(size, dtype=bool)
        for index in indices:
            mask[index] = True
        return cls(mask)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def universe(self) -> int:
        return int(self._mask.shape[0])

    def indices(self) -> Tuple[int, ...]:
        return tuple(int(index) for index in np.flatnonzero(self._mask))

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __len__(self) -> int:
        return int(self._mask.sum())

    def __contains__(self, index: object) -> bool:
        if not isinstance(index, (int, np.integer)):
            return False
        return 0 <= index < self.universe and bool(self._mask[index])

    def __or__(self, other: "StateSet") -> "StateSet":
        return StateSet(self._mask | other._mask)

    def __and__(self, other: "StateSet") -> "StateSet":
        return StateSet(self._mask & other._mask)

    def __sub__(self, other: "StateSet") -> "StateSet":
        return StateSet(self._mask & ~other._mask)

    def complement(self) -> "StateSet":
        return StateSet(~self._mask)

    def issubset(self, other: "StateSet") -> bool:
        return bool(np.all(~self._mask | other._mask))

    def __le__(self, other: "StateSet") -> bool:
        return self.issubset(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.universe == other.universe and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((self.universe, self._mask.tobytes()))

    def __repr__(self) -> str:
        return f"StateSet({list(self.indices())}/{self.universe})"


@dataclass(frozen=True, eq=False)
class KripkeModel:
    states: Tuple[str, ...]
    adjacency: np.ndarray
    valuation: Mapping[str, StateSet]

    @classmethod
    def build(
        cls,
        states: Sequence[str],
        edges: Iterable[Tuple[str, str]],
        valuation: Mapping[str, Iterable[str]],
    ) -> "KripkeModel":
        names = tuple(states)
        if not names:
            raise ModelFormatError("the state set W must be nonempty")
        index: Dict[str, int] = {}
        for position, name in enumerate(names):
            if not isinstance(name, str) or not name:
                raise ModelFormatError(f"state identifiers must be nonempty strings, got {name!r}")
            if name in index:
                raise ModelFormatError(f"duplicate state id: {name!r}")
            index[name] = position

        def lookup(name: str) -> int:
            if name not in index:
                raise UnknownStateError(name)
            return index[name]

        size = len(names)
        adjacency = np.zeros((size, size), dtype=bool)
        for source, target in edges:
            adjacency[lookup(source), lookup(target)] = True
        adjacency.setflags(write=False)

        for symbol in valuation:
            if not isinstance(symbol, str) or not is_proposition_symbol(symbol):
                raise ModelFormatError(
                    f"valuation key {symbol!r} is not a proposition symbol (lowercase identifier)"
                )
        sets = {
            symbol: StateSet.from_indices(size, (lookup(member) for member in members))
            for symbol, members in valuation.items()
        }
        return cls(names, adjacency, MappingProxyType(sets))

    @cached_property
    def _index(self) -> Mapping[str, int]:
        return {name: position for position, name in enumerate(self.states)}

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownStateError(name) from None

    def state_set(self, names: Iterable[str]) -> StateSet:
        return StateSet.from_indices(self.size, (self.index_of(name) for name in names))

    def names(self, subset: StateSet) -> Tuple[str, ...]:
        return tuple(self.states[index] for index in subset)

    def empty(self) -> StateSet:
        return StateSet.empty(self.size)

    def full(self) -> StateSet:
        return StateSet.full(self.size)

    def prop(self, symbol: str) -> StateSet:
        found = self.valuation.get(symbol)
        return found if found is not None else self.empty()

    def edges(self) -> List[Tuple[str, str]]:
        rows, cols = np.nonzero(self.adjacency)
        return [(self.states[int(row)], self.states[int(col)]) for row, col in zip(rows, cols)]

    def _canonical(self) -> Tuple[Any, ...]:
        return (
            tuple(sorted(self.states)),
            tuple(sorted(self.edges())),
            tuple(
                sorted(
                    (symbol, tuple(sorted(self.names(members))))
                    for symbol, members in self.valuation.items()
                )
            ),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KripkeModel):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self) -> int:
        return hash(self._canonical())


def successors(model: KripkeModel, state: str) -> StateSet:
    return StateSet(model.adjacency[model.index_of(state)])


def successor_indices(model: KripkeModel, index: int) -> Tuple[int, ...]:
    return tuple(int(item) for item in np.flatnonzero(model.adjacency[index]))


def predecessors_exists(model: KripkeModel, target: StateSet) -> StateSet:
    """States with at least one successor in ``target``."""

    return StateSet((model.adjacency & target.mask[np.newaxis, :]).any(axis=1))


def predecessors_forall(model: KripkeModel, target: StateSet) -> StateSet:
    """States all of whose successors lie in ``target`` (dead ends included)."""

    return StateSet((~model.adjacency | target.mask[np.newaxis, :]).all(axis=1))


def restrict(model: KripkeModel, keep: Iterable[str]) -> KripkeModel:
    """Induced sub-model on ``keep``, preserving the original state order."""

    wanted = set(keep)
    for name in wanted:
        model.index_of(name)
    states = [name for name in model.states if name in wanted]
    edges = [(source, target) for source, target in model.edges() if source in wanted and target in wanted]
    valuation = {
        symbol: [name for name in model.names(members) if name in wanted]
        for symbol, members in model.valuation.items()
    }
    return KripkeModel.build(states, edges, valuation)


def load_model(text: str) -> KripkeModel:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model document is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(document, Mapping):
        raise ModelFormatError("model document must be a JSON object")

    states = document.get("states")
    if not isinstance(states, list) or not all(isinstance(item, str) for item in states):
        raise ModelFormatError('"states" must be a list of strings')

    raw_edges = document.get("edges", [])
    if not isinstance(raw_edges, list):
        raise ModelFormatError('"edges" must be a list of [source, target] pairs')
    edges: List[Tuple[str, str]] = []
    for item in raw_edges:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(end, str) for end in item)
        ):
            raise ModelFormatError(f"malformed edge {item!r}; expected [source, target]")
        edges.append((item[0], item[1]))

    raw_valuation = document.get("valuation", {})
    if not isinstance(raw_valuation, Mapping):
        raise ModelFormatError('"valuation" must map proposition symbols to state lists')
    valuation: Dict[str, List[str]] = {}
    for symbol, members in raw_valuation.items():
        if not isinstance(members, list) or not all(isinstance(item, str) for item in members):
            raise ModelFormatError(f"valuation of {symbol!r} must be a list of state ids")
        valuation[symbol] = members

    return KripkeModel.build(states, edges, valuation)


def save_model(model: KripkeModel) -> str:
    document = {
        "states": sorted(model.states),
        "edges": [list(edge) for edge in sorted(model.edges())],
        "valuation": {
            symbol: sorted(model.names(model.valuation[symbol]))
            for symbol in sorted(model.valuation)
        },
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def random_model(
    seed: int,
    n_states: int,
    edge_density: float,
    props: Sequence[str],
) -> KripkeModel:
    """Draw a model: every ordered pair is an edge with probability ``edge_density``."""

    if n_states < 1:
        raise ModelFormatError(f"n_states must be at least 1, got {n_states}")
    if not 0.0 <= edge_density <= 1.0:
        raise ModelFormatError(f"edge_density must lie in [0, 1], got {edge_density}")

    rng = np.random.default_rng(seed)
    states = [f"w{index}" for index in range(n_states)]
    adjacency = rng.random((n_states, n_states)) < edge_density
    truth = rng.random((n_states, len(props))) < 0.5
    edges = [(states[int(row)], states[int(col)]) for row, col in zip(*np.nonzero(adjacency))]
    valuation = {
        symbol: [states[row] for row in range(n_states) if truth[row, column]]
        for column, symbol in enumerate(props)
    }
    return KripkeModel.build(states, edges, valuation)
