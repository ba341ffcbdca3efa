"""Clock-bounded evaluation games.

A position is ``(w, phi, c)``: a state, an occurrence of the root sentence
and a clock mapping that gives every fixpoint occurrence a natural number
at most the bound. Eloise verifies and Abelard falsifies. The announce rule
at ``mu``/``nu`` occurrences and the lowering rule at labels make every play
finite; the lexicographic progress measure below is checked on every move
the solver and the play driver take.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import (
    Callable,
    Deque,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    TextIO,
    Tuple,
    Union,
)

from .errors import (
    BoundError,
    BoundedMuError,
    FormulaError,
    IllegalChoiceError,
    ProgressViolationError,
)
from .formula import (
    Formula,
    Kind,
    Path,
    binder_scope,
    fixpoint_occurrences,
    free_labels,
    height,
    iter_nodes,
    print_formula,
    reference_formula,
    to_normal_form,
)
from .kripke import KripkeModel, StateSet, successor_indices
from .ordinal import OrdinalLike, as_ordinal, print_ordinal, to_finite


logger = logging.getLogger(__name__)

Choice = Union[str, int]
Key = Tuple[int, Path, Tuple[int, ...]]


class Player(enum.Enum):
    ELOISE = "Eloise"
    ABELARD = "Abelard"

    @property
    def opponent(self) -> "Player":
        return Player.ABELARD if self is Player.ELOISE else Player.ELOISE


class ClockPolicy(enum.Enum):
    """``DECREMENT`` lets announcers pick only the largest clock value."""

    FULL = "full"
    DECREMENT = "decrement"


@dataclass(frozen=True)
class Position:
    state: int
    path: Path
    clocks: Tuple[int, ...]


@dataclass(frozen=True)
class Option:
    choice: Choice
    position: Position


@dataclass(frozen=True)
class Move:
    chooser: Optional[Player]
    options: Tuple[Option, ...] = ()
    winner: Optional[Player] = None

    @property
    def is_terminal(self) -> bool:
        return self.winner is not None

    def legal_choices(self) -> Tuple[Choice, ...]:
        return tuple(option.choice for option in self.options)

    def resolve(self, choice: Choice) -> Option:
        for option in self.options:
            if option.choice == choice:
                return option
        text = str(choice).strip()
        for option in self.options:
            if str(option.choice) == text:
                return option
        raise IllegalChoiceError(choice, self.legal_choices())


@dataclass(frozen=True)
class _Layout:
    nodes: Mapping[Path, Formula]
    fixpoints: Tuple[Path, ...]
    slot: Mapping[Path, int]
    scope: Mapping[Path, Tuple[int, ...]]
    reference: Mapping[Path, int]
    inside: Mapping[int, Tuple[int, ...]]
    heights: Mapping[Path, int]
    nesting: int


def _layout(sentence: Formula) -> _Layout:
    nodes = {node.path: node for node in iter_nodes(sentence)}
    fixpoints = fixpoint_occurrences(sentence)
    slot = {path: index for index, path in enumerate(fixpoints)}
    scope = {
        path: tuple(slot[ancestor] for ancestor in binder_scope(sentence, path))
        for path in nodes
    }
    reference = {
        path: slot[reference_formula(sentence, path)]
        for path, node in nodes.items()
        if node.kind is Kind.LABEL
    }
    # Fixpoint occurrences inside the body of each fixpoint, body included.
    inside = {
        index: tuple(
            slot[other]
            for other in fixpoints
            if len(other) > len(path) and other[: len(path)] == path
        )
        for path, index in slot.items()
    }
    heights = {path: height(node) for path, node in nodes.items()}
    nesting = max((len(item) for item in scope.values()), default=0)
    return _Layout(nodes, fixpoints, slot, scope, reference, inside, heights, nesting)


@dataclass(frozen=True)
class GameSpec:
    model: KripkeModel
    state: int
    sentence: Formula
    gamma: int

    @classmethod
    def create(
        cls,
        model: KripkeModel,
        state: str,
        formula: Formula,
        gamma: OrdinalLike,
    ) -> "GameSpec":
        free = free_labels(formula)
        if free:
            raise FormulaError(f"not a sentence; free labels: {', '.join(sorted(free))}")
        bound = as_ordinal(gamma)
        finite = to_finite(bound)
        if finite is None:
            raise BoundError(
                f"evaluation games need a finite clock bound, got {print_ordinal(bound)}"
            )
        if finite < 1:
            raise BoundError("the clock value bound must be at least 1")
        return cls(model, model.index_of(state), to_normal_form(formula), finite)

    @cached_property
    def layout(self) -> _Layout:
        return _layout(self.sentence)

    def with_state(self, state: int) -> "GameSpec":
        game = GameSpec(self.model, state, self.sentence, self.gamma)
        game.__dict__["layout"] = self.layout
        return game


ClockMap = Dict[Path, int]


def initial_position(game: GameSpec) -> Position:
    return Position(game.state, (), (game.gamma,) * len(game.layout.fixpoints))


def clock_map(game: GameSpec, position: Position) -> ClockMap:
    return dict(zip(game.layout.fixpoints, position.clocks))


def _validate(game: GameSpec, position: Position) -> Formula:
    layout = game.layout
    node = layout.nodes.get(position.path)
    if (
        node is None
        or not 0 <= position.state < game.model.size
        or len(position.clocks) != len(layout.fixpoints)
        or any(not 0 <= value <= game.gamma for value in position.clocks)
    ):
        raise BoundedMuError(f"position {position} is inconsistent with the game")
    return node


def _clock_choices(limit: int, policy: ClockPolicy) -> Sequence[int]:
    if policy is ClockPolicy.DECREMENT:
        return (limit - 1,)
    return range(limit)


def legal_moves(
    game: GameSpec, position: Position, policy: ClockPolicy = ClockPolicy.FULL
) -> Move:
    node = _validate(game, position)
    layout = game.layout
    state, path, clocks = position.state, position.path, position.clocks
    kind = node.kind

    if kind in (Kind.PROP, Kind.NEG_PROP):
        holds = state in game.model.prop(node.name or "")
        if kind is Kind.NEG_PROP:
            holds = not holds
        return Move(None, winner=Player.ELOISE if holds else Player.ABELARD)

    if kind in (Kind.OR, Kind.AND):
        chooser = Player.ELOISE if kind is Kind.OR else Player.ABELARD
        options = (
            Option("left", Position(state, path + (0,), clocks)),
            Option("right", Position(state, path + (1,), clocks)),
        )
        return Move(chooser, options)

    if kind in (Kind.DIAMOND, Kind.BOX):
        chooser = Player.ELOISE if kind is Kind.DIAMOND else Player.ABELARD
        targets = successor_indices(game.model, state)
        if not targets:
            return Move(None, winner=chooser.opponent)
        options = tuple(
            Option(game.model.states[target], Position(target, path + (0,), clocks))
            for target in targets
        )
        return Move(chooser, options)

    if kind in (Kind.MU, Kind.NU):
        chooser = Player.ELOISE if kind is Kind.MU else Player.ABELARD
        index = layout.slot[path]
        options = []
        for value in _clock_choices(game.gamma, policy):
            updated = list(clocks)
            updated[index] = value
            options.append(Option(value, Position(state, path + (0,), tuple(updated))))
        return Move(chooser, tuple(options))

    index = layout.reference[path]
    binder_path = layout.fixpoints[index]
    binder_is_mu = layout.nodes[binder_path].kind is Kind.MU
    current = clocks[index]
    if current == 0:
        return Move(None, winner=Player.ABELARD if binder_is_mu else Player.ELOISE)
    chooser = Player.ELOISE if binder_is_mu else Player.ABELARD
    options = []
    for value in _clock_choices(current, policy):
        updated = list(clocks)
        for inner in layout.inside[index]:
            updated[inner] = game.gamma
        updated[index] = value
        options.append(Option(value, Position(state, binder_path + (0,), tuple(updated))))
    return Move(chooser, tuple(options))


def canonical_key(game: GameSpec, position: Position) -> Key:
    """Position restricted to the clocks of the binders above its occurrence."""

    scope = game.layout.scope[position.path]
    return (position.state, position.path, tuple(position.clocks[index] for index in scope))


def progress_measure(game: GameSpec, position: Position) -> Tuple[int, ...]:
    layout = game.layout
    scope = layout.scope[position.path]
    padding = (game.gamma,) * (layout.nesting - len(scope))
    return (
        tuple(position.clocks[index] for index in scope)
        + padding
        + (layout.heights[position.path],)
    )


def check_progress(game: GameSpec, before: Position, after: Position) -> None:
    old, new = progress_measure(game, before), progress_measure(game, after)
    if not new < old:
        raise ProgressViolationError(
            f"progress measure did not decrease: {old} -> {new} "
            f"({describe_position(game, before)} -> {describe_position(game, after)})"
        )


def describe_position(game: GameSpec, position: Position) -> str:
    layout = game.layout
    clocks = ", ".join(
        f"{layout.nodes[path].name}:{value}"
        for path, value in zip(layout.fixpoints, position.clocks)
    )
    formula = print_formula(layout.nodes[position.path])
    return f"({game.model.states[position.state]}, {formula}, {{{clocks}}})"


# ------------------------------------------------------------------ solving


Strategy = Dict[Key, Choice]


@dataclass
class SolveResult:
    root: Key
    winners: Dict[Key, Player]
    strategies: Dict[Player, Strategy]
    positions_explored: int
    max_play_length: int

    @property
    def winner(self) -> Player:
        return self.winners[self.root]

    def winner_at(self, game: GameSpec, position: Position) -> Player:
        return self.winners[canonical_key(game, position)]


@dataclass
class _Frame:
    position: Position
    key: Key
    move: Move
    index: int = 0


class _Solver:
    """Backward induction over canonical keys, memo shared across start states."""

    def __init__(self, game: GameSpec, policy: ClockPolicy) -> None:
        self.game = game
        self.policy = policy
        self.winners: Dict[Key, Player] = {}
        self.lengths: Dict[Key, int] = {}
        self.strategies: Dict[Player, Strategy] = {Player.ELOISE: {}, Player.ABELARD: {}}

    def _frame(self, position: Position) -> _Frame:
        return _Frame(
            position,
            canonical_key(self.game, position),
            legal_moves(self.game, position, self.policy),
        )

    def _finish(self, frame: _Frame) -> None:
        move = frame.move
        if move.is_terminal:
            self.winners[frame.key] = move.winner  # type: ignore[assignment]
            self.lengths[frame.key] = 1
            return
        mover = move.chooser
        assert mover is not None
        child_keys = [canonical_key(self.game, option.position) for option in move.options]
        chosen = next(
            (
                option
                for option, child in zip(move.options, child_keys)
                if self.winners[child] is mover
            ),
            None,
        )
        self.winners[frame.key] = mover if chosen is not None else mover.opponent
        self.strategies[mover][frame.key] = (chosen or move.options[0]).choice
        self.lengths[frame.key] = 1 + max(self.lengths[child] for child in child_keys)

    def solve_from(self, start: Position) -> Key:
        root = canonical_key(self.game, start)
        if root in self.winners:
            return root
        stack: List[_Frame] = [self._frame(start)]
        while stack:
            frame = stack[-1]
            options = frame.move.options
            if frame.index < len(options):
                child = options[frame.index].position
                frame.index += 1
                check_progress(self.game, frame.position, child)
                if canonical_key(self.game, child) not in self.winners:
                    stack.append(self._frame(child))
                continue
            self._finish(frame)
            stack.pop()
        return root

    def result(self, root: Key) -> SolveResult:
        return SolveResult(
            root=root,
            winners=self.winners,
            strategies=self.strategies,
            positions_explored=len(self.winners),
            max_play_length=self.lengths[root],
        )


def solve(game: GameSpec, policy: ClockPolicy = ClockPolicy.FULL) -> SolveResult:
    """Winner at every reachable key plus positional strategies for both players."""

    solver = _Solver(game, policy)
    root = solver.solve_from(initial_position(game))
    result = solver.result(root)
    logger.debug(
        "solved %d keys, longest play %d rounds, root winner %s",
        result.positions_explored,
        result.max_play_length,
        result.winner.value,
    )
    return result


def solve_states(
    model: KripkeModel,
    formula: Formula,
    gamma: OrdinalLike,
    policy: ClockPolicy = ClockPolicy.FULL,
) -> Dict[str, Player]:
    """Root winner for every initial state, sharing one memo table."""

    base = GameSpec.create(model, model.states[0], formula, gamma)
    solver = _Solver(base, policy)
    winners: Dict[str, Player] = {}
    for index, name in enumerate(model.states):
        start = initial_position(base.with_state(index))
        winners[name] = solver.winners[solver.solve_from(start)]
    logger.debug("solved %d keys across %d initial states", len(solver.winners), model.size)
    return winners


def gts_truth(
    model: KripkeModel,
    state: str,
    formula: Formula,
    gamma: OrdinalLike,
    policy: ClockPolicy = ClockPolicy.FULL,
) -> bool:
    game = GameSpec.create(model, state, formula, gamma)
    return solve(game, policy).winner is Player.ELOISE


def gts_truth_set(
    model: KripkeModel,
    formula: Formula,
    gamma: OrdinalLike,
    policy: ClockPolicy = ClockPolicy.FULL,
) -> StateSet:
    winners = solve_states(model, formula, gamma, policy)
    return model.state_set(name for name, winner in winners.items() if winner is Player.ELOISE)


# ------------------------------------------------------- strategies, plays


@dataclass(frozen=True)
class Round:
    position: Position
    chooser: Optional[Player]
    choice: Optional[Choice]


@dataclass
class VerificationReport:
    player: Player
    holds: bool
    max_play_length: int
    keys_checked: int
    failure: Optional[str] = None
    counterexample: Tuple[Round, ...] = ()


@dataclass
class _CheckFrame:
    position: Position
    key: Key
    move: Move
    options: Tuple[Option, ...] = ()
    index: int = 0
    longest: int = 1


def verify_strategy(
    game: GameSpec,
    player: Player,
    strategy: Mapping[Key, Choice],
    policy: ClockPolicy = ClockPolicy.FULL,
) -> VerificationReport:
    """Check that ``player`` wins every play consistent with ``strategy``."""

    verified: Dict[Key, int] = {}

    def failed(stack: List[_CheckFrame], reason: str) -> VerificationReport:
        play = []
        for frame in stack[:-1]:
            play.append(Round(frame.position, frame.move.chooser, frame.options[frame.index - 1].choice))
        last = stack[-1]
        play.append(Round(last.position, last.move.chooser, None))
        return VerificationReport(player, False, 0, len(verified), reason, tuple(play))

    def open_frame(position: Position) -> _CheckFrame:
        return _CheckFrame(
            position, canonical_key(game, position), legal_moves(game, position, policy)
        )

    stack = [open_frame(initial_position(game))]
    while stack:
        frame = stack[-1]
        move = frame.move
        if frame.index == 0 and not frame.options:
            if move.is_terminal:
                if move.winner is not player:
                    return failed(stack, f"play lost to {player.opponent.value}")
            elif move.chooser is player:
                choice = strategy.get(frame.key)
                if choice is None:
                    return failed(stack, "strategy undefined at a reachable position")
                try:
                    frame.options = (move.resolve(choice),)
                except IllegalChoiceError as exc:
                    return failed(stack, str(exc))
            else:
                frame.options = move.options
        if frame.index < len(frame.options):
            child = frame.options[frame.index].position
            frame.index += 1
            check_progress(game, frame.position, child)
            child_key = canonical_key(game, child)
            if child_key in verified:
                frame.longest = max(frame.longest, 1 + verified[child_key])
            else:
                stack.append(open_frame(child))
            continue
        verified[frame.key] = frame.longest
        stack.pop()
        if stack:
            stack[-1].longest = max(stack[-1].longest, 1 + frame.longest)

    root = canonical_key(game, initial_position(game))
    return VerificationReport(player, True, verified[root], len(verified))


ChoiceSource = Callable[[GameSpec, Position, Move], Choice]


class StrategySource:
    def __init__(self, strategy: Mapping[Key, Choice]) -> None:
        self.strategy = strategy

    def __call__(self, game: GameSpec, position: Position, move: Move) -> Choice:
        key = canonical_key(game, position)
        if key not in self.strategy:
            raise BoundedMuError(f"strategy undefined at {describe_position(game, position)}")
        return self.strategy[key]


class ScriptedSource:
    def __init__(self, choices: Sequence[str]) -> None:
        self._choices = deque(choices)

    def __call__(self, game: GameSpec, position: Position, move: Move) -> Choice:
        if not self._choices:
            raise BoundedMuError(
                f"script exhausted at {describe_position(game, position)}; "
                f"legal choices: {', '.join(str(item) for item in move.legal_choices())}"
            )
        return self._choices.popleft()


class StreamSource:
    """Read one choice per line, prompting on ``prompt`` when given."""

    def __init__(self, stream: TextIO, prompt: Optional[TextIO] = None) -> None:
        self.stream = stream
        self.prompt = prompt

    def __call__(self, game: GameSpec, position: Position, move: Move) -> Choice:
        if self.prompt is not None:
            legal = ", ".join(str(item) for item in move.legal_choices())
            assert move.chooser is not None
            self.prompt.write(
                f"{move.chooser.value} at {describe_position(game, position)} [{legal}]: "
            )
            self.prompt.flush()
        line = self.stream.readline()
        if not line:
            raise BoundedMuError("input ended before the play finished")
        return line.strip()


@dataclass
class Transcript:
    rounds: List[Round] = field(default_factory=list)
    winner: Optional[Player] = None

    @property
    def length(self) -> int:
        return len(self.rounds)


def play(
    game: GameSpec,
    eloise: ChoiceSource,
    abelard: ChoiceSource,
    policy: ClockPolicy = ClockPolicy.FULL,
) -> Transcript:
    transcript = Transcript()
    position = initial_position(game)
    while True:
        move = legal_moves(game, position, policy)
        if move.is_terminal:
            transcript.rounds.append(Round(position, None, None))
            transcript.winner = move.winner
            return transcript
        source = eloise if move.chooser is Player.ELOISE else abelard
        option = move.resolve(source(game, position, move))
        check_progress(game, position, option.position)
        transcript.rounds.append(Round(position, move.chooser, option.choice))
        position = option.position


# ----------------------------------------------------------------- export


def _gvquote(text: str) -> str:
    return '"{}"'.format(text.replace("\\", "\\\\").replace('"', r"\"").replace("\n", r"\n"))


def export_game_tree(
    game: GameSpec, max_nodes: int = 500, policy: ClockPolicy = ClockPolicy.FULL
) -> str:
    """DOT digraph of the game tree, breadth first, cut after ``max_nodes`` nodes."""

    node_lines: List[str] = []
    edge_lines: List[str] = []
    queue: Deque[Tuple[int, Position]] = deque([(0, initial_position(game))])
    created = 1
    truncated = False
    while queue:
        node_id, position = queue.popleft()
        move = legal_moves(game, position, policy)
        label = describe_position(game, position)
        attributes = []
        if move.is_terminal:
            assert move.winner is not None
            label += f"\n{move.winner.value} wins"
            attributes.append("shape=ellipse")
            attributes.append("peripheries=2")
        else:
            assert move.chooser is not None
            label += f"\n{move.chooser.value} moves"
        cut_here = False
        for option in move.options:
            if created >= max_nodes:
                cut_here = True
                break
            child_id = created
            created += 1
            edge_label = f"{move.chooser.value if move.chooser else ''}: {option.choice}"
            edge_lines.append(f"  n{node_id} -> n{child_id} [label={_gvquote(edge_label)}];")
            queue.append((child_id, option.position))
        if cut_here:
            truncated = True
            label += "\n(truncated)"
            attributes.append("style=dashed")
        attributes.insert(0, f"label={_gvquote(label)}")
        node_lines.append(f"  n{node_id} [{', '.join(attributes)}];")

    header = ["digraph game_tree {", '  node [shape=box, fontname="monospace"];']
    if truncated:
        header.append(f"  // truncated at {max_nodes} nodes")
    return "\n".join(header + node_lines + edge_lines + ["}"]) + "\n"
