"""Standard and clock-bounded compositional semantics.

Formulas are evaluated to whole state sets. A fixpoint ``mu X. psi`` under
bound ``gamma`` denotes the approximant ``F^gamma`` of the operator
``A -> [[psi]](s[A/X])`` started from the empty set (``nu``: from all
states). Over a finite model every ladder stabilizes within ``|W|`` steps,
so any stage at or beyond the stabilization index, infinite stages
included, equals the fixed point itself.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from .errors import BoundError, BoundedMuError, FormulaError, UnboundLabelError
from .formula import Formula, Kind, free_labels
from .kripke import KripkeModel, StateSet, predecessors_exists, predecessors_forall
from .ordinal import ZERO, Ordinal, OrdinalLike, as_ordinal, to_finite


logger = logging.getLogger(__name__)

Assignment = Mapping[str, StateSet]


class FixpointKind(enum.Enum):
    MU = "mu"
    NU = "nu"


@dataclass(frozen=True)
class ApproximantLadder:
    """Stages ``F^0 .. F^n`` where ``n`` is the stabilization index."""

    kind: FixpointKind
    stages: Tuple[StateSet, ...]

    @property
    def stabilization(self) -> int:
        return len(self.stages) - 1

    @property
    def fixpoint(self) -> StateSet:
        return self.stages[-1]

    def stage(self, gamma: OrdinalLike) -> StateSet:
        finite = to_finite(as_ordinal(gamma))
        if finite is None or finite >= self.stabilization:
            return self.stages[-1]
        return self.stages[finite]


class _Evaluator:
    def __init__(self, model: KripkeModel, gamma: Optional[int]) -> None:
        # gamma None means "iterate to the fixed point".
        self.model = model
        self.gamma = gamma

    def evaluate(self, node: Formula, env: Dict[str, StateSet]) -> StateSet:
        kind = node.kind
        if kind is Kind.PROP:
            return self.model.prop(node.name or "")
        if kind is Kind.NEG_PROP:
            return self.model.prop(node.name or "").complement()
        if kind is Kind.LABEL:
            try:
                return env[node.name or ""]
            except KeyError:
                raise UnboundLabelError([node.name or ""]) from None
        if kind is Kind.OR:
            return self.evaluate(node.children[0], env) | self.evaluate(node.children[1], env)
        if kind is Kind.AND:
            return self.evaluate(node.children[0], env) & self.evaluate(node.children[1], env)
        if kind is Kind.DIAMOND:
            return predecessors_exists(self.model, self.evaluate(node.children[0], env))
        if kind is Kind.BOX:
            return predecessors_forall(self.model, self.evaluate(node.children[0], env))
        fixpoint = FixpointKind.MU if kind is Kind.MU else FixpointKind.NU
        stages = self.iterate(node.body, node.name or "", env, fixpoint, self.gamma)
        return stages[-1]

    def apply(
        self, body: Formula, name: str, env: Mapping[str, StateSet], argument: StateSet
    ) -> StateSet:
        inner = dict(env)
        inner[name] = argument
        return self.evaluate(body, inner)

    def iterate(
        self,
        body: Formula,
        name: str,
        env: Mapping[str, StateSet],
        kind: FixpointKind,
        limit: Optional[int],
    ) -> Tuple[StateSet, ...]:
        """Return ``F^0 .. F^k`` with ``k = limit`` or the stabilization index."""

        current = self.model.empty() if kind is FixpointKind.MU else self.model.full()
        stages = [current]
        while limit is None or len(stages) <= limit:
            following = self.apply(body, name, env, current)
            if following == current:
                break
            stages.append(following)
            current = following
            if len(stages) > self.model.size + 1:
                raise BoundedMuError(f"{kind.value}-ladder for {name} failed to stabilize")
        return tuple(stages)


def _finite_bound(gamma: Ordinal) -> Optional[int]:
    if gamma == ZERO:
        raise BoundError("the clock value bound must be at least 1")
    return to_finite(gamma)


def _prepare(model: KripkeModel, node: Formula, s: Optional[Assignment], extra: Tuple[str, ...] = ()) -> Dict[str, StateSet]:
    env: Dict[str, StateSet] = dict(s or {})
    for label_name, value in env.items():
        if value.universe != model.size:
            raise BoundedMuError(
                f"assignment for {label_name} has {value.universe} slots, model has {model.size} states"
            )
    missing = set(free_labels(node)) - set(env) - set(extra)
    if missing:
        raise UnboundLabelError(sorted(missing))
    return env


def operator_apply(
    model: KripkeModel,
    body: Formula,
    name: str,
    s: Optional[Assignment],
    gamma: OrdinalLike,
    argument: StateSet,
) -> StateSet:
    """States satisfying ``body`` under the bound when ``name`` denotes ``argument``."""

    bound = _finite_bound(as_ordinal(gamma))
    env = _prepare(model, body, s, (name,))
    return _Evaluator(model, bound).apply(body, name, env, argument)


def build_ladder(
    model: KripkeModel,
    body: Formula,
    name: str,
    s: Optional[Assignment],
    gamma: OrdinalLike,
    kind: FixpointKind,
) -> ApproximantLadder:
    bound = _finite_bound(as_ordinal(gamma))
    env = _prepare(model, body, s, (name,))
    stages = _Evaluator(model, bound).iterate(body, name, env, kind, None)
    logger.debug("%s-ladder for %s stabilized at index %d", kind.value, name, len(stages) - 1)
    return ApproximantLadder(kind, stages)


def approximant(
    model: KripkeModel,
    body: Formula,
    name: str,
    s: Optional[Assignment],
    gamma: OrdinalLike,
    kind: FixpointKind,
    stage: OrdinalLike,
) -> StateSet:
    return build_ladder(model, body, name, s, gamma, kind).stage(stage)


def eval_bounded(
    model: KripkeModel,
    node: Formula,
    s: Optional[Assignment] = None,
    gamma: OrdinalLike = 1,
) -> StateSet:
    bound = _finite_bound(as_ordinal(gamma))
    env = _prepare(model, node, s)
    return _Evaluator(model, bound).evaluate(node, env)


def eval_standard(
    model: KripkeModel, node: Formula, s: Optional[Assignment] = None
) -> StateSet:
    env = _prepare(model, node, s)
    return _Evaluator(model, None).evaluate(node, env)


def truth_set(
    model: KripkeModel, node: Formula, gamma: Optional[OrdinalLike] = None
) -> StateSet:
    """Standard semantics when ``gamma`` is None, bounded semantics otherwise."""

    if gamma is None:
        return eval_standard(model, node)
    return eval_bounded(model, node, None, gamma)


def _first_stage(
    model: KripkeModel,
    state: str,
    node: Formula,
    s: Optional[Assignment],
    gamma: OrdinalLike,
    kind: FixpointKind,
) -> Optional[Ordinal]:
    expected = Kind.MU if kind is FixpointKind.MU else Kind.NU
    if node.kind is not expected:
        raise FormulaError(f"expected a {kind.value}-rooted formula, got {node.kind.value}")
    bound = as_ordinal(gamma)
    index = model.index_of(state)
    ladder = build_ladder(model, node.body, node.name or "", s, bound, kind)
    for position in range(1, len(ladder.stages)):
        member = index in ladder.stages[position]
        if member == (kind is FixpointKind.MU):
            witness = Ordinal.from_int(position - 1)
            return witness if witness < bound else None
    return None


def least_witness(
    model: KripkeModel,
    state: str,
    node: Formula,
    s: Optional[Assignment],
    gamma: OrdinalLike,
) -> Optional[Ordinal]:
    """Smallest ``g < gamma`` with ``state`` in ``F_mu^(g+1)``, the clock Eloise announces."""

    return _first_stage(model, state, node, s, gamma, FixpointKind.MU)


def least_refutation(
    model: KripkeModel,
    state: str,
    node: Formula,
    s: Optional[Assignment],
    gamma: OrdinalLike,
) -> Optional[Ordinal]:
    """Smallest ``g < gamma`` with ``state`` outside ``F_nu^(g+1)``, the clock Abelard announces."""

    return _first_stage(model, state, node, s, gamma, FixpointKind.NU)
