"""Exception hierarchy shared by every boundedmu module."""

from __future__ import annotations

from typing import Optional, Sequence


class BoundedMuError(RuntimeError):
    """Base class; the CLI turns these into a one-line diagnosis."""


class FormulaSyntaxError(BoundedMuError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class FormulaError(BoundedMuError):
    """Structural misuse of a formula: bad path, free label, non-label node."""


class ModelFormatError(BoundedMuError):
    pass


class UnknownStateError(BoundedMuError):
    def __init__(self, state: str) -> None:
        super().__init__(f"unknown state: {state!r}")
        self.state = state


class OrdinalSyntaxError(BoundedMuError):
    pass


class OrdinalError(BoundedMuError):
    pass


class BoundError(BoundedMuError):
    """Clock bound outside what the requested engine supports."""


class UnboundLabelError(BoundedMuError):
    def __init__(self, labels: Sequence[str]) -> None:
        names = ", ".join(sorted(labels))
        super().__init__(f"free label(s) not covered by the assignment: {names}")
        self.labels = tuple(sorted(labels))


class IllegalChoiceError(BoundedMuError):
    def __init__(self, choice: object, legal: Sequence[object]) -> None:
        legal_text = ", ".join(str(item) for item in legal)
        super().__init__(f"illegal choice {choice!r}; legal choices: {{{legal_text}}}")
        self.choice = choice
        self.legal = tuple(legal)


class ProgressViolationError(BoundedMuError):
    """The lexicographic progress measure failed to decrease along a move."""


class NodeBudgetExceededError(BoundedMuError):
    def __init__(self, budget: int) -> None:
        super().__init__(f"exhaustive search exceeded the node budget of {budget}")
        self.budget = budget


class ParamsError(BoundedMuError):
    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.field = field
