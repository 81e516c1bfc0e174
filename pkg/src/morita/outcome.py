"""Budgets and the three-way result of a derivability query."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .models import FiniteModel


@dataclass(frozen=True)
class Budget:
    steps: int = 10_000
    branches: int = 64
    model_size: int = 3
    term_depth: int = 2
    witness_depth: int = 8

    def __post_init__(self) -> None:
        if self.steps <= 0 or self.branches <= 0:
            raise ValueError("budget limits must be positive")
        if self.model_size < 0 or self.term_depth < 0 or self.witness_depth <= 0:
            raise ValueError("budget limits must be positive")

    def scaled(self, factor: float) -> "Budget":
        return Budget(max(1, int(self.steps * factor)), max(1, int(self.branches * factor)),
                      self.model_size, self.term_depth, self.witness_depth)


DEFAULT_BUDGET = Budget()


@dataclass
class ProofNode:
    """One branch of a chase: the events applied in it, then either a
    closing reason or a split into children."""

    events: list = field(default_factory=list)
    split: tuple | None = None
    children: list = field(default_factory=list)
    closed_by: str = ""

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def steps(self, path: tuple = ()):
        for e in self.events:
            yield path, e
        for i, c in enumerate(self.children):
            yield from c.steps(path + (i,))

    def to_json(self) -> dict:
        out: dict[str, Any] = {"events": [list(_jsonable(e)) for e in self.events]}
        if self.split is not None:
            out["split"] = list(_jsonable(self.split))
            out["children"] = [c.to_json() for c in self.children]
        else:
            out["closed_by"] = self.closed_by
        return out


def _jsonable(t):
    return [list(x) if isinstance(x, tuple) else x for x in t]


@dataclass
class Proved:
    trace: ProofNode
    steps: int = 0
    status: str = "proved"

    def to_json(self) -> dict:
        return {"status": self.status, "steps": self.steps, "trace": self.trace.to_json()}


@dataclass
class Refuted:
    model: FiniteModel
    assignment: dict
    steps: int = 0
    status: str = "refuted"

    def to_json(self) -> dict:
        return {"status": self.status, "model": self.model.to_json(), "assignment": dict(self.assignment)}


@dataclass
class Unknown:
    reason: str
    steps: int = 0
    status: str = "unknown"

    def to_json(self) -> dict:
        return {"status": self.status, "reason": self.reason, "steps": self.steps}


Outcome = Proved | Refuted | Unknown


def is_proved(o) -> bool:
    return isinstance(o, Proved)
