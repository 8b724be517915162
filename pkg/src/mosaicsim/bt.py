"""Minimal tick-based behavior trees: memory sequences and fallbacks.

Nodes report IDLE, RUNNING, SUCCESS or FAILURE.  A memory sequence resumes
at its first non-successful child, so pausing and resuming mid-task keeps
completed work; a fallback succeeds on its first succeeding child.
"""

from __future__ import annotations

import enum
from typing import Callable, Optional


class Status(enum.Enum):
    IDLE = "idle"
    RUNNING = "running"
    SUCCESS = "success"
    FAILURE = "failure"


class Node:
    """Base behavior node; subclasses implement _tick."""

    def __init__(self, name: str):
        self.name = name
        self.status = Status.IDLE

    def tick(self, ctx) -> Status:
        self.status = self._tick(ctx)
        return self.status

    def _tick(self, ctx) -> Status:
        raise NotImplementedError

    def reset(self) -> None:
        self.status = Status.IDLE

    def states(self) -> list[tuple[str, str]]:
        """Flat (node name, status) listing for introspection streams."""
        return [(self.name, self.status.value)]


class Action(Node):
    """Leaf wrapping a callable returning a Status."""

    def __init__(self, name: str, fn: Callable[[object], Status],
                 on_reset: Optional[Callable[[], None]] = None):
        super().__init__(name)
        self.fn = fn
        self.on_reset = on_reset

    def _tick(self, ctx) -> Status:
        return self.fn(ctx)

    def reset(self) -> None:
        super().reset()
        if self.on_reset:
            self.on_reset()


class Composite(Node):
    def __init__(self, name: str, children: list[Node]):
        super().__init__(name)
        self.children = children

    def reset(self) -> None:
        super().reset()
        for child in self.children:
            child.reset()

    def states(self) -> list[tuple[str, str]]:
        out = [(self.name, self.status.value)]
        for child in self.children:
            out.extend(child.states())
        return out


class MemorySequence(Composite):
    """Run children in order, remembering successes across ticks."""

    def __init__(self, name: str, children: list[Node]):
        super().__init__(name, children)
        self._cursor = 0

    def _tick(self, ctx) -> Status:
        while self._cursor < len(self.children):
            status = self.children[self._cursor].tick(ctx)
            if status is Status.RUNNING:
                return Status.RUNNING
            if status is Status.FAILURE:
                return Status.FAILURE
            self._cursor += 1
        return Status.SUCCESS

    def reset(self) -> None:
        super().reset()
        self._cursor = 0


class Fallback(Composite):
    """Try children in order; succeed on the first success."""

    def __init__(self, name: str, children: list[Node]):
        super().__init__(name, children)
        self._cursor = 0

    def _tick(self, ctx) -> Status:
        while self._cursor < len(self.children):
            status = self.children[self._cursor].tick(ctx)
            if status is Status.RUNNING:
                return Status.RUNNING
            if status is Status.SUCCESS:
                return Status.SUCCESS
            self._cursor += 1
        return Status.FAILURE

    def reset(self) -> None:
        super().reset()
        self._cursor = 0
