"""Planar poses and small geometric helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Pose:
    """2D position (meters) plus heading (radians) in the shared earth frame."""

    x: float
    y: float
    heading: float = 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x, self.y, self.heading))

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.heading)

    @classmethod
    def from_any(cls, value) -> "Pose":
        if isinstance(value, Pose):
            return value
        x, y, *rest = value
        return cls(float(x), float(y), float(rest[0]) if rest else 0.0)


def euclidean(a, b) -> float:
    """Straight-line distance between two poses or (x, y) pairs."""
    ax, ay = (a.x, a.y) if isinstance(a, Pose) else (a[0], a[1])
    bx, by = (b.x, b.y) if isinstance(b, Pose) else (b[0], b[1])
    return math.hypot(ax - bx, ay - by)
