"""POI domain types: the unit of mission progress."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

from .geometry import Pose


class PoiType(str, Enum):
    MOVE = "MOVE"
    EXPLORATION = "EXPLORATION"
    ROCK_CANDIDATE = "ROCK_CANDIDATE"
    GROUND_MEASUREMENT = "GROUND_MEASUREMENT"
    ROCK_MEASUREMENT = "ROCK_MEASUREMENT"


@dataclass
class RobotAttempt:
    stamp: float
    robot: str
    success: bool


@dataclass
class RobotUtility:
    robot: str
    utility_value: float
    stamp: float


@dataclass
class Poi:
    """A located, typed mission objective with assignment and planning metadata.

    ``robot`` is the identifier of the robot currently holding the claim, or
    the empty string when unassigned.  ``robot_utilities`` holds at most one
    entry per robot (latest wins).
    """

    id: int
    pose: Pose
    poi_type: PoiType
    mission_value: float = 1.0
    robot: str = ""
    active: bool = True
    robot_attempts: list[RobotAttempt] = field(default_factory=list)
    robot_utilities: list[RobotUtility] = field(default_factory=list)

    def failed_attempts_by(self, robot: str) -> int:
        return sum(1 for a in self.robot_attempts if a.robot == robot and not a.success)

    def attempts_by(self, robot: str) -> int:
        return sum(1 for a in self.robot_attempts if a.robot == robot)

    def fresh_utilities(self, now: float, staleness_horizon: float) -> list[RobotUtility]:
        """Recorded utilities not older than the staleness horizon."""
        return [u for u in self.robot_utilities if now - u.stamp <= staleness_horizon]

    def snapshot(self) -> "Poi":
        """An isolated deep copy, unaffected by later registry mutations."""
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pose": list(self.pose.as_tuple()),
            "poi_type": self.poi_type.value,
            "mission_value": self.mission_value,
            "robot": self.robot,
            "active": self.active,
            "robot_attempts": [
                {"stamp": a.stamp, "robot": a.robot, "success": a.success}
                for a in self.robot_attempts
            ],
            "robot_utilities": [
                {"robot": u.robot, "utility_value": u.utility_value, "stamp": u.stamp}
                for u in self.robot_utilities
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Poi":
        return cls(
            id=d["id"],
            pose=Pose.from_any(d["pose"]),
            poi_type=PoiType(d["poi_type"]),
            mission_value=d.get("mission_value", 1.0),
            robot=d.get("robot", ""),
            active=d.get("active", True),
            robot_attempts=[RobotAttempt(**a) for a in d.get("robot_attempts", [])],
            robot_utilities=[RobotUtility(**u) for u in d.get("robot_utilities", [])],
        )
