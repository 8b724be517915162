"""Per-(robot, POI) utility computation.

Two phases: a cheap Euclidean-only upper bound used for pruning, and a
detailed value that adds navigation-distance and battery terms.  The detailed
navigation penalty is charged on the excess over the Euclidean distance so
that the estimate is an upper bound by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .geometry import Pose, euclidean
from .poi import Poi, PoiType

INFEASIBLE_TOTAL = -1e18

# Failed attempts by one robot on one POI before it gives up on it for good.
MAX_FAILED_ATTEMPTS = 3

#: Path oracle: (start pose, goal pose) -> path length in meters, or None
#: when no traversable path exists.
PathOracle = Callable[[Pose, Pose], Optional[float]]


@dataclass
class RobotStateEstimate:
    """Predicted robot state at one point along a plan."""

    position: Pose
    battery_remaining: float
    time: float = 0.0


@dataclass
class BatteryModel:
    """Linear energy model: per-meter motion cost plus per-type task cost."""

    capacity: float = 100.0
    c_move: float = 0.1
    c_task: dict[PoiType, float] = field(default_factory=dict)

    def task_cost(self, poi_type: PoiType) -> float:
        return self.c_task.get(poi_type, 0.0)


@dataclass
class FeatureWeights:
    """Operator-defined feature weights and the robot's type-reward table.

    A type reward of zero means the robot cannot perform that POI type.
    ``robot`` identifies whose attempt history the failure feature reads.
    """

    type_rewards: dict[PoiType, float]
    w_euclid: float = 0.2
    w_nav: float = 0.2
    w_batt: float = 1.0
    w_fail: float = 2.0
    robot: str = ""

    def __post_init__(self):
        self.type_rewards = {PoiType(k): float(v) for k, v in self.type_rewards.items()}
        for t in PoiType:
            self.type_rewards.setdefault(t, 0.0)
        for name in ("w_euclid", "w_nav", "w_batt", "w_fail"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        for t, r in self.type_rewards.items():
            if not (math.isfinite(r) and r >= 0):
                raise ValueError(f"type reward for {t} must be finite and >= 0")

    def reward(self, poi: Poi) -> float:
        return poi.mission_value * self.type_rewards[poi.poi_type]


@dataclass
class UtilityBreakdown:
    """Signed per-feature contributions and their sum."""

    contributions: dict[str, float]
    total: float
    feasible: bool

    @classmethod
    def infeasible(cls, contributions: Optional[dict[str, float]] = None
                   ) -> "UtilityBreakdown":
        return cls(contributions=contributions or {}, total=INFEASIBLE_TOTAL,
                   feasible=False)


def estimate_max_utility(state: RobotStateEstimate, poi: Poi,
                         weights: FeatureWeights) -> UtilityBreakdown:
    """Cheap upper bound: type reward minus weighted Euclidean distance only."""
    reward = weights.reward(poi)
    if reward <= 0.0:
        return UtilityBreakdown.infeasible({"type_reward": 0.0})
    d_euclid = euclidean(state.position, poi.pose)
    contributions = {
        "type_reward": reward,
        "euclidean": -weights.w_euclid * d_euclid,
    }
    return UtilityBreakdown(contributions=contributions,
                            total=sum(contributions.values()), feasible=True)


def battery_cost(state: RobotStateEstimate, poi: Poi, path_length: float,
                 battery_model: BatteryModel) -> float:
    """Energy to drive ``path_length`` meters and perform the POI's task."""
    if path_length < 0:
        raise ValueError(f"path_length must be >= 0, got {path_length}")
    return battery_model.c_move * path_length + battery_model.task_cost(poi.poi_type)


def detailed_utility(state: RobotStateEstimate, poi: Poi, weights: FeatureWeights,
                     nav: PathOracle, battery_model: BatteryModel) -> UtilityBreakdown:
    """Full utility with navigation and battery features.

    Never raises on an unreachable goal; that is an infeasible assignment,
    not an error.
    """
    reward = weights.reward(poi)
    if reward <= 0.0:
        return UtilityBreakdown.infeasible({"type_reward": 0.0})

    failed = poi.failed_attempts_by(weights.robot) if weights.robot else 0
    if failed >= MAX_FAILED_ATTEMPTS:
        return UtilityBreakdown.infeasible({"type_reward": reward})

    d_euclid = euclidean(state.position, poi.pose)
    try:
        d_nav = nav(state.position, poi.pose)
    except Exception:
        d_nav = None
    if d_nav is None:
        return UtilityBreakdown.infeasible({"type_reward": reward})
    d_nav = max(float(d_nav), d_euclid)

    cost = battery_cost(state, poi, d_nav, battery_model)
    if cost > state.battery_remaining:
        return UtilityBreakdown.infeasible({"type_reward": reward, "battery": -cost})

    contributions = {
        "type_reward": reward,
        "euclidean": -weights.w_euclid * d_euclid,
        "navigation": -weights.w_nav * (d_nav - d_euclid),
        "battery": -weights.w_batt * cost,
        "failure": -weights.w_fail * failed,
    }
    return UtilityBreakdown(contributions=contributions,
                            total=sum(contributions.values()), feasible=True)


# -- shipped default configuration ---------------------------------------

SCOUT_REWARDS = {
    PoiType.EXPLORATION: 10.0,
    PoiType.MOVE: 1.0,
    PoiType.ROCK_CANDIDATE: 6.0,
    PoiType.GROUND_MEASUREMENT: 0.0,
    PoiType.ROCK_MEASUREMENT: 0.0,
}

SCIENTIST_REWARDS = {
    PoiType.GROUND_MEASUREMENT: 10.0,
    PoiType.ROCK_MEASUREMENT: 12.0,
    PoiType.EXPLORATION: 2.0,
    PoiType.MOVE: 1.0,
    PoiType.ROCK_CANDIDATE: 0.0,
}

DEFAULT_TASK_COSTS = {
    PoiType.MOVE: 0.0,
    PoiType.EXPLORATION: 0.2,
    PoiType.ROCK_CANDIDATE: 0.3,
    PoiType.GROUND_MEASUREMENT: 0.5,
    PoiType.ROCK_MEASUREMENT: 0.8,
}


def default_weights(role: str, robot: str = "") -> FeatureWeights:
    """Calibration defaults for a robot role (scout or scientist)."""
    table = SCOUT_REWARDS if role == "scout" else SCIENTIST_REWARDS
    return FeatureWeights(type_rewards=dict(table), robot=robot)
