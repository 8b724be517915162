"""Robot-local iterative multi-step greedy POI allocation.

Each planning step prunes candidates with the cheap upper-bound utility,
refines survivors with the detailed computation, damps by the depth
uncertainty factor, and coordinates with teammates through their recorded
utilities.  Only the first step of the resulting plan is executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .geometry import Pose, euclidean
from .poi import Poi, PoiType
from .utility import (BatteryModel, FeatureWeights, PathOracle,
                      RobotStateEstimate, battery_cost, detailed_utility,
                      estimate_max_utility)


class NoPath(Exception):
    """The navigation oracle found no traversable path to the goal."""


def weighted_utility(utility: float, duf: float, depth: int) -> float:
    """Damp a raw utility by the depth uncertainty factor: utility * duf**depth."""
    return utility * duf ** depth


@dataclass
class PlannerConfig:
    planning_depth: int = 3
    duf: float = 0.9
    staleness_horizon: float = 30.0

    def __post_init__(self):
        if self.planning_depth < 1:
            raise ValueError(f"planning_depth must be >= 1, got {self.planning_depth}")
        if not (0.0 < self.duf <= 1.0):
            raise ValueError(f"duf must be in (0, 1], got {self.duf}")


@dataclass
class MotionModel:
    """Kinematic/temporal model used to chain predicted states along a plan."""

    cruise_speed: float = 1.0
    t_rot: float = 5.0  # seconds per quarter turn during exploration dwell
    task_durations: dict[PoiType, float] = field(default_factory=dict)

    def task_duration(self, poi_type: PoiType) -> float:
        if poi_type is PoiType.EXPLORATION:
            return self.task_durations.get(poi_type, 4.0 * self.t_rot)
        return self.task_durations.get(poi_type, 0.0)


DEFAULT_TASK_DURATIONS = {
    PoiType.MOVE: 0.0,
    PoiType.ROCK_CANDIDATE: 10.0,
    PoiType.GROUND_MEASUREMENT: 60.0,
    PoiType.ROCK_MEASUREMENT: 120.0,
}


@dataclass
class PlanStep:
    poi_id: int
    raw_utility: float
    weighted_utility: float
    predicted_state_after: RobotStateEstimate
    depth: int


@dataclass
class Plan:
    robot_id: str
    steps: list[PlanStep]
    created_at: float

    @property
    def empty(self) -> bool:
        return not self.steps

    @property
    def best_poi_id(self) -> Optional[int]:
        return self.steps[0].poi_id if self.steps else None


def predict_next_state(state: RobotStateEstimate, poi: Poi, nav: PathOracle,
                       battery_model: BatteryModel,
                       motion: Optional[MotionModel] = None) -> RobotStateEstimate:
    """Expected robot state after completing a POI from ``state``."""
    motion = motion or MotionModel()
    d_nav = nav(state.position, poi.pose)
    if d_nav is None:
        raise NoPath(f"no path to POI {poi.id}")
    d_nav = max(float(d_nav), euclidean(state.position, poi.pose))
    cost = battery_cost(state, poi, d_nav, battery_model)
    travel_time = d_nav / motion.cruise_speed
    return RobotStateEstimate(
        position=poi.pose,
        battery_remaining=state.battery_remaining - cost,
        time=state.time + travel_time + motion.task_duration(poi.poi_type),
    )


def plan(state: RobotStateEstimate, snapshot: list[Poi], weights: FeatureWeights,
         config: PlannerConfig, nav: PathOracle, battery_model: BatteryModel,
         motion: Optional[MotionModel] = None,
         record_utility: Optional[Callable[[int, float], None]] = None,
         stats: Optional[dict] = None) -> Plan:
    """Build an ordered multi-step plan over a registry snapshot.

    ``snapshot`` must come from ``list_active`` so stale recorded utilities
    are already dropped.  ``record_utility`` is called with the weighted
    utility of every selected step so teammates see this robot's intentions.
    Returns an empty plan when no candidate survives at depth 0.
    """
    motion = motion or MotionModel()
    robot = weights.robot
    steps: list[PlanStep] = []
    used: set[int] = set()
    current = state
    pruned = evaluated = 0

    for depth in range(config.planning_depth):
        candidates = [p for p in snapshot if p.id not in used and not p.robot]
        chosen = None
        scored: list[tuple[float, int, Poi, float]] = []
        for poi in candidates:
            others = [u.utility_value for u in poi.robot_utilities if u.robot != robot]
            other_best = max(others) if others else None
            est = estimate_max_utility(current, poi, weights)
            if not est.feasible or est.total <= 0.0:
                pruned += 1
                continue
            if other_best is not None and other_best > est.total:
                pruned += 1
                continue
            det = detailed_utility(current, poi, weights, nav, battery_model)
            evaluated += 1
            if not det.feasible:
                continue
            w = weighted_utility(det.total, config.duf, depth)
            if w <= 0.0:
                continue
            if other_best is not None and other_best > w:
                continue
            scored.append((w, poi.id, poi, det.total))
        if scored:
            # Highest weighted utility wins; ties break toward the lower id.
            scored.sort(key=lambda item: (-item[0], item[1]))
            w, poi_id, poi, raw = scored[0]
            try:
                nxt = predict_next_state(current, poi, nav, battery_model, motion)
            except NoPath:
                nxt = None
            if nxt is not None:
                chosen = PlanStep(poi_id=poi_id, raw_utility=raw, weighted_utility=w,
                                  predicted_state_after=nxt, depth=depth)
        if chosen is None:
            break
        steps.append(chosen)
        used.add(chosen.poi_id)
        current = chosen.predicted_state_after
        if record_utility is not None:
            record_utility(chosen.poi_id, chosen.weighted_utility)

    if stats is not None:
        stats["pruned"] = pruned
        stats["evaluated"] = evaluated
    return Plan(robot_id=robot, steps=steps, created_at=state.time)


def replan_trigger(event: str, executing: bool = False) -> bool:
    """Whether a planner rerun is warranted for an executive event.

    A lost claim race or a finished task always forces a replan; list or
    staleness changes only matter while idle (the current task continues).
    """
    if event in ("claim_failed", "task_done"):
        return True
    if event in ("poi_list_changed", "utility_stale"):
        return not executing
    raise ValueError(f"unknown replan event {event!r}")
