"""Deterministic discrete-event world: robots, batteries, targets, coverage.

A single-threaded event loop owns all state.  Everything stochastic draws
from seeded per-subsystem RNG streams, so identical scenario + seed yields
identical event logs.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .events import EventLog
from .geometry import Pose
from .poi import PoiType

DEFAULT_CELL_SIZE = 0.25
DEFAULT_SENSING_RADIUS = 2.0
ARRIVAL_TOLERANCE = 0.3
HEADING_TOLERANCE = 0.2


class EventQueue:
    """Time-ordered callback queue; FIFO among equal times by insertion."""

    def __init__(self):
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = 0

    def push(self, t: float, fn: Callable[[], None]) -> None:
        heapq.heappush(self._heap, (t, self._seq, fn))
        self._seq += 1

    def pop_due(self, t: float):
        while self._heap and self._heap[0][0] <= t:
            yield heapq.heappop(self._heap)

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def __len__(self):
        return len(self._heap)


class CoverageMap:
    """Monotone per-cell coverage accounting over the terrain grid."""

    def __init__(self, width: float, height: float,
                 cell_size: float = DEFAULT_CELL_SIZE):
        self.cell_size = cell_size
        self.cols = max(1, int(round(width / cell_size)))
        self.rows = max(1, int(round(height / cell_size)))
        self.covered = np.zeros((self.rows, self.cols), dtype=bool)

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def covered_cells(self) -> int:
        return int(self.covered.sum())

    @property
    def covered_area(self) -> float:
        return self.covered_cells * self.cell_area

    def stamp(self, x: float, y: float, radius: float) -> int:
        """Mark every cell whose center lies within radius; new-cell count."""
        cs = self.cell_size
        c0 = max(0, int((x - radius) / cs) - 1)
        c1 = min(self.cols - 1, int((x + radius) / cs) + 1)
        r0 = max(0, int((y - radius) / cs) - 1)
        r1 = min(self.rows - 1, int((y + radius) / cs) + 1)
        if c1 < c0 or r1 < r0:
            return 0
        cols = np.arange(c0, c1 + 1)
        rows = np.arange(r0, r1 + 1)
        cx = (cols + 0.5) * cs - x
        cy = (rows + 0.5) * cs - y
        within = (cy[:, None] ** 2 + cx[None, :] ** 2) <= radius * radius
        block = self.covered[r0:r1 + 1, c0:c1 + 1]
        new = int((within & ~block).sum())
        if new:
            self.covered[r0:r1 + 1, c0:c1 + 1] = block | within
        return new


@dataclass
class RobotModel:
    """Static platform description."""

    id: str
    role: str  # scout | scientist
    kinematics: str = "legged"  # legged | wheeled
    cruise_speed: float = 1.0
    battery_capacity: float = 1000.0
    c_move: float = 0.1
    c_task: dict[PoiType, float] = field(default_factory=dict)
    sensing_radius: float = DEFAULT_SENSING_RADIUS
    detection_enabled: bool = False
    failure_time: Optional[float] = None


@dataclass
class Target:
    id: str
    kind: str  # rock | sand_patch
    position: tuple[float, float]
    detectability: float = 0.5


@dataclass
class RobotBody:
    """Mutable runtime state of one robot in the world."""

    model: RobotModel
    pose: Pose
    battery: float
    alive: bool = True
    distance_traveled: float = 0.0
    path: list[tuple[float, float]] = field(default_factory=list)
    twist: tuple[float, float] = (0.0, 0.0)  # (v, omega) under teleop

    def set_path(self, waypoints: list[tuple[float, float]]) -> None:
        self.path = list(waypoints)

    def clear_motion(self) -> None:
        self.path = []
        self.twist = (0.0, 0.0)

    def at(self, goal: Pose, tolerance: float = ARRIVAL_TOLERANCE) -> bool:
        return self.pose.distance_to(goal) <= tolerance


@dataclass
class MeasurementRecord:
    poi_id: int
    robot: str
    success: bool
    duration: float
    detail: str
    target_id: Optional[str] = None


@dataclass
class MeasurementParams:
    p_base_rock: float = 0.8
    p_base_ground: float = 0.9
    tolerance: float = 0.3
    duration_ground: float = 60.0
    duration_rock: float = 120.0


class UnknownRobot(Exception):
    pass


class World:
    """World state plus the physics primitives the mission loop drives."""

    def __init__(self, terrain, targets: list[Target], seed: int = 0,
                 measurement: Optional[MeasurementParams] = None,
                 log: Optional[EventLog] = None):
        self.terrain = terrain
        self.coverage = CoverageMap(terrain.width, terrain.height,
                                    terrain.cell_size)
        self.targets = {t.id: t for t in targets}
        self.detected: set[str] = set()
        self.robots: dict[str, RobotBody] = {}
        self.queue = EventQueue()
        self.time = 0.0
        self.log = log if log is not None else EventLog()
        self.measurement = measurement or MeasurementParams()
        self.rng_detect = random.Random(seed * 1000003 + 1)
        self.rng_measure = random.Random(seed * 1000003 + 2)

    # -- robots -----------------------------------------------------------

    def add_robot(self, model: RobotModel, pose: Pose) -> RobotBody:
        body = RobotBody(model=model, pose=pose, battery=model.battery_capacity)
        self.robots[model.id] = body
        self.coverage.stamp(pose.x, pose.y, model.sensing_radius)
        return body

    def robot(self, robot_id: str) -> RobotBody:
        body = self.robots.get(robot_id)
        if body is None:
            raise UnknownRobot(robot_id)
        return body

    # -- time -------------------------------------------------------------

    def step_to(self, t: float) -> None:
        """Process all scheduled events up to and including t, in order."""
        if t < self.time:
            raise ValueError(f"cannot step backwards to {t} from {self.time}")
        while True:
            nxt = self.queue.peek_time()
            if nxt is None or nxt > t:
                break
            for when, _, fn in self.queue.pop_due(t):
                self.time = max(self.time, when)
                fn()
        self.time = t

    # -- motion and coverage ----------------------------------------------

    def advance_motion(self, robot_id: str, dt: float) -> float:
        """Integrate one robot's motion for dt; returns distance moved.

        Drains battery per meter, accumulates odometry, and stamps coverage
        at the new position when the robot moved.
        """
        body = self.robot(robot_id)
        if not body.alive:
            return 0.0
        moved = 0.0
        v, omega = body.twist
        if v or omega:
            heading = body.pose.heading + omega * dt
            dx = v * dt * math.cos(body.pose.heading)
            dy = v * dt * math.sin(body.pose.heading)
            nx = min(max(body.pose.x + dx, 0.0), self.terrain.width)
            ny = min(max(body.pose.y + dy, 0.0), self.terrain.height)
            moved = math.hypot(nx - body.pose.x, ny - body.pose.y)
            body.pose = Pose(nx, ny, heading)
        elif body.path:
            budget = body.model.cruise_speed * dt
            x, y = body.pose.x, body.pose.y
            heading = body.pose.heading
            while budget > 1e-12 and body.path:
                tx, ty = body.path[0]
                seg = math.hypot(tx - x, ty - y)
                if seg <= budget:
                    if seg > 1e-12:
                        heading = math.atan2(ty - y, tx - x)
                    x, y = tx, ty
                    moved += seg
                    budget -= seg
                    body.path.pop(0)
                else:
                    heading = math.atan2(ty - y, tx - x)
                    x += (tx - x) / seg * budget
                    y += (ty - y) / seg * budget
                    moved += budget
                    budget = 0.0
            body.pose = Pose(x, y, heading)
        if moved > 0.0:
            body.distance_traveled += moved
            body.battery = max(0.0, body.battery - body.model.c_move * moved)
            new_cells = self.coverage.stamp(body.pose.x, body.pose.y,
                                            body.model.sensing_radius)
            if new_cells:
                self.log.emit(self.time, "coverage_delta", robot=robot_id,
                              cells=new_cells,
                              area=new_cells * self.coverage.cell_area)
            self.log.emit(self.time, "distance_delta", robot=robot_id,
                          role=body.model.role, distance=moved)
        return moved

    def drain_task(self, robot_id: str, poi_type: PoiType) -> float:
        """Apply the per-type task energy cost; returns the amount drained."""
        body = self.robot(robot_id)
        cost = body.model.c_task.get(poi_type, 0.0)
        body.battery = max(0.0, body.battery - cost)
        return cost

    # -- sensing ----------------------------------------------------------

    def detect_targets(self, robot_id: str) -> list[Target]:
        """One sensing pass: Bernoulli draw per undetected in-range target."""
        body = self.robot(robot_id)
        if not (body.alive and body.model.role == "scout"
                and body.model.detection_enabled):
            return []
        hits = []
        for tid in sorted(self.targets):
            target = self.targets[tid]
            if tid in self.detected:
                continue
            dx = target.position[0] - body.pose.x
            dy = target.position[1] - body.pose.y
            if math.hypot(dx, dy) > body.model.sensing_radius:
                continue
            if self.rng_detect.random() < target.detectability:
                self.detected.add(tid)
                hits.append(target)
        return hits

    def run_instrument(self, robot_id: str, poi, target_point=None
                       ) -> MeasurementRecord:
        """Execute a scientific measurement at a POI.

        Success requires both the Bernoulli draw and standing within the
        positioning tolerance; a miss mirrors the dominant field failure
        mode of standing too far from the measurement location.
        """
        body = self.robot(robot_id)
        params = self.measurement
        if poi.poi_type is PoiType.ROCK_MEASUREMENT:
            p_base, duration = params.p_base_rock, params.duration_rock
        else:
            p_base, duration = params.p_base_ground, params.duration_ground
        error = body.pose.distance_to(poi.pose)
        draw_ok = self.rng_measure.random() < p_base
        in_tolerance = error <= params.tolerance
        success = draw_ok and in_tolerance
        if not in_tolerance:
            detail = "not positioned close enough"
        elif not draw_ok:
            detail = "instrument failure"
        else:
            detail = "ok"
        target_id = self._target_near(poi.pose)
        self.log.emit(self.time, "measurement", robot=robot_id, poi_id=poi.id,
                      poi_type=poi.poi_type.value, success=success,
                      detail=detail, target_id=target_id, duration=duration)
        return MeasurementRecord(poi_id=poi.id, robot=robot_id, success=success,
                                 duration=duration, detail=detail,
                                 target_id=target_id)

    def _target_near(self, pose: Pose, radius: float = 1.5) -> Optional[str]:
        best = None
        best_d = radius
        for tid in sorted(self.targets):
            t = self.targets[tid]
            d = math.hypot(t.position[0] - pose.x, t.position[1] - pose.y)
            if d <= best_d:
                best, best_d = tid, d
        return best

    # -- failures ---------------------------------------------------------

    def kill_robot(self, robot_id: str) -> None:
        """Silent failure: the robot stops and ceases all communication."""
        body = self.robot(robot_id)
        if not body.alive:
            return
        body.alive = False
        body.clear_motion()
        self.log.emit(self.time, "robot_dead", robot=robot_id)
