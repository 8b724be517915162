"""System-level POI registry: lifecycle, claim arbitration, bookkeeping.

All mutations funnel through the single-threaded command surface; reads hand
out isolated snapshots.  Every mutation is appended to a JSONL-able journal
from which the full state can be reconstructed by replay.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Iterable, Optional

from .geometry import Pose
from .poi import Poi, PoiType, RobotAttempt, RobotUtility

DEFAULT_STALENESS_HORIZON = 30.0


class RegistryError(Exception):
    """Base class for registry command rejections."""


class UnknownPoi(RegistryError):
    pass


class AlreadyClaimed(RegistryError):
    pass


class Inactive(RegistryError):
    pass


class NotClaimHolder(RegistryError):
    pass


class AlreadyInactive(RegistryError):
    pass


class AlreadyActive(RegistryError):
    pass


class CurrentlyClaimed(RegistryError):
    pass


class InvalidValue(RegistryError):
    pass


class PoiRegistry:
    """Single source of truth for mission objectives.

    ``clock`` supplies the current simulation time; it is the only source of
    timestamps so replays are exact.
    """

    def __init__(self, clock: Callable[[], float],
                 staleness_horizon: float = DEFAULT_STALENESS_HORIZON):
        self._clock = clock
        self.staleness_horizon = staleness_horizon
        self._pois: dict[int, Poi] = {}
        self._next_id = 1
        self._journal: list[dict] = []
        self._last_seen: dict[str, float] = {}

    # -- internal helpers -------------------------------------------------

    def _get(self, poi_id: int) -> Poi:
        poi = self._pois.get(poi_id)
        if poi is None:
            raise UnknownPoi(f"no POI with id {poi_id}")
        return poi

    def _record(self, op: str, **fields) -> None:
        self._journal.append({"t": self._clock(), "op": op, **fields})

    # -- commands ---------------------------------------------------------

    def create_poi(self, pose, poi_type: PoiType, mission_value: float = 1.0) -> Poi:
        pose = Pose.from_any(pose)
        if not pose.is_finite():
            raise InvalidValue(f"non-finite pose {pose}")
        if not (math.isfinite(mission_value) and mission_value >= 0):
            raise InvalidValue(f"mission_value must be finite and >= 0, got {mission_value}")
        poi_type = PoiType(poi_type)
        poi = Poi(id=self._next_id, pose=pose, poi_type=poi_type,
                  mission_value=float(mission_value))
        self._next_id += 1
        self._pois[poi.id] = poi
        self._record("create", poi_id=poi.id, pose=list(pose.as_tuple()),
                     poi_type=poi_type.value, mission_value=poi.mission_value)
        return poi.snapshot()

    def claim_poi(self, poi_id: int, robot_id: str) -> Poi:
        poi = self._get(poi_id)
        if not poi.active:
            raise Inactive(f"POI {poi_id} is inactive")
        if poi.robot and poi.robot != robot_id:
            raise AlreadyClaimed(f"POI {poi_id} held by {poi.robot}")
        if poi.robot == robot_id:
            raise AlreadyClaimed(f"POI {poi_id} already held by {robot_id}")
        poi.robot = robot_id
        self._last_seen[robot_id] = self._clock()
        self._record("claim", poi_id=poi_id, robot=robot_id)
        return poi.snapshot()

    def free_poi(self, poi_id: int, robot_id: str, success: bool) -> Poi:
        poi = self._get(poi_id)
        if poi.robot != robot_id:
            raise NotClaimHolder(f"POI {poi_id} not held by {robot_id}")
        poi.robot = ""
        poi.robot_attempts.append(
            RobotAttempt(stamp=self._clock(), robot=robot_id, success=success))
        self._record("free", poi_id=poi_id, robot=robot_id, success=success)
        return poi.snapshot()

    def deactivate_poi(self, poi_id: int, actor: str = "operator") -> Poi:
        poi = self._get(poi_id)
        if not poi.active:
            raise AlreadyInactive(f"POI {poi_id} already inactive")
        poi.active = False
        poi.robot = ""
        self._record("deactivate", poi_id=poi_id, actor=actor)
        return poi.snapshot()

    def reactivate_poi(self, poi_id: int, actor: str = "operator") -> Poi:
        poi = self._get(poi_id)
        if poi.active:
            raise AlreadyActive(f"POI {poi_id} already active")
        poi.active = True
        self._record("reactivate", poi_id=poi_id, actor=actor)
        return poi.snapshot()

    def convert_poi(self, poi_id: int, new_type: PoiType, actor: str = "operator") -> Poi:
        poi = self._get(poi_id)
        if poi.robot:
            raise CurrentlyClaimed(f"POI {poi_id} held by {poi.robot}")
        if not poi.active:
            raise Inactive(f"POI {poi_id} is inactive")
        new_type = PoiType(new_type)
        if actor != "operator" and not (
                poi.poi_type is PoiType.ROCK_CANDIDATE
                and new_type is PoiType.ROCK_MEASUREMENT):
            raise InvalidValue(
                f"robot actors may only convert ROCK_CANDIDATE to ROCK_MEASUREMENT")
        poi.poi_type = new_type
        self._record("convert", poi_id=poi_id, new_type=new_type.value, actor=actor)
        return poi.snapshot()

    def move_poi(self, poi_id: int, pose, actor: str = "operator") -> Poi:
        poi = self._get(poi_id)
        if poi.robot:
            raise CurrentlyClaimed(f"POI {poi_id} held by {poi.robot}")
        pose = Pose.from_any(pose)
        if not pose.is_finite():
            raise InvalidValue(f"non-finite pose {pose}")
        poi.pose = pose
        self._record("move", poi_id=poi_id, pose=list(pose.as_tuple()), actor=actor)
        return poi.snapshot()

    def record_utility(self, poi_id: int, robot_id: str, utility_value: float) -> None:
        poi = self._get(poi_id)
        if not math.isfinite(utility_value):
            raise InvalidValue(f"non-finite utility {utility_value}")
        poi.robot_utilities = [u for u in poi.robot_utilities if u.robot != robot_id]
        poi.robot_utilities.append(
            RobotUtility(robot=robot_id, utility_value=float(utility_value),
                         stamp=self._clock()))
        self._record("record_utility", poi_id=poi_id, robot=robot_id,
                     utility_value=float(utility_value))

    def heartbeat(self, robot_id: str) -> None:
        """Renew the claim lease for a robot.

        Claims not renewed within the staleness horizon are released by
        ``expire_leases`` (a crashed robot must not hold its objective
        forever).
        """
        self._last_seen[robot_id] = self._clock()
        self._record("heartbeat", robot=robot_id)

    def expire_leases(self) -> list[int]:
        """Free claims whose holder has not been heard from within the horizon."""
        now = self._clock()
        released = []
        for poi in self._pois.values():
            if not poi.robot:
                continue
            seen = self._last_seen.get(poi.robot, -math.inf)
            if now - seen > self.staleness_horizon:
                robot = poi.robot
                poi.robot = ""
                poi.robot_attempts.append(
                    RobotAttempt(stamp=now, robot=robot, success=False))
                self._record("free", poi_id=poi.id, robot=robot, success=False,
                             reason="lease_expired")
                released.append(poi.id)
        return released

    # -- queries ----------------------------------------------------------

    def list_active(self, staleness_horizon: Optional[float] = None) -> list[Poi]:
        """Isolated snapshot of active POIs with stale utilities dropped."""
        horizon = self.staleness_horizon if staleness_horizon is None else staleness_horizon
        now = self._clock()
        out = []
        for poi in self._pois.values():
            if not poi.active:
                continue
            snap = poi.snapshot()
            snap.robot_utilities = snap.fresh_utilities(now, horizon)
            out.append(snap)
        return out

    def list_all(self) -> list[Poi]:
        return [p.snapshot() for p in self._pois.values()]

    def get_poi(self, poi_id: int) -> Poi:
        return self._get(poi_id).snapshot()

    def highest_recorded_utility(self, poi_id: int, exclude_robot: str = "",
                                 staleness_horizon: Optional[float] = None
                                 ) -> Optional[float]:
        """Highest fresh recorded utility on a POI from any other robot."""
        horizon = self.staleness_horizon if staleness_horizon is None else staleness_horizon
        poi = self._get(poi_id)
        fresh = [u.utility_value for u in poi.fresh_utilities(self._clock(), horizon)
                 if u.robot != exclude_robot]
        return max(fresh) if fresh else None

    # -- journal ----------------------------------------------------------

    @property
    def journal(self) -> list[dict]:
        return list(self._journal)

    def dump_journal(self, path) -> None:
        with open(path, "w") as fh:
            for entry in self._journal:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    @classmethod
    def replay(cls, entries: Iterable[dict],
               staleness_horizon: float = DEFAULT_STALENESS_HORIZON) -> "PoiRegistry":
        """Rebuild registry state by re-running a journal."""
        entries = list(entries)
        cursor = {"t": 0.0}
        reg = cls(clock=lambda: cursor["t"], staleness_horizon=staleness_horizon)
        for entry in entries:
            cursor["t"] = entry["t"]
            op = entry["op"]
            if op == "create":
                reg.create_poi(entry["pose"], PoiType(entry["poi_type"]),
                               entry["mission_value"])
            elif op == "claim":
                reg.claim_poi(entry["poi_id"], entry["robot"])
            elif op == "free":
                if entry.get("reason") == "lease_expired":
                    poi = reg._get(entry["poi_id"])
                    poi.robot = ""
                    poi.robot_attempts.append(RobotAttempt(
                        stamp=entry["t"], robot=entry["robot"], success=False))
                    reg._record("free", poi_id=entry["poi_id"], robot=entry["robot"],
                                success=False, reason="lease_expired")
                else:
                    reg.free_poi(entry["poi_id"], entry["robot"], entry["success"])
            elif op == "deactivate":
                reg.deactivate_poi(entry["poi_id"], entry["actor"])
            elif op == "reactivate":
                reg.reactivate_poi(entry["poi_id"], entry["actor"])
            elif op == "convert":
                reg.convert_poi(entry["poi_id"], PoiType(entry["new_type"]),
                                entry["actor"])
            elif op == "move":
                reg.move_poi(entry["poi_id"], entry["pose"], entry["actor"])
            elif op == "record_utility":
                reg.record_utility(entry["poi_id"], entry["robot"],
                                   entry["utility_value"])
            elif op == "heartbeat":
                reg.heartbeat(entry["robot"])
            else:
                raise ValueError(f"unknown journal op {op!r}")
        return reg

    @classmethod
    def load_journal(cls, path, **kwargs) -> "PoiRegistry":
        with open(path) as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
        return cls.replay(entries, **kwargs)
