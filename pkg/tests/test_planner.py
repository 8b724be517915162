import math
import random

import pytest

from mosaicsim.geometry import Pose, euclidean
from mosaicsim.planner import (MotionModel, NoPath, Plan, PlannerConfig, plan,
                               predict_next_state, replan_trigger,
                               weighted_utility)
from mosaicsim.poi import Poi, PoiType, RobotUtility
from mosaicsim.utility import (BatteryModel, FeatureWeights, RobotStateEstimate,
                               default_weights)

from reference_planner import reference_plan_ids


def straight_line(a, b):
    return euclidean(a, b)


def make_poi(poi_id, x, y, poi_type=PoiType.MOVE, mission_value=1.0):
    return Poi(id=poi_id, pose=Pose(x, y), poi_type=poi_type,
               mission_value=mission_value)


BATT = BatteryModel(capacity=1000.0, c_move=0.05,
                    c_task={PoiType.EXPLORATION: 0.2,
                            PoiType.GROUND_MEASUREMENT: 0.5})
MOTION = MotionModel(cruise_speed=1.0, t_rot=5.0)


def state(x=0.0, y=0.0, battery=1000.0, t=0.0):
    return RobotStateEstimate(position=Pose(x, y), battery_remaining=battery,
                              time=t)


class TestWeightedUtility:
    def test_depth_zero_identity(self):
        assert weighted_utility(7.3, 0.5, 0) == 7.3

    def test_direct_evaluation(self):
        assert weighted_utility(8.0, 0.9, 0) == pytest.approx(8.0)
        assert weighted_utility(6.0, 0.9, 1) == pytest.approx(5.4)


class TestPlannerConfig:
    def test_rejects_bad_duf(self):
        with pytest.raises(ValueError):
            PlannerConfig(duf=0.0)
        with pytest.raises(ValueError):
            PlannerConfig(duf=1.5)

    def test_rejects_bad_depth(self):
        with pytest.raises(ValueError):
            PlannerConfig(planning_depth=0)


class TestPredictNextState:
    def test_move_kinematics(self):
        nxt = predict_next_state(state(), make_poi(1, 10, 0), straight_line,
                                 BATT, MOTION)
        assert nxt.time == pytest.approx(10.0)
        assert (nxt.position.x, nxt.position.y) == (10, 0)

    def test_exploration_dwell(self):
        nxt = predict_next_state(
            state(), make_poi(1, 10, 0, PoiType.EXPLORATION), straight_line,
            BATT, MOTION)
        assert nxt.time == pytest.approx(10.0 + 4 * 5.0)

    def test_battery_decrement(self):
        nxt = predict_next_state(state(), make_poi(1, 10, 0), straight_line,
                                 BATT, MOTION)
        assert nxt.battery_remaining == pytest.approx(1000.0 - 0.5)

    def test_no_path(self):
        with pytest.raises(NoPath):
            predict_next_state(state(), make_poi(1, 10, 0),
                               lambda a, b: None, BATT, MOTION)


class TestPlan:
    def weights(self, robot="spot"):
        return FeatureWeights(type_rewards={PoiType.MOVE: 10.0}, w_euclid=1.0,
                              w_nav=0.0, w_batt=0.0, robot=robot)

    def test_picks_nearer_of_equal_rewards(self):
        snapshot = [make_poi(1, 0, 0), make_poi(2, 5, 0)]
        p = plan(state(), snapshot, self.weights(), PlannerConfig(), straight_line,
                 BATT, MOTION)
        assert p.best_poi_id == 1

    def test_depth_weighting_recorded(self):
        snapshot = [make_poi(1, 0, 0), make_poi(2, 2, 0)]
        cfg = PlannerConfig(planning_depth=2, duf=0.9)
        p = plan(state(), snapshot, self.weights(), cfg, straight_line, BATT,
                 MOTION)
        assert [s.depth for s in p.steps] == [0, 1]
        for s in p.steps:
            assert s.weighted_utility == pytest.approx(
                s.raw_utility * 0.9 ** s.depth)

    def test_empty_plan_not_error(self):
        p = plan(state(), [], self.weights(), PlannerConfig(), straight_line,
                 BATT, MOTION)
        assert p.empty
        assert p.best_poi_id is None

    def test_claimed_pois_excluded(self):
        poi = make_poi(1, 0, 0)
        poi.robot = "husky"
        p = plan(state(), [poi], self.weights(), PlannerConfig(), straight_line,
                 BATT, MOTION)
        assert p.empty

    def test_no_duplicate_pois(self):
        snapshot = [make_poi(i, i, 0) for i in range(1, 6)]
        p = plan(state(), snapshot, self.weights(),
                 PlannerConfig(planning_depth=3), straight_line, BATT, MOTION)
        ids = [s.poi_id for s in p.steps]
        assert len(ids) == len(set(ids))

    def test_coordination_safety(self):
        # Teammate recorded a strictly higher utility: POI never planned.
        poi = make_poi(1, 0, 0)
        poi.robot_utilities = [RobotUtility("husky", 1e6, 0.0)]
        p = plan(state(), [poi], self.weights(), PlannerConfig(), straight_line,
                 BATT, MOTION)
        assert p.empty

    def test_equal_recorded_utility_does_not_block(self):
        poi = make_poi(1, 0, 0)
        poi.robot_utilities = [RobotUtility("husky", 10.0, 0.0)]
        p = plan(state(), [poi], self.weights(), PlannerConfig(), straight_line,
                 BATT, MOTION)
        assert p.best_poi_id == 1

    def test_records_every_planned_step(self):
        snapshot = [make_poi(1, 0, 0), make_poi(2, 2, 0)]
        recorded = []
        p = plan(state(), snapshot, self.weights(),
                 PlannerConfig(planning_depth=2), straight_line, BATT, MOTION,
                 record_utility=lambda pid, v: recorded.append((pid, v)))
        assert [pid for pid, _ in recorded] == [s.poi_id for s in p.steps]
        assert [v for _, v in recorded] == [s.weighted_utility for s in p.steps]

    def test_predicted_states_chain(self):
        snapshot = [make_poi(1, 3, 0), make_poi(2, 6, 0), make_poi(3, 9, 0)]
        p = plan(state(), snapshot, self.weights(),
                 PlannerConfig(planning_depth=3), straight_line, BATT, MOTION)
        assert len(p.steps) == 3
        for a, b in zip(p.steps, p.steps[1:]):
            assert b.predicted_state_after.time > a.predicted_state_after.time


class TestReplanTrigger:
    def test_claim_failed_always(self):
        assert replan_trigger("claim_failed", executing=True)
        assert replan_trigger("claim_failed", executing=False)

    def test_task_done_always(self):
        assert replan_trigger("task_done", executing=False)

    def test_list_change_only_when_idle(self):
        assert replan_trigger("poi_list_changed", executing=False)
        assert not replan_trigger("poi_list_changed", executing=True)

    def test_unknown_event(self):
        with pytest.raises(ValueError):
            replan_trigger("coffee_break")


def detour_nav(a, b):
    """Deterministic metric-like oracle with d_nav >= d_euclid."""
    d = euclidean(a, b)
    ax, ay = (a.x, a.y)
    bx, by = (b.x, b.y)
    factor = 1.0 + 0.5 * abs(math.sin(ax * by - ay * bx + ax + by))
    return d * factor


def random_instance(rng):
    n_pois = rng.randint(1, 8)
    n_others = rng.randint(0, 2)
    others = [f"mate{i}" for i in range(n_others)]
    types = list(PoiType)
    snapshot = []
    for i in range(1, n_pois + 1):
        poi = make_poi(i, rng.uniform(-30, 30), rng.uniform(-30, 30),
                       rng.choice(types), mission_value=rng.uniform(0.2, 3.0))
        if rng.random() < 0.2 and others:
            poi.robot = rng.choice(others)  # already claimed by a teammate
        for mate in others:
            if rng.random() < 0.5:
                poi.robot_utilities.append(
                    RobotUtility(mate, rng.uniform(-5, 15), 0.0))
        snapshot.append(poi)
    rewards = {t: rng.choice([0.0, rng.uniform(1, 15)]) for t in PoiType}
    weights = FeatureWeights(type_rewards=rewards, w_euclid=rng.uniform(0, 1),
                             w_nav=rng.uniform(0, 1), w_batt=rng.uniform(0, 1),
                             w_fail=rng.uniform(0, 3), robot="self")
    cfg = PlannerConfig(planning_depth=rng.randint(1, 3),
                        duf=rng.uniform(0.5, 1.0))
    st = state(rng.uniform(-30, 30), rng.uniform(-30, 30),
               battery=rng.uniform(5, 50))
    batt = BatteryModel(capacity=50.0, c_move=rng.uniform(0.01, 0.3),
                        c_task={t: rng.uniform(0, 1) for t in PoiType})
    return st, snapshot, weights, cfg, batt


def test_pruned_planner_matches_exhaustive_reference():
    rng = random.Random(20260824)
    for _ in range(1000):
        st, snapshot, weights, cfg, batt = random_instance(rng)
        p = plan(st, snapshot, weights, cfg, detour_nav, batt, MOTION)
        got = [s.poi_id for s in p.steps]
        want = reference_plan_ids(st, snapshot, weights, cfg, detour_nav, batt,
                                  MOTION)
        assert got == want
