import itertools

import pytest

from mosaicsim.poi import PoiType
from mosaicsim.registry import (AlreadyClaimed, AlreadyInactive, CurrentlyClaimed,
                                Inactive, InvalidValue, NotClaimHolder, PoiRegistry,
                                UnknownPoi)


class FakeClock:
    def __init__(self, t=0.0):
        self.t = t

    def __call__(self):
        return self.t


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def reg(clock):
    return PoiRegistry(clock)


def test_create_first_id_and_defaults(reg):
    poi = reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    assert poi.id == 1
    assert poi.active
    assert poi.robot == ""
    assert poi.robot_attempts == []
    assert poi.robot_utilities == []


def test_ids_strictly_increasing(reg):
    a = reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    b = reg.create_poi((1, 1, 0), PoiType.MOVE, 1.0)
    assert (a.id, b.id) == (1, 2)


def test_create_rejects_non_finite_pose(reg):
    with pytest.raises(InvalidValue):
        reg.create_poi((float("nan"), 0, 0), PoiType.MOVE, 1.0)
    with pytest.raises(InvalidValue):
        reg.create_poi((0, 0, 0), PoiType.MOVE, -1.0)


def test_claim_fresh_poi(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    poi = reg.claim_poi(1, "spot")
    assert poi.robot == "spot"


def test_claim_is_single_assignment(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.claim_poi(1, "spot")
    with pytest.raises(AlreadyClaimed):
        reg.claim_poi(1, "husky")


def test_claim_unknown_and_inactive(reg):
    with pytest.raises(UnknownPoi):
        reg.claim_poi(99, "spot")
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.deactivate_poi(1, "operator")
    with pytest.raises(Inactive):
        reg.claim_poi(1, "spot")


def test_interleaved_claims_exactly_one_winner_each():
    # 100 POIs, two claimants racing on each in every arrival order.
    clock = FakeClock()
    reg = PoiRegistry(clock)
    for _ in range(100):
        reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    successes = 0
    for i, order in zip(range(1, 101), itertools.cycle([("a", "b"), ("b", "a")])):
        for robot in order:
            try:
                reg.claim_poi(i, robot)
                successes += 1
            except AlreadyClaimed:
                pass
    assert successes == 100
    assert all(p.robot in ("a", "b") for p in reg.list_active())


def test_free_appends_attempt_and_clears_robot(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.claim_poi(1, "spot")
    clock.t = 5.0
    poi = reg.free_poi(1, "spot", success=False)
    assert poi.robot == ""
    assert poi.active
    assert len(poi.robot_attempts) == 1
    att = poi.robot_attempts[0]
    assert (att.robot, att.success, att.stamp) == ("spot", False, 5.0)


def test_free_requires_claim_holder(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    with pytest.raises(NotClaimHolder):
        reg.free_poi(1, "husky", success=True)


def test_scripted_attempt_count(reg, clock):
    # 2 failed + 12 successful frees for one robot across POIs -> 14 records.
    for _ in range(14):
        reg.create_poi((0, 0, 0), PoiType.GROUND_MEASUREMENT, 1.0)
    outcomes = [False, False] + [True] * 12
    for i, ok in enumerate(outcomes, start=1):
        clock.t = float(i)
        reg.claim_poi(i, "husky")
        reg.free_poi(i, "husky", success=ok)
    attempts = [a for p in reg.list_all() for a in p.robot_attempts]
    assert len(attempts) == 14
    assert sum(1 for a in attempts if not a.success) == 2


def test_deactivate_retains_record(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    poi = reg.deactivate_poi(1, "operator")
    assert not poi.active
    assert [p.id for p in reg.list_all()] == [1]
    assert reg.list_active() == []


def test_deactivate_twice_rejected(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.deactivate_poi(1, "robot")
    with pytest.raises(AlreadyInactive):
        reg.deactivate_poi(1, "robot")


def test_reactivate_restores_history(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.claim_poi(1, "spot")
    reg.free_poi(1, "spot", success=True)
    reg.deactivate_poi(1, "spot")
    poi = reg.reactivate_poi(1, "operator")
    assert poi.active
    assert len(poi.robot_attempts) == 1


def test_record_utility_upserts(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.record_utility(1, "spot", 5.0)
    reg.record_utility(1, "spot", 3.2)
    poi = reg.get_poi(1)
    assert len(poi.robot_utilities) == 1
    assert poi.robot_utilities[0].utility_value == 3.2


def test_stale_utilities_excluded(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.record_utility(1, "spot", 5.0)
    assert reg.highest_recorded_utility(1) == 5.0
    clock.t = 31.0
    assert reg.highest_recorded_utility(1) is None
    assert reg.list_active()[0].robot_utilities == []


def test_record_utility_rejects_non_finite(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    with pytest.raises(InvalidValue):
        reg.record_utility(1, "spot", float("inf"))


def test_snapshot_isolation(reg):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    snap = reg.list_active()
    reg.claim_poi(1, "spot")
    assert snap[0].robot == ""


def test_list_active_filters(reg):
    for _ in range(4):
        reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.deactivate_poi(4, "operator")
    assert len(reg.list_active()) == 3


def test_convert_rock_candidate(reg):
    reg.create_poi((0, 0, 0), PoiType.ROCK_CANDIDATE, 1.0)
    poi = reg.convert_poi(1, PoiType.ROCK_MEASUREMENT, actor="operator")
    assert poi.poi_type is PoiType.ROCK_MEASUREMENT
    assert poi.id == 1


def test_convert_while_claimed_rejected(reg):
    reg.create_poi((0, 0, 0), PoiType.ROCK_CANDIDATE, 1.0)
    reg.claim_poi(1, "spot")
    with pytest.raises(CurrentlyClaimed):
        reg.convert_poi(1, PoiType.ROCK_MEASUREMENT)


def test_convert_then_claim(reg):
    reg.create_poi((0, 0, 0), PoiType.ROCK_CANDIDATE, 1.0)
    reg.convert_poi(1, PoiType.ROCK_MEASUREMENT)
    poi = reg.claim_poi(1, "donkey")
    assert poi.robot == "donkey"


def test_lease_expiry_frees_silent_robot(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.claim_poi(1, "spot")
    clock.t = 10.0
    assert reg.expire_leases() == []
    clock.t = 45.0
    assert reg.expire_leases() == [1]
    poi = reg.get_poi(1)
    assert poi.robot == ""
    assert poi.robot_attempts[-1].success is False


def test_heartbeat_renews_lease(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.MOVE, 1.0)
    reg.claim_poi(1, "spot")
    clock.t = 25.0
    reg.heartbeat("spot")
    clock.t = 50.0
    assert reg.expire_leases() == []


def test_journal_replay_reconstructs_state(reg, clock):
    reg.create_poi((0, 0, 0), PoiType.ROCK_CANDIDATE, 2.0)
    reg.create_poi((5, 5, 0), PoiType.MOVE, 1.0)
    reg.convert_poi(1, PoiType.ROCK_MEASUREMENT)
    clock.t = 3.0
    reg.claim_poi(1, "donkey")
    reg.record_utility(2, "spot", 4.5)
    clock.t = 7.0
    reg.free_poi(1, "donkey", success=True)
    reg.deactivate_poi(1, "donkey")

    replayed = PoiRegistry.replay(reg.journal)
    assert [p.to_dict() for p in replayed.list_all()] == \
        [p.to_dict() for p in reg.list_all()]
    assert replayed.journal == reg.journal


def test_journal_file_round_trip(reg, tmp_path):
    reg.create_poi((1, 2, 0.5), PoiType.EXPLORATION, 1.5)
    reg.claim_poi(1, "dilly")
    path = tmp_path / "journal.jsonl"
    reg.dump_journal(path)
    loaded = PoiRegistry.load_journal(path)
    assert [p.to_dict() for p in loaded.list_all()] == \
        [p.to_dict() for p in reg.list_all()]
