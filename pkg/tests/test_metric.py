import numpy as np
import pytest

from conftest import line_space
from dynkc.errors import BoundsViolation, InvalidArgument, InvalidState, NotFound
from dynkc.metric import ChangeSet, MetricSpace, UpdateEvent, UpdateKind, ball, cl, levels_for


def test_distance_to_self_is_zero():
    m = line_space([0, 5])
    assert m.distance(0, 0) == 0.0


def test_euclidean_pythagorean():
    m = MetricSpace(1, 10, dim=2)
    m.add(0, [0, 0])
    m.add(1, [3, 4])
    assert m.distance(0, 1) == 5.0


def test_matrix_entries_are_symmetric():
    d = np.array([[0, 3, 5], [3, 0, 7], [5, 7, 0]], dtype=float)
    m = MetricSpace.from_matrix(d)
    for i in range(3):
        m.add(i)
    assert m.distance(1, 2) == 7 and m.distance(2, 1) == 7


def test_from_matrix_rejects_non_metric():
    d = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], dtype=float)
    with pytest.raises(InvalidArgument):
        MetricSpace.from_matrix(d)


def test_cl_examples():
    m = line_space([0, 1, 10, 11], d_max=16)
    V = [0, 1, 2, 3]
    assert cl(m, V, V) == 0
    assert cl(m, [1, 2], V) == 1
    assert cl(m, [0], V) == 11


def test_cl_empty():
    m = line_space([0, 1])
    assert cl(m, [0], []) == 0.0
    with pytest.raises(InvalidArgument):
        cl(m, [], [0, 1])


def test_ball_examples():
    m = line_space([0, 1, 10], d_max=16)
    assert ball(m, 0, 1, [0, 1, 2]) == {0, 1}
    assert ball(m, 0, 16, [0, 1, 2]) == {0, 1, 2}


def test_zero_radius_ball_keeps_coincident_points():
    m = MetricSpace(1, 10, dim=1)
    m.add(0, [2])
    m.add(1, [2])
    m.add(2, [5])
    assert ball(m, 0, 0, [0, 1, 2]) == {0, 1}


def test_bounds_are_enforced():
    m = MetricSpace(1, 10, dim=1)
    m.add(0, [0])
    with pytest.raises(BoundsViolation):
        m.add(1, [0.5])
    with pytest.raises(BoundsViolation):
        m.add(2, [11])
    m.add(3, [0])  # coincident points are allowed
    m.add(4, [10])


def test_ids_are_never_reused():
    m = line_space([0, 1])
    m.remove(1)
    with pytest.raises(InvalidState):
        m.add(1, [1])
    with pytest.raises(NotFound):
        m.remove(1)


def test_order_key_follows_arrival():
    m = line_space([0, 3, 1])
    keys = [m.order_key(i) for i in range(3)]
    assert keys == sorted(keys)


def test_priorities_depend_only_on_seed():
    a = line_space([0, 1, 2], seed=4)
    b = line_space([0, 1, 2], seed=4)
    assert [a.priority(i) for i in range(3)] == [b.priority(i) for i in range(3)]


def test_levels_cover_the_diameter():
    for d_min, d_max in [(1, 1), (1, 16), (1, 17), (0.5, 1000)]:
        t = levels_for(d_min, d_max)
        assert d_min * 2 ** t >= d_max
        assert t == 0 or d_min * 2 ** (t - 1) < d_max


def test_top_threshold_reaches_d_max():
    from dynkc.kcenter import LevelConfig

    cfg = LevelConfig(2, 1, 16)
    assert cfg.threshold(1) == 0.5
    assert cfg.threshold(cfg.tau) >= 16 > cfg.threshold(cfg.tau - 1)


def test_changeset_composition_is_net():
    c = ChangeSet(added={1}, removed={2})
    c.extend(ChangeSet(added={2}, removed={1, 3}))
    assert c.added == set() and c.removed == {3}
    d = ChangeSet.diff({1, 2}, {2, 3})
    assert d.ordered() == [(UpdateKind.DELETE, 1), (UpdateKind.INSERT, 3)]
    assert d.apply_to({1, 2}) == {2, 3}


def test_update_event_constructors():
    ev = UpdateEvent.insert(3, [1.0, 2.0])
    assert ev.kind is UpdateKind.INSERT and ev.id == 3
    assert UpdateEvent.delete(3).position is None
