import json

import pytest

from springerfib.bundle import all_parameters, build_flag
from springerfib.diagram import CupDiagram, enumerate_typeA, enumerate_typeD, parse_diagram
from springerfib.errors import CapExceeded, ValidationError
from springerfib.flag import gram_matrix, is_isotropic_flag, is_x_stable, standard_nilpotent
from springerfib.oracle import (
    EnumerationTask,
    component_points,
    count_component,
    decompose,
    enumerate_stable_flags,
)
from springerfib.scalar import GF


def test_two_isotropic_flags_for_11():
    flags = list(enumerate_stable_flags(EnumerationTask((1, 1), 2, True)))
    assert len(flags) == 2


def test_enumerated_flags_are_stable_and_isotropic():
    task = EnumerationTask((3, 3), 3, True)
    x = standard_nilpotent((3, 3), task.field)
    g = gram_matrix((3, 3), task.field)
    flags = list(enumerate_stable_flags(task))
    assert len(flags) == len(set(flags))
    assert all(is_x_stable(fl, x) and is_isotropic_flag(fl, g) for fl in flags)


def test_typeA_22_over_F2():
    rep = decompose(EnumerationTask((2, 2), 2))
    assert rep.complete
    assert set(rep.per_component.values()) == {9}
    # two P^1 x P^1 components meeting along a P^1
    assert rep.total == 9 + 9 - 3
    assert rep.overlaps == {"A n=4 k=2: 1-2, 3-4 | A n=4 k=2: 1-4, 2-3": 3}


def test_typeD_22_is_disjoint_union():
    for q in (3, 5):
        rep = decompose(EnumerationTask((2, 2), q, True))
        assert rep.complete and not rep.overlaps
        assert rep.per_component == {"D m=2 cups=1: 1-2": q + 1, "D m=2 cups=1: 1-2*": q + 1}
        assert rep.total == 2 * (q + 1)


def test_typeD_33_over_F5():
    rep = decompose(EnumerationTask((3, 3), 5, True))
    assert rep.complete
    assert len(rep.per_component) == 6
    assert set(rep.per_component.values()) == {6}
    assert rep.containments() == []
    # every component sits inside one family of maximal isotropic subspaces
    assert all(len(v) == 1 for v in rep.lagrangian_classes.values())


def test_count_component():
    assert count_component(parse_diagram("D m=2 cups=0: 1, 2"), 5) == 1
    assert count_component(parse_diagram("D m=2 cups=1: 1-2*"), 3) == 4
    for d in enumerate_typeD(6, 3):
        assert count_component(d, 5) == 6
    assert count_component(parse_diagram("A n=4 k=2: 1-4, 2-3"), 3) == 16


def test_cap():
    with pytest.raises(CapExceeded):
        list(enumerate_stable_flags(EnumerationTask((3, 3), 5, True, max_count=10)))


def test_task_validation():
    with pytest.raises(ValidationError):
        EnumerationTask((2, 2), 257)
    with pytest.raises(ValidationError):
        EnumerationTask((1, 2), 3)


def test_workers_do_not_change_the_report():
    task = EnumerationTask((3, 3), 3, True)
    one = decompose(task).to_json()
    two = decompose(task, workers=2).to_json()
    assert json.dumps(one, sort_keys=True) == json.dumps(two, sort_keys=True)


def test_csv():
    text = decompose(EnumerationTask((2, 2), 3, True)).to_csv()
    assert text == "component,count\nD m=2 cups=1: 1-2,4\nD m=2 cups=1: 1-2*,4\n"


def test_typeA_small_shapes():
    for n in range(1, 5):
        for k in range(n // 2 + 1):
            rep = decompose(EnumerationTask((n - k, k), 2))
            assert rep.complete
            assert set(rep.per_component.values()) == {3**k}
            assert rep.containments() == []


def test_build_flag_surjects():
    fld = GF(3)
    for n, k in [(2, 1), (4, 2), (4, 1), (6, 3)]:
        for d in enumerate_typeD(n, k):
            built = {build_flag(d, p, fld) for p in all_parameters(d, fld)}
            assert built == set(component_points(d, 3))


def test_component_points_typeA():
    (d,) = enumerate_typeA(2, 1)
    assert isinstance(d, CupDiagram)
    assert len(component_points(d, 5)) == 6
