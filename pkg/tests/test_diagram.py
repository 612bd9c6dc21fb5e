from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from springerfib.diagram import (
    CupDiagram,
    MarkedCupDiagram,
    diagram_from_json,
    double,
    enumerate_typeA,
    enumerate_typeD,
    fold,
    fold_step,
    fully_folded,
    has_crossing,
    parse_diagram,
    serialize_diagram,
    stats,
    unfold,
    unfolds_to,
)
from springerfib.errors import (
    DiagramSyntaxError,
    InvalidShape,
    NoAxisCrossingCup,
    NotACupEndpoint,
    NotTypeDPartition,
    SizeMismatch,
    ValidationError,
)

A = parse_diagram
SMALL_CUPS = A("A n=6 k=3: 1-2, 3-4, 5-6")
OUTER_TWO_INNER = A("A n=6 k=3: 1-6, 2-3, 4-5")
NESTED = A("A n=6 k=3: 1-6, 2-5, 3-4")
CUP_RAY = A("D m=3 cups=1: 1-2, 3")
RAY_CUP = A("D m=3 cups=1: 1, 2-3")


def test_enumerate_typeA_small():
    assert [d.cups for d in enumerate_typeA(3, 1)] == [((1, 2),), ((2, 3),)]
    assert enumerate_typeA(3, 0) == [CupDiagram(3, ())]
    assert len(enumerate_typeA(6, 3)) == 5
    with pytest.raises(InvalidShape):
        enumerate_typeA(3, 2)


@pytest.mark.parametrize("n", range(0, 11))
def test_typeA_counts(n):
    for k in range(n // 2 + 1):
        ds = enumerate_typeA(n, k)
        assert len(ds) == comb(n, k) - (comb(n, k - 1) if k else 0)
        assert len(set(ds)) == len(ds)
        assert ds == sorted(ds, key=lambda d: d.cups)


def test_stats_examples():
    s = stats(CupDiagram(4, ()))
    assert all(s.rho[i] == i and s.c[i] == 0 for i in range(1, 5))
    s = stats(CupDiagram(3, ((1, 2),)))
    assert (s.rho[3], s.c[3]) == (1, 1)
    assert (s.sigma[1], s.delta[1], s.m_of[1]) == (2, 1, 1)
    with pytest.raises(NotACupEndpoint):
        s.sigma[3]


@pytest.mark.parametrize("n", range(1, 9))
def test_stats_invariants(n):
    for k in range(n // 2 + 1):
        for d in enumerate_typeA(n, k):
            s = stats(d)
            for r in d.rays:
                assert s.rho[r] + 2 * s.c[r] == r
            for i, j in d.cups:
                assert s.delta[i] == (j - i + 1) // 2 >= 1
                assert s.m_of[i] == i + s.delta[i] - 1 == (i + j) // 2


def test_enumerate_typeD_counts():
    assert len(enumerate_typeD(2, 1)) == 2
    assert len(enumerate_typeD(4, 2)) == 2
    six = enumerate_typeD(6, 3)
    assert len(six) == 6 and len(set(six)) == 6
    with pytest.raises(NotTypeDPartition):
        enumerate_typeD(6, 2)


def test_accessibility():
    MarkedCupDiagram(3, ((1, 2, True),), ((3, False),), validate=False)
    with pytest.raises(ValidationError):
        A("D m=3 cups=1: 1-2*, 3")
    # the right border is reachable from the ray at 1 by passing under the cup
    assert A("D m=3 cups=1: 2-3, 1*").ray_marked(1)
    with pytest.raises(ValidationError):
        A("D m=4 cups=1: 1, 2-3*, 4")
    with pytest.raises(ValidationError):
        A("D m=4 cups=2: 1-4, 2-3*")


def test_fold_step_single_crossing():
    p, mi = fold_step(SMALL_CUPS)
    assert p.rays == ((3, False), (4, False))
    assert mi.rays == ((3, True), (4, True))
    assert p.plain_cups == mi.plain_cups == ((1, 2), (5, 6))


def test_fold_step_nested_crossing():
    p, mi = fold_step(NESTED)
    assert p == OUTER_TWO_INNER.decorated()
    assert mi.cups == ((1, 6, False), (2, 3, True), (4, 5, True))


def test_fold_step_without_crossing():
    with pytest.raises(NoAxisCrossingCup):
        fold_step(A("A n=4 k=2: 1-2, 3-4"))
    with pytest.raises(ValidationError):
        fold(A("A n=4 k=1: 1-2"))


def test_fold_fixtures_generate_BD33():
    folded = {serialize_diagram(d) for a in (SMALL_CUPS, OUTER_TWO_INNER, NESTED) for d in fold(a)}
    assert folded == {serialize_diagram(d) for d in enumerate_typeD(6, 3)}
    assert fold(SMALL_CUPS)[0] == CUP_RAY
    assert fold(OUTER_TWO_INNER)[0] == RAY_CUP


def test_unfolds_to_examples():
    assert unfolds_to(RAY_CUP, OUTER_TWO_INNER)
    assert unfolds_to(RAY_CUP, NESTED)
    assert not unfolds_to(CUP_RAY, OUTER_TWO_INNER)
    with pytest.raises(SizeMismatch):
        unfolds_to(CUP_RAY, A("A n=4 k=2: 1-4, 2-3"))
    assert unfold(RAY_CUP) == [OUTER_TWO_INNER, NESTED]


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_fold_properties(n):
    for k in range(n // 2 + 1):
        for a in enumerate_typeA(n, k):
            if not a.is_symmetric():
                continue
            out = fold(a)
            assert out
            for d in out:
                assert len(d.cups) == k // 2
                assert unfolds_to(d, a)
                # rebuilt with validation on: markers are accessible
                MarkedCupDiagram(d.m, d.cups, d.rays)
            if has_crossing(a.decorated()):
                p, mi = fold_step(a)
                crossing = sum(1 for c in a.cups if c[0] <= n // 2 < c[1])
                for b in (p, mi):
                    assert sum(1 for c in b.cups if c[0] <= n // 2 < c[1]) < crossing
            assert all(not has_crossing(f) for f in fully_folded(a))


def test_double_is_symmetric():
    d = double(A("D m=3 cups=1: 1*, 2-3"))
    assert d.m == 6
    assert d.cups == ((2, 3, False), (4, 5, False))


def test_parse_examples():
    assert A("A n=3 k=1: 1-2") == CupDiagram(3, ((1, 2),))
    d = A("D m=3 cups=1: 1-2, 3*")
    assert d.cups == ((1, 2, False),) and d.rays == ((3, True),)


def test_parse_errors():
    with pytest.raises(DiagramSyntaxError) as err:
        A("A n=3 k=1: 1-2 ?")
    assert err.value.position == 15
    with pytest.raises(DiagramSyntaxError):
        A("B n=3 k=1: 1-2")
    with pytest.raises(ValidationError):
        A("A n=4 k=2: 1-3, 2-4")
    with pytest.raises(ValidationError):
        A("A n=3 k=2: 1-2")
    with pytest.raises(ValidationError):
        A("A n=3 k=1: 1-2*")


@pytest.mark.parametrize("n,k", [(2, 1), (4, 2), (4, 1), (6, 3), (6, 1), (8, 4), (8, 3), (10, 5)])
def test_roundtrip_typeD(n, k):
    for d in enumerate_typeD(n, k):
        assert parse_diagram(serialize_diagram(d)) == d
        assert diagram_from_json(d.to_json()) == d


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n // 2))), st.data())
def test_roundtrip_typeA(nk, data):
    n, k = nk
    d = data.draw(st.sampled_from(enumerate_typeA(n, k)))
    assert parse_diagram(serialize_diagram(d)) == d
    assert diagram_from_json(d.to_json()) == d
