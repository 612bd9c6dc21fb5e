import itertools

import pytest

from springerfib.bundle import (
    Q_VARIANTS,
    all_parameters,
    build_flag,
    classify_case,
    embedding_P,
    formed_iso_Q,
    in_component,
    induced_nilpotent,
    omega_inverse,
    omega_map,
    pi_ab,
    projection_P,
    projective_line,
    quotient_psi,
    reduced_diagram,
    split_caseI,
    verify_bundle_point,
)
from springerfib.diagram import enumerate_typeD, parse_diagram
from springerfib.errors import (
    BadParameters,
    MissingSqrtMinusOne,
    NotContained,
    NotInComponent,
    ParamCountMismatch,
    ShapeMismatch,
    TooSmall,
    ValidationError,
    WrongCase,
)
from springerfib.flag import Flag, gram_matrix, is_isotropic_flag, is_x_stable, standard_nilpotent
from springerfib.linalg import Matrix, Subspace
from springerfib.oracle import EnumerationTask, decompose
from springerfib.scalar import GF, QQ, QQi

SPLIT = "D m=5 cups=2: 1-2, 3*, 4-5*"


@pytest.mark.parametrize("name,lam,params", Q_VARIANTS)
def test_Q_variants_exact_over_F17(name, lam, params):
    Q = formed_iso_Q(name, GF(17), lam, params)
    assert Q.is_form_compatible()
    assert Q.intertwines()
    assert Q.matrix.rank() == Q.nu[0] + Q.nu[1]


@pytest.mark.parametrize("name,lam,params", Q_VARIANTS)
def test_Q_variants_scalar_free(name, lam, params):
    # dropping the common factor keeps the map x-equivariant over any field
    Q = formed_iso_Q(name, QQi, lam, params, exact=False)
    assert Q.intertwines()


def test_Q_I_odd_t_uses_sqrt_minus_one():
    fld = QQi
    Q = formed_iso_Q("I", fld, (3, 3), (1,))
    i, o, z = fld.sqrt(fld.coerce(-1)), fld.one, fld.zero
    assert Q.nu == (1, 1)
    assert Q.W == Subspace.span(fld, 6, [(o, z, z, z, z, z), (z, z, z, o, z, z)])
    assert Q.lifts == [(z, o, z, z, z, z), (z, z, z, z, o, z)]
    assert Q.images == [(i, z), (z, i)]
    with pytest.raises(MissingSqrtMinusOne):
        formed_iso_Q("I", QQ, (3, 3), (1,))


def test_Q_III_3_on_31():
    fld = GF(17)
    Q = formed_iso_Q("III_3", fld, (3, 1))
    s = fld.sqrt(fld.coerce(-1) * fld.inv(fld.coerce(2)))
    # sqrt(-1/2)(e2 + f1) -> e1 and sqrt(-1/2)(e2 - f1) -> f1
    assert Q.lifts == [(0, 1, 0, 1), (0, 1, 0, fld.coerce(-1))]
    assert [tuple(fld.norm(s * c) for c in v) for v in Q.images] == [(1, 0), (0, 1)]
    assert Q.is_form_compatible() and Q.intertwines()
    for bad in (GF(5), GF(13), QQi):
        with pytest.raises(MissingSqrtMinusOne):
            formed_iso_Q("III_3", bad, (3, 1))


def test_Q_II_1_at_zero_is_III_1():
    fld = GF(17)
    a = formed_iso_Q("II_1", fld, (3, 3), (1, 0))
    b = formed_iso_Q("III_1", fld, (3, 3))
    assert a.matrix == b.matrix and a.W == b.W and a.lifts == b.lifts


def test_Q_bad_parameters():
    with pytest.raises(BadParameters):
        formed_iso_Q("II_1", GF(17), (3, 3), (1, 1))
    with pytest.raises(BadParameters):
        formed_iso_Q("II_1", GF(17), (4, 4), (0, 0))
    with pytest.raises(BadParameters):
        formed_iso_Q("III_3", GF(17), (5, 1))
    with pytest.raises(BadParameters):
        formed_iso_Q("I", GF(17), (3, 3), (2,))
    with pytest.raises(BadParameters):
        formed_iso_Q("V", GF(17), (3, 3))


def test_literal_III_4_is_not_form_compatible():
    Q = formed_iso_Q("III_4", GF(17), (5, 1), literal=True)
    assert Q.intertwines()
    assert not Q.is_form_compatible()


def test_classify_case():
    cases = {
        "D m=3 cups=1: 1-2, 3*": ("I", 1),
        "D m=4 cups=2: 1-2*, 3-4": ("II", None),
        "D m=3 cups=1: 1, 2-3": ("III_1", None),
        "D m=3 cups=1: 1*, 2-3": ("III_2", None),
        "D m=4 cups=1: 1, 2, 3-4": ("III_3", None),
        "D m=3 cups=0: 1, 2, 3": ("III_4", None),
        SPLIT: ("I", 1),
    }
    for text, (kind, t) in cases.items():
        tag = classify_case(parse_diagram(text))
        assert (tag.kind, tag.t) == (kind, t), text
    assert classify_case(parse_diagram("D m=3 cups=0: 1, 2, 3")).nu == (3, 1)
    with pytest.raises(TooSmall):
        classify_case(parse_diagram("D m=2 cups=1: 1-2"))


def test_every_diagram_has_a_case():
    for n, k in [(6, 3), (6, 1), (8, 4), (8, 3), (8, 1), (10, 5), (10, 3)]:
        for d in enumerate_typeD(n, k):
            tag = classify_case(d)
            if tag.kind == "I":
                b, c = split_caseI(d)
                assert len(b.cups) + len(c.cups) == len(d.cups)
            else:
                r = reduced_diagram(d, tag)
                assert r.m == d.m - 1
                assert len(r.cups) == len(d.cups) - (tag.kind == "II")


def test_projection_and_embedding():
    fld = QQ
    P = projection_P((2, 2), (1, 1), fld)
    assert P == Matrix.of(fld, [[1, 0, 0, 0], [0, 0, 1, 0]])
    E = embedding_P((1, 1), (2, 2), fld)
    assert P @ E == Matrix.identity(fld, 2)
    P = projection_P((5, 5), (2, 2), fld)
    assert P @ embedding_P((2, 2), (5, 5), fld) == Matrix.identity(fld, 4)
    with pytest.raises(ShapeMismatch):
        projection_P((2, 2), (3, 1), fld)
    with pytest.raises(ShapeMismatch):
        embedding_P((3, 1), (2, 2), fld)


def test_quotient_psi():
    fld = QQ
    g = gram_matrix((2, 2), fld)
    W = Subspace.span(fld, 4, [(1, 0, 0, 0)])
    q = quotient_psi(W, g)
    assert q.dim == 2
    # classes of e_2, f_1, f_2 span; f_2 pairs with e_1 so it is not in W^perp
    assert q.perp == Subspace.span(fld, 4, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)])
    assert q.lift(Subspace.full(fld, 2)) == q.perp
    with pytest.raises(NotContained):
        quotient_psi(Subspace.span(fld, 4, [(1, 0, 0, 1)]), g)


def test_induced_nilpotent_matches_nu():
    fld = QQ
    W = Subspace.span(fld, 6, [(1, 0, 0, 0, 0, 0)])
    xbar = induced_nilpotent(W, (3, 3))
    assert xbar.power(2).is_zero() and not xbar.is_zero()
    assert xbar.rank() == 2


def test_split_of_cup_ray_cup_diagram():
    d = parse_diagram(SPLIT)
    b, c = split_caseI(d)
    assert b == parse_diagram("D m=2 cups=1: 1-2")
    assert c == parse_diagram("D m=3 cups=1: 1*, 2-3*")
    assert len(b.cups) + len(c.cups) == len(d.cups)
    with pytest.raises(WrongCase):
        split_caseI(parse_diagram("D m=3 cups=1: 1, 2-3"))


def test_pi_ab_and_omega_on_split_family():
    fld = GF(5)
    d = parse_diagram(SPLIT)
    b, c = split_caseI(d)
    Q = formed_iso_Q(classify_case(d), fld, exact=False)
    for p in all_parameters(d, fld):
        fl = build_flag(d, p, fld)
        assert in_component(b, pi_ab(d, fl))
        F2 = omega_map(Q, fl)
        assert in_component(c, F2)
        assert is_x_stable(F2, standard_nilpotent((3, 3), fld))


def test_omega_needs_W():
    fld = GF(17)
    Q = formed_iso_Q("III_1", fld, (3, 3))
    d = parse_diagram("D m=3 cups=1: 1*, 2-3")
    fl = build_flag(d, [(1, 0)], fld)
    with pytest.raises(NotContained):
        omega_map(Q, fl)


def _flat_family(fld, a, b):
    x = standard_nilpotent((2, 2), fld)
    g = gram_matrix((2, 2), fld)
    v1 = x.vector({("e", 1): a, ("f", 1): b})
    return Flag.from_partial([Subspace.zero(fld, 4), Subspace.span(fld, 4, [v1]), x.span(es=1, fs=1)], g)


def _chain_family(fld, a, b):
    x = standard_nilpotent((2, 2), fld)
    g = gram_matrix((2, 2), fld)
    v1 = x.vector({("e", 1): a, ("f", 1): b})
    v2 = x.vector({("e", 2): a, ("f", 2): b})
    spaces = [Subspace.zero(fld, 4), Subspace.span(fld, 4, [v1]), Subspace.span(fld, 4, [v1, v2])]
    return Flag.from_partial(spaces, g)


def test_build_flag_base_families():
    fld = GF(5)
    marked, unmarked = parse_diagram("D m=2 cups=1: 1-2*"), parse_diagram("D m=2 cups=1: 1-2")
    for a, b in projective_line(fld):
        assert build_flag(marked, [(a, b)], fld) == _chain_family(fld, a, b)
        assert build_flag(unmarked, [(a, b)], fld) == _flat_family(fld, a, b)
    # parameters are projective
    assert build_flag(marked, [(2, 4)], fld) == build_flag(marked, [(1, 2)], fld)


def test_build_flag_split_family():
    fld = GF(5)
    d = parse_diagram(SPLIT)
    x = standard_nilpotent((5, 5), fld)
    for lam, mu in projective_line(fld):
        fl = build_flag(d, [(0, 1), (lam, mu)], fld)
        assert fl[1] == x.span(fs=1)
        assert fl[2] == x.span(es=1, fs=1)
        assert fl[5] == x.span(es=1, fs=2, extra=[{("e", 2): lam, ("f", 3): mu}, {("e", 3): lam, ("f", 4): mu}])


def test_build_flag_errors():
    fld = GF(5)
    d = parse_diagram(SPLIT)
    with pytest.raises(ParamCountMismatch):
        build_flag(d, [(1, 0)], fld)
    with pytest.raises(BadParameters):
        build_flag(d, [(1, 0), (0, 0)], fld)


def test_verify_rejects_other_component():
    fld = GF(5)
    marked = parse_diagram("D m=2 cups=1: 1-2*")
    with pytest.raises(NotInComponent):
        verify_bundle_point(marked, _flat_family(fld, 1, 2))


def test_case_II_charts_agree():
    fld = GF(5)
    d = parse_diagram("D m=4 cups=2: 1-4, 2-3")
    assert classify_case(d).kind == "II"
    seen = 0
    for g in range(1, 5):
        for p2 in projective_line(fld):
            fl = build_flag(d, [(1, g), p2], fld)
            rep = verify_bundle_point(d, fl)
            names = [c["name"] for c in rep.checks]
            assert "chart II_1 round trip" in names and "chart II_2 round trip" in names
            assert rep.ok
            seen += 1
    assert seen == 24


def test_verify_report_json():
    fld = GF(5)
    d = parse_diagram(SPLIT)
    rep = verify_bundle_point(d, build_flag(d, [(0, 1), (1, 3)], fld))
    out = rep.to_json(fld)
    assert out["case"] == "I" and out["ok"]
    assert out["params"] == [["0", "1"], ["1", "3"]]
    assert len(out["children"]) == 2


def _shapes_over(q):
    # unequal blocks need odd characteristic, and (5,1) needs sqrt(-1) for its rays
    shapes = [(2, 1), (4, 2), (6, 3)]
    if q % 2:
        shapes.append((4, 1))
        if q % 4 == 1:
            shapes.append((6, 1))
    return shapes


@pytest.mark.parametrize("q", [2, 3, 5])
def test_injective_with_full_fibre_counts(q):
    fld = GF(q)
    for n, k in _shapes_over(q):
        for d in enumerate_typeD(n, k):
            flags = set()
            for p in all_parameters(d, fld):
                fl = build_flag(d, p, fld)
                assert in_component(d, fl)
                flags.add(fl)
            assert len(flags) == (q + 1) ** len(d.cups)


def test_shapes_without_rational_points():
    d = parse_diagram("D m=3 cups=0: 1, 2, 3")
    with pytest.raises(MissingSqrtMinusOne):
        build_flag(d, [], GF(3))
    # no F_3-point exists at all, so there is nothing to parametrise
    assert decompose(EnumerationTask((5, 1), 3, True)).total == 0
    with pytest.raises(ValidationError):
        in_component(parse_diagram("D m=2 cups=0: 1, 2"), build_flag(parse_diagram("D m=2 cups=0: 1, 2"), [], GF(2)))


def test_round_trip_over_F5():
    fld = GF(5)
    for n, k in [(4, 2), (6, 3), (6, 1), (8, 4), (8, 3)]:
        for d in enumerate_typeD(n, k):
            for p in itertools.islice(all_parameters(d, fld), 40):
                rep = verify_bundle_point(d, build_flag(d, p, fld))
                assert rep.ok
                assert [tuple(x) for x in rep.params] == [tuple(x) for x in p]


def test_omega_inverse_reassembles():
    fld = GF(5)
    d = parse_diagram("D m=3 cups=1: 1, 2-3")
    Q = formed_iso_Q("III_1", fld, (3, 3), exact=False)
    for p in all_parameters(d, fld):
        fl = build_flag(d, p, fld)
        low = omega_map(Q, fl)
        assert is_isotropic_flag(low, gram_matrix((2, 2), fld))
        assert omega_inverse(Q, [Subspace.zero(fld, 6), Q.W], low) == fl
