import itertools

import pytest

from springerfib.diagram import CupDiagram, MarkedCupDiagram, enumerate_typeA, enumerate_typeD, parse_diagram, stats
from springerfib.errors import AmbientMismatch, BadParity, InvalidShape, NotTypeDPartition
from springerfib.flag import (
    Flag,
    gram_matrix,
    in_K_a,
    is_isotropic_flag,
    is_x_stable,
    marked_relations,
    standard_nilpotent,
    typeA_cup_rel,
    typeA_ray_rel,
)
from springerfib.linalg import Matrix, Subspace, apply_to_subspace
from springerfib.oracle import EnumerationTask, enumerate_stable_flags
from springerfib.quiver import maffei_flag
from springerfib.scalar import GF, QQ


def vec(x, **coeffs):
    """``vec(x, e1=1, f2=-1)`` in the basis e_1.., f_1.."""
    return x.vector({(name[0], int(name[1:])): c for name, c in coeffs.items()})


def test_standard_nilpotent():
    assert standard_nilpotent((1, 1), QQ).matrix.is_zero()
    x = standard_nilpotent((2, 2), QQ)
    assert x.matrix.apply(vec(x, e2=1)) == vec(x, e1=1)
    assert x.matrix.apply(vec(x, f2=1)) == vec(x, f1=1)
    x = standard_nilpotent((3, 1), QQ)
    assert x.matrix.power(3).is_zero() and not x.matrix.power(2).is_zero()
    assert x.matrix.rank() == 2
    with pytest.raises(InvalidShape):
        standard_nilpotent((1, 2), QQ)


def test_x_stability(ex_fi):
    x = standard_nilpotent((2, 2), QQ)
    assert is_x_stable(maffei_flag(ex_fi).flag, x)
    e1, e2, f1, f2 = (vec(x, **{n: 1}) for n in ("e1", "e2", "f1", "f2"))
    assert not is_x_stable(Flag.from_vectors(QQ, [e2, e1, f1, f2]), x)
    assert is_x_stable(Flag.from_vectors(QQ, [e1, e2, f1, f2]), x)
    zero = standard_nilpotent((1, 1), QQ)
    assert is_x_stable(Flag.from_vectors(QQ, [[0, 1], [1, 0]]), zero)
    with pytest.raises(AmbientMismatch):
        is_x_stable(Flag.from_vectors(QQ, [[1, 0], [0, 1]]), x)


def test_typeA_relations(ex_fi):
    x = standard_nilpotent((2, 2), QQ)
    fl = maffei_flag(ex_fi).flag
    assert typeA_cup_rel(fl, x, 2, 3)
    assert fl[3] == x.pre(x.span(fs=1))
    with pytest.raises(BadParity):
        typeA_cup_rel(fl, x, 1, 3)
    a13 = parse_diagram("A n=4 k=2: 1-2, 3-4")
    for lam, mu in [(1, 0), (0, 1), (1, 1), (2, -3)]:
        v1 = vec(x, e1=lam, f1=mu)
        v3 = vec(x, e2=lam, f2=mu)
        k1 = Flag([Subspace.zero(QQ, 4), Subspace.span(QQ, 4, [v1]), x.span(es=1, fs=1),
                   x.span(es=1, fs=1, extra=[{("e", 2): lam, ("f", 2): mu}]), Subspace.full(QQ, 4)])
        assert in_K_a(k1, x, a13)
        assert Subspace.span(QQ, 4, [v1, v3]).dim == 2


def test_all_rays_forces_coordinate_flag():
    x = standard_nilpotent((4, 0), GF(2))
    a = CupDiagram(4, ())
    task = EnumerationTask((4, 0), 2)
    hits = [fl for fl in enumerate_stable_flags(task) if in_K_a(fl, x, a)]
    assert hits == [Flag([x.span(es=i) for i in range(5)])]


def test_ray_relation_equivalent_form():
    # F_i = x^{-(i - rho)/2} (x^{n-k-rho} F_n) at a ray, once the relations
    # at the vertices left of it hold; checked on every flag over F_2
    checked = 0
    for n in range(1, 6):
        for k in range(n // 2 + 1):
            task = EnumerationTask((n - k, k), 2)
            x = standard_nilpotent((n - k, k), GF(2))
            full = Subspace.full(GF(2), n)
            for a in enumerate_typeA(n, k):
                st = stats(a)
                for fl in enumerate_stable_flags(task):
                    for i in a.rays:
                        left = all(typeA_cup_rel(fl, x, p, q) for p, q in a.cups if q < i)
                        left = left and all(typeA_ray_rel(fl, x, a, r) for r in a.rays if r < i)
                        if not left:
                            continue
                        rho = st.rho[i]
                        target = x.pre(x.push(full, n - k - rho), (i - rho) // 2)
                        assert typeA_ray_rel(fl, x, a, i) == (fl[i] == target)
                        checked += 1
    assert checked > 200


def test_gram_matrices():
    assert gram_matrix((1, 1), QQ).matrix == Matrix.of(QQ, [[0, 1], [1, 0]])
    ka22 = Matrix.of(QQ, [[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]])
    assert gram_matrix((2, 2), QQ).matrix == ka22
    g31 = gram_matrix((3, 1), QQ).matrix
    assert g31 == Matrix.of(QQ, [[0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]])
    with pytest.raises(NotTypeDPartition):
        gram_matrix((2, 1), QQ)
    for lam in [(1, 1), (2, 2), (3, 1), (3, 3), (5, 3), (5, 5), (7, 1)]:
        g = gram_matrix(lam, QQ).matrix
        assert g == g.T and g.is_invertible()


def test_isotropic_examples():
    g = gram_matrix((1, 1), QQ)
    assert is_isotropic_flag(Flag.from_vectors(QQ, [[1, 0], [0, 1]]), g)
    assert not is_isotropic_flag(Flag.from_vectors(QQ, [[1, 1], [0, 1]]), g)
    x = standard_nilpotent((2, 2), QQ)
    g = gram_matrix((2, 2), QQ)
    v1, v2 = vec(x, e1=1, f1=1), vec(x, e2=1, f2=1)
    k2 = Flag([Subspace.zero(QQ, 4), Subspace.span(QQ, 4, [v1]), Subspace.span(QQ, 4, [v1, v2]),
               x.span(es=1, fs=1, extra=[{("e", 2): 1, ("f", 2): 1}]), Subspace.full(QQ, 4)])
    assert is_isotropic_flag(k2, g)


def _flat_family(x, g, lam, mu):
    fld = x.field
    v1 = x.vector({("e", 1): lam, ("f", 1): mu})
    return Flag.from_partial([Subspace.zero(fld, 4), Subspace.span(fld, 4, [v1]), x.span(es=1, fs=1)], g)


def _chain_family(x, g, lam, mu):
    fld = x.field
    v1 = x.vector({("e", 1): lam, ("f", 1): mu})
    v2 = x.vector({("e", 2): lam, ("f", 2): mu})
    return Flag.from_partial([Subspace.zero(fld, 4), Subspace.span(fld, 4, [v1]), Subspace.span(fld, 4, [v1, v2])], g)


def test_two_base_families_over_Q():
    x = standard_nilpotent((2, 2), QQ)
    g = gram_matrix((2, 2), QQ)
    marked, unmarked = parse_diagram("D m=2 cups=1: 1-2*"), parse_diagram("D m=2 cups=1: 1-2")
    for lam, mu in [(1, 0), (0, 1), (1, 1), (3, -2)]:
        k1, k2 = _flat_family(x, g, lam, mu), _chain_family(x, g, lam, mu)
        third = x.span(es=1, fs=1, extra=[{("e", 2): lam, ("f", 2): mu}])
        assert k1[3] == third == k2[3]
        assert marked_relations(k2, x, marked, g) and not marked_relations(k2, x, unmarked, g)
        assert marked_relations(k1, x, unmarked, g) and not marked_relations(k1, x, marked, g)


def test_marked_report_features():
    x = standard_nilpotent((2, 2), QQ)
    g = gram_matrix((2, 2), QQ)
    d = parse_diagram("D m=2 cups=1: 1-2*")
    rep = marked_relations(_chain_family(x, g, 1, 1), x, d, g)
    out = rep.to_json(d)
    assert out["features"] == [{"kind": "cup", "marked": True, "i": 1, "j": 2, "holds": True}]
    assert out["diagram"]["type"] == "D"


def test_marked_cup_transversality():
    # for a marked cup (i, j), x^s F_j meets F_{i-1} in a hyperplane of x^s F_j
    special = generic = 0
    for lam, q in [((3, 3), 3), ((3, 3), 5), ((5, 1), 3)]:
        task = EnumerationTask(lam, q, True)
        x = standard_nilpotent(lam, task.field)
        g = gram_matrix(lam, task.field)
        diagrams = enumerate_typeD(lam[0] + lam[1], lam[1])
        for fl in enumerate_stable_flags(task):
            for d in diagrams:
                if not marked_relations(fl, x, d, g):
                    continue
                for i, j, mk in d.cups:
                    if mk and i >= 2:
                        img = x.push(fl[j], (j - i + 1) // 2)
                        meet = (img & fl[i - 1]).dim
                        assert meet == img.dim - 1
                        if meet == i - 2:
                            special += 1
                        else:
                            generic += 1
    # the intersection has dimension i - 2 only at isolated points
    assert special and generic > special


def test_isotropic_flag_determined_by_lower_half():
    task = EnumerationTask((3, 3), 3, True)
    seen = {}
    for fl in enumerate_stable_flags(task):
        key = tuple(fl[i] for i in range(4))
        assert seen.setdefault(key, fl) == fl


def _toggle_rightmost(d):
    r = max(d.ray_vertices)
    rays = tuple((i, (not mk) if i == r else mk) for i, mk in d.rays)
    return MarkedCupDiagram(d.m, d.cups, rays)


def test_membership_sign_symmetry():
    # sign changes on the two Jordan blocks that preserve x and the form:
    # determinant one keeps every component, determinant minus one swaps the
    # marker of the rightmost ray
    swaps = 0
    for lam, q in [((2, 2), 5), ((3, 3), 5), ((3, 1), 5), ((5, 1), 5), ((5, 3), 3)]:
        task = EnumerationTask(lam, q, True)
        fld = task.field
        n = lam[0] + lam[1]
        x = standard_nilpotent(lam, fld)
        g = gram_matrix(lam, fld)
        diagrams = enumerate_typeD(n, lam[1])
        for signs in itertools.product((1, -1), repeat=2):
            diag = [signs[0]] * lam[0] + [signs[1]] * lam[1]
            s = Matrix.of(fld, [[diag[r] if r == c else 0 for c in range(n)] for r in range(n)])
            if (s.T @ g.matrix @ s) != g.matrix:
                continue
            det = signs[0] ** lam[0] * signs[1] ** lam[1]
            swaps += det == -1
            for fl in enumerate_stable_flags(task):
                moved = Flag([apply_to_subspace(s, w) for w in fl.spaces])
                for d in diagrams:
                    partner = d if det == 1 else _toggle_rightmost(d)
                    assert bool(marked_relations(fl, x, d, g)) == bool(marked_relations(moved, x, partner, g))
    assert swaps


def test_cup_marked_ray_cup_family():
    fld = GF(5)
    lam = (5, 5)
    x = standard_nilpotent(lam, fld)
    g = gram_matrix(lam, fld)
    d = parse_diagram("D m=5 cups=2: 1-2, 3*, 4-5*")
    for lam_, mu in [(1, b) for b in range(5)] + [(0, 1)]:
        F2 = x.span(es=1, fs=1)
        F3 = x.span(es=1, fs=2)
        F4 = x.span(es=1, fs=2, extra=[{("e", 2): lam_, ("f", 3): mu}])
        F5 = x.span(es=1, fs=2, extra=[{("e", 2): lam_, ("f", 3): mu}, {("e", 3): lam_, ("f", 4): mu}])
        F1 = x.span(fs=1)
        fl = Flag.from_partial([Subspace.zero(fld, 10), F1, F2, F3, F4, F5], g)
        assert is_isotropic_flag(fl, g) and is_x_stable(fl, x)
        assert marked_relations(fl, x, d, g)


def test_wrong_third_space_is_not_in_F4():
    x = standard_nilpotent((5, 5), QQ)
    printed = x.span(es=2, fs=1)
    F4 = x.span(es=1, fs=2, extra=[{("e", 2): 1, ("f", 3): 1}])
    assert not printed.issubset(F4)


def test_two_rays_then_cup_flag():
    x = standard_nilpotent((5, 3), QQ)
    g = gram_matrix((5, 3), QQ)
    d = parse_diagram("D m=4 cups=1: 1, 2, 3-4")
    F1 = x.span(es=1)
    F2 = x.span(es=1, extra=[{("f", 1): 1, ("e", 2): -1}])
    F3 = x.span(es=2, fs=1)
    F4 = x.pre(F2)
    fl = Flag.from_partial([Subspace.zero(QQ, 8), F1, F2, F3, F4], g)
    assert is_isotropic_flag(fl, g) and is_x_stable(fl, x)
    assert marked_relations(fl, x, d, g)
    assert not marked_relations(fl, x, parse_diagram("D m=4 cups=1: 1, 2*, 3-4"), g)
