"""Iterated projective-line bundle structure on type D components.

Every component is built recursively from the first vertex of its diagram.
Depending on what sits there, the flag is glued from two smaller components
(Case I), fibred over a projective line (Case II), or identified with a
single smaller component (Case III).  The identifications go through
quotients ``W^perp / W`` equipped with explicit form-preserving maps ``Q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .diagram import MarkedCupDiagram, check_typeD_partition, typeD_shape
from .errors import (
    BadParameters,
    MissingSqrtMinusOne,
    NotContained,
    NotInComponent,
    ParamCountMismatch,
    ShapeMismatch,
    TooSmall,
    WrongCase,
)
from .flag import (
    Flag,
    GramForm,
    Nilpotent,
    gram_matrix,
    is_isotropic_flag,
    is_x_stable,
    marked_relations,
    ray_space,
    ray_twist,
    standard_nilpotent,
)
from .linalg import Matrix, Subspace, solve_linear
from .scalar import Field

# ---------------------------------------------------------------------------
# Formed spaces and basic maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormedSpace:
    lam: tuple[int, int]
    gram: GramForm

    @property
    def dim(self) -> int:
        return self.lam[0] + self.lam[1]

    @property
    def field(self) -> Field:
        return self.gram.field


def formed_space(lam: Sequence[int], fld: Field) -> FormedSpace:
    lam = (int(lam[0]), int(lam[1]))
    return FormedSpace(lam, gram_matrix(lam, fld))


def basis_vector(fld: Field, lam: Sequence[int], letter: str, j: int) -> tuple:
    """``e_j`` or ``f_j`` of ``V_lam`` as a coordinate tuple."""
    a, b = lam
    v = [fld.zero] * (a + b)
    if letter == "e":
        if not 1 <= j <= a:
            raise ShapeMismatch(f"e_{j} does not exist for {tuple(lam)}")
        v[j - 1] = fld.one
    else:
        if not 1 <= j <= b:
            raise ShapeMismatch(f"f_{j} does not exist for {tuple(lam)}")
        v[a + j - 1] = fld.one
    return tuple(v)


def _combo(fld: Field, terms) -> tuple:
    """Linear combination of ``(coefficient, vector)`` pairs."""
    terms = list(terms)
    out = [fld.zero] * len(terms[0][1])
    for c, v in terms:
        out = [fld.norm(o + c * x) for o, x in zip(out, v)]
    return tuple(out)


def projection_P(lam: Sequence[int], mu: Sequence[int], fld: Field) -> Matrix:
    """Keep ``e_i`` for ``i <= mu_1`` and ``f_j`` for ``j <= mu_2``, kill the rest."""
    if mu[0] > lam[0] or mu[1] > lam[1]:
        raise ShapeMismatch(f"{tuple(mu)} does not fit inside {tuple(lam)}")
    cols = []
    for letter, count, keep in (("e", lam[0], mu[0]), ("f", lam[1], mu[1])):
        for j in range(1, count + 1):
            if j <= keep:
                cols.append(basis_vector(fld, mu, letter, j))
            else:
                cols.append((fld.zero,) * (mu[0] + mu[1]))
    return Matrix.from_columns(fld, cols, mu[0] + mu[1])


def embedding_P(mu: Sequence[int], lam: Sequence[int], fld: Field) -> Matrix:
    """Inverse of the projection on the low span: ``e_i -> e_i``, ``f_j -> f_j``."""
    if mu[0] > lam[0] or mu[1] > lam[1]:
        raise ShapeMismatch(f"{tuple(mu)} does not fit inside {tuple(lam)}")
    cols = [basis_vector(fld, lam, "e", j) for j in range(1, mu[0] + 1)]
    cols += [basis_vector(fld, lam, "f", j) for j in range(1, mu[1] + 1)]
    return Matrix.from_columns(fld, cols, lam[0] + lam[1])


def map_subspace(m: Matrix, w: Subspace) -> Subspace:
    return Subspace.span(m.field, m.nrows, [m.apply(v) for v in w.basis])


@dataclass
class Quotient:
    """``W^perp / W`` with coset representatives ``lifts``."""

    W: Subspace
    perp: Subspace
    lifts: list

    @property
    def dim(self) -> int:
        return len(self.lifts)

    def coords(self, v: Sequence) -> tuple:
        return _split_coords(self.W, self.lifts, v)

    def project(self, F: Subspace) -> Subspace:
        fld = F.field
        if not self.W.issubset(F):
            raise NotContained("W is not contained in the subspace")
        return Subspace.span(fld, self.dim, [self.coords(v) for v in F.basis])

    def lift(self, U: Subspace) -> Subspace:
        fld = U.field
        vecs = [_combo(fld, zip(u, self.lifts)) for u in U.basis] if self.lifts else []
        return Subspace.span(fld, self.W.ambient, list(self.W.basis) + vecs)


def _split_coords(W: Subspace, lifts: list, v: Sequence) -> tuple:
    """Coefficients of ``v`` on ``lifts`` modulo ``W``."""
    fld = W.field
    n = W.ambient
    cols = list(W.basis) + list(lifts)
    m = Matrix.from_columns(fld, cols, n)
    sol = solve_linear(m, list(v))
    if not sol:
        raise NotContained("vector is not in W^perp")
    return tuple(sol.particular[len(W.basis):])


def quotient_psi(W: Subspace, gram: GramForm) -> Quotient:
    """The quotient map ``W^perp -> W^perp / W``.

    Coset representatives are the reduced basis vectors of ``W^perp`` that
    extend a basis of ``W``, taken in order.
    """
    perp = gram.perp(W)
    if not W.issubset(perp):
        raise NotContained("W is not isotropic")
    acc = W
    lifts = []
    for b in perp.basis:
        nxt = acc + Subspace.span(W.field, W.ambient, [b])
        if nxt.dim > acc.dim:
            lifts.append(tuple(b))
            acc = nxt
    return Quotient(W, perp, lifts)


def induced_nilpotent(W: Subspace, lam: Sequence[int]) -> Matrix:
    """Matrix of ``x`` on ``W^perp / W`` in the representatives of ``quotient_psi``."""
    fld = W.field
    x = standard_nilpotent(lam, fld)
    q = quotient_psi(W, gram_matrix(lam, fld))
    cols = [q.coords(x.matrix.apply(v)) for v in q.lifts]
    return Matrix.from_columns(fld, cols, q.dim)


# ---------------------------------------------------------------------------
# Case classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CaseTag:
    kind: str  # "I", "II", "III_1" .. "III_4"
    lam: tuple[int, int]
    nu: tuple[int, int]
    t: int | None = None

    def to_json(self) -> dict:
        out = {"case": self.kind, "lambda": list(self.lam), "nu": list(self.nu)}
        if self.t is not None:
            out["t"] = self.t
        return out


def shape_of(adot: MarkedCupDiagram) -> tuple[int, int]:
    n, k = typeD_shape(adot)
    return (n - k, k)


def classify_case(adot: MarkedCupDiagram) -> CaseTag:
    m = adot.m
    if m < 3:
        raise TooSmall(f"{m} vertices: handled by the base cases")
    lam = shape_of(adot)
    n = 2 * m
    k = lam[1]
    for i, j, mk in adot.cups:
        if i == 1:
            if not mk and j < m:
                t = j // 2
                return CaseTag("I", lam, (lam[0] - 2 * t, k - 2 * t), t)
            return CaseTag("II", lam, (m - 1, m - 1))
    marked = adot.ray_marked(1)
    rest_rays = len(adot.rays) - 1
    if rest_rays == 0:
        return CaseTag("III_2" if marked else "III_1", lam, (m - 1, m - 1))
    if rest_rays == 1:
        return CaseTag("III_3", lam, (m - 1, m - 1))
    return CaseTag("III_4", lam, (n - k - 2, k))


def _shift(adot_cups, adot_rays, by: int, m: int) -> MarkedCupDiagram:
    return MarkedCupDiagram(
        m,
        tuple((i - by, j - by, mk) for i, j, mk in adot_cups),
        tuple((r - by, mk) for r, mk in adot_rays),
    )


def split_caseI(adot: MarkedCupDiagram) -> tuple[MarkedCupDiagram, MarkedCupDiagram]:
    tag = classify_case(adot)
    if tag.kind != "I":
        raise WrongCase(f"diagram falls under case {tag.kind}, not I")
    w = 2 * tag.t
    b_cups = [c for c in adot.cups if c[1] <= w]
    c_cups = [c for c in adot.cups if c[0] > w]
    c_rays = [r for r in adot.rays if r[0] > w]
    bdot = MarkedCupDiagram(w, tuple(b_cups), ())
    cdot = _shift(c_cups, c_rays, w, adot.m - w)
    return bdot, cdot


def reduced_diagram(adot: MarkedCupDiagram, tag: CaseTag | None = None) -> MarkedCupDiagram:
    """The smaller diagram of cases II and III."""
    tag = tag or classify_case(adot)
    m = adot.m
    if tag.kind == "II":
        j, mk = next((b, mk) for a, b, mk in adot.cups if a == 1)
        cups = [c for c in adot.cups if c[0] != 1]
        # the new ray carries the opposite marker of the removed cup
        return _shift(cups, [(j, not mk)], 1, m - 1)
    if tag.kind.startswith("III"):
        rays = [r for r in adot.rays if r[0] != 1]
        if tag.kind == "III_3":
            # the form-preserving map of this case swaps the two ray classes
            rays = [(r, not mk) for r, mk in rays]
        return _shift(adot.cups, rays, 1, m - 1)
    raise WrongCase("case I splits into two diagrams; use split_caseI")


# ---------------------------------------------------------------------------
# Form-preserving isomorphisms
# ---------------------------------------------------------------------------


@dataclass
class FormedIso:
    """``Q: W^perp / W -> V_nu``, given on coset representatives.

    ``lifts[j]`` is a vector of ``W^perp`` and ``images[j]`` the coordinates
    of ``Q(lifts[j] + W)`` in ``V_nu``.
    """

    name: str
    field: Field
    lam: tuple[int, int]
    nu: tuple[int, int]
    W: Subspace
    lifts: list
    images: list
    _inverse: Matrix | None = field(default=None, repr=False)

    @property
    def matrix(self) -> Matrix:
        return Matrix.from_columns(self.field, self.images, self.nu[0] + self.nu[1])

    @property
    def lift_matrix(self) -> Matrix:
        return Matrix.from_columns(self.field, self.lifts, self.lam[0] + self.lam[1])

    def source(self) -> FormedSpace:
        return formed_space(self.lam, self.field)

    def target(self) -> FormedSpace:
        return formed_space(self.nu, self.field)

    def apply(self, F: Subspace) -> Subspace:
        """``Q(F / W)`` for ``W <= F <= W^perp``."""
        if not self.W.issubset(F):
            raise NotContained("W is not contained in the subspace")
        vecs = []
        for v in F.basis:
            c = _split_coords(self.W, self.lifts, v)
            vecs.append(_combo(self.field, zip(c, self.images)) if c else ())
        return Subspace.span(self.field, self.nu[0] + self.nu[1], [v for v in vecs if v])

    def pull(self, U: Subspace) -> Subspace:
        """``psi^{-1}(Q^{-1}(U))``."""
        if self._inverse is None:
            self._inverse = self.matrix.inverse()
        vecs = list(self.W.basis)
        for u in U.basis:
            c = self._inverse.apply(u)
            vecs.append(_combo(self.field, zip(c, self.lifts)))
        return Subspace.span(self.field, self.lam[0] + self.lam[1], vecs)

    def induced_gram(self) -> Matrix:
        L = self.lift_matrix
        return L.T @ gram_matrix(self.lam, self.field).matrix @ L

    def induced_nilpotent(self) -> Matrix:
        x = standard_nilpotent(self.lam, self.field).matrix
        cols = [_split_coords(self.W, self.lifts, x.apply(v)) for v in self.lifts]
        return Matrix.from_columns(self.field, cols, len(self.lifts))

    def is_form_compatible(self) -> bool:
        Q = self.matrix
        return Q.T @ gram_matrix(self.nu, self.field).matrix @ Q == self.induced_gram()

    def intertwines(self) -> bool:
        Q = self.matrix
        x_nu = standard_nilpotent(self.nu, self.field).matrix
        return Q @ self.induced_nilpotent() == x_nu @ Q


def _root(fld: Field, value, what: str):
    r = fld.sqrt(fld.coerce(value))
    if r is None:
        raise MissingSqrtMinusOne(f"{fld.name} has no square root of {what}")
    return r


def _ray_coefficient(fld: Field, lam: tuple[int, int]):
    n = lam[0] + lam[1]
    return ray_twist(fld, n, lam[1])


def _formed_iso_Q(
    tag: CaseTag | str,
    fld: Field,
    lam: Sequence[int] | None = None,
    params: Sequence | None = None,
    exact: bool = True,
    literal: bool = False,
) -> FormedIso:
    """Build the isomorphism for a case.

    ``tag`` is a :class:`CaseTag` or one of ``"I"``, ``"II_1"``, ``"II_2"``,
    ``"III_1"`` .. ``"III_4"`` together with ``lam`` (and ``t`` via
    ``params`` for case I, ``(c, d)`` for case II).

    With ``exact=False`` common scalar factors are dropped; the map then
    agrees with the exact one on subspaces and needs no square roots except
    where the relative scale of ``e`` and ``f`` matters.

    ``literal=True`` gives the textbook variants of ``II_2`` and ``III_4``.
    The first sends the reduced ray to the wrong marker class, the second is
    not form-compatible; both exist for comparison only.
    """
    if isinstance(tag, CaseTag):
        kind, lam = tag.kind, tag.lam
        if kind == "I":
            params = (tag.t,)
    else:
        kind = tag
        if lam is None:
            raise BadParameters("a shape is needed")
        lam = (int(lam[0]), int(lam[1]))
    n = lam[0] + lam[1]
    check_typeD_partition(n, lam[1])
    one = fld.one

    def e(j, shape=lam):
        return basis_vector(fld, shape, "e", j)

    def f(j, shape=lam):
        return basis_vector(fld, shape, "f", j)

    def scale(s, v):
        return tuple(fld.norm(s * x) for x in v)

    if kind == "I":
        (t,) = params
        t = int(t)
        nu = (lam[0] - 2 * t, lam[1] - 2 * t)
        if t < 1 or nu[1] < 1 or 4 * t >= n:
            raise BadParameters(f"t = {t} is not valid for {lam}")
        s = _root(fld, -1, "-1") if (t % 2 and exact) else one
        W = Subspace.span(fld, n, [e(i) for i in range(1, t + 1)] + [f(i) for i in range(1, t + 1)])
        lifts = [e(t + i) for i in range(1, nu[0] + 1)] + [f(t + i) for i in range(1, nu[1] + 1)]
        images = [scale(s, e(i, nu)) for i in range(1, nu[0] + 1)]
        images += [scale(s, f(i, nu)) for i in range(1, nu[1] + 1)]
        return FormedIso(f"I(t={t})", fld, lam, nu, W, lifts, images)

    if kind in ("II", "II_1", "II_2", "III_1", "III_2"):
        if lam[0] != lam[1]:
            raise BadParameters(f"{kind} needs an equal-block shape, got {lam}")
        m = lam[0]
        nu = (m - 1, m - 1)
        if kind == "III_1":
            c, d = one, fld.zero
        elif kind == "III_2":
            c, d = fld.zero, one
        else:
            if params is None or len(params) != 2:
                raise BadParameters(f"{kind} needs the line coordinates (c, d)")
            c, d = fld.coerce(params[0]), fld.coerce(params[1])
            if kind == "II":
                kind = "II_1" if c else "II_2"
        if not c and not d:
            raise BadParameters("(c, d) must not both vanish")
        W = Subspace.span(fld, n, [_combo(fld, [(c, e(1)), (d, f(1))])])
        if kind in ("II_1", "III_1"):
            if not c:
                raise BadParameters(f"{kind} needs c != 0")
            if kind == "II_1" and d and m % 2:
                raise BadParameters("no form-preserving map for odd m with c d != 0")
            r = fld.inv(c) * d
            s = fld.inv(_root(fld, -1, "-1")) if exact else one
            lifts = [_combo(fld, [(one, e(i + 1)), (r, f(i + 1))]) for i in range(1, m)]
            lifts += [f(i) for i in range(1, m)]
            images = [scale(s, e(i, nu)) for i in range(1, m)] + [scale(s, f(i, nu)) for i in range(1, m)]
        else:
            if not d:
                raise BadParameters(f"{kind} needs d != 0")
            if kind == "II_2" and c and m % 2:
                raise BadParameters("no form-preserving map for odd m with c d != 0")
            r = fld.inv(d) * c
            lifts = [_combo(fld, [(r, e(i + 1)), (one, f(i + 1))]) for i in range(1, m)]
            lifts += [e(i) for i in range(1, m)]
            images = [f(i, nu) for i in range(1, m)] + [e(i, nu) for i in range(1, m)]
            if kind == "II_2" and not literal:
                # swapping e and f on V_nu reverses orientation (m - 1 is odd),
                # which keeps the new ray marked as in the first chart
                images = images[m - 1:] + images[: m - 1]
        return FormedIso(kind, fld, lam, nu, W, lifts, images)

    if kind in ("III_3", "III_4"):
        a, k = lam
        if a <= k:
            raise BadParameters(f"{kind} needs unequal blocks, got {lam}")
        nu = (a - 2, k)
        W = Subspace.span(fld, n, [e(1)])
        if kind == "III_3":
            if a - 2 != k:
                raise BadParameters(f"III_3 needs n-k-2 = k, got {lam}")
            if fld.characteristic == 2:
                raise BadParameters("III_3 is undefined in characteristic 2")
            s = fld.inv(_root(fld, fld.coerce(-1) * fld.inv(fld.coerce(2)), "-1/2")) if exact else one
            minus = fld.coerce(-1)
            lifts = [_combo(fld, [(one, e(i + 1)), (one, f(i))]) for i in range(1, k + 1)]
            lifts += [_combo(fld, [(one, e(i + 1)), (minus, f(i))]) for i in range(1, k + 1)]
            images = [scale(s, e(i, nu)) for i in range(1, k + 1)] + [scale(s, f(i, nu)) for i in range(1, k + 1)]
            return FormedIso(kind, fld, lam, nu, W, lifts, images)
        if a - 2 <= k:
            raise BadParameters(f"III_4 needs n-k-2 > k, got {lam}")
        if literal:
            s = fld.inv(_root(fld, -1, "-1"))
            se, sf = s, s
        else:
            # relative factor on e chosen so rightmost-ray classes are preserved
            se = fld.norm(_ray_coefficient(fld, nu) * fld.inv(_ray_coefficient(fld, lam)))
            sf = one
        lifts = [e(i + 1) for i in range(1, a - 1)] + [f(i) for i in range(1, k + 1)]
        images = [scale(se, e(i, nu)) for i in range(1, a - 1)] + [scale(sf, f(i, nu)) for i in range(1, k + 1)]
        return FormedIso(kind + ("(literal)" if literal else ""), fld, lam, nu, W, lifts, images)

    raise BadParameters(f"unknown case {kind!r}")


def formed_iso_Q(
    tag: CaseTag | str,
    fld: Field,
    lam: Sequence[int] | None = None,
    params: Sequence | None = None,
    exact: bool = True,
    literal: bool = False,
) -> FormedIso:
    q = _formed_iso_Q(tag, fld, lam, params, exact, literal)
    if exact and not literal and not q.is_form_compatible():
        raise BadParameters(f"{q.name} on {q.lam} does not preserve the forms")
    return q


formed_iso_Q.__doc__ = _formed_iso_Q.__doc__


def omega_map(Q: FormedIso, fl: Flag) -> Flag:
    """``F''_i = Q(F_{l+i} / W)`` for the lower half, completed by isotropy."""
    ell = Q.W.dim
    if fl[ell] != Q.W:
        raise NotContained(f"F_{ell} differs from W")
    m_nu = (Q.nu[0] + Q.nu[1]) // 2
    lower = [Subspace.zero(Q.field, Q.nu[0] + Q.nu[1])]
    for i in range(1, m_nu + 1):
        lower.append(Q.apply(fl[ell + i]))
    return Flag.from_partial(lower, gram_matrix(Q.nu, Q.field))


def omega_inverse(Q: FormedIso, head: Sequence[Subspace], fl2: Flag) -> Flag:
    """Glue ``F_0..F_l`` with ``psi^{-1} Q^{-1}`` of the lower half of ``fl2``."""
    lower = list(head)
    ell = len(lower) - 1
    m = (Q.lam[0] + Q.lam[1]) // 2
    for i in range(1, m - ell + 1):
        lower.append(Q.pull(fl2[i]))
    return Flag.from_partial(lower, gram_matrix(Q.lam, Q.field))


def pi_ab(adot: MarkedCupDiagram, fl: Flag) -> Flag:
    """Project the first ``2t`` spaces to ``V_(2t,2t)`` and complete by isotropy."""
    tag = classify_case(adot)
    if tag.kind != "I":
        raise WrongCase(f"diagram falls under case {tag.kind}, not I")
    w = 2 * tag.t
    mu = (w, w)
    P = projection_P(tag.lam, mu, fl.field)
    lower = [map_subspace(P, fl[i]) for i in range(0, w + 1)]
    return Flag.from_partial(lower, gram_matrix(mu, fl.field))


# ---------------------------------------------------------------------------
# Building flags from parameters
# ---------------------------------------------------------------------------


def projective_line(fld: Field) -> list[tuple]:
    """Normalised points ``[1:g]`` followed by ``[0:1]``."""
    return [(fld.one, g) for g in fld.elements()] + [(fld.zero, fld.one)]


def normalize_point(fld: Field, p: Sequence) -> tuple:
    if len(p) != 2:
        raise BadParameters(f"projective point needs two coordinates, got {p!r}")
    a, b = fld.coerce(p[0]), fld.coerce(p[1])
    if a:
        return (fld.one, fld.norm(b * fld.inv(a)))
    if b:
        return (fld.zero, fld.one)
    raise BadParameters("[0:0] is not a projective point")


def _x(lam, fld) -> Nilpotent:
    return standard_nilpotent(lam, fld)


def _base_flag(adot: MarkedCupDiagram, params: list, fld: Field) -> Flag:
    lam = shape_of(adot)
    n = 2 * adot.m
    x = _x(lam, fld)
    gram = gram_matrix(lam, fld)
    zero = Subspace.zero(fld, n)
    if adot.m == 1:
        return Flag.from_partial([zero, ray_space(x, adot, 1)], gram)
    if lam == (2, 2):
        a, b = params[0]
        v1 = x.vector({("e", 1): a, ("f", 1): b})
        v2 = x.vector({("e", 2): a, ("f", 2): b})
        F1 = Subspace.span(fld, n, [v1])
        F2 = Subspace.span(fld, n, [v1, v2]) if adot.cups[0][2] else x.span(es=1, fs=1)
        return Flag.from_partial([zero, F1, F2], gram)
    # (3,1): two rays, both determined
    return Flag.from_partial([zero, ray_space(x, adot, 1), ray_space(x, adot, 2)], gram)


def build_flag(adot: MarkedCupDiagram, params: Sequence, fld: Field) -> Flag:
    """The flag of the component of ``adot`` with one projective point per cup.

    Parameters are matched to cups in increasing order of left endpoint.
    """
    if len(params) != len(adot.cups):
        raise ParamCountMismatch(f"{len(adot.cups)} cups but {len(params)} parameters")
    pts = [normalize_point(fld, p) for p in params]
    return _build(adot, pts, fld)


def _build(adot: MarkedCupDiagram, pts: list, fld: Field) -> Flag:
    if adot.m <= 2:
        return _base_flag(adot, pts, fld)
    tag = classify_case(adot)
    lam = tag.lam
    if tag.kind == "I":
        bdot, cdot = split_caseI(adot)
        t = tag.t
        F1 = _build(bdot, pts[:t], fld)
        F2 = _build(cdot, pts[t:], fld)
        emb = embedding_P((2 * t, 2 * t), lam, fld)
        head = [map_subspace(emb, F1[i]) for i in range(0, 2 * t + 1)]
        Q = formed_iso_Q(tag, fld, exact=False)
        return omega_inverse(Q, head, F2)
    if tag.kind == "II":
        a, b = pts[0]
        Q = formed_iso_Q("II", fld, lam, (a, b), exact=False)
        F2 = _build(reduced_diagram(adot, tag), pts[1:], fld)
        head = [Subspace.zero(fld, 2 * adot.m), Q.W]
        return omega_inverse(Q, head, F2)
    Q = formed_iso_Q(tag, fld, exact=False)
    F2 = _build(reduced_diagram(adot, tag), pts, fld)
    return omega_inverse(Q, [Subspace.zero(fld, 2 * adot.m), Q.W], F2)


def all_parameters(adot: MarkedCupDiagram, fld: Field):
    line = projective_line(fld)
    return product(line, repeat=len(adot.cups))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class BundleReport:
    case: str
    branch: str | None = None
    checks: list = field(default_factory=list)
    params: list = field(default_factory=list)
    children: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["holds"] for c in self.checks) and all(ch.ok for ch in self.children)

    def __bool__(self):
        return self.ok

    def to_json(self, fld: Field | None = None) -> dict:
        def fmt(p):
            if fld is None:
                return [str(p[0]), str(p[1])]
            return [fld.format(p[0]), fld.format(p[1])]

        out = {
            "case": self.case,
            "ok": self.ok,
            "checks": self.checks,
            "params": [fmt(p) for p in self.params],
            "children": [c.to_json(fld) for c in self.children],
        }
        if self.branch:
            out["branch"] = self.branch
        return out


def in_component(adot: MarkedCupDiagram, fl: Flag) -> bool:
    lam = shape_of(adot)
    fld = fl.field
    if fl.ambient != lam[0] + lam[1]:
        return False
    x = _x(lam, fld)
    gram = gram_matrix(lam, fld)
    return is_x_stable(fl, x) and is_isotropic_flag(fl, gram) and bool(marked_relations(fl, x, adot, gram))


def verify_bundle_point(adot: MarkedCupDiagram, fl: Flag) -> BundleReport:
    """Take ``fl`` apart through the case decomposition and put it back.

    Every intermediate flag must lie in its smaller component and every
    reconstruction must return the original flag exactly.
    """
    if not in_component(adot, fl):
        raise NotInComponent(f"flag is not in the component of {adot}")
    return _verify(adot, fl)


def _check(rep: BundleReport, name: str, holds: bool):
    rep.checks.append({"name": name, "holds": bool(holds)})


def _verify(adot: MarkedCupDiagram, fl: Flag) -> BundleReport:
    fld = fl.field
    if adot.m <= 2:
        rep = BundleReport("base")
        if adot.cups:
            v = fl[1].basis[0]
            a, b = v[0], v[2]
            rep.params.append(normalize_point(fld, (a, b)))
        _check(rep, "in component", in_component(adot, fl))
        _check(rep, "rebuild", _base_flag(adot, rep.params, fld) == fl)
        return rep
    tag = classify_case(adot)
    lam = tag.lam
    rep = BundleReport(tag.kind)
    if tag.kind == "I":
        bdot, cdot = split_caseI(adot)
        t = tag.t
        Q = formed_iso_Q(tag, fld, exact=False)
        _check(rep, "F_2t = W", fl[2 * t] == Q.W)
        F1 = pi_ab(adot, fl)
        F2 = omega_map(Q, fl)
        _check(rep, "projection lands in first factor", in_component(bdot, F1))
        _check(rep, "quotient lands in second factor", in_component(cdot, F2))
        sub1, sub2 = _verify(bdot, F1), _verify(cdot, F2)
        rep.children += [sub1, sub2]
        rep.params = sub1.params + sub2.params
        emb = embedding_P((2 * t, 2 * t), lam, fld)
        head = [map_subspace(emb, F1[i]) for i in range(0, 2 * t + 1)]
        _check(rep, "glue", omega_inverse(Q, head, F2) == fl)
    elif tag.kind == "II":
        cdot = reduced_diagram(adot, tag)
        v = fl[1].basis[0]
        m = adot.m
        j, mk = next((b, mk) for a, b, mk in adot.cups if a == 1)
        rep.branch = "marked, 2t < m" if mk and j < m else ("marked, 2t = m" if mk else "unmarked, 2t = m")
        pt = normalize_point(fld, (v[0], v[m]))
        charts = ["II_1"] if not pt[1] else (["II_2"] if not pt[0] else ["II_1", "II_2"])
        for chart in charts:
            Q = formed_iso_Q(chart, fld, lam, pt, exact=False)
            F2 = omega_map(Q, fl)
            _check(rep, f"chart {chart} lands in fibre", in_component(cdot, F2))
            back = omega_inverse(Q, [Subspace.zero(fld, 2 * m), Q.W], F2)
            _check(rep, f"chart {chart} round trip", back == fl)
            if chart == charts[0]:
                sub = _verify(cdot, F2)
                rep.children.append(sub)
                rep.params = [pt] + sub.params
    else:
        cdot = reduced_diagram(adot, tag)
        Q = formed_iso_Q(tag, fld, exact=False)
        _check(rep, "F_1 = W", fl[1] == Q.W)
        F2 = omega_map(Q, fl)
        _check(rep, "image lands in smaller component", in_component(cdot, F2))
        sub = _verify(cdot, F2)
        rep.children.append(sub)
        rep.params = sub.params
        back = omega_inverse(Q, [Subspace.zero(fld, 2 * adot.m), Q.W], F2)
        _check(rep, "round trip", back == fl)
    _check(rep, "rebuild from parameters", _build(adot, rep.params, fld) == fl)
    return rep


def flag_params(adot: MarkedCupDiagram, fl: Flag) -> list:
    return verify_bundle_point(adot, fl).params


Q_VARIANTS = (
    ("I", (3, 3), (1,)),
    ("I", (5, 5), (2,)),
    ("II_1", (4, 4), (1, 2)),
    ("II_2", (4, 4), (2, 1)),
    ("III_1", (3, 3), None),
    ("III_2", (3, 3), None),
    ("III_3", (5, 3), None),
    ("III_4", (5, 1), None),
)
