"""Flags, the standard two-block nilpotent, Gram forms and component relations.

Coordinates are taken in the ordered basis ``e_1, ..., e_{n-k}, f_1, ..., f_k``
and ``x`` sends ``e_j -> e_{j-1}`` and ``f_j -> f_{j-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .diagram import CupDiagram, MarkedCupDiagram, check_typeD_partition, stats
from .errors import (
    AmbientMismatch,
    BadParity,
    IndexOutOfRange,
    InvalidShape,
    MissingSqrtMinusOne,
    SizeMismatch,
    ValidationError,
)
from .linalg import Matrix, Subspace, apply_to_subspace, orth_complement, preimage
from .scalar import QQ, Field

# ---------------------------------------------------------------------------
# The nilpotent and coordinates
# ---------------------------------------------------------------------------


def check_shape(lam: Sequence[int]) -> tuple[int, int]:
    if len(lam) != 2:
        raise InvalidShape(f"expected a two-row partition, got {tuple(lam)}")
    a, b = int(lam[0]), int(lam[1])
    if b < 0 or a < b or a + b == 0:
        raise InvalidShape(f"({a},{b}) is not a two-row partition")
    return a, b


@dataclass(frozen=True)
class Nilpotent:
    lam: tuple[int, int]
    matrix: Matrix

    @property
    def field(self) -> Field:
        return self.matrix.field

    @property
    def n(self) -> int:
        return self.lam[0] + self.lam[1]

    @property
    def k(self) -> int:
        return self.lam[1]

    def e(self, j: int) -> int:
        """Coordinate index of ``e_j``."""
        if not 1 <= j <= self.lam[0]:
            raise IndexOutOfRange(f"e_{j} does not exist for shape {self.lam}")
        return j - 1

    def f(self, j: int) -> int:
        if not 1 <= j <= self.lam[1]:
            raise IndexOutOfRange(f"f_{j} does not exist for shape {self.lam}")
        return self.lam[0] + j - 1

    def vector(self, coeffs: dict[tuple[str, int], object]) -> tuple:
        """Vector from ``{("e", 1): c, ("f", 2): d, ...}``."""
        fld = self.field
        v = [fld.zero] * self.n
        for (letter, j), c in coeffs.items():
            idx = self.e(j) if letter == "e" else self.f(j)
            v[idx] = fld.norm(v[idx] + fld.coerce(c))
        return tuple(v)

    def span(self, es: int = 0, fs: int = 0, extra: Sequence[dict] = ()) -> Subspace:
        """``<e_1..e_es, f_1..f_fs>`` plus extra vectors."""
        vecs = [self.vector({("e", j): 1}) for j in range(1, es + 1)]
        vecs += [self.vector({("f", j): 1}) for j in range(1, fs + 1)]
        vecs += [self.vector(c) for c in extra]
        return Subspace.span(self.field, self.n, vecs)

    def pre(self, w: Subspace, s: int = 1) -> Subspace:
        """``x^{-s} W`` as ``s`` iterated preimages."""
        for _ in range(s):
            w = preimage(self.matrix, w)
        return w

    def push(self, w: Subspace, s: int = 1) -> Subspace:
        """``x^s W``."""
        for _ in range(s):
            w = apply_to_subspace(self.matrix, w)
        return w


def standard_nilpotent(lam: Sequence[int], field: Field = QQ) -> Nilpotent:
    a, b = check_shape(lam)
    n = a + b
    z, o = field.zero, field.one
    rows = [[z] * n for _ in range(n)]
    for j in range(2, a + 1):
        rows[j - 2][j - 1] = o
    for j in range(2, b + 1):
        rows[a + j - 2][a + j - 1] = o
    return Nilpotent((a, b), Matrix(field, rows, n))


# ---------------------------------------------------------------------------
# Flags
# ---------------------------------------------------------------------------


class Flag:
    """Complete flag ``F_0 < F_1 < ... < F_n``."""

    __slots__ = ("field", "ambient", "spaces")

    def __init__(self, spaces: Sequence[Subspace]):
        spaces = tuple(spaces)
        if not spaces:
            raise ValidationError("a flag needs at least F_0")
        n = spaces[0].ambient
        if len(spaces) != n + 1:
            raise ValidationError(f"expected {n + 1} spaces, got {len(spaces)}")
        for i, s in enumerate(spaces):
            if s.ambient != n:
                raise AmbientMismatch("flag spaces live in different ambients")
            if s.dim != i:
                raise ValidationError(f"dim F_{i} = {s.dim}, expected {i}")
            if i and not spaces[i - 1].issubset(s):
                raise ValidationError(f"F_{i - 1} is not contained in F_{i}")
        self.field = spaces[0].field
        self.ambient = n
        self.spaces = spaces

    def __getitem__(self, i: int) -> Subspace:
        return self.spaces[i]

    def __len__(self):
        return len(self.spaces)

    def __eq__(self, other):
        return isinstance(other, Flag) and self.spaces == other.spaces

    def __hash__(self):
        return hash(self.spaces)

    def __repr__(self):
        inner = ", ".join(repr(s) for s in self.spaces[1:-1])
        return f"Flag({inner})"

    @classmethod
    def from_vectors(cls, field: Field, vectors: Sequence[Sequence]) -> "Flag":
        """Flag whose ``F_i`` is spanned by the first ``i`` vectors."""
        n = len(vectors)
        return cls([Subspace.span(field, n, vectors[:i]) for i in range(n + 1)])

    @classmethod
    def from_partial(cls, partial: Sequence[Subspace], gram: "GramForm | None" = None) -> "Flag":
        """Complete ``F_0..F_r``.

        With a Gram form the upper half is ``F_{n-i} = F_i^perp`` (the lower
        half must reach ``n/2``).  Without one, the flag must already be
        complete.
        """
        partial = list(partial)
        n = partial[0].ambient
        if gram is None:
            return cls(partial)
        half = n // 2
        if len(partial) < half + 1:
            raise ValidationError("isotropic completion needs F_0..F_{n/2}")
        lower = partial[: half + 1]
        upper = [orth_complement(lower[n - i], gram.matrix) for i in range(half + 1, n + 1)]
        return cls(lower + upper)

    def to_json(self) -> list:
        return [s.to_json() for s in self.spaces[1:-1]]

    @classmethod
    def from_json(cls, field: Field, n: int, data: list) -> "Flag":
        spaces = [Subspace.zero(field, n)]
        spaces += [Subspace.of(field, n, rows) for rows in data]
        spaces.append(Subspace.full(field, n))
        return cls(spaces)


def is_x_stable(fl: Flag, x: Nilpotent) -> bool:
    if fl.ambient != x.n:
        raise AmbientMismatch(f"flag in F^{fl.ambient}, nilpotent on F^{x.n}")
    for i in range(1, fl.ambient + 1):
        if not apply_to_subspace(x.matrix, fl[i]).issubset(fl[i - 1]):
            return False
    return True


# ---------------------------------------------------------------------------
# Type A relations
# ---------------------------------------------------------------------------


def _cup_size(i: int, j: int) -> int:
    if (j - i + 1) % 2 or j <= i:
        raise BadParity(f"cup span ({i},{j}) must cover an even number of vertices")
    return (j - i + 1) // 2


def typeA_cup_rel(fl: Flag, x: Nilpotent, i: int, j: int) -> bool:
    """``F_j = x^{-(j-i+1)/2} F_{i-1}``."""
    s = _cup_size(i, j)
    if not (1 <= i and j <= fl.ambient):
        raise IndexOutOfRange(f"cup ({i},{j}) outside 1..{fl.ambient}")
    return fl[j] == x.pre(fl[i - 1], s)


def typeA_ray_rel(fl: Flag, x: Nilpotent, d: CupDiagram | MarkedCupDiagram, i: int) -> bool:
    """``F_i = F_{i-1} + <e_{i - c(i)}>``."""
    rays = d.rays if isinstance(d, CupDiagram) else d.ray_vertices
    if i not in rays:
        raise ValidationError(f"vertex {i} is not a ray")
    st = stats(d)
    idx = (i + st.rho[i]) // 2
    return fl[i] == fl[i - 1] + x.span(extra=[{("e", idx): 1}])


def in_K_a(fl: Flag, x: Nilpotent, a: CupDiagram) -> bool:
    if a.n != fl.ambient:
        raise SizeMismatch(f"diagram on {a.n} vertices, flag in F^{fl.ambient}")
    for i, j in a.cups:
        if not typeA_cup_rel(fl, x, i, j):
            return False
    return all(typeA_ray_rel(fl, x, a, r) for r in a.rays)


# ---------------------------------------------------------------------------
# Gram forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramForm:
    lam: tuple[int, int]
    matrix: Matrix

    @property
    def field(self) -> Field:
        return self.matrix.field

    def pair(self, u: Sequence, v: Sequence):
        gv = self.matrix.apply(v)
        return self.field.norm(sum((a * b for a, b in zip(u, gv)), self.field.zero))

    def perp(self, w: Subspace) -> Subspace:
        return orth_complement(w, self.matrix)


def _J(field: Field, size: int) -> list[list]:
    z = field.zero
    rows = [[z] * size for _ in range(size)]
    for r in range(1, size + 1):
        rows[r - 1][size - r] = field.coerce((-1) ** (r - 1))
    return rows


def gram_matrix(lam: Sequence[int], field: Field = QQ) -> GramForm:
    a, b = check_shape(lam)
    check_typeD_partition(a + b, b)
    n = a + b
    z = field.zero
    rows = [[z] * n for _ in range(n)]
    if a == b:
        j = _J(field, a)
        for r in range(a):
            for c in range(a):
                rows[r][a + c] = j[r][c]
                rows[a + c][r] = j[r][c]
    else:
        ja, jb = _J(field, a), _J(field, b)
        for r in range(a):
            for c in range(a):
                rows[r][c] = ja[r][c]
        for r in range(b):
            for c in range(b):
                rows[a + r][a + c] = jb[r][c]
    return GramForm((a, b), Matrix(field, rows, n))


def quadratic_value(gram: GramForm, v: Sequence):
    """``sum_{r<s} G_rs v_r v_s``; the quadratic form attached to ``G`` when
    its diagonal vanishes, needed in characteristic 2."""
    g = gram.matrix
    acc = gram.field.zero
    for r in range(g.nrows):
        if g[r, r]:
            raise ValidationError("quadratic form needs a zero diagonal in characteristic 2")
        if not v[r]:
            continue
        for s in range(r + 1, g.ncols):
            if g[r, s] and v[s]:
                acc = acc + g[r, s] * v[r] * v[s]
    return gram.field.norm(acc)


def is_isotropic_flag(fl: Flag, gram: GramForm) -> bool:
    """``F_i = F_{n-i}^perp`` for all ``i``; in characteristic 2 the
    half-dimensional space must also be singular for the quadratic form."""
    n = fl.ambient
    if gram.matrix.nrows != n:
        raise AmbientMismatch(f"gram of size {gram.matrix.nrows}, flag in F^{n}")
    for i in range(n // 2 + 1):
        if fl[n - i] != gram.perp(fl[i]):
            return False
    if gram.field.characteristic == 2:
        return all(not quadratic_value(gram, v) for v in fl[n // 2].basis)
    return True


# ---------------------------------------------------------------------------
# Type D relations
# ---------------------------------------------------------------------------


def ray_twist(field: Field, n: int, k: int):
    """Coefficient of ``e`` in the rightmost-ray vector of an unequal shape.

    ``f + e`` is isotropic only when ``(n - 2k)/2`` is odd; otherwise the
    coefficient has to square to ``-1``.
    """
    if ((n - 2 * k) // 2) % 2 == 1:
        return field.one
    t = field.sqrt_minus_one()
    if t is None:
        raise MissingSqrtMinusOne(f"shape ({n - k},{k}) needs a square root of -1 in {field.name}")
    return t


def ray_space(x: Nilpotent, adot: MarkedCupDiagram, i: int) -> Subspace:
    """The subspace ``F_i`` prescribed by the ray at vertex ``i``."""
    n, k = x.n, x.k
    marked = adot.ray_marked(i)
    if n == 2 * k:
        if i % 2 == 0:
            raise BadParity(f"ray at even vertex {i} in an equal-block shape")
        lo, hi = (i - 1) // 2, (i + 1) // 2
        return x.span(es=lo, fs=hi) if marked else x.span(es=hi, fs=lo)
    c = stats(adot).c[i]
    if i != max(adot.ray_vertices):
        return x.span(es=i - c, fs=c)
    tau = ray_twist(x.field, n, k)
    coeff = tau if marked else x.field.norm(-tau)
    return x.span(es=i - c - 1, fs=c, extra=[{("f", c + 1): 1, ("e", i - c): coeff}])


@dataclass
class MarkedReport:
    holds: bool
    features: list[dict] = field(default_factory=list)

    def __bool__(self):
        return self.holds

    def to_json(self, adot: MarkedCupDiagram | None = None) -> dict:
        out = {"holds": self.holds, "features": self.features}
        if adot is not None:
            out["diagram"] = adot.to_json()
        return out


def marked_relations(fl: Flag, x: Nilpotent, adot: MarkedCupDiagram, gram: GramForm) -> MarkedReport:
    """Check every cup and ray relation imposed by ``adot`` on ``fl``."""
    n, k = x.n, x.k
    check_typeD_partition(n, k)
    if 2 * adot.m != n or fl.ambient != n:
        raise SizeMismatch(f"diagram on {adot.m} vertices for ambient {n}")
    if len(adot.cups) != k // 2:
        raise ValidationError(f"diagram has {len(adot.cups)} cups, shape needs {k // 2}")
    feats = []
    for i, j, mk in adot.cups:
        s = _cup_size(i, j)
        if not mk:
            ok = fl[j] == x.pre(fl[i - 1], s)
        else:
            first = x.push(fl[j], s) + fl[i - 1] == fl[i]
            second = x.push(gram.perp(fl[j]), (n - 2 * j) // 2) == fl[j]
            ok = first and second
        feats.append({"kind": "cup", "marked": mk, "i": i, "j": j, "holds": ok})
    for r, mk in adot.rays:
        ok = fl[r] == ray_space(x, adot, r)
        feats.append({"kind": "ray", "marked": mk, "i": r, "holds": ok})
    feats.sort(key=lambda f: f["i"])
    return MarkedReport(all(f["holds"] for f in feats), feats)
