"""Quiver representations for two-row shapes and the flags they determine.

A representation of shape ``(n-k, k)`` has vector spaces ``V_1..V_{n-1}`` with
``dim V_i = min(i, k, n-i)``, maps ``A_i: V_i -> V_{i+1}``, ``B_i: V_{i+1} -> V_i``
and framing maps at the vertices ``k`` and ``n-k``.  The framing line at
``n-k`` is called ``e`` and the one at ``k`` is called ``f``; when ``n = 2k`` both
sit at ``k`` and ``Gamma_k`` has the columns ``(f, e)``.

``A`` and ``B`` are stored for ``0 <= i <= n-1`` with ``V_0 = V_n = 0``, so the
boundary maps are empty matrices and need no special cases.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .diagram import CupDiagram, MarkedCupDiagram, check_typeD_partition, stats
from .errors import (
    BadParity,
    IndexOutOfRange,
    InvalidShape,
    NotAdmissible,
    NotStable,
    ShapeMismatch,
    SingularG,
    SizeMismatch,
    ValidationError,
)
from .flag import Flag, Nilpotent, standard_nilpotent
from .linalg import (
    Inconsistent,
    Matrix,
    Subspace,
    hstack,
    image,
    kernel,
    parse_matrix,
    solve_linear,
    vstack,
)
from .scalar import Field, field_from_name

# ---------------------------------------------------------------------------
# Dimension data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimVectors:
    n: int
    k: int
    v: dict
    d: dict

    def dim(self, i: int) -> int:
        return self.v.get(i, 0)


def dim_vectors(n: int, k: int) -> DimVectors:
    if n < 1 or k < 0 or k > n - k:
        raise InvalidShape(f"({n - k},{k}) is not a two-row partition")
    v = {i: min(i, k, n - i) for i in range(1, n)}
    d = {i: 0 for i in range(1, n)}
    if 1 <= k <= n - 1:
        d[k] += 1
    if 1 <= n - k <= n - 1:
        d[n - k] += 1
    return DimVectors(n, k, v, d)


def letters_at(n: int, k: int, j: int) -> list[str]:
    """Framing letters whose path to ``V_j`` is defined, in column order."""
    out = []
    if 1 <= j <= k:
        out.append("f")
    if 1 <= j <= n - k:
        out.append("e")
    return out


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


class QuiverRep:
    """A quadruple ``(A, B, Gamma, Delta)``.

    ``gamma[letter]`` is a ``v x 1`` column into ``V_k`` (letter ``f``) or
    ``V_{n-k}`` (letter ``e``); ``delta[letter]`` is the matching ``1 x v`` row.
    """

    __slots__ = ("field", "n", "k", "dims", "A", "B", "gamma", "delta")

    def __init__(self, fld: Field, n: int, k: int, A, B, gamma: dict, delta: dict | None = None):
        self.field = fld
        self.n = n
        self.k = k
        self.dims = dim_vectors(n, k)
        v = self.v
        self.A = list(A)
        self.B = list(B)
        if len(self.A) != n or len(self.B) != n:
            raise ShapeMismatch(f"expected {n} A and B maps (indices 0..{n - 1})")
        for i in range(n):
            if self.A[i].shape != (v(i + 1), v(i)):
                raise ShapeMismatch(f"A_{i} has shape {self.A[i].shape}, expected {(v(i + 1), v(i))}")
            if self.B[i].shape != (v(i), v(i + 1)):
                raise ShapeMismatch(f"B_{i} has shape {self.B[i].shape}, expected {(v(i), v(i + 1))}")
        self.gamma = {}
        self.delta = {}
        delta = delta or {}
        for letter, j in (("f", k), ("e", n - k)):
            g = gamma.get(letter)
            if g is None:
                g = Matrix.zeros(fld, v(j), 1)
            if g.shape != (v(j), 1):
                raise ShapeMismatch(f"Gamma column {letter} must be {v(j)} x 1")
            self.gamma[letter] = g
            d = delta.get(letter)
            if d is None:
                d = Matrix.zeros(fld, 1, v(j))
            if d.shape != (1, v(j)):
                raise ShapeMismatch(f"Delta row {letter} must be 1 x {v(j)}")
            self.delta[letter] = d

    # -- basic data -------------------------------------------------------
    def v(self, i: int) -> int:
        return self.dims.dim(i)

    def home(self, letter: str) -> int:
        return self.k if letter == "f" else self.n - self.k

    @property
    def equal(self) -> bool:
        return self.n == 2 * self.k

    def Gamma_k(self) -> Matrix:
        """``Gamma_k``; two columns ``(f, e)`` when ``n = 2k``."""
        if self.equal:
            return hstack([self.gamma["f"], self.gamma["e"]])
        return self.gamma["f"]

    def Gamma_nk(self) -> Matrix:
        return self.gamma["e"]

    def __eq__(self, other):
        return (
            isinstance(other, QuiverRep)
            and (self.field, self.n, self.k) == (other.field, other.n, other.k)
            and self.A == other.A
            and self.B == other.B
            and self.gamma == other.gamma
            and self.delta == other.delta
        )

    def __hash__(self):
        return hash((self.n, self.k, tuple(self.A), tuple(self.B)))

    def __repr__(self):
        return f"QuiverRep(n={self.n}, k={self.k}, field={self.field.name})"

    def replace(self, **kw) -> "QuiverRep":
        args = dict(A=self.A, B=self.B, gamma=self.gamma, delta=self.delta)
        args.update(kw)
        return QuiverRep(self.field, self.n, self.k, args["A"], args["B"], args["gamma"], args["delta"])

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        n, k = self.n, self.k
        out = {
            "n": n,
            "k": k,
            "A": [self.A[i].to_json() for i in range(1, n - 1)],
            "B": [self.B[i].to_json() for i in range(1, n - 1)],
            "field": self.field.name,
        }
        if self.equal:
            out["Gamma"] = {"k": self.Gamma_k().to_json()}
            out["Delta"] = {"k": vstack([self.delta["f"], self.delta["e"]]).to_json()}
        else:
            out["Gamma"] = {"k": self.gamma["f"].to_json(), "n-k": self.gamma["e"].to_json()}
            out["Delta"] = {"k": self.delta["f"].to_json(), "n-k": self.delta["e"].to_json()}
        return out

    @classmethod
    def from_json(cls, obj: dict, fld: Field | None = None) -> "QuiverRep":
        try:
            n, k = int(obj["n"]), int(obj["k"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"quiver JSON needs integer n and k: {exc}") from None
        if fld is None:
            fld = field_from_name(obj.get("field", "Q"))
        dims = dim_vectors(n, k)
        v = dims.dim

        def mat(value, rows, cols):
            if value is None:
                return Matrix.zeros(fld, rows, cols)
            if isinstance(value, str):
                m = parse_matrix(value, fld)
            else:
                m = Matrix.of(fld, value, cols) if not value else Matrix.of(fld, value)
            if m.shape == (0, 0) and (rows, cols) != (0, 0):
                m = Matrix.zeros(fld, rows, cols)
            if m.shape != (rows, cols):
                raise ShapeMismatch(f"matrix of shape {m.shape}, expected {(rows, cols)}")
            return m

        a_list = obj.get("A", [])
        b_list = obj.get("B", [])
        if len(a_list) != max(n - 2, 0) or len(b_list) != max(n - 2, 0):
            raise ShapeMismatch(f"expected {max(n - 2, 0)} A and B matrices (A_1..A_{n - 2})")
        A = [Matrix.zeros(fld, v(1), 0)] + [mat(a_list[i - 1], v(i + 1), v(i)) for i in range(1, n - 1)]
        B = [Matrix.zeros(fld, 0, v(1))] + [mat(b_list[i - 1], v(i), v(i + 1)) for i in range(1, n - 1)]
        if n >= 2:
            A.append(Matrix.zeros(fld, 0, v(n - 1)))
            B.append(Matrix.zeros(fld, v(n - 1), 0))
        A, B = A[:n], B[:n]
        gam = obj.get("Gamma", {})
        dlt = obj.get("Delta", {}) or {}
        if n == 2 * k:
            g = mat(gam.get("k"), v(k), 2)
            d = mat(dlt.get("k"), 2, v(k))
            gamma = {"f": g.submatrix(range(v(k)), [0]), "e": g.submatrix(range(v(k)), [1])}
            delta = {"f": d.submatrix([0], range(v(k))), "e": d.submatrix([1], range(v(k)))}
        else:
            gamma = {"f": mat(gam.get("k"), v(k), 1), "e": mat(gam.get("n-k"), v(n - k), 1)}
            delta = {"f": mat(dlt.get("k"), 1, v(k)), "e": mat(dlt.get("n-k"), 1, v(n - k))}
        return cls(fld, n, k, A, B, gamma, delta)


def make_rep(fld: Field, n: int, k: int, A: dict, B: dict, gamma: dict, delta: dict | None = None) -> QuiverRep:
    """Build from ``{i: matrix}`` dictionaries; missing maps are zero."""
    v = dim_vectors(n, k).dim
    AA = [A.get(i, Matrix.zeros(fld, v(i + 1), v(i))) for i in range(n)]
    BB = [B.get(i, Matrix.zeros(fld, v(i), v(i + 1))) for i in range(n)]
    return QuiverRep(fld, n, k, AA, BB, gamma, delta)


def zero_rep(fld: Field, n: int, k: int) -> QuiverRep:
    return make_rep(fld, n, k, {}, {}, {})


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def _check_vertex(r: QuiverRep, *idx: int):
    for i in idx:
        if not 0 <= i <= r.n:
            raise IndexOutOfRange(f"vertex {i} outside 0..{r.n}")


def path_A(r: QuiverRep, p: int, q: int) -> Matrix:
    """``A_{q-1} ... A_p : V_p -> V_q``; the identity when ``p = q``."""
    _check_vertex(r, p, q)
    if q < p:
        raise IndexOutOfRange(f"A-path needs p <= q, got {p} > {q}")
    m = Matrix.identity(r.field, r.v(p))
    for t in range(p, q):
        m = r.A[t] @ m
    return m


def path_B(r: QuiverRep, q: int, p: int) -> Matrix:
    """``B_p ... B_{q-1} : V_q -> V_p``; the identity when ``p = q``."""
    _check_vertex(r, p, q)
    if q < p:
        raise IndexOutOfRange(f"B-path needs q >= p, got {q} < {p}")
    m = Matrix.identity(r.field, r.v(q))
    for t in range(q - 1, p - 1, -1):
        m = r.B[t] @ m
    return m


def path(r: QuiverRep, j: int, i: int) -> Matrix:
    """The monotone path ``V_j -> V_i``."""
    return path_B(r, j, i) if j >= i else path_A(r, j, i)


def gamma_path(r: QuiverRep, j: int, i: int) -> Matrix:
    """``Gamma_{j -> i}`` from the framing at ``j`` to ``V_i``."""
    _check_vertex(r, j, i)
    if j == r.k and r.equal:
        g = r.Gamma_k()
    elif j == r.k:
        g = r.gamma["f"]
    elif j == r.n - r.k:
        g = r.gamma["e"]
    else:
        raise IndexOutOfRange(f"no framing at vertex {j}")
    return path(r, j, i) @ g


def gamma_to(r: QuiverRep, letter: str, i: int) -> Matrix:
    """Column ``Gamma_{j -> i}`` for a single framing letter."""
    return path(r, r.home(letter), i) @ r.gamma[letter]


def delta_path(r: QuiverRep, j: int, i: int) -> Matrix:
    """``Delta_{j -> i}`` from ``V_j`` to the framing at ``i``."""
    _check_vertex(r, j, i)
    if i == r.k and r.equal:
        d = vstack([r.delta["f"], r.delta["e"]])
    elif i == r.k:
        d = r.delta["f"]
    elif i == r.n - r.k:
        d = r.delta["e"]
    else:
        raise IndexOutOfRange(f"no framing at vertex {i}")
    return d @ path(r, j, i)


def delta_from(r: QuiverRep, letter: str, j: int) -> Matrix:
    return r.delta[letter] @ path(r, j, r.home(letter))


# ---------------------------------------------------------------------------
# Admissibility, stability, group action
# ---------------------------------------------------------------------------


def _gamma_delta(r: QuiverRep, i: int) -> Matrix:
    out = Matrix.zeros(r.field, r.v(i), r.v(i))
    for letter in ("f", "e"):
        if r.home(letter) == i:
            out = out + r.gamma[letter] @ r.delta[letter]
    return out


def is_admissible(r: QuiverRep) -> bool:
    """``B_i A_i = A_{i-1} B_{i-1} + Gamma_i Delta_i`` for ``1 <= i <= n-1``."""
    for i in range(1, r.n):
        if r.B[i] @ r.A[i] != r.A[i - 1] @ r.B[i - 1] + _gamma_delta(r, i):
            return False
    return True


def is_stable(r: QuiverRep) -> bool:
    if not is_admissible(r):
        raise NotAdmissible("stability is only defined for admissible representations")
    return _stable(r)


def _stable(r: QuiverRep) -> bool:
    for i in range(1, r.n):
        cols = list(r.A[i - 1].columns())
        for letter in ("f", "e"):
            if r.home(letter) >= i:
                cols += gamma_to(r, letter, i).columns()
        if Subspace.span(r.field, r.v(i), cols).dim != r.v(i):
            return False
    return True


def is_springer_point(r: QuiverRep) -> bool:
    return r.delta["f"].is_zero() and r.delta["e"].is_zero()


def gl_apply(g: Sequence[Matrix], r: QuiverRep) -> QuiverRep:
    """Act by ``g = (g_1, ..., g_{n-1})``."""
    n = r.n
    if len(g) != n - 1:
        raise ShapeMismatch(f"expected {n - 1} group elements")
    gs = [Matrix.identity(r.field, 0)] + list(g) + [Matrix.identity(r.field, 0)]
    inv = []
    for i, gi in enumerate(gs):
        if gi.shape != (r.v(i), r.v(i)):
            raise ShapeMismatch(f"g_{i} must be {r.v(i)} x {r.v(i)}")
        if not gi.is_invertible():
            raise SingularG(f"g_{i} is not invertible")
        inv.append(gi.inverse())
    A = [gs[i + 1] @ r.A[i] @ inv[i] for i in range(n)]
    B = [gs[i] @ r.B[i] @ inv[i + 1] for i in range(n)]
    gamma = {L: gs[r.home(L)] @ r.gamma[L] if 0 < r.home(L) < n else r.gamma[L] for L in "fe"}
    delta = {L: r.delta[L] @ inv[r.home(L)] if 0 < r.home(L) < n else r.delta[L] for L in "fe"}
    return r.replace(A=A, B=B, gamma=gamma, delta=delta)


def compose_g(g: Sequence[Matrix], h: Sequence[Matrix]) -> list[Matrix]:
    return [a @ b for a, b in zip(g, h)]


def random_g(r: QuiverRep, rng: random.Random) -> list[Matrix]:
    out = []
    for i in range(1, r.n):
        while True:
            m = random_matrix(r.field, r.v(i), r.v(i), rng)
            if m.is_invertible():
                out.append(m)
                break
    return out


def random_matrix(fld: Field, rows: int, cols: int, rng: random.Random) -> Matrix:
    return Matrix(fld, [[fld.random(rng) for _ in range(cols)] for _ in range(rows)], cols)


# ---------------------------------------------------------------------------
# The lifted representation
# ---------------------------------------------------------------------------


def tilde_labels(n: int, k: int, i: int, v: int) -> list[tuple[str, int]]:
    """Basis labels of ``V_i + D'_i``; for ``i = 0`` the standard basis."""
    ne = max(0, n - k - i)
    nf = max(0, k - i)
    labels = [("V", t) for t in range(1, v + 1)]
    labels += [("e", a) for a in range(1, ne + 1)]
    labels += [("f", a) for a in range(1, nf + 1)]
    return labels


@dataclass
class TildeRep:
    n: int
    k: int
    field: Field
    labels: list  # labels[i] for 0 <= i <= n
    gamma: Matrix  # D'_0 -> V~_1
    delta: Matrix  # V~_1 -> D'_0
    A: dict  # A[i]: V~_i -> V~_{i+1}, 1 <= i <= n-1
    B: dict  # B[i]: V~_{i+1} -> V~_i

    def T(self, i: int) -> Matrix:
        return self.gamma if i == 0 else self.A[i]

    def S(self, i: int) -> Matrix:
        return self.delta if i == 0 else self.B[i]

    def index(self, i: int) -> dict:
        return {lab: pos for pos, lab in enumerate(self.labels[i])}


def build_tilde(r: QuiverRep) -> TildeRep:
    """Block matrices of the lifted representation on ``V_i + D'_i``."""
    if not is_admissible(r) or not _stable(r):
        raise NotStable("the lift needs an admissible stable representation")
    n, k, fld = r.n, r.k, r.field
    labels = [tilde_labels(n, k, 0, 0)] + [tilde_labels(n, k, i, r.v(i)) for i in range(1, n)]
    labels.append([])
    idx = [{lab: p for p, lab in enumerate(ls)} for ls in labels]
    z, o = fld.zero, fld.one

    def blank(i_row, i_col):
        return [[z] * len(labels[i_col]) for _ in labels[i_row]]

    def put_column(rows, col, i_row, column: Matrix):
        for t in range(column.nrows):
            rows[idx[i_row][("V", t + 1)]][col] = column[t, 0]

    def put_row(rows, row, i_col, rowvec: Matrix):
        for t in range(rowvec.ncols):
            rows[row][idx[i_col][("V", t + 1)]] = rowvec[0, t]

    def ne(i):
        return max(0, n - k - i)

    def nf(i):
        return max(0, k - i)

    # Gamma~_1 : D'_0 -> V~_1
    g = blank(1, 0)
    for letter in letters_at(n, k, 1):
        put_column(g, idx[0][(letter, 1)], 1, gamma_to(r, letter, 1))
    for letter, cnt in (("e", ne(1)), ("f", nf(1))):
        for a in range(1, cnt + 1):
            g[idx[1][(letter, a)]][idx[0][(letter, a + 1)]] = o
    gamma_t = Matrix(fld, g, len(labels[0]))

    # Delta~_1 : V~_1 -> D'_0
    d = blank(0, 1)
    for letter, cnt in (("e", ne(1)), ("f", nf(1))):
        for a in range(1, cnt + 1):
            d[idx[0][(letter, a)]][idx[1][(letter, a)]] = o
    for letter in letters_at(n, k, 1):
        top = ne(0) if letter == "e" else nf(0)
        put_row(d, idx[0][(letter, top)], 1, delta_from(r, letter, 1))
    delta_t = Matrix(fld, d, len(labels[1]))

    A_t, B_t = {}, {}
    for i in range(1, n):
        a = blank(i + 1, i)
        for s in range(r.v(i)):
            for t in range(r.v(i + 1)):
                a[idx[i + 1][("V", t + 1)]][idx[i][("V", s + 1)]] = r.A[i][t, s]
        for letter in letters_at(n, k, i + 1):
            if (letter, 1) in idx[i]:
                put_column(a, idx[i][(letter, 1)], i + 1, gamma_to(r, letter, i + 1))
        for letter, cnt in (("e", ne(i + 1)), ("f", nf(i + 1))):
            for q in range(1, cnt + 1):
                a[idx[i + 1][(letter, q)]][idx[i][(letter, q + 1)]] = o
        A_t[i] = Matrix(fld, a, len(labels[i]))

        b = blank(i, i + 1)
        for s in range(r.v(i + 1)):
            for t in range(r.v(i)):
                b[idx[i][("V", t + 1)]][idx[i + 1][("V", s + 1)]] = r.B[i][t, s]
        for letter, cnt in (("e", ne(i + 1)), ("f", nf(i + 1))):
            for q in range(1, cnt + 1):
                b[idx[i][(letter, q)]][idx[i + 1][(letter, q)]] = o
        for letter in letters_at(n, k, i + 1):
            top = ne(i) if letter == "e" else nf(i)
            if top:
                put_row(b, idx[i][(letter, top)], i + 1, delta_from(r, letter, i + 1))
        B_t[i] = Matrix(fld, b, len(labels[i + 1]))

    return TildeRep(n, k, fld, labels, gamma_t, delta_t, A_t, B_t)


@dataclass
class TildeReport:
    admissible: bool
    stable: bool
    commutator: bool
    pattern: bool
    transversal: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.admissible and self.stable and self.commutator and self.pattern and self.transversal

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "admissible": self.admissible,
            "stable": self.stable,
            "commutator": self.commutator,
            "pattern": self.pattern,
            "transversal": self.transversal,
            "ok": self.ok,
            "failures": self.failures,
        }


def _sl2_pair(t: TildeRep, i: int, labs: list) -> tuple[Matrix, Matrix]:
    """``x_i`` and ``y_i`` on ``D'_i`` in the order of ``labs``."""
    fld = t.field
    n, k = t.n, t.k
    size = {"e": max(0, n - k - i), "f": max(0, k - i)}
    pos = {lab: p for p, lab in enumerate(labs)}
    z = fld.zero
    x = [[z] * len(labs) for _ in labs]
    y = [[z] * len(labs) for _ in labs]
    for letter, h in labs:
        top = size[letter]
        if 1 < h <= top:
            x[pos[(letter, h - 1)]][pos[(letter, h)]] = fld.one
        if 1 <= h < top:
            y[pos[(letter, h + 1)]][pos[(letter, h)]] = fld.coerce(h * (top - h))
    return Matrix(fld, x, len(labs)), Matrix(fld, y, len(labs))


def _pattern_failures(t: TildeRep, i: int) -> list[str]:
    """Entry-pattern constraints on ``T_i`` and ``S_i``."""
    n, k = t.n, t.k
    shift = 2 * k - n
    out = []
    T, S = t.T(i), t.S(i)
    src, dst = t.labels[i], t.labels[i + 1]
    one, zero = t.field.one, t.field.zero
    size = {"e": max(0, n - k - i), "f": max(0, k - i)}

    # T_i: src label (psi, b) -> dst label (phi, a)
    for c, (psi, b) in enumerate(src):
        for rw, (phi, a) in enumerate(dst):
            val = T[rw, c]
            want = None
            if psi == "V" and phi != "V":
                want = zero
            elif psi != "V" and phi == "V":
                if b != 1:
                    want = zero
            elif psi == phi and psi != "V":
                if b > a + 1:
                    want = zero
                elif b == a + 1:
                    want = one
            elif psi == "e" and phi == "f":
                if b >= a + 1:
                    want = zero
            elif psi == "f" and phi == "e":
                if b >= a + 1 + shift:
                    want = zero
            if want is not None and val != want:
                out.append(f"T_{i}[{phi}{a} <- {psi}{b}]")

    # S_i: src label (psi, b) in V~_{i+1} -> dst label (phi, a) in V~_i
    for c, (psi, b) in enumerate(dst):
        for rw, (phi, a) in enumerate(src):
            val = S[rw, c]
            want = None
            if psi != "V" and phi == "V":
                want = zero
            elif psi == "V" and phi != "V":
                if a != size[phi]:
                    want = zero
            elif psi == phi and psi != "V":
                if b > a:
                    want = zero
                elif b == a:
                    want = one
            elif psi == "e" and phi == "f":
                if b >= a:
                    want = zero
            elif psi == "f" and phi == "e":
                if b >= a + shift:
                    want = zero
            if want is not None and val != want:
                out.append(f"S_{i}[{phi}{a} <- {psi}{b}]")
    return out


def check_tilde(t: TildeRep, r: QuiverRep | None = None) -> TildeReport:
    """Admissibility, stability, the two transversality conditions, and
    ``Delta_{i->} Gamma_{->i} = 0`` (the last one needs ``r``)."""
    n = t.n
    fld = t.field
    fails: list[str] = []

    adm = True
    if t.B[1] @ t.A[1] != t.gamma @ t.delta if n > 1 else False:
        adm = False
        fails.append("admissibility at 1")
    for i in range(2, n):
        if t.B[i] @ t.A[i] != t.A[i - 1] @ t.B[i - 1]:
            adm = False
            fails.append(f"admissibility at {i}")

    stab = image(t.gamma).dim == len(t.labels[1])
    if not stab:
        fails.append("stability at 1")
    for i in range(1, n):
        if image(t.A[i]).dim != len(t.labels[i + 1]):
            stab = False
            fails.append(f"stability at {i + 1}")

    comm = True
    for i in range(0, n - 1):
        labs = [lab for lab in t.labels[i] if lab[0] != "V"]
        if not labs:
            continue
        prod = t.S(i) @ t.T(i)
        pos = t.index(i)
        sel = [pos[lab] for lab in labs]
        block = prod.submatrix(sel, sel)
        x, y = _sl2_pair(t, i, labs)
        dx = block - x
        if dx @ y - y @ dx != Matrix.zeros(fld, len(labs), len(labs)):
            comm = False
            fails.append(f"commutator at {i}")

    patt = True
    for i in range(0, n - 1):
        bad = _pattern_failures(t, i)
        if bad:
            patt = False
            fails.extend(bad)

    trans = True
    if r is not None:
        for j in range(2, n):
            for lr in letters_at(n, t.k, j):
                for lc in letters_at(n, t.k, j):
                    if not (delta_from(r, lr, j) @ gamma_to(r, lc, j)).is_zero():
                        trans = False
                        fails.append(f"Delta Gamma at {j}")
    return TildeReport(adm, stab, comm, patt, trans, fails)


def tilde_flag(t: TildeRep) -> Flag:
    """``F_i = ker(A~_{i-1} ... A~_1 Gamma~_1)``, straight from the lift."""
    m = t.gamma
    spaces = [Subspace.zero(t.field, len(t.labels[0])), kernel(m)]
    for i in range(1, t.n):
        m = t.A[i] @ m
        spaces.append(kernel(m))
    return Flag(spaces)


def tilde_x(t: TildeRep) -> Matrix:
    return t.delta @ t.gamma


# ---------------------------------------------------------------------------
# The flag of a representation
# ---------------------------------------------------------------------------


def dpp_labels(n: int, k: int, i: int) -> list[tuple[str, int]]:
    """Column labels of the kernel matrix for ``F_i``: ``(f_t, e_t)`` per level."""
    out = []
    for t in range(1, i + 1):
        for letter in letters_at(n, k, t):
            out.append((letter, t))
    return out


def standard_index(n: int, k: int, label: tuple[str, int]) -> int:
    letter, t = label
    return t - 1 if letter == "e" else n - k + t - 1


@dataclass
class MaffeiResult:
    flag: Flag
    raw: list  # (labels, Subspace in label order) for F_1..F_n
    x: Matrix

    def raw_json(self) -> list:
        out = []
        for labels, sub in self.raw:
            out.append(
                {
                    "columns": [f"{a}{t}" for a, t in labels],
                    "basis": sub.to_json(),
                }
            )
        return out


def kernel_matrix(r: QuiverRep, i: int) -> tuple[list, Matrix]:
    """``(A_{1->i} Gamma_{->1} | ... | Gamma_{->i})`` with its column labels."""
    labels = dpp_labels(r.n, r.k, i)
    cols = [(path_A(r, t, i) @ gamma_to(r, letter, t)).columns()[0] for letter, t in labels]
    return labels, Matrix.from_columns(r.field, cols, r.v(i))


def maffei_flag(r: QuiverRep) -> MaffeiResult:
    if not is_admissible(r):
        raise NotAdmissible("representation is not admissible")
    if not _stable(r):
        raise NotStable("representation is not stable")
    n, k, fld = r.n, r.k, r.field
    spaces = [Subspace.zero(fld, n)]
    raw = []
    for i in range(1, n + 1):
        labels, m = kernel_matrix(r, i)
        ker = kernel(m)
        raw.append((labels, ker))
        pos = [standard_index(n, k, lab) for lab in labels]
        vecs = []
        for b in ker.basis:
            v = [fld.zero] * n
            for p, c in zip(pos, b):
                v[p] = c
            vecs.append(v)
        sub = Subspace.span(fld, n, vecs)
        if sub.dim != i:
            raise NotStable(f"kernel at level {i} has dimension {sub.dim}")
        spaces.append(sub)
    x = tilde_x(build_tilde(r))
    return MaffeiResult(Flag(spaces), raw, x)


# ---------------------------------------------------------------------------
# Component conditions
# ---------------------------------------------------------------------------


def check_quiver_cup(r: QuiverRep, i: int, j: int) -> bool:
    """``ker B_{m -> i-1} = ker A_{m -> j}`` with ``m = i + (j-i+1)/2 - 1``."""
    if (j - i) % 2 == 0 or j <= i:
        raise BadParity(f"cup span ({i},{j}) must cover an even number of vertices")
    if i < 1 or j > r.n:
        raise IndexOutOfRange(f"cup ({i},{j}) outside 1..{r.n}")
    m = i + (j - i + 1) // 2 - 1
    return kernel(path_B(r, m, i - 1)) == kernel(path_A(r, m, j))


def check_quiver_ray(r: QuiverRep, i: int, d: CupDiagram | MarkedCupDiagram) -> bool:
    """``B_i A_i = 0`` when cups lie left of ``i``, otherwise ``Gamma_{n-k -> i} = 0``."""
    if i not in (d.rays if isinstance(d, CupDiagram) else d.ray_vertices):
        raise ValidationError(f"vertex {i} is not a ray")
    c = stats(d).c[i]
    if c >= 1:
        return (r.B[i] @ r.A[i]).is_zero() if i < r.n else True
    return gamma_to(r, "e", i).is_zero() if i < r.n else True


def in_lambda_a(r: QuiverRep, a: CupDiagram) -> bool:
    if a.n != r.n:
        raise SizeMismatch(f"diagram on {a.n} vertices for n = {r.n}")
    return all(check_quiver_cup(r, i, j) for i, j in a.cups)


def sigma_k(r: QuiverRep) -> Matrix:
    """Involution of ``D_k`` in the column order ``(f, e)``."""
    fld = r.field
    s = fld.coerce(-1) if r.k % 2 else fld.one
    if r.equal:
        return Matrix(fld, [[s, fld.zero], [fld.zero, fld.one]], 2)
    return Matrix(fld, [[s]], 1)


def in_lambda_marked(r: QuiverRep, adot: MarkedCupDiagram) -> bool:
    n, k = r.n, r.k
    check_typeD_partition(n, k)
    if 2 * adot.m != n:
        raise SizeMismatch(f"marked diagram on {adot.m} vertices for n = {n}")
    if len(adot.cups) != k // 2:
        return False
    for i, j, mk in adot.cups:
        m = i + (j - i + 1) // 2 - 1
        same = kernel(path_B(r, m, i - 1)) == kernel(path_A(r, m, j))
        if same == mk:
            return False
    if not adot.rays:
        return True
    if r.equal:
        for i, mk in adot.rays:
            if i % 2 == 0:
                raise BadParity(f"ray at even vertex {i} in an equal-block shape")
            h = (i + 1) // 2
            lhs = path_A(r, h, i) @ gamma_path(r, k, h)
            rhs = lhs @ sigma_k(r)
            if lhs != (rhs if mk else -rhs):
                return False
        return True
    i, mk = max(adot.rays)
    rho = stats(adot).rho[i]
    top = k + rho - 1
    lhs = path_A(r, k, top) @ r.gamma["f"]
    rhs = path_B(r, n - k, top) @ r.gamma["e"]
    return lhs == (-rhs if mk else rhs)


# ---------------------------------------------------------------------------
# The involution and its fixed points
# ---------------------------------------------------------------------------


def theta(r: QuiverRep) -> QuiverRep:
    n, k = r.n, r.k
    check_typeD_partition(n, k)
    A = [r.B[n - 1 - i] for i in range(n)]
    B = [r.A[n - 1 - i] for i in range(n)]
    if r.equal:
        g = r.Gamma_k() @ sigma_k(r).inverse()
        rows = range(r.v(k))
        gamma = {"f": g.submatrix(rows, [0]), "e": g.submatrix(rows, [1])}
        delta = dict(r.delta)
    else:
        gamma = {"f": r.gamma["e"], "e": r.gamma["f"]}
        delta = {"f": r.delta["e"], "e": r.delta["f"]}
    return r.replace(A=A, B=B, gamma=gamma, delta=delta)


@dataclass(frozen=True)
class FixedWith:
    g: tuple

    kind = "FixedWith"


class _Outcome:
    def __init__(self, kind):
        self.kind = kind

    def __repr__(self):
        return self.kind


NotFixed = _Outcome("NotFixed")
Undetermined = _Outcome("Undetermined")


def _theta_system(r: QuiverRep, tr: QuiverRep):
    """Linear equations in the entries of ``g`` for ``r = g . tr``."""
    n = r.n
    fld = r.field
    offs = {}
    total = 0
    for i in range(1, n):
        offs[i] = total
        total += r.v(i) ** 2

    def var(i, a, b):
        return offs[i] + a * r.v(i) + b

    rows, rhs = [], []

    def add(coeffs: dict, value):
        row = [fld.zero] * total
        for p, c in coeffs.items():
            row[p] = fld.norm(row[p] + c)
        rows.append(row)
        rhs.append(fld.norm(value))

    # r.A_i g_i = g_{i+1} tr.A_i  and  r.B_i g_{i+1} = g_i tr.B_i
    for i in range(n):
        Ai, Ti = r.A[i], tr.A[i]
        for a in range(r.v(i + 1)):
            for b in range(r.v(i)):
                co: dict = {}
                for s in range(r.v(i)):
                    if Ai[a, s] and 1 <= i:
                        co[var(i, s, b)] = co.get(var(i, s, b), fld.zero) + Ai[a, s]
                for s in range(r.v(i + 1)):
                    if Ti[s, b] and i + 1 < n:
                        co[var(i + 1, a, s)] = co.get(var(i + 1, a, s), fld.zero) - Ti[s, b]
                add(co, fld.zero)
        Bi, Si = r.B[i], tr.B[i]
        for a in range(r.v(i)):
            for b in range(r.v(i + 1)):
                co = {}
                for s in range(r.v(i + 1)):
                    if Bi[a, s] and i + 1 < n:
                        co[var(i + 1, s, b)] = co.get(var(i + 1, s, b), fld.zero) + Bi[a, s]
                for s in range(r.v(i)):
                    if Si[s, b] and 1 <= i:
                        co[var(i, a, s)] = co.get(var(i, a, s), fld.zero) - Si[s, b]
                add(co, fld.zero)
    # r.Gamma = g tr.Gamma  and  r.Delta g = tr.Delta
    for L in "fe":
        h = r.home(L)
        if not 0 < h < n:
            continue
        for a in range(r.v(h)):
            co = {var(h, a, s): tr.gamma[L][s, 0] for s in range(r.v(h)) if tr.gamma[L][s, 0]}
            add(co, r.gamma[L][a, 0])
        for b in range(r.v(h)):
            co = {var(h, s, b): r.delta[L][0, s] for s in range(r.v(h)) if r.delta[L][0, s]}
            add(co, tr.delta[L][0, b])
    return rows, rhs, total, offs


def _g_from_vector(r: QuiverRep, vec, offs) -> list[Matrix]:
    out = []
    for i in range(1, r.n):
        d = r.v(i)
        o = offs[i]
        out.append(Matrix(r.field, [vec[o + a * d : o + (a + 1) * d] for a in range(d)], d))
    return out


def is_theta_fixed(r: QuiverRep, trials: int = 64, seed: int = 0):
    """Look for ``g`` with ``r = g . theta(r)``."""
    tr = theta(r)
    rows, rhs, total, offs = _theta_system(r, tr)
    if total == 0:
        return FixedWith(()) if r == tr else NotFixed
    sol = solve_linear(Matrix(r.field, rows, total), rhs)
    if sol is Inconsistent:
        return NotFixed
    rng = random.Random(seed)
    dim = sol.homogeneous.dim
    attempts = 1 if dim == 0 else trials
    for attempt in range(attempts):
        if attempt == 0:
            coeffs = [r.field.zero] * dim
        else:
            coeffs = [r.field.random(rng) for _ in range(dim)]
        g = _g_from_vector(r, sol.point(coeffs), offs)
        if all(m.is_invertible() for m in g):
            if gl_apply(g, tr) == r:
                return FixedWith(tuple(g))
    return NotFixed if dim == 0 else Undetermined


# ---------------------------------------------------------------------------
# Building representations
# ---------------------------------------------------------------------------


def _quotient_data(fld: Field, n: int, kernel_idx: list[int], sub: Subspace):
    """Coordinates on ``span(e_idx) / sub`` via the non-pivot standard vectors."""
    piv = set(sub.pivots)
    free = [p for p in kernel_idx if p not in piv]

    def coords(v: Sequence) -> list:
        w = list(v)
        for row, p in zip(sub.basis, sub.pivots):
            c = w[p]
            if c:
                w = [fld.norm(a - c * b) for a, b in zip(w, row)]
        return [w[p] for p in free]

    return free, coords


def lift_flag(fl: Flag, x: Nilpotent) -> QuiverRep:
    """A representation with ``Delta = 0`` whose flag is ``fl``.

    Uses ``V_i = ker x^i / F_i`` with ``A`` induced by inclusion, ``B`` by
    ``x`` and ``Gamma`` picking out the classes of ``e_{n-k}`` and ``f_k``.
    """
    n, k = x.n, x.k
    fld = x.field
    a = n - k
    data = {}
    for i in range(0, n + 1):
        kidx = [t - 1 for t in range(1, min(i, a) + 1)] + [a + t - 1 for t in range(1, min(i, k) + 1)]
        data[i] = _quotient_data(fld, n, kidx, fl[i])
    dims = dim_vectors(n, k)
    for i in range(1, n):
        if len(data[i][0]) != dims.dim(i):
            raise ValidationError("flag is not x-stable")

    def unit(p):
        v = [fld.zero] * n
        v[p] = fld.one
        return v

    A, B = {}, {}
    for i in range(0, n):
        free_i, _ = data[i]
        free_j, coords_j = data[i + 1]
        cols = [coords_j(unit(p)) for p in free_i]
        A[i] = Matrix.from_columns(fld, cols, len(free_j))
        _, coords_i = data[i]
        cols = [coords_i(x.matrix.apply(unit(p))) for p in free_j]
        B[i] = Matrix.from_columns(fld, cols, len(free_i))
    gamma = {}
    if k >= 1:
        gamma["f"] = Matrix.column(fld, data[k][1](unit(a + k - 1)))
    gamma["e"] = Matrix.column(fld, data[a][1](unit(a - 1))) if a < n else Matrix.zeros(fld, 0, 1)
    if k == 0:
        gamma["f"] = Matrix.zeros(fld, 0, 1)
    return make_rep(fld, n, k, A, B, gamma)


@dataclass
class SampleStats:
    stability_rejections: int = 0
    component_rejections: int = 0


def random_stable_flag(x: Nilpotent, rng: random.Random) -> Flag:
    """A uniformly chosen next step at every level: ``F_i = F_{i-1} + <v>`` with
    ``v`` a random nonzero class in ``x^{-1} F_{i-1} / F_{i-1}``."""
    fld = x.field
    n = x.n
    spaces = [Subspace.zero(fld, n)]
    for _ in range(n):
        cur = spaces[-1]
        big = x.pre(cur)
        # complement of cur inside big, spanned by basis vectors of big
        comp = []
        acc = cur
        for b in big.basis:
            nxt = acc + Subspace.span(fld, n, [b])
            if nxt.dim > acc.dim:
                comp.append(b)
                acc = nxt
        while True:
            coeffs = [fld.random(rng) for _ in comp]
            if any(coeffs):
                break
        v = [fld.zero] * n
        for c, b in zip(coeffs, comp):
            v = [fld.norm(p + c * q) for p, q in zip(v, b)]
        spaces.append(cur + Subspace.span(fld, n, [v]))
    return Flag(spaces)


def sample_springer_point(
    n: int,
    k: int,
    a: CupDiagram | None = None,
    seed: int = 0,
    fld: Field | None = None,
    stability_retries: int = 256,
    component_retries: int = 1024,
    method: str = "solve",
    stats_out: SampleStats | None = None,
):
    """Seeded search for a stable point with ``Delta = 0``; ``None`` if the
    budget runs out.

    ``method="solve"`` draws ``A`` and ``Gamma`` at random and solves the
    linear equations for ``B``.  ``method="flag"`` draws a random x-stable
    flag and lifts it, then moves it by a random group element.
    """
    from .scalar import GF

    fld = fld or GF(3)
    rng = random.Random(seed)
    dims = dim_vectors(n, k)
    st = stats_out or SampleStats()
    x = standard_nilpotent((n - k, k), fld)
    for _ in range(component_retries):
        r = None
        for _ in range(stability_retries):
            cand = _draw_flag_point(x, rng) if method == "flag" else _draw_solved_point(fld, dims, rng)
            if cand is not None and _stable(cand):
                r = cand
                break
            st.stability_rejections += 1
        if r is None:
            return None
        if a is None or in_lambda_a(r, a):
            return r
        st.component_rejections += 1
    return None


def _draw_flag_point(x: Nilpotent, rng: random.Random) -> QuiverRep:
    r = lift_flag(random_stable_flag(x, rng), x)
    return gl_apply(random_g(r, rng), r)


def _draw_solved_point(fld: Field, dims: DimVectors, rng: random.Random) -> QuiverRep | None:
    n, k = dims.n, dims.k
    v = dims.dim
    A = {i: _sparse_random(fld, v(i + 1), v(i), rng) for i in range(1, n - 1)}
    # unknown entries of B_1..B_{n-2}
    offs = {}
    total = 0
    for i in range(1, n - 1):
        offs[i] = total
        total += v(i) * v(i + 1)
    if total == 0:
        B = {}
    else:
        rows = []
        full_A = {i: A.get(i, Matrix.zeros(fld, v(i + 1), v(i))) for i in range(0, n)}

        def bvar(i, a, b):
            return offs[i] + a * v(i + 1) + b

        for i in range(1, n):
            # B_i A_i - A_{i-1} B_{i-1} = 0 on V_i
            for a in range(v(i)):
                for b in range(v(i)):
                    row = [fld.zero] * total
                    if i in offs:
                        for s in range(v(i + 1)):
                            c = full_A[i][s, b]
                            if c:
                                row[bvar(i, a, s)] = fld.norm(row[bvar(i, a, s)] + c)
                    if i - 1 in offs:
                        for s in range(v(i - 1)):
                            c = full_A[i - 1][a, s]
                            if c:
                                row[bvar(i - 1, s, b)] = fld.norm(row[bvar(i - 1, s, b)] - c)
                    rows.append(row)
        sol = solve_linear(Matrix(fld, rows, total), [fld.zero] * len(rows))
        vec = sol.point([fld.random(rng) for _ in range(sol.homogeneous.dim)])
        B = {
            i: Matrix(fld, [vec[offs[i] + a * v(i + 1) : offs[i] + (a + 1) * v(i + 1)] for a in range(v(i))], v(i + 1))
            for i in offs
        }
    gamma = {}
    for letter, j in (("f", k), ("e", n - k)):
        if 0 < j < n:
            gamma[letter] = random_matrix(fld, v(j), 1, rng)
    return make_rep(fld, n, k, A, B, gamma)


def _sparse_random(fld: Field, rows: int, cols: int, rng: random.Random) -> Matrix:
    """Random matrix whose rank is drawn first, so degenerate maps are common."""
    if rows == 0 or cols == 0:
        return Matrix.zeros(fld, rows, cols)
    rank = rng.randint(0, min(rows, cols))
    left = random_matrix(fld, rows, rank, rng)
    right = random_matrix(fld, rank, cols, rng)
    return left @ right if rank else Matrix.zeros(fld, rows, cols)
