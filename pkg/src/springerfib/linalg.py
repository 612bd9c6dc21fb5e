"""Exact matrices and subspaces over any :class:`~springerfib.scalar.Field`.

Vectors are column vectors; a matrix with ``nrows x ncols`` maps
``F^ncols -> F^nrows``.  Subspaces keep a canonical reduced row-echelon basis,
so equality of subspaces is equality of the stored tuples.  Zero-dimensional
ambient spaces and empty matrices are ordinary values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .errors import AmbientMismatch, FieldMismatch, ShapeMismatch, SingularG, SingularGram
from .scalar import Field, PrimeField, Scalar

Row = tuple


def _is_prime_field(field: Field) -> bool:
    return isinstance(field, PrimeField)


def _rref_raw(field: Field, rows: Sequence[Sequence], ncols: int) -> tuple[list[list], list[int]]:
    """Nonzero RREF rows and pivot columns of the row space of ``rows``."""
    if not rows or ncols == 0:
        return [], []
    if _is_prime_field(field):
        return kernels.rref_modp([list(r) for r in rows], ncols, field.p)
    a = [list(r) for r in rows]
    nrows = len(a)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c]), -1)
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = field.inv(a[r][c])
        pivot_row = [v * inv for v in a[r]]
        a[r] = pivot_row
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], pivot_row)]
        pivots.append(c)
        r += 1
    return a[:r], pivots


class Matrix:
    """Immutable dense matrix of raw field values."""

    __slots__ = ("field", "nrows", "ncols", "rows", "_hash")

    def __init__(self, field: Field, rows: Iterable[Iterable], ncols: int | None = None):
        rows = tuple(tuple(r) for r in rows)
        if ncols is None:
            if not rows:
                raise ShapeMismatch("an empty matrix needs an explicit column count")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise ShapeMismatch("ragged matrix rows")
        self.field = field
        self.nrows = len(rows)
        self.ncols = ncols
        self.rows = rows
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def of(cls, field: Field, entries: Iterable[Iterable], ncols: int | None = None) -> "Matrix":
        """Build from arbitrary coercible entries (ints, Fractions, strings)."""
        return cls(field, [[field.coerce(v) for v in row] for row in entries], ncols)

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> "Matrix":
        z = field.zero
        return cls(field, [[z] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        if not columns:
            return cls.zeros(field, nrows, 0)
        return cls(field, [[col[i] for col in columns] for i in range(nrows)], len(columns))

    @classmethod
    def column(cls, field: Field, vector: Sequence) -> "Matrix":
        return cls(field, [[v] for v in vector], 1)

    # -- basic structure ------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def columns(self) -> list[tuple]:
        return [tuple(r[j] for r in self.rows) for j in range(self.ncols)]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and self.rows == other.rows
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.ncols, self.rows))
        return self._hash

    def __repr__(self):
        return f"Matrix({self.field.name}, {self.literal()})"

    def literal(self) -> str:
        fmt = self.field.format
        return "[" + "; ".join(" ".join(fmt(v) for v in r) for r in self.rows) + "]"

    def to_json(self) -> list[list]:
        tj = self.field.to_json
        return [[tj(v) for v in r] for r in self.rows]

    def is_zero(self) -> bool:
        return not any(v for r in self.rows for v in r)

    # -- arithmetic -----------------------------------------------------
    def _same(self, other: "Matrix"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field.name} vs {other.field.name}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        n = self.field.norm
        return Matrix(
            self.field,
            [[n(x + y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)],
            self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        n = self.field.norm
        return Matrix(
            self.field,
            [[n(x - y) for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)],
            self.ncols,
        )

    def __neg__(self) -> "Matrix":
        n = self.field.norm
        return Matrix(self.field, [[n(-x) for x in r] for r in self.rows], self.ncols)

    def scale(self, c) -> "Matrix":
        """Multiply by a raw scalar (or a :class:`Scalar`)."""
        if isinstance(c, Scalar):
            c = c.value
        n = self.field.norm
        return Matrix(self.field, [[n(c * x) for x in r] for r in self.rows], self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._same(other)
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        f = self.field
        if _is_prime_field(f):
            data = kernels.matmul_modp(
                [list(r) for r in self.rows], [list(r) for r in other.rows], other.ncols, f.p
            )
            return Matrix(f, data, other.ncols)
        cols = other.columns()
        z = f.zero
        out = []
        for r in self.rows:
            row = []
            for col in cols:
                acc = z
                for x, y in zip(r, col):
                    if x and y:
                        acc = acc + x * y
                row.append(acc)
            out.append(row)
        return Matrix(f, out, other.ncols)

    def apply(self, vector: Sequence) -> tuple:
        """Matrix times a column vector given as a sequence."""
        if len(vector) != self.ncols:
            raise ShapeMismatch("vector length does not match column count")
        n = self.field.norm
        z = self.field.zero
        out = []
        for r in self.rows:
            acc = z
            for x, y in zip(r, vector):
                if x and y:
                    acc = acc + x * y
            out.append(n(acc))
        return tuple(out)

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.columns(), self.nrows)

    def power(self, e: int) -> "Matrix":
        if self.nrows != self.ncols:
            raise ShapeMismatch("power of a non-square matrix")
        result = Matrix.identity(self.field, self.nrows)
        for _ in range(e):
            result = result @ self
        return result

    def rank(self) -> int:
        return len(_rref_raw(self.field, self.rows, self.ncols)[1])

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def inverse(self) -> "Matrix":
        n = self.nrows
        if self.ncols != n:
            raise ShapeMismatch("inverse of a non-square matrix")
        aug = hstack([self, Matrix.identity(self.field, n)])
        rows, pivots = _rref_raw(self.field, aug.rows, 2 * n)
        if pivots[:n] != list(range(n)):
            raise SingularG("matrix is not invertible")
        return Matrix(self.field, [r[n:] for r in rows[:n]], n)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Matrix":
        return Matrix(
            self.field, [[self.rows[i][j] for j in col_idx] for i in row_idx], len(col_idx)
        )


def hstack(mats: Sequence[Matrix], nrows: int | None = None, field: Field | None = None) -> Matrix:
    if not mats:
        if nrows is None or field is None:
            raise ShapeMismatch("empty hstack needs nrows and field")
        return Matrix.zeros(field, nrows, 0)
    f = mats[0].field
    nr = mats[0].nrows
    for m in mats:
        if m.nrows != nr:
            raise ShapeMismatch("hstack row mismatch")
        m._same(mats[0])
    rows = [sum((m.rows[i] for m in mats), ()) for i in range(nr)]
    return Matrix(f, rows, sum(m.ncols for m in mats))


def vstack(mats: Sequence[Matrix], ncols: int | None = None, field: Field | None = None) -> Matrix:
    if not mats:
        if ncols is None or field is None:
            raise ShapeMismatch("empty vstack needs ncols and field")
        return Matrix.zeros(field, 0, ncols)
    nc = mats[0].ncols
    for m in mats:
        if m.ncols != nc:
            raise ShapeMismatch("vstack column mismatch")
        m._same(mats[0])
    return Matrix(mats[0].field, [r for m in mats for r in m.rows], nc)


def block_diag(mats: Sequence[Matrix]) -> Matrix:
    f = mats[0].field
    total = sum(m.ncols for m in mats)
    rows = []
    offset = 0
    z = f.zero
    for m in mats:
        for r in m.rows:
            rows.append((z,) * offset + tuple(r) + (z,) * (total - offset - m.ncols))
        offset += m.ncols
    return Matrix(f, rows, total)


def rref(m: Matrix) -> Matrix:
    """Reduced row-echelon form, same shape (zero rows at the bottom)."""
    rows, _ = _rref_raw(m.field, m.rows, m.ncols)
    z = m.field.zero
    rows = [tuple(r) for r in rows] + [(z,) * m.ncols] * (m.nrows - len(rows))
    return Matrix(m.field, rows, m.ncols)


_MATRIX_RE = re.compile(r"^\s*\[(.*)\]\s*$", re.S)


def parse_matrix(text: str, field: Field) -> Matrix:
    """Parse ``[0 1; 0 0]``; ``[]`` needs no columns and gives a 0 x 0 matrix."""
    m = _MATRIX_RE.match(text)
    if not m:
        raise ValueError(f"matrix literal must be bracketed: {text!r}")
    body = m.group(1).strip()
    if not body:
        return Matrix.zeros(field, 0, 0)
    rows = [r.split() for r in body.split(";")]
    return Matrix.of(field, rows)


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


class Subspace:
    """A subspace of ``F^ambient`` with a canonical RREF basis."""

    __slots__ = ("field", "ambient", "basis", "pivots")

    def __init__(self, field: Field, ambient: int, basis: tuple, pivots: tuple):
        self.field = field
        self.ambient = ambient
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def span(cls, field: Field, ambient: int, vectors: Iterable[Sequence]) -> "Subspace":
        vecs = [tuple(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient:
                raise AmbientMismatch(f"vector of length {len(v)} in F^{ambient}")
        rows, pivots = _rref_raw(field, vecs, ambient)
        return cls(field, ambient, tuple(tuple(r) for r in rows), tuple(pivots))

    @classmethod
    def of(cls, field: Field, ambient: int, vectors: Iterable[Iterable]) -> "Subspace":
        return cls.span(field, ambient, [[field.coerce(x) for x in v] for v in vectors])

    @classmethod
    def zero(cls, field: Field, ambient: int) -> "Subspace":
        return cls(field, ambient, (), ())

    @classmethod
    def full(cls, field: Field, ambient: int) -> "Subspace":
        return cls.span(field, ambient, Matrix.identity(field, ambient).rows)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> Matrix:
        """Basis vectors as the rows of a ``dim x ambient`` matrix."""
        return Matrix(self.field, self.basis, self.ambient)

    def _compatible(self, other: "Subspace"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field.name} vs {other.field.name}")
        if self.ambient != other.ambient:
            raise AmbientMismatch(f"F^{self.ambient} vs F^{other.ambient}")

    def contains_vector(self, v: Sequence) -> bool:
        if len(v) != self.ambient:
            raise AmbientMismatch("vector length does not match ambient dimension")
        if not any(v):
            return True
        return Subspace.span(self.field, self.ambient, self.basis + (tuple(v),)).dim == self.dim

    def __contains__(self, v) -> bool:
        return self.contains_vector(v)

    def issubset(self, other: "Subspace") -> bool:
        self._compatible(other)
        if self.dim > other.dim:
            return False
        return Subspace.span(self.field, self.ambient, other.basis + self.basis).dim == other.dim

    __le__ = issubset

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return subspace_intersect(self, other)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.field == other.field
            and self.ambient == other.ambient
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.field, self.ambient, self.basis))

    def __repr__(self):
        fmt = self.field.format
        vecs = ", ".join("(" + ",".join(fmt(x) for x in v) + ")" for v in self.basis)
        return f"Subspace(F^{self.ambient}: <{vecs}>)"

    def to_json(self) -> list[list]:
        return self.matrix().to_json()


def kernel(m: Matrix) -> Subspace:
    """``{v : m v = 0}`` as a subspace of ``F^ncols``."""
    f = m.field
    rows, pivots = _rref_raw(f, m.rows, m.ncols)
    pivset = set(pivots)
    free = [c for c in range(m.ncols) if c not in pivset]
    vecs = []
    z, o = f.zero, f.one
    for fc in free:
        v = [z] * m.ncols
        v[fc] = o
        for r, pc in enumerate(pivots):
            v[pc] = f.norm(-rows[r][fc])
        vecs.append(v)
    return Subspace.span(f, m.ncols, vecs)


def image(m: Matrix) -> Subspace:
    """Column space of ``m`` inside ``F^nrows``."""
    return Subspace.span(m.field, m.nrows, m.columns())


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    u._compatible(v)
    return Subspace.span(u.field, u.ambient, u.basis + v.basis)


def subspace_intersect(u: Subspace, v: Subspace) -> Subspace:
    """Solve ``sum a_i u_i = sum b_j v_j`` and map the solutions back."""
    u._compatible(v)
    if u.dim == 0 or v.dim == 0:
        return Subspace.zero(u.field, u.ambient)
    f = u.field
    cols = list(u.basis) + [tuple(f.norm(-x) for x in w) for w in v.basis]
    system = Matrix.from_columns(f, cols, u.ambient)
    sols = kernel(system)
    umat = u.matrix()
    vecs = []
    for s in sols.basis:
        a = s[: u.dim]
        vecs.append(Matrix(f, [a], u.dim) @ umat)
    return Subspace.span(f, u.ambient, [vm.rows[0] for vm in vecs])


def contains(u: Subspace, v: Subspace) -> bool:
    """True iff ``v`` is a subspace of ``u``."""
    return v.issubset(u)


def annihilator(w: Subspace) -> Matrix:
    """Rows spanning the linear forms that vanish on ``w``."""
    k = kernel(w.matrix()) if w.dim else Subspace.full(w.field, w.ambient)
    return k.matrix()


def preimage(m: Matrix, w: Subspace) -> Subspace:
    """``{v : m v in w}``."""
    if m.nrows != w.ambient:
        raise AmbientMismatch(f"map into F^{m.nrows} but subspace of F^{w.ambient}")
    if m.field != w.field:
        raise FieldMismatch(f"{m.field.name} vs {w.field.name}")
    return kernel(annihilator(w) @ m)


def orth_complement(w: Subspace, gram: Matrix) -> Subspace:
    """``{v : u^T G v = 0 for all u in w}`` for an invertible symmetric ``G``."""
    if gram.shape != (w.ambient, w.ambient):
        raise AmbientMismatch("gram size does not match ambient dimension")
    if not gram.is_invertible():
        raise SingularGram("gram matrix is singular")
    return kernel(w.matrix() @ gram)


def apply_to_subspace(m: Matrix, w: Subspace) -> Subspace:
    """Image ``m(w)``."""
    if m.ncols != w.ambient:
        raise AmbientMismatch("map domain does not match subspace ambient")
    if w.dim == 0:
        return Subspace.zero(m.field, m.nrows)
    return Subspace.span(m.field, m.nrows, (w.matrix() @ m.T).rows)


@dataclass(frozen=True)
class AffineSolution:
    particular: tuple
    homogeneous: Subspace

    def point(self, coefficients: Sequence) -> tuple:
        """``particular + sum c_j h_j`` for raw coefficients ``c``."""
        f = self.homogeneous.field
        out = list(self.particular)
        for c, h in zip(coefficients, self.homogeneous.basis):
            if c:
                out = [x + c * y for x, y in zip(out, h)]
        return tuple(f.norm(x) for x in out)


class _Inconsistent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Inconsistent"

    def __bool__(self):
        return False


Inconsistent = _Inconsistent()


def solve_linear(coeffs: Matrix, rhs) -> AffineSolution | _Inconsistent:
    """Solve ``coeffs x = rhs``; ``rhs`` is a sequence or an ``n x 1`` matrix."""
    f = coeffs.field
    if isinstance(rhs, Matrix):
        if rhs.ncols != 1:
            raise ShapeMismatch("right-hand side must be a single column")
        rhs = [r[0] for r in rhs.rows]
    rhs = [f.coerce(v) if not isinstance(v, type(f.zero)) else v for v in rhs]
    if len(rhs) != coeffs.nrows:
        raise ShapeMismatch("right-hand side length does not match row count")
    n = coeffs.ncols
    aug = [tuple(r) + (b,) for r, b in zip(coeffs.rows, rhs)]
    rows, pivots = _rref_raw(f, aug, n + 1)
    if pivots and pivots[-1] == n:
        return Inconsistent
    x = [f.zero] * n
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][n]
    return AffineSolution(tuple(x), kernel(coeffs))
