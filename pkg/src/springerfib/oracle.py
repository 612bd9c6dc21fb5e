"""Exhaustive enumeration of Springer fibres over small prime fields.

Flags are produced one at a time by choosing ``F_i / F_{i-1}`` among the
lines of ``x^{-1} F_{i-1} / F_{i-1}``.  For the orthogonal variant only the
bottom half is chosen (with isotropic lines orthogonal to ``F_{i-1}``) and
the top half is mirrored.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Sequence

from .bundle import shape_of
from .diagram import (
    CupDiagram,
    MarkedCupDiagram,
    enumerate_typeA,
    enumerate_typeD,
    serialize_diagram,
)
from .errors import CapExceeded, ValidationError
from .flag import (
    Flag,
    GramForm,
    gram_matrix,
    in_K_a,
    marked_relations,
    quadratic_value,
    standard_nilpotent,
)
from .linalg import Subspace
from .scalar import GF, Field

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class EnumerationTask:
    lam: tuple[int, int]
    q: int
    typeD: bool = False
    max_count: int = DEFAULT_CAP

    def __post_init__(self):
        object.__setattr__(self, "lam", (int(self.lam[0]), int(self.lam[1])))
        if self.q >= 256:
            raise ValidationError("exhaustive runs need q < 256")
        if self.lam[0] < self.lam[1] or self.lam[1] < 0:
            raise ValidationError(f"{self.lam} is not a two-row partition")

    @property
    def n(self) -> int:
        return self.lam[0] + self.lam[1]

    @property
    def field(self) -> Field:
        return GF(self.q)

    def diagrams(self) -> list:
        if self.typeD:
            return enumerate_typeD(self.n, self.lam[1])
        return enumerate_typeA(self.n, self.lam[1])


def _complement(big: Subspace, small: Subspace) -> list[tuple]:
    """Basis vectors of ``big`` that extend ``small`` to a basis of ``big``."""
    acc, out = small, []
    for b in big.basis:
        nxt = acc + Subspace.span(small.field, small.ambient, [b])
        if nxt.dim > acc.dim:
            out.append(b)
            acc = nxt
    return out


def _projective_points(fld: Field, d: int) -> Iterator[tuple]:
    """Normalised representatives of ``P^{d-1}(F_q)``: first nonzero entry is 1."""
    elems = list(fld.elements())
    for lead in range(d):
        for tail in product(elems, repeat=d - lead - 1):
            yield (fld.zero,) * lead + (fld.one,) + tail


def _lines(fld: Field, basis: Sequence[tuple]) -> Iterator[tuple]:
    n = len(basis[0]) if basis else 0
    for c in _projective_points(fld, len(basis)):
        v = [fld.zero] * n
        for ci, b in zip(c, basis):
            if ci:
                v = [a + ci * x for a, x in zip(v, b)]
        yield tuple(fld.norm(a) for a in v)


def _is_isotropic_vector(gram: GramForm, v: tuple) -> bool:
    if gram.field.characteristic == 2:
        return not quadratic_value(gram, v)
    return not gram.pair(v, v)


def _first_choices(task: EnumerationTask) -> list[Subspace]:
    fld = task.field
    x = standard_nilpotent(task.lam, fld)
    zero = Subspace.zero(fld, task.n)
    gram = gram_matrix(task.lam, fld) if task.typeD else None
    ker = x.pre(zero)
    out = []
    for v in _lines(fld, _complement(ker, zero)):
        if gram is not None and not _is_isotropic_vector(gram, v):
            continue
        out.append(Subspace.span(fld, task.n, [v]))
    return out


def _extend(task, x, gram, spaces: list, top: int, counter: list) -> Iterator[Flag]:
    fld = task.field
    cur = spaces[-1]
    if len(spaces) - 1 == top:
        counter[0] += 1
        if counter[0] > task.max_count:
            raise CapExceeded(f"more than {task.max_count} flags")
        yield Flag.from_partial(spaces, gram)
        return
    room = x.pre(cur)
    if gram is not None:
        room = room & gram.perp(cur)
    for v in _lines(fld, _complement(room, cur)):
        if gram is not None and not _is_isotropic_vector(gram, v):
            continue
        nxt = cur + Subspace.span(fld, task.n, [v])
        yield from _extend(task, x, gram, spaces + [nxt], top, counter)


def enumerate_stable_flags(task: EnumerationTask, first: Sequence[Subspace] | None = None) -> Iterator[Flag]:
    """Stream every ``x``-stable flag (isotropic ones when ``task.typeD``).

    ``first`` restricts the choice of ``F_1``; the default is every line
    allowed by the task.  Raises :class:`CapExceeded` past ``task.max_count``.
    """
    fld = task.field
    x = standard_nilpotent(task.lam, fld)
    gram = gram_matrix(task.lam, fld) if task.typeD else None
    top = task.n // 2 if task.typeD else task.n
    zero = Subspace.zero(fld, task.n)
    counter = [0]
    for f1 in first if first is not None else _first_choices(task):
        yield from _extend(task, x, gram, [zero, f1], top, counter)


def member_of(task: EnumerationTask, d, fl: Flag) -> bool:
    fld = task.field
    x = standard_nilpotent(task.lam, fld)
    if task.typeD:
        return bool(marked_relations(fl, x, d, gram_matrix(task.lam, fld)))
    return in_K_a(fl, x, d)


def lagrangian_class(fl: Flag, reference: Subspace) -> int:
    """Parity of ``m - dim(F_m & reference)``: which of the two families of
    maximal isotropic subspaces ``F_m`` belongs to."""
    m = fl.ambient // 2
    return (m - (fl[m] & reference).dim) % 2


@dataclass
class DecompositionReport:
    lam: tuple[int, int]
    q: int
    typeD: bool
    total: int = 0
    per_component: dict = field(default_factory=dict)
    uncovered: list = field(default_factory=list)
    overlaps: dict = field(default_factory=dict)
    covered: int = 0
    lagrangian_classes: dict = field(default_factory=dict)

    def merge(self, other: "DecompositionReport") -> "DecompositionReport":
        self.total += other.total
        self.covered += other.covered
        for key in other.per_component:
            self.per_component[key] = self.per_component.get(key, 0) + other.per_component[key]
        for key in other.overlaps:
            self.overlaps[key] = self.overlaps.get(key, 0) + other.overlaps[key]
        for key, cnt in other.lagrangian_classes.items():
            mine = self.lagrangian_classes.setdefault(key, {})
            for cls, c in cnt.items():
                mine[cls] = mine.get(cls, 0) + c
        self.uncovered += other.uncovered
        return self

    @property
    def complete(self) -> bool:
        return not self.uncovered

    def containments(self) -> list[tuple[str, str]]:
        """Pairs ``(a, b)`` whose point sets satisfy ``K^a <= K^b``."""
        out = []
        for a, b in combinations(sorted(self.per_component), 2):
            ov = self.overlaps.get(f"{a} | {b}", 0)
            if ov == self.per_component[a]:
                out.append((a, b))
            if ov == self.per_component[b]:
                out.append((b, a))
        return out

    def to_json(self) -> dict:
        out = {
            "lambda": list(self.lam),
            "q": self.q,
            "type": "D" if self.typeD else "A",
            "total_flags": self.total,
            "covered": self.covered,
            "per_component": dict(sorted(self.per_component.items())),
            "uncovered": self.uncovered,
            "overlaps": dict(sorted(self.overlaps.items())),
        }
        if self.typeD:
            out["lagrangian_classes"] = {
                k: {str(c): n for c, n in sorted(v.items())} for k, v in sorted(self.lagrangian_classes.items())
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "count"])
        for key, cnt in sorted(self.per_component.items()):
            w.writerow([key, cnt])
        return buf.getvalue()


def _decompose_part(task: EnumerationTask, diagrams: list, first: list, reference) -> DecompositionReport:
    rep = DecompositionReport(task.lam, task.q, task.typeD)
    keys = [serialize_diagram(d) for d in diagrams]
    rep.per_component = {k: 0 for k in keys}
    fld = task.field
    x = standard_nilpotent(task.lam, fld)
    gram = gram_matrix(task.lam, fld) if task.typeD else None
    for fl in enumerate_stable_flags(task, first):
        rep.total += 1
        hits = []
        for key, d in zip(keys, diagrams):
            ok = bool(marked_relations(fl, x, d, gram)) if task.typeD else in_K_a(fl, x, d)
            if ok:
                hits.append(key)
                rep.per_component[key] += 1
        if hits:
            rep.covered += 1
        else:
            rep.uncovered.append(fl.to_json())
        for a, b in combinations(sorted(hits), 2):
            k = f"{a} | {b}"
            rep.overlaps[k] = rep.overlaps.get(k, 0) + 1
        if task.typeD and reference is not None:
            cls = lagrangian_class(fl, reference)
            for key in hits:
                bucket = rep.lagrangian_classes.setdefault(key, {})
                bucket[cls] = bucket.get(cls, 0) + 1
    return rep


def _reference(task: EnumerationTask):
    """``F_m`` of the first enumerated flag; fixes the family labels."""
    if not task.typeD:
        return None
    for fl in enumerate_stable_flags(task):
        return fl[task.n // 2]
    return None


def decompose(
    task: EnumerationTask,
    diagrams: Sequence[CupDiagram | MarkedCupDiagram] | None = None,
    workers: int = 1,
) -> DecompositionReport:
    """Classify every enumerated flag by the components containing it.

    With ``workers > 1`` the enumeration is split by the choice of ``F_1``
    and the partial reports are summed; the result does not depend on the
    split.
    """
    diagrams = list(diagrams) if diagrams is not None else task.diagrams()
    reference = _reference(task)
    firsts = _first_choices(task)
    if workers <= 1:
        return _decompose_part(task, diagrams, firsts, reference)
    total = DecompositionReport(task.lam, task.q, task.typeD)
    total.per_component = {serialize_diagram(d): 0 for d in diagrams}
    size = -(-len(firsts) // workers)
    # contiguous chunks keep the uncovered list in enumeration order
    chunks = [firsts[i : i + size] for i in range(0, len(firsts), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        k = len(chunks)
        for part in pool.map(_decompose_part, [task] * k, [diagrams] * k, chunks, [reference] * k):
            total.merge(part)
    return total


def component_points(d, q: int, typeD: bool | None = None) -> list[Flag]:
    """All ``F_q``-points of the component of ``d``, in enumeration order."""
    if typeD is None:
        typeD = isinstance(d, MarkedCupDiagram)
    if typeD:
        lam = shape_of(d)
    else:
        n, k = d.n, len(d.cups)
        lam = (n - k, k)
    task = EnumerationTask(lam, q, typeD)
    return [fl for fl in enumerate_stable_flags(task) if member_of(task, d, fl)]


def count_component(d, q: int, typeD: bool | None = None) -> int:
    return len(component_points(d, q, typeD))


__all__ = [
    "DEFAULT_CAP",
    "DecompositionReport",
    "EnumerationTask",
    "component_points",
    "count_component",
    "decompose",
    "enumerate_stable_flags",
    "lagrangian_class",
    "member_of",
]
