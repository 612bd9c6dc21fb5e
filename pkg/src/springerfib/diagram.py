"""Cup diagrams, marked cup diagrams, folding and the text format.

Vertices are numbered from 1.  A :class:`CupDiagram` is a crossingless
partial matching; unmatched vertices carry rays.  A
:class:`MarkedCupDiagram` additionally decorates cups and rays with markers,
each of which has to be reachable from the right border without crossing a
cup or a ray.  In practice that means the feature sits at nesting depth 0 and
no ray lies strictly to its right.

Folding acts on decorated diagrams on ``n = 2m`` vertices that are not
subject to the accessibility rule; those are built with ``validate=False``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterator

from .errors import (
    DiagramSyntaxError,
    InvalidShape,
    NoAxisCrossingCup,
    NotACupEndpoint,
    NotTypeDPartition,
    SizeMismatch,
    ValidationError,
)

# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


def _check_matching(n: int, pairs) -> None:
    seen: set[int] = set()
    for i, j in pairs:
        if not (1 <= i < j <= n):
            raise ValidationError(f"cup {{{i},{j}}} out of range for {n} vertices")
        if i in seen or j in seen:
            raise ValidationError(f"vertex used twice in cup {{{i},{j}}}")
        seen.update((i, j))
    for i, j in pairs:
        for a, b in pairs:
            if i < a < j < b:
                raise ValidationError(f"crossing cups {{{i},{j}}} and {{{a},{b}}}")
    for i, j in pairs:
        # a ray strictly inside a cup would have to cross it
        for v in range(i + 1, j):
            if v not in seen:
                raise ValidationError(f"ray at {v} lies under cup {{{i},{j}}}")


@dataclass(frozen=True)
class CupDiagram:
    """Type A cup diagram on ``n`` vertices."""

    n: int
    cups: tuple[tuple[int, int], ...]

    def __post_init__(self):
        cups = tuple(sorted((min(c), max(c)) for c in self.cups))
        object.__setattr__(self, "cups", cups)
        if self.n < 0:
            raise ValidationError("negative vertex count")
        _check_matching(self.n, cups)

    @property
    def k(self) -> int:
        return len(self.cups)

    @property
    def rays(self) -> tuple[int, ...]:
        used = {v for c in self.cups for v in c}
        return tuple(v for v in range(1, self.n + 1) if v not in used)

    def partner(self, i: int) -> int | None:
        for a, b in self.cups:
            if a == i:
                return b
            if b == i:
                return a
        return None

    def is_symmetric(self) -> bool:
        n = self.n
        mirrored = {(n + 1 - j, n + 1 - i) for i, j in self.cups}
        return mirrored == set(self.cups)

    def decorated(self) -> "MarkedCupDiagram":
        """The same diagram with every feature unmarked, as a decorated diagram."""
        return MarkedCupDiagram(
            self.n,
            tuple((i, j, False) for i, j in self.cups),
            tuple((r, False) for r in self.rays),
            validate=False,
        )

    def to_json(self) -> dict:
        return {
            "type": "A",
            "n": self.n,
            "cups": [[i, j, False] for i, j in self.cups],
            "rays": [[r, False] for r in self.rays],
        }

    def __str__(self):
        return serialize_diagram(self)


@dataclass(frozen=True)
class MarkedCupDiagram:
    """Marked cup diagram on ``m`` vertices.

    ``cups`` holds ``(i, j, marked)`` and ``rays`` holds ``(i, marked)``.
    Every vertex must occur exactly once.  With ``validate=False`` markers
    are not checked for accessibility, which is what the intermediate
    diagrams of the folding procedure need.
    """

    m: int
    cups: tuple[tuple[int, int, bool], ...]
    rays: tuple[tuple[int, bool], ...]
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        cups = tuple(sorted((min(i, j), max(i, j), bool(mk)) for i, j, mk in self.cups))
        rays = tuple(sorted((i, bool(mk)) for i, mk in self.rays))
        object.__setattr__(self, "cups", cups)
        object.__setattr__(self, "rays", rays)
        _check_matching(self.m, [(i, j) for i, j, _ in cups])
        used = sorted([v for i, j, _ in cups for v in (i, j)] + [r for r, _ in rays])
        if used != list(range(1, self.m + 1)):
            raise ValidationError("every vertex must be a cup endpoint or a ray exactly once")
        if self.validate:
            for i, j, mk in cups:
                if mk and not self.accessible(i, j):
                    raise ValidationError(
                        f"marker on cup {{{i},{j}}} cannot reach the right border"
                    )
            for r, mk in rays:
                if mk and not self.accessible(r, r):
                    raise ValidationError(f"marker on ray {r} cannot reach the right border")

    def accessible(self, i: int, j: int) -> bool:
        """Whether a marker on the feature spanning ``[i, j]`` reaches the border."""
        if any(a < i and j < b for a, b, _ in self.cups):
            return False
        return not any(r > j for r, _ in self.rays)

    @property
    def n(self) -> int:
        return self.m

    @property
    def ray_vertices(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.rays)

    @property
    def plain_cups(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j, _ in self.cups)

    def cup_marked(self, i: int) -> bool:
        for a, b, mk in self.cups:
            if i in (a, b):
                return mk
        raise NotACupEndpoint(f"vertex {i} is not a cup endpoint")

    def ray_marked(self, i: int) -> bool:
        for r, mk in self.rays:
            if r == i:
                return mk
        raise ValidationError(f"vertex {i} is not a ray")

    def underlying(self) -> CupDiagram:
        return CupDiagram(self.m, self.plain_cups)

    def to_json(self) -> dict:
        return {
            "type": "D",
            "n": self.m,
            "cups": [[i, j, mk] for i, j, mk in self.cups],
            "rays": [[r, mk] for r, mk in self.rays],
        }

    def __str__(self):
        return serialize_diagram(self)


def diagram_from_json(obj: dict) -> CupDiagram | MarkedCupDiagram:
    try:
        kind = obj["type"]
        n = int(obj["n"])
        cups = [tuple(c) for c in obj.get("cups", [])]
        rays = [tuple(r) for r in obj.get("rays", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed diagram JSON: {exc}") from None
    if kind == "A":
        if any(len(c) > 2 and c[2] for c in cups) or any(len(r) > 1 and r[1] for r in rays):
            raise ValidationError("type A diagrams carry no markers")
        d = CupDiagram(n, tuple((c[0], c[1]) for c in cups))
        if rays and sorted(r[0] for r in rays) != list(d.rays):
            raise ValidationError("ray list does not match the cups")
        return d
    if kind == "D":
        cups3 = tuple((c[0], c[1], bool(c[2]) if len(c) > 2 else False) for c in cups)
        listed = {r[0]: bool(r[1]) if len(r) > 1 else False for r in rays}
        used = {v for c in cups3 for v in c[:2]}
        rays2 = tuple((v, listed.get(v, False)) for v in range(1, n + 1) if v not in used)
        return MarkedCupDiagram(n, cups3, rays2)
    raise ValidationError(f"unknown diagram type {kind!r}")


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


class _StatMap(dict):
    def __init__(self, name: str, data: dict):
        super().__init__(data)
        self.name = name

    def __missing__(self, key):
        raise NotACupEndpoint(f"{self.name} is undefined at vertex {key}")


@dataclass(frozen=True)
class DiagramStats:
    """Vertex statistics.

    ``rho[i]`` counts rays at vertices ``<= i`` and ``c[i]`` counts cups
    lying entirely left of ``i``; both are defined at every vertex.
    ``sigma`` swaps the two endpoints of a cup, ``delta`` and ``m_of`` are
    defined at left endpoints only.
    """

    rho: dict
    c: dict
    sigma: dict
    delta: dict
    m_of: dict


def _cups_of(d) -> list[tuple[int, int]]:
    return list(d.cups) if isinstance(d, CupDiagram) else list(d.plain_cups)


def _rays_of(d) -> list[int]:
    return list(d.rays) if isinstance(d, CupDiagram) else list(d.ray_vertices)


def stats(d: CupDiagram | MarkedCupDiagram) -> DiagramStats:
    n = d.n
    cups = _cups_of(d)
    rays = set(_rays_of(d))
    rho = {i: sum(1 for r in rays if r <= i) for i in range(1, n + 1)}
    c = {i: sum(1 for _, b in cups if b < i) for i in range(1, n + 1)}
    sigma = {}
    delta = {}
    m_of = {}
    for i, j in cups:
        sigma[i] = j
        sigma[j] = i
        delta[i] = (j - i + 1) // 2
        m_of[i] = i + delta[i] - 1
    return DiagramStats(
        rho=rho,
        c=c,
        sigma=_StatMap("sigma", sigma),
        delta=_StatMap("delta", delta),
        m_of=_StatMap("m", m_of),
    )


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _matchings(lo: int, hi: int, k: int) -> Iterator[list[tuple[int, int]]]:
    """Crossingless matchings of ``lo..hi`` with ``k`` cups, rays allowed."""
    if k == 0:
        yield []
        return
    if 2 * k > hi - lo + 1:
        return
    # lo is a ray
    for rest in _matchings(lo + 1, hi, k):
        yield rest
    # lo is matched with j; the interior is perfectly matched
    for j in range(lo + 1, hi + 1, 2):
        inner = (j - lo - 1) // 2
        if inner > k - 1:
            break
        for left in _perfect(lo + 1, j - 1):
            for rest in _matchings(j + 1, hi, k - 1 - inner):
                yield [(lo, j)] + left + rest


def _perfect(lo: int, hi: int) -> Iterator[list[tuple[int, int]]]:
    if lo > hi:
        yield []
        return
    for j in range(lo + 1, hi + 1, 2):
        for inner in _perfect(lo + 1, j - 1):
            for rest in _perfect(j + 1, hi):
                yield [(lo, j)] + inner + rest


def enumerate_typeA(n: int, k: int) -> list[CupDiagram]:
    """All cup diagrams on ``n`` vertices with ``k`` cups, sorted by cup list."""
    if n < 0 or k < 0 or 2 * k > n:
        raise InvalidShape(f"no cup diagrams with n={n}, k={k}")
    out = [CupDiagram(n, tuple(sorted(cs))) for cs in _matchings(1, n, k)]
    out.sort(key=lambda d: d.cups)
    return out


def count_typeA(n: int, k: int) -> int:
    return comb(n, k) - (comb(n, k - 1) if k else 0)


def is_typeD_partition(n: int, k: int) -> bool:
    if n <= 0 or k < 0 or 2 * k > n:
        return False
    return n == 2 * k or (k % 2 == 1 and (n - k) % 2 == 1)


def check_typeD_partition(n: int, k: int) -> None:
    if not is_typeD_partition(n, k):
        raise NotTypeDPartition(f"({n - k},{k}) is not a type D two-row partition")


def enumerate_typeD(n: int, k: int) -> list[MarkedCupDiagram]:
    """All marked cup diagrams on ``n/2`` vertices with ``k//2`` cups."""
    check_typeD_partition(n, k)
    m = n // 2
    out = []
    for base in enumerate_typeA(m, k // 2):
        feats = [("c", c) for c in base.cups] + [("r", r) for r in base.rays]
        probe = MarkedCupDiagram(
            m,
            tuple((i, j, False) for i, j in base.cups),
            tuple((r, False) for r in base.rays),
        )
        markable = [
            f for f in feats if probe.accessible(*(f[1] if f[0] == "c" else (f[1], f[1])))
        ]
        for mask in range(1 << len(markable)):
            chosen = {markable[b] for b in range(len(markable)) if mask >> b & 1}
            out.append(
                MarkedCupDiagram(
                    m,
                    tuple((i, j, ("c", (i, j)) in chosen) for i, j in base.cups),
                    tuple((r, ("r", r) in chosen) for r in base.rays),
                )
            )
    out.sort(key=lambda d: (d.cups, d.rays))
    return out


def typeD_shape(d: MarkedCupDiagram) -> tuple[int, int]:
    """``(n, k)`` of the shape a marked diagram belongs to.

    With no rays the shape is ``(m, m)``; otherwise ``k`` is the odd number
    ``2 * cups + 1``.
    """
    n = 2 * d.m
    if not d.rays:
        return n, d.m
    return n, 2 * len(d.cups) + 1


# ---------------------------------------------------------------------------
# Folding
# ---------------------------------------------------------------------------


def _as_decorated(a) -> MarkedCupDiagram:
    if isinstance(a, CupDiagram):
        return a.decorated()
    return a


def fold_step(a) -> tuple[MarkedCupDiagram, MarkedCupDiagram]:
    """One folding step: returns ``(a', a_minus)``.

    With a single cup crossing the middle axis it is cut into two rays; with
    several, the two innermost crossing cups are rearranged into two cups side
    by side.  ``a'`` leaves the new features unmarked, ``a_minus`` marks them.
    """
    a = _as_decorated(a)
    n = a.m
    if n % 2:
        raise NoAxisCrossingCup("odd vertex count has no reflection axis")
    half = n // 2
    crossing = sorted((c for c in a.cups if c[0] <= half < c[1]), reverse=True)
    if not crossing:
        raise NoAxisCrossingCup("no cup crosses the reflection axis")
    rest_cups = [c for c in a.cups if c not in crossing[:2]]
    if len(crossing) == 1:
        i, j, _ = crossing[0]
        rest_cups = [c for c in a.cups if c != crossing[0]]

        def build(mk):
            return MarkedCupDiagram(
                n, tuple(rest_cups), a.rays + ((i, mk), (j, mk)), validate=False
            )

    else:
        (r, s, _), (p, q, _) = crossing[0], crossing[1]

        def build(mk):
            return MarkedCupDiagram(
                n, tuple(rest_cups) + ((p, r, mk), (s, q, mk)), a.rays, validate=False
            )

    return build(False), build(True)


def has_crossing(a) -> bool:
    a = _as_decorated(a)
    half = a.m // 2
    return a.m % 2 == 0 and any(c[0] <= half < c[1] for c in a.cups)


def left_half(a: MarkedCupDiagram) -> MarkedCupDiagram:
    """Left half of a fully folded symmetric diagram, as a marked diagram."""
    half = a.m // 2
    return MarkedCupDiagram(
        half,
        tuple(c for c in a.cups if c[1] <= half),
        tuple(r for r in a.rays if r[0] <= half),
    )


def double(adot: MarkedCupDiagram) -> MarkedCupDiagram:
    """The diagram on ``2m`` vertices formed by ``adot`` and its mirror image."""
    n = 2 * adot.m
    cups = adot.cups + tuple((n + 1 - j, n + 1 - i, mk) for i, j, mk in adot.cups)
    rays = adot.rays + tuple((n + 1 - r, mk) for r, mk in adot.rays)
    return MarkedCupDiagram(n, cups, rays, validate=False)


def fully_folded(a) -> list[MarkedCupDiagram]:
    """All crossing-free diagrams reachable from ``a``, ``a'`` branch first."""
    a = _as_decorated(a)
    if not has_crossing(a):
        return [a]
    p, mi = fold_step(a)
    return fully_folded(p) + fully_folded(mi)


def fold(a: CupDiagram) -> list[MarkedCupDiagram]:
    """Marked cup diagrams obtained by completely folding a symmetric diagram."""
    if not a.is_symmetric():
        raise ValidationError("folding needs a centro-symmetric diagram")
    if a.n % 2:
        raise ValidationError("folding needs an even number of vertices")
    return [left_half(f) for f in fully_folded(a)]


@lru_cache(maxsize=None)
def _descendants(a: MarkedCupDiagram) -> frozenset:
    out = {a}
    if has_crossing(a):
        for b in fold_step(a):
            out |= _descendants(b)
    return frozenset(out)


def unfolds_to(adot: MarkedCupDiagram, b: CupDiagram) -> bool:
    """Whether the doubled ``adot`` lies below ``b`` in the folding order."""
    if 2 * adot.m != b.n:
        raise SizeMismatch(f"marked diagram on {adot.m} vertices vs type A on {b.n}")
    return double(adot) in _descendants(b.decorated())


def unfold(adot: MarkedCupDiagram) -> list[CupDiagram]:
    """Diagrams of ``B_{n-k,k}`` that ``adot`` unfolds to, ``(n, k)`` its shape."""
    n, k = typeD_shape(adot)
    return [b for b in enumerate_typeA(n, k) if b.is_symmetric() and unfolds_to(adot, b)]


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"(?P<kw>n=|k=|m=|cups=)|(?P<int>\d+)|(?P<sym>[AD:,\-*])")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise DiagramSyntaxError(f"unexpected character {text[pos]!r}", pos)
        toks.append((mt.lastgroup, mt.group(), pos))
        pos = mt.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, value: str | None = None, what: str = ""):
        tok = self.toks[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            desc = what or repr(value) or kind
            found = tok[1] or "end of input"
            raise DiagramSyntaxError(f"expected {desc}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def integer(self, what: str) -> int:
        return int(self.take("int", what=what)[1])


def parse_diagram(text: str) -> CupDiagram | MarkedCupDiagram:
    """Parse ``A n=3 k=1: 1-2`` or ``D m=3 cups=1: 1-2, 3*``.

    Vertices not mentioned become unmarked rays.
    """
    p = _Parser(text)
    kind = p.take("sym", what="'A' or 'D'")
    if kind[1] not in "AD":
        raise DiagramSyntaxError("expected 'A' or 'D'", kind[2])
    if kind[1] == "A":
        p.take("kw", "n=")
        size = p.integer("vertex count")
        p.take("kw", "k=")
        count = p.integer("cup count")
    else:
        p.take("kw", "m=")
        size = p.integer("vertex count")
        p.take("kw", "cups=")
        count = p.integer("cup count")
    p.take("sym", ":")
    cups: list[tuple[int, int, bool]] = []
    rays: dict[int, bool] = {}
    while p.peek()[0] != "eof" or (size > 0 and not cups and not rays):
        a = p.integer("vertex")
        if p.peek()[:2] == ("sym", "-"):
            p.i += 1
            b = p.integer("vertex")
            mk = False
            if p.peek()[:2] == ("sym", "*"):
                p.i += 1
                mk = True
            cups.append((a, b, mk))
        else:
            mk = False
            if p.peek()[:2] == ("sym", "*"):
                p.i += 1
                mk = True
            if a in rays:
                raise ValidationError(f"vertex {a} listed twice")
            rays[a] = mk
        tok = p.peek()
        if tok[0] == "eof":
            break
        p.take("sym", ",", what="',' or end of input")

    if len(cups) != count:
        raise ValidationError(f"cup count is {len(cups)} but header says {count}")
    for a, b, _ in cups:
        if a >= b:
            raise ValidationError(f"cup {a}-{b} must list its left endpoint first")
    used = {v for a, b, _ in cups for v in (a, b)}
    for r in rays:
        if not 1 <= r <= size:
            raise ValidationError(f"ray {r} out of range for {size} vertices")
        if r in used:
            raise ValidationError(f"vertex {r} is both a ray and a cup endpoint")
    if kind[1] == "A":
        if any(mk for *_, mk in cups) or any(rays.values()):
            raise ValidationError("type A diagrams carry no markers")
        return CupDiagram(size, tuple((a, b) for a, b, _ in cups))
    _check_matching(size, [(a, b) for a, b, _ in cups])
    all_rays = tuple((v, rays.get(v, False)) for v in range(1, size + 1) if v not in used)
    return MarkedCupDiagram(size, tuple(cups), all_rays)


def serialize_diagram(d: CupDiagram | MarkedCupDiagram) -> str:
    if isinstance(d, CupDiagram):
        items = [(i, f"{i}-{j}") for i, j in d.cups] + [(r, str(r)) for r in d.rays]
        head = f"A n={d.n} k={d.k}"
    else:
        items = [(i, f"{i}-{j}" + ("*" if mk else "")) for i, j, mk in d.cups]
        items += [(r, str(r) + ("*" if mk else "")) for r, mk in d.rays]
        head = f"D m={d.m} cups={len(d.cups)}"
    items.sort()
    body = ", ".join(s for _, s in items)
    return f"{head}: {body}" if body else f"{head}:"
