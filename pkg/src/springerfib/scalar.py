"""Exact coefficient fields: rationals, Gaussian rationals and prime fields.

Matrices store *raw* field values (``Fraction``, ``int`` residues or
``Gaussian``) and call back into the owning :class:`Field` for the few
operations that differ between fields (normalisation, inversion).  The
:class:`Scalar` wrapper is the checked public face used by the CLI and tests.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .errors import DivisionByZero, FieldMismatch, InvalidShape

MAX_PRIME = 2**31


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class Gaussian:
    """a + b*i with i^2 = -1, over Q (modulus None) or over F_p (p = 3 mod 4)."""

    __slots__ = ("re", "im", "p")

    def __init__(self, re_, im=0, p: int | None = None):
        if p is None:
            self.re = Fraction(re_)
            self.im = Fraction(im)
        else:
            self.re = int(re_) % p
            self.im = int(im) % p
        self.p = p

    def _lift(self, other) -> "Gaussian":
        if isinstance(other, Gaussian):
            if other.p != self.p:
                raise FieldMismatch("Gaussian values over different bases")
            return other
        return Gaussian(other, 0, self.p)

    def __add__(self, other):
        o = self._lift(other)
        return Gaussian(self.re + o.re, self.im + o.im, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Gaussian(self.re - o.re, self.im - o.im, self.p)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Gaussian(-self.re, -self.im, self.p)

    def __mul__(self, other):
        o = self._lift(other)
        return Gaussian(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re, self.p
        )

    __rmul__ = __mul__

    def inverse(self) -> "Gaussian":
        norm = self.re * self.re + self.im * self.im
        if self.p is None:
            if norm == 0:
                raise DivisionByZero("inverse of zero")
            return Gaussian(self.re / norm, -self.im / norm)
        norm %= self.p
        if norm == 0:
            raise DivisionByZero("inverse of zero")
        ninv = pow(norm, -1, self.p)
        return Gaussian(self.re * ninv, -self.im * ninv, self.p)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Gaussian):
            return self.p == other.p and self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self == self._lift(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im, self.p))

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im}, p={self.p})"


def _fmt_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Field:
    """Base class; concrete fields are singletons per parameter."""

    kind: str = ""
    p: int | None = None
    finite: bool = False

    zero = 0
    one = 1

    # -- raw-value interface ------------------------------------------------
    def norm(self, x):
        return x

    def coerce(self, value):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def is_zero(self, x) -> bool:
        return not x

    def random(self, rng: random.Random):
        raise NotImplementedError

    def elements(self) -> Iterator:
        raise InvalidShape(f"{self.name} is infinite")

    def sqrt(self, x):
        """A square root of x in this field, or None."""
        raise NotImplementedError

    def format(self, x) -> str:
        raise NotImplementedError

    def to_json(self, x):
        return self.format(x)

    # -- convenience -------------------------------------------------------
    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def characteristic(self) -> int:
        return self.p if self.p is not None else 0

    def __call__(self, value) -> "Scalar":
        return Scalar(self, self.coerce(value))

    def sqrt_minus_one(self):
        return self.sqrt(self.coerce(-1))

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, Field) and (self.kind, self.p) == (other.kind, other.p)

    def __hash__(self):
        return hash((self.kind, self.p))


class Rationals(Field):
    kind = "Rationals"
    zero = Fraction(0)
    one = Fraction(1)

    @property
    def name(self):
        return "Q"

    def coerce(self, value):
        if isinstance(value, Gaussian):
            if value.im or value.p is not None:
                raise FieldMismatch("non-rational value for Q")
            return value.re
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(value)

    def inv(self, x):
        if not x:
            raise DivisionByZero("inverse of zero")
        return 1 / x

    def random(self, rng):
        return Fraction(rng.randint(-6, 6), rng.choice((1, 1, 1, 2, 3)))

    def sqrt(self, x):
        x = Fraction(x)
        if x < 0:
            return None
        rn, rd = _isqrt_exact(x.numerator), _isqrt_exact(x.denominator)
        if rn is None or rd is None:
            return None
        return Fraction(rn, rd)

    def format(self, x):
        return _fmt_fraction(x)

    def to_json(self, x):
        return x.numerator if x.denominator == 1 else _fmt_fraction(x)


def _isqrt_exact(n: int) -> int | None:
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else None


class GaussianRationals(Field):
    kind = "GaussianRationals"
    zero = Gaussian(0)
    one = Gaussian(1)

    @property
    def name(self):
        return "Qi"

    def coerce(self, value):
        if isinstance(value, Gaussian):
            if value.p is not None:
                raise FieldMismatch("residue value for Q(i)")
            return value
        if isinstance(value, str):
            return _parse_gaussian(value, None)
        return Gaussian(value)

    def inv(self, x):
        return x.inverse()

    def random(self, rng):
        return Gaussian(rng.randint(-4, 4), rng.randint(-4, 4))

    def sqrt(self, x):
        x = self.coerce(x)
        if x.im:
            return _gaussian_sqrt_search(x)
        r = Rationals().sqrt(x.re)
        if r is not None:
            return Gaussian(r)
        r = Rationals().sqrt(-x.re)
        if r is not None:
            return Gaussian(0, r)
        return None

    def format(self, x):
        return _fmt_gaussian(x.re, x.im, _fmt_fraction)


def _gaussian_sqrt_search(x: Gaussian):
    # (a+bi)^2 = x  <=>  a^2 - b^2 = re, 2ab = im ; a^2 = (re + |x|)/2
    q = Rationals()
    mod = q.sqrt(x.re * x.re + x.im * x.im)
    if mod is None:
        return None
    a = q.sqrt((x.re + mod) / 2)
    if a is None or a == 0:
        return None
    b = x.im / (2 * a)
    return Gaussian(a, b)


def _fmt_gaussian(re_, im, fmt) -> str:
    if not im:
        return fmt(re_)
    if im == 1:
        imag = "i"
    elif im == -1:
        imag = "-i"
    else:
        imag = f"{fmt(im)}i"
    if not re_:
        return imag
    return f"{fmt(re_)}{imag}" if imag.startswith("-") else f"{fmt(re_)}+{imag}"


class PrimeField(Field):
    kind = "PrimeField"
    finite = True

    def __init__(self, p: int):
        if not is_prime(p) or p >= MAX_PRIME:
            raise InvalidShape(f"modulus {p} is not a prime below 2^31")
        self.p = p

    @property
    def name(self):
        return f"Fp:{self.p}"

    def norm(self, x):
        return x % self.p

    def coerce(self, value):
        if isinstance(value, str):
            value = value.strip()
            m = re.fullmatch(r"(-?\d+)\s*mod\s*(\d+)", value)
            if m:
                if int(m.group(2)) != self.p:
                    raise FieldMismatch(f"{value!r} is not over F_{self.p}")
                value = m.group(1)
            value = Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise DivisionByZero(f"denominator divisible by {self.p}")
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        if isinstance(value, Gaussian):
            raise FieldMismatch("Gaussian value for a prime field")
        return int(value) % self.p

    def inv(self, x):
        x %= self.p
        if x == 0:
            raise DivisionByZero("inverse of zero")
        return pow(x, -1, self.p)

    def random(self, rng):
        return rng.randrange(self.p)

    def elements(self):
        return iter(range(self.p))

    def sqrt(self, x):
        return _sqrt_mod(x % self.p, self.p)

    def format(self, x):
        return str(x)

    def to_json(self, x):
        return x

    @property
    def has_sqrt_minus_one(self) -> bool:
        return self.sqrt_minus_one() is not None


def _sqrt_mod(a: int, p: int) -> int | None:
    """Smallest r in [0, p) with r^2 = a (mod p), or None (Tonelli-Shanks)."""
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


class GaussianPrimeField(Field):
    """F_p adjoined a square root of -1; a field of order p^2 when p = 3 mod 4."""

    kind = "GaussianPrimeField"
    finite = True

    def __init__(self, p: int):
        if not is_prime(p) or p % 4 != 3 or p >= MAX_PRIME:
            raise InvalidShape(f"F_{p}(i) needs a prime p = 3 mod 4 below 2^31")
        self.p = p
        self.zero = Gaussian(0, 0, p)
        self.one = Gaussian(1, 0, p)

    @property
    def name(self):
        return f"Fp2:{self.p}"

    def coerce(self, value):
        if isinstance(value, Gaussian):
            if value.p != self.p:
                raise FieldMismatch("Gaussian value over a different base")
            return value
        if isinstance(value, str):
            return _parse_gaussian(value, self.p)
        if isinstance(value, Fraction):
            return Gaussian(PrimeField(self.p).coerce(value), 0, self.p)
        return Gaussian(value, 0, self.p)

    def inv(self, x):
        return x.inverse()

    def random(self, rng):
        return Gaussian(rng.randrange(self.p), rng.randrange(self.p), self.p)

    def elements(self):
        for a in range(self.p):
            for b in range(self.p):
                yield Gaussian(a, b, self.p)

    def sqrt(self, x):
        x = self.coerce(x)
        p = self.p
        if not x.im:
            r = _sqrt_mod(x.re, p)
            if r is not None:
                return Gaussian(r, 0, p)
            r = _sqrt_mod(-x.re % p, p)
            return Gaussian(0, r, p)
        if p * p > 10**6:
            raise NotImplementedError("square roots of non-base elements need small p")
        for cand in self.elements():
            if cand * cand == x:
                return cand
        return None

    def format(self, x):
        return _fmt_gaussian(x.re, x.im, str)


@lru_cache(maxsize=None)
def _rationals() -> Rationals:
    return Rationals()


@lru_cache(maxsize=None)
def _gaussian_rationals() -> GaussianRationals:
    return GaussianRationals()


@lru_cache(maxsize=None)
def prime_field(p: int) -> PrimeField:
    return PrimeField(p)


@lru_cache(maxsize=None)
def gaussian_prime_field(p: int) -> GaussianPrimeField:
    return GaussianPrimeField(p)


QQ = _rationals()
QQi = _gaussian_rationals()


def GF(p: int) -> PrimeField:
    return prime_field(p)


def field_from_name(name: str) -> Field:
    """Parse ``Q``, ``Qi``, ``Fp:<p>`` or ``Fp2:<p>``."""
    text = name.strip()
    if text == "Q":
        return QQ
    if text == "Qi":
        return QQi
    m = re.fullmatch(r"Fp(2?):(\d+)", text)
    if m:
        p = int(m.group(2))
        return gaussian_prime_field(p) if m.group(1) else prime_field(p)
    raise InvalidShape(f"unknown field {name!r}; expected Q, Qi, Fp:<p> or Fp2:<p>")


_GAUSS_RE = re.compile(
    r"^\s*(?:(?P<re>[+-]?\d+(?:/\d+)?)(?=\s*[+-]|\s*$))?\s*"
    r"(?:(?P<sign>[+-])?\s*(?P<im>\d+(?:/\d+)?)?\s*i)?\s*$"
)


def _parse_gaussian(text: str, p: int | None) -> Gaussian:
    m = _GAUSS_RE.match(text)
    if not m or (m.group("re") is None and "i" not in text):
        raise ValueError(f"cannot parse Gaussian value {text!r}")
    re_ = Fraction(m.group("re")) if m.group("re") else Fraction(0)
    im = Fraction(0)
    if "i" in text:
        im = Fraction(m.group("im")) if m.group("im") else Fraction(1)
        if m.group("sign") == "-":
            im = -im
    if p is None:
        return Gaussian(re_, im)
    f = PrimeField(p)
    return Gaussian(f.coerce(re_), f.coerce(im), p)


# ---------------------------------------------------------------------------
# Checked scalar values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scalar:
    field: Field
    value: object

    def _check(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            return Scalar(self.field, self.field.coerce(other))
        if other.field != self.field:
            raise FieldMismatch(f"{self.field.name} vs {other.field.name}")
        return other

    def __add__(self, other):
        return arith(self, self._check(other), "add")

    def __sub__(self, other):
        return arith(self, self._check(other), "sub")

    def __mul__(self, other):
        return arith(self, self._check(other), "mul")

    def __truediv__(self, other):
        return arith(self, self._check(other), "div")

    def __neg__(self):
        return Scalar(self.field, self.field.norm(-self.value))

    def inverse(self) -> "Scalar":
        return Scalar(self.field, self.field.inv(self.value))

    def is_zero(self) -> bool:
        return self.field.is_zero(self.value)

    def __str__(self):
        return self.field.format(self.value)

    def __repr__(self):
        return f"Scalar({self.field.name}, {self})"


def arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field.name} vs {b.field.name}")
    f = a.field
    x, y = a.value, b.value
    if op == "add":
        r = x + y
    elif op == "sub":
        r = x - y
    elif op == "mul":
        r = x * y
    elif op == "div":
        r = x * f.inv(y)
    else:
        raise ValueError(f"unknown operation {op!r}")
    return Scalar(f, f.norm(r))


def sqrt_minus_one(f: Field) -> Scalar | None:
    r = f.sqrt_minus_one()
    return None if r is None else Scalar(f, r)


def parse_scalar(text: str, field: Field | None = None) -> Scalar:
    """Parse the CLI scalar syntax: ``3/4``, ``2+5i`` or ``7 mod 13``."""
    m = re.fullmatch(r"\s*(-?\d+(?:/\d+)?)\s*mod\s*(\d+)\s*", text)
    if m:
        f = prime_field(int(m.group(2)))
        if field is not None and field != f:
            raise FieldMismatch(f"{text!r} is not over {field.name}")
        return f(m.group(1))
    if field is None:
        field = QQi if "i" in text else QQ
    return Scalar(field, field.coerce(text))
