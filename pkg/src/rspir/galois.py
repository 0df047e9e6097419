"""Prime field GF(p) arithmetic and univariate polynomials over it.

Two levels of API live here.  :class:`FieldElement` is a checked value type
that carries its modulus and refuses to mix with elements of another field.
:class:`GF` is the field context; its integer helpers (``add``, ``mul``,
``inv``...) work on plain residues and are what the protocol code uses on
hot paths.  :class:`Polynomial` stores residues and is bound to one field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence, Union

# Degree of the zero polynomial.  Compares below every integer, so
# ``poly.degree < k`` reads naturally for the zero polynomial too.
ZERO_DEGREE = -math.inf


class FieldMismatchError(ValueError):
    """Raised when values from two different fields are combined."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    c = n + 1
    while not is_prime(c):
        c += 1
    return c


class GF:
    """The prime field of order ``p``."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, GF) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __call__(self, value: Union[int, "FieldElement"]) -> "FieldElement":
        if isinstance(value, FieldElement):
            self.check(value)
            return value
        return FieldElement(value % self.p, self.p)

    def check(self, x: "FieldElement") -> None:
        if x.p != self.p:
            raise FieldMismatchError(f"element of GF({x.p}) used in GF({self.p})")

    # residue-level helpers

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(a, self.p - 2, self.p)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.p

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)

    def elements(self) -> range:
        return range(self.p)

    def random(self, rng: Random) -> int:
        return rng.randrange(self.p)

    def random_nonzero(self, rng: Random) -> int:
        return rng.randrange(1, self.p)

    # polynomial constructors

    def poly(self, coefficients: Iterable[Union[int, "FieldElement"]]) -> "Polynomial":
        return Polynomial(self, coefficients)

    def zero_poly(self) -> "Polynomial":
        return Polynomial(self, ())

    def monomial(self, degree: int, coefficient: int = 1) -> "Polynomial":
        return Polynomial(self, [0] * degree + [coefficient])

    def random_poly(self, length: int, rng: Random) -> "Polynomial":
        """Uniformly random polynomial of degree < ``length``."""
        return Polynomial(self, [rng.randrange(self.p) for _ in range(length)])


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not a residue mod {self.p}")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise FieldMismatchError(f"cannot mix GF({self.p}) and GF({other.p})")
            return other.value
        if isinstance(other, int):
            return other % self.p
        return NotImplemented

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(v % self.p, self.p)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.value)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self._wrap(pow(self.value, self.p - 2, self.p))

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self * self._wrap(o).inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self._wrap(o) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** -e
        return self._wrap(pow(self.value, e, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` (add, sub, mul, div, pow) to two elements of one field.

    For ``pow`` the exponent is ``b.value`` read as a plain integer.
    """
    if a.p != b.p:
        raise FieldMismatchError(f"cannot mix GF({a.p}) and GF({b.p})")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        return a ** b.value
    raise ValueError(f"unknown operation {op!r}")


def _residue(field: GF, c) -> int:
    if isinstance(c, FieldElement):
        field.check(c)
        return c.value
    return int(c) % field.p


class Polynomial:
    """Polynomial over a prime field; ``coeffs[i]`` multiplies ``z**i``.

    Instances are immutable.  Trailing zero coefficients are stripped, so the
    zero polynomial has ``coeffs == ()`` and degree :data:`ZERO_DEGREE`.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field: GF, coefficients: Iterable = ()):
        cs = [_residue(field, c) for c in coefficients]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs: tuple[int, ...] = tuple(cs)

    @property
    def degree(self) -> Union[int, float]:
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def padded(self, length: int) -> list[int]:
        """Coefficients 0..length-1, zero filled."""
        if len(self.coeffs) > length:
            raise ValueError(f"degree {self.degree} does not fit in {length} coefficients")
        return list(self.coeffs) + [0] * (length - len(self.coeffs))

    def slice(self, start: int, stop: int) -> "Polynomial":
        """The polynomial sum_{i} coeff(start + i) z^i for start <= start+i < stop."""
        return Polynomial(self.field, [self.coeff(i) for i in range(start, stop)])

    def _same_field(self, other: "Polynomial") -> None:
        if other.field != self.field:
            raise FieldMismatchError(f"cannot mix polynomials over {self.field} and {other.field}")

    def __call__(self, x) -> int:
        x = _residue(self.field, x)
        p = self.field.p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._same_field(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        p = self.field.p
        return Polynomial(self.field, [(x + (b[i] if i < len(b) else 0)) % p for i, x in enumerate(a)])

    def __neg__(self) -> "Polynomial":
        p = self.field.p
        return Polynomial(self.field, [-c % p for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, FieldElement)):
            return self.scale(_residue(self.field, other))
        self._same_field(other)
        if self.is_zero() or other.is_zero():
            return Polynomial(self.field)
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(self.field, [c % p for c in out])

    __rmul__ = __mul__

    def scale(self, c: int) -> "Polynomial":
        p = self.field.p
        return Polynomial(self.field, [a * c % p for a in self.coeffs])

    def shift(self, m: int) -> "Polynomial":
        """Multiply by ``z**m``."""
        if self.is_zero():
            return self
        return Polynomial(self.field, [0] * m + list(self.coeffs))

    def __divmod__(self, divisor: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        self._same_field(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        rem = list(self.coeffs)
        dlen = len(divisor.coeffs)
        lead_inv = f.inv(divisor.coeffs[-1])
        quot = [0] * max(len(rem) - dlen + 1, 0)
        for i in range(len(rem) - dlen, -1, -1):
            c = rem[i + dlen - 1] * lead_inv % f.p
            quot[i] = c
            if c:
                for j, d in enumerate(divisor.coeffs):
                    rem[i + j] = (rem[i + j] - c * d) % f.p
        return Polynomial(f, quot), Polynomial(f, rem)

    def __floordiv__(self, divisor):
        return divmod(self, divisor)[0]

    def __mod__(self, divisor):
        return divmod(self, divisor)[1]

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field.p, self.coeffs))

    def __repr__(self):
        if self.is_zero():
            return f"Polynomial(0 over {self.field})"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(str(c) if i == 0 else f"{c}z" if i == 1 else f"{c}z^{i}")
        return f"Polynomial({' + '.join(terms)} over {self.field})"


def poly_eval(f: Polynomial, x) -> FieldElement:
    """Evaluate ``f`` at ``x`` by Horner's rule."""
    if isinstance(x, FieldElement):
        f.field.check(x)
    return f.field(f(x))


def poly_interpolate(points: Sequence[tuple], field: GF = None) -> Polynomial:
    """Lagrange interpolation through ``points`` = [(x, y), ...].

    Returns the unique polynomial of degree < len(points).  ``field`` may be
    omitted when the points are :class:`FieldElement` values.
    """
    if field is None:
        if not points or not isinstance(points[0][0], FieldElement):
            raise ValueError("field must be given for integer points")
        field = GF(points[0][0].p)
    xs = [_residue(field, x) for x, _ in points]
    ys = [_residue(field, y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation points must have distinct x")
    return Polynomial(field, interpolate_residues(field, xs, ys))


def interpolate_residues(field: GF, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Coefficient list (length len(xs)) of the interpolant; no input checks."""
    p = field.p
    m = len(xs)
    # master = prod (z - x_i)
    master = [1]
    for x in xs:
        nxt = [0] * (len(master) + 1)
        for i, c in enumerate(master):
            nxt[i] = (nxt[i] - x * c) % p
            nxt[i + 1] = (nxt[i + 1] + c) % p
        master = nxt
    out = [0] * m
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if yi == 0:
            continue
        # master / (z - xi) by synthetic division
        quot = [0] * m
        carry = 0
        for d in range(m, 0, -1):
            carry = (master[d] + carry * xi) % p
            quot[d - 1] = carry
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                denom = denom * (xi - xj) % p
        w = yi * pow(denom, p - 2, p) % p
        for d in range(m):
            out[d] = (out[d] + w * quot[d]) % p
    return out
