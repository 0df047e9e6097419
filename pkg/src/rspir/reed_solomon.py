"""Reed-Solomon evaluation codes with error-and-erasure decoding.

Decoding drops the erased coordinates, which leaves a word of a shortened
RS code, and runs Berlekamp-Welch on what remains.  With ``e`` erasures the
decoder corrects up to ``(n - e - kappa) // 2`` errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .galois import GF, Polynomial


class _Erasure:
    """The erasure symbol ``?``; absorbing under addition."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __add__(self, other):
        return self

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __repr__(self):
        return "?"

    def __reduce__(self):
        return (_Erasure, ())


ERASURE = _Erasure()

Symbol = Union[int, _Erasure]
ReceivedWord = Sequence[Symbol]


class DecodeFailure(Exception):
    """No codeword lies within the decoding radius of the received word."""


class TooManyErasures(DecodeFailure):
    pass


@dataclass(frozen=True)
class RsCode:
    """RS[n, dimension] over ``field`` on the evaluation points ``alphas``."""

    field: GF
    alphas: tuple
    dimension: int

    def __post_init__(self):
        p = self.field.p
        alphas = tuple(a % p for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if len(set(alphas)) != len(alphas):
            raise ValueError("evaluation points must be distinct")
        if not 0 <= self.dimension <= len(alphas):
            raise ValueError(f"dimension {self.dimension} outside 0..{len(alphas)}")

    @classmethod
    def default(cls, field: GF, n: int, dimension: int) -> "RsCode":
        """Evaluation points 1, 2, ..., n reduced mod p (so n = p uses 0 last)."""
        if n > field.p:
            raise ValueError(f"RS code of length {n} needs a field with at least {n} elements")
        return cls(field, tuple(range(1, n + 1)), dimension)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def min_distance(self) -> int:
        return self.n - self.dimension + 1

    def with_dimension(self, dimension: int) -> "RsCode":
        return RsCode(self.field, self.alphas, dimension)

    def generator_matrix(self) -> list[list[int]]:
        """Vandermonde generator: row i holds alpha_j ** i."""
        p = self.field.p
        return [[pow(a, i, p) for a in self.alphas] for i in range(self.dimension)]


def rs_encode(f: Polynomial, code: RsCode) -> list[int]:
    if f.field != code.field:
        raise ValueError(f"polynomial over {f.field} cannot be encoded in a code over {code.field}")
    if f.degree >= code.dimension:
        raise ValueError(f"degree {f.degree} too high for RS[{code.n},{code.dimension}]")
    return [f(a) for a in code.alphas]


def _solve(field: GF, rows: list[list[int]], ncols: int) -> Optional[list[int]]:
    """Any solution of the augmented system ``rows`` (free variables = 0)."""
    p = field.p
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        pr = [v * inv % p for v in rows[r]]
        rows[r] = pr
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                m = rows[i][c]
                ri = rows[i]
                rows[i] = [(a - m * b) % p for a, b in zip(ri, pr)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if rows[i][ncols]:
            return None
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][ncols]
    return x


def _berlekamp_welch(field: GF, xs: list[int], ys: list[int], kappa: int, e: int) -> Optional[Polynomial]:
    p = field.p
    # unknowns: Q_0..Q_{kappa+e-1}, E_0..E_{e-1}; E monic of degree e
    nq = kappa + e
    rows = []
    for x, y in zip(xs, ys):
        row = []
        xp = 1
        for _ in range(nq):
            row.append(xp)
            xp = xp * x % p
        xp = 1
        for _ in range(e):
            row.append(-y * xp % p)
            xp = xp * x % p
        row.append(y * xp % p)
        rows.append(row)
    sol = _solve(field, rows, nq + e)
    if sol is None:
        return None
    q = Polynomial(field, sol[:nq])
    err_loc = Polynomial(field, sol[nq:] + [1])
    f, rem = divmod(q, err_loc)
    if not rem.is_zero():
        return None
    return f


def rs_decode_errors_erasures(w: ReceivedWord, code: RsCode, b: int, r: int) -> Polynomial:
    """Recover f with deg f < code.dimension from ``w``.

    ``w`` may hold up to ``r`` :data:`ERASURE` symbols and up to ``b`` wrong
    values; ``n - dimension >= 2b + r`` is required.  Returns the unique
    polynomial within the decoding radius or raises :class:`DecodeFailure`.
    """
    n, kappa, field = code.n, code.dimension, code.field
    if len(w) != n:
        raise ValueError(f"received word has length {len(w)}, code length is {n}")
    if n - kappa < 2 * b + r:
        raise ValueError(f"RS[{n},{kappa}] cannot handle b={b} errors and r={r} erasures")
    xs, ys = [], []
    for a, v in zip(code.alphas, w):
        if v is ERASURE:
            continue
        xs.append(a)
        ys.append(int(v) % field.p)
    erased = n - len(xs)
    if erased > r:
        raise TooManyErasures(f"{erased} erasures exceed the budget r={r}")
    if len(xs) < kappa:
        raise TooManyErasures("fewer surviving symbols than the code dimension")
    radius = (len(xs) - kappa) // 2
    f = _berlekamp_welch(field, xs, ys, kappa, radius)
    if f is None or f.degree >= kappa:
        raise DecodeFailure("no codeword within the decoding radius")
    wrong = sum(1 for x, y in zip(xs, ys) if f(x) != y)
    if wrong > radius:
        raise DecodeFailure("no codeword within the decoding radius")
    return f
