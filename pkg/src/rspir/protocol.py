"""The retrieval scheme: parameters, queries, round decoding, reconstruction.

Indices follow the usual 1-based convention of the protocol description:
files ``m = 1..M``, stripes ``l = 1..L``, rounds ``s = 1..S`` and servers
``j = 1..n``.

Row ``l`` of the desired file gets the monomial ``z**x`` added to its query
in round ``s``, with ``x = s*rho + (1 - l)*k + t - 1``.  The same exponent is
sometimes written ``s*rho - l*k + k + t - 1``; the two are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from random import Random
from typing import Mapping, Optional, Sequence

from .galois import GF, Polynomial
from .reed_solomon import ERASURE, DecodeFailure, ReceivedWord, RsCode, rs_decode_errors_erasures
from .storage import FileMatrix


class InfeasibleParameters(ValueError):
    pass


class RoundFailure(Exception):
    """A round could not be decoded; the adversary exceeded its budget."""

    def __init__(self, s: int, reason: str):
        super().__init__(f"round {s}: {reason}")
        self.round = s
        self.reason = reason


@dataclass(frozen=True)
class SchemeParams:
    n: int
    k: int
    t: int
    b: int
    r: int
    M: int = 1

    def __post_init__(self):
        for name in ("n", "k", "t", "b", "r", "M"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.k < 1 or self.n < 1 or self.M < 1:
            raise ValueError("n, k and M must be at least 1")
        if self.n <= self.k + self.t + 2 * self.b + self.r - 1:
            raise InfeasibleParameters(
                f"need n > k + t + 2b + r - 1, got n={self.n} <= "
                f"{self.k}+{self.t}+2*{self.b}+{self.r}-1 = {self.k + self.t + 2 * self.b + self.r - 1}"
            )

    @property
    def rho(self) -> int:
        """Desired-file symbols recovered per round."""
        return self.n - (self.k + self.t + 2 * self.b + self.r - 1)

    @property
    def L(self) -> int:
        return math.lcm(self.rho, self.k) // self.k

    @property
    def S(self) -> int:
        return math.lcm(self.rho, self.k) // self.rho

    @property
    def rate(self) -> Fraction:
        return Fraction(self.L * self.k, self.S * (self.n - self.r))

    @property
    def offset(self) -> int:
        """k + t - 1: first coefficient of a round's package in the response polynomial."""
        return self.k + self.t - 1

    @property
    def response_dimension(self) -> int:
        """n - 2b - r, the dimension of the code the responses live in."""
        return self.n - 2 * self.b - self.r

    def with_files(self, M: int) -> "SchemeParams":
        return SchemeParams(self.n, self.k, self.t, self.b, self.r, M)


def compute_params(n: int, k: int, t: int, b: int, r: int, M: int = 1) -> SchemeParams:
    return SchemeParams(n, k, t, b, r, M)


def monomial_term(x: int, t: int, field: GF) -> Polynomial:
    """``z**x`` when ``x >= t``, otherwise the zero polynomial."""
    if x >= t:
        return field.monomial(x)
    return field.zero_poly()


def query_exponent(params: SchemeParams, s: int, l: int) -> int:
    return s * params.rho + (1 - l) * params.k + params.t - 1


@dataclass(frozen=True)
class QueryRound:
    """Everything the client produces for round ``s``.

    ``vectors[j-1]`` is what goes to server j.  ``masks`` and ``desired`` are
    client-side secrets.
    """

    s: int
    desired: int
    vectors: tuple
    masks: Mapping
    params: SchemeParams
    field: GF

    def polynomial(self, m: int, l: int) -> Polynomial:
        """The query polynomial for row l of file m."""
        q = self.masks[(m, l)]
        if m == self.desired:
            q = q + monomial_term(query_exponent(self.params, self.s, l), self.params.t, self.field)
        return q


def _check_indices(params: SchemeParams, i: int, s: int) -> None:
    if not 1 <= s <= params.S:
        raise ValueError(f"round {s} outside 1..{params.S}")
    if not 1 <= i <= params.M:
        raise ValueError(f"file index {i} outside 1..{params.M}")


def query_vectors(
    params: SchemeParams,
    code: RsCode,
    i: int,
    s: int,
    masks: Mapping,
    servers: Optional[Sequence[int]] = None,
) -> tuple:
    """Evaluate the round-s query polynomials at the servers' points.

    ``masks[(m, l)]`` is the random polynomial of degree < t for that row.
    Only the listed ``servers`` (1-based) are evaluated when given.
    """
    f = code.field
    p = f.p
    L, t = params.L, params.t
    exps = [query_exponent(params, s, l) for l in range(1, L + 1)]
    if servers is None:
        servers = range(1, code.n + 1)
    out = []
    for j in servers:
        a = code.alphas[j - 1]
        vec = []
        for m in range(1, params.M + 1):
            for l in range(1, L + 1):
                v = masks[(m, l)](a)
                if m == i and exps[l - 1] >= t:
                    v = (v + pow(a, exps[l - 1], p)) % p
                vec.append(v)
        out.append(tuple(vec))
    return tuple(out)


def draw_masks(params: SchemeParams, field: GF, rng: Random) -> dict:
    """Independent uniform polynomials of degree < t, one per (file, row)."""
    return {
        (m, l): field.random_poly(params.t, rng)
        for m in range(1, params.M + 1)
        for l in range(1, params.L + 1)
    }


def build_query_round(params: SchemeParams, code: RsCode, i: int, s: int, rng: Random) -> QueryRound:
    _check_indices(params, i, s)
    masks = draw_masks(params, code.field, rng)
    return QueryRound(s, i, query_vectors(params, code, i, s, masks), masks, params, code.field)


def server_response(q_j: Sequence[int], y_j: Sequence[int], field: GF, mask: int = 0) -> int:
    """Inner product <q_j, y_j> plus an optional shared mask value."""
    if len(q_j) != len(y_j):
        raise ValueError(f"query has length {len(q_j)}, server stores {len(y_j)} symbols")
    return (sum(a * b for a, b in zip(q_j, y_j)) + mask) % field.p


def response_code(params: SchemeParams, storage_code: RsCode) -> RsCode:
    return storage_code.with_dimension(params.response_dimension)


def decode_round(
    responses: ReceivedWord,
    params: SchemeParams,
    code_n: RsCode,
    known: Sequence[Polynomial],
    s: int,
) -> Polynomial:
    """Recover the round-s package from one round of (corrupted) responses.

    ``known`` holds the packages of rounds 1..s-1.  Their contribution
    z^(k+t-1+rho*(s-sigma)) h_sigma(z) is subtracted before decoding; what is
    left lies in RS[n, n-2b-r] and its coefficients k+t-1 .. k+t-2+rho are
    the package.
    """
    if len(known) != s - 1:
        raise ValueError(f"round {s} needs {s - 1} known packages, got {len(known)}")
    field = code_n.field
    p = field.p
    off, rho = params.offset, params.rho
    shifted = [(off + rho * (s - sigma), h) for sigma, h in enumerate(known, 1)]
    word = []
    for a, v in zip(code_n.alphas, responses):
        if v is ERASURE:
            word.append(ERASURE)
            continue
        for shift, h in shifted:
            v = v - h(a) * pow(a, shift, p)
        word.append(v % p)
    try:
        poly = rs_decode_errors_erasures(word, code_n, params.b, params.r)
    except DecodeFailure as exc:
        raise RoundFailure(s, str(exc)) from exc
    return poly.slice(off, off + rho)


def reconstruct_file(packages: Sequence[Optional[Polynomial]], params: SchemeParams, field: GF) -> FileMatrix:
    """Re-chunk the S packages (size rho) into the L rows (size k).

    Package s fills stream positions (S-s)*rho ..; row l is read from
    positions (L-l)*k .. (L-l)*k + k - 1.
    """
    S, L, k, rho = params.S, params.L, params.k, params.rho
    if len(packages) != S or any(h is None for h in packages):
        raise ValueError(f"need all {S} packages to reconstruct the file")
    stream = [0] * (L * k)
    for s, h in enumerate(packages, 1):
        if h.degree >= rho:
            raise ValueError(f"package {s} has degree {h.degree} >= rho={rho}")
        base = (S - s) * rho
        stream[base : base + rho] = h.padded(rho)
    rows = tuple(tuple(stream[(L - l) * k : (L - l) * k + k]) for l in range(1, L + 1))
    return FileMatrix(field, rows)


def mask_polynomial(params: SchemeParams, field: GF, shared_rng: Random) -> Polynomial:
    return field.random_poly(params.offset, shared_rng)


def symmetric_mask(params: SchemeParams, code: RsCode, s: int, shared_rng: Random) -> list[int]:
    """Shared server randomness for round s: eval of a uniform poly of degree < k+t-1."""
    if not 1 <= s <= params.S:
        raise ValueError(f"round {s} outside 1..{params.S}")
    pi = mask_polynomial(params, code.field, shared_rng)
    return [pi(a) for a in code.alphas]


@dataclass
class RetrievalSession:
    """Client state for retrieving file ``i``: queries sent and packages recovered."""

    params: SchemeParams
    code: RsCode
    i: int
    rng: Random
    queries: list = dc_field(default_factory=list)
    packages: list = dc_field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.i <= self.params.M:
            raise ValueError(f"file index {self.i} outside 1..{self.params.M}")
        self._response_code = response_code(self.params, self.code)

    @property
    def round(self) -> int:
        """The round whose responses are awaited (or next to be queried)."""
        return len(self.packages) + 1

    @property
    def done(self) -> bool:
        return len(self.packages) == self.params.S

    def next_query(self) -> QueryRound:
        if self.done:
            raise RuntimeError("all rounds already completed")
        if len(self.queries) != len(self.packages):
            raise RuntimeError(f"responses for round {self.round} not received yet")
        q = build_query_round(self.params, self.code, self.i, self.round, self.rng)
        self.queries.append(q)
        return q

    def receive(self, responses: ReceivedWord) -> Polynomial:
        if len(self.queries) != len(self.packages) + 1:
            raise RuntimeError("no outstanding query")
        h = decode_round(responses, self.params, self._response_code, self.packages, self.round)
        self.packages.append(h)
        return h

    def result(self) -> FileMatrix:
        return reconstruct_file(self.packages, self.params, self.code.field)
