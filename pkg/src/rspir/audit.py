"""Executable privacy checks.

* :func:`audit_privacy_exact` enumerates all query randomness and compares
  the colluders' view distributions under every desired index.
* :func:`audit_privacy_statistical` does the same by sampling, with a
  chi-square homogeneity test.
* :func:`audit_symmetry_exact` checks that, with the shared server mask, the
  response transcript carries no information about the non-target files.

The colluders' view is their queries in every round.  Responses are a
function of queries and storage, so honest-but-curious colluders learn
nothing more from them.

``masked=False`` replaces the randomness by zeros.  That is a deliberately
broken scheme, and the audits must reject it.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field as dc_field
from random import Random
from typing import Optional, Sequence

from scipy import stats

from .adversary import derive_rng
from .galois import GF, Polynomial, next_prime
from .protocol import SchemeParams, query_vectors
from .reed_solomon import RsCode

MAX_ENUMERATION = 2_000_000


class EnumerationTooLarge(ValueError):
    """The exact audit would enumerate too many cases; use the statistical mode."""


@dataclass
class PrivacyVerdict:
    mode: str
    colluding_set: tuple
    passed: bool
    enumeration_size: Optional[int] = None
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    p_value: Optional[float] = None
    details: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "colluding_set": list(self.colluding_set),
            "passed": self.passed,
            "enumeration_size": self.enumeration_size,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "p_value": self.p_value,
            "details": self.details,
        }


def audit_field(params: SchemeParams) -> GF:
    """Smallest prime field with room for n nonzero evaluation points."""
    return GF(next_prime(params.n))


def _code(params: SchemeParams, field: Optional[GF], code: Optional[RsCode]) -> RsCode:
    if code is not None:
        return code
    return RsCode.default(field or audit_field(params), params.n, params.k)


def _rows(params: SchemeParams):
    return [(m, l) for m in range(1, params.M + 1) for l in range(1, params.L + 1)]


def _masks_from(params: SchemeParams, field: GF, flat: Sequence[int]) -> list[dict]:
    """Split a flat randomness vector into per-round mask dictionaries."""
    t = params.t
    rows = _rows(params)
    per_round = len(rows) * t
    out = []
    for s in range(params.S):
        chunk = flat[s * per_round : (s + 1) * per_round]
        out.append({row: Polynomial(field, chunk[idx * t : (idx + 1) * t]) for idx, row in enumerate(rows)})
    return out


def _view(params: SchemeParams, code: RsCode, i: int, T: Sequence[int], flat: Sequence[int]) -> tuple:
    return tuple(
        query_vectors(params, code, i, s, masks, servers=T)
        for s, masks in enumerate(_masks_from(params, code.field, flat), 1)
    )


def _flatten(view: tuple) -> tuple:
    return tuple(x for rnd in view for server in rnd for x in server)


def _affine_view(params: SchemeParams, code: RsCode, i: int, T: Sequence[int], nvars: int):
    """The flattened view is offset + sum(flat[v] * column[v]); columns are kept sparse."""
    p = code.field.p
    offset = _flatten(_view(params, code, i, T, (0,) * nvars))
    columns = []
    for v in range(nvars):
        unit = [0] * nvars
        unit[v] = 1
        image = _flatten(_view(params, code, i, T, unit))
        columns.append([(c, (x - o) % p) for c, (x, o) in enumerate(zip(image, offset)) if x != o])
    return offset, columns


def _enumerate_views(params: SchemeParams, code: RsCode, i: int, T: Sequence[int], nvars: int) -> Counter:
    p = code.field.p
    offset, columns = _affine_view(params, code, i, T, nvars)
    counts: Counter = Counter()
    for flat in itertools.product(range(p), repeat=nvars):
        view = list(offset)
        for value, col in zip(flat, columns):
            if value:
                for c, coeff in col:
                    view[c] = (view[c] + value * coeff) % p
        counts[tuple(view)] += 1
    return counts


def _check_T(params: SchemeParams, T) -> tuple:
    T = tuple(sorted(T))
    if not all(1 <= j <= params.n for j in T) or len(set(T)) != len(T):
        raise ValueError(f"colluding set {T} must hold distinct servers in 1..{params.n}")
    return T


def audit_privacy_exact(
    params: SchemeParams,
    T: Sequence[int],
    field: Optional[GF] = None,
    code: Optional[RsCode] = None,
    masked: bool = True,
    max_enumeration: int = MAX_ENUMERATION,
) -> PrivacyVerdict:
    """Compare the exact distributions of the view of ``T`` under every index."""
    code = _code(params, field, code)
    field = code.field
    T = _check_T(params, T)
    nvars = params.t * params.L * params.M * params.S
    size = field.p ** nvars
    if params.M == 1 or not T:
        return PrivacyVerdict("exact", T, True, 0, details={"reason": "vacuous"})
    if size * params.M > max_enumeration:
        raise EnumerationTooLarge(f"{params.M} x {field.p}^{nvars} assignments exceed {max_enumeration}")
    dists = []
    for i in range(1, params.M + 1):
        if masked:
            dists.append(_enumerate_views(params, code, i, T, nvars))
        else:
            dists.append(Counter({_flatten(_view(params, code, i, T, (0,) * nvars)): size}))
    passed = all(d == dists[0] for d in dists[1:])
    return PrivacyVerdict(
        "exact", T, passed, size,
        details={"p": field.p, "distinct_views": [len(d) for d in dists]},
    )


def audit_privacy_statistical(
    params: SchemeParams,
    T: Sequence[int],
    trials: int,
    significance: float,
    field: Optional[GF] = None,
    code: Optional[RsCode] = None,
    seed=0,
    masked: bool = True,
    indices: tuple = (1, 2),
) -> PrivacyVerdict:
    """Chi-square test of equal view distributions under two desired indices.

    Passes unless homogeneity is rejected at ``significance``.
    """
    code = _code(params, field, code)
    field = code.field
    T = _check_T(params, T)
    if params.M == 1 or not T:
        return PrivacyVerdict("statistical", T, True, details={"reason": "vacuous"})
    nvars = params.t * params.L * params.M * params.S
    zeros = (0,) * nvars
    samples = []
    for i in indices:
        rng: Random = derive_rng(seed, "privacy", i)
        counts: Counter = Counter()
        for _ in range(trials):
            flat = [rng.randrange(field.p) for _ in range(nvars)] if masked else zeros
            counts[_view(params, code, i, T, flat)] += 1
        samples.append(counts)
    cells = sorted(set().union(*samples))
    details = {"p": field.p, "trials": trials, "cells": len(cells), "indices": list(indices)}
    if len(cells) == 1:
        return PrivacyVerdict("statistical", T, True, statistic=0.0, p_value=1.0, details=details)
    table = [[c[v] for v in cells] for c in samples]
    chi2, p_value, dof, _ = stats.chi2_contingency(table, correction=False)
    threshold = float(stats.chi2.ppf(1 - significance, dof))
    details["dof"] = int(dof)
    return PrivacyVerdict(
        "statistical", T, bool(p_value >= significance),
        statistic=float(chi2), threshold=threshold, p_value=float(p_value), details=details,
    )


def audit_symmetry_exact(
    params: SchemeParams,
    i: int,
    field: Optional[GF] = None,
    code: Optional[RsCode] = None,
    target: Optional[Sequence[Sequence[int]]] = None,
    masked: bool = True,
    max_enumeration: int = MAX_ENUMERATION,
) -> PrivacyVerdict:
    """Check the response transcript is independent of the non-target files.

    For every assignment of the user's query randomness (the target file is
    fixed to ``target``, all ones by default), the distribution of the
    transcript over the shared masks must be the same for every content of
    the other files.
    """
    code = _code(params, field, code)
    field = code.field
    p, n, L, k, S = field.p, params.n, params.L, params.k, params.S
    if not 1 <= i <= params.M:
        raise ValueError(f"file index {i} outside 1..{params.M}")
    if params.M == 1:
        return PrivacyVerdict("exact", (), True, 0, details={"reason": "vacuous"})
    nvars = params.t * L * params.M * S
    others = [m for m in range(1, params.M + 1) if m != i]
    n_file_vars = len(others) * L * k
    n_mask_vars = S * params.offset
    size = p ** (nvars + n_file_vars + n_mask_vars)
    if size > max_enumeration:
        raise EnumerationTooLarge(f"{size} cases exceed {max_enumeration}")
    if target is None:
        target = [[1] * k for _ in range(L)]
    powers = [[pow(a, c, p) for c in range(max(k, params.offset))] for a in code.alphas]

    def stripe_at(coeffs, j):
        return sum(c * pw for c, pw in zip(coeffs, powers[j])) % p

    target_vals = [[stripe_at(target[l], j) for l in range(L)] for j in range(n)]
    mask_evals = []
    for flat in itertools.product(range(p), repeat=params.offset):
        mask_evals.append([stripe_at(flat, j) for j in range(n)])
    if not masked:
        mask_evals = [[0] * n]
    passed = True
    for flat in itertools.product(range(p), repeat=nvars):
        rounds = [
            query_vectors(params, code, i, s, masks)
            for s, masks in enumerate(_masks_from(params, field, flat), 1)
        ]
        # fixed part: target file contribution per round and server
        base = [
            [sum(q[j][(i - 1) * L + l] * target_vals[j][l] for l in range(L)) % p for j in range(n)]
            for q in rounds
        ]
        reference = None
        for content in itertools.product(range(p), repeat=n_file_vars):
            other_part = []
            for q in rounds:
                row = []
                for j in range(n):
                    acc = 0
                    for idx, m in enumerate(others):
                        for l in range(L):
                            off = (idx * L + l) * k
                            acc += q[j][(m - 1) * L + l] * stripe_at(content[off : off + k], j)
                    row.append(acc)
                other_part.append(row)
            dist: Counter = Counter()
            for masks in itertools.product(mask_evals, repeat=S):
                dist[tuple(
                    tuple((base[s][j] + other_part[s][j] + masks[s][j]) % p for j in range(n))
                    for s in range(S)
                )] += 1
            if reference is None:
                reference = dist
            elif dist != reference:
                passed = False
                break
        if not passed:
            break
    return PrivacyVerdict(
        "exact", (), passed, size,
        details={"p": p, "desired": i, "non_target": others, "masked": masked},
    )
