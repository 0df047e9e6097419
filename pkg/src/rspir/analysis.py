"""Closed-form rates and the comparison against the Zhang-Ge scheme.

Rates of this scheme are exact :class:`~fractions.Fraction` values.  The
Zhang-Ge asymptotic rates are exact too (ratios of binomials); the finite-M
comparison curves are floats.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence, Union

from .protocol import SchemeParams

OURS = "rs-pir"
ZG_BYZANTINE = "zg-byzantine"
ZG_UNRESPONSIVE = "zg-unresponsive"

CSV_COLUMNS = ("scheme", "n", "k", "t", "b", "r", "M", "rate")

# Finite-M comparison curves at (n, k, t) = (12, 2, 3), as c*(1-q)/(1-q**M).
# c*(1-q) equals the corresponding asymptotic rate.
FIGURE_NKT = (12, 2, 3)
FIGURE_CURVES = {
    ZG_BYZANTINE: (2, 0, Fraction(4, 11), Fraction(5, 4)),
    ZG_UNRESPONSIVE: (0, 2, Fraction(9, 11), Fraction(2, 3)),
}


class UnsupportedComparison(ValueError):
    pass


@dataclass(frozen=True)
class RatePoint:
    scheme: str
    n: int
    k: int
    t: int
    b: int
    r: int
    M: Optional[int]  # None means M -> infinity
    rate: Union[Fraction, float]
    feasible: bool = True

    def to_row(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n, "k": self.k, "t": self.t, "b": self.b, "r": self.r,
            "M": "inf" if self.M is None else self.M,
            "rate": format_rate(self.rate),
        }


def format_rate(rate) -> str:
    if isinstance(rate, Fraction):
        return str(rate)
    return repr(float(rate))


def rate_ours(n: int, k: int, t: int, b: int, r: int) -> Fraction:
    """(n - r - (k + t + 2b - 1)) / (n - r); raises on infeasible parameters."""
    SchemeParams(n, k, t, b, r)
    return Fraction(n - r - (k + t + 2 * b - 1), n - r)


@dataclass(frozen=True)
class ComparisonRate:
    rate: Fraction
    positive: bool


def rate_zg_asymptotic(n: int, k: int, t: int, b: int = 0, r: int = 0) -> ComparisonRate:
    """Asymptotic (M -> inf) rate of the Zhang-Ge scheme.

    That scheme handles byzantine or unresponsive servers but not both.  A
    nonpositive value means the scheme is infeasible there; it is reported
    as is and flagged, never clamped.
    """
    if b > 0 and r > 0:
        raise UnsupportedComparison("the comparison scheme handles b > 0 or r > 0, not both")
    total = comb(n, k)
    if r > 0:
        rate = Fraction(n, n - r) * Fraction(comb(n - r, k) + comb(n - t, k) - total, total)
    else:
        rate = Fraction(2 * (comb(n - b, k) - total) + comb(n - t, k), total)
    return ComparisonRate(rate, rate > 0)


def figure_curve(scheme: str, M: int) -> float:
    _, _, c, q = FIGURE_CURVES[scheme]
    c, q = float(c), float(q)
    return c * (1 - q) / (1 - q ** M)


def rate_curves_figure(m_max: int) -> list[RatePoint]:
    """The four rate-versus-M curves at (n, k, t) = (12, 2, 3), M = 1..m_max."""
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    n, k, t = FIGURE_NKT
    points = []
    for b, r in ((2, 0), (0, 2)):
        rate = rate_ours(n, k, t, b, r)
        points += [RatePoint(OURS, n, k, t, b, r, M, rate) for M in range(1, m_max + 1)]
    for scheme, (b, r, _, _) in FIGURE_CURVES.items():
        feasible = rate_zg_asymptotic(n, k, t, b, r).positive
        points += [
            RatePoint(scheme, n, k, t, b, r, M, figure_curve(scheme, M), feasible)
            for M in range(1, m_max + 1)
        ]
    return points


def rates_csv(points: Sequence[RatePoint]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for pt in points:
        writer.writerow(pt.to_row())
    return buf.getvalue()
