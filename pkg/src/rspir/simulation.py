"""End-to-end retrievals against simulated servers, and parameter sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .adversary import AdversarySpec, Placement, corrupt_round, derive_rng, expand_exhaustive
from .galois import GF
from .protocol import (
    InfeasibleParameters,
    RetrievalSession,
    RoundFailure,
    SchemeParams,
    server_response,
    symmetric_mask,
)
from .reed_solomon import ERASURE, RsCode
from .storage import FileMatrix, StorageSystem, encode_system

log = logging.getLogger(__name__)

DEFAULT_MODULUS = 65537


@dataclass
class ExperimentResult:
    success: bool
    retrieved: Optional[FileMatrix]
    rounds_used: int
    downloaded_symbols: int
    rate_observed: Optional[Fraction]
    corrupted_positions: int = 0
    transcript: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "retrieved": [list(row) for row in self.retrieved.rows] if self.retrieved else None,
            "rounds_used": self.rounds_used,
            "downloaded_symbols": self.downloaded_symbols,
            "rate_observed": str(self.rate_observed) if self.rate_observed is not None else None,
            "corrupted_positions": self.corrupted_positions,
            "transcript": self.transcript,
        }


def build_system(params: SchemeParams, p: int = DEFAULT_MODULUS, seed=0, files=None) -> StorageSystem:
    """Storage for ``params`` with random files from ``seed`` unless ``files`` is given."""
    field = GF(p)
    code = RsCode.default(field, params.n, params.k)
    if files is None:
        rng = derive_rng(seed, "files")
        files = [FileMatrix.random(field, params.L, params.k, rng) for _ in range(params.M)]
    return encode_system(files, code, params)


def _keep_first(word: list, budget: int) -> list:
    """Client reads only the first ``budget`` responsive servers; the rest count as erased."""
    out, kept = [], 0
    for v in word:
        if v is not ERASURE and kept < budget:
            kept += 1
            out.append(v)
        else:
            out.append(ERASURE)
    return out


def run_retrieval(
    system: StorageSystem,
    i: int,
    adversary: Optional[AdversarySpec] = None,
    symmetric: bool = False,
    seed=0,
    keep_transcript: bool = False,
) -> ExperimentResult:
    """Retrieve file ``i`` from ``system`` over all S rounds.

    Per round the client downloads at most n - r symbols.  Raises
    :class:`RoundFailure` if a round cannot be decoded.
    """
    params = system.params
    if params is None:
        raise ValueError("storage system has no scheme parameters attached")
    code, field = system.code, system.code.field
    session = RetrievalSession(params, code, i, derive_rng(seed, "query"))
    downloaded = corrupted = 0
    transcript = [] if keep_transcript else None
    while not session.done:
        q = session.next_query()
        s = q.s
        masks = symmetric_mask(params, code, s, derive_rng(seed, "shared", s)) if symmetric else [0] * params.n
        clean = [server_response(q.vectors[j], system.columns[j], field, masks[j]) for j in range(params.n)]
        word = corrupt_round(clean, adversary, s, field) if adversary is not None else list(clean)
        word = _keep_first(word, params.n - params.r)
        downloaded += sum(1 for v in word if v is not ERASURE)
        corrupted += sum(1 for v, c in zip(word, clean) if v is not ERASURE and v != c)
        if transcript is not None:
            transcript.append({
                "round": s,
                "queries": [list(v) for v in q.vectors],
                "responses": [None if v is ERASURE else v for v in word],
            })
        h = session.receive(word)
        if transcript is not None:
            transcript[-1]["package"] = h.padded(params.rho)
    retrieved = session.result()
    return ExperimentResult(
        success=retrieved == system.files[i - 1],
        retrieved=retrieved,
        rounds_used=params.S,
        downloaded_symbols=downloaded,
        rate_observed=Fraction(params.L * params.k, downloaded),
        corrupted_positions=corrupted,
        transcript=transcript,
    )


@dataclass
class SweepSummary:
    n: int
    k: int
    t: int
    b: int
    r: int
    M: int
    feasible: bool
    runs: int = 0
    successes: int = 0
    round_failures: int = 0
    wrong_file: int = 0
    corrupted_positions: int = 0
    rate_expected: Optional[Fraction] = None
    rates_observed: tuple = ()

    FIELDS = (
        "n", "k", "t", "b", "r", "M", "feasible", "runs", "successes", "round_failures",
        "wrong_file", "corrupted_positions", "rate_expected", "rates_observed",
    )

    def to_row(self) -> dict:
        row = {f: getattr(self, f) for f in self.FIELDS}
        row["rate_expected"] = "" if self.rate_expected is None else str(self.rate_expected)
        row["rates_observed"] = ";".join(str(x) for x in self.rates_observed)
        return row


def _point_tuple(point) -> tuple:
    if isinstance(point, SchemeParams):
        return (point.n, point.k, point.t, point.b, point.r, point.M)
    if isinstance(point, dict):
        return tuple(point[key] for key in ("n", "k", "t", "b", "r")) + (point.get("M", 2),)
    point = tuple(point)
    return point if len(point) == 6 else point + (2,)


def run_point(point, trials: int, adversary: Optional[AdversarySpec], seed, p: int, symmetric: bool = False) -> SweepSummary:
    """All trials for one grid point; the adversary budget is set to the point's (b, r)."""
    n, k, t, b, r, M = _point_tuple(point)
    try:
        params = SchemeParams(n, k, t, b, r, M)
    except InfeasibleParameters:
        return SweepSummary(n, k, t, b, r, M, feasible=False)
    summary = SweepSummary(n, k, t, b, r, M, feasible=True, rate_expected=params.rate)
    observed = set()
    for trial in range(trials):
        tseed = f"{seed}/{n},{k},{t},{b},{r},{M}/{trial}"
        system = build_system(params, p, tseed)
        i = derive_rng(tseed, "index").randint(1, M)
        if adversary is None:
            specs = [None]
        else:
            template = replace(adversary, b=b, r=r, seed=tseed)
            if template.placement is Placement.EXHAUSTIVE:
                specs = expand_exhaustive(template, n)
            else:
                specs = [template]
        for spec in specs:
            summary.runs += 1
            try:
                res = run_retrieval(system, i, spec, symmetric, seed=tseed)
            except RoundFailure as exc:
                log.debug("round failure at %s: %s", (n, k, t, b, r, M), exc)
                summary.round_failures += 1
                continue
            summary.corrupted_positions += res.corrupted_positions
            if res.success:
                summary.successes += 1
                observed.add(res.rate_observed)
            else:
                summary.wrong_file += 1
    summary.rates_observed = tuple(sorted(observed))
    return summary


def _run_point_args(args):
    return run_point(*args)


def sweep(
    grid: Iterable,
    trials: int,
    adversary: Optional[AdversarySpec] = None,
    seed=0,
    p: int = DEFAULT_MODULUS,
    jobs: int = 1,
    symmetric: bool = False,
) -> list[SweepSummary]:
    """Run ``trials`` retrievals per grid point; output order follows the grid."""
    tasks = [(point, trials, adversary, seed, p, symmetric) for point in grid]
    if jobs <= 1:
        return [run_point(*task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_point_args, tasks))


def parameter_grid(n_max: int, k_max: int, t_max: int, b_max: int, r_max: int, M: int = 2) -> list[tuple]:
    """Every (n, k, t, b, r, M) with n <= n_max inside the given bounds, feasible or not."""
    return [
        (n, k, t, b, r, M)
        for n in range(1, n_max + 1)
        for k in range(1, min(k_max, n) + 1)
        for t in range(t_max + 1)
        for b in range(b_max + 1)
        for r in range(r_max + 1)
    ]


def summaries_ok(summaries: Sequence[SweepSummary]) -> bool:
    return all(s.successes == s.runs for s in summaries if s.feasible)
