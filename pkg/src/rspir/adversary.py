"""Byzantine and unresponsive server models applied to one round of responses.

Server positions are 1-based.  Randomness for round ``s`` comes from a
generator seeded with ``(seed, s)`` only, so a spec replays identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from random import Random
from typing import Iterator, Sequence

from .galois import GF
from .reed_solomon import ERASURE, Symbol


class Strategy(str, Enum):
    REPLACE_UNIFORM_RANDOM = "replace-uniform-random"
    ADD_UNIFORM_NONZERO = "add-uniform-nonzero"
    FIXED_VALUE = "fixed-value"
    NO_OP = "no-op"


class Placement(str, Enum):
    FIXED_SETS = "fixed-sets"
    RESAMPLE_EACH_ROUND = "resample-each-round"
    EXHAUSTIVE = "exhaustive-enumeration"


def derive_rng(*parts) -> Random:
    """Deterministic generator keyed by ``parts`` (str seeding is stable across runs)."""
    return Random("/".join(str(p) for p in parts))


@dataclass(frozen=True)
class AdversarySpec:
    """Budget and behaviour of the faulty servers.

    With ``FIXED_SETS`` placement, ``byzantine_sets[s-1]`` and
    ``unresponsive_sets[s-1]`` are used in round s (the last entry repeats
    for later rounds).  ``EXHAUSTIVE`` specs are templates; expand them with
    :func:`expand_exhaustive` before use.
    """

    b: int = 0
    r: int = 0
    strategy: Strategy = Strategy.REPLACE_UNIFORM_RANDOM
    placement: Placement = Placement.RESAMPLE_EACH_ROUND
    seed: object = 0
    byzantine_sets: tuple = ()
    unresponsive_sets: tuple = ()
    fixed_value: int = 0
    saturate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "byzantine_sets", tuple(frozenset(x) for x in self.byzantine_sets))
        object.__setattr__(self, "unresponsive_sets", tuple(frozenset(x) for x in self.unresponsive_sets))
        if self.b < 0 or self.r < 0:
            raise ValueError("adversary budgets must be nonnegative")

    def with_seed(self, seed) -> "AdversarySpec":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "r": self.r,
            "strategy": self.strategy.value,
            "placement": self.placement.value,
            "seed": self.seed,
            "byzantine_sets": [sorted(x) for x in self.byzantine_sets],
            "unresponsive_sets": [sorted(x) for x in self.unresponsive_sets],
            "fixed_value": self.fixed_value,
            "saturate": self.saturate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdversarySpec":
        known = {
            "b", "r", "strategy", "placement", "seed", "byzantine_sets",
            "unresponsive_sets", "fixed_value", "saturate",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown adversary keys: {sorted(unknown)}")
        return cls(**d)


def _pick(sets: tuple, s: int) -> frozenset:
    if not sets:
        return frozenset()
    return sets[min(s, len(sets)) - 1]


def placement_for_round(spec: AdversarySpec, n: int, s: int) -> tuple[frozenset, frozenset]:
    """(byzantine set, unresponsive set) used in round s."""
    if spec.placement is Placement.EXHAUSTIVE:
        raise ValueError("exhaustive placement must be expanded with enumerate_placements()")
    if spec.placement is Placement.FIXED_SETS:
        byz, unresp = _pick(spec.byzantine_sets, s), _pick(spec.unresponsive_sets, s)
        if len(byz) > spec.b or len(unresp) > spec.r:
            raise ValueError(f"round {s}: placement exceeds budget b={spec.b}, r={spec.r}")
        if not all(1 <= j <= n for j in byz | unresp):
            raise ValueError(f"round {s}: server index outside 1..{n}")
        return byz, unresp
    rng = derive_rng(spec.seed, "placement", s)
    servers = list(range(1, n + 1))
    n_unresp = min(spec.r, n) if spec.saturate else rng.randint(0, min(spec.r, n))
    unresp = rng.sample(servers, n_unresp)
    rest = [j for j in servers if j not in unresp]
    n_byz = min(spec.b, len(rest)) if spec.saturate else rng.randint(0, min(spec.b, len(rest)))
    byz = rng.sample(rest, n_byz)
    return frozenset(byz), frozenset(unresp)


def corrupt_round(responses: Sequence[int], spec: AdversarySpec, s: int, field: GF) -> list[Symbol]:
    """Apply the round-s erasures and byzantine alterations to ``responses``.

    An erased position stays erased even if it is also byzantine.
    """
    n = len(responses)
    byz, unresp = placement_for_round(spec, n, s)
    rng = derive_rng(spec.seed, "values", s)
    out: list[Symbol] = list(responses)
    for j in sorted(byz):
        v = out[j - 1]
        if spec.strategy is Strategy.REPLACE_UNIFORM_RANDOM:
            out[j - 1] = field.random(rng)
        elif spec.strategy is Strategy.ADD_UNIFORM_NONZERO:
            out[j - 1] = (v + field.random_nonzero(rng)) % field.p
        elif spec.strategy is Strategy.FIXED_VALUE:
            out[j - 1] = spec.fixed_value % field.p
    for j in unresp:
        out[j - 1] = ERASURE
    return out


def enumerate_placements(
    n: int, b: int, r: int, exact: bool = True
) -> Iterator[tuple[frozenset, frozenset]]:
    """All disjoint (byzantine, unresponsive) placements.

    ``exact=True`` gives sets of size exactly b and r (n choose b times
    n-b choose r of them); otherwise every size b' <= b, r' <= r.
    """
    servers = range(1, n + 1)
    b_sizes = [b] if exact else range(b + 1)
    r_sizes = [r] if exact else range(r + 1)
    for bb in b_sizes:
        for byz in itertools.combinations(servers, bb):
            rest = [j for j in servers if j not in byz]
            for rr in r_sizes:
                for unresp in itertools.combinations(rest, rr):
                    yield frozenset(byz), frozenset(unresp)


def expand_exhaustive(spec: AdversarySpec, n: int, exact: bool = True) -> Iterator[AdversarySpec]:
    """Fixed-set specs, one per placement, applied identically in every round."""
    for idx, (byz, unresp) in enumerate(enumerate_placements(n, spec.b, spec.r, exact)):
        yield replace(
            spec,
            placement=Placement.FIXED_SETS,
            byzantine_sets=(byz,),
            unresponsive_sets=(unresp,),
            seed=f"{spec.seed}/placement{idx}",
        )


def fixed(b: int, r: int, byzantine: Sequence, unresponsive: Sequence, **kw) -> AdversarySpec:
    """Spec with fixed sets; pass one set per round or a single set for all rounds."""
    def norm(x):
        x = list(x)
        if x and not isinstance(x[0], (set, frozenset, list, tuple)):
            return (frozenset(x),)
        return tuple(frozenset(v) for v in x)

    return AdversarySpec(
        b=b, r=r, placement=Placement.FIXED_SETS,
        byzantine_sets=norm(byzantine), unresponsive_sets=norm(unresponsive), **kw,
    )


def honest() -> AdversarySpec:
    return AdversarySpec(b=0, r=0, strategy=Strategy.NO_OP)

