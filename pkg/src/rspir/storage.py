"""Plaintext files and the RS-coded distributed storage built from them.

Text format for plaintext files (one block per file, integers mod p)::

    # comments and blank lines are ignored
    p 65537
    file 1
    1 2 3 4
    5 6 7 8
    file 2
    ...

Each row line holds the k coefficients of one stripe, lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Optional, Sequence

from .galois import GF, Polynomial
from .reed_solomon import RsCode, rs_encode


@dataclass(frozen=True)
class FileMatrix:
    """An L x k file; row l is the stripe polynomial sum_c rows[l][c] z^c."""

    field: GF
    rows: tuple

    def __post_init__(self):
        p = self.field.p
        rows = tuple(tuple(int(v) % p for v in row) for row in self.rows)
        if not rows or not rows[0]:
            raise ValueError("a file needs at least one row and one column")
        if any(len(row) != len(rows[0]) for row in rows):
            raise ValueError("ragged file matrix")
        object.__setattr__(self, "rows", rows)

    @property
    def L(self) -> int:
        return len(self.rows)

    @property
    def k(self) -> int:
        return len(self.rows[0])

    def stripe(self, l: int) -> Polynomial:
        """Stripe polynomial for 1-based row ``l``."""
        return Polynomial(self.field, self.rows[l - 1])

    @classmethod
    def random(cls, field: GF, L: int, k: int, rng: Random) -> "FileMatrix":
        return cls(field, tuple(tuple(rng.randrange(field.p) for _ in range(k)) for _ in range(L)))


@dataclass(frozen=True)
class StorageSystem:
    """n server columns; ``columns[j-1]`` is y_j, laid out file-major, row-minor."""

    code: RsCode
    files: tuple
    columns: tuple
    params: Optional[object] = None

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def M(self) -> int:
        return len(self.files)

    @property
    def L(self) -> int:
        return self.files[0].L

    @property
    def k(self) -> int:
        return self.code.dimension

    def entry(self, j: int, m: int, l: int) -> int:
        """Server j's stored symbol for row l of file m (all 1-based)."""
        return self.columns[j - 1][(m - 1) * self.L + (l - 1)]


def encode_system(files: Sequence[FileMatrix], code: RsCode, params=None) -> StorageSystem:
    """RS-encode every stripe of every file and distribute the symbols.

    ``params`` (a :class:`~rspir.protocol.SchemeParams`) is optional and only
    validated against the file shapes and attached to the result.
    """
    if not files:
        raise ValueError("need at least one file")
    L, k = files[0].L, files[0].k
    for m, f in enumerate(files, 1):
        if f.field != code.field:
            raise ValueError(f"file {m} is over {f.field}, code is over {code.field}")
        if (f.L, f.k) != (L, k):
            raise ValueError(f"file {m} is {f.L}x{f.k}, expected {L}x{k}")
    if k != code.dimension:
        raise ValueError(f"files have k={k} columns but the storage code has dimension {code.dimension}")
    if params is not None:
        expected = (params.n, params.k, params.L, params.M)
        if (code.n, k, L, len(files)) != expected:
            raise ValueError(
                f"(n, k, L, M) = {(code.n, k, L, len(files))} does not match scheme parameters {expected}"
            )
    encoded = [[rs_encode(f.stripe(l), code) for l in range(1, L + 1)] for f in files]
    columns = tuple(
        tuple(encoded[m][l][j] for m in range(len(files)) for l in range(L)) for j in range(code.n)
    )
    return StorageSystem(code, tuple(files), columns, params)


def dump_files(files: Sequence[FileMatrix]) -> str:
    lines = [f"p {files[0].field.p}"]
    for m, f in enumerate(files, 1):
        lines.append(f"file {m}")
        lines.extend(" ".join(str(v) for v in row) for row in f.rows)
    return "\n".join(lines) + "\n"


def parse_files(text: str) -> tuple[GF, list[FileMatrix]]:
    field = None
    blocks: list[list[list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "p":
            if field is not None or len(rest) != 1:
                raise ValueError(f"line {lineno}: malformed modulus line")
            field = GF(int(rest[0]))
        elif head == "file":
            if len(rest) != 1 or int(rest[0]) != len(blocks) + 1:
                raise ValueError(f"line {lineno}: expected 'file {len(blocks) + 1}'")
            blocks.append([])
        else:
            if field is None or not blocks:
                raise ValueError(f"line {lineno}: row before 'p' and 'file' headers")
            values = [int(v) for v in line.split()]
            if any(not 0 <= v < field.p for v in values):
                raise ValueError(f"line {lineno}: value outside 0..{field.p - 1}")
            blocks[-1].append(values)
    if field is None or not blocks:
        raise ValueError("no files found")
    return field, [FileMatrix(field, tuple(map(tuple, b))) for b in blocks]


def load_files(path) -> tuple[GF, list[FileMatrix]]:
    return parse_files(Path(path).read_text())


def save_files(path, files: Sequence[FileMatrix]) -> None:
    Path(path).write_text(dump_files(files))
