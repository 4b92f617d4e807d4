"""Scalar and matrix fuzzy arithmetic: membership degrees and relations.

Degrees are plain floats in [0, 1]; relations are dense labelled matrices
of degrees between two ordered agent-id lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9


class FuzzyError(ValueError):
    pass


class CompositionError(FuzzyError):
    pass


def degree(value: float) -> float:
    """Validate a membership degree; reject anything outside [0, 1]."""
    v = float(value)
    if not (0.0 <= v <= 1.0) or not np.isfinite(v):
        raise FuzzyError(f"membership degree out of range [0, 1]: {value!r}")
    return v


@dataclass(frozen=True)
class Violation:
    kind: str  # "range" | "dimension" | "duplicate-id"
    where: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.detail}"


@dataclass(frozen=True)
class FuzzyRelation:
    """Dense matrix of membership degrees between two ordered id lists.

    Construction does not validate entries so that malformed input can be
    inspected with :func:`validate_relation`; use :meth:`checked` when a
    well-formed relation is required.
    """

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        arr = np.asarray(self.entries, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def checked(cls, rows, cols, entries) -> "FuzzyRelation":
        rel = cls(tuple(rows), tuple(cols), entries)
        violations = validate_relation(rel)
        if violations:
            raise FuzzyError(
                "invalid relation: " + "; ".join(str(v) for v in violations)
            )
        return rel

    @classmethod
    def identity(cls, ids) -> "FuzzyRelation":
        ids = tuple(ids)
        return cls(ids, ids, np.eye(len(ids)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def row_index(self, row_id: str) -> int:
        try:
            return self.rows.index(row_id)
        except ValueError:
            raise FuzzyError(f"unknown row id {row_id!r}") from None

    def col_index(self, col_id: str) -> int:
        try:
            return self.cols.index(col_id)
        except ValueError:
            raise FuzzyError(f"unknown column id {col_id!r}") from None

    def at(self, row_id: str, col_id: str) -> float:
        return float(self.entries[self.row_index(row_id), self.col_index(col_id)])

    def row(self, row_id: str) -> np.ndarray:
        return self.entries[self.row_index(row_id)]

    def with_entry(self, row_id: str, col_id: str, value: float) -> "FuzzyRelation":
        """Return a copy with one cell replaced (relations are immutable)."""
        arr = np.array(self.entries)
        arr[self.row_index(row_id), self.col_index(col_id)] = degree(value)
        return FuzzyRelation(self.rows, self.cols, arr)

    def transpose(self) -> "FuzzyRelation":
        return FuzzyRelation(self.cols, self.rows, self.entries.T)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FuzzyRelation):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.entries.shape == other.entries.shape
            and bool(np.array_equal(self.entries, other.entries))
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries.tobytes()))


def compose_max_min(r: FuzzyRelation, s: FuzzyRelation) -> FuzzyRelation:
    """Zadeh max-min composition: out[a][c] = max_b min(r[a][b], s[b][c])."""
    if r.cols != s.rows:
        raise CompositionError(
            f"cannot compose: left columns {list(r.cols)} != right rows {list(s.rows)}"
        )
    # pairwise min over the shared axis, then max-reduce it
    out = np.minimum(r.entries[:, :, None], s.entries[None, :, :]).max(axis=1)
    if out.size == 0:
        out = np.zeros((len(r.rows), len(s.cols)))
    return FuzzyRelation(r.rows, s.cols, out)


def average_rows(relation: FuzzyRelation, member_rows) -> np.ndarray:
    """Column-wise arithmetic mean of the selected rows."""
    members = list(member_rows)
    if not members:
        raise FuzzyError("cannot average an empty set of rows")
    idx = [relation.row_index(m) for m in members]
    return relation.entries[idx].mean(axis=0)


def validate_relation(relation: FuzzyRelation) -> list[Violation]:
    """Report every structural violation; an empty report means valid."""
    out: list[Violation] = []
    for axis, ids in (("row", relation.rows), ("col", relation.cols)):
        seen: set[str] = set()
        for i in ids:
            if i in seen:
                out.append(Violation("duplicate-id", f"{axis} {i!r}", "id listed twice"))
            seen.add(i)
    shape = relation.entries.shape
    expected = (len(relation.rows), len(relation.cols))
    if len(shape) != 2 or shape != expected:
        out.append(
            Violation(
                "dimension",
                "entries",
                f"shape {shape} does not match {expected[0]}x{expected[1]} ids",
            )
        )
        return out
    bad = np.argwhere(
        ~(np.isfinite(relation.entries))
        | (relation.entries < 0.0)
        | (relation.entries > 1.0)
    )
    for r, c in bad:
        out.append(
            Violation(
                "range",
                f"({relation.rows[r]}, {relation.cols[c]})",
                f"value {relation.entries[r, c]} outside [0, 1]",
            )
        )
    return out
