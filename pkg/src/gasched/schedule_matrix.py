"""Binary job/machine scheduling matrix and its constraint operators.

A :class:`ScheduleMatrix` has ``m + 1`` rows and ``k + 1`` columns.
Column 0 holds one optional job label per row; columns 1..k are machine
columns. Row 0 is the head row (the completion/recall slot); rows 1..m
are the waiting-queue body. A ``1`` in a body row means "that row's job
is queued at this machine"; a labeled all-zero body row is a job whose
send failed (a dropped job awaiting recall or repair).

Machine indices are 1-based on the public surface, matching the column
numbering; internals are 0-based numpy arrays. All operators are pure:
they return a new matrix and leave their input untouched, so values may
be shared freely across threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError, StateError
from .ga_core import Genome

JobId = int


@dataclass(eq=False)
class ScheduleMatrix:
    m: int
    k: int
    head: np.ndarray
    body: np.ndarray
    labels: list[JobId | None]

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise DimensionError("matrix needs m >= 1 queue rows and k >= 1 machines")
        self.head = np.asarray(self.head, dtype=np.int8)
        self.body = np.asarray(self.body, dtype=np.int8)
        if self.head.shape != (self.k,):
            raise DimensionError(f"head row must have shape ({self.k},)")
        if self.body.shape != (self.m, self.k):
            raise DimensionError(f"body must have shape ({self.m}, {self.k})")
        if not np.isin(self.head, (0, 1)).all() or not np.isin(self.body, (0, 1)).all():
            raise ValueError("matrix entries must be 0 or 1")
        if len(self.labels) != self.m + 1:
            raise DimensionError("labels must hold one entry per row (m + 1 total)")
        present = [lab for lab in self.labels if lab is not None]
        if len(present) != len(set(present)):
            raise ValueError("job labels must be unique")

    @classmethod
    def empty(cls, m: int, k: int) -> "ScheduleMatrix":
        return cls(m, k, np.zeros(k, dtype=np.int8), np.zeros((m, k), dtype=np.int8), [None] * (m + 1))

    def copy(self) -> "ScheduleMatrix":
        return ScheduleMatrix(self.m, self.k, self.head.copy(), self.body.copy(), list(self.labels))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScheduleMatrix):
            return NotImplemented
        return (
            self.m == other.m
            and self.k == other.k
            and bool((self.head == other.head).all())
            and bool((self.body == other.body).all())
            and self.labels == other.labels
        )

    def body_label(self, row: int) -> JobId | None:
        """Label of body row ``row`` (0-based)."""
        return self.labels[row + 1]

    def free_body_rows(self) -> list[int]:
        """0-based body rows with no job label (available slots)."""
        return [i for i in range(self.m) if self.labels[i + 1] is None]

    def dropped_rows(self) -> list[int]:
        """0-based body rows holding a job whose row is all zero."""
        return [
            i
            for i in range(self.m)
            if self.labels[i + 1] is not None and not self.body[i].any()
        ]


def shift_up(matrix: ScheduleMatrix) -> ScheduleMatrix:
    """Advance every queue by one slot (the nilpotent shift).

    The old top body row becomes the head row, each body row moves up,
    and the last body row is zeroed; the label column moves in lockstep.
    The head must be fully cleared first (bits and label), since its
    content would otherwise be silently destroyed.
    """
    if matrix.head.any() or matrix.labels[0] is not None:
        raise StateError("head row must be cleared (complete/recall) before shifting")
    head = matrix.body[0].copy()
    body = np.zeros_like(matrix.body)
    if matrix.m > 1:
        body[:-1] = matrix.body[1:]
    labels = list(matrix.labels[1:]) + [None]
    return ScheduleMatrix(matrix.m, matrix.k, head, body, labels)


def complete_heads(
    matrix: ScheduleMatrix,
) -> tuple[ScheduleMatrix, list[JobId], list[JobId]]:
    """Retire the head row.

    A head job with a 1 anywhere completed and leaves the system for
    good; a head job whose whole row is zero failed its send and is
    reported for recall. Either way the head row ends empty.
    """
    out = matrix.copy()
    completed: list[JobId] = []
    to_recall: list[JobId] = []
    job = out.labels[0]
    if job is not None:
        if out.head.any():
            completed.append(job)
        else:
            to_recall.append(job)
        out.labels[0] = None
    out.head[:] = 0
    return out, completed, to_recall


def column_load(matrix: ScheduleMatrix, j: int) -> int:
    """Number of queued (body) jobs waiting at machine ``j`` (1-based)."""
    if not 1 <= j <= matrix.k:
        raise ValueError(f"machine index must lie in 1..{matrix.k}")
    return int(matrix.body[:, j - 1].sum())


def column_loads(matrix: ScheduleMatrix) -> list[int]:
    """Per-machine body loads, index 0 = machine 1."""
    return [int(x) for x in matrix.body.sum(axis=0)]


def recall_job(
    matrix: ScheduleMatrix,
    job: JobId,
    rng: random.Random | None = None,
    uniform: bool = False,
) -> ScheduleMatrix:
    """Reinsert a failed job as a single 1 in the last body row.

    Placement targets the least-loaded machine (ties to the lowest
    index); pass ``uniform=True`` with an rng for the stochastic variant
    used during search.
    """
    if matrix.labels[matrix.m] is not None:
        raise CapacityError("last queue row is occupied; job cannot be recalled now")
    out = matrix.copy()
    if uniform:
        if rng is None:
            raise ValueError("uniform placement requires an rng")
        col = rng.randrange(matrix.k)
    else:
        loads = column_loads(matrix)
        col = loads.index(min(loads))
    out.body[matrix.m - 1, :] = 0
    out.body[matrix.m - 1, col] = 1
    out.labels[matrix.m] = job
    return out


def repair_rows(matrix: ScheduleMatrix) -> ScheduleMatrix:
    """Enforce "each job waits at no more than one machine".

    Any row with several 1s keeps only its leftmost; feasible rows pass
    through untouched, so the repair is idempotent.
    """
    out = matrix.copy()
    for row in (out.head, *out.body):
        if row.sum() > 1:
            keep = int(np.argmax(row))
            row[:] = 0
            row[keep] = 1
    return out


def inverse_select(matrix: ScheduleMatrix, cfg: "OverloadConfig") -> set[int]:
    """Machines (1-based) whose waiting load exceeds the threshold ``w``."""
    loads = column_loads(matrix)
    return {j + 1 for j in range(matrix.k) if loads[j] > cfg.w}


@dataclass(frozen=True)
class OverloadConfig:
    """Overload thresholds: ``w`` is the tolerated per-machine waiting
    load, ``delta`` the tolerated count of machines above it."""

    w: int
    delta: int

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("w must be non-negative")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")


def rebalance_crossover(
    matrix: ScheduleMatrix,
    cfg: OverloadConfig,
    rng: random.Random | None = None,
) -> tuple[ScheduleMatrix, bool]:
    """Move queued jobs off overloaded machines until at most ``delta``
    machines exceed ``w``.

    Each step takes the deepest 1 of the most overloaded column and
    moves it, within its own row, to the least-loaded column that still
    has room below ``w``; untouched entries keep their within-column
    order, and the total number of queued jobs never changes. Returns
    the rebalanced matrix and whether the ``delta`` target was reached
    (False means best effort: no remaining move could relieve a column
    above ``w``).

    The policy is deterministic; ``rng`` is accepted for interface
    symmetry with the other operators and is unused.
    """
    del rng
    out = matrix.copy()
    loads = column_loads(out)
    while True:
        over = [j for j in range(out.k) if loads[j] > cfg.w]
        if len(over) <= cfg.delta:
            return out, True
        targets = [j for j in range(out.k) if loads[j] < cfg.w]
        if not targets:
            return out, False
        src = min(over, key=lambda j: (-loads[j], j))
        tgt = min(targets, key=lambda j: (loads[j], j))
        row = int(np.nonzero(out.body[:, src])[0][-1])
        out.body[row, src] = 0
        out.body[row, tgt] = 1
        loads[src] -= 1
        loads[tgt] += 1


def mutate_dropped_rows(
    matrix: ScheduleMatrix,
    rng: random.Random,
    max_load: int | None = None,
) -> ScheduleMatrix:
    """Give every labeled all-zero body row exactly one 1.

    By default the column is uniform random. With ``max_load`` set, the
    1 goes to the least-loaded column still below that load (ties to the
    lowest index) and rows are left untouched when no column has room;
    that capacity-aware mode keeps physical queue depths honest.
    """
    out = matrix.copy()
    loads = column_loads(out)
    for i in out.dropped_rows():
        if max_load is None:
            col = rng.randrange(out.k)
        else:
            candidates = [j for j in range(out.k) if loads[j] < max_load]
            if not candidates:
                continue
            col = min(candidates, key=lambda j: (loads[j], j))
        out.body[i, col] = 1
        loads[col] += 1
    return out


def repair_column_capacity(matrix: ScheduleMatrix, max_load: int) -> ScheduleMatrix:
    """Evict queue entries beyond ``max_load`` per column.

    The shallowest ``max_load`` entries of each column survive; evicted
    rows become labeled all-zero rows (dropped jobs).
    """
    if max_load < 0:
        raise ValueError("max_load must be non-negative")
    out = matrix.copy()
    for j in range(out.k):
        rows = np.nonzero(out.body[:, j])[0]
        for r in rows[max_load:]:
            out.body[r, j] = 0
    return out


def to_genome(matrix: ScheduleMatrix) -> Genome:
    """Row-major flattening of the body (head row excluded)."""
    return Genome(tuple(int(b) for b in matrix.body.reshape(-1)))


def from_genome(
    bits: Genome, m: int, k: int, labels: list[JobId | None]
) -> ScheduleMatrix:
    """Rebuild a matrix from a flattened body, repairing row feasibility.

    ``labels`` carries the m body-row labels; the head starts empty.
    """
    if len(bits) != m * k:
        raise DimensionError(f"genome length {len(bits)} != m*k = {m * k}")
    if len(labels) != m:
        raise DimensionError("labels must hold one entry per body row")
    body = np.array(bits.bits, dtype=np.int8).reshape(m, k)
    matrix = ScheduleMatrix(m, k, np.zeros(k, dtype=np.int8), body, [None] + list(labels))
    return repair_rows(matrix)


def to_text(matrix: ScheduleMatrix) -> str:
    """Plain-text snapshot: dims, one line per row, then the label line."""
    lines = [f"{matrix.m} {matrix.k}"]
    lines.append(" ".join(str(int(b)) for b in matrix.head))
    for i in range(matrix.m):
        lines.append(" ".join(str(int(b)) for b in matrix.body[i]))
    lines.append(",".join("-" if lab is None else str(lab) for lab in matrix.labels))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ScheduleMatrix:
    """Inverse of :func:`to_text`; round-trips bit-exactly."""
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 3:
        raise ValueError("matrix snapshot is truncated")
    m, k = (int(x) for x in lines[0].split())
    if len(lines) != m + 3:
        raise ValueError("matrix snapshot has the wrong number of lines")
    rows = [[int(x) for x in lines[1 + i].split()] for i in range(m + 1)]
    labels = [None if tok == "-" else int(tok) for tok in lines[m + 2].split(",")]
    return ScheduleMatrix(
        m,
        k,
        np.array(rows[0], dtype=np.int8),
        np.array(rows[1:], dtype=np.int8),
        labels,
    )
