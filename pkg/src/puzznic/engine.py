"""Rules engine for static-grid Puzznic.

A level is a rectangular grid with a full wall perimeter.  Interior cells are
walls, empties, or pattern blocks (ids 1..9).  The player slides one block
left or right into an empty cell; gravity then settles every column, and any
block with an orthogonal same-pattern neighbour is removed.  Removals repeat
(settle, match, settle, ...) until the grid is quiescent.  All values here
are immutable and every operation is a pure function.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

WALL = -1
EMPTY = 0
MAX_PATTERN = 9
MIN_DIM = 3
MAX_DIM = 32

LEFT = -1
RIGHT = +1


class EngineError(Exception):
    """Base class for rule violations reported by the engine."""


class PositionNotPatterned(EngineError):
    """A removal targeted a cell that does not hold a pattern block."""


class IllegalMove(EngineError):
    """A move whose source is not a block or whose target is not empty."""


def _check_cell(value: int) -> None:
    if value != WALL and not (EMPTY <= value <= MAX_PATTERN):
        raise ValueError(f"bad cell value {value!r}")


@dataclass(frozen=True)
class Grid:
    """Board state: row-major cells, 1-based (row 1 at the top).

    Construction enforces the structural invariants: rectangular, dimensions
    within 3..32, and a complete wall perimeter.
    """

    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        h = len(self.cells)
        if h < MIN_DIM or h > MAX_DIM:
            raise ValueError(f"grid height {h} outside {MIN_DIM}..{MAX_DIM}")
        w = len(self.cells[0])
        if w < MIN_DIM or w > MAX_DIM:
            raise ValueError(f"grid width {w} outside {MIN_DIM}..{MAX_DIM}")
        for row in self.cells:
            if len(row) != w:
                raise ValueError("grid rows have unequal lengths")
            for v in row:
                _check_cell(v)
        for c in range(w):
            if self.cells[0][c] != WALL or self.cells[h - 1][c] != WALL:
                raise ValueError("missing wall perimeter (top/bottom)")
        for r in range(h):
            if self.cells[r][0] != WALL or self.cells[r][w - 1] != WALL:
                raise ValueError("missing wall perimeter (left/right)")

    @property
    def height(self) -> int:
        return len(self.cells)

    @property
    def width(self) -> int:
        return len(self.cells[0])

    def at(self, row: int, col: int) -> int:
        """Cell value at 1-based (row, col)."""
        return self.cells[row - 1][col - 1]

    def interior(self) -> Iterator[tuple[int, int]]:
        """All 1-based interior coordinates, row-major."""
        for r in range(2, self.height):
            for c in range(2, self.width):
                yield r, c

    def replace(self, updates: dict[tuple[int, int], int]) -> "Grid":
        """New grid with the given 1-based cells replaced."""
        rows = [list(row) for row in self.cells]
        for (r, c), v in updates.items():
            rows[r - 1][c - 1] = v
        return Grid(tuple(tuple(row) for row in rows))


@dataclass(frozen=True)
class Move:
    """One player action: slide the block at (row, col) left or right."""

    row: int
    col: int
    dir: int  # LEFT (-1) or RIGHT (+1)

    def __post_init__(self) -> None:
        if self.dir not in (LEFT, RIGHT):
            raise ValueError(f"move direction must be -1 or +1, got {self.dir}")


@dataclass(frozen=True)
class MoveEvent:
    move: Move
    after: Grid


@dataclass(frozen=True)
class FallEvent:
    after: Grid


@dataclass(frozen=True)
class MatchEvent:
    removed: frozenset[tuple[int, int]]
    after: Grid


Event = MoveEvent | FallEvent | MatchEvent


@dataclass(frozen=True)
class Trace:
    """A replayable account: initial grid plus the ordered events."""

    initial: Grid
    events: tuple[Event, ...]

    @property
    def final(self) -> Grid:
        return self.events[-1].after if self.events else self.initial

    @property
    def move_count(self) -> int:
        return sum(1 for e in self.events if isinstance(e, MoveEvent))

    @property
    def match_count(self) -> int:
        return sum(1 for e in self.events if isinstance(e, MatchEvent))


@dataclass(frozen=True)
class QuiescentState:
    """A settled grid with no pending matches: the player acts only here."""

    grid: Grid

    def __post_init__(self) -> None:
        pos = find_unsettled(self.grid)
        if pos is not None:
            raise EngineError(f"grid not settled: floating block at {pos}")
        matched = find_matches(self.grid)
        if matched:
            raise EngineError(f"grid has pending matches at {sorted(matched)}")


def find_unsettled(grid: Grid) -> tuple[int, int] | None:
    """First (row-major) pattern cell resting on an empty cell, if any."""
    for r, c in grid.interior():
        if grid.at(r, c) > EMPTY and grid.at(r + 1, c) == EMPTY:
            return r, c
    return None


def settle(grid: Grid) -> tuple[Grid, bool]:
    """Apply gravity to fixpoint in every column; no matching is performed.

    Within each column, blocks drop to the bottom of their wall-delimited
    segment, preserving their top-to-bottom order.  Returns the settled grid
    and whether anything fell.
    """
    rows = [list(row) for row in grid.cells]
    fell = False
    for c in range(1, grid.width - 1):
        seg_start = 0  # index of the wall above the current segment
        for r in range(1, grid.height):
            if rows[r][c] != WALL:
                continue
            # segment rows are seg_start+1 .. r-1
            blocks = [rows[q][c] for q in range(seg_start + 1, r) if rows[q][c] != EMPTY]
            n_empty = (r - seg_start - 1) - len(blocks)
            packed = [EMPTY] * n_empty + blocks
            for off, v in enumerate(packed):
                q = seg_start + 1 + off
                if rows[q][c] != v:
                    rows[q][c] = v
                    fell = True
            seg_start = r
    if not fell:
        return grid, False
    return Grid(tuple(tuple(row) for row in rows)), True


_NEIGHBOURS = ((-1, 0), (1, 0), (0, 1), (0, -1))


def find_matches(grid: Grid) -> set[tuple[int, int]]:
    """Positions of pattern cells with an orthogonal same-pattern neighbour."""
    out: set[tuple[int, int]] = set()
    for r, c in grid.interior():
        v = grid.at(r, c)
        if v <= EMPTY:
            continue
        for dr, dc in _NEIGHBOURS:
            if grid.at(r + dr, c + dc) == v:
                out.add((r, c))
                break
    return out


def remove_matches(grid: Grid, positions: set[tuple[int, int]]) -> Grid:
    """Simultaneously empty the given cells; each must hold a pattern block."""
    for r, c in positions:
        if grid.at(r, c) <= EMPTY:
            raise PositionNotPatterned(f"cell ({r}, {c}) holds no pattern block")
    return grid.replace({pos: EMPTY for pos in positions})


def resolve(grid: Grid) -> tuple[QuiescentState, tuple[Event, ...], int]:
    """Run the cascade fixpoint: settle, remove one simultaneous match, repeat.

    Matching only ever happens on a settled grid.  Returns the quiescent
    state, the fall/match events in order, and the number of match events.
    """
    events: list[Event] = []
    matches = 0
    while True:
        grid, fell = settle(grid)
        if fell:
            events.append(FallEvent(after=grid))
        matched = find_matches(grid)
        if not matched:
            break
        grid = remove_matches(grid, matched)
        events.append(MatchEvent(removed=frozenset(matched), after=grid))
        matches += 1
    return QuiescentState(grid), tuple(events), matches


def legal_moves(state: QuiescentState) -> tuple[Move, ...]:
    """Moves of a block into an adjacent empty cell, row-major, left first."""
    grid = state.grid
    out: list[Move] = []
    for r, c in grid.interior():
        if grid.at(r, c) <= EMPTY:
            continue
        for d in (LEFT, RIGHT):
            if grid.at(r, c + d) == EMPTY:
                out.append(Move(r, c, d))
    return tuple(out)


def apply_move(state: QuiescentState, move: Move) -> tuple[QuiescentState, Trace, int]:
    """Slide one block, then resolve the resulting cascade.

    The moved block falls to rest before any matching happens, and blocks
    stacked on the vacated cell fall too.  Returns the new quiescent state,
    the full trace (move event plus resolve events), and the match count.
    """
    grid = state.grid
    r, c, d = move.row, move.col, move.dir
    if not (2 <= r <= grid.height - 1 and 2 <= c <= grid.width - 1):
        raise IllegalMove(f"move source ({r}, {c}) is not an interior cell")
    if grid.at(r, c) <= EMPTY:
        raise IllegalMove(f"no block to move at ({r}, {c})")
    if grid.at(r, c + d) != EMPTY:
        raise IllegalMove(f"target cell ({r}, {c + d}) is not empty")
    moved = grid.replace({(r, c): EMPTY, (r, c + d): grid.at(r, c)})
    events: list[Event] = [MoveEvent(move=move, after=moved)]
    new_state, cascade, matches = resolve(moved)
    events.extend(cascade)
    return new_state, Trace(initial=grid, events=tuple(events)), matches


def is_goal(grid: Grid) -> bool:
    """True iff no cell holds a pattern block."""
    return all(v <= EMPTY for row in grid.cells for v in row)


def pattern_counts(grid: Grid) -> dict[int, int]:
    """Multiset census of pattern blocks, pattern id -> count."""
    counts: Counter[int] = Counter()
    for row in grid.cells:
        for v in row:
            if v > EMPTY:
                counts[v] += 1
    return dict(counts)


def is_dead_end(grid: Grid) -> bool:
    """True iff some pattern has exactly one block left.

    Sound: blocks are never created and a match needs two blocks of the same
    pattern, so a singleton pattern can never be cleared.
    """
    return any(n == 1 for n in pattern_counts(grid).values())


def state_key(grid: Grid) -> bytes:
    """Deterministic 128-bit digest of a grid, stable across processes."""
    h = hashlib.blake2b(digest_size=16)
    h.update(bytes((grid.height, grid.width)))
    for row in grid.cells:
        h.update(bytes(v + 1 for v in row))  # shift WALL=-1 into byte range
    return h.digest()


def verify_trace(trace: Trace) -> bool:
    """Replay the events from the initial grid and check every `after` grid."""
    grid = trace.initial
    for event in trace.events:
        if isinstance(event, MoveEvent):
            m = event.move
            grid = grid.replace(
                {(m.row, m.col): EMPTY, (m.row, m.col + m.dir): grid.at(m.row, m.col)}
            )
        elif isinstance(event, FallEvent):
            grid, _ = settle(grid)
        else:
            grid = remove_matches(grid, set(event.removed))
        if grid != event.after:
            return False
    return True
