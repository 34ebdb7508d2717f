"""Optimal forward search over quiescent states, minimizing player moves.

Matches and falls are free: the cost of a plan is the number of moves.  All
three algorithms (bfs, astar, iddfs) return minimum-move plans.  Search is
pruned by duplicate detection on state digests, by the singleton-pattern
dead-end rule, and (for astar) by an admissible lower bound built from
horizontal distances: a pattern whose closest pair of blocks is k columns
apart needs at least k-1 moves before its first match, and every move
shifts one block of one pattern by one column.
"""

from __future__ import annotations

import heapq
import math
import time
from collections import deque
from dataclasses import dataclass, field

from puzznic import engine
from puzznic.engine import Grid, Move, QuiescentState, Trace

DEFAULT_MAX_MOVES = 100


class PlannerError(Exception):
    pass


class InvalidBound(PlannerError):
    pass


class WrongOutcome(PlannerError):
    pass


@dataclass(frozen=True)
class Plan:
    """An ordered move sequence; cost is the move count."""

    moves: tuple[Move, ...]

    @property
    def cost(self) -> int:
        return len(self.moves)


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    duplicates: int = 0
    dead_ends: int = 0
    max_frontier: int = 0
    elapsed: float = 0.0

    def as_text(self) -> str:
        return (
            f"expanded={self.expanded} generated={self.generated} "
            f"duplicates={self.duplicates} dead_ends={self.dead_ends} "
            f"max_frontier={self.max_frontier} elapsed={self.elapsed:.3f}s"
        )


@dataclass(frozen=True)
class Solved:
    plan: Plan
    trace: Trace


@dataclass(frozen=True)
class ProvedUnsolvable:
    within_bound: int


@dataclass(frozen=True)
class BudgetExhausted:
    reason: str = "time limit"


Outcome = Solved | ProvedUnsolvable | BudgetExhausted


@dataclass
class SearchResult:
    outcome: Outcome
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def solved(self) -> bool:
        return isinstance(self.outcome, Solved)


def heuristic_column_gap(grid: Grid) -> float:
    """Admissible lower bound on remaining moves; inf for dead ends.

    For each pattern with at least two blocks, the closest pair must end up
    in the same or adjacent columns before anything of that pattern can
    match, which costs at least (gap - 1) moves.  Gravity and matching never
    change columns, and each move affects a single pattern, so the sum over
    patterns is still a lower bound.
    """
    columns: dict[int, list[int]] = {}
    for r, c in grid.interior():
        v = grid.at(r, c)
        if v > engine.EMPTY:
            columns.setdefault(v, []).append(c)
    total = 0
    for cols in columns.values():
        if len(cols) == 1:
            return math.inf
        cols.sort()
        gap = min(b - a for a, b in zip(cols, cols[1:]))
        total += max(0, gap - 1)
    return total


def _reconstruct(
    root: QuiescentState, parents: dict[bytes, tuple[bytes | None, Move | None]], key: bytes
) -> tuple[Plan, Trace]:
    moves: list[Move] = []
    while True:
        parent, move = parents[key]
        if parent is None:
            break
        moves.append(move)
        key = parent
    moves.reverse()
    return _replay(root, moves)


def _replay(root: QuiescentState, moves: list[Move]) -> tuple[Plan, Trace]:
    state = root
    events = []
    for move in moves:
        state, trace, _ = engine.apply_move(state, move)
        events.extend(trace.events)
    return Plan(tuple(moves)), Trace(initial=root.grid, events=tuple(events))


class _Budget:
    def __init__(self, time_limit: float | None):
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self._tick = 0

    def exceeded(self) -> bool:
        if self.deadline is None:
            return False
        self._tick += 1
        if self._tick % 64:
            return False
        return time.monotonic() > self.deadline


def solve(
    state: QuiescentState,
    max_moves: int = DEFAULT_MAX_MOVES,
    algo: str = "bfs",
    time_limit: float | None = None,
) -> SearchResult:
    """Find a minimum-move plan of at most `max_moves` moves.

    Returns Solved with an optimal plan, ProvedUnsolvable(max_moves) when the
    bounded duplicate-free search space is exhausted, or BudgetExhausted when
    the time limit bites first.
    """
    if max_moves < 0:
        raise InvalidBound(f"max_moves must be >= 0, got {max_moves}")
    if algo not in ("bfs", "astar", "iddfs"):
        raise ValueError(f"unknown algorithm {algo!r}")
    start = time.monotonic()
    stats = SearchStats()
    budget = _Budget(time_limit)

    if engine.is_goal(state.grid):
        plan, trace = _replay(state, [])
        stats.elapsed = time.monotonic() - start
        return SearchResult(Solved(plan, trace), stats)
    if engine.is_dead_end(state.grid):
        stats.generated = 1  # the root itself
        stats.dead_ends = 1
        stats.elapsed = time.monotonic() - start
        return SearchResult(ProvedUnsolvable(max_moves), stats)

    if algo == "bfs":
        result = _solve_bfs(state, max_moves, stats, budget)
    elif algo == "astar":
        result = _solve_astar(state, max_moves, stats, budget)
    else:
        result = _solve_iddfs(state, max_moves, stats, budget)
    result.stats.elapsed = time.monotonic() - start
    return result


def _solve_bfs(state, max_moves, stats, budget) -> SearchResult:
    root_key = engine.state_key(state.grid)
    parents: dict[bytes, tuple[bytes | None, Move | None]] = {root_key: (None, None)}
    queue: deque[tuple[QuiescentState, bytes, int]] = deque([(state, root_key, 0)])
    closed = {root_key}
    while queue:
        stats.max_frontier = max(stats.max_frontier, len(queue))
        node, key, g = queue.popleft()
        if budget.exceeded():
            return SearchResult(BudgetExhausted(), stats)
        if engine.is_goal(node.grid):
            plan, trace = _reconstruct(state, parents, key)
            return SearchResult(Solved(plan, trace), stats)
        if g >= max_moves:
            continue
        stats.expanded += 1
        for move in engine.legal_moves(node):
            child, _, _ = engine.apply_move(node, move)
            stats.generated += 1
            ckey = engine.state_key(child.grid)
            if ckey in closed:
                stats.duplicates += 1
                continue
            if engine.is_dead_end(child.grid):
                stats.dead_ends += 1
                continue
            closed.add(ckey)
            parents[ckey] = (key, move)
            queue.append((child, ckey, g + 1))
    return SearchResult(ProvedUnsolvable(max_moves), stats)


def _solve_astar(state, max_moves, stats, budget) -> SearchResult:
    root_key = engine.state_key(state.grid)
    parents: dict[bytes, tuple[bytes | None, Move | None]] = {root_key: (None, None)}
    h0 = heuristic_column_gap(state.grid)
    if h0 > max_moves:
        return SearchResult(ProvedUnsolvable(max_moves), stats)
    seq = 0
    heap: list[tuple[float, int, int, bytes, QuiescentState]] = [
        (h0, 0, seq, root_key, state)
    ]
    g_best = {root_key: 0}
    expanded: set[bytes] = set()
    while heap:
        stats.max_frontier = max(stats.max_frontier, len(heap))
        f, neg_g, _, key, node = heapq.heappop(heap)
        if budget.exceeded():
            return SearchResult(BudgetExhausted(), stats)
        if key in expanded:
            continue
        if engine.is_goal(node.grid):
            plan, trace = _reconstruct(state, parents, key)
            return SearchResult(Solved(plan, trace), stats)
        expanded.add(key)
        g = -neg_g
        if g >= max_moves:
            continue
        stats.expanded += 1
        for move in engine.legal_moves(node):
            child, _, _ = engine.apply_move(node, move)
            stats.generated += 1
            ckey = engine.state_key(child.grid)
            ng = g + 1
            if ckey in expanded or ng >= g_best.get(ckey, max_moves + 1):
                stats.duplicates += 1
                continue
            if engine.is_dead_end(child.grid):
                stats.dead_ends += 1
                continue
            h = heuristic_column_gap(child.grid)
            if ng + h > max_moves:
                continue
            g_best[ckey] = ng
            parents[ckey] = (key, move)
            seq += 1
            heapq.heappush(heap, (ng + h, -ng, seq, ckey, child))
    return SearchResult(ProvedUnsolvable(max_moves), stats)


def _solve_iddfs(state, max_moves, stats, budget) -> SearchResult:
    root_key = engine.state_key(state.grid)

    class _Timeout(Exception):
        pass

    def dfs(node, key, depth, limit, path, moves):
        if budget.exceeded():
            raise _Timeout
        if engine.is_goal(node.grid):
            return list(moves)
        if depth == limit:
            return None
        stats.expanded += 1
        stats.max_frontier = max(stats.max_frontier, depth + 1)
        for move in engine.legal_moves(node):
            child, _, _ = engine.apply_move(node, move)
            stats.generated += 1
            ckey = engine.state_key(child.grid)
            if ckey in path:
                stats.duplicates += 1
                continue
            if engine.is_dead_end(child.grid):
                stats.dead_ends += 1
                continue
            path.add(ckey)
            moves.append(move)
            found = dfs(child, ckey, depth + 1, limit, path, moves)
            moves.pop()
            path.discard(ckey)
            if found is not None:
                return found
        return None

    try:
        for limit in range(0, max_moves + 1):
            found = dfs(state, root_key, 0, limit, {root_key}, [])
            if found is not None:
                plan, trace = _replay(state, found)
                return SearchResult(Solved(plan, trace), stats)
    except _Timeout:
        return SearchResult(BudgetExhausted(), stats)
    return SearchResult(ProvedUnsolvable(max_moves), stats)


def prove_unsolvable_report(result: SearchResult) -> str:
    """Human-readable certificate summary for a ProvedUnsolvable result."""
    if not isinstance(result.outcome, ProvedUnsolvable):
        raise WrongOutcome(f"result outcome is {type(result.outcome).__name__}")
    s = result.stats
    lines = [
        f"unsolvable within a {result.outcome.within_bound}-move horizon",
        f"states expanded: {s.expanded}",
        f"states generated: {s.generated}",
        f"duplicates pruned: {s.duplicates}",
        f"dead ends pruned: {s.dead_ends}",
    ]
    if s.expanded == 0 and s.dead_ends > 0:
        lines.append("root state is a dead end (a pattern has a single block left)")
    return "\n".join(lines) + "\n"
