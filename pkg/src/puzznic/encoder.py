"""Bounded propositional models of the puzzle, and model decoding.

Two encodings over a step-indexed grid of one-hot cell-value variables:

- fixed: satisfiable iff the level can be cleared in EXACTLY `n_steps`
  steps, where each step is either one player move (gravity applied
  instantaneously, both to the moved block and to the stack it may have been
  supporting) or one simultaneous removal of every matching block (again
  with instantaneous gravity, expressed through an order-preserving
  row-mapping function per column rather than explicit arithmetic).

- varmoves: counts only player moves.  The step axis becomes `ministeps`
  (moves + matches + a frozen dummy tail); the ministep horizon is
  max_moves plus the largest possible number of match steps, which is half
  the number of blocks since every match removes at least two.  Satisfiable
  iff a plan with at most `max_moves` moves exists; a sorted unary counter
  over the per-step moving flags is exposed so callers can minimize the
  move count by assuming upper bounds, without re-encoding.

Every decoded model is validated by replaying it through the game engine;
a mismatch raises ModelInconsistent since it can only mean an encoder bug.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from puzznic import engine
from puzznic.cnf import FALSE, TRUE, ClauseBuilder, CnfInstance, VarMap, neg
from puzznic.engine import EMPTY, LEFT, RIGHT, WALL, Grid, Move, QuiescentState
from puzznic.planner import (
    BudgetExhausted,
    Plan,
    ProvedUnsolvable,
    SearchResult,
    SearchStats,
    Solved,
)
from puzznic.satsolver import SolverBudgetExceeded

DEFAULT_MAX_HORIZON = 64
MOVE_STEP = "move"
MATCH_STEP = "match"
DUMMY_STEP = "dummy"


class EncoderError(Exception):
    pass


class HorizonTooLarge(EncoderError):
    pass


class LevelInvalid(EncoderError):
    pass


class ModelInconsistent(EncoderError):
    """A model did not replay through the engine: an encoder bug, never
    silently accepted."""


class BoundExhausted(EncoderError):
    """The requested bound admits no horizon to try."""


@dataclass(frozen=True)
class DecodedPlan:
    plan: Plan
    step_kinds: tuple[str, ...]
    total_steps: int


def _validate_level(level: Grid) -> None:
    if engine.find_unsettled(level) is not None:
        raise LevelInvalid("level has floating blocks")
    if engine.find_matches(level):
        raise LevelInvalid("level has pending matches")


class _Encoder:
    """Shared machinery for both models over one level and horizon."""

    def __init__(self, level: Grid, horizon: int, mode: str):
        self.level = level
        self.S = horizon
        self.mode = mode
        self.H, self.W = level.height, level.width
        self.patterns = sorted(engine.pattern_counts(level))
        self.nonwall = [
            (r, c) for r, c in level.interior() if level.at(r, c) != WALL
        ]
        self.nonwall_set = set(self.nonwall)
        # wall-delimited column segments bound both falling and mapping
        self.seg_top: dict[tuple[int, int], int] = {}
        self.seg_bottom: dict[tuple[int, int], int] = {}
        for r, c in self.nonwall:
            top = r - 1
            while (top, c) in self.nonwall_set:
                top -= 1
            bottom = r + 1
            while (bottom, c) in self.nonwall_set:
                bottom += 1
            self.seg_top[(r, c)] = top  # wall row above the segment
            self.seg_bottom[(r, c)] = bottom  # wall row below
        self.vm = VarMap(self._meanings())
        self.b = ClauseBuilder()

    # -- variable layout ----------------------------------------------------

    def _mapsto_domain(self, r: int, c: int) -> list[int]:
        # a block can only be remapped within its own wall-delimited segment
        return [0] + [
            q for q in range(self.seg_top[(r, c)] + 1, self.seg_bottom[(r, c)])
        ]

    def _move_targets(self, r: int, c: int):
        for d in (LEFT, RIGHT):
            if (r, c + d) in self.nonwall_set:
                yield d

    def _meanings(self):
        out = []
        for s in range(0, self.S + 1):
            for r, c in self.nonwall:
                for v in [EMPTY] + self.patterns:
                    out.append(("cell", s, r, c, v))
        for s in range(1, self.S + 1):
            out.append(("matching", s))
            for r, c in self.nonwall:
                for d in self._move_targets(r, c):
                    out.append(("movesel", s, r, c, d))
        for s in range(0, self.S):
            for r, c in self.nonwall:
                out.append(("matchflag", s, r, c))
                for q in self._mapsto_domain(r, c):
                    out.append(("mapsto", s, r, c, q))
        if self.mode == "varmoves":
            for s in range(1, self.S + 1):
                out.append(("moving", s))
                out.append(("dummy", s))
        return out

    # -- literal helpers ----------------------------------------------------

    def cell(self, s: int, r: int, c: int, v: int):
        """Literal for grid[s, r, c] == v; constant for static wall cells."""
        if (r, c) not in self.nonwall_set:
            return TRUE if v == WALL else FALSE
        if v == WALL:
            return FALSE
        return self.vm.var("cell", s, r, c, v)

    def cell_empty(self, s: int, r: int, c: int):
        return self.cell(s, r, c, EMPTY)

    def msel(self, s: int, r: int, c: int, d: int):
        if not self.vm.has("movesel", s, r, c, d):
            return FALSE
        return self.vm.var("movesel", s, r, c, d)

    def msels(self, s: int):
        for r, c in self.nonwall:
            for d in self._move_targets(r, c):
                yield (r, c, d), self.vm.var("movesel", s, r, c, d)

    def same_cell(self, s: int, r: int, c: int, nr: int, nc: int):
        """Clauses asserting cell (r,c) keeps its value from step s to s+1
        are emitted by callers; this yields (old_lit, new_lit) value pairs."""
        for v in [EMPTY] + self.patterns:
            yield self.cell(s, r, c, v), self.cell(s + 1, nr, nc, v)

    # -- constraint groups ----------------------------------------------------

    def emit_one_hot_cells(self):
        for s in range(0, self.S + 1):
            for r, c in self.nonwall:
                lits = [self.cell(s, r, c, v) for v in [EMPTY] + self.patterns]
                self.b.clause(*lits)
                self.b.at_most_one(lits)

    def emit_initial_and_goal(self):
        for r, c in self.nonwall:
            self.b.clause(self.cell(0, r, c, self.level.at(r, c)))
        for r, c in self.nonwall:
            for p in self.patterns:
                self.b.clause(neg(self.cell(self.S, r, c, p)))

    def emit_no_floating(self):
        # a block never rests on an empty cell, at any step
        for s in range(0, self.S + 1):
            for r, c in self.nonwall:
                below = self.cell_empty(s, r + 1, c)
                if below is FALSE:
                    continue
                for p in self.patterns:
                    self.b.clause(neg(self.cell(s, r, c, p)), neg(below))

    def emit_match_flags(self):
        # matchflag[s,r,c] <-> cell holds a pattern shared with a neighbour
        edges: list[tuple[tuple[int, int], tuple[int, int]]] = []
        for r, c in self.nonwall:
            for nr, nc in ((r + 1, c), (r, c + 1)):
                if (nr, nc) in self.nonwall_set:
                    edges.append(((r, c), (nr, nc)))
        for s in range(0, self.S):
            pair_vars: dict[tuple, int] = {}
            for (a, b) in edges:
                for p in self.patterns:
                    t = self.vm.aux(f"pair[{s},{a[0]},{a[1]},{b[0]},{b[1]},p{p}]")
                    pair_vars[(a, b, p)] = t
                    la = self.cell(s, a[0], a[1], p)
                    lb = self.cell(s, b[0], b[1], p)
                    self.b.clause(neg(t), la)
                    self.b.clause(neg(t), lb)
                    self.b.clause(neg(la), neg(lb), t)
            incident: dict[tuple[int, int], list[int]] = {rc: [] for rc in self.nonwall}
            for (a, b, p), t in pair_vars.items():
                incident[a].append(t)
                incident[b].append(t)
            for r, c in self.nonwall:
                mf = self.vm.var("matchflag", s, r, c)
                for t in incident[(r, c)]:
                    self.b.clause(neg(t), mf)
                self.b.clause(neg(mf), *incident[(r, c)])

    def emit_mode_selection(self):
        # matching[s] <-> some matchflag at s-1; pinned action vars otherwise
        for s in range(1, self.S + 1):
            m = self.vm.var("matching", s)
            flags = [self.vm.var("matchflag", s - 1, r, c) for r, c in self.nonwall]
            for f in flags:
                self.b.clause(neg(f), m)
            self.b.clause(neg(m), *flags)
            sel = [lit for _, lit in self.msels(s)]
            for lit in sel:
                self.b.clause(neg(m), neg(lit))  # matching pins moves off
            if self.mode == "fixed":
                self.b.clause(m, *sel)  # each step is a move or a match
                self.b.at_most_one(sel)
            else:
                d = self.vm.var("dummy", s)
                mv = self.vm.var("moving", s)
                self.b.clause(m, d, *sel)
                self.b.at_most_one([d] + sel)
                self.b.clause(neg(m), neg(d))
                for lit in sel:
                    self.b.clause(neg(lit), mv)
                self.b.clause(neg(mv), *sel)

    def emit_mapsto(self):
        for s in range(0, self.S):
            matching = self.vm.var("matching", s + 1)
            for r, c in self.nonwall:
                dom = self._mapsto_domain(r, c)
                lits = [self.vm.var("mapsto", s, r, c, q) for q in dom]
                self.b.clause(*lits)
                self.b.at_most_one(lits)
                zero = self.vm.var("mapsto", s, r, c, 0)
                mf = self.vm.var("matchflag", s, r, c)
                # empty cells are not mapped
                self.b.clause(neg(self.cell_empty(s, r, c)), zero)
                # matched blocks are not mapped
                self.b.clause(neg(mf), zero)
                # outside matching mode nothing is mapped
                self.b.clause(matching, zero)
                # surviving blocks must be mapped somewhere
                self.b.clause(
                    neg(matching), mf, self.cell_empty(s, r, c), neg(zero)
                )
            # order preservation within each column segment
            for r, c in self.nonwall:
                rb = r + 1
                while (rb, c) in self.nonwall_set:
                    self._emit_order_pair(s, matching, r, rb, c)
                    rb += 1

    def _emit_order_pair(self, s: int, matching: int, r: int, rb: int, c: int):
        guard = [
            neg(matching),
            self.vm.var("matchflag", s, r, c),
            self.cell_empty(s, r, c),
            self.vm.var("matchflag", s, rb, c),
            self.cell_empty(s, rb, c),
        ]
        dom = [q for q in self._mapsto_domain(r, c) if q]
        for q1 in dom:
            for q2 in dom:
                if q1 >= q2:
                    self.b.clause(
                        *guard,
                        neg(self.vm.var("mapsto", s, r, c, q1)),
                        neg(self.vm.var("mapsto", s, rb, c, q2)),
                    )

    def emit_match_transition(self):
        for s in range(0, self.S):
            matching = self.vm.var("matching", s + 1)
            # mapped blocks carry their value to the destination row
            for r, c in self.nonwall:
                for q in self._mapsto_domain(r, c):
                    if q == 0:
                        continue
                    mt = self.vm.var("mapsto", s, r, c, q)
                    for p in self.patterns:
                        self.b.clause(
                            neg(matching),
                            neg(mt),
                            neg(self.cell(s, r, c, p)),
                            self.cell(s + 1, q, c, p),
                        )
            # anything not in the image of the mapping becomes empty
            by_target: dict[tuple[int, int], list[int]] = {}
            for r, c in self.nonwall:
                for q in self._mapsto_domain(r, c):
                    if q:
                        by_target.setdefault((q, c), []).append(
                            self.vm.var("mapsto", s, r, c, q)
                        )
            for r, c in self.nonwall:
                sources = by_target.get((r, c), [])
                self.b.clause(
                    neg(matching), *sources, self.cell_empty(s + 1, r, c)
                )

    def emit_moves(self):
        for s in range(1, self.S + 1):
            dest_vars: dict[tuple[int, int], int] = {}
            for q, c in self.nonwall:
                dest_vars[(q, c)] = self.vm.aux(f"dest[{s},{q},{c}]")
            self.b.at_most_one(list(dest_vars.values()))
            matching = self.vm.var("matching", s)
            for (q, c), dv in dest_vars.items():
                self.b.clause(neg(matching), neg(dv))  # pinned off in matching mode
                if self.mode == "varmoves":
                    self.b.clause(neg(self.vm.var("dummy", s)), neg(dv))
                # something solid beneath the landing row
                below = self.cell_empty(s - 1, q + 1, c)
                if below is not FALSE:
                    self.b.clause(neg(dv), neg(below))
                # frame: the rest of the destination column is untouched
                for rho, c2 in self.nonwall:
                    if c2 != c or rho == q:
                        continue
                    for old, new in self.same_cell(s - 1, rho, c, rho, c):
                        self.b.clause(neg(dv), neg(old), new)
            for (r, c, d), sel in self.msels(s):
                c2 = c + d
                # a patterned source block and an empty target cell
                self.b.clause(neg(sel), neg(self.cell_empty(s - 1, r, c)))
                self.b.clause(neg(sel), self.cell_empty(s - 1, r, c2))
                # the block lands somewhere below the target, inside its segment
                candidates = [
                    q for q in range(r, self.seg_bottom[(r, c2)]) if (q, c2) in self.nonwall_set
                ]
                self.b.clause(neg(sel), *[dest_vars[(q, c2)] for q in candidates])
                for q in candidates:
                    dv = dest_vars[(q, c2)]
                    # clear fall path from the target down to the landing row
                    for mid in range(r + 1, q + 1):
                        self.b.clause(neg(sel), neg(dv), self.cell_empty(s - 1, mid, c2))
                    # the landing cell receives the moved block's pattern
                    for p in self.patterns:
                        self.b.clause(
                            neg(sel),
                            neg(dv),
                            neg(self.cell(s - 1, r, c, p)),
                            self.cell(s, q, c2, p),
                        )
            self._emit_source_column(s)
            self._emit_column_frames(s, dest_vars)

    def _emit_source_column(self, s: int):
        # gravity in the vacated column: the contiguous stack resting on the
        # moved block shifts down one row; everything above a gap stays put
        for (r, c, d), sel in self.msels(s):
            top = self.seg_top[(r, c)]
            for rho in range(top + 1, r + 1):
                gap = [self.cell_empty(s - 1, b, c) for b in range(rho, r)]
                above = (rho - 1, c)
                if above in self.nonwall_set:
                    for p in self.patterns:
                        self.b.clause(
                            neg(sel), *gap,
                            neg(self.cell(s - 1, rho - 1, c, p)),
                            self.cell(s, rho, c, p),
                        )
                    self.b.clause(
                        neg(sel), *gap,
                        neg(self.cell_empty(s - 1, rho - 1, c)),
                        self.cell_empty(s, rho, c),
                    )
                else:
                    # nothing can fall from a wall: the row empties
                    self.b.clause(neg(sel), *gap, self.cell_empty(s, rho, c))
            # frame: rows above an existing gap (or above the segment wall)
            for q in range(2, r):
                if (q, c) not in self.nonwall_set:
                    continue
                if q <= top:
                    for old, new in self.same_cell(s - 1, q, c, q, c):
                        self.b.clause(neg(sel), neg(old), new)
                else:
                    for b in range(q, r):
                        witness = self.cell_empty(s - 1, b, c)
                        for old, new in self.same_cell(s - 1, q, c, q, c):
                            self.b.clause(neg(sel), neg(witness), neg(old), new)
            # frame: everything below the vacated row keeps its value
            for q in range(r + 1, self.H):
                if (q, c) not in self.nonwall_set:
                    continue
                for old, new in self.same_cell(s - 1, q, c, q, c):
                    self.b.clause(neg(sel), neg(old), new)

    def _emit_column_frames(self, s: int, dest_vars: dict[tuple[int, int], int]):
        # frame: columns that are neither source nor destination are unchanged
        matching = self.vm.var("matching", s)
        cols = sorted({c for _, c in self.nonwall})
        src_col: dict[int, int] = {}
        dst_col: dict[int, int] = {}
        for c in cols:
            sv = self.vm.aux(f"srccol[{s},{c}]")
            dv = self.vm.aux(f"dstcol[{s},{c}]")
            src_col[c] = sv
            dst_col[c] = dv
            sels = [lit for (r0, c0, d0), lit in self.msels(s) if c0 == c]
            for lit in sels:
                self.b.clause(neg(lit), sv)
            self.b.clause(neg(sv), *sels)
            dests = [dest_vars[(q, c2)] for (q, c2) in dest_vars if c2 == c]
            for lit in dests:
                self.b.clause(neg(lit), dv)
            self.b.clause(neg(dv), *dests)
        for r, c in self.nonwall:
            for old, new in self.same_cell(s - 1, r, c, r, c):
                self.b.clause(
                    matching, src_col[c], dst_col[c], neg(old), new
                )

    def emit_varmoves_extras(self, max_moves: int) -> list[int]:
        # dummy steps freeze the grid and bunch up at the end of the plan
        for s in range(1, self.S + 1):
            d = self.vm.var("dummy", s)
            if s < self.S:
                self.b.clause(neg(d), self.vm.var("dummy", s + 1))
            for r, c in self.nonwall:
                for old, new in self.same_cell(s - 1, r, c, r, c):
                    self.b.clause(neg(d), neg(old), new)
        moving = [self.vm.var("moving", s) for s in range(1, self.S + 1)]
        unary = self.b.totalizer(self.vm, moving, "cnt")
        if max_moves < len(unary):
            self.b.clause(neg(unary[max_moves]))
        return unary

    def finish(self, meta: dict, unary=()) -> CnfInstance:
        hints = []
        for var, meaning in self.vm.iter_meanings():
            if meaning[0] in ("movesel", "matching", "dummy", "moving"):
                hints.append(var)
        return CnfInstance(
            num_vars=len(self.vm),
            clauses=tuple(self.b.clauses),
            varmap=self.vm,
            meta=meta,
            unary_moves=tuple(unary),
            branch_hints=tuple(hints),
        )


def encode_fixed(
    level: Grid, n_steps: int, max_horizon: int = DEFAULT_MAX_HORIZON
) -> CnfInstance:
    """CNF satisfiable iff the level clears in exactly `n_steps` steps."""
    _validate_level(level)
    if n_steps < 1 or n_steps > max_horizon:
        raise HorizonTooLarge(f"n_steps={n_steps} outside 1..{max_horizon}")
    enc = _Encoder(level, n_steps, "fixed")
    enc.emit_one_hot_cells()
    enc.emit_initial_and_goal()
    enc.emit_no_floating()
    enc.emit_match_flags()
    enc.emit_mode_selection()
    enc.emit_mapsto()
    enc.emit_match_transition()
    enc.emit_moves()
    return enc.finish(
        {
            "mode": "fixed",
            "horizon": n_steps,
            "level_digest": engine.state_key(level).hex(),
            "level": level,
        }
    )


def max_match_steps(level: Grid) -> int:
    """Every match removes at least two blocks, so match steps are bounded
    by half the number of patterned blocks."""
    return sum(engine.pattern_counts(level).values()) // 2


def encode_varmoves(
    level: Grid, max_moves: int, max_horizon: int = DEFAULT_MAX_HORIZON
) -> CnfInstance:
    """CNF satisfiable iff a plan with at most `max_moves` moves exists."""
    _validate_level(level)
    if max_moves < 0:
        raise HorizonTooLarge(f"max_moves must be >= 0, got {max_moves}")
    horizon = max_moves + max_match_steps(level)
    if horizon > max_horizon:
        raise HorizonTooLarge(f"ministep horizon {horizon} exceeds {max_horizon}")
    enc = _Encoder(level, horizon, "varmoves")
    enc.emit_one_hot_cells()
    enc.emit_initial_and_goal()
    enc.emit_no_floating()
    enc.emit_match_flags()
    enc.emit_mode_selection()
    enc.emit_mapsto()
    enc.emit_match_transition()
    enc.emit_moves()
    unary = enc.emit_varmoves_extras(max_moves)
    return enc.finish(
        {
            "mode": "varmoves",
            "horizon": horizon,
            "max_moves": max_moves,
            "level_digest": engine.state_key(level).hex(),
            "level": level,
        },
        unary,
    )


def _grid_from_model(instance: CnfInstance, assignment, s: int) -> Grid:
    level = instance.meta["level"]
    vm = instance.varmap
    patterns = sorted(engine.pattern_counts(level))
    rows = [list(row) for row in level.cells]
    for r, c in level.interior():
        if level.at(r, c) == WALL:
            continue
        trues = [
            v
            for v in [EMPTY] + patterns
            if assignment[vm.var("cell", s, r, c, v)]
        ]
        if len(trues) != 1:
            raise ModelInconsistent(
                f"cell ({r},{c}) at step {s} has {len(trues)} values set"
            )
        rows[r - 1][c - 1] = trues[0]
    return Grid(tuple(tuple(row) for row in rows))


def decode_model(instance: CnfInstance, assignment) -> DecodedPlan:
    """Extract the step kinds and moves from a satisfying assignment and
    validate them by replaying every step through the engine."""
    vm = instance.varmap
    level: Grid = instance.meta["level"]
    horizon: int = instance.meta["horizon"]
    mode: str = instance.meta["mode"]

    grid = _grid_from_model(instance, assignment, 0)
    if grid != level:
        raise ModelInconsistent("model initial state differs from the level")

    kinds: list[str] = []
    moves: list[Move] = []
    for s in range(1, horizon + 1):
        model_grid = _grid_from_model(instance, assignment, s)
        if assignment[vm.var("matching", s)]:
            matched = engine.find_matches(grid)
            if not matched:
                raise ModelInconsistent(f"match step {s} with nothing to match")
            nxt, _ = engine.settle(engine.remove_matches(grid, matched))
            kinds.append(MATCH_STEP)
        else:
            selected = [
                (r, c, d)
                for r, c in level.interior()
                if level.at(r, c) != WALL
                for d in (LEFT, RIGHT)
                if vm.has("movesel", s, r, c, d)
                and assignment[vm.var("movesel", s, r, c, d)]
            ]
            if len(selected) > 1:
                raise ModelInconsistent(f"step {s} selects {len(selected)} moves")
            if not selected:
                if mode != "varmoves" or not assignment[vm.var("dummy", s)]:
                    raise ModelInconsistent(f"step {s} selects no action")
                if engine.find_matches(grid):
                    raise ModelInconsistent(f"dummy step {s} with a match pending")
                kinds.append(DUMMY_STEP)
                nxt = grid
            else:
                r, c, d = selected[0]
                if grid.at(r, c) <= EMPTY or grid.at(r, c + d) != EMPTY:
                    raise ModelInconsistent(f"illegal move at step {s}")
                nxt, _ = engine.settle(
                    grid.replace({(r, c): EMPTY, (r, c + d): grid.at(r, c)})
                )
                kinds.append(MOVE_STEP)
                moves.append(Move(r, c, d))
        if nxt != model_grid:
            raise ModelInconsistent(f"step {s} grid diverges from engine replay")
        grid = nxt

    if not engine.is_goal(grid):
        raise ModelInconsistent("model does not reach the goal")

    # cross-validate against the public engine path: the move/match step
    # sequence must equal the cascade structure of the replayed plan
    state = QuiescentState(level)
    engine_kinds: list[str] = []
    for move in moves:
        state, _, matches = engine.apply_move(state, move)
        engine_kinds.append(MOVE_STEP)
        engine_kinds.extend([MATCH_STEP] * matches)
    if not engine.is_goal(state.grid):
        raise ModelInconsistent("extracted plan does not clear the level")
    non_dummy = [k for k in kinds if k != DUMMY_STEP]
    if engine_kinds != non_dummy:
        raise ModelInconsistent("step kinds diverge from engine cascade structure")

    return DecodedPlan(
        plan=Plan(tuple(moves)),
        step_kinds=tuple(kinds),
        total_steps=len(non_dummy),
    )


def _solved_result(level: Grid, stats: SearchStats) -> SearchResult:
    return SearchResult(
        Solved(Plan(()), engine.Trace(initial=level, events=())), stats
    )


def solve_iterative(
    level: Grid,
    mode: str = "varmoves",
    bound: int = 100,
    backend=None,
    time_limit: float | None = None,
) -> SearchResult:
    """Drive a backend over increasing horizons and decode the first model.

    fixed mode: try n_steps = 1, 2, 3, ... up to `bound`; the first
    satisfiable horizon gives a minimum-total-steps plan.  varmoves mode:
    double max_moves (1, 2, 4, ...) up to `bound`, then minimize the move
    count inside the first feasible horizon by assuming tighter unary
    bounds.  Either way the returned plan has been replay-validated.
    """
    _validate_level(level)
    if mode not in ("fixed", "varmoves"):
        raise ValueError(f"unknown mode {mode!r}")
    if backend is None:
        from puzznic.backends import InternalBackend

        backend = InternalBackend()
    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit
    stats = SearchStats()

    def done(result: SearchResult) -> SearchResult:
        result.stats.elapsed = time.monotonic() - start
        return result

    if engine.is_goal(level):
        return done(_solved_result(level, stats))

    if mode == "fixed":
        if bound < 1:
            raise BoundExhausted(f"no step horizons within bound {bound}")
        for n in range(1, bound + 1):
            instance = encode_fixed(level, n, max_horizon=bound)
            try:
                model = backend(instance, (), deadline)
            except SolverBudgetExceeded:
                return done(SearchResult(BudgetExhausted(), stats))
            stats.generated += len(instance.clauses)
            if model is None:
                continue
            decoded = decode_model(instance, model)
            plan, trace = _replay_plan(level, decoded.plan)
            return done(SearchResult(Solved(plan, trace), stats))
        return done(SearchResult(ProvedUnsolvable(bound), stats))

    if bound < 0:
        raise BoundExhausted(f"no move bounds within {bound}")
    schedule = []
    m = 1
    while m < bound:
        schedule.append(m)
        m *= 2
    schedule.append(bound)
    for m in schedule:
        instance = encode_varmoves(
            level, m, max_horizon=bound + max_match_steps(level)
        )
        try:
            model = backend(instance, (), deadline)
        except SolverBudgetExceeded:
            return done(SearchResult(BudgetExhausted(), stats))
        stats.generated += len(instance.clauses)
        if model is None:
            continue
        best = model
        mu = _count_moves(instance, model)
        try:
            while mu > 0:
                tighter = backend(
                    instance, (-instance.unary_moves[mu - 1],), deadline
                )
                if tighter is None:
                    break
                best = tighter
                mu = _count_moves(instance, tighter)
        except SolverBudgetExceeded:
            return done(SearchResult(BudgetExhausted(), stats))
        decoded = decode_model(instance, best)
        plan, trace = _replay_plan(level, decoded.plan)
        return done(SearchResult(Solved(plan, trace), stats))
    return done(SearchResult(ProvedUnsolvable(bound), stats))


def _count_moves(instance: CnfInstance, model) -> int:
    vm = instance.varmap
    horizon = instance.meta["horizon"]
    return sum(1 for s in range(1, horizon + 1) if model[vm.var("moving", s)])


def _replay_plan(level: Grid, plan: Plan):
    state = QuiescentState(level)
    events = []
    for move in plan.moves:
        state, trace, _ = engine.apply_move(state, move)
        events.extend(trace.events)
    return plan, engine.Trace(initial=level, events=tuple(events))
