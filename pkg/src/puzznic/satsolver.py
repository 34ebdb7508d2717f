"""A small CDCL SAT solver used as the bundled CNF backend.

Two-watched-literal propagation, first-UIP clause learning, exponential
VSIDS decay, Luby restarts, activity-based deletion of learned clauses, and
MiniSat-style assumption handling.  Literals are nonzero ints (DIMACS
convention); variables are numbered from 1.

This is deliberately plain Python: the bounded puzzle encodings it has to
digest are in the tens of thousands of clauses, where careful inner loops
are fast enough.  Heavier workloads can be routed to any external DIMACS
solver instead.
"""

from __future__ import annotations

import time


class SolverBudgetExceeded(Exception):
    """Raised when a deadline expires mid-search."""


def _luby(i: int) -> int:
    # Luby restart sequence (1-based): 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class CdclSolver:
    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []  # problem clauses
        self.learnts: list[list[int]] = []
        # per literal code (2v / 2v+1): +1 true, -1 false, 0 unassigned
        self.value: list[int] = [0, 0]
        self.watches: list[list[list[int]]] = [[], []]  # lit code -> clause refs
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.ok = True

    # -- construction ------------------------------------------------------

    def ensure_vars(self, n: int) -> None:
        while self.nvars < n:
            self.nvars += 1
            self.value.extend((0, 0))
            self.watches.extend(([], []))
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(False)

    @staticmethod
    def _code(lit: int) -> int:
        return lit << 1 if lit > 0 else (-lit << 1) | 1

    def add_clause(self, lits) -> bool:
        """Add a problem clause; returns False if the formula is now trivially
        unsatisfiable (empty clause or conflicting units at level 0)."""
        if not self.ok:
            return False
        seen: set[int] = set()
        out: list[int] = []
        for lit in lits:
            if -lit in seen:
                return True  # tautology
            if lit in seen:
                continue
            seen.add(lit)
            self.ensure_vars(abs(lit))
            v = self.value[self._code(lit)]
            if v == 1 and self.level[abs(lit)] == 0:
                return True  # already satisfied at root
            if v == -1 and self.level[abs(lit)] == 0:
                continue  # root-false literal drops out
            out.append(lit)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            if not self._enqueue(out[0], None):
                self.ok = False
                return False
            conflict = self._propagate()
            if conflict is not None:
                self.ok = False
                return False
            return True
        clause = out
        self.clauses.append(clause)
        self.watches[self._code(clause[0])].append(clause)
        self.watches[self._code(clause[1])].append(clause)
        return True

    # -- trail management --------------------------------------------------

    def _enqueue(self, lit: int, reason: list[int] | None) -> bool:
        code = self._code(lit)
        val = self.value[code]
        if val != 0:
            return val == 1
        self.value[code] = 1
        self.value[code ^ 1] = -1
        var = abs(lit)
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.phase[var] = lit > 0
        self.trail.append(lit)
        return True

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for lit in reversed(self.trail[bound:]):
            code = self._code(lit)
            self.value[code] = 0
            self.value[code ^ 1] = 0
            self.reason[abs(lit)] = None
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    # -- propagation -------------------------------------------------------

    def _propagate(self) -> list[int] | None:
        value = self.value
        watches = self.watches
        code_of = self._code
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_code = code_of(-lit)
            false_lit = -lit
            watchlist = watches[false_code]
            i = 0
            j = 0
            n = len(watchlist)
            while i < n:
                clause = watchlist[i]
                i += 1
                # make sure the false literal is in slot 1
                if clause[0] == false_lit:
                    clause[0] = clause[1]
                    clause[1] = false_lit
                first = clause[0]
                if value[code_of(first)] == 1:
                    watchlist[j] = clause
                    j += 1
                    continue
                # look for a replacement watch
                found = False
                for k in range(2, len(clause)):
                    other = clause[k]
                    if value[code_of(other)] != -1:
                        clause[1] = other
                        clause[k] = false_lit
                        watches[code_of(other)].append(clause)
                        found = True
                        break
                if found:
                    continue
                # unit or conflicting
                watchlist[j] = clause
                j += 1
                if value[code_of(first)] == -1:
                    while i < n:
                        watchlist[j] = watchlist[i]
                        j += 1
                        i += 1
                    del watchlist[j:]
                    self.qhead = len(self.trail)
                    return clause
                self.value[code_of(first)] = 1
                self.value[code_of(first) ^ 1] = -1
                var = abs(first)
                self.level[var] = len(self.trail_lim)
                self.reason[var] = clause
                self.phase[var] = first > 0
                self.trail.append(first)
            del watchlist[j:]
        return None

    # -- conflict analysis -------------------------------------------------

    def _bump_var(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            inv = 1e-100
            for v in range(1, self.nvars + 1):
                self.activity[v] *= inv
            self.var_inc *= inv

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP learning: resolve the conflict backwards along the trail
        until one literal of the current decision level remains."""
        learnt = [0]  # slot 0 receives the asserting literal
        seen = [False] * (self.nvars + 1)
        counter = 0
        p = 0  # 0 while processing the conflict clause itself
        clause = conflict
        index = len(self.trail)
        cur_level = len(self.trail_lim)
        while True:
            # skip the implied literal (slot 0) of reason clauses
            for q in clause if p == 0 else clause[1:]:
                var = abs(q)
                if seen[var] or self.level[var] == 0:
                    continue
                seen[var] = True
                self._bump_var(var)
                if self.level[var] >= cur_level:
                    counter += 1
                else:
                    learnt.append(q)
            while True:
                index -= 1
                p = self.trail[index]
                if seen[abs(p)]:
                    break
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[abs(q)] for q in learnt[1:])
        # move a literal of the backjump level into slot 1 for watching
        for idx in range(1, len(learnt)):
            if self.level[abs(learnt[idx])] == back:
                learnt[1], learnt[idx] = learnt[idx], learnt[1]
                break
        return learnt, back

    # -- main search -------------------------------------------------------

    def solve(
        self, assumptions: tuple[int, ...] = (), deadline: float | None = None
    ) -> list[bool] | None:
        """Return a model as a bool list indexed by variable (index 0 unused),
        or None when unsatisfiable under the assumptions."""
        if not self.ok:
            return None
        for lit in assumptions:
            self.ensure_vars(abs(lit))
        conflict_count = 0
        restart_idx = 1
        restart_budget = 100 * _luby(restart_idx)
        max_learnts = 4000
        order = sorted(range(1, self.nvars + 1), key=lambda v: -self.activity[v])
        order_pos = 0

        conflict = self._propagate()
        if conflict is not None:
            self._cancel_until(0)
            return None

        while True:
            conflict = self._propagate()
            if conflict is not None:
                conflict_count += 1
                if conflict_count % 256 == 0 and deadline is not None:
                    if time.monotonic() > deadline:
                        self._cancel_until(0)
                        raise SolverBudgetExceeded
                if len(self.trail_lim) == 0:
                    self._cancel_until(0)
                    return None
                learnt, back = self._analyze(conflict)
                self._cancel_until(back)
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        self._cancel_until(0)
                        return None
                else:
                    self.learnts.append(learnt)
                    self.watches[self._code(learnt[0])].append(learnt)
                    self.watches[self._code(learnt[1])].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= 0.95
                if conflict_count >= restart_budget:
                    restart_idx += 1
                    restart_budget = conflict_count + 100 * _luby(restart_idx)
                    self._cancel_until(0)
                    order = sorted(
                        range(1, self.nvars + 1), key=lambda v: -self.activity[v]
                    )
                    order_pos = 0
                if len(self.learnts) > max_learnts:
                    self._reduce_learnts()
                    max_learnts += 500
                continue

            # pick the next assumption, if any remain unsatisfied
            lvl = len(self.trail_lim)
            decided = False
            while lvl < len(assumptions):
                a = assumptions[lvl]
                val = self.value[self._code(a)]
                if val == 1:
                    self.trail_lim.append(len(self.trail))
                    lvl += 1
                    continue
                if val == -1:
                    self._cancel_until(0)
                    return None
                self.trail_lim.append(len(self.trail))
                self._enqueue(a, None)
                decided = True
                break
            if decided:
                continue

            # free decision
            var = 0
            while order_pos < len(order):
                cand = order[order_pos]
                order_pos += 1
                if self.value[cand << 1] == 0:
                    var = cand
                    break
            if var == 0:
                for cand in range(1, self.nvars + 1):
                    if self.value[cand << 1] == 0:
                        var = cand
                        break
            if var == 0:
                model = [False] * (self.nvars + 1)
                for v in range(1, self.nvars + 1):
                    model[v] = self.value[v << 1] == 1
                self._cancel_until(0)
                return model
            self.trail_lim.append(len(self.trail))
            self._enqueue(var if self.phase[var] else -var, None)

    def _reduce_learnts(self) -> None:
        locked = {id(self.reason[abs(lit)]) for lit in self.trail if self.reason[abs(lit)]}
        keep: list[list[int]] = []
        removable: list[list[int]] = []
        for c in self.learnts:
            if id(c) in locked or len(c) <= 2:
                keep.append(c)
            else:
                removable.append(c)
        removable.sort(key=len)
        cut = len(removable) // 2
        dropped = removable[cut:]
        keep.extend(removable[:cut])
        drop_ids = {id(c) for c in dropped}
        if not drop_ids:
            return
        self.learnts = keep
        for code in range(2, 2 * self.nvars + 2):
            wl = self.watches[code]
            self.watches[code] = [c for c in wl if id(c) not in drop_ids]


def solve_clauses(
    clauses,
    nvars: int,
    assumptions: tuple[int, ...] = (),
    deadline: float | None = None,
) -> list[bool] | None:
    """One-shot convenience wrapper: solve a clause list, return a model or None."""
    solver = CdclSolver()
    solver.ensure_vars(nvars)
    for clause in clauses:
        if not solver.add_clause(clause):
            return None
    return solver.solve(assumptions=assumptions, deadline=deadline)
