"""CNF plumbing: variable maps, clause building, counters, DIMACS output.

Variables carry tagged meanings (cell values per step, move selectors, match
flags, gravity mappings, ...).  Non-auxiliary meanings are numbered first in
lexicographic order of their tags, so two encodings of the same instance are
byte-identical; Tseitin auxiliaries follow in creation order.  Clause
emission folds the constants produced by statically-known cells (walls never
hold variables): a clause containing a true literal is dropped, false
literals are removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


class _Const:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


TRUE = _Const("TRUE")
FALSE = _Const("FALSE")


def neg(lit):
    if lit is TRUE:
        return FALSE
    if lit is FALSE:
        return TRUE
    return -lit


class VarMap:
    """Bijection between CNF variables and tagged meanings.

    Meanings are tuples whose first element is the tag name, e.g.
    ("cell", step, row, col, value) or ("movesel", step, row, col, dir).
    """

    def __init__(self, meanings: Iterable[tuple]) -> None:
        ordered = sorted(meanings)
        self._by_meaning: dict[tuple, int] = {}
        self._by_var: list[tuple] = []
        for m in ordered:
            self._by_meaning[m] = len(self._by_var) + 1
            self._by_var.append(m)

    def var(self, *meaning) -> int:
        return self._by_meaning[meaning]

    def has(self, *meaning) -> bool:
        return meaning in self._by_meaning

    def aux(self, origin: str) -> int:
        m = ("aux", len(self._by_var), origin)
        self._by_meaning[m] = len(self._by_var) + 1
        self._by_var.append(m)
        return self._by_meaning[m]

    def meaning(self, var: int) -> tuple:
        return self._by_var[var - 1]

    def __len__(self) -> int:
        return len(self._by_var)

    def describe(self, var: int) -> str | None:
        """Human meaning for the DIMACS comment map; None for auxiliaries."""
        m = self._by_var[var - 1]
        tag = m[0]
        if tag == "aux":
            return None
        if tag == "cell":
            _, s, r, c, v = m
            names = {-1: "wall", 0: "empty"}
            return f"cell[{s},{r},{c}]={names.get(v, f'p{v}')}"
        if tag == "movesel":
            _, s, r, c, d = m
            return f"move[{s},{r},{c},{'L' if d < 0 else 'R'}]"
        if tag == "matching":
            return f"matching[{m[1]}]"
        if tag == "matchflag":
            _, s, r, c = m
            return f"matchflag[{s},{r},{c}]"
        if tag == "mapsto":
            _, s, r, c, dest = m
            return f"mapsto[{s},{r},{c}]={dest}"
        if tag == "moving":
            return f"moving[{m[1]}]"
        if tag == "dummy":
            return f"dummy[{m[1]}]"
        return "/".join(str(x) for x in m)

    def iter_meanings(self):
        for i, m in enumerate(self._by_var, start=1):
            yield i, m


class ClauseBuilder:
    def __init__(self) -> None:
        self.clauses: list[tuple[int, ...]] = []

    def clause(self, *lits) -> None:
        out = []
        for lit in lits:
            if lit is TRUE:
                return
            if lit is FALSE:
                continue
            out.append(lit)
        self.clauses.append(tuple(out))

    def implies(self, antecedents, consequent) -> None:
        """(/\\ antecedents) -> consequent as one clause."""
        self.clause(*[neg(a) for a in antecedents], consequent)

    def at_most_one(self, lits) -> None:
        concrete = [l for l in lits if l is not FALSE]
        if any(l is TRUE for l in concrete):
            concrete = [l for l in concrete if l is not TRUE]
            for l in concrete:
                self.clause(neg(l))
            return
        for i in range(len(concrete)):
            for j in range(i + 1, len(concrete)):
                self.clause(neg(concrete[i]), neg(concrete[j]))

    def totalizer(self, varmap: VarMap, lits: list[int], origin: str) -> list[int]:
        """Sorted unary counter over `lits`: output[j] is implied whenever at
        least j+1 inputs are true, and outputs are emitted in sorted order
        (output[0] >= output[1] >= ...).  Only the input->output direction is
        emitted, which is what upper-bound assumptions need."""
        if not lits:
            return []
        if len(lits) == 1:
            return [lits[0]]
        mid = len(lits) // 2
        left = self.totalizer(varmap, lits[:mid], origin + "l")
        right = self.totalizer(varmap, lits[mid:], origin + "r")
        out = [varmap.aux(f"{origin}[{k}]") for k in range(len(left) + len(right))]
        for i in range(len(left) + 1):
            for j in range(len(right) + 1):
                if i + j == 0:
                    continue
                ante = []
                if i > 0:
                    ante.append(left[i - 1])
                if j > 0:
                    ante.append(right[j - 1])
                self.implies(ante, out[i + j - 1])
        return out


@dataclass(frozen=True)
class CnfInstance:
    """A propositional encoding plus the meaning of its variables.

    `meta` records the mode ("fixed" or "varmoves"), the horizon, and the
    level digest.  `unary_moves` holds the sorted move-count literals of the
    varmoves model: unary_moves[j] means "more than j player moves", so
    assuming -unary_moves[k] caps the plan at k moves.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    varmap: VarMap
    meta: dict
    unary_moves: tuple[int, ...] = ()
    branch_hints: tuple[int, ...] = ()

    def to_dimacs(self) -> str:
        lines = []
        for var, _ in self.varmap.iter_meanings():
            desc = self.varmap.describe(var)
            if desc is not None:
                lines.append(f"c map {var} {desc}")
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        for clause in self.clauses:
            lines.append(" ".join([*map(str, clause), "0"]))
        return "\n".join(lines) + "\n"


def parse_solver_output(text: str) -> tuple[str, list[int]]:
    """Parse conventional SAT-competition output: an `s` status line plus
    `v` literal lines terminated by 0.  Returns (status, literals)."""
    status = ""
    lits: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                val = int(tok)
                if val != 0:
                    lits.append(val)
    return status, lits
