"""CNF solving backends.

A backend is a callable `(instance, assumptions=(), deadline=None)` that
returns a model as a bool list indexed by variable, or None when the
instance is unsatisfiable under the assumptions.

The internal backend runs the bundled CDCL solver and keeps one solver per
instance alive so that assumption-based optimization reuses learned clauses.
The external backend shells out to any DIMACS solver that prints the
conventional `s SATISFIABLE`/`s UNSATISFIABLE` status and `v` literal lines
(exit codes 10/20 are also accepted); assumptions are appended to the file
as unit clauses, so the base CNF is encoded once per horizon either way.
"""

from __future__ import annotations

import os
import subprocess
import tempfile
import time

from puzznic.cnf import CnfInstance, parse_solver_output
from puzznic.satsolver import CdclSolver

ENV_BACKEND = "PUZZNIC_SAT_BACKEND"


class BackendFailure(Exception):
    """External solver crashed, timed out, or produced unusable output."""


class InternalBackend:
    """Bundled CDCL solver with per-instance reuse across assumption calls."""

    def __init__(self) -> None:
        self._cache: dict[int, tuple[CnfInstance, CdclSolver]] = {}

    def _solver_for(self, instance: CnfInstance) -> CdclSolver:
        entry = self._cache.get(id(instance))
        if entry is not None and entry[0] is instance:
            return entry[1]
        solver = CdclSolver()
        solver.ensure_vars(instance.num_vars)
        for var in instance.branch_hints:
            solver.activity[var] = 1.0
        for clause in instance.clauses:
            if not solver.add_clause(clause):
                break
        self._cache.clear()  # hold at most one instance at a time
        self._cache[id(instance)] = (instance, solver)
        return solver

    def __call__(self, instance, assumptions=(), deadline=None):
        solver = self._solver_for(instance)
        return solver.solve(assumptions=tuple(assumptions), deadline=deadline)


class ExternalBackend:
    """Runs `executable <dimacs-file>` per call and parses its output."""

    def __init__(self, executable: str):
        self.executable = executable

    def __call__(self, instance, assumptions=(), deadline=None):
        text = instance.to_dimacs()
        if assumptions:
            header = f"p cnf {instance.num_vars} {len(instance.clauses)}"
            patched = f"p cnf {instance.num_vars} {len(instance.clauses) + len(assumptions)}"
            text = text.replace(header, patched, 1)
            text += "".join(f"{lit} 0\n" for lit in assumptions)
        timeout = None
        if deadline is not None:
            timeout = max(0.1, deadline - time.monotonic())
        with tempfile.NamedTemporaryFile(
            "w", suffix=".cnf", prefix="puzznic_", delete=False
        ) as handle:
            handle.write(text)
            path = handle.name
        try:
            proc = subprocess.run(
                [self.executable, path],
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise BackendFailure(f"backend timed out: {self.executable}") from exc
        except OSError as exc:
            raise BackendFailure(f"cannot run backend {self.executable}: {exc}") from exc
        finally:
            try:
                os.unlink(path)
            except OSError:
                pass
        status, lits = parse_solver_output(proc.stdout)
        is_sat = status.upper().startswith("SAT")
        is_unsat = status.upper().startswith("UNSAT")
        if not (is_sat or is_unsat):
            is_sat = proc.returncode == 10
            is_unsat = proc.returncode == 20
        if is_unsat:
            return None
        if not is_sat:
            raise BackendFailure(
                f"backend {self.executable} gave no verdict "
                f"(exit {proc.returncode}, status {status!r})"
            )
        model = [False] * (instance.num_vars + 1)
        for lit in lits:
            var = abs(lit)
            if var <= instance.num_vars:
                model[var] = lit > 0
        return model


def default_backend():
    """External backend when the environment points at one, else internal."""
    executable = os.environ.get(ENV_BACKEND)
    if executable:
        return ExternalBackend(executable)
    return InternalBackend()
