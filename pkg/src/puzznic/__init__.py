"""Solvers for static-grid Puzznic.

Subpackages: `engine` (game rules), `levels` (text formats), `planner`
(optimal forward search), `encoder`/`cnf`/`satsolver` (bounded CNF models
and the bundled backend), `pddl` (planner export), `cli` (command line).
"""

from puzznic.engine import (
    EMPTY,
    LEFT,
    RIGHT,
    WALL,
    Grid,
    Move,
    QuiescentState,
    Trace,
    apply_move,
    is_goal,
    legal_moves,
    resolve,
    settle,
)

__all__ = [
    "EMPTY",
    "LEFT",
    "RIGHT",
    "WALL",
    "Grid",
    "Move",
    "QuiescentState",
    "Trace",
    "apply_move",
    "is_goal",
    "legal_moves",
    "resolve",
    "settle",
]

__version__ = "0.1.0"
