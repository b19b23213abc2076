"""Solver-agnostic problem descriptions and results."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

INF = math.inf
SENSES = ("<=", "=", ">=")


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class Solution:
    status: SolveStatus
    value: float = math.nan
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None  # d(objective)/d(rhs), one per row
    iterations: int = 0
    nodes: int = 0
    warm: object = None  # opaque warm-start payload for the built-in simplex

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


class LPModel:
    """A linear program: variables with bounds, one objective, sparse rows."""

    def __init__(self, sense: str = "min", name: str = ""):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.name = name
        self.lb: List[float] = []
        self.ub: List[float] = []
        self.obj: List[float] = []
        self.var_names: List[str] = []
        self.rows: List[Tuple[List[int], List[float]]] = []
        self.row_sense: List[str] = []
        self.rhs: List[float] = []
        self.row_names: List[str] = []

    @property
    def num_vars(self) -> int:
        return len(self.lb)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_var(self, lb=0.0, ub=INF, obj=0.0, name=None) -> int:
        if lb > ub:
            raise ValueError(f"variable bounds [{lb}, {ub}] are empty")
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        self.var_names.append(name if name is not None else f"x{len(self.lb) - 1}")
        return len(self.lb) - 1

    def add_vars(self, count, lb=0.0, ub=INF, obj=0.0, prefix="x") -> List[int]:
        return [self.add_var(lb, ub, obj, f"{prefix}{k}") for k in range(count)]

    def add_row(self, coefs, sense: str, rhs: float, name=None) -> int:
        """coefs: dict {var: coef} or iterable of (var, coef) pairs."""
        if sense not in SENSES:
            raise ValueError(f"row sense must be one of {SENSES}")
        items = coefs.items() if isinstance(coefs, dict) else coefs
        acc: Dict[int, float] = {}
        for j, a in items:
            if not math.isfinite(a):
                raise ValueError("coefficients must be finite")
            acc[int(j)] = acc.get(int(j), 0.0) + float(a)
        idx = sorted(j for j, a in acc.items() if a != 0.0)
        self.rows.append((idx, [acc[j] for j in idx]))
        self.row_sense.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name if name is not None else f"r{len(self.rows) - 1}")
        return len(self.rows) - 1

    def set_obj(self, j: int, c: float) -> None:
        self.obj[j] = float(c)

    def matrix(self) -> sp.csc_matrix:
        data, ri, ci = [], [], []
        for r, (idx, vals) in enumerate(self.rows):
            ri.extend([r] * len(idx))
            ci.extend(idx)
            data.extend(vals)
        return sp.csc_matrix((data, (ri, ci)), shape=(self.num_rows, self.num_vars))

    def objective_value(self, x) -> float:
        return float(np.dot(self.obj, x))

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for j in range(self.num_vars):
            worst = max(worst, self.lb[j] - x[j], x[j] - self.ub[j])
        for (idx, vals), s, b in zip(self.rows, self.row_sense, self.rhs):
            lhs = float(np.dot(vals, x[idx])) if idx else 0.0
            if s == "<=":
                worst = max(worst, lhs - b)
            elif s == ">=":
                worst = max(worst, b - lhs)
            else:
                worst = max(worst, abs(lhs - b))
        return worst

    def copy(self) -> "LPModel":
        other = self.__class__.__new__(self.__class__)
        other.__dict__.update({k: (list(v) if isinstance(v, list) else v) for k, v in self.__dict__.items()})
        if hasattr(self, "binaries"):
            other.binaries = set(self.binaries)
        return other

    def dump(self) -> str:
        """Plain text listing, one constraint per line."""

        def term(c, j):
            return f"{c:+g} {self.var_names[j]}"

        lines = [f"{self.sense} " + " ".join(term(c, j) for j, c in enumerate(self.obj) if c) or "0"]
        lines.append("subject to")
        for name, (idx, vals), s, b in zip(self.row_names, self.rows, self.row_sense, self.rhs):
            body = " ".join(term(c, j) for j, c in zip(idx, vals)) or "0"
            lines.append(f"  {name}: {body} {s} {b:g}")
        lines.append("bounds")
        for j, name in enumerate(self.var_names):
            lines.append(f"  {self.lb[j]:g} <= {name} <= {self.ub[j]:g}")
        binaries = sorted(getattr(self, "binaries", ()))
        if binaries:
            lines.append("binary")
            lines.append("  " + " ".join(self.var_names[j] for j in binaries))
        lines.append("end")
        return "\n".join(lines)


class MILPModel(LPModel):
    def __init__(self, sense: str = "min", name: str = ""):
        super().__init__(sense, name)
        self.binaries = set()

    def add_binary(self, obj=0.0, name=None) -> int:
        j = self.add_var(0.0, 1.0, obj, name)
        self.binaries.add(j)
        return j


@dataclass
class FlowNetwork:
    """Uncapacitated network: node supplies (negative for demand), arcs with costs."""

    supply: List[float] = field(default_factory=list)
    node_names: List[str] = field(default_factory=list)
    tails: List[int] = field(default_factory=list)
    heads: List[int] = field(default_factory=list)
    costs: List[float] = field(default_factory=list)

    @property
    def num_nodes(self) -> int:
        return len(self.supply)

    @property
    def num_arcs(self) -> int:
        return len(self.tails)

    def add_node(self, supply=0.0, name=None) -> int:
        self.supply.append(float(supply))
        self.node_names.append(name if name is not None else f"n{len(self.supply) - 1}")
        return len(self.supply) - 1

    def add_arc(self, tail: int, head: int, cost: float) -> int:
        self.tails.append(tail)
        self.heads.append(head)
        self.costs.append(float(cost))
        return len(self.tails) - 1

    def imbalance(self) -> float:
        return float(sum(self.supply))

    def to_lp(self) -> LPModel:
        """The equivalent transportation LP (one equality row per node)."""
        lp = LPModel("min", "flow")
        for a in range(self.num_arcs):
            lp.add_var(0.0, INF, self.costs[a], f"arc{a}")
        rows = [dict() for _ in range(self.num_nodes)]
        for a, (t, h) in enumerate(zip(self.tails, self.heads)):
            rows[t][a] = rows[t].get(a, 0.0) + 1.0
            rows[h][a] = rows[h].get(a, 0.0) - 1.0
        for v, row in enumerate(rows):
            lp.add_row(row, "=", self.supply[v], self.node_names[v])
        return lp
