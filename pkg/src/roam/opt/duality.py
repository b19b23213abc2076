"""Mechanical LP dualization with costs that depend affinely on outside variables.

The primal is  min sum_j (c0_j + sum_k C_jk x_k) z_j  subject to the rows
and bounds of an LPModel.  The dual is written into a target model, with
the x_k already present there, as

    max  b'y   s.t.  A_j'y - sum_k C_jk x_k  (<=, =, >=)  c0_j

where the column sense follows the sign restriction of z_j.  Finite bounds
other than zero are moved into rows first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List

from .model import INF, LPModel


@dataclass
class DualMap:
    row_var: List[int]  # dual variable in the target model, per primal row
    objective: Dict[int, float]  # coefficients of the dual objective in the target


def dualize_into(primal: LPModel, target: LPModel, cost_terms=None, prefix="y") -> DualMap:
    """Add dual variables and rows of a min-primal into ``target``.

    cost_terms maps a primal column j to a dict {target var k: C_jk}.  The
    dual objective coefficients are returned (not set) so callers can use
    them as an objective or inside a row.
    """
    if primal.sense != "min":
        raise ValueError("dualize_into expects a minimization primal")
    cost_terms = cost_terms or {}
    rows = [(list(idx), list(vals), s, b) for (idx, vals), s, b in zip(primal.rows, primal.row_sense, primal.rhs)]
    col_sign = []
    for j in range(primal.num_vars):
        lo, hi = primal.lb[j], primal.ub[j]
        if lo == 0.0 and hi == 0.0:
            col_sign.append("fixed")
            continue
        if math.isfinite(lo) and lo != 0.0:
            rows.append(([j], [1.0], ">=", lo))
        if math.isfinite(hi) and hi != 0.0:
            rows.append(([j], [1.0], "<=", hi))
        col_sign.append("nonneg" if lo >= 0 else "nonpos" if hi <= 0 else "free")

    row_var = []
    objective = {}
    cols: List[Dict[int, float]] = [dict() for _ in range(primal.num_vars)]
    for r, (idx, vals, s, b) in enumerate(rows):
        lo, hi = {"<=": (-INF, 0.0), ">=": (0.0, INF), "=": (-INF, INF)}[s]
        y = target.add_var(lo, hi, 0.0, f"{prefix}{r}")
        row_var.append(y)
        if b:
            objective[y] = b
        for j, a in zip(idx, vals):
            cols[j][y] = cols[j].get(y, 0.0) + a
    for j in range(primal.num_vars):
        if col_sign[j] == "fixed":
            continue
        coefs = dict(cols[j])
        for k, ck in cost_terms.get(j, {}).items():
            coefs[k] = coefs.get(k, 0.0) - ck
        sense = {"nonneg": "<=", "nonpos": ">=", "free": "="}[col_sign[j]]
        target.add_row(coefs, sense, primal.obj[j], f"dual_{primal.var_names[j]}")
    return DualMap(row_var[: primal.num_rows], objective)


def dual_model(primal: LPModel) -> LPModel:
    """The plain dual of a min-LP as a max-LP."""
    d = LPModel("max", f"dual_{primal.name}")
    dm = dualize_into(primal, d)
    for k, b in dm.objective.items():
        d.obj[k] = b
    return d
