"""Linear description of the residual norm ball."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

from .model import INF, LPModel


@dataclass
class BallRows:
    rows: List[int] = field(default_factory=list)
    aux: List[int] = field(default_factory=list)


def linearize_norm_ball(model: LPModel, eps: Sequence[int], norm: str, eta: float) -> BallRows:
    """Add rows forcing ||eps|| <= eta for the l1 or linf norm.

    eta == 0 gives one equality row per component.  linf gives two rows
    per component.  l1 adds an auxiliary t_k >= |eps_k| (two rows each)
    and one row bounding the sum of the t_k.
    """
    out = BallRows()
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    if eta == 0:
        for k in eps:
            out.rows.append(model.add_row({k: 1.0}, "=", 0.0, f"ball_zero_{k}"))
        return out
    if norm == "linf":
        for k in eps:
            out.rows.append(model.add_row({k: 1.0}, "<=", eta, f"ball_up_{k}"))
            out.rows.append(model.add_row({k: -1.0}, "<=", eta, f"ball_dn_{k}"))
        return out
    if norm == "l1":
        for k in eps:
            t = model.add_var(0.0, INF, 0.0, f"abs_{k}")
            out.aux.append(t)
            out.rows.append(model.add_row({t: 1.0, k: -1.0}, ">=", 0.0, f"ball_pos_{k}"))
            out.rows.append(model.add_row({t: 1.0, k: 1.0}, ">=", 0.0, f"ball_neg_{k}"))
        out.rows.append(model.add_row({t: 1.0 for t in out.aux}, "<=", eta, "ball_sum"))
        return out
    raise ValueError(f"unknown norm {norm!r}")
