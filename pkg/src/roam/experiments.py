"""Monte Carlo experiment runners that write one CSV row per result.

Replication r of a run with master seed s draws everything from the
stream (s, r), so any single row can be reproduced on its own.
"""
from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, List, Optional

from . import generators as gen
from .errors import BadParams
from .instance import best_past_revenue, fmt_assortment
from .robust import best_case_revenue
from .solve import eto_baseline, pareto_sweep, solve_ro

COLUMNS = {
    "fig1_2": ["rep", "best_past", "worst_new", "best_new"],
    "fig3": ["rep", "n", "k", "best_past", "ro_value", "ro_best", "assortment", "improves"],
    "fig4": ["rep", "n", "k", "seconds", "ro_value", "candidates"],
    "fig5": ["rep", "n", "m", "seconds", "ro_value", "assortment"],
    "fig6": ["rep", "family", "n", "q", "theta", "assortment", "worst", "best", "best_past",
             "change_low", "change_high"],
}

DEFAULTS = {
    "fig1_2": {"n": 4},
    "fig3": {"n": 10, "k": 10},
    "fig4": {"n_list": [10, 20, 30, 40], "k": 1000},
    "fig5": {"n": 10, "m_list": [2, 4, 6, 8, 10], "k": 80},
    "fig6": {"families": ["a", "b", "c"], "k": 80, "grid": 101},
}

IMPROVE_TOL = 1e-9


def _fig1_2(rep, seed, n):
    inst, _ = gen.revordered(n, (seed, rep))
    res = eto_baseline(inst, (seed, rep, 1))
    return [{"rep": rep, "best_past": res.best_past, "worst_new": res.worst, "best_new": res.best}]


def _fig3(rep, seed, n, k):
    inst, _ = gen.two(n, k, (seed, rep))
    rep_ = solve_ro(inst)
    past = best_past_revenue(inst)
    return [{
        "rep": rep, "n": n, "k": k, "best_past": past, "ro_value": rep_.value,
        "ro_best": best_case_revenue(inst, rep_.assortment).value,
        "assortment": fmt_assortment(rep_.assortment),
        "improves": int(rep_.value > past + IMPROVE_TOL),
    }]


def _fig4(rep, seed, n_list, k):
    rows = []
    for n in n_list:
        inst, _ = gen.two(n, k, (seed, rep, n))
        t0 = time.perf_counter()
        out = solve_ro(inst, "two_flow")
        rows.append({"rep": rep, "n": n, "k": k, "seconds": time.perf_counter() - t0,
                     "ro_value": out.value, "candidates": len(out.table)})
    return rows


def _fig5(rep, seed, n, m_list, k):
    rows = []
    for m in m_list:
        inst, _ = gen.nested(n, m, k, (seed, rep, m))
        t0 = time.perf_counter()
        out = solve_ro(inst, "nested_milp")
        rows.append({"rep": rep, "n": n, "m": m, "seconds": time.perf_counter() - t0,
                     "ro_value": out.value, "assortment": fmt_assortment(out.assortment)})
    return rows


def _fig6(rep, seed, families, k, grid, n=None):
    rows = []
    for fam in families:
        inst, _ = gen.fig6(fam, n, k, (seed, rep, ord(fam)))
        points = pareto_sweep(inst, grid, dedupe=False)
        qs = [j / (grid - 1) for j in range(grid)] if isinstance(grid, int) else sorted(grid)
        for q, p in zip(qs, points):
            low, high = p.improvement
            rows.append({
                "rep": rep, "family": fam, "n": inst.n, "q": q, "theta": p.theta,
                "assortment": fmt_assortment(p.assortment), "worst": p.worst_case, "best": p.best_case,
                "best_past": p.best_past, "change_low": low, "change_high": high,
            })
    return rows


RUNNERS = {"fig1_2": _fig1_2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6}


def run_experiment(name, reps=10, seed=0, out: Optional[str] = None, workers: int = 1, **params) -> List[Dict]:
    """Run reps replications; rows come back ordered by replication index."""
    if name not in RUNNERS:
        raise BadParams(f"unknown experiment {name!r}; expected one of {sorted(RUNNERS)}")
    if reps < 1:
        raise BadParams("reps must be positive")
    kw = dict(DEFAULTS[name])
    kw.update({k: v for k, v in params.items() if v is not None})
    job = partial(RUNNERS[name], seed=seed, **kw)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, range(reps)))
    else:
        chunks = [job(r) for r in range(reps)]
    rows = [row for chunk in chunks for row in chunk]
    if out:
        write_csv(out, COLUMNS[name], rows)
    return rows


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow(row)
