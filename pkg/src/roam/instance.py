"""Problem instances: validation, relabeling, restriction and structure tags."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicateRevenue,
    FrequencyOutOfRange,
    FrequencySumViolation,
    IndexOutOfRange,
    InvalidInstance,
    MissingNoPurchase,
    NegativeEta,
    NonPositiveRevenue,
)

SUM_TOL = 1e-9
NORMS = ("l1", "linf")
DEFAULT_NORM = "linf"

Assortment = FrozenSet[int]


def assortment(items) -> Assortment:
    """Build an assortment, adding the no-purchase option 0."""
    return frozenset(int(i) for i in items) | {0}


def to_mask(S) -> int:
    mask = 0
    for i in S:
        mask |= 1 << int(i)
    return mask


def from_mask(mask: int) -> Assortment:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def fmt_assortment(S) -> str:
    return "{" + ",".join(str(i) for i in sorted(S)) + "}"


@dataclass(frozen=True, eq=False)
class Instance:
    """A validated instance with products relabeled so revenues ascend.

    revenues has length n+1 with revenues[0] == 0.  sales[m] maps each
    product of past_assortments[m] to its observed purchase frequency.
    labels[i] is the caller's label of internal product i.
    """

    n: int
    revenues: Tuple[float, ...]
    past_assortments: Tuple[Assortment, ...]
    sales: Tuple[Dict[int, float], ...]
    eta: float = 0.0
    norm: str = DEFAULT_NORM
    labels: Tuple[int, ...] = field(default=())

    @property
    def M(self) -> int:
        return len(self.past_assortments)

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.revenues, dtype=float)

    @property
    def r_max(self) -> float:
        return float(self.revenues[-1])

    def v(self, m: int, i: int) -> float:
        """Frequency for 0-based assortment index m (0 when i is not offered)."""
        return self.sales[m].get(i, 0.0)

    def offer_sets(self) -> List[FrozenSet[int]]:
        """For each product, the 0-based indices of past assortments offering it."""
        out = [set() for _ in range(self.n + 1)]
        for m, S in enumerate(self.past_assortments):
            for i in S:
                out[i].add(m)
        return [frozenset(s) for s in out]

    def offered(self) -> FrozenSet[int]:
        out = set()
        for S in self.past_assortments:
            out |= S
        return frozenset(out)

    def replace(self, **kw) -> "Instance":
        data = dict(
            n=self.n,
            revenues=self.revenues,
            past_assortments=self.past_assortments,
            sales=self.sales,
            eta=self.eta,
            norm=self.norm,
            labels=self.labels,
        )
        data.update(kw)
        return Instance(**data)

    def same_data(self, other: "Instance") -> bool:
        return (
            self.n == other.n
            and self.revenues == other.revenues
            and self.past_assortments == other.past_assortments
            and self.sales == other.sales
            and self.eta == other.eta
            and self.norm == other.norm
        )

    def to_dict(self) -> dict:
        """Serialize with internal labels using the JSON instance schema."""
        return {
            "n": self.n,
            "revenues": [float(x) for x in self.revenues[1:]],
            "past_assortments": [sorted(S) for S in self.past_assortments],
            "sales": [
                {"assortment": m, "freq": {str(i): self.sales[m][i] for i in sorted(self.sales[m])}}
                for m in range(self.M)
            ],
            "eta": self.eta,
            "norm": self.norm,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


_FIELDS = {"n", "revenues", "past_assortments", "sales", "eta", "norm"}


def validate_instance(raw) -> Instance:
    """Validate raw instance data (a dict following the JSON schema, or a JSON string)."""
    if isinstance(raw, (str, bytes)):
        raw = json.loads(raw)
    if not isinstance(raw, dict):
        raise InvalidInstance("instance must be a JSON object")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise InvalidInstance(f"unknown fields: {sorted(unknown)}")
    missing = {"n", "revenues", "past_assortments", "sales"} - set(raw)
    if missing:
        raise InvalidInstance(f"missing fields: {sorted(missing)}")

    n = raw["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidInstance("n must be a positive integer")
    revenues = [float(x) for x in raw["revenues"]]
    if len(revenues) != n:
        raise InvalidInstance(f"expected {n} revenues, got {len(revenues)}")
    for x in revenues:
        if not math.isfinite(x) or x <= 0:
            raise NonPositiveRevenue(f"revenue {x} is not positive")
    if len(set(revenues)) != n:
        raise DuplicateRevenue("revenues must be distinct")

    eta = float(raw.get("eta", 0.0))
    if not math.isfinite(eta) or eta < 0:
        raise NegativeEta(f"eta={eta} must be nonnegative")
    norm = str(raw.get("norm", DEFAULT_NORM)).lower()
    if norm not in NORMS:
        raise InvalidInstance(f"norm must be one of {NORMS}")

    past = []
    for m, items in enumerate(raw["past_assortments"]):
        S = set()
        for i in items:
            if isinstance(i, bool) or int(i) != i or not 0 <= int(i) <= n:
                raise InvalidInstance(f"assortment {m} has bad product {i!r}")
            S.add(int(i))
        if 0 not in S:
            raise MissingNoPurchase(f"assortment {m} lacks product 0")
        past.append(frozenset(S))
    if not past:
        raise InvalidInstance("at least one past assortment is required")

    sales: List[Optional[Dict[int, float]]] = [None] * len(past)
    for entry in raw["sales"]:
        if not isinstance(entry, dict) or set(entry) - {"assortment", "freq"}:
            raise InvalidInstance("sales entries need exactly 'assortment' and 'freq'")
        m = entry["assortment"]
        if not isinstance(m, int) or not 0 <= m < len(past):
            raise InvalidInstance(f"sales entry refers to unknown assortment {m!r}")
        if sales[m] is not None:
            raise InvalidInstance(f"duplicate sales entry for assortment {m}")
        freq = {}
        for key, val in entry["freq"].items():
            i = int(key)
            val = float(val)
            if i not in past[m]:
                raise FrequencyOutOfRange(f"frequency given for product {i} not in assortment {m}")
            if not math.isfinite(val) or val < 0 or val > 1:
                raise FrequencyOutOfRange(f"frequency {val} outside [0,1]")
            freq[i] = val
        total = sum(freq.values())
        if abs(total - 1.0) > SUM_TOL:
            raise FrequencySumViolation(f"frequencies of assortment {m} sum to {total}")
        sales[m] = {i: freq.get(i, 0.0) for i in sorted(past[m])}
    for m, s in enumerate(sales):
        if s is None:
            raise InvalidInstance(f"no sales entry for assortment {m}")

    # relabel products so revenues ascend
    order = sorted(range(1, n + 1), key=lambda i: revenues[i - 1])
    new_of = {0: 0}
    for k, old in enumerate(order, start=1):
        new_of[old] = k
    labels = (0,) + tuple(order)
    r = (0.0,) + tuple(revenues[old - 1] for old in order)
    past = [frozenset(new_of[i] for i in S) for S in past]
    sales = [{new_of[i]: v for i, v in s.items()} for s in sales]
    sales = [{i: s[i] for i in sorted(s)} for s in sales]

    past, sales = _dedupe(past, sales)
    return Instance(
        n=n,
        revenues=r,
        past_assortments=tuple(past),
        sales=tuple(sales),
        eta=eta,
        norm=norm,
        labels=labels,
    )


def _dedupe(past, sales):
    keep_p, keep_s = [], []
    for S, s in zip(past, sales):
        dup = any(S == T and s == t for T, t in zip(keep_p, keep_s))
        if dup:
            warnings.warn(f"dropping repeated assortment {fmt_assortment(S)} with identical sales")
            continue
        keep_p.append(S)
        keep_s.append(s)
    return keep_p, keep_s


def make_instance(revenues, past_assortments, sales, eta=0.0, norm=DEFAULT_NORM) -> Instance:
    """Convenience constructor.

    revenues lists r_1..r_n; sales is a list (one per assortment) of
    {product: frequency} dicts or of sequences aligned with sorted(S_m).
    """
    freq = []
    for S, s in zip(past_assortments, sales):
        if isinstance(s, dict):
            freq.append({str(i): float(v) for i, v in s.items()})
        else:
            items = sorted(set(S) | {0})
            if len(items) != len(s):
                raise InvalidInstance("sales vector length does not match assortment")
            freq.append({str(i): float(v) for i, v in zip(items, s)})
    raw = {
        "n": len(revenues),
        "revenues": list(revenues),
        "past_assortments": [sorted(S) for S in past_assortments],
        "sales": [{"assortment": m, "freq": f} for m, f in enumerate(freq)],
        "eta": eta,
        "norm": norm,
    }
    return validate_instance(raw)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return validate_instance(json.load(fh))


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2)


def restrict_to_offered(inst: Instance) -> Instance:
    """Drop products that were never offered, relabeling the rest."""
    keep = sorted(inst.offered())
    if len(keep) == inst.n + 1:
        return inst
    new_of = {old: k for k, old in enumerate(keep)}
    return Instance(
        n=len(keep) - 1,
        revenues=tuple(inst.revenues[i] for i in keep),
        past_assortments=tuple(frozenset(new_of[i] for i in S) for S in inst.past_assortments),
        sales=tuple({new_of[i]: v for i, v in s.items()} for s in inst.sales),
        eta=inst.eta,
        norm=inst.norm,
        labels=tuple(inst.labels[i] for i in keep) if inst.labels else tuple(keep),
    )


def past_revenue(inst: Instance, m: int) -> float:
    """Revenue r.v_m of past assortment m (1-based)."""
    if not 1 <= m <= inst.M:
        raise IndexOutOfRange(f"assortment index {m} outside 1..{inst.M}")
    s = inst.sales[m - 1]
    return float(sum(inst.revenues[i] * v for i, v in s.items()))


def best_past_revenue(inst: Instance) -> float:
    return max(past_revenue(inst, m) for m in range(1, inst.M + 1))


class Structure(Enum):
    REVENUE_ORDERED_COMPLETE = "RevenueOrderedComplete"
    NESTED = "Nested"
    TWO_ASSORTMENTS = "TwoAssortments"
    GENERAL = "General"


@dataclass(frozen=True)
class StructureTag:
    kind: Structure
    is_nested: bool
    is_two: bool
    covers_all_products: bool
    chain_order: Optional[Tuple[int, ...]] = None  # 0-based order making a strict chain


def nested_order(past: Sequence[Assortment]) -> Optional[Tuple[int, ...]]:
    order = sorted(range(len(past)), key=lambda m: (len(past[m]), m))
    for a, b in zip(order, order[1:]):
        if not (past[a] < past[b]):
            return None
    return tuple(order)


def classify_structure(inst: Instance) -> StructureTag:
    past = inst.past_assortments
    order = nested_order(past)
    covers = len(inst.offered()) == inst.n + 1
    revordered = {frozenset({0} | set(range(m, inst.n + 1))) for m in range(1, inst.n + 1)}
    if inst.M == inst.n and set(past) == revordered:
        kind = Structure.REVENUE_ORDERED_COMPLETE
    elif order is not None:
        kind = Structure.NESTED
    elif inst.M == 2:
        kind = Structure.TWO_ASSORTMENTS
    else:
        kind = Structure.GENERAL
    return StructureTag(kind, order is not None, inst.M == 2, covers, order)


def canonical_nested(inst: Instance) -> Instance:
    """Reorder past assortments into their strict chain order."""
    order = nested_order(inst.past_assortments)
    if order is None:
        from .errors import NotNested

        raise NotNested("past assortments do not form a strict chain")
    if order == tuple(range(inst.M)):
        return inst
    return inst.replace(
        past_assortments=tuple(inst.past_assortments[m] for m in order),
        sales=tuple(inst.sales[m] for m in order),
    )


def four_product_example() -> Instance:
    """The four-product two-assortment example used throughout the docs and tests."""
    return make_instance(
        revenues=[10, 20, 30, 100],
        past_assortments=[[0, 2, 3, 4], [0, 1, 2, 4]],
        sales=[[0.3, 0.3, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3]],
    )
