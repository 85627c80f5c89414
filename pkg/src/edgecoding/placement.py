"""Storage placement and per-EN computing order for the UC, MC and HS schemes.

Row identifiers are 0-based internally; JSON export uses 1-based indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .model import ConfigError, SystemConfig


@dataclass(frozen=True)
class Schedule:
    """Per-EN ordered row lists.

    ``kind`` is ``"uncoded"`` when entries index model rows w_i and
    ``"coded"`` when they index coded rows c_i.
    """

    rows: tuple[tuple[int, ...], ...]
    kind: str
    n_rows: int

    @property
    def K(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        """(K, L) int array; requires equal list lengths."""
        return np.array(self.rows, dtype=np.int64).reshape(self.K, -1)

    def multiplicity(self) -> np.ndarray:
        counts = np.zeros(self.n_rows, dtype=np.int64)
        for lst in self.rows:
            for r in lst:
                counts[r] += 1
        return counts

    def to_json(self) -> str:
        return json.dumps([[r + 1 for r in lst] for lst in self.rows])

    @classmethod
    def from_json(cls, text: str, kind: str = "uncoded", n_rows: int | None = None) -> "Schedule":
        data = json.loads(text)
        rows = tuple(tuple(int(r) - 1 for r in lst) for lst in data)
        if n_rows is None:
            n_rows = 1 + max((r for lst in rows for r in lst), default=-1)
        return cls(rows=rows, kind=kind, n_rows=n_rows)


@dataclass(frozen=True)
class HybridParams:
    q: int
    mprime: int
    rho2: int

    def rho1(self, m: int) -> Fraction:
        return Fraction(self.mprime, m)

    def b(self, K: int) -> int:
        groups = comb(K, self.rho2)
        if groups == 0 or self.mprime % groups:
            raise ConfigError(
                f"mprime={self.mprime} is not divisible by C({K},{self.rho2})={groups}"
            )
        return self.mprime // groups

    def rows_per_en(self, K: int) -> int:
        """Coded rows stored at each EN, b*C(K-1, rho2-1) = rho1*rho2*m/K."""
        return self.b(K) * comb(K - 1, self.rho2 - 1)


def _group_shift_order(m: int, K: int, per_en: int) -> list[list[int]]:
    # Rows split into m/K groups of K consecutive rows. EN k walks a base
    # list of (group, offset) pairs and takes row group*K + (offset+k) % K.
    # The base list sweeps the groups forward for offset 0, backward for
    # offset 1, forward again, and so on.
    n_groups = m // K
    base = []
    offset = 0
    while len(base) < per_en:
        groups = range(n_groups) if offset % 2 == 0 else range(n_groups - 1, -1, -1)
        for g in groups:
            if len(base) == per_en:
                break
            base.append((g, offset))
        offset += 1
    return [[g * K + (e + k) % K for g, e in base] for k in range(K)]


def _greedy_order(m: int, K: int, per_en: int) -> list[list[int]]:
    # Position-major fill; each slot takes the least-used row not yet held
    # by that EN, scanning cyclically from just after the previous pick.
    used = [0] * m
    held = [set() for _ in range(K)]
    lists = [[] for _ in range(K)]
    cursor = 0
    for _ in range(per_en):
        for k in range(K):
            best = None
            for step in range(m):
                r = (cursor + step) % m
                if r in held[k]:
                    continue
                if best is None or used[r] < used[best]:
                    best = r
            lists[k].append(best)
            held[k].add(best)
            used[best] += 1
            cursor = (best + 1) % m
    return lists


def cyclic_schedule(config: SystemConfig) -> Schedule:
    """Uncoded cyclic storage and computing order.

    The first m/K positions of every EN walk the rows in global cyclic order
    (EN k starts at row k), so all rows are covered once before any row is
    repeated; further positions repeat rows with the per-group shift. Every
    row ends up stored floor(K*mu) or ceil(K*mu) times.
    """
    m, K, per_en = config.m, config.K, config.rows_per_en
    if m % K == 0:
        lists = _group_shift_order(m, K, per_en)
    else:
        lists = _greedy_order(m, K, per_en)
    return Schedule(rows=tuple(tuple(lst) for lst in lists), kind="uncoded", n_rows=m)


def mds_placement(config: SystemConfig) -> Schedule:
    per_en = config.rows_per_en
    rows = tuple(tuple(range(k * per_en, (k + 1) * per_en)) for k in range(config.K))
    return Schedule(rows=rows, kind="coded", n_rows=config.K * per_en)


def hybrid_groups(K: int, params: HybridParams) -> list[tuple[tuple[int, ...], list[int]]]:
    """(EN subset, coded rows) pairs in lexicographic subset order."""
    b = params.b(K)
    out = []
    for idx, subset in enumerate(combinations(range(K), params.rho2)):
        out.append((subset, list(range(idx * b, (idx + 1) * b))))
    return out


def hybrid_placement(config: SystemConfig, params: HybridParams) -> Schedule:
    report = validate_hybrid(config, params)
    if report:
        raise ConfigError(report)
    lists = [[] for _ in range(config.K)]
    for subset, rows in hybrid_groups(config.K, params):
        for k in subset:
            lists[k].extend(rows)
    return Schedule(rows=tuple(tuple(lst) for lst in lists), kind="coded", n_rows=params.mprime)


def validate_hybrid(config: SystemConfig, params: HybridParams) -> list[str]:
    """Return all violated hybrid conditions; an empty list means valid.

    Checks are done in integer arithmetic:
    storage ``rho1*rho2 <= K*mu``  <=>  ``mprime*rho2 <= K*m*mu``;
    recovery ``C(K,rho2) - C(K-q,rho2) >= C(K,rho2)/rho1``  <=>
    ``(C(K,rho2) - C(K-q,rho2)) * mprime >= C(K,rho2) * m``.
    """
    K, m = config.K, config.m
    q, mprime, rho2 = params.q, params.mprime, params.rho2
    violations = []
    lo = config.min_finishers
    if not lo <= q <= K:
        violations.append(f"q range: q={q} not in [{lo}, {K}]")
    if not 1 <= rho2 <= K:
        violations.append(f"rho2 range: rho2={rho2} not in [1, {K}]")
        return violations
    if mprime < m:
        violations.append(f"rho1 >= 1: mprime={mprime} < m={m}")
    if mprime * rho2 > K * config.rows_per_en:
        violations.append(
            f"storage: rho1*rho2 = {Fraction(mprime * rho2, m)} > K*mu = "
            f"{Fraction(K * config.rows_per_en, m)}"
        )
    total = comb(K, rho2)
    if 1 <= q <= K and (total - comb(K - q, rho2)) * mprime < total * m:
        violations.append(
            f"recovery: C({K},{rho2})-C({K - q},{rho2}) = "
            f"{total - comb(K - q, rho2)} < C({K},{rho2})/rho1 = {Fraction(total * m, mprime)}"
        )
    if mprime % total:
        violations.append(f"divisibility: mprime={mprime} not divisible by C({K},{rho2})={total}")
    return violations
