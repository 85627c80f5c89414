"""Per-sample and closed-form latency of the UC, MC and HS schemes.

All delays are normalized: compute time by tau, downlink time by the
interference-free time to deliver one IV to every user.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .model import (
    ConfigError,
    InfeasibleError,
    StragglerSample,
    SystemConfig,
    completed_by,
    expected_order_stat,
)
from .placement import HybridParams, Schedule, validate_hybrid


@dataclass(frozen=True)
class RedundancyProfile:
    """Redundancy level r -> number of distinct IVs computed at exactly r ENs."""

    counts: dict[int, int]

    @property
    def distinct(self) -> int:
        return sum(self.counts.values())

    @property
    def total(self) -> int:
        return sum(r * c for r, c in self.counts.items())

    @classmethod
    def from_multiplicities(cls, r: np.ndarray) -> "RedundancyProfile":
        levels, counts = np.unique(np.asarray(r)[np.asarray(r) > 0], return_counts=True)
        return cls({int(a): int(b) for a, b in zip(levels, counts)})


@dataclass(frozen=True)
class LatencyBreakdown:
    delta_C: float
    delta_D: float
    gamma: float
    delta: float = field(init=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", self.delta_C + self.gamma * self.delta_D)

    def at_gamma(self, gamma: float) -> "LatencyBreakdown":
        return LatencyBreakdown(self.delta_C, self.delta_D, gamma, meta=self.meta)

    def csv_row(self, scheme: str, params: str = "", seed: int | str = "") -> dict:
        return {
            "scheme": scheme,
            "params": params,
            "seed": seed,
            "delta_C": repr(float(self.delta_C)),
            "delta_D": repr(float(self.delta_D)),
            "delta": repr(float(self.delta)),
        }


def zf_slot_cost(r: int, N: int) -> float:
    """Normalized downlink time of one IV held by r cooperating ENs."""
    if r < 1:
        raise ValueError(f"IV redundancy must be >= 1, got {r}")
    return 1.0 / min(r, N)


# ---------------------------------------------------------------- uncoded


def _computed_rows(schedule: Schedule, stop: np.ndarray) -> np.ndarray:
    r = np.zeros(schedule.n_rows, dtype=np.int64)
    for lst, mk in zip(schedule.rows, stop):
        for row in lst[: int(mk)]:
            r[row] += 1
    return r


def covers(schedule: Schedule, stop) -> bool:
    """Whether the schedule prefixes of lengths ``stop`` cover every row."""
    return bool(np.all(_computed_rows(schedule, np.asarray(stop)) > 0))


def _stop_vector(config: SystemConfig, lambdas, t: float) -> np.ndarray:
    return np.array([completed_by(t, lam, config) for lam in lambdas], dtype=np.int64)


def uc_stop(config: SystemConfig, schedule: Schedule, sample: StragglerSample):
    """Earliest event time at which the computed rows cover all of [m].

    Returns ``(T_C, m_vec)`` where ``m_vec`` is the realized computation
    vector at ``T_C``. Coverage is monotone in t, so the first covering
    event time is found by bisection over the sorted event grid.
    """
    lam = np.asarray(sample.lambdas, dtype=float)
    per_en = [len(lst) for lst in schedule.rows]
    events = sorted(
        {float(lam[k] + j * config.tau) for k in range(config.K) for j in range(1, per_en[k] + 1)}
    )
    if not events or not covers(schedule, _stop_vector(config, lam, events[-1])):
        raise InfeasibleError("schedule does not cover all rows even when every EN finishes")
    lo, hi = 0, len(events) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if covers(schedule, _stop_vector(config, lam, events[mid])):
            hi = mid
        else:
            lo = mid + 1
    t_c = events[lo]
    return t_c, _stop_vector(config, lam, t_c)


def uc_redundancy(config: SystemConfig, schedule: Schedule, stop_vector) -> RedundancyProfile:
    r = _computed_rows(schedule, np.asarray(stop_vector))
    return RedundancyProfile.from_multiplicities(r)


def uc_row_redundancy(schedule: Schedule, stop_vector) -> np.ndarray:
    """Per-row redundancy r_i for the given stop vector."""
    return _computed_rows(schedule, np.asarray(stop_vector))


def uc_downlink(config: SystemConfig, r: np.ndarray) -> float:
    levels = np.bincount(np.asarray(r, dtype=np.int64))
    if len(levels) and levels[0]:
        raise InfeasibleError(f"{levels[0]} rows were never computed")
    acc = 0.0
    for level in range(1, len(levels)):
        acc += levels[level] / min(level, config.N)
    return float(acc)


def uc_latency(config: SystemConfig, schedule: Schedule, sample: StragglerSample) -> LatencyBreakdown:
    t_c, stop = uc_stop(config, schedule, sample)
    r = uc_row_redundancy(schedule, stop)
    return LatencyBreakdown(t_c / config.tau, uc_downlink(config, r), config.gamma)


# ---------------------------------------------------------------- MDS


def mc_latency_sample(config: SystemConfig, sample: StragglerSample) -> LatencyBreakdown:
    q = config.min_finishers
    lam_q = float(np.partition(np.asarray(sample.lambdas, dtype=float), q - 1)[q - 1])
    t_c = lam_q + config.tau * config.rows_per_en
    return LatencyBreakdown(t_c / config.tau, float(config.m), config.gamma)


def mc_latency_closed(config: SystemConfig) -> LatencyBreakdown:
    q = config.min_finishers
    dc = expected_order_stat(config.K, q, config.eta) / config.tau + config.rows_per_en
    return LatencyBreakdown(dc, float(config.m), config.gamma)


# ---------------------------------------------------------------- hybrid


def hs_profile(config: SystemConfig, params: HybridParams) -> RedundancyProfile:
    K, q, rho2 = config.K, params.q, params.rho2
    b = params.b(K)
    r_min = max(rho2 - (K - q), 1)
    r_max = min(q, rho2)
    counts = {}
    for r in range(r_max, r_min - 1, -1):
        n = comb(q, r) * comb(K - q, rho2 - r) * b
        if n:
            counts[r] = n
    return RedundancyProfile(counts)


def hs_downlink_detail(config: SystemConfig, profile: RedundancyProfile) -> tuple[float, int]:
    """Downlink delay and the cut level r_q for descending-redundancy delivery."""
    m, N = config.m, config.N
    if profile.distinct < m:
        raise InfeasibleError(
            f"profile holds {profile.distinct} distinct IVs, fewer than m={m}"
        )
    levels = sorted(profile.counts, reverse=True)
    # r_q: smallest level whose tail (levels >= r_q) still fits within m
    r_q = levels[0] + 1
    tail = 0
    for r in levels:
        if tail + profile.counts[r] > m:
            break
        tail += profile.counts[r]
        r_q = r
    acc = 0.0
    for r in levels:
        if r >= r_q:
            acc += profile.counts[r] / min(r, N)
    remainder = m - tail
    if remainder:
        # hybrid profiles are contiguous in r, so this level is r_q - 1
        below = max(r for r in levels if r < r_q)
        acc += remainder / min(below, N)
    return acc, r_q


def hs_downlink(config: SystemConfig, profile: RedundancyProfile) -> float:
    return hs_downlink_detail(config, profile)[0]


def _check(config: SystemConfig, params: HybridParams) -> None:
    problems = validate_hybrid(config, params)
    if problems:
        raise ConfigError(problems)


def hs_latency_sample(
    config: SystemConfig, params: HybridParams, sample: StragglerSample
) -> LatencyBreakdown:
    _check(config, params)
    q = params.q
    lam_q = float(np.partition(np.asarray(sample.lambdas, dtype=float), q - 1)[q - 1])
    t_c = lam_q + config.tau * params.rows_per_en(config.K)
    dd = hs_downlink(config, hs_profile(config, params))
    return LatencyBreakdown(t_c / config.tau, dd, config.gamma)


def hs_latency_closed(config: SystemConfig, params: HybridParams) -> LatencyBreakdown:
    """Expected hybrid latency for fixed (q, mprime, rho2).

    The compute term uses the rows each EN actually stores,
    rho1*rho2*m/K; ``meta["delta_C_full_storage"]`` gives the variant that
    charges the full m*mu rows.
    """
    _check(config, params)
    order = expected_order_stat(config.K, params.q, config.eta) / config.tau
    stored = params.rows_per_en(config.K)
    dd, r_q = hs_downlink_detail(config, hs_profile(config, params))
    meta = {
        "stored_rows": stored,
        "delta_C_full_storage": order + config.rows_per_en,
        "r_q": r_q,
        "b": params.b(config.K),
    }
    return LatencyBreakdown(order + stored, dd, config.gamma, meta=meta)
