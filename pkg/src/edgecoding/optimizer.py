"""Exhaustive search over hybrid parameters (q, rho1, rho2)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import comb

from .latency import LatencyBreakdown, hs_latency_closed
from .model import SystemConfig
from .placement import HybridParams, validate_hybrid

TABLE_COLUMNS = (
    "q", "rho1", "rho2", "mprime", "b", "r_min", "r_max", "r_q",
    "delta_C", "delta_D", "delta", "on_coarse_grid",
)


@dataclass(frozen=True)
class Candidate:
    params: HybridParams
    latency: LatencyBreakdown
    on_coarse_grid: bool

    def row(self, config: SystemConfig) -> dict:
        p = self.params
        rho1 = p.mprime / config.m
        return {
            "q": p.q,
            "rho1": f"{rho1:.6g}",
            "rho2": p.rho2,
            "mprime": p.mprime,
            "b": self.latency.meta["b"],
            "r_min": max(p.rho2 - (config.K - p.q), 1),
            "r_max": min(p.q, p.rho2),
            "r_q": self.latency.meta["r_q"],
            "delta_C": repr(self.latency.delta_C),
            "delta_D": repr(self.latency.delta_D),
            "delta": repr(self.latency.delta),
            "on_coarse_grid": int(self.on_coarse_grid),
        }


@dataclass(frozen=True)
class Optimum:
    params: HybridParams | None
    latency: LatencyBreakdown | None
    table: tuple[Candidate, ...]

    @property
    def found(self) -> bool:
        return self.params is not None


def on_coarse_grid(config: SystemConfig, params: HybridParams) -> bool:
    """rho1 lies on the coarse grid {1, (q+1)/q, ..., K/q}."""
    j, rem = divmod(params.mprime * params.q, config.m)
    return rem == 0 and params.q <= j <= config.K


def enumerate_candidates(config: SystemConfig) -> list[HybridParams]:
    """Every valid (q, mprime, rho2), ordered by q, then rho2, then mprime."""
    K, m, rows = config.K, config.m, config.rows_per_en
    out = []
    for q in range(config.min_finishers, K + 1):
        rho2_lo = max(1, (q * rows) // m)
        rho2_hi = (K * rows) // m
        for rho2 in range(rho2_lo, rho2_hi + 1):
            step = comb(K, rho2)
            start = -(-m // step) * step
            for mprime in range(start, K * rows // rho2 + 1, step):
                params = HybridParams(q=q, mprime=mprime, rho2=rho2)
                if not validate_hybrid(config, params):
                    out.append(params)
    return out


def evaluate_candidates(config: SystemConfig) -> tuple[Candidate, ...]:
    return tuple(
        Candidate(p, hs_latency_closed(config, p), on_coarse_grid(config, p))
        for p in enumerate_candidates(config)
    )


def _argmin(table, gamma: float):
    best = None
    best_delta = None
    for cand in table:
        lat = cand.latency.at_gamma(gamma)
        # strict < keeps the first minimum, i.e. smallest (q, rho2, mprime)
        if best is None or lat.delta < best_delta:
            best, best_delta = (cand, lat), lat.delta
    return best


def optimize(config: SystemConfig, table: tuple[Candidate, ...] | None = None) -> Optimum:
    if table is None:
        table = evaluate_candidates(config)
    best = _argmin(table, config.gamma)
    if best is None:
        return Optimum(None, None, table)
    cand, lat = best
    return Optimum(cand.params, lat, table)


def optimize_gammas(config: SystemConfig, gammas) -> list[Optimum]:
    """Optimum for each gamma, evaluating the candidate table only once."""
    table = evaluate_candidates(config)
    return [optimize(config.replace(gamma=float(g)), table) for g in gammas]


def candidate_table_csv(config: SystemConfig, table) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for cand in table:
        writer.writerow(cand.row(config))
    return buf.getvalue()
