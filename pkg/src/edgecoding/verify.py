"""Decodability checks tying the latency models to the GF(2^L) oracle.

For every simulated straggler draw we rebuild the set of coded rows that
has actually been computed at the stopping time and ask the oracle whether
it pins down W X.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .gf import CodingMatrix, decode_outputs, encode_model, feasible, field as gf_field
from .gf import identity_code, mds_generator
from .latency import uc_stop
from .model import SystemConfig, completed_by, sample_stragglers
from .optimizer import enumerate_candidates
from .placement import HybridParams, Schedule, cyclic_schedule, hybrid_placement, mds_placement

MAX_K = 8
MAX_M = 24


@dataclass
class CheckResult:
    scheme: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total

    def record(self, good: bool, detail: dict) -> None:
        self.total += 1
        if good:
            self.passed += 1
        else:
            self.failures.append(detail)


def computed_rows(schedule: Schedule, stop) -> list[int]:
    out = set()
    for lst, mk in zip(schedule.rows, stop):
        out.update(lst[: int(mk)])
    return sorted(out)


def realized_stop(config: SystemConfig, lambdas, t: float) -> list[int]:
    return [completed_by(t, lam, config) for lam in lambdas]


def finisher_stop(schedule: Schedule, lambdas, q: int) -> list[int]:
    """Stop vector where only the q fastest ENs count, each fully done."""
    fastest = np.argsort(np.asarray(lambdas), kind="stable")[:q]
    stop = [0] * schedule.K
    for k in fastest:
        stop[int(k)] = len(schedule.rows[int(k)])
    return stop


def round_trip(code: CodingMatrix, rows: list[int], rng: np.random.Generator, r: int = 3, N: int = 2) -> bool:
    """Encode a random model, compute the selected IVs, decode, compare."""
    gf = code.gf
    W = gf.random((code.m, r), rng)
    X = gf.random((r, N), rng)
    coded = encode_model(code, W)
    ivs = gf.matmul(coded[rows], X)
    Y = decode_outputs(dict(zip(rows, ivs)), code)
    return bool(np.array_equal(Y, gf.matmul(W, X)))


def check_uc(config: SystemConfig, samples: int, seed: int, schedule: Schedule | None = None) -> CheckResult:
    """Feasible at T_C and infeasible at the event time just before it.

    A schedule that never covers all rows fails every sample.
    """
    schedule = schedule or cyclic_schedule(config)
    code = identity_code(config.m, config.L)
    res = CheckResult("uc")
    rng = np.random.default_rng([seed, 1])
    for t in range(samples):
        sample = sample_stragglers(config, seed, t)
        lam = sample.lambdas
        detail = {"seed": seed, "trial": t}
        try:
            t_c, stop = uc_stop(config, schedule, sample)
        except RuntimeError as exc:
            full = [len(lst) for lst in schedule.rows]
            detail.update(reason=str(exc), rows=computed_rows(schedule, full))
            res.record(False, detail)
            continue
        rows = computed_rows(schedule, stop)
        events = sorted(
            {float(lam[k] + j * config.tau) for k in range(config.K)
             for j in range(1, len(schedule.rows[k]) + 1)}
        )
        earlier = [e for e in events if e < t_c]
        minimal = True
        if earlier:
            before = computed_rows(schedule, realized_stop(config, lam, earlier[-1]))
            minimal = not feasible(before, code)
        good = feasible(rows, code) and minimal and round_trip(code, rows, rng)
        detail.update(rows=rows)
        res.record(good, detail)
    return res


def _coded_check(name, config, schedule, code, q, samples, seed) -> CheckResult:
    res = CheckResult(name)
    rng = np.random.default_rng([seed, 2])
    for t in range(samples):
        lam = sample_stragglers(config, seed, t).lambdas
        stop = finisher_stop(schedule, lam, q)
        rows = computed_rows(schedule, stop)
        good = feasible(rows, code) and round_trip(code, rows, rng)
        res.record(good, {"seed": seed, "trial": t, "rows": rows})
    return res


def check_mc(config: SystemConfig, samples: int, seed: int) -> CheckResult:
    schedule = mds_placement(config)
    code = mds_generator(schedule.n_rows, config.m, config.L)
    return _coded_check("mc", config, schedule, code, config.min_finishers, samples, seed)


def check_hs(config: SystemConfig, params: HybridParams, samples: int, seed: int) -> CheckResult:
    schedule = hybrid_placement(config, params)
    code = mds_generator(params.mprime, config.m, config.L)
    return _coded_check("hs", config, schedule, code, params.q, samples, seed)


def check_all_subsets(config: SystemConfig, schedule: Schedule, code: CodingMatrix, q: int, name: str) -> CheckResult:
    """Every choice of q finishing ENs must be decodable."""
    res = CheckResult(name)
    for subset in combinations(range(config.K), q):
        stop = [len(schedule.rows[k]) if k in subset else 0 for k in range(config.K)]
        rows = computed_rows(schedule, stop)
        res.record(feasible(rows, code), {"finishers": subset, "rows": rows})
    return res


def check_hs_candidates(config: SystemConfig) -> list[tuple[HybridParams, CheckResult]]:
    out = []
    for params in enumerate_candidates(config):
        schedule = hybrid_placement(config, params)
        code = mds_generator(params.mprime, config.m, config.L)
        out.append((params, check_all_subsets(config, schedule, code, params.q, "hs")))
    return out


def check_size(config: SystemConfig) -> list[str]:
    problems = []
    if config.K > MAX_K:
        problems.append(f"verify needs K <= {MAX_K}, got {config.K}")
    if config.m > MAX_M:
        problems.append(f"verify needs m <= {MAX_M}, got {config.m}")
    if config.K * config.rows_per_en > gf_field(config.L).order:
        problems.append(
            f"MDS code needs K*m*mu = {config.K * config.rows_per_en} <= 2^L = {gf_field(config.L).order}"
        )
    return problems
