"""Monte Carlo estimation of average latency, with paired seeds across gamma."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .kernels import uc_batch
from .latency import hs_downlink, hs_profile
from .model import ConfigError, InfeasibleError, SystemConfig, sample_batch
from .optimizer import optimize_gammas
from .placement import HybridParams, Schedule, cyclic_schedule, validate_hybrid

Z95 = 1.959963984540054
_CHUNK = 1 << 15


@dataclass(frozen=True)
class SchemeSpec:
    """Scheme selector. For ``"hs"`` with ``params=None`` the sweep
    re-optimizes the hybrid parameters at every gamma."""

    kind: str
    params: HybridParams | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("uc", "mc", "hs"):
            raise ValueError(f"unknown scheme {self.kind!r}")

    def describe(self, config: SystemConfig) -> tuple[str, str, str]:
        """(q, rho1, rho2) as CSV strings."""
        if self.kind == "uc":
            return "", "1", ""
        if self.kind == "mc":
            rho1 = Fraction(config.K * config.rows_per_en, config.m)
            return str(config.min_finishers), _dec(rho1), "1"
        if self.params is None:
            return "", "", ""
        p = self.params
        return str(p.q), _dec(Fraction(p.mprime, config.m)), str(p.rho2)


def _dec(x: Fraction) -> str:
    return f"{float(x):.6g}"


@dataclass(frozen=True)
class TrialReport:
    trials: int
    mean_delta_C: float
    mean_delta_D: float
    mean_delta: float
    ci95_delta: float
    base_seed: int
    gamma: float


def trial_delays(
    config: SystemConfig,
    scheme: SchemeSpec,
    trials: int,
    base_seed: int,
    schedule: Schedule | None = None,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial (delta_C, delta_D); both independent of gamma.

    Trial ``t`` uses the straggler draw ``sample_stragglers(config,
    base_seed, t)``, so every scheme sees the same setup times.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if scheme.kind == "hs":
        if scheme.params is None:
            raise ValueError("hybrid scheme needs concrete params here")
        problems = validate_hybrid(config, scheme.params)
        if problems:
            raise ConfigError(problems)
    dcs, dds = [], []
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        lam = sample_batch(config, base_seed, n, start=start)
        dc, dd = _chunk(config, scheme, lam, schedule, backend)
        if scheme.kind == "uc" and not np.all(np.isfinite(dc)):
            bad = start + int(np.flatnonzero(~np.isfinite(dc))[0])
            raise InfeasibleError(
                f"uncoded schedule never covers all rows (seed={base_seed}, trial={bad})"
            )
        dcs.append(dc)
        dds.append(dd)
    return np.concatenate(dcs), np.concatenate(dds)


def _chunk(config, scheme, lam, schedule, backend):
    n = len(lam)
    if scheme.kind == "uc":
        sched = schedule if schedule is not None else cyclic_schedule(config)
        tc, _, dd, _ = uc_batch(lam, sched.as_array(), config.m, config.tau, config.N, backend)
        return tc / config.tau, dd
    if scheme.kind == "mc":
        q, rows, dd = config.min_finishers, config.rows_per_en, float(config.m)
    else:
        p = scheme.params
        q, rows = p.q, p.rows_per_en(config.K)
        dd = hs_downlink(config, hs_profile(config, p))
    lam_q = np.partition(lam, q - 1, axis=1)[:, q - 1]
    return (lam_q + config.tau * rows) / config.tau, np.full(n, dd)


def summarize(dc: np.ndarray, dd: np.ndarray, gamma: float, base_seed: int) -> TrialReport:
    trials = len(dc)
    mean_c = float(np.mean(dc))
    mean_d = float(np.mean(dd))
    if trials > 1:
        sd = float(np.std(dc + gamma * dd, ddof=1))
        ci = Z95 * sd / math.sqrt(trials)
    else:
        ci = math.inf
    return TrialReport(
        trials=trials,
        mean_delta_C=mean_c,
        mean_delta_D=mean_d,
        mean_delta=mean_c + gamma * mean_d,
        ci95_delta=ci,
        base_seed=base_seed,
        gamma=gamma,
    )


def run_trials(
    config: SystemConfig,
    scheme: SchemeSpec,
    trials: int,
    base_seed: int,
    schedule: Schedule | None = None,
    backend: str | None = None,
) -> TrialReport:
    dc, dd = trial_delays(config, scheme, trials, base_seed, schedule, backend)
    return summarize(dc, dd, config.gamma, base_seed)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    scheme: str
    q: str
    rho1: str
    rho2: str
    report: TrialReport | None
    closed_delta_C: float | None = None
    closed_delta_D: float | None = None

    @property
    def mean_delta(self) -> float:
        if self.report is not None:
            return self.report.mean_delta
        return self.closed_delta_C + self.gamma * self.closed_delta_D

    @property
    def ci95(self) -> float:
        return self.report.ci95_delta if self.report is not None else 0.0


def sweep_gamma(
    config: SystemConfig,
    schemes,
    gamma_grid,
    trials: int,
    base_seed: int,
    backend: str | None = None,
) -> list[SweepRow]:
    """One simulated row per (gamma, scheme).

    Per-trial delays are computed once per scheme (or once per distinct
    hybrid optimum) and recombined at every gamma.
    """
    gammas = [float(g) for g in gamma_grid]
    if not gammas:
        raise ValueError("gamma grid is empty")
    cache: dict = {}

    def delays(spec: SchemeSpec):
        if spec not in cache:
            cache[spec] = trial_delays(config, spec, trials, base_seed, backend=backend)
        return cache[spec]

    hs_opts = None
    rows = []
    for gamma in gammas:
        for spec in schemes:
            if spec.kind == "hs" and spec.params is None:
                if hs_opts is None:
                    hs_opts = dict(zip(gammas, optimize_gammas(config, gammas)))
                opt = hs_opts[gamma]
                if not opt.found:
                    continue
                spec_g = SchemeSpec("hs", opt.params)
            else:
                spec_g = spec
            dc, dd = delays(spec_g)
            q, rho1, rho2 = spec_g.describe(config)
            rows.append(
                SweepRow(gamma, spec.kind, q, rho1, rho2, summarize(dc, dd, gamma, base_seed))
            )
    return rows
