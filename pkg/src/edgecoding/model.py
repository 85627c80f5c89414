"""System configuration, straggler timing model and order-statistic helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration violates a structural constraint.

    ``problems`` lists every violation found, not only the first one.
    """

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InfeasibleError(RuntimeError):
    """A schedule or profile cannot deliver all m outputs."""


_INT_TOL = 1e-9


@dataclass(frozen=True)
class SystemConfig:
    K: int = 6
    N: int = 6
    m: int = 60
    mu: float = 0.5
    tau: float = 0.005
    eta: float = 0.8
    gamma: float = 0.0
    L: int = 8

    def __post_init__(self) -> None:
        problems = config_problems(self)
        if problems:
            raise ConfigError(problems)

    @property
    def rows_per_en(self) -> int:
        """Rows stored at each EN, m*mu (validated integral)."""
        return int(round(self.m * self.mu))

    @property
    def min_finishers(self) -> int:
        """ceil(1/mu), computed from integers to dodge float noise."""
        return -(-self.m // self.rows_per_en)

    def replace(self, **changes) -> "SystemConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemConfig(**values)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def config_problems(cfg: SystemConfig) -> list[str]:
    """Collect every invariant violation of ``cfg`` (empty when valid)."""
    problems = []
    for name in ("K", "N", "m", "L"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            problems.append(f"{name} must be an integer, got {value!r}")
    for name in ("mu", "tau", "eta", "gamma"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            problems.append(f"{name} must be a number, got {value!r}")
    if problems:
        return problems

    if cfg.K < 1:
        problems.append(f"K must be >= 1, got {cfg.K}")
    if cfg.N < 1:
        problems.append(f"N must be >= 1, got {cfg.N}")
    if cfg.m < 1:
        problems.append(f"m must be >= 1, got {cfg.m}")
    if not cfg.tau > 0:
        problems.append(f"tau must be > 0, got {cfg.tau}")
    if not cfg.eta > 0:
        problems.append(f"eta must be > 0, got {cfg.eta}")
    if not cfg.gamma >= 0:
        problems.append(f"gamma must be >= 0, got {cfg.gamma}")
    if cfg.L not in (4, 8, 16):
        problems.append(f"L must be one of 4, 8, 16, got {cfg.L}")
    if cfg.K >= 1 and not (1.0 / cfg.K - _INT_TOL <= cfg.mu <= 1.0 + _INT_TOL):
        problems.append(f"mu must lie in [1/K, 1] = [{1.0 / cfg.K:g}, 1], got {cfg.mu}")
    if cfg.m >= 1:
        rows = cfg.m * cfg.mu
        if abs(rows - round(rows)) > _INT_TOL * max(1, cfg.m):
            problems.append(f"m*mu must be an integer, got {cfg.m}*{cfg.mu} = {rows:g}")
        elif round(rows) < 1:
            problems.append("m*mu must be >= 1")
    return problems


@dataclass(frozen=True)
class StragglerSample:
    lambdas: np.ndarray
    seed: int
    trial: int = 0


def _stream(seed: int, offset: int = 0) -> np.random.Generator:
    bitgen = np.random.PCG64(seed)
    if offset:
        bitgen.advance(offset)
    return np.random.Generator(bitgen)


def sample_stragglers(config: SystemConfig, seed: int, trial: int = 0) -> StragglerSample:
    """Draw K exponential(eta) setup times for one trial.

    Trial ``t`` of base seed ``s`` is row ``t`` of :func:`sample_batch`
    with the same seed: inverse-CDF draws consume exactly one 64-bit word
    each, so the stream is advanced by ``t*K`` words.
    """
    rng = _stream(seed, trial * config.K)
    lam = rng.standard_exponential(config.K, method="inv") / config.eta
    return StragglerSample(lambdas=lam, seed=seed, trial=trial)


def sample_batch(config: SystemConfig, seed: int, trials: int, start: int = 0) -> np.ndarray:
    """Setup times for trials ``start .. start+trials-1`` as a (trials, K) array."""
    rng = _stream(seed, start * config.K)
    return rng.standard_exponential((trials, config.K), method="inv") / config.eta


def harmonic(K: int) -> float:
    if K < 0:
        raise ValueError(f"harmonic number needs K >= 0, got {K}")
    return math.fsum(1.0 / k for k in range(1, K + 1))


def expected_order_stat(K: int, q: int, eta: float) -> float:
    """Mean of the q-th smallest of K iid exponential(eta) variables."""
    if not 1 <= q <= K:
        raise ValueError(f"order statistic index q must be in [1, {K}], got {q}")
    return (harmonic(K) - harmonic(K - q)) / eta


def completed_by(t: float, lambda_k: float, config: SystemConfig) -> int:
    """Number of IVs an EN with setup time ``lambda_k`` has finished at ``t``.

    Agrees exactly with the event grid ``lambda_k + j*tau``: the j-th IV
    counts as finished iff ``lambda_k + j*tau <= t`` in floating point.
    """
    cap = config.rows_per_en
    if t < lambda_k:
        return 0
    j = int(math.floor((t - lambda_k) / config.tau))
    j = min(max(j, 0), cap)
    while j < cap and lambda_k + (j + 1) * config.tau <= t:
        j += 1
    while j > 0 and lambda_k + j * config.tau > t:
        j -= 1
    return j
