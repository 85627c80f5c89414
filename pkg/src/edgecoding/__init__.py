"""Latency analysis of uncoded, MDS-coded and hybrid model storage for
distributed linear inference at the wireless edge."""

__version__ = "0.1.0"

from .model import (
    ConfigError,
    InfeasibleError,
    StragglerSample,
    SystemConfig,
    completed_by,
    expected_order_stat,
    harmonic,
    sample_batch,
    sample_stragglers,
)
from .placement import (
    HybridParams,
    Schedule,
    cyclic_schedule,
    hybrid_placement,
    mds_placement,
    validate_hybrid,
)
from .latency import (
    LatencyBreakdown,
    RedundancyProfile,
    hs_downlink,
    hs_latency_closed,
    hs_latency_sample,
    hs_profile,
    mc_latency_closed,
    mc_latency_sample,
    uc_latency,
    uc_redundancy,
    uc_stop,
    zf_slot_cost,
)
from .optimizer import Optimum, enumerate_candidates, optimize
from .montecarlo import SchemeSpec, TrialReport, run_trials, sweep_gamma
