from math import comb

import numpy as np
import pytest

from edgecoding.latency import (
    RedundancyProfile,
    hs_downlink,
    hs_downlink_detail,
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
from edgecoding.model import InfeasibleError, StragglerSample, SystemConfig, harmonic
from edgecoding.placement import HybridParams, Schedule, cyclic_schedule, hybrid_placement


def sample(*lams):
    return StragglerSample(np.array(lams, dtype=float), seed=0)


def test_zf_slot_cost():
    assert zf_slot_cost(3, 6) == pytest.approx(1 / 3)
    assert zf_slot_cost(1, 6) == 1.0
    assert zf_slot_cost(8, 6) == pytest.approx(1 / 6)
    with pytest.raises(ValueError):
        zf_slot_cost(0, 6)


class TestUncoded:
    def test_straggler_example(self, tiny_cfg):
        s = cyclic_schedule(tiny_cfg)
        t_c, stop = uc_stop(tiny_cfg, s, sample(0.0, 10.0))
        assert t_c == 2.0 and list(stop) == [2, 0]
        assert uc_redundancy(tiny_cfg, s, stop).counts == {1: 2}
        lat = uc_latency(tiny_cfg, s, sample(0.0, 10.0))
        assert (lat.delta_C, lat.delta_D, lat.delta) == (2.0, 2.0, 4.0)

    def test_simultaneous_example(self, tiny_cfg):
        s = cyclic_schedule(tiny_cfg)
        t_c, stop = uc_stop(tiny_cfg, s, sample(0.0, 0.0))
        assert t_c == 1.0 and list(stop) == [1, 1]
        lat = uc_latency(tiny_cfg, s, sample(0.0, 0.0))
        assert (lat.delta_C, lat.delta_D) == (1.0, 2.0)

    def test_one_row_each(self):
        cfg = SystemConfig(K=4, N=4, m=4, mu=0.25, tau=0.5)
        t_c, stop = uc_stop(cfg, cyclic_schedule(cfg), sample(0, 0, 0, 0))
        assert t_c == 0.5 and list(stop) == [1, 1, 1, 1]

    def test_full_completion_profile(self):
        cfg = SystemConfig(K=3, N=3, m=6, mu=0.5)
        s = cyclic_schedule(cfg)
        assert uc_redundancy(cfg, s, [3, 3, 3]).counts == {1: 3, 2: 3}

    def test_gamma_zero(self, default_cfg):
        lat = uc_latency(default_cfg, cyclic_schedule(default_cfg), sample(*np.linspace(0.1, 2, 6)))
        assert lat.delta == lat.delta_C

    def test_brute_force_stop(self):
        # walk every event time in order; first covering one must match
        cfg = SystemConfig(K=3, N=2, m=6, mu=0.5, tau=0.3)
        s = cyclic_schedule(cfg)
        rng = np.random.default_rng(0)
        for _ in range(50):
            lam = rng.exponential(0.5, 3)
            events = sorted(lam[k] + j * cfg.tau for k in range(3) for j in range(1, 4))
            for t in events:
                got = set()
                for k in range(3):
                    n = sum(lam[k] + j * cfg.tau <= t for j in range(1, 4))
                    got.update(s.rows[k][:n])
                if len(got) == 6:
                    break
            t_c, _ = uc_stop(cfg, s, sample(*lam))
            assert t_c == t

    def test_infeasible(self, tiny_cfg):
        bad = Schedule(rows=((0, 0), (0, 0)), kind="uncoded", n_rows=2)
        with pytest.raises(InfeasibleError):
            uc_stop(tiny_cfg, bad, sample(0.0, 0.0))


class TestMds:
    def test_sample(self, default_cfg):
        lat = mc_latency_sample(default_cfg, sample(0.9, 0.3, 0.1, 5.0, 2.0, 0.7))
        assert lat.delta_C == pytest.approx(90.0)
        assert lat.delta_D == 60

    def test_full_storage_waits_for_fastest(self):
        cfg = SystemConfig(mu=1.0, tau=0.01)
        lat = mc_latency_sample(cfg, sample(0.5, 0.2, 0.9, 0.3, 0.8, 0.6))
        assert lat.delta_C == pytest.approx(0.2 / 0.01 + 60)

    def test_closed(self, default_cfg):
        assert harmonic(6) - harmonic(4) == pytest.approx(0.3666666666666667)
        assert mc_latency_closed(default_cfg).delta == pytest.approx(121.66666666666667, rel=1e-12)
        assert mc_latency_closed(default_cfg.replace(gamma=1.0)).delta == pytest.approx(181.66666666666669)


class TestHybridProfile:
    @pytest.mark.parametrize(
        "K, q, rho2, b, expected",
        [(6, 4, 2, 5, {2: 30, 1: 40}), (6, 6, 3, 3, {3: 60}), (6, 2, 1, 30, {1: 60})],
    )
    def test_examples(self, K, q, rho2, b, expected):
        cfg = SystemConfig(K=K, m=60, mu=0.5)
        p = HybridParams(q=q, mprime=b * comb(K, rho2), rho2=rho2)
        assert hs_profile(cfg, p).counts == expected

    def test_against_placement(self, default_cfg):
        # count redundancies directly from the placement for every finisher set
        p = HybridParams(4, 75, 2)
        s = hybrid_placement(default_cfg, p)
        for fin in [(0, 1, 2, 3), (2, 3, 4, 5), (0, 2, 4, 5)]:
            r = np.zeros(75, dtype=int)
            for k in fin:
                for row in s.rows[k]:
                    r[row] += 1
            assert RedundancyProfile.from_multiplicities(r).counts == hs_profile(default_cfg, p).counts


class TestHybridDownlink:
    def test_examples(self, default_cfg):
        assert hs_downlink_detail(default_cfg, RedundancyProfile({2: 30, 1: 40})) == (45.0, 2)
        assert hs_downlink_detail(default_cfg, RedundancyProfile({3: 60})) == (20.0, 3)
        assert hs_downlink_detail(default_cfg, RedundancyProfile({1: 60})) == (60.0, 1)

    def test_top_level_too_big(self, default_cfg):
        # 70 IVs at r=2: none fit entirely, all 60 go at r=2
        assert hs_downlink_detail(default_cfg, RedundancyProfile({2: 70})) == (30.0, 3)

    def test_cap_at_users(self):
        cfg = SystemConfig(K=6, N=2, m=60, mu=0.5)
        assert hs_downlink(cfg, RedundancyProfile({3: 60})) == pytest.approx(30.0)

    def test_short_profile(self, default_cfg):
        with pytest.raises(InfeasibleError):
            hs_downlink(default_cfg, RedundancyProfile({2: 20, 1: 30}))

    def test_greedy_is_optimal_delivery(self, default_cfg):
        # brute force: choose how many IVs to send from each level
        prof = {3: 12, 2: 30, 1: 40}
        best = min(
            a / 3 + b / 2 + c
            for a in range(13) for b in range(31) for c in range(41) if a + b + c == 60
        )
        assert hs_downlink(default_cfg, RedundancyProfile(prof)) == pytest.approx(best)


class TestHybridLatency:
    def test_sample(self, default_cfg):
        p = HybridParams(4, 75, 2)
        lat = hs_latency_sample(default_cfg, p, sample(0.2, 1.0, 3.0, 0.5, 0.1, 2.0))
        assert lat.delta_C == pytest.approx(225.0)
        assert lat.delta_D == 45.0

    def test_downlink_constant_across_samples(self, default_cfg):
        p = HybridParams(4, 75, 2)
        dds = {hs_latency_sample(default_cfg, p, sample(*np.random.default_rng(i).exponential(1, 6))).delta_D
               for i in range(10)}
        assert dds == {45.0}

    def test_closed_example(self, default_cfg):
        lat = hs_latency_closed(default_cfg.replace(gamma=1.0), HybridParams(4, 75, 2))
        assert harmonic(6) - harmonic(2) == pytest.approx(0.95)
        assert lat.delta == pytest.approx(307.5)
        assert lat.meta["stored_rows"] == 25
        assert lat.meta["delta_C_full_storage"] == pytest.approx(237.5 + 30)

    def test_degenerates_to_mds(self, default_cfg):
        for g in (0.0, 0.7, 2.0):
            cfg = default_cfg.replace(gamma=g)
            hs = hs_latency_closed(cfg, HybridParams(2, 180, 1))
            mc = mc_latency_closed(cfg)
            assert hs.delta_C == mc.delta_C and hs.delta_D == mc.delta_D == 60

    def test_all_wait_repetition(self, default_cfg):
        lat = hs_latency_closed(default_cfg, HybridParams(6, 60, 3))
        assert lat.delta_C == pytest.approx(harmonic(6) / (0.8 * 0.005) + 30)
        assert lat.delta_D == 20.0

    def test_order_invariance(self, default_cfg):
        # latency only depends on which ENs finish, not the within-EN order
        p = HybridParams(4, 75, 2)
        s = hybrid_placement(default_cfg, p)
        lam = sample(0.2, 1.0, 3.0, 0.5, 0.1, 2.0)
        base = hs_latency_sample(default_cfg, p, lam)
        rng = np.random.default_rng(1)
        shuffled = Schedule(tuple(tuple(rng.permutation(lst)) for lst in s.rows), "coded", 75)
        fin = np.argsort(lam.lambdas)[:4]
        rows_a = {r for k in fin for r in s.rows[k]}
        rows_b = {r for k in fin for r in shuffled.rows[k]}
        assert rows_a == rows_b
        assert base.delta_C == pytest.approx(225.0)
