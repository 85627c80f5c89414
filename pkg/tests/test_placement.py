import json
from math import comb

import pytest

from edgecoding.model import ConfigError, SystemConfig
from edgecoding.placement import (
    HybridParams,
    Schedule,
    cyclic_schedule,
    hybrid_placement,
    mds_placement,
    validate_hybrid,
)


def as_w(schedule):
    return [[r + 1 for r in lst] for lst in schedule.rows]


class TestCyclic:
    def test_printed_example(self):
        s = cyclic_schedule(SystemConfig(K=3, N=3, m=6, mu=0.5))
        assert as_w(s) == [[1, 4, 5], [2, 5, 6], [3, 6, 4]]

    def test_two_by_two(self):
        s = cyclic_schedule(SystemConfig(K=2, N=2, m=2, mu=1.0))
        assert as_w(s) == [[1, 2], [2, 1]]

    def test_json_golden(self):
        s = cyclic_schedule(SystemConfig(K=3, N=3, m=6, mu=0.5))
        assert s.to_json() == "[[1, 4, 5], [2, 5, 6], [3, 6, 4]]"
        assert Schedule.from_json(s.to_json(), n_rows=6) == s

    @pytest.mark.parametrize(
        "K, m, mu",
        [(6, 60, 0.5), (6, 60, 1 / 6), (6, 60, 1.0), (4, 6, 0.5), (5, 12, 0.25), (7, 60, 0.2), (3, 6, 0.5)],
    )
    def test_balance_and_coverage(self, K, m, mu):
        cfg = SystemConfig(K=K, m=m, mu=mu)
        s = cyclic_schedule(cfg)
        mult = s.multiplicity()
        assert all(len(lst) == cfg.rows_per_en for lst in s.rows)
        assert all(len(set(lst)) == len(lst) for lst in s.rows)
        assert mult.min() >= 1
        assert mult.max() - mult.min() <= 1
        assert abs(mult.mean() - K * cfg.rows_per_en / m) < 1e-12

    def test_first_positions_cover_all_rows(self, default_cfg):
        s = cyclic_schedule(default_cfg)
        first = {r for lst in s.rows for r in lst[:10]}
        assert first == set(range(60))
        assert s.rows[0][:3] == (0, 6, 12)


class TestMds:
    def test_small(self):
        s = mds_placement(SystemConfig(K=2, N=2, m=2, mu=1.0))
        assert as_w(s) == [[1, 2], [3, 4]]

    def test_default_size(self, default_cfg):
        s = mds_placement(default_cfg)
        flat = [r for lst in s.rows for r in lst]
        assert len(flat) == 180 == len(set(flat)) == s.n_rows
        assert all(len(lst) == 30 for lst in s.rows)


class TestHybrid:
    def test_example(self, default_cfg):
        p = HybridParams(q=4, mprime=75, rho2=2)
        s = hybrid_placement(default_cfg, p)
        assert p.b(6) == 5
        assert all(len(lst) == 25 for lst in s.rows)
        assert (s.multiplicity() == 2).all()
        # EN 1 holds groups {1,2},{1,3},...,{1,6} in lexicographic order
        assert s.rows[0] == tuple(range(25))
        assert s.rows[1][:5] == tuple(range(5))
        assert s.rows[1][5:10] == tuple(range(25, 30))

    def test_rho2_one_is_disjoint(self, default_cfg):
        s = hybrid_placement(default_cfg, HybridParams(q=2, mprime=180, rho2=1))
        assert s == mds_placement(default_cfg)

    def test_rho1_one_is_repetition(self):
        cfg = SystemConfig(K=6, m=60, mu=0.5)
        p = HybridParams(q=6, mprime=60, rho2=3)
        s = hybrid_placement(cfg, p)
        assert s.n_rows == 60 and (s.multiplicity() == 3).all()

    def test_divisibility_error(self, default_cfg):
        with pytest.raises(ConfigError, match="divisib"):
            hybrid_placement(default_cfg, HybridParams(q=4, mprime=70, rho2=2))


class TestValidate:
    def test_pass(self, default_cfg):
        assert validate_hybrid(default_cfg, HybridParams(4, 75, 2)) == []
        assert validate_hybrid(default_cfg, HybridParams(2, 180, 1)) == []

    def test_storage_violation(self, default_cfg):
        problems = validate_hybrid(default_cfg, HybridParams(4, 120, 2))
        assert any("storage:" in p for p in problems)

    def test_recovery_violation(self, default_cfg):
        problems = validate_hybrid(default_cfg, HybridParams(2, 60, 1))
        assert any("recovery:" in p for p in problems)

    def test_q_range_and_many(self, default_cfg):
        problems = validate_hybrid(default_cfg, HybridParams(1, 50, 2))
        assert any("q range" in p for p in problems)
        assert any("rho1 >= 1" in p for p in problems)
        assert any("divisibility" in p for p in problems)

    def test_never_raises(self, default_cfg):
        assert validate_hybrid(default_cfg, HybridParams(0, 0, 0))
        assert validate_hybrid(default_cfg, HybridParams(3, 60, 9))
