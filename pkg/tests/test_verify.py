import pytest

from edgecoding.gf import identity_code, mds_generator
from edgecoding.model import SystemConfig
from edgecoding.placement import HybridParams, Schedule, cyclic_schedule, mds_placement
from edgecoding.verify import (
    check_all_subsets,
    check_hs,
    check_hs_candidates,
    check_mc,
    check_size,
    check_uc,
    computed_rows,
    finisher_stop,
)


@pytest.fixture
def small():
    return SystemConfig(K=4, N=4, m=4, mu=0.5)


@pytest.fixture
def medium():
    return SystemConfig(K=6, N=6, m=12, mu=0.5)


def test_computed_rows():
    sched = Schedule(rows=((0, 1), (1, 2), (2, 3)), kind="uncoded", n_rows=4)
    assert computed_rows(sched, [2, 1, 0]) == [0, 1]
    assert computed_rows(sched, [0, 0, 2]) == [2, 3]


def test_finisher_stop():
    sched = Schedule(rows=((0, 1), (1, 2), (2, 3)), kind="mds", n_rows=4)
    assert finisher_stop(sched, [0.5, 0.1, 0.3], 2) == [0, 2, 2]


def test_uc_passes(small, medium):
    for cfg in (small, medium):
        res = check_uc(cfg, 100, seed=11)
        assert res.ok, res.failures[:3]
        assert res.total == 100


def test_uc_non_covering_fails(small):
    bad = Schedule(rows=tuple((0, 1) for _ in range(4)), kind="uncoded", n_rows=4)
    res = check_uc(small, 20, seed=1, schedule=bad)
    assert not res.ok
    assert res.passed == 0
    assert res.failures[0]["seed"] == 1
    assert res.failures[0]["rows"] == [0, 1]


def test_mc_passes(small, medium):
    for cfg in (small, medium):
        assert check_mc(cfg, 100, seed=5).ok


def test_mc_every_pair(small):
    sched = mds_placement(small)
    code = mds_generator(sched.n_rows, small.m, small.L)
    res = check_all_subsets(small, sched, code, 2, "mc")
    assert res.ok and res.total == 6


def test_too_few_finishers_fail(small):
    sched = mds_placement(small)
    code = mds_generator(sched.n_rows, small.m, small.L)
    assert check_all_subsets(small, sched, code, 1, "mc").passed == 0


def test_hs_example(medium):
    res = check_hs(medium, HybridParams(q=4, mprime=15, rho2=2), 100, seed=3)
    assert res.ok


def test_hs_all_candidates(medium):
    results = check_hs_candidates(medium)
    assert results
    for params, res in results:
        assert res.ok, params


def test_uncoded_identity_needs_cover(small):
    sched = cyclic_schedule(small)
    code = identity_code(small.m)
    # any 2 ENs of the cyclic layout cover at most 4 rows but not always all
    res = check_all_subsets(small, sched, code, 2, "uc")
    assert 0 < res.passed < res.total


def test_check_size():
    assert check_size(SystemConfig(K=6, m=12)) == []
    problems = check_size(SystemConfig(K=10, N=10, m=40, mu=0.5))
    assert len(problems) == 2
    assert check_size(SystemConfig(K=6, N=6, m=12, mu=0.5, L=4)) != []
