import itertools
import time

import pytest

from dyadicwalsh.convergence import (block_partial_sum, block_stage, convergence_records,
                                     factorized_block_sum, iterated_partial_sum,
                                     lambda_admissible, series_partial_sum, sweep_values,
                                     tail_bound, tail_split, tail_term, v_part_bound,
                                     zero_sum_check)
from dyadicwalsh.dyadic import ZERO, DyadicCube, DyadicPoint, DyadicRational, all_cubes
from dyadicwalsh.mset import (GeneralPermutation, MSetConfig, coefficient_oracle, in_F_tilde,
                              in_Fs)
from dyadicwalsh.quasimeasure import restrict, vanishing_rank
from dyadicwalsh.report import PASSED, SKIPPED

M_RANGE = list(itertools.product(range(1, 5), repeat=2))


def test_block_stage():
    assert block_stage((16, 32)) == 2
    assert block_stage((16, 32), partial=False) is None
    assert block_stage((1, 1)) == 1
    assert block_stage((3, 3)) is None
    assert block_stage((1 << 20, 3 << 19)) == 3


def test_lambda_admissible():
    assert lambda_admissible((16, 32), 2)
    assert not lambda_admissible((16, 33), 2)
    assert lambda_admissible((3, 4), '4/3')
    with pytest.raises(ValueError):
        lambda_admissible((0, 4), 2)


def test_tail_constants():
    assert tail_bound(2, 2) == DyadicRational(8)
    assert tail_bound(3, 2) == DyadicRational(1, 0)
    assert v_part_bound(2, 2) == 32
    with pytest.raises(ValueError):
        tail_bound(1, 2)


def test_tail_split():
    split = tail_split((31, 16), 2)
    assert split.M == (3, 0)
    assert split.L == (1, 0)
    assert split.K == (1, 0)
    assert split.N_prime == (30, 16)
    with pytest.raises(ValueError):
        tail_split((32, 16), 2)


def test_factorized_block_sum(mset_config, random_points):
    cfg = mset_config(seed=21)
    oracle = coefficient_oracle(cfg)
    for g in random_points(2, 6, 20, seed=2):
        previous = block_partial_sum(oracle, (16, 16), g)
        for N in itertools.product(range(16, 33), repeat=2):
            assert factorized_block_sum(cfg, N, g) == block_partial_sum(oracle, N, g) - previous


def test_factorized_block_sum_stage_3(mset_config, random_points):
    cfg = mset_config(S=3, seed=22)
    g, = random_points(2, 21, 1, seed=5)
    start = time.perf_counter()
    factorized_block_sum(cfg, (3 << 19, 3 << 19), g)
    assert time.perf_counter() - start < 1


def test_factorized_block_sum_errors(rng, mset_config):
    cfg = mset_config()
    g = DyadicPoint.zero(2, 6)
    with pytest.raises(ValueError):
        factorized_block_sum(cfg, (15, 20), g)
    with pytest.raises(ValueError):
        factorized_block_sum(cfg, (20, 20), DyadicPoint.zero(2, 4))
    general = MSetConfig(2, 2, GeneralPermutation.random(2, [2], rng), allow_general=True)
    with pytest.raises(ValueError):
        factorized_block_sum(general, (20, 20), g)


def test_series_partial_sum(mset_config, random_points):
    cfg = mset_config(seed=23)
    oracle = coefficient_oracle(cfg)
    for g in random_points(2, 6, 5, seed=3):
        for N in [(1, 1), (2, 2), (1, 30), (17, 17), (20, 31), (32, 32), (40, 50)]:
            assert series_partial_sum(cfg, N, g) == block_partial_sum(oracle, N, g)


def test_restricted_series_partial_sum(mset_config, random_points):
    cfg = mset_config(seed=24)
    window = next(c for c in all_cubes(2, 2) if cfg.tau(c))
    oracle = coefficient_oracle(cfg, window)
    for g in random_points(2, 6, 4, seed=4):
        for N in [(1, 1), (3, 8), (17, 17), (20, 31), (32, 32)]:
            assert series_partial_sum(cfg, N, g, window) == block_partial_sum(oracle, N, g)


def test_iterated_sums_2d(mset_config, random_points):
    cfg = mset_config(seed=25)
    oracle = coefficient_oracle(cfg)
    for g in random_points(2, 6, 5, seed=6):
        rectangular = block_partial_sum(oracle, (32, 32), g)
        for order in [(0, 1), (1, 0)]:
            assert iterated_partial_sum(oracle, order, 32, g) == rectangular


def test_iterated_sums_3d(random_points):
    cfg = MSetConfig(3, 1)
    oracle = coefficient_oracle(cfg)
    for g in random_points(3, 2, 4, seed=7):
        rectangular = block_partial_sum(oracle, (2, 2, 2), g)
        for order in itertools.permutations(range(3)):
            assert iterated_partial_sum(oracle, order, 2, g) == rectangular
    with pytest.raises(ValueError):
        iterated_partial_sum(oracle, (0, 0, 1), 2, g)


def test_zero_sums_off_the_set(mset_config, random_points):
    cfg = mset_config(seed=26)
    outside = random_points(2, 7, 100, seed=9, accept=lambda g: not in_F_tilde(g, 2, cfg))
    for g in outside:
        w = vanishing_rank(cfg.tau, g, 5)
        assert w is not None
        report = zero_sum_check(cfg.tau, g, w, M_RANGE)
        assert report.status == PASSED
        assert report.details['w'] == w


def test_zero_sums_restricted(mset_config, random_points):
    cfg = mset_config(seed=27)
    window = next(c for c in all_cubes(2, 2) if cfg.tau(c))
    restricted = restrict(cfg.tau, window)
    outside = random_points(2, 5, 30, seed=10, accept=lambda g: not window.contains_point(g))
    for g in outside:
        assert zero_sum_check(restricted, g, 2, M_RANGE).status == PASSED


def test_zero_sum_check_skips_inside_support(mset_config):
    cfg = mset_config()
    report = zero_sum_check(cfg.tau, DyadicPoint.zero(2, 7), 3, M_RANGE)
    assert report.status == SKIPPED
    with pytest.raises(ValueError):
        zero_sum_check(cfg.tau, DyadicPoint.zero(2, 4), 3, M_RANGE)


def test_tail_bound(mset_config, random_points):
    cfg = mset_config(seed=28)
    bound = tail_bound(2, 2)
    outside = random_points(2, 6, 100, seed=11, accept=lambda g: not in_Fs(g, 1, cfg))
    for g in outside:
        assert vanishing_rank(cfg.tau, g, 5) <= 2
        for N in itertools.product(range(16, 32), repeat=2):
            assert abs(series_partial_sum(cfg, N, g)) <= bound


def test_tail_term(mset_config, random_points):
    cfg = mset_config(seed=29)
    oracle = coefficient_oracle(cfg)
    g, = random_points(2, 6, 1, seed=12)
    N = (31, 22)
    prime = tail_split(N, 2).N_prime
    expected = block_partial_sum(oracle, N, g) - block_partial_sum(oracle, prime, g)
    assert tail_term(cfg, N, g) == expected


def test_convergence_records(mset_config, random_points):
    cfg = mset_config(seed=30)
    g, = random_points(2, 6, 1, seed=13)
    records = convergence_records(cfg, g)
    values = sweep_values(2)
    assert values == [16, 18, 20, 22, 24, 26, 28, 30, 32]
    modes = {r.mode for r in records}
    assert modes == {'rectangular', 'cubic', 'lambda(2)', 'iterated(0,1)', 'iterated(1,0)'}
    assert len(records) == 81 + 9 + 9 + 18
    for r in records:
        if r.mode == 'cubic':
            assert r.N[0] == r.N[1]
        if r.mode in ('rectangular', 'cubic', 'lambda(2)'):
            assert r.value == series_partial_sum(cfg, r.N, g)
    full = [r for r in records if r.mode.startswith('iterated') and r.N == (32, 32)]
    assert len(full) == 2
    assert all(r.value == series_partial_sum(cfg, (32, 32), g) for r in full)
    assert convergence_records(cfg, g) == records


def test_null_series_vanishes_off_support(mset_config):
    cfg = mset_config(seed=31)
    # the rank 1 cube (1, 0) misses F, so full blocks sum to zero there
    g = DyadicCube(1, (1, 0)).point(6)
    assert series_partial_sum(cfg, (32, 32), g) == ZERO
