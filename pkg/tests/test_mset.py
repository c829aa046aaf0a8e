import itertools
import json

import pytest

from dyadicwalsh.dyadic import ONE, ZERO, DyadicCube, DyadicPoint, DyadicRational, all_cubes
from dyadicwalsh.mset import (GeneralPermutation, MSetConfig, ProductPermutation, StageSequence,
                              block_coefficient_extremes, closed_form_coefficient,
                              closed_form_local_coefficient, closed_form_restricted_coefficient,
                              coefficient_oracle, cube_in_F_tilde, cube_meets_F,
                              decompose_block_index, F_tilde_cubes, halving_chain, in_F_tilde,
                              in_Fs, measure_integral_over_Fs, mu_F_tilde, stage_cube_values,
                              stage_of_rank, stage_scale, stage_sequence, stage_value)
from dyadicwalsh.quasimeasure import coefficient_table, restrict


def test_stage_values():
    assert [stage_value(s) for s in range(1, 5)] == [0, 2, 10, 42]
    assert stage_sequence(3).block_exponents() == (0, 4, 20)
    assert list(stage_sequence(2)) == [0, 2]
    with pytest.raises(ValueError):
        stage_value(0)
    with pytest.raises(ValueError):
        StageSequence([0, 3])


def test_stage_of_rank():
    assert stage_of_rank(0) == (1, 'address')
    assert stage_of_rank(1) == (1, 'graph')
    assert stage_of_rank(2) == (2, 'address')
    assert stage_of_rank(5) == (2, 'graph')
    assert stage_of_rank(10) == (3, 'address')
    assert stage_of_rank(3) is None


def test_decompose_block_index():
    assert decompose_block_index((16, 31)) == (2, (0, 3), (0, 3))
    assert decompose_block_index((1, 1)) == (1, (0, 0), (0, 0))
    assert decompose_block_index((0, 0)) is None
    assert decompose_block_index((16, 8)) is None
    assert decompose_block_index((4, 4)) is None


def test_product_permutation_validation(rng):
    family = ProductPermutation.random(2, [1, 2], rng)
    for m in itertools.product(range(4), repeat=2):
        assert family.inverse(2, family.forward(2, m)) == m
    with pytest.raises(ValueError):
        ProductPermutation(2, {2: [[0, 1, 2, 3]]})
    with pytest.raises(ValueError):
        ProductPermutation(1, {2: [[0, 1, 1, 3]]})
    identity = ProductPermutation.identity(2)
    assert identity.forward(3, (5, 7)) == (5, 7)


def test_permutation_from_json(tmp_path, perm_entries):
    path = tmp_path / 'perm.json'
    path.write_text(json.dumps(perm_entries()))
    family = ProductPermutation.from_json(str(path), 2)
    assert family.forward(2, (0, 1)) == (3, 1)
    assert family.inverse(2, (3, 1)) == (0, 1)
    assert ProductPermutation.from_json(family.to_json(), 2).forward(2, (2, 3)) == (0, 2)


@pytest.mark.parametrize('entries', [
    [{'stage': 2, 'coordinate': 0, 'perm': [0, 1, 2, 3]}],
    [{'stage': 2, 'coordinate': 1, 'perm': [0, 1, 2]}],
    [{'stage': 2, 'coordinate': 1, 'perm': [0, 1, 2, 3]},
     {'stage': 2, 'coordinate': 1, 'perm': [1, 0, 2, 3]}],
    [{'stage': 2, 'perm': [0, 1, 2, 3]}],
    {'stage': 2},
])
def test_permutation_from_json_rejects(entries):
    with pytest.raises(ValueError):
        ProductPermutation.from_json(entries, 2)


def test_general_permutations_need_opt_in(rng):
    general = GeneralPermutation.random(2, [1, 2], rng)
    with pytest.raises(ValueError):
        MSetConfig(2, 2, general)
    cfg = MSetConfig(2, 2, general, allow_general=True)
    assert mu_F_tilde(2, cfg) == DyadicRational(1, -2)
    assert cfg.tau.check_additivity(4) == []


def test_config_checks():
    with pytest.raises(ValueError):
        MSetConfig(2, 2, ProductPermutation.identity(3))
    cfg = MSetConfig(2, 2)
    with pytest.raises(ValueError):
        cfg.check_stage(3)
    with pytest.raises(ValueError):
        closed_form_coefficient((1 << 20, 1 << 20), cfg)


def test_membership_by_digits():
    cfg = MSetConfig(2, 2)
    assert in_Fs(DyadicPoint.from_bits([[1, 0, 0], [1, 0, 0]]), 1, cfg)
    assert not in_Fs(DyadicPoint.from_bits([[1, 0, 0], [0, 0, 0]]), 1, cfg)
    # m = (0, 0): the digit 4 parities must agree
    assert in_Fs(DyadicPoint.from_bits([[0, 0, 1, 0, 1], [0, 0, 0, 1, 1]]), 2, cfg)
    assert not in_Fs(DyadicPoint.from_bits([[0, 0, 1, 0, 1], [0, 0, 0, 1, 0]]), 2, cfg)
    with pytest.raises(ValueError):
        in_Fs(DyadicPoint.zero(2, 4), 2, cfg)


@pytest.mark.parametrize('d,s', [(2, 1), (2, 2), (3, 1)])
def test_measure_of_F_tilde(d, s):
    assert mu_F_tilde(s, MSetConfig(d, s)) == DyadicRational(1, -s)


@pytest.mark.parametrize('d', [2, 3])
def test_halving_geometry(d, mset_config):
    cfg = mset_config(d=d, seed=2)
    for s in (1, 2):
        if d == 3 and s == 2:
            continue
        ms = stage_value(s)
        survivors = [DyadicCube.whole(d)] if s == 1 else F_tilde_cubes(s - 1, cfg)
        for cube in survivors:
            for sub in cube.subcubes(2 * ms):
                inside = [c for c in sub.children() if cube_in_F_tilde(c, s, cfg)]
                assert len(inside) == 1 << (d - 1)


def test_points_and_cubes_agree(random_points, mset_config):
    cfg = mset_config(seed=4)
    for g in random_points(2, 5, 300, seed=8):
        assert in_F_tilde(g, 2, cfg) == cube_in_F_tilde(DyadicCube(5, g.coords), 2, cfg)


def test_tau_support_is_F(mset_config):
    cfg = mset_config(seed=6)
    assert cfg.tau.check_additivity(6) == []
    for k in range(6):
        for cube in all_cubes(2, k):
            assert bool(cfg.tau(cube)) == cube_meets_F(cube, cfg)


def test_tau_check_additivity_3d(mset_config):
    assert mset_config(d=3, S=1).tau.check_additivity(4) == []


def test_stage_cube_values(mset_config):
    cfg = mset_config(seed=9)
    for rank in (0, 1, 2, 5):
        for cube in all_cubes(2, rank):
            assert stage_cube_values(cube, cfg) == cfg.tau(cube)
    with pytest.raises(ValueError):
        stage_cube_values(DyadicCube(3, (0, 0)), cfg)


@pytest.mark.parametrize('seed', [None, 1, 2, 3])
def test_closed_form_coefficients(seed, mset_config):
    cfg = mset_config(seed=seed)
    table = coefficient_table(cfg.tau, 5)
    for n in itertools.product(range(32), repeat=2):
        assert closed_form_coefficient(n, cfg) == table[n]
    assert table[0, 0] == ONE


def test_off_block_coefficients_vanish(mset_config):
    cfg = mset_config()
    table = coefficient_table(cfg.tau, 5)
    for n in itertools.product(range(32), repeat=2):
        if any(n) and decompose_block_index(n) is None:
            assert table[n] == ZERO


@pytest.mark.parametrize('seed', [None, 7])
def test_closed_form_local_coefficients(seed, mset_config):
    cfg = mset_config(seed=seed)
    block = list(itertools.product(range(16, 32), repeat=2))
    for cube in all_cubes(2, 2):
        table = coefficient_table(restrict(cfg.tau, cube), 5)
        for n in block:
            assert closed_form_local_coefficient(n, cube, cfg) == table[n]
        for n in itertools.product(range(32), repeat=2):
            low = all(v < 4 for v in n)
            if not low and not all(16 <= v < 32 for v in n):
                assert table[n] == ZERO


def test_local_coefficient_rank_mismatch(mset_config):
    with pytest.raises(ValueError):
        closed_form_local_coefficient((16, 16), DyadicCube(3, (0, 0)), mset_config())
    with pytest.raises(ValueError):
        closed_form_local_coefficient((5, 5), DyadicCube(2, (0, 0)), mset_config())


def test_measure_integral_identity(mset_config):
    cfg = mset_config(seed=12)
    s = 2
    for cube in all_cubes(2, 2):
        if not cube_in_F_tilde(cube, 1, cfg):
            continue
        table = coefficient_table(restrict(cfg.tau, cube), 5)
        for n in itertools.product(range(16, 32), repeat=2):
            assert measure_integral_over_Fs(n, cube, s, cfg) == table[n].scale(-s)


def test_coefficient_rigidity(mset_config):
    cfg = mset_config(seed=3)
    for s in (1, 2):
        ms = stage_value(s)
        extremes = block_coefficient_extremes(s, cfg)
        assert extremes.maximum == extremes.expected == stage_scale(s, 2)
        assert len(extremes.attaining) == (1 << (2 * ms)) >> (s - 1)
        assert all(count == 1 << (2 * ms) for count in extremes.attaining.values())


def test_restricted_oracle(mset_config):
    cfg = mset_config(seed=13)
    window = next(c for c in all_cubes(2, 2) if cfg.tau(c))
    oracle = coefficient_oracle(cfg, window)
    table = coefficient_table(restrict(cfg.tau, window), 5)
    support = set(oracle.support_below((32, 32)))
    for n in itertools.product(range(32), repeat=2):
        if n in support:
            assert oracle(n) == table[n]
        else:
            assert table[n] == ZERO
    with pytest.raises(ValueError):
        coefficient_oracle(cfg, DyadicCube(3, (0, 0)))


def test_restricted_closed_form_on_whole_group(mset_config):
    cfg = mset_config(seed=14)
    whole = DyadicCube.whole(2)
    for n in itertools.product(range(16, 32), repeat=2):
        assert closed_form_restricted_coefficient(n, whole, cfg) == closed_form_coefficient(n, cfg)
    with pytest.raises(ValueError):
        closed_form_restricted_coefficient((1, 1), whole, cfg)


def test_halving_chain(mset_config):
    cfg = mset_config(S=3, seed=15)
    chain = halving_chain(cfg.tau, DyadicCube.whole(2), 2, cfg)
    assert chain.passed
    assert [c.rank for c in chain.cubes] == [0, 2, 10]
    assert chain.values == [ONE, DyadicRational(1, -3), DyadicRational(1, -18)]
    with pytest.raises(ValueError):
        halving_chain(cfg.tau, DyadicCube(1, (0, 0)), 1, cfg)
    with pytest.raises(ValueError):
        halving_chain(cfg.tau, DyadicCube(2, (2, 0)), 1, cfg)
