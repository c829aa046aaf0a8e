import itertools

import numpy as np
import pytest

from dyadicwalsh.dyadic import DyadicCube, DyadicPoint, all_cubes, cube_of, xor_add
from dyadicwalsh.walsh import (dirichlet_1d, dirichlet_dd, dirichlet_digits, rademacher,
                               scaling_identity, walsh_at_point, walsh_matrix, walsh_matrix_dd,
                               walsh_matrix_entry, walsh_on_cube, walsh_value)


def test_small_matrices():
    assert walsh_matrix(0).tolist() == [[1]]
    assert walsh_matrix(1).tolist() == [[1, 1], [1, -1]]
    assert walsh_matrix(2).tolist() == [[1, 1, 1, 1],
                                        [1, 1, -1, -1],
                                        [1, -1, 1, -1],
                                        [1, -1, -1, 1]]


@pytest.mark.parametrize('k', range(9))
def test_matrix_orthogonality(k):
    W = walsh_matrix(k)
    assert np.array_equal(W, W.T)
    assert np.array_equal(W @ W, (1 << k) * np.eye(1 << k, dtype=np.int64))


@pytest.mark.parametrize('k', range(5))
def test_matrix_orthogonality_dd(k):
    W = walsh_matrix_dd(k, 2)
    size = 1 << (2 * k)
    assert np.array_equal(W @ W.T, size * np.eye(size, dtype=np.int64))


def test_matrix_entries_agree_with_cubes():
    W = walsh_matrix_dd(2, 2)
    cubes = list(all_cubes(2, 2))
    for row, n in enumerate(itertools.product(range(4), repeat=2)):
        for col, cube in enumerate(cubes):
            assert W[row, col] == walsh_on_cube(n, cube)
            assert W[row, col] == walsh_matrix_entry(n, cube.index, 2)


def test_matrix_is_read_only():
    with pytest.raises(ValueError):
        walsh_matrix(3)[0, 0] = 5
    with pytest.raises(ValueError):
        walsh_matrix(13)


@pytest.mark.parametrize('ms,d', [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2)])
def test_scaling_identity(ms, d):
    axis = list(itertools.product(range(1 << ms), repeat=d))
    for p, m, mprime in itertools.product(axis, axis, axis):
        left, right = scaling_identity(ms, p, m, mprime)
        assert left == right


@pytest.mark.parametrize('d', [1, 2, 3])
def test_walsh_is_multiplicative(d, rng):
    depth = 12
    for _ in range(10 ** 4):
        g = DyadicPoint.random(d, depth, rng)
        h = DyadicPoint.random(d, depth, rng)
        n = tuple(rng.randrange(1 << depth) for _ in range(d))
        assert walsh_at_point(n, g) * walsh_at_point(n, h) == walsh_at_point(n, xor_add(g, h))


def test_point_and_cube_agree(random_points):
    for g in random_points(2, 6, 20):
        for n in itertools.product(range(64), repeat=2):
            if n[0] % 7 or n[1] % 5:
                continue
            assert walsh_at_point(n, g) == walsh_on_cube(n, cube_of(g, 6))
            assert walsh_value(n, g) == walsh_at_point(n, g)


def test_rademacher_reads_one_digit():
    g = DyadicPoint.from_bits([[0, 1, 1], [1, 0, 0]])
    assert rademacher((1, 0), g) == 1
    assert rademacher((0, 0), g) == -1
    assert rademacher((2, 1), g) == -1
    assert rademacher((1, 1), g) == walsh_value((2, 2), g)
    with pytest.raises(ValueError):
        rademacher((3, 0), g)


def test_walsh_errors():
    with pytest.raises(ValueError):
        walsh_on_cube((4,), DyadicCube(2, (0,)))
    with pytest.raises(TypeError):
        walsh_on_cube((1,), DyadicPoint([0], 2))
    with pytest.raises(TypeError):
        walsh_at_point((1,), DyadicCube(2, (0,)))
    with pytest.raises(ValueError):
        walsh_on_cube((1, 1), DyadicCube(2, (0,)))


def test_dirichlet_decomposition_1d():
    k = 8
    direct = np.cumsum(walsh_matrix(k), axis=0)
    for N in range(1, (1 << k) + 1):
        for m in range(1 << k):
            assert dirichlet_digits(N, m, k) == direct[N - 1, m]


def test_dirichlet_direct_method():
    for N in (1, 5, 12, 16):
        for m in range(16):
            cube = DyadicCube(4, (m,))
            assert dirichlet_1d(N, cube) == dirichlet_1d(N, cube, method='direct')


def test_dirichlet_power_of_two():
    for k in range(6):
        assert dirichlet_digits(1 << k, 0, 6) == 1 << k
        for m in range(1, 64):
            expected = 1 << k if m >> (6 - k) == 0 else 0
            assert dirichlet_digits(1 << k, m, 6) == expected


def test_dirichlet_decomposition_dd(random_points):
    points = random_points(2, 4, 6, seed=3)
    for N in itertools.product(range(1, 17), repeat=2):
        for g in points:
            assert dirichlet_dd(N, g) == dirichlet_dd(N, g, method='direct')


def test_dirichlet_errors():
    with pytest.raises(ValueError):
        dirichlet_digits(0, 0, 3)
    with pytest.raises(ValueError):
        dirichlet_digits(9, 0, 3)
    with pytest.raises(ValueError):
        dirichlet_digits(3, 0, 3, method='fast')
    with pytest.raises(ValueError):
        dirichlet_1d(2, DyadicCube(2, (0, 0)))
