"""
dyadicwalsh.walsh
=================

Walsh functions in Paley numbering, Rademacher functions, Walsh matrices
and Dirichlet kernels.

A Walsh multi-index is a tuple of nonnegative integers, one per
coordinate. Signs are the integers +1 and -1.

Every function here accepts either a `DyadicPoint` or a `DyadicCube` as
the place of evaluation. A cube of rank k behaves like a point of depth k
whose digits are the cube's index digits, which is exact for every
function that only reads the first k digits.
"""
import functools

import numpy as np

from dyadicwalsh.dyadic import DyadicCube, DyadicPoint
from dyadicwalsh.utils import as_index, parity, reverse_bits

MAX_MATRIX_RANK = 12


def _digits(x):
    """(coordinate values, depth) of a point or cube."""
    if isinstance(x, DyadicPoint):
        return x.coords, x.depth
    elif isinstance(x, DyadicCube):
        return x.index, x.rank
    raise TypeError(f'Expected a DyadicPoint or DyadicCube, got {type(x)}')


def walsh_sign_1d(n, value, depth):
    """W_n at the digit string `value` of length `depth`; needs n < 2**depth."""
    if n >> depth:
        raise ValueError(f'W_{n} is not determined by {depth} digits')
    return -1 if parity(n & reverse_bits(value, depth)) else 1


def walsh_on_cube(n, c):
    """Constant value of W_n on the cube c.

    Parameters
    ----------
    n: tuple of int
        Walsh multi-index with n^j < 2**rank(c) for every j.
    c: `dyadicwalsh.dyadic.DyadicCube`

    Returns
    -------
    sign: int
        +1 or -1
    """
    if not isinstance(c, DyadicCube):
        raise TypeError(f'Expected a DyadicCube, got {type(c)}')
    n = as_index(n, c.dimension)
    sign = 1
    for nj, mj in zip(n, c.index):
        if nj >> c.rank:
            raise ValueError(f'W_{n} is not constant on rank-{c.rank} cubes')
        sign *= walsh_sign_1d(nj, mj, c.rank)
    return sign


def walsh_at_point(n, g):
    """W_n(g) = prod_k (-1)^{g_k n_k}, coordinatewise product."""
    if not isinstance(g, DyadicPoint):
        raise TypeError(f'Expected a DyadicPoint, got {type(g)}')
    n = as_index(n, g.dimension)
    sign = 1
    for nj, cj in zip(n, g.coords):
        if nj >> g.depth:
            raise ValueError(f'Depth {g.depth} is insufficient for W_{n}')
        sign *= walsh_sign_1d(nj, cj, g.depth)
    return sign


def walsh_value(n, x):
    """W_n at a point or on a cube."""
    values, depth = _digits(x)
    n = as_index(n, len(values))
    sign = 1
    for nj, vj in zip(n, values):
        sign *= walsh_sign_1d(nj, vj, depth)
    return sign


def rademacher(k_vec, x):
    """R_k(g) = prod_j (-1)^{g^j_{k^j}}."""
    values, depth = _digits(x)
    k_vec = as_index(k_vec, len(values))
    sign = 1
    for kj, vj in zip(k_vec, values):
        if kj >= depth:
            raise ValueError(f'Digit {kj} is beyond depth {depth}')
        if (vj >> (depth - 1 - kj)) & 1:
            sign = -sign
    return sign


@functools.lru_cache(maxsize=None)
def _matrix(k):
    size = 1 << k
    n = np.arange(size, dtype=np.int64)
    reversed_m = np.array([reverse_bits(m, k) for m in range(size)], dtype=np.int64)
    masked = n[:, None] & reversed_m[None, :]
    odd = np.zeros(masked.shape, dtype=np.int64)
    for t in range(k):
        odd ^= (masked >> t) & 1
    matrix = 1 - 2 * odd
    matrix.setflags(write=False)
    return matrix


def walsh_matrix(k):
    """The k-th Walsh matrix, entries W_n(Delta^(k)_m).

    Returns
    -------
    matrix: `numpy.ndarray`
        Read-only int64 array of shape (2**k, 2**k) with entries +1/-1.
    """
    if k < 0 or k > MAX_MATRIX_RANK:
        raise ValueError(f'Walsh matrices are only materialized for 0 <= k <= {MAX_MATRIX_RANK}, '
                         f'use walsh_on_cube for single entries')
    return _matrix(k)


def walsh_matrix_dd(k, d):
    """d-dimensional Walsh matrix: rows n and columns m flattened in
    lexicographic order, entries W_n(Delta^(k)_m)."""
    if (1 << (k * d)) > (1 << MAX_MATRIX_RANK):
        raise ValueError(f'The {d}-dimensional Walsh matrix of rank {k} is too large')
    result = np.ones((1, 1), dtype=np.int64)
    for _ in range(d):
        result = np.kron(result, walsh_matrix(k))
    return result


def walsh_matrix_entry(n, m, k):
    """W^(k)_{n,m} for d-vectors n, m; W^(0) is the 1x1 matrix [+1]."""
    return walsh_on_cube(n, DyadicCube(k, m))


def scaling_identity(ms, p, m, mprime):
    """Both sides of W_{2^ms p}(Delta^(2ms)_{2^ms m + m'}) = W_p(Delta^(ms)_{m'})."""
    p = tuple(p)
    left = walsh_on_cube([pj << ms for pj in p],
                         DyadicCube(2 * ms, [(a << ms) + b for a, b in zip(m, mprime)]))
    right = walsh_on_cube(p, DyadicCube(ms, mprime))
    return left, right


def _kernel_power_of_two(k, value, depth):
    """D_{2^k} at a digit string: 2^k on the zero cube of rank k, else 0."""
    if k > depth:
        raise ValueError(f'D_{1 << k} is not determined by {depth} digits')
    return 0 if value >> (depth - k) else 1 << k


def dirichlet_digits(N, value, depth, method='decomposition'):
    """D_N at a digit string, by the dyadic decomposition or by direct summation."""
    if N < 1:
        raise ValueError(f'Dirichlet kernels need N >= 1, got {N}')
    if N > (1 << depth):
        raise ValueError(f'D_{N} is not determined by {depth} digits')
    if method == 'direct':
        return sum(walsh_sign_1d(n, value, depth) for n in range(N))
    elif method != 'decomposition':
        raise ValueError(f'Unknown method: {method}')

    # D_N = sum_j R_{k_1} ... R_{k_{j-1}} D_{2^{k_j}}, k_1 > k_2 > ...
    total = 0
    sign = 1
    for k in range(N.bit_length() - 1, -1, -1):
        if not (N >> k) & 1:
            continue
        total += sign * _kernel_power_of_two(k, value, depth)
        if k < depth and (value >> (depth - 1 - k)) & 1:
            sign = -sign
    return total


def dirichlet_1d(N, x, method='decomposition'):
    """One-dimensional Dirichlet kernel D_N = sum_{n<N} W_n.

    Parameters
    ----------
    N: int
        Positive kernel order; at most 2**rank when `x` is a cube.
    x: `DyadicPoint` or `DyadicCube` of dimension 1
    method: str
        "decomposition" (Eq. D_N = D_{2^k} + R_k D_m, unrolled) or
        "direct" (summation of Walsh functions).

    Returns
    -------
    value: int
    """
    values, depth = _digits(x)
    if len(values) != 1:
        raise ValueError('dirichlet_1d needs a one-dimensional argument')
    return dirichlet_digits(N, values[0], depth, method)


def dirichlet_dd(N, x, method='decomposition'):
    """d-dimensional Dirichlet kernel, the product of one-dimensional kernels.

    With method="direct" the kernel is summed as sum_{n<N} W_n without
    using the product structure.
    """
    values, depth = _digits(x)
    N = as_index(N, len(values))
    if any(v < 1 for v in N):
        raise ValueError(f'Dirichlet kernels need positive orders, got {N}')
    if method == 'direct':
        for v in N:
            if v > (1 << depth):
                raise ValueError(f'D_{N} is not determined by {depth} digits')
        total = 0
        for n in np.ndindex(*N):
            sign = 1
            for nj, vj in zip(n, values):
                sign *= walsh_sign_1d(int(nj), vj, depth)
            total += sign
        return total
    result = 1
    for Nj, vj in zip(N, values):
        result *= dirichlet_digits(Nj, vj, depth, method)
        if result == 0:
            break
    return result
