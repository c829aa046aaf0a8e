"""
dyadicwalsh.quasimeasure
========================

Quasimeasures on the dyadic cubes of G^d: lazily evaluated, memoized set
functions satisfying tau(Delta) = sum of tau over the 2^d children.

This module provides the `Quasimeasure` class, the tau_F construction from
a closed set given by a cube-intersection predicate, restriction to a
cube, Fourier-Walsh coefficients (global and local), the series to
quasimeasure map, partial sums through the Dirichlet kernel and a finite
depth approximation of the support.

Usage:

    >>> tau = haar_measure(2)
    >>> tau(DyadicCube(3, (1, 5)))
    DyadicRational(1, -6)
    >>> fourier_coefficient(tau, (0, 0), 2)
    DyadicRational(1)
"""
import itertools
import logging
import threading

import numpy as np

from dyadicwalsh.dyadic import (ONE, ZERO, DyadicCube, DyadicRational, all_cubes,
                                translate_cube)
from dyadicwalsh.utils import as_index
from dyadicwalsh.walsh import dirichlet_digits, walsh_matrix, walsh_on_cube, walsh_value

MAX_ENUMERATION = 1 << 22


class Quasimeasure:
    """Lazily evaluated quasimeasure with a memo cache keyed by cube.

    Parameters
    ----------
    d: int
        Dimension of the group.
    rule: callable
        Maps a `DyadicCube` to a `DyadicRational`. It receives the
        quasimeasure itself as second argument so that recursive rules
        go through the cache.
    max_rank: int or None
        Largest rank the rule is defined for, `None` when unbounded.
    name: str
    """

    def __init__(self, d, rule, max_rank=None, name='tau'):
        self.d = d
        self.rule = rule
        self.max_rank = max_rank
        self.name = name
        self._cache = {}
        self._lock = threading.Lock()

    def __call__(self, cube):
        return self.value(cube)

    def value(self, cube):
        if cube.dimension != self.d:
            raise ValueError(f'{self.name} is {self.d}-dimensional, got a cube of dimension {cube.dimension}')
        self.check_rank(cube.rank)
        key = (cube.rank, cube.index)
        try:
            return self._cache[key]
        except KeyError:
            pass
        result = self.rule(cube, self)
        with self._lock:
            self._cache.setdefault(key, result)
        return result

    def check_rank(self, k):
        if self.max_rank is not None and k > self.max_rank:
            raise ValueError(f'{self.name} is only defined up to rank {self.max_rank}, got {k}')

    def check_additivity(self, max_rank):
        """Cubes of rank < max_rank where additivity fails."""
        violations = []
        for k in range(max_rank):
            for cube in all_cubes(self.d, k):
                total = sum((self(child) for child in cube.children()), ZERO)
                if total != self(cube):
                    violations.append(cube)
        if violations:
            logging.info(f'{self.name}: additivity fails on {len(violations)} cubes')
        return violations

    def cache_size(self):
        return len(self._cache)

    def __repr__(self):
        return f"<Quasimeasure '{self.name}'\n\td={self.d}\n\tmax_rank={self.max_rank}>"

    def __str__(self):
        return self.__repr__()


class CoefficientOracle:
    """Coefficients a_n of a multiple Walsh series.

    Parameters
    ----------
    d: int
    rule: callable
        Maps a multi-index tuple to a `DyadicRational`.
    block_exponents: iterable of int or None
        When given, the support is declared to be the box n < 2^low_rank 1
        together with the dyadic blocks B_k = {2^k 1 <= n < 2^{k+1} 1} for
        these k. `None` declares a dense support.
    low_rank: int
        Rank of the low box; 0 makes the box {0}.
    horizon: int or None
        The declared support is only known to be complete for orders N
        with min N <= horizon.
    description: str
    """

    def __init__(self, d, rule, block_exponents=None, low_rank=0, horizon=None, description=''):
        self.d = d
        self.rule = rule
        self.low_rank = low_rank
        self.horizon = horizon
        if block_exponents is None:
            self.block_exponents = None
        else:
            self.block_exponents = tuple(sorted(e for e in block_exponents if e >= low_rank))
        self.description = description

    def __call__(self, n):
        return self.rule(as_index(n, self.d))

    @property
    def is_block_supported(self):
        return self.block_exponents is not None

    def check_horizon(self, bounds):
        if self.horizon is not None and min(bounds) > self.horizon:
            raise ValueError(f'Orders {bounds} reach beyond the declared support '
                             f'(complete up to {self.horizon})')

    def support_pieces(self, bounds):
        """Per-coordinate ranges of each support piece below `bounds`.

        Returns a list of d-lists of ranges; the pieces are disjoint and
        the low box comes first.
        """
        if not self.is_block_supported:
            raise ValueError(f'{self} has no block structure')
        bounds = as_index(bounds, self.d)
        self.check_horizon(bounds)
        pieces = []
        box = [range(min(b, 1 << self.low_rank)) for b in bounds]
        if all(box):
            pieces.append(box)
        for e in self.block_exponents:
            axes = [range(1 << e, min(b, 1 << (e + 1))) for b in bounds]
            if all(axes):
                pieces.append(axes)
        return pieces

    def support_below(self, bounds, max_terms=MAX_ENUMERATION):
        """Multi-indices of the declared support with n < bounds componentwise."""
        bounds = as_index(bounds, self.d)
        if not self.is_block_supported:
            pieces = [[range(b) for b in bounds]]
        else:
            pieces = self.support_pieces(bounds)
        total = sum(int(np.prod([len(r) for r in axes], dtype=object)) for axes in pieces)
        if total > max_terms:
            raise ValueError(f'Support below {bounds} has {total} terms, more than {max_terms}')
        return itertools.chain.from_iterable(itertools.product(*axes) for axes in pieces)

    def __repr__(self):
        return f"<CoefficientOracle d={self.d} support='{self.description}'>"


def haar_measure(d):
    return Quasimeasure(d, lambda cube, _: cube.measure(), name='mu')


def tau_from_closed_set(meets, d, name='tau_F'):
    """The quasimeasure tau_F of a nonempty closed set F.

    tau_F(G^d) = 1 and every child cube meeting F receives the value of its
    parent divided by the number M of children of that parent meeting F.

    Parameters
    ----------
    meets: callable
        `meets(cube)` is True iff the cube intersects F. It must be true on
        the whole group, monotone and consistent; violations are reported
        while evaluating.
    d: int

    Returns
    -------
    tau: `Quasimeasure`
    """
    if not meets(DyadicCube.whole(d)):
        raise ValueError('The closed set is empty: it does not meet the whole group')

    def rule(cube, tau):
        if cube.rank == 0:
            return ONE
        parent = cube.parent()
        parent_value = tau(parent)
        if not parent_value:
            if meets(cube):
                raise RuntimeError(f'Inconsistent predicate: {cube} meets the set but its parent does not')
            return ZERO
        hits = [child for child in parent.children() if meets(child)]
        if not hits:
            raise RuntimeError(f'Inconsistent predicate: {parent} meets the set but none of its children do')
        if cube not in hits:
            return ZERO
        return parent_value.divide(len(hits))

    return Quasimeasure(d, rule, name=name)


def point_mass(g):
    """tau_F for the one-point set F = {g}, defined up to the depth of g."""
    return Quasimeasure(g.dimension,
                        tau_from_closed_set(lambda cube: cube.contains_point(g), g.dimension).rule,
                        max_rank=g.depth,
                        name='delta')


def restrict(tau, window):
    """tau restricted to a cube: Delta -> tau(window & Delta)."""

    def rule(cube, _):
        if window.contains_cube(cube):
            return tau(cube)
        elif cube.contains_cube(window):
            return tau(window)
        return ZERO

    return Quasimeasure(tau.d, rule, max_rank=tau.max_rank, name=f'{tau.name}|{window.rank}:{window.index}')


def _check_coefficient_rank(tau, n, k):
    tau.check_rank(k)
    if any(v >> k for v in n):
        raise ValueError(f'Index {n} needs rank above {k}')


def fourier_coefficient(tau, n, k):
    """Fourier-Walsh coefficient sum_{m < 2^k 1} W_n(Delta^(k)_m) tau(Delta^(k)_m).

    The value does not depend on k as long as n < 2^k 1.
    """
    return local_coefficient(tau, n, DyadicCube.whole(tau.d), k)


def local_coefficient(tau, n, cube, k):
    """Local coefficient: the integral of W_n over `cube` against tau,
    summed over the rank-k subcubes of `cube`.
    """
    n = as_index(n, tau.d)
    _check_coefficient_rank(tau, n, k)
    if cube.rank > k:
        raise ValueError(f'Summation rank {k} is coarser than the cube rank {cube.rank}')
    if (k - cube.rank) * tau.d > MAX_ENUMERATION.bit_length() - 1:
        raise ValueError(f'Too many rank-{k} subcubes below a rank-{cube.rank} cube')
    total = ZERO
    for sub in cube.subcubes(k):
        value = tau(sub)
        if value:
            total = total + value * walsh_on_cube(n, sub)
    return total


def coefficient_table(tau, k):
    """All Fourier-Walsh coefficients with n < 2^k 1 at once.

    Returns
    -------
    table: `numpy.ndarray`
        Object array of shape (2^k,)*d holding DyadicRationals, indexed by n.
    """
    tau.check_rank(k)
    size = 1 << (k * tau.d)
    if size > MAX_ENUMERATION:
        raise ValueError(f'{size} cubes at rank {k} are too many to tabulate')
    values = [tau(cube) for cube in all_cubes(tau.d, k)]
    nonzero = [v.exponent for v in values if v]
    shape = (1 << k,) * tau.d
    if not nonzero:
        return np.full(shape, ZERO, dtype=object)
    base = min(nonzero)
    grid = np.array([v.mantissa << (v.exponent - base) if v else 0 for v in values],
                    dtype=object).reshape(shape)
    matrix = walsh_matrix(k).astype(object)
    for axis in range(tau.d):
        grid = np.moveaxis(np.tensordot(matrix, grid, axes=([1], [axis])), 0, axis)
    result = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        result[idx] = DyadicRational(grid[idx], base)
    return result


def series_value_on_cube(coeffs, cube, max_terms=MAX_ENUMERATION):
    """Quasimeasure value 2^{-kd} sum_{n < 2^k 1} a_n W_n(Delta) generated by a series."""
    k = cube.rank
    total = ZERO
    for n in coeffs.support_below((1 << k,) * cube.dimension, max_terms=max_terms):
        a = coeffs(n)
        if a:
            total = total + a * walsh_on_cube(n, cube)
    return total.scale(-k * cube.dimension)


def quasimeasure_from_series(coeffs, name='tau_a'):
    """The quasimeasure generated by a coefficient oracle."""
    return Quasimeasure(coeffs.d, lambda cube, _: series_value_on_cube(coeffs, cube), name=name)


def _kernel_entries(N, k):
    """Per coordinate, the pairs (m, D_N(Delta^(k)_m)) with nonzero kernel value."""
    entries = []
    for Nj in N:
        row = [(m, dirichlet_digits(Nj, m, k)) for m in range(1 << k)]
        entries.append([(m, v) for m, v in row if v])
    return entries


def partial_sum(tau, N, g, k, side='tau'):
    """S_N(g) of the series generating tau, by the integral representation.

    Parameters
    ----------
    tau: `Quasimeasure`
    N: tuple of int
        Positive orders with N <= 2^k 1.
    g: `DyadicPoint`
        Point of depth at least k.
    k: int
        Summation rank.
    side: str
        "tau": sum_m tau(g + Delta_m) D_N(Delta_m);
        "kernel": sum_m tau(Delta_m) D_N(g + Delta_m).

    Returns
    -------
    value: `DyadicRational`
    """
    N = as_index(N, tau.d)
    tau.check_rank(k)
    if any(v < 1 or v > (1 << k) for v in N):
        raise ValueError(f'Partial sum order {N} must satisfy 1 <= N <= 2^{k}')
    if g.depth < k:
        raise ValueError(f'Point depth {g.depth} is below the summation rank {k}')
    total = ZERO
    if side == 'tau':
        entries = _kernel_entries(N, k)
        for combo in itertools.product(*entries):
            kernel = 1
            for _, v in combo:
                kernel *= v
            cube = translate_cube(DyadicCube(k, [m for m, _ in combo]), g)
            value = tau(cube)
            if value:
                total = total + value * kernel
    elif side == 'kernel':
        prefix = g.prefix(k)
        for cube in all_cubes(tau.d, k):
            value = tau(cube)
            if not value:
                continue
            kernel = 1
            for Nj, mj, pj in zip(N, cube.index, prefix):
                kernel *= dirichlet_digits(Nj, mj ^ pj, k)
                if kernel == 0:
                    break
            if kernel:
                total = total + value * kernel
    else:
        raise ValueError(f'Unknown side: {side}')
    return total


def partial_sum_from_coefficients(coeffs, N, g, max_terms=MAX_ENUMERATION):
    """S_N(g) = sum_{n<N} a_n W_n(g) by direct summation."""
    total = ZERO
    for n in coeffs.support_below(N, max_terms=max_terms):
        a = coeffs(n)
        if a:
            total = total + a * walsh_value(n, g)
    return total


def vanishes_below(tau, cube, scan_rank):
    """True iff tau is zero on every subcube of `cube` down to `scan_rank`."""
    if scan_rank < cube.rank:
        raise ValueError(f'Scan rank {scan_rank} is coarser than {cube.rank}')
    return all(not tau(sub) for sub in cube.subcubes(scan_rank))


def vanishing_rank(tau, g, scan_rank):
    """Smallest w such that tau vanishes below the rank-w cube containing g.

    Returns `None` when no such w <= scan_rank exists, i.e. when g lies in
    the depth-`scan_rank` approximation of the support.
    """
    best = None
    for w in range(scan_rank, -1, -1):
        if vanishes_below(tau, DyadicCube(w, g.prefix(w)), scan_rank):
            best = w
        else:
            break
    return best


def support_cubes(tau, probe_rank, scan_rank):
    """Rank-probe_rank cubes with a nonzero subcube of rank <= scan_rank.

    A finite depth over-approximation of supp tau.
    """
    if not 0 <= probe_rank <= scan_rank:
        raise ValueError(f'Need 0 <= probe_rank <= scan_rank, got {probe_rank}, {scan_rank}')
    tau.check_rank(scan_rank)
    result = []
    for cube in all_cubes(tau.d, probe_rank):
        if any(tau(sub) for k in range(probe_rank, scan_rank + 1) for sub in cube.subcubes(k)):
            result.append(cube)
    logging.debug(f'{tau.name}: {len(result)} support cubes at rank {probe_rank}')
    return result
