"""
dyadicwalsh.convergence
=======================

Partial sums of block-supported Walsh series in the rectangular, cubic,
lambda and iterated modes, the zero-sum property off the support, and
the tail estimate for the null-series of `dyadicwalsh.mset`.

`block_partial_sum` enumerates every term and is the reference. The
factorized evaluator sums a whole block B_{2m_s} in at most 2^d terms:
with n = 2^{2m_s} 1 + 2^{m_s} p + q, the sum over q of a complete row
collapses by orthogonality of the Walsh matrix and the sum over a partial
row is a Dirichlet kernel.
"""
import itertools
import logging
from collections import namedtuple
from fractions import Fraction

from dyadicwalsh.dyadic import ZERO, DyadicCube, DyadicRational
from dyadicwalsh.mset import (check_window, coefficient_oracle, cube_in_F_tilde, stage_scale,
                              stage_value)
from dyadicwalsh.quasimeasure import MAX_ENUMERATION, partial_sum, vanishing_rank
from dyadicwalsh.report import SKIPPED, CheckReport
from dyadicwalsh.utils import as_index
from dyadicwalsh.walsh import dirichlet_digits, rademacher, walsh_sign_1d, walsh_value

ConvergenceRecord = namedtuple('ConvergenceRecord', ['N', 'mode', 'value', 'stage'])
TailSplit = namedtuple('TailSplit', ['M', 'L', 'K', 'N_prime'])


def _require_blocks(coeffs):
    if not coeffs.is_block_supported:
        raise ValueError(f'{coeffs} does not declare a block support')


def block_partial_sum(coeffs, N, g, max_terms=MAX_ENUMERATION):
    """S_N(g) = sum_{n < N} a_n W_n(g) over the declared block support.

    Parameters
    ----------
    coeffs: `dyadicwalsh.quasimeasure.CoefficientOracle`
        A block-supported oracle.
    N: tuple of int
    g: `DyadicPoint`

    Returns
    -------
    value: `DyadicRational`
    """
    _require_blocks(coeffs)
    N = as_index(N, coeffs.d)
    total = ZERO
    for n in coeffs.support_below(N, max_terms=max_terms):
        a = coeffs(n)
        if a:
            total = total + a * walsh_value(n, g)
    return total


def _full_bounds(coeffs):
    top = max([1 << coeffs.low_rank] + [1 << (e + 1) for e in coeffs.block_exponents])
    return (top,) * coeffs.d


def iterated_partial_sum(coeffs, order, outer_limit, g):
    """Iterated sum over the coordinates in `order`, outermost first.

    The outermost coordinate runs below `outer_limit`, every inner sum
    is complete over the declared support.

    Parameters
    ----------
    coeffs: `CoefficientOracle`
        Must be block supported so that inner sums are finite.
    order: tuple of int
        A permutation of 0..d-1.
    outer_limit: int
    g: `DyadicPoint`
    """
    _require_blocks(coeffs)
    d = coeffs.d
    order = tuple(order)
    if sorted(order) != list(range(d)):
        raise ValueError(f'{order} is not an ordering of the coordinates 0..{d - 1}')
    bounds = list(_full_bounds(coeffs))
    bounds[order[0]] = min(bounds[order[0]], outer_limit)
    if outer_limit < 1:
        return ZERO
    pieces = coeffs.support_pieces(bounds)

    def nested(level, n, alive):
        j = order[level]
        values = sorted(set(itertools.chain.from_iterable(axes[j] for axes in alive)))
        total = ZERO
        for v in values:
            n[j] = v
            inner = [axes for axes in alive if v in axes[j]]
            if level == d - 1:
                a = coeffs(tuple(n))
                if a:
                    total = total + a * walsh_value(n, g)
            else:
                total = total + nested(level + 1, n, inner)
        return total

    return nested(0, [0] * d, pieces)


def lambda_admissible(N, lam):
    """max_{j,k} N^j / N^k <= lam, compared exactly."""
    N = as_index(N)
    if any(v < 1 for v in N):
        raise ValueError(f'Orders must be positive, got {N}')
    return Fraction(max(N), min(N)) <= Fraction(lam)


def zero_sum_check(tau, g, w, M_range):
    """S_{2^w M}(g) = 0 for every M, provided tau vanishes beneath the rank-w cube of g.

    Partial sums are evaluated through the quasimeasure at the smallest
    rank that resolves the largest order.

    Returns
    -------
    report: `dyadicwalsh.report.CheckReport`
        Skipped when tau does not vanish beneath the rank-w cube of g.
    """
    M_range = [as_index(M, tau.d) for M in M_range]
    if not M_range:
        raise ValueError('No orders to check')
    top = max(max(M) for M in M_range) << w
    k = max(w, (top - 1).bit_length())
    if g.depth < k:
        raise ValueError(f'Point depth {g.depth} is below the needed rank {k}')
    minimal = vanishing_rank(tau, g, k)
    details = {'w': w, 'rank': k, 'minimal_w': minimal}
    if minimal is None or minimal > w:
        logging.debug(f'{g} is inside the support at depth {w}')
        return CheckReport('zero_sum', SKIPPED, details)
    failures = []
    for M in M_range:
        N = tuple(v << w for v in M)
        value = partial_sum(tau, N, g, k)
        if value:
            failures.append((N, value))
    return CheckReport.from_failures('zero_sum', failures, details)


def _check_tail_stage(s):
    if s < 2:
        raise ValueError(f'The tail estimate starts at stage 2, got {s}')


def tail_bound(s, d):
    """2^{d + s - m_s/2}, the bound on the stage-s tail off the set."""
    _check_tail_stage(s)
    return DyadicRational(1, d + s - stage_value(s) // 2)


def v_part_bound(s, d):
    """2^{d + m_s/2 + (d-1) m_s}, the bound on the number of directly summed indices."""
    _check_tail_stage(s)
    ms = stage_value(s)
    return 1 << (d + ms // 2 + (d - 1) * ms)


def tail_split(N, s):
    """N = 2^{2m_s} 1 + 2^{m_s} M + 2^{m_s/2} L + K with the truncated order N'."""
    _check_tail_stage(s)
    N = as_index(N)
    ms = stage_value(s)
    half = ms // 2
    base = 1 << (2 * ms)
    if any(not base <= v < 2 * base for v in N):
        raise ValueError(f'{N} is not in B_{2 * ms}')
    M, L, K, prime = [], [], [], []
    for v in N:
        Mj, rest = divmod(v - base, 1 << ms)
        Lj, Kj = divmod(rest, 1 << half)
        M.append(Mj)
        L.append(Lj)
        K.append(Kj)
        prime.append(base + (Mj << ms) + (Lj << half))
    return TailSplit(tuple(M), tuple(L), tuple(K), tuple(prime))


def block_stage(N, partial=True):
    """Stage s with 2^{2m_s} <= N^j <= 2^{2m_s + 1} for all j, else None.

    With partial=False the upper bound is strict.
    """
    s = 1
    while True:
        ms = stage_value(s)
        low = 1 << (2 * ms)
        if low > max(N):
            return None
        high = low << 1
        if all(low <= v < high or (partial and v == high) for v in N):
            return s
        s += 1


def factorized_block_sum(cfg, N, g, window=None, s=None):
    """sum_{n in B_{2m_s}, n < N} tau^_n W_n(g) without enumerating the block.

    Parameters
    ----------
    cfg: `dyadicwalsh.mset.MSetConfig`
        With a product permutation family.
    N: tuple of int
        2^{2m_s} <= N^j <= 2^{2m_s + 1}.
    g: `DyadicPoint`
        Of depth at least 2m_s + 1.
    window: `DyadicCube`, optional
        Rank-m_{s0} restriction window, needs s > s0.
    s: int, optional
        The stage, located from N when omitted.

    Returns
    -------
    value: `DyadicRational`
    """
    if not cfg.permutation.is_product:
        raise ValueError('The factorized evaluator needs coordinatewise permutations')
    N = as_index(N, cfg.d)
    if s is None:
        s = block_stage(N)
        if s is None:
            raise ValueError(f'{N} is not in any block B_(2m_s)')
    cfg.check_stage(s)
    ms = stage_value(s)
    base = 1 << (2 * ms)
    if any(not base <= v <= 2 * base for v in N):
        raise ValueError(f'{N} is not in B_{2 * ms}')
    if g.depth < 2 * ms + 1:
        raise ValueError(f'Stage {s} needs depth {2 * ms + 1}, got {g.depth}')
    if window is not None and check_window(window, cfg) >= s:
        raise ValueError(f'Stage {s} is not beyond the window stage')

    a = g.prefix(ms)
    b = tuple(v & ((1 << ms) - 1) for v in g.prefix(2 * ms))
    full = 1 << ms
    options = []
    for j, Nj in enumerate(N):
        P, Q = divmod(Nj - base, full)
        opts = {}
        image = cfg.permutation.forward_1d(s, j, a[j])
        if image < P:
            opts[a[j]] = full * walsh_sign_1d(image, b[j], ms)
        if P < full and Q:
            r = cfg.permutation.inverse_1d(s, j, P)
            kernel = dirichlet_digits(Q, r ^ a[j], ms)
            if kernel:
                opts[r] = opts.get(r, 0) + kernel * walsh_sign_1d(P, b[j], ms)
        opts = [(r, f) for r, f in opts.items() if f]
        if not opts:
            return ZERO
        options.append(opts)

    total = 0
    for combo in itertools.product(*options):
        cube = DyadicCube(ms, [r for r, _ in combo])
        if window is not None and not window.contains_cube(cube):
            continue
        if not cube_in_F_tilde(cube, s - 1, cfg):
            continue
        product = 1
        for _, f in combo:
            product *= f
        total += product
    if not total:
        return ZERO
    sign = rademacher((2 * ms,) * cfg.d, g)
    return stage_scale(s, cfg.d) * (sign * total)


def _low_box_sum(cfg, N, g, window):
    """Sum over n < min(N, 2^r 1) of the restricted series, r the window rank."""
    tau_w = cfg.tau(window)
    if not tau_w:
        return ZERO
    r = window.rank
    kernel = 1
    for Nj, wj, pj in zip(N, window.index, g.prefix(r)):
        kernel *= dirichlet_digits(min(Nj, 1 << r), wj ^ pj, r)
        if not kernel:
            return ZERO
    return tau_w * kernel


def series_partial_sum(cfg, N, g, window=None, oracle=None):
    """S_N(g) of the null-series of `cfg`, block by block.

    Blocks are summed with `factorized_block_sum`; for a restriction to a
    rank-m_{s0} window the low box is a Dirichlet kernel and block s0 is
    enumerated through the coefficient oracle.
    """
    N = as_index(N, cfg.d)
    if any(v < 1 for v in N):
        raise ValueError(f'Orders must be positive, got {N}')
    first = 1
    total = ZERO
    if window is None:
        total = DyadicRational(1)
    else:
        first = check_window(window, cfg)
        total = _low_box_sum(cfg, N, g, window)
    s = first
    while True:
        ms = stage_value(s)
        base = 1 << (2 * ms)
        if min(N) <= base:
            break
        clipped = tuple(min(v, 2 * base) for v in N)
        if window is not None and s == first:
            if oracle is None:
                oracle = coefficient_oracle(cfg, window)
            axes = [range(base, v) for v in clipped]
            for n in itertools.product(*axes):
                a = oracle(n)
                if a:
                    total = total + a * walsh_value(n, g)
        else:
            total = total + factorized_block_sum(cfg, clipped, g, window=window, s=s)
        s += 1
    return total


def tail_term(cfg, N, g):
    """E = S_N(g) - S_{N'}(g) for N in B_{2m_s}, s >= 2."""
    N = as_index(N, cfg.d)
    s = block_stage(N, partial=False)
    if s is None:
        raise ValueError(f'{N} is not in any block B_(2m_s)')
    split = tail_split(N, s)
    return series_partial_sum(cfg, N, g) - series_partial_sum(cfg, split.N_prime, g)


def _record(N, mode, value):
    return ConvergenceRecord(tuple(N), mode, value, block_stage(N, partial=False))


def sweep_values(s, count=8):
    """Orders 2^{2m_s} + k 2^{2m_s} / count, k = 0..count, deduplicated."""
    base = 1 << (2 * stage_value(s))
    return sorted({base + (k * base) // count for k in range(count + 1)})


def convergence_records(cfg, g, s=None, lam=2, orders=None, window=None, count=8):
    """ConvergenceRecords of S_N(g) along the standard paths through B_{2m_s}.

    The rectangular sweep covers the grid of `sweep_values` in every
    coordinate, the cubic path its diagonal, the lambda fan pairs v with
    floor(lam v) clipped to the block. Iterated records use `orders`
    (default: every ordering) with the outermost coordinate truncated
    at v; they are only produced when the block can be enumerated.

    Returns
    -------
    records: list of `ConvergenceRecord`
    """
    if s is None:
        s = min(cfg.S, 2)
    cfg.check_stage(s)
    values = sweep_values(s, count)
    top = values[-1]
    records = []
    for N in itertools.product(values, repeat=cfg.d):
        records.append(_record(N, 'rectangular', series_partial_sum(cfg, N, g, window)))
    for v in values:
        records.append(_record((v,) * cfg.d, 'cubic', series_partial_sum(cfg, (v,) * cfg.d, g, window)))
    lam = Fraction(lam)
    for v in values:
        N = (v,) + (min(top, int(lam * v)),) * (cfg.d - 1)
        if lambda_admissible(N, lam):
            records.append(_record(N, f'lambda({lam})', series_partial_sum(cfg, N, g, window)))

    oracle = coefficient_oracle(cfg, window)
    size = 1 << (2 * cfg.d * stage_value(cfg.S))
    if size > MAX_ENUMERATION:
        logging.info(f'Skipping iterated records: B_{2 * stage_value(cfg.S)} has {size} indices')
        return records
    if orders is None:
        orders = list(itertools.permutations(range(cfg.d)))
    full = _full_bounds(oracle)
    for order in orders:
        tag = f'iterated({",".join(str(j) for j in order)})'
        for v in values:
            N = list(full)
            N[order[0]] = v
            records.append(_record(N, tag, iterated_partial_sum(oracle, order, v, g)))
    return records
