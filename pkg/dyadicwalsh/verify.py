"""
dyadicwalsh.verify
==================

Verification suites run by ``dyadicwalsh --mode verify``. Every suite
compares a closed form or a fast path with a brute-force evaluation,
exactly, and returns a list of `dyadicwalsh.report.CheckReport`.

Sizes follow the configuration: a suite whose enumeration would exceed
`VERIFY_LIMIT` elementary evaluations reports "skipped" instead.
"""
import itertools
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from dyadicwalsh.convergence import (block_partial_sum, factorized_block_sum,
                                     iterated_partial_sum, series_partial_sum, tail_bound,
                                     zero_sum_check)
from dyadicwalsh.dyadic import DyadicCube, DyadicPoint, DyadicRational, all_cubes
from dyadicwalsh.mset import (F_tilde_cubes, MSetConfig, ProductPermutation,
                              block_coefficient_extremes, closed_form_coefficient,
                              closed_form_local_coefficient, coefficient_oracle, cube_in_F_tilde,
                              cube_meets_F, in_F_tilde, measure_integral_over_Fs, mu_F_tilde,
                              stage_value)
from dyadicwalsh.quasimeasure import (coefficient_table, local_coefficient, restrict,
                                      vanishing_rank)
from dyadicwalsh.report import FAILED, PASSED, SKIPPED, CheckReport, SuiteResult
from dyadicwalsh.uset import (check_property_p, dirichlet_difference_check, lambda_ratio,
                              symmetric_index_sequence, symmetric_tau, u2_contradiction_demo,
                              u_integral)
from dyadicwalsh.walsh import (dirichlet_dd, dirichlet_digits, scaling_identity, walsh_matrix,
                               walsh_matrix_dd)

VERIFY_LIMIT = 1 << 21
OUTSIDE_POINTS = 100


class VerifyContext:
    """Inputs shared by the suites.

    Parameters
    ----------
    cfg: `dyadicwalsh.mset.MSetConfig`
    depth: int
        Depth of the random points.
    seed: int
    points: int
        Number of random points per sampled check.
    outside_points: int
        Number of points off the set sampled by the zero-sum and tail-bound
        suites.
    """

    def __init__(self, cfg, depth, seed=0, points=4, outside_points=OUTSIDE_POINTS):
        self.cfg = cfg
        self.depth = depth
        self.seed = seed
        self.points = points
        self.outside_points = outside_points

    @property
    def d(self):
        return self.cfg.d

    @property
    def top_stage(self):
        """Largest stage whose brute-force checks are run."""
        return min(self.cfg.S, 2)

    def rng(self, name):
        return random.Random(f'{self.seed}:{name}')

    def fits(self, count):
        return count <= VERIFY_LIMIT


def _skipped(name, reason):
    logging.info(f'{name}: skipped, {reason}')
    return CheckReport(name, SKIPPED, {'reason': reason})


def walsh_suite(ctx):
    reports = []
    failures = []
    for k in range(0, 9):
        W = walsh_matrix(k)
        if not np.array_equal(W @ W, (1 << k) * np.eye(1 << k, dtype=np.int64)):
            failures.append(k)
    reports.append(CheckReport.from_failures('walsh_orthogonality', failures))

    failures = []
    for k in range(0, 5):
        if (1 << (k * ctx.d)) > 1 << 10:
            break
        W = walsh_matrix_dd(k, ctx.d)
        size = 1 << (k * ctx.d)
        if not np.array_equal(W @ W.T, size * np.eye(size, dtype=np.int64)):
            failures.append(k)
    reports.append(CheckReport.from_failures('walsh_orthogonality_dd', failures, {'d': ctx.d}))

    failures = []
    checked = []
    for ms in (1, 2, 3):
        axis = list(itertools.product(range(1 << ms), repeat=ctx.d))
        if not ctx.fits(len(axis) ** 3):
            logging.info(f'scaling_identity: m_s = {ms} skipped at d = {ctx.d}')
            continue
        checked.append(ms)
        for p, m, mprime in itertools.product(axis, axis, axis):
            left, right = scaling_identity(ms, p, m, mprime)
            if left != right:
                failures.append((ms, p, m, mprime))
    reports.append(CheckReport.from_failures('scaling_identity', failures, {'ms': checked}))
    return reports


def dirichlet_suite(ctx):
    failures = []
    k = 8
    direct = np.cumsum(walsh_matrix(k), axis=0)
    for N in range(1, (1 << k) + 1):
        for m in range(1 << k):
            if dirichlet_digits(N, m, k) != direct[N - 1, m]:
                failures.append((N, m))
    reports = [CheckReport.from_failures('dirichlet_decomposition_1d', failures)]

    rng = ctx.rng('dirichlet')
    failures = []
    points = [DyadicPoint.random(ctx.d, 4, rng) for _ in range(ctx.points)]
    orders = list(itertools.product(range(1, 17), repeat=ctx.d))
    if not ctx.fits(len(orders) * len(points) * 16 ** ctx.d):
        return reports + [_skipped('dirichlet_decomposition_dd', 'too many orders')]
    for N in orders:
        for g in points:
            if dirichlet_dd(N, g) != dirichlet_dd(N, g, method='direct'):
                failures.append((N, g))
    reports.append(CheckReport.from_failures('dirichlet_decomposition_dd', failures))
    return reports


def additivity_suite(ctx):
    cfg = ctx.cfg
    max_rank = max(1, 12 // ctx.d)
    window = next(c for c in all_cubes(ctx.d, stage_value(ctx.top_stage))
                  if cube_meets_F(c, cfg))
    seq = symmetric_index_sequence(cfg)
    reports = []
    for name, tau in (('tau_F', cfg.tau),
                      ('tau_F_restricted', restrict(cfg.tau, window)),
                      ('tau_symmetric', symmetric_tau(seq))):
        violations = tau.check_additivity(max_rank)
        reports.append(CheckReport.from_failures(f'additivity_{name}', violations,
                                                 {'max_rank': max_rank}))
    return reports


def _configs(ctx):
    rng = ctx.rng('permutations')
    stages = range(1, ctx.top_stage + 1)
    configs = [ctx.cfg]
    for _ in range(3):
        configs.append(MSetConfig(ctx.d, ctx.cfg.S, ProductPermutation.random(ctx.d, stages, rng)))
    return configs


def coefficient_suite(ctx):
    s = ctx.top_stage
    k = 2 * stage_value(s) + 1
    if not ctx.fits(4 << (k * ctx.d)):
        return [_skipped('closed_form_coefficients', f'rank {k} is too fine')]
    failures = []
    for cfg in _configs(ctx):
        table = coefficient_table(cfg.tau, k)
        for n in np.ndindex(*table.shape):
            if closed_form_coefficient(n, cfg) != table[n]:
                failures.append((cfg.permutation, n))
    return [CheckReport.from_failures('closed_form_coefficients', failures, {'rank': k})]


def _block(s, d):
    ms = stage_value(s)
    return itertools.product(range(1 << (2 * ms), 2 << (2 * ms)), repeat=d)


def _local_tables(tau, cubes, k):
    """Local coefficients n < 2^k 1 on each cube, as coefficient tables of the restrictions."""
    return {c: coefficient_table(restrict(tau, c), k) for c in cubes}


def local_coefficient_suite(ctx):
    s = ctx.top_stage
    ms = stage_value(s)
    k = 2 * ms + 1
    if not ctx.fits(4 << (ctx.d * (ms + k))):
        return [_skipped('closed_form_local_coefficients', f'rank {k} is too fine')]
    cubes = list(all_cubes(ctx.d, ms))
    failures = []
    for cfg in _configs(ctx):
        tables = _local_tables(cfg.tau, cubes, k)
        for c in cubes:
            for n in _block(s, ctx.d):
                if closed_form_local_coefficient(n, c, cfg) != tables[c][n]:
                    failures.append((cfg.permutation, n, c))
    failures_direct = []
    c = cubes[0]
    for n in itertools.islice(_block(s, ctx.d), 0, None, 7):
        if local_coefficient(ctx.cfg.tau, n, c, k) != closed_form_local_coefficient(n, c, ctx.cfg):
            failures_direct.append(n)
    return [CheckReport.from_failures('closed_form_local_coefficients', failures),
            CheckReport.from_failures('local_coefficient_summation', failures_direct)]


def vanishing_suite(ctx):
    cfg = ctx.cfg
    s = ctx.top_stage
    ms = stage_value(s)
    k = 2 * ms + 1
    if not ctx.fits(1 << (2 * ctx.d * k)):
        return [_skipped('local_vanishing', 'block too large')]
    block = set(_block(s, ctx.d))
    cubes = list(all_cubes(ctx.d, ms))
    tables = _local_tables(cfg.tau, cubes, k)
    failures = []
    identity_failures = []
    for n in itertools.product(range(1 << k), repeat=ctx.d):
        low = all(v < (1 << ms) for v in n)
        for c in cubes:
            value = tables[c][n]
            if n not in block and not low and value:
                failures.append((n, c))
            if cube_in_F_tilde(c, s - 1, cfg):
                if measure_integral_over_Fs(n, c, s, cfg) != value.scale(-s):
                    identity_failures.append((n, c))
    return [CheckReport.from_failures('local_vanishing', failures),
            CheckReport.from_failures('measure_integral_identity', identity_failures)]


def set_suite(ctx):
    cfg = ctx.cfg
    reports = []
    failures = []
    for s in range(1, ctx.top_stage + 1):
        if not ctx.fits(1 << (ctx.d * (2 * stage_value(s) + 1))):
            break
        value = mu_F_tilde(s, cfg)
        if value != DyadicRational(1, -s):
            failures.append((s, value))
    reports.append(CheckReport.from_failures('measure_F_tilde', failures))

    failures = []
    for s in range(1, ctx.top_stage + 1):
        ms = stage_value(s)
        if not ctx.fits(1 << (ctx.d * (2 * ms + 1))):
            break
        survivors = [DyadicCube.whole(ctx.d)] if s == 1 else F_tilde_cubes(s - 1, cfg)
        for cube in survivors:
            for sub in cube.subcubes(2 * ms):
                inside = sum(1 for child in sub.children() if cube_in_F_tilde(child, s, cfg))
                if inside != 1 << (ctx.d - 1):
                    failures.append((s, sub, inside))
    reports.append(CheckReport.from_failures('halving_geometry', failures))

    rng = ctx.rng('identity_points')
    identity = MSetConfig(ctx.d, cfg.S)
    depth = 2 * stage_value(ctx.top_stage) + 1
    failures = []
    for _ in range(1000):
        g = DyadicPoint.random(ctx.d, depth, rng)
        cube = DyadicCube(depth, g.coords)
        if in_F_tilde(g, ctx.top_stage, identity) != cube_in_F_tilde(cube, ctx.top_stage, identity):
            failures.append(g)
    reports.append(CheckReport.from_failures('point_cube_agreement', failures))
    return reports


def _outside_points(ctx, rng, count, max_w=None):
    """Random points outside F~ with their vanishing rank."""
    cfg = ctx.cfg
    s = ctx.top_stage
    scan = 2 * stage_value(s) + 1
    depth = max(ctx.depth, scan + 3)
    found = []
    attempts = 0
    while len(found) < count and attempts < 100 * count:
        attempts += 1
        g = DyadicPoint.random(ctx.d, depth, rng)
        if in_F_tilde(g, s, cfg):
            continue
        w = vanishing_rank(cfg.tau, g, scan)
        if w is None or (max_w is not None and w > max_w):
            continue
        found.append((g, w))
    return found


def zero_sum_suite(ctx):
    cfg = ctx.cfg
    rng = ctx.rng('zero_sums')
    M_range = list(itertools.product(range(1, 5), repeat=ctx.d))
    reports = []
    failures = []
    samples = _outside_points(ctx, rng, ctx.outside_points)
    for g, w in samples:
        report = zero_sum_check(cfg.tau, g, w, M_range)
        if not report.passed:
            failures.append((g, w, report.status))
    reports.append(CheckReport.from_failures('zero_sums', failures, {'points': len(samples)}))

    window = next(c for c in all_cubes(ctx.d, stage_value(ctx.top_stage)) if cube_meets_F(c, cfg))
    restricted = restrict(cfg.tau, window)
    failures = []
    checked = 0
    for _ in range(ctx.outside_points):
        g = DyadicPoint.random(ctx.d, max(ctx.depth, window.rank + 3), rng)
        if window.contains_point(g):
            continue
        checked += 1
        report = zero_sum_check(restricted, g, window.rank, M_range)
        if not report.passed:
            failures.append((g, report.status))
    reports.append(CheckReport.from_failures('zero_sums_restricted', failures,
                                             {'points': checked}))
    return reports


def rigidity_suite(ctx):
    failures = []
    for s in range(1, ctx.top_stage + 1):
        ms = stage_value(s)
        if not ctx.fits(1 << (2 * ctx.d * ms)):
            break
        extremes = block_coefficient_extremes(s, ctx.cfg)
        admissible = (1 << (ctx.d * ms)) >> (s - 1)
        if extremes.maximum != extremes.expected or len(extremes.attaining) != admissible:
            failures.append((s, extremes.maximum, len(extremes.attaining)))
        elif any(count != 1 << (ctx.d * ms) for count in extremes.attaining.values()):
            failures.append((s, 'count'))
    return [CheckReport.from_failures('coefficient_rigidity', failures)]


def tail_suite(ctx):
    if ctx.cfg.S < 2:
        return [_skipped('tail_bound', 'needs stage 2')]
    cfg = ctx.cfg
    rng = ctx.rng('tails')
    bound = tail_bound(2, ctx.d)
    failures = []
    samples = _outside_points(ctx, rng, ctx.outside_points, max_w=stage_value(2))
    for g, _ in samples:
        for N in _block(2, ctx.d):
            value = series_partial_sum(cfg, N, g)
            if abs(value) > bound:
                failures.append((g, N, value))
    details = {'bound': str(bound), 'points': len(samples)}
    return [CheckReport.from_failures('tail_bound', failures, details)]


def factorized_suite(ctx):
    cfg = ctx.cfg
    s = ctx.top_stage
    ms = stage_value(s)
    if not ctx.fits(ctx.points << (4 * ctx.d * ms)):
        return [_skipped('factorized_block_sum', 'block too large')]
    rng = ctx.rng('factorized')
    oracle = coefficient_oracle(cfg)
    base = 1 << (2 * ms)
    failures = []
    for _ in range(ctx.points):
        g = DyadicPoint.random(ctx.d, max(ctx.depth, 2 * ms + 1), rng)
        previous = block_partial_sum(oracle, (base,) * ctx.d, g)
        for N in itertools.product(range(base, 2 * base + 1), repeat=ctx.d):
            naive = block_partial_sum(oracle, N, g) - previous
            if factorized_block_sum(cfg, N, g) != naive:
                failures.append((g, N))
    reports = [CheckReport.from_failures('factorized_block_sum', failures)]

    if cfg.S >= 3:
        g = DyadicPoint.random(ctx.d, max(ctx.depth, 2 * stage_value(3) + 1), rng)
        start = time.perf_counter()
        value = factorized_block_sum(cfg, (3 << (2 * stage_value(3) - 1),) * ctx.d, g)
        elapsed = time.perf_counter() - start
        logging.info(f'Stage 3 block sum {value} in {elapsed:.4f}s')
        reports.append(CheckReport('factorized_stage_3', PASSED if elapsed < 1 else FAILED))
    return reports


def iterated_suite(ctx):
    cfg = ctx.cfg
    s = ctx.top_stage if ctx.d <= 2 else 1
    sub = MSetConfig(ctx.d, s, cfg.permutation)
    oracle = coefficient_oracle(sub)
    top = 2 << (2 * stage_value(s))
    if not ctx.fits(ctx.points * top ** ctx.d):
        return [_skipped('iterated_sums', 'support too large')]
    rng = ctx.rng('iterated')
    failures = []
    for _ in range(ctx.points):
        g = DyadicPoint.random(ctx.d, max(ctx.depth, 2 * stage_value(s) + 1), rng)
        rectangular = block_partial_sum(oracle, (top,) * ctx.d, g)
        for order in itertools.permutations(range(ctx.d)):
            if iterated_partial_sum(oracle, order, top, g) != rectangular:
                failures.append((g, order))
    return [CheckReport.from_failures('iterated_sums', failures, {'stage': s})]


def uset_suite(ctx):
    cfg = ctx.cfg
    s_top = ctx.top_stage
    seq = symmetric_index_sequence(MSetConfig(ctx.d, s_top))
    tau = symmetric_tau(seq)
    reports = [check_property_p(seq)]

    failures = [n for n in seq.terms if lambda_ratio(n) > 2]
    reports.append(CheckReport.from_failures('lambda_ratio', failures))

    failures = []
    max_rank = min(2, seq.depth())
    for s in range(1, s_top + 1):
        k = seq.block_exponents[s - 1] + 1
        if not ctx.fits(1 << (ctx.d * k)):
            break
        for rank in range(max_rank + 1):
            for cube in all_cubes(ctx.d, rank):
                value = tau(cube)
                if value and u_integral(tau, seq.term(s), cube, max(k, rank)) != value:
                    failures.append((s, cube))
    reports.append(CheckReport.from_failures('symmetric_integrals', failures))

    failures = []
    points = [DyadicPoint([x], 8) for x in range(256)]
    zero = DyadicPoint([0], 8)
    for N in range(1, 65):
        for q in range(0, (N & -N).bit_length() - 1):
            report = dirichlet_difference_check(N, q, [(x, zero) for x in points])
            if not report.passed:
                failures.append((N, q))
    reports.append(CheckReport.from_failures('dirichlet_difference', failures))

    demo_cfg = MSetConfig(ctx.d, s_top, cfg.permutation)
    reports.append(u2_contradiction_demo(demo_cfg, seq, s_top))
    return reports


SUITES = [
    ('walsh', walsh_suite),
    ('dirichlet', dirichlet_suite),
    ('additivity', additivity_suite),
    ('coefficients', coefficient_suite),
    ('local_coefficients', local_coefficient_suite),
    ('vanishing', vanishing_suite),
    ('sets', set_suite),
    ('zero_sums', zero_sum_suite),
    ('rigidity', rigidity_suite),
    ('tail', tail_suite),
    ('factorized', factorized_suite),
    ('iterated', iterated_suite),
    ('uset', uset_suite),
]


def run_suite(name, suite, ctx):
    start = time.perf_counter()
    try:
        reports = suite(ctx)
    except (ValueError, RuntimeError) as e:
        logging.error(f'Suite {name} raised {e!r}')
        reports = [CheckReport(name, FAILED, {'error': repr(e)})]
    elapsed = time.perf_counter() - start
    result = SuiteResult(name, reports, elapsed)
    logging.info(f'Suite {name}: {result.status} ({elapsed:.2f}s)')
    return result


def run_all(ctx, suites=None, workers=None):
    """Runs the suites in a thread pool; results keep the order of `suites`."""
    suites = SUITES if suites is None else suites
    logging.info(f'Running {len(suites)} suites on {ctx.cfg.tau}')
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_suite, name, suite, ctx) for name, suite in suites]
        return [f.result() for f in futures]
