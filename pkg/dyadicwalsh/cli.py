"""
dyadicwalsh.cli
===============

Batch front-end. Every mode writes one table, as CSV (header row, LF line
endings) or as a JSON object {config, records}. Dyadic values are written
as exact (mantissa, exponent) pairs; decimal columns are advisory.

Exit status is 0 on success, 1 when a check failed and 2 for an invalid
configuration.
"""
import argparse
import itertools
import logging
import os
import random
import sys

from dyadicwalsh.convergence import convergence_records
from dyadicwalsh.dyadic import DyadicPoint
from dyadicwalsh.mset import (F_tilde_cubes, MSetConfig, ProductPermutation,
                              closed_form_coefficient, mu_F_tilde, stage_value)
from dyadicwalsh.quasimeasure import coefficient_table
from dyadicwalsh.report import FAILED
from dyadicwalsh.uset import symmetric_index_sequence, u2_contradiction_demo
from dyadicwalsh.utils import dumps, render_csv, write_artifact
from dyadicwalsh.verify import VerifyContext, run_all

MODES = ('verify', 'coeffs', 'sums', 'sets', 'uset')
FORMATS = ('csv', 'json')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


class ExperimentConfig:
    """Validated settings of one CLI run.

    Parameters
    ----------
    dimension: int
        d >= 2, or 1 with `allow_d1`.
    stages: int
        Largest stage S.
    depth: int, optional
        Digits of the sampled points, at least 2m_S + 1. Defaults to
        2m_S + 2.
    perm_file: str, optional
        JSON permutation family, identity when omitted.
    mode: str
        One of verify, coeffs, sums, sets, uset.
    format: str
        csv or json. Can also be set through the DYADICWALSH_FORMAT
        environment variable.
    out: str, optional
        Output path; stdout when omitted or "-".
    seed: int, optional
        Seed of every random choice. Can also be set through the
        DYADICWALSH_SEED environment variable, defaults to 0.
    stage: int, optional
        Stage acted on by coeffs, sums, sets and uset; min(S, 2) by default.
    points: int
        Number of random points. The zero-sum and tail-bound suites of
        verify mode always sample 100 points off the set.
    """

    def __init__(self, dimension=2, stages=2, depth=None, perm_file=None, mode='verify',
                 format=None, out=None, seed=None, allow_d1=False, stage=None, points=4,
                 verbose=False):
        if not format:
            format = os.environ.get('DYADICWALSH_FORMAT')
            if not format:
                format = 'csv'
        if seed is None:
            seed = os.environ.get('DYADICWALSH_SEED')
            if seed is None:
                seed = 0
        try:
            seed = int(seed)
        except ValueError:
            raise ValueError(f'Malformed seed: {seed}')

        if mode not in MODES:
            raise ValueError(f'Unknown mode: {mode}')
        if format not in FORMATS:
            raise ValueError(f'Unknown output format: {format}')
        if dimension < 1 or (dimension == 1 and not allow_d1):
            raise ValueError(f'Dimension must be at least 2 (1 needs --allow-d1), got {dimension}')
        if stages < 1:
            raise ValueError(f'Need at least one stage, got {stages}')
        minimal_depth = 2 * stage_value(stages) + 1
        if depth is None:
            depth = minimal_depth + 1
        if depth < minimal_depth:
            raise ValueError(f'Depth {depth} is below 2m_S + 1 = {minimal_depth}')
        if stage is None:
            stage = min(stages, 2)
        if not 1 <= stage <= stages:
            raise ValueError(f'Stage {stage} is outside 1..{stages}')
        if points < 1:
            raise ValueError(f'Need at least one point, got {points}')

        self.dimension = dimension
        self.stages = stages
        self.depth = depth
        self.perm_file = perm_file
        self.mode = mode
        self.format = format
        self.out = out
        self.seed = seed
        self.allow_d1 = allow_d1
        self.stage = stage
        self.points = points
        self.verbose = verbose

    def mset_config(self):
        permutation = None
        if self.perm_file:
            permutation = ProductPermutation.from_json(self.perm_file, self.dimension)
        return MSetConfig(self.dimension, self.stages, permutation)

    def to_json(self):
        return {'dimension': self.dimension,
                'stages': self.stages,
                'depth': self.depth,
                'perm_file': self.perm_file,
                'mode': self.mode,
                'format': self.format,
                'seed': self.seed,
                'allow_d1': self.allow_d1,
                'stage': self.stage,
                'points': self.points}

    def __repr__(self):
        return f"<ExperimentConfig mode='{self.mode}'\n\td={self.dimension}\n\tS={self.stages}\n\tseed={self.seed}>"


def _axis_names(prefix, d):
    return [f'{prefix}{j}' for j in range(1, d + 1)]


def _verify_table(config, cfg):
    ctx = VerifyContext(cfg, config.depth, config.seed, config.points)
    results = run_all(ctx)
    header = ['suite', 'check', 'status', 'failure_count']
    rows = []
    failed = False
    for result in results:
        for report in result.reports:
            rows.append([result.name, report.name, report.status, len(report.failures)])
            failed = failed or report.status == FAILED
        logging.info(f'{result.name:<20} {result.status}')
    return header, rows, failed


def _coefficient_table(config, cfg):
    s = config.stage
    ms = stage_value(s)
    k = 2 * ms + 1
    brute = coefficient_table(cfg.tau, k)
    header = (_axis_names('n', cfg.d)
              + ['closed_mantissa', 'closed_exp', 'brute_mantissa', 'brute_exp', 'equal',
                 'closed_decimal'])
    rows = []
    failed = False
    low, high = 1 << (2 * ms), 2 << (2 * ms)
    for n in itertools.product(range(low, high), repeat=cfg.d):
        closed = closed_form_coefficient(n, cfg)
        other = brute[n]
        equal = closed == other
        failed = failed or not equal
        rows.append(list(n) + [closed.mantissa, closed.exponent, other.mantissa, other.exponent,
                               int(equal), closed.decimal_string()])
    return header, rows, failed


def _sums_table(config, cfg):
    rng = random.Random(config.seed)
    header = (['point', 'mode'] + _axis_names('N', cfg.d)
              + ['stage', 'value_mantissa', 'value_exponent', 'decimal'])
    rows = []
    for _ in range(config.points):
        g = DyadicPoint.random(cfg.d, config.depth, rng)
        label = ';'.join(str(v) for v in g.coords)
        for record in convergence_records(cfg, g, s=config.stage):
            stage = '' if record.stage is None else record.stage
            rows.append([label, record.mode] + list(record.N)
                        + [stage, record.value.mantissa, record.value.exponent,
                           record.value.decimal_string()])
    return header, rows, False


def _sets_table(config, cfg):
    s = config.stage
    rank = 2 * stage_value(s) + 1
    header = ['kind', 'rank'] + _axis_names('m', cfg.d) + ['value']
    rows = [['cube', rank] + list(c.index) + [''] for c in F_tilde_cubes(s, cfg)]
    rows.append(['measure', rank] + [''] * cfg.d + [str(mu_F_tilde(s, cfg))])
    return header, rows, False


def _uset_table(config, cfg):
    seq = symmetric_index_sequence(cfg)
    report = u2_contradiction_demo(cfg, seq, config.stage)
    header = ['construction', 'stage', 'index', 'cube', 'integral_value_mantissa',
              'integral_value_exponent']
    rows = [[r[key] for key in header] for r in report.records]
    return header, rows, not report.passed


TABLES = {
    'verify': _verify_table,
    'coeffs': _coefficient_table,
    'sums': _sums_table,
    'sets': _sets_table,
    'uset': _uset_table,
}


def render(config, header, rows):
    if config.format == 'json':
        return dumps({'config': config.to_json(),
                      'records': [dict(zip(header, row)) for row in rows]})
    return render_csv(header, rows)


def run(config):
    """Runs one configured experiment and writes its table.

    Returns
    -------
    status: int
        0 on success, 1 when a check failed, 2 when the configuration
        cannot be carried out.
    """
    logging.info(f'Running {config}')
    try:
        cfg = config.mset_config()
        header, rows, failed = TABLES[config.mode](config, cfg)
    except (ValueError, OSError) as e:
        logging.error(f'Invalid configuration: {e}')
        return EXIT_INVALID
    content = render(config, header, rows)
    if config.out is None or config.out == '-':
        sys.stdout.write(content)
    else:
        write_artifact(config.out, content)
    if failed:
        logging.error(f'Mode {config.mode}: some checks failed')
        return EXIT_FAILED
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog='dyadicwalsh',
                                     description='Exact Walsh series experiments on the dyadic group')
    parser.add_argument('--dimension', type=int, default=2)
    parser.add_argument('--depth', type=int, default=None,
                        help='Digits of sampled points (default 2m_S + 2)')
    parser.add_argument('--stages', type=int, default=2, help='Largest stage S')
    parser.add_argument('--perm-file', default=None,
                        help='JSON list of {stage, coordinate, perm} entries')
    parser.add_argument('--mode', choices=MODES, default='verify')
    parser.add_argument('--format', choices=FORMATS, default=None)
    parser.add_argument('--out', default=None, help='Output path (stdout by default)')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--allow-d1', action='store_true',
                        help='Accept dimension 1, for kernel experiments')
    parser.add_argument('--stage', type=int, default=None,
                        help='Stage used by coeffs, sums, sets and uset (default min(S, 2))')
    parser.add_argument('--points', type=int, default=4, help='Number of random points')
    parser.add_argument('-v', '--verbose', action='store_true')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(message)s')
    try:
        config = ExperimentConfig(dimension=args.dimension, stages=args.stages, depth=args.depth,
                                  perm_file=args.perm_file, mode=args.mode, format=args.format,
                                  out=args.out, seed=args.seed, allow_d1=args.allow_d1,
                                  stage=args.stage, points=args.points, verbose=args.verbose)
    except ValueError as e:
        logging.error(f'Invalid configuration: {e}')
        return EXIT_INVALID
    return run(config)
