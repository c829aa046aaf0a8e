"""
dyadicwalsh.uset
================

The symmetric construction: F = {g : W_{n_s}(g) = 1 for all s} for a single
Walsh function scaled to every stage, n_s = 2^{2m_s} 1 + 2^{m_s} n.

On such a set every cube satisfies the integral of W_{n_s} against tau_F
equal to tau_F(cube), so the integrals cannot tend to zero. The module
checks that identity, the index conditions it relies on, the Dirichlet
kernel difference identity, and contrasts the integrals with the decaying
ones of the M-set construction.
"""
import logging
from fractions import Fraction

from dyadicwalsh.dyadic import DyadicRational, all_cubes, xor_add
from dyadicwalsh.mset import stage_scale, stage_value
from dyadicwalsh.quasimeasure import local_coefficient, tau_from_closed_set
from dyadicwalsh.report import SKIPPED, CheckReport
from dyadicwalsh.utils import as_index, lowest_set_bit, parity, reverse_bits
from dyadicwalsh.walsh import dirichlet_1d, walsh_at_point, walsh_value


class IndexSequence:
    """Walsh multi-indices N_1, ..., N_I each lying in a single block B_{k_i}."""

    def __init__(self, terms):
        terms = [as_index(t) for t in terms]
        if not terms:
            raise ValueError('An index sequence needs at least one term')
        d = len(terms[0])
        exponents = []
        for t in terms:
            if len(t) != d:
                raise ValueError(f'{t} does not have dimension {d}')
            lengths = {v.bit_length() for v in t}
            if len(lengths) != 1 or 0 in lengths:
                raise ValueError(f'{t} does not lie in a single block')
            exponents.append(lengths.pop() - 1)
        if any(b <= a for a, b in zip(exponents, exponents[1:])):
            raise ValueError(f'Block exponents {exponents} are not increasing')
        self.d = d
        self.terms = terms
        self.block_exponents = tuple(exponents)

    def term(self, s):
        """The term of the 1-based stage s."""
        if not 1 <= s <= len(self.terms):
            raise ValueError(f'Stage {s} is outside 1..{len(self.terms)}')
        return self.terms[s - 1]

    def depth(self):
        """Digits needed to decide every term."""
        return self.block_exponents[-1] + 1

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f'<IndexSequence d={self.d} terms={self.terms}>'


def default_bases(cfg):
    """n = (2^{m_s + 1} - 1) 1 for every stage, which makes n_s diagonal."""
    return [((2 << stage_value(s)) - 1,) * cfg.d for s in range(1, cfg.S + 1)]


def random_bases(cfg, rng):
    return [tuple(rng.randrange(1 << stage_value(s), 2 << stage_value(s)) for _ in range(cfg.d))
            for s in range(1, cfg.S + 1)]


def symmetric_index_sequence(cfg, base=None):
    """n_s = 2^{2m_s} 1 + 2^{m_s} n_s' for the per-stage bases n_s'.

    Parameters
    ----------
    cfg: `dyadicwalsh.mset.MSetConfig`
    base: list of tuple of int, optional
        One base per stage 1..S with 2^{m_s} 1 <= n < 2^{m_s + 1} 1.
        Defaults to `default_bases`.

    Returns
    -------
    seq: `IndexSequence`
    """
    if base is None:
        base = default_bases(cfg)
    if len(base) != cfg.S:
        raise ValueError(f'Need one base index per stage, got {len(base)} for {cfg.S} stages')
    terms = []
    for s, n in enumerate(base, start=1):
        n = as_index(n, cfg.d)
        ms = stage_value(s)
        if any(not (1 << ms) <= v < (2 << ms) for v in n):
            raise ValueError(f'Base {n} of stage {s} is outside [2^{ms}, 2^{ms + 1})')
        terms.append(tuple((1 << (2 * ms)) + (v << ms) for v in n))
    seq = IndexSequence(terms)
    report = check_property_p(seq)
    if not report.passed:
        logging.info(f'{seq} fails the lowest bit schedule: {report.failures}')
    return seq


def check_property_p(seq, stages=None):
    """Lowest set bits grow along the sequence: at least m_s for the term of stage s.

    Parameters
    ----------
    seq: `IndexSequence`
    stages: list of int, optional
        The stage of each term, 1..len(seq) by default.
    """
    if stages is None:
        stages = range(1, len(seq) + 1)
    failures = []
    previous = -1
    lowest_bits = []
    for s, t in zip(stages, seq.terms):
        lowest = min(lowest_set_bit(v) for v in t)
        lowest_bits.append(lowest)
        if lowest < stage_value(s) or lowest < previous:
            failures.append((s, t, lowest))
        previous = lowest
    return CheckReport.from_failures('property_p', failures, {'lowest_bits': lowest_bits})


def lambda_ratio(n):
    """max_{j,k} n^j / n^k as an exact Fraction."""
    n = as_index(n)
    if min(n) < 1:
        raise ValueError(f'Ratios need positive components, got {n}')
    return Fraction(max(n), min(n))


def in_symmetric_Fs(g, s, seq):
    return walsh_at_point(seq.term(s), g) == 1


def _reduce(basis, mask, rhs):
    while mask:
        pivot = mask.bit_length() - 1
        if pivot not in basis:
            return mask, rhs
        other_mask, other_rhs = basis[pivot]
        mask ^= other_mask
        rhs ^= other_rhs
    return mask, rhs


def symmetric_cube_meets_F(c, seq):
    """Whether the cube c meets {g : W_{N}(g) = 1 for every term N of seq}.

    Each term is a parity condition on the digits of g. Digits below the
    rank of c are fixed by its index, the others are free; the cube meets
    the set iff the remaining linear system over GF(2) is consistent.
    """
    if c.dimension != seq.d:
        raise ValueError(f'Cube dimension {c.dimension} differs from {seq.d}')
    k = c.rank
    width = max(seq.depth() - k, 0)
    low_mask = (1 << k) - 1
    reversed_index = [reverse_bits(m, k) for m in c.index]
    basis = {}
    for term in seq.terms:
        rhs = parity(sum(parity((v & low_mask) & r) for v, r in zip(term, reversed_index)))
        mask = 0
        for j, v in enumerate(term):
            high = v >> k
            mask |= high << (j * width)
        mask, rhs = _reduce(basis, mask, rhs)
        if not mask:
            if rhs:
                return False
            continue
        basis[mask.bit_length() - 1] = (mask, rhs)
    return True


def symmetric_tau(seq, d=None):
    d = seq.d if d is None else d
    return tau_from_closed_set(lambda cube: symmetric_cube_meets_F(cube, seq), d, name='tau_U')


def u_integral(tau, N, window, k):
    """The integral of W_N over `window` against tau, summed at rank k."""
    return local_coefficient(tau, N, window, k)


def dirichlet_difference_check(N, q, samples):
    """D_{N + 2^q}(x + g) - D_N(x + g) = 2^q W_N(x + g) I(x + g in Delta^(q)_0) on samples.

    Parameters
    ----------
    N: int
    q: int
        Must lie below the lowest set bit of N, otherwise the check is
        skipped.
    samples: list of (DyadicPoint, DyadicPoint)
        One-dimensional point pairs of equal depth.
    """
    details = {'N': N, 'q': q, 'samples': len(samples)}
    if N < 1 or q >= lowest_set_bit(N):
        return CheckReport('dirichlet_difference', SKIPPED, details)
    failures = []
    for x, g in samples:
        if x.dimension != 1:
            raise ValueError('The kernel difference identity is one-dimensional')
        y = xor_add(x, g)
        lhs = dirichlet_1d(N + (1 << q), y) - dirichlet_1d(N, y)
        rhs = 0
        if y.prefix(q) == (0,):
            rhs = (1 << q) * walsh_value((N,), y)
        if lhs != rhs:
            failures.append((x, g, lhs, rhs))
    return CheckReport.from_failures('dirichlet_difference', failures, details)


def _cube_label(c):
    return f'{c.rank}:{",".join(str(v) for v in c.index)}'


def _integral_record(construction, s, n, cube, value):
    return {'construction': construction,
            'stage': s,
            'index': ';'.join(str(v) for v in n),
            'cube': _cube_label(cube),
            'integral_value_mantissa': value.mantissa,
            'integral_value_exponent': value.exponent}


def u2_contradiction_demo(cfg, seq, max_stage, max_rank=1):
    """Integrals of W_{n_s} over nonzero cubes for the symmetric and the M-set construction.

    For the symmetric tau every integral equals tau(cube) and stays away
    from zero. For the M-set tau the index 2^{2m_s} 1 + 2^{m_s} pi_s(0) is
    used, whose integrals are bounded by 2^{s - 1 - dm_s}.

    Returns
    -------
    report: `dyadicwalsh.report.CheckReport`
        With one record per construction, stage and cube. Each record
        names the Walsh index it integrates, as 'n1;n2;...'.
    """
    if max_stage > len(seq):
        raise ValueError(f'{seq} has no term for stage {max_stage}')
    cfg.check_stage(max_stage)
    tau = symmetric_tau(seq, cfg.d)
    cubes = [c for k in range(max_rank + 1) for c in all_cubes(cfg.d, k) if tau(c)]
    if not cubes:
        raise RuntimeError('The symmetric quasimeasure vanishes on every cube')
    records = []
    failures = []
    for s in range(1, max_stage + 1):
        n_s = seq.term(s)
        k = max(seq.block_exponents[s - 1] + 1, max_rank)
        for cube in cubes:
            value = u_integral(tau, n_s, cube, k)
            records.append(_integral_record('symmetric', s, n_s, cube, value))
            if value != tau(cube):
                failures.append(('symmetric', s, cube, value))

    for s in range(1, max_stage + 1):
        ms = stage_value(s)
        p = cfg.permutation.forward(s, (0,) * cfg.d)
        n = tuple((1 << (2 * ms)) + (v << ms) for v in p)
        bound = stage_scale(s, cfg.d)
        for cube in cubes:
            value = local_coefficient(cfg.tau, n, cube, max(2 * ms + 1, cube.rank))
            records.append(_integral_record('mset', s, n, cube, value))
            if abs(value) > bound:
                failures.append(('mset', s, cube, value))
    logging.info(f'Compared {len(records)} integrals over {len(cubes)} cubes')
    return CheckReport.from_failures('u2_contradiction', failures,
                                     {'cubes': len(cubes), 'max_stage': max_stage}, records)


def symmetric_measure(s, seq, rank=None):
    """Haar measure of {W_{n_s} = 1} by counting cubes of the deciding rank."""
    n_s = seq.term(s)
    rank = seq.block_exponents[s - 1] + 1 if rank is None else rank
    count = sum(1 for c in all_cubes(seq.d, rank) if walsh_value(n_s, c) == 1)
    return DyadicRational(count, -seq.d * rank)


def symmetric_tilde_measure(s, seq):
    """Haar measure of {W_{n_t} = 1 for t <= s}."""
    rank = seq.block_exponents[s - 1] + 1
    count = sum(1 for c in all_cubes(seq.d, rank)
                if all(walsh_value(seq.term(t), c) == 1 for t in range(1, s + 1)))
    return DyadicRational(count, -seq.d * rank)
