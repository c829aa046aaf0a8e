"""
dyadicwalsh.mset
================

The stage construction of the closed set F = F_1 & F_2 & ... and of its
shuffled variants F^pi, together with the exact Fourier-Walsh
coefficients of the null-series realizing it.

Stage s works at three ranks. The rank-m_s cube of a point g gives the
"address" m, the next m_s digits give m', and the digit 2m_s decides
membership: g is in F_s iff R_{2m_s 1}(g) = W^(m_s)_{pi_s(m), m'}.
Exactly half of the children of every rank-2m_s cube survive, so
mu(F~_s) = 2^-s where F~_s = F_1 & ... & F_s.

Usage:

    >>> cfg = MSetConfig(2, 2)
    >>> cfg.sequence.values
    (0, 2)
    >>> closed_form_coefficient((0, 0), cfg)
    DyadicRational(1)
    >>> mu_F_tilde(2, cfg)
    DyadicRational(1, -2)
"""
import functools
import itertools
import json
import logging
import threading
from collections import namedtuple

from dyadicwalsh.dyadic import ONE, ZERO, DyadicCube, DyadicRational
from dyadicwalsh.quasimeasure import (MAX_ENUMERATION, CoefficientOracle, local_coefficient,
                                      tau_from_closed_set)
from dyadicwalsh.utils import as_index
from dyadicwalsh.walsh import rademacher, walsh_on_cube

BlockDecomposition = namedtuple('BlockDecomposition', ['s', 'p', 'q'])
HalvingChain = namedtuple('HalvingChain', ['cubes', 'values', 'bounds', 'passed'])
CoefficientExtremes = namedtuple('CoefficientExtremes', ['maximum', 'expected', 'attaining'])


def stage_value(s):
    """m_s for a 1-based stage s: m_1 = 0, m_{s+1} = 2(2 m_s + 1)."""
    if s < 1:
        raise ValueError(f'Stages start at 1, got {s}')
    m = 0
    for _ in range(s - 1):
        m = 2 * (2 * m + 1)
    return m


def stage_of_rank(k):
    """(s, kind) with kind 'address' when k = m_s, 'graph' when k = 2m_s + 1, else None."""
    s = 1
    m = 0
    while m <= k:
        if k == m:
            return s, 'address'
        if k == 2 * m + 1:
            return s, 'graph'
        s += 1
        m = 2 * (2 * m + 1)
    return None


class StageSequence:
    """The first S terms m_1, ..., m_S of the stage sequence."""

    def __init__(self, values):
        values = tuple(values)
        if not values or values[0] != 0:
            raise ValueError('A stage sequence starts with m_1 = 0')
        for a, b in zip(values, values[1:]):
            if b != 2 * (2 * a + 1):
                raise ValueError(f'{values} does not satisfy m_(s+1) = 2(2 m_s + 1)')
        self.values = values

    def m(self, s):
        if not 1 <= s <= len(self.values):
            raise ValueError(f'Stage {s} is outside 1..{len(self.values)}')
        return self.values[s - 1]

    def block_exponents(self):
        return tuple(2 * m for m in self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        if not isinstance(other, StageSequence):
            return NotImplemented
        return self.values == other.values

    def __repr__(self):
        return f'StageSequence{self.values}'


def stage_sequence(S):
    if S < 1:
        raise ValueError(f'Need at least one stage, got {S}')
    return StageSequence(stage_value(s) for s in range(1, S + 1))


def _check_perm(perm, size, where):
    perm = tuple(int(v) for v in perm)
    if len(perm) != size or sorted(perm) != list(range(size)):
        raise ValueError(f'{where}: not a bijection of 0..{size - 1}')
    return perm


def _invert(perm):
    inverse = [0] * len(perm)
    for i, v in enumerate(perm):
        inverse[v] = i
    return tuple(inverse)


class ProductPermutation:
    """Family of coordinatewise permutations pi_s = (pi_s^1, ..., pi_s^d).

    Parameters
    ----------
    d: int
    stages: dict
        Maps a 1-based stage s to a sequence of d permutations of
        0..2^{m_s}-1. Stages that are not given act as the identity.
    """

    is_product = True

    def __init__(self, d, stages=None):
        self.d = d
        self._forward = {}
        self._inverse = {}
        for s, perms in (stages or {}).items():
            perms = list(perms)
            if len(perms) != d:
                raise ValueError(f'Stage {s} needs {d} coordinate permutations, got {len(perms)}')
            size = 1 << stage_value(s)
            checked = tuple(_check_perm(p, size, f'stage {s}, coordinate {j + 1}')
                            for j, p in enumerate(perms))
            self._forward[s] = checked
            self._inverse[s] = tuple(_invert(p) for p in checked)

    @classmethod
    def identity(cls, d):
        return cls(d)

    @classmethod
    def random(cls, d, stages, rng):
        """Uniformly random permutations for the given stages; `rng` is a `random.Random`."""
        family = {}
        for s in stages:
            size = 1 << stage_value(s)
            perms = []
            for _ in range(d):
                perm = list(range(size))
                rng.shuffle(perm)
                perms.append(perm)
            family[s] = perms
        return cls(d, family)

    @classmethod
    def from_json(cls, source, d):
        """Loads a family from a JSON file path or an already parsed list.

        Entries are objects {"stage": s, "coordinate": j, "perm": [...]}
        with a 1-based coordinate j.
        """
        if isinstance(source, str):
            with open(source, encoding='utf-8') as f:
                entries = json.load(f)
        else:
            entries = source
        if not isinstance(entries, list):
            raise ValueError('A permutation file holds a list of entries')
        family = {}
        for entry in entries:
            try:
                s = int(entry['stage'])
                j = int(entry['coordinate'])
                perm = entry['perm']
            except (KeyError, TypeError) as e:
                raise ValueError(f'Malformed permutation entry {entry}') from e
            if s < 1:
                raise ValueError(f'Stages start at 1, got {s}')
            if not 1 <= j <= d:
                raise ValueError(f'Coordinate {j} is outside 1..{d}')
            row = family.setdefault(s, [None] * d)
            if row[j - 1] is not None:
                raise ValueError(f'Duplicate entry for stage {s}, coordinate {j}')
            row[j - 1] = perm
        for s, row in family.items():
            size = 1 << stage_value(s)
            family[s] = [list(range(size)) if p is None else p for p in row]
        logging.debug(f'Loaded permutations for stages {sorted(family)}')
        return cls(d, family)

    def stages(self):
        return sorted(self._forward)

    def forward(self, s, m):
        perms = self._forward.get(s)
        if perms is None:
            return tuple(m)
        return tuple(p[v] for p, v in zip(perms, m))

    def inverse(self, s, p):
        perms = self._inverse.get(s)
        if perms is None:
            return tuple(p)
        return tuple(q[v] for q, v in zip(perms, p))

    def forward_1d(self, s, j, v):
        perms = self._forward.get(s)
        return v if perms is None else perms[j][v]

    def inverse_1d(self, s, j, v):
        perms = self._inverse.get(s)
        return v if perms is None else perms[j][v]

    def to_json(self):
        return [{'stage': s, 'coordinate': j + 1, 'perm': list(p)}
                for s in self.stages() for j, p in enumerate(self._forward[s])]

    def __repr__(self):
        return f'<ProductPermutation d={self.d} stages={self.stages()}>'


class GeneralPermutation:
    """Arbitrary bijections pi_s of {0..2^{m_s}-1}^d, one per stage."""

    is_product = False

    def __init__(self, d, stages=None):
        self.d = d
        self._forward = {}
        self._inverse = {}
        for s, mapping in (stages or {}).items():
            size = 1 << stage_value(s)
            domain = set(itertools.product(range(size), repeat=d))
            mapping = {as_index(k, d): as_index(v, d) for k, v in dict(mapping).items()}
            if set(mapping) != domain or set(mapping.values()) != domain:
                raise ValueError(f'Stage {s}: not a bijection of the rank-{stage_value(s)} index set')
            self._forward[s] = mapping
            self._inverse[s] = {v: k for k, v in mapping.items()}

    @classmethod
    def random(cls, d, stages, rng):
        family = {}
        for s in stages:
            size = 1 << stage_value(s)
            domain = list(itertools.product(range(size), repeat=d))
            image = list(domain)
            rng.shuffle(image)
            family[s] = dict(zip(domain, image))
        return cls(d, family)

    def stages(self):
        return sorted(self._forward)

    def forward(self, s, m):
        return self._forward.get(s, {}).get(tuple(m), tuple(m))

    def inverse(self, s, p):
        return self._inverse.get(s, {}).get(tuple(p), tuple(p))

    def __repr__(self):
        return f'<GeneralPermutation d={self.d} stages={self.stages()}>'


class MSetConfig:
    """Dimension, stage cap and permutation family of an F^pi construction.

    Parameters
    ----------
    d: int
        Dimension of the group.
    S: int
        Largest stage used for coefficient lookups and enumerations. The
        set predicates themselves work at every stage.
    permutation: `ProductPermutation` or `GeneralPermutation`, optional
        Identity when omitted.
    allow_general: bool
        Must be set to accept a `GeneralPermutation`.
    """

    def __init__(self, d, S, permutation=None, allow_general=False):
        if d < 1:
            raise ValueError(f'Dimension must be positive, got {d}')
        if permutation is None:
            permutation = ProductPermutation.identity(d)
        if permutation.d != d:
            raise ValueError(f'Permutation family is {permutation.d}-dimensional, expected {d}')
        if not permutation.is_product and not allow_general:
            raise ValueError('Non-product permutations need allow_general=True')
        self.d = d
        self.S = S
        self.sequence = stage_sequence(S)
        self.permutation = permutation
        self.allow_general = allow_general
        self._tau = None
        self._tau_lock = threading.Lock()

    def m(self, s):
        return stage_value(s)

    def check_stage(self, s):
        if not 1 <= s <= self.S:
            raise ValueError(f'Stage {s} is outside the configured stages 1..{self.S}')

    @property
    def tau(self):
        """The shared lazily evaluated tau_{F^pi}."""
        with self._tau_lock:
            if self._tau is None:
                self._tau = tau_for_config(self)
        return self._tau

    def __repr__(self):
        return f'<MSetConfig\n\td={self.d}\n\tS={self.S}\n\tpermutation={self.permutation}>'

    def __str__(self):
        return self.__repr__()


def _stage_digits(index, rank, ms):
    """Split rank-`rank` indices (rank >= 2m_s + 1) into m, m' and the digit 2m_s."""
    m = tuple(v >> (rank - ms) for v in index)
    mprime = tuple((v >> (rank - 2 * ms)) & ((1 << ms) - 1) for v in index)
    sigma = tuple((v >> (rank - 2 * ms - 1)) & 1 for v in index)
    return m, mprime, sigma


def _in_stage(index, rank, s, cfg):
    ms = cfg.m(s)
    if rank < 2 * ms + 1:
        raise ValueError(f'Stage {s} needs {2 * ms + 1} digits, only {rank} are available')
    m, mprime, sigma = _stage_digits(index, rank, ms)
    lhs = -1 if sum(sigma) & 1 else 1
    rhs = walsh_on_cube(cfg.permutation.forward(s, m), DyadicCube(ms, mprime))
    return lhs == rhs


def in_Fs(g, s, cfg):
    """Membership of the point g in F_s^pi.

    Raises
    ------
    ValueError
        When g has fewer than 2m_s + 1 digits.
    """
    if g.dimension != cfg.d:
        raise ValueError(f'Point dimension {g.dimension} differs from {cfg.d}')
    ms = cfg.m(s)
    if g.depth < 2 * ms + 1:
        raise ValueError(f'Stage {s} needs depth {2 * ms + 1}, got {g.depth}')
    m = g.prefix(ms)
    mprime = tuple(v & ((1 << ms) - 1) for v in g.prefix(2 * ms))
    lhs = rademacher((2 * ms,) * cfg.d, g)
    return lhs == walsh_on_cube(cfg.permutation.forward(s, m), DyadicCube(ms, mprime))


def in_F_tilde(g, s, cfg):
    return all(in_Fs(g, t, cfg) for t in range(1, s + 1))


def cube_in_F_tilde(c, s, cfg):
    """Whether the cube c lies inside F~_s (F~_0 is the whole group)."""
    if s == 0:
        return True
    ms = cfg.m(s)
    if c.rank < 2 * ms + 1:
        raise ValueError(f'A rank-{c.rank} cube can straddle F~_{s}, need rank >= {2 * ms + 1}')
    return all(_in_stage(c.index, c.rank, t, cfg) for t in range(1, s + 1))


def cube_meets_F(c, cfg):
    """Whether the cube c intersects F^pi.

    Stages whose deciding digit 2m_s lies below the rank of c must hold on
    all of c; every later stage leaves a free digit and can be satisfied
    inside c.
    """
    s = 1
    while 2 * cfg.m(s) + 1 <= c.rank:
        if not _in_stage(c.index, c.rank, s, cfg):
            return False
        s += 1
    return True


def F_tilde_cubes(s, cfg, max_cubes=MAX_ENUMERATION):
    """The rank-(2m_s + 1) cubes inside F~_s, in lexicographic order."""
    cubes = [DyadicCube.whole(cfg.d)]
    rank = 0
    for t in range(1, s + 1):
        ms = cfg.m(t)
        target = 2 * ms + 1
        expected = len(cubes) << (cfg.d * (target - rank) - 1)
        if expected > max_cubes:
            raise ValueError(f'F~_{s} has {expected} cubes at rank {target}, more than {max_cubes}')
        refined = []
        for cube in cubes:
            for sub in cube.subcubes(target):
                if _in_stage(sub.index, target, t, cfg):
                    refined.append(sub)
        cubes = refined
        rank = target
        logging.debug(f'F~_{t}: {len(cubes)} cubes of rank {rank}')
    return cubes


def mu_F_tilde(s, cfg):
    cubes = F_tilde_cubes(s, cfg)
    return DyadicRational(len(cubes), -cfg.d * (2 * cfg.m(s) + 1))


def tau_for_config(cfg):
    """tau_{F^pi} as a lazy quasimeasure."""
    return tau_from_closed_set(lambda cube: cube_meets_F(cube, cfg), cfg.d, name='tau_F')


def decompose_block_index(n, seq=None):
    """Write n in B_{2m_s} as 2^{2m_s} 1 + 2^{m_s} p + q.

    Returns `None` for n = 0 and for indices outside every block. The
    stage sequence only serves as a sanity bound and may be omitted.
    """
    n = as_index(n)
    lengths = {v.bit_length() for v in n}
    if len(lengths) != 1 or 0 in lengths:
        return None
    e = lengths.pop() - 1
    located = stage_of_rank(e // 2) if e % 2 == 0 else None
    if located is None or located[1] != 'address':
        return None
    s = located[0]
    ms = e // 2
    mask = (1 << ms) - 1
    p = tuple((v >> ms) & mask for v in n)
    q = tuple(v & mask for v in n)
    if seq is not None and s > len(seq):
        logging.debug(f'{n} lies in block B_{e}, beyond the {len(seq)} configured stages')
    return BlockDecomposition(s, p, q)


def _block_index(s, p, q):
    ms = stage_value(s)
    return tuple((1 << (2 * ms)) + (pj << ms) + qj for pj, qj in zip(p, q))


def stage_scale(s, d):
    """2^{s - 1 - d m_s}, the largest coefficient magnitude in B_{2m_s}."""
    return DyadicRational(1, s - 1 - d * stage_value(s))


def closed_form_coefficient(n, cfg):
    """Exact coefficient of the null-series generating tau_{F^pi}.

    Parameters
    ----------
    n: tuple of int
    cfg: `MSetConfig`

    Returns
    -------
    value: `DyadicRational`
        1 at n = 0, 0 off the blocks, and
        2^{s-1-dm_s} W^(m_s)_{q, pi^-1(p)} I(Delta_{pi^-1(p)} in F~_{s-1})
        for n = 2^{2m_s} 1 + 2^{m_s} p + q.
    """
    n = as_index(n, cfg.d)
    if not any(n):
        return ONE
    block = decompose_block_index(n, cfg.sequence)
    if block is None:
        return ZERO
    s, p, q = block
    cfg.check_stage(s)
    ms = cfg.m(s)
    r = cfg.permutation.inverse(s, p)
    cube = DyadicCube(ms, r)
    if not cube_in_F_tilde(cube, s - 1, cfg):
        return ZERO
    return stage_scale(s, cfg.d) * walsh_on_cube(q, cube)


def _check_local(n, c, cfg):
    n = as_index(n, cfg.d)
    block = decompose_block_index(n, cfg.sequence)
    if block is None:
        raise ValueError(f'{n} is not in any block B_(2m_s)')
    cfg.check_stage(block.s)
    if c.rank != cfg.m(block.s):
        raise ValueError(f'Local coefficients of B_{2 * cfg.m(block.s)} live on rank-{cfg.m(block.s)} '
                         f'cubes, got rank {c.rank}')
    return block


def closed_form_local_coefficient(n, c, cfg):
    """tau^_n(Delta^(m_s)_m) = 2^{s-1-dm_s} W_{q,m} [pi_s(m) = p] I(Delta_m in F~_{s-1})."""
    s, p, q = _check_local(n, c, cfg)
    if cfg.permutation.forward(s, c.index) != p:
        return ZERO
    if not cube_in_F_tilde(c, s - 1, cfg):
        return ZERO
    return stage_scale(s, cfg.d) * walsh_on_cube(q, c)


def check_window(window, cfg):
    located = stage_of_rank(window.rank)
    if located is None or located[1] != 'address':
        raise ValueError(f'Restriction windows have rank m_s, got rank {window.rank}')
    s0 = located[0]
    cfg.check_stage(s0)
    return s0


def closed_form_restricted_coefficient(n, window, cfg):
    """Coefficient of tau_{F^pi} restricted to a rank-m_{s0} window, for blocks s > s0."""
    n = as_index(n, cfg.d)
    s0 = check_window(window, cfg)
    block = decompose_block_index(n, cfg.sequence)
    if block is None or block.s <= s0:
        raise ValueError(f'The restricted closed form needs n in a block B_(2m_s) with s > {s0}')
    s, p, q = block
    cfg.check_stage(s)
    cube = DyadicCube(cfg.m(s), cfg.permutation.inverse(s, p))
    if not window.contains_cube(cube) or not cube_in_F_tilde(cube, s - 1, cfg):
        return ZERO
    return stage_scale(s, cfg.d) * walsh_on_cube(q, cube)


def stage_cube_values(c, cfg):
    """Closed-form tau_{F^pi}(c) on cubes of rank m_s or 2m_s + 1."""
    located = stage_of_rank(c.rank)
    if located is None:
        raise ValueError(f'Rank {c.rank} is neither m_s nor 2m_s + 1')
    s, kind = located
    cfg.check_stage(s)
    if kind == 'address':
        if not cube_in_F_tilde(c, s - 1, cfg):
            return ZERO
        return stage_scale(s, cfg.d)
    if not cube_in_F_tilde(c, s, cfg):
        return ZERO
    return DyadicRational(1, s - cfg.d * c.rank)


def coefficient_oracle(cfg, window=None):
    """Coefficients of the null-series generating tau_{F^pi}, or its restriction.

    The support is {0} with the blocks B_{2m_s}, s <= S. For a window of
    rank m_{s0} it becomes the box n < 2^{m_{s0}} 1 with the blocks
    s0 <= s <= S: the box and block s0 are summed from tau, the later
    blocks use the restricted closed form.
    """
    horizon = 1 << (2 * stage_value(cfg.S + 1))
    if window is None:
        return CoefficientOracle(cfg.d, lambda n: closed_form_coefficient(n, cfg),
                                 block_exponents=cfg.sequence.block_exponents(),
                                 horizon=horizon,
                                 description='{0} + B_(2m_s)')

    s0 = check_window(window, cfg)
    low_rank = window.rank
    tau = cfg.tau

    @functools.lru_cache(maxsize=None)
    def rule(n):
        if all(v < (1 << low_rank) for v in n):
            return tau(window) * walsh_on_cube(n, window)
        block = decompose_block_index(n, cfg.sequence)
        if block is None or block.s < s0:
            return ZERO
        if block.s == s0:
            return local_coefficient(tau, n, window, 2 * cfg.m(s0) + 1)
        return closed_form_restricted_coefficient(n, window, cfg)

    exponents = [2 * cfg.m(s) for s in range(s0, cfg.S + 1)]
    return CoefficientOracle(cfg.d, rule, block_exponents=exponents, low_rank=low_rank,
                             horizon=horizon,
                             description=f'n < 2^{low_rank} + B_(2m_s), s >= {s0}')


def block_coefficient_extremes(s, cfg):
    """Largest |tau^_n| over B_{2m_s} and, per admissible p, how many n attain it.

    Uses the closed form, which only depends on (p, q), so the count runs
    over the 2^{2dm_s} indices of the block.
    """
    cfg.check_stage(s)
    ms = cfg.m(s)
    size = 1 << (2 * cfg.d * ms)
    if size > MAX_ENUMERATION:
        raise ValueError(f'B_{2 * ms} has {size} indices, too many to scan')
    maximum = ZERO
    attaining = {}
    for p in itertools.product(range(1 << ms), repeat=cfg.d):
        for q in itertools.product(range(1 << ms), repeat=cfg.d):
            value = abs(closed_form_coefficient(_block_index(s, p, q), cfg))
            if value > maximum:
                maximum = value
                attaining = {}
            if value and value == maximum:
                attaining[p] = attaining.get(p, 0) + 1
    return CoefficientExtremes(maximum, stage_scale(s, cfg.d), attaining)


def measure_integral_over_Fs(n, c, s, cfg):
    """The integral of W_n over F_s & c against Haar measure.

    Summed over the rank-(2m_s + 1) subcubes of c lying in F_s; needs
    n < 2^{2m_s + 1} 1.
    """
    n = as_index(n, cfg.d)
    rank = 2 * cfg.m(s) + 1
    if any(v >> rank for v in n):
        raise ValueError(f'W_{n} is not constant on rank-{rank} cubes')
    count = 0
    for sub in c.subcubes(rank):
        if _in_stage(sub.index, rank, s, cfg):
            count += walsh_on_cube(n, sub)
    return DyadicRational(count, -cfg.d * rank)


def halving_chain(psi, start, steps, cfg):
    """Nested cubes from `start` (rank m_{s0}) down to rank m_{s0 + steps}.

    Descends one rank at a time into the child with the largest |psi|
    among the children meeting F^pi. The bound checked after k stages is
    |psi| >= 2^k |C| / 2^{d(m_{s0+k} - m_{s0})} with C = psi(start); it is
    guaranteed when psi vanishes on every cube missing F^pi.

    Returns
    -------
    chain: `HalvingChain`
        The cubes and values at each stage rank, the bounds and whether
        all of them held.
    """
    located = stage_of_rank(start.rank)
    if located is None or located[1] != 'address':
        raise ValueError(f'The chain starts at a rank m_s cube, got rank {start.rank}')
    s0 = located[0]
    C = psi(start)
    if not C:
        raise ValueError(f'psi vanishes on {start}')
    cubes = [start]
    values = [C]
    bounds = [abs(C)]
    passed = True
    cube = start
    for k in range(1, steps + 1):
        target = stage_value(s0 + k)
        while cube.rank < target:
            candidates = [child for child in cube.children() if cube_meets_F(child, cfg)]
            cube = max(candidates, key=lambda child: (abs(psi(child)), [-v for v in child.index]))
        value = psi(cube)
        bound = abs(C).scale(k - cfg.d * (target - start.rank))
        cubes.append(cube)
        values.append(value)
        bounds.append(bound)
        if abs(value) < bound:
            passed = False
            logging.info(f'Halving bound fails at {cube}: |{value}| < {bound}')
    return HalvingChain(cubes, values, bounds, passed)
