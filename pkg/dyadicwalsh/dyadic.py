"""
dyadicwalsh.dyadic
==================

Exact dyadic rationals, points of the dyadic group G^d truncated to a
finite depth, and dyadic cubes.

Bit convention: a point g of depth K stores, for each coordinate j, the
digits g^j_0 ... g^j_{K-1} of the expansion sum g_t 2^{-t-1}. The rank-k
cube containing g has index m^j = sum_{t<k} g^j_t 2^{k-1-t}, i.e. the
first k digits read as a binary number with g_0 as the most significant
bit. Internally each coordinate of a point is kept as the integer formed
by all K digits in that same order, so the rank-k index is a right shift.

Usage:
    >>> from dyadicwalsh.dyadic import DyadicRational, DyadicPoint, cube_of
    >>> DyadicRational(1, -1) + DyadicRational(1, -1)
    DyadicRational(1)
    >>> g = DyadicPoint.from_bits([[1, 0, 1]])
    >>> cube_of(g, 2)
    DyadicCube(rank=2, index=(2,))
"""
import itertools
from fractions import Fraction

from dyadicwalsh.utils import lowest_set_bit


class DyadicRational:
    """Exact value mantissa * 2**exponent in canonical form.

    The mantissa is odd, or zero with exponent zero.
    """

    __slots__ = ('mantissa', 'exponent')

    def __init__(self, mantissa=0, exponent=0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        else:
            shift = lowest_set_bit(abs(mantissa))
            mantissa >>= shift
            exponent += shift
        object.__setattr__(self, 'mantissa', mantissa)
        object.__setattr__(self, 'exponent', exponent)

    def __setattr__(self, name, value):
        raise AttributeError('DyadicRational is immutable')

    @classmethod
    def power_of_two(cls, exponent, sign=1):
        return cls(sign, exponent)

    @classmethod
    def from_fraction(cls, value):
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f'{value} is not a dyadic rational')
        return cls(value.numerator, -(den.bit_length() - 1))

    def as_fraction(self):
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def is_zero(self):
        return self.mantissa == 0

    def sign(self):
        return (self.mantissa > 0) - (self.mantissa < 0)

    def scale(self, k):
        """Multiplies by 2**k."""
        if self.mantissa == 0:
            return self
        return DyadicRational(self.mantissa, self.exponent + k)

    def divide(self, m):
        """Divides by a positive power of two given as an integer."""
        if m <= 0 or m & (m - 1):
            raise ValueError(f'Division by {m} leaves the dyadic rationals')
        return self.scale(-(m.bit_length() - 1))

    def _coerce(self, other):
        if isinstance(other, DyadicRational):
            return other
        if isinstance(other, int):
            return DyadicRational(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        e = min(self.exponent, other.exponent)
        m = (self.mantissa << (self.exponent - e)) + (other.mantissa << (other.exponent - e))
        return DyadicRational(m, e)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self.mantissa, self.exponent)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return DyadicRational(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __abs__(self):
        return DyadicRational(abs(self.mantissa), self.exponent)

    def compare(self, other):
        other = self._coerce(other)
        return (self - other).sign()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __hash__(self):
        return hash(self.as_fraction())

    def __bool__(self):
        return self.mantissa != 0

    def decimal_string(self):
        """Exact finite decimal expansion."""
        if self.exponent >= 0:
            return str(self.mantissa << self.exponent)
        digits = -self.exponent
        scaled = abs(self.mantissa) * 5 ** digits
        body = str(scaled).rjust(digits + 1, '0')
        text = f'{body[:-digits]}.{body[-digits:]}'.rstrip('0').rstrip('.')
        return f'-{text}' if self.mantissa < 0 else text

    def __str__(self):
        if self.exponent >= 0:
            return str(self.mantissa << self.exponent)
        return f'{self.mantissa}/{1 << -self.exponent}'

    def __repr__(self):
        if self.exponent == 0:
            return f'DyadicRational({self.mantissa})'
        return f'DyadicRational({self.mantissa}, {self.exponent})'


ZERO = DyadicRational(0)
ONE = DyadicRational(1)


def dr_add(a, b):
    return a + b


def dr_mul(a, b):
    return a * b


def dr_neg(a):
    return -a


def dr_cmp(a, b):
    return a.compare(b)


def dr_is_zero(a):
    return a.is_zero()


class DyadicPoint:
    """Element of G^d truncated to depth K.

    Parameters
    ----------
    coords: tuple of int
        Per coordinate, the K digits g_0 ... g_{K-1} read as a binary
        number with g_0 most significant.
    depth: int
        The truncation depth K.
    """

    __slots__ = ('coords', 'depth')

    def __init__(self, coords, depth):
        coords = tuple(int(c) for c in coords)
        if depth < 1:
            raise ValueError(f'Depth must be positive, got {depth}')
        if not coords:
            raise ValueError('A point needs at least one coordinate')
        for c in coords:
            if c < 0 or c >> depth:
                raise ValueError(f'Coordinate {c} does not fit in {depth} digits')
        object.__setattr__(self, 'coords', coords)
        object.__setattr__(self, 'depth', depth)

    def __setattr__(self, name, value):
        raise AttributeError('DyadicPoint is immutable')

    @classmethod
    def from_bits(cls, bits):
        bits = [list(b) for b in bits]
        depth = len(bits[0])
        if any(len(b) != depth for b in bits):
            raise ValueError('All coordinates must share the same depth')
        coords = []
        for b in bits:
            if any(v not in (0, 1) for v in b):
                raise ValueError(f'Bits must be 0 or 1, got {b}')
            coords.append(int(''.join(str(v) for v in b), 2))
        return cls(coords, depth)

    @classmethod
    def zero(cls, d, depth):
        return cls((0,) * d, depth)

    @classmethod
    def random(cls, d, depth, rng):
        """Uniform random point; `rng` is a `random.Random`."""
        return cls([rng.getrandbits(depth) for _ in range(d)], depth)

    @property
    def dimension(self):
        return len(self.coords)

    def bit(self, j, t):
        """The digit g^j_t."""
        if not 0 <= t < self.depth:
            raise ValueError(f'Digit {t} is beyond depth {self.depth}')
        return (self.coords[j] >> (self.depth - 1 - t)) & 1

    @property
    def bits(self):
        return tuple(tuple(self.bit(j, t) for t in range(self.depth))
                     for j in range(self.dimension))

    def prefix(self, k):
        """Index vector of the rank-k cube containing the point."""
        if k > self.depth:
            raise ValueError(f'Rank {k} exceeds depth {self.depth}')
        return tuple(c >> (self.depth - k) for c in self.coords)

    def __eq__(self, other):
        if not isinstance(other, DyadicPoint):
            return NotImplemented
        return self.coords == other.coords and self.depth == other.depth

    def __hash__(self):
        return hash((self.coords, self.depth))

    def __repr__(self):
        bits = ' '.join(format(c, f'0{self.depth}b') for c in self.coords)
        return f'DyadicPoint({bits})'


def xor_add(a, b):
    if a.dimension != b.dimension or a.depth != b.depth:
        raise ValueError(f'Cannot add points of shapes ({a.dimension}, {a.depth}) '
                         f'and ({b.dimension}, {b.depth})')
    return DyadicPoint([x ^ y for x, y in zip(a.coords, b.coords)], a.depth)


class DyadicCube:
    """Dyadic cube of a given rank with index vector m, 0 <= m^j < 2**rank."""

    __slots__ = ('rank', 'index')

    def __init__(self, rank, index):
        index = tuple(int(v) for v in index)
        if rank < 0:
            raise ValueError(f'Rank must be nonnegative, got {rank}')
        if not index:
            raise ValueError('A cube needs at least one coordinate')
        for v in index:
            if v < 0 or v >> rank:
                raise ValueError(f'Index {index} out of range for rank {rank}')
        object.__setattr__(self, 'rank', rank)
        object.__setattr__(self, 'index', index)

    def __setattr__(self, name, value):
        raise AttributeError('DyadicCube is immutable')

    @classmethod
    def whole(cls, d):
        return cls(0, (0,) * d)

    @property
    def dimension(self):
        return len(self.index)

    def measure(self):
        return DyadicRational(1, -self.rank * self.dimension)

    def children(self):
        """The 2^d rank+1 subcubes 2m + sigma, sigma in lexicographic order."""
        return [DyadicCube(self.rank + 1, [2 * m + s for m, s in zip(self.index, sigma)])
                for sigma in itertools.product((0, 1), repeat=self.dimension)]

    def parent(self):
        if self.rank == 0:
            raise ValueError('The whole group has no parent cube')
        return DyadicCube(self.rank - 1, [m >> 1 for m in self.index])

    def ancestor(self, k):
        if k > self.rank:
            raise ValueError(f'Rank {k} is finer than {self.rank}')
        return DyadicCube(k, [m >> (self.rank - k) for m in self.index])

    def subcubes(self, k):
        """All rank-k subcubes, in lexicographic index order."""
        if k < self.rank:
            raise ValueError(f'Rank {k} is coarser than {self.rank}')
        shift = k - self.rank
        ranges = [range(m << shift, (m + 1) << shift) for m in self.index]
        return (DyadicCube(k, idx) for idx in itertools.product(*ranges))

    def point(self, depth):
        """The point of this cube whose remaining digits are all zero."""
        if depth < self.rank:
            raise ValueError(f'Depth {depth} is smaller than rank {self.rank}')
        return DyadicPoint([m << (depth - self.rank) for m in self.index], depth)

    def contains_point(self, g):
        return cube_contains_point(self, g)

    def contains_cube(self, other):
        return cube_contains_cube(self, other)

    def __eq__(self, other):
        if not isinstance(other, DyadicCube):
            return NotImplemented
        return self.rank == other.rank and self.index == other.index

    def __lt__(self, other):
        return (self.rank, self.index) < (other.rank, other.index)

    def __hash__(self):
        return hash((self.rank, self.index))

    def __repr__(self):
        return f'DyadicCube(rank={self.rank}, index={self.index})'


def all_cubes(d, k):
    """Every rank-k cube of G^d, in lexicographic index order."""
    return DyadicCube.whole(d).subcubes(k)


def cube_of(g, k):
    return DyadicCube(k, g.prefix(k))


def children(c):
    return c.children()


def measure(c):
    return c.measure()


def cube_contains_point(c, g):
    if c.dimension != g.dimension:
        raise ValueError('Cube and point dimensions differ')
    return g.prefix(c.rank) == c.index


def cube_contains_cube(outer, inner):
    if outer.dimension != inner.dimension:
        raise ValueError('Cube dimensions differ')
    if outer.rank > inner.rank:
        return False
    shift = inner.rank - outer.rank
    return all((i >> shift) == o for o, i in zip(outer.index, inner.index))


def translate_cube(c, g):
    """The cube g + c: index m XOR the first rank(c) digits of g."""
    if c.dimension != g.dimension:
        raise ValueError('Cube and point dimensions differ')
    return DyadicCube(c.rank, [m ^ p for m, p in zip(c.index, g.prefix(c.rank))])
