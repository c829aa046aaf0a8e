import csv
import io
import json
import logging
from fractions import Fraction

import numpy as np


def lowest_set_bit(n):
    """Position of the lowest set bit of a positive integer."""
    if n <= 0:
        raise ValueError(f'Lowest set bit is undefined for {n}')
    return (n & -n).bit_length() - 1


def parity(n):
    return bin(n).count('1') & 1


def reverse_bits(value, width):
    """Reverses the `width` low bits of `value`.

    With the index convention of dyadic cubes (bit t of a point is bit
    k-1-t of the rank-k index), reversing turns an index into the
    sequence g_0 g_1 ... g_{k-1} read as a binary number.
    """
    if width == 0:
        return 0
    return int(format(value, f'0{width}b')[::-1], 2)


def as_index(n, d=None):
    """Normalizes a Walsh multi-index (or any integer vector) to a tuple."""
    if isinstance(n, int):
        if d is None:
            raise TypeError('A scalar index needs an explicit dimension')
        n = (n,) * d
    n = tuple(int(v) for v in n)
    if d is not None and len(n) != d:
        raise ValueError(f'Index {n} does not have dimension {d}')
    if any(v < 0 for v in n):
        raise ValueError(f'Index {n} has negative components')
    return n


class DyadicEncoder(json.JSONEncoder):
    def default(self, obj):
        obj_type = type(obj)
        name = f'{obj_type.__module__}.{obj_type.__name__}'
        if name == 'dyadicwalsh.dyadic.DyadicRational':
            return {'mantissa': obj.mantissa, 'exponent': obj.exponent}
        elif name == 'numpy.ndarray':
            return obj.tolist()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, Fraction):
            return str(obj)
        elif isinstance(obj, (set, frozenset)):
            return sorted(obj)

        return json.JSONEncoder.default(self, obj)


def dumps(payload):
    return json.dumps(payload, cls=DyadicEncoder, sort_keys=True, indent=2) + '\n'


def render_csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def write_artifact(path, content):
    if path is None or path == '-':
        return content
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(content)
    logging.info(f'Wrote {pretty_size(len(content.encode("utf-8")))} to {path}')
    return content


def pretty_size(num_bytes):
    if num_bytes < 1024:
        return f'{num_bytes} B'
    elif num_bytes < 1024 * 1024:
        return f'{num_bytes / 1024:.1f} KB'
    else:
        return f'{num_bytes / 1024 / 1024:.1f} MB'
