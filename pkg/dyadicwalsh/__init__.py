"""
Exact Walsh analysis on the dyadic group
========================================

dyadicwalsh builds quasimeasures on the d-dimensional dyadic group, the
M-sets F^pi with the null-series that realize them, and the symmetric
U-set construction. All values are exact dyadic rationals, and every
closed form can be compared with a brute-force evaluation.

Usage:
    >>> from dyadicwalsh import MSetConfig, closed_form_coefficient, mu_F_tilde
    >>> cfg = MSetConfig(d=2, S=2)
    >>> closed_form_coefficient((16, 16), cfg)
    DyadicRational(1, -3)
    >>> mu_F_tilde(2, cfg)
    DyadicRational(1, -2)

    # Brute force from the quasimeasure itself
    >>> from dyadicwalsh import fourier_coefficient
    >>> fourier_coefficient(cfg.tau, (16, 16), 5)
    DyadicRational(1, -3)

    # Or from the command line
    $ dyadicwalsh --mode verify --dimension 2 --stages 2
"""
__version__ = '0.1.0'

from .dyadic import DyadicCube, DyadicPoint, DyadicRational
from .mset import MSetConfig, ProductPermutation, closed_form_coefficient, mu_F_tilde
from .quasimeasure import Quasimeasure, fourier_coefficient
from .uset import symmetric_index_sequence, u2_contradiction_demo

__all__ = ["DyadicCube", "DyadicPoint", "DyadicRational", "MSetConfig", "ProductPermutation",
           "Quasimeasure", "closed_form_coefficient", "fourier_coefficient", "mu_F_tilde",
           "symmetric_index_sequence", "u2_contradiction_demo", "__version__"]
