"""Blade multiplication tables for R_{0,n}.

Blades are encoded as bitmasks over the generators e_1..e_n (bit i-1 set
means e_i is present); the scalar blade is mask 0.  The product of two
blades is sign * (a ^ b) where the sign collects the reordering parity of
merging two ascending generator words plus one factor -1 per contracted
generator (e_i^2 = -1).
"""

from functools import lru_cache

import numpy as np


def mul_sign(a: int, b: int) -> int:
    """Sign of the blade product e_a * e_b (masks in, +1/-1 out)."""
    swaps = 0
    x = b
    while x:
        i = (x & -x).bit_length() - 1  # lowest set bit of b
        swaps += (a >> (i + 1)).bit_count()
        x &= x - 1
    sign = -1 if swaps & 1 else 1
    if (a & b).bit_count() & 1:
        sign = -sign
    return sign


@lru_cache(maxsize=None)
def tables(n: int):
    """(IDX, SGN) arrays of shape (2^n, 2^n): e_j e_k = SGN[j,k] e_{IDX[j,k]}."""
    dim = 1 << n
    idx = np.empty((dim, dim), dtype=np.int64)
    sgn = np.empty((dim, dim), dtype=np.int64)
    for j in range(dim):
        for k in range(dim):
            idx[j, k] = j ^ k
            sgn[j, k] = mul_sign(j, k)
    idx.setflags(write=False)
    sgn.setflags(write=False)
    return idx, sgn


@lru_cache(maxsize=None)
def generator_action(n: int):
    """Left action of each single generator on all blades.

    Returns (perm, sign) of shape (n+1, 2^n): e_i * e_m = sign[i,m] e_perm[i,m],
    where row 0 is the identity action of e_0 = 1.
    """
    dim = 1 << n
    perm = np.empty((n + 1, dim), dtype=np.int64)
    sign = np.empty((n + 1, dim), dtype=np.int64)
    perm[0] = np.arange(dim)
    sign[0] = 1
    for i in range(1, n + 1):
        g = 1 << (i - 1)
        for m in range(dim):
            perm[i, m] = g ^ m
            sign[i, m] = mul_sign(g, m)
    perm.setflags(write=False)
    sign.setflags(write=False)
    return perm, sign


def grade_masks(n: int):
    """Blade masks grouped by grade, as a list of index arrays."""
    dim = 1 << n
    grades = np.array([m.bit_count() for m in range(dim)])
    return [np.flatnonzero(grades == g) for g in range(n + 1)]
