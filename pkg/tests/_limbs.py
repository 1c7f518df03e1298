"""Conversion between Python ints and the 3 x 32-bit limb rows of the kernels."""

import numpy as np

MASK = 0xFFFFFFFF


def to_rows(values):
    return np.array([[(int(v) >> (32 * j)) & MASK for j in range(3)] for v in values], dtype=np.uint64)


def from_row(row):
    return int(row[0]) | int(row[1]) << 32 | int(row[2]) << 64
