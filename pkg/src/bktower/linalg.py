"""Small dense matrix helpers over the tower rings.

Matrices are lists of rows.  Entries are anything supporting ``+``, ``-``,
``*`` (``SeriesElement``, ``PDElement`` or ints).
"""

from __future__ import annotations

from itertools import permutations
from typing import Callable, Sequence

Matrix = list[list]


def identity(d: int, one, zero) -> Matrix:
    return [[one if i == j else zero for j in range(d)] for i in range(d)]


def matmul(X: Matrix, Y: Matrix) -> Matrix:
    n, m = len(X), len(Y[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for k in range(len(Y)):
                t = X[i][k] * Y[k][j]
                acc = t if acc is None else acc + t
            row.append(acc)
        out.append(row)
    return out


def matvec(X: Matrix, v: Sequence) -> list:
    return [row_dot(row, v) for row in X]


def row_dot(row: Sequence, v: Sequence):
    acc = None
    for a, b in zip(row, v):
        t = a * b
        acc = t if acc is None else acc + t
    return acc


def entrywise(X: Matrix, f: Callable) -> Matrix:
    return [[f(a) for a in row] for row in X]


def transpose(X: Matrix) -> Matrix:
    return [list(col) for col in zip(*X)]


def column(X: Matrix, j: int) -> list:
    return [row[j] for row in X]


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def det(X: Matrix):
    """Leibniz determinant; ranks here are tiny."""
    d = len(X)
    if d == 1:
        return X[0][0]
    if d == 2:
        return X[0][0] * X[1][1] - X[0][1] * X[1][0]
    acc = None
    for perm in permutations(range(d)):
        t = None
        for i, j in enumerate(perm):
            t = X[i][j] if t is None else t * X[i][j]
        if _perm_sign(perm) < 0:
            t = -t
        acc = t if acc is None else acc + t
    return acc


def minor(X: Matrix, i: int, j: int) -> Matrix:
    return [row[:j] + row[j + 1:] for k, row in enumerate(X) if k != i]


def adjugate(X: Matrix, one) -> Matrix:
    d = len(X)
    if d == 1:
        return [[one]]
    out = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            c = det(minor(X, i, j))
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return out


def unitriangular_inverse(T: Matrix, lower: bool, one, zero) -> Matrix:
    """Exact inverse of a unitriangular matrix by back substitution."""
    d = len(T)
    inv = identity(d, one, zero)
    order = range(d) if lower else range(d - 1, -1, -1)
    for j in range(d):
        for i in order:
            if i == j:
                continue
            if (lower and i < j) or (not lower and i > j):
                continue
            ks = range(j, i) if lower else range(i + 1, j + 1)
            acc = zero
            for k in ks:
                acc = acc + T[i][k] * inv[k][j]
            inv[i][j] = -acc
    return inv


def is_zero_matrix(X: Matrix) -> bool:
    return all(a.is_zero() for row in X for a in row)


def sub(X: Matrix, Y: Matrix) -> Matrix:
    return [[a - b for a, b in zip(r, s)] for r, s in zip(X, Y)]


def permutation_matrix(perm: Sequence[int], one, zero) -> Matrix:
    d = len(perm)
    return [[one if perm[i] == j else zero for j in range(d)] for i in range(d)]
