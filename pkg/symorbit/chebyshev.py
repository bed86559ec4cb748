"""
Chebyshev polynomials of the first (T) and second (U) kind, evaluated by the
three-term recurrence for scalars, arrays and square matrices.
"""

from enum import Enum

import numpy as np

from .darwin import ReturnMapBlocks, require_darwin
from .errors import AlphaDegenerate, DimensionMismatch


class ChebKind(Enum):
    FIRST = "T"
    SECOND = "U"


def cheb_scalar(kind, k, x):
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")

    x = np.asarray(x, dtype=float)
    previous = np.ones_like(x)
    if k == 0:
        return previous if previous.ndim else float(previous)

    current = x.copy() if kind is ChebKind.FIRST else 2.0 * x
    for _ in range(k - 1):
        previous, current = current, 2.0 * x * current - previous

    return current if current.ndim else float(current)


def cheb_matrix(kind, k, A):
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")

    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")

    previous = np.eye(A.shape[0])
    if k == 0:
        return previous

    current = A.copy() if kind is ChebKind.FIRST else 2.0 * A
    for _ in range(k - 1):
        previous, current = current, 2.0 * A @ current - previous

    return current


def iterate_blocks(blocks, k, tol=1e-6):
    """Blocks of Phi^k: (T_k(A), U_{k-1}(A) B, C U_{k-1}(A), T_k(A^T))."""
    if k < 1:
        raise ValueError(f"iterate must be at least 1, got {k}")

    require_darwin(blocks, tol * max(1.0, np.linalg.norm(blocks.matrix, np.inf)) ** 2)

    if k == 1:
        return ReturnMapBlocks(blocks.A, blocks.B, blocks.C, blocks.D)

    U = cheb_matrix(ChebKind.SECOND, k - 1, blocks.A)

    return ReturnMapBlocks(
        cheb_matrix(ChebKind.FIRST, k, blocks.A),
        U @ blocks.B,
        blocks.C @ U,
        cheb_matrix(ChebKind.FIRST, k, blocks.A.T)
    )


def cheb_trig_reference(k, alpha):
    sin_alpha = np.sin(alpha)
    if abs(sin_alpha) < 1e-12:
        raise AlphaDegenerate(f"sin({alpha}) vanishes")

    return float(np.cos(k * alpha)), float(np.sin((k + 1) * alpha) / sin_alpha)


def mutual_recursion_residuals(k, x):
    """
    Residuals of T_{k+1} = x T_k - (1 - x^2) U_{k-1} and U_k = x U_{k-1} + T_k
    for k >= 1, with x a scalar, an array or a square matrix.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")

    x = np.asarray(x, dtype=float)

    if x.ndim == 2:
        identity = np.eye(x.shape[0])

        def T(j):
            return cheb_matrix(ChebKind.FIRST, j, x)

        def U(j):
            return cheb_matrix(ChebKind.SECOND, j, x)

        first = T(k + 1) - (x @ T(k) - (identity - x @ x) @ U(k - 1))
        second = U(k) - (x @ U(k - 1) + T(k))
    else:
        def T(j):
            return cheb_scalar(ChebKind.FIRST, j, x)

        def U(j):
            return cheb_scalar(ChebKind.SECOND, j, x)

        first = T(k + 1) - (x * T(k) - (1.0 - x * x) * U(k - 1))
        second = U(k) - (x * U(k - 1) + T(k))

    return float(np.max(np.abs(first))), float(np.max(np.abs(second)))


def cheb_table(degrees, grid):
    rows = []
    for k in degrees:
        T = cheb_scalar(ChebKind.FIRST, k, grid)
        U = cheb_scalar(ChebKind.SECOND, k, grid)
        for x, t, u in zip(np.atleast_1d(grid), np.atleast_1d(T), np.atleast_1d(U)):
            rows.append((k, float(x), float(t), float(u)))

    return rows
