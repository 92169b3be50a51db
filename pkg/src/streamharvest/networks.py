"""Movement matrices for common stream layouts.

Entry ``(i, j)`` is the rate from patch ``j`` to patch ``i``; indices here are
0-based, so "patch 1" in prose is row/column 0.
"""

from __future__ import annotations

import numpy as np

from .model import Model


def straight_stream_matrix(n: int, d: float, q: float) -> np.ndarray:
    """Chain 0 -> 1 -> ... -> n-1 flowing downstream: d+q down, d up."""
    if n < 1:
        raise ValueError("n must be at least 1")
    A = np.zeros((n, n))
    for i in range(n - 1):
        A[i + 1, i] = d + q
        A[i, i + 1] = d
    return A


def three_one_one_matrix(d: float, q: float) -> np.ndarray:
    """Three headwater patches draining into a junction, which drains into an outlet.

    Patches 0, 1, 2 feed patch 3 at rate d+q and receive d back; patch 3 feeds
    patch 4 at d+q and receives d back.
    """
    A = np.zeros((5, 5))
    for head in (0, 1, 2):
        A[3, head] = d + q
        A[head, 3] = d
    A[4, 3] = d + q
    A[3, 4] = d
    return A


def straight_stream(n: int, d: float, q: float, r, c) -> Model:
    return Model(np.broadcast_to(np.asarray(r, float), (n,)).copy(),
                 np.broadcast_to(np.asarray(c, float), (n,)).copy(),
                 straight_stream_matrix(n, d, q))


def three_one_one(d: float, q: float, r, c) -> Model:
    return Model(np.broadcast_to(np.asarray(r, float), (5,)).copy(),
                 np.broadcast_to(np.asarray(c, float), (5,)).copy(),
                 three_one_one_matrix(d, q))
