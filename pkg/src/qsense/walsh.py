"""Sequency-ordered Walsh functions and Walsh-basis signal reconstruction.

Walsh functions are the +-1-valued square-wave analogue of sinusoids.  The
sequency ordering used here sorts the rows of the Sylvester Hadamard matrix
by their number of sign changes, so index n has exactly n zero crossings on
the unit interval: w_0 = 1 (Ramsey), w_1 flips once at 1/2 (spin echo),
w_2 is the 2-pulse CP pattern, and w_{2^m - 1} flips at every dyadic point
(PDD with 2^m - 1 interior pulses).
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.linalg import hadamard


@functools.lru_cache(maxsize=32)
def walsh_matrix(n_functions: int) -> np.ndarray:
    """First ``n_functions`` Walsh functions as rows, sequency-ordered.

    ``n_functions`` must be a power of two; row n of the result evaluates
    w_n on the n_functions dyadic subintervals of [0, 1).
    """
    n = int(n_functions)
    if n < 1 or n & (n - 1):
        raise ValueError("n_functions must be a positive power of two")
    h = hadamard(n)
    changes = np.count_nonzero(np.diff(h, axis=1), axis=1)
    order = np.argsort(changes, kind="stable")
    m = h[order]
    m.setflags(write=False)
    return m


def walsh_function(n: int, s) -> np.ndarray:
    """Evaluate w_n at normalized positions s in [0, 1].

    The endpoint s = 1 takes the value of the final dyadic piece.
    """
    if n < 0:
        raise ValueError("index must be non-negative")
    size = 1 << max(0, (n).bit_length())
    if size < n + 1:
        size <<= 1
    row = walsh_matrix(size)[n]
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("positions must lie in [0, 1]")
    idx = np.minimum((s * size).astype(int), size - 1)
    return row[idx].astype(float)


def _dyadic_integrals(signal, n_pieces: int, total_time: float,
                      points_per_piece: int = 33) -> np.ndarray:
    """Gauss-Legendre integral of ``signal`` over each dyadic piece.

    GL nodes are strictly interior, so signals that jump exactly at dyadic
    boundaries (Walsh sums themselves) integrate exactly.
    """
    nodes, weights = np.polynomial.legendre.leggauss(points_per_piece)
    edges = np.linspace(0.0, total_time, n_pieces + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    v = np.asarray(signal(t), dtype=float).reshape(n_pieces, -1)
    return half * (v @ weights)


def walsh_coefficients(signal, n_terms: int, total_time: float,
                       points_per_piece: int = 33) -> np.ndarray:
    """Walsh-basis expansion coefficients of a time-domain signal.

    Coefficient n is the time average of signal(t) * w_n(t/total_time); for
    a protocol whose modulation follows w_n, it is the field component the
    sequence locks onto (n = 0 recovers the Ramsey DC average).  The signal
    is integrated piecewise over the 2^m dyadic intervals on which every
    retained Walsh function is constant, with fixed-order Gauss-Legendre
    inside each piece, so smooth signals converge fast; raise
    ``points_per_piece`` for strongly oscillatory ones.
    """
    w = walsh_matrix(n_terms)
    pieces = _dyadic_integrals(signal, n_terms, total_time, points_per_piece)
    return (w @ pieces) / total_time


def walsh_reconstruct(coefficients) -> "WalshSeries":
    """Partial-sum reconstruction sum_n V_n w_n(s), callable on [0, 1]."""
    return WalshSeries(np.asarray(coefficients, dtype=float))


class WalshSeries:
    """Finite Walsh series; evaluates its partial sum at normalized time."""

    def __init__(self, coefficients):
        c = np.asarray(coefficients, dtype=float)
        n = 1 << max(0, int(math.ceil(math.log2(max(c.size, 1)))))
        if n < c.size:
            n <<= 1
        self.coefficients = c
        # Pre-evaluate the sum on the common dyadic grid.
        self._values = walsh_matrix(n)[: c.size].T @ c
        self._n = n

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any((s < 0) | (s > 1)):
            raise ValueError("positions must lie in [0, 1]")
        idx = np.minimum((s * self._n).astype(int), self._n - 1)
        return self._values[idx]
