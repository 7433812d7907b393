"""Global interface iteration: assembly of the stationary iteration matrix,
the iteration itself, spectral-radius scans over the subdomain count, and the
zero-absorption nilpotency check.

The interface state holds the Robin data
[R+(b_1), R-(a_2), R+(b_2), ..., R+(b_{N-1}), R-(a_N)] (length 2(N-1); the
homogeneous end conditions R-(a_1) = R+(b_N) = 0 are eliminated), and one
Schwarz sweep multiplies it by a block Toeplitz matrix with coefficients
(a, b) from `waveschwarz.schwarz1d`.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from . import toeplitz
from .schwarz1d import SchwarzParams, coefficients_1d, criteria, zeta_mode
from .toeplitz import ToeplitzBlocks, assemble_dense, spectrum

__all__ = [
    "IterationHistory",
    "build_iteration_matrix",
    "iterate",
    "spectral_radius_curve",
    "nilpotency_check",
]

RATE_FIT_FRACTION = 1.0 / 3.0  # fit the tail only; early non-normal growth lies


def build_iteration_matrix(a, b, N):
    """Interface iteration matrix for N subdomains, from its 2x2 couplings.

    Built directly from T1 = [[a, b], [0, 0]], T2 = [[0, 0], [b, a]] and the
    truncated corner blocks (rows [b a] / [a b], columns [b 0]^T / [0 b]^T),
    which reproduces the block Toeplitz structure with m = N - 1 blocks.
    Returns (blocks, dense matrix).
    """
    if N < 2:
        raise ValueError("need at least N=2 subdomains")
    m = N - 1
    n = 2 * m
    T = np.zeros((n, n), dtype=complex)
    # Row for R+(b_1): hat-T2 acting on (R-(a_2), R+(b_2)).
    if N == 2:
        # Only R+(b_1), R-(a_2) survive; the corner rows couple through b.
        T[0, 1] = b
        T[1, 0] = b
    else:
        T[0, 1] = b
        T[0, 2] = a
        # Interior pairs j = 2..N-1: entries R-(a_j) at 2j-3, R+(b_j) at 2j-2.
        for j in range(2, N):
            r_minus = 2 * j - 3
            r_plus = 2 * j - 2
            if j == 2:
                T[r_minus, 0] = b                     # tilde-T1 column from R+(b_1)
            else:
                T[r_minus, 2 * j - 5] = a             # T1 row 1 on previous pair
                T[r_minus, 2 * j - 4] = b
            if j == N - 1:
                T[r_plus, 2 * j - 1] = b              # tilde-T2 column from R-(a_N)
            else:
                T[r_plus, 2 * j - 1] = b              # T2 row 2 on next pair
                T[r_plus, 2 * j] = a
        # Row for R-(a_N): hat-T1 acting on (R-(a_{N-1}), R+(b_{N-1})).
        T[n - 1, n - 3] = a
        T[n - 1, n - 2] = b
    blocks = ToeplitzBlocks(a, b, m, allow_degenerate=(a == 0 or b == 0))
    return blocks, T


@dataclass
class IterationHistory:
    norms: list
    estimated_rate: float
    steps: int


def iterate(matrix, r0, steps):
    """Run the stationary interface iteration and fit a geometric rate.

    The rate is a least-squares fit of log ||R^n|| over the final third of
    the recorded steps; the pre-asymptotic two-thirds are excluded because
    the matrix is non-normal and early norms may grow.
    """
    r = np.asarray(r0, dtype=complex)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if np.linalg.norm(r) == 0:
        raise ValueError("r0 must be nonzero")
    norms = [float(np.linalg.norm(r))]
    for _ in range(steps):
        r = matrix @ r
        norms.append(float(np.linalg.norm(r)))
    tail_start = max(int(np.ceil(len(norms) * (1.0 - RATE_FIT_FRACTION))), 0)
    tail = np.array(norms[tail_start:])
    if (tail <= 0).any() or len(tail) < 2:
        rate = 0.0
    else:
        t = np.arange(len(tail))
        slope = np.polyfit(t, np.log(tail), 1)[0]
        rate = float(np.exp(slope))
    return IterationHistory(norms, rate, steps)


@dataclass
class RadiusCurve:
    points: list          # (N, spectral radius) pairs
    r1d_bound: float
    a: complex
    b: complex


def spectral_radius_curve(params, N_list, k_tilde=None, alpha=None):
    """Spectral radius of the iteration matrix for each subdomain count,
    paired with the limiting bound for the same (a, b)."""
    zeta = None if k_tilde is None else zeta_mode(params.k, params.sigma, k_tilde)
    a, b = coefficients_1d(params, zeta=zeta, alpha=alpha)
    crit = criteria(params, k_tilde=k_tilde, alpha=alpha)
    pts = []
    for N in N_list:
        if N < 2:
            raise ValueError("each N must be >= 2")
        rep = spectrum(ToeplitzBlocks(a, b, N - 1))
        pts.append((int(N), rep.spectral_radius))
    return RadiusCurve(pts, crit.r1d_bound, a, b)


def nilpotency_check(k, delta, L, N):
    """Relative spectral norm ||T^{N-1}|| / ||T||^{N-1} at zero absorption.

    With sigma = 0 and Robin parameter ik the transmission conditions are
    transparent: b = 0, a = e^{-ikL}, and the iteration matrix is nilpotent
    of index N - 1, so the returned value is round-off-level.
    """
    if N < 2:
        raise ValueError("need at least N=2 subdomains")
    a = cmath.exp(-1j * k * L)
    blocks = ToeplitzBlocks(a, 0.0, N - 1, allow_degenerate=True)
    T = assemble_dense(blocks)
    P = np.linalg.matrix_power(T, N - 1)
    base = np.linalg.norm(T, 2)
    if base == 0:
        return 0.0
    return float(np.linalg.norm(P, 2) / base ** (N - 1))
