"""Dense complex-arithmetic kernels: polynomial roots, LU, power iteration, GMRES.

Everything here is value-in/value-out and deterministic for a fixed seed, so it
is safe to call concurrently.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RootFindingError",
    "SolveReport",
    "PowerRadiusEstimate",
    "poly_trim",
    "poly_eval",
    "poly_roots",
    "lu_factor",
    "lu_det",
    "lu_solve",
    "power_radius",
    "gmres",
]

# Defaults surfaced in experiment manifests (see cli.default_tolerances).
POLY_ROOTS_TOL = 1e-12
POLY_ROOTS_MAX_ITER = 500
POWER_TOL = 1e-12
GMRES_BREAKDOWN = 1e-14

_GOLDEN = 0.6180339887498949


class RootFindingError(RuntimeError):
    """Simultaneous iteration failed to converge; carries the worst residual."""

    def __init__(self, worst_residual, iterations):
        self.worst_residual = worst_residual
        self.iterations = iterations
        super().__init__(
            f"root finder did not converge after {iterations} iterations "
            f"(worst relative residual {worst_residual:.3e})"
        )


def poly_trim(coeffs, tol=0.0):
    """Trim (near-)zero leading coefficients; lowest degree first convention."""
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.abs(c).max()
    k = c.size - 1
    while k > 0 and abs(c[k]) <= tol * scale:
        k -= 1
    return c[: k + 1].copy()


def poly_eval(coeffs, z):
    """Horner evaluation of a lowest-degree-first coefficient list."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _eval_with_errbound(coeffs, z):
    """Horner value together with a round-off scale Sum |c_k| |z|^k."""
    az = np.abs(z)
    acc = np.zeros_like(z)
    scale = np.zeros(z.shape, dtype=float)
    for c in coeffs[::-1]:
        acc = acc * z + c
        scale = scale * az + abs(c)
    return acc, scale


def _fujiwara_radius(coeffs):
    """Fujiwara upper bound on the modulus of all roots."""
    c = coeffs
    n = len(c) - 1
    lead = abs(c[-1])
    terms = [abs(c[n - j]) / lead for j in range(1, n + 1)]
    terms[-1] *= 0.5
    vals = [t ** (1.0 / (j + 1)) for j, t in enumerate(terms) if t > 0]
    return 2.0 * max(vals) if vals else 1.0


def poly_roots(coeffs, tol=POLY_ROOTS_TOL, max_iter=POLY_ROOTS_MAX_ITER, seed=0):
    """All complex roots of a polynomial by Aberth simultaneous iteration.

    `coeffs` is lowest degree first; exactly `degree` roots are returned (with
    multiplicity, as individually reported nearby points).  Convergence is
    declared when every iterate satisfies |p(z)| <= tol * scale(z), where
    scale is the coefficient-magnitude Horner sum at |z|.

    Raises RootFindingError on non-convergence and ValueError for degree 0 or
    non-finite input.
    """
    c = poly_trim(coeffs)
    if not np.all(np.isfinite(c.view(float))):
        raise ValueError("polynomial coefficients must be finite")
    n = len(c) - 1
    if n < 1:
        raise ValueError("poly_roots requires degree >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")

    # Strip exact zero roots so the starting circle is well defined.
    n_zero = 0
    while abs(c[0]) == 0.0:
        c = c[1:]
        n_zero += 1
    n_eff = len(c) - 1
    if n_eff == 0:
        return np.zeros(n, dtype=complex)

    radius = _fujiwara_radius(c)
    # Deterministic golden-ratio angular offset; breaks root symmetries.
    offset = 2.0 * np.pi * (((seed + 1) * _GOLDEN) % 1.0)
    angles = 2.0 * np.pi * np.arange(n_eff) / n_eff + offset / n_eff + 0.5 / n_eff
    z = radius * np.exp(1j * angles)

    dp = np.polynomial.polynomial.polyder(c)
    converged = np.zeros(n_eff, dtype=bool)
    for _ in range(max_iter):
        p, scale = _eval_with_errbound(c, z)
        resid = np.abs(p) / np.maximum(scale, np.finfo(float).tiny)
        converged = resid <= tol
        if converged.all():
            break
        d = poly_eval(dp, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(d != 0, p / np.where(d != 0, d, 1), 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            sums = (1.0 / diff).sum(axis=1) - 1.0  # drop the filled diagonal
            denom = 1.0 - newton * sums
            step = np.where(np.abs(denom) > 1e-300, newton / denom, newton)
        step = np.where(converged, 0.0, step)
        z = z - step
    else:
        p, scale = _eval_with_errbound(c, z)
        resid = np.abs(p) / np.maximum(scale, np.finfo(float).tiny)
        if not (resid <= tol).all():
            raise RootFindingError(float(resid.max()), max_iter)

    return np.concatenate([z, np.zeros(n_zero, dtype=complex)])


def lu_factor(A):
    """Partial-pivot LU of a square complex matrix: returns (LU, piv, sign)."""
    M = np.array(A, dtype=complex)
    n, m = M.shape
    if n != m:
        raise ValueError("matrix must be square")
    piv = np.arange(n)
    sign = 1
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if p != k:
            M[[k, p]] = M[[p, k]]
            piv[[k, p]] = piv[[p, k]]
            sign = -sign
        if M[k, k] != 0:
            M[k + 1 :, k] /= M[k, k]
            M[k + 1 :, k + 1 :] -= np.outer(M[k + 1 :, k], M[k, k + 1 :])
    return M, piv, sign


def lu_det(A):
    """Determinant via partial-pivot LU; singular matrices give ~0."""
    M = np.asarray(A, dtype=complex)
    if M.size == 0:
        return complex(1.0)
    LU, _, sign = lu_factor(M)
    return complex(sign * np.prod(np.diag(LU)))


def lu_solve(A, b):
    """Solve A x = b with the partial-pivot LU factorization above."""
    LU, piv, _ = lu_factor(A)
    n = LU.shape[0]
    x = np.asarray(b, dtype=complex)[piv].copy()
    for k in range(n):  # forward, unit lower
        x[k + 1 :] -= LU[k + 1 :, k] * x[k]
    for k in range(n - 1, -1, -1):  # backward
        x[k] -= LU[k, k + 1 :] @ x[k + 1 :]
        x[k] /= LU[k, k]
    return x


@dataclass
class PowerRadiusEstimate:
    value: float
    converged: bool
    last_delta: float


def power_radius(apply, n, restarts=4, iters=2000, tol=POWER_TOL, seed=0):
    """Dominant-eigenvalue magnitude estimate for a linear operator on C^n.

    Power iteration is run on the squared operator so that +/- eigenvalue
    pairs (ubiquitous for the block structures here) collapse onto a single
    dominant direction; the reported value is sqrt of the converged Rayleigh
    quotient magnitude, maximised over random restarts.  For non-normal
    operators this is a lower-bound estimator, used only as a cross-check
    against root-based spectra.
    """
    if n < 1 or restarts < 1:
        raise ValueError("need n >= 1 and restarts >= 1")
    best = PowerRadiusEstimate(0.0, False, np.inf)
    estimates = []
    for r in range(restarts):
        rng = np.random.default_rng((seed, r))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        rq_prev = None
        delta = np.inf
        converged = False
        for _ in range(iters):
            w = apply(apply(v))
            nrm = np.linalg.norm(w)
            if nrm < 1e-150:  # operator (power) annihilated the iterate
                estimates.append(PowerRadiusEstimate(0.0, True, 0.0))
                converged = True
                break
            rq = np.vdot(v, w) / np.vdot(v, v)
            v = w / nrm
            if rq_prev is not None:
                delta = abs(rq - rq_prev) / max(1.0, abs(rq))
                if delta <= tol:
                    estimates.append(
                        PowerRadiusEstimate(float(np.sqrt(abs(rq))), True, float(delta))
                    )
                    converged = True
                    break
            rq_prev = rq
        if not converged:
            estimates.append(
                PowerRadiusEstimate(float(np.sqrt(abs(rq_prev))) if rq_prev is not None else 0.0,
                                    False, float(delta)))
    conv = [e for e in estimates if e.converged]
    pool = conv if conv else estimates
    best = max(pool, key=lambda e: e.value)
    return PowerRadiusEstimate(best.value, bool(conv), best.last_delta)


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    relative_residual_history: list = field(default_factory=list)
    converged: bool = False
    breakdown: bool = False


def gmres(apply_A, apply_Minv, rhs, tol=1e-6, max_iter=400):
    """Full-memory right-preconditioned GMRES for complex operators.

    Solves A x = b by iterating on A M^{-1} y = b, x = M^{-1} y, with
    modified Gram-Schmidt Arnoldi and Givens rotations.  On success the
    relative residual ||b - A x|| / ||b|| is <= tol.  A zero Arnoldi norm
    (breakdown) returns the success-so-far solution; exceeding max_iter
    returns a failure report with the full residual history.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(rhs, dtype=complex)
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveReport(np.zeros(n, dtype=complex), 0, [0.0], True)
    max_iter = min(max_iter, n)

    V = np.zeros((max_iter + 1, n), dtype=complex)
    H = np.zeros((max_iter + 1, max_iter), dtype=complex)
    cs = np.zeros(max_iter, dtype=complex)
    sn = np.zeros(max_iter, dtype=complex)
    g = np.zeros(max_iter + 1, dtype=complex)

    V[0] = b / bnorm
    g[0] = bnorm
    history = []
    breakdown = False

    j = 0
    for j in range(max_iter):
        # copy: operators may return their input buffer (e.g. identity)
        w = np.array(apply_A(apply_Minv(V[j])), dtype=complex)
        for i in range(j + 1):
            H[i, j] = np.vdot(V[i], w)
            w -= H[i, j] * V[i]
        H[j + 1, j] = np.linalg.norm(w)
        if abs(H[j + 1, j]) <= GMRES_BREAKDOWN * bnorm:
            breakdown = True
        else:
            V[j + 1] = w / H[j + 1, j]
        for i in range(j):
            t = H[i, j]
            H[i, j] = np.conj(cs[i]) * t + np.conj(sn[i]) * H[i + 1, j]
            H[i + 1, j] = -sn[i] * t + cs[i] * H[i + 1, j]
        d = np.sqrt(abs(H[j, j]) ** 2 + abs(H[j + 1, j]) ** 2)
        if d == 0.0:
            history.append(history[-1] if history else 1.0)
            breakdown = True
            break
        cs[j] = H[j, j] / d
        sn[j] = H[j + 1, j] / d
        H[j, j] = d
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = np.conj(cs[j]) * g[j]
        history.append(float(abs(g[j + 1]) / bnorm))
        if history[-1] <= tol or breakdown:
            break

    k = j + 1
    y = np.linalg.solve(H[:k, :k], g[:k])
    x = apply_Minv(V[:k].T @ y)
    converged = bool(history and history[-1] <= tol)
    return SolveReport(x, k, history, converged, breakdown)
