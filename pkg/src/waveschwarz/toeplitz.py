"""Block tridiagonal Toeplitz family with 2x2 blocks and its limiting spectrum.

The matrices studied here have A0 = [[0, b], [b, 0]] on the block diagonal,
A1 = [[a, 0], [0, 0]] above and A_{-1} = [[0, 0], [0, a]] below, for nonzero
complex a, b.  Their characteristic polynomials obey the three-term recurrence

    p_m(z) = (z^2 - b^2 + a^2) p_{m-1}(z) - a^2 z^2 p_{m-2}(z),

with p_0 = 1 and p_1 = z^2 - b^2, and the eigenvalues accumulate (as m grows)
on the curve a cos(theta) +/- sqrt(b^2 - a^2 sin^2(theta)) plus at most two
outlier points +/- sqrt(b^2/2 - a^2).
"""

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .numerics import lu_det, poly_eval, poly_roots, poly_trim

__all__ = [
    "ToeplitzBlocks",
    "CharPolySequence",
    "QPolyDiagnostics",
    "LimitSpectrum",
    "SpectrumReport",
    "assemble_dense",
    "charpoly",
    "generating_check",
    "q_poly",
    "limiting_spectrum",
    "spectrum",
]

CURVE_SAMPLES = 4096
# Beyond this block count the eigenvalues are taken from the assembled matrix:
# the monomial coefficients of a degree-2m characteristic polynomial no longer
# carry enough precision to locate extreme roots of elongated spectra.
EIG_SWITCH_M = 80
DET_CROSSCHECK_M = 8
DET_CROSSCHECK_RTOL = 1e-8


def _require_finite(*values):
    for v in values:
        if not np.isfinite(complex(v).real) or not np.isfinite(complex(v).imag):
            raise ValueError("non-finite complex value")


@dataclass(frozen=True)
class ToeplitzBlocks:
    """Coefficient pair (a, b) plus block count m of a 2m x 2m matrix.

    a and b must be nonzero; the degenerate cases (needed for the
    zero-absorption nilpotent experiment, where b = 0) are admitted only under
    `allow_degenerate=True` and only by assemble_dense / limiting_spectrum.
    """

    a: complex
    b: complex
    m: int
    allow_degenerate: bool = False

    def __post_init__(self):
        _require_finite(self.a, self.b)
        if self.m < 1:
            raise ValueError("block count m must be >= 1")
        if not self.allow_degenerate and (self.a == 0 or self.b == 0):
            raise ValueError("a and b must be nonzero (pass allow_degenerate=True "
                             "for the flagged degenerate cases)")

    def require_nondegenerate(self, what):
        if self.a == 0 or self.b == 0:
            raise ValueError(f"{what} requires nonzero a and b")


def assemble_dense(blocks):
    """Dense 2m x 2m matrix with A0 on the diagonal, A1 above, A_{-1} below."""
    a, b, m = blocks.a, blocks.b, blocks.m
    T = np.zeros((2 * m, 2 * m), dtype=complex)
    for i in range(m):
        T[2 * i, 2 * i + 1] = b
        T[2 * i + 1, 2 * i] = b
        if i + 1 < m:
            T[2 * i, 2 * i + 2] = a          # A1 block, (1,1) entry
            T[2 * i + 3, 2 * i + 1] = a      # A_{-1} block, (2,2) entry
    return T


@dataclass
class CharPolySequence:
    """p_0 ... p_m built from the three-term recurrence, plus the quadratics
    A(z) = a^2 z^2 and B(z) = -z^2 + b^2 - a^2 that generate it."""

    blocks: ToeplitzBlocks
    polys: list
    A_of_z: np.ndarray
    B_of_z: np.ndarray

    @property
    def p_m(self):
        return self.polys[-1]


def charpoly(blocks):
    """Characteristic polynomials of the family, by recurrence only."""
    blocks.require_nondegenerate("charpoly")
    a, b, m = blocks.a, blocks.b, blocks.m
    A_of_z = np.array([0.0, 0.0, a * a], dtype=complex)
    B_of_z = np.array([b * b - a * a, 0.0, -1.0], dtype=complex)
    polys = [np.array([1.0 + 0j])]
    if m >= 1:
        polys.append(np.array([-b * b, 0.0, 1.0], dtype=complex))
    for _ in range(2, m + 1):
        p1, p0 = polys[-1], polys[-2]
        q = np.zeros(len(p1) + 2, dtype=complex)
        q[2:] += p1                         # z^2 * p_{m-1}
        q[: len(p1)] += (a * a - b * b) * p1
        q[2 : 2 + len(p0)] -= a * a * p0    # - a^2 z^2 * p_{m-2}
        polys.append(q)
    return CharPolySequence(blocks, polys, A_of_z, B_of_z)


def generating_check(blocks, t, z, terms):
    """|sum_{m<=terms} p_m(z) t^m  -  N(t,z)/D(t,z)| for the generating function.

    N = 1 - a^2 t and D = 1 - (z^2 - b^2 + a^2) t + a^2 z^2 t^2.  The number
    |t| must keep the truncated series in its convergence region: we require
    |t| < 0.5 * min |t_root(D)|, and D(t, z) itself must stay away from zero.
    """
    blocks.require_nondegenerate("generating_check")
    a, b = blocks.a, blocks.b
    t = complex(t)
    z = complex(z)
    _require_finite(t, z)
    if terms < 0:
        raise ValueError("terms must be >= 0")

    Bz = z * z - b * b + a * a
    Az = a * a * z * z
    D = 1.0 - Bz * t + Az * t * t
    N = 1.0 - a * a * t
    if abs(D) < 1e-300:
        raise ValueError("generating function pole: D(t, z) = 0")
    # roots of D as a quadratic (or linear, when A(z)=0) polynomial in t
    if Az != 0:
        troots = np.roots([Az, -Bz, 1.0])
    elif Bz != 0:
        troots = np.array([1.0 / Bz])
    else:
        troots = np.array([])
    if troots.size and abs(t) >= 0.5 * np.abs(troots).min():
        raise ValueError("|t| too large for safe series truncation")

    seq = charpoly(blocks) if blocks.m >= terms else charpoly(
        ToeplitzBlocks(a, b, max(terms, 1)))
    acc = 0.0 + 0j
    tp = 1.0 + 0j
    for mm in range(terms + 1):
        acc += poly_eval(seq.polys[mm], z) * tp
        tp *= t
    return float(abs(acc - N / D))


@dataclass
class QPolyDiagnostics:
    """Degree 2m+2 polynomial whose roots are the root quotients q, with
    c = a^2/z^2; the coefficient list is palindromic and q=0 never occurs."""

    c: complex
    f: np.ndarray
    roots: np.ndarray
    reciprocal_pairing_error: float


def q_poly(blocks, z):
    """The quotient polynomial q^{2m+2} - c q^{2m+1} + 2(c-1) q^{m+1} - c q + 1."""
    blocks.require_nondegenerate("q_poly")
    z = complex(z)
    if z == 0:
        raise ValueError("q_poly requires z != 0")
    m = blocks.m
    c = (blocks.a / z) * (blocks.a / z)
    f = np.zeros(2 * m + 3, dtype=complex)
    f[0] = 1.0
    f[1] = -c
    f[m + 1] = 2.0 * (c - 1.0)
    f[2 * m + 1] = -c
    f[2 * m + 2] = 1.0
    roots = poly_roots(f)
    inv = 1.0 / roots
    dist = np.abs(roots[:, None] - inv[None, :])
    err = float(dist.min(axis=1).max())
    return QPolyDiagnostics(c, f, roots, err)


@dataclass
class LimitSpectrum:
    """Sampled limiting curve, outlier candidates and the sup modulus."""

    thetas: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    outliers: np.ndarray
    admissible: bool
    sup_modulus: float

    def points(self):
        """All curve samples plus admissible outliers, as one flat array."""
        pts = np.concatenate([self.lambda_plus, self.lambda_minus])
        if self.admissible:
            pts = np.concatenate([pts, self.outliers])
        return pts


def limiting_spectrum(a, b, samples=CURVE_SAMPLES):
    """Curve a cos(theta) +/- sqrt(b^2 - a^2 sin^2 theta) on a uniform grid,
    with the two outlier candidates +/- sqrt(b^2/2 - a^2).

    Both square-root branches are emitted at every theta (the theorem
    constrains the set, not a parametrisation).  The outliers carry an
    `admissible` flag equal to |a^2| > |b^2/2 - a^2|.  Degenerate a = 0 or
    b = 0 is accepted here; the curve formula remains meaningful.
    """
    a = complex(a)
    b = complex(b)
    _require_finite(a, b)
    if samples < 2:
        raise ValueError("need at least 2 curve samples")
    thetas = np.linspace(-np.pi, np.pi, samples)
    root = np.sqrt(b * b - a * a * np.sin(thetas) ** 2)
    lam_p = a * np.cos(thetas) + root
    lam_m = a * np.cos(thetas) - root
    out = np.sqrt(0.5 * b * b - a * a)
    outliers = np.array([out, -out])
    admissible = bool(abs(a * a) > abs(0.5 * b * b - a * a))
    sup = max(np.abs(lam_p).max(), np.abs(lam_m).max())
    if admissible:
        sup = max(sup, float(np.abs(outliers).max()))
    return LimitSpectrum(thetas, lam_p, lam_m, outliers, admissible, float(sup))


@dataclass
class SpectrumReport:
    blocks: ToeplitzBlocks
    eigenvalues: np.ndarray
    limit: LimitSpectrum
    distances: np.ndarray
    spectral_radius: float
    max_distance: float
    mean_distance: float
    method: str
    outlier_nearest_eigenvalue: np.ndarray = field(default=None)


def spectrum(blocks, curve_samples=CURVE_SAMPLES, seed=0):
    """Eigenvalues of the assembled family member plus distance-to-limit stats.

    Eigenvalues come from the characteristic-polynomial recurrence and the
    simultaneous root finder; the coefficients are built for the rescaled pair
    (a, b)/r with r = max(|a|, |b|) so that root moduli stay O(1).  For
    m > EIG_SWITCH_M the monomial coefficient representation itself limits
    attainable root accuracy, so the eigenvalues are taken from the dense
    matrix instead (LAPACK); the `method` field records which route ran.
    For m <= DET_CROSSCHECK_M the recurrence polynomial is counter-checked
    against the LU determinant of zI - T at sample points.
    """
    blocks.require_nondegenerate("spectrum")
    a, b, m = blocks.a, blocks.b, blocks.m
    r = max(abs(a), abs(b))
    scaled = ToeplitzBlocks(a / r, b / r, m)

    if m <= EIG_SWITCH_M:
        seq = charpoly(scaled)
        eigs = poly_roots(seq.p_m, seed=seed) * r
        method = "charpoly-roots"
    else:
        eigs = np.linalg.eigvals(assemble_dense(scaled)) * r
        method = "dense-eig"

    if m <= DET_CROSSCHECK_M:
        seq = charpoly(scaled)
        T = assemble_dense(scaled)
        rng = np.random.default_rng(seed)
        zs = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        for z in zs:
            pv = poly_eval(seq.p_m, z)
            dv = lu_det(z * np.eye(2 * m) - T)
            if abs(pv - dv) > DET_CROSSCHECK_RTOL * max(1.0, abs(dv)):
                raise RuntimeError("charpoly/determinant cross-check failed")

    limit = limiting_spectrum(a, b, curve_samples)
    pts = limit.points()
    dists = np.abs(eigs[:, None] - pts[None, :]).min(axis=1)
    out_near = np.abs(limit.outliers[:, None] - eigs[None, :]).min(axis=1)
    return SpectrumReport(
        blocks=blocks,
        eigenvalues=eigs,
        limit=limit,
        distances=dists,
        spectral_radius=float(np.abs(eigs).max()),
        max_distance=float(dists.max()),
        mean_distance=float(dists.mean()),
        method=method,
        outlier_nearest_eigenvalue=out_near,
    )
