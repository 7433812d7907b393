"""Desk-scale finite-difference realisation of the 2D absorptive problem on a
strip of unit squares, with a one-level optimised restricted additive Schwarz
preconditioner and right-preconditioned GMRES iteration-count scans.

The discretisation is a 5-point Laplacian plus the (ik*sigma - k^2) mass term
on (0, N_sub) x (0, 1); boundary rows are Dirichlet (guide walls) or
first-order one-sided impedance rows.  This deliberately differs from a
finite-element treatment, so absolute iteration counts are not comparable to
solver tables obtained with one; the plateau/ordering/k-robustness trends are
the reproduction targets.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import numerics

__all__ = [
    "CASES",
    "DiscreteProblem",
    "AssembledSystem",
    "OrasPreconditioner",
    "CountRow",
    "CountTable",
    "pollution_points",
    "assemble",
    "build_oras",
    "solve_direct",
    "solve_gmres",
    "scan_counts",
]

CASES = ("waveguide", "freespace")
# Desk-scale pollution rule: points per unit length grow like k^(3/4) with a
# floor keeping the coarsest grids meaningful.  (The usual k^(3/2) growth is
# deliberately relaxed; trends at k <= ~20 are unaffected and systems stay
# small.)  Calibrated against the scan trends; documented in the README.
POLLUTION_C = 2.2
POLLUTION_FLOOR = 18
SCAN_TOL = 1e-6
SCAN_MAX_ITER = 250


def pollution_points(k, c=POLLUTION_C, floor=POLLUTION_FLOOR):
    """Grid points per unit length for wave number k."""
    return max(floor, int(round(c * k**0.75)))


@dataclass(frozen=True)
class DiscreteProblem:
    """One scan cell: domain (0, N_sub) x (0, 1), unit-square subdomains.

    `case` picks the boundary conditions: 'waveguide' has Dirichlet walls on
    top/bottom and impedance ends, 'freespace' impedance everywhere.  The
    overlap region between neighbouring subdomains is overlap_cells * h wide.
    """

    k: float
    sigma: float
    n_per_unit: int
    N_sub: int
    case: str
    overlap_cells: int = 2

    def __post_init__(self):
        # k = 0 is admitted as a structural limit (pure -Laplacian operator).
        if self.k < 0 or self.sigma < 0:
            raise ValueError("need k >= 0 and sigma >= 0")
        if self.n_per_unit < 9:
            raise ValueError("n_per_unit must be >= 9")
        if self.N_sub < 1:
            raise ValueError("N_sub must be >= 1")
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")
        if self.overlap_cells < 1:
            raise ValueError("overlap_cells must be >= 1")

    @property
    def h(self):
        return 1.0 / (self.n_per_unit - 1)


@dataclass
class AssembledSystem:
    problem: DiscreteProblem
    matrix: sp.csr_matrix
    rhs: np.ndarray
    nx: int
    ny: int

    @property
    def h(self):
        return self.problem.h


def _impedance_pair(k, h):
    # Trapezoidal first-order one-sided impedance row, scaled by h:
    # -(u1 - u0)/h + ik (u0 + u1)/2 = g  ->  (1 + ikh/2) u0 + (-1 + ikh/2) u1.
    return 1.0 + 0.5j * k * h, -1.0 + 0.5j * k * h


def assemble(problem):
    """Sparse system and right-hand side for the plane-wave scattering run.

    Interior rows carry the h^2-scaled 5-point stencil, whose coefficients
    sum to (ik*sigma - k^2) h^2.  The incoming-wave data is the exact trace
    of e^{-zeta x} on the left impedance rows (amplitude 1, evaluated at the
    one-sided row midpoint).
    """
    k, sigma, n = problem.k, problem.sigma, problem.n_per_unit
    h = problem.h
    nx = problem.N_sub * (n - 1) + 1
    ny = n
    zeta = np.sqrt(complex(-k * k, k * sigma))
    c0, c1 = _impedance_pair(k, h)
    diag = (1j * k * sigma - k * k) * h * h + 4.0
    g_left = h * (zeta + 1j * k) * np.exp(-zeta * 0.5 * h)

    idx = lambda i, j: i * ny + j
    rows, cols, vals = [], [], []
    rhs = np.zeros(nx * ny, dtype=complex)
    for i in range(nx):
        for j in range(ny):
            p = idx(i, j)
            on_wall = j == 0 or j == ny - 1
            if on_wall and problem.case == "waveguide":
                rows.append(p); cols.append(p); vals.append(1.0)
                continue
            if i == 0:
                rows += [p, p]; cols += [p, idx(1, j)]; vals += [c0, c1]
                rhs[p] = g_left
                continue
            if i == nx - 1:
                rows += [p, p]; cols += [p, idx(nx - 2, j)]; vals += [c0, c1]
                continue
            if on_wall:  # freespace top/bottom impedance
                jn = 1 if j == 0 else ny - 2
                rows += [p, p]; cols += [p, idx(i, jn)]; vals += [c0, c1]
                continue
            rows += [p] * 5
            cols += [p, idx(i - 1, j), idx(i + 1, j), idx(i, j - 1), idx(i, j + 1)]
            vals += [diag, -1.0, -1.0, -1.0, -1.0]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    return AssembledSystem(problem, A, rhs, nx, ny)


@dataclass
class OrasPreconditioner:
    """M^{-1} = sum_i R_i^T D_i A_i^{-1} R_i with Robin-modified local blocks."""

    restrictions: list                    # per-subdomain global index arrays
    weights: list                         # per-subdomain partition weights
    local_lu: list = field(repr=False, default=None)
    n_global: int = 0

    def apply(self, v):
        out = np.zeros_like(np.asarray(v, dtype=complex))
        for pts, w, lu in zip(self.restrictions, self.weights, self.local_lu):
            out[pts] += w * lu.solve(v[pts])
        return out

    def partition_of_unity_defect(self):
        """max |sum_i R_i^T D_i R_i - I| over the global index set."""
        acc = np.zeros(self.n_global)
        for pts, w in zip(self.restrictions, self.weights):
            acc[pts] += w
        return float(np.abs(acc - 1.0).max())


def build_oras(system):
    """Strip decomposition along x with Robin rows on artificial interfaces.

    Each unit-square subdomain is extended by overlap_cells//2 grid cells past
    its internal interfaces (the extra cell goes left when overlap_cells is
    odd), so neighbours share an overlap_cells * h wide region.  Partition
    weights average by ownership multiplicity.  Sub-unit-wide extensions are
    required; otherwise the decomposition is degenerate.
    """
    problem = system.problem
    n, ny, nx = problem.n_per_unit, system.ny, system.nx
    k, h = problem.k, system.h
    ov = problem.overlap_cells
    lext, rext = (ov + 1) // 2, ov // 2
    if lext + rext >= n - 1:
        raise ValueError("degenerate decomposition: subdomain narrower than overlap")
    c0, c1 = _impedance_pair(k, h)

    restrictions, bounds = [], []
    mult = np.zeros(nx * ny)
    for s in range(problem.N_sub):
        i0 = max(0, s * (n - 1) - lext)
        i1 = min(nx - 1, (s + 1) * (n - 1) + rext)
        pts = (np.arange(i0, i1 + 1)[:, None] * ny + np.arange(ny)[None, :]).ravel()
        restrictions.append(pts)
        bounds.append((i0, i1))
        mult[pts] += 1

    weights = [1.0 / mult[pts] for pts in restrictions]
    lus = []
    A = system.matrix
    for (i0, i1), pts in zip(bounds, restrictions):
        Aloc = A[pts][:, pts].tolil()
        ncols = i1 - i0 + 1
        for jj in range(ny):
            for edge, artificial, inner in ((0, i0 > 0, 1), (ncols - 1, i1 < nx - 1, ncols - 2)):
                if not artificial:
                    continue
                p = edge * ny + jj
                if (jj == 0 or jj == ny - 1) and problem.case == "waveguide":
                    Aloc.rows[p] = [p]
                    Aloc.data[p] = [1.0]
                else:
                    Aloc.rows[p] = [p, inner * ny + jj]
                    Aloc.data[p] = [c0, c1]
        lus.append(spla.splu(Aloc.tocsc()))
    return OrasPreconditioner(restrictions, weights, lus, nx * ny)


def solve_direct(system):
    """Sparse-LU oracle solution of the assembled system."""
    return spla.splu(system.matrix.tocsc()).solve(system.rhs)


def solve_gmres(system, oras=None, tol=SCAN_TOL, max_iter=SCAN_MAX_ITER):
    """Right-preconditioned GMRES run on one assembled cell."""
    A = system.matrix
    apply_Minv = oras.apply if oras is not None else (lambda v: v)
    return numerics.gmres(A.dot, apply_Minv, system.rhs, tol=tol, max_iter=max_iter)


@dataclass
class CountRow:
    case: str
    k: float
    N: int
    iterations: int
    converged: bool


@dataclass
class CountTable:
    rows: list

    def counts_for(self, case, k):
        return [r.iterations for r in self.rows if r.case == case and r.k == k]

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            f.write("case,k,N,iterations,converged\n")
            for r in self.rows:
                f.write(f"{r.case},{r.k:.17g},{r.N},{r.iterations},{int(r.converged)}\n")


def scan_counts(k_list, N_list, sigma, case, overlap_cells=2, tol=SCAN_TOL,
                pollution_c=POLLUTION_C):
    """GMRES iteration counts over a (k, N) grid at relative tolerance `tol`.

    The grid density follows the desk-scale pollution rule.  Non-convergence
    within the iteration cap is recorded in the row, not raised.
    """
    if not k_list or not N_list:
        raise ValueError("k_list and N_list must be nonempty")
    rows = []
    for k in k_list:
        n = pollution_points(k, c=pollution_c)
        for N in N_list:
            problem = DiscreteProblem(k, sigma, n, N, case, overlap_cells)
            system = assemble(problem)
            oras = build_oras(system)
            report = solve_gmres(system, oras, tol=tol)
            rows.append(CountRow(case, float(k), int(N), report.iterations,
                                 report.converged))
    return CountTable(rows)
