"""Transverse-mode analysis of the 2D wave-guide problems.

A Fourier sine (Helmholtz) or sine/cosine (transverse-electric Maxwell)
expansion across the guide reduces each transverse mode k_tilde = m*pi/L_hat
to the 1D problem of `waveschwarz.schwarz1d` with the per-mode root
zeta(k_tilde) = sqrt(ik*sigma + k_tilde^2 - k^2) and Robin parameter ik
(Helmholtz) or ik + sigma (Maxwell).  The 2D convergence factor is the
supremum of the per-mode limiting bounds.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .schwarz1d import (
    SchwarzParams,
    coefficients_1d,
    criteria,
    k_scaled_params,
    scaled_vars,
    zeta_mode,
)

__all__ = [
    "ModeContext",
    "ModeFactor",
    "ModeSweepReport",
    "ModeTruncationPolicy",
    "MaxwellReductionSample",
    "KScaledEntry",
    "make_mode",
    "mode_alpha",
    "r1d_bound_from_coefficients",
    "mode_coefficients",
    "g_tilde",
    "g_tilde_prefactors",
    "sup_convergence_factor",
    "maxwell_reduction_residual",
    "k_scaled_sweep",
    "BETA_GRID_POINTS",
    "BETA_GRID_MAX",
]

EQUATIONS = ("helmholtz", "maxwell")
TAIL_WINDOW = 16
BETA_GRID_POINTS = 4096
BETA_GRID_MAX = 16.0


@dataclass(frozen=True)
class ModeContext:
    """One transverse Fourier mode of a guide of width L_hat."""

    mode_index: int
    k_tilde: float
    L_hat: float
    equation: str
    zeta: complex

    def __post_init__(self):
        if self.mode_index < 1:
            raise ValueError("mode_index must be >= 1")
        if self.L_hat <= 0:
            raise ValueError("L_hat must be positive")
        if self.equation not in EQUATIONS:
            raise ValueError(f"equation must be one of {EQUATIONS}")
        if self.k_tilde != self.mode_index * math.pi / self.L_hat:
            raise ValueError("k_tilde must equal mode_index*pi/L_hat exactly")

    def is_evanescent(self, k):
        return self.k_tilde > k


def make_mode(params, mode_index, L_hat, equation):
    k_tilde = mode_index * math.pi / L_hat
    return ModeContext(
        mode_index=mode_index,
        k_tilde=k_tilde,
        L_hat=L_hat,
        equation=equation,
        zeta=zeta_mode(params.k, params.sigma, k_tilde),
    )


def mode_alpha(params, equation):
    """Robin parameter of the reduced 1D problem for the given family."""
    if equation == "helmholtz":
        return 1j * params.k
    if equation == "maxwell":
        return 1j * params.k + params.sigma
    raise ValueError(f"equation must be one of {EQUATIONS}")


def r1d_bound_from_coefficients(a, b):
    """Limiting spectral-radius bound max(|a+b|, |a-b|) with the |a| term
    included exactly when |a^2 - b^2/2|^{1/2} < |a| (possible outliers)."""
    bound = max(abs(a + b), abs(a - b))
    if abs(a * a - 0.5 * b * b) ** 0.5 < abs(a):
        bound = max(bound, abs(a))
    return bound


def mode_coefficients(params, mode):
    """(a, b) of the reduced 1D problem at this mode."""
    return coefficients_1d(params, zeta=mode.zeta, alpha=mode_alpha(params, mode.equation))


# numpy transcendentals overflow to inf instead of raising, which keeps the
# signs of g~ meaningful even for extremely evanescent modes
def _g_tilde_helmholtz(kappa, s, x, y, l):
    with np.errstate(over="ignore"):
        gp_hyp = ((kappa**2 + x * x + y * y) * np.sinh(x)
                  + 2.0 * kappa * y * np.cosh(x)) * np.sinh(l * x)
        gp_trig = ((kappa**2 - x * x - y * y) * np.sin(y)
                   - 2.0 * kappa * x * np.cos(y)) * np.sin(l * y)
        g_hyp = (((kappa**2 + x * x + y * y) ** 2 + 4.0 * kappa**2 * y * y)
                 * np.sinh(x * (l + 2.0))
                 + 4.0 * kappa * y * (kappa**2 + x * x + y * y)
                 * np.cosh(x * (l + 2.0))) * np.sinh(l * x)
        g_trig = (((-(kappa**2) + x * x + y * y) ** 2 - 4.0 * kappa**2 * x * x)
                  * np.sin(y * (l + 2.0))
                  + 4.0 * kappa * x * (-(kappa**2) + x * x + y * y)
                  * np.cos(y * (l + 2.0))) * np.sin(l * y)
        return float(gp_hyp + gp_trig), float(gp_hyp - gp_trig), float(g_hyp + g_trig)


def _g_tilde_maxwell(kappa, s, x, y, l):
    with np.errstate(over="ignore"):
        q = kappa**2 + s * s + x * x + y * y
        cross = kappa * y + s * x
        gp_hyp = (q * np.sinh(x) + 2.0 * cross * np.cosh(x)) * np.sinh(l * x)
        gp_trig = ((kappa**2 + s * s - x * x - y * y) * np.sin(y)
                   + 2.0 * (s * y - kappa * x) * np.cos(y)) * np.sin(l * y)
        g_hyp = ((q * q + 4.0 * cross**2) * np.sinh(x * (l + 2.0))
                 + 4.0 * cross * q * np.cosh(x * (l + 2.0))) * np.sinh(l * x)
        qm = -(kappa**2) - s * s + x * x + y * y
        tw = kappa * x - s * y
        g_trig = ((qm * qm - 4.0 * tw * tw) * np.sin(y * (l + 2.0))
                  + 4.0 * tw * qm * np.cos(y * (l + 2.0))) * np.sin(l * y)
        return float(gp_hyp + gp_trig), float(gp_hyp - gp_trig), float(g_hyp + g_trig)


def g_tilde(params, mode):
    """(g~+, g~-, g~) in their explicit trigonometric/hyperbolic forms.

    These equal the corresponding g criteria divided by the strictly positive
    prefactors of `g_tilde_prefactors`, so their signs localise exactly which
    modes satisfy |a -+ b| < 1 and |a| < 1.
    """
    if params.sigma <= 0:
        raise ValueError("g_tilde requires sigma > 0")
    sv = scaled_vars(params, k_tilde=mode.k_tilde,
                     alpha=mode_alpha(params, mode.equation))
    fn = _g_tilde_helmholtz if mode.equation == "helmholtz" else _g_tilde_maxwell
    return fn(sv.kappa, sv.s, sv.x, sv.y, sv.l)


def g_tilde_prefactors(params, mode):
    """The positive factors with g = prefactor * g~ (pair one, single one)."""
    sv = scaled_vars(params, k_tilde=mode.k_tilde,
                     alpha=mode_alpha(params, mode.equation))
    if mode.equation == "helmholtz":
        denom = (sv.kappa + sv.y) ** 2 + sv.x**2
    else:
        denom = (sv.kappa + sv.y) ** 2 + (sv.s + sv.x) ** 2
    with np.errstate(over="ignore"):
        pref_pm = float(4.0 * np.exp(sv.x * (sv.l + 1.0)) / denom)
        pref_g = float(4.0 * np.exp(2.0 * sv.x * (sv.l + 1.0)) / denom**2)
    return pref_pm, pref_g


@dataclass(frozen=True)
class ModeTruncationPolicy:
    """How far the mode sweep goes.

    The default cap covers every propagating mode and a wide evanescent
    margin; the sweep stops early once `tail_window` consecutive evanescent
    modes have monotonically decreasing factors below the running supremum
    (strongly evanescent coefficients decay exponentially, so the tail cannot
    raise the sup).
    """

    m_cap: int = None
    tail_window: int = TAIL_WINDOW

    def cap_for(self, k, L_hat):
        if self.m_cap is not None:
            return self.m_cap
        return math.ceil(4.0 * k * L_hat / math.pi) + 64


@dataclass
class ModeFactor:
    mode: ModeContext
    a: complex
    b: complex
    r1d_mode: float
    criterion: object
    g_tilde: tuple


@dataclass
class ModeSweepReport:
    per_mode: list
    sup_factor: float
    argmax_mode: ModeContext
    truncation: int
    complete: bool
    rationale: str

    def factors(self):
        return np.array([mf.r1d_mode for mf in self.per_mode])


def sup_convergence_factor(params, L_hat, equation, policy=None):
    """Per-mode factors and their supremum R2d = sup over modes of R1d(k_tilde)."""
    if L_hat <= 0:
        raise ValueError("L_hat must be positive")
    if equation not in EQUATIONS:
        raise ValueError(f"equation must be one of {EQUATIONS}")
    policy = policy or ModeTruncationPolicy()
    cap = policy.cap_for(params.k, L_hat)
    alpha = mode_alpha(params, equation)

    per_mode = []
    sup = -math.inf
    argmax = None
    tail = 0
    prev = math.inf
    complete = False
    rationale = f"cap of {cap} modes reached without certified tail decay"
    for m in range(1, cap + 1):
        mode = make_mode(params, m, L_hat, equation)
        a, b = mode_coefficients(params, mode)
        crit = criteria(params, k_tilde=mode.k_tilde, alpha=alpha)
        gt = g_tilde(params, mode)
        r = r1d_bound_from_coefficients(a, b)
        per_mode.append(ModeFactor(mode, a, b, r, crit, gt))
        if r > sup:
            sup = r
            argmax = mode
        if mode.is_evanescent(params.k) and r < prev and r < sup:
            tail += 1
            if tail >= policy.tail_window:
                complete = True
                rationale = (f"stopped after mode {m}: last {policy.tail_window} modes "
                             "evanescent with monotonically decreasing factors below the sup")
                break
        else:
            tail = 0
        prev = r
    else:
        if tail >= policy.tail_window:
            complete = True
            rationale = f"cap of {cap} modes reached with decaying evanescent tail"
    return ModeSweepReport(per_mode, float(sup), argmax, len(per_mode), complete, rationale)


@dataclass(frozen=True)
class MaxwellReductionSample:
    """Coefficients of one local Maxwell mode solution, for the boundary
    operator reduction check."""

    alpha_j: complex
    beta_j: complex
    k: float
    sigma: float
    k_tilde: float

    def __post_init__(self):
        if self.k <= 0 or self.sigma < 0 or self.k_tilde <= 0:
            raise ValueError("need k > 0, sigma >= 0 and k_tilde > 0")

    @property
    def zeta(self):
        return zeta_mode(self.k, self.sigma, self.k_tilde)


def maxwell_reduction_residual(sample, x_eval):
    """|(d/dx + ik) w - k_tilde v  -  (ik/k_tilde)(d/dx + ik + sigma) v| at x_eval.

    v and w are the transverse/longitudinal mode profiles
    v = (k_tilde/zeta)(-alpha_j e^{-zeta x} + beta_j e^{zeta x}),
    w = alpha_j e^{-zeta x} + beta_j e^{zeta x},
    differentiated in closed form.  The reduction lemma makes this identically
    zero, so the return value is pure round-off.
    """
    zt = sample.zeta
    kt = sample.k_tilde
    k = sample.k
    em = sample.alpha_j * cmath.exp(-zt * x_eval)
    ep = sample.beta_j * cmath.exp(zt * x_eval)
    v = (kt / zt) * (-em + ep)
    w = em + ep
    dv = kt * (em + ep)
    dw = zt * (-em + ep)
    lhs = dw + 1j * k * w - kt * v
    rhs = (1j * k / kt) * (dv + (1j * k + sample.sigma) * v)
    return float(abs(lhs - rhs))


def default_beta_grid():
    """Fixed k-independent grid of beta = (k_tilde/k)^2 values.

    Geometric coverage of tiny beta (the lowest guide mode of a large-k run
    sits far below 1) plus a uniform sweep through the propagating and
    moderately evanescent range.
    """
    low = np.geomspace(1e-6, 0.01, 257, endpoint=False)
    main = np.linspace(0.01, BETA_GRID_MAX, BETA_GRID_POINTS)
    return np.concatenate([low, main])


@dataclass
class KScaledEntry:
    k: float
    sweep: ModeSweepReport
    beta_sup: float
    beta_argmax: float


def k_scaled_sweep(sigma0, L0, delta0, L_hat, k_list, equation, policy=None,
                   beta_grid=None):
    """Mode sweeps for the k-scaled family plus the beta-parametrised bound.

    Under sigma = sigma0*k, L = L0/k, delta = delta0/k the per-mode factor
    depends on k only through beta = (k_tilde/k)^2, so the bound evaluated on
    a fixed beta grid is identical for every k and dominates each discrete
    mode supremum (modes sample the same curve ever more densely as k grows).
    """
    grid = default_beta_grid() if beta_grid is None else np.asarray(beta_grid, dtype=float)
    entries = []
    for k in k_list:
        params = k_scaled_params(sigma0, L0, delta0, k)
        sweep = sup_convergence_factor(params, L_hat, equation, policy)
        alpha = mode_alpha(params, equation)

        def factor_at(beta):
            kt = math.sqrt(beta) * k
            zt = zeta_mode(k, params.sigma, kt)
            a, b = coefficients_1d(params, zeta=zt, alpha=alpha)
            return r1d_bound_from_coefficients(a, b)

        vals = np.array([factor_at(beta) for beta in grid])
        i = int(np.argmax(vals))
        # polish the coarse peak by golden-section search so the bound truly
        # dominates every discrete mode (modes sample the same curve)
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        best, best_beta = _golden_max(factor_at, lo, hi)
        if vals[i] > best:
            best, best_beta = vals[i], grid[i]
        entries.append(KScaledEntry(float(k), sweep, float(best), float(best_beta)))
    return entries


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo, hi, iters=80):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-14 * max(1.0, abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (fc, c) if fc > fd else (fd, d)
