"""Interface-iteration coefficients and convergence criteria for the 1D
absorptive wave problem  -u'' + (ik*sigma - k^2) u = 0  on a chain of
overlapping subdomains of pitch L and overlap 2*delta, with Robin
transmission conditions -d/dx + alpha (left) and d/dx + alpha (right).

The pair (a, b) returned by `coefficients_1d` populates the block Toeplitz
iteration matrix of `waveschwarz.toeplitz`; the criteria g+, g-, g decide
|a -+ b| < 1 and |a| < 1 through an explicit change of variables
z = 2*delta*zeta, l = L/(2*delta), gamma = 2*delta*alpha, v = (z-gamma)/(z+gamma).
"""

import cmath
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SchwarzParams",
    "ScaledVars",
    "CriterionValues",
    "SingularConfigurationError",
    "zeta_1d",
    "zeta_mode",
    "resolve_alpha",
    "coefficients_1d",
    "scaled_vars",
    "transfer_quotients",
    "f_abs2_from_g",
    "criteria",
    "k_scaled_params",
]

ALPHA_MODES = ("impedance", "impedance-shifted", "general")
# Relative level below which the transmission denominator has lost every
# significant digit and the configuration is treated as singular.
DENOM_SINGULAR_RTOL = 1e-13
IDENTITY_RTOL = 1e-12


class SingularConfigurationError(ValueError):
    """Raised when a parameter combination makes the local problems singular."""


@dataclass(frozen=True)
class SchwarzParams:
    """Physical and geometric parameters of the 1D chain decomposition.

    Each subdomain has length L + 2*delta and consecutive subdomains overlap
    by 2*delta.  alpha_mode selects the Robin parameter: 'impedance' (ik),
    'impedance-shifted' (ik + sigma) or 'general' (explicit `alpha`).
    """

    k: float
    sigma: float
    delta: float
    L: float
    alpha_mode: str = "impedance"
    N: int = 2
    alpha: complex = None

    def __post_init__(self):
        if not (self.k > 0):
            raise ValueError("k must be > 0")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not (self.delta > 0 and self.L > 0):
            raise ValueError("overlap delta and pitch L must be positive")
        if self.alpha_mode not in ALPHA_MODES:
            raise ValueError(f"alpha_mode must be one of {ALPHA_MODES}")
        if self.alpha_mode == "general" and self.alpha is None:
            raise ValueError("alpha_mode='general' needs an explicit alpha")
        if self.N < 2:
            raise ValueError("need at least N=2 subdomains")


def zeta_1d(k, sigma):
    """Principal square root of ik*sigma - k^2 (Re >= 0; both parts > 0 if sigma > 0)."""
    if k <= 0 or sigma < 0:
        raise ValueError("need k > 0 and sigma >= 0")
    return complex(np.sqrt(complex(-k * k, k * sigma)))


def zeta_mode(k, sigma, k_tilde):
    """Per-transverse-mode root: sqrt(ik*sigma + k_tilde^2 - k^2)."""
    if k <= 0 or sigma < 0 or k_tilde < 0:
        raise ValueError("need k > 0, sigma >= 0 and k_tilde >= 0")
    return complex(np.sqrt(complex(k_tilde * k_tilde - k * k, k * sigma)))


def resolve_alpha(params):
    if params.alpha_mode == "impedance":
        return 1j * params.k
    if params.alpha_mode == "impedance-shifted":
        return 1j * params.k + params.sigma
    return complex(params.alpha)


def coefficients_1d(params, zeta=None, alpha=None):
    """Iteration-matrix coefficients (a, b) for the given parameters.

    a = [(z+al)^2 e^{2 z d} - (z-al)^2 e^{-2 z d}] / D,
    b = -(z^2 - al^2)(e^{zL} - e^{-zL}) / D,
    D = (z+al)^2 e^{z(2d+L)} - (z-al)^2 e^{-z(2d+L)},   z = zeta, d = delta.

    Numerator and denominator are both multiplied by e^{-zeta(2*delta+L)} so
    every exponential has non-positive real part (no overflow for strongly
    evanescent modes).  `zeta` defaults to the 1D root and may be overridden
    with a per-mode value; `alpha` likewise defaults to the mode resolved
    from params.
    """
    z = zeta_1d(params.k, params.sigma) if zeta is None else complex(zeta)
    al = resolve_alpha(params) if alpha is None else complex(alpha)
    d, L = params.delta, params.L
    P = (z + al) ** 2
    Q = (z - al) ** 2
    den = P - Q * cmath.exp(-2.0 * z * (2.0 * d + L))
    num_a = P * cmath.exp(-z * L) - Q * cmath.exp(-z * (4.0 * d + L))
    num_b = (z * z - al * al) * (cmath.exp(-2.0 * z * d) - cmath.exp(-z * (2.0 * d + 2.0 * L)))
    scale = abs(P) + abs(Q)
    if abs(den) <= DENOM_SINGULAR_RTOL * max(scale, 1.0):
        raise SingularConfigurationError("vanishing transmission denominator")
    return num_a / den, -num_b / den


@dataclass(frozen=True)
class ScaledVars:
    """The change of variables feeding every convergence criterion."""

    zeta: complex
    z: complex
    x: float
    y: float
    l: float
    gamma: complex
    v: complex
    w: float
    phi: float
    kappa: float
    s: float
    kappa_tilde: float = None


def scaled_vars(params, k_tilde=None, alpha=None):
    """Scaled variables z = 2*delta*zeta, l, gamma, v (with polar form), kappa, s.

    With k_tilde supplied, zeta is the per-mode root and kappa_tilde = 2*delta*k_tilde
    is recorded.  The defining identities Re z^2 = -kappa^2 (1D) and
    x^2 - y^2 = kappa_tilde^2 - kappa^2 (2D) are verified on exit.
    """
    d = params.delta
    if k_tilde is None:
        zeta = zeta_1d(params.k, params.sigma)
        kappa_tilde = None
    else:
        zeta = zeta_mode(params.k, params.sigma, k_tilde)
        kappa_tilde = 2.0 * d * k_tilde
    al = resolve_alpha(params) if alpha is None else complex(alpha)
    z = 2.0 * d * zeta
    x, y = z.real, z.imag
    kappa = 2.0 * d * params.k
    s = 2.0 * d * params.sigma
    if params.sigma > 0 and not (x > 0 and y > 0):
        raise SingularConfigurationError("principal branch broke: need x, y > 0")
    target = -kappa * kappa if kappa_tilde is None else kappa_tilde**2 - kappa**2
    scale = max(abs(z) ** 2, kappa * kappa, 1e-300)
    if abs((x * x - y * y) - target) > IDENTITY_RTOL * scale * 8:
        raise AssertionError("scaled-variable identity violated")
    gamma = 2.0 * d * al
    if abs(z + gamma) <= 1e-300 * max(abs(z), abs(gamma), 1.0):
        raise SingularConfigurationError("v undefined: z = -gamma")
    v = (z - gamma) / (z + gamma)
    return ScaledVars(
        zeta=zeta, z=z, x=x, y=y, l=params.L / (2.0 * d), gamma=gamma,
        v=v, w=abs(v), phi=cmath.phase(v), kappa=kappa, s=s,
        kappa_tilde=kappa_tilde,
    )


def transfer_quotients(sv):
    """The complex quotients (F+, F-, G) with a -+ b = F+- and a = G.

    Evaluated with all exponentials rescaled by e^{-(l+1)z} for stability.
    """
    z, gamma, l = sv.z, sv.gamma, sv.l
    P = (z + gamma) ** 2
    Q = (z - gamma) ** 2
    den = P - Q * cmath.exp(-2.0 * (l + 1.0) * z)
    if abs(den) <= DENOM_SINGULAR_RTOL * max(abs(P) + abs(Q), 1.0):
        raise SingularConfigurationError("vanishing transmission denominator")
    first = P * cmath.exp(-l * z) - Q * cmath.exp(-(l + 2.0) * z)
    second = (z * z - gamma * gamma) * (cmath.exp(-z) - cmath.exp(-(2.0 * l + 1.0) * z))
    return (first + second) / den, (first - second) / den, first / den


def f_abs2_from_g(sv):
    """Predicted (|F+|^2, |F-|^2) via the decomposition 1 - fraction * g+-.

    The fraction is manifestly positive, which is what makes the sign of g+-
    decide |a -+ b| < 1.  Used to cross-validate the criteria.
    """
    x, y, l, w, phi = sv.x, sv.y, sv.l, sv.w, sv.phi
    e1 = np.exp(x * (l + 1.0))
    ang = (l + 1.0) * y - phi
    denom = (e1 * e1 - w * w) ** 2 + 4.0 * w * w * np.sin(ang) ** 2 * e1 * e1
    gp, gm = _g_pm(sv)
    out = []
    for sign, g in ((+1.0, gp), (-1.0, gm)):
        num = (e1 - w) ** 2 + 2.0 * w * (1.0 - sign * np.cos(ang)) * e1
        out.append(1.0 - (num / denom) * g)
    return tuple(out)


def _g_pm(sv):
    x, y, l, v = sv.x, sv.y, sv.l, sv.v
    with np.errstate(over="ignore"):  # inf keeps the sign meaningful
        base = (np.exp(2.0 * l * x) - 1.0) * (np.exp(2.0 * x) - sv.w**2)
        trig = 4.0 * np.sin(l * y) * (v.imag * np.cos(y) - v.real * np.sin(y)) * np.exp(x * (l + 1.0))
        return float(base + trig), float(base - trig)


def _g_single(sv):
    x, y, l, v = sv.x, sv.y, sv.l, sv.v
    with np.errstate(over="ignore"):
        base = (np.exp(2.0 * l * x) - 1.0) * (np.exp(2.0 * x * (l + 2.0)) - sv.w**4)
        trig = 4.0 * np.sin(l * y) * (
            (v.real**2 - v.imag**2) * np.sin(y * (l + 2.0))
            - 2.0 * v.real * v.imag * np.cos(y * (l + 2.0))
        ) * np.exp(2.0 * x * (l + 1.0))
        return float(base + trig)


@dataclass(frozen=True)
class CriterionValues:
    """g+ > 0 iff |a-b| < 1, g- > 0 iff |a+b| < 1, g > 0 iff |a| < 1; the
    moduli themselves and the limiting spectral-radius bound come along."""

    g_plus: float
    g_minus: float
    g: float
    F_plus_abs: float
    F_minus_abs: float
    G_abs: float
    r1d_bound: float


def criteria(params, k_tilde=None, alpha=None):
    """All closed-form convergence criteria at the given parameters.

    Requires sigma > 0 (the convergence theory assumes absorption).  The
    bound r1d includes the |a| term exactly when |a^2 - b^2/2|^{1/2} < |a|.
    """
    if params.sigma <= 0:
        raise ValueError("criteria require sigma > 0")
    sv = scaled_vars(params, k_tilde=k_tilde, alpha=alpha)
    gp, gm = _g_pm(sv)
    g = _g_single(sv)
    Fp, Fm, G = transfer_quotients(sv)
    a = 0.5 * (Fp + Fm)
    b = 0.5 * (Fm - Fp)
    bound = max(abs(Fp), abs(Fm))
    if abs(a * a - 0.5 * b * b) ** 0.5 < abs(a):
        bound = max(bound, abs(G))
    return CriterionValues(
        g_plus=float(gp), g_minus=float(gm), g=float(g),
        F_plus_abs=abs(Fp), F_minus_abs=abs(Fm), G_abs=abs(G),
        r1d_bound=float(bound),
    )


def k_scaled_params(sigma0, L0, delta0, k, N=2):
    """Wave-number-scaled family: sigma = sigma0*k, L = L0/k, delta = delta0/k.

    Under this scaling the coefficients (a, b) are independent of k, which is
    what makes the method k-robust.
    """
    if sigma0 <= 0 or L0 <= 0 or delta0 <= 0 or k <= 0:
        raise ValueError("all scaling parameters must be positive")
    return SchwarzParams(k=k, sigma=sigma0 * k, delta=delta0 / k, L=L0 / k,
                         alpha_mode="impedance", N=N)
