"""Closed-form Burgers solution for the 1D cosine initial condition.

The derived macroscopic equation

    d_t rho + c_s (1 - rho) d_x rho = nu d_xx rho

maps to Burgers' equation for w = c_s (1 - rho).  With the periodic
cosine initial density the Cole-Hopf transform turns it into a heat
problem whose solution is a modified-Bessel series:

    psi(x, t) = I_0(A) + 2 sum_{l>=1} I_l(A) exp(-nu l^2 beta^2 t) F_l(x)
    F_l(x)    = cos(l pi / 2) cos(l beta x) + sin(l pi / 2) sin(l beta x)
    w(x, t)   = w_bar - 2 nu d_x ln psi,      rho = 1 - w / (c alpha)

with beta = 2 pi / L_x, A = c alpha rho_a / (2 nu beta) and
w_bar = c alpha (1 - rho_b).

Bessel functions enter only through the ratios I_l(A)/I_0(A), computed
by normalized backward recurrence; the unscaled I_l(A) ~ e^A / sqrt(A)
would overflow long before the ratios lose accuracy.  Sums are carried
in extended precision: psi has dynamic range ~ e^{2A} across the
domain, and in plain float64 the cancellation near its minimum shows up
as ~1e-4 noise in rho for the reference configuration (A ~ 15), versus
~1e-8 with 80-bit arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AnalyticConfig",
    "TruncationError",
    "bessel_ratio",
    "bessel_ratios",
    "cole_hopf_density",
    "evaluate_on_grid",
    "residual_check",
]

_LD = np.longdouble

# cos(l pi / 2), sin(l pi / 2) by l mod 4, evaluated exactly.
_COS_HALF_PI = (1, 0, -1, 0)
_SIN_HALF_PI = (0, 1, 0, -1)


class TruncationError(ArithmeticError):
    """The truncated series produced a non-positive psi."""


@dataclass(frozen=True)
class AnalyticConfig:
    """Parameters of the analytic solution.

    ``c`` is the lattice speed dx/dt and ``alpha`` the advection
    parameter, so the advection speed is c_s = c * alpha.  ``l_trunc``
    is the series truncation order; 80 terms reproduce the reference
    setup to well below 1e-8.
    """

    length_x: float
    rho_b: float
    rho_a: float
    c: float
    alpha: float
    nu: float
    l_trunc: int = 80

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu!r}")
        if self.l_trunc < 1:
            raise ValueError(f"l_trunc must be >= 1, got {self.l_trunc!r}")
        if self.length_x <= 0.0:
            raise ValueError(f"length_x must be positive, got {self.length_x!r}")

    @property
    def beta(self) -> float:
        return 2.0 * math.pi / self.length_x

    @property
    def amplitude(self) -> float:
        """Bessel argument A = c alpha rho_a / (2 nu beta)."""
        return self.c * self.alpha * self.rho_a / (2.0 * self.nu * self.beta)

    @property
    def w_bar(self) -> float:
        """Mean of the initial Burgers field, c alpha (1 - rho_b)."""
        return self.c * self.alpha * (1.0 - self.rho_b)


def bessel_ratios(l_max: int, a: float) -> np.ndarray:
    """Ratios I_l(a)/I_0(a) for l = 0..l_max, by backward recurrence.

    Miller's algorithm: start the three-term recurrence
    I_{k-1} = I_{k+1} + (2k/a) I_k far above ``l_max`` with an arbitrary
    seed, recurse down to k = 0 and normalize by the l = 0 entry.  The
    start order ``max(l_max, a, 256) + 60`` keeps the relative error of
    every ratio below 1e-15 (checked against a brute-force series oracle
    in the tests) and, being independent of ``l_max`` up to order 256,
    returns bitwise-identical ratios for shared orders when only the
    truncation changes.  Intermediate values are rescaled when they grow
    large, so no unscaled Bessel value is ever formed.
    """
    if a <= 0.0:
        raise ValueError(f"Bessel argument must be positive, got {a!r}")
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max!r}")
    a_ld = _LD(a)
    start = int(max(l_max, math.ceil(a), 256)) + 60
    vals = np.zeros(start + 2, dtype=_LD)
    vals[start] = _LD(1e-30)
    for k in range(start, 0, -1):
        vals[k - 1] = vals[k + 1] + (_LD(2 * k) / a_ld) * vals[k]
        if abs(vals[k - 1]) > _LD("1e280"):
            vals[k - 1 :] /= _LD("1e280")
    return vals[: l_max + 1] / vals[0]


def bessel_ratio(l: int, a: float) -> float:
    """Single ratio I_l(a)/I_0(a); relative error below 1e-10."""
    if a <= 0.0:
        raise ValueError(f"Bessel argument must be positive, got {a!r}")
    if l == 0:
        return 1.0
    return float(bessel_ratios(l, a)[l])


def _psi_sums(x, t, cfg: AnalyticConfig):
    """Return (psi, d_x psi), both normalized by I_0(A), in extended precision."""
    x = np.asarray(x, dtype=_LD)
    beta = _LD(2) * _LD(np.pi) / _LD(cfg.length_x)
    nu = _LD(cfg.nu)
    t_ld = _LD(t)
    amp = cfg.amplitude
    if amp == 0.0:
        # rho_a = 0: psi is constant and the field stays at rho_b.
        return np.ones_like(x), np.zeros_like(x)
    ratios = bessel_ratios(cfg.l_trunc, abs(amp))
    if amp < 0.0:
        # I_l(-A) = (-1)^l I_l(A)
        ratios = ratios * np.where(np.arange(cfg.l_trunc + 1) % 2 == 0, 1, -1)
    ls = np.arange(1, cfg.l_trunc + 1)
    cl = np.array([_COS_HALF_PI[l % 4] for l in ls], dtype=_LD)[:, None]
    sl = np.array([_SIN_HALF_PI[l % 4] for l in ls], dtype=_LD)[:, None]
    phase = (ls.astype(_LD) * beta)[:, None] * x[None, :]
    cos_p = np.cos(phase)
    sin_p = np.sin(phase)
    decay = np.exp(-nu * (ls * ls).astype(_LD) * beta * beta * t_ld)
    weight = (_LD(2) * ratios[1:] * decay)[:, None]
    terms = weight * (cl * cos_p + sl * sin_p)
    dterms = weight * (ls.astype(_LD) * beta)[:, None] * (-cl * sin_p + sl * cos_p)
    # pairwise np.sum keeps the round-off growth logarithmic in l_trunc;
    # near the minimum of psi the sum cancels down to ~e^{-2A} of the
    # leading terms, so the summation order is what sets the noise floor
    psi = _LD(1) + np.sum(terms, axis=0)
    dpsi = np.sum(dterms, axis=0)
    return psi, dpsi


def cole_hopf_density(x, t: float, cfg: AnalyticConfig):
    """Density rho(x, t) of the analytic solution.

    ``x`` may be a scalar or array of positions in [0, L_x); ``t`` is a
    single time >= 0.  The log derivative of psi is evaluated
    analytically (psi and d_x psi as separate sums), so no stencil error
    enters the comparison baseline.  Raises :class:`TruncationError` if
    the truncated psi is not strictly positive somewhere.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    psi, dpsi = _psi_sums(x, t, cfg)
    if np.any(psi <= 0.0):
        raise TruncationError(
            f"psi <= 0 at t={t} (min {float(np.min(psi))!r}): series truncation "
            f"l_trunc={cfg.l_trunc} insufficient for A={cfg.amplitude:.6g}"
        )
    cs = cfg.c * cfg.alpha
    w = _LD(cfg.w_bar) - _LD(2) * _LD(cfg.nu) * dpsi / psi
    rho = _LD(1) - w / _LD(cs)
    out = np.asarray(rho, dtype=float)
    if out.ndim == 0:
        return float(out)
    return out


def evaluate_on_grid(cfg: AnalyticConfig, xs, ts) -> np.ndarray:
    """Density on the outer product of positions ``xs`` and times ``ts``.

    Returns an array of shape ``(len(ts), len(xs))``.
    """
    xs = np.asarray(xs, dtype=float)
    out = np.empty((len(ts), xs.size), dtype=float)
    for k, t in enumerate(ts):
        out[k] = cole_hopf_density(xs, float(t), cfg)
    return out


def residual_check(cfg: AnalyticConfig, h: float, times, n_probe: int = 33) -> float:
    """Max Burgers residual of the analytic field on a central stencil.

    Evaluates |d_t w + w d_x w - nu d_xx w| with second-order central
    differences of step ``h`` (in both x and t) at ``n_probe`` positions
    for each time in ``times``; every time must be >= h so the backward
    node exists.  The result decreases as O(h^2), which the tests verify
    by halving h.
    """
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h!r}")
    cs = cfg.c * cfg.alpha
    xs = np.linspace(0.0, cfg.length_x, n_probe, endpoint=False)
    worst = 0.0
    for t in times:
        if t < h:
            raise ValueError(f"time {t!r} < h={h!r}: backward stencil node leaves t >= 0")

        def w_at(xq, tq):
            return cs * (1.0 - np.asarray(cole_hopf_density(xq, tq, cfg)))

        w0 = w_at(xs, t)
        dwdt = (w_at(xs, t + h) - w_at(xs, t - h)) / (2.0 * h)
        wp = w_at(xs + h, t)
        wm = w_at(xs - h, t)
        dwdx = (wp - wm) / (2.0 * h)
        d2wdx = (wp - 2.0 * w0 + wm) / (h * h)
        res = dwdt + w0 * dwdx - cfg.nu * d2wdx
        worst = max(worst, float(np.max(np.abs(res))))
    return worst
