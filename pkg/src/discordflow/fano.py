"""Fano diagonalization of one cavity mode coupled to a bosonic continuum.

For ``H = wa a^dag a + int w b^dag(w) b(w) dw + i int kappa(w) a^dag b(w) dw + h.c.``
the dressed operators ``c(w) = alpha(w) a + int B(w, w') b(w') dw'`` have

    F(w)        = P int |kappa(w')|^2 / (w - w') dw'
    z(w)        = (w - wa - F(w)) / |kappa(w)|^2
    |alpha(w)|^2 = 1 / (|kappa(w)|^2 (z(w)^2 + pi^2))
    B(w, w')    = i alpha(w) kappa(w') [P 1/(w - w') + z(w) delta(w - w')]

Only the smooth part of ``B`` is ever sampled; the principal value and the
delta term stay implicit in ``(alpha, z)``.

A qubit coupled with strength ``g`` to the cavity then sees the structured
continuum ``J(w) = g^2 |alpha(w)|^2``. For flat coupling this is a Lorentzian
of half-width ``pi |kappa|^2 = gamma / 2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, optimize

from .dynamics import SystemParams
from .extraction import kappa_from_gamma

_GL_ORDER = 24
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class QuadratureWarning(UserWarning):
    pass


def _gauss(f, lo, hi, panels):
    """Composite Gauss-Legendre rule on ``panels`` equal pieces of [lo, hi]."""
    if hi <= lo:
        return 0.0
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * f(x)))


def _weight(kappa_profile, x):
    vals = np.abs(np.asarray(kappa_profile(x), dtype=complex)) ** 2
    if not np.all(np.isfinite(vals)):
        raise ValueError("coupling profile returned non-finite values")
    return np.broadcast_to(vals, np.shape(x))


def _pv_once(kappa_profile, omega, lo, hi, panels):
    # one-sided pieces use w' = w + s e^u, which turns k/(w - w') dw' into -s k du
    def side(sign, near, far):
        if far <= near:
            return 0.0
        return -sign * _gauss(lambda u: _weight(kappa_profile, omega + sign * np.exp(u)),
                              math.log(near), math.log(far), panels)

    if omega <= lo or omega >= hi:
        if omega in (lo, hi):
            raise ValueError("principal value diverges at a band edge")
        if omega < lo:
            return side(+1.0, lo - omega, hi - omega)
        return side(-1.0, omega - hi, omega - lo)

    left, right = omega - lo, hi - omega
    h = min(left, right)
    # symmetric excision: nodes paired at w -+ s so the pole cancels
    sym = _gauss(lambda s: (_weight(kappa_profile, omega - s) - _weight(kappa_profile, omega + s)) / s,
                 0.0, h, panels)
    rest = side(-1.0, h, left) if left > right else side(+1.0, h, right)
    return sym + rest


def pv_integral_F(kappa_profile: Callable, omega: float, band: tuple[float, float],
                  panels: int = 8, rtol: float = 1e-11, atol: float = 1e-13,
                  max_doublings: int = 8) -> float:
    """Principal value ``P int_band |kappa(w')|^2 / (omega - w') dw'``.

    The panel count is doubled until two successive estimates agree within
    ``atol + rtol * |F|``; a :class:`QuadratureWarning` is issued if that
    never happens.
    """
    lo, hi = map(float, band)
    if not hi > lo:
        raise ValueError("band must be an increasing interval")
    omega = float(omega)
    prev = _pv_once(kappa_profile, omega, lo, hi, panels)
    for _ in range(max_doublings):
        panels *= 2
        cur = _pv_once(kappa_profile, omega, lo, hi, panels)
        if abs(cur - prev) <= atol + rtol * abs(cur):
            return cur
        prev = cur
    warnings.warn(f"principal value at omega={omega} not converged (last change {abs(cur - prev):.3g})",
                  QuadratureWarning, stacklevel=2)
    return cur


def pv_flat_band(kappa0: complex, omega, band: tuple[float, float]):
    """Closed form for constant coupling on ``band``: ``|k0|^2 ln|w - w1| / |w - w2|``."""
    lo, hi = band
    omega = np.asarray(omega, dtype=float)
    return abs(kappa0) ** 2 * np.log(np.abs(omega - lo) / np.abs(hi - omega))


def _coupling_sq(kappa_at_omega):
    k2 = np.abs(np.asarray(kappa_at_omega, dtype=complex)) ** 2
    if np.any(k2 == 0):
        raise ZeroDivisionError("coupling vanishes at this frequency")
    return k2


def z_of_omega(omega, omega_a, kappa_at_omega, F_at_omega):
    k2 = _coupling_sq(kappa_at_omega)
    return (np.asarray(omega) - omega_a - np.asarray(F_at_omega)) / k2


def alpha_sq(omega, omega_a, kappa_at_omega, F_at_omega):
    """Cavity weight ``1 / (|kappa|^2 (z^2 + pi^2))`` of the dressed mode at ``omega``."""
    k2 = _coupling_sq(kappa_at_omega)
    z = z_of_omega(omega, omega_a, kappa_at_omega, F_at_omega)
    return 1.0 / (k2 * (z * z + math.pi**2))


def b_smooth(omega, omega_prime, alpha_at_omega, kappa_at_omega_prime):
    """Off-diagonal part ``i alpha(w) kappa(w') / (w - w')`` of the bath coefficient."""
    diff = np.asarray(omega, dtype=float) - np.asarray(omega_prime, dtype=float)
    if np.any(diff == 0):
        raise ValueError("b_smooth is only defined off the diagonal omega != omega'")
    return 1j * np.asarray(alpha_at_omega) * np.asarray(kappa_at_omega_prime) / diff


def effective_spectral_density(omega, params: SystemParams, omega_a: float = 0.0):
    """``g^2 |alpha(w)|^2`` for flat coupling with ``gamma = 2 pi |kappa|^2``.

    Equals ``(g^2 / pi) (gamma/2) / ((w - wa)^2 + gamma^2 / 4)``.
    """
    kappa = kappa_from_gamma(params.gamma)
    return params.g**2 * alpha_sq(omega, omega_a, kappa, 0.0)


def half_width(density: Callable[[float], float], center: float, scale: float) -> float:
    """Half-width at half-maximum on the high-frequency side of a single peak."""
    peak = density(center)
    hi = center + scale
    while density(hi) > 0.5 * peak:
        hi = center + 2.0 * (hi - center)
    return optimize.brentq(lambda w: density(w) - 0.5 * peak, center, hi, xtol=1e-14, rtol=1e-14) - center


@dataclass
class SpectralGrid:
    omega: np.ndarray
    kappa: np.ndarray
    omega_a: float
    F: np.ndarray
    z: np.ndarray
    alpha_sq: np.ndarray

    def columns(self):
        return ("omega", "kappa", "F", "z", "alpha_sq")

    def rows(self):
        return zip(self.omega, np.abs(self.kappa), self.F, self.z, self.alpha_sq)


def flat_profile(kappa0: float, band: tuple[float, float]) -> Callable:
    lo, hi = band

    def profile(w):
        w = np.asarray(w, dtype=float)
        return np.where((w >= lo) & (w <= hi), kappa0, 0.0)

    return profile


def spectral_grid(kappa_profile: Callable, omega_a: float, band: tuple[float, float],
                  omega=None, n_points: int = 401) -> SpectralGrid:
    """Sample F, z and |alpha|^2 inside ``band`` (edges excluded)."""
    lo, hi = band
    if omega is None:
        # cell midpoints keep every sample strictly inside the band
        edges = np.linspace(lo, hi, n_points + 1)
        omega = 0.5 * (edges[1:] + edges[:-1])
    omega = np.sort(np.asarray(omega, dtype=float))
    kappa = np.asarray(kappa_profile(omega), dtype=complex) * np.ones_like(omega)
    F = np.array([pv_integral_F(kappa_profile, w, band) for w in omega])
    z = z_of_omega(omega, omega_a, kappa, F)
    a2 = alpha_sq(omega, omega_a, kappa, F)
    if np.any(a2 < 0):
        raise ArithmeticError("negative spectral weight")
    return SpectralGrid(omega, kappa, omega_a, F, z, a2)


def alpha_sq_normalization(kappa_profile: Callable, omega_a: float, band: tuple[float, float],
                           F: Callable | None = None) -> float:
    """``int_band |alpha(w)|^2 dw`` with ``F`` evaluated self-consistently.

    Missing weight equals the cavity content of any bound states outside the
    band, which is exponentially small for wide bands.
    """
    if F is None:
        F = lambda w: pv_integral_F(kappa_profile, w, band)  # noqa: E731

    def integrand(w):
        return float(alpha_sq(w, omega_a, kappa_profile(w), F(w)))

    lo, hi = band
    points = [omega_a] if lo < omega_a < hi else None
    val, _ = integrate.quad(integrand, lo, hi, points=points, limit=500, epsabs=1e-12, epsrel=1e-10)
    return val


def memory_kernel(density: Callable, tau, center: float) -> np.ndarray:
    """``f(tau) = int J(w) exp(-i (w - center) tau) dw`` by Fourier quadrature."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.empty(tau.shape, dtype=complex)
    sym = lambda x: density(center + x) + density(center - x)  # noqa: E731
    anti = lambda x: density(center + x) - density(center - x)  # noqa: E731
    for i, s in enumerate(tau):
        if s == 0:
            re = integrate.quad(sym, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
            im = 0.0
        else:
            re = integrate.quad(sym, 0, np.inf, weight="cos", wvar=s, epsabs=1e-10, limlst=100)[0]
            im = -integrate.quad(anti, 0, np.inf, weight="sin", wvar=s, epsabs=1e-10, limlst=100)[0]
        out[i] = re + 1j * im
    return out


def memory_kernel_dynamics(kernel: np.ndarray, h: float) -> np.ndarray:
    """Solve ``x'(t) = -int_0^t f(t - s) x(s) ds``, ``x(0) = 1`` on a uniform grid.

    ``kernel[n] = f(n h)``. Trapezoidal rule for both the memory integral and
    the time step, second order in ``h``.
    """
    kernel = np.asarray(kernel, dtype=complex)
    n = len(kernel)
    x = np.zeros(n, dtype=complex)
    dx = np.zeros(n, dtype=complex)
    x[0] = 1.0
    for m in range(1, n):
        # memory integral at t_m: trapezoid over s_j = j h, j = 0..m
        known = h * (0.5 * kernel[m] * x[0] + np.dot(kernel[m - 1:0:-1], x[1:m]))
        # x_m = x_{m-1} + h/2 (dx_{m-1} + dx_m), dx_m = -(known + h/2 f(0) x_m)
        coeff = 1.0 + 0.25 * h * h * kernel[0]
        x[m] = (x[m - 1] + 0.5 * h * dx[m - 1] - 0.5 * h * known) / coeff
        dx[m] = -(known + 0.5 * h * kernel[0] * x[m])
    return x


def quasimode_qubit_population(params: SystemParams, t_max: float, h: float = 0.005,
                               kernel_step: float = 0.05, omega_a: float = 0.0):
    """``|xi_t|^2`` from the Lorentzian continuum instead of the leaky cavity.

    The kernel is computed by Fourier quadrature of ``J`` every
    ``kernel_step`` and spline-interpolated onto the integration grid.
    Returns ``(times, populations)``.
    """
    density = lambda w: effective_spectral_density(w, params, omega_a)  # noqa: E731
    coarse = np.linspace(0.0, t_max, int(round(t_max / kernel_step)) + 1)
    kern = memory_kernel(density, coarse, omega_a)
    fine = np.linspace(0.0, t_max, int(round(t_max / h)) + 1)
    re = interpolate.CubicSpline(coarse, kern.real)(fine)
    im = interpolate.CubicSpline(coarse, kern.imag)(fine)
    x = memory_kernel_dynamics(re + 1j * im, fine[1] - fine[0])
    return fine, np.abs(x) ** 2
