"""Single-subsystem dynamics: qubit + leaky cavity + zero-temperature reservoir.

One excitation starts in the qubit, ``|1>_q |0>_c |0>_r``. At resonance it is
shared between three amplitudes:

* ``xi``  -- excitation still in the qubit,
* ``eta`` -- excitation in the cavity mode,
* ``chi`` -- excitation in the collective reservoir mode.

Everything is expressed in the interaction frame, so the bare qubit and
cavity frequencies never appear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration of the two identical subsystems.

    ``g`` and ``gamma`` share one (angular frequency) unit; ``gamma`` sets the
    time unit used by the command line. ``alpha`` and ``beta`` are the
    amplitudes of ``|00>`` and ``|11>`` in the initial two-qubit state.
    """

    g: float
    gamma: float
    alpha: float = 1.0 / math.sqrt(3.0)
    beta: complex = math.sqrt(2.0 / 3.0)

    def __post_init__(self):
        if not (self.g >= 0.0 and math.isfinite(self.g)):
            raise ValueError(f"coupling g must be finite and >= 0, got {self.g}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"loss rate gamma must be finite and > 0, got {self.gamma}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be real and >= 0, got {self.alpha}")
        norm = self.alpha**2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"alpha^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def from_ratio(cls, g_over_gamma: float, alpha: float = 1.0 / math.sqrt(3.0),
                   beta_phase: float = 0.0, gamma: float = 1.0) -> "SystemParams":
        """Parameters in units of gamma with ``|beta| = sqrt(1 - alpha^2)``."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        beta = math.sqrt(max(0.0, 1.0 - alpha * alpha)) * complex(math.cos(beta_phase),
                                                                  math.sin(beta_phase))
        return cls(g=g_over_gamma * gamma, gamma=gamma, alpha=alpha, beta=beta)

    @property
    def omega_sq(self) -> float:
        """Squared characteristic frequency, negative when overdamped."""
        return self.g**2 - self.gamma**2 / 16.0

    @property
    def omega(self) -> complex:
        """Characteristic frequency sqrt(g^2 - gamma^2/16); imaginary when overdamped."""
        w2 = self.omega_sq
        return complex(math.sqrt(w2), 0.0) if w2 >= 0 else complex(0.0, math.sqrt(-w2))

    @property
    def regime(self) -> str:
        if self.is_critical:
            return "critical"
        return "underdamped" if self.omega_sq > 0 else "overdamped"

    @property
    def is_critical(self) -> bool:
        return math.isclose(4.0 * self.g, self.gamma, rel_tol=1e-15, abs_tol=0.0)


@dataclass(frozen=True)
class AmplitudeTriple:
    """Amplitudes of qubit, cavity and collective reservoir excitation.

    Fields are scalars or arrays of matching shape (one entry per time).
    """

    xi: complex | np.ndarray
    eta: complex | np.ndarray
    chi: float | np.ndarray

    def norm(self):
        return np.abs(self.xi) ** 2 + np.abs(self.eta) ** 2 + np.abs(self.chi) ** 2

    def populations(self):
        """``(|xi|^2, |eta|^2, |chi|^2)``."""
        return np.abs(self.xi) ** 2, np.abs(self.eta) ** 2, np.abs(self.chi) ** 2

    def pick(self, which: str):
        """Amplitude substituted for ``xi`` in the pair states."""
        return {"qubits": self.xi, "cavities": self.eta, "reservoirs": self.chi}[which]


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise ValueError("times must be finite and >= 0")
    return t


def _scalarize(x, scalar: bool):
    return np.asarray(x).item() if scalar else np.asarray(x)


def amplitudes(params: SystemParams, t) -> AmplitudeTriple:
    """Closed-form amplitudes at time(s) ``t`` in every damping regime.

    Underdamped (4g > gamma)::

        xi  = e^{-gamma t/4} [cos(W t) + gamma/(4W) sin(W t)]
        eta = -i (g/W) e^{-gamma t/4} sin(W t)

    with W = sqrt(g^2 - gamma^2/16). For 4g < gamma the trigonometric
    functions turn hyperbolic; at 4g = gamma the analytic limit is used.
    ``chi`` is the real nonnegative root of ``1 - |xi|^2 - |eta|^2``.
    """
    tt = _check_times(t)
    scalar = tt.ndim == 0
    g, gam = params.g, params.gamma
    q = gam / 4.0

    if params.is_critical:
        damp = np.exp(-q * tt)
        xi = damp * (1.0 + q * tt)
        sin_over_w = tt * damp
    elif params.omega_sq > 0:
        w = math.sqrt(params.omega_sq)
        damp = np.exp(-q * tt)
        xi = damp * (np.cos(w * tt) + (q / w) * np.sin(w * tt))
        sin_over_w = damp * np.sin(w * tt) / w
    else:
        k = math.sqrt(-params.omega_sq)
        # e^{-qt} cosh(kt), e^{-qt} sinh(kt) written without overflow
        slow = np.exp((k - q) * tt)
        fast = np.exp(-(k + q) * tt)
        cosh_d = 0.5 * (slow + fast)
        sinh_d = 0.5 * (slow - fast)
        xi = cosh_d + (q / k) * sinh_d
        sin_over_w = sinh_d / k

    xi = xi.astype(complex)
    eta = -1j * g * sin_over_w
    chi = np.sqrt(np.clip(1.0 - np.abs(xi) ** 2 - np.abs(eta) ** 2, 0.0, None))
    return AmplitudeTriple(_scalarize(xi, scalar), _scalarize(eta, scalar), _scalarize(chi, scalar))


def xi_zeros(params: SystemParams, t_max: float) -> np.ndarray:
    """Times in ``(0, t_max]`` at which the qubit amplitude vanishes.

    Only the underdamped regime has zeros: ``tan(W t) = -4W/gamma``, i.e.
    ``t_n = (n pi - arctan(4W/gamma)) / W`` for n = 1, 2, ...
    """
    if params.is_critical or params.omega_sq <= 0:
        return np.empty(0)
    w = math.sqrt(params.omega_sq)
    first = (math.pi - math.atan(4.0 * w / params.gamma)) / w
    if first > t_max:
        return np.empty(0)
    n = np.arange(0, int(math.floor((t_max - first) * w / math.pi)) + 1)
    return first + n * math.pi / w


def max_stable_step(params: SystemParams) -> float:
    """Largest fixed step accepted by the integrators in this package."""
    return 0.01 / max(params.g, params.gamma)


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def amplitude_ode_oracle(params: SystemParams, t: float, dt: float | None = None) -> AmplitudeTriple:
    """Brute-force RK4 integration of the single-excitation equations.

    ``d xi/dt = -i g eta``, ``d eta/dt = -i g xi - gamma/2 eta`` and the
    leaked population ``d|chi|^2/dt = gamma |eta|^2``, all from ``(1, 0, 0)``.
    The step is shrunk so it divides ``t`` exactly.
    """
    if t < 0 or not math.isfinite(t):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    bound = max_stable_step(params)
    if dt is None:
        dt = 0.1 * bound
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability bound 0.01/max(g, gamma) = {bound}")

    g, half_gam, gam = params.g, 0.5 * params.gamma, params.gamma

    def rhs(y):
        xi, eta, _ = y
        return np.array([-1j * g * eta, -1j * g * xi - half_gam * eta, gam * abs(eta) ** 2])

    n = int(math.ceil(t / dt - 1e-9)) if t > 0 else 0
    y = np.array([1.0, 0.0, 0.0], dtype=complex)
    if n:
        h = t / n
        for _ in range(n):
            y = rk4_step(rhs, y, h)
    leaked = max(y[2].real, 0.0)
    return AmplitudeTriple(complex(y[0]), complex(y[1]), math.sqrt(leaked))
