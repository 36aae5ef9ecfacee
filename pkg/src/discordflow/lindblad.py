"""Master-equation integration for one qubit and a truncated cavity mode.

Basis ordering is ``index = q * (n_max + 1) + n`` with ``q = 0`` the ground
state and ``n`` the photon number. The generator is linear, so a classical
RK4 step equals the fourth-order Taylor polynomial of ``h L`` applied to the
vectorized state; that propagator is built once per output interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SystemParams, max_stable_step

TRACE_TOL = 1e-10
HERM_TOL = 1e-12
POS_TOL = 1e-10


class IntegrationError(RuntimeError):
    """State left the set of density matrices during integration."""


@dataclass
class QubitCavityState:
    matrix: np.ndarray
    n_max: int = 1

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 2 * (self.n_max + 1)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for n_max={self.n_max}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    @classmethod
    def basis(cls, qubit: int, photons: int, n_max: int = 1) -> "QubitCavityState":
        """Pure product state ``|qubit>_q |photons>_c``."""
        if photons > n_max or qubit not in (0, 1):
            raise ValueError("basis state outside the truncated space")
        psi = np.zeros(2 * (n_max + 1), dtype=complex)
        psi[qubit * (n_max + 1) + photons] = 1.0
        return cls(np.outer(psi, psi.conj()), n_max)

    def violations(self) -> list[str]:
        rho = self.matrix
        out = []
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            out.append(f"trace {tr:.15g}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERM_TOL:
            out.append(f"hermiticity defect {herm:.3g}")
        lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lo < -POS_TOL:
            out.append(f"negative eigenvalue {lo:.3g}")
        return out

    def element(self, q1, n1, q2, n2) -> complex:
        m = self.n_max + 1
        return complex(self.matrix[q1 * m + n1, q2 * m + n2])

    def single_excitation_block(self) -> np.ndarray:
        """Single-excitation block in the basis ``{|11>, |10>, |01>, |00>}`` (qubit, cavity)."""
        idx = [(1, 1), (1, 0), (0, 1), (0, 0)]
        return np.array([[self.element(q1, n1, q2, n2) for (q2, n2) in idx] for (q1, n1) in idx])

    def photon_number(self) -> float:
        n = np.tile(np.arange(self.n_max + 1), 2)
        return float(np.real(np.sum(n * np.diag(self.matrix))))


def operators(n_max: int):
    """``(sigma_minus, a)`` on the qubit x Fock space."""
    m = n_max + 1
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    a = np.diag(np.sqrt(np.arange(1, m)), 1).astype(complex)
    return np.kron(sm, np.eye(m)), np.kron(np.eye(2), a)


def hamiltonian(params: SystemParams, n_max: int, bare_frequency: float | None = None) -> np.ndarray:
    """Resonant coupling ``g (sigma_- a^dag + sigma_+ a)``.

    ``bare_frequency`` keeps the ``w0 sigma_z / 2 + wc a^dag a`` terms with
    ``w0 = wc``; observables in this package must not depend on it.
    """
    sm, a = operators(n_max)
    h = params.g * (sm @ a.conj().T + sm.conj().T @ a)
    if bare_frequency is not None:
        sz = np.kron(np.diag([-1.0, 1.0]), np.eye(n_max + 1))
        h = h + 0.5 * bare_frequency * sz + bare_frequency * (a.conj().T @ a)
    return h


def lindblad_rhs(state: QubitCavityState, params: SystemParams,
                 bare_frequency: float | None = None) -> np.ndarray:
    """``i[rho, H] + gamma/2 (2 a rho a^dag - a^dag a rho - rho a^dag a)``."""
    rho = state.matrix
    if rho.shape != (state.dim, state.dim):
        raise ValueError("state matrix does not match its truncation")
    h = hamiltonian(params, state.n_max, bare_frequency)
    _, a = operators(state.n_max)
    ad = a.conj().T
    nop = ad @ a
    return (1j * (rho @ h - h @ rho)
            + 0.5 * params.gamma * (2.0 * a @ rho @ ad - nop @ rho - rho @ nop))


def liouvillian(params: SystemParams, n_max: int, bare_frequency: float | None = None) -> np.ndarray:
    """Superoperator acting on row-major ``vec(rho)``."""
    h = hamiltonian(params, n_max, bare_frequency)
    _, a = operators(n_max)
    dim = h.shape[0]
    eye = np.eye(dim)
    ad = a.conj().T
    nop = ad @ a
    # vec(A rho B) = kron(A, B^T) vec(rho) for row-major vec
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    sup += 0.5 * params.gamma * (2.0 * np.kron(a, ad.T) - np.kron(nop, eye) - np.kron(eye, nop.T))
    return sup


def rk4_propagator(generator: np.ndarray, h: float) -> np.ndarray:
    x = h * generator
    out = np.eye(generator.shape[0], dtype=complex)
    term = out
    for k in range(1, 5):
        term = term @ x / k
        out = out + term
    return out


def _check_step(params: SystemParams, dt: float | None) -> float:
    bound = max_stable_step(params)
    if dt is None:
        dt = 0.1 * bound
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability bound 0.01/max(g, gamma) = {bound}")
    return dt


def evolve_trajectory(initial: QubitCavityState, params: SystemParams, times, dt: float | None = None,
                      bare_frequency: float | None = None, stepwise: bool = True) -> list[QubitCavityState]:
    """States at each of the sorted, nonnegative ``times``.

    Each interval between consecutive output times is split into equal steps
    no longer than ``dt`` (default ``1e-3 / max(g, gamma)``). With
    ``stepwise=False`` the interval's steps are applied as one matrix power,
    which is the same scheme with less accumulated rounding; invariants are
    then checked only at the output times.
    """
    dt = _check_step(params, dt)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be a sorted 1-D array of nonnegative values")
    bad = initial.violations()
    if bad:
        raise ValueError(f"initial state invalid: {', '.join(bad)}")

    dim, n_max = initial.dim, initial.n_max
    gen = liouvillian(params, n_max, bare_frequency)
    vec = initial.matrix.reshape(-1).copy()
    now = 0.0
    out = []

    def check(at, h):
        bad = QubitCavityState(vec.reshape(dim, dim), n_max).violations()
        if bad:
            raise IntegrationError(f"at t={at:.6g}: {', '.join(bad)}; reduce dt (currently {h:.3g})")

    for target in times:
        span = target - now
        n = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        if n:
            h = span / n
            prop = rk4_propagator(gen, h)
            if stepwise:
                for k in range(n):
                    vec = prop @ vec
                    check(now + (k + 1) * h, h)
            else:
                vec = np.linalg.matrix_power(prop, n) @ vec
                check(target, h)
        now = float(target)
        out.append(QubitCavityState(vec.reshape(dim, dim).copy(), n_max))
    return out


def evolve(initial: QubitCavityState, params: SystemParams, t: float, dt: float | None = None,
           bare_frequency: float | None = None, stepwise: bool = True) -> QubitCavityState:
    if t < 0:
        raise ValueError("t must be >= 0")
    return evolve_trajectory(initial, params, [t], dt, bare_frequency, stepwise)[0]
