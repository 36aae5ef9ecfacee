"""Correlation measures for symmetric two-qubit X states.

States are written in the basis ``{|11>, |10>, |01>, |00>}``. The symmetric
subclass has ``rho22 = rho33 = b``, so both marginals are ``diag(a+b, b+d)``.
All entropies are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import AmplitudeTriple, SystemParams

PAIRS = ("qubits", "cavities", "reservoirs")

STATE_TOL = 1e-12
PSD_TOL = 1e-10
NEG_DISCORD_TOL = 1e-10


class SubclassError(ValueError):
    """Matrix is not a symmetric X state (non-X entries or rho22 != rho33)."""


@dataclass(frozen=True)
class XState:
    a: float
    b: float
    d: float
    w: complex = 0.0
    z: complex = 0.0

    def __post_init__(self):
        a, b, d = self.a, self.b, self.d
        if min(a, b, d) < -STATE_TOL:
            raise ValueError(f"negative population in {self}")
        if abs(a + 2 * b + d - 1.0) > STATE_TOL:
            raise ValueError(f"trace a + 2b + d = {a + 2 * b + d!r}, expected 1")
        if abs(self.w) > math.sqrt(max(a * d, 0.0)) + STATE_TOL or abs(self.z) > b + STATE_TOL:
            raise ValueError(f"X state is not positive semidefinite: {self}")

    def matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0], rho[1, 1], rho[2, 2], rho[3, 3] = self.a, self.b, self.b, self.d
        rho[0, 3], rho[3, 0] = self.w, np.conj(self.w)
        rho[1, 2], rho[2, 1] = self.z, np.conj(self.z)
        return rho

    @classmethod
    def from_matrix(cls, rho, tol: float = 1e-10) -> "XState":
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (4, 4):
            raise SubclassError(f"expected a 4x4 matrix, got shape {rho.shape}")
        mask = np.zeros((4, 4), dtype=bool)
        mask[[0, 1, 2, 3, 0, 3, 1, 2], [0, 1, 2, 3, 3, 0, 2, 1]] = True
        if np.max(np.abs(rho[~mask]), initial=0.0) > tol:
            raise SubclassError("matrix has entries outside the X pattern")
        if abs(rho[1, 1] - rho[2, 2]) > tol:
            raise SubclassError("rho22 != rho33")
        if abs(rho[0, 3] - np.conj(rho[3, 0])) > tol or abs(rho[1, 2] - np.conj(rho[2, 1])) > tol:
            raise ValueError("matrix is not Hermitian")
        b = 0.5 * (rho[1, 1].real + rho[2, 2].real)
        return cls(rho[0, 0].real, b, rho[3, 3].real, complex(rho[0, 3]), complex(rho[1, 2]))

    def eigenvalues(self) -> np.ndarray:
        """Closed form: blocks {a, d, w} and {b, b, z}."""
        mean, half = 0.5 * (self.a + self.d), 0.5 * (self.a - self.d)
        big = mean + math.hypot(half, abs(self.w))
        # product form avoids cancellation in mean - r
        small = max(self.a * self.d - abs(self.w) ** 2, 0.0) / big if big > 0 else 0.0
        zz = abs(self.z)
        return np.array([big, small, self.b + zz, max(self.b - zz, 0.0)])

    def marginal(self) -> np.ndarray:
        """Eigenvalues of either one-qubit marginal."""
        return np.array([self.a + self.b, self.b + self.d])

    def entropy(self) -> float:
        lam = self.eigenvalues()
        return entropy_bits(lam[1:]) if lam[0] > 0.5 else shannon_bits(lam)

    def marginal_entropy(self) -> float:
        return binary_entropy(min(self.a + self.b, self.b + self.d))


@dataclass(frozen=True)
class CorrelationRecord:
    """One row of the time series: all four measures for one pair at one time."""

    t: float
    pair: str
    concurrence: float
    discord: float
    classical: float
    mutual: float


def shannon_bits(p) -> float:
    """-sum p log2 p with 0 log 0 = 0; tiny negative rounding is dropped."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(x: float) -> float:
    """H2(x) in bits, accurate for small x."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return (-x * math.log(x) - (1.0 - x) * math.log1p(-x)) / math.log(2.0)


def entropy_bits(minor) -> float:
    """Entropy of a distribution given all but its largest entry.

    The dominant probability is ``1 - sum(minor)``; near-pure states keep
    full relative precision this way.
    """
    minor = np.asarray(minor, dtype=float)
    minor = minor[minor > 0]
    rest = float(np.sum(minor))
    if rest >= 1.0:
        return shannon_bits(minor)
    return float(-np.sum(minor * np.log2(minor))) - (1.0 - rest) * math.log1p(-rest) / math.log(2.0)


def two_party_state(pair: str, params: SystemParams, amp: AmplitudeTriple) -> XState:
    """Reduced state of qubits, cavities or reservoirs of the two subsystems.

    With ``u`` the pair's amplitude (xi, eta or chi) the state has
    ``a = |beta|^2 |u|^4``, ``b = |beta|^2 |u|^2 (1 - |u|^2)``,
    ``d = alpha^2 + |beta|^2 (1 - |u|^2)^2``, ``w = alpha beta u^2``, ``z = 0``.
    """
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; expected one of {PAIRS}")
    u = complex(amp.pick(pair))
    u2 = abs(u) ** 2
    if u2 > 1.0 + 1e-12:
        raise ValueError("amplitude triple is not normalized")
    u2 = min(u2, 1.0)
    beta2 = abs(params.beta) ** 2
    return XState(
        a=beta2 * u2 * u2,
        b=beta2 * u2 * (1.0 - u2),
        d=params.alpha**2 + beta2 * (1.0 - u2) ** 2,
        w=params.alpha * params.beta * u * u,
        z=0.0,
    )


def von_neumann_entropy(state) -> float:
    """Entropy in bits of an XState or of a density matrix."""
    if isinstance(state, XState):
        return state.entropy()
    rho = np.asarray(state, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > PSD_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > PSD_TOL:
        raise ValueError("density matrix does not have unit trace")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -PSD_TOL:
        raise ValueError(f"density matrix is not positive semidefinite (min eig {evals.min():.3g})")
    return shannon_bits(evals)


def mutual_information(x: XState) -> float:
    return 2.0 * x.marginal_entropy() - x.entropy()


def concurrence_x(x: XState) -> float:
    return 2.0 * max(0.0, abs(x.z) - math.sqrt(max(x.a * x.d, 0.0)), abs(x.w) - x.b)


def concurrence_qubits_closed_form(params: SystemParams, xi) -> float:
    """Two-qubit concurrence written directly in terms of ``|xi|``."""
    xi2 = abs(xi) ** 2
    beta = abs(params.beta)
    return max(0.0, 2.0 * beta * xi2 * (params.alpha - beta * (1.0 - xi2)))


def discord_candidates(x: XState) -> tuple[float, float]:
    """Discord for measurements along z (first) and in the x-y plane (second)."""
    a, b, d = x.a, x.b, x.d
    s_a = x.marginal_entropy()
    s_ab = x.entropy()
    # conditional entropy after measuring sigma_z on B:
    # -a log a/(a+b) - b log b/(a+b) - d log d/(b+d) - b log b/(b+d)
    cond_z = 0.0
    if a + b > 0:
        cond_z += (a + b) * binary_entropy(a / (a + b))
    if b + d > 0:
        cond_z += (b + d) * binary_entropy(b / (b + d))
    # measuring in the x-y plane: outcomes (1 +- Gamma)/2,
    # Gamma^2 = (a - d)^2 + 4 (|z| + |w|)^2, and 1 - Gamma^2 = 4[(a+b)(b+d) - (|z|+|w|)^2]
    coh = abs(x.z) + abs(x.w)
    gam = min(math.sqrt((a - d) ** 2 + 4.0 * coh**2), 1.0)
    delta_minus = max(2.0 * ((a + b) * (b + d) - coh**2) / (1.0 + gam), 0.0)
    d1 = s_a - s_ab + cond_z
    d2 = s_a - s_ab + binary_entropy(delta_minus)
    return d1, d2


def discord_x(x) -> float:
    """Quantum discord (bits) of a symmetric X state, measurement on one side.

    Accepts an :class:`XState` or a 4x4 matrix; matrices outside the
    symmetric X subclass raise :class:`SubclassError`.
    """
    if not isinstance(x, XState):
        x = XState.from_matrix(x)
    raw = min(discord_candidates(x))
    if raw < -NEG_DISCORD_TOL:
        raise ArithmeticError(f"discord evaluated to {raw!r} < 0 for {x}")
    return max(raw, 0.0)


def classical_correlations(x) -> float:
    if not isinstance(x, XState):
        x = XState.from_matrix(x)
    q = mutual_information(x) - discord_x(x)
    if q < -NEG_DISCORD_TOL:
        raise ArithmeticError(f"classical correlations evaluated to {q!r} < 0 for {x}")
    return max(q, 0.0)


def correlation_record(t: float, pair: str, x: XState) -> CorrelationRecord:
    mutual = mutual_information(x)
    disc = discord_x(x)
    return CorrelationRecord(
        t=t, pair=pair, concurrence=concurrence_x(x), discord=disc,
        classical=mutual - disc, mutual=mutual,
    )
