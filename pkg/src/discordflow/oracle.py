"""Discord from its definition: maximize measured information over projectors.

Rank-1 projective measurements on one qubit are parameterized by a Bloch
direction ``n(theta, phi)``: ``Pi_pm = (I +- n.sigma) / 2``. Since ``n`` and
``-n`` give the same pair of projectors, the search covers
``theta in [0, pi]`` and ``phi in [0, pi)`` only.

For fixed ``rho`` the unnormalized conditional state of the unmeasured qubit
is linear in ``n``::

    Tr_B[(I x Pi_pm) rho] = (rho_A +- sum_j n_j R_j) / 2,   R_j = Tr_B[(I x sigma_j) rho]

so a whole grid of bases is evaluated with 2x2 closed-form eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlations import XState, shannon_bits, von_neumann_entropy

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
P_MIN = 1e-14

_PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


@dataclass(frozen=True)
class MeasurementBasis:
    theta: float
    phi: float

    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        ns = np.tensordot(self.direction(), _PAULI, axes=1)
        eye = np.eye(2)
        return 0.5 * (eye + ns), 0.5 * (eye - ns)


def validate_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a two-qubit (4x4) density matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def _side_tensors(rho: np.ndarray, side: str):
    """Marginal of the unmeasured qubit and the three R_j matrices."""
    r = rho.reshape(2, 2, 2, 2)  # (a, b, a', b')
    if side == "B":
        kept = np.einsum("ajbj->ab", r)
        rj = np.einsum("ajbk,skj->sab", r, _PAULI)
    elif side == "A":
        kept = np.einsum("jajb->ab", r)
        rj = np.einsum("kajb,sjk->sab", r, _PAULI)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return kept, rj


def _conditional_entropy(kept, rj, theta, phi) -> np.ndarray:
    """sum_k p_k S(rho_k) for arrays of angles (broadcast)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    n = (st * np.cos(phi), st * np.sin(phi), np.cos(theta))
    m = n[0][..., None, None] * rj[0] + n[1][..., None, None] * rj[1] + n[2][..., None, None] * rj[2]
    total = np.zeros(np.broadcast(theta, phi).shape)
    for sign in (1.0, -1.0):
        blk = 0.5 * (kept + sign * m)
        p = (blk[..., 0, 0] + blk[..., 1, 1]).real
        gap = np.sqrt(((blk[..., 0, 0] - blk[..., 1, 1]).real) ** 2 + 4.0 * np.abs(blk[..., 0, 1]) ** 2)
        safe_p = np.where(p > P_MIN, p, 1.0)
        for lam in (0.5 * (p + gap), 0.5 * (p - gap)):
            q = np.clip(lam / safe_p, 0.0, 1.0)
            safe_q = np.where(q > 0, q, 1.0)
            contrib = -lam.clip(0.0) * np.log2(safe_q)
            total = total + np.where((p > P_MIN) & (q > 0), contrib, 0.0)
    return total


def measured_information(rho, basis: MeasurementBasis, side: str = "B") -> float:
    """Information about the unmeasured qubit gained by measuring ``side``.

    ``S(rho_kept) - sum_k p_k S(rho_k)``; outcomes with ``p_k < 1e-14``
    contribute nothing.
    """
    rho = validate_density_matrix(rho)
    kept, rj = _side_tensors(rho, side)
    s_kept = shannon_bits(np.linalg.eigvalsh(kept))
    return s_kept - float(_conditional_entropy(kept, rj, basis.theta, basis.phi))


def _golden_min(f, lo, hi, iters):
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def classical_bruteforce(rho, n_grid: int = 181, refine_iters: int = 40,
                         side: str = "B", sweeps: int = 2) -> tuple[float, MeasurementBasis]:
    """Maximal measured information and the basis that attains it.

    Grid search over ``n_grid x n_grid`` bases, then golden-section refinement
    of each angle in turn within one grid cell of the best point.
    """
    rho = validate_density_matrix(rho)
    kept, rj = _side_tensors(rho, side)
    s_kept = shannon_bits(np.linalg.eigvalsh(kept))

    thetas = np.linspace(0.0, math.pi, n_grid)
    phis = np.linspace(0.0, math.pi, n_grid, endpoint=False)
    grid = _conditional_entropy(kept, rj, thetas[:, None], phis[None, :])
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    best_t, best_p, best = float(thetas[i]), float(phis[j]), float(grid[i, j])

    if refine_iters > 0:
        dt = math.pi / (n_grid - 1)
        dp = math.pi / n_grid
        t, p = best_t, best_p
        for _ in range(sweeps):
            t, _ = _golden_min(lambda x: float(_conditional_entropy(kept, rj, x, p)),
                               max(0.0, t - dt), min(math.pi, t + dt), refine_iters)
            p, val = _golden_min(lambda y: float(_conditional_entropy(kept, rj, t, y)),
                                 p - dp, p + dp, refine_iters)
            if val < best:
                best_t, best_p, best = t, p, val
    return s_kept - best, MeasurementBasis(best_t, best_p % (2 * math.pi))


def discord_bruteforce(rho, n_grid: int = 181, refine_iters: int = 40, side: str = "B") -> float:
    """Mutual information minus the best measured information found.

    The search can only underestimate the supremum, so the result is an upper
    bound on the true discord.
    """
    if isinstance(rho, XState):
        rho = rho.matrix()
    rho = validate_density_matrix(rho)
    kept_a = np.einsum("ajbj->ab", rho.reshape(2, 2, 2, 2))
    kept_b = np.einsum("jajb->ab", rho.reshape(2, 2, 2, 2))
    mutual = (shannon_bits(np.linalg.eigvalsh(kept_a)) + shannon_bits(np.linalg.eigvalsh(kept_b))
              - von_neumann_entropy(rho))
    q, _ = classical_bruteforce(rho, n_grid=n_grid, refine_iters=refine_iters, side=side)
    return mutual - q


def random_subclass_states(n: int, seed: int = 0) -> list[XState]:
    """Deterministic sample of symmetric X states with complex coherences.

    Populations are Dirichlet(1,1,1) over (a, 2b, d); coherence moduli are
    uniform up to their positivity bounds, phases uniform.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a, twob, d = rng.dirichlet((1.0, 1.0, 1.0))
        b = 0.5 * twob
        # renormalize so a + 2b + d == 1 to rounding
        s = a + 2 * b + d
        a, b, d = a / s, b / s, d / s
        rw, pw, rz, pz = rng.uniform(size=4)
        w = rw * math.sqrt(a * d) * np.exp(2j * math.pi * pw)
        z = rz * b * np.exp(2j * math.pi * pz)
        out.append(XState(a, b, d, complex(w), complex(z)))
    return out
