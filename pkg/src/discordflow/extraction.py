"""Output field of the leaky cavities under vacuum input.

With no input photons the output operator is ``a_out = -i sqrt(2 pi) |kappa| a``,
so the outgoing photon flux is ``2 pi |kappa|^2 <a^dag a>``. Matching this to
the photon-loss rate of the master equation fixes ``gamma = 2 pi |kappa|^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .correlations import CorrelationRecord, correlation_record, two_party_state
from .dynamics import SystemParams, amplitudes


@dataclass(frozen=True)
class OutputRecord:
    t: float
    flux: float
    cumulative: float


def kappa_from_gamma(gamma: float) -> float:
    """Flat cavity-reservoir coupling for loss rate ``gamma``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return math.sqrt(gamma / (2.0 * math.pi))


def output_flux(params: SystemParams, t, two_excitation: bool = False):
    """Photons per unit time leaving one cavity, ``gamma |eta_t|^2``.

    ``two_excitation=True`` weights by ``|beta|^2``, the probability that the
    subsystem was excited in the two-qubit initial state.
    """
    kappa = kappa_from_gamma(params.gamma)
    eta = amplitudes(params, t).eta
    flux = 2.0 * math.pi * kappa**2 * np.abs(eta) ** 2
    if two_excitation:
        flux = abs(params.beta) ** 2 * flux
    return flux if np.ndim(flux) else float(flux)


def _flux_breakpoints(params: SystemParams, t0: float, t1: float) -> list[float]:
    # zeros of sin(W t) split the integrand into single humps
    if params.omega_sq <= 0 or params.is_critical:
        return []
    half_period = math.pi / math.sqrt(params.omega_sq)
    first = math.floor(t0 / half_period) + 1
    return [k * half_period for k in range(first, int(t1 / half_period) + 1) if t0 < k * half_period < t1]


def emitted_photons_between(params: SystemParams, t0: float, t1: float,
                            two_excitation: bool = False) -> float:
    if not 0 <= t0 <= t1:
        raise ValueError("need 0 <= t0 <= t1")
    edges = [t0, *_flux_breakpoints(params, t0, t1), t1]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            val, _ = integrate.quad(lambda s: output_flux(params, s, two_excitation), lo, hi,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)
            total += val
    return total


def emitted_photons(params: SystemParams, t: float, two_excitation: bool = False) -> float:
    """Photons emitted into the reservoir up to ``t``, by quadrature of the flux."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return emitted_photons_between(params, 0.0, t, two_excitation)


def output_records(params: SystemParams, times) -> list[OutputRecord]:
    """Flux and cumulative emission on a time grid (cumulative by piecewise quadrature)."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    out = []
    cum, prev = 0.0, 0.0
    for t in times:
        if t > prev:
            cum += emitted_photons_between(params, prev, float(t))
        prev = float(t)
        out.append(OutputRecord(float(t), float(output_flux(params, float(t))), cum))
    return out


def extractable_correlations(params: SystemParams, t: float) -> CorrelationRecord:
    """Correlations carried away by the output fields: the reservoir-pair state."""
    return correlation_record(t, "reservoirs", two_party_state("reservoirs", params, amplitudes(params, t)))
