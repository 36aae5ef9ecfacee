import math

import numpy as np
import pytest

from discordflow.dynamics import SystemParams, amplitudes, max_stable_step
from discordflow.lindblad import (
    IntegrationError,
    QubitCavityState,
    evolve,
    evolve_trajectory,
    lindblad_rhs,
    liouvillian,
)


def random_state(rng, n_max=1):
    dim = 2 * (n_max + 1)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return QubitCavityState(rho / np.trace(rho).real, n_max)


def deviations(state, amp):
    """Max deviation of populations and the qubit/cavity coherence from the closed form."""
    pq = state.element(1, 0, 1, 0).real
    pc = state.element(0, 1, 0, 1).real
    pr = state.element(0, 0, 0, 0).real
    coh = state.element(1, 0, 0, 1)
    return max(abs(pq - abs(amp.xi) ** 2), abs(pc - abs(amp.eta) ** 2),
               abs(pr - amp.chi ** 2), abs(coh - amp.xi * np.conj(amp.eta)))


def test_ground_state_is_steady():
    p = SystemParams.from_ratio(3.0)
    ground = QubitCavityState.basis(0, 0)
    assert np.all(lindblad_rhs(ground, p) == 0)
    out = evolve(ground, p, 2.0)
    assert np.array_equal(out.matrix, ground.matrix)


def test_pure_cavity_decay_rate():
    p = SystemParams(g=0.0, gamma=0.7)
    st = QubitCavityState.basis(0, 1)
    drho = lindblad_rhs(st, p)
    dn = QubitCavityState(drho, 1).photon_number()
    assert dn == pytest.approx(-0.7 * st.photon_number(), abs=1e-15)


@pytest.mark.parametrize("n_max", [1, 3])
def test_rhs_traceless_and_matches_superoperator(n_max):
    rng = np.random.default_rng(n_max)
    p = SystemParams.from_ratio(2.0)
    st = random_state(rng, n_max)
    drho = lindblad_rhs(st, p, bare_frequency=5.0)
    assert abs(np.trace(drho)) < 1e-12
    vec = liouvillian(p, n_max, bare_frequency=5.0) @ st.matrix.reshape(-1)
    assert np.allclose(vec.reshape(st.dim, st.dim), drho, atol=1e-13)


def test_rhs_dimension_mismatch():
    with pytest.raises(ValueError):
        QubitCavityState(np.eye(6) / 6, n_max=1)
    st = QubitCavityState.basis(1, 0)
    st.matrix = np.eye(6) / 6
    with pytest.raises(ValueError):
        lindblad_rhs(st, SystemParams.from_ratio(1.0))


def test_fig_time_matches_closed_form():
    p = SystemParams.from_ratio(3.0)
    out = evolve(QubitCavityState.basis(1, 0), p, 0.6)
    assert deviations(out, amplitudes(p, 0.6)) < 1e-6
    assert not out.violations()


def test_lossless_rabi_oscillation():
    p = SystemParams(g=1.0, gamma=1e-12)
    states = evolve_trajectory(QubitCavityState.basis(1, 0), p, [0.5, 1.0, 2.0])
    for t, st in zip([0.5, 1.0, 2.0], states):
        assert st.element(1, 0, 1, 0).real == pytest.approx(math.cos(t) ** 2, abs=1e-8)
        assert st.element(0, 1, 0, 1).real == pytest.approx(math.sin(t) ** 2, abs=1e-8)


@pytest.mark.parametrize("ratio", [0.1, 0.25, 3.0])
def test_truncation_independence(ratio):
    p = SystemParams.from_ratio(ratio)
    times = [0.3, 1.0, 2.5]
    small = evolve_trajectory(QubitCavityState.basis(1, 0, 1), p, times)
    big = evolve_trajectory(QubitCavityState.basis(1, 0, 3), p, times)
    for s, b in zip(small, big):
        assert np.max(np.abs(s.single_excitation_block() - b.single_excitation_block())) < 1e-10
        assert b.photon_number() == pytest.approx(s.photon_number(), abs=1e-10)


def test_bare_frequency_leaves_observables_unchanged():
    p = SystemParams.from_ratio(3.0)
    plain = evolve(QubitCavityState.basis(1, 0), p, 0.6)
    lab = evolve(QubitCavityState.basis(1, 0), p, 0.6, dt=max_stable_step(p) / 40, bare_frequency=7.0)
    assert np.allclose(np.diag(plain.matrix), np.diag(lab.matrix), atol=1e-8)
    assert abs(plain.element(1, 0, 0, 1)) == pytest.approx(abs(lab.element(1, 0, 0, 1)), abs=1e-8)


def test_fourth_order_convergence():
    p = SystemParams.from_ratio(3.0)
    times = np.linspace(0.1, 2.0, 20)
    amp = [amplitudes(p, t) for t in times]
    bound = max_stable_step(p)

    def err(dt):
        states = evolve_trajectory(QubitCavityState.basis(1, 0), p, times, dt=dt, stepwise=False)
        return max(deviations(s, a) for s, a in zip(states, amp))

    ratio = err(bound / 2) / err(bound / 4)
    assert 12 <= ratio <= 20


def test_invariants_along_trajectory():
    p = SystemParams.from_ratio(0.1)
    rng = np.random.default_rng(0)
    for st in evolve_trajectory(random_state(rng), p, np.linspace(0, 5, 11)):
        assert not st.violations()


def test_too_large_step_aborts_with_diagnostic():
    p = SystemParams.from_ratio(3.0)
    with pytest.raises(IntegrationError, match="reduce dt"):
        evolve(QubitCavityState.basis(1, 0), p, 1.0, dt=max_stable_step(p))


def test_step_and_time_validation():
    p = SystemParams.from_ratio(3.0)
    init = QubitCavityState.basis(1, 0)
    with pytest.raises(ValueError):
        evolve(init, p, 1.0, dt=2 * max_stable_step(p))
    with pytest.raises(ValueError):
        evolve(init, p, -1.0)
    with pytest.raises(ValueError):
        evolve_trajectory(init, p, [1.0, 0.5])
    with pytest.raises(ValueError):
        evolve(QubitCavityState(np.diag([2.0, 0, 0, -1.0])), p, 1.0)
    with pytest.raises(ValueError):
        QubitCavityState.basis(0, 2, n_max=1)
