"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (also collected in the
terminal summary) and then asserts the same condition.
"""
import math
import time

import numpy as np
from scipy import integrate, optimize

from discordflow import cli
from discordflow.correlations import (
    PAIRS,
    classical_correlations,
    concurrence_x,
    discord_x,
    two_party_state,
)
from discordflow.dynamics import SystemParams, amplitudes, max_stable_step
from discordflow.extraction import emitted_photons, kappa_from_gamma
from discordflow.fano import (
    alpha_sq,
    alpha_sq_normalization,
    flat_profile,
    half_width,
    pv_flat_band,
    pv_integral_F,
)
from discordflow.lindblad import IntegrationError, QubitCavityState, evolve_trajectory
from discordflow.oracle import classical_bruteforce, discord_bruteforce, random_subclass_states

ALPHA = 1 / math.sqrt(3)
C0 = 2 * math.sqrt(2) / 3
D0 = math.log2(3) - 2 / 3


def reference():
    return SystemParams.from_ratio(3.0, ALPHA)


def pair_measure(params, pair, t, f):
    return f(two_party_state(pair, params, amplitudes(params, t)))


def test_criterion_01_initial_qubit_correlations(acceptance_line):
    start = time.perf_counter()
    p = reference()
    c = pair_measure(p, "qubits", 0.0, concurrence_x)
    d = pair_measure(p, "qubits", 0.0, discord_x)
    elapsed = time.perf_counter() - start
    ok = (abs(c - C0) < 1e-12 and abs(d - D0) < 1e-12
          and abs(c - 0.94) <= 0.02 and abs(d - 0.92) <= 0.02 and elapsed < 1.0)
    acceptance_line("1 initial qubit correlations", ok, f"C(0)={c:.12f} D(0)={d:.12f} in {elapsed:.3f}s")
    assert ok


def _runs(mask):
    """(start, stop) index pairs of consecutive True values."""
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return list(zip(np.where(edges == 1)[0], np.where(edges == -1)[0]))


def test_criterion_02_decay_and_transfer_structure(acceptance_line):
    start = time.perf_counter()
    p = reference()
    ts = np.linspace(0, 3, 3001)
    dt = ts[1] - ts[0]
    amp = amplitudes(p, ts)
    states = {pair: [two_party_state(pair, p, a) for a in
                     (type(amp)(x, e, c) for x, e, c in zip(amp.xi, amp.eta, amp.chi))]
              for pair in ("qubits", "reservoirs")}
    cq = np.array([concurrence_x(x) for x in states["qubits"]])
    dq = np.array([discord_x(x) for x in states["qubits"]])

    # concurrence: a dead interval longer than 0.05 followed by a revival
    dead = [(a, b) for a, b in _runs(cq == 0) if (b - a) * dt > 0.05]
    revival = any(b < len(ts) and np.any(cq[b:] > 0) for a, b in dead)

    # discord zeros located from the discord itself, then compared with the tan roots
    def dq_at(t):
        return pair_measure(p, "qubits", t, discord_x)

    w = math.sqrt(p.omega_sq)
    roots = [(n * math.pi - math.atan(4 * w / p.gamma)) / w for n in range(1, 10)]
    roots = [r for r in roots if r <= 3]
    candidates = [i for i in range(1, len(ts) - 1) if dq[i] <= dq[i - 1] and dq[i] <= dq[i + 1] and dq[i] < 1e-3]
    zeros = []
    for i in candidates:
        res = optimize.minimize_scalar(dq_at, bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                                       options={"xatol": 1e-11})
        zeros.append(res.x)
    zero_match = len(zeros) == len(roots) and all(abs(z - r) < 1e-6 for z, r in zip(zeros, roots))
    isolated = all(dq_at(z) < 1e-9 and dq_at(z - 1e-3) > 0 and dq_at(z + 1e-3) > 0 for z in zeros)

    # reservoirs: discord immediately positive, concurrence zero at first
    probe = np.concatenate([np.geomspace(1.0001e-3, 0.1, 400), ts[ts > 0.1]])
    dr_min = min(pair_measure(p, "reservoirs", t, discord_x) for t in probe)
    cr = np.array([concurrence_x(x) for x in states["reservoirs"]])
    first_alive = ts[np.argmax(cr > 0)] if np.any(cr > 0) else math.inf
    elapsed = time.perf_counter() - start

    ok = bool(dead) and revival and zero_match and isolated and dr_min > 0 and first_alive > 0.01 and elapsed < 5
    acceptance_line(
        "2 decay and transfer structure", ok,
        f"dead C interval {(dead[0][1] - dead[0][0]) * dt if dead else 0:.3f} revival={revival}; "
        f"D zeros {np.round(zeros, 6).tolist()} max offset "
        f"{max((abs(z - r) for z, r in zip(zeros, roots)), default=math.nan):.1e}; "
        f"min reservoir D {dr_min:.2e}; reservoir C first >0 at {first_alive:.3f}; {elapsed:.2f}s")
    assert ok


def test_criterion_03_classical_equals_discord(acceptance_line):
    p = reference()
    ts = np.linspace(0, 3, 200)
    gap_analytic = gap_brute = 0.0
    for t in ts:
        amp = amplitudes(p, t)
        for pair in PAIRS:
            x = two_party_state(pair, p, amp)
            d = discord_x(x)
            gap_analytic = max(gap_analytic, abs(classical_correlations(x) - d))
            q_brute, _ = classical_bruteforce(x.matrix())
            gap_brute = max(gap_brute, abs(q_brute - discord_bruteforce(x.matrix())))
    ok = gap_analytic <= 1e-6 and gap_brute <= 1e-4
    acceptance_line("3 classical = discord", ok,
                    f"max |Q-D| analytic {gap_analytic:.2e}, brute force {gap_brute:.2e} (600 states)")
    assert ok


def test_criterion_04_oracle_equivalence(acceptance_line):
    start = time.perf_counter()
    gap = max(abs(discord_x(x) - discord_bruteforce(x.matrix())) for x in random_subclass_states(1000, seed=0))
    elapsed = time.perf_counter() - start
    ok = gap <= 1e-4 and elapsed < 60
    acceptance_line("4 oracle equivalence", ok, f"max gap {gap:.2e} over 1000 states in {elapsed:.1f}s")
    assert ok


def _ode_error(params, times, dt, stepwise=True):
    states = evolve_trajectory(QubitCavityState.basis(1, 0), params, times, dt=dt, stepwise=stepwise)
    amp = amplitudes(params, times)
    err = 0.0
    for i, st in enumerate(states):
        blk = st.single_excitation_block()
        err = max(err, abs(blk[1, 1].real - abs(amp.xi[i]) ** 2), abs(blk[2, 2].real - abs(amp.eta[i]) ** 2),
                  abs(blk[3, 3].real - amp.chi[i] ** 2), abs(blk[1, 2] - amp.xi[i] * np.conj(amp.eta[i])))
    return err


def test_criterion_05_dynamics_cross_validation(acceptance_line):
    times = np.linspace(0.1, 5.0, 50)
    details, ok = [], True
    for ratio in (0.1, 0.25, 3.0):
        p = SystemParams.from_ratio(ratio)
        err = _ode_error(p, times, None)
        dt = max_stable_step(p)
        while True:
            try:
                coarse = _ode_error(p, times, dt, stepwise=False)
                fine = _ode_error(p, times, dt / 2, stepwise=False)
                break
            except IntegrationError:
                dt /= 2
        ratio_err = coarse / fine
        ok &= err < 1e-6 and 12 <= ratio_err <= 20
        details.append(f"g/gamma={ratio}: dev {err:.1e}, halving ratio {ratio_err:.2f} from dt={dt:.2e}")
    acceptance_line("5 lindblad vs closed form", ok, "; ".join(details))
    assert ok


def test_criterion_06_conservation(acceptance_line):
    norm_err = emit_err = 0.0
    for ratio in (0.1, 0.25, 3.0):
        p = SystemParams.from_ratio(ratio)
        amp = amplitudes(p, np.linspace(0, 50, 5001))
        norm_err = max(norm_err, float(np.max(np.abs(amp.norm() - 1))))
        for t in np.linspace(0, 10, 21):
            emit_err = max(emit_err, abs(emitted_photons(p, t) - amplitudes(p, t).chi ** 2))
    late = emitted_photons(reference(), 50.0)
    ok = norm_err <= 1e-12 and emit_err <= 1e-8 and abs(late - 1) <= 1e-6
    acceptance_line("6 conservation", ok,
                    f"norm err {norm_err:.1e}; |emitted - chi^2| {emit_err:.1e}; emitted(50) - 1 = {late - 1:.1e}")
    assert ok


def test_criterion_07_asymptotic_transfer(acceptance_line):
    p = reference()
    c = pair_measure(p, "reservoirs", 50.0, concurrence_x)
    d = pair_measure(p, "reservoirs", 50.0, discord_x)
    ok = abs(c - C0) <= 1e-3 and abs(d - D0) <= 1e-3
    acceptance_line("7 asymptotic transfer", ok, f"reservoir C(50)-C0={c - C0:.1e}, D(50)-D0={d - D0:.1e}")
    assert ok


def test_criterion_08_sweep_non_monotone(acceptance_line):
    config = cli.RunConfig()
    rows = cli.cmd_sweep(config)
    g_grid = sorted({r[0] for r in rows})
    vals = np.array([cli.cavity_discord(g, ALPHA, config.t_fixed) for g in g_grid])
    peak = any(vals[i] > vals[:i].min() and vals[i] > vals[i + 1:].min() for i in range(1, len(vals) - 1))
    edge = max(abs(d) for g, a, d in rows if a in (0.0, 1.0))
    ok = peak and edge < 1e-12 and g_grid[0] == 0.5 and g_grid[-1] == 10.0
    acceptance_line("8 cavity discord sweep", ok,
                    f"non-monotone={peak} (max {vals.max():.3f}, interior min {vals[1:-1].min():.2e}); "
                    f"alpha in {{0,1}} max |D| {edge:.1e}")
    assert ok


def test_criterion_09_fano(acceptance_line):
    gamma = 1.0
    kappa = kappa_from_gamma(gamma)
    hw = gamma / 2
    k2 = kappa ** 2

    wide = (-1e9 * hw, 1e9 * hw)
    window = np.linspace(-50 * hw, 50 * hw, 41)
    f_max = max(abs(pv_integral_F(flat_profile(kappa, wide), w, wide)) for w in window)

    band = (-50 * hw, 50 * hw)
    norm = alpha_sq_normalization(flat_profile(kappa, band), 0.0, band)
    bare, _ = integrate.quad(lambda w: alpha_sq(w, 0.0, kappa, 0.0), *band, points=[0.0])

    hwhm = half_width(lambda w: float(alpha_sq(w, 0.0, kappa, pv_integral_F(flat_profile(kappa, wide), w, wide))),
                      0.0, 0.1)

    test_band = (-3.0, 4.0)
    probe = np.concatenate([np.linspace(-2.9, 3.9, 35), [-6.0, 7.5]])
    log_err = max(abs(pv_integral_F(lambda w: kappa, w, test_band) - pv_flat_band(kappa, w, test_band))
                  for w in probe)

    ok = f_max < 1e-6 * k2 and abs(norm - 1) <= 1e-3 and abs(hwhm - gamma / 2) <= 1e-4 and log_err <= 1e-6
    acceptance_line("9 fano spectral", ok,
                    f"max|F|/k^2 {f_max / k2:.1e}; banded self-consistent norm {norm:.12f} "
                    f"(bare Lorentzian on same window {bare:.5f}); HWHM {hwhm:.10f}; log err {log_err:.1e}")
    assert ok


def test_criterion_10_determinism(acceptance_line, tmp_path):
    commands = {
        "timeseries": [],
        "sweep": [],
        "oracle-validate": ["--n-states", "50"],
        "validate-ode": ["--steps", "31"],
        "extract": [],
        "spectral": ["--steps", "101"],
    }
    same = {}
    for name, extra in commands.items():
        outs = []
        for k in range(2):
            path = tmp_path / f"{name}-{k}.csv"
            code = cli.run([name, *extra, "--out", str(path)])
            outs.append((code, path.read_bytes()))
        same[name] = outs[0] == outs[1] and outs[0][0] == 0 and len(outs[0][1]) > 0
    ok = all(same.values())
    acceptance_line("10 determinism", ok, ", ".join(f"{k}={'identical' if v else 'DIFFERS'}" for k, v in same.items()))
    assert ok
