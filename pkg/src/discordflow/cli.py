"""Command line driver: correlation tables and validation reports.

Every subcommand reads an optional flat ``key = value`` config file
(``--config``); command-line flags override it. Times are in units of
``1/gamma``. Numbers are written with 12 significant digits and a fixed
column order, so identical configurations give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .correlations import PAIRS, correlation_record, discord_x, two_party_state
from .dynamics import SystemParams, amplitudes
from .extraction import kappa_from_gamma, output_records
from .fano import flat_profile, spectral_grid
from .lindblad import IntegrationError, QubitCavityState, evolve_trajectory
from .oracle import discord_bruteforce, random_subclass_states

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2
ORACLE_GAP_TOL = 1e-4
ODE_DEV_TOL = 1e-6

TIMESERIES_COLUMNS = ("t", "pair", "concurrence", "discord", "classical", "mutual")
SWEEP_COLUMNS = ("g_over_gamma", "alpha", "discord_c1c2")
ORACLE_COLUMNS = ("source", "index", "t", "discord_analytic", "discord_bruteforce", "abs_gap")
ODE_COLUMNS = ("t", "qubit_population_dev", "cavity_population_dev",
               "reservoir_population_dev", "coherence_dev")
EXTRACT_COLUMNS = ("t", "flux", "cumulative")
SPECTRAL_COLUMNS = ("omega", "kappa", "F", "z", "alpha_sq")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    g_over_gamma: float = 3.0
    alpha: float = 1.0 / math.sqrt(3.0)
    beta_phase: float = 0.0
    t_max: float = 3.0
    n_steps: int = 301
    pairs: tuple = PAIRS
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    # subcommand extras
    n_states: int = 1000
    pair_times: int = 20
    g_min: float = 0.5
    g_max: float = 10.0
    g_steps: int = 96
    alpha_steps: int = 21
    t_fixed: float = 0.6
    workers: int = 1
    band_halfwidths: float = 1e9
    window_halfwidths: float = 10.0
    bare_frequency: float | None = None

    def validate(self):
        if self.n_steps < 2:
            raise UsageError("steps must be >= 2")
        if not self.t_max > 0:
            raise UsageError("t-max must be > 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError("alpha must lie in [0, 1]")
        if self.g_over_gamma < 0:
            raise UsageError("g-over-gamma must be >= 0")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        bad = [p for p in self.pairs if p not in PAIRS]
        if bad or not self.pairs:
            raise UsageError(f"pairs must be a nonempty subset of {','.join(PAIRS)}")
        if self.n_states < 0 or self.pair_times < 0:
            raise UsageError("n-states and pair-times must be >= 0")
        if self.g_steps < 1 or self.alpha_steps < 2 or self.g_min < 0 or self.g_max < self.g_min:
            raise UsageError("invalid sweep grid")
        return self

    def params(self, g_over_gamma: float | None = None, alpha: float | None = None) -> SystemParams:
        return SystemParams.from_ratio(self.g_over_gamma if g_over_gamma is None else g_over_gamma,
                                       self.alpha if alpha is None else alpha, self.beta_phase)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps)


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise UsageError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if name == "pairs":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if name == "bare_frequency":
            return None if raw.lower() in ("", "none") else float(raw)
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
        return raw
    except ValueError as exc:
        raise UsageError(f"bad value for {name}: {raw!r}") from exc


def load_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes in keys allowed."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        key = {"steps": "n_steps", "out": "output_path"}.get(key, key)
        out[key] = _coerce(key, value)
    return out


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop negative zero
    return format(x, ".12g")


def render(columns, rows, fmt: str) -> str:
    rows = [[_fmt(v) for v in row] for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        return buf.getvalue()
    records = [{c: (v if c in ("pair", "source") else None if v == "nan" else json.loads(v))
                for c, v in zip(columns, row)} for row in rows]
    return json.dumps(records, indent=1) + "\n"


def write_output(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


# -- commands -----------------------------------------------------------------

def cmd_timeseries(config: RunConfig) -> list[tuple]:
    """Concurrence, discord, classical and mutual information per time and pair."""
    params = config.params()
    times = config.times()
    amp = amplitudes(params, times)
    rows = []
    for i, t in enumerate(times):
        triple = type(amp)(amp.xi[i], amp.eta[i], amp.chi[i])
        for pair in PAIRS:
            if pair not in config.pairs:
                continue
            rec = correlation_record(float(t), pair, two_party_state(pair, params, triple))
            rows.append((rec.t, rec.pair, rec.concurrence, rec.discord, rec.classical, rec.mutual))
    return rows


def cavity_discord(g_over_gamma: float, alpha: float, t: float, beta_phase: float = 0.0) -> float:
    params = SystemParams.from_ratio(g_over_gamma, alpha, beta_phase)
    return discord_x(two_party_state("cavities", params, amplitudes(params, t)))


def _sweep_cell(args):
    g, a, t, phase = args
    return (g, a, cavity_discord(g, a, t, phase))


def cmd_sweep(config: RunConfig) -> list[tuple]:
    """Two-cavity discord at fixed time over a (g/gamma, alpha) grid."""
    gs = np.linspace(config.g_min, config.g_max, config.g_steps)
    alphas = np.linspace(0.0, 1.0, config.alpha_steps)
    cells = [(float(g), float(a), config.t_fixed, config.beta_phase) for g in gs for a in alphas]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_sweep_cell, cells, chunksize=64))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return sorted(rows)


def pair_states_over_time(config: RunConfig, n_times: int):
    """The three pair states on ``n_times`` points of ``(0, t_max]``."""
    params = config.params()
    out = []
    if n_times == 0:
        return out
    times = np.linspace(0.0, config.t_max, n_times + 1)[1:]
    amp = amplitudes(params, times)
    for i, t in enumerate(times):
        triple = type(amp)(amp.xi[i], amp.eta[i], amp.chi[i])
        for pair in PAIRS:
            out.append((pair, float(t), two_party_state(pair, params, triple)))
    return out


def cmd_oracle_validate(seed: int, n_states: int, pair_times: int = 0,
                        config: RunConfig | None = None) -> list[tuple]:
    """Analytic discord against the brute-force measurement search."""
    config = config or RunConfig()
    rows = []
    for i, x in enumerate(random_subclass_states(n_states, seed)):
        d_a, d_b = discord_x(x), discord_bruteforce(x)
        rows.append(("random", i, float("nan"), d_a, d_b, abs(d_a - d_b)))
    for i, (pair, t, x) in enumerate(pair_states_over_time(config, pair_times)):
        d_a, d_b = discord_x(x), discord_bruteforce(x)
        rows.append((pair, i, t, d_a, d_b, abs(d_a - d_b)))
    return rows


def cmd_validate_ode(config: RunConfig) -> list[tuple]:
    """Master-equation populations and coherence against the closed form."""
    params = config.params()
    times = config.times()
    states = evolve_trajectory(QubitCavityState.basis(1, 0), params, times,
                               bare_frequency=config.bare_frequency)
    amp = amplitudes(params, times)
    rows = []
    for i, (t, st) in enumerate(zip(times, states)):
        blk = st.single_excitation_block()
        xi, eta, chi = amp.xi[i], amp.eta[i], amp.chi[i]
        # |10> and |01> are degenerate at resonance, so bare terms leave rho_23 unchanged
        coh_dev = abs(blk[1, 2] - xi * np.conj(eta))
        rows.append((float(t), abs(blk[1, 1].real - abs(xi) ** 2), abs(blk[2, 2].real - abs(eta) ** 2),
                     abs(blk[3, 3].real - chi**2), coh_dev))
    return rows


def cmd_extract(config: RunConfig) -> list[tuple]:
    return [(r.t, r.flux, r.cumulative) for r in output_records(config.params(), config.times())]


def cmd_spectral(config: RunConfig) -> list[tuple]:
    """Fano quantities for flat coupling on a wide band, sampled near the cavity line."""
    gamma = 1.0
    kappa = kappa_from_gamma(gamma)
    hw = 0.5 * gamma
    band = (-config.band_halfwidths * hw, config.band_halfwidths * hw)
    window = config.window_halfwidths * hw
    omega = np.linspace(-window, window, config.n_steps)
    grid = spectral_grid(flat_profile(kappa, band), 0.0, band, omega=omega)
    return [tuple(float(v) for v in row) for row in grid.rows()]


# -- argument handling ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


_FLAGS = {
    "--g-over-gamma": ("g_over_gamma", float),
    "--alpha": ("alpha", float),
    "--beta-phase": ("beta_phase", float),
    "--t-max": ("t_max", float),
    "--steps": ("n_steps", int),
    "--pairs": ("pairs", str),
    "--seed": ("seed", int),
    "--out": ("output_path", str),
    "--format": ("format", str),
    "--n-states": ("n_states", int),
    "--pair-times": ("pair_times", int),
    "--g-min": ("g_min", float),
    "--g-max": ("g_max", float),
    "--g-steps": ("g_steps", int),
    "--alpha-steps": ("alpha_steps", int),
    "--t-fixed": ("t_fixed", float),
    "--workers": ("workers", int),
    "--band-halfwidths": ("band_halfwidths", float),
    "--window-halfwidths": ("window_halfwidths", float),
    "--bare-frequency": ("bare_frequency", float),
}

COMMANDS = ("timeseries", "sweep", "oracle-validate", "validate-ode", "extract", "spectral")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discordflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value file")
        for flag, (dest, kind) in _FLAGS.items():
            p.add_argument(flag, dest=dest, type=kind, default=None)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        values.update(load_config_file(ns.config))
    for _, (dest, _) in _FLAGS.items():
        v = getattr(ns, dest)
        if v is not None:
            values[dest] = _coerce(dest, v) if dest == "pairs" else v
    return RunConfig(**values).validate()


def run(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        config = resolve_config(ns)
        status = EXIT_OK
        if ns.command == "timeseries":
            columns, rows = TIMESERIES_COLUMNS, cmd_timeseries(config)
        elif ns.command == "sweep":
            columns, rows = SWEEP_COLUMNS, cmd_sweep(config)
        elif ns.command == "oracle-validate":
            columns = ORACLE_COLUMNS
            rows = cmd_oracle_validate(config.seed, config.n_states, config.pair_times, config)
            gap = max((r[-1] for r in rows), default=0.0)
            sys.stderr.write(f"oracle-validate: {len(rows)} states, max gap {gap:.3e} "
                             f"(tolerance {ORACLE_GAP_TOL:g})\n")
            if gap > ORACLE_GAP_TOL:
                status = EXIT_VALIDATION
        elif ns.command == "validate-ode":
            columns, rows = ODE_COLUMNS, cmd_validate_ode(config)
            dev = max(max(r[1:]) for r in rows)
            sys.stderr.write(f"validate-ode: max deviation {dev:.3e} (tolerance {ODE_DEV_TOL:g})\n")
            if dev > ODE_DEV_TOL:
                status = EXIT_VALIDATION
        elif ns.command == "extract":
            columns, rows = EXTRACT_COLUMNS, cmd_extract(config)
        else:
            columns, rows = SPECTRAL_COLUMNS, cmd_spectral(config)
        write_output(render(columns, rows, config.format), config.output_path)
        return status
    except IntegrationError as exc:
        sys.stderr.write(f"discordflow: integration failed: {exc}\n")
        return EXIT_VALIDATION
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"discordflow: error: {exc}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
