"""Monte Carlo experiments: SINR against SNR, SINR against M, BER against SNR.

Work is split into independent items, one per (grid point, trial) for the
SINR sweeps and one per (grid point, fading block) for BER. Each item draws
from its own substreams, so results do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng as rngmod
from .beamformer import EXACT, BeamformingSolution, CovarianceModel, evaluate_sinr, signal_terms
from .channel import ChannelRealization, ConfigError, NetworkConfig, complex_gaussian, draw_channels, source_powers
from .selection import MaskSolver, SelectionResult, no_selection, resrs_with, rgsrs_with, rrrs_with

log = logging.getLogger(__name__)

KINDS = ("sinr_vs_snr", "sinr_vs_m", "ber_vs_snr")
ALGORITHMS = ("none", "rrrs", "resrs", "rgsrs")
MAX_REDRAWS = 100


class DegenerateChannelError(ArithmeticError):
    """The desired signal has zero effective gain at the destination."""


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    base: NetworkConfig = field(default_factory=NetworkConfig)
    x_grid: tuple = ()
    algorithms: tuple = ALGORITHMS
    trials: int = 500
    bits: int = 100_000
    model: CovarianceModel = EXACT
    master_seed: int = 0
    n_select: int = 3
    n_coh: int = 100

    def __post_init__(self):
        object.__setattr__(self, "x_grid", tuple(self.x_grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        if not self.x_grid:
            raise ConfigError("x_grid", "must be nonempty")
        if any(b <= a for a, b in zip(self.x_grid, self.x_grid[1:])):
            raise ConfigError("x_grid", f"must be strictly increasing, got {list(self.x_grid)}")
        if not self.algorithms or any(a not in ALGORITHMS for a in self.algorithms):
            raise ConfigError("algorithms", f"must be a nonempty subset of {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("algorithms", "contains duplicates")
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.bits < 1:
            raise ConfigError("bits", f"must be >= 1, got {self.bits}")
        if self.n_coh < 1:
            raise ConfigError("n_coh", f"must be >= 1, got {self.n_coh}")
        if self.master_seed < 0:
            raise ConfigError("master_seed", "must be a non-negative integer")
        if self.kind == "sinr_vs_m":
            for m in self.x_grid:
                if int(m) != m or m < self.base.M_min:
                    raise ConfigError("x_grid", f"relay counts must be integers >= M_min={self.base.M_min}, got {m}")
        for x in self.x_grid:
            cfg = self.config_at(x)
            if "rrrs" in self.algorithms and not cfg.M_min <= self.n_select <= cfg.M:
                raise ConfigError("n_select", f"must lie in [M_min, M] = [{cfg.M_min}, {cfg.M}], got {self.n_select}")

    def config_at(self, x) -> NetworkConfig:
        if self.kind == "sinr_vs_m":
            return self.base.replace(M=int(x))
        return self.base.replace(snr_db=float(x))


@dataclass
class ExperimentCurve:
    kind: str
    x: list
    y: dict
    stderr: dict
    metadata: dict = field(default_factory=dict)


# -- BPSK transmission -------------------------------------------------------

def effective_gain(ch: ChannelRealization, sol: BeamformingSolution, p) -> complex:
    """Complex gain of the desired source's symbol at the destination."""
    return complex(signal_terms(ch, sol.w_tilde, p)[0])


def transmit_block(
    ch: ChannelRealization,
    sol: BeamformingSolution,
    p,
    symbols,
    rng: np.random.Generator,
    sigma_n2: float,
) -> np.ndarray:
    """Send one block of K-source BPSK symbols through relays and destination.

    ``symbols`` has shape (n, K). Relay noise is drawn first (n x M), then
    destination noise (n), both CN(0, sigma_n2).
    """
    s = np.asarray(symbols, dtype=float)
    if s.ndim != 2 or s.shape[1] != ch.K:
        raise ValueError(f"symbols must have shape (n, {ch.K}), got {s.shape}")
    n = s.shape[0]
    relay_noise = complex_gaussian(rng, (n, ch.M), sigma_n2)
    dest_noise = complex_gaussian(rng, n, sigma_n2)
    x = (s * np.sqrt(np.asarray(p, dtype=float))) @ ch.f.T + relay_noise
    y = x * (sol.mask * sol.w_tilde)
    return y @ ch.g + dest_noise


def detect_bpsk(z, h_eff: complex):
    """Coherent BPSK decision; bit 0 stands for +1 and bit 1 for -1."""
    if h_eff == 0:
        raise DegenerateChannelError("effective channel is zero")
    metric = np.real(np.conj(h_eff) * np.asarray(z))
    return (metric < 0).astype(np.int8)


def bits_to_symbols(bits):
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


# -- per-item workers ---------------------------------------------------------

def _select(alg: str, spec: ExperimentSpec, cfg: NetworkConfig, ch, p, key) -> SelectionResult:
    solver = MaskSolver.for_config(cfg, ch, p, spec.model, key)
    if alg == "none":
        return no_selection(solver)
    if alg == "rrrs":
        return rrrs_with(solver, spec.n_select, rngmod.substream(*key, rngmod.RANDOM_SELECTION), cfg.M_min)
    if alg == "resrs":
        return resrs_with(solver, cfg.M_min)
    if alg == "rgsrs":
        return rgsrs_with(solver, cfg.M_min)
    raise ValueError(f"unknown algorithm {alg!r}")


def sinr_trial(spec: ExperimentSpec, xi: int, trial: int) -> dict:
    """Run every algorithm on one shared channel draw.

    Returns ``{alg: (evaluated_sinr, design_sinr, solver_calls)}``.
    """
    cfg = spec.config_at(spec.x_grid[xi])
    p = source_powers(cfg)
    key = (spec.master_seed, xi, trial)
    ch = draw_channels(cfg, rngmod.substream(*key, rngmod.CHANNEL))
    out = {}
    for alg in spec.algorithms:
        res = _select(alg, spec, cfg, ch, p, key)
        true_sinr = evaluate_sinr(
            ch, res.solution.w_tilde, p, cfg.noise_variance, res.mask, spec.model.relay_noise
        )
        out[alg] = (true_sinr, res.sinr, res.solver_calls)
    return out


def ber_block(spec: ExperimentSpec, xi: int, block: int) -> dict:
    """Transmit one fading block per algorithm with shared symbols and noise.

    Returns ``{alg: (errors, n_bits, solver_calls)}`` plus the number of
    redraws under the key ``"_redraws"``.
    """
    cfg = spec.config_at(spec.x_grid[xi])
    p = source_powers(cfg)
    n_sym = min(spec.n_coh, spec.bits - block * spec.n_coh)
    for attempt in range(MAX_REDRAWS):
        key = (spec.master_seed, xi, block, attempt)
        ch = draw_channels(cfg, rngmod.substream(*key, rngmod.CHANNEL))
        results = {alg: _select(alg, spec, cfg, ch, p, key) for alg in spec.algorithms}
        gains = {alg: effective_gain(ch, r.solution, p) for alg, r in results.items()}
        if all(h != 0 for h in gains.values()):
            break
        log.warning("degenerate realization at x=%s block=%d, redrawing", spec.x_grid[xi], block)
    else:
        raise DegenerateChannelError(f"{MAX_REDRAWS} degenerate draws in a row")

    sym_rng = rngmod.substream(*key, rngmod.TRANSMIT, 0)
    sent = sym_rng.integers(0, 2, size=(n_sym, cfg.K))
    symbols = bits_to_symbols(sent)
    out = {"_redraws": attempt}
    for alg, res in results.items():
        noise_rng = rngmod.substream(*key, rngmod.TRANSMIT, 1)
        z = transmit_block(ch, res.solution, p, symbols, noise_rng, cfg.noise_variance)
        errors = int(np.count_nonzero(detect_bpsk(z, gains[alg]) != sent[:, 0]))
        out[alg] = (errors, n_sym, res.solver_calls)
    return out


def _run_item(args):
    spec, xi, idx = args
    if spec.kind == "ber_vs_snr":
        return ber_block(spec, xi, idx)
    return sinr_trial(spec, xi, idx)


def _items(spec: ExperimentSpec):
    count = spec.trials if spec.kind != "ber_vs_snr" else math.ceil(spec.bits / spec.n_coh)
    return [(spec, xi, i) for xi in range(len(spec.x_grid)) for i in range(count)]


def _map(items, workers: int):
    if workers <= 1:
        return [_run_item(it) for it in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_item, items, chunksize=chunk))


# -- reductions ---------------------------------------------------------------

def _mean_stderr(values) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def _to_db(mean: float, se: float) -> tuple[float, float]:
    if mean <= 0:
        return -math.inf, 0.0
    return 10.0 * math.log10(mean), 10.0 / math.log(10.0) * se / mean


def _calls_stats(calls) -> dict:
    return {"mean": math.fsum(calls) / len(calls), "max": max(calls)}


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentCurve:
    items = _items(spec)
    results = _map(items, workers)
    per_point = [[] for _ in spec.x_grid]
    for (_, xi, _), res in zip(items, results):
        per_point[xi].append(res)

    y = {a: [] for a in spec.algorithms}
    se = {a: [] for a in spec.algorithms}
    calls = {a: [] for a in spec.algorithms}
    extra = {}
    if spec.kind == "ber_vs_snr":
        redraws = 0
        for rows in per_point:
            redraws += sum(r["_redraws"] for r in rows)
            for a in spec.algorithms:
                errors = sum(r[a][0] for r in rows)
                nbits = sum(r[a][1] for r in rows)
                block_ber = [r[a][0] / r[a][1] for r in rows]
                y[a].append(errors / nbits)
                se[a].append(_mean_stderr(block_ber)[1])
                calls[a].extend(r[a][2] for r in rows)
        extra["degenerate_redraws"] = redraws
    else:
        design = {a: [] for a in spec.algorithms}
        for rows in per_point:
            for a in spec.algorithms:
                m, s = _to_db(*_mean_stderr([r[a][0] for r in rows]))
                y[a].append(m)
                se[a].append(s)
                design[a].append(_to_db(*_mean_stderr([r[a][1] for r in rows]))[0])
                calls[a].extend(r[a][2] for r in rows)
        extra["design_sinr_db"] = design

    metadata = {
        "spec": spec_to_dict(spec),
        "solver_calls": {a: _calls_stats(c) for a, c in calls.items()},
        **extra,
    }
    return ExperimentCurve(spec.kind, list(spec.x_grid), y, se, metadata)


def run_sinr_vs_snr(spec: ExperimentSpec, workers: int = 1) -> ExperimentCurve:
    if spec.kind != "sinr_vs_snr":
        raise ValueError(f"expected a sinr_vs_snr spec, got {spec.kind}")
    return run_experiment(spec, workers)


def run_sinr_vs_m(spec: ExperimentSpec, workers: int = 1) -> ExperimentCurve:
    if spec.kind != "sinr_vs_m":
        raise ValueError(f"expected a sinr_vs_m spec, got {spec.kind}")
    return run_experiment(spec, workers)


def run_ber_vs_snr(spec: ExperimentSpec, workers: int = 1) -> ExperimentCurve:
    if spec.kind != "ber_vs_snr":
        raise ValueError(f"expected a ber_vs_snr spec, got {spec.kind}")
    return run_experiment(spec, workers)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    """Flat key/value form, the same layout the config files use."""
    out = {"kind": spec.kind}
    out.update(asdict(spec.base))
    out.update(
        x_grid=list(spec.x_grid),
        algorithms=list(spec.algorithms),
        trials=spec.trials,
        bits=spec.bits,
        mode=str(spec.model),
        relay_noise=spec.model.relay_noise,
        master_seed=spec.master_seed,
        n_select=spec.n_select,
        n_coh=spec.n_coh,
    )
    return out
