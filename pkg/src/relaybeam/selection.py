"""Relay selection: random (RRRS), exhaustive (RESRS) and greedy (RGSRS).

Every candidate relay set is scored by the closed-form MSINR solver. The
selection algorithms only ever see SINR values, which is all the destination
would feed back to the relays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from . import rng as rngmod
from .beamformer import EXACT, BeamformingSolution, CovarianceModel, msinr_solve
from .channel import ChannelRealization, NetworkConfig


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    candidate_removed: int | None
    sinr: float
    accepted: bool


@dataclass(frozen=True)
class SelectionResult:
    mask: np.ndarray
    solution: BeamformingSolution
    solver_calls: int
    trace: list = field(default_factory=list)

    @property
    def sinr(self) -> float:
        return self.solution.sinr

    @property
    def iterations(self) -> int:
        """Number of greedy iterations executed after the initial full-set solve."""
        return sum(1 for r in self.trace if r.iteration > 0)


class MaskSolver:
    """MSINR solves for one channel realization, with a call counter.

    In estimated mode the snapshot noise for a mask is drawn from a substream
    keyed by ``snapshot_key`` and the mask itself, so the design SINR of a
    relay set does not depend on which algorithm asks for it or in what order.
    """

    def __init__(
        self,
        ch: ChannelRealization,
        p,
        p_t: float,
        sigma_n2: float,
        model: CovarianceModel = EXACT,
        snapshot_key: tuple = (0,),
    ):
        self.ch = ch
        self.p = np.asarray(p, dtype=float)
        self.p_t = p_t
        self.sigma_n2 = sigma_n2
        self.model = model
        self.snapshot_key = tuple(snapshot_key)
        self.calls = 0

    @classmethod
    def for_config(cls, cfg: NetworkConfig, ch, p, model=EXACT, snapshot_key=(0,)):
        return cls(ch, p, cfg.p_t, cfg.noise_variance, model, snapshot_key)

    def solve(self, mask) -> BeamformingSolution:
        self.calls += 1
        stream = None
        if self.model.estimated:
            stream = rngmod.substream(
                *self.snapshot_key, rngmod.SNAPSHOTS, rngmod.mask_code(mask)
            )
        return msinr_solve(
            self.ch, mask, self.p, self.p_t, self.sigma_n2, self.model, stream
        )


def relay_power_budget_ok(mask, p_t: float) -> bool:
    """Budget check with every relay allotted ``P_T / M``."""
    mask = np.asarray(mask)
    per_relay = p_t / mask.shape[0]
    return float(np.sum(mask.astype(float) ** 2) * per_relay) <= p_t * (1 + 1e-12)


def _result(solver: MaskSolver, sol: BeamformingSolution, trace) -> SelectionResult:
    return SelectionResult(sol.mask, sol, solver.calls, trace)


def no_selection(solver: MaskSolver) -> SelectionResult:
    sol = solver.solve(np.ones(solver.ch.M, dtype=np.int8))
    return _result(solver, sol, [IterationRecord(0, None, sol.sinr, True)])


def rrrs(
    cfg: NetworkConfig,
    ch: ChannelRealization,
    n_select: int,
    p,
    rng: np.random.Generator,
    model: CovarianceModel = EXACT,
    snapshot_key: tuple = (0,),
) -> SelectionResult:
    """Pick ``n_select`` relays uniformly at random and solve once."""
    solver = MaskSolver.for_config(cfg, ch, p, model, snapshot_key)
    return rrrs_with(solver, n_select, rng, cfg.M_min)


def rrrs_with(solver: MaskSolver, n_select: int, rng, m_min: int = 1) -> SelectionResult:
    M = solver.ch.M
    if not m_min <= n_select <= M:
        raise ValueError(f"n_select must lie in [{m_min}, {M}], got {n_select}")
    mask = np.zeros(M, dtype=np.int8)
    mask[rng.choice(M, size=n_select, replace=False)] = 1
    sol = solver.solve(mask)
    return _result(solver, sol, [IterationRecord(0, None, sol.sinr, True)])


def resrs(
    cfg: NetworkConfig,
    ch: ChannelRealization,
    p,
    model: CovarianceModel = EXACT,
    snapshot_key: tuple = (0,),
) -> SelectionResult:
    """Best relay set over every subset of size ``M_min`` .. ``M``."""
    solver = MaskSolver.for_config(cfg, ch, p, model, snapshot_key)
    return resrs_with(solver, cfg.M_min)


def resrs_with(solver: MaskSolver, m_min: int) -> SelectionResult:
    M = solver.ch.M
    best = None
    best_key = None
    for size in range(m_min, M + 1):
        for chosen in combinations(range(M), size):
            mask = np.zeros(M, dtype=np.int8)
            mask[list(chosen)] = 1
            sol = solver.solve(mask)
            key = tuple(int(a) for a in mask)
            # ties: more relays, then the lexicographically smallest mask
            if (
                best is None
                or sol.sinr > best.sinr
                or (sol.sinr == best.sinr and size > len(np.flatnonzero(best.mask)))
                or (sol.sinr == best.sinr and size == len(np.flatnonzero(best.mask)) and key < best_key)
            ):
                best, best_key = sol, key
    return _result(solver, best, [IterationRecord(0, None, best.sinr, True)])


def rgsrs(
    cfg: NetworkConfig,
    ch: ChannelRealization,
    p,
    model: CovarianceModel = EXACT,
    snapshot_key: tuple = (0,),
) -> SelectionResult:
    """Greedy backward elimination with an SINR-improvement stop rule.

    Starting from all relays, each iteration tries removing every active relay
    in turn and keeps the best removal only if it strictly raises the SINR;
    otherwise the previous set is returned. At most ``M - M_min`` relays are
    removed.
    """
    solver = MaskSolver.for_config(cfg, ch, p, model, snapshot_key)
    return rgsrs_with(solver, cfg.M_min)


def rgsrs_with(solver: MaskSolver, m_min: int) -> SelectionResult:
    M = solver.ch.M
    mask = np.ones(M, dtype=np.int8)
    current = solver.solve(mask)
    trace = [IterationRecord(0, None, current.sinr, True)]
    for i in range(1, M - m_min + 1):
        best, removed = None, None
        for m in np.flatnonzero(mask):
            trial = mask.copy()
            trial[m] = 0
            sol = solver.solve(trial)
            if best is None or sol.sinr > best.sinr:
                best, removed = sol, int(m)
        if best.sinr > current.sinr:
            trace.append(IterationRecord(i, removed, best.sinr, True))
            mask, current = best.mask.copy(), best
        else:
            trace.append(IterationRecord(i, removed, best.sinr, False))
            break
    return _result(solver, current, trace)


def resrs_call_count(M: int, m_min: int) -> int:
    return sum(comb(M, c) for c in range(m_min, M + 1))


def rgsrs_eval_bound(M: int, iterations: int) -> int:
    """Upper bound on selection-stage solves after ``iterations`` greedy steps."""
    return (2 * M - iterations + 1) * iterations // 2
