import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaybeam.beamformer import BeamformingSolution, CovarianceModel
from relaybeam.channel import ChannelRealization, NetworkConfig, draw_channels, source_powers
from relaybeam.rng import mask_code, substream
from relaybeam.selection import (
    MaskSolver,
    relay_power_budget_ok,
    resrs,
    resrs_call_count,
    resrs_with,
    rgsrs,
    rgsrs_eval_bound,
    rrrs,
)

CFG = NetworkConfig()


def channel(seed, cfg=CFG):
    return draw_channels(cfg, substream(seed))


def test_call_count_formulas():
    assert resrs_call_count(2, 1) == 3
    assert resrs_call_count(8, 3) == 56 + 70 + 56 + 28 + 8 + 1 == 219
    assert rgsrs_eval_bound(8, 5) == 30


def test_mask_code():
    assert mask_code([1, 0, 1]) == 5
    assert mask_code([0, 0, 0]) == 0


class TestRrrs:
    def test_full_selection_is_no_selection(self):
        ch, p = channel(1), source_powers(CFG)
        res = rrrs(CFG, ch, CFG.M, p, substream(0, 1))
        assert res.mask.tolist() == [1] * CFG.M
        full = MaskSolver.for_config(CFG, ch, p).solve(np.ones(CFG.M))
        assert res.sinr == full.sinr

    def test_default_subset_size(self):
        res = rrrs(CFG, channel(2), 3, source_powers(CFG), substream(0, 2))
        assert int(res.mask.sum()) == 3
        assert res.solver_calls == 1
        assert len(res.trace) == 1

    def test_deterministic(self):
        ch, p = channel(3), source_powers(CFG)
        a = rrrs(CFG, ch, 3, p, substream(9, 9))
        b = rrrs(CFG, ch, 3, p, substream(9, 9))
        assert a.mask.tolist() == b.mask.tolist()

    def test_uniform_choice(self):
        counts = np.zeros(CFG.M)
        ch, p = channel(4), source_powers(CFG)
        rng = substream(5)
        for _ in range(2000):
            counts += rrrs(CFG, ch, 3, p, rng).mask
        np.testing.assert_allclose(counts / 2000, 3 / CFG.M, atol=0.05)

    @pytest.mark.parametrize("n", [2, 9])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            rrrs(CFG, channel(1), n, source_powers(CFG), substream(0))


class TestResrs:
    def test_small_count(self):
        cfg = NetworkConfig(M=2, M_min=1)
        res = resrs(cfg, channel(1, cfg), source_powers(cfg))
        assert res.solver_calls == 3

    def test_default_count_and_full_set_in_exact_mode(self):
        res = resrs(CFG, channel(6), source_powers(CFG))
        assert res.solver_calls == 219
        assert res.mask.tolist() == [1] * CFG.M

    def test_matches_brute_force_argmax(self):
        cfg = NetworkConfig(M=5, M_min=2)
        ch, p = channel(7, cfg), source_powers(cfg)
        model = CovarianceModel("estimated", 2)
        res = resrs(cfg, ch, p, model, (7,))
        solver = MaskSolver.for_config(cfg, ch, p, model, (7,))
        scores = {
            bits: solver.solve(np.array(bits)).sinr
            for bits in itertools.product((0, 1), repeat=5)
            if sum(bits) >= 2
        }
        assert res.sinr == max(scores.values())
        assert scores[tuple(res.mask.tolist())] == res.sinr

    def test_tie_break_prefers_more_relays(self):
        # relays 2 and 3 are dead, so adding them never changes the SINR
        cfg = NetworkConfig(K=1, M=4, M_min=1)
        f0 = np.array([[1.0], [0.5j], [0.0], [0.0]])
        g0 = np.array([1.0, 1.0, 0.0, 0.0])
        ch = ChannelRealization.from_small_scale(f0, g0)
        res = resrs(cfg, ch, [1.0])
        assert res.mask.tolist() == [1, 1, 1, 1]

    def test_tie_break_lexicographic_within_size(self):
        class SizeOnlySolver:
            """Scores a mask by its size alone, so all same-size masks tie."""

            ch = type("Ch", (), {"M": 5})()
            calls = 0

            def solve(self, mask):
                self.calls += 1
                return BeamformingSolution(np.zeros(5), 10.0 - mask.sum(), mask)

        res = resrs_with(SizeOnlySolver(), 2)
        assert res.mask.tolist() == [0, 0, 0, 1, 1]


class TestRgsrs:
    def test_exact_mode_keeps_full_set(self):
        for seed in range(10):
            res = rgsrs(CFG, channel(seed), source_powers(CFG))
            assert res.mask.tolist() == [1] * CFG.M
            assert res.iterations == 1
            assert res.trace[1].accepted is False
            assert res.sinr == res.trace[0].sinr
            assert res.solver_calls == 1 + CFG.M

    def test_budget_bound(self):
        model = CovarianceModel("estimated", 2)
        for seed in range(20):
            res = rgsrs(CFG, channel(seed), source_powers(CFG), model, (seed,))
            evals = res.solver_calls - 1
            assert evals == rgsrs_eval_bound(CFG.M, res.iterations)
            assert evals <= 30

    def test_never_worse_than_start(self):
        cfg = NetworkConfig(M=4, M_min=1)
        model = CovarianceModel("estimated", 2)
        for seed in range(30):
            res = rgsrs(cfg, channel(seed, cfg), source_powers(cfg), model, (seed,))
            assert res.sinr >= res.trace[0].sinr

    @pytest.mark.parametrize("seed", range(8))
    def test_each_step_takes_best_single_removal(self, seed):
        cfg = NetworkConfig(M=5, M_min=1, snr_db=0.0)
        ch, p = channel(seed, cfg), source_powers(cfg)
        model = CovarianceModel("estimated", 1)
        res = rgsrs(cfg, ch, p, model, (seed,))
        solver = MaskSolver.for_config(cfg, ch, p, model, (seed,))
        mask = np.ones(5, dtype=int)
        for rec in res.trace[1:]:
            scores = {}
            for m in np.flatnonzero(mask):
                trial = mask.copy()
                trial[m] = 0
                scores[int(m)] = solver.solve(trial).sinr
            best = max(scores.values())
            assert rec.candidate_removed == min(m for m, v in scores.items() if v == best)
            assert rec.sinr == best
            if rec.accepted:
                mask[rec.candidate_removed] = 0
        assert mask.tolist() == res.mask.tolist()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 6), st.integers(1, 3))
def test_dominance_and_trace_invariants(seed, M, m_min):
    m_min = min(m_min, M)
    cfg = NetworkConfig(M=M, M_min=m_min, snr_db=0.0, inr_db=10.0)
    ch, p = channel(seed, cfg), source_powers(cfg)
    model = CovarianceModel("estimated", 1)
    key = (seed, 1)
    ex = resrs(cfg, ch, p, model, key)
    gr = rgsrs(cfg, ch, p, model, key)
    assert ex.sinr >= gr.sinr >= gr.trace[0].sinr
    assert ex.solver_calls == resrs_call_count(M, m_min)
    for res in (ex, gr):
        assert res.mask.sum() >= m_min
        assert relay_power_budget_ok(res.mask, cfg.p_t)
        fresh = MaskSolver.for_config(cfg, ch, p, model, key).solve(res.mask)
        assert abs(fresh.sinr - res.sinr) <= 1e-12 * res.sinr
    # accepted steps remove exactly one relay and strictly improve
    accepted = [r for r in gr.trace if r.accepted]
    assert all(b.sinr > a.sinr for a, b in zip(accepted, accepted[1:]))
    assert M - int(gr.mask.sum()) == len(accepted) - 1
    assert all(r.candidate_removed is not None for r in gr.trace[1:])
