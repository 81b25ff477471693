import numpy as np
import pytest

from relaysec.channel import SystemConfig, draw_realization
from relaysec.errors import ArgumentError
from relaysec.harness import (AlgoSpec, _stats, new_state, parse_algo, run_slot, run_trial, snr_to_power,
                              sweep_buffer, sweep_eta, sweep_snr, trial_rng)
from relaysec.linkmetrics import ic_feasibility, rate_eave_mimo, rate_user_mimo
from relaysec.precoding import Precoder, draw_signals
from relaysec.scheduler import complexity_counts, jammers_for, rjfs_select

CFG = SystemConfig(slots=6, warmup=1, trials=3, snr_grid_db=(10.0,))


def test_parse_algo_grammar():
    assert parse_algo("ESR") == AlgoSpec("ESR", "RJFS")
    s = parse_algo("BF-RJFS:noic:corr")
    assert (s.name, s.ic, s.correlated, s.jamming, s.buffered) == ("BF-RJFS", False, True, True, True)
    assert parse_algo("OS").jamming is False
    assert parse_algo("OS:jam").jamming is True
    with pytest.raises(ArgumentError):
        parse_algo("Foo")
    with pytest.raises(ArgumentError):
        parse_algo("RJFS:bogus")


def _drawer(mutate):
    def draw(cfg, spec, rng):
        chan = draw_realization(cfg, spec.correlated, rng)
        sig = draw_signals(cfg, rng)
        mutate(chan)
        return chan, sig
    return draw


def _relay_rates(chan, cfg, relaying, jam, ic):
    """Relay reception rates recomposed from raw matrices."""
    h = np.vstack([chan.h_relays[i] for i in relaying])
    u = np.linalg.pinv(h)
    p_s, p_j = cfg.power / cfg.n_t, cfg.power / (len(jam) * cfg.n_k)
    out = []
    for b, i in enumerate(relaying):
        a = chan.h_relays[i] @ u
        ab = a[:, 2 * b:2 * b + 2]
        other = np.delete(a, [2 * b, 2 * b + 1], axis=1)
        hk = np.hstack([chan.h_relay_relay[k, i] for k in jam])
        phi = ic_feasibility(np.sqrt(p_s) * a, np.sqrt(p_j) * hk, cfg.gamma0) if ic else 1
        n = np.eye(2) + p_s * other @ other.conj().T + phi * p_j * hk @ hk.conj().T
        s = p_s * ab @ ab.conj().T
        out.append(np.log2(abs(np.linalg.det(np.eye(2) + np.linalg.inv(n) @ s))))
    return out


def test_slot_matches_composed_pipeline():
    for seed in range(5):
        state = new_state(CFG)
        state.slot = 1
        rate, _ = run_slot(CFG, state, "RJFS", np.random.default_rng(seed))
        rng = np.random.default_rng(seed)
        chan = draw_realization(CFG, False, rng)
        draw_signals(CFG, rng)
        sel = rjfs_select(chan, CFG)
        jam = jammers_for(sel.relaying_set, 6, 2)
        rel = _relay_rates(chan, CFG, sel.relaying_set, jam, True)
        prec = Precoder(np.linalg.pinv(np.vstack([chan.h_relays[i] for i in sel.relaying_set])), [])
        expect = 0.0
        for b, r_relay in enumerate(rel):
            u = b % 2
            hop = rate_user_mimo(chan, CFG, u, sel.relaying_set)
            r_e = rate_eave_mimo(chan, prec, CFG, u, jam)
            expect += max(0.0, min(r_relay, hop) - r_e)
        assert rate == pytest.approx(0.5 * expect, rel=1e-9)


def test_zero_leakage_slot_is_user_sum_rate():
    def mute(chan):
        chan.h_eaves[:] = 0
        chan.h_relay_eave[:] = 0
    draw = _drawer(mute)
    state = new_state(CFG)
    state.slot = 1
    rate, _ = run_slot(CFG, state, "RJFS:noic", np.random.default_rng(3), draw=draw)
    rng = np.random.default_rng(3)
    chan, _ = draw(CFG, parse_algo("RJFS"), rng)
    sel = rjfs_select(chan, CFG)
    rel = _relay_rates(chan, CFG, sel.relaying_set, jammers_for(sel.relaying_set, 6, 2), False)
    users = [min(r, rate_user_mimo(chan, CFG, b % 2, sel.relaying_set)) for b, r in enumerate(rel)]
    assert rate == pytest.approx(0.5 * sum(users), rel=1e-9)


def test_singular_draws_become_zero_slot():
    calls = []

    def broken(chan):
        calls.append(1)
        chan.h_relays[:] = 1.0
    rec_state = new_state(CFG)
    rec_state.slot = 1
    from relaysec.harness import TrialRecord
    rec = TrialRecord()
    rate, _ = run_slot(CFG, rec_state, "Greedy-RJFS", np.random.default_rng(0), record=rec, draw=_drawer(broken))
    assert rate == 0.0 and rec.slot_secrecy == [0.0]
    assert len(calls) <= 11


def test_slot_determinism():
    for algo in ("RJFS", "BF-RJFS", "MaxRatio", "OS"):
        a, sa = run_slot(CFG, new_state(CFG), algo, np.random.default_rng(9))
        b, sb = run_slot(CFG, new_state(CFG), algo, np.random.default_rng(9))
        assert a == b
        assert sa.buf.occupancy().tolist() == sb.buf.occupancy().tolist()


def test_trial_composition():
    one = run_trial(CFG, "RJFS", 1, trial_rng(1, 0))
    rate, _ = run_slot(CFG, new_state(CFG), "RJFS", trial_rng(1, 0))
    assert one.slot_secrecy == [rate]
    rec = run_trial(CFG, "BF-RJFS", 12, trial_rng(1, 1))
    again = run_trial(CFG, "BF-RJFS", 12, trial_rng(1, 1))
    assert rec.slot_secrecy == again.slot_secrecy and rec.link_history == again.link_history
    assert len(rec.link_history) == 12 and set(rec.link_history) <= {"I", "II"}
    assert all(v >= 0 for v in rec.slot_secrecy)
    assert rec.mean(2) == pytest.approx(sum(rec.slot_secrecy[2:]) / 10)
    assert rec.link_history[0] == "I"
    with pytest.raises(ArgumentError):
        run_trial(CFG, "RJFS", 0, trial_rng(1, 0))


def test_buffered_first_link_stores_packets():
    state = new_state(CFG)
    rate, state = run_slot(CFG, state, "BF-RJFS", np.random.default_rng(2))
    assert rate == 0.0 and state.buf.occupancy().sum() == 2
    pkt = next(q[0] for q in state.buf.queues if q)
    assert pkt.payload.shape == (2, 1)


def test_sweep_point_equals_trial_mean():
    cfg = CFG.with_(trials=1)
    res = sweep_snr(cfg, ["RJFS"])
    rec = run_trial(cfg.with_(power=snr_to_power(10.0)), "RJFS", cfg.slots, trial_rng(cfg.seed, 0))
    assert res.mean["RJFS"] == [rec.mean(cfg.warmup)]
    assert res.std_error["RJFS"] == [0.0]


def test_stats_constant_and_spread():
    assert _stats([2.5] * 7) == (2.5, 0.0)
    m, se = _stats([1.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1.0)


def test_std_error_shrinks_with_trials():
    cfg = CFG.with_(slots=2, warmup=0)
    small = sweep_snr(cfg, ["MaxMin"], trials=50).std_error["MaxMin"][0]
    big = sweep_snr(cfg, ["MaxMin"], trials=200).std_error["MaxMin"][0]
    assert 0.7 * 2 <= small / big <= 1.3 * 2


def test_sweep_determinism_and_order_independence():
    a = sweep_snr(CFG, ["RJFS", "MaxLink"])
    b = sweep_snr(CFG, ["MaxLink", "RJFS"])
    assert a.mean["RJFS"] == b.mean["RJFS"] and a.std_error == {k: b.std_error[k] for k in a.std_error}
    for t in reversed(range(CFG.trials)):
        rec = run_trial(CFG.with_(power=10.0), "RJFS", CFG.slots, trial_rng(CFG.seed, t))
        assert a.per_trial["RJFS"][0][t] == rec.mean(CFG.warmup)


def test_sweep_complexity_counts():
    res = sweep_snr(CFG, ["RJFS", "Greedy-RJFS", "BF-RJFS", "Greedy-BF-RJFS", "SR"])
    exh, greedy = complexity_counts(6, 2)
    assert res.complexity == {"RJFS": exh, "Greedy-RJFS": greedy, "BF-RJFS": exh, "Greedy-BF-RJFS": greedy,
                              "SR": exh}
    assert all(m >= 0 for ms in res.mean.values() for m in ms)


def test_sweep_eta_shapes_and_equal_power_point():
    cfg = CFG.with_(eta_grid=(0.5, 1.0, 1.5, 2.0))
    res = sweep_eta(cfg, ["RJFS"])
    assert res.axis == [0.5, 1.0, 1.5, 2.0] and len(res.mean["RJFS"]) == 4
    eq = sweep_snr(cfg, ["RJFS"])
    assert res.mean["RJFS"][1] == eq.mean["RJFS"][0]
    assert res.mean["RJFS"][3] == 0.0
    with pytest.raises(ArgumentError):
        sweep_eta(cfg.with_(eta_grid=(0.5, 2.5)), ["RJFS"])


def test_sweep_buffer_shape_and_bound():
    res = sweep_buffer(CFG, (1, 2, 4, 10), ["BF-RJFS"])
    assert res.axis == [1, 2, 4, 10]
    assert len(res.mean["BF-RJFS"]) == 4 and len(res.bound["BF-RJFS"]) == 4
    assert all(b >= 0 for b in res.bound["BF-RJFS"])
    with pytest.raises(ArgumentError):
        sweep_buffer(CFG, (0,), ["BF-RJFS"])


def test_unit_buffer_close_to_memoryless():
    cfg = CFG.with_(slots=120, warmup=40, trials=8, buffer_len=1)
    bf = sweep_snr(cfg, ["BF-RJFS"]).mean["BF-RJFS"][0]
    ml = sweep_snr(cfg, ["RJFS"]).mean["RJFS"][0]
    assert abs(bf - ml) / ml < 0.10


def test_buffered_slots_with_silent_relays():
    # eta = 2 leaves no relay power; received vectors must still be formed
    state = new_state(CFG)
    for slot in range(4):
        rate, state = run_slot(CFG, state, "BF-RJFS", np.random.default_rng(slot), eta=2.0)
        assert rate == 0.0
