"""Monte Carlo driver: per-slot pipeline, trials and parameter sweeps.

Memoryless schemes run both hops of the half-duplex protocol inside one
slot (source to relays, then relays to users) and earn half of the summed
per-stream secrecy. Buffer-aided schemes activate a single hop per slot:
a Link-I slot stores packets and earns nothing, a Link-II slot delivers
stored packets and earns their secrecy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, SystemConfig, draw_realization
from .errors import ArgumentError, DegenerateSlotError, SingularityError
from .linkmetrics import (buffer_gain_bound, ic_feasibility, rate_eave_mimo, rate_user_mimo,
                          relay_powers)
from .numerics import conj_transpose, log_det_herm
from .precoding import draw_signals, zf_precoder
from .scheduler import (LINK_I, LINK_II, BufferState, LinkCounter, Packet, buffer_pop, buffer_push,
                        bf_rjfs_select, complexity_counts, enumerate_subsets, greedy_bf_rjfs_select,
                        greedy_rjfs_select, initial_state, jammers_for, rjfs_select)
from .selection import _ranked, link_gains, max_link_select, max_ratio_select, os_scores, sr_scores, stack_link1

BASE_ALGORITHMS = ("MaxMin", "MaxLink", "MaxRatio", "OS", "SR", "ESR",
                   "RJFS", "BF-RJFS", "Greedy-RJFS", "Greedy-BF-RJFS")
BUFFERED = {"MaxLink", "MaxRatio", "BF-RJFS", "Greedy-BF-RJFS"}
RJFS_FAMILY = {"RJFS", "BF-RJFS", "Greedy-RJFS", "Greedy-BF-RJFS"}
MAX_REDRAWS = 10


@dataclass(frozen=True)
class AlgoSpec:
    """A parsed algorithm id such as ``BF-RJFS`` or ``RJFS:noic:corr``."""

    label: str
    name: str
    ic: bool = True
    correlated: bool = False
    jamming: bool = True

    @property
    def buffered(self) -> bool:
        return self.name in BUFFERED


def parse_algo(text: str) -> AlgoSpec:
    parts = [p.strip() for p in str(text).strip().split(":")]
    name = parts[0]
    if name not in BASE_ALGORITHMS:
        raise ArgumentError(f"unknown algorithm {name!r}; expected one of {', '.join(BASE_ALGORITHMS)}")
    if name == "ESR":
        name = "RJFS"
    ic, corr, jam = True, False, name != "OS"
    for mod in parts[1:]:
        if mod == "noic":
            ic = False
        elif mod == "ic":
            ic = True
        elif mod == "corr":
            corr = True
        elif mod == "nojam":
            jam = False
        elif mod == "jam":
            jam = True
        else:
            raise ArgumentError(f"unknown modifier {mod!r} in {text!r}")
    return AlgoSpec(str(text).strip(), name, ic, corr, jam)


def _spec(algo) -> AlgoSpec:
    return algo if isinstance(algo, AlgoSpec) else parse_algo(algo)


@dataclass
class SlotState:
    """Everything a trial carries from one slot to the next."""

    buf: BufferState
    ctr: LinkCounter
    slot: int = 0
    prev_realized: float | None = None


@dataclass
class TrialRecord:
    slot_secrecy: list = field(default_factory=list)
    link_history: list = field(default_factory=list)
    visited_sets_total: int = 0
    ic_events: int = 0
    visited_per_slot: list = field(default_factory=list)
    bound: list = field(default_factory=list)

    def mean(self, warmup: int = 0) -> float:
        vals = self.slot_secrecy[warmup:]
        return float(np.mean(vals)) if vals else 0.0


@dataclass
class SweepResult:
    axis_name: str
    axis: list
    mean: dict
    std_error: dict
    complexity: dict
    bound: dict = field(default_factory=dict)
    per_trial: dict = field(default_factory=dict)


def new_state(cfg: SystemConfig) -> SlotState:
    return SlotState(BufferState.empty(cfg.s_total, cfg.buffer_len), LinkCounter(cfg.eta_l_max))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, split from (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def snr_to_power(snr_db: float) -> float:
    return float(10.0 ** (snr_db / 10.0))


# ------------------------------------------------------------------ hops

@dataclass(frozen=True)
class StreamResult:
    relay: int
    user: int
    rate_relay: float
    rate_eave: float
    received: np.ndarray | None = None


def link_one(chan: ChannelRealization, cfg: SystemConfig, relaying, jam, p_src: float, p_relay: float,
             ic: bool, sig=None):
    """Source to relays via ZF with the jammers active.

    Returns one StreamResult per relay plus the number of relays whose
    inter-relay interference was cancelled. With ``sig`` given, each result
    also carries the noiseless received vector (IRI removed when cancelled).
    """
    relaying = [int(i) for i in relaying]
    jam = [int(k) for k in jam]
    h = np.vstack([chan.h_relays[i] for i in relaying])
    prec = zf_precoder(h, cfg.n_i)
    p_s = p_src / cfg.n_t
    p_j = p_relay / (len(jam) * cfg.n_k) if jam else 0.0
    eye = np.eye(cfg.n_i)
    eave = [rate_eave_mimo(chan, prec, cfg, e, jam, source_power=p_src, relay_power=p_relay)
            for e in range(cfg.n_eaves)]
    x = j_all = None
    if sig is not None:
        x = np.vstack([sig.s_blocks[b % len(sig.s_blocks)] for b in range(len(relaying))])
        if jam:
            j_all = np.vstack([sig.j_blocks[p % len(sig.j_blocks)] for p in range(len(jam))])
    out, cancelled = [], 0
    for b, i in enumerate(relaying):
        phi, h_ki = 1, None
        a = chan.h_relays[i] @ prec.u_full
        ab = a[:, b * cfg.n_i:(b + 1) * cfg.n_i]
        cov = p_s * (ab @ conj_transpose(ab))
        noise = eye + p_s * (a @ conj_transpose(a)) - cov
        if jam and p_j > 0:
            h_ki = np.hstack([chan.h_relay_relay[k, i] for k in jam])
            phi = ic_feasibility(np.sqrt(p_s) * a, np.sqrt(p_j) * h_ki, cfg.gamma0) if ic else 1
            if phi == 0:
                cancelled += 1
            noise = noise + phi * p_j * (h_ki @ conj_transpose(h_ki))
        r_relay = max(0.0, log_det_herm(noise + cov) - log_det_herm(noise))
        y = None
        if x is not None:
            y = np.sqrt(p_s) * (a @ x)
            if j_all is not None and h_ki is not None and phi:
                y = y + np.sqrt(p_j) * (h_ki @ j_all)
        u = b % cfg.m_users
        r_e = eave[u] if u < cfg.n_eaves else 0.0
        out.append(StreamResult(i, u, r_relay, r_e, y))
    return out, cancelled


def hop_rates(chan: ChannelRealization, cfg: SystemConfig, tx_set, p_relay: float) -> list:
    """Relay-to-user rate for every user, served by ``tx_set``."""
    return [rate_user_mimo(chan, cfg, r, tx_set, relay_power=p_relay) for r in range(cfg.m_users)]


# ------------------------------------------------------------------ selection

def _memoryless_set(spec: AlgoSpec, chan, cfg, sig, p_src, p_relay, first: bool):
    s = cfg.s_select
    if first and spec.name in RJFS_FAMILY:
        return initial_state(chan, s), complexity_counts(cfg.s_total, s)[0], False
    if spec.name == "RJFS":
        out = rjfs_select(chan, cfg, power=p_src, eta=1.0)
        return out.relaying_set, out.visited_sets, True
    if spec.name == "Greedy-RJFS":
        out = greedy_rjfs_select(chan, cfg, power=p_src, eta=1.0)
        return out.relaying_set, out.visited_sets, True
    if spec.name == "SR":
        subs = enumerate_subsets(cfg.s_total, s)
        scores = sr_scores(stack_link1(chan.h_relays, subs), chan.h_eaves, p_src / cfg.n_t)
        if not np.isfinite(scores).any():
            raise DegenerateSlotError("no well-conditioned relaying set")
        return subs[int(np.argmax(scores))], len(subs), True
    if spec.name == "OS":
        scores = os_scores(chan, cfg, sig, source_power=p_src, relay_power=p_relay)
        return tuple(sorted(_ranked(scores, range(cfg.s_total), s))), cfg.s_total, True
    if spec.name == "MaxMin":
        g = link_gains(chan)
        score = np.minimum(g.src_relay, g.relay_dst)
        return tuple(sorted(_ranked(score, range(cfg.s_total), s))), cfg.s_total, True
    raise ArgumentError(f"{spec.name} is not a memoryless scheme")


def _gain_link_choice(spec: AlgoSpec, chan, cfg, buf: BufferState):
    """Link and relay set for the gain-based buffer-aided baselines."""
    s = cfg.s_select
    occ = buf.occupancy()
    room = [i for i in range(cfg.s_total) if occ[i] < buf.capacity]
    loaded = [i for i in range(cfg.s_total) if occ[i] > 0]
    ok1, ok2 = len(room) >= s, len(loaded) >= s
    if not ok1 and not ok2:
        raise DegenerateSlotError("neither link is admissible")
    g = link_gains(chan)
    ninf = np.full(cfg.s_total, -np.inf)
    g = g._replace(src_relay=g.src_relay if ok1 else ninf, relay_dst=g.relay_dst if ok2 else ninf)
    if spec.name == "MaxLink":
        link = max_link_select(g, occ, buf.capacity).link
        metric1, metric2 = g.src_relay, g.relay_dst
    else:
        link = max_ratio_select(g, occ, buf.capacity).link
        metric1 = g.src_relay / max(g.src_eave, 1e-12)
        metric2 = g.relay_dst / np.maximum(g.relay_eave, 1e-12)
    if link == LINK_I:
        return LINK_I, tuple(sorted(_ranked(metric1, room, s)))
    return LINK_II, tuple(sorted(_ranked(metric2, loaded, s)))


# ------------------------------------------------------------------ slots

def _draw(cfg: SystemConfig, spec: AlgoSpec, rng: np.random.Generator):
    chan = draw_realization(cfg, spec.correlated, rng)
    sig = draw_signals(cfg, rng)
    return chan, sig


@dataclass(frozen=True)
class SlotOutcome:
    rate: float
    link: str
    visited: int
    cancelled: int
    ideal: float               # log2 M_best: interference- and leakage-free streams
    realized: float | None     # log2 of the secrecy det of this slot's Link-I streams


def _ideal(cfg: SystemConfig, hops, p_src: float) -> float:
    per_stream = cfg.n_i * np.log2(1.0 + p_src / cfg.n_t)
    return float(sum(min(per_stream, hops[b % cfg.m_users]) for b in range(cfg.s_select)))


def _realized(streams, hops) -> float:
    return float(sum(max(0.0, min(st.rate_relay, hops[st.user]) - st.rate_eave) for st in streams))


def _slot_body(cfg, spec, state: SlotState, chan, sig, p_src, p_relay) -> SlotOutcome:
    s_total = cfg.s_total
    first = state.slot == 0
    jam_k = cfg.k_jammers if spec.jamming else 0

    if not spec.buffered:
        relaying, visited, jam_on = _memoryless_set(spec, chan, cfg, sig, p_src, p_relay, first)
        jam = jammers_for(relaying, s_total, jam_k) if jam_on else ()
        streams, cancelled = link_one(chan, cfg, relaying, jam, p_src, p_relay, spec.ic)
        hops = hop_rates(chan, cfg, relaying, p_relay)
        realized = _realized(streams, hops)
        return SlotOutcome(0.5 * realized, LINK_I, visited, cancelled, _ideal(cfg, hops, p_src), realized)

    if first and spec.name in RJFS_FAMILY:
        relaying = initial_state(chan, cfg.s_select)
        link, visited, jam = LINK_I, complexity_counts(s_total, cfg.s_select)[0], ()
        state.ctr.record(LINK_I)
    elif spec.name in ("BF-RJFS", "Greedy-BF-RJFS"):
        fn = bf_rjfs_select if spec.name == "BF-RJFS" else greedy_bf_rjfs_select
        eta = p_src / cfg.power
        out = fn(chan, cfg, state.buf, state.ctr, eta=eta, power=cfg.power)
        relaying, link, visited = out.relaying_set, out.link, out.visited_sets
        jam = tuple(out.jamming_set[:jam_k])
    else:
        link, relaying = _gain_link_choice(spec, chan, cfg, state.buf)
        visited = s_total
        jam = jammers_for(relaying, s_total, jam_k) if link == LINK_I else ()

    hops = hop_rates(chan, cfg, relaying, p_relay)
    if link == LINK_I:
        streams, cancelled = link_one(chan, cfg, relaying, jam, p_src, p_relay, spec.ic, sig)
        for st in streams:
            pkt = Packet(state.slot, st.user, st.rate_relay, st.rate_eave, st.received)
            buffer_push(state.buf, st.relay, pkt)
        return SlotOutcome(0.0, LINK_I, visited, cancelled, _ideal(cfg, hops, p_src), _realized(streams, hops))

    rate = 0.0
    for k in relaying:
        pkt, _ = buffer_pop(state.buf, k)
        rate += max(0.0, min(pkt.rate_relay, hops[pkt.user]) - pkt.rate_eave)
    return SlotOutcome(rate, LINK_II, visited, 0, _ideal(cfg, hops, p_src), None)


def run_slot(cfg: SystemConfig, state: SlotState, algo, rng: np.random.Generator,
             eta: float | None = None, power: float | None = None, record: TrialRecord | None = None,
             draw=None):
    """Simulate one slot and return ``(secrecy rate, state)``.

    A singular draw is redrawn up to ten times; after that, or when no link
    is admissible, the slot counts as a zero-rate degenerate slot.

    With ``record`` given, the slot is appended to it, including the
    buffer-gain ceiling ½ log2(M_best / M_prev): M_best is this slot's
    interference- and leakage-free reception det, M_prev the secrecy det
    realized by the latest Link-I slot before it.

    ``draw(cfg, spec, rng) -> (chan, sig)`` replaces the channel generator.
    """
    spec = _spec(algo)
    p_src, p_relay = relay_powers(cfg, eta, power)
    draw = _draw if draw is None else draw
    out = None
    for _ in range(MAX_REDRAWS + 1):
        chan, sig = draw(cfg, spec, rng)
        try:
            out = _slot_body(cfg, spec, state, chan, sig, p_src, p_relay)
            break
        except SingularityError:
            continue
        except DegenerateSlotError:
            break
    if out is None:
        out = SlotOutcome(0.0, LINK_I, 0, 0, 0.0, None)
    if record is not None:
        record.slot_secrecy.append(float(out.rate))
        record.link_history.append(out.link)
        record.visited_sets_total += int(out.visited)
        record.visited_per_slot.append(int(out.visited))
        record.ic_events += int(out.cancelled)
        if state.prev_realized is not None:
            record.bound.append(buffer_gain_bound(2.0 ** out.ideal, 2.0 ** state.prev_realized))
    if out.realized is not None:
        state.prev_realized = out.realized
    state.slot += 1
    return float(out.rate), state


def run_trial(cfg: SystemConfig, algo, slots: int, rng: np.random.Generator,
              eta: float | None = None, power: float | None = None) -> TrialRecord:
    if slots < 1:
        raise ArgumentError("a trial needs at least one slot")
    spec = _spec(algo)
    state = new_state(cfg)
    rec = TrialRecord()
    for _ in range(slots):
        run_slot(cfg, state, spec, rng, eta=eta, power=power, record=rec)
    return rec


# ------------------------------------------------------------------ sweeps

def _stats(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()) if v.size else 0.0, 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def _steady_visited(rec: TrialRecord) -> int:
    """Visited sets per selection, ignoring the start-up slot."""
    vals = rec.visited_per_slot[1:] or rec.visited_per_slot
    vals = [v for v in vals if v > 0]
    return int(vals[-1]) if vals else 0


def _sweep(cfg: SystemConfig, algos, axis_name: str, axis, point_fn, seed: int | None,
           trials: int | None) -> SweepResult:
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    trials = cfg.trials if trials is None else trials
    specs = [_spec(a) for a in algos]
    res = SweepResult(axis_name, list(axis), {}, {}, {}, {}, {})
    for spec in specs:
        means, ses, bounds, per = [], [], [], []
        visited = 0
        for x in axis:
            pcfg, kw = point_fn(x)
            vals, bvals = [], []
            for t in range(trials):
                rec = run_trial(pcfg, spec, pcfg.slots, trial_rng(seed, t), **kw)
                vals.append(rec.mean(pcfg.warmup))
                bvals.append(float(np.mean(rec.bound[pcfg.warmup:])) if rec.bound[pcfg.warmup:] else 0.0)
                visited = _steady_visited(rec)
            m, se = _stats(vals)
            means.append(m)
            ses.append(se)
            bounds.append(float(np.mean(bvals)))
            per.append(vals)
        res.mean[spec.label] = means
        res.std_error[spec.label] = ses
        res.complexity[spec.label] = visited
        res.bound[spec.label] = bounds
        res.per_trial[spec.label] = per
    return res


def sweep_snr(cfg: SystemConfig, algos, seed: int | None = None, trials: int | None = None) -> SweepResult:
    """Average secrecy over trials at every SNR point (P = 10^(SNR/10))."""
    return _sweep(cfg, algos, "snr_db", cfg.snr_grid_db,
                  lambda x: (cfg.with_(power=snr_to_power(x)), {}), seed, trials)


def sweep_eta(cfg: SystemConfig, algos, seed: int | None = None, trials: int | None = None) -> SweepResult:
    """Average secrecy over the power-split grid: source ηP, relays (2-η)P."""
    for e in cfg.eta_grid:
        if not 0.0 <= e <= 2.0:
            raise ArgumentError(f"eta {e} outside [0, 2]")
    return _sweep(cfg, algos, "eta", cfg.eta_grid,
                  lambda x: (cfg.with_(eta=float(x)), {}), seed, trials)


def sweep_buffer(cfg: SystemConfig, l_grid=None, algos=("BF-RJFS",), seed: int | None = None,
                 trials: int | None = None) -> SweepResult:
    """Average secrecy at each buffer size; ``bound`` holds the buffer-gain ceiling."""
    grid = cfg.buffer_grid if l_grid is None else tuple(l_grid)
    for l in grid:
        if int(l) < 1:
            raise ArgumentError(f"buffer size {l} must be at least 1")
    return _sweep(cfg, algos, "buffer_len", grid,
                  lambda x: (cfg.with_(buffer_len=int(x)), {}), seed, trials)
