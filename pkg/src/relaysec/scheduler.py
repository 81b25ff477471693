"""Relaying/jamming function selection, relay buffers and link control."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .channel import ChannelRealization, SystemConfig
from .errors import (ArgumentError, BufferOverflowError, BufferUnderflowError,
                     DegenerateSlotError)
from .linkmetrics import relay_powers
from .numerics import conj_transpose
from .selection import esr_scores, stack_link1, stack_link2

LINK_I = "I"
LINK_II = "II"


@dataclass(frozen=True)
class Packet:
    """A packet held by a relay.

    ``rate_relay`` is the rate at which it was received, ``rate_eave`` the
    leakage to the paired eavesdropper at that time and ``user`` its
    destination. ``payload`` optionally keeps the received signal vector.
    """

    slot: int
    user: int = 0
    rate_relay: float = 0.0
    rate_eave: float = 0.0
    payload: np.ndarray | None = None


@dataclass
class BufferState:
    """One bounded FIFO queue per relay."""

    capacity: int
    queues: list = field(default_factory=list)

    @classmethod
    def empty(cls, n_relays: int, capacity: int) -> "BufferState":
        if capacity < 1:
            raise ArgumentError("buffer capacity must be at least 1")
        return cls(capacity, [deque() for _ in range(n_relays)])

    def occupancy(self) -> np.ndarray:
        return np.array([len(q) for q in self.queues], dtype=int)

    def has_room(self, relay: int) -> bool:
        return len(self.queues[relay]) < self.capacity


@dataclass
class LinkCounter:
    """Counts consecutive slots spent on the same link."""

    limit: int
    last_link: str | None = None
    consecutive_same_link: int = 0

    def record(self, link: str) -> None:
        if link == self.last_link:
            self.consecutive_same_link = min(self.consecutive_same_link + 1, self.limit)
        else:
            self.last_link = link
            self.consecutive_same_link = 1

    def starved_link(self) -> str | None:
        """The idle link that must be activated next, if the limit is hit."""
        if self.last_link is not None and self.consecutive_same_link >= self.limit:
            return LINK_II if self.last_link == LINK_I else LINK_I
        return None


@dataclass(frozen=True)
class SelectionOutcome:
    relaying_set: tuple
    jamming_set: tuple
    link: str
    eta_link_i: float
    eta_link_ii: float
    visited_sets: int


def buffer_push(buf: BufferState, relay: int, packet: Packet) -> BufferState:
    q = buf.queues[relay]
    if len(q) >= buf.capacity:
        raise BufferOverflowError(f"relay {relay} buffer is full")
    if q and packet.slot <= q[-1].slot:
        raise ArgumentError("packet slot indices must increase within a queue")
    q.append(packet)
    return buf


def buffer_pop(buf: BufferState, relay: int):
    q = buf.queues[relay]
    if not q:
        raise BufferUnderflowError(f"relay {relay} buffer is empty")
    return q.popleft(), buf


def enumerate_subsets(s_total: int, s: int) -> list[tuple]:
    if s > s_total or s < 0:
        raise ArgumentError(f"cannot choose {s} of {s_total}")
    return list(combinations(range(s_total), s))


def complexity_counts(s_total: int, s: int) -> tuple[int, int]:
    """Visited sets of the exhaustive and the greedy search."""
    if s > s_total or s < 0:
        raise ArgumentError(f"cannot choose {s} of {s_total}")
    return comb(s_total, s), s_total * s - s * (s - 1) // 2


def initial_state(chan: ChannelRealization, s: int) -> tuple:
    """Subset maximizing det(H_Ω H_Ω^H) over all sets of ``s`` relays."""
    subs = enumerate_subsets(chan.s_total, s)
    h = stack_link1(chan.h_relays, subs)
    b, d, nd, nt = h.shape
    hs = h.reshape(b, d * nd, nt)
    dets = np.real(np.linalg.det(hs @ conj_transpose(hs)))
    return subs[int(np.argmax(dets))]


def jammers_for(relaying, s_total: int, k: int) -> tuple:
    """Lowest-index relays outside the relaying set, up to ``k`` of them."""
    chosen = set(relaying)
    return tuple([i for i in range(s_total) if i not in chosen][:k])


def _powers(cfg: SystemConfig, eta: float | None, power: float | None):
    p_s, p_r = relay_powers(cfg, eta, power)
    return p_s / cfg.n_t, p_r / (cfg.s_select * cfg.n_k)


# -------------------------------------------------------------- search kernels

def _exhaustive(score_fn, candidates, s: int):
    subs = list(combinations(sorted(candidates), s))
    if not subs:
        return None, -np.inf, 0
    scores = score_fn(subs)
    k = int(np.argmax(scores))
    return subs[k], float(scores[k]), len(subs)


def _greedy(score_fn, candidates, s: int):
    """S rounds, each adding the candidate that maximizes the set score."""
    chosen: list[int] = []
    remaining = sorted(candidates)
    visited = 0
    best = -np.inf
    if len(remaining) < s:
        return None, -np.inf, 0
    for _ in range(s):
        trial = [tuple(sorted(chosen + [c])) for c in remaining]
        scores = score_fn(trial)
        visited += len(trial)
        k = int(np.argmax(scores))
        best = float(scores[k])
        chosen.append(remaining.pop(k))
    return tuple(sorted(chosen)), best, visited


def _link1_scorer(chan: ChannelRealization, p_src: float):
    def score(subs):
        return esr_scores(stack_link1(chan.h_relays, subs), p_src)
    return score


def _link2_scorer(chan: ChannelRealization, cfg: SystemConfig, p_relay: float):
    def score(subs):
        s = len(subs[0])
        users = min(cfg.m_users, (s * cfg.n_k) // cfg.n_r)
        if users < 1:
            return np.zeros(len(subs))
        return esr_scores(stack_link2(chan.h_relay_user, subs, users), p_relay)
    return score


def _masked(score_fn, banned: set):
    """Score -inf for any set that touches a banned relay."""
    if not banned:
        return score_fn

    def score(subs):
        out = np.asarray(score_fn(subs), dtype=float).copy()
        hit = np.array([bool(banned.intersection(sub)) for sub in subs])
        out[hit] = -np.inf
        return out
    return score


def _finite(x: float) -> float:
    return x if np.isfinite(x) else 0.0


# -------------------------------------------------------------- algorithms

def decide_link(eta_i: float, eta_ii: float, ok_i: bool, ok_ii: bool, ctr: LinkCounter) -> str:
    """Pick the active link and record it in ``ctr``.

    Link II wins when eta_ii > eta_i. An inadmissible link is never chosen,
    and when both are admissible the starvation counter may force a switch.
    """
    if not ok_i and not ok_ii:
        raise DegenerateSlotError("neither link is admissible")
    if not ok_ii:
        link = LINK_I
    elif not ok_i:
        link = LINK_II
    else:
        link = LINK_II if eta_ii > eta_i else LINK_I
        forced = ctr.starved_link()
        if forced is not None:
            link = forced
    ctr.record(link)
    return link


def rjfs_select(chan: ChannelRealization, cfg: SystemConfig, eta: float | None = None,
                power: float | None = None) -> SelectionOutcome:
    """Exhaustive E-SR search over all C(S_total, S) relaying sets."""
    p_src, _ = _powers(cfg, eta, power)
    best, score, visited = _exhaustive(_link1_scorer(chan, p_src), range(cfg.s_total), cfg.s_select)
    if best is None or not np.isfinite(score):
        raise DegenerateSlotError("no well-conditioned relaying set")
    jam = jammers_for(best, cfg.s_total, cfg.k_jammers)
    return SelectionOutcome(best, jam, LINK_I, score, 0.0, visited)


def greedy_rjfs_select(chan: ChannelRealization, cfg: SystemConfig, eta: float | None = None,
                       power: float | None = None) -> SelectionOutcome:
    """Greedy E-SR search: S rounds over the relays not yet chosen."""
    p_src, _ = _powers(cfg, eta, power)
    best, score, visited = _greedy(_link1_scorer(chan, p_src), range(cfg.s_total), cfg.s_select)
    if best is None or not np.isfinite(score):
        raise DegenerateSlotError("no well-conditioned relaying set")
    jam = jammers_for(best, cfg.s_total, cfg.k_jammers)
    return SelectionOutcome(best, jam, LINK_I, score, 0.0, visited)


def _buffer_aided(chan, cfg, buf, ctr, search, eta, power, scores):
    p_src, p_relay = _powers(cfg, eta, power)
    s = cfg.s_select
    occ = buf.occupancy()
    room = [i for i in range(cfg.s_total) if occ[i] < buf.capacity]
    loaded = [i for i in range(cfg.s_total) if occ[i] > 0]
    link1_ok = len(room) >= s
    link2_ok = len(loaded) >= s

    # full relays are masked rather than removed so the visited count stays fixed
    full = set(range(cfg.s_total)) - set(room)
    score1 = _masked(_link1_scorer(chan, p_src), full)
    set1, eta1, visited = search(score1, range(cfg.s_total), s)
    if not link1_ok or set1 is None or not np.isfinite(eta1):
        set1, eta1 = None, 0.0
    set2, eta2 = None, 0.0
    if link2_ok:
        set2, eta2, _ = search(_link2_scorer(chan, cfg, p_relay), loaded, s)
    eta1, eta2 = _finite(eta1), _finite(eta2)
    if scores is not None:
        eta1, eta2 = scores
    link = decide_link(eta1, eta2, set1 is not None, set2 is not None, ctr)
    if link == LINK_I:
        return SelectionOutcome(set1, jammers_for(set1, cfg.s_total, cfg.k_jammers), LINK_I,
                                eta1, eta2, visited)
    return SelectionOutcome(set2, (), LINK_II, eta1, eta2, visited)


def bf_rjfs_select(chan: ChannelRealization, cfg: SystemConfig, buf: BufferState, ctr: LinkCounter,
                   eta: float | None = None, power: float | None = None, scores=None) -> SelectionOutcome:
    """Buffer-aided selection with an exhaustive relaying search.

    eta_link_i is the best E-SR score over sets whose buffers all have room
    (0 if no such set exists); eta_link_ii is the best E-SR score of the
    relay->user hop over sets whose buffers all hold packets (0 if none).
    Link II is chosen when eta_link_ii > eta_link_i, unless a link is
    inadmissible or the starvation counter forces a switch. ``scores``
    overrides the two thresholds (for testing the comparison rule).
    """
    return _buffer_aided(chan, cfg, buf, ctr, _exhaustive, eta, power, scores)


def greedy_bf_rjfs_select(chan: ChannelRealization, cfg: SystemConfig, buf: BufferState, ctr: LinkCounter,
                          eta: float | None = None, power: float | None = None, scores=None) -> SelectionOutcome:
    """As ``bf_rjfs_select`` with both searches replaced by the greedy loop."""
    return _buffer_aided(chan, cfg, buf, ctr, _greedy, eta, power, scores)
