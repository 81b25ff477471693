"""Relay selection criteria.

Per-relay criteria (max-min, max-link, max-ratio, OS) work on channel
gains. Subset criteria (SR and E-SR) score a set of receivers fed by a
zero-forcing precoder. The batched scorers evaluate many candidate sets
at once and are what the scheduler uses in its search loops.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization, SystemConfig
from .errors import ArgumentError, StarvationError
from .linkmetrics import compute_gammas, relay_powers, sinr_eave, sinr_user
from .numerics import conj_transpose, log_det_herm
from .precoding import zf_batch, zf_precoder

RATIO_FLOOR = 1e-12
SR_RIDGE = 1e-10


class LinkGains(NamedTuple):
    """Per-relay channel energies used by the gain-based criteria."""

    src_relay: np.ndarray   # ||H_i||_F^2
    relay_dst: np.ndarray   # sum over users of ||H_ir||_F^2
    src_eave: float         # sum over eavesdroppers of ||H_e||_F^2
    relay_eave: np.ndarray  # sum over eavesdroppers of ||H_ie||_F^2


class Choice(NamedTuple):
    relay: int
    link: str
    floored: bool = False


def link_gains(chan: ChannelRealization) -> LinkGains:
    e2 = lambda a, axes: np.sum(np.abs(a) ** 2, axis=axes)  # noqa: E731
    return LinkGains(
        e2(chan.h_relays, (1, 2)),
        e2(chan.h_relay_user, (1, 2, 3)),
        float(e2(chan.h_eaves, None)),
        e2(chan.h_relay_eave, (1, 2, 3)),
    )


def _first_argmax(values) -> int:
    return int(np.argmax(np.asarray(values, dtype=float)))


def _ranked(values, candidates, count: int) -> list[int]:
    """Top ``count`` candidates by value, ties to the lower index."""
    cand = sorted(candidates)
    order = sorted(cand, key=lambda i: (-values[i], i))
    return order[:count]


def max_min_select(gains: LinkGains, occupancy=None) -> int:
    """Relay maximizing min(source->relay gain, relay->destination gain)."""
    src = np.asarray(gains.src_relay, dtype=float)
    dst = np.asarray(gains.relay_dst, dtype=float)
    if src.size == 0:
        raise ArgumentError("no relays to select from")
    return _first_argmax(np.minimum(src, dst))


def _admissible(occupancy, capacity: int):
    occ = np.asarray(occupancy)
    return np.flatnonzero(occ < capacity), np.flatnonzero(occ > 0)


def max_link_select(gains: LinkGains, occupancy, capacity: int) -> Choice:
    """Strongest admissible hop over all relays.

    A source->relay hop needs room in the relay buffer; a relay->destination
    hop needs a stored packet. Ties go to Link I, then to the lower index.
    """
    rx, tx = _admissible(occupancy, capacity)
    if rx.size == 0 and tx.size == 0:
        raise StarvationError("no admissible link")
    best = None
    for link, idx, vals in (("I", rx, gains.src_relay), ("II", tx, gains.relay_dst)):
        for i in idx:
            v = float(vals[i])
            if best is None or v > best[0]:
                best = (v, int(i), link)
    return Choice(best[1], best[2])


def max_ratio_select(gains: LinkGains, occupancy, capacity: int) -> Choice:
    """Compare eta1 (best source->relay over source->eavesdropper ratio)
    with eta2 (best relay->destination over relay->eavesdropper ratio).

    Denominators are floored at 1e-12; ``floored`` reports when that
    happened. Ties go to Link I.
    """
    rx, tx = _admissible(occupancy, capacity)
    if rx.size == 0 and tx.size == 0:
        raise StarvationError("no admissible link")
    floored = False
    den1 = gains.src_eave
    if den1 < RATIO_FLOOR:
        den1, floored = RATIO_FLOOR, True
    eta1, r1 = -np.inf, -1
    for i in rx:
        v = gains.src_relay[i] / den1
        if v > eta1:
            eta1, r1 = v, int(i)
    eta2, r2 = -np.inf, -1
    for i in tx:
        den = gains.relay_eave[i]
        if den < RATIO_FLOOR:
            den, floored = RATIO_FLOOR, True
        v = gains.relay_dst[i] / den
        if v > eta2:
            eta2, r2 = v, int(i)
    if eta1 >= eta2:
        return Choice(r1, "I", floored)
    return Choice(r2, "II", floored)


def os_scores(chan: ChannelRealization, cfg: SystemConfig, sig, source_power: float | None = None,
              relay_power: float | None = None) -> np.ndarray:
    """Per-relay OS score, sum over user/eavesdropper pairs of
    [log2(1 + Γ_r) - log2(1 + Γ_e)]^+ with no jamming in Γ_e.

    Each relay is scored on its own: the source zero-forces towards that
    relay only, and the relay alone forwards to the users.
    """
    p_s, p_r = relay_powers(cfg)
    p_s = p_s if source_power is None else source_power
    p_r = p_r if relay_power is None else relay_power
    pairs = min(cfg.m_users, cfg.n_eaves)
    out = np.zeros(cfg.s_total)
    for i in range(cfg.s_total):
        try:
            prec = zf_precoder(chan.h_relays[i], cfg.n_i)
        except ArithmeticError:
            continue
        total = 0.0
        for r in range(pairs):
            g = compute_gammas(chan, prec, sig, i, r, r, [], block=0, serving=i)
            g = g.scaled(p_s / cfg.n_t, p_r / cfg.n_k)
            total += max(0.0, np.log2(1 + sinr_user(g)) - np.log2(1 + sinr_eave(g)))
        out[i] = total
    return out


def os_select(chan: ChannelRealization, cfg: SystemConfig, sig, **kw) -> int:
    return _first_argmax(os_scores(chan, cfg, sig, **kw))


# ---------------------------------------------------------------- subset scores

def stack_link1(h_relays: np.ndarray, subsets) -> np.ndarray:
    """Receiver channels of each candidate set, shape (B, S, n_i, n_t)."""
    idx = np.asarray(subsets, dtype=int)
    return h_relays[idx]


def stack_link2(h_relay_user: np.ndarray, subsets, users: int | None = None) -> np.ndarray:
    """Relay->user channels of each candidate transmit set.

    Returns shape (B, M, n_r, |set| n_k): one block per user, columns
    ordered by relay within the set.
    """
    idx = np.asarray(subsets, dtype=int)
    m = h_relay_user.shape[1] if users is None else users
    sub = h_relay_user[idx][:, :, :m]          # (B, s, M, n_r, n_k)
    sub = np.transpose(sub, (0, 2, 3, 1, 4))   # (B, M, n_r, s, n_k)
    b, m, nr, s, nk = sub.shape
    return sub.reshape(b, m, nr, s * nk)


def _logdet_ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """log2 det(I + a^-1 b) = log2 det(a + b) - log2 det(a) for Hermitian a > 0, b >= 0."""
    return log_det_herm(a + b) - log_det_herm(a)


def _receiver_terms(h: np.ndarray, u: np.ndarray, power: float):
    """Shared pieces for SR/E-SR: per-block R_I, R_d and the receiver term."""
    bsz, d, nd, nt = h.shape
    uu = u @ conj_transpose(u)
    eye = np.eye(nt)
    out = []
    for k in range(d):
        ud = u[:, :, k * nd:(k + 1) * nd]
        r_d = power * (ud @ conj_transpose(ud))
        r_i = eye + power * uu - r_d
        hd = h[:, k]
        a = hd @ r_i @ conj_transpose(hd)
        bm = hd @ r_d @ conj_transpose(hd)
        out.append((ud, r_d, r_i, _logdet_ratio(a, bm)))
    return out


def esr_scores(h: np.ndarray, power: float) -> np.ndarray:
    """Batched E-SR score of candidate sets, no eavesdropper CSI involved.

    ``h`` has shape (B, D, n_d, n_t): D receiver blocks per candidate.
    Score = sum over blocks of
        log2 det[I + (H_d R_I H_d^H)^-1 H_d R_d H_d^H] - log2 det[I + p U_d^H R_I^-1 U_d]
    with R_d = p U_d U_d^H and R_I = I + p sum_{j != d} U_j U_j^H.
    Candidates whose ZF precoder is ill-conditioned score -inf.
    """
    h = np.asarray(h, dtype=complex)
    bsz, d, nd, nt = h.shape
    u, ok = zf_batch(h.reshape(bsz, d * nd, nt))
    score = np.zeros(bsz)
    if not ok.any():
        return np.full(bsz, -np.inf)
    hv, uv = h[ok], u[ok]
    acc = np.zeros(hv.shape[0])
    for ud, _, r_i, t1 in _receiver_terms(hv, uv, power):
        g = power * (conj_transpose(ud) @ np.linalg.solve(r_i, ud))
        t2 = log_det_herm(np.eye(nd) + g)
        acc += t1 - t2
    score[ok] = acc
    score[~ok] = -np.inf
    return score


def sr_scores(h: np.ndarray, h_eaves: np.ndarray, power: float) -> np.ndarray:
    """Batched SR score using eavesdropper CSI.

    Block d is paired with eavesdropper d mod N. Eavesdropper channels
    narrower than the transmit array are zero-padded to square and a
    1e-10 ridge is added to H_e R_I H_e^H before inversion.
    """
    h = np.asarray(h, dtype=complex)
    bsz, d, nd, nt = h.shape
    u, ok = zf_batch(h.reshape(bsz, d * nd, nt))
    score = np.full(bsz, -np.inf)
    if not ok.any():
        return score
    hv, uv = h[ok], u[ok]
    acc = np.zeros(hv.shape[0])
    n_e = h_eaves.shape[1]
    for k, (ud, r_d, r_i, t1) in enumerate(_receiver_terms(hv, uv, power)):
        he = h_eaves[k % h_eaves.shape[0]]
        ridge = 0.0
        if n_e != nt:
            pad = np.zeros((max(nt, n_e), nt), dtype=complex)
            pad[:n_e] = he
            he = pad
            ridge = SR_RIDGE
        lam = he @ r_i @ conj_transpose(he) + ridge * np.eye(he.shape[0])
        num = he @ r_d @ conj_transpose(he)
        acc += t1 - _logdet_ratio(lam, num)
    score[ok] = acc
    return score


def _source_power(cfg: SystemConfig, power: float | None) -> float:
    """Per-stream source power P_S / N_t."""
    return (relay_powers(cfg)[0] if power is None else power) / cfg.n_t


def sr_subset_score(subset, chan: ChannelRealization, cfg: SystemConfig, power: float | None = None) -> float:
    """SR score of one relay set (needs eavesdropper channels)."""
    h = stack_link1(chan.h_relays, [tuple(subset)])
    return float(sr_scores(h, chan.h_eaves, _source_power(cfg, power))[0])


def esr_subset_score(subset, h_relays: np.ndarray, cfg: SystemConfig, power: float | None = None) -> float:
    """E-SR score of one relay set.

    Only the source->relay channels are taken, so no eavesdropper CSI can
    enter the computation.
    """
    h = stack_link1(np.asarray(h_relays), [tuple(subset)])
    return float(esr_scores(h, _source_power(cfg, power))[0])
