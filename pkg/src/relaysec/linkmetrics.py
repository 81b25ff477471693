"""SINR, achievable-rate, secrecy-rate and secrecy-capacity expressions."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelRealization, SystemConfig
from .errors import ArgumentError, DomainError
from .numerics import conj_transpose, det, inverse, log_det_herm
from .precoding import Precoder, SignalSet


@dataclass(frozen=True)
class LinkGammas:
    """Instantaneous received powers of the links seen by one relay,
    one eavesdropper and one user."""

    g_src_relay: float
    g_intf_relay: float
    g_jam_relay: float
    g_src_eave: float
    g_intf_eave: float
    g_jam_eave: float
    g_relay_user: float
    g_resid_user: float

    def scaled(self, p_src: float, p_relay: float) -> "LinkGammas":
        """Apply per-stream source power and per-antenna relay power."""
        src = {"g_src_relay", "g_intf_relay", "g_src_eave", "g_intf_eave"}
        vals = {f.name: getattr(self, f.name) * (p_src if f.name in src else p_relay)
                for f in fields(self)}
        return LinkGammas(**vals)


@dataclass(frozen=True)
class RatePair:
    rate_user: float
    rate_eave: float


def _norm(a: np.ndarray, squared: bool) -> float:
    s = float(np.sum(np.abs(a) ** 2))
    return s if squared else float(np.sqrt(s))


def _stack_h(blocks: list, rows: int) -> np.ndarray:
    if not blocks:
        return np.zeros((rows, 0), dtype=complex)
    return np.hstack(blocks)


def compute_gammas(chan: ChannelRealization, prec: Precoder, sig: SignalSet, i: int, e: int, r: int,
                   jam_set, block: int | None = None, serving: int | None = None,
                   squared: bool = True) -> LinkGammas:
    """Evaluate every γ term for relay ``i``, eavesdropper ``e`` and user ``r``.

    ``block`` is the precoder block feeding relay ``i`` (defaults to ``i``).
    ``serving`` is the transmitting relay whose signal is useful to user
    ``r``; it defaults to a member of ``jam_set`` (or ``i`` if that set is
    empty). Jammer ``k`` transmits ``sig.j_blocks`` in order of ``jam_set``.
    With ``squared`` false the literal unsquared norms are returned.
    """
    jam = [int(k) for k in jam_set]
    if i in jam:
        raise ArgumentError("relay i cannot be in its own jamming set")
    b = i if block is None else block
    h_i = chan.h_relays[i]
    h_e = chan.h_eaves[e]
    u = prec.u_blocks
    g_sr = _norm(h_i @ u[b], squared)
    g_sj = sum(_norm(h_i @ u[j], squared) for j in range(len(u)) if j != b)
    g_se = _norm(h_e @ u[b], squared)
    g_sje = sum(_norm(h_e @ u[j], squared) for j in range(len(u)) if j != b)

    def jvec(pos: int) -> np.ndarray:
        return sig.j_blocks[pos % len(sig.j_blocks)]

    if jam:
        j_all = np.vstack([jvec(p) for p in range(len(jam))])
        h_ki = _stack_h([chan.h_relay_relay[k, i] for k in jam], h_i.shape[0])
        h_ke = _stack_h([chan.h_relay_eave[k, e] for k in jam], h_e.shape[0])
        g_jr = _norm(h_ki @ j_all, squared)
        g_je = _norm(h_ke @ j_all, squared)
    else:
        g_jr = g_je = 0.0

    tx = jam if jam else [i]
    k = tx[r % len(tx)] if serving is None else serving
    if k not in tx:
        tx = tx + [k]
    j_tx = np.vstack([jvec(p) for p in range(len(tx))])
    h_kr_all = _stack_h([chan.h_relay_user[kk, r] for kk in tx], chan.h_relay_user.shape[2])
    pos = tx.index(k)
    y_k = chan.h_relay_user[k, r] @ jvec(pos)
    g_ru = _norm(y_k, squared)
    g_res = _norm(h_kr_all @ j_tx - y_k, squared)
    return LinkGammas(g_sr, g_sj, g_jr, g_se, g_sje, g_je, g_ru, g_res)


def sinr_relay(g: LinkGammas, phi: int, noise: float = 1.0) -> float:
    if noise <= 0:
        raise ArgumentError("noise must be positive")
    return g.g_src_relay / (phi * g.g_jam_relay + g.g_intf_relay + noise)


def sinr_eave(g: LinkGammas, noise: float = 1.0) -> float:
    if noise <= 0:
        raise ArgumentError("noise must be positive")
    return g.g_src_eave / (g.g_jam_eave + g.g_intf_eave + noise)


def sinr_user(g: LinkGammas, noise: float = 1.0) -> float:
    if noise <= 0:
        raise ArgumentError("noise must be positive")
    return g.g_relay_user / (g.g_resid_user + noise)


def ic_feasibility(h_i: np.ndarray, h_ki_stacked: np.ndarray, gamma0: float) -> int:
    """0 if the inter-relay interference can be cancelled, 1 otherwise.

    Cancellation is declared feasible when
    |det((h_i h_i^H + I)^-1 h_ki h_ki^H)| >= gamma0.
    """
    h_i = np.atleast_2d(np.asarray(h_i, dtype=complex))
    h_ki = np.atleast_2d(np.asarray(h_ki_stacked, dtype=complex))
    n = h_i.shape[0]
    a = h_i @ conj_transpose(h_i) + np.eye(n)
    m = inverse(a) @ (h_ki @ conj_transpose(h_ki))
    return 0 if abs(det(m)) >= gamma0 else 1


def trace_power(cov: np.ndarray | None) -> float:
    """Trace-normalized power of a stored-packet covariance (1 if absent)."""
    if cov is None:
        return 1.0
    cov = np.atleast_2d(np.asarray(cov, dtype=complex))
    return float(np.real(np.trace(cov))) / cov.shape[0]


def relay_powers(cfg: SystemConfig, eta: float | None = None, power: float | None = None):
    """Total source power eta*P and total relay power (2-eta)*P."""
    eta = cfg.eta if eta is None else eta
    p = cfg.power if power is None else power
    return eta * p, (2.0 - eta) * p


def rate_user_mimo(chan: ChannelRealization, cfg: SystemConfig, user: int, tx_set,
                   stored: np.ndarray | None = None, relay_power: float | None = None) -> float:
    """log2 det(I + Γ_r) for user ``user`` served by relays ``tx_set``.

    Γ_r = (P_R c / Σ n_k) H_Kr H_Kr^H where c is the trace-normalized power of
    the stored-packet covariance ``stored`` (1 when omitted) and P_R is the
    total relay power (``(2-eta)P`` by default).
    """
    tx = [int(k) for k in tx_set]
    if not tx:
        raise ArgumentError("at least one transmitting relay is required")
    p_r = relay_powers(cfg)[1] if relay_power is None else relay_power
    h = np.hstack([chan.h_relay_user[k, user] for k in tx])
    scale = p_r * trace_power(stored) / h.shape[1]
    gamma = scale * (h @ conj_transpose(h))
    return max(0.0, log_det_herm(np.eye(h.shape[0]) + gamma))


def rate_eave_mimo(chan: ChannelRealization, prec: Precoder, cfg: SystemConfig, e: int, jam_set,
                   stored: np.ndarray | None = None, source_power: float | None = None,
                   relay_power: float | None = None) -> float:
    """log2 det(I + Γ_e), Γ_e = (I + Δ)^-1 (P_S/N_t) H_e U U^H H_e^H.

    Δ = (P_R c / Σ n_k) H_Ke H_Ke^H is the jamming covariance from ``jam_set``
    at eavesdropper ``e``.
    """
    p_s, p_r = relay_powers(cfg)
    p_s = p_s if source_power is None else source_power
    p_r = p_r if relay_power is None else relay_power
    h_e = chan.h_eaves[e]
    n = h_e.shape[0]
    a = h_e @ prec.u_full
    sig = (p_s / cfg.n_t) * (a @ conj_transpose(a))
    jam = [int(k) for k in jam_set]
    delta = np.zeros((n, n), dtype=complex)
    if jam and p_r > 0:
        h_ke = np.hstack([chan.h_relay_eave[k, e] for k in jam])
        delta = (p_r * trace_power(stored) / h_ke.shape[1]) * (h_ke @ conj_transpose(h_ke))
    eye = np.eye(n)
    out = log_det_herm(eye + delta + sig) - log_det_herm(eye + delta)
    return max(0.0, out)


def secrecy_rate(pairs) -> float:
    """Sum of per-pair clamped differences [R_r - R_e]^+."""
    return float(sum(max(0.0, p.rate_user - p.rate_eave) for p in pairs))


def secrecy_capacity_siso(h_sr, h_rd, h_se, h_re, power: float) -> float:
    num = min(1 + power * abs(h_sr) ** 2, 1 + power * abs(h_rd) ** 2)
    den = 1 + power * abs(h_se) ** 2 + power * abs(h_re) ** 2
    return max(0.0, 0.5 * np.log2(num / den))


def secrecy_capacity_mimo(m_i: float, m_r: float, gamma_e_logdet: float) -> float:
    """½ (log2 min(M_i, M_r) - log2 det(I + Γ_e)), clamped at 0.

    ``gamma_e_logdet`` is the base-2 log-determinant of I + Γ_e.
    """
    if m_i <= 0 or m_r <= 0:
        raise DomainError("determinant terms must be positive")
    return max(0.0, 0.5 * (np.log2(min(m_i, m_r)) - gamma_e_logdet))


def buffer_gain_bound(m_best: float, m_prev: float) -> float:
    """Largest secrecy gain a buffer can add: ½ log2(M_best / M_prev), clamped."""
    slack = 1e-12
    if m_best < 1 - slack or m_prev < 1 - slack:
        raise DomainError("determinant terms of the form det(I + PSD) must be >= 1")
    return max(0.0, 0.5 * (np.log2(m_best) - np.log2(m_prev)))


def opportunistic_rates(base_secrecy: float, ic: bool, iri_matrix: np.ndarray | None = None,
                        signal_matrix: np.ndarray | None = None, eave_logdet: float = 0.0) -> float:
    """Secrecy rate of concurrent (opportunistic) relaying.

    With cancellation both hops share each slot, so the rate doubles.
    Without it the receiving relay sees the residual IRI covariance
    ``iri_matrix`` (Δ'); the result is
    log2 det(I + (I + Δ')^-1 S) - ``eave_logdet`` for the received signal
    covariance ``signal_matrix`` = S, clamped at 0.
    """
    if ic:
        return 2.0 * base_secrecy
    if iri_matrix is None:
        raise ArgumentError("iri_matrix is required when cancellation is off")
    delta = np.atleast_2d(np.asarray(iri_matrix, dtype=complex))
    n = delta.shape[0]
    s = np.eye(n) if signal_matrix is None else np.atleast_2d(np.asarray(signal_matrix, dtype=complex))
    eye = np.eye(n)
    val = log_det_herm(eye + delta + s) - log_det_herm(eye + delta)
    return max(0.0, val - eave_logdet)
