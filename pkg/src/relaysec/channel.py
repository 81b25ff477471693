"""Scenario configuration and per-slot random channel generation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError, DomainError, ShapeError
from .numerics import psd_sqrt


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters.

    Powers are linear and relative to unit noise variance per receive
    antenna. ``power`` is the per-node budget P; the source gets ``eta*P``
    and the transmitting relays share ``(2-eta)*P``.
    """

    n_t: int = 6
    n_r: int = 2
    n_e: int = 2
    n_i: int = 2
    n_k: int = 2
    m_users: int = 2
    n_eaves: int = 2
    s_total: int = 6
    s_select: int = 2
    k_jammers: int = 2
    buffer_len: int = 4
    power: float = 10.0
    eta: float = 1.0
    gamma0: float = 1.0
    eta_l_max: int = 5
    corr_r: complex = 0.5
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    eta_grid: tuple = (0.5, 1.0, 1.5, 2.0)
    buffer_grid: tuple = (1, 2, 4, 10)
    trials: int = 50
    seed: int = 1
    slots: int = 200
    warmup: int = 20

    def violations(self) -> list[str]:
        """Return the text of every violated invariant (empty if valid)."""
        out = []
        nrm = self.n_r * self.m_users
        for name in ("n_t", "n_r", "n_e", "n_i", "n_k", "m_users", "n_eaves",
                     "s_total", "s_select", "k_jammers", "eta_l_max", "trials", "slots"):
            if getattr(self, name) < 1:
                out.append(f"{name} >= 1")
        if self.n_t < nrm:
            out.append("N_t ≥ N_r·M")
        if self.n_i * self.s_select < nrm:
            out.append("N_i·S ≥ N_r·M")
        if self.n_k * self.k_jammers < nrm:
            out.append("N_k·K ≥ N_r·M")
        if self.n_e * self.n_eaves < nrm:
            out.append("N_e·N ≥ N_r·M")
        if self.s_select > self.s_total:
            out.append("S ≤ S_total")
        if self.n_i * self.s_select > self.n_t:
            out.append("N_i·S ≤ N_t")
        if self.n_k != self.n_i:
            out.append("N_k = N_i")
        if not 0.0 <= self.eta <= 2.0:
            out.append("0 ≤ η ≤ 2")
        if abs(self.corr_r) > 1.0:
            out.append("|r| ≤ 1")
        if self.buffer_len < 1:
            out.append("L ≥ 1")
        if self.power <= 0:
            out.append("P > 0")
        if self.gamma0 <= 0:
            out.append("γ0 > 0")
        if not 0 <= self.warmup < self.slots:
            out.append("0 ≤ warmup < slots")
        return out

    def validate(self) -> "SystemConfig":
        bad = self.violations()
        if bad:
            raise ConfigError("configuration violates: " + "; ".join(bad))
        return self

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class ChannelRealization:
    """Every channel matrix of one time slot.

    Arrays are indexed as follows:
        h_relays[i]            source -> relay i           (n_i x n_t)
        h_eaves[e]             source -> eavesdropper e    (n_e x n_t)
        h_relay_user[k, r]     relay k -> user r           (n_r x n_k)
        h_relay_eave[k, e]     relay k -> eavesdropper e   (n_e x n_k)
        h_relay_relay[k, i]    relay k -> relay i          (n_i x n_k), zero for k == i
    """

    h_relays: np.ndarray
    h_eaves: np.ndarray
    h_relay_user: np.ndarray
    h_relay_eave: np.ndarray
    h_relay_relay: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def s_total(self) -> int:
        return self.h_relays.shape[0]

    def relay_relay(self, k: int, i: int) -> np.ndarray:
        if k == i:
            raise KeyError("relay-to-self channel is undefined")
        return self.h_relay_relay[k, i]


def draw_gaussian_matrix(rows: int, cols: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """I.i.d. CN(0, 1) entries (real and imaginary parts each N(0, 1/2)).

    With ``count`` set, draws that many matrices in one call; the stream
    consumed is the same as ``count`` consecutive single draws.
    """
    shape = (rows, cols, 2) if count is None else (count, rows, cols, 2)
    z = rng.standard_normal(shape)
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def exponential_correlation(n: int, r: complex) -> np.ndarray:
    """Exponential correlation matrix with entries r^(j-i) above the diagonal."""
    if abs(r) > 1.0:
        raise DomainError(f"|r| must not exceed 1, got {abs(r)}")
    idx = np.arange(n)
    diff = idx[None, :] - idx[:, None]
    upper = np.power(complex(r), np.abs(diff).astype(float))
    out = np.where(diff >= 0, upper, np.conj(upper))
    np.fill_diagonal(out, 1.0)
    return out


def correlate(h: np.ndarray, r_t: np.ndarray) -> np.ndarray:
    """Apply transmit-side correlation: H R_t^(1/2)."""
    h = np.asarray(h, dtype=complex)
    r_t = np.asarray(r_t, dtype=complex)
    if h.shape[-1] != r_t.shape[0]:
        raise ShapeError(f"channel width {h.shape[-1]} does not match correlation size {r_t.shape[0]}")
    return h @ psd_sqrt(r_t)


def draw_realization(cfg: SystemConfig, correlated: bool, rng: np.random.Generator) -> ChannelRealization:
    """Draw one slot's channels in the documented fixed order.

    Order: source->relay (ascending), source->eavesdropper, relay->user,
    relay->eavesdropper and relay->relay, each keyed lexicographically.
    """
    st, n = cfg.s_total, cfg.n_eaves
    h_rel = draw_gaussian_matrix(cfg.n_i, cfg.n_t, rng, st)
    h_eav = draw_gaussian_matrix(cfg.n_e, cfg.n_t, rng, n)
    h_ru = draw_gaussian_matrix(cfg.n_r, cfg.n_k, rng, st * cfg.m_users).reshape(st, cfg.m_users, cfg.n_r, cfg.n_k)
    h_re = draw_gaussian_matrix(cfg.n_e, cfg.n_k, rng, st * n).reshape(st, n, cfg.n_e, cfg.n_k)
    pairs = st * (st - 1)
    h_rr = np.zeros((st, st, cfg.n_i, cfg.n_k), dtype=complex)
    if pairs:
        off = draw_gaussian_matrix(cfg.n_i, cfg.n_k, rng, pairs)
        mask = ~np.eye(st, dtype=bool)
        h_rr[mask] = off
    if correlated:
        src = psd_sqrt(exponential_correlation(cfg.n_t, cfg.corr_r))
        rel = psd_sqrt(exponential_correlation(cfg.n_k, cfg.corr_r))
        h_rel = h_rel @ src
        h_eav = h_eav @ src
        h_ru = h_ru @ rel
        h_re = h_re @ rel
        h_rr = h_rr @ rel
    return ChannelRealization(h_rel, h_eav, h_ru, h_re, h_rr)
