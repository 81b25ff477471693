"""Zero-forcing precoding and signal bookkeeping at the transmitter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SystemConfig, draw_gaussian_matrix
from .errors import ArgumentError
from .numerics import COND_LIMIT, condition_number, conj_transpose, inverse


@dataclass
class Precoder:
    u_full: np.ndarray
    u_blocks: list

    @property
    def n_blocks(self) -> int:
        return len(self.u_blocks)


@dataclass
class SignalSet:
    s_blocks: list
    j_blocks: list


def _block_sizes(rows: int, block_rows) -> list[int]:
    if block_rows is None:
        return [rows]
    if np.isscalar(block_rows):
        b = int(block_rows)
        if b < 1 or rows % b:
            raise ArgumentError(f"{rows} rows cannot be split into blocks of {b}")
        return [b] * (rows // b)
    sizes = [int(b) for b in block_rows]
    if sum(sizes) != rows:
        raise ArgumentError(f"block sizes {sizes} do not add up to {rows}")
    return sizes


def zf_precoder(h_stacked: np.ndarray, block_rows=None) -> Precoder:
    """U = H^H (H H^H)^-1, sliced column-wise into per-destination blocks.

    Parameters:
        h_stacked: stacked channel of all destinations, one block of rows
            per destination.
        block_rows: rows per destination (int for equal blocks, or a list).
            Defaults to a single block.

    Raises:
        SingularityError: if H H^H is singular or ill-conditioned.
    """
    h = np.asarray(h_stacked, dtype=complex)
    gram = h @ conj_transpose(h)
    u = conj_transpose(h) @ inverse(gram)
    sizes = _block_sizes(h.shape[0], block_rows)
    edges = np.cumsum([0] + sizes)
    blocks = [u[:, edges[k]:edges[k + 1]] for k in range(len(sizes))]
    return Precoder(u, blocks)


def zf_batch(h_stack: np.ndarray):
    """Batched ZF for a stack of channels ``(B, m, n)``.

    Returns ``(u, ok)`` where ``ok`` flags the well-conditioned entries.
    Entries that fail the condition guard hold zeros.
    """
    h = np.asarray(h_stack, dtype=complex)
    gram = h @ conj_transpose(h)
    cond = np.atleast_1d(condition_number(gram))
    ok = np.isfinite(cond) & (cond < COND_LIMIT)
    safe = np.where(ok[:, None, None], gram, np.eye(gram.shape[-1]))
    u = conj_transpose(h) @ np.linalg.inv(safe)
    u[~ok] = 0.0
    return u, ok


def signal_covariances(prec: Precoder, active_index: int, power: float = 1.0):
    """Desired and interference-plus-noise covariances at the transmitter.

    r_d = p U_i U_i^H and r_i = I + p * sum_{j != i} U_j U_j^H, with
    p = ``power`` per stream (1 by default).
    """
    if not 0 <= active_index < prec.n_blocks:
        raise ArgumentError(f"active_index {active_index} out of range")
    n = prec.u_full.shape[0]
    ui = prec.u_blocks[active_index]
    r_d = power * (ui @ conj_transpose(ui))
    r_i = np.eye(n, dtype=complex)
    for j, uj in enumerate(prec.u_blocks):
        if j != active_index:
            r_i = r_i + power * (uj @ conj_transpose(uj))
    return r_d, r_i


def draw_signals(cfg: SystemConfig, rng: np.random.Generator) -> SignalSet:
    """Unit-power CN(0, 1) symbol blocks for each user and each jammer."""
    s = draw_gaussian_matrix(cfg.n_i, 1, rng, cfg.m_users)
    j = draw_gaussian_matrix(cfg.n_k, 1, rng, cfg.k_jammers)
    return SignalSet([b for b in s], [b for b in j])
