"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical kernels: determinants come
from cofactor expansion or numpy's generic det, pseudo-inverses from
numpy's SVD-based pinv, and subsets from itertools.
"""

from itertools import combinations

import numpy as np


def cofactor_det(m):
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * cofactor_det(minor)
    return total


def log2det(m) -> float:
    return float(np.log2(abs(np.linalg.det(np.asarray(m, dtype=complex)))))


def herm(a):
    return np.conj(np.asarray(a)).T


def direct_esr(blocks, p: float) -> float:
    """E-SR of stacked receiver blocks, written out term by term."""
    h = np.vstack(blocks)
    nt = h.shape[1]
    u = np.linalg.pinv(h)
    sizes = [b.shape[0] for b in blocks]
    edges = np.cumsum([0] + sizes)
    total = 0.0
    for d, hd in enumerate(blocks):
        ud = u[:, edges[d]:edges[d + 1]]
        r_d = p * ud @ herm(ud)
        r_i = np.eye(nt, dtype=complex)
        for j in range(len(blocks)):
            if j != d:
                uj = u[:, edges[j]:edges[j + 1]]
                r_i = r_i + p * uj @ herm(uj)
        a = hd @ r_i @ herm(hd)
        b = hd @ r_d @ herm(hd)
        t1 = log2det(np.eye(sizes[d]) + np.linalg.inv(a) @ b)
        t2 = log2det(np.eye(sizes[d]) + herm(ud) @ np.linalg.inv(r_i) @ ud * p)
        total += t1 - t2
    return total


def direct_sr(blocks, eaves, p: float) -> float:
    """SR with eavesdropper d mod N against block d, square eavesdroppers only."""
    h = np.vstack(blocks)
    nt = h.shape[1]
    u = np.linalg.pinv(h)
    sizes = [b.shape[0] for b in blocks]
    edges = np.cumsum([0] + sizes)
    total = 0.0
    for d, hd in enumerate(blocks):
        ud = u[:, edges[d]:edges[d + 1]]
        r_d = p * ud @ herm(ud)
        r_i = np.eye(nt, dtype=complex) + p * (u @ herm(u)) - r_d
        he = eaves[d % len(eaves)]
        t1 = log2det(np.eye(sizes[d]) + np.linalg.inv(hd @ r_i @ herm(hd)) @ (hd @ r_d @ herm(hd)))
        lam = he @ r_i @ herm(he)
        t2 = log2det(np.eye(he.shape[0]) + np.linalg.inv(lam) @ (he @ r_d @ herm(he)))
        total += t1 - t2
    return total


def brute_force_esr(h_relays, s: int, p: float):
    best, best_sub = -np.inf, None
    for sub in combinations(range(len(h_relays)), s):
        v = direct_esr([h_relays[i] for i in sub], p)
        if v > best:
            best, best_sub = v, sub
    return best_sub, best


def greedy_count_by_simulation(n: int, s: int) -> int:
    """Count candidate evaluations of a literal greedy loop."""
    remaining = list(range(n))
    visited = 0
    for _ in range(s):
        visited += len(remaining)
        remaining.pop()
    return visited
