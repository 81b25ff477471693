import numpy as np
import pytest
from hypothesis import given, strategies as st

from relaysec.channel import SystemConfig, draw_gaussian_matrix
from relaysec.errors import ArgumentError, SingularityError
from relaysec.precoding import Precoder, draw_signals, signal_covariances, zf_batch, zf_precoder


def test_zf_examples():
    assert np.allclose(zf_precoder(np.eye(4)).u_full, np.eye(4))
    assert np.allclose(zf_precoder(np.diag([2.0, 4.0])).u_full, np.diag([0.5, 0.25]))
    h = draw_gaussian_matrix(4, 6, np.random.default_rng(0))
    prec = zf_precoder(h, 2)
    assert np.linalg.norm(h @ prec.u_full - np.eye(4)) < 1e-9
    assert np.array_equal(np.hstack(prec.u_blocks), prec.u_full)
    assert [b.shape for b in prec.u_blocks] == [(6, 2), (6, 2)]


def test_zf_block_validation_and_singularity():
    h = draw_gaussian_matrix(4, 6, np.random.default_rng(1))
    with pytest.raises(ArgumentError):
        zf_precoder(h, 3)
    with pytest.raises(ArgumentError):
        zf_precoder(h, [1, 2])
    assert [b.shape[1] for b in zf_precoder(h, [1, 3]).u_blocks] == [1, 3]
    with pytest.raises(SingularityError):
        zf_precoder(np.ones((2, 4)))


def test_zf_batch_flags_bad_entries():
    rng = np.random.default_rng(2)
    stack = draw_gaussian_matrix(2, 4, rng, 3)
    stack[1] = np.ones((2, 4))
    u, ok = zf_batch(stack)
    assert ok.tolist() == [True, False, True]
    assert np.all(u[1] == 0)
    assert np.allclose(stack[0] @ u[0], np.eye(2))


def test_signal_covariance_examples():
    single = Precoder(np.eye(2), [np.eye(2)])
    r_d, r_i = signal_covariances(single, 0)
    assert np.allclose(r_i, np.eye(2))
    e = np.eye(4)
    two = Precoder(e, [e[:, :2], e[:, 2:]])
    r_d, r_i = signal_covariances(two, 0)
    assert np.real(np.trace(r_d)) == pytest.approx(2.0)
    assert np.allclose(r_d @ r_d, r_d)
    assert np.allclose(r_d @ (r_i - np.eye(4)), 0)
    with pytest.raises(ArgumentError):
        signal_covariances(two, 2)


@given(st.integers(0, 2**31), st.floats(0.1, 10))
def test_covariance_bookkeeping_closes(seed, p):
    h = draw_gaussian_matrix(4, 6, np.random.default_rng(seed))
    prec = zf_precoder(h, 2)
    for k in range(prec.n_blocks):
        r_d, r_i = signal_covariances(prec, k, p)
        total = sum(b @ b.conj().T for b in prec.u_blocks)
        assert np.max(np.abs(r_d + r_i - np.eye(6) - p * total)) < 1e-10
        assert np.max(np.abs(r_i - r_i.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(r_i).min() > 0


def test_draw_signals_shape_and_power():
    cfg = SystemConfig(n_t=6, m_users=3, n_i=2, n_k=2, s_select=3, k_jammers=3, n_r=2, n_e=2, n_eaves=3)
    a = draw_signals(cfg, np.random.default_rng(9))
    b = draw_signals(cfg, np.random.default_rng(9))
    assert len(a.s_blocks) == 3 and all(s.shape == (2, 1) for s in a.s_blocks)
    assert all(np.array_equal(x, y) for x, y in zip(a.s_blocks + a.j_blocks, b.s_blocks + b.j_blocks))
    rng = np.random.default_rng(1)
    small = SystemConfig()
    acc = np.concatenate([np.concatenate(draw_signals(small, rng).s_blocks).ravel() for _ in range(25_000)])
    assert abs(np.mean(np.abs(acc) ** 2) - 1) < 0.02
