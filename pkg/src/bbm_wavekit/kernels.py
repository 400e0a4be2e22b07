"""Batched convolution kernels on the positive half-spectrum.

A real mean-zero field with modes |k| <= K is stored as its amplitudes for
k = 1..K; the negative half is the complex conjugate.  Both kernels return
the truncated convolution sum  sum_{k1+k2=k} u_k1 v_k2  for k = 1..K, without
any normalization constant.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


def fft_size(K):
    # outputs |k| <= K are alias-free once M > 3K
    return 4 * K


def conv_numpy(u, v):
    square = u is v
    u = np.atleast_2d(u)
    R, K = u.shape
    M = fft_size(K)
    X = np.zeros((R, M // 2 + 1), dtype=np.complex128)
    X[:, 1:K + 1] = u
    f = np.fft.irfft(X, n=M, axis=1)
    if square:
        g = f
    else:
        Y = np.zeros_like(X)
        Y[:, 1:K + 1] = np.atleast_2d(v)
        g = np.fft.irfft(Y, n=M, axis=1)
    h = np.fft.rfft(f * g, axis=1) * M
    return h[:, 1:K + 1]


@njit()
def _conv_loop(u, v, out):
    R, K = u.shape
    for r in range(R):
        for k in range(1, K + 1):
            s = 0j
            for k1 in range(k - K, K + 1):
                if k1 == 0 or k1 == k:
                    continue
                k2 = k - k1
                if k1 > 0:
                    a = u[r, k1 - 1]
                else:
                    a = np.conj(u[r, -k1 - 1])
                if k2 > 0:
                    b = v[r, k2 - 1]
                else:
                    b = np.conj(v[r, -k2 - 1])
                s += a * b
            out[r, k - 1] = s


def conv_numba(u, v):
    u = np.ascontiguousarray(np.atleast_2d(u), dtype=np.complex128)
    v = np.ascontiguousarray(np.atleast_2d(v), dtype=np.complex128)
    out = np.empty_like(u)
    _conv_loop(u, v, out)
    return out


def conv_direct(u, v):
    """Dense reference: np.convolve on the two-sided coefficient arrays."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    R, K = u.shape
    out = np.empty((R, K), dtype=np.complex128)
    for r in range(R):
        fu = np.concatenate([np.conj(u[r, ::-1]), [0.0], u[r]])
        fv = np.concatenate([np.conj(v[r, ::-1]), [0.0], v[r]])
        full = np.convolve(fu, fv)  # index j <-> k = j - 2K
        out[r] = full[2 * K + 1:3 * K + 1]
    return out


NUMBA_MAX_K = 24  # the O(K^2) loop beats the FFT only on small windows


def conv(u, v):
    """Default batched product kernel (numba loop or padded FFT)."""
    if USE_NUMBA and np.shape(u)[-1] <= NUMBA_MAX_K:
        return conv_numba(u, v)
    return conv_numpy(u, v)
