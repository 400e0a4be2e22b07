import numpy as np
import pytest

from bbm_wavekit import kernels
from bbm_wavekit._accel import HAVE_NUMBA, backend


@pytest.mark.parametrize("K", [1, 4, 16, 33])
def test_numpy_matches_direct(K):
    rng = np.random.default_rng(K)
    u = rng.normal(size=(3, K)) + 1j * rng.normal(size=(3, K))
    v = rng.normal(size=(3, K)) + 1j * rng.normal(size=(3, K))
    assert np.max(np.abs(kernels.conv_numpy(u, v) - kernels.conv_direct(u, v))) < 1e-12
    assert np.max(np.abs(kernels.conv_numpy(u, u) - kernels.conv_direct(u, u))) < 1e-12


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("K", [1, 8, 40])
def test_numba_matches_numpy(K):
    rng = np.random.default_rng(10 + K)
    u = rng.normal(size=(5, K)) + 1j * rng.normal(size=(5, K))
    v = rng.normal(size=(5, K)) + 1j * rng.normal(size=(5, K))
    assert np.max(np.abs(kernels.conv_numba(u, v) - kernels.conv_numpy(u, v))) < 1e-12


def test_backend_flag():
    assert backend() in ("numba", "numpy")


def test_numpy_fallback_subprocess():
    import subprocess, sys, os
    env = dict(os.environ, BBM_WAVEKIT_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from bbm_wavekit._accel import backend; print(backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
