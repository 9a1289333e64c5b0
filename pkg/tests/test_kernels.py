import numpy as np
import pytest

from spectral_pgo import kernels

BACKENDS = kernels.available_backends()


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_backends_match_dense_reference(rng, name):
    impl = BACKENDS[name]
    n, m, ell = 9, 20, 3
    i = rng.integers(0, n, m)
    k = (i + rng.integers(1, n, m)) % n
    w = rng.uniform(0.1, 2.0, m)
    blocks = rng.normal(size=(m, ell, ell))
    ref_lap = np.zeros((n, n))
    ref_y = np.zeros((n * ell, n * ell))
    for j in range(m):
        q = np.zeros(n)
        q[i[j]], q[k[j]] = 1.0, -1.0
        ref_lap += w[j] * np.outer(q, q)
        ref_y += np.kron(np.outer(q, q), blocks[j])
    np.testing.assert_allclose(
        kernels.scatter_laplacian(np.zeros((n, n)), i, k, w, impl=impl), ref_lap, atol=1e-12
    )
    np.testing.assert_allclose(
        kernels.scatter_blocks(np.zeros((n * ell, n * ell)), i, k, blocks, impl=impl), ref_y,
        atol=1e-12,
    )
    t = rng.normal(size=(m, ell, ell))
    expected = np.stack([t[j].T @ blocks[j] @ t[j] for j in range(m)])
    np.testing.assert_allclose(kernels.congruence(t, blocks, impl=impl), expected, atol=1e-12)


def test_backends_agree_bitwise_on_scatter(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    n, m = 40, 100
    i = rng.integers(0, n, m)
    k = (i + 1) % n
    w = rng.uniform(0.1, 2.0, m)
    a = kernels.scatter_laplacian(np.zeros((n, n)), i, k, w, impl=BACKENDS["python"])
    b = kernels.scatter_laplacian(np.zeros((n, n)), i, k, w, impl=BACKENDS["cython"])
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)


def test_pure_python_env_switch():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from spectral_pgo import kernels; print(kernels.BACKEND)"],
        env={"SPECTRAL_PGO_PURE_PYTHON": "1", "PATH": ""}, capture_output=True, text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
