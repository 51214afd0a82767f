import numpy as np
import pytest


def central_diff_grad(fn, x, rel_step=1e-6):
    """Central finite differences with per-coordinate step 1e-6*(1+|x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return g


def assert_gradient_matches_fd(smooth, x, rtol=1e-5):
    _, g = smooth.value_and_grad(np.asarray(x, dtype=float))
    g_fd = central_diff_grad(lambda z: smooth.value_and_grad(z)[0], x)
    scale = np.maximum(1.0, np.abs(g_fd))
    worst = float(np.max(np.abs(g - g_fd) / scale))
    assert worst <= rtol, f"gradient mismatch {worst:.3e} at x={np.asarray(x)[:4]}..."


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
