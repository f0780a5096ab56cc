import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conecert import kernels
from conecert.cls import simulate

from _gen import random_two_cone

compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="extension not built")


@compiled
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([2, 3, 4]))
def test_switch_counts_backends_agree(seed, n):
    rng = np.random.default_rng(seed)
    sys_ = random_two_cone(rng, n, radius=1.0)
    X0 = rng.standard_normal((50, n))
    args = (sys_.A(1), sys_.A(2), sys_.K, X0, 60)
    c = kernels.batch_switch_counts(*args, backend="compiled")
    p = kernels.batch_switch_counts(*args, backend="python")
    # the two backends sum in different orders, so only trajectories that stay
    # clear of the boundary must agree exactly
    for k, x in enumerate(X0):
        st_ = simulate(sys_, x, 60).states
        gap = np.abs(st_ @ sys_.K) / np.maximum(np.linalg.norm(st_, axis=1), 1e-300)
        if gap.min() > 1e-6:
            assert c[k] == p[k]


@compiled
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([2, 3, 4]))
def test_orbit_extrema_backends_agree(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a *= 0.97 / max(abs(np.linalg.eigvals(a)))
    g = rng.standard_normal((n, 5))
    r0 = rng.standard_normal(n)
    c = np.asarray(kernels.row_orbit_extrema(r0, a, g, 80, backend="compiled"))
    p = np.asarray(kernels.row_orbit_extrema(r0, a, g, 80, backend="python"))
    assert np.allclose(c, p, rtol=1e-12, atol=1e-14 * np.abs(p).max())


@given(st.integers(0, 2 ** 31 - 1))
def test_python_counts_match_simulation(seed):
    rng = np.random.default_rng(seed)
    sys_ = random_two_cone(rng, 3, radius=1.0)
    X0 = rng.standard_normal((10, 3))
    got = kernels.batch_switch_counts(sys_.A(1), sys_.A(2), sys_.K, X0, 30, backend="python")
    assert list(got) == [simulate(sys_, x, 30).switch_count for x in X0]


def test_python_backend_forced_by_env():
    env = dict(os.environ, CLS_KERNELS="python")
    r = subprocess.run([sys.executable, "-c", "from conecert import kernels; print(kernels.BACKEND)"],
                       capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "python"
