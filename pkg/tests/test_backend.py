import os
import subprocess
import sys

import numpy as np
import pytest

import fbmsde
from fbmsde._backend import BACKENDS

pytestmark = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


@pytest.fixture(params=["uniform", "random"])
def data(request, rng):
    n = 97
    if request.param == "uniform":
        t = np.linspace(0.0, 1.0, n + 1)
    else:
        t = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, n - 1)), [1.0]])
    F = np.cumsum(rng.standard_normal((n + 1, 3)), axis=0) / np.sqrt(n)
    return t, F


@pytest.mark.parametrize("call", [
    lambda k, t, F: k.left_signed(t, F, 1.3, True),
    lambda k, t, F: k.left_signed(t, F, 0.6, False),
    lambda k, t, F: k.left_abs(t, F, 1.3, 1.0),
    lambda k, t, F: k.left_abs(t, F, 1.3, 0.7),
    lambda k, t, F: k.pair_hoelder(t, F, 0.6),
    lambda k, t, F: k.pair_owm(t, F, 0.3),
    lambda k, t, F: k.pair_lambda(t, F, 0.3),
], ids=["left_signed_diff", "left_signed", "left_abs", "left_abs_delta", "pair_hoelder", "pair_owm", "pair_lambda"])
def test_backends_agree(data, call):
    t, F = data
    a = np.asarray(call(BACKENDS["python"], t, F), dtype=float)
    b = np.asarray(call(BACKENDS["cython"], t, F), dtype=float)
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-13)


@pytest.mark.skipif(os.environ.get("FBMSDE_PURE_PYTHON") == "1", reason="fallback forced")
def test_default_backend_is_compiled():
    assert fbmsde.backend == "cython"


def test_env_forces_fallback():
    env = dict(os.environ, FBMSDE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import fbmsde; print(fbmsde.backend)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
