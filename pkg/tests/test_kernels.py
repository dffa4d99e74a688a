import os
import subprocess
import sys

import numpy as np
import pytest

from quditlab import _kernels
from quditlab.config import jit_enabled
from quditlab.nonlocality import cglmp_weights, qutrit_family_weights, satwap_weights


def draws(rng, lam, n):
    means = np.full(n, float(lam))
    return means, rng.random(n), rng.standard_normal(n)


@pytest.mark.parametrize("lam", [0.0, 0.3, 7.5, 250.0, 5e4])
def test_poisson_backends_identical(rng, lam):
    args = draws(rng, lam, 2000)
    a = _kernels.kernel("poisson", False)(*args)
    b = _kernels.kernel("poisson", True)(*args)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("lam", [0.3, 7.5, 250.0, 5e4])
def test_poisson_moments(rng, lam):
    k = _kernels.kernel("poisson", True)(*draws(rng, lam, 20000))
    se = np.sqrt(lam / 20000)
    assert abs(k.mean() - lam) < 5 * se
    assert k.var() == pytest.approx(lam, rel=0.05)


def test_lhv_backends_identical(rng):
    for W in (satwap_weights(4), cglmp_weights(3), qutrit_family_weights(0.3), rng.normal(size=(3, 3, 3, 2))):
        W = np.ascontiguousarray(W)
        assert _kernels.kernel("lhv_max", False)(W) == pytest.approx(_kernels.kernel("lhv_max", True)(W), abs=1e-12)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("QUDITLAB_JIT", "0")
    assert not jit_enabled()
    assert _kernels.kernel("poisson") is _kernels.poisson_numpy
    monkeypatch.setenv("QUDITLAB_JIT", "1")
    assert jit_enabled()
    assert _kernels.kernel("poisson") is not _kernels.poisson_numpy


def test_cli_output_independent_of_backend():
    argv = [sys.executable, "-m", "quditlab.cli", "bell", "--d", "3", "--shots", "5000", "--seed", "3"]
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, QUDITLAB_JIT=flag)
        outs.append(subprocess.run(argv, env=env, capture_output=True, check=True).stdout)
    assert outs[0] == outs[1]
