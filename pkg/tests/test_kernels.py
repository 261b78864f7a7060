"""The numba loop kernels and the numpy kernels agree with each other."""

import os
import subprocess
import sys

import numpy as np
import pytest

from refusion import kernels

NB = kernels.IMPLEMENTATIONS["numba"]
NP = kernels.IMPLEMENTATIONS["numpy"]


def test_conv_parity(rng):
    for _ in range(50):
        h, w = rng.integers(1, 30, 2)
        img = rng.integers(0, 256, (h, w), dtype=np.uint8)
        k = rng.normal(size=(3, 3))
        np.testing.assert_allclose(NB.conv3x3(img, k), NP.conv3x3(img, k), rtol=1e-12, atol=1e-9)


def test_lap_var_parity(rng):
    for _ in range(50):
        h, w = rng.integers(1, 40, 2)
        img = rng.integers(0, 256, (h, w), dtype=np.uint8)
        for norm in (True, False):
            assert NB.lap_var(img, norm) == pytest.approx(NP.lap_var(img, norm), rel=1e-9, abs=1e-9)


def test_ncc_parity(rng):
    for _ in range(50):
        rh, rw = rng.integers(2, 30, 2)
        th, tw = rng.integers(1, rh + 1), rng.integers(1, rw + 1)
        region = rng.integers(0, 256, (rh, rw), dtype=np.uint8)
        tmpl = rng.integers(0, 256, (th, tw), dtype=np.uint8)
        np.testing.assert_allclose(NB.ncc_map(region, tmpl), NP.ncc_map(region, tmpl), atol=1e-9)


def test_histogram_parity(rng):
    for n_bins in (2, 3, 8, 16, 32):
        rgb = rng.integers(0, 256, (17, 23, 3), dtype=np.uint8)
        assert np.array_equal(NB.joint_histogram(rgb, n_bins), NP.joint_histogram(rgb, n_bins))


def test_env_flag_selects_numpy():
    env = dict(os.environ, REFUSION_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from refusion import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_record_timings_counts_calls():
    img = np.zeros((8, 8), np.uint8)
    with kernels.record_timings() as t:
        kernels.lap_var(img)
        kernels.lap_var(img)
    assert t["lap_var"][0] == 2 and t["lap_var"][1] >= 0
    with kernels.record_timings() as t2:
        pass
    assert t2 == {}
