"""Hot numeric kernels, each with a numba loop version and a numpy version.

The public functions dispatch on :data:`refusion._jit.USE_NUMBA`. Both
implementations are reachable through :data:`IMPLEMENTATIONS` so tests and
the benchmark can compare them side by side in one process.

All kernels take plain arrays; the Frame/BBox layer lives in ``imaging``.
"""

import time
from contextlib import contextmanager
from typing import Callable, NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._jit import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# numba loop kernels
# ---------------------------------------------------------------------------


@njit
def _conv3x3_nb(img, kernel):
    h, w = img.shape
    out = np.empty((h, w), dtype=np.float64)
    for m in range(h):
        for n in range(w):
            acc = 0.0
            for i in range(3):
                r = min(max(m + i - 1, 0), h - 1)
                for j in range(3):
                    c = min(max(n + j - 1, 0), w - 1)
                    acc += kernel[i, j] * img[r, c]
            out[m, n] = acc
    return out


@njit
def _lap_var_nb(img, normalize):
    # fused replicate-padded Laplacian, |L|, mean and squared deviations
    h, w = img.shape
    absl = np.empty((h, w), dtype=np.float64)
    total = 0.0
    for m in range(h):
        up = max(m - 1, 0)
        down = min(m + 1, h - 1)
        for n in range(w):
            left = max(n - 1, 0)
            right = min(n + 1, w - 1)
            v = (4.0 * img[m, n] - img[up, n] - img[down, n]
                 - img[m, left] - img[m, right]) / 6.0
            if v < 0.0:
                v = -v
            absl[m, n] = v
            total += v
    mean = total / (h * w)
    acc = 0.0
    for m in range(h):
        for n in range(w):
            d = absl[m, n] - mean
            acc += d * d
    if normalize:
        acc /= h * w
    return acc


@njit
def _ncc_map_nb(region, template):
    rh, rw = region.shape
    th, tw = template.shape
    n = th * tw
    st = 0
    stt = 0
    for y in range(th):
        for x in range(tw):
            v = np.int64(template[y, x])
            st += v
            stt += v * v
    var_t = n * stt - st * st
    out = np.zeros((rh - th + 1, rw - tw + 1), dtype=np.float64)
    if var_t == 0:
        return out
    for v0 in range(rh - th + 1):
        for u0 in range(rw - tw + 1):
            sf = 0
            sff = 0
            sft = 0
            for y in range(th):
                for x in range(tw):
                    f = np.int64(region[v0 + y, u0 + x])
                    sf += f
                    sff += f * f
                    sft += f * np.int64(template[y, x])
            var_f = n * sff - sf * sf
            if var_f == 0:
                continue
            g = (n * sft - sf * st) / np.sqrt(float(var_f) * float(var_t))
            if g > 1.0:
                g = 1.0
            elif g < -1.0:
                g = -1.0
            out[v0, u0] = g
    return out


@njit
def _joint_histogram_nb(rgb, n_bins):
    h, w, _ = rgb.shape
    hist = np.zeros(n_bins * n_bins * n_bins, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            r = np.int64(rgb[y, x, 0]) * n_bins // 256
            g = np.int64(rgb[y, x, 1]) * n_bins // 256
            b = np.int64(rgb[y, x, 2]) * n_bins // 256
            hist[(r * n_bins + g) * n_bins + b] += 1.0
    return hist


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------


def _conv3x3_np(img, kernel):
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(3):
        for j in range(3):
            if kernel[i, j] != 0.0:
                out += kernel[i, j] * padded[i:i + h, j:j + w]
    return out


def _lap_var_np(img, normalize):
    p = np.pad(np.asarray(img, dtype=np.float64), 1, mode="edge")
    lap = (4.0 * p[1:-1, 1:-1] - p[:-2, 1:-1] - p[2:, 1:-1]
           - p[1:-1, :-2] - p[1:-1, 2:]) / 6.0
    absl = np.abs(lap)
    acc = float(np.sum((absl - absl.mean()) ** 2))
    if normalize:
        acc /= absl.size
    return acc


def _window_sums(a, th, tw):
    # summed-area table, exact for integer input
    sat = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = a.cumsum(0).cumsum(1)
    return sat[th:, tw:] - sat[:-th, tw:] - sat[th:, :-tw] + sat[:-th, :-tw]


def _ncc_map_np(region, template):
    f = np.asarray(region, dtype=np.int64)
    t = np.asarray(template, dtype=np.int64)
    th, tw = t.shape
    n = th * tw
    st = int(t.sum())
    var_t = n * int((t * t).sum()) - st * st
    out_shape = (f.shape[0] - th + 1, f.shape[1] - tw + 1)
    if var_t == 0:
        return np.zeros(out_shape, dtype=np.float64)
    sf = _window_sums(f, th, tw)
    sff = _window_sums(f * f, th, tw)
    sft = np.einsum("ijkl,kl->ij", sliding_window_view(f, (th, tw)), t)
    var_f = n * sff - sf * sf
    num = (n * sft - sf * st).astype(np.float64)
    den = np.sqrt(var_f.astype(np.float64) * float(var_t))
    out = np.zeros(out_shape, dtype=np.float64)
    ok = var_f != 0
    out[ok] = num[ok] / den[ok]
    return np.clip(out, -1.0, 1.0)


def _joint_histogram_np(rgb, n_bins):
    q = np.asarray(rgb, dtype=np.int64) * n_bins // 256
    idx = (q[..., 0] * n_bins + q[..., 1]) * n_bins + q[..., 2]
    return np.bincount(idx.ravel(), minlength=n_bins ** 3).astype(np.float64)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


class KernelSet(NamedTuple):
    conv3x3: Callable
    lap_var: Callable
    ncc_map: Callable
    joint_histogram: Callable


IMPLEMENTATIONS = {
    "numba": KernelSet(_conv3x3_nb, _lap_var_nb, _ncc_map_nb, _joint_histogram_nb),
    "numpy": KernelSet(_conv3x3_np, _lap_var_np, _ncc_map_np, _joint_histogram_np),
}

BACKEND = "numba" if USE_NUMBA else "numpy"
_active = IMPLEMENTATIONS[BACKEND]

# kernel name -> [calls, seconds]; None when not recording
_timings = None


@contextmanager
def record_timings():
    """Accumulate per-kernel call counts and wall time inside the block."""
    global _timings
    previous = _timings
    _timings = {}
    try:
        yield _timings
    finally:
        _timings = previous


def _timed(name, fn, *args):
    if _timings is None:
        return fn(*args)
    t0 = time.perf_counter()
    out = fn(*args)
    entry = _timings.setdefault(name, [0, 0.0])
    entry[0] += 1
    entry[1] += time.perf_counter() - t0
    return out


def conv3x3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Correlate a 2-D image with a 3x3 kernel using edge-replicate padding."""
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if kernel.shape != (3, 3):
        raise ValueError(f"kernel must be 3x3, got {kernel.shape}")
    return _timed("conv3x3", _active.conv3x3, np.ascontiguousarray(img), kernel)


def lap_var(img: np.ndarray, normalize: bool = True) -> float:
    return float(_timed("lap_var", _active.lap_var, np.ascontiguousarray(img), bool(normalize)))


def ncc_map(region: np.ndarray, template: np.ndarray) -> np.ndarray:
    """Correlation coefficient of ``template`` at every valid offset in ``region``.

    Inputs must hold integer intensities. Windows where either operand has
    zero variance score 0.
    """
    region = np.ascontiguousarray(region)
    template = np.ascontiguousarray(template)
    if template.shape[0] > region.shape[0] or template.shape[1] > region.shape[1]:
        raise ValueError("template larger than region")
    return _timed("ncc", _active.ncc_map, region, template)


def joint_histogram(rgb: np.ndarray, n_bins: int) -> np.ndarray:
    return _timed("histogram", _active.joint_histogram, np.ascontiguousarray(rgb), int(n_bins))


def warmup() -> None:
    """Trigger JIT compilation so first-frame latency does not skew timings."""
    g = np.zeros((4, 4), dtype=np.uint8)
    g[1, 1] = 9
    for impl in IMPLEMENTATIONS.values() if USE_NUMBA else [_active]:
        impl.conv3x3(g, np.eye(3))
        impl.lap_var(g, True)
        impl.ncc_map(g, g[:2, :2].copy())
        impl.joint_histogram(np.zeros((2, 2, 3), dtype=np.uint8), 8)
