"""Brute-force reference implementations used only by the tests.

Written as literal scalar loops over the defining formulas, sharing no code
with the package kernels.
"""

import math
from fractions import Fraction


def conv3x3_loop(img, kernel):
    h, w = len(img), len(img[0])

    def px(r, c):
        return float(img[min(max(r, 0), h - 1)][min(max(c, 0), w - 1)])

    return [[sum(kernel[i][j] * px(m + i - 1, n + j - 1) for i in range(3) for j in range(3))
             for n in range(w)] for m in range(h)]


def lap_var_literal(img, normalize):
    """Exact rational evaluation; only the returned value is rounded."""
    h, w = len(img), len(img[0])
    sixth = Fraction(1, 6)
    mask = [[0, -sixth, 0], [-sixth, 4 * sixth, -sixth], [0, -sixth, 0]]

    def px(r, c):
        return int(img[min(max(r, 0), h - 1)][min(max(c, 0), w - 1)])

    absl = [abs(sum(mask[i][j] * px(m + i - 1, n + j - 1) for i in range(3) for j in range(3)))
            for m in range(h) for n in range(w)]
    mean = sum(absl) / len(absl)
    total = sum((v - mean) ** 2 for v in absl)
    return float(total / len(absl) if normalize else total)


def ncc_gamma(f, t, u, v):
    """Correlation coefficient with the template's top-left at column u, row v.

    Mean-centered terms are scaled by n so that, for integer images, every
    sum is an exact integer and only the final division rounds.
    """
    th, tw = len(t), len(t[0])
    n = th * tw
    win = [int(f[v + y][u + x]) for y in range(th) for x in range(tw)]
    tpl = [int(t[y][x]) for y in range(th) for x in range(tw)]
    sum_f, sum_t = sum(win), sum(tpl)
    fc = [n * a - sum_f for a in win]  # n * (f - fbar)
    tc = [n * a - sum_t for a in tpl]  # n * (t - tbar)
    num = sum(a * b for a, b in zip(fc, tc))
    sf = sum(a * a for a in fc)
    st = sum(b * b for b in tc)
    if sf == 0 or st == 0:
        return 0.0
    return num / math.sqrt(sf * st)


def ncc_map_loop(f, t):
    rows = len(f) - len(t) + 1
    cols = len(f[0]) - len(t[0]) + 1
    return [[ncc_gamma(f, t, u, v) for u in range(cols)] for v in range(rows)]


def histogram_count(pixels, n_bins):
    """``pixels`` is a list of (r, g, b)."""
    hist = [0] * (n_bins ** 3)
    for r, g, b in pixels:
        qr, qg, qb = (int(r) * n_bins // 256, int(g) * n_bins // 256, int(b) * n_bins // 256)
        hist[qr * n_bins * n_bins + qg * n_bins + qb] += 1
    return hist


def intersection_loop(i, m):
    return sum(min(a, b) for a, b in zip(i, m)) / sum(m)


def _sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def lstm_loop(x, h, c, W, U, b):
    """W, U, b: dicts keyed by gate with nested-list matrices."""
    H = len(h)

    def pre(g, j):
        return (sum(W[g][j][k] * x[k] for k in range(len(x)))
                + sum(U[g][j][k] * h[k] for k in range(H)) + b[g][j])

    h_new, c_new = [], []
    for j in range(H):
        f = _sig(pre("f", j))
        i = _sig(pre("i", j))
        o = _sig(pre("o", j))
        cj = f * c[j] + i * math.tanh(pre("c", j))
        c_new.append(cj)
        h_new.append(o * math.tanh(cj))
    return h_new, c_new


def iou_box(a, b):
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    ix = max(0.0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    iy = max(0.0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = ix * iy
    return min(inter / (aw * ah + bw * bh - inter), 1.0)


def precision_at(results, truth, tau):
    kept = [(r, t) for r, t in zip(results, truth) if t is not None]
    if not kept:
        return 0.0
    hits = 0
    for r, t in kept:
        dx = (r[0] + r[2] / 2) - (t[0] + t[2] / 2)
        dy = (r[1] + r[3] / 2) - (t[1] + t[3] / 2)
        if math.sqrt(dx * dx + dy * dy) <= tau:
            hits += 1
    return hits / len(kept)


def success_at(results, truth, s):
    kept = [(r, t) for r, t in zip(results, truth) if t is not None]
    if not kept:
        return 0.0
    return sum(1 for r, t in kept if iou_box(r, t) > s) / len(kept)
