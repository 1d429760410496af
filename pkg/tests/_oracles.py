"""Independent brute-force reference implementations used to cross-check metrics.

Deliberately written with plain loops, dicts and Pascal's triangle instead
of the package's vectorized paths, so agreement is meaningful.
"""

import math
from fractions import Fraction

import numpy as np


def luma_plane(img) -> np.ndarray:
    px = img.pixels.astype(np.float64)
    return 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]


def psnr_bruteforce(a, b) -> float:
    total = 0.0
    count = 0
    for row_a, row_b in zip(a.pixels.tolist(), b.pixels.tolist()):
        for pa, pb in zip(row_a, row_b):
            for ca, cb in zip(pa, pb):
                total += (ca - cb) ** 2
                count += 1
    mse = total / count
    if mse == 0:
        return float("inf")
    return 10.0 * math.log10(255.0**2 / mse)


def ssim_bruteforce(a, b) -> float:
    xa = luma_plane(a)
    xb = luma_plane(b)
    half = 5
    coords = np.arange(-half, half + 1, dtype=np.float64)
    k1 = np.exp(-(coords**2) / (2.0 * 1.5**2))
    k1 /= k1.sum()
    kernel = np.outer(k1, k1)
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2
    h, w = xa.shape
    values = []
    for i in range(h - 2 * half):
        for j in range(w - 2 * half):
            wa = xa[i : i + 11, j : j + 11]
            wb = xb[i : i + 11, j : j + 11]
            mua = float((wa * kernel).sum())
            mub = float((wb * kernel).sum())
            va = float((wa * wa * kernel).sum()) - mua * mua
            vb = float((wb * wb * kernel).sum()) - mub * mub
            cov = float((wa * wb * kernel).sum()) - mua * mub
            values.append(
                ((2 * mua * mub + c1) * (2 * cov + c2))
                / ((mua * mua + mub * mub + c1) * (va + vb + c2))
            )
    return float(np.mean(values))


def nmi_bruteforce(a, b) -> float:
    ya = np.rint(luma_plane(a)).astype(int).clip(0, 255)
    yb = np.rint(luma_plane(b)).astype(int).clip(0, 255)
    joint: dict[tuple[int, int], int] = {}
    ca: dict[int, int] = {}
    cb: dict[int, int] = {}
    n = 0
    for va, vb in zip(ya.ravel().tolist(), yb.ravel().tolist()):
        joint[(va, vb)] = joint.get((va, vb), 0) + 1
        ca[va] = ca.get(va, 0) + 1
        cb[vb] = cb.get(vb, 0) + 1
        n += 1
    ha = -sum((c / n) * math.log(c / n) for c in ca.values())
    hb = -sum((c / n) * math.log(c / n) for c in cb.values())
    if ha == 0.0 and hb == 0.0:
        return 1.0
    info = 0.0
    for (va, vb), c in joint.items():
        p = c / n
        info += p * math.log(p / ((ca[va] / n) * (cb[vb] / n)))
    return 2.0 * info / (ha + hb)


def binomial_threshold_bruteforce(n: int, budget: float) -> int:
    # Pascal's triangle row n, exact integers.
    row = [1]
    for _ in range(n):
        row = [1] + [row[j] + row[j + 1] for j in range(len(row) - 1)] + [1]
    total = sum(row)
    target = Fraction(budget)
    for k in range(n + 2):
        tail = sum(row[k:])
        if Fraction(tail, total) <= target:
            return k
    raise AssertionError("unreachable")


def tpr_at_fpr_bruteforce(pos, neg, budget: float):
    candidates = sorted(set(list(pos) + list(neg))) + [float("inf")]
    for t in candidates:
        fpr = sum(1 for x in neg if x >= t) / len(neg)
        if fpr <= budget:
            tpr = sum(1 for x in pos if x >= t) / len(pos)
            return t, tpr
    raise AssertionError("unreachable")
