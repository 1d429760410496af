"""Quality metrics, detection statistics, and the composite scoring formulas.

PSNR, SSIM and NMI are computed natively. FID, CLIPFID, LPIPS and the two
score-variation measures require pretrained networks and are ingested from
an external JSON sidecar instead; absent values default to 0 and are
flagged as defaulted in reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .image import RasterImage, to_luma

# PSNR of identical images is +inf; reports and the quality score cap it here.
PSNR_CAP_DB = 100.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_SSIM_L = 255.0

NEURAL_FIELDS = ("fid", "clipfid", "lpips", "delta_aesthetics", "delta_artifacts")


@dataclass(frozen=True)
class QualityWeights:
    """Coefficients of the composite quality score; defaults are the published constants."""

    fid: float = 1.53e-3
    clipfid: float = 5.07e-3
    psnr: float = -2.22e-3
    ssim: float = -1.13e-1
    nmi: float = -9.88e-2
    lpips: float = 3.41e-1
    delta_aesthetics: float = 4.50e-2
    delta_artifacts: float = -1.44e-1


@dataclass
class QualityVector:
    """The eight quality measures for one image (or one aggregated run)."""

    fid: float = 0.0
    clipfid: float = 0.0
    psnr: float = 0.0
    ssim: float = 0.0
    nmi: float = 0.0
    lpips: float = 0.0
    delta_aesthetics: float = 0.0
    delta_artifacts: float = 0.0


@dataclass
class DetectionStats:
    """Threshold and true-positive rate at a false-positive budget."""

    threshold: float
    tpr: float
    fpr_budget: float = 0.001
    n_pos: int = 0
    n_neg: int = 0


@dataclass
class ScoreReport:
    """A, Q, the overall score, and per-image evidence for one evaluation run."""

    A: float
    Q: float
    overall: float
    per_image: list


def _check_same_dims(a: RasterImage, b: RasterImage) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError(f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}")


def psnr(a: RasterImage, b: RasterImage) -> float:
    """10 log10(255^2 / MSE) over all RGB samples; +inf when the images are identical."""
    _check_same_dims(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_window() -> np.ndarray:
    half = _SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * _SSIM_SIGMA**2))
    return k / k.sum()


def _filter_valid(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    half = kernel.size // 2
    out = correlate1d(x, kernel, axis=0, mode="nearest")
    out = correlate1d(out, kernel, axis=1, mode="nearest")
    return out[half:-half, half:-half]


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean structural similarity of the luma planes.

    11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255,
    averaged over fully valid windows only.
    """
    _check_same_dims(a, b)
    if a.height < _SSIM_WINDOW or a.width < _SSIM_WINDOW:
        raise ValueError(f"image smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} SSIM window")
    xa = to_luma(a).values
    xb = to_luma(b).values
    k = _gaussian_window()
    c1 = (_SSIM_K1 * _SSIM_L) ** 2
    c2 = (_SSIM_K2 * _SSIM_L) ** 2
    mu_a = _filter_valid(xa, k)
    mu_b = _filter_valid(xb, k)
    var_a = _filter_valid(xa * xa, k) - mu_a * mu_a
    var_b = _filter_valid(xb * xb, k) - mu_b * mu_b
    cov = _filter_valid(xa * xb, k) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def nmi(a: RasterImage, b: RasterImage) -> float:
    """Normalized mutual information 2 I(A;B) / (H(A) + H(B)) of the luma histograms.

    Luma is rounded to integers and binned into 256 levels. Two constant
    images are defined to have NMI 1.
    """
    _check_same_dims(a, b)
    ya = np.rint(to_luma(a).values).astype(np.int64).clip(0, 255)
    yb = np.rint(to_luma(b).values).astype(np.int64).clip(0, 255)
    n = ya.size
    joint = np.bincount((ya * 256 + yb).ravel(), minlength=256 * 256).astype(np.float64) / n
    joint = joint.reshape(256, 256)
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    ha = float(-np.sum(pa[pa > 0] * np.log(pa[pa > 0])))
    hb = float(-np.sum(pb[pb > 0] * np.log(pb[pb > 0])))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    nz = joint > 0
    outer = pa[:, None] * pb[None, :]
    info = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    return 2.0 * info / (ha + hb)


def bit_accuracy(x, y) -> float:
    """Fraction of matching positions between two equal-length bit vectors."""
    bx = np.asarray(getattr(x, "bits", x))
    by = np.asarray(getattr(y, "bits", y))
    if bx.shape != by.shape:
        raise ValueError(f"length mismatch: {bx.shape} vs {by.shape}")
    return float(np.mean(bx == by))


def detection_threshold(n_bits: int, fpr_budget: float) -> int:
    """Smallest k with P[Binomial(n_bits, 1/2) >= k] <= fpr_budget, by exact tail sums."""
    if n_bits < 1:
        raise ValueError(f"n_bits must be >= 1, got {n_bits}")
    if not 0.0 < fpr_budget <= 1.0:
        raise ValueError(f"fpr_budget must lie in (0, 1], got {fpr_budget}")
    budget = Fraction(fpr_budget)
    total = 1 << n_bits
    tail = 0
    k = n_bits + 1
    while k > 0 and Fraction(tail + math.comb(n_bits, k - 1), total) <= budget:
        tail += math.comb(n_bits, k - 1)
        k -= 1
    return k


def tpr_at_fpr(pos_scores, neg_scores, fpr_budget: float = 0.001) -> DetectionStats:
    """Calibrate a 'score >= t detects' threshold on the negatives, then rate the positives.

    The threshold is the smallest candidate score (observed values plus a
    top sentinel) whose empirical false-positive rate stays within budget.
    """
    if not 0.0 < fpr_budget <= 1.0:
        raise ValueError(f"fpr_budget must lie in (0, 1], got {fpr_budget}")
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("score lists must be non-empty")
    candidates = np.concatenate([np.unique(np.concatenate([pos, neg])), [np.inf]])
    for t in candidates:
        fpr = float(np.mean(neg >= t))
        if fpr <= fpr_budget:
            return DetectionStats(
                threshold=float(t),
                tpr=float(np.mean(pos >= t)),
                fpr_budget=fpr_budget,
                n_pos=int(pos.size),
                n_neg=int(neg.size),
            )
    raise AssertionError("unreachable: the +inf sentinel always satisfies the budget")


def q_score(v: QualityVector, w: QualityWeights = QualityWeights()) -> float:
    """Weighted sum of the eight quality measures. All components must be finite."""
    parts = (
        v.fid, v.clipfid, v.psnr, v.ssim, v.nmi, v.lpips, v.delta_aesthetics, v.delta_artifacts,
    )
    if not all(math.isfinite(x) for x in parts):
        raise ValueError("quality vector must be finite (cap the PSNR sentinel before scoring)")
    return (
        w.fid * v.fid
        + w.clipfid * v.clipfid
        + w.psnr * v.psnr
        + w.ssim * v.ssim
        + w.nmi * v.nmi
        + w.lpips * v.lpips
        + w.delta_aesthetics * v.delta_aesthetics
        + w.delta_artifacts * v.delta_artifacts
    )


def overall_score(a: float, q: float) -> float:
    """Euclidean norm of (A, Q)."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"A must lie in [0, 1], got {a}")
    if not math.isfinite(q):
        raise ValueError(f"Q must be finite, got {q}")
    return math.hypot(a, q)


def load_external_metrics(path) -> dict[str, dict[str, float]]:
    """Load the neural-metric sidecar: a JSON object image id -> subset of
    {fid, clipfid, lpips, delta_aesthetics, delta_artifacts}."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed external-metrics JSON: {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"external-metrics sidecar must be a JSON object keyed by image id: {path}")
    out: dict[str, dict[str, float]] = {}
    for image_id, fields in doc.items():
        if not isinstance(fields, dict):
            raise ValueError(f"sidecar entry for {image_id!r} must be an object")
        clean: dict[str, float] = {}
        for name, value in fields.items():
            if name not in NEURAL_FIELDS:
                raise ValueError(
                    f"unknown external metric field {name!r} for image {image_id!r} "
                    f"(known: {', '.join(NEURAL_FIELDS)})"
                )
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"external metric {name!r} for image {image_id!r} must be a finite number")
            clean[name] = float(value)
        out[image_id] = clean
    return out
