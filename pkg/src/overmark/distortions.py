"""Common image manipulations used to stress the watermark codec.

Every kind has identity parameters, preserves the input dimensions, and is
deterministic (noise carries an explicit seed). Severity orderings: lower
quality, larger sigma, larger |offset|, gain further from 1, and smaller
crop/scale fraction all mean more severe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

from .blockdct import BLOCK, dct_blocks, idct_blocks, join_blocks, scaled_quant_table, split_blocks
from .image import LumaPlane, RasterImage, merge_luma, to_luma

KINDS = (
    "center_crop",
    "resize_cycle",
    "dct_quantize",
    "brightness",
    "contrast",
    "gaussian_noise",
    "gaussian_blur",
)

# param range per kind: (low, high, low_inclusive)
_RANGES = {
    "center_crop": (0.0, 1.0, False),
    "resize_cycle": (0.0, 1.0, False),
    "dct_quantize": (1.0, 100.0, True),
    "brightness": (-64.0, 64.0, True),
    "contrast": (0.5, 2.0, True),
    "gaussian_noise": (0.0, float("inf"), True),
    "gaussian_blur": (0.0, float("inf"), True),
}

# Parameter that leaves the image bit-identical, per kind. dct_quantize is
# defined to be a no-op at quality 100 (the scaled all-ones table would still
# round coefficients otherwise).
IDENTITY_PARAMS = {
    "center_crop": 1.0,
    "resize_cycle": 1.0,
    "dct_quantize": 100.0,
    "brightness": 0.0,
    "contrast": 1.0,
    "gaussian_noise": 0.0,
    "gaussian_blur": 0.0,
}

# Documented mild -> medium -> severe steps used by robustness sweeps.
SEVERITY_STEPS = {
    "center_crop": (0.95, 0.8, 0.6),
    "resize_cycle": (0.9, 0.6, 0.4),
    "dct_quantize": (95.0, 80.0, 60.0),
    "brightness": (5.0, 20.0, 50.0),
    "contrast": (0.9, 0.7, 0.5),
    "gaussian_noise": (2.0, 12.0, 40.0),
    "gaussian_blur": (0.4, 1.2, 2.5),
}

_DOMAIN_NOISE = 5


@dataclass(frozen=True)
class Distortion:
    """One manipulation: a kind, its scalar parameter, and a noise seed.

    The seed only affects gaussian_noise; it is accepted (and ignored) for
    the other kinds so chain grammar stays uniform.
    """

    kind: str
    param: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _RANGES:
            raise ValueError(f"unknown distortion kind: {self.kind!r} (choose from {', '.join(KINDS)})")
        lo, hi, lo_inc = _RANGES[self.kind]
        p = float(self.param)
        if not np.isfinite(p) or p > hi or p < lo or (p == lo and not lo_inc):
            raise ValueError(f"{self.kind} parameter {self.param} outside valid range")
        object.__setattr__(self, "param", p)
        object.__setattr__(self, "seed", int(self.seed))

    def __str__(self) -> str:
        text = f"{self.kind}:{self.param:g}"
        if self.kind == "gaussian_noise":
            text += f":{self.seed}"
        return text


def parse_distortion(text: str) -> Distortion:
    """Parse one ``kind:param[:seed]`` atom, e.g. ``dct_quantize:80`` or ``gaussian_noise:2.0:1234``."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad distortion spec: {text!r} (expected kind:param[:seed])")
    kind = parts[0]
    try:
        param = float(parts[1])
    except ValueError as exc:
        raise ValueError(f"bad distortion parameter in {text!r}") from exc
    seed = 0
    if len(parts) == 3:
        try:
            seed = int(parts[2])
        except ValueError as exc:
            raise ValueError(f"bad distortion seed in {text!r}") from exc
    return Distortion(kind, param, seed)


def parse_chain(text: str) -> tuple[Distortion, ...]:
    """Parse a comma-separated chain of atoms; empty text is the empty chain."""
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_distortion(atom) for atom in text.split(","))


def canonical_chain(chain) -> str:
    return ",".join(str(d) for d in chain)


def _center_crop(px: np.ndarray, fraction: float) -> np.ndarray:
    h, w = px.shape[:2]
    ch = max(1, int(round(h * fraction)))
    cw = max(1, int(round(w * fraction)))
    if (ch, cw) == (h, w):
        return px
    top, left = (h - ch) // 2, (w - cw) // 2
    window = px[top : top + ch, left : left + cw]
    # Reflect-pad back to the original canvas, in rounds so tiny windows work.
    pads = [top, h - ch - top, left, w - cw - left]
    out = window
    while any(pads):
        t = min(pads[0], out.shape[0] - 1)
        b = min(pads[1], out.shape[0] - 1)
        l = min(pads[2], out.shape[1] - 1)
        r = min(pads[3], out.shape[1] - 1)
        out = np.pad(out, ((t, b), (l, r), (0, 0)), mode="reflect")
        pads = [pads[0] - t, pads[1] - b, pads[2] - l, pads[3] - r]
    return out


def _resize_cycle(px: np.ndarray, scale: float) -> np.ndarray:
    h, w = px.shape[:2]
    w2 = max(1, int(round(w * scale)))
    h2 = max(1, int(round(h * scale)))
    if (h2, w2) == (h, w):
        return px
    im = Image.fromarray(px, mode="RGB")
    small = im.resize((w2, h2), Image.Resampling.BILINEAR)
    return np.asarray(small.resize((w, h), Image.Resampling.BILINEAR))


def _dct_quantize(img: RasterImage, quality: float) -> RasterImage:
    table = scaled_quant_table(quality)
    luma = to_luma(img)
    h8 = (img.height // BLOCK) * BLOCK
    w8 = (img.width // BLOCK) * BLOCK
    blocks = split_blocks(luma.values[:h8, :w8] - 128.0)
    coeffs = dct_blocks(blocks)
    coeffs = np.round(coeffs / table) * table
    new_vals = np.array(luma.values)
    new_vals[:h8, :w8] = join_blocks(idct_blocks(coeffs), h8, w8) + 128.0
    return merge_luma(img, LumaPlane(new_vals))


def apply(d: Distortion, img: RasterImage) -> RasterImage:
    """Apply one distortion; output dimensions always equal the input's."""
    px = img.pixels
    if d.kind == "center_crop":
        if d.param == 1.0:
            return img
        return RasterImage(_center_crop(px, d.param))
    if d.kind == "resize_cycle":
        if d.param == 1.0:
            return img
        return RasterImage(_resize_cycle(px, d.param))
    if d.kind == "dct_quantize":
        if d.param == 100.0:
            return img
        return _dct_quantize(img, d.param)
    if d.kind == "brightness":
        if d.param == 0.0:
            return img
        out = np.rint(px.astype(np.float64) + d.param)
        return RasterImage(np.clip(out, 0, 255).astype(np.uint8))
    if d.kind == "contrast":
        if d.param == 1.0:
            return img
        out = np.rint((px.astype(np.float64) - 128.0) * d.param + 128.0)
        return RasterImage(np.clip(out, 0, 255).astype(np.uint8))
    if d.kind == "gaussian_noise":
        if d.param == 0.0:
            return img
        key = np.array([d.seed % 2**64, _DOMAIN_NOISE], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        noise = rng.normal(0.0, d.param, size=px.shape)
        out = np.rint(px.astype(np.float64) + noise)
        return RasterImage(np.clip(out, 0, 255).astype(np.uint8))
    if d.kind == "gaussian_blur":
        if d.param == 0.0:
            return img
        blurred = np.empty(px.shape, dtype=np.float64)
        for c in range(3):
            blurred[:, :, c] = gaussian_filter(px[:, :, c].astype(np.float64), d.param, mode="reflect")
        return RasterImage(np.clip(np.rint(blurred), 0, 255).astype(np.uint8))
    raise ValueError(f"unknown distortion kind: {d.kind!r}")


def compose(chain, img: RasterImage) -> RasterImage:
    """Apply a chain left to right; the empty chain is the identity."""
    out = img
    for d in chain:
        out = apply(d, out)
    return out
