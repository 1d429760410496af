"""8x8 block DCT helpers shared by the watermark codec and the compression simulator."""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn, idctn

BLOCK = 8


def _zigzag_coords() -> tuple[tuple[int, int], ...]:
    coords = []
    for d in range(2 * BLOCK - 1):
        lo, hi = max(0, d - BLOCK + 1), min(d, BLOCK - 1)
        us = range(lo, hi + 1) if d % 2 == 1 else range(hi, lo - 1, -1)
        coords.extend((u, d - u) for u in us)
    return tuple(coords)


# Zig-zag scan order: position 0 is DC, increasing positions move to higher frequencies.
ZIGZAG = _zigzag_coords()


def split_blocks(values: np.ndarray) -> np.ndarray:
    """(h8, w8) plane -> (n_blocks, 8, 8) in raster block order. Dims must be multiples of 8."""
    h8, w8 = values.shape
    nby, nbx = h8 // BLOCK, w8 // BLOCK
    return (
        values.reshape(nby, BLOCK, nbx, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(nby * nbx, BLOCK, BLOCK)
    )


def join_blocks(blocks: np.ndarray, h8: int, w8: int) -> np.ndarray:
    """Inverse of split_blocks."""
    nby, nbx = h8 // BLOCK, w8 // BLOCK
    return (
        blocks.reshape(nby, nbx, BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(h8, w8)
    )


def dct_blocks(blocks: np.ndarray) -> np.ndarray:
    return dctn(blocks, type=2, norm="ortho", axes=(1, 2))


def idct_blocks(coeffs: np.ndarray) -> np.ndarray:
    return idctn(coeffs, type=2, norm="ortho", axes=(1, 2))


# Standard luminance quantization table (raster order).
JPEG_LUMA_QUANT = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def scaled_quant_table(quality: float) -> np.ndarray:
    """Luminance table under the common IJG quality scaling, entries clamped to [1, 255]."""
    if not 1.0 <= quality <= 100.0:
        raise ValueError(f"quality must lie in [1, 100], got {quality}")
    scale = 5000.0 / quality if quality < 50.0 else 200.0 - 2.0 * quality
    table = np.floor((JPEG_LUMA_QUANT * scale + 50.0) / 100.0)
    return np.clip(table, 1.0, 255.0)
