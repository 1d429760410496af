"""Deterministic synthetic test images: smooth random color fields."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .image import RasterImage, save_png

_DOMAIN_SYNTH = 7


def synthetic_image(
    width: int = 256, height: int = 256, seed: int = 0, smoothness: float = 6.0, spread: float = 40.0
) -> RasterImage:
    """Smooth random RGB field centered near mid-gray.

    Identical (size, seed) always yields identical pixels. The spectrum is
    dominated by low frequencies, similar to photographic content.
    """
    key = np.array([seed % 2**64, _DOMAIN_SYNTH], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))

    def field() -> np.ndarray:
        f = gaussian_filter(rng.standard_normal((height, width)), smoothness, mode="reflect")
        return (f - f.mean()) / (f.std() + 1e-12)

    base = field()
    chans = [
        np.clip(np.rint(128.0 + spread * (0.8 * base + 0.6 * field())), 0, 255)
        for _ in range(3)
    ]
    return RasterImage(np.stack(chans, axis=-1).astype(np.uint8))


def synthetic_corpus(
    directory, count: int, width: int = 256, height: int = 256, seed: int = 0, prefix: str = "img"
) -> list[Path]:
    """Write ``count`` synthetic PNGs into ``directory`` and return the sorted paths."""
    out_dir = Path(directory)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(count):
        path = out_dir / f"{prefix}_{i:04d}.png"
        save_png(synthetic_image(width, height, seed + i), path)
        paths.append(path)
    return paths
