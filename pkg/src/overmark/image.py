"""8-bit RGB image container, PNG I/O, luma plane handling, difference rendering."""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError

# Smallest accepted edge; guarantees a full 8x8 block grid with margin on each axis.
MIN_DIMENSION = 16

# BT.601 luma weights. The file format never pins a color transform, so this
# constant is the single source of truth for every luma computation here.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COLOR_TYPE_NAMES = {
    0: "grayscale",
    2: "truecolor",
    3: "indexed",
    4: "grayscale+alpha",
    6: "truecolor+alpha",
}


class PngFormatError(ValueError):
    """Raised for PNG files this toolkit does not accept."""


class RasterImage:
    """Decoded 8-bit RGB image.

    Pixels are held as a read-only ``(height, width, 3)`` uint8 array, so
    instances can be shared freely across threads.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels) -> None:
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected a (height, width, 3) pixel array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"pixel channels must be 8-bit integers, got dtype {arr.dtype}")
            if arr.size and (int(arr.min()) < 0 or int(arr.max()) > 255):
                raise ValueError("pixel channel values must lie in [0, 255]")
        h, w = int(arr.shape[0]), int(arr.shape[1])
        if h < MIN_DIMENSION or w < MIN_DIMENSION:
            raise ValueError(f"image must be at least {MIN_DIMENSION}x{MIN_DIMENSION} pixels, got {w}x{h}")
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        self.pixels = arr

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height})"


class LumaPlane:
    """Real-valued luma samples for one image; nominal range [0, 255]."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a (height, width) luma array, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("luma values must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LumaPlane):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"LumaPlane({self.width}x{self.height})"


def _check_png_header(header: bytes, path) -> None:
    if len(header) < 26 or header[:8] != _PNG_SIGNATURE or header[12:16] != b"IHDR":
        raise PngFormatError(f"malformed PNG: {path}: missing signature or IHDR chunk")
    bit_depth = header[24]
    color_type = header[25]
    if bit_depth != 8:
        raise PngFormatError(f"unsupported bit depth: {bit_depth} (only 8-bit PNGs are accepted)")
    if color_type not in (2, 6):
        name = _COLOR_TYPE_NAMES.get(color_type, f"code {color_type}")
        raise PngFormatError(f"unsupported color type: {name} (only RGB and RGBA are accepted)")


def load_png(path) -> RasterImage:
    """Decode an 8-bit RGB or RGBA PNG.

    Alpha, when present, is dropped after compositing over opaque black.
    Grayscale, indexed and 16-bit files are rejected rather than promoted.
    """
    with open(path, "rb") as fh:
        header = fh.read(26)
    _check_png_header(header, path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise PngFormatError(f"malformed PNG: {path}: {exc}") from exc
    if arr.ndim == 3 and arr.shape[2] == 4:
        alpha = arr[:, :, 3:4].astype(np.float64) / 255.0
        arr = np.rint(arr[:, :, :3].astype(np.float64) * alpha).astype(np.uint8)
    elif mode != "RGB":
        raise PngFormatError(f"unsupported color mode after decode: {mode}")
    return RasterImage(arr)


def save_png(img: RasterImage, path) -> None:
    """Write a lossless 8-bit RGB PNG; ``load_png`` inverts it bit for bit."""
    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def to_luma(img: RasterImage) -> LumaPlane:
    """Per-pixel Y = 0.299 R + 0.587 G + 0.114 B, kept at full float precision."""
    px = img.pixels.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    return LumaPlane(wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2])


def merge_luma(img: RasterImage, luma: LumaPlane) -> RasterImage:
    """Replace the image's luma, carrying chroma unchanged.

    Every channel is shifted by (new Y - old Y), then rounded and clamped to
    [0, 255]. Merging an image with its own luma returns it unchanged.
    """
    if (luma.height, luma.width) != (img.height, img.width):
        raise ValueError(
            f"dimension mismatch: image is {img.width}x{img.height}, luma is {luma.width}x{luma.height}"
        )
    shift = luma.values - to_luma(img).values
    out = np.rint(img.pixels.astype(np.float64) + shift[:, :, None])
    return RasterImage(np.clip(out, 0, 255).astype(np.uint8))


def diff_image(a: RasterImage, b: RasterImage, gain: float = 10.0) -> RasterImage:
    """Amplified difference rendering centered at mid-gray.

    Per channel: out = clamp(128 + gain * (a - b)). Uniform (128, 128, 128)
    means the inputs are identical.
    """
    if gain <= 0 or not np.isfinite(gain):
        raise ValueError(f"gain must be a positive real, got {gain}")
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    delta = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    out = np.rint(128.0 + gain * delta)
    return RasterImage(np.clip(out, 0, 255).astype(np.uint8))
