"""Keyed spread-spectrum watermark codec.

A fixed-length bit payload is carried in the mid-band coefficients of the
8x8 block DCT of the luma plane. Each coded bit is spread over
``chips_per_bit`` pseudo-random +-1 chips; chip slots come from a keyed
permutation over every mid-band slot of the image, so embedder and
extractor reconstruct the exact layout from (key, image size, config)
alone. Decoding is blind: slot coefficients are correlated with the chip
sequence and soft-decoded.

Embedding overwrites the selected slots with the chip signal instead of
superimposing on whatever was there before, so a second embed replaces an
earlier message rather than stacking on it. Strength 0 is a strict no-op.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .blockdct import BLOCK, ZIGZAG, dct_blocks, idct_blocks, join_blocks, split_blocks
from .image import LumaPlane, RasterImage, merge_luma, to_luma

_DOMAIN_CHIPS = 1
_DOMAIN_SLOTS = 2


class CapacityError(ValueError):
    """Image has fewer mid-band chip slots than the coded payload needs."""


@dataclass(frozen=True)
class SecretKey:
    """64-bit unsigned seed; the entire shared secret between embedder and extractor."""

    seed: int

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class Ecc:
    """Error-correction mode: 'none', or 'repetition' with r copies per bit."""

    kind: str
    repeats: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("none", "repetition"):
            raise ValueError(f"unknown ecc kind: {self.kind!r}")
        if self.kind == "none" and self.repeats != 1:
            raise ValueError("ecc 'none' cannot carry a repeat count")
        if self.repeats < 1:
            raise ValueError(f"repetition count must be >= 1, got {self.repeats}")

    @classmethod
    def none(cls) -> "Ecc":
        return cls("none", 1)

    @classmethod
    def repetition(cls, repeats: int) -> "Ecc":
        return cls("repetition", repeats)

    @classmethod
    def parse(cls, text: str) -> "Ecc":
        if text == "none":
            return cls.none()
        if text.startswith("repetition:"):
            return cls.repetition(int(text.split(":", 1)[1]))
        raise ValueError(f"unknown ecc spec: {text!r} (use 'none' or 'repetition:R')")

    def coded_length(self, n_bits: int) -> int:
        return n_bits if self.kind == "none" else n_bits * self.repeats

    def __str__(self) -> str:
        return "none" if self.kind == "none" else f"repetition:{self.repeats}"


@dataclass(frozen=True)
class EmbedConfig:
    """Codec settings. strength is in DCT amplitude units; mid_band lists zig-zag positions."""

    strength: float = 4.0
    block_size: int = 8
    chips_per_bit: int = 16
    ecc: Ecc = field(default_factory=lambda: Ecc("repetition", 3))
    mid_band: tuple[int, ...] = tuple(range(6, 16))
    payload_bits: int = 100

    def __post_init__(self) -> None:
        if not np.isfinite(self.strength) or self.strength < 0:
            raise ValueError(f"strength must be a finite non-negative real, got {self.strength}")
        if self.block_size != BLOCK:
            raise ValueError(f"block_size is fixed at {BLOCK}")
        if self.chips_per_bit < 1:
            raise ValueError(f"chips_per_bit must be >= 1, got {self.chips_per_bit}")
        if self.payload_bits < 1:
            raise ValueError(f"payload_bits must be >= 1, got {self.payload_bits}")
        band = tuple(int(i) for i in self.mid_band)
        if not band:
            raise ValueError("mid_band must not be empty")
        if len(set(band)) != len(band):
            raise ValueError("mid_band indices must be distinct")
        if any(i < 1 or i > 63 for i in band):
            raise ValueError("mid_band indices must lie in [1, 63] (DC excluded)")
        object.__setattr__(self, "mid_band", band)


class Payload:
    """Fixed-length bit vector.

    Hex form packs bits most-significant-bit first and zero-pads the final
    byte, so a 100-bit payload serializes to 26 lowercase hex digits.
    """

    __slots__ = ("bits",)

    def __init__(self, bits) -> None:
        arr = np.asarray(bits)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"payload must be a non-empty 1-D bit vector, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("payload elements must be 0 or 1")
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        self.bits = arr

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Payload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"Payload({len(self)} bits, {self.to_hex()})"

    def to_hex(self) -> str:
        return np.packbits(self.bits).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, n_bits: int) -> "Payload":
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise ValueError(f"invalid payload hex: {text!r}") from exc
        expected = (n_bits + 7) // 8
        if len(raw) != expected:
            raise ValueError(
                f"payload hex is {len(raw)} bytes, expected {expected} for {n_bits} bits"
            )
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        if bits[n_bits:].any():
            raise ValueError("padding bits beyond the payload length must be zero")
        return cls(bits[:n_bits])


@dataclass
class DecodeResult:
    """Recovered bits plus per-bit absolute correlation (DCT amplitude units, >= 0)."""

    bits: Payload
    confidences: np.ndarray
    mean_confidence: float


def _keyed_rng(seed: int, domain: int) -> np.random.Generator:
    # Philox is counter-based, so streams are reproducible across platforms
    # for a fixed (seed, domain) key.
    key = np.array([seed, domain % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pn_sequence(key: SecretKey, length: int) -> np.ndarray:
    """Keyed +-1 chip sequence of the given length (int8), Philox generated."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    bits = _keyed_rng(key.seed, _DOMAIN_CHIPS).integers(0, 2, size=length, dtype=np.int8)
    return (bits * 2 - 1).astype(np.int8)


def _slot_permutation(key: SecretKey, n_slots: int) -> np.ndarray:
    return _keyed_rng(key.seed, _DOMAIN_SLOTS).permutation(n_slots)


def keyed_payload(key: SecretKey, n_bits: int, tag: str = "") -> Payload:
    """Deterministic pseudo-random payload for (key, tag); tag is usually an image id."""
    digest = hashlib.blake2b(f"payload:{tag}".encode(), digest_size=8).digest()
    rng = _keyed_rng(key.seed, int.from_bytes(digest, "big"))
    return Payload(rng.integers(0, 2, size=n_bits, dtype=np.uint8))


def ecc_encode(bits, mode: Ecc) -> np.ndarray:
    """'none' is the identity; repetition(r) emits r copies, block interleaved
    (all first copies, then all second copies, and so on)."""
    arr = np.asarray(bits, dtype=np.uint8)
    if mode.kind == "none":
        return arr.copy()
    return np.tile(arr, mode.repeats)


def ecc_decode(soft, mode: Ecc) -> tuple[np.ndarray, np.ndarray]:
    """Soft-decision decode of per-slot correlations.

    repetition(r) sums the r soft values per bit; bit = 1 iff the sum is
    strictly positive (an exact zero decodes to 0); confidence = |sum| / r.
    """
    s = np.asarray(soft, dtype=np.float64)
    if mode.kind == "none":
        sums, r = s, 1
    else:
        r = mode.repeats
        if s.size % r != 0:
            raise ValueError(f"coded length {s.size} is not divisible by repetition count {r}")
        sums = s.reshape(r, s.size // r).sum(axis=0)
    bits = (sums > 0).astype(np.uint8)
    return bits, np.abs(sums) / r


def invert_bits(p: Payload) -> Payload:
    """Flip every bit; applying it twice returns the original payload."""
    return Payload(1 - p.bits)


def chip_capacity(img: RasterImage, cfg: EmbedConfig) -> int:
    """Number of mid-band chip slots the image offers under cfg."""
    nby = img.height // BLOCK
    nbx = img.width // BLOCK
    return nby * nbx * len(cfg.mid_band)


def _layout(img: RasterImage, key: SecretKey, cfg: EmbedConfig):
    coded_len = cfg.ecc.coded_length(cfg.payload_bits)
    need = coded_len * cfg.chips_per_bit
    have = chip_capacity(img, cfg)
    if need > have:
        raise CapacityError(
            f"payload needs {need} chip slots but a {img.width}x{img.height} image provides "
            f"{have} ({have // len(cfg.mid_band)} blocks x {len(cfg.mid_band)} mid-band coefficients)"
        )
    chips = pn_sequence(key, need)
    slots = _slot_permutation(key, have)[:need]
    return coded_len, chips, slots


def _band_uv(cfg: EmbedConfig):
    uu = np.array([ZIGZAG[i][0] for i in cfg.mid_band])
    vv = np.array([ZIGZAG[i][1] for i in cfg.mid_band])
    return uu, vv


def embed(img: RasterImage, p: Payload, key: SecretKey, cfg: EmbedConfig = EmbedConfig()) -> RasterImage:
    """Embed ``p`` and return the watermarked image.

    Selected mid-band slots are set to strength * chip * (+1 for a coded 1,
    -1 for a coded 0); the luma is rebuilt and merged back over the chroma.
    Strength 0 returns the input image unchanged.
    """
    if len(p) != cfg.payload_bits:
        raise ValueError(f"payload has {len(p)} bits, config expects {cfg.payload_bits}")
    coded_len, chips, slots = _layout(img, key, cfg)
    if cfg.strength == 0:
        return img
    luma = to_luma(img)
    h8 = (img.height // BLOCK) * BLOCK
    w8 = (img.width // BLOCK) * BLOCK
    coeffs = dct_blocks(split_blocks(luma.values[:h8, :w8]))
    uu, vv = _band_uv(cfg)
    # Fancy indexing yields a non-contiguous copy; force a layout whose
    # flattened view aliases it, so slot writes land back in `mid`.
    mid = np.ascontiguousarray(coeffs[:, uu, vv])
    flat = mid.reshape(-1)
    coded = ecc_encode(p.bits, cfg.ecc)
    signs = np.repeat(coded.astype(np.int8) * 2 - 1, cfg.chips_per_bit) * chips
    flat[slots] = cfg.strength * signs.astype(np.float64)
    coeffs[:, uu, vv] = mid
    new_vals = np.array(luma.values)
    new_vals[:h8, :w8] = join_blocks(idct_blocks(coeffs), h8, w8)
    return merge_luma(img, LumaPlane(new_vals))


def extract(img: RasterImage, key: SecretKey, cfg: EmbedConfig = EmbedConfig()) -> DecodeResult:
    """Blind decode: rebuild the keyed layout, correlate slots with chips, soft-decode.

    Does not need the original image. Confidences are mean absolute chip
    correlations per payload bit; near the embed strength on a cleanly
    watermarked image and near zero on unwatermarked content.
    """
    coded_len, chips, slots = _layout(img, key, cfg)
    luma = to_luma(img)
    h8 = (img.height // BLOCK) * BLOCK
    w8 = (img.width // BLOCK) * BLOCK
    coeffs = dct_blocks(split_blocks(luma.values[:h8, :w8]))
    uu, vv = _band_uv(cfg)
    flat = coeffs[:, uu, vv].reshape(-1)
    corr = (flat[slots] * chips).reshape(coded_len, cfg.chips_per_bit).mean(axis=1)
    bits, conf = ecc_decode(corr, cfg.ecc)
    return DecodeResult(Payload(bits), conf, float(conf.mean()))
