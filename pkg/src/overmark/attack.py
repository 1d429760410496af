"""Watermark removal by overwriting: decode the message, invert it, re-embed it."""

from __future__ import annotations

from dataclasses import dataclass

from .codec import DecodeResult, EmbedConfig, Payload, SecretKey, embed, extract, invert_bits
from .image import RasterImage
from .metrics import bit_accuracy


@dataclass
class AttackTrace:
    """Intermediate artifacts of one attack run.

    residual_accuracy is the bit accuracy of the re-extracted message against
    the originally recovered one; near 0 means the overwrite took.
    """

    recovered: DecodeResult
    inverted: Payload
    attacked_image: RasterImage
    residual_accuracy: float


def overwrite_attack(
    watermarked: RasterImage, key: SecretKey, cfg: EmbedConfig = EmbedConfig()
) -> AttackTrace:
    """Extract the hidden message, flip every bit, embed the inverse.

    Runs unconditionally; there is no gate checking that a watermark is
    present. The re-embed targets the watermarked image the attacker holds,
    not a pristine original.
    """
    recovered = extract(watermarked, key, cfg)
    inverted = invert_bits(recovered.bits)
    attacked = embed(watermarked, inverted, key, cfg)
    residual = bit_accuracy(extract(attacked, key, cfg).bits, recovered.bits)
    return AttackTrace(recovered, inverted, attacked, residual)
