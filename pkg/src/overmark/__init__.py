"""Bit-string image watermarking toolkit.

A deterministic spread-spectrum codec (embed / blind extract), the
overwriting removal attack (decode, invert, re-embed), a distortion suite,
native PSNR / SSIM / NMI metrics plus the composite quality score and
TPR@FPR detection accuracy, and a batch evaluation pipeline with a CLI.
"""

from ._version import __version__
from .image import (
    MIN_DIMENSION,
    LumaPlane,
    PngFormatError,
    RasterImage,
    diff_image,
    load_png,
    merge_luma,
    save_png,
    to_luma,
)
from .codec import (
    CapacityError,
    DecodeResult,
    Ecc,
    EmbedConfig,
    Payload,
    SecretKey,
    chip_capacity,
    ecc_decode,
    ecc_encode,
    embed,
    extract,
    invert_bits,
    keyed_payload,
    pn_sequence,
)
from .attack import AttackTrace, overwrite_attack
from . import distortions
from .distortions import Distortion, SEVERITY_STEPS, canonical_chain, compose, parse_chain, parse_distortion
from .metrics import (
    NEURAL_FIELDS,
    PSNR_CAP_DB,
    DetectionStats,
    QualityVector,
    QualityWeights,
    ScoreReport,
    bit_accuracy,
    detection_threshold,
    load_external_metrics,
    nmi,
    overall_score,
    psnr,
    q_score,
    ssim,
    tpr_at_fpr,
)
from .synth import synthetic_corpus, synthetic_image
from .pipeline import RunConfig, RunReport, run_pipeline

__all__ = [
    "__version__",
    "MIN_DIMENSION",
    "LumaPlane",
    "PngFormatError",
    "RasterImage",
    "diff_image",
    "load_png",
    "merge_luma",
    "save_png",
    "to_luma",
    "CapacityError",
    "DecodeResult",
    "Ecc",
    "EmbedConfig",
    "Payload",
    "SecretKey",
    "chip_capacity",
    "ecc_decode",
    "ecc_encode",
    "embed",
    "extract",
    "invert_bits",
    "keyed_payload",
    "pn_sequence",
    "AttackTrace",
    "overwrite_attack",
    "distortions",
    "Distortion",
    "SEVERITY_STEPS",
    "canonical_chain",
    "compose",
    "parse_chain",
    "parse_distortion",
    "NEURAL_FIELDS",
    "PSNR_CAP_DB",
    "DetectionStats",
    "QualityVector",
    "QualityWeights",
    "ScoreReport",
    "bit_accuracy",
    "detection_threshold",
    "load_external_metrics",
    "nmi",
    "overall_score",
    "psnr",
    "q_score",
    "ssim",
    "tpr_at_fpr",
    "synthetic_corpus",
    "synthetic_image",
    "RunConfig",
    "RunReport",
    "run_pipeline",
]
