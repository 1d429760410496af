"""Batch evaluation pipeline: embed a corpus, attack it, distort, score, report.

The per-image map is pure, so worker count only affects throughput; the
final reduce runs in sorted image-id order and reports serialize to
byte-identical JSON for a fixed (corpus, config).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from ._version import __version__
from .attack import overwrite_attack
from .codec import CapacityError, Ecc, EmbedConfig, Payload, SecretKey, embed, extract, keyed_payload
from .distortions import Distortion, canonical_chain, compose, parse_chain
from .image import PngFormatError, RasterImage, diff_image, load_png, save_png
from .jsonfmt import dumps as json_dumps
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

_CONFIG_KEYS = {
    "input_dir",
    "output_dir",
    "key",
    "payload",
    "payload_bits",
    "strength",
    "chips_per_bit",
    "ecc",
    "mid_band",
    "distortions",
    "fpr_budget",
    "external_metrics",
    "negatives_dir",
    "diff_gain",
    "workers",
    "quality_weights",
}


@dataclass(frozen=True)
class RunConfig:
    """Settings for one evaluation run."""

    input_dir: str
    output_dir: str
    key: int = 0
    payload: str = "random"  # "random" (keyed per image) or a fixed hex payload
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    distortions: tuple[Distortion, ...] = ()
    fpr_budget: float = 0.001
    external_metrics: str | None = None
    negatives_dir: str | None = None
    diff_gain: float = 10.0
    workers: int = 1
    weights: QualityWeights = field(default_factory=QualityWeights)

    def __post_init__(self) -> None:
        if not 0.0 < self.fpr_budget < 1.0:
            raise ValueError(f"fpr_budget must lie in (0, 1), got {self.fpr_budget}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.diff_gain <= 0:
            raise ValueError(f"diff_gain must be positive, got {self.diff_gain}")
        SecretKey(self.key)  # validate range
        if self.payload != "random":
            Payload.from_hex(self.payload, self.embed.payload_bits)  # validate hex
        object.__setattr__(self, "distortions", tuple(self.distortions))

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ValueError("run config must be a JSON object")
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for required in ("input_dir", "output_dir"):
            if required not in doc:
                raise ValueError(f"config is missing required key {required!r}")
        chain = doc.get("distortions", "")
        if isinstance(chain, str):
            distortions = parse_chain(chain)
        else:
            distortions = tuple(parse_chain(str(atom))[0] for atom in chain)
        embed_cfg = EmbedConfig(
            strength=float(doc.get("strength", 4.0)),
            chips_per_bit=int(doc.get("chips_per_bit", 16)),
            ecc=Ecc.parse(doc.get("ecc", "repetition:3")),
            mid_band=tuple(doc.get("mid_band", range(6, 16))),
            payload_bits=int(doc.get("payload_bits", 100)),
        )
        weights_doc = doc.get("quality_weights", {})
        if not isinstance(weights_doc, dict):
            raise ValueError("quality_weights must be an object")
        known_weights = {f.name for f in dc_fields(QualityWeights)}
        bad = set(weights_doc) - known_weights
        if bad:
            raise ValueError(f"unknown quality_weights keys: {', '.join(sorted(bad))}")
        weights = QualityWeights(**{k: float(v) for k, v in weights_doc.items()})
        return cls(
            input_dir=str(doc["input_dir"]),
            output_dir=str(doc["output_dir"]),
            key=int(doc.get("key", 0)),
            payload=str(doc.get("payload", "random")),
            embed=embed_cfg,
            distortions=distortions,
            fpr_budget=float(doc.get("fpr_budget", 0.001)),
            external_metrics=doc.get("external_metrics"),
            negatives_dir=doc.get("negatives_dir"),
            diff_gain=float(doc.get("diff_gain", 10.0)),
            workers=int(doc.get("workers", 1)),
            weights=weights,
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed config JSON: {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        w = self.weights
        return {
            "input_dir": str(self.input_dir),
            "output_dir": str(self.output_dir),
            "key": int(self.key),
            "payload": self.payload,
            "payload_bits": self.embed.payload_bits,
            "strength": self.embed.strength,
            "chips_per_bit": self.embed.chips_per_bit,
            "ecc": str(self.embed.ecc),
            "mid_band": list(self.embed.mid_band),
            "distortions": canonical_chain(self.distortions),
            "fpr_budget": self.fpr_budget,
            "external_metrics": None if self.external_metrics is None else str(self.external_metrics),
            "negatives_dir": None if self.negatives_dir is None else str(self.negatives_dir),
            "diff_gain": self.diff_gain,
            # workers is a throughput knob only and is omitted so reports stay
            # byte-identical across worker counts.
            "quality_weights": {f.name: getattr(w, f.name) for f in dc_fields(QualityWeights)},
        }


@dataclass
class RunReport:
    """Everything one run produced; to_json() renders the published schema."""

    config: dict
    version: str
    A: float
    Q: float
    overall: float
    images: list
    detection: DetectionStats
    score: ScoreReport

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "version": self.version,
            "A": self.A,
            "Q": self.Q,
            "overall": self.overall,
            "images": self.images,
        }
        return json_dumps(doc, indent=2) + "\n"


def _payload_for(cfg: RunConfig, image_id: str) -> Payload:
    if cfg.payload == "random":
        return keyed_payload(SecretKey(cfg.key), cfg.embed.payload_bits, tag=image_id)
    return Payload.from_hex(cfg.payload, cfg.embed.payload_bits)


def _merge_neural(entry: dict | None) -> tuple[dict, list]:
    values = {}
    defaulted = []
    entry = entry or {}
    for name in NEURAL_FIELDS:
        if name in entry:
            values[name] = float(entry[name])
        else:
            values[name] = 0.0
            defaulted.append(name)
    return values, defaulted


def _process_one(image_id: str, path: Path, cfg: RunConfig, neural_entry: dict | None) -> dict:
    key = SecretKey(cfg.key)
    neural, defaulted = _merge_neural(neural_entry)
    try:
        img = load_png(path)
        payload = _payload_for(cfg, image_id)
        wm = embed(img, payload, key, cfg.embed)
        pre = bit_accuracy(extract(wm, key, cfg.embed).bits, payload)
        trace = overwrite_attack(wm, key, cfg.embed)
        final = compose(cfg.distortions, trace.attacked_image)
        post_bits = extract(final, key, cfg.embed).bits
        matches = int(np.count_nonzero(post_bits.bits == payload.bits))
        post = matches / len(payload)
        psnr_db = min(psnr(final, wm), PSNR_CAP_DB)
        ssim_val = ssim(final, wm)
        nmi_val = nmi(final, wm)

        out_dir = Path(cfg.output_dir)
        save_png(wm, out_dir / f"{image_id}.watermarked.png")
        save_png(final, out_dir / f"{image_id}.attacked.png")
        save_png(diff_image(final, wm, cfg.diff_gain), out_dir / f"{image_id}.diff.png")

        vector = QualityVector(
            fid=neural["fid"],
            clipfid=neural["clipfid"],
            psnr=psnr_db,
            ssim=ssim_val,
            nmi=nmi_val,
            lpips=neural["lpips"],
            delta_aesthetics=neural["delta_aesthetics"],
            delta_artifacts=neural["delta_artifacts"],
        )
        row = {
            "id": image_id,
            "payload": payload.to_hex(),
            "recovered": trace.recovered.bits.to_hex(),
            "inverted": trace.inverted.to_hex(),
            "pre_attack_accuracy": pre,
            "post_attack_accuracy": post,
            "psnr_db": psnr_db,
            "ssim": ssim_val,
            "nmi": nmi_val,
            "fid": neural["fid"],
            "clipfid": neural["clipfid"],
            "lpips": neural["lpips"],
            "delta_aesthetics": neural["delta_aesthetics"],
            "delta_artifacts": neural["delta_artifacts"],
            "defaulted": defaulted,
            "error": None,
        }
        return {"row": row, "matches": matches, "vector": vector, "post": post}
    except (CapacityError, PngFormatError, ValueError) as exc:
        row = {
            "id": image_id,
            "payload": None,
            "recovered": None,
            "inverted": None,
            "pre_attack_accuracy": None,
            "post_attack_accuracy": None,
            "psnr_db": None,
            "ssim": None,
            "nmi": None,
            "fid": None,
            "clipfid": None,
            "lpips": None,
            "delta_aesthetics": None,
            "delta_artifacts": None,
            "defaulted": defaulted,
            "error": str(exc),
        }
        return {"row": row, "matches": None, "vector": None, "post": None}


def _negative_scores(cfg: RunConfig) -> list[float]:
    neg_dir = Path(cfg.negatives_dir)
    if not neg_dir.is_dir():
        raise ValueError(f"negatives directory not found: {neg_dir}")
    paths = sorted(p for p in neg_dir.iterdir() if p.suffix.lower() == ".png")
    if not paths:
        raise ValueError(f"no PNG files in negatives directory {neg_dir}")
    key = SecretKey(cfg.key)
    scores = []
    for path in paths:
        clean = load_png(path)
        payload = _payload_for(cfg, path.stem)
        scores.append(bit_accuracy(extract(clean, key, cfg.embed).bits, payload))
    return scores


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Run the full embed / attack / distort / score pipeline over a PNG corpus.

    Per-image failures (for example capacity errors on undersized images)
    become flagged rows and are excluded from the aggregates; the run
    continues. Sidecar problems abort the run.
    """
    in_dir = Path(cfg.input_dir)
    if not in_dir.is_dir():
        raise ValueError(f"input directory not found: {in_dir}")
    paths = sorted((p for p in in_dir.iterdir() if p.suffix.lower() == ".png"), key=lambda p: p.stem)
    if not paths:
        raise ValueError(f"no PNG files in {in_dir}")
    sidecar = load_external_metrics(cfg.external_metrics) if cfg.external_metrics else {}
    os.makedirs(cfg.output_dir, exist_ok=True)

    jobs = [(p.stem, p) for p in paths]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(
                pool.map(lambda job: _process_one(job[0], job[1], cfg, sidecar.get(job[0])), jobs)
            )
    else:
        results = [_process_one(image_id, path, cfg, sidecar.get(image_id)) for image_id, path in jobs]

    ok = [r for r in results if r["matches"] is not None]
    n_bits = cfg.embed.payload_bits

    if cfg.negatives_dir is not None:
        neg = _negative_scores(cfg)
        pos = [r["post"] for r in ok]
        if pos:
            stats = tpr_at_fpr(pos, neg, cfg.fpr_budget)
        else:
            stats = DetectionStats(threshold=math.inf, tpr=0.0, fpr_budget=cfg.fpr_budget,
                                   n_pos=0, n_neg=len(neg))
        a_value = stats.tpr
    else:
        k = detection_threshold(n_bits, cfg.fpr_budget)
        detected = [r["matches"] >= k for r in ok]
        a_value = float(np.mean(detected)) if detected else 0.0
        stats = DetectionStats(threshold=k / n_bits, tpr=a_value, fpr_budget=cfg.fpr_budget,
                               n_pos=len(ok), n_neg=0)

    if ok:
        agg = QualityVector(
            fid=float(np.mean([r["vector"].fid for r in ok])),
            clipfid=float(np.mean([r["vector"].clipfid for r in ok])),
            psnr=float(np.mean([r["vector"].psnr for r in ok])),
            ssim=float(np.mean([r["vector"].ssim for r in ok])),
            nmi=float(np.mean([r["vector"].nmi for r in ok])),
            lpips=float(np.mean([r["vector"].lpips for r in ok])),
            delta_aesthetics=float(np.mean([r["vector"].delta_aesthetics for r in ok])),
            delta_artifacts=float(np.mean([r["vector"].delta_artifacts for r in ok])),
        )
    else:
        agg = QualityVector()
    q_value = q_score(agg, cfg.weights)
    overall = overall_score(a_value, q_value)

    score = ScoreReport(
        A=a_value,
        Q=q_value,
        overall=overall,
        per_image=[(r["row"]["id"], r["post"], r["vector"]) for r in ok],
    )
    report = RunReport(
        config=cfg.to_dict(),
        version=__version__,
        A=a_value,
        Q=q_value,
        overall=overall,
        images=[r["row"] for r in results],
        detection=stats,
        score=score,
    )
    (Path(cfg.output_dir) / "report.json").write_text(report.to_json())
    return report
