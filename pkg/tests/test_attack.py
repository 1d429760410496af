import numpy as np
import pytest

from overmark import (
    SecretKey,
    bit_accuracy,
    embed,
    extract,
    invert_bits,
    keyed_payload,
    overwrite_attack,
    psnr,
    synthetic_image,
)

KEY = SecretKey(99)


def _attacked_corpus(count, seed_base):
    runs = []
    for i in range(count):
        img = synthetic_image(256, 256, seed=seed_base + i)
        p = keyed_payload(KEY, 100, tag=str(i))
        wm = embed(img, p, KEY)
        runs.append((p, wm, overwrite_attack(wm, KEY)))
    return runs


def test_attack_implants_inverted_message():
    runs = _attacked_corpus(20, 400)
    hits = 0
    for p, _, trace in runs:
        assert trace.inverted == invert_bits(trace.recovered.bits)
        if extract(trace.attacked_image, KEY).bits == invert_bits(p):
            hits += 1
    assert hits / len(runs) >= 0.95


def test_attack_destroys_original_message():
    runs = _attacked_corpus(20, 430)
    residuals = [trace.residual_accuracy for _, _, trace in runs]
    vs_original = [
        bit_accuracy(extract(trace.attacked_image, KEY).bits, p) for p, _, trace in runs
    ]
    assert float(np.mean(residuals)) <= 0.10
    assert float(np.mean(vs_original)) <= 0.10


def test_attack_preserves_quality():
    runs = _attacked_corpus(10, 460)
    values = [psnr(trace.attacked_image, wm) for _, wm, trace in runs]
    assert float(np.mean(values)) >= 30.0


def test_attack_runs_on_unwatermarked_images():
    img = synthetic_image(256, 256, seed=480)
    trace = overwrite_attack(img, KEY)
    assert trace.inverted == invert_bits(trace.recovered.bits)
    assert 0.0 <= trace.residual_accuracy <= 1.0


def test_attack_is_deterministic():
    img = synthetic_image(256, 256, seed=481)
    wm = embed(img, keyed_payload(KEY, 100), KEY)
    t1 = overwrite_attack(wm, KEY)
    t2 = overwrite_attack(wm, KEY)
    assert t1.attacked_image == t2.attacked_image
    assert t1.recovered.bits == t2.recovered.bits
    assert t1.residual_accuracy == t2.residual_accuracy


def test_residual_matches_definition():
    img = synthetic_image(256, 256, seed=482)
    wm = embed(img, keyed_payload(KEY, 100), KEY)
    trace = overwrite_attack(wm, KEY)
    recomputed = bit_accuracy(extract(trace.attacked_image, KEY).bits, trace.recovered.bits)
    assert trace.residual_accuracy == pytest.approx(recomputed)
