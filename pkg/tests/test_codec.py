import numpy as np
import pytest

from overmark import (
    CapacityError,
    Ecc,
    EmbedConfig,
    Payload,
    SecretKey,
    bit_accuracy,
    chip_capacity,
    ecc_decode,
    ecc_encode,
    embed,
    extract,
    invert_bits,
    keyed_payload,
    pn_sequence,
    psnr,
    synthetic_image,
)

KEY = SecretKey(42)


def test_pn_sequence_deterministic_and_binary():
    a = pn_sequence(KEY, 4096)
    b = pn_sequence(KEY, 4096)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) == {-1, 1}
    assert not np.array_equal(a, pn_sequence(SecretKey(43), 4096))


def test_pn_sequence_long_run_is_balanced():
    chips = pn_sequence(KEY, 10**6)
    assert abs(float(chips.mean())) < 0.01


def test_pn_sequence_rejects_bad_length():
    with pytest.raises(ValueError):
        pn_sequence(KEY, 0)


def test_secret_key_range():
    SecretKey(0)
    SecretKey(2**64 - 1)
    with pytest.raises(ValueError):
        SecretKey(-1)
    with pytest.raises(ValueError):
        SecretKey(2**64)


def test_ecc_encode_interleaves():
    out = ecc_encode([1, 0], Ecc.repetition(3))
    assert out.tolist() == [1, 0, 1, 0, 1, 0]
    assert ecc_encode([1, 0, 1], Ecc.none()).tolist() == [1, 0, 1]
    assert ecc_encode(np.ones(7, dtype=np.uint8), Ecc.repetition(4)).size == 28


def test_ecc_decode_soft_sum():
    # one payload bit, three copies: (0.9 + 0.8 - 0.7) = 1.0 -> bit 1, confidence 1/3
    bits, conf = ecc_decode([0.9, 0.8, -0.7], Ecc.repetition(3))
    assert bits.tolist() == [1]
    assert conf[0] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_ecc_decode_all_positive_and_tie():
    bits, _ = ecc_decode([0.1, 0.2, 0.3, 0.4, 0.5, 0.6], Ecc.repetition(3))
    assert bits.tolist() == [1, 1]
    bits, conf = ecc_decode([0.5, -0.5], Ecc.repetition(2))
    assert bits.tolist() == [0]  # exact zero sum decodes to 0
    assert conf[0] == 0.0
    bits, conf = ecc_decode([0.3, -0.2], Ecc.none())
    assert bits.tolist() == [1, 0]
    assert conf == pytest.approx([0.3, 0.2])


def test_ecc_decode_length_mismatch():
    with pytest.raises(ValueError, match="divisible"):
        ecc_decode([0.1, 0.2], Ecc.repetition(3))


def test_ecc_parse():
    assert Ecc.parse("none") == Ecc.none()
    assert Ecc.parse("repetition:5") == Ecc.repetition(5)
    with pytest.raises(ValueError):
        Ecc.parse("hamming:7")


def test_payload_hex_roundtrip():
    rng = np.random.default_rng(0)
    p = Payload(rng.integers(0, 2, size=100, dtype=np.uint8))
    text = p.to_hex()
    assert len(text) == 26  # 13 bytes for 100 bits
    assert text == text.lower()
    assert Payload.from_hex(text, 100) == p


def test_payload_hex_validation():
    with pytest.raises(ValueError, match="hex"):
        Payload.from_hex("zz", 8)
    with pytest.raises(ValueError, match="bytes"):
        Payload.from_hex("ff", 100)
    with pytest.raises(ValueError, match="padding"):
        Payload.from_hex("01", 4)  # low nibble must be zero for 4 bits


def test_invert_bits():
    p = Payload([0, 1, 0, 1])
    assert invert_bits(p) == Payload([1, 0, 1, 0])
    zeros = Payload([0] * 8)
    assert invert_bits(zeros) == Payload([1] * 8)
    assert invert_bits(invert_bits(p)) == p


def test_embed_roundtrip_mid_gray():
    img_px = np.full((256, 256, 3), 128, dtype=np.uint8)
    from overmark import RasterImage

    img = RasterImage(img_px)
    p = keyed_payload(KEY, 100)
    wm = embed(img, p, KEY)
    assert extract(wm, KEY).bits == p


def test_embed_roundtrip_synthetic_corpus():
    exact = 0
    for i in range(20):
        img = synthetic_image(256, 256, seed=300 + i)
        p = keyed_payload(KEY, 100, tag=str(i))
        wm = embed(img, p, KEY)
        if extract(wm, KEY).bits == p:
            exact += 1
    assert exact == 20


def test_embed_strength_zero_is_identity():
    img = synthetic_image(256, 256, seed=1)
    cfg = EmbedConfig(strength=0.0)
    wm = embed(img, keyed_payload(KEY, 100), KEY, cfg)
    assert wm == img


def test_embed_is_deterministic():
    img = synthetic_image(256, 256, seed=2)
    p = keyed_payload(KEY, 100)
    assert embed(img, p, KEY) == embed(img, p, KEY)


def test_embed_rejects_wrong_payload_length():
    img = synthetic_image(256, 256, seed=2)
    with pytest.raises(ValueError, match="bits"):
        embed(img, Payload([1, 0, 1]), KEY)


def test_capacity_error_on_small_image():
    img = synthetic_image(16, 16, seed=4)
    assert chip_capacity(img, EmbedConfig()) == 40
    with pytest.raises(CapacityError, match="chip slots"):
        embed(img, keyed_payload(KEY, 100), KEY)
    with pytest.raises(CapacityError):
        extract(img, KEY)


def test_embed_distortion_is_bounded():
    # mean absolute pixel change stays below the embed strength
    for i in range(5):
        img = synthetic_image(256, 256, seed=40 + i)
        wm = embed(img, keyed_payload(KEY, 100, tag=str(i)), KEY)
        change = np.abs(wm.pixels.astype(np.float64) - img.pixels.astype(np.float64))
        assert float(change.mean()) <= 4.0


def test_embed_quality_on_corpus():
    values = []
    for i in range(20):
        img = synthetic_image(256, 256, seed=60 + i)
        wm = embed(img, keyed_payload(KEY, 100, tag=str(i)), KEY)
        values.append(psnr(wm, img))
    assert float(np.mean(values)) >= 35.0


def test_wrong_key_decodes_noise():
    accs = []
    for i in range(30):
        img = synthetic_image(256, 256, seed=80 + i)
        p = keyed_payload(KEY, 100, tag=str(i))
        wm = embed(img, p, KEY)
        accs.append(bit_accuracy(extract(wm, SecretKey(9000 + i)).bits, p))
    assert 0.4 <= float(np.mean(accs)) <= 0.6


def test_unwatermarked_confidence_is_lower():
    wm_conf = []
    clean_conf = []
    for i in range(10):
        img = synthetic_image(256, 256, seed=120 + i)
        p = keyed_payload(KEY, 100, tag=str(i))
        wm_conf.append(extract(embed(img, p, KEY), KEY).mean_confidence)
        clean_conf.append(extract(img, KEY).mean_confidence)
    assert max(clean_conf) < min(wm_conf)


def test_extract_confidences_nonnegative():
    img = synthetic_image(256, 256, seed=7)
    res = extract(img, KEY)
    assert res.confidences.shape == (100,)
    assert (res.confidences >= 0).all()
    assert res.mean_confidence == pytest.approx(float(res.confidences.mean()))


def test_keyed_payload_depends_on_key_and_tag():
    a = keyed_payload(KEY, 100, tag="x")
    assert a == keyed_payload(KEY, 100, tag="x")
    assert a != keyed_payload(KEY, 100, tag="y")
    assert a != keyed_payload(SecretKey(43), 100, tag="x")


def test_config_validation():
    with pytest.raises(ValueError):
        EmbedConfig(strength=-1.0)
    with pytest.raises(ValueError):
        EmbedConfig(block_size=16)
    with pytest.raises(ValueError):
        EmbedConfig(chips_per_bit=0)
    with pytest.raises(ValueError):
        EmbedConfig(mid_band=())
    with pytest.raises(ValueError):
        EmbedConfig(mid_band=(0, 1))  # DC excluded
    with pytest.raises(ValueError):
        EmbedConfig(mid_band=(6, 6))
