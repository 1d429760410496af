"""Command-line front end.

Machine-readable JSON goes to stdout, diagnostics to stderr. Exit codes:
0 success, 1 usage error (bad flags, missing files), 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .codec import Ecc, EmbedConfig, Payload, SecretKey, embed, extract, keyed_payload
from .attack import overwrite_attack
from .distortions import canonical_chain, compose, parse_chain
from .image import load_png, save_png
from .jsonfmt import dumps as json_dumps
from .metrics import PSNR_CAP_DB, bit_accuracy, overall_score, psnr
from .pipeline import RunConfig, run_pipeline


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); route to exit code 1 instead
        raise UsageError(message)


def _parse_mid_band(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if "-" in token:
            lo, hi = token.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(token))
    return tuple(out)


def _add_codec_flags(sp) -> None:
    sp.add_argument("--key", type=int, required=True, help="64-bit secret key seed")
    sp.add_argument("--strength", type=float, default=4.0, help="embed strength (DCT units)")
    sp.add_argument("--chips", type=int, default=16, help="chips per coded bit")
    sp.add_argument("--ecc", default="repetition:3", help="'none' or 'repetition:R'")
    sp.add_argument("--bits", type=int, default=100, help="payload length in bits")
    sp.add_argument("--mid-band", default="6-15", help="zig-zag coefficient positions, e.g. '6-15' or '6,7,9'")


def _codec_config(args) -> EmbedConfig:
    return EmbedConfig(
        strength=args.strength,
        chips_per_bit=args.chips,
        ecc=Ecc.parse(args.ecc),
        mid_band=_parse_mid_band(args.mid_band),
        payload_bits=args.bits,
    )


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    return p


def _build_parser() -> _Parser:
    parser = _Parser(prog="overmark", description="Watermark embed/extract, overwriting attack, and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("embed", help="embed a payload into one PNG")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", dest="out", required=True)
    sp.add_argument("--payload", help="payload hex; omitted means keyed-random from (key, file stem)")
    _add_codec_flags(sp)

    sp = sub.add_parser("extract", help="blind-decode the payload from one PNG")
    sp.add_argument("--in", dest="inp", required=True)
    _add_codec_flags(sp)

    sp = sub.add_parser("attack", help="overwrite attack: decode, invert, re-embed")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", dest="out", required=True)
    _add_codec_flags(sp)

    sp = sub.add_parser("distort", help="apply a distortion chain to one PNG")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", dest="out", required=True)
    sp.add_argument("--chain", required=True, help="comma-separated kind:param[:seed] atoms")

    sp = sub.add_parser("eval", help="run the batch pipeline from a JSON config")
    sp.add_argument("--config", required=True)

    sp = sub.add_parser("score", help="overall score sqrt(A^2 + Q^2)")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)

    return parser


def _cmd_embed(args) -> int:
    path = _require_file(args.inp)
    cfg = _codec_config(args)
    key = SecretKey(args.key)
    img = load_png(path)
    if args.payload is not None:
        payload = Payload.from_hex(args.payload, cfg.payload_bits)
    else:
        payload = keyed_payload(key, cfg.payload_bits, tag=path.stem)
    wm = embed(img, payload, key, cfg)
    save_png(wm, args.out)
    print(json_dumps({
        "in": str(path),
        "out": str(args.out),
        "payload": payload.to_hex(),
        "psnr_db": min(psnr(wm, img), PSNR_CAP_DB),
    }))
    return 0


def _cmd_extract(args) -> int:
    path = _require_file(args.inp)
    result = extract(load_png(path), SecretKey(args.key), _codec_config(args))
    print(json_dumps({
        "in": str(path),
        "bits": result.bits.to_hex(),
        "mean_confidence": result.mean_confidence,
        "confidences": [float(c) for c in result.confidences],
    }))
    return 0


def _cmd_attack(args) -> int:
    path = _require_file(args.inp)
    img = load_png(path)
    trace = overwrite_attack(img, SecretKey(args.key), _codec_config(args))
    save_png(trace.attacked_image, args.out)
    print(json_dumps({
        "in": str(path),
        "out": str(args.out),
        "recovered": trace.recovered.bits.to_hex(),
        "inverted": trace.inverted.to_hex(),
        "residual_accuracy": trace.residual_accuracy,
        "psnr_db": min(psnr(trace.attacked_image, img), PSNR_CAP_DB),
    }))
    return 0


def _cmd_distort(args) -> int:
    path = _require_file(args.inp)
    chain = parse_chain(args.chain)
    out = compose(chain, load_png(path))
    save_png(out, args.out)
    print(json_dumps({"in": str(path), "out": str(args.out), "chain": canonical_chain(chain)}))
    return 0


def _cmd_eval(args) -> int:
    config_path = _require_file(args.config)
    cfg = RunConfig.from_json(config_path)
    report = run_pipeline(cfg)
    ok = sum(1 for row in report.images if row["error"] is None)
    print(f"processed {len(report.images)} images ({ok} ok), report in {cfg.output_dir}/report.json",
          file=sys.stderr)
    sys.stdout.write(report.to_json())
    return 0


def _cmd_score(args) -> int:
    print(format(overall_score(args.a, args.q), ".17g"))
    return 0


_HANDLERS = {
    "embed": _cmd_embed,
    "extract": _cmd_extract,
    "attack": _cmd_attack,
    "distort": _cmd_distort,
    "eval": _cmd_eval,
    "score": _cmd_score,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
