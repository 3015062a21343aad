"""Command-line surface: `gesture <segment|track|train|classify|vae>`.

Exit codes: 0 success, 2 usage/validation, 3 file format,
4 numeric/lost-track. Flags override values from an optional
`--config` JSON file; every input is validated before any output file
is created.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import datasets, generative, imaging, pnm, preprocess, tracking
from .errors import FormatError, GestureKitError, InvalidInputError, LostTrackError
from .neuralnet import (
    Network,
    TrainConfig,
    count_params,
    evaluate,
    figure1_specs,
    highres_input_shape,
    infer_shapes,
    load_network,
    lowres_input_shape,
    save_network,
    train,
)

_PPM_FRAME_RE = re.compile(r"^frame_(\d+)\.ppm$")


def _load_config(path) -> dict:
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise InvalidInputError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise InvalidInputError(f"config file {path} must hold a JSON object")
    return data


class _Opts:
    """Effective option lookup: CLI flag, then config file, then default."""

    def __init__(self, args):
        self.args = args
        self.config = _load_config(getattr(args, "config", None))

    def get(self, key, default=None):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.config:
            return self.config[key]
        return default


def _parse_key_color(text) -> tuple[int, int, int]:
    parts = str(text).split(",")
    if len(parts) != 3:
        raise InvalidInputError(f"key color must be R,G,B, got {text!r}")
    values = []
    for p in parts:
        try:
            v = int(p)
        except ValueError:
            raise InvalidInputError(f"key color component {p!r} is not an integer") from None
        if not 0 <= v <= 255:
            raise InvalidInputError(f"key color component {v} out of range 0-255")
        values.append(v)
    return tuple(values)


def _parse_roi(text) -> tracking.Window:
    parts = str(text).split(",")
    if len(parts) != 4:
        raise InvalidInputError(f"roi must be x,y,w,h, got {text!r}")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError:
        raise InvalidInputError(f"roi components must be integers, got {text!r}") from None
    return tracking.Window(x, y, w, h)


def _require_range(name, value, lo, hi) -> int:
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}") from None
    if not lo <= value <= hi:
        raise InvalidInputError(f"{name} must be in [{lo}, {hi}], got {value}")
    return value


def _load_ppm_frames(path) -> list[np.ndarray]:
    if not os.path.isdir(path):
        raise InvalidInputError(f"not a directory: {path}")
    numbered = []
    for name in os.listdir(path):
        m = _PPM_FRAME_RE.match(name)
        if m:
            numbered.append((int(m.group(1)), name))
    if not numbered:
        raise InvalidInputError(f"no frame_NNNN.ppm files in {path}")
    return [pnm.read_ppm(os.path.join(path, name)) for _, name in sorted(numbered)]


def cmd_segment(args) -> int:
    opts = _Opts(args)
    input_dir = opts.get("input_dir")
    out_dir = opts.get("out_dir")
    if input_dir is None or out_dir is None:
        raise InvalidInputError("segment needs --input-dir and --out-dir")
    key_color = _parse_key_color(opts.get("key_color", "0,255,0"))
    threshold = _require_range("threshold", opts.get("threshold", 40), 0, 255)
    frames = _load_ppm_frames(input_dir)
    background = None
    bg_path = opts.get("background")
    if bg_path is not None:
        if not os.path.isfile(bg_path):
            raise InvalidInputError(f"background image not found: {bg_path}")
        background = pnm.read_ppm(bg_path)
        if background.shape != frames[0].shape:
            raise InvalidInputError(
                f"background {background.shape[1]}x{background.shape[0]} does not "
                f"match frames {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
    os.makedirs(out_dir, exist_ok=True)
    for i, frame in enumerate(frames):
        mask = imaging.color_distance_mask(frame, key_color, threshold)
        pnm.write_pgm(os.path.join(out_dir, f"mask_{i:04d}.pgm"), mask)
        if background is not None:
            composite = imaging.replace_background(frame, background, mask)
            pnm.write_ppm(os.path.join(out_dir, f"composite_{i:04d}.ppm"), composite)
        print(json.dumps({"frame": i, "foreground": int(np.count_nonzero(mask))}))
    return 0


def _draw_dot(rgb: np.ndarray, x: int, y: int, color=(255, 0, 0)) -> None:
    h, w = rgb.shape[:2]
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            px, py = x + dx, y + dy
            if 0 <= px < w and 0 <= py < h:
                rgb[py, px] = color


def cmd_track(args) -> int:
    opts = _Opts(args)
    input_dir = opts.get("input_dir")
    out_csv = opts.get("out_csv")
    roi_text = opts.get("roi")
    if input_dir is None or out_csv is None or roi_text is None:
        raise InvalidInputError("track needs --input-dir, --roi, and --out-csv")
    roi = _parse_roi(roi_text)
    config = tracking.TrackConfig(
        bin_count=_require_range("bins", opts.get("bins", 32), 1, 256),
        max_iter=_require_range("max-iter", opts.get("max_iter", 20), 1, 10_000),
        eps=float(opts.get("eps", 1.0)),
    )
    if config.eps <= 0:
        raise InvalidInputError(f"eps must be positive, got {config.eps}")
    frames = preprocess.load_gesture_dir(input_dir)
    h, w = frames[0].shape
    if roi.x >= w or roi.y >= h or roi.x + roi.w <= 0 or roi.y + roi.h <= 0:
        raise InvalidInputError(f"roi {roi_text} lies outside the {w}x{h} frame")
    states = tracking.track_sequence(frames, roi, config)
    if states[0].lost:
        raise LostTrackError("track lost on frame 0: no mass under the initial window")
    with open(out_csv, "w", encoding="utf-8") as f:
        f.write(tracking.format_track_csv(states))
    overlay_path = opts.get("overlay")
    if overlay_path is None:
        stem, _ = os.path.splitext(out_csv)
        overlay_path = stem + "_overlay.ppm"
    overlay = np.repeat(frames[-1][:, :, None], 3, axis=2)
    for state in states:
        if not state.lost:
            cx, cy = state.centroid
            _draw_dot(overlay, int(round(cx)), int(round(cy)))
    pnm.write_ppm(overlay_path, overlay)
    return 0


def _load_digit_data(opts, seed) -> tuple[np.ndarray, np.ndarray | None]:
    """(images uint8 (N,28,28), labels or None) from --synth or IDX flags."""
    synth = opts.get("synth")
    images_path = opts.get("images")
    if synth is not None:
        n = _require_range("synth", synth, 1, 10_000_000)
        return datasets.synth_digits(n, seed)
    if images_path is None:
        raise InvalidInputError("need --synth N or --images (with --labels to train)")
    if not os.path.isfile(images_path):
        raise InvalidInputError(f"images file not found: {images_path}")
    labels_path = opts.get("labels")
    if labels_path is None:
        return datasets.load_idx_images(images_path), None
    if not os.path.isfile(labels_path):
        raise InvalidInputError(f"labels file not found: {labels_path}")
    return datasets.load_idx(images_path, labels_path)


def _arch_input_shape(arch: str, channels: int) -> tuple[int, int, int]:
    if arch in ("figure1", "lrn"):
        return lowres_input_shape(channels)
    if arch == "hrn":
        return highres_input_shape(channels)
    raise InvalidInputError(f"unknown arch {arch!r} (expected figure1, lrn, or hrn)")


def _prepare_classifier_input(images: np.ndarray, input_shape) -> np.ndarray:
    """Scale digit images to [0,1] and fit the network's input shape."""
    h, w, c = input_shape
    x = images.astype(np.float64) / 255.0
    x = x[..., None]
    if c == 3:
        x = np.repeat(x, 3, axis=3)
    elif c != 1:
        raise InvalidInputError(f"unsupported channel count {c}")
    if (h, w) == (2 * x.shape[1], 2 * x.shape[2]):
        x = np.stack([preprocess.upsample_nearest(s, 2) for s in x])
    if x.shape[1:3] != (h, w):
        raise FormatError(
            f"input {x.shape[2]}x{x.shape[1]} does not fit model input {w}x{h}"
        )
    return x


def cmd_train(args) -> int:
    opts = _Opts(args)
    seed = int(opts.get("seed", 0))
    arch = str(opts.get("arch", "figure1"))
    channels = _require_range("channels", opts.get("channels", 1), 1, 3)
    if channels == 2:
        raise InvalidInputError("channels must be 1 or 3")
    rates = (float(opts.get("dropout1", 0.25)), float(opts.get("dropout2", 0.5)))
    specs = figure1_specs(dropout_rates=rates)
    input_shape = _arch_input_shape(arch, channels)
    if opts.get("print_params"):
        counts, total = count_params(specs, input_shape)
        shapes = infer_shapes(specs, input_shape)
        table = [
            {"kind": s.kind, "output_shape": list(shape), "params": c}
            for s, shape, c in zip(specs, shapes, counts)
        ]
        print(json.dumps({"layers": table, "total_params": total}))
        return 0
    out_model = opts.get("out_model")
    if out_model is None:
        raise InvalidInputError("train needs --out-model")
    images, labels = _load_digit_data(opts, seed)
    if labels is None:
        raise InvalidInputError("training needs labels: use --labels or --synth")
    holdout = _require_range("holdout", opts.get("holdout", 200), 0, len(images) - 1)
    default_batch = 20 if arch == "hrn" else 40
    config = TrainConfig(
        learning_rate=float(opts.get("learning_rate", 0.01)),
        momentum=float(opts.get("momentum", 0.9)),
        batch_size=_require_range("batch-size", opts.get("batch_size", default_batch), 1, 10_000),
        epochs=_require_range("epochs", opts.get("epochs", 5), 1, 10_000),
        seed=seed,
    )
    x = _prepare_classifier_input(images, input_shape)
    split = len(x) - holdout
    net = Network(
        specs,
        input_shape,
        seed=seed,
        config={
            "arch": arch,
            "input_scale": "unit",
            "learning_rate": config.learning_rate,
            "momentum": config.momentum,
            "batch_size": config.batch_size,
            "epochs": config.epochs,
        },
    )
    history = train(net, x[:split], labels[:split], config)
    train_acc, _ = evaluate(net, x[:split], labels[:split])
    holdout_acc = None
    if holdout:
        holdout_acc, _ = evaluate(net, x[split:], labels[split:])
    save_network(out_model, net)
    print(
        json.dumps(
            {
                "arch": arch,
                "epochs": history,
                "train_accuracy": train_acc,
                "holdout_accuracy": holdout_acc,
                "model": str(out_model),
            }
        )
    )
    return 0


def _fit_samples_to_model(x: np.ndarray, net: Network) -> np.ndarray:
    """Match sample shape to the model, upsampling 2x when that fits."""
    h, w, c = net.input_shape
    if x.shape[3] != c:
        raise FormatError(
            f"input has {x.shape[3]} channels but model fingerprint "
            f"{net.fingerprint} expects {c}"
        )
    if x.shape[1:3] == (h, w):
        return x
    if (h, w) == (2 * x.shape[1], 2 * x.shape[2]):
        return np.stack([preprocess.upsample_nearest(s, 2) for s in x])
    raise FormatError(
        f"input {x.shape[2]}x{x.shape[1]} does not fit model input {w}x{h}"
    )


def cmd_classify(args) -> int:
    opts = _Opts(args)
    model_path = opts.get("model")
    if model_path is None:
        raise InvalidInputError("classify needs --model")
    if not os.path.isfile(model_path):
        raise InvalidInputError(f"model file not found: {model_path}")
    model2_path = opts.get("model2")
    if model2_path is not None and not os.path.isfile(model2_path):
        raise InvalidInputError(f"model file not found: {model2_path}")
    frames_dir = opts.get("frames")
    images_path = opts.get("images")
    if (frames_dir is None) == (images_path is None):
        raise InvalidInputError("classify needs exactly one of --images or --frames")
    net = load_network(model_path)
    net2 = load_network(model2_path) if model2_path else None
    if frames_dir is not None:
        volume = preprocess.build_volume(preprocess.load_gesture_dir(frames_dir))
        samples = volume  # (32, 28, 28, 3), already normalized
    else:
        if not os.path.isfile(images_path):
            raise InvalidInputError(f"images file not found: {images_path}")
        images = datasets.load_idx_images(images_path)
        samples = images.astype(np.float64)[..., None] / 255.0
    probs = net.predict_proba(_fit_samples_to_model(samples, net))
    if net2 is not None:
        from .neuralnet import fuse_predict

        probs2 = net2.predict_proba(_fit_samples_to_model(samples, net2))
        for i in range(len(probs)):
            fused, cls = fuse_predict(probs[i], probs2[i])
            print(json.dumps(
                {"index": i, "class": cls, "probabilities": [float(v) for v in fused]}
            ))
    else:
        for i in range(len(probs)):
            cls = int(np.argmax(probs[i]))
            print(json.dumps(
                {"index": i, "class": cls, "probabilities": [float(v) for v in probs[i]]}
            ))
    return 0


def cmd_vae_train(args) -> int:
    opts = _Opts(args)
    out_model = opts.get("out_model")
    if out_model is None:
        raise InvalidInputError("vae train needs --out-model")
    seed = int(opts.get("seed", 0))
    images, _ = _load_digit_data(opts, seed)
    config = generative.VaeConfig(
        input_dim=images.shape[1] * images.shape[2],
        hidden=_require_range("hidden", opts.get("hidden", 256), 1, 100_000),
        latent=_require_range("latent", opts.get("latent", 2), 1, 1_000),
        learning_rate=float(opts.get("learning_rate", 0.01)),
        momentum=float(opts.get("momentum", 0.9)),
        batch_size=_require_range("batch-size", opts.get("batch_size", 50), 1, 10_000),
        epochs=_require_range("epochs", opts.get("epochs", 20), 1, 10_000),
        seed=seed,
    )
    x = images.astype(np.float64).reshape(len(images), -1) / 255.0
    params, history = generative.train_vae(x, config)
    generative.save_vae(out_model, params)
    print(json.dumps({"epochs": history, "model": str(out_model)}))
    return 0


def cmd_vae_grid(args) -> int:
    opts = _Opts(args)
    model_path = opts.get("model")
    out_path = opts.get("out")
    if model_path is None or out_path is None:
        raise InvalidInputError("vae grid needs --model and --out")
    if not os.path.isfile(model_path):
        raise InvalidInputError(f"model file not found: {model_path}")
    grid_size = _require_range("grid-size", opts.get("grid_size", 15), 1, 100)
    extent = float(opts.get("extent", 2.0))
    if extent <= 0:
        raise InvalidInputError(f"extent must be positive, got {extent}")
    params = generative.load_vae(model_path)
    mosaic = generative.latent_grid(params, grid_size, extent)
    img = np.floor(mosaic * 255.0 + 0.5).astype(np.uint8)
    pnm.write_pgm(out_path, img)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesture",
        description="Hand-gesture toolkit: segmentation, tracking, "
        "classification, and generative reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="color-keyed background segmentation")
    p.add_argument("--input-dir", help="directory of frame_NNNN.ppm frames")
    p.add_argument("--key-color", help="background key color R,G,B")
    p.add_argument("--threshold", type=int, help="binary threshold 0-255")
    p.add_argument("--background", help="replacement background PPM")
    p.add_argument("--out-dir", help="output directory for masks/composites")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("track", help="CamShift tracking over PGM frames")
    p.add_argument("--input-dir", help="directory of frame_NNNN.pgm frames")
    p.add_argument("--roi", help="initial window x,y,w,h")
    p.add_argument("--out-csv", help="output CSV path")
    p.add_argument("--overlay", help="trajectory overlay PPM path")
    p.add_argument("--bins", type=int, help="histogram bin count")
    p.add_argument("--max-iter", type=int, help="mean-shift iteration cap")
    p.add_argument("--eps", type=float, help="mean-shift convergence threshold")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("train", help="train the digit classifier")
    p.add_argument("--images", help="IDX image file")
    p.add_argument("--labels", help="IDX label file")
    p.add_argument("--synth", type=int, help="generate N synthetic digits instead")
    p.add_argument("--arch", choices=["figure1", "lrn", "hrn"], help="network family")
    p.add_argument("--channels", type=int, help="input channels (1 or 3)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--holdout", type=int, help="held-out sample count")
    p.add_argument("--dropout1", type=float, help="rate after pooling")
    p.add_argument("--dropout2", type=float, help="rate after the hidden dense layer")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-model", help="output GNET model path")
    p.add_argument("--print-params", action="store_true", default=None,
                   help="print the layer/parameter table and exit")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify digits or a gesture sequence")
    p.add_argument("--model", help="GNET model path")
    p.add_argument("--model2", help="second model for probability fusion")
    p.add_argument("--images", help="IDX image file")
    p.add_argument("--frames", help="gesture frame directory (PGM)")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("vae", help="variational autoencoder commands")
    vsub = p.add_subparsers(dest="vae_command", required=True)

    v = vsub.add_parser("train", help="train the VAE on digit images")
    v.add_argument("--images", help="IDX image file")
    v.add_argument("--synth", type=int, help="generate N synthetic digits instead")
    v.add_argument("--hidden", type=int)
    v.add_argument("--latent", type=int)
    v.add_argument("--epochs", type=int)
    v.add_argument("--batch-size", type=int)
    v.add_argument("--learning-rate", type=float)
    v.add_argument("--momentum", type=float)
    v.add_argument("--seed", type=int)
    v.add_argument("--out-model", help="output GNET model path")
    v.add_argument("--config", help="JSON config file (flags override)")
    v.set_defaults(func=cmd_vae_train)

    v = vsub.add_parser("grid", help="decode the 2-D latent grid to a mosaic")
    v.add_argument("--model", help="GNET VAE model path")
    v.add_argument("--grid-size", type=int)
    v.add_argument("--extent", type=float, help="grid half-range r for [-r, r]^2")
    v.add_argument("--out", help="output mosaic PGM path")
    v.add_argument("--config", help="JSON config file (flags override)")
    v.set_defaults(func=cmd_vae_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except GestureKitError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
