"""Command-line surface.

Subcommands: enhance, degrade light|color, ate, metrics, weights
inspect|random. Exit codes: 0 success, 1 usage error (bad flags, bad
ranges, missing inputs), 2 runtime error (corrupt archives, I/O failures).
Diagnostics go to stderr; machine-readable key=value results go to stdout.
Every stochastic subcommand takes --seed and is byte-reproducible for a
fixed seed. CWNET_THREADS (0 = auto) caps internal parallelism.
"""

import argparse
import os
import sys

from . import __version__
from .archive import load_archive, save_archive
from .causal import ate_map, default_color_intensities, default_light_intensities
from .errors import CwnetError
from .image import load_image, psnr, save_image, ssim
from .interventions import (
    HUE_SHIFT_RANGE,
    LIGHT_GAMMA_RANGE,
    NOISE_VARIANCE_RANGE,
    RGB_OFFSET_RANGE,
    SAT_SHIFT_RANGE,
    ColorInterventionSpec,
    LightInterventionSpec,
    degrade_color,
    degrade_light,
)
from .network import (
    NetworkConfig,
    config_from_archive,
    network_forward,
    parameter_count,
    random_init,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _require_file(path, what):
    if not os.path.isfile(path):
        raise UsageError(f"{what} {path!r} does not exist")
    return path


def _check_range(name, value, bounds, force):
    lo, hi = bounds
    if not force and not (lo <= value <= hi):
        raise UsageError(
            f"--{name} {value} outside [{lo}, {hi}]; pass --force to override")


def _build_parser():
    parser = _Parser(prog="cwnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="run the enhancement network on a PNG")
    p.add_argument("--input", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("degrade", help="synthesize a degraded copy of a PNG")
    kind = p.add_subparsers(dest="kind", required=True)

    pl = kind.add_parser("light", help="illumination degradation")
    pl.add_argument("--input", required=True)
    pl.add_argument("--output", required=True)
    pl.add_argument("--gamma", type=float, default=3.0)
    pl.add_argument("--noise-variance", type=float, default=0.05)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--force", action="store_true",
                    help="allow parameters outside the realistic ranges")

    pc = kind.add_parser("color", help="color anomaly")
    pc.add_argument("--input", required=True)
    pc.add_argument("--output", required=True)
    pc.add_argument("--hue-shift", type=float, default=0.0)
    pc.add_argument("--sat-shift", type=float, default=0.0)
    pc.add_argument("--rgb-offsets", default="0,0,0",
                    help="per-channel offsets in 8-bit units, e.g. 20,-10,5")
    pc.add_argument("--noise-variance", type=float, default=0.05)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--force", action="store_true")

    p = sub.add_parser("ate", help="patch-sensitivity attribution heatmap")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="heatmap PNG; a .txt sidecar "
                   "with raw dB scores is written next to it")
    p.add_argument("--intervention", choices=("light", "color"), default="light")
    p.add_argument("--patch-size", type=int, default=16)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("metrics", help="PSNR/SSIM between two PNGs")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)

    p = sub.add_parser("weights", help="weight archive utilities")
    wsub = p.add_subparsers(dest="wcmd", required=True)

    wi = wsub.add_parser("inspect", help="list tensors and parameter total")
    wi.add_argument("--weights", required=True)

    wr = wsub.add_parser("random", help="write a random-initialized archive")
    wr.add_argument("--output", required=True)
    wr.add_argument("--seed", type=int, default=0)
    wr.add_argument("--base-channels", type=int, default=16)
    wr.add_argument("--lf-blocks", default="1,3,4,3,1")
    wr.add_argument("--hf-blocks", default="1,2,2,2,1")
    wr.add_argument("--state-dim", type=int, default=8)
    wr.add_argument("--wt-levels", type=int, default=3)
    return parser


def _parse_triple(text, name):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--{name} must be three comma-separated numbers")
    if len(values) != 3:
        raise UsageError(f"--{name} must have exactly three values")
    return values


def _parse_int_list(text, name):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--{name} must be comma-separated integers")


def _cmd_enhance(args):
    _require_file(args.input, "input image")
    _require_file(args.weights, "weight archive")
    archive = load_archive(args.weights)
    img = load_image(args.input)
    out = network_forward(img, archive, config_from_archive(archive))
    save_image(out, args.output)
    print(f"output={args.output}")
    return 0


def _cmd_degrade(args):
    _require_file(args.input, "input image")
    img = load_image(args.input)
    if args.kind == "light":
        _check_range("gamma", args.gamma, LIGHT_GAMMA_RANGE, args.force)
        _check_range("noise-variance", args.noise_variance,
                     NOISE_VARIANCE_RANGE, args.force)
        spec = LightInterventionSpec(gamma=args.gamma,
                                     noise_variance=args.noise_variance,
                                     seed=args.seed)
        out = degrade_light(img, spec)
    else:
        offsets = _parse_triple(args.rgb_offsets, "rgb-offsets")
        _check_range("hue-shift", args.hue_shift, HUE_SHIFT_RANGE, args.force)
        _check_range("sat-shift", args.sat_shift, SAT_SHIFT_RANGE, args.force)
        for value in offsets:
            _check_range("rgb-offsets", value, RGB_OFFSET_RANGE, args.force)
        _check_range("noise-variance", args.noise_variance,
                     NOISE_VARIANCE_RANGE, args.force)
        spec = ColorInterventionSpec(hue_shift=args.hue_shift,
                                     sat_shift=args.sat_shift,
                                     rgb_offsets=offsets,
                                     noise_variance=args.noise_variance,
                                     seed=args.seed)
        out = degrade_color(img, spec)
    save_image(out, args.output)
    print(f"seed={args.seed}")
    print(f"output={args.output}")
    return 0


def _cmd_ate(args):
    _require_file(args.input, "input image")
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    img = load_image(args.input)
    intensities = (default_light_intensities(args.levels)
                   if args.intervention == "light"
                   else default_color_intensities(args.levels))
    amap = ate_map(img, args.intervention, args.patch_size, intensities, args.seed)
    amap.to_png(args.output)
    sidecar = os.path.splitext(args.output)[0] + ".txt"
    amap.to_text(sidecar)
    print(f"seed={args.seed}")
    print(f"grid={amap.grid_rows}x{amap.grid_cols}")
    print(f"patch_size={amap.patch_size}")
    print(f"heatmap={args.output}")
    print(f"scores={sidecar}")
    return 0


def _cmd_metrics(args):
    _require_file(args.ref, "reference image")
    _require_file(args.test, "test image")
    ref = load_image(args.ref)
    test = load_image(args.test)
    print(f"psnr={float(psnr(test, ref)):.3f} ssim={float(ssim(test, ref)):.6f}")
    return 0


def _cmd_weights(args):
    if args.wcmd == "inspect":
        _require_file(args.weights, "weight archive")
        archive = load_archive(args.weights)
        width = max(len(name) for name in archive)
        for name, tensor in archive.items():
            shape = "x".join(str(d) for d in tensor.shape) or "scalar"
            print(f"{name:<{width}}  {shape:>14}  {tensor.size}")
        print(f"total_parameters={archive.parameter_count()}")
        return 0
    cfg = NetworkConfig(
        base_channels=args.base_channels,
        lf_blocks=_parse_int_list(args.lf_blocks, "lf-blocks"),
        hf_blocks=_parse_int_list(args.hf_blocks, "hf-blocks"),
        state_dim=args.state_dim,
        wt_levels=args.wt_levels,
    )
    archive = random_init(cfg, seed=args.seed)
    save_archive(archive, args.output)
    print(f"seed={args.seed}")
    print(f"output={args.output}")
    print(f"total_parameters={parameter_count(cfg)}")
    return 0


_DISPATCH = {
    "enhance": _cmd_enhance,
    "degrade": _cmd_degrade,
    "ate": _cmd_ate,
    "metrics": _cmd_metrics,
    "weights": _cmd_weights,
}


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"cwnet: {exc}", file=sys.stderr)
        print("usage: see `cwnet --help`", file=sys.stderr)
        return 1
    except (CwnetError, OSError, ValueError) as exc:
        print(f"cwnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
