"""prf: denoise images through the photoreceptor grid and run the
accompanying experiments (benchmark grid, noise synthesis, STA, noise
profiling, impulse-response inspection).

Exit codes: 0 ok, 2 bad configuration/usage, 3 I/O failure, 4 numeric
failure (calibration, detection, or fitting broke down).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench, classic_filters
from .core_model import DEFAULT_PARAMS
from .image_io import ImageIOError, read_image, sidecar_path, write_image, write_sidecar
from .metrics import psnr, ssim
from .noise_forge import CalibrationError, NoiseSpec, add_noise
from .noise_profiler import (
    DegenerateSamplesError,
    regularization_report,
    write_profile_outputs,
)
from .pr_filter import impulse_kernel, pr_denoise
from .sta_lab import (
    MOVIE_FAMILIES,
    NoSpikeletsError,
    StaConfig,
    fit_gaussian_to_map,
    run_sta,
    write_sta_outputs,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

_DENOISE_FILTERS = ("pr",) + tuple(classic_filters.FILTERS)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("denoise", help="filter one image")
    d.add_argument("input", help="grayscale .pgm/.png/.prf1")
    d.add_argument("--out", required=True, help="output image path")
    d.add_argument("--filter", default="pr", choices=_DENOISE_FILTERS)
    d.add_argument("--g-gap", type=float, default=DEFAULT_PARAMS.g_gap,
                   help="gap-junction conductance, nS (pr filter)")
    d.add_argument("--sigma", type=float, default=2.0, help="gaussian filter sigma")
    d.add_argument("--ksize", type=int, default=None, help="kernel size for classic filters")
    d.add_argument("--ref", default=None, help="clean reference; prints PSNR/SSIM to stderr")
    d.add_argument("--metric-mode", default="float", choices=("float", "8bit"))

    b = sub.add_parser("benchmark", help="run the (noise x filter) grid")
    b.add_argument("config", nargs="?", default=None, help="key=value config file")
    b.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config line, repeatable")
    b.add_argument("--out", default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--metric-mode", default=None, choices=("float", "8bit"))

    n = sub.add_parser("noise", help="add noise to an image")
    n.add_argument("input")
    n.add_argument("--out", required=True)
    n.add_argument("--spec", default=None,
                   help="noise spec, e.g. 'family=gaussian,sigma=0.1'")
    n.add_argument("--sigma", type=float, default=None, help="shortcut for gaussian noise")
    n.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sta", help="receptive-field estimation experiment")
    s.add_argument("--out", required=True)
    s.add_argument("--family", default="gaussian_white", choices=MOVIE_FAMILIES)
    s.add_argument("--frames", type=int, default=20000)
    s.add_argument("--frame-dt", type=float, default=10.0)
    s.add_argument("--contrast", type=float, default=4.0)
    s.add_argument("--bins", type=int, default=8)
    s.add_argument("--grid", type=int, default=10)
    s.add_argument("--g-gap", type=float, default=DEFAULT_PARAMS.g_gap)
    s.add_argument("--seed", type=int, default=42)

    f = sub.add_parser("profile", help="before/after residual mixture fits")
    f.add_argument("--out", required=True)
    f.add_argument("--corpus", default="texture",
                   help="'synthetic', 'texture', or a directory of images")
    f.add_argument("--spec", default="family=blind,include_gaussian=false,target_psnr=12")
    f.add_argument("--seed", type=int, default=7)
    f.add_argument("--margin", type=int, default=3)
    f.add_argument("--g-gap", type=float, default=DEFAULT_PARAMS.g_gap)

    i = sub.add_parser("impulse", help="inspect the effective spatial kernel")
    i.add_argument("--out", default=None, help="directory for kernel CSV/PGM")
    i.add_argument("--g-gap", type=float, default=DEFAULT_PARAMS.g_gap)
    i.add_argument("--radius", type=int, default=5)
    return p


def _apply_named_filter(img, name, g_gap, sigma, ksize):
    if name == "pr":
        return pr_denoise(img, g_gap=g_gap)
    if name == "gaussian":
        return classic_filters.gaussian_filter(img, sigma, ksize or 9)
    if name in ("average", "mean", "adaptive_median"):
        return classic_filters.FILTERS[name](img)
    return classic_filters.FILTERS[name](img, ksize=ksize or 3)


def cmd_denoise(args) -> int:
    img = read_image(args.input)
    out = _apply_named_filter(img, args.filter, args.g_gap, args.sigma, args.ksize)
    write_image(args.out, out)
    if os.path.splitext(args.out)[1].lower() != ".prf1":
        write_sidecar(sidecar_path(args.out), out)
    if args.ref:
        ref = read_image(args.ref)
        print(
            f"input: PSNR={psnr(ref, img, args.metric_mode)!r} dB "
            f"SSIM={ssim(ref, img, args.metric_mode)!r}",
            file=sys.stderr,
        )
        print(
            f"output: PSNR={psnr(ref, out, args.metric_mode)!r} dB "
            f"SSIM={ssim(ref, out, args.metric_mode)!r}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = bench.default_config()
    if args.config is not None:
        if not os.path.exists(args.config):
            raise ImageIOError(f"{args.config}: no such file")
        with open(args.config) as fh:
            cfg = bench.parse_config(fh.read(), base=cfg)
    if args.set:
        cfg = bench.parse_config("\n".join(args.set), base=cfg)
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.metric_mode is not None:
        cfg.metric_mode = args.metric_mode
    cfg.validate()
    # full effective config, so a report is reproducible from its log alone
    print(cfg.describe())
    report = bench.run_benchmark(cfg)
    print(f"report: {report}")
    return EXIT_OK


def cmd_noise(args) -> int:
    img = read_image(args.input)
    if (args.spec is None) == (args.sigma is None):
        raise ValueError("give exactly one of --spec or --sigma")
    spec = NoiseSpec.gaussian(args.sigma) if args.sigma is not None \
        else NoiseSpec.from_config(args.spec)
    noisy = add_noise(img, spec, args.seed)
    write_image(args.out, noisy)
    if os.path.splitext(args.out)[1].lower() != ".prf1":
        write_sidecar(sidecar_path(args.out), noisy)
    print(f"noisy PSNR vs input: {psnr(img, noisy)!r} dB", file=sys.stderr)
    return EXIT_OK


def cmd_sta(args) -> int:
    cfg = StaConfig(
        height=args.grid, width=args.grid, family=args.family,
        n_frames=args.frames, frame_dt=args.frame_dt, contrast=args.contrast,
        seed=args.seed, bins=args.bins,
    )
    params = DEFAULT_PARAMS.with_g_gap(args.g_gap)
    result, info = run_sta(cfg, params)
    write_sta_outputs(args.out, result, info)
    fit = info.get("gaussian_fit")
    sig = f"{fit.sigma:.4f}" if fit else "n/a"
    print(
        f"n_spikes={result.n_spikes} latency={result.selected_lag:.1f} ms "
        f"sigma={sig} cells (trace std {info['trace_std_mv']:.2f} mV)"
    )
    print(f"outputs in {args.out}")
    return EXIT_OK


def cmd_profile(args) -> int:
    spec = NoiseSpec.from_config(args.spec)
    images = bench.load_corpus(args.corpus)
    params = DEFAULT_PARAMS.with_g_gap(args.g_gap)
    report = regularization_report(
        images, spec, params, seed0=args.seed, boundary_margin=args.margin
    )
    write_profile_outputs(args.out, report)
    print(f"components before: {dict(sorted(report.counts_before.items()))}")
    print(f"components after:  {dict(sorted(report.counts_after.items()))}")
    print(
        f"after==1 on {report.frac_after_one:.0%}, "
        f"after<=before on {report.frac_after_le_before:.0%} "
        f"of {report.n_used} images"
    )
    return EXIT_OK


def cmd_impulse(args) -> int:
    kern = impulse_kernel(g_gap=args.g_gap, radius=args.radius)
    fit = fit_gaussian_to_map(kern)
    n = kern.shape[0]
    yy, xx = np.mgrid[0:n, 0:n] - args.radius
    cheb = np.maximum(np.abs(yy), np.abs(xx))
    tail_k = kern[cheb >= 2].sum()
    tail_g = fit.surface(kern.shape)[cheb >= 2].sum()
    print(
        f"g_gap={args.g_gap} nS: center={float(kern[args.radius, args.radius])!r}, "
        f"gaussian fit sigma={fit.sigma:.4f} cells"
    )
    print(f"tail mass (chebyshev radius >= 2): kernel={tail_k:.4f} fit={tail_g:.4f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        np.savetxt(os.path.join(args.out, "kernel.csv"), kern, delimiter=",")
        norm = kern / kern.max()
        write_image(os.path.join(args.out, "kernel.pgm"), norm)
        print(f"outputs in {args.out}")
    return EXIT_OK


_HANDLERS = {
    "denoise": cmd_denoise,
    "benchmark": cmd_benchmark,
    "noise": cmd_noise,
    "sta": cmd_sta,
    "profile": cmd_profile,
    "impulse": cmd_impulse,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.cmd](args)
    except ImageIOError as exc:
        print(f"prf: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"prf: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CalibrationError, NoSpikeletsError, DegenerateSamplesError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"prf: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        print(f"prf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
