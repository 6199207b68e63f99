"""Command-line entry point: ``graphbf <subcommand> ...``.

Report lines are ``key=value`` pairs on stdout; images and CSV files carry
the rest. Errors print a single ``graphbf: error: ...`` line on stderr and
exit with status 1 (2 for bad usage).
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .engine import MAX_CASCADE_DEGREE, apply_plan, iterate_bf, iterate_bf_reweighted, make_plan
from .graph import GraphParams, build_graph, normalize_signal
from .imageio import (
    ImageGrid,
    NoiseSpec,
    add_white_noise,
    crop,
    load_image,
    save_image,
    sigma_for_snr,
    snr_db,
)
from .kernels import PolyFilter, SpectralKernel, fit_chebyshev, poly_sup_error, roots_to_coeffs
from .kernelspec import load_kernel
from .oracle import MAX_ORACLE_NODES, eigendecompose, energy_compaction, gft
from .recipes import (
    format_db,
    recipe_denoise,
    recipe_segment_preproc,
    response_table,
    write_response_csv,
)


class UsageError(Exception):
    pass


def _crop_arg(value: str) -> tuple[int, int, int, int]:
    try:
        parts = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"crop must be x,y,w,h integers, got {value!r}") from None
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"crop must have four fields x,y,w,h, got {value!r}")
    return parts


def _add_graph_flags(p: argparse.ArgumentParser, sigma_r: float = 0.035) -> None:
    g = p.add_argument_group("graph")
    g.add_argument("--sigma-d", type=float, default=2.0, help="spatial scale in pixels (default: %(default)s)")
    g.add_argument("--sigma-r", type=float, default=sigma_r, help="range scale in intensity units (default: %(default)s)")
    g.add_argument("--radius", type=int, default=None, help="window radius in pixels (default: ceil(2*sigma_d))")
    g.add_argument("--graph", choices=("bilateral", "gaussian"), default="bilateral",
                   help="edge weights: bilateral or spatial-only gaussian (default: %(default)s)")


def _add_crop_flag(p: argparse.ArgumentParser, default=None) -> None:
    p.add_argument("--crop", type=_crop_arg, default=default, metavar="X,Y,W,H",
                   help="process only this block of the input (default: %(default)s)")


def _add_noise_flags(p: argparse.ArgumentParser, snr_default: float | None) -> None:
    p.add_argument("--seed", type=int, default=0, help="noise RNG seed (default: %(default)s)")
    level = p.add_mutually_exclusive_group()
    level.add_argument("--snr", type=float, default=snr_default, help="target SNR in dB (default: %(default)s)")
    level.add_argument("--sigma", type=float, default=None, help="noise standard deviation; overrides --snr (default: %(default)s)")


def _add_kernel_flags(p: argparse.ArgumentParser, kernel_default: str | None) -> None:
    p.add_argument("--kernel", default=kernel_default, required=kernel_default is None,
                   help="kernel file or inline 'kind:key=value,...' (default: %(default)s)")
    p.add_argument("--degree", type=int, default=None,
                   help="polynomial degree for non-polynomial kernels (default: %(default)s)")
    p.add_argument("--strategy", choices=("cascade", "cheb"), default="cheb",
                   help="pixel-domain application (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphbf",
        description="Spectral filters on the bilateral-filter graph, applied as iterated bilateral passes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("bf", help="one bilateral filter pass")
    p.add_argument("input")
    p.add_argument("output")
    _add_graph_flags(p)
    _add_crop_flag(p)

    p = sub.add_parser("iterate", help="k bilateral passes (fixed weights unless --reweight)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--k", type=int, default=20, help="number of passes (default: %(default)s)")
    p.add_argument("--reweight", action="store_true",
                   help="rebuild the graph from each intermediate result (baseline only; default: off)")
    _add_graph_flags(p)
    _add_crop_flag(p)

    p = sub.add_parser("design", help="fit a kernel and emit its response table")
    _add_kernel_flags(p, None)
    p.add_argument("--emit-response", default=None, metavar="CSV",
                   help="write lambda,h,p rows at 1001 grid points (default: %(default)s)")

    p = sub.add_parser("apply", help="apply a spectral kernel as a polynomial filter")
    p.add_argument("input")
    p.add_argument("output")
    _add_kernel_flags(p, None)
    _add_graph_flags(p)
    _add_crop_flag(p)

    p = sub.add_parser("denoise", help="noise an image and compare one BF pass with the spectral denoiser")
    p.add_argument("input", help="clean image")
    p.add_argument("outdir", help="directory for noisy/bf/proposed images")
    _add_noise_flags(p, 20.0)
    p.add_argument("--kernel", default="denoise", help="denoising kernel (default: %(default)s)")
    p.add_argument("--degree", type=int, default=5, help="Chebyshev degree (default: %(default)s)")
    p.add_argument("--format", choices=("png", "pgm"), default="png", help="output image format (default: %(default)s)")
    _add_graph_flags(p)
    _add_crop_flag(p)

    p = sub.add_parser("segment-prep", help="iterated BF versus a sharp low-pass spectral filter")
    p.add_argument("input")
    p.add_argument("outdir", help="directory for images and response CSVs")
    p.add_argument("--k", type=int, default=20, help="BF iterations (default: %(default)s)")
    p.add_argument("--degree", type=int, default=20, help="Chebyshev degree (default: %(default)s)")
    p.add_argument("--cutoff", type=float, default=0.2, help="low-pass cutoff frequency (default: %(default)s)")
    p.add_argument("--steepness", type=float, default=50.0, help="logistic steepness (default: %(default)s)")
    p.add_argument("--format", choices=("png", "pgm"), default="png", help="output image format (default: %(default)s)")
    _add_graph_flags(p, sigma_r=0.05)
    _add_crop_flag(p)

    p = sub.add_parser("spectrum", help="dense graph spectrum of a small block")
    p.add_argument("input")
    p.add_argument("--crop", type=_crop_arg, default=None, metavar="X,Y,W,H",
                   help="block to analyse (default: top-left 64x64, clipped to the image)")
    p.add_argument("--emit-eigs", default=None, metavar="CSV", help="write index,lambda rows (default: %(default)s)")
    p.add_argument("--emit-compaction", default=None, metavar="CSV", help="write k,E_k rows (default: %(default)s)")
    p.add_argument("--signal-energy", action="store_true",
                   help="add the per-component energy of the normalized signal to the eigenvalue CSV (default: off)")
    _add_graph_flags(p)

    p = sub.add_parser("snr", help="print SNR in dB of TEST against CLEAN")
    p.add_argument("clean")
    p.add_argument("test")

    p = sub.add_parser("noise", help="add white Gaussian noise")
    p.add_argument("input")
    p.add_argument("output")
    _add_noise_flags(p, None)
    _add_crop_flag(p)
    return parser


def _graph_params(args) -> GraphParams:
    return GraphParams(sigma_d=args.sigma_d, sigma_r=args.sigma_r, radius=args.radius, mode=args.graph)


def _load(args) -> ImageGrid:
    img = load_image(args.input)
    if getattr(args, "crop", None) is not None:
        img = crop(img, *args.crop)
    return img


def realize_filter(kernel: SpectralKernel, degree: int | None, strategy: str) -> PolyFilter:
    """Polynomial filter for ``kernel`` under the requested application strategy."""
    if strategy == "cascade":
        if kernel.poly is None or kernel.poly.form != "roots":
            raise UsageError(
                f"--strategy cascade needs a kernel given by roots; {kernel.kind!r} is not (use --strategy cheb)"
            )
        if degree is not None and degree != kernel.poly.degree:
            raise UsageError(f"--degree {degree} does not match the kernel's degree {kernel.poly.degree}")
        if kernel.poly.degree > MAX_CASCADE_DEGREE:
            raise UsageError(f"cascade degree is capped at {MAX_CASCADE_DEGREE}")
        return kernel.poly
    if kernel.poly is not None and (degree is None or degree >= kernel.poly.degree):
        return roots_to_coeffs(kernel.poly)
    if degree is None:
        raise UsageError(f"--degree is required for the non-polynomial kernel {kernel.kind!r}")
    if degree < 0:
        raise UsageError("--degree must be >= 0")
    return fit_chebyshev(kernel, degree)


def _cmd_bf(args) -> None:
    img = _load(args)
    graph = build_graph(img, _graph_params(args))
    save_image(ImageGrid.from_signal(iterate_bf(graph, img.signal(), 1), img.shape), args.output)


def _cmd_iterate(args) -> None:
    if args.k < 0:
        raise UsageError("--k must be >= 0")
    img = _load(args)
    params = _graph_params(args)
    if args.reweight:
        out = iterate_bf_reweighted(img, params, args.k)
    else:
        out = ImageGrid.from_signal(iterate_bf(build_graph(img, params), img.signal(), args.k), img.shape)
    save_image(out, args.output)


def _cmd_design(args) -> None:
    kernel = load_kernel(args.kernel)
    filt = realize_filter(kernel, args.degree, args.strategy)
    if args.emit_response:
        write_response_csv(args.emit_response, response_table(kernel, filt))
    print(f"kind={kernel.kind} degree={filt.degree} sup_error={poly_sup_error(kernel, filt):.6g}")


def _cmd_apply(args) -> None:
    kernel = load_kernel(args.kernel)
    filt = realize_filter(kernel, args.degree, args.strategy)
    img = _load(args)
    graph = build_graph(img, _graph_params(args))
    if args.strategy == "cascade":
        plan = make_plan(graph, filt, "cascade")
    else:
        plan = make_plan(graph, filt, "chebyshev")
    save_image(ImageGrid.from_signal(apply_plan(plan, img.signal()), img.shape), args.output)


def _cmd_denoise(args) -> None:
    clean = _load(args)
    kernel = load_kernel(args.kernel)
    if args.degree < 0:
        raise UsageError("--degree must be >= 0")
    if args.sigma is None and args.snr is None:
        raise UsageError("give --snr or --sigma")
    os.makedirs(args.outdir, exist_ok=True)
    result = recipe_denoise(
        clean,
        target_snr=args.snr,
        sigma=args.sigma,
        seed=args.seed,
        params=_graph_params(args),
        kernel=kernel,
        degree=args.degree,
    )
    for name in ("clean", "noisy", "bf", "proposed"):
        save_image(getattr(result, name), os.path.join(args.outdir, f"{name}.{args.format}"))
    print(result.report())


def _cmd_segment(args) -> None:
    img = _load(args)
    os.makedirs(args.outdir, exist_ok=True)
    result = recipe_segment_preproc(
        img,
        params=_graph_params(args),
        k=args.k,
        degree=args.degree,
        cutoff=args.cutoff,
        steepness=args.steepness,
    )
    ext = args.format
    save_image(result.reweighted, os.path.join(args.outdir, f"iterated_reweighted.{ext}"))
    save_image(result.fixed, os.path.join(args.outdir, f"iterated_fixed.{ext}"))
    save_image(result.proposed, os.path.join(args.outdir, f"proposed.{ext}"))
    write_response_csv(os.path.join(args.outdir, "response_iterated.csv"), result.iterated_response)
    write_response_csv(os.path.join(args.outdir, "response_proposed.csv"), result.proposed_response)
    print(result.report())


def _write_rows(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, (int, np.integer)) else f"{v:.12g}" for v in row])


def _cmd_spectrum(args) -> None:
    img = load_image(args.input)
    if args.crop is None:
        img = crop(img, 0, 0, min(64, img.width), min(64, img.height))
    else:
        img = crop(img, *args.crop)
    if img.width * img.height > MAX_ORACLE_NODES:
        raise UsageError(f"block has {img.width * img.height} pixels; the dense spectrum is capped at {MAX_ORACLE_NODES}")
    graph = build_graph(img, _graph_params(args))
    spectrum = eigendecompose(graph)
    xhat = normalize_signal(graph, img.signal())
    lam = spectrum.eigenvalues
    if args.emit_eigs:
        if args.signal_energy:
            coeffs = gft(spectrum, xhat)
            _write_rows(args.emit_eigs, ["index", "lambda", "energy"],
                        zip(range(1, len(lam) + 1), lam, coeffs * coeffs))
        else:
            _write_rows(args.emit_eigs, ["index", "lambda"], zip(range(1, len(lam) + 1), lam))
    curve = energy_compaction(spectrum, xhat)
    if args.emit_compaction:
        _write_rows(args.emit_compaction, ["k", "E_k"], zip(range(1, len(curve) + 1), curve))
    parts = [f"nodes={graph.n}", f"lambda_min={lam[0]:.6g}", f"lambda_max={lam[-1]:.6g}"]
    for k in (1, 2, 4, 8, 16, 32):
        if k <= len(curve):
            parts.append(f"E{k}={curve[k - 1]:.6f}")
    if args.signal_energy:
        parts.append(f"energy={float(np.dot(xhat, xhat)):.6g}")
    print(" ".join(parts))


def _cmd_snr(args) -> None:
    print(format_db(snr_db(load_image(args.clean), load_image(args.test))))


def _cmd_noise(args) -> None:
    img = _load(args)
    if args.sigma is not None:
        sigma = args.sigma
    elif args.snr is not None:
        sigma = sigma_for_snr(img, args.snr)
    else:
        raise UsageError("give --snr or --sigma")
    noisy = add_white_noise(img, NoiseSpec(sigma, args.seed))
    save_image(noisy, args.output)
    print(f"sigma={sigma:.6g} snr={format_db(snr_db(img, noisy))}")


_COMMANDS = {
    "bf": _cmd_bf,
    "iterate": _cmd_iterate,
    "design": _cmd_design,
    "apply": _cmd_apply,
    "denoise": _cmd_denoise,
    "segment-prep": _cmd_segment,
    "spectrum": _cmd_spectrum,
    "snr": _cmd_snr,
    "noise": _cmd_noise,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"graphbf: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
