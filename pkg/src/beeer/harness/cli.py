"""Command line entry point: ``beeer <subcommand> ...``.

Exit status: 0 success, 1 usage or config error, 2 data error,
3 evaluation finished with skipped scenes.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from ..core import ImageSize, make_rng, read_label_png, read_mask_png, read_rgb_png, write_label_png
from ..error_maps import ErrorMaps, boundary_explicit_error, mask_explicit_error
from ..exceptions import BeeerError, ConfigError, DataError, SizeMismatchError
from ..felzenszwalb import FelzParams, felzenszwalb
from ..perturb import perturb
from . import selftest
from .bundle import PredictionBundle, read_bundle, write_bundle
from .config import load_config_file, split_config
from .pipeline import bundle_from_labels, refine_planes, evaluate_dataset, write_csv, write_markdown
from .render import render_overlay, save_error_viz
from .scene import Scene

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3

log = logging.getLogger("beeer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_globals(p, suppress=False):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="JSON config file (RunConfig / PerturbConfig keys)")
    p.add_argument("--seed", type=int, default=d(None), help="random seed (overrides config)")
    p.add_argument("--workers", type=int, default=d(None), help="parallel workers (overrides config)")
    p.add_argument("--verbose", "-v", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="beeer", description=__doc__.splitlines()[0])
    _add_globals(parser)
    common = _Parser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", parents=[common], help="label PNG -> center/offset bundle")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=float, default=None, help="center Gaussian sigma in pixels")

    p = sub.add_parser("decode", parents=[common], help="bundle -> refined label PNG")
    p.add_argument("--bundle", required=True)
    p.add_argument("--fg", help="optional external foreground mask PNG")
    p.add_argument("--out", required=True)

    p = sub.add_parser("perturb", parents=[common], help="synthesize a flawed initial segmentation")
    p.add_argument("--gt", required=True)
    p.add_argument("--rgb", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("errors", parents=[common], help="explicit error maps between two label PNGs")
    p.add_argument("--init", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--kind", choices=["boundary", "mask"], default="boundary")
    p.add_argument("--out", help="bundle holding the error plane")
    p.add_argument("--viz", help="RGBA PNG: TP green, FP red, FN blue, TN transparent")

    p = sub.add_parser("segment-felz", parents=[common], help="graph-based segmentation of an RGB PNG")
    p.add_argument("--rgb", required=True)
    p.add_argument("--k", type=float, default=FelzParams.k)
    p.add_argument("--min-size", type=int, default=FelzParams.min_size)
    p.add_argument("--sigma", type=float, default=FelzParams.smoothing_sigma)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", parents=[common], help="score predictions against a scene directory")
    p.add_argument("--pred", required=True, help="directory of label PNGs or bundles")
    p.add_argument("--gt", required=True, help="scene directory")
    p.add_argument("--out", required=True, help="CSV report")
    p.add_argument("--md", help="optional Markdown report")

    p = sub.add_parser("render", parents=[common], help="overlay labels (and errors) on RGB")
    p.add_argument("--rgb", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--gt", help="ground-truth labels; draws boundary errors of --labels against it")
    p.add_argument("--errors", help="bundle with an error plane to draw instead")
    p.add_argument("--out", required=True)

    sub.add_parser("selftest", parents=[common], help="run built-in consistency checks")
    return parser


def _configs(args):
    data = load_config_file(args.config) if args.config else {}
    run_cfg, pert_cfg = split_config(data)
    if args.workers is not None:
        run_cfg = replace(run_cfg, parallel_workers=args.workers)
    if args.seed is not None:
        pert_cfg = replace(pert_cfg, seed=args.seed)
    return run_cfg, pert_cfg


def _cmd_encode(args, run_cfg, _):
    lm = read_label_png(args.labels)
    sigma = args.sigma if args.sigma is not None else run_cfg.center_sigma
    write_bundle(bundle_from_labels(lm, sigma), args.out)
    return EXIT_OK


def _cmd_decode(args, run_cfg, _):
    b = read_bundle(args.bundle)
    fg = read_mask_png(args.fg) if args.fg else None
    if fg is not None and fg.shape != b.size.shape:
        raise DataError(f"mask is {ImageSize.of(fg)}, bundle is {b.size}", args.fg)
    write_label_png(refine_planes(b, fg, run_cfg), args.out)
    return EXIT_OK


def _cmd_perturb(args, _, pert_cfg):
    gt = read_label_png(args.gt)
    rgb = read_rgb_png(args.rgb)
    if gt.shape != rgb.shape[:2]:
        raise DataError("size mismatch with rgb", args.gt)
    write_label_png(perturb(gt, rgb, pert_cfg, make_rng(pert_cfg.seed)), args.out)
    return EXIT_OK


def _boundary_cfg(run_cfg, radius):
    if radius is None:
        return run_cfg.boundary
    return replace(run_cfg.boundary, dilation_radius=radius)


def _cmd_errors(args, run_cfg, _):
    init = read_label_png(args.init)
    gt = read_label_png(args.gt)
    if args.kind == "boundary":
        err = boundary_explicit_error(init, gt, _boundary_cfg(run_cfg, args.radius))
    else:
        err = mask_explicit_error(init, gt)
    if args.out:
        write_bundle(PredictionBundle(ImageSize.of(gt), error=err.stack().astype(np.float32)), args.out)
    if args.viz:
        save_error_viz(err, args.viz)
    n = err.tp.size
    print(f"TP {err.tp.sum()}  TN {err.tn.sum()}  FP {err.fp.sum()}  FN {err.fn.sum()}  ({n} px)")
    return EXIT_OK


def _cmd_felz(args, _, __):
    rgb = read_rgb_png(args.rgb)
    seg = felzenszwalb(rgb, FelzParams(k=args.k, min_size=args.min_size, smoothing_sigma=args.sigma))
    write_label_png(seg, args.out)
    print(f"{int(seg.max())} segments")
    return EXIT_OK


def _cmd_eval(args, run_cfg, _):
    result = evaluate_dataset(args.pred, args.gt, run_cfg)
    write_csv(result, args.out)
    if args.md:
        write_markdown(result, args.md)
    a = result.aggregate
    print(f"{len(result.rows)} images  F_O {a['F_O']:.4f}  F_B {a['F_B']:.4f}  F@.75 {a['F_at_75']:.4f}")
    if result.partial:
        print(f"partial run: {len(result.missing)} scene(s) without prediction, "
              f"{len(result.unmatched_pred)} prediction(s) without ground truth", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_render(args, run_cfg, _):
    rgb = read_rgb_png(args.rgb)
    lm = read_label_png(args.labels)
    scene = Scene(id="render", rgb=rgb, gt=lm)
    err = None
    if args.errors:
        b = read_bundle(args.errors)
        if b.error is None:
            raise DataError("bundle has no error plane", args.errors)
        err = ErrorMaps.from_stack(b.error)
    elif args.gt:
        err = boundary_explicit_error(lm, read_label_png(args.gt), run_cfg.boundary)
    render_overlay(scene, lm, err, args.out)
    return EXIT_OK


def _cmd_selftest(args, _, __):
    return EXIT_OK if selftest.run() else EXIT_DATA


COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "perturb": _cmd_perturb,
    "errors": _cmd_errors,
    "segment-felz": _cmd_felz,
    "eval": _cmd_eval,
    "render": _cmd_render,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run_cfg, pert_cfg = _configs(args)
        return COMMANDS[args.command](args, run_cfg, pert_cfg)
    except ConfigError as exc:
        print(f"beeer: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SizeMismatchError) as exc:
        print(f"beeer: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BeeerError as exc:
        print(f"beeer: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
