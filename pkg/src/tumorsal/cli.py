"""Command-line interface.

Subcommands: estimate, exists, eval, phantom, tune, maps. Exit codes: 0 on
success (for ``exists``: 0 lesion / 1 none), 2 on usage errors, 3 on
processing errors with a one-line diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .connectedness import geodesic_background, propagate
from .image import GrayImage, load_image, save_image, save_mask
from .phantom import generate_phantom, load_phantom_spec
from .pipeline import PipelineConfig, estimate, evaluate_dataset, tune_parameters
from .priors import (
    existence_features,
    foreground_costs,
    has_tumor,
    reference_point,
    weighted_map,
)
from .superpixel import oversegment, save_labels_pgm

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tumorsal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="write the saliency map for one image")
    p.add_argument("image")
    p.add_argument("--out", default=None, help="output map path (default <stem>_saliency.png)")
    p.add_argument("--dump-maps", default=None, metavar="DIR", help="also export debug maps")
    p.add_argument("--config", default=None)

    p = sub.add_parser("exists", help="lesion existence check (exit 0 lesion / 1 none)")
    p.add_argument("image")
    p.add_argument("--config", default=None)

    p = sub.add_parser("eval", help="evaluate saliency over an image/mask directory")
    p.add_argument("directory")
    p.add_argument("--report", default=None, help="write the evaluation report JSON here")
    p.add_argument("--pr", default=None, help="write the 256-row P-R curve CSV here")
    p.add_argument("--config", default=None)

    p = sub.add_parser("phantom", help="render a synthetic phantom from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out-img", required=True)
    p.add_argument("--out-mask", required=True)

    p = sub.add_parser("tune", help="grid-search alpha/beta/gamma on a directory")
    p.add_argument("directory")
    p.add_argument("--steps", default="40,10,2", help="comma-separated stage steps")
    p.add_argument("--config", default=None)

    p = sub.add_parser("maps", help="export intermediate maps for one image")
    p.add_argument("image")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--config", default=None)
    return parser


def _save_region_raster(values: np.ndarray, labels: np.ndarray, path: Path) -> None:
    save_image(GrayImage(values[labels]), path)


def _cmd_estimate(args) -> int:
    cfg = PipelineConfig.load(args.config)
    img = load_image(args.image)
    result = estimate(img, cfg)
    out = Path(args.out) if args.out else Path(args.image).with_name(
        Path(args.image).stem + "_saliency.png"
    )
    save_image(result.image, out)
    print(f"{args.image}: verdict={'tumor' if result.verdict else 'none'} map={out}")
    if args.dump_maps:
        dump = Path(args.dump_maps)
        dump.mkdir(parents=True, exist_ok=True)
        stem = Path(args.image).stem
        save_image(GrayImage(result.diagnostics.priors.weighted), dump / f"{stem}_weighted.pgm")
        if result.verdict:
            graph = result.diagnostics.graph
            conn = result.diagnostics.connectedness
            _save_region_raster(conn.truth, graph.labels, dump / f"{stem}_truth.pgm")
            _save_region_raster(conn.confidence, graph.labels, dump / f"{stem}_confidence.pgm")
            _save_region_raster(
                geodesic_background(graph), graph.labels, dump / f"{stem}_geodesic.pgm"
            )
            _save_region_raster(
                result.diagnostics.priors.foreground, graph.labels, dump / f"{stem}_foreground.pgm"
            )
            save_labels_pgm(graph, dump / f"{stem}_regions.pgm")
    return 0


def _cmd_exists(args) -> int:
    cfg = PipelineConfig.load(args.config)
    img = load_image(args.image)
    features = existence_features(weighted_map(img, reference_point(img)))
    verdict = has_tumor(features, cfg.existence_threshold)
    print(f"{args.image},{features.csv_fields()},{'tumor' if verdict else 'none'}")
    return 0 if verdict else 1


def _cmd_eval(args) -> int:
    cfg = PipelineConfig.load(args.config)
    report = evaluate_dataset(args.directory, cfg)
    print(
        f"precision={report.precision:.6f} recall={report.recall:.6f} "
        f"f_measure={report.f_measure:.6f} mae={report.mae:.6f}"
    )
    if args.report:
        Path(args.report).write_text(report.to_json())
    if args.pr:
        Path(args.pr).write_text(report.pr_csv())
    return 0


def _cmd_phantom(args) -> int:
    spec = load_phantom_spec(args.spec)
    img, mask = generate_phantom(spec)
    save_image(img, args.out_img)
    save_mask(mask, args.out_mask)
    print(f"wrote {args.out_img} and {args.out_mask}")
    return 0


def _cmd_tune(args) -> int:
    cfg = PipelineConfig.load(args.config)
    steps = tuple(float(s) for s in args.steps.split(","))
    alpha, beta, gamma = tune_parameters(args.directory, cfg, stage_steps=steps)
    print(f"alpha={alpha:g} beta={beta:g} gamma={gamma:g}")
    return 0


def _cmd_maps(args) -> int:
    cfg = PipelineConfig.load(args.config)
    img = load_image(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem

    rp = reference_point(img)
    wm = weighted_map(img, rp)
    save_image(GrayImage(wm), out_dir / f"{stem}_weighted.pgm")

    graph = oversegment(img, cfg.quickshift)
    conn = propagate(graph)
    _save_region_raster(conn.truth, graph.labels, out_dir / f"{stem}_truth.pgm")
    _save_region_raster(conn.confidence, graph.labels, out_dir / f"{stem}_confidence.pgm")
    _save_region_raster(geodesic_background(graph), graph.labels, out_dir / f"{stem}_geodesic.pgm")
    _save_region_raster(foreground_costs(graph, wm), graph.labels, out_dir / f"{stem}_foreground.pgm")
    save_labels_pgm(graph, out_dir / f"{stem}_regions.pgm")
    print(f"wrote 6 maps to {out_dir}")
    return 0


_HANDLERS = {
    "estimate": _cmd_estimate,
    "exists": _cmd_exists,
    "eval": _cmd_eval,
    "phantom": _cmd_phantom,
    "tune": _cmd_tune,
    "maps": _cmd_maps,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
