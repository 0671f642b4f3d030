"""Command line frontend.

Subcommands cover the pipeline stages: preprocess (load, normalize,
resize), extract (feature maps to FMAP files), rank (saliency-guided
selection), ccmatrix (pairwise saliency CC), metrics and roc (classifier
evaluation). Every subcommand validates its inputs fully before writing
any output. Exit codes: 0 success, 2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import PipelineConfig, load_config
from .engine import extract_maps
from .evaluation import (
    LABELS,
    class_metrics,
    read_predictions,
    roc_auc,
    roc_band,
)
from .features import FEATURE_INDEX, GLCM_FEATURES
from .fmap import read_fmap, write_fmap
from .imaging import load_image, normalize_levels, resize_bspline, save_png
from .similarity import rank_rfms, sm_cc_matrix

__all__ = ["main"]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _load_cfg(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return PipelineConfig()


def _cmd_preprocess(args) -> int:
    cfg = _load_cfg(args)
    prepared = []
    for path in args.inputs:
        img = load_image(path)
        out = resize_bspline(normalize_levels(img), cfg.resize_w, cfg.resize_h)
        prepared.append((Path(path).stem, out))
    os.makedirs(args.out, exist_ok=True)
    for stem, img in prepared:
        save_png(img, Path(args.out) / f"{stem}.png")
    return 0


def _cmd_extract(args) -> int:
    cfg = _load_cfg(args)
    threads = args.threads if args.threads else cfg.threads
    img = load_image(args.image)
    stack = extract_maps(img, cfg.rfm_config(), threads=threads)
    os.makedirs(args.out, exist_ok=True)
    for name, fmap in stack.items():
        write_fmap(Path(args.out) / f"{FEATURE_INDEX[name]:02d}_{name}.fmap", name, fmap)
    return 0


def _read_map_dir(path) -> dict:
    """All FMAP files of one directory as {feature name: FloatMap}."""
    files = sorted(Path(path).glob("*.fmap"))
    if not files:
        raise ValueError(f"{path}: no .fmap files")
    maps = {}
    for f in files:
        name, fmap = read_fmap(f)
        if name in maps:
            raise ValueError(f"{f}: duplicate map name {name!r}")
        maps[name] = fmap
    return maps


def _cmd_rank(args) -> int:
    from .engine import FeatureMapStack
    from .features import FEATURE_NAMES

    sm_files = sorted(Path(args.sms).glob("*.fmap"))
    if not sm_files:
        raise ValueError(f"{args.sms}: no .fmap files")
    stacks = []
    sms = []
    for sm_file in sm_files:
        stem = sm_file.stem
        map_dir = Path(args.maps) / stem
        if not map_dir.is_dir():
            raise ValueError(f"{map_dir}: missing feature map directory for {stem!r}")
        maps = _read_map_dir(map_dir)
        missing = [n for n in FEATURE_NAMES if n not in maps]
        if missing:
            raise ValueError(f"{map_dir}: missing feature map {missing[0]!r}")
        data = np.stack([maps[n].values for n in FEATURE_NAMES])
        stacks.append(FeatureMapStack(names=FEATURE_NAMES, data=data))
        sms.append(read_fmap(sm_file)[1])

    cfg = _load_cfg(args)
    ranking = rank_rfms(stacks, sms, bins=cfg.nmi_bins)
    lines = ["feature,category,mean_cc,mean_nmi,selected"]
    for name in FEATURE_NAMES:
        cat = "glcm" if name in GLCM_FEATURES else "glrlm"
        sel = int(name in (ranking.selected_glcm, ranking.selected_glrlm))
        lines.append(
            f"{name},{cat},{_fmt(ranking.mean_cc[name])},{_fmt(ranking.mean_nmi[name])},{sel}"
        )
    _write_text(args.out, lines)
    return 0


def _read_labels_csv(path) -> dict:
    import csv as _csv

    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            rows = list(_csv.reader(fh))
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from None
    if not rows or tuple(rows[0]) != ("id", "cohort"):
        raise ValueError(f"{path}: expected header id,cohort")
    out = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields")
        sid, cohort = row
        if cohort not in LABELS:
            raise ValueError(f"{path}:{lineno}: unknown cohort {cohort!r}")
        if sid in out:
            raise ValueError(f"{path}:{lineno}: duplicate id {sid!r}")
        out[sid] = cohort
    if not out:
        raise ValueError(f"{path}: no label rows")
    return out


def _cmd_ccmatrix(args) -> int:
    labels = _read_labels_csv(args.labels)
    sm_files = sorted(Path(args.sms).glob("*.fmap"))
    if not sm_files:
        raise ValueError(f"{args.sms}: no .fmap files")
    ids = []
    sms = []
    for f in sm_files:
        sid = f.stem
        if sid not in labels:
            raise ValueError(f"{args.labels}: no cohort for {sid!r}")
        ids.append(sid)
        sms.append(read_fmap(f)[1])
    matrix = sm_cc_matrix(sms, [labels[i] for i in ids])

    lines = ["id," + ",".join(ids)]
    for i, sid in enumerate(ids):
        lines.append(sid + "," + ",".join(_fmt(v) for v in matrix.entries[i]))
    _write_text(args.out, lines)

    cohort_path = Path(args.out).with_name(Path(args.out).stem + "_cohorts.csv")
    lines = ["cohort_a,cohort_b,mean_cc"]
    for (a, b), mean in matrix.pair_means.items():
        lines.append(f"{a},{b},{_fmt(mean)}")
    _write_text(cohort_path, lines)
    return 0


def _cmd_metrics(args) -> int:
    psets = [read_predictions(p) for p in args.pred]
    per_class = {c: {"sensitivity": [], "specificity": [], "accuracy": [], "auc": []} for c in LABELS}
    for pset in psets:
        m = class_metrics(pset)
        for c in LABELS:
            per_class[c]["sensitivity"].append(m[c].sensitivity)
            per_class[c]["specificity"].append(m[c].specificity)
            per_class[c]["accuracy"].append(m[c].accuracy)
            per_class[c]["auc"].append(m[c].auc)

    cols = ("sensitivity", "specificity", "accuracy", "auc")
    header = "class," + ",".join(f"{c}_mean,{c}_std" for c in cols)
    lines = [header]
    for c in LABELS:
        vals = []
        for metric in cols:
            arr = np.array(per_class[c][metric])
            vals.append(_fmt(arr.mean()))
            vals.append(_fmt(arr.std(ddof=1) if arr.size > 1 else 0.0))
        lines.append(c + "," + ",".join(vals))
    _write_text(args.out, lines)
    return 0


def _cmd_roc(args) -> int:
    psets = [read_predictions(p) for p in args.pred]
    power = args.power_scale
    if power is not None and power <= 0:
        raise ValueError("power scale must be positive")

    rows = []
    for c in LABELS:
        curves = [roc_auc(p, c) for p in psets]
        if len(curves) >= 2:
            band = roc_band(curves)
            fpr = band.fpr
            mean, std = band.tpr_mean, band.tpr_std
            lo, hi = band.tpr_lo, band.tpr_hi
        else:
            fpr = np.linspace(0.0, 1.0, 101)
            xs = np.array([q[0] for q in curves[0].points])
            ys = np.array([q[1] for q in curves[0].points])
            uf, idx = np.unique(xs, return_index=True)
            mean = np.interp(fpr, uf, np.maximum.reduceat(ys, idx))
            std = np.zeros_like(mean)
            lo = hi = mean
        if power is not None:
            mean, lo, hi = mean**power, lo**power, hi**power
        for i in range(fpr.size):
            rows.append(
                f"{c},{_fmt(fpr[i])},{_fmt(mean[i])},{_fmt(std[i])},{_fmt(lo[i])},{_fmt(hi[i])}"
            )
    _write_text(args.out, ["class,fpr,tpr_mean,tpr_std,tpr_lo,tpr_hi"] + rows)
    return 0


def _write_text(path, lines) -> None:
    parent = Path(path).parent
    if parent and not parent.exists():
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rfmap", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="normalize and resize images to PNG")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_preprocess)

    p = sub.add_parser("extract", help="write feature maps as FMAP files")
    p.add_argument("image")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--threads", type=int, default=0)
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("rank", help="rank feature maps against saliency maps")
    p.add_argument("--maps", required=True)
    p.add_argument("--sms", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_rank)

    p = sub.add_parser("ccmatrix", help="pairwise saliency map CC matrix")
    p.add_argument("--sms", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ccmatrix)

    p = sub.add_parser("metrics", help="per-class metrics table from predictions")
    p.add_argument("--pred", action="append", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("roc", help="ROC band data from prediction sets")
    p.add_argument("--pred", action="append", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--power-scale", type=float, default=None)
    p.set_defaults(fn=_cmd_roc)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
