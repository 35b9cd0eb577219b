"""Command-line interface.

Exit codes: 0 success, 2 input validation failure, 3 internal invariant
violation.
"""

from __future__ import annotations

import functools
import json
import re
import sys
from pathlib import Path

import click
import numpy as np

from . import pipeline, raster_io, retrieval, synthetic
from .attention import AttentionMap, cam, relevance_filter
from .flow import estimate_flow_blockmatch
from .raster_io import Tensor

EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _guarded(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except Exception as exc:  # noqa: BLE001 - invariant violations
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper


@click.group()
def main():
    """Segmentation annotation generation from weakly labeled videos."""


def _load_config(config_path, sets):
    overrides = {}
    for item in sets:
        key, _, value = item.partition("=")
        if not _:
            raise ValueError(f"--set expects key=value, got {item!r}")
        overrides[key] = json.loads(value)
    return pipeline.PipelineConfig.from_json(config_path, overrides)


def _numbered(directory, pattern):
    rx = re.compile(pattern)
    found = {}
    for p in sorted(Path(directory).iterdir()):
        m = rx.fullmatch(p.name)
        if m:
            found[int(m.group(1))] = p
    return [found[i] for i in sorted(found)]


def _load_scores(path, class_index):
    doc = json.loads(Path(path).read_text())
    frames = doc["frames"]
    scores = []
    for t in range(len(frames)):
        vec = frames[str(t)]
        if not 0 <= class_index < len(vec):
            raise ValueError(f"class index {class_index} out of range")
        scores.append(float(vec[class_index]))
    return scores, doc.get("classes", [])


@main.command()
@click.option("--frames", "frames_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--flow", "flow_dir", type=click.Path(exists=True,
                                                    file_okay=False))
@click.option("--attention", "attention_dir",
              type=click.Path(exists=True, file_okay=False),
              help="Directory of precomputed att_%06d.tnsr maps.")
@click.option("--features", "features_dir",
              type=click.Path(exists=True, file_okay=False),
              help="Directory of feat_%06d.tnsr tensors (h,w,d).")
@click.option("--weights", "weights_path", type=click.Path(exists=True),
              help="Classifier weights weights.tnsr (d,C).")
@click.option("--scores", "scores_path", type=click.Path(exists=True),
              help="scores.json gating frame relevance.")
@click.option("--class-index", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--set", "sets", multiple=True,
              help="Config override, e.g. --set region_size=12.")
@click.option("--allow-estimated-flow", is_flag=True,
              help="Fall back to block matching when .flo files are absent.")
@click.option("--dump-intermediates", is_flag=True)
@click.option("--dump-energy", "energy_path", type=click.Path())
@_guarded
def segment(frames_dir, out_dir, flow_dir, attention_dir, features_dir,
            weights_path, scores_path, class_index, config_path, sets,
            allow_estimated_flow, dump_intermediates, energy_path):
    """Segment a clip of numbered netpbm frames into per-frame masks."""
    config = _load_config(config_path, sets)
    frame_paths = _numbered(frames_dir, r"frame_(\d+)\.(?:ppm|pgm)")
    if not frame_paths:
        raise ValueError(f"no frame_%06d.ppm/.pgm files in {frames_dir}")
    frames = [raster_io.read_netpbm(p) for p in frame_paths]

    if attention_dir:
        att_paths = _numbered(attention_dir, r"att_(\d+)\.tnsr")
        if len(att_paths) != len(frames):
            raise ValueError("attention map count does not match frame count")
        attention = []
        for p in att_paths:
            t = raster_io.read_tensor(p)
            if t.data.ndim != 2:
                raise ValueError(f"{p}: attention tensors must be 2-D")
            attention.append(AttentionMap(t.dims[1], t.dims[0],
                                          np.maximum(t.data, 0.0)))
    elif features_dir and weights_path:
        weights = raster_io.read_tensor(weights_path)
        feat_paths = _numbered(features_dir, r"feat_(\d+)\.tnsr")
        if len(feat_paths) != len(frames):
            raise ValueError("feature tensor count does not match frame count")
        attention = [cam(raster_io.read_tensor(p), weights, class_index)
                     for p in feat_paths]
    else:
        raise ValueError("supply --attention or --features with --weights")

    if flow_dir:
        flow_paths = _numbered(flow_dir, r"flow_(\d+)\.flo")
        if len(flow_paths) != max(len(frames) - 1, 0):
            raise ValueError("need one flow_%06d.flo per consecutive pair")
        flows = [raster_io.read_flo(p) for p in flow_paths]
    elif allow_estimated_flow:
        flows = [estimate_flow_blockmatch(a, b, config.block, config.radius)
                 for a, b in zip(frames, frames[1:])]
    else:
        raise ValueError(
            "no --flow directory; pass --allow-estimated-flow to use the "
            "built-in block-matching estimator")

    scores = None
    if scores_path:
        scores, _ = _load_scores(scores_path, class_index)
        if len(scores) != len(frames):
            raise ValueError("score count does not match frame count")

    result = pipeline.segment_video(
        frames, attention, flows, config, scores=scores,
        keep_intermediates=dump_intermediates or bool(energy_path))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t, mask in enumerate(result.masks):
        raster_io.write_mask(mask, out / f"mask_{t:06d}.pgm")
    if dump_intermediates:
        _dump_intermediates(result, out)
    if energy_path:
        _dump_energy(result, energy_path)
    click.echo(f"wrote {len(result.masks)} masks to {out}")


def _dump_intermediates(result, out):
    inter_dir = out / "intermediates"
    inter_dir.mkdir(exist_ok=True)
    for (s, e), inter in result.intermediates.items():
        for k, p in enumerate(inter["partitions"]):
            t = s + k
            raster_io.write_label_map(p.labels.astype(np.uint16),
                                      inter_dir / f"labels_{t:06d}.pgm")
            stats = {
                "count": p.count,
                "pixel_counts": p.pixel_counts.tolist(),
                "mean_rgb": p.mean_rgb.tolist(),
                "centroids": p.centroids.tolist(),
            }
            (inter_dir / f"labels_{t:06d}.json").write_text(
                json.dumps(stats))
            raster_io.write_tensor(
                Tensor(inter["motion"][k].shape,
                       inter["motion"][k].astype(np.float32)),
                inter_dir / f"motion_{t:06d}.tnsr")


def _dump_energy(result, energy_path):
    doc = []
    for (s, e), inter in sorted(result.intermediates.items()):
        model = inter["model"]
        doc.append({
            "frames": [int(s), int(e)],
            "u0": model.u0.tolist(),
            "u1": model.u1.tolist(),
            "edges": model.edges.tolist(),
            "edge_weights": model.edge_weights.tolist(),
            "labels": inter["labeling"].labels.tolist(),
            "energy": inter["labeling"].energy,
        })
    Path(energy_path).write_text(json.dumps(doc))


@main.command("filter")
@click.option("--scores", "scores_path", required=True,
              type=click.Path(exists=True))
@click.option("--class-index", default=0, show_default=True)
@click.option("--threshold", default=0.8, show_default=True)
@click.option("--min-run", default=5, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guarded
def filter_cmd(scores_path, class_index, threshold, min_run, out_path):
    """Relevance-filter frames by classification score."""
    scores, classes = _load_scores(scores_path, class_index)
    intervals = relevance_filter(scores, 0, threshold, min_run)
    doc = [{"start": iv.start_frame, "end": iv.end_frame,
            "class_index": class_index} for iv in intervals]
    Path(out_path).write_text(json.dumps(doc, indent=2))
    click.echo(f"{len(doc)} relevant interval(s)")


@main.command("retrieve-sim")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--thumbnail-threshold", default=retrieval.THUMBNAIL_THRESHOLD,
              show_default=True)
@click.option("--keyframe-threshold", default=retrieval.KEYFRAME_THRESHOLD,
              show_default=True)
@click.option("--max-keyframes", default=retrieval.MAX_KEYFRAMES,
              show_default=True)
@click.option("--window-sec", default=retrieval.WINDOW_SEC, show_default=True)
@click.option("--max-videos-per-class", default=retrieval.MAX_VIDEOS_PER_CLASS,
              show_default=True)
@_guarded
def retrieve_sim(manifest_path, out_path, thumbnail_threshold,
                 keyframe_threshold, max_keyframes, window_sec,
                 max_videos_per_class):
    """Simulate the web-video retrieval filter over a corpus manifest."""
    manifest = retrieval.CorpusManifest.from_json(manifest_path)
    clips = retrieval.retrieval_filter(
        manifest, thumbnail_threshold, keyframe_threshold, max_keyframes,
        window_sec, max_videos_per_class)
    Path(out_path).write_text(
        json.dumps([c.to_dict() for c in clips], indent=2))
    click.echo(f"selected {len(clips)} clip(s)")


@main.command()
@click.option("--prob", "probs", multiple=True, required=True,
              help="CLASS_ID=path.tnsr foreground probability map.")
@click.option("--bg-threshold", default=0.5, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guarded
def fuse(probs, bg_threshold, out_path):
    """Fuse per-class probability maps into a pixel label map (P5 u16)."""
    prob_maps = {}
    for item in probs:
        cid, _, path = item.partition("=")
        if not _:
            raise ValueError(f"--prob expects CLASS_ID=path, got {item!r}")
        t = raster_io.read_tensor(path)
        if t.data.ndim != 2:
            raise ValueError(f"{path}: probability maps must be 2-D")
        prob_maps[int(cid)] = t.data
    labels = pipeline.fuse_labels(prob_maps, bg_threshold)
    raster_io.write_label_map(labels.astype(np.uint16), out_path)
    click.echo(f"wrote label map to {out_path}")


@main.command("eval")
@click.option("--pairs", "pairs_path", required=True,
              type=click.Path(exists=True),
              help="JSON list of {class, video, pred, gt} mask-path records.")
@click.option("--out", "out_path", type=click.Path())
@_guarded
def eval_cmd(pairs_path, out_path):
    """Evaluate predicted masks against ground truth by mIoU."""
    base = Path(pairs_path).parent
    records = []
    for rec in json.loads(Path(pairs_path).read_text()):
        pred = raster_io.read_mask(base / rec["pred"]).values
        gt = raster_io.read_gt_mask(base / rec["gt"])
        records.append((rec["class"], rec["video"], pred, gt))
    report = pipeline.evaluate_miou(records)
    text = json.dumps(report.to_dict(), indent=2)
    if out_path:
        Path(out_path).write_text(text)
    click.echo(text)


@main.command("export-trainset")
@click.option("--attention", "attention_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--masks", "mask_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--class-id", required=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_guarded
def export_trainset(attention_dir, mask_dir, class_id, out_dir):
    """Export (attention, mask) training pairs with a manifest."""
    att_paths = _numbered(attention_dir, r"att_(\d+)\.tnsr")
    mask_paths = _numbered(mask_dir, r"mask_(\d+)\.pgm")
    if len(att_paths) != len(mask_paths):
        raise ValueError("attention and mask counts differ")
    pairs = []
    for ap, mp in zip(att_paths, mask_paths):
        t = raster_io.read_tensor(ap)
        att = AttentionMap(t.dims[1], t.dims[0], t.data)
        pairs.append((class_id, att, raster_io.read_mask(mp)))
    manifest = pipeline.export_trainset(pairs, out_dir)
    click.echo(f"exported {len(manifest)} pair(s) to {out_dir}")


@main.command("gen-synthetic")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--frames", "n_frames", default=synthetic.DEFAULT_FRAMES,
              show_default=True)
@click.option("--width", default=synthetic.DEFAULT_WIDTH, show_default=True)
@click.option("--height", default=synthetic.DEFAULT_HEIGHT, show_default=True)
@click.option("--seed", default=7, show_default=True)
@_guarded
def gen_synthetic(out_dir, n_frames, width, height, seed):
    """Generate the synthetic translating-disk clip with analytic truth."""
    synthetic.write_clip(out_dir, n_frames=n_frames, width=width,
                         height=height, seed=seed)
    click.echo(f"synthetic clip written to {out_dir}")


if __name__ == "__main__":
    main()
