"""End-to-end orchestration: per-video segmentation, label fusion, mIoU
evaluation, and export of (attention, mask) training pairs."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import appearance as app
from . import graphcut
from .attention import AttentionMap, fuse_multiscale, relevance_filter, \
    superpixel_attention
from .flow import flow_links
from .motion import inside_outside, motion_boundary, motion_term
from .raster_io import SegmentationMask, Tensor, write_mask, write_tensor
from .superpixel import slic

NEUTRAL = 0.5  # evidence value carrying no preference either way


@dataclass
class PipelineConfig:
    # core energy weights and the relevance threshold
    lambda_attention: float = 2.0
    lambda_motion: float = 1.0
    lambda_appearance: float = 2.0
    relevance_threshold: float = 0.8  # shared with the retrieval stage
    min_run: int = 5  # shortest run of relevant frames worth segmenting
    # implementation knobs
    log_eps: float = 1e-6
    pairwise_gain: float = 1.0
    region_size: int = 15
    compactness: float = 10.0
    attention_scales: tuple = (0.75, 1.0, 1.25)
    attention_split: float = 0.5
    gmm_components: int = 5
    gmm_iters: int = 20
    seed: int = 0
    theta_b: float = 0.5
    lambda_b: float = 0.5
    block: int = 8
    radius: int = 4

    @classmethod
    def from_json(cls, path, overrides: dict | None = None
                  ) -> "PipelineConfig":
        doc = json.loads(Path(path).read_text()) if path else {}
        # keys starting with "_" are comments (JSON has no comment syntax)
        doc = {k: v for k, v in doc.items() if not k.startswith("_")}
        doc.update(overrides or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "attention_scales" in doc:
            doc["attention_scales"] = tuple(doc["attention_scales"])
        return cls(**doc)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["attention_scales"] = list(d["attention_scales"])
        return d


@dataclass
class SegmentationResult:
    masks: list  # per-frame SegmentationMask
    relevant: np.ndarray  # bool per frame
    energies: list  # one solved energy per relevant interval
    intermediates: dict = field(default_factory=dict)


def _interval_spans(n_frames, scores, config):
    if scores is None:
        return [(0, n_frames - 1)]
    intervals = relevance_filter(scores, 0,
                                 threshold=config.relevance_threshold,
                                 min_run=config.min_run)
    return [(iv.start_frame, iv.end_frame) for iv in intervals]


def segment_video(frames: list, attention_maps: list, flows: list,
                  config: PipelineConfig | None = None,
                  scores: list | None = None,
                  keep_intermediates: bool = False) -> SegmentationResult:
    """Segment one clip.

    frames: Images; attention_maps: one AttentionMap (or a list of maps at
    several scales) per frame; flows: FlowField per consecutive pair;
    scores: optional per-frame class scores gating relevance.
    """
    config = config or PipelineConfig()
    n = len(frames)
    if len(attention_maps) != n:
        raise ValueError("need one attention entry per frame")
    if n > 1 and len(flows) != n - 1:
        raise ValueError("need one flow field per consecutive frame pair")

    spans = _interval_spans(n, scores, config)
    relevant = np.zeros(n, dtype=bool)
    for s, e in spans:
        relevant[s:e + 1] = True

    masks = [SegmentationMask(f.width, f.height,
                              np.zeros((f.height, f.width), dtype=np.uint8))
             for f in frames]
    result = SegmentationResult(masks=masks, relevant=relevant, energies=[])

    for s, e in spans:
        span_frames = frames[s:e + 1]
        try:
            span_masks, energy, inter = _segment_span(
                span_frames, attention_maps[s:e + 1],
                flows, s, config, keep_intermediates)
        except Exception as exc:
            raise RuntimeError(
                f"segmentation failed on frames {s}..{e}: {exc}") from exc
        for k, m in enumerate(span_masks):
            masks[s + k] = m
        result.energies.append(energy)
        if keep_intermediates:
            result.intermediates[(s, e)] = inter
    return result


def _segment_span(span_frames, span_attention, flows, offset, config,
                  keep_intermediates):
    t_count = len(span_frames)
    w, h = span_frames[0].width, span_frames[0].height

    partitions = [slic(f, config.region_size, config.compactness)
                  for f in span_frames]

    fused = []
    for maps in span_attention:
        maps = maps if isinstance(maps, list) else [maps]
        fused.append(fuse_multiscale(maps, w, h))
    attn = [superpixel_attention(a, p) for a, p in zip(fused, partitions)]

    # motion: the flow of pair (t, t+1) describes frame t; the last frame
    # of the video reuses the final pair's flow
    motion = []
    for k in range(t_count):
        t = offset + k
        if not flows:
            motion.append(np.full(partitions[k].count, NEUTRAL))
            continue
        flow = flows[min(t, len(flows) - 1)]
        iom = inside_outside(motion_boundary(flow, config.theta_b,
                                             config.lambda_b))
        motion.append(motion_term(iom, partitions[k]))

    # per-span fg/bg GMMs over region mean colors, attention-weighted
    colors = np.concatenate([p.mean_rgb for p in partitions])
    att_all = np.concatenate(attn)
    fg_s, fg_w, bg_s, bg_w = app.split_by_attention(
        colors, att_all, config.attention_split)
    if fg_w.sum() > 0 and bg_w.sum() > 0:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # K degradation on tiny spans
            fg = app.fit_weighted_gmm(fg_s, fg_w, config.gmm_components,
                                      config.gmm_iters, config.seed)
            bg = app.fit_weighted_gmm(bg_s, bg_w, config.gmm_components,
                                      config.gmm_iters, config.seed + 1)
        appearance = [app.appearance_term(fg, bg, p) for p in partitions]
    else:
        # one side has no samples: appearance carries no evidence
        appearance = [np.full(p.count, NEUTRAL) for p in partitions]

    correspondences = [
        flow_links(partitions[k], partitions[k + 1],
                   flows[offset + k])
        for k in range(t_count - 1)
    ]
    graph = graphcut.build_graph(partitions, correspondences)
    model = graphcut.assemble_energy(
        np.concatenate(attn), np.concatenate(motion),
        np.concatenate(appearance), graph,
        lambda_a=config.lambda_attention, lambda_m=config.lambda_motion,
        lambda_c=config.lambda_appearance, eps=config.log_eps,
        pairwise_gain=config.pairwise_gain)
    labeling = graphcut.min_cut(model)
    masks = graphcut.labeling_to_masks(labeling, graph, partitions)

    inter = {}
    if keep_intermediates:
        inter = {"partitions": partitions, "attention": attn,
                 "motion": motion, "appearance": appearance,
                 "graph": graph, "model": model, "labeling": labeling}
    return masks, labeling.energy, inter


def fuse_labels(prob_maps: dict, bg_threshold: float = 0.5) -> np.ndarray:
    """Pixel-wise argmax over per-class foreground probability maps.

    prob_maps: class id (int >= 1) -> (h, w) float array in [0,1]. Pixels
    where every class probability is below bg_threshold become background
    (label 0); argmax ties go to the lowest class id.
    """
    if not prob_maps:
        raise ValueError("need at least one class probability map")
    class_ids = sorted(prob_maps)
    if class_ids[0] < 1:
        raise ValueError("class ids must be >= 1 (0 is background)")
    shapes = {prob_maps[c].shape for c in class_ids}
    if len(shapes) != 1:
        raise ValueError("probability maps must share dimensions")
    shape = shapes.pop()
    best = np.full(shape, -1.0)
    labels = np.zeros(shape, dtype=np.int32)
    for c in class_ids:
        pm = np.asarray(prob_maps[c], dtype=np.float64)
        if pm.min() < 0 or pm.max() > 1:
            raise ValueError(f"class {c}: probabilities outside [0,1]")
        better = pm > best  # strict: ties keep the lower class id
        best[better] = pm[better]
        labels[better] = c
    labels[best < bg_threshold] = 0
    return labels


VOID = 255  # ground-truth value excluded from evaluation


@dataclass
class EvalReport:
    per_class_iou: dict  # class name -> pooled IoU
    class_average: float
    per_video: list  # (video id, class name, IoU) rows
    video_average: float

    def to_dict(self) -> dict:
        return {
            "per_class_iou": self.per_class_iou,
            "class_average": self.class_average,
            "per_video": [
                {"video": v, "class": c, "iou": i} for v, c, i in self.per_video
            ],
            "video_average": self.video_average,
        }


def _iou_counts(pred: np.ndarray, gt: np.ndarray):
    if pred.shape != gt.shape:
        raise ValueError("prediction and ground truth must share dimensions")
    valid = gt != VOID
    p = pred[valid] == 1
    g = gt[valid] == 1
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    return tp, fp, fn


def evaluate_miou(records: list) -> EvalReport:
    """records: (class_name, video_id, pred {0,1}, gt {0,1,255}) tuples.

    Class IoU pools counts over all frames of the class; video IoU pools
    over the frames of one video; averages follow.
    """
    by_class = {}
    by_video = {}
    for class_name, video_id, pred, gt in records:
        tp, fp, fn = _iou_counts(np.asarray(pred), np.asarray(gt))
        c = by_class.setdefault(class_name, [0, 0, 0])
        v = by_video.setdefault((video_id, class_name), [0, 0, 0])
        for acc in (c, v):
            acc[0] += tp
            acc[1] += fp
            acc[2] += fn

    def iou(tp, fp, fn):
        denom = tp + fp + fn
        return tp / denom if denom else 0.0

    per_class = {
        name: iou(*counts)
        for name, counts in sorted(by_class.items())
        if counts[0] + counts[2] > 0  # classes with ground-truth pixels
    }
    per_video = [(vid, name, iou(*counts))
                 for (vid, name), counts in sorted(by_video.items())]
    class_avg = float(np.mean(list(per_class.values()))) if per_class else 0.0
    video_avg = float(np.mean([i for _, _, i in per_video])) \
        if per_video else 0.0
    return EvalReport(per_class_iou=per_class, class_average=class_avg,
                      per_video=per_video, video_average=video_avg)


def export_trainset(pairs: list, out_dir) -> list:
    """Write (attention, mask) supervision pairs and a JSON manifest.

    pairs: (class_id, AttentionMap, SegmentationMask) tuples. Returns the
    manifest entries in input order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, (class_id, att, mask) in enumerate(pairs):
        att_path = f"att_{i:06d}.tnsr"
        mask_path = f"mask_{i:06d}.pgm"
        write_tensor(Tensor(att.values.shape, att.values), out / att_path)
        write_mask(mask, out / mask_path)
        manifest.append({"class": int(class_id), "attention": att_path,
                         "mask": mask_path})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest
