"""Simulation of the web-video filtering stage over a local corpus manifest.

Thumbnail scores gate whole videos, key-frame scores pick informative
moments, and clip windows are cut around the surviving key-frames. Scores
are produced externally and arrive in the manifest; this module owns only
the selection logic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

THUMBNAIL_THRESHOLD = 0.8
KEYFRAME_THRESHOLD = 0.8
MAX_KEYFRAMES = 15
WINDOW_SEC = 2.0
MAX_VIDEOS_PER_CLASS = 300


@dataclass
class KeyFrame:
    timestamp: float  # seconds
    score: float


@dataclass
class CandidateVideo:
    video_id: str
    class_keyword: str
    thumbnail_score: float
    frame_rate: float
    duration: float
    keyframes: list = field(default_factory=list)


@dataclass
class CorpusManifest:
    videos: list

    @classmethod
    def from_json(cls, path) -> "CorpusManifest":
        with open(path) as f:
            doc = json.load(f)
        videos = []
        for v in doc["videos"]:
            kfs = [KeyFrame(float(k["timestamp"]), float(k["score"]))
                   for k in v.get("keyframes", [])]
            dur = float(v["duration"])
            for k in kfs:
                if not 0.0 <= k.timestamp <= dur:
                    raise ValueError(
                        f"{v['id']}: key-frame at {k.timestamp}s outside "
                        f"[0, {dur}]"
                    )
            videos.append(CandidateVideo(
                video_id=str(v["id"]),
                class_keyword=str(v["class"]),
                thumbnail_score=float(v["thumbnail_score"]),
                frame_rate=float(v.get("frame_rate", 25.0)),
                duration=dur,
                keyframes=kfs,
            ))
        return cls(videos=videos)


@dataclass
class ClipSelection:
    video_id: str
    class_keyword: str
    windows: list  # sorted disjoint (start_sec, end_sec) tuples
    keyframe_count: int

    def to_dict(self) -> dict:
        return {
            "id": self.video_id,
            "class": self.class_keyword,
            "windows": [[s, e] for s, e in self.windows],
            "keyframe_count": self.keyframe_count,
        }


def merge_windows(windows: list) -> list:
    """Sort and merge overlapping or touching intervals."""
    merged = []
    for start, end in sorted(windows):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def retrieval_filter(manifest: CorpusManifest,
                     thumb_thr: float = THUMBNAIL_THRESHOLD,
                     key_thr: float = KEYFRAME_THRESHOLD,
                     max_keyframes: int = MAX_KEYFRAMES,
                     window_sec: float = WINDOW_SEC,
                     max_videos_per_class: int = MAX_VIDEOS_PER_CLASS
                     ) -> list:
    """Select clips: drop videos whose thumbnail score is <= thumb_thr, keep
    the top max_keyframes key-frames scoring > key_thr per video (ties to
    the earlier timestamp), cut merged +-window_sec windows around them,
    and cap each class at max_videos_per_class by descending thumbnail
    score."""
    survivors = [v for v in manifest.videos if v.thumbnail_score > thumb_thr]

    per_class = {}
    for v in survivors:
        per_class.setdefault(v.class_keyword, []).append(v)

    selections = []
    for keyword in sorted(per_class):
        ranked = sorted(per_class[keyword],
                        key=lambda v: (-v.thumbnail_score, v.video_id))
        for v in ranked[:max_videos_per_class]:
            picked = sorted(
                (k for k in v.keyframes if k.score > key_thr),
                key=lambda k: (-k.score, k.timestamp),
            )[:max_keyframes]
            if not picked:
                continue
            windows = merge_windows([
                (max(0.0, k.timestamp - window_sec),
                 min(v.duration, k.timestamp + window_sec))
                for k in picked
            ])
            selections.append(ClipSelection(
                video_id=v.video_id,
                class_keyword=keyword,
                windows=windows,
                keyframe_count=len(picked),
            ))
    return selections
