"""Per-thing relation scores against the image context and occlusion verdicts.

A thing class's raw score is the mean cosine similarity between its
embedding vector and the vectors of every other class present in the
image (thing and stuff alike).  The score is mapped from [-1, 1] to
[0, 1] and a class is declared an occlusion when its normalized score
falls strictly below the similarity threshold.  A lone thing with no
other class in the image has no context to judge against and is kept,
flagged as such.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .embedding import EmbeddingMatrix, cosine_similarity
from .lexicon import ClassLexicon

KEEP = "keep"
REMOVE = "remove"


@dataclass(frozen=True)
class SceneContext:
    """Classes present in one image plus per-thing pixel masks.

    ``things`` and ``stuffs`` are disjoint sets of lexicon ids (duplicate
    instances collapse to one set element).  ``thing_masks`` maps a thing
    id to an HxW boolean array; every provided mask must be nonempty.
    """

    image_id: int | str
    things: frozenset[int]
    stuffs: frozenset[int]
    thing_masks: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "things", frozenset(self.things))
        object.__setattr__(self, "stuffs", frozenset(self.stuffs))
        overlap = self.things & self.stuffs
        if overlap:
            raise ValueError(f"ids {sorted(overlap)} listed as both thing and stuff")
        shapes = {m.shape for m in self.thing_masks.values()}
        if len(shapes) > 1:
            raise ValueError(f"mask dimensions disagree: {shapes}")
        for tid, mask in self.thing_masks.items():
            if not mask.any():
                raise ValueError(f"thing {tid} has an empty mask")


@dataclass
class DetectorConfig:
    similarity_threshold: float = 0.4
    min_area_fraction: float = 0.02
    dilation_radius: int = 5

    def __post_init__(self):
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in [0, 1]")
        if not 0.0 <= self.min_area_fraction < 1.0:
            raise ValueError("min_area_fraction must be in [0, 1)")
        if self.dilation_radius < 0:
            raise ValueError("dilation_radius must be >= 0")


@dataclass(frozen=True)
class OcclusionEntry:
    """Verdict for one thing class.

    ``raw_score`` is None when the class had no context to score against
    (``context_size == 0``); such entries are always kept.
    """

    class_id: int
    class_name: str
    raw_score: float | None
    normalized_score: float | None
    verdict: str
    context_size: int

    @property
    def no_context(self) -> bool:
        return self.context_size == 0


@dataclass(frozen=True)
class OcclusionReport:
    image_id: int | str
    entries: tuple[OcclusionEntry, ...]

    def removed_ids(self) -> list[int]:
        return [e.class_id for e in self.entries if e.verdict == REMOVE]

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "entries": [
                {
                    "class_id": e.class_id,
                    "class_name": e.class_name,
                    "raw_score": e.raw_score,
                    "normalized_score": e.normalized_score,
                    "verdict": e.verdict,
                    "context_size": e.context_size,
                    "no_context": e.no_context,
                }
                for e in self.entries
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def relation_score(emb: EmbeddingMatrix, lexicon: ClassLexicon,
                   scene: SceneContext, thing_id: int) -> float | None:
    """Mean cosine similarity between a thing and the other scene classes.

    The context is ``(stuffs | things) - {thing_id}``.  Returns None when
    that set is empty (no evidence either way).  Raises ``KeyError`` when
    a class token is missing from the embedding vocabulary.
    """
    if thing_id not in scene.things:
        raise ValueError(f"class {thing_id} is not a thing of image {scene.image_id}")
    context = (scene.stuffs | scene.things) - {thing_id}
    if not context:
        return None
    v_i = emb[lexicon.token_for(thing_id)]
    total = 0.0
    for j in sorted(context):
        total += cosine_similarity(v_i, emb[lexicon.token_for(j)])
    return total / len(context)


def detect_occlusions(emb: EmbeddingMatrix, lexicon: ClassLexicon,
                      scene: SceneContext, cfg: DetectorConfig) -> OcclusionReport:
    """Score every thing in the scene and issue keep/remove verdicts.

    Remove iff the normalized score ``(raw + 1) / 2`` is strictly below
    ``cfg.similarity_threshold`` and the class had context to judge by.
    """
    entries = []
    for tid in sorted(scene.things):
        raw = relation_score(emb, lexicon, scene, tid)
        if raw is None:
            entries.append(OcclusionEntry(
                class_id=tid, class_name=lexicon[tid].name,
                raw_score=None, normalized_score=None,
                verdict=KEEP, context_size=0))
            continue
        normalized = (raw + 1.0) / 2.0
        verdict = REMOVE if normalized < cfg.similarity_threshold else KEEP
        entries.append(OcclusionEntry(
            class_id=tid, class_name=lexicon[tid].name,
            raw_score=raw, normalized_score=normalized,
            verdict=verdict, context_size=len(scene.things | scene.stuffs) - 1))
    return OcclusionReport(image_id=scene.image_id, entries=tuple(entries))
