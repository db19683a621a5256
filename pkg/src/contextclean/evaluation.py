"""Count-based relation oracle and its correlation with embedding cosines.

The co-occurrence relation between two classes is R_ab = n_int / n_union,
where n_int counts images containing both classes and n_union images
containing at least one of them.  Agreement between this oracle and the
learned embedding is summarized by the Pearson correlation between R_ab
and cosine similarity over all class pairs observed in the dataset.
The raw cosine feeds the correlation rather than the [0, 1]-normalized
score; Pearson is invariant under positive affine maps, so both give the
same coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .embedding import EmbeddingMatrix, cosine_similarity
from .lexicon import ClassLexicon
from .relation import SceneContext


def _pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CooccurrenceStats:
    """Sparse symmetric table of per-pair image counts.

    ``class_counts`` maps a class id to the number of images containing
    it; ``pair_counts`` holds only strictly positive joint counts, keyed
    by the ordered pair (low id, high id).  Union counts are derived:
    n_union(a, b) = count(a) + count(b) - n_int(a, b).
    """

    image_total: int
    class_counts: Mapping[int, int] = field(default_factory=dict)
    pair_counts: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.image_total < 0:
            raise ValueError("image_total must be >= 0")
        for cid, n in self.class_counts.items():
            if not 0 < n <= self.image_total:
                raise ValueError(f"class {cid} count {n} outside (0, image_total]")
        for (a, b), n in self.pair_counts.items():
            if a >= b:
                raise ValueError(f"pair key ({a}, {b}) is not ordered")
            if n <= 0:
                raise ValueError(f"pair ({a}, {b}) stores a non-positive count")
            if n > min(self.class_counts.get(a, 0), self.class_counts.get(b, 0)):
                raise ValueError(f"pair ({a}, {b}) count exceeds a member count")

    def present_ids(self) -> list[int]:
        """Class ids appearing in at least one counted image, ascending."""
        return sorted(self.class_counts)

    def n_intersection(self, a: int, b: int) -> int:
        if a == b:
            return self.class_counts.get(a, 0)
        return self.pair_counts.get(_pair_key(a, b), 0)

    def n_union(self, a: int, b: int) -> int:
        if a == b:
            return self.class_counts.get(a, 0)
        return (self.class_counts.get(a, 0) + self.class_counts.get(b, 0)
                - self.n_intersection(a, b))


def count_cooccurrence(scenes: Iterable[SceneContext]) -> CooccurrenceStats:
    """Exact per-pair presence counts over a scene collection.

    A class is present in a scene when it appears among its things or
    stuffs.  Raises ``ValueError`` on an empty collection.
    """
    class_counts: dict[int, int] = {}
    pair_counts: dict[tuple[int, int], int] = {}
    total = 0
    for scene in scenes:
        total += 1
        present = sorted(scene.things | scene.stuffs)
        for i, a in enumerate(present):
            class_counts[a] = class_counts.get(a, 0) + 1
            for b in present[i + 1:]:
                key = (a, b)
                pair_counts[key] = pair_counts.get(key, 0) + 1
    if total == 0:
        raise ValueError("cannot count co-occurrence over zero scenes")
    return CooccurrenceStats(total, class_counts, pair_counts)


def relation_count(stats: CooccurrenceStats, a: int, b: int) -> float:
    """R_ab = n_int / n_union.  Raises ``ValueError`` when the union is
    empty (neither class occurs), which marks the pair as undefined."""
    union = stats.n_union(a, b)
    if union == 0:
        raise ValueError(f"classes {a} and {b} never occur; R is undefined")
    return stats.n_intersection(a, b) / union


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient.

    Raises ``ValueError`` on length mismatch, fewer than two points, or
    a constant sequence (zero variance).
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise ValueError("sequences must be one-dimensional and equally long")
    if len(x) < 2:
        raise ValueError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.dot(dx, dx))
    sy = np.sqrt(np.dot(dy, dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("constant sequence has no defined correlation")
    return float(np.clip(np.dot(dx, dy) / (sx * sy), -1.0, 1.0))


def correlate_relations(emb: EmbeddingMatrix, stats: CooccurrenceStats,
                        lexicon: ClassLexicon) -> tuple[float, int]:
    """Pearson correlation between embedding cosines and count relations.

    Enumerates all unordered pairs of classes present in ``stats`` (their
    union is then necessarily nonzero), pairs cosine_similarity(v_a, v_b)
    with R_ab, and returns (coefficient, pair count).  Raises
    ``ValueError`` when the embedding is missing a class token or fewer
    than two pairs are available.
    """
    present = stats.present_ids()
    tokens = {}
    for cid in present:
        token = lexicon.token_for(cid)
        if token not in emb:
            raise ValueError(f"embedding does not cover class token {token!r}")
        tokens[cid] = token
    cosines = []
    relations = []
    for i, a in enumerate(present):
        for b in present[i + 1:]:
            cosines.append(cosine_similarity(emb[tokens[a]], emb[tokens[b]]))
            relations.append(relation_count(stats, a, b))
    if len(cosines) < 2:
        raise ValueError("need at least two class pairs to correlate")
    return pearson(cosines, relations), len(cosines)


def save_stats(path, stats: CooccurrenceStats) -> None:
    """Write the sparse symmetric count table.

    Line one is ``images <total>``; every following line is
    ``<id_a> <id_b> <n_int> <n_union>``.  Diagonal lines carry per-class
    image counts; off-diagonal lines appear only for positive joint
    counts.
    """
    lines = [f"images {stats.image_total}"]
    for cid in stats.present_ids():
        n = stats.class_counts[cid]
        lines.append(f"{cid} {cid} {n} {n}")
    for (a, b) in sorted(stats.pair_counts):
        n_int = stats.pair_counts[(a, b)]
        lines.append(f"{a} {b} {n_int} {stats.n_union(a, b)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_stats(path) -> CooccurrenceStats:
    """Read a table written by :func:`save_stats`, validating counts."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("images "):
        raise ValueError("stats file must start with an 'images <total>' line")
    image_total = int(lines[0].split()[1])
    class_counts: dict[int, int] = {}
    pair_counts: dict[tuple[int, int], int] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"malformed stats line: {ln!r}")
        a, b, n_int, n_union = (int(p) for p in parts)
        if a == b:
            if n_int != n_union:
                raise ValueError(f"diagonal line for class {a} must have equal counts")
            if a in class_counts:
                raise ValueError(f"duplicate diagonal line for class {a}")
            class_counts[a] = n_int
        else:
            key = _pair_key(a, b)
            if key in pair_counts:
                raise ValueError(f"duplicate pair line for {key}")
            pair_counts[key] = n_int
    stats = CooccurrenceStats(image_total, class_counts, pair_counts)
    # re-verify the redundant union column against derived values
    for ln in lines[1:]:
        a, b, n_int, n_union = (int(p) for p in ln.split())
        if stats.n_union(a, b) != n_union:
            raise ValueError(f"inconsistent union count for pair ({a}, {b})")
    return stats
