"""End-to-end orchestration: label maps in, cleaned images and manifest out.

Per image the flow is: read the pixel label map, split it into thing
masks and stuff classes, score every thing against the rest of the scene
with the embedding, merge the masks of Remove verdicts (small regions
filtered first, survivors dilated), inpaint the merged hole, and write
the result.  Images with an empty occlusion mask are copied through
byte-identical.  A per-image failure is recorded in the run manifest and
never aborts the run; the manifest is the single source of truth for
downstream reporting.

Segmentation is ingested as data rather than predicted: any external
segmentator can participate by writing label maps in the documented
format, and an optional per-image sidecar can override the stuff set to
emulate an imperfect background extractor.
"""

from __future__ import annotations

import json
import logging
import shutil
import time
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

from PIL import UnidentifiedImageError

from .corpus import MODIFIED, build_corpus, caption_sets_from_annotations
from .embedding import EmbeddingMatrix, TrainConfig, train
from .inpaint import InpaintConfig, inpaint, load_image, save_image
from .lexicon import ClassLexicon, default_lexicon, load_lexicon
from .masks import (dilate, filter_small, load_labelmap, masks_from_labelmap,
                    merge_occlusion_mask)
from .relation import DetectorConfig, SceneContext, detect_occlusions

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

IMAGE_SUFFIXES = (".png", ".bmp")

STATUS_INPAINTED = "inpainted"
STATUS_COPIED = "copied"
STATUS_ERROR = "error"

ERROR_MISSING_LABELMAP = "missing-labelmap"
ERROR_UNREADABLE_IMAGE = "unreadable-image"
ERROR_PROCESSING = "processing-error"


@dataclass
class PipelineConfig:
    """Paths plus the per-stage configuration of one run."""

    image_dir: str
    labelmap_dir: str
    output_dir: str
    embedding_file: str
    lexicon_file: str | None = None
    captions_file: str | None = None
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    inpaint: InpaintConfig = field(default_factory=InpaintConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    def validate(self) -> None:
        for name in ("image_dir", "labelmap_dir"):
            path = Path(getattr(self, name))
            if not path.is_dir():
                raise ValueError(f"{name} {path} is not a directory")
        if not Path(self.embedding_file).is_file():
            if self.captions_file is None or not Path(self.captions_file).is_file():
                raise ValueError(
                    "embedding_file does not exist and no captions_file is "
                    "available to train one from")
        if self.lexicon_file is not None and not Path(self.lexicon_file).is_file():
            raise ValueError(f"lexicon_file {self.lexicon_file} does not exist")

    def snapshot(self) -> dict:
        """JSON-ready copy of every configuration value."""
        def plain(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {f.name: plain(getattr(obj, f.name))
                        for f in dataclass_fields(obj)}
            return obj
        return plain(self)


def load_pipeline_config(path) -> PipelineConfig:
    """Read a JSON run configuration.

    Layout: a ``paths`` object with ``images``, ``labelmaps``, ``output``,
    ``embedding`` and optional ``lexicon`` / ``captions`` entries, plus
    optional ``detector`` / ``inpaint`` / ``train`` objects whose keys
    mirror the corresponding config dataclasses, and an optional integer
    ``seed``.  Relative paths resolve against the config file location.
    Unknown keys raise ``ValueError`` so typos cannot silently fall back
    to defaults.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config root must be an object")
    unknown = set(raw) - {"paths", "detector", "inpaint", "train", "seed"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    paths = raw.get("paths")
    if not isinstance(paths, dict):
        raise ValueError("config must contain a 'paths' object")
    known_paths = {"images", "labelmaps", "output", "embedding",
                   "lexicon", "captions"}
    unknown = set(paths) - known_paths
    if unknown:
        raise ValueError(f"unknown path keys: {sorted(unknown)}")
    missing = {"images", "labelmaps", "output", "embedding"} - set(paths)
    if missing:
        raise ValueError(f"missing path keys: {sorted(missing)}")

    base = path.parent

    def resolve(value):
        return None if value is None else str((base / value))

    def build(cls, key):
        section = raw.get(key, {})
        if not isinstance(section, dict):
            raise ValueError(f"config section {key!r} must be an object")
        names = {f.name for f in dataclass_fields(cls)}
        unknown = set(section) - names
        if unknown:
            raise ValueError(f"unknown {key} keys: {sorted(unknown)}")
        return cls(**section)

    return PipelineConfig(
        image_dir=resolve(paths["images"]),
        labelmap_dir=resolve(paths["labelmaps"]),
        output_dir=resolve(paths["output"]),
        embedding_file=resolve(paths["embedding"]),
        lexicon_file=resolve(paths.get("lexicon")),
        captions_file=resolve(paths.get("captions")),
        detector=build(DetectorConfig, "detector"),
        inpaint=build(InpaintConfig, "inpaint"),
        train=build(TrainConfig, "train"),
        seed=int(raw.get("seed", 0)),
    )


@dataclass
class ImageRecord:
    """Outcome of processing one image."""

    image_id: str
    status: str
    things: list[int] = field(default_factory=list)
    stuffs: list[int] = field(default_factory=list)
    report: dict | None = None
    removed_ids: list[int] = field(default_factory=list)
    mask_pixels: int = 0
    output_path: str | None = None
    seconds: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "status": self.status,
            "things": list(self.things),
            "stuffs": list(self.stuffs),
            "report": self.report,
            "removed_ids": list(self.removed_ids),
            "mask_pixels": self.mask_pixels,
            "output_path": self.output_path,
            "seconds": self.seconds,
            "error": self.error,
        }


class RunManifest:
    """Append-only log of one pipeline run: config snapshot plus one
    record per processed image."""

    def __init__(self, config: dict, version: str = TOOL_VERSION):
        self.config = config
        self.version = version
        self.records: list[ImageRecord] = []

    def add(self, record: ImageRecord) -> None:
        if any(r.image_id == record.image_id for r in self.records):
            raise ValueError(f"image {record.image_id} already has a record")
        self.records.append(record)

    def record_for(self, image_id: str) -> ImageRecord:
        for r in self.records:
            if r.image_id == image_id:
                return r
        raise KeyError(image_id)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        manifest = cls(raw["config"], version=raw["version"])
        for rec in raw["records"]:
            manifest.add(ImageRecord(**rec))
        return manifest


def load_caption_annotations(path) -> list[dict]:
    """Read caption annotations from a JSON file: either a COCO captions
    export (object with an 'annotations' array) or a bare array of
    ``{image_id, caption}`` objects."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("annotations")
    if not isinstance(raw, list):
        raise ValueError("captions file holds neither an annotation list "
                         "nor an object with an 'annotations' array")
    return raw


def ensure_embedding(cfg: PipelineConfig, lexicon: ClassLexicon) -> EmbeddingMatrix:
    """Load the configured embedding, training and saving it first when
    only a captions file is available."""
    emb_path = Path(cfg.embedding_file)
    if emb_path.is_file():
        return EmbeddingMatrix.load(emb_path)
    logger.info("training embedding from %s", cfg.captions_file)
    annotations = load_caption_annotations(cfg.captions_file)
    corpus = build_corpus(caption_sets_from_annotations(annotations),
                          lexicon, mode=MODIFIED)
    emb = train(corpus, cfg.train)
    emb.save(emb_path)
    return emb


def _load_stuff_sidecar(path, lexicon: ClassLexicon) -> set[int]:
    """Stuff-set override: a JSON list (or {"stuffs": [...]} object) of
    stuff class ids or names."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("stuffs")
    if not isinstance(raw, list):
        raise ValueError(f"stuff sidecar {path} holds no class list")
    ids: set[int] = set()
    for entry in raw:
        cid = entry if isinstance(entry, int) else lexicon.by_name(str(entry)).id
        if cid not in lexicon.stuff_ids():
            raise ValueError(f"sidecar class {entry!r} is not a stuff class")
        ids.add(cid)
    return ids


class _Unreadable(Exception):
    pass


def process_image(image_path: Path, labelmap_path: Path, emb: EmbeddingMatrix,
                  lexicon: ClassLexicon, detector: DetectorConfig,
                  inpaint_cfg: InpaintConfig, output_dir: Path) -> ImageRecord:
    """Run detection, masking and inpainting for a single image."""
    image_id = image_path.stem
    start = time.perf_counter()
    record = ImageRecord(image_id=image_id, status=STATUS_ERROR)
    try:
        if not labelmap_path.is_file():
            raise FileNotFoundError(f"label map {labelmap_path} not found")
        labelmap = load_labelmap(labelmap_path)
        try:
            img = load_image(image_path)
        except (UnidentifiedImageError, OSError) as exc:
            raise _Unreadable(str(exc)) from exc
        if labelmap.shape != img.shape[:2]:
            raise ValueError(
                f"label map {labelmap.shape} does not match image "
                f"{img.shape[:2]}")

        thing_masks, stuffs = masks_from_labelmap(labelmap, lexicon)
        sidecar = labelmap_path.with_suffix(".stuffs.json")
        if sidecar.is_file():
            stuffs = _load_stuff_sidecar(sidecar, lexicon) - set(thing_masks)
        scene = SceneContext(image_id=image_id,
                             things=frozenset(thing_masks),
                             stuffs=frozenset(stuffs),
                             thing_masks=thing_masks)
        report = detect_occlusions(emb, lexicon, scene, detector)
        record.things = sorted(scene.things)
        record.stuffs = sorted(scene.stuffs)
        record.report = report.to_dict()
        record.removed_ids = report.removed_ids()

        removal = {tid: thing_masks[tid] for tid in report.removed_ids()}
        survivors = filter_small(removal, detector.min_area_fraction)
        dilated = {tid: dilate(m, detector.dilation_radius)
                   for tid, m in survivors.items()}
        merged = merge_occlusion_mask(report, dilated, shape=labelmap.shape)
        record.mask_pixels = int(merged.sum())

        if merged.any():
            out_path = output_dir / f"{image_id}.png"
            save_image(out_path, inpaint(img, merged, inpaint_cfg))
            record.status = STATUS_INPAINTED
        else:
            out_path = output_dir / image_path.name
            shutil.copyfile(image_path, out_path)
            record.status = STATUS_COPIED
        record.output_path = str(out_path)
    except FileNotFoundError as exc:
        record.error = f"{ERROR_MISSING_LABELMAP}: {exc}"
        logger.warning("skipping %s: %s", image_id, record.error)
    except _Unreadable as exc:
        record.error = f"{ERROR_UNREADABLE_IMAGE}: {exc}"
        logger.warning("skipping %s: %s", image_id, record.error)
    except Exception as exc:  # crash isolation: record, never abort the run
        record.error = f"{ERROR_PROCESSING}: {exc}"
        logger.warning("skipping %s: %s", image_id, record.error)
    record.seconds = time.perf_counter() - start
    return record


def run_pipeline(cfg: PipelineConfig) -> RunManifest:
    """Process every image in ``cfg.image_dir`` and write outputs plus a
    ``manifest.json`` into ``cfg.output_dir``.

    Deterministic given identical config, seeds and inputs: output images
    are byte-identical across runs and manifests identical up to timing
    fields.  Raises ``ValueError`` for an invalid configuration; any
    per-image failure is recorded in the manifest instead of raised.
    """
    cfg.validate()
    lexicon = (load_lexicon(cfg.lexicon_file) if cfg.lexicon_file
               else default_lexicon())
    emb = ensure_embedding(cfg, lexicon)
    output_dir = Path(cfg.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    image_dir = Path(cfg.image_dir)
    labelmap_dir = Path(cfg.labelmap_dir)
    images = sorted(p for p in image_dir.iterdir()
                    if p.suffix.lower() in IMAGE_SUFFIXES)
    manifest = RunManifest(cfg.snapshot())
    if not images:
        logger.warning("no images found under %s", image_dir)
    for image_path in images:
        labelmap_path = labelmap_dir / f"{image_path.stem}.png"
        record = process_image(image_path, labelmap_path, emb, lexicon,
                               cfg.detector, cfg.inpaint, output_dir)
        manifest.add(record)
    manifest.save(output_dir / "manifest.json")
    return manifest
