"""Binary mask handling: label-map decoding, hygiene, merging, sampling.

Masks are HxW boolean numpy arrays.  Label maps are HxW integer arrays of
lexicon class ids with a reserved value for unlabeled pixels.  On disk
both are single-channel images: masks store 0/255, label maps store the
class id per pixel with an id-to-label table emitted alongside.
"""

from __future__ import annotations

import json
import logging

import numpy as np
from PIL import Image as PILImage
from scipy.ndimage import binary_dilation

from .lexicon import ClassLexicon
from .relation import OcclusionReport, REMOVE

logger = logging.getLogger(__name__)

#: Reserved label-map value for pixels with no class annotation.
UNLABELED = 255


def disc_footprint(radius: int) -> np.ndarray:
    """Euclidean disc structuring element: offsets with dy^2 + dx^2 <= r^2."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    return dy * dy + dx * dx <= radius * radius


def mask_area(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask))


def masks_from_labelmap(labelmap: np.ndarray, lexicon: ClassLexicon):
    """Split a label map into per-thing masks and the set of stuff ids.

    Returns ``(things, stuffs)`` where ``things`` maps each thing id
    present to its boolean mask and ``stuffs`` is the set of stuff ids
    present.  Raises ``ValueError`` on a class id outside the lexicon.
    """
    labelmap = np.asarray(labelmap)
    present = np.unique(labelmap)
    thing_ids = lexicon.thing_ids()
    stuff_ids = lexicon.stuff_ids()
    things: dict[int, np.ndarray] = {}
    stuffs: set[int] = set()
    for cid in present:
        cid = int(cid)
        if cid == UNLABELED:
            continue
        if cid in thing_ids:
            things[cid] = labelmap == cid
        elif cid in stuff_ids:
            stuffs.add(cid)
        else:
            raise ValueError(f"label map contains unknown class id {cid}")
    return things, stuffs


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation with a Euclidean disc; radius 0 is identity."""
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    return binary_dilation(mask, structure=disc_footprint(radius))


def filter_small(masks: dict[int, np.ndarray],
                 min_area_fraction: float) -> dict[int, np.ndarray]:
    """Keep exactly the masks with area >= fraction * image area.

    Surviving masks are returned unchanged (same objects).
    """
    if not 0.0 <= min_area_fraction < 1.0:
        raise ValueError("min_area_fraction must be in [0, 1)")
    out = {}
    for cid, mask in masks.items():
        h, w = mask.shape
        if mask_area(mask) >= min_area_fraction * w * h:
            out[cid] = mask
    return out


def merge_occlusion_mask(report: OcclusionReport, masks: dict[int, np.ndarray],
                         shape: tuple[int, int] | None = None) -> np.ndarray:
    """Pixel-wise OR of the masks of every remove-verdict class.

    A removed class whose mask is absent (area-filtered upstream) is
    treated as kept and logged.  ``shape`` sizes the empty result when no
    class is removed and no mask is available to infer it from.
    """
    if shape is None:
        if masks:
            shape = next(iter(masks.values())).shape
        else:
            raise ValueError("no masks given and no shape to size the result")
    merged = np.zeros(shape, dtype=bool)
    for entry in report.entries:
        if entry.verdict != REMOVE:
            continue
        mask = masks.get(entry.class_id)
        if mask is None:
            logger.warning(
                "image %s: class %s marked remove but has no surviving mask; kept",
                report.image_id, entry.class_name)
            continue
        merged |= mask
    return merged


def random_mask_from_things(thing_masks, seed,
                            min_area_fraction: float = 0.01,
                            max_area_fraction: float = 0.5,
                            max_shift_fraction: float = 0.25,
                            max_dilation_radius: int = 5,
                            allow_flip: bool = True,
                            max_tries: int = 200) -> np.ndarray:
    """Sample a random mask from ground-truth thing masks.

    Picks a source mask, applies an optional flip, a random translation
    (clipped to image bounds), and a random dilation, retrying until the
    result is nonempty with area inside the configured fraction bounds.
    Deterministic for a fixed seed.
    """
    thing_masks = list(thing_masks)
    if not thing_masks:
        raise ValueError("thing mask collection is empty")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        src = thing_masks[int(rng.integers(len(thing_masks)))]
        h, w = src.shape
        m = np.asarray(src, dtype=bool)
        if allow_flip:
            if rng.random() < 0.5:
                m = m[:, ::-1]
            if rng.random() < 0.5:
                m = m[::-1, :]
        max_dy = int(h * max_shift_fraction)
        max_dx = int(w * max_shift_fraction)
        dy = int(rng.integers(-max_dy, max_dy + 1)) if max_dy else 0
        dx = int(rng.integers(-max_dx, max_dx + 1)) if max_dx else 0
        m = _translate(m, dy, dx)
        radius = int(rng.integers(0, max_dilation_radius + 1)) if max_dilation_radius else 0
        if radius:
            m = dilate(m, radius)
        area = mask_area(m)
        if 0 < area and min_area_fraction * w * h <= area <= max_area_fraction * w * h:
            return m
    raise ValueError(
        f"no sampled mask satisfied the area bounds after {max_tries} tries")


def _translate(mask: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift without wraparound; pixels moved outside the frame are lost."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    ys = slice(max(0, dy), min(h, h + dy))
    xs = slice(max(0, dx), min(w, w + dx))
    ys_src = slice(max(0, -dy), min(h, h - dy))
    xs_src = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = mask[ys_src, xs_src]
    return out


def save_mask(path, mask: np.ndarray) -> None:
    """Write a mask as a single-channel image, 0 = clear, 255 = set."""
    PILImage.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(path)


def load_mask(path) -> np.ndarray:
    img = PILImage.open(path).convert("L")
    return np.asarray(img) >= 128


def save_labelmap(path, labelmap: np.ndarray, lexicon: ClassLexicon | None = None) -> None:
    """Write a label map as a single-channel class-id image.

    When a lexicon is given, an id-to-label table is written alongside as
    ``<path>.labels.json``.
    """
    arr = np.asarray(labelmap)
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("label map ids must fit in a single byte")
    PILImage.fromarray(arr.astype(np.uint8), mode="L").save(path)
    if lexicon is not None:
        table = {str(lab.id): lab.name for lab in lexicon.labels}
        table[str(UNLABELED)] = "<unlabeled>"
        with open(f"{path}.labels.json", "w", encoding="utf-8") as fh:
            json.dump(table, fh, indent=1)


def load_labelmap(path) -> np.ndarray:
    img = PILImage.open(path)
    if img.mode != "L":
        raise ValueError(f"label map {path} must be single-channel, got {img.mode}")
    return np.asarray(img, dtype=np.int64)
