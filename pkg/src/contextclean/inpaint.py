"""Two-stage hole filling: coarse diffusion, then patch-similarity refinement.

The first stage floods the hole from its boundary with iterative
neighbor averaging (a discrete harmonic fill).  The second walks the hole
from the boundary inward and, for each target patch, exhaustively searches
the unmasked region for the source patch with the lowest sum of squared
differences against the current (known plus coarsely generated) content,
then pastes it in with feathered seams.  Source patches never intersect
the original mask, pixels outside the mask are never touched, and the
whole procedure is deterministic.

This is a classical exemplar-based stand-in for a learned coarse-to-fine
inpainting network: it keeps the contextual-attention principle (texture
is drawn from the most similar unmasked patches) while staying exactly
reproducible and dependency-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image as PILImage


@dataclass
class InpaintConfig:
    patch_size: int = 9
    coarse_iters: int = 50
    search_stride: int = 1
    blend_width: int = 2
    seed: int = 0  # reserved for future randomized search modes

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.coarse_iters < 1:
            raise ValueError("coarse_iters must be >= 1")
        if self.search_stride < 1:
            raise ValueError("search_stride must be >= 1")
        if self.blend_width < 0:
            raise ValueError("blend_width must be >= 0")


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 image, got shape {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must be finite and in [0, 1]")
    return img


def _neighbor_sums(values: np.ndarray, valid: np.ndarray):
    """4-neighbor sums of ``values`` and counts of valid neighbors."""
    h, w, _ = values.shape
    total = np.zeros_like(values)
    count = np.zeros((h, w), dtype=float)
    shifts = ((1, 0), (-1, 0), (0, 1), (0, -1))
    for dy, dx in shifts:
        src_y = slice(max(0, -dy), min(h, h - dy))
        src_x = slice(max(0, -dx), min(w, w - dx))
        dst_y = slice(max(0, dy), min(h, h + dy))
        dst_x = slice(max(0, dx), min(w, w + dx))
        total[dst_y, dst_x] += values[src_y, src_x] * valid[src_y, src_x, None]
        count[dst_y, dst_x] += valid[src_y, src_x]
    return total, count


def coarse_fill(img: np.ndarray, mask: np.ndarray, iters: int = 50) -> np.ndarray:
    """Fill masked pixels by diffusion from the hole boundary.

    The hole is first seeded layer by layer with the mean of already-known
    4-neighbors, then smoothed with ``iters`` Jacobi passes over the
    masked region only.  Unmasked pixels are returned bit-exact.
    Raises ``ValueError`` when the mask covers the whole frame.
    """
    img = _check_image(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ValueError("mask dimensions do not match the image")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if not mask.any():
        return img.copy()
    if mask.all():
        raise ValueError("mask covers the entire image; no boundary to fill from")

    work = img.copy()
    known = ~mask
    # boundary propagation: grow the known region one layer at a time
    while not known.all():
        total, count = _neighbor_sums(work, known)
        layer = ~known & (count > 0)
        work[layer] = total[layer] / count[layer, None]
        known |= layer
    # Jacobi smoothing of the hole, boundary values held fixed
    all_valid = np.ones(mask.shape, dtype=bool)
    for _ in range(iters):
        total, count = _neighbor_sums(work, all_valid)
        work[mask] = total[mask] / count[mask, None]
    return np.clip(work, 0.0, 1.0, out=work)


def _valid_source_corners(mask: np.ndarray, patch: int, stride: int) -> np.ndarray:
    """Top-left corners of patch windows that avoid the mask entirely."""
    windows = sliding_window_view(mask, (patch, patch))
    clean = ~windows.any(axis=(2, 3))
    grid = np.zeros_like(clean)
    grid[::stride, ::stride] = True
    corners = np.argwhere(clean & grid)
    return corners


def _patch_ssd(target: np.ndarray, corners: np.ndarray, img: np.ndarray,
               chunk: int = 2048) -> np.ndarray:
    """SSD between one target patch and the source windows at ``corners``."""
    p = target.shape[0]
    windows = sliding_window_view(img, (p, p), axis=(0, 1))  # (Y, X, 3, p, p)
    flat_target = target.transpose(2, 0, 1).reshape(-1)
    ssd = np.empty(len(corners))
    for start in range(0, len(corners), chunk):
        sel = corners[start:start + chunk]
        block = windows[sel[:, 0], sel[:, 1]].reshape(len(sel), -1)
        diff = block - flat_target
        ssd[start:start + chunk] = np.einsum("ij,ij->i", diff, diff)
    return ssd


def refine_patches(img: np.ndarray, mask: np.ndarray,
                   cfg: InpaintConfig) -> np.ndarray:
    """Replace coarse hole content with best-matching unmasked patches.

    Hole pixels are processed boundary-first: the pixel whose surrounding
    patch has the most already-determined content is targeted next, the
    best source window (lowest SSD against the current patch content)
    is pasted over the still-unfilled pixels, and overlaps with
    previously pasted pixels are feather-blended over ``cfg.blend_width``
    pixels.  Pixels outside the mask are returned bit-exact.
    """
    img = _check_image(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ValueError("mask dimensions do not match the image")
    if not mask.any():
        return img.copy()

    p = cfg.patch_size
    h, w = mask.shape
    if h < p or w < p:
        raise ValueError(f"image {h}x{w} is smaller than the patch size {p}")
    corners = _valid_source_corners(mask, p, cfg.search_stride)
    if len(corners) == 0:
        raise ValueError("no valid source patch exists outside the mask")

    work = img.copy()
    remaining = mask.copy()
    half = p // 2
    ys, xs = np.mgrid[0:p, 0:p]
    edge_dist = np.minimum.reduce([ys, xs, p - 1 - ys, p - 1 - xs])
    if cfg.blend_width > 0:
        feather = 0.5 * np.clip((edge_dist + 1.0) / (cfg.blend_width + 1.0), 0.0, 1.0)
    else:
        feather = None

    while remaining.any():
        known_count = _box_count(~remaining, p)
        known_count[~remaining] = -1  # only unfilled pixels are candidates
        cy, cx = np.unravel_index(np.argmax(known_count), known_count.shape)
        # clamp the window inside the frame; the chosen pixel stays inside
        ty = int(np.clip(cy - half, 0, h - p))
        tx = int(np.clip(cx - half, 0, w - p))
        target = work[ty:ty + p, tx:tx + p]
        ssd = _patch_ssd(target, corners, work)
        sy, sx = corners[int(np.argmin(ssd))]
        source = work[sy:sy + p, sx:sx + p]

        local_mask = mask[ty:ty + p, tx:tx + p]
        local_rem = remaining[ty:ty + p, tx:tx + p]
        fill = local_mask & local_rem
        target[fill] = source[fill]
        if feather is not None:
            overlap = local_mask & ~local_rem
            if overlap.any():
                # "a + w*(b - a)" is bit-exact when b == a, unlike the
                # (1-w)*a + w*b form; repeated pastes of identical content
                # must not drift
                wgt = feather[overlap][:, None]
                cur = target[overlap]
                target[overlap] = cur + wgt * (source[overlap] - cur)
        remaining[ty:ty + p, tx:tx + p] &= ~local_mask
    return work


def _box_count(valid: np.ndarray, patch: int) -> np.ndarray:
    """Count of True cells in the patch-sized box around each pixel (zero
    padded at the borders)."""
    h, w = valid.shape
    half = patch // 2
    padded = np.zeros((h + patch - 1, w + patch - 1), dtype=np.int64)
    padded[half:half + h, half:half + w] = valid
    c = padded.cumsum(axis=0).cumsum(axis=1)
    zeros_col = np.zeros((c.shape[0], 1), dtype=np.int64)
    zeros_row = np.zeros((1, c.shape[1] + 1), dtype=np.int64)
    c = np.vstack([zeros_row, np.hstack([zeros_col, c])])
    out = (c[patch:, patch:] - c[:-patch, patch:]
           - c[patch:, :-patch] + c[:-patch, :-patch])
    return out.astype(float)


def inpaint(img: np.ndarray, mask: np.ndarray, cfg: InpaintConfig) -> np.ndarray:
    """Coarse diffusion fill followed by patch refinement."""
    coarse = coarse_fill(img, mask, cfg.coarse_iters)
    return refine_patches(coarse, mask, cfg)


def mean_ssd(a: np.ndarray, b: np.ndarray, region: np.ndarray | None = None) -> float:
    """Mean squared difference between two images, optionally over a region."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if region is not None:
        a = a[region]
        b = b[region]
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images in [0, 1]."""
    mse = mean_ssd(a, b)
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def load_image(path) -> np.ndarray:
    """Read an image file as an HxWx3 float array in [0, 1]."""
    with PILImage.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=float)
    return arr / 255.0


def save_image(path, img: np.ndarray) -> None:
    """Write an HxWx3 float image in [0, 1] as an 8-bit RGB file."""
    img = _check_image(img)
    arr = np.rint(img * 255.0).astype(np.uint8)
    PILImage.fromarray(arr, mode="RGB").save(path)
