"""Fill masked holes in textured images, stage by stage.

Shows why the two-stage design matters: the coarse diffusion fill is
smooth but blurry inside the hole, while the patch refinement copies
real texture back in. On periodic patterns the refined result can be
pixel-perfect.
"""

from pathlib import Path

import numpy as np

import contextclean as cc
from contextclean.inpaint import coarse_fill, mean_ssd, psnr, refine_patches

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def checkerboard(size=36, cell=2):
    yy, xx = np.mgrid[0:size, 0:size]
    v = ((yy // cell + xx // cell) % 2).astype(float)
    return np.repeat(v[:, :, None], 3, axis=2)


def stripes(size=36, period=6):
    xx = np.mgrid[0:size, 0:size][1]
    v = ((xx % period) < period // 2).astype(float)
    return np.stack([v, 1.0 - v, np.full_like(v, 0.5)], axis=2)


def tiled_noise(size=36, tile=6, seed=7):
    rng = np.random.default_rng(seed)
    patch = rng.uniform(0.1, 0.9, size=(tile, tile, 3))
    return np.tile(patch, (size // tile, size // tile, 1))


size = 36
mask = np.zeros((size, size), dtype=bool)
mask[13:23, 13:23] = True
cfg = cc.InpaintConfig(patch_size=7, coarse_iters=50, blend_width=1)

print(f"hole: {mask.sum()} of {size * size} px\n")
print(f"{'texture':12s} {'coarse SSD':>12s} {'refined SSD':>12s} "
      f"{'coarse dB':>10s} {'refined dB':>11s}")

for name, image in [("checkerboard", checkerboard()),
                    ("stripes", stripes()),
                    ("tiled_noise", tiled_noise())]:
    coarse = coarse_fill(image, mask, cfg.coarse_iters)
    refined = refine_patches(coarse, mask, cfg)

    # the contract everything else leans on: untouched outside the hole
    assert np.array_equal(refined[~mask], image[~mask])

    print(f"{name:12s} {mean_ssd(coarse, image, mask):12.5f} "
          f"{mean_ssd(refined, image, mask):12.5f} "
          f"{psnr(coarse, image):10.1f} {psnr(refined, image):11.1f}")

    cc.save_image(OUT / f"{name}_original.png", image)
    cc.save_image(OUT / f"{name}_coarse.png", coarse)
    cc.save_image(OUT / f"{name}_refined.png", refined)

print(f"\nwrote stage-by-stage images to {OUT}")

# One masked checkerboard cell has a perfect source elsewhere on the
# board, so refinement reconstructs it exactly.
board = checkerboard(16)
cell = np.zeros((16, 16), dtype=bool)
cell[6:8, 6:8] = True
small = cc.InpaintConfig(patch_size=5, coarse_iters=20, blend_width=1)
rebuilt = refine_patches(coarse_fill(board, cell, 20), cell, small)
print(f"single checkerboard cell rebuilt exactly: "
      f"{np.array_equal(rebuilt, board)}")
