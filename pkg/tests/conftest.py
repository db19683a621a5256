"""Shared fixtures: the bundled lexicon, synthetic textures, and a small
engineered dataset used by the pipeline and acceptance tests."""

import json

import numpy as np
import pytest

import contextclean as cc


@pytest.fixture(scope="session")
def lex():
    return cc.default_lexicon()


def texture_suite(size=36):
    """Deterministic synthetic textures for inpainting quality checks.

    Returns (name, image) pairs; each image is HxWx3 float in [0, 1] with
    repetitive structure that a patch copier can reproduce but a pure
    diffusion fill blurs away.
    """
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w]
    suite = []

    checker = ((yy // 2 + xx // 2) % 2).astype(float)
    suite.append(("checkerboard", np.repeat(checker[:, :, None], 3, axis=2)))

    stripes = ((xx % 6) < 3).astype(float)
    img = np.stack([stripes, 1.0 - stripes, np.full_like(stripes, 0.5)], axis=2)
    suite.append(("stripes", img))

    diag = (((yy + xx) % 8) < 4).astype(float)
    img = np.stack([diag, diag * 0.5 + 0.25, 1.0 - diag], axis=2)
    suite.append(("diagonal", img))

    rng = np.random.default_rng(7)
    tile = rng.uniform(0.1, 0.9, size=(6, 6, 3))
    tiled = np.tile(tile, (h // 6, w // 6, 1))
    suite.append(("noise_tile", tiled))

    return suite


def center_hole(size=36, half=5):
    mask = np.zeros((size, size), dtype=bool)
    mid = size // 2
    mask[mid - half:mid + half, mid - half:mid + half] = True
    return mask


def engineered_embedding(lexicon, near_names, far_names, dim=6, seed=0):
    """Embedding whose ``near_names`` classes cluster tightly while each
    ``far_names`` class points the opposite way (pairwise cosine with the
    cluster close to -1)."""
    rng = np.random.default_rng(seed)
    base = np.zeros(dim)
    base[0] = 1.0
    tokens, rows = [], []
    for name in near_names:
        tokens.append(lexicon.by_name(name).token)
        rows.append(base + 0.01 * rng.normal(size=dim))
    for name in far_names:
        tokens.append(lexicon.by_name(name).token)
        row = -base + 0.01 * rng.normal(size=dim)
        rows.append(row)
    return cc.EmbeddingMatrix(tokens, np.vstack(rows))


FIXTURE_SIZE = 48

# five synthetic scenes: which thing classes are planted and which one
# (if any) the engineered embedding pushes far from the context
FIXTURE_PLAN = [
    ("scene_a", ["dog"], None),
    ("scene_b", ["dog", "airplane"], "airplane"),
    ("scene_c", ["cat"], None),
    ("scene_d", ["airplane"], "airplane"),
    ("scene_e", ["dog", "cat"], None),
]

NEAR_NAMES = ["dog", "cat", "grass", "tree"]
FAR_NAMES = ["airplane"]


def build_fixture_dataset(root, lexicon):
    """Five images + label maps + engineered embedding + run config.

    Background is seeded noise with all channels >= 0.2; planted objects
    are pure magenta (green channel 0) so inpainted pixels can never
    reproduce them.  Returns the path of the run config JSON.
    """
    images = root / "images"
    labelmaps = root / "labelmaps"
    output = root / "out"
    for d in (images, labelmaps, output):
        d.mkdir(parents=True, exist_ok=True)

    grass = lexicon.by_name("grass").id
    tree = lexicon.by_name("tree").id
    h = w = FIXTURE_SIZE
    for idx, (name, things, _) in enumerate(FIXTURE_PLAN):
        rng = np.random.default_rng(100 + idx)
        img = rng.uniform(0.2, 0.9, size=(h, w, 3))
        lm = np.full((h, w), grass, dtype=np.uint8)
        lm[:8, :] = tree
        for k, thing_name in enumerate(things):
            tid = lexicon.by_name(thing_name).id
            y0, x0 = 12 + 14 * k, 16
            lm[y0:y0 + 10, x0:x0 + 14] = tid
            img[y0:y0 + 10, x0:x0 + 14] = (1.0, 0.0, 1.0)
        cc.save_image(images / f"{name}.png", img)
        cc.save_labelmap(labelmaps / f"{name}.png", lm, lexicon)

    emb = engineered_embedding(lexicon, NEAR_NAMES, FAR_NAMES)
    emb.save(root / "emb.vec")

    config = {
        "paths": {"images": "images", "labelmaps": "labelmaps",
                  "output": "out", "embedding": "emb.vec"},
        "detector": {"dilation_radius": 2},
        "inpaint": {"patch_size": 7, "coarse_iters": 10, "blend_width": 1},
    }
    config_path = root / "run.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    return config_path
