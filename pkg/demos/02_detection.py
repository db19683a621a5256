"""Score scene classes against their context and issue verdicts.

Demonstrates the detector on an engineered embedding where outdoor
classes cluster and 'airplane' points the opposite way, so an airplane
pasted into a lawn scene scores far below the removal threshold.
"""

import numpy as np

import contextclean as cc

lexicon = cc.default_lexicon()

# Outdoor classes share a direction; airplane gets the opposite one.
# Real runs train this from captions (see 01_embeddings.py); engineering
# it keeps the demo deterministic and instant.
rng = np.random.default_rng(0)
names_near = ["dog", "cat", "grass", "tree"]
names_far = ["airplane"]
tokens, rows = [], []
for name in names_near:
    tokens.append(lexicon.by_name(name).token)
    rows.append(np.r_[1.0, 0.01 * rng.normal(size=5)])
for name in names_far:
    tokens.append(lexicon.by_name(name).token)
    rows.append(np.r_[-1.0, 0.01 * rng.normal(size=5)])
emb = cc.EmbeddingMatrix(tokens, np.vstack(rows))

dog = lexicon.by_name("dog").id
airplane = lexicon.by_name("airplane").id
grass = lexicon.by_name("grass").id
tree = lexicon.by_name("tree").id

# A lawn scene holding both a dog and an airplane. Masks mark where each
# thing sits; the detector only needs them for downstream mask merging.
h = w = 32
dog_mask = np.zeros((h, w), dtype=bool)
dog_mask[20:28, 4:14] = True
plane_mask = np.zeros((h, w), dtype=bool)
plane_mask[6:12, 18:30] = True

scene = cc.SceneContext(
    image_id="lawn",
    things={dog, airplane},
    stuffs={grass, tree},
    thing_masks={dog: dog_mask, airplane: plane_mask},
)

report = cc.detect_occlusions(emb, lexicon, scene, cc.DetectorConfig())
print("verdicts at the default 0.4 threshold:")
for entry in report.entries:
    print(f"  {entry.class_name:9s} raw {entry.raw_score:+.3f} "
          f"normalized {entry.normalized_score:.3f} -> {entry.verdict}")

print(f"\nremoved class ids: {report.removed_ids()}")

# The threshold is a plain dial. The cut is strict, so at 0.0 even the
# airplane's normalized 0.000 is kept; at 0.70 the dog's 0.667 goes too.
print("\nthreshold sweep:")
for threshold in (0.0, 0.4, 0.7):
    cfg = cc.DetectorConfig(similarity_threshold=threshold)
    sweep = cc.detect_occlusions(emb, lexicon, scene, cfg)
    rendered = ", ".join(f"{e.class_name} {e.verdict}" for e in sweep.entries)
    print(f"  threshold {threshold:.2f} -> {rendered}")

# Merging respects verdicts: only remove-verdict masks reach the inpainter.
merged = cc.merge_occlusion_mask(report, {dog: dog_mask, airplane: plane_mask})
print(f"\nmerged occlusion mask covers {merged.sum()} px "
      f"(airplane mask: {plane_mask.sum()} px, dog mask kept out)")

dilated = cc.dilate(merged, 2)
print(f"after 2 px disc dilation: {dilated.sum()} px")
