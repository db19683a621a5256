"""Train class-label embeddings from captions and explore the result.

Walks the first half of the toolchain: caption text -> class-token
corpus -> skip-gram embedding -> similarity queries -> 2D projection.
Everything here is synthetic and finishes in a few seconds.
"""

from pathlib import Path

import contextclean as cc
from contextclean.corpus import (CaptionSet, build_corpus, generate_pairs)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# A miniature caption collection. Indoor scenes pair cats with couches
# and windows; outdoor scenes pair dogs with grass and trees; airplanes
# only ever appear with the sky.
CAPTIONS = {
    1: ["a cat sleeping on the couch by the window",
        "the cat sits near a window"],
    2: ["a dog running across the grass", "a dog plays near a tree"],
    3: ["two dogs on the grass under a tree"],
    4: ["an airplane high in the sky", "the sky behind an airplane"],
    5: ["a cat on a couch", "the couch near the window"],
    6: ["a dog and another dog by a tree on the grass"],
    7: ["an airplane crossing a cloudy sky"],
    8: ["the cat watches a dog from the window"],
}

lexicon = cc.default_lexicon()
sets = [CaptionSet(image_id=i, captions=caps) for i, caps in CAPTIONS.items()]

# The modified corpus keeps only recognized class tokens, so documents
# become short sequences like ["cat", "couch", "window"].
corpus = build_corpus(sets, lexicon)
print("documents:")
for doc in corpus.documents:
    print("  ", doc)

pairs = list(generate_pairs(corpus, window=3))
print(f"\n{len(pairs)} training pairs from window 3")

config = cc.TrainConfig(dim=16, window=3, steps=8000, seed=0)
emb = cc.train(corpus, config)
print(f"trained {len(emb.vocab)} vectors of dim {emb.dim}")

print("\nnearest neighbors:")
for query in ("dog", "cat", "airplane"):
    neighbors = cc.nearest_neighbors(emb, query, k=3)
    rendered = ", ".join(f"{tok} {sim:+.2f}" for tok, sim in neighbors)
    print(f"  {query:9s} -> {rendered}")

print("\npairwise intuition check:")
for a, b in (("dog", "grass"), ("dog", "sky-other"), ("airplane", "grass")):
    tok_a = lexicon.by_name(a).token
    tok_b = lexicon.by_name(b).token
    print(f"  cos({a}, {b}) = {cc.cosine_similarity(emb[tok_a], emb[tok_b]):+.3f}")

emb_path = OUT / "demo.vec"
emb.save(emb_path)
print(f"\nsaved embedding to {emb_path}")

coords = cc.project_tsne(emb, perplexity=2.0, iters=300, seed=0)
proj_path = OUT / "demo_projection.txt"
cc.save_projection(proj_path, emb, coords)
print(f"saved 2D projection to {proj_path}")
