"""contextclean: remove context-unrelated foreground objects from images.

The package decides which foreground objects in an image do not belong
to its context by comparing class-label word embeddings (skip-gram with
negative sampling, trained on class-token caption documents) against the
other classes present, then erases the flagged objects with a two-stage
mask-and-inpaint step.  Everything is deterministic given seeds; every
stage reads and writes plain files so the steps compose from the CLI as
well as from Python.
"""

from .corpus import (CaptionSet, Corpus, EOP_TOKEN, HARD_BOUNDARY,
                     LITERAL_EOP, MODIFIED, ORIGINAL, build_corpus,
                     caption_sets_from_annotations, generate_pairs)
from .embedding import (EmbeddingMatrix, TrainConfig, cosine_similarity,
                        nearest_neighbors, project_tsne, save_projection,
                        sgns_gradients, sgns_loss, train)
from .evaluation import (CooccurrenceStats, correlate_relations,
                         count_cooccurrence, load_stats, pearson,
                         relation_count, save_stats)
from .inpaint import (InpaintConfig, coarse_fill, inpaint, load_image,
                      mean_ssd, psnr, refine_patches, save_image)
from .lexicon import (ClassLabel, ClassLexicon, STUFF, THING, default_lexicon,
                      lexicon_from_entries, load_lexicon, match_tokens,
                      tokenize)
from .masks import (UNLABELED, dilate, disc_footprint, filter_small,
                    load_labelmap, load_mask, mask_area, masks_from_labelmap,
                    merge_occlusion_mask, random_mask_from_things,
                    save_labelmap, save_mask)
from .pipeline import (ImageRecord, PipelineConfig, RunManifest, TOOL_VERSION,
                       load_pipeline_config, run_pipeline)
from .relation import (DetectorConfig, KEEP, OcclusionEntry, OcclusionReport,
                       REMOVE, SceneContext, detect_occlusions,
                       relation_score)
from .tsne import kl_divergence, tsne

__version__ = TOOL_VERSION

__all__ = [
    "CaptionSet", "ClassLabel", "ClassLexicon", "CooccurrenceStats",
    "Corpus", "DetectorConfig", "EmbeddingMatrix", "EOP_TOKEN",
    "HARD_BOUNDARY", "ImageRecord", "InpaintConfig", "KEEP", "LITERAL_EOP",
    "MODIFIED", "ORIGINAL", "OcclusionEntry", "OcclusionReport",
    "PipelineConfig", "REMOVE", "RunManifest", "STUFF", "SceneContext",
    "THING", "TOOL_VERSION", "TrainConfig", "UNLABELED",
    "build_corpus", "caption_sets_from_annotations", "coarse_fill",
    "correlate_relations", "cosine_similarity", "count_cooccurrence",
    "default_lexicon", "detect_occlusions", "dilate", "disc_footprint",
    "filter_small", "generate_pairs", "inpaint", "kl_divergence",
    "lexicon_from_entries", "load_image", "load_labelmap", "load_lexicon",
    "load_mask", "load_pipeline_config", "load_stats", "mask_area",
    "masks_from_labelmap", "match_tokens", "mean_ssd",
    "merge_occlusion_mask", "nearest_neighbors", "pearson", "project_tsne",
    "psnr", "random_mask_from_things", "refine_patches", "relation_count",
    "relation_score", "run_pipeline", "save_image", "save_labelmap",
    "save_mask", "save_projection", "save_stats", "sgns_gradients",
    "sgns_loss", "tokenize", "train", "tsne",
]
