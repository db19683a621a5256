"""Command-line interface.

Subcommands map one-to-one onto module operations; all coupling between
them goes through files (corpus text, embedding vectors, stats tables,
masks, manifests), so any step can be rerun or replaced in isolation.
Use ``--json`` on reporting subcommands for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import MODIFIED, ORIGINAL, Corpus, build_corpus, \
    caption_sets_from_annotations
from .embedding import EmbeddingMatrix, TrainConfig, project_tsne, \
    save_projection, train
from .evaluation import correlate_relations, count_cooccurrence, \
    load_stats, relation_count, save_stats
from .inpaint import InpaintConfig, inpaint, load_image, save_image
from .lexicon import ClassLexicon, default_lexicon, load_lexicon
from .masks import load_labelmap, load_mask, masks_from_labelmap
from .pipeline import TOOL_VERSION, load_caption_annotations, \
    load_pipeline_config, run_pipeline
from .relation import DetectorConfig, SceneContext, detect_occlusions


def _lexicon_from(args) -> ClassLexicon:
    return load_lexicon(args.lexicon) if args.lexicon else default_lexicon()


def _add_lexicon_flag(parser) -> None:
    parser.add_argument("--lexicon", default=None,
                        help="class catalog JSON (default: bundled catalog)")


def _cmd_build_corpus(args) -> int:
    lexicon = _lexicon_from(args)
    annotations = load_caption_annotations(args.captions)
    corpus = build_corpus(caption_sets_from_annotations(annotations),
                          lexicon, mode=args.mode)
    corpus.save(args.out)
    print(f"documents {len(corpus)}")
    print(f"vocabulary {len(corpus.vocab)}")
    print(f"tokens {sum(len(d) for d in corpus.documents)}")
    return 0


def _cmd_train_embeddings(args) -> int:
    corpus = Corpus.load(args.corpus)
    config = TrainConfig(dim=args.dim, window=args.window, steps=args.steps,
                         negatives_per_pair=args.negatives,
                         learning_rate=args.lr,
                         min_learning_rate=args.min_lr,
                         noise_exponent=args.noise_exponent, seed=args.seed)
    emb = train(corpus, config)
    emb.save(args.out)
    print(f"vocabulary {len(emb.vocab)}")
    print(f"dim {emb.dim}")
    print(f"wrote {args.out}")
    return 0


def _cmd_project_2d(args) -> int:
    emb = EmbeddingMatrix.load(args.emb)
    coords = project_tsne(emb, perplexity=args.perplexity, iters=args.iters,
                          seed=args.seed)
    save_projection(args.out, emb, coords)
    print(f"projected {len(emb.vocab)} tokens")
    print(f"wrote {args.out}")
    if args.plot:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("error: matplotlib is required for --plot", file=sys.stderr)
            return 1
        fig, ax = plt.subplots(figsize=(10, 10))
        ax.scatter(coords[:, 0], coords[:, 1], s=8)
        for tok, (x, y) in zip(emb.vocab, coords):
            ax.annotate(tok, (x, y), fontsize=6)
        ax.set_title("class embedding, 2D projection")
        fig.savefig(args.plot, dpi=150)
        print(f"wrote {args.plot}")
    return 0


def _scene_from_labelmap(path, lexicon: ClassLexicon) -> SceneContext:
    labelmap = load_labelmap(path)
    thing_masks, stuffs = masks_from_labelmap(labelmap, lexicon)
    return SceneContext(image_id=Path(path).stem,
                        things=frozenset(thing_masks),
                        stuffs=frozenset(stuffs),
                        thing_masks=thing_masks)


def _scenes_from_json(path, lexicon: ClassLexicon) -> list[SceneContext]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or any(not isinstance(s, dict) for s in raw):
        raise ValueError("scenes file must hold an array of scene objects")

    def ids(entries):
        out = set()
        for e in entries:
            out.add(e if isinstance(e, int) else lexicon.by_name(str(e)).id)
        return frozenset(out)

    return [SceneContext(image_id=s["image_id"], things=ids(s.get("things", [])),
                         stuffs=ids(s.get("stuffs", []))) for s in raw]


def _cmd_stats(args) -> int:
    lexicon = _lexicon_from(args)
    if (args.labelmaps is None) == (args.scenes is None):
        print("error: data error: pass exactly one of --labelmaps/--scenes",
              file=sys.stderr)
        return 1
    if args.labelmaps:
        paths = sorted(Path(args.labelmaps).glob("*.png"))
        scenes = [_scene_from_labelmap(p, lexicon) for p in paths]
    else:
        scenes = _scenes_from_json(args.scenes, lexicon)
    stats = count_cooccurrence(scenes)
    save_stats(args.out, stats)
    print(f"images {stats.image_total}")
    print(f"classes {len(stats.class_counts)}")
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    lexicon = _lexicon_from(args)
    emb = EmbeddingMatrix.load(args.emb)
    stats = load_stats(args.stats)
    coefficient, pairs = correlate_relations(emb, stats, lexicon)
    if args.scatter:
        from .embedding import cosine_similarity
        present = stats.present_ids()
        with open(args.scatter, "w", encoding="utf-8") as fh:
            fh.write("class_a class_b cosine relation\n")
            for i, a in enumerate(present):
                for b in present[i + 1:]:
                    cos = cosine_similarity(emb[lexicon.token_for(a)],
                                            emb[lexicon.token_for(b)])
                    fh.write(f"{lexicon.token_for(a)} {lexicon.token_for(b)} "
                             f"{cos:.6f} {relation_count(stats, a, b):.6f}\n")
        print(f"wrote {args.scatter}")
    if args.json:
        print(json.dumps({"pearson": coefficient, "pairs": pairs}))
    else:
        print(f"pearson {coefficient:.6f}")
        print(f"pairs {pairs}")
    return 0


def _cmd_detect(args) -> int:
    lexicon = _lexicon_from(args)
    emb = EmbeddingMatrix.load(args.emb)
    scene = _scene_from_labelmap(args.labelmap, lexicon)
    cfg = DetectorConfig(similarity_threshold=args.threshold)
    report = detect_occlusions(emb, lexicon, scene, cfg)
    if args.json:
        print(report.to_json(indent=2, sort_keys=True))
    else:
        for e in report.entries:
            score = "-" if e.normalized_score is None else f"{e.normalized_score:.4f}"
            print(f"{e.class_name}: score {score} -> {e.verdict}")
        if not report.entries:
            print("no thing classes found")
    return 0


def _cmd_inpaint(args) -> int:
    cfg = InpaintConfig(patch_size=args.patch_size,
                        coarse_iters=args.coarse_iters,
                        search_stride=args.stride,
                        blend_width=args.blend_width)
    img = load_image(args.image)
    mask = load_mask(args.mask)
    save_image(args.out, inpaint(img, mask, cfg))
    print(f"wrote {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_pipeline_config(args.config)
    manifest = run_pipeline(cfg)
    if args.json:
        print(json.dumps(manifest.to_dict(), indent=2, sort_keys=True))
    else:
        for rec in manifest.records:
            detail = rec.error if rec.error else (rec.output_path or "")
            print(f"{rec.image_id}: {rec.status} {detail}")
        print(f"processed {len(manifest.records)} images")
    return 0


def _cmd_report(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    records = manifest["records"]
    by_status: dict[str, int] = {}
    removals: dict[str, int] = {}
    for rec in records:
        by_status[rec["status"]] = by_status.get(rec["status"], 0) + 1
        if rec.get("report"):
            for entry in rec["report"]["entries"]:
                if entry["verdict"] == "remove":
                    name = entry["class_name"]
                    removals[name] = removals.get(name, 0) + 1
    total_seconds = sum(rec["seconds"] for rec in records)
    summary = {
        "version": manifest["version"],
        "images": len(records),
        "by_status": by_status,
        "removed_classes": removals,
        "total_seconds": total_seconds,
    }
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print(f"images {len(records)}")
        for status in sorted(by_status):
            print(f"  {status} {by_status[status]}")
        if removals:
            print("removed classes:")
            for name in sorted(removals):
                print(f"  {name} {removals[name]}")
        print(f"total seconds {total_seconds:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextclean",
        description="Detect context-unrelated foreground objects and "
                    "remove them by inpainting.")
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-corpus",
                       help="turn caption annotations into a training corpus")
    p.add_argument("--captions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=[MODIFIED, ORIGINAL], default=MODIFIED)
    _add_lexicon_flag(p)
    p.set_defaults(func=_cmd_build_corpus)

    p = sub.add_parser("train-embeddings",
                       help="train skip-gram vectors on a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-lr", type=float, default=1e-4)
    p.add_argument("--noise-exponent", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train_embeddings)

    p = sub.add_parser("project-2d", help="2D t-SNE projection of an embedding")
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--perplexity", type=float, default=5.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None,
                   help="also render a labeled scatter image (needs matplotlib)")
    p.set_defaults(func=_cmd_project_2d)

    p = sub.add_parser("stats", help="co-occurrence counts from scenes")
    p.add_argument("--labelmaps", default=None,
                   help="directory of label-map PNGs")
    p.add_argument("--scenes", default=None,
                   help="JSON array of {image_id, things, stuffs}")
    p.add_argument("--out", required=True)
    _add_lexicon_flag(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("evaluate",
                       help="correlate embedding cosines with count relations")
    p.add_argument("--emb", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--scatter", default=None,
                   help="write per-pair (cosine, relation) data here")
    p.add_argument("--json", action="store_true")
    _add_lexicon_flag(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("detect", help="score one label map for occlusions")
    p.add_argument("--emb", required=True)
    p.add_argument("--labelmap", required=True)
    p.add_argument("--threshold", type=float, default=0.4)
    p.add_argument("--json", action="store_true")
    _add_lexicon_flag(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("inpaint", help="fill a masked region of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--patch-size", type=int, default=9)
    p.add_argument("--coarse-iters", type=int, default=50)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--blend-width", type=int, default=2)
    p.set_defaults(func=_cmd_inpaint)

    p = sub.add_parser("run", help="full pipeline over an image directory")
    p.add_argument("--config", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="summarize a run manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        print(f"error: io error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: data error: {exc}", file=sys.stderr)
        return 1
    except FloatingPointError as exc:
        print(f"error: numeric error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
