"""Command-line surface: every subcommand, output modes, exit codes."""

import json

import numpy as np
import pytest

import contextclean as cc
from contextclean.cli import main
from conftest import FIXTURE_PLAN, build_fixture_dataset, engineered_embedding


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory, lex):
    root = tmp_path_factory.mktemp("cli_dataset")
    config_path = build_fixture_dataset(root, lex)
    return root, config_path


def write_captions(path):
    captions = [
        {"image_id": 1, "caption": "a dog and a cat on the grass"},
        {"image_id": 1, "caption": "two dogs near a tree"},
        {"image_id": 2, "caption": "an airplane above the grass"},
    ]
    path.write_text(json.dumps(captions))
    return path


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == cc.__version__


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_build_corpus_and_train_and_project(tmp_path, capsys):
    captions = write_captions(tmp_path / "captions.json")
    corpus_path = tmp_path / "corpus.txt"
    assert main(["build-corpus", "--captions", str(captions),
                 "--out", str(corpus_path)]) == 0
    out = capsys.readouterr().out
    assert "documents 2" in out  # two distinct image ids
    assert corpus_path.is_file()

    emb_path = tmp_path / "emb.vec"
    assert main(["train-embeddings", "--corpus", str(corpus_path),
                 "--out", str(emb_path), "--dim", "8", "--steps", "200"]) == 0
    out = capsys.readouterr().out
    assert "dim 8" in out
    emb = cc.EmbeddingMatrix.load(emb_path)
    assert "dog" in emb

    proj_path = tmp_path / "proj.txt"
    assert main(["project-2d", "--emb", str(emb_path), "--out", str(proj_path),
                 "--perplexity", "1", "--iters", "30"]) == 0
    lines = proj_path.read_text().splitlines()
    assert len(lines) == len(emb.vocab)
    assert all(len(ln.split()) == 3 for ln in lines)


def test_stats_and_evaluate_roundtrip(tmp_path, capsys, lex):
    scenes = [
        {"image_id": 0, "things": ["dog"], "stuffs": ["grass"]},
        {"image_id": 1, "things": ["dog", "cat"], "stuffs": ["grass"]},
        {"image_id": 2, "things": ["cat"], "stuffs": ["tree"]},
    ]
    scenes_path = tmp_path / "scenes.json"
    scenes_path.write_text(json.dumps(scenes))
    stats_path = tmp_path / "stats.txt"
    assert main(["stats", "--scenes", str(scenes_path),
                 "--out", str(stats_path)]) == 0
    out = capsys.readouterr().out
    assert "images 3" in out
    assert stats_path.is_file()

    emb = engineered_embedding(lex, ["dog", "cat", "grass", "tree"], [])
    emb_path = tmp_path / "emb.vec"
    emb.save(emb_path)
    scatter = tmp_path / "scatter.txt"
    assert main(["evaluate", "--emb", str(emb_path), "--stats", str(stats_path),
                 "--scatter", str(scatter), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert set(payload) == {"pearson", "pairs"}
    # 4 present classes give C(4,2) = 6 unordered pairs
    assert payload["pairs"] == 6
    header, *rows = scatter.read_text().splitlines()
    assert header.split() == ["class_a", "class_b", "cosine", "relation"]
    assert len(rows) == 6
    assert all(len(r.split()) == 4 for r in rows)


def test_stats_requires_exactly_one_source(tmp_path, capsys):
    assert main(["stats", "--out", str(tmp_path / "s.txt")]) == 1
    err = capsys.readouterr().err
    assert "exactly one" in err


def test_stats_rejects_non_object_scenes(tmp_path, capsys):
    scenes = tmp_path / "scenes.json"
    scenes.write_text(json.dumps([["dog", "grass"], ["airplane"]]))
    assert main(["stats", "--scenes", str(scenes),
                 "--out", str(tmp_path / "s.txt")]) == 1
    err = capsys.readouterr().err
    assert "data error" in err and "scene objects" in err


def test_stats_from_labelmaps(cli_dataset, tmp_path, capsys, lex):
    root, _ = cli_dataset
    stats_path = tmp_path / "stats.txt"
    assert main(["stats", "--labelmaps", str(root / "labelmaps"),
                 "--out", str(stats_path)]) == 0
    stats = cc.load_stats(stats_path)
    assert stats.image_total == len(FIXTURE_PLAN)
    dog = lex.by_name("dog").id
    grass = lex.by_name("grass").id
    assert stats.n_intersection(dog, grass) == 3


def test_detect_text_and_json(cli_dataset, tmp_path, capsys, lex):
    root, _ = cli_dataset
    labelmap = root / "labelmaps" / "scene_b.png"
    emb = root / "emb.vec"
    assert main(["detect", "--emb", str(emb), "--labelmap", str(labelmap)]) == 0
    out = capsys.readouterr().out
    assert "dog" in out and "keep" in out
    assert "airplane" in out and "remove" in out

    assert main(["detect", "--emb", str(emb), "--labelmap", str(labelmap),
                 "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    verdicts = {e["class_name"]: e["verdict"] for e in payload["entries"]}
    assert verdicts == {"dog": "keep", "airplane": "remove"}


def test_detect_threshold_flag_flips_verdict(cli_dataset, capsys):
    root, _ = cli_dataset
    labelmap = root / "labelmaps" / "scene_b.png"
    emb = root / "emb.vec"
    assert main(["detect", "--emb", str(emb), "--labelmap", str(labelmap),
                 "--threshold", "0.0", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert all(e["verdict"] == "keep" for e in payload["entries"])


def test_inpaint_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    tile = rng.uniform(0.1, 0.9, size=(6, 6, 3))
    img = np.tile(tile, (6, 6, 1))
    mask = np.zeros((36, 36), dtype=bool)
    mask[15:21, 15:21] = True
    img_path = tmp_path / "img.png"
    mask_path = tmp_path / "mask.png"
    out_path = tmp_path / "out.png"
    cc.save_image(img_path, img)
    from contextclean.masks import save_mask
    save_mask(mask_path, mask)
    assert main(["inpaint", "--image", str(img_path), "--mask", str(mask_path),
                 "--out", str(out_path), "--patch-size", "5",
                 "--coarse-iters", "10", "--blend-width", "1"]) == 0
    capsys.readouterr()
    original = cc.load_image(img_path)
    result = cc.load_image(out_path)
    assert np.array_equal(result[~mask], original[~mask])


def test_run_and_report(cli_dataset, tmp_path, capsys):
    root, config_path = cli_dataset
    assert main(["run", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    assert f"processed {len(FIXTURE_PLAN)} images" in out

    manifest_path = root / "out" / "manifest.json"
    assert main(["report", "--manifest", str(manifest_path)]) == 0
    out = capsys.readouterr().out
    assert "images 5" in out
    assert "copied 3" in out
    assert "inpainted 2" in out
    assert "airplane" in out

    assert main(["report", "--manifest", str(manifest_path), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["by_status"] == {"copied": 3, "inpainted": 2}
    assert payload["removed_classes"] == {"airplane": 2}


def test_run_json_mode(cli_dataset, tmp_path, capsys):
    root, config_path = cli_dataset
    assert main(["run", "--config", str(config_path), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["records"]) == len(FIXTURE_PLAN)
    assert payload["version"] == cc.__version__


def test_io_error_exit_code(tmp_path, capsys):
    assert main(["report", "--manifest", str(tmp_path / "nope.json")]) == 1
    assert "io error" in capsys.readouterr().err


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "emb.vec"
    bad.write_text("1 2\na 1.0\n")
    proj = tmp_path / "p.txt"
    assert main(["project-2d", "--emb", str(bad), "--out", str(proj)]) == 1
    assert "data error" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_error_exit_code(tmp_path, capsys):
    captions = write_captions(tmp_path / "captions.json")
    corpus_path = tmp_path / "corpus.txt"
    main(["build-corpus", "--captions", str(captions), "--out", str(corpus_path)])
    capsys.readouterr()
    emb_path = tmp_path / "emb.vec"
    code = main(["train-embeddings", "--corpus", str(corpus_path),
                 "--out", str(emb_path), "--dim", "4", "--steps", "2000",
                 "--lr", "1e200"])
    assert code == 1
    assert "numeric error" in capsys.readouterr().err
