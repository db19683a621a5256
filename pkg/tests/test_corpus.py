"""Corpus construction and boundary-safe skip-gram pair generation."""

from collections import Counter

import numpy as np
import pytest

import contextclean as cc
from contextclean.corpus import Corpus


def brute_force_pairs(documents, window):
    """Independent enumeration: all in-document index pairs with
    0 < |i - j| <= window, labeled by token."""
    out = []
    for doc in documents:
        for i, center in enumerate(doc):
            for j in range(max(0, i - window), min(len(doc), i + window + 1)):
                if j != i:
                    out.append((center, doc[j]))
    return out


def pairs_as_tokens(corpus, window, mode=cc.HARD_BOUNDARY):
    return [(corpus.vocab[c], corpus.vocab[o])
            for c, o in cc.generate_pairs(corpus, window, mode)]


def random_documents(rng, n_docs=None):
    alphabet = list("abcdefg")
    n_docs = n_docs or rng.integers(1, 6)
    return [list(rng.choice(alphabet, size=rng.integers(0, 7)))
            for _ in range(n_docs)]


def test_build_modified_keeps_only_class_tokens(lex):
    sets = [cc.CaptionSet(image_id=1, captions=("a dog runs", "a dog sits"))]
    corpus = cc.build_corpus(sets, lex, mode=cc.MODIFIED)
    assert corpus.documents == [["dog", "dog"]]


def test_two_images_two_documents(lex):
    sets = [cc.CaptionSet(image_id=1, captions=("a dog",)),
            cc.CaptionSet(image_id=2, captions=("a cat",))]
    corpus = cc.build_corpus(sets, lex, mode=cc.MODIFIED)
    assert len(corpus) == 2
    assert corpus.documents == [["dog"], ["cat"]]


def test_no_class_words_gives_empty_document(lex):
    sets = [cc.CaptionSet(image_id=1, captions=("hello world",))]
    corpus = cc.build_corpus(sets, lex, mode=cc.MODIFIED)
    assert corpus.documents == [[]]


def test_original_mode_keeps_everything(lex):
    sets = [cc.CaptionSet(image_id=1, captions=("A dog runs!",))]
    corpus = cc.build_corpus(sets, lex, mode=cc.ORIGINAL)
    assert corpus.documents == [["a", "dog", "runs"]]


def test_repeated_image_id_rejected(lex):
    sets = [cc.CaptionSet(image_id=1, captions=("a dog",)),
            cc.CaptionSet(image_id=1, captions=("a cat",))]
    with pytest.raises(ValueError, match="repeat"):
        cc.build_corpus(sets, lex, mode=cc.MODIFIED)


def test_empty_caption_list_rejected():
    with pytest.raises(ValueError):
        cc.CaptionSet(image_id=1, captions=())


def test_caption_sets_group_by_image():
    anns = [{"image_id": 2, "caption": "x"},
            {"image_id": 1, "caption": "y"},
            {"image_id": 2, "caption": "z"}]
    sets = cc.caption_sets_from_annotations(anns)
    assert [(s.image_id, s.captions) for s in sets] == [(2, ("x", "z")),
                                                        (1, ("y",))]


def test_eop_token_rejected_inside_document():
    with pytest.raises(ValueError, match="EOP"):
        Corpus([["a", cc.EOP_TOKEN, "b"]])


def test_pairs_two_token_document():
    corpus = Corpus([["a", "b"]])
    assert set(pairs_as_tokens(corpus, 3)) == {("a", "b"), ("b", "a")}


def test_pairs_window_one_three_tokens():
    corpus = Corpus([["a", "b", "c"]])
    expected = {("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")}
    got = pairs_as_tokens(corpus, 1)
    assert Counter(got) == Counter(expected)


def test_no_pair_spans_documents():
    corpus = Corpus([["a", "b"], ["c"]])
    for window in range(1, 6):
        for center, other in pairs_as_tokens(corpus, window):
            assert {center, other} != {"b", "c"}
            assert "c" not in (center, other) or (center, other) == ("c", "c")


def test_pairs_match_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(50):
        docs = random_documents(rng)
        corpus = Corpus(docs)
        for window in (1, 2, 3):
            got = Counter(pairs_as_tokens(corpus, window))
            assert got == Counter(brute_force_pairs(docs, window))


def test_pair_count_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(30):
        corpus = Corpus(random_documents(rng))
        counts = Counter(pairs_as_tokens(corpus, int(rng.integers(1, 5))))
        for (a, b), n in counts.items():
            assert counts[(b, a)] == n


def test_literal_eop_equals_hard_boundary():
    rng = np.random.default_rng(7)
    for _ in range(50):
        corpus = Corpus(random_documents(rng))
        for window in range(1, 6):
            hard = Counter(pairs_as_tokens(corpus, window, cc.HARD_BOUNDARY))
            literal = Counter(pairs_as_tokens(corpus, window, cc.LITERAL_EOP))
            assert hard == literal


def test_window_below_one_rejected():
    corpus = Corpus([["a", "b"]])
    with pytest.raises(ValueError, match="window"):
        list(cc.generate_pairs(corpus, 0))


def test_unknown_boundary_mode_rejected():
    corpus = Corpus([["a", "b"]])
    with pytest.raises(ValueError, match="boundary"):
        list(cc.generate_pairs(corpus, 1, "soft"))


def test_save_load_roundtrip(tmp_path, lex):
    sets = [cc.CaptionSet(image_id=1, captions=("a dog and a cat",)),
            cc.CaptionSet(image_id=2, captions=("hello world",)),
            cc.CaptionSet(image_id=3, captions=("grass and sky",))]
    corpus = cc.build_corpus(sets, lex, mode=cc.MODIFIED)
    assert corpus.documents[1] == []
    path = tmp_path / "corpus.txt"
    corpus.save(path)
    loaded = Corpus.load(path)
    assert loaded.documents == corpus.documents
    assert loaded.vocab == corpus.vocab


def test_vocab_sorted_and_indexed():
    corpus = Corpus([["dog", "cat"], ["ant"]])
    assert corpus.vocab == ["ant", "cat", "dog"]
    assert corpus.token_to_id == {"ant": 0, "cat": 1, "dog": 2}
    assert corpus.token_counts() == Counter({"dog": 1, "cat": 1, "ant": 1})
