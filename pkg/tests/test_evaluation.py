"""Co-occurrence counting, count-based relations, correlation checks."""

import itertools

import numpy as np
import pytest

import contextclean as cc
from contextclean.evaluation import (CooccurrenceStats, load_stats, save_stats)


def scene(i, ids):
    return cc.SceneContext(i, things=frozenset(ids), stuffs=frozenset())


def test_count_two_scene_example():
    stats = cc.count_cooccurrence([scene(0, {1, 2}), scene(1, {2, 3})])
    assert stats.image_total == 2
    assert stats.class_counts == {1: 1, 2: 2, 3: 1}
    assert stats.n_intersection(1, 2) == 1
    assert stats.n_intersection(1, 3) == 0
    assert stats.n_union(1, 3) == 2
    assert stats.n_union(2, 3) == 2


def test_count_empty_collection_rejected():
    with pytest.raises(ValueError, match="zero scenes"):
        cc.count_cooccurrence([])


def test_counts_match_brute_force_double_loop():
    rng = np.random.default_rng(13)
    scenes = []
    for i in range(20):
        ids = set(rng.choice(10, size=int(rng.integers(1, 6)),
                             replace=False).tolist())
        scenes.append(scene(i, ids))
    stats = cc.count_cooccurrence(scenes)
    present = [set(s.things) for s in scenes]
    for a, b in itertools.combinations(range(10), 2):
        n_int = sum(1 for p in present if a in p and b in p)
        n_uni = sum(1 for p in present if a in p or b in p)
        assert stats.n_intersection(a, b) == n_int
        assert stats.n_union(a, b) == n_uni
    for a in range(10):
        n_a = sum(1 for p in present if a in p)
        assert stats.n_intersection(a, a) == n_a
        assert stats.n_union(a, a) == n_a


def test_counts_are_symmetric():
    stats = cc.count_cooccurrence([scene(0, {1, 2, 3}), scene(1, {2, 3})])
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            assert stats.n_intersection(a, b) == stats.n_intersection(b, a)
            assert stats.n_union(a, b) == stats.n_union(b, a)


def test_stats_invariants_enforced():
    with pytest.raises(ValueError, match="ordered"):
        CooccurrenceStats(2, {1: 1, 2: 1}, {(2, 1): 1})
    with pytest.raises(ValueError, match="non-positive"):
        CooccurrenceStats(2, {1: 1, 2: 1}, {(1, 2): 0})
    with pytest.raises(ValueError, match="exceeds"):
        CooccurrenceStats(3, {1: 1, 2: 2}, {(1, 2): 2})
    with pytest.raises(ValueError, match="outside"):
        CooccurrenceStats(2, {1: 3}, {})


def test_relation_count_extremes_and_hand_value():
    # always together → 1.0
    stats = cc.count_cooccurrence([scene(0, {1, 2}), scene(1, {1, 2})])
    assert cc.relation_count(stats, 1, 2) == 1.0
    # never together → 0.0
    stats = cc.count_cooccurrence([scene(0, {1}), scene(1, {2})])
    assert cc.relation_count(stats, 1, 2) == 0.0
    # intersection 2, union 5 → 0.4
    scenes = [scene(0, {0, 1}), scene(1, {0, 1}), scene(2, {0}),
              scene(3, {1}), scene(4, {1})]
    stats = cc.count_cooccurrence(scenes)
    assert stats.n_intersection(0, 1) == 2
    assert stats.n_union(0, 1) == 5
    assert cc.relation_count(stats, 0, 1) == 0.4


def test_relation_count_zero_union_rejected():
    stats = cc.count_cooccurrence([scene(0, {1})])
    with pytest.raises(ValueError, match="undefined"):
        cc.relation_count(stats, 7, 8)


def test_pearson_perfect_correlations():
    assert cc.pearson([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert cc.pearson([1, 2, 3, 4], [-1, -2, -3, -4]) == pytest.approx(-1.0)


def test_pearson_hand_value():
    # x=[1,2,3], y=[2,4,7]: dx·dy = 5, |dx| = sqrt(2), |dy| = sqrt(114)/3,
    # so r = 15/sqrt(228)
    got = cc.pearson([1, 2, 3], [2, 4, 7])
    assert abs(got - 15.0 / np.sqrt(228.0)) < 1e-12
    assert abs(got - 0.9933992677987828) < 1e-9


def test_pearson_matches_numpy_on_random_data():
    rng = np.random.default_rng(14)
    for _ in range(20):
        x = rng.normal(size=12)
        y = rng.normal(size=12)
        assert cc.pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1],
                                                 abs=1e-12)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(15)
    x = rng.normal(size=10)
    y = rng.normal(size=10)
    base = cc.pearson(x, y)
    assert abs(cc.pearson(3.5 * x + 2.0, y) - base) < 1e-9
    assert abs(cc.pearson(-2.0 * x, y) + base) < 1e-9


def test_pearson_error_cases():
    with pytest.raises(ValueError, match="equally long"):
        cc.pearson([1, 2], [1, 2, 3])
    with pytest.raises(ValueError, match="two points"):
        cc.pearson([1], [2])
    with pytest.raises(ValueError, match="constant"):
        cc.pearson([5, 5, 5], [1, 2, 3])


def engineered_correlation_fixture(lex):
    """Three classes whose pairwise cosines exactly equal their count
    relations, so the correlation must come out at 1.0.

    Cosines are prescribed through a Cholesky factor of the Gram matrix;
    counts are chosen so R_ab matches each Gram entry.
    """
    gram = np.array([[1.0, 0.5, 0.25],
                     [0.5, 1.0, 0.25],
                     [0.25, 0.25, 1.0]])
    rows = np.linalg.cholesky(gram)
    ids = [16, 17, 123]  # cat, dog, grass
    tokens = [lex.token_for(i) for i in ids]
    emb = cc.EmbeddingMatrix(tokens, rows)
    # R(16,17) = 4/(6+6-4) = 0.5; R(16,123) = 3/(6+9-3) = 0.25; same for (17,123)
    stats = CooccurrenceStats(
        image_total=12,
        class_counts={16: 6, 17: 6, 123: 9},
        pair_counts={(16, 17): 4, (16, 123): 3, (17, 123): 3})
    return emb, stats


def test_correlate_engineered_fixture_is_perfect(lex):
    emb, stats = engineered_correlation_fixture(lex)
    coeff, pairs = cc.correlate_relations(emb, stats, lex)
    assert pairs == 3
    assert abs(coeff - 1.0) < 1e-9


def test_correlate_requires_two_pairs(lex):
    emb = cc.EmbeddingMatrix([lex.token_for(16), lex.token_for(17)], np.eye(2))
    stats = CooccurrenceStats(4, {16: 2, 17: 2}, {(16, 17): 1})
    with pytest.raises(ValueError, match="two class pairs"):
        cc.correlate_relations(emb, stats, lex)


def test_correlate_missing_token_rejected(lex):
    emb = cc.EmbeddingMatrix([lex.token_for(16)], np.eye(1))
    stats = CooccurrenceStats(4, {16: 2, 17: 2, 123: 1}, {})
    with pytest.raises(ValueError, match="does not cover"):
        cc.correlate_relations(emb, stats, lex)


def test_correlate_invariant_to_scene_order(lex):
    rng = np.random.default_rng(16)
    ids = [16, 17, 123, 168]
    tokens = [lex.token_for(i) for i in ids]
    emb = cc.EmbeddingMatrix(tokens, rng.normal(size=(4, 5)))
    scenes = [scene(i, set(rng.choice(ids, size=2, replace=False).tolist()))
              for i in range(12)]
    a = cc.correlate_relations(emb, cc.count_cooccurrence(scenes), lex)
    b = cc.correlate_relations(emb, cc.count_cooccurrence(scenes[::-1]), lex)
    assert a == b


def test_stats_save_load_roundtrip(tmp_path):
    scenes = [scene(0, {1, 2}), scene(1, {2, 3}), scene(2, {1, 2, 3})]
    stats = cc.count_cooccurrence(scenes)
    path = tmp_path / "stats.txt"
    save_stats(path, stats)
    loaded = load_stats(path)
    assert loaded.image_total == stats.image_total
    assert dict(loaded.class_counts) == dict(stats.class_counts)
    assert dict(loaded.pair_counts) == dict(stats.pair_counts)
    first = path.read_text().splitlines()[0]
    assert first == "images 3"


def test_stats_file_validation(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 1 2 2\n")
    with pytest.raises(ValueError, match="images"):
        load_stats(path)
    path.write_text("images 3\n1 1 2\n")
    with pytest.raises(ValueError, match="malformed"):
        load_stats(path)
    path.write_text("images 3\n1 1 2 3\n")
    with pytest.raises(ValueError, match="diagonal"):
        load_stats(path)
    path.write_text("images 3\n1 1 2 2\n2 2 2 2\n1 2 1 4\n")
    with pytest.raises(ValueError, match="union"):
        load_stats(path)
    path.write_text("images 3\n1 1 2 2\n1 1 2 2\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_stats(path)
