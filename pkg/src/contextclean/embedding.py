"""Class-label vector embeddings trained with skip-gram negative sampling.

Single-threaded SGD over (center, context) pairs drawn from the corpus,
negatives sampled from the unigram distribution raised to a configurable
exponent.  Training is bit-for-bit reproducible for a fixed seed: pair
shuffling and negative draws come from one seeded generator and updates
run in a fixed order.  Similarity queries use the center vectors only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tsne as _tsne
from .corpus import Corpus, generate_pairs


@dataclass
class TrainConfig:
    """Skip-gram training hyperparameters.

    ``steps`` counts SGD updates over individual (center, context) pairs;
    the shuffled pair stream is cycled as needed.  Defaults follow common
    word2vec practice where unspecified: 5 negatives per pair and a 0.75
    noise exponent.
    """

    dim: int = 128
    window: int = 3
    steps: int = 100_000
    negatives_per_pair: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.negatives_per_pair < 1:
            raise ValueError(
                f"negatives_per_pair must be >= 1, got {self.negatives_per_pair}")


class EmbeddingMatrix:
    """Trained vectors: one row per vocabulary token, vocab order fixed."""

    def __init__(self, vocab: Sequence[str], vectors: np.ndarray,
                 context_vectors: np.ndarray | None = None):
        self.vocab = list(vocab)
        self.vectors = np.asarray(vectors, dtype=float)
        self.context_vectors = (None if context_vectors is None
                                else np.asarray(context_vectors, dtype=float))
        if self.vectors.shape[0] != len(self.vocab):
            raise ValueError("row count does not match vocabulary size")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding contains non-finite entries")
        self._index = {tok: i for i, tok in enumerate(self.vocab)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __getitem__(self, token: str) -> np.ndarray:
        try:
            return self.vectors[self._index[token]]
        except KeyError:
            raise KeyError(f"token {token!r} not in embedding vocabulary") from None

    def save(self, path) -> None:
        """Write the word-vector text format: '<vocab> <dim>' header, then
        one 'token v1 ... vdim' line per row, full float64 precision."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.vocab)} {self.dim}\n")
            for tok, row in zip(self.vocab, self.vectors):
                fh.write(tok + " " + " ".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ValueError(f"malformed embedding header in {path}")
            n, dim = int(header[0]), int(header[1])
            vocab, rows = [], []
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                vocab.append(parts[0])
                row = np.array([float(v) for v in parts[1:]], dtype=float)
                if row.shape[0] != dim:
                    raise ValueError(
                        f"row for {parts[0]!r} has {row.shape[0]} values, "
                        f"expected {dim}")
                rows.append(row)
        if len(vocab) != n:
            raise ValueError(f"expected {n} rows, found {len(vocab)}")
        return cls(vocab, np.vstack(rows))


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # -log(1 + exp(-x)) computed without overflow on either tail
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))),
                    x - np.log1p(np.exp(-np.abs(x))))


def sgns_loss(center: np.ndarray, context: np.ndarray,
              negatives: np.ndarray) -> float:
    """Negative-sampling loss of one pair.

    ``-log s(center.context) - sum_n log s(-center.negative_n)`` with
    ``s`` the logistic function; ``negatives`` has one row per sample.
    """
    center = np.asarray(center, dtype=float)
    pos = float(_log_sigmoid(np.dot(context, center)))
    neg = float(_log_sigmoid(-(np.asarray(negatives) @ center)).sum())
    return -(pos + neg)


def sgns_gradients(center: np.ndarray, context: np.ndarray,
                   negatives: np.ndarray):
    """Gradients of :func:`sgns_loss` w.r.t. center, context, and negatives."""
    center = np.asarray(center, dtype=float)
    context = np.asarray(context, dtype=float)
    negatives = np.asarray(negatives, dtype=float)
    g_pos = _stable_sigmoid(np.atleast_1d(np.dot(context, center)))[0] - 1.0
    g_negs = _stable_sigmoid(negatives @ center)  # shape (k,)
    grad_center = g_pos * context + g_negs @ negatives
    grad_context = g_pos * center
    grad_negatives = g_negs[:, None] * center[None, :]
    return grad_center, grad_context, grad_negatives


def train(corpus: Corpus, config: TrainConfig) -> EmbeddingMatrix:
    """Train embeddings for exactly ``config.steps`` SGD pair updates.

    The vocabulary is the set of distinct corpus tokens.  Pairs are
    materialized with hard image boundaries, reshuffled each pass, and
    cycled until the step budget is spent.  The learning rate decays
    linearly from ``learning_rate`` to ``min_learning_rate``.

    Raises ``ValueError`` if the corpus yields no pairs and
    ``FloatingPointError`` if the loss diverges to a non-finite value.
    """
    pairs = list(generate_pairs(corpus, config.window))
    if not pairs:
        raise ValueError("corpus yields no training pairs")
    vocab = corpus.vocab
    n_vocab = len(vocab)
    rng = np.random.default_rng(config.seed)

    init_bound = 0.5 / config.dim
    vectors = rng.uniform(-init_bound, init_bound, size=(n_vocab, config.dim))
    context_vectors = np.zeros((n_vocab, config.dim))

    counts = corpus.token_counts()
    noise = np.array([counts[tok] for tok in vocab], dtype=float)
    noise = noise ** config.noise_exponent
    noise_cdf = np.cumsum(noise / noise.sum())

    pair_arr = np.array(pairs, dtype=np.int64)
    order = np.arange(len(pair_arr))
    k = config.negatives_per_pair
    lr0, lr_min = config.learning_rate, config.min_learning_rate

    step = 0
    while step < config.steps:
        rng.shuffle(order)
        for idx in order:
            if step >= config.steps:
                break
            lr = max(lr_min, lr0 * (1.0 - step / config.steps))
            c, o = pair_arr[idx]
            neg_ids = np.searchsorted(noise_cdf, rng.random(k))
            neg_ids = neg_ids[neg_ids != o]  # skip draws equal to the true context
            v = vectors[c]
            g_pos = _stable_sigmoid(np.atleast_1d(context_vectors[o] @ v))[0] - 1.0
            grad_v = g_pos * context_vectors[o]
            context_vectors[o] -= lr * g_pos * v
            if neg_ids.size:
                negs = context_vectors[neg_ids]
                g_negs = _stable_sigmoid(negs @ v)
                grad_v = grad_v + g_negs @ negs
                # subtract.at accumulates repeated ids; plain fancy-index
                # assignment would apply duplicates only once
                np.subtract.at(context_vectors, neg_ids,
                               lr * g_negs[:, None] * v[None, :])
            vectors[c] = v - lr * grad_v
            step += 1
        if not np.all(np.isfinite(vectors)):
            raise FloatingPointError(
                "training diverged to non-finite values; lower the learning rate")
    if not np.all(np.isfinite(vectors)):
        raise FloatingPointError(
            "training diverged to non-finite values; lower the learning rate")
    return EmbeddingMatrix(vocab, vectors, context_vectors)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u, v) / (|u| |v|), clamped to [-1, 1] against rounding."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for a zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def nearest_neighbors(emb: EmbeddingMatrix, token: str,
                      k: int) -> list[tuple[str, float]]:
    """Top-k vocabulary tokens by cosine similarity to ``token``.

    The query token itself is excluded; ties break by vocabulary order.
    """
    if token not in emb:
        raise KeyError(f"token {token!r} not in embedding vocabulary")
    if not 1 <= k < len(emb.vocab):
        raise ValueError(f"k must be in [1, {len(emb.vocab) - 1}], got {k}")
    query = emb[token]
    scored = [(tok, cosine_similarity(query, emb.vectors[i]))
              for i, tok in enumerate(emb.vocab) if tok != token]
    # stable sort keeps vocab order among equal similarities
    scored.sort(key=lambda ts: -ts[1])
    return scored[:k]


def project_tsne(emb: EmbeddingMatrix, perplexity: float = 5.0,
                 iters: int = 1000, seed: int = 0) -> np.ndarray:
    """2D t-SNE coordinates of the embedding, one row per vocab token."""
    return _tsne.tsne(emb.vectors, perplexity=perplexity, iters=iters, seed=seed)


def save_projection(path, emb: EmbeddingMatrix, coords: np.ndarray) -> None:
    """Write 'token x y' lines matching the vocabulary order."""
    with open(path, "w", encoding="utf-8") as fh:
        for tok, (x, y) in zip(emb.vocab, coords):
            fh.write(f"{tok} {x:.17g} {y:.17g}\n")
