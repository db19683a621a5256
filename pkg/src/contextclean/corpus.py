"""Training corpus construction from per-image caption sets.

Each image contributes one document: the concatenation of its tokenized
captions.  In ``MODIFIED`` mode every token that is not a class label is
removed, leaving only lexicon tokens (multi-word labels collapse to a
single underscore-joined token).  Skip-gram training pairs never cross an
image boundary; the boundary is realized either by hard document limits
or by literally padding the flattened stream with end-of-paragraph
tokens, which is what the pair windows see during training either way.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .lexicon import ClassLexicon, match_tokens, tokenize

ORIGINAL = "original"
MODIFIED = "modified"

HARD_BOUNDARY = "hard_boundary"
LITERAL_EOP = "literal_eop"

#: Reserved boundary token; the tokenizer can never produce it.
EOP_TOKEN = "<eop>"


@dataclass(frozen=True)
class CaptionSet:
    """Raw captions of one image (typically five)."""

    image_id: int
    captions: tuple[str, ...]

    def __post_init__(self):
        if not self.captions:
            raise ValueError(f"image {self.image_id} has an empty caption list")


class Corpus:
    """Ordered per-image token documents plus a derived token vocabulary.

    ``vocab`` lists the distinct document tokens in sorted order;
    ``token_to_id`` is its inverse.  The EOP token is reserved and never
    appears inside a document or in the vocabulary.
    """

    def __init__(self, documents: Iterable[list[str]], mode: str = MODIFIED,
                 eop_token: str = EOP_TOKEN):
        if mode not in (ORIGINAL, MODIFIED):
            raise ValueError(f"unknown corpus mode {mode!r}")
        self.documents = [list(doc) for doc in documents]
        self.mode = mode
        self.eop_token = eop_token
        for doc in self.documents:
            if eop_token in doc:
                raise ValueError("EOP token appears inside a document")
        self.vocab = sorted({tok for doc in self.documents for tok in doc})
        self.token_to_id = {tok: i for i, tok in enumerate(self.vocab)}

    def __len__(self) -> int:
        return len(self.documents)

    def token_counts(self) -> Counter:
        """Unigram counts over all documents."""
        counts: Counter = Counter()
        for doc in self.documents:
            counts.update(doc)
        return counts

    def save(self, path) -> None:
        """Write one whitespace-joined document per line (UTF-8)."""
        with open(path, "w", encoding="utf-8") as fh:
            for doc in self.documents:
                fh.write(" ".join(doc) + "\n")

    @classmethod
    def load(cls, path, mode: str = MODIFIED) -> "Corpus":
        """Read a corpus saved by :meth:`save`; empty lines stay empty documents."""
        with open(path, "r", encoding="utf-8") as fh:
            documents = [line.split() for line in fh.read().splitlines()]
        return cls(documents, mode=mode)


def build_corpus(caption_sets: Iterable[CaptionSet], lexicon: ClassLexicon,
                 mode: str = MODIFIED) -> Corpus:
    """Assemble one document per image from its caption set.

    Captions are tokenized (lowercase, split on non-alphanumeric runs) and
    concatenated in caption order.  In ``MODIFIED`` mode each caption is
    filtered through the lexicon and only class tokens survive; images
    whose filtered document is empty are kept as empty documents so image
    indexing stays aligned with co-occurrence statistics.
    """
    if mode not in (ORIGINAL, MODIFIED):
        raise ValueError(f"unknown corpus mode {mode!r}")
    caption_sets = list(caption_sets)
    seen = set()
    for cs in caption_sets:
        if cs.image_id in seen:
            raise ValueError(f"caption sets not grouped: image {cs.image_id} repeats")
        seen.add(cs.image_id)
    documents = []
    for cs in caption_sets:
        doc: list[str] = []
        for caption in cs.captions:
            tokens = tokenize(caption)
            if mode == MODIFIED:
                ids = match_tokens(lexicon, tokens)
                doc.extend(lexicon.token_for(i) for i in ids)
            else:
                doc.extend(tokens)
        documents.append(doc)
    return Corpus(documents, mode=mode)


def caption_sets_from_annotations(annotations: Iterable[dict]) -> list[CaptionSet]:
    """Group COCO-style caption annotations ``{image_id, caption}`` by image.

    Output order follows first appearance of each image id, captions keep
    annotation order.
    """
    grouped: dict[int, list[str]] = {}
    for ann in annotations:
        grouped.setdefault(ann["image_id"], []).append(ann["caption"])
    return [CaptionSet(image_id=i, captions=tuple(caps))
            for i, caps in grouped.items()]


def generate_pairs(corpus: Corpus, window: int,
                   boundary_mode: str = HARD_BOUNDARY) -> Iterator[tuple[int, int]]:
    """Yield skip-gram (center id, context id) pairs with |offset| <= window.

    ``HARD_BOUNDARY`` slides the window inside each document separately.
    ``LITERAL_EOP`` pads the flattened token stream with ``window`` EOP
    tokens between consecutive documents and drops every pair touching an
    EOP; the surviving pairs are the same multiset either way.  Ids index
    ``corpus.vocab``.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if boundary_mode == HARD_BOUNDARY:
        yield from _pairs_hard(corpus, window)
    elif boundary_mode == LITERAL_EOP:
        yield from _pairs_literal_eop(corpus, window)
    else:
        raise ValueError(f"unknown boundary mode {boundary_mode!r}")


def _pairs_hard(corpus: Corpus, window: int) -> Iterator[tuple[int, int]]:
    to_id = corpus.token_to_id
    for doc in corpus.documents:
        ids = [to_id[tok] for tok in doc]
        n = len(ids)
        for center in range(n):
            lo = max(0, center - window)
            hi = min(n, center + window + 1)
            for ctx in range(lo, hi):
                if ctx != center:
                    yield ids[center], ids[ctx]


def _pairs_literal_eop(corpus: Corpus, window: int) -> Iterator[tuple[int, int]]:
    # EOP is not in the vocabulary; mark it with a sentinel id and filter.
    eop = -1
    to_id = corpus.token_to_id
    stream: list[int] = []
    for k, doc in enumerate(corpus.documents):
        if k > 0:
            stream.extend([eop] * window)
        stream.extend(to_id[tok] for tok in doc)
    n = len(stream)
    for center in range(n):
        lo = max(0, center - window)
        hi = min(n, center + window + 1)
        for ctx in range(lo, hi):
            if ctx == center:
                continue
            pair = (stream[center], stream[ctx])
            if eop not in pair:
                yield pair
