"""Closed vocabulary of object classes and caption-token matching.

The catalog distinguishes countable foreground classes ("thing") from
amorphous background classes ("stuff").  A bundled COCO-Stuff catalog with
91 of each ships as package data; custom catalogs load from the same JSON
layout, so caption-token coverage can be extended without code changes.

Free caption text is mapped onto class labels with a greedy longest-match
over synonym token sequences, with a fixed two-rule plural strip ("es"
then "s") applied to the last token of a candidate sequence.  Tokens that
match nothing are dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

THING = "thing"
STUFF = "stuff"

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs; punctuation is dropped."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class ClassLabel:
    """One catalog entry: contiguous 0-based id, canonical name, kind."""

    id: int
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (THING, STUFF):
            raise ValueError(f"unknown kind {self.kind!r} for label {self.name!r}")

    @property
    def token(self) -> str:
        """Single corpus token for this label (multi-word names joined by '_')."""
        return "_".join(tokenize(self.name))


@dataclass(frozen=True)
class ClassLexicon:
    """Immutable label catalog plus the synonym lookup table.

    ``synonyms`` maps surface token sequences (tuples of lowercased
    tokens) to label ids.  Every label is reachable through at least its
    own tokenized canonical name.
    """

    labels: tuple[ClassLabel, ...]
    synonyms: dict[tuple[str, ...], int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label_id: int) -> ClassLabel:
        return self.labels[label_id]

    def by_name(self, name: str) -> ClassLabel:
        for lab in self.labels:
            if lab.name == name:
                return lab
        raise KeyError(f"no label named {name!r}")

    def thing_ids(self) -> set[int]:
        return {lab.id for lab in self.labels if lab.kind == THING}

    def stuff_ids(self) -> set[int]:
        return {lab.id for lab in self.labels if lab.kind == STUFF}

    def token_for(self, label_id: int) -> str:
        """Corpus token of a label id."""
        return self.labels[label_id].token

    def id_for_token(self, token: str) -> int:
        """Inverse of :meth:`token_for`."""
        for lab in self.labels:
            if lab.token == token:
                return lab.id
        raise KeyError(f"no label with corpus token {token!r}")


def _depluralize(token: str) -> list[str]:
    """Candidate forms of a token: raw, then 'es'-stripped, then 's'-stripped."""
    forms = [token]
    if token.endswith("es") and len(token) > 2:
        forms.append(token[:-2])
    if token.endswith("s") and len(token) > 1:
        forms.append(token[:-1])
    return forms


def load_lexicon(source) -> ClassLexicon:
    """Load a label catalog from a JSON label file.

    Parameters
    ----------
    source : str | Path | file object
        JSON array of ``{"name": str, "kind": "thing"|"stuff",
        "synonyms": [str, ...]}`` objects.  Ids are assigned by file
        order.  The tokenized canonical name is always added as a
        synonym; listed synonyms are extra surface forms.

    Raises
    ------
    ValueError
        On an empty file, a duplicate label name, an unknown kind, or a
        synonym claimed by two different labels.
    """
    if hasattr(source, "read"):
        entries = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            entries = json.load(fh)
    return lexicon_from_entries(entries)


def lexicon_from_entries(entries: Iterable[dict]) -> ClassLexicon:
    """Build a lexicon from an already-parsed list of label entries."""
    entries = list(entries)
    if not entries:
        raise ValueError("label file is empty")
    labels = []
    seen_names = set()
    synonyms: dict[tuple[str, ...], int] = {}
    for idx, entry in enumerate(entries):
        name = entry["name"]
        if name in seen_names:
            raise ValueError(f"duplicate label name {name!r}")
        seen_names.add(name)
        label = ClassLabel(id=idx, name=name, kind=entry["kind"])
        labels.append(label)
        keys = [tuple(tokenize(name))]
        for syn in entry.get("synonyms", ()):
            keys.append(tuple(tokenize(syn)))
        for key in keys:
            if not key:
                raise ValueError(f"empty synonym for label {name!r}")
            if key in synonyms and synonyms[key] != idx:
                other = labels[synonyms[key]].name
                raise ValueError(
                    f"synonym {' '.join(key)!r} claimed by both "
                    f"{other!r} and {name!r}")
            synonyms[key] = idx
    return ClassLexicon(labels=tuple(labels), synonyms=synonyms)


def default_lexicon() -> ClassLexicon:
    """The bundled COCO-Stuff catalog: 91 thing + 91 stuff classes."""
    ref = resources.files("contextclean.data").joinpath("coco_stuff_labels.json")
    with ref.open("r", encoding="utf-8") as fh:
        return load_lexicon(fh)


def match_tokens(lexicon: ClassLexicon, tokens: Sequence[str]) -> list[int]:
    """Map caption tokens onto class label ids, dropping everything else.

    Greedy longest match: at each position the longest synonym sequence
    wins, trying the raw form first, then the last token with a trailing
    "es" stripped, then with a trailing "s" stripped.  Matched ids keep
    caption order; unmatched tokens are skipped.
    """
    table = lexicon.synonyms
    max_len = max((len(k) for k in table), default=1)
    out: list[int] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            seq = tuple(tokens[i:i + length])
            for last in _depluralize(seq[-1]):
                key = seq[:-1] + (last,)
                label_id = table.get(key)
                if label_id is not None:
                    out.append(label_id)
                    i += length
                    matched = True
                    break
            if matched:
                break
        if not matched:
            i += 1
    return out
