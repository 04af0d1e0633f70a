"""Vocabulary, word-level tokenization, and corpus file I/O.

One token is one word: acoustic vectors are word-aligned, so a 1:1
token/word mapping keeps that alignment exact. Normalization (lowercase,
strip punctuation except apostrophes) is applied once at ingestion and
shared by training and metrics, which makes WER casing- and
punctuation-insensitive by construction.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from crossaec.errors import (
    CorpusFormatError,
    DegenerateInputError,
    SequenceLengthError,
    VocabularyError,
)

log = logging.getLogger(__name__)

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")
UNK_WORD = "<unk>"

_KEEP = re.compile(r"[^a-z0-9' ]+")


def normalize_words(text: str) -> List[str]:
    """Lowercase, drop punctuation except apostrophes, split on whitespace."""
    cleaned = _KEEP.sub(" ", text.lower())
    return [w.strip("'") for w in cleaned.split() if w.strip("'")]


class Vocabulary:
    """Bijective word<->id map with fixed special ids PAD/BOS/EOS/UNK."""

    def __init__(self, words: Sequence[str]):
        self._id_to_word: List[str] = list(SPECIALS) + list(words)
        self._word_to_id = {w: i for i, w in enumerate(self._id_to_word)}
        if len(self._word_to_id) != len(self._id_to_word):
            raise VocabularyError("duplicate words in vocabulary")

    def __len__(self) -> int:
        return len(self._id_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self._word_to_id

    def id_of(self, word: str) -> int:
        return self._word_to_id.get(word, UNK_ID)

    def word_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._id_to_word):
            raise VocabularyError(f"id {idx} outside vocabulary of size {len(self)}")
        return self._id_to_word[idx]

    def words(self) -> List[str]:
        """Non-special words in id order."""
        return self._id_to_word[len(SPECIALS):]

    def to_list(self) -> List[str]:
        return list(self._id_to_word)

    @classmethod
    def from_list(cls, id_to_word: Sequence[str]) -> "Vocabulary":
        if tuple(id_to_word[: len(SPECIALS)]) != SPECIALS:
            raise VocabularyError("vocabulary list must start with the specials")
        return cls(id_to_word[len(SPECIALS):])


@dataclass
class CorpusRecord:
    """One utterance: reference words, hypothesis words, optional acoustics."""

    id: str
    ref_words: List[str]
    hyp_words: List[str] = field(default_factory=list)
    frames_path: Optional[str] = None
    boundaries: Optional[List[Tuple[int, int]]] = None

    def __post_init__(self):
        if not self.ref_words:
            raise CorpusFormatError(f"record {self.id!r} has an empty reference")
        if self.boundaries is not None and len(self.boundaries) != len(self.hyp_words):
            raise CorpusFormatError(
                f"record {self.id!r}: {len(self.boundaries)} boundaries for "
                f"{len(self.hyp_words)} hypothesis words"
            )


def build_vocab(records: Iterable[CorpusRecord], min_count: int = 1) -> Vocabulary:
    """Frequency-then-lexicographic vocabulary over all corpus words."""
    counts: Counter = Counter()
    empty = True
    for record in records:
        empty = False
        counts.update(record.ref_words)
        counts.update(record.hyp_words)
    if empty:
        raise DegenerateInputError("cannot build a vocabulary from an empty corpus")
    kept = [w for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda w: (-counts[w], w))
    return Vocabulary(kept)


def encode(
    vocab: Vocabulary,
    words: Sequence[str],
    add_bos_eos: bool = False,
    max_seq_len: Optional[int] = None,
) -> List[int]:
    ids = [vocab.id_of(w) for w in words]
    if add_bos_eos:
        ids = [BOS_ID] + ids + [EOS_ID]
    if max_seq_len is not None and len(ids) > max_seq_len:
        raise SequenceLengthError(
            f"sequence of {len(ids)} tokens exceeds max_seq_len {max_seq_len}"
        )
    return ids


def decode(vocab: Vocabulary, ids: Sequence[int]) -> List[str]:
    """Ids back to words, stripping PAD/BOS/EOS; UNK renders as a sentinel."""
    words = []
    for idx in ids:
        if idx in (PAD_ID, BOS_ID, EOS_ID):
            continue
        words.append(vocab.word_of(int(idx)))
    return words


def record_to_json(record: CorpusRecord) -> str:
    payload: dict = {
        "id": record.id,
        "ref": " ".join(record.ref_words),
        "hyp": " ".join(record.hyp_words),
    }
    if record.frames_path is not None:
        payload["frames"] = record.frames_path
    if record.boundaries is not None:
        payload["boundaries"] = [[int(s), int(e)] for s, e in record.boundaries]
    return json.dumps(payload, sort_keys=True)


def _record_from_payload(payload: dict, where: str) -> CorpusRecord:
    try:
        rec_id = payload["id"]
        ref = payload["ref"]
    except KeyError as exc:
        raise CorpusFormatError(f"{where}: missing field {exc}") from None
    if not isinstance(rec_id, str) or not isinstance(ref, str):
        raise CorpusFormatError(f"{where}: id and ref must be strings")
    hyp = payload.get("hyp", "")
    boundaries = payload.get("boundaries")
    if boundaries is not None:
        try:
            boundaries = [(int(s), int(e)) for s, e in boundaries]
        except (TypeError, ValueError):
            raise CorpusFormatError(
                f"{where}: boundaries must be [start, end] integer pairs"
            ) from None
    try:
        return CorpusRecord(
            id=rec_id,
            ref_words=normalize_words(ref),
            hyp_words=normalize_words(hyp),
            frames_path=payload.get("frames"),
            boundaries=boundaries,
        )
    except CorpusFormatError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from None


def load_corpus(path) -> List[CorpusRecord]:
    """Read one JSON record per line; malformed lines carry line numbers."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(payload, dict):
                raise CorpusFormatError(f"{path}:{lineno}: record must be an object")
            records.append(_record_from_payload(payload, f"{path}:{lineno}"))
    return records


def save_corpus(records: Iterable[CorpusRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")
