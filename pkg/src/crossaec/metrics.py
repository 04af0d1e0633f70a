"""Reference metrics: WER from a Levenshtein alignment, BLEU, and GLEU.

WER, BLEU, and GLEU are reported on a 0..100 scale. The same alignment
drives WER, the per-type error counts, and the channel profiler.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from crossaec.errors import DegenerateInputError

Pair = Tuple[Sequence[str], Sequence[str]]

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class EditOp:
    kind: str
    ref_index: int  # position in ref (or the gap before it, for inserts)
    hyp_index: int


@dataclass(frozen=True)
class EditAlignment:
    """Minimal-cost edit script turning ref into hyp."""

    ops: Tuple[EditOp, ...]

    @property
    def cost(self) -> int:
        return sum(1 for op in self.ops if op.kind != MATCH)

    def counts(self) -> Tuple[int, int, int]:
        s = sum(1 for op in self.ops if op.kind == SUBSTITUTE)
        i = sum(1 for op in self.ops if op.kind == INSERT)
        d = sum(1 for op in self.ops if op.kind == DELETE)
        return s, i, d


def edit_ops(ref_words: Sequence[str], hyp_words: Sequence[str]) -> EditAlignment:
    """Unit-cost Levenshtein alignment.

    Ties break in favor of match > substitute > delete > insert, applied
    during backtrace from the end, which makes the alignment (not just
    its cost) deterministic.
    """
    n, m = len(ref_words), len(hyp_words)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = ref_words[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (0 if ri == hyp_words[j - 1] else 1)
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)
    ops: List[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = ref_words[i - 1] == hyp_words[j - 1]
            if dist[i][j] == dist[i - 1][j - 1] + (0 if same else 1):
                ops.append(
                    EditOp(MATCH if same else SUBSTITUTE, i - 1, j - 1)
                )
                i -= 1
                j -= 1
                continue
        if i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(EditOp(DELETE, i - 1, j))
            i -= 1
            continue
        ops.append(EditOp(INSERT, i, j - 1))
        j -= 1
    ops.reverse()
    return EditAlignment(tuple(ops))


def corpus_edit_counts(pairs: Iterable[Pair]) -> Tuple[int, int, int, int]:
    """Total (S, I, D, N_ref) over a corpus of (ref, hyp) pairs."""
    s = i = d = n = 0
    for ref, hyp in pairs:
        ds, di, dd = edit_ops(ref, hyp).counts()
        s += ds
        i += di
        d += dd
        n += len(ref)
    return s, i, d, n


def wer(pairs: Iterable[Pair]) -> float:
    """Corpus word error rate as a percentage: 100 * (S+I+D) / N_ref."""
    s, i, d, n = corpus_edit_counts(pairs)
    if n == 0:
        raise DegenerateInputError("WER over zero reference words")
    return 100.0 * (s + i + d) / n


def _ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[k : k + n]) for k in range(len(words) - n + 1))


def bleu(pairs: Iterable[Pair], max_n: int = 4) -> float:
    """Corpus BLEU on 0..100 with clipped n-gram counts.

    Smoothing: for n >= 2 only, add one to numerator and denominator
    when either is zero at the corpus level (tiny corpora otherwise hit
    log 0).
    """
    pairs = list(pairs)
    matched = [0] * (max_n + 1)
    total = [0] * (max_n + 1)
    ref_len = 0
    hyp_len = 0
    for ref, hyp in pairs:
        ref_len += len(ref)
        hyp_len += len(hyp)
        for n in range(1, max_n + 1):
            hyp_counts = _ngrams(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref, n)
            total[n] += sum(hyp_counts.values())
            matched[n] += sum(
                min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items()
            )
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        num, den = matched[n], total[n]
        if n >= 2 and (den == 0 or num == 0):
            num += 1
            den += 1
        if num == 0 or den == 0:
            return 0.0
        log_sum += math.log(num / den)
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_sum / max_n)


def sentence_gleu(ref: Sequence[str], hyp: Sequence[str], max_n: int = 4) -> float:
    """min(n-gram precision, n-gram recall) over the pooled 1..max_n grams."""
    ref_counts: Counter = Counter()
    hyp_counts: Counter = Counter()
    for n in range(1, max_n + 1):
        ref_counts.update(_ngrams(ref, n))
        hyp_counts.update(_ngrams(hyp, n))
    overlap = sum((ref_counts & hyp_counts).values())
    ref_total = sum(ref_counts.values())
    hyp_total = sum(hyp_counts.values())
    if ref_total == 0 or hyp_total == 0:
        return 0.0
    return min(overlap / hyp_total, overlap / ref_total)


def gleu(pairs: Iterable[Pair], max_n: int = 4) -> float:
    """Reference-token-weighted mean of sentence GLEU, on 0..100."""
    weighted = 0.0
    weight = 0.0
    for ref, hyp in pairs:
        weighted += len(ref) * sentence_gleu(ref, hyp, max_n)
        weight += len(ref)
    if weight == 0:
        raise DegenerateInputError("GLEU over zero reference words")
    return 100.0 * weighted / weight


@dataclass(frozen=True)
class MetricsReport:
    """Corpus metric values plus the edit-operation counts behind WER."""

    wer: float
    bleu: float
    gleu: float
    substitutions: int
    insertions: int
    deletions: int
    ref_words: int

    @classmethod
    def compute(cls, pairs: Iterable[Pair]) -> "MetricsReport":
        pairs = [(list(r), list(h)) for r, h in pairs]
        s, i, d, n = corpus_edit_counts(pairs)
        if n == 0:
            raise DegenerateInputError("metrics over zero reference words")
        return cls(
            wer=100.0 * (s + i + d) / n,
            bleu=bleu(pairs),
            gleu=gleu(pairs),
            substitutions=s,
            insertions=i,
            deletions=d,
            ref_words=n,
        )

    def to_dict(self) -> dict:
        return {
            "wer": self.wer,
            "bleu": self.bleu,
            "gleu": self.gleu,
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "ref_words": self.ref_words,
        }
