"""Synthetic frame features, word boundaries, pooled word vectors, resampling.

Frames stand in for self-supervised speech features: each spoken word
contributes a run of frames drawn from its prototype vector plus noise.
Word-level acoustic vectors are means over boundary intervals; the
continuous baselines are Fourier-resampled frame sequences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from crossaec.errors import AlignmentError, CoverageError, ShapeError
from crossaec.nn.tensor import Tensor, add, matmul, tanh

Boundary = Tuple[int, int]

FRAME_MAGIC = struct.Struct("<II")  # header: frame count, feature dim


def write_frames(frames: np.ndarray, path) -> None:
    """Flat binary frame file: 8-byte (F, D) header + float64 LE values."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ShapeError("frame matrix must be 2D")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(FRAME_MAGIC.pack(frames.shape[0], frames.shape[1]))
        fh.write(np.ascontiguousarray(frames).astype("<f8").tobytes())


def read_frames(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(FRAME_MAGIC.size)
        if len(header) != FRAME_MAGIC.size:
            raise ShapeError(f"{path}: truncated frame header")
        count, dim = FRAME_MAGIC.unpack(header)
        payload = fh.read()
    expected = count * dim * 8
    if len(payload) != expected:
        raise ShapeError(
            f"{path}: expected {expected} payload bytes, found {len(payload)}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(count, dim).copy()


@dataclass
class PrototypeTable:
    """Word -> prototype vector, plus the frame noise level.

    Designated confusable pairs must keep their prototypes at least
    4*noise_sigma apart so the acoustic signal can separate them.
    """

    prototypes: Dict[str, np.ndarray]
    noise_sigma: float
    confusable_pairs: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ShapeError("noise_sigma must be >= 0")
        for a, b in self.confusable_pairs:
            gap = float(np.linalg.norm(self.prototypes[a] - self.prototypes[b]))
            if gap < 4.0 * self.noise_sigma:
                raise CoverageError(
                    f"prototypes for confusable pair ({a}, {b}) are only "
                    f"{gap:.4f} apart (< 4 * noise_sigma)"
                )

    @property
    def dim(self) -> int:
        return next(iter(self.prototypes.values())).shape[0]

    def save(self, path) -> None:
        payload = {
            "noise_sigma": self.noise_sigma,
            "confusable_pairs": [list(p) for p in self.confusable_pairs],
            "prototypes": {w: v.tolist() for w, v in self.prototypes.items()},
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True))

    @classmethod
    def load(cls, path) -> "PrototypeTable":
        payload = json.loads(Path(path).read_text())
        return cls(
            prototypes={
                w: np.asarray(v, dtype=np.float64)
                for w, v in payload["prototypes"].items()
            },
            noise_sigma=float(payload["noise_sigma"]),
            confusable_pairs=tuple(
                (a, b) for a, b in payload.get("confusable_pairs", [])
            ),
        )


def build_prototypes(
    words: Sequence[str],
    confusable_pairs: Sequence[Tuple[str, str]],
    feature_dim: int,
    noise_sigma: float,
    seed: int,
    clusters: Optional[int] = None,
) -> PrototypeTable:
    """Random prototypes; ``clusters`` collapses words onto shared vectors.

    ``clusters=1`` makes the acoustics carry no word identity at all (the
    uninformative-control construction); confusable pairs then cannot be
    requested.
    """
    rng = np.random.default_rng(seed)
    if clusters is None:
        vectors = {w: rng.normal(0.0, 1.0, feature_dim) for w in words}
    else:
        if confusable_pairs:
            raise CoverageError(
                "clustered prototypes cannot guarantee confusable-pair separation"
            )
        centers = rng.normal(0.0, 1.0, (clusters, feature_dim))
        vectors = {w: centers[i % clusters].copy() for i, w in enumerate(words)}
    for a, b in confusable_pairs:
        if a not in vectors or b not in vectors:
            raise CoverageError(f"confusable pair ({a}, {b}) not in word list")
        while np.linalg.norm(vectors[a] - vectors[b]) < 4.0 * noise_sigma:
            vectors[b] = rng.normal(0.0, 1.0, feature_dim)
    return PrototypeTable(
        prototypes=vectors,
        noise_sigma=noise_sigma,
        confusable_pairs=tuple(confusable_pairs),
    )


def synth_frames(
    ref_words: Sequence[str],
    table: PrototypeTable,
    frames_per_word: int,
    rng_seed: int,
) -> Tuple[np.ndarray, List[Boundary]]:
    """Frames for the spoken reference: prototype + gaussian noise per frame.

    Returns the frame matrix and the exact per-reference-word boundaries.
    """
    if frames_per_word < 1:
        raise ShapeError("frames_per_word must be >= 1")
    missing = [w for w in ref_words if w not in table.prototypes]
    if missing:
        raise CoverageError(f"no prototype for words: {sorted(set(missing))}")
    rng = np.random.default_rng(rng_seed)
    rows = []
    boundaries: List[Boundary] = []
    for i, word in enumerate(ref_words):
        start = i * frames_per_word
        boundaries.append((start, start + frames_per_word))
        proto = table.prototypes[word]
        noise = rng.normal(0.0, table.noise_sigma, (frames_per_word, table.dim))
        rows.append(proto[None, :] + noise)
    frames = (
        np.concatenate(rows, axis=0)
        if rows
        else np.zeros((0, table.dim))
    )
    return frames, boundaries


def validate_boundaries(
    boundaries: Sequence[Boundary], num_frames: int, context: str = ""
) -> List[Boundary]:
    prev_end = 0
    checked = []
    for start, end in boundaries:
        if not (0 <= start < end <= num_frames):
            raise AlignmentError(
                f"{context}boundary ({start}, {end}) outside frames [0, {num_frames})"
            )
        if start < prev_end:
            raise AlignmentError(
                f"{context}boundary ({start}, {end}) overlaps previous interval"
            )
        prev_end = end
        checked.append((int(start), int(end)))
    return checked


def load_alignment(record, num_frames: int) -> List[Boundary]:
    """Validated hyp-word boundaries from a corpus record."""
    if record.boundaries is None:
        raise AlignmentError(f"record {record.id!r} carries no boundaries")
    if len(record.boundaries) != len(record.hyp_words):
        raise AlignmentError(
            f"record {record.id!r}: {len(record.boundaries)} boundaries for "
            f"{len(record.hyp_words)} hypothesis words"
        )
    return validate_boundaries(
        record.boundaries, num_frames, context=f"record {record.id!r}: "
    )


def mean_pool_awe(frames: np.ndarray, boundaries: Sequence[Boundary]) -> np.ndarray:
    """Per-word acoustic vectors: arithmetic mean of each boundary interval."""
    frames = np.asarray(frames, dtype=np.float64)
    validate_boundaries(boundaries, frames.shape[0])
    if not boundaries:
        return np.zeros((0, frames.shape[1]))
    return np.stack([frames[s:e].mean(axis=0) for s, e in boundaries])


def fft_resample(frames: np.ndarray, target_len: int) -> np.ndarray:
    """Fourier resampling of each feature column to ``target_len`` rows.

    The spectrum keeps bin 0, bins 1..ceil((L-1)/2) and their conjugate
    images (truncating or zero-padding as needed), then inverse
    transforms and rescales by L/F. L = F reduces to a full copy.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise ShapeError("fft_resample expects a non-empty 2D frame matrix")
    if target_len < 1:
        raise ShapeError("target_len must be >= 1")
    source_len = frames.shape[0]
    spectrum = np.fft.fft(frames, axis=0)
    kept = min(source_len, target_len)
    pos = kept // 2  # == ceil((kept - 1) / 2) for both parities
    out_spec = np.zeros((target_len, frames.shape[1]), dtype=complex)
    out_spec[0] = spectrum[0]
    if pos >= 1:
        out_spec[1 : pos + 1] = spectrum[1 : pos + 1]
        neg = kept - 1 - pos
        if neg >= 1:
            out_spec[target_len - neg :] = spectrum[source_len - neg :]
    resampled = np.fft.ifft(out_spec, axis=0).real * (target_len / source_len)
    return resampled


_RESAMPLE_CACHE: Dict[Tuple[int, int], np.ndarray] = {}


def resample_matrix(source_len: int, target_len: int) -> np.ndarray:
    """The (target_len, source_len) linear operator realized by fft_resample.

    fft_resample is linear in its input, so applying this matrix is
    exactly equivalent; the matrix form lets gradients flow through a
    plain matmul when resampling projected features.
    """
    key = (source_len, target_len)
    cached = _RESAMPLE_CACHE.get(key)
    if cached is None:
        cached = fft_resample(np.eye(source_len), target_len)
        _RESAMPLE_CACHE[key] = cached
    return cached


@dataclass
class DsuSequence:
    """Fixed-length per-word vectors with a padding mask."""

    vectors: np.ndarray
    pad_mask: np.ndarray

    def __post_init__(self):
        if self.vectors.shape[0] != self.pad_mask.shape[0]:
            raise ShapeError("mask length must equal row count")


def pad_dsu(awe: np.ndarray, target_len: int) -> DsuSequence:
    """Zero-pad word vectors up to the word-embedding length."""
    awe = np.asarray(awe, dtype=np.float64)
    count = awe.shape[0]
    if count > target_len:
        raise ShapeError(
            f"{count} acoustic rows exceed the target length {target_len}"
        )
    vectors = np.zeros((target_len, awe.shape[1]))
    vectors[:count] = awe
    mask = np.zeros(target_len, dtype=bool)
    mask[:count] = True
    return DsuSequence(vectors=vectors, pad_mask=mask)


def project_features(raw: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine feature-to-model-dim adapter with a tanh nonlinearity."""
    return tanh(add(matmul(raw, weight), bias))
