"""Crossmodal ASR error correction at desk scale.

A trainable encoder/decoder corrector that fuses per-word acoustic
vectors into word embeddings via cross-attention, plus a simulated ASR
error channel, WER/BLEU/GLEU metrics, and a seeded experiment harness.
"""

__version__ = "0.1.0"
