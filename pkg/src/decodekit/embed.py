"""Token embedding tables and the cosine alignment used by ASTS scoring.

The on-disk format is the classic word-vector text layout: a header line
``<count> <dim>`` followed by one ``<token> v1 .. v_dim`` row per token.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from decodekit.core import Vocabulary


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file violates the text format."""


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {self.dim}")

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.vectors[token]
        except KeyError:
            raise KeyError(f"token {token!r} has no embedding") from None

    def covers(self, vocab: Vocabulary) -> list[str]:
        """Tokens of ``vocab`` that are missing from this table."""
        return [t for t in vocab.tokens if t not in self.vectors]


def load_table(path) -> EmbeddingTable:
    """Parse a text embedding file; format errors carry 1-based line numbers."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise EmbeddingFormatError(f"{path}: line 1: missing '<count> <dim>' header")
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingFormatError(f"{path}: line 1: header must be '<count> <dim>'")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError(f"{path}: line 1: header fields must be integers") from None
        if count < 0 or dim < 1:
            raise EmbeddingFormatError(f"{path}: line 1: invalid header values {count} {dim}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split()
            token = fields[0]
            if len(fields) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: expected {dim} values for {token!r}, got {len(fields) - 1}"
                )
            if token in vectors:
                raise EmbeddingFormatError(f"{path}: line {lineno}: duplicate token {token!r}")
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(
                    f"{path}: line {lineno}: non-numeric component for {token!r}"
                ) from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}: line {lineno}: non-finite component for {token!r}")
            vec.flags.writeable = False
            vectors[token] = vec
    if len(vectors) != count:
        raise EmbeddingFormatError(
            f"{path}: header declares {count} rows but file contains {len(vectors)}"
        )
    return EmbeddingTable(dim=dim, vectors=vectors)


def save_table(path, table: EmbeddingTable) -> None:
    """Inverse of load_table; handy for fixtures and synthetic tables."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for token, vec in table.vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def cosine(a, b) -> float:
    """Cosine similarity; rejects zero-norm inputs rather than guessing."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"cosine: shape mismatch {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def context_embedding(
    history,
    table: EmbeddingTable,
    vocab: Vocabulary,
    pooling: str = "mean",
    decay: float = 0.8,
    context_window: int = 0,
) -> np.ndarray:
    """Pool the embeddings of the generated history into one context vector.

    ``pooling`` is "mean" (default) or "decay"; decay pooling weights token
    age ``a`` (0 = most recent) by ``decay ** a`` before averaging.
    ``context_window`` keeps only the trailing N history tokens (0 = all).
    Unknown tokens are a hard error naming the offender; silently skipping
    them would quietly bias the alignment scores.
    """
    ids = list(history)
    if context_window > 0:
        ids = ids[-context_window:]
    if not ids:
        raise ValueError("context_embedding requires a nonempty history")
    if pooling not in ("mean", "decay"):
        raise ValueError(f"unknown pooling {pooling!r}, expected 'mean' or 'decay'")
    rows = []
    for tid in ids:
        token = vocab.tokens[tid]
        if token not in table:
            raise KeyError(f"token {token!r} has no embedding")
        rows.append(table.vector(token))
    mat = np.stack(rows)
    if pooling == "mean":
        return mat.mean(axis=0)
    if not 0.0 < decay <= 1.0:
        raise ValueError(f"decay must lie in (0, 1], got {decay}")
    ages = np.arange(len(ids) - 1, -1, -1, dtype=np.float64)
    w = decay**ages
    return (mat * w[:, None]).sum(axis=0) / w.sum()


def synthetic_table(vocab: Vocabulary, dim: int = 16, seed: int = 0) -> EmbeddingTable:
    """Deterministic hash-derived unit vectors, one per vocabulary token.

    Each vector is seeded from blake2b(seed, token), so the table depends
    only on (seed, token string) and is identical across platforms.
    """
    if dim < 1:
        raise ValueError(f"embedding dimension must be >= 1, got {dim}")
    vectors: dict[str, np.ndarray] = {}
    for token in vocab.tokens:
        digest = hashlib.blake2b(
            f"{seed}\x1f{token}".encode("utf-8"), digest_size=8
        ).digest()
        gen = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
        vec = gen.standard_normal(dim)
        norm = np.linalg.norm(vec)
        while norm == 0.0:  # astronomically unlikely, but keep the unit-norm contract
            vec = gen.standard_normal(dim)
            norm = np.linalg.norm(vec)
        vec = vec / norm
        vec.flags.writeable = False
        vectors[token] = vec
    return EmbeddingTable(dim=dim, vectors=vectors)
