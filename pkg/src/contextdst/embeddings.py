"""Fixed word-embedding table: pretrained word vectors concatenated with
character n-gram vectors.  Vectors are frozen; the model never updates them.

Both source files use the standard text format, one entry per line: the token
followed by whitespace-separated floats.  The character n-gram file is keyed
by token as well (precomputed per-token n-gram vectors).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _read_vector_file(path: Path, vocab: set[str] | None) -> tuple[dict[str, np.ndarray], int]:
    vectors: dict[str, np.ndarray] = {}
    dim = -1
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            token = parts[0]
            if vocab is not None and token not in vocab:
                continue
            vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float32)
            if dim == -1:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ValueError(
                    f"{path}:{line_no}: vector width {vec.shape[0]} != {dim}"
                )
            vectors[token] = vec
    if dim == -1:
        raise ValueError(f"{path}: no vectors read")
    return vectors, dim


def _token_rng(token: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{token}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


@dataclass(frozen=True)
class EmbeddingTable:
    word_dim: int
    char_dim: int
    lookup: dict[str, np.ndarray] = field(repr=False)

    @property
    def width(self) -> int:
        return self.word_dim + self.char_dim

    @property
    def oov_vector(self) -> np.ndarray:
        return np.zeros(self.width, dtype=np.float32)

    def vector(self, token: str) -> np.ndarray:
        vec = self.lookup.get(token)
        return self.oov_vector if vec is None else vec

    @classmethod
    def from_text_files(
        cls,
        word_path: str | Path,
        char_path: str | Path | None = None,
        char_dim: int = 100,
        vocab: list[str] | set[str] | None = None,
    ) -> "EmbeddingTable":
        """Build a table from vector files, restricted to ``vocab`` if given.

        Tokens missing from the character file get a zero character block;
        tokens missing from the word file are dropped entirely (they embed
        as OOV zeros).
        """
        vocab_set = set(vocab) if vocab is not None else None
        word_vecs, word_dim = _read_vector_file(Path(word_path), vocab_set)
        if char_path is not None:
            char_vecs, char_dim = _read_vector_file(Path(char_path), vocab_set)
        else:
            char_vecs = {}
        lookup = {}
        for token, wvec in word_vecs.items():
            cvec = char_vecs.get(token)
            if cvec is None:
                cvec = np.zeros(char_dim, dtype=np.float32)
            lookup[token] = np.concatenate([wvec, cvec]).astype(np.float32)
        return cls(word_dim=word_dim, char_dim=char_dim, lookup=lookup)

    @classmethod
    def random(
        cls,
        vocab: list[str] | set[str],
        word_dim: int = 300,
        char_dim: int = 100,
        seed: int = 0,
    ) -> "EmbeddingTable":
        """Deterministic per-token random vectors, for tests and dry runs.

        Each token's vector depends only on (token, seed), never on the
        insertion order of the vocabulary.
        """
        width = word_dim + char_dim
        lookup = {}
        for token in sorted(set(vocab)):
            rng = _token_rng(token, seed)
            lookup[token] = rng.uniform(-0.5, 0.5, size=width).astype(np.float32)
        return cls(word_dim=word_dim, char_dim=char_dim, lookup=lookup)

    def to_arrays(self) -> tuple[list[str], np.ndarray, int, int]:
        tokens = sorted(self.lookup)
        matrix = np.stack([self.lookup[t] for t in tokens]) if tokens else \
            np.zeros((0, self.width), dtype=np.float32)
        return tokens, matrix, self.word_dim, self.char_dim

    @classmethod
    def from_arrays(
        cls, tokens: list[str], matrix: np.ndarray, word_dim: int, char_dim: int
    ) -> "EmbeddingTable":
        lookup = {t: np.asarray(matrix[i], dtype=np.float32) for i, t in enumerate(tokens)}
        return cls(word_dim=word_dim, char_dim=char_dim, lookup=lookup)


def embed(tokens: list[str], table: EmbeddingTable) -> np.ndarray:
    """Embed a token sequence as an [n x width] matrix.

    The empty sequence embeds as a single all-zeros sentinel row so that
    every encoder input is non-empty.
    """
    if not tokens:
        return np.zeros((1, table.width), dtype=np.float32)
    return np.stack([table.vector(t) for t in tokens])
