"""Deterministic word tokenizer used everywhere text meets the model.

Rules: lowercase; maximal runs of alphanumerics are tokens, keeping
intra-word hyphens and apostrophes ("mid-priced", "don't"); every other
non-space character becomes its own token.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*|[^a-z0-9\s]")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())
