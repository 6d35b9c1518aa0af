"""Context-aware dialogue state tracking.

A per-(slot, value) binary scorer that combines referential history lookup,
gated fusion of the previous system utterance with the current user
utterance, and system-act evidence, plus the train/evaluate harness.
"""

__version__ = "0.1.0"

from .types import Act, Dialogue, Ontology, Turn, REQUEST_SLOT  # noqa: F401
