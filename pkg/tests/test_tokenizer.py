import json
from pathlib import Path

from contextdst.tokenizer import tokenize

GOLDEN = Path(__file__).parent / "data" / "tokenizer_golden.json"


def test_basic_lowercasing_and_punctuation():
    assert tokenize("I want Indian food.") == ["i", "want", "indian", "food", "."]


def test_empty_text():
    assert tokenize("") == []
    assert tokenize("   \t\n") == []


def test_intra_word_hyphen_kept():
    assert tokenize("mid-priced?") == ["mid-priced", "?"]


def test_deterministic():
    text = "Book at 18:30 -- it's cheap-ish!"
    assert tokenize(text) == tokenize(text)


def test_golden_file():
    pairs = json.loads(GOLDEN.read_text(encoding="utf-8"))
    assert len(pairs) == 50
    for text, expected in pairs:
        assert tokenize(text) == expected, f"tokenize({text!r})"
