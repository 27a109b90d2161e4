"""Normalization, tokenization, edit distance, and vocabulary."""

import pytest

from openqa.text import (
    CLS, PAD, SEP, UNK,
    EntityDictionary, TokenSequence, Vocabulary,
    decode, encode, levenshtein, normalize, tokenize,
)


class TestNormalize:
    def test_lowercase_trim_collapse(self):
        assert normalize("  Who   WROTE  Hamlet ") == "who wrote hamlet"

    def test_strips_terminal_punctuation(self):
        assert normalize("Who wrote Hamlet?") == "who wrote hamlet"
        assert normalize("done.") == "done"
        assert normalize("wait!") == "wait"

    def test_keeps_interior_punctuation(self):
        assert normalize("Hello, World!") == "hello, world"

    def test_empty(self):
        assert normalize("   ") == ""
        assert normalize("") == ""


class TestTokenize:
    def test_basic_tokens_and_spans(self):
        seq = tokenize("who wrote hamlet")
        assert seq.tokens == ("who", "wrote", "hamlet")
        assert seq.spans == ((0, 3), (4, 9), (10, 16))

    def test_interior_marks_stay_in_token(self):
        assert tokenize("don't e-mail 3.14").tokens == ("don't", "e-mail", "3.14")

    def test_empty_text(self):
        assert tokenize("") == TokenSequence((), ())

    def test_dictionary_merges_longest_match(self):
        d = EntityDictionary({"new york": "new_york", "new york city": "nyc"}, 3)
        seq = tokenize("visit New York City now", d)
        assert seq.tokens == ("visit", "new york city", "now")

    def test_dictionary_match_is_forward_greedy(self):
        d = EntityDictionary({"new york": "new_york"}, 2)
        seq = tokenize("in new york today", d)
        assert seq.tokens == ("in", "new york", "today")
        # spans still index into the normalized string
        start, end = seq.spans[1]
        assert normalize("in new york today")[start:end] == "new york"


class TestLevenshtein:
    @pytest.mark.parametrize("a,b,d", [
        ("", "", 0), ("a", "", 1), ("", "abc", 3),
        ("kitten", "sitting", 3), ("flaw", "lawn", 2),
        ("same", "same", 0), ("ab", "ba", 2),
    ])
    def test_known_distances(self, a, b, d):
        assert levenshtein(a, b) == d

    def test_symmetry(self):
        assert levenshtein("paris", "pairs") == levenshtein("pairs", "paris")


class TestVocabulary:
    def test_reserved_ids(self):
        v = Vocabulary()
        assert (PAD, UNK, CLS, SEP) == (0, 1, 2, 3)
        assert v.token_of(PAD) == "<pad>"
        assert v.token_of(UNK) == "<unk>"
        assert v.token_of(CLS) == "<cls>"
        assert v.token_of(SEP) == "<sep>"

    def test_add_and_lookup(self):
        v = Vocabulary(["alpha", "beta"])
        assert v.id_of("alpha") == 4
        assert v.id_of("beta") == 5
        assert v.id_of("missing") == UNK
        assert v.add("beta") == 5  # idempotent
        assert len(v) == 6

    def test_save_load_roundtrip(self, tmp_path):
        v = Vocabulary(["alpha", "beta", "gamma"])
        path = str(tmp_path / "vocab.txt")
        v.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.size == v.size
        assert loaded.id_of("gamma") == v.id_of("gamma")

    def test_encode_decode(self):
        v = Vocabulary(["who", "wrote"])
        ids = encode(v, ["who", "wrote", "hamlet"])
        assert ids == [4, 5, UNK]
        assert decode(v, ids) == ["who", "wrote", "<unk>"]
