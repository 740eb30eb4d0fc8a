import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liesensor.errors import ChecksumError
from liesensor.textprep import (
    Vocabulary,
    build_vocabulary,
    lemmatize,
    normalize_text,
    prepare_text,
    tokenize,
)


class TestNormalize:
    def test_collapses_letter_runs(self):
        assert normalize_text("I am sooooo HAPPY") == "i am soo happy"

    def test_strips_urls_mentions_hash(self):
        assert normalize_text("coool #blessed @sam http://x.co") == "cool blessed"

    def test_empty(self):
        assert normalize_text("") == ""

    def test_digits_not_collapsed(self):
        assert normalize_text("year 2000 aaaand 11111") == "year 2000 aand 11111"

    def test_hashtag_body_kept(self):
        assert normalize_text("#MondayMood") == "mondaymood"

    def test_www_urls_stripped(self):
        assert normalize_text("see www.example.com now") == "see now"

    @given(st.text(max_size=200))
    @settings(max_examples=300)
    def test_idempotent(self, raw):
        once = normalize_text(raw)
        assert normalize_text(once) == once


class TestTokenize:
    def test_basic(self):
        assert tokenize("i am soo happy") == ["i", "am", "soo", "happy"]

    def test_punctuation_split(self):
        assert tokenize("well-known fact!!!") == ["well", "known", "fact"]

    def test_empty(self):
        assert tokenize("") == []

    def test_underscore_splits(self):
        assert tokenize("well_known") == ["well", "known"]

    @given(st.text(max_size=200))
    @settings(max_examples=300)
    def test_pipeline_token_invariants(self, raw):
        tokens = tokenize(normalize_text(raw))
        for tok in tokens:
            assert tok, "no empty tokens"
            assert not any(ch.isspace() for ch in tok)
            runs = 1
            worst = 1
            for a, b in zip(tok, tok[1:]):
                runs = runs + 1 if a == b else 1
                worst = max(worst, runs)
                if a.isalpha() and runs > 2:
                    pytest.fail(f"letter run of {runs} in {tok!r}")


class TestLemmatize:
    @pytest.mark.parametrize(
        "token,expected",
        [
            ("parties", "party"),
            ("running", "runn"),
            ("is", "is"),
            ("kisses", "kiss"),
            ("played", "play"),
            ("cats", "cat"),
            ("thing", "thing"),  # no vowel left in stem
            ("boss", "boss"),  # ss-final retained
            ("2000", "2000"),
        ],
    )
    def test_golden(self, token, expected):
        assert lemmatize(token) == expected

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12))
    @settings(max_examples=500)
    def test_idempotent(self, token):
        once = lemmatize(token)
        assert lemmatize(once) == once


class TestVocabulary:
    def test_min_count_threshold(self):
        vocab = build_vocabulary([["a", "a", "b"], ["a", "c"]], min_count=2)
        assert dict(vocab.term_to_index) == {"a": 0}
        assert vocab.document_frequency == {"a": 2}

    def test_frequency_then_lexicographic_order(self):
        vocab = build_vocabulary([["a", "a", "b"], ["a", "c"]], min_count=1)
        assert dict(vocab.term_to_index) == {"a": 0, "b": 1, "c": 2}

    def test_empty_is_error(self):
        with pytest.raises(ValueError, match="empty vocabulary"):
            build_vocabulary([], min_count=1)
        with pytest.raises(ValueError, match="empty vocabulary"):
            build_vocabulary([["a"]], min_count=5)

    def test_rebuild_is_pure(self):
        docs = [["x", "y", "x"], ["z", "y"], ["x"]]
        v1 = build_vocabulary(docs, min_count=1)
        v2 = build_vocabulary(list(docs), min_count=1)
        assert v1.term_to_index == v2.term_to_index

    def test_roundtrip_byte_identical(self, tmp_path):
        vocab = build_vocabulary([["a", "a", "b"], ["a", "c"]], min_count=1)
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.term_to_index == vocab.term_to_index
        assert loaded.document_frequency == vocab.document_frequency
        assert loaded.min_count == vocab.min_count
        path2 = tmp_path / "vocab2.tsv"
        loaded.save(path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_truncated_file_integrity_error(self, tmp_path):
        vocab = build_vocabulary([["a", "a", "b"], ["a", "c"]], min_count=1)
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        lines = path.read_text().splitlines()
        (tmp_path / "cut.tsv").write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ChecksumError):
            Vocabulary.load(tmp_path / "cut.tsv")


def test_prepare_text_full_path():
    assert prepare_text("Loving these parties!!! @bob") == ["lov", "these", "party"]
