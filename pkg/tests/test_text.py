"""Vocabulary, encode/decode, and corpus round-trip contracts."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossaec.errors import (
    CorpusFormatError,
    DegenerateInputError,
    SequenceLengthError,
    VocabularyError,
)
from crossaec.text import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    UNK_ID,
    UNK_WORD,
    CorpusRecord,
    Vocabulary,
    build_vocab,
    decode,
    encode,
    load_corpus,
    normalize_words,
    save_corpus,
)


def _records(*texts):
    return [CorpusRecord(id=str(i), ref_words=t.split()) for i, t in enumerate(texts)]


def test_specials_occupy_fixed_ids():
    vocab = build_vocab(_records("a b"))
    assert (PAD_ID, BOS_ID, EOS_ID, UNK_ID) == (0, 1, 2, 3)
    assert vocab.word_of(UNK_ID) == UNK_WORD
    assert len(vocab) >= 4


def test_build_vocab_frequency_then_lexicographic():
    vocab = build_vocab(_records("a a b"))
    assert vocab.id_of("a") < vocab.id_of("b")
    assert set(vocab.words()) == {"a", "b"}


def test_build_vocab_min_count_drops_rare_words():
    vocab = build_vocab(_records("a a b"), min_count=2)
    assert "b" not in vocab
    assert encode(vocab, ["b"]) == [UNK_ID]


def test_build_vocab_deterministic():
    v1 = build_vocab(_records("c a b a", "b c c"))
    v2 = build_vocab(_records("c a b a", "b c c"))
    assert v1.to_list() == v2.to_list()


def test_build_vocab_pure_function_of_word_multiset():
    v1 = build_vocab(_records("a b", "c c"))
    v2 = build_vocab(_records("c c", "a b"))
    assert v1.to_list() == v2.to_list()


def test_build_vocab_empty_corpus_rejected():
    with pytest.raises(DegenerateInputError):
        build_vocab([])


def test_encode_decode_round_trip():
    vocab = build_vocab(_records("alpha beta gamma"))
    words = ["beta", "alpha", "gamma"]
    assert decode(vocab, encode(vocab, words, add_bos_eos=True)) == words


def test_encode_unknown_word_maps_to_unk():
    vocab = build_vocab(_records("a"))
    assert encode(vocab, ["zzz"]) == [UNK_ID]


def test_encode_empty_with_flag_is_bos_eos():
    vocab = build_vocab(_records("a"))
    assert encode(vocab, [], add_bos_eos=True) == [BOS_ID, EOS_ID]


def test_encode_length_limit():
    vocab = build_vocab(_records("a b c"))
    with pytest.raises(SequenceLengthError):
        encode(vocab, ["a"] * 5, add_bos_eos=True, max_seq_len=6)


def test_decode_strips_specials_and_renders_unk():
    vocab = build_vocab(_records("a"))
    a = vocab.id_of("a")
    assert decode(vocab, [BOS_ID, a, EOS_ID]) == ["a"]
    assert decode(vocab, [BOS_ID, EOS_ID]) == []
    assert decode(vocab, [BOS_ID, UNK_ID, EOS_ID]) == [UNK_WORD]


def test_decode_out_of_range_rejected():
    vocab = build_vocab(_records("a"))
    with pytest.raises(VocabularyError):
        decode(vocab, [len(vocab)])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["cat", "dog", "bird", "fish"]), max_size=8))
def test_round_trip_identity_on_known_words(words):
    vocab = build_vocab(_records("cat dog bird fish"))
    assert decode(vocab, encode(vocab, words, add_bos_eos=True)) == words


def test_normalize_strips_punctuation_keeps_apostrophes():
    assert normalize_words("Don't STOP, now!") == ["don't", "stop", "now"]
    assert normalize_words("'quoted'") == ["quoted"]


def test_corpus_round_trip(tmp_path):
    records = [
        CorpusRecord(id="r0", ref_words=["a", "b"], hyp_words=["a"]),
        CorpusRecord(
            id="r1",
            ref_words=["c"],
            hyp_words=["c", "d"],
            frames_path="frames/r1.bin",
            boundaries=[(0, 4), (4, 8)],
        ),
    ]
    path = tmp_path / "corpus.jsonl"
    save_corpus(records, path)
    loaded = load_corpus(path)
    assert loaded == records


def test_load_corpus_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_corpus(path) == []


def test_load_corpus_without_boundaries(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "x", "ref": "a b", "hyp": "a"}\n')
    (record,) = load_corpus(path)
    assert record.boundaries is None


def test_load_corpus_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "ok", "ref": "a"}\nnot json\n')
    with pytest.raises(CorpusFormatError) as err:
        load_corpus(path)
    assert ":2:" in str(err.value)


def test_boundary_count_must_match_hyp(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "x", "ref": "a b", "hyp": "a", "boundaries": [[0, 1], [1, 2]]}\n')
    with pytest.raises(CorpusFormatError):
        load_corpus(path)


def test_empty_reference_rejected():
    with pytest.raises(CorpusFormatError):
        CorpusRecord(id="x", ref_words=[])
