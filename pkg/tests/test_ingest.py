import io
import json
import re

import pytest
from hypothesis import given, strategies as st

from topicforge.errors import EmptyCorpus, InputFormatError
from topicforge.ingest import (
    Document,
    PreprocessConfig,
    documents_from_jsonl,
    documents_to_jsonl,
    normalize_lexical,
    parse_transcripts,
    preprocess_corpus,
    segment_sentences,
    select_role,
    strip_metadata,
    Utterance,
)


def make_lines(*records):
    return io.StringIO("\n".join(json.dumps(r) for r in records) + "\n")


VALID = {"session_id": "s1", "speaker": "T", "role": "therapist", "text": "Hello there."}


class TestParseTranscripts:
    def test_basic_parse_and_indexing(self):
        stream = make_lines(
            VALID,
            {**VALID, "role": "client", "text": "Hi."},
            {**VALID, "session_id": "s2", "text": "Second session."},
            {**VALID, "text": "Back to one."},
        )
        utts = parse_transcripts(stream, "c")
        assert [u.index for u in utts] == [0, 1, 0, 2]
        assert utts[0].role == "therapist"
        assert utts[1].role == "client"

    def test_blank_lines_skipped(self):
        stream = io.StringIO("\n" + json.dumps(VALID) + "\n\n")
        assert len(parse_transcripts(stream, "c")) == 1

    def test_invalid_json_reports_line(self):
        stream = io.StringIO(json.dumps(VALID) + "\n{nope\n")
        with pytest.raises(InputFormatError, match="line 2"):
            parse_transcripts(stream, "c")

    @pytest.mark.parametrize("missing", ["session_id", "role", "text"])
    def test_missing_field(self, missing):
        rec = {k: v for k, v in VALID.items() if k != missing}
        with pytest.raises(InputFormatError, match=missing):
            parse_transcripts(make_lines(rec), "c")

    def test_unknown_role(self):
        with pytest.raises(InputFormatError, match="role"):
            parse_transcripts(make_lines({**VALID, "role": "narrator"}), "c")

    def test_empty_text(self):
        with pytest.raises(InputFormatError, match="empty text"):
            parse_transcripts(make_lines({**VALID, "text": "   "}), "c")

    def test_empty_stream(self):
        with pytest.raises(EmptyCorpus):
            parse_transcripts(io.StringIO(""), "c")


class TestSelectRole:
    def test_filters_and_preserves_order(self):
        utts = parse_transcripts(make_lines(
            VALID, {**VALID, "role": "client"}, {**VALID, "text": "Again."}), "c")
        picked = select_role(utts, "therapist")
        assert [u.text for u in picked] == ["Hello there.", "Again."]

    def test_empty_selection_warns(self, caplog):
        utts = parse_transcripts(make_lines(VALID), "c")
        with caplog.at_level("WARNING"):
            assert select_role(utts, "client") == []
        assert "client" in caplog.text


class TestSegmentSentences:
    def setup_method(self):
        self.config = PreprocessConfig()

    def test_terminators(self):
        assert segment_sentences("Really? Yes! Okay then.", self.config) == [
            "Really?", "Yes!", "Okay then."]

    def test_abbreviation_not_split(self):
        out = segment_sentences("I saw Dr. Smith today. He helped.", self.config)
        assert out == ["I saw Dr. Smith today.", "He helped."]

    def test_trailing_fragment_kept(self):
        assert segment_sentences("So I was thinking", self.config) == ["So I was thinking"]


class TestStripMetadata:
    def setup_method(self):
        self.config = PreprocessConfig()

    def test_pause_marks_removed(self):
        assert strip_metadata("well (2.5) I think [pause] so", self.config) == \
            "well I think so"

    def test_identifier_removed(self):
        assert strip_metadata("Q12: how did that feel", self.config) == \
            "how did that feel"


class TestNormalizeLexical:
    def setup_method(self):
        self.config = PreprocessConfig.default()

    def test_contraction_expanded(self):
        assert normalize_lexical("I don't know", self.config) == "I do not know"

    def test_filler_dropped_with_punctuation(self):
        assert normalize_lexical("Mhm, I see", self.config) == "I see"
        assert normalize_lexical("uh well um yes", self.config) == "well yes"

    def test_orthography_unified(self):
        assert normalize_lexical("ok, that is alright", self.config) == \
            "okay, that is all right"

    def test_punctuation_preserved_around_replacement(self):
        assert normalize_lexical("can't!", self.config) == "cannot!"


class TestPreprocessCorpus:
    def test_end_to_end(self):
        utts = [Utterance("s1", "T", "therapist", 0,
                          "Mhm. I don't know Dr. Lee. (1.0) Really?")]
        docs = preprocess_corpus(utts, PreprocessConfig.default(), "c")
        assert [d.text for d in docs] == ["i do not know dr. lee.", "really?"]
        assert docs[0].doc_id == "c:s1:0:1"
        assert docs[1].sentence_ordinal == 2

    def test_all_output_lowercase(self):
        utts = [Utterance("s1", "T", "therapist", 0, "HELLO There. FINE!")]
        docs = preprocess_corpus(utts, PreprocessConfig.default(), "c")
        assert all(d.text == d.text.lower() for d in docs)

    def test_empty_documents_dropped(self):
        utts = [Utterance("s1", "T", "therapist", 0, "Mhm. Good!")]
        docs = preprocess_corpus(utts, PreprocessConfig.default(), "c")
        assert [d.text for d in docs] == ["good!"]

    def test_nothing_survives(self):
        utts = [Utterance("s1", "T", "therapist", 0, "Mhm mhm.")]
        with pytest.raises(EmptyCorpus):
            preprocess_corpus(utts, PreprocessConfig.default(), "c")

    def test_no_utterances(self):
        with pytest.raises(EmptyCorpus):
            preprocess_corpus([], PreprocessConfig.default(), "c")


class TestJsonlRoundTrip:
    def test_round_trip(self):
        docs = [Document("c:s:0:0", "hello there.", "c", "s", 0, 0),
                Document("c:s:0:1", "bye.", "c", "s", 0, 1)]
        text = documents_to_jsonl(docs)
        assert documents_from_jsonl(io.StringIO(text)) == docs

    def test_bad_line(self):
        with pytest.raises(InputFormatError, match="line 1"):
            documents_from_jsonl(io.StringIO('{"doc_id": "x"}\n'))


@given(st.text(alphabet=st.characters(whitelist_categories=("Ll", "Zs")), max_size=80))
def test_segmentation_preserves_tokens(text):
    config = PreprocessConfig()
    joined = " ".join(segment_sentences(text, config))
    assert joined.split() == text.split()


@given(st.lists(st.sampled_from(["don't", "mhm", "ok", "hello", "I'm", "fine."]),
                min_size=1, max_size=10))
def test_normalize_never_emits_fillers(tokens):
    config = PreprocessConfig.default()
    out = normalize_lexical(" ".join(tokens), config)
    for tok in out.split():
        core = re.sub(r"[^\w']", "", tok).lower()
        assert core not in config.filler_list
