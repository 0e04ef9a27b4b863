import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topicforge.errors import EmptyVocabulary
from topicforge.represent import (
    LlmConfig,
    ctfidf,
    fallback_label,
    label_prompt_template,
    llm_label,
    mmr_select,
    ngrams,
    render_label_prompt,
    representative_documents,
    tokenize_count,
    top_terms,
    topic_centroid,
    _parse_label,
)

# single-token documents so the vocabulary stays uni-gram only
TOY_CLASSES = {
    0: ["apple"] * 2 + ["banana"] * 5,
    1: ["apple"] * 1 + ["banana"] * 4,
    2: ["apple"] * 1 + ["banana"] * 2,
}

# W[t,c] = tf * ln(1 + A/f_t) with A = 15/3 = 5, f = (4, 11); values frozen
# from the formula evaluated by hand
TOY_WEIGHTS = np.array([
    [1.6218604324326575, 1.8734672472070535],   # 2 ln 2.25 in the corner
    [0.8109302162163288, 1.4987737977656428],
    [0.8109302162163288, 0.7493868988828214],
])


class TestNgrams:
    def test_uni_and_bigrams(self):
        assert ngrams("your mother said") == [
            "your", "mother", "said", "your mother", "mother said"]

    def test_single_token(self):
        assert ngrams("hello") == ["hello"]

    def test_empty(self):
        assert ngrams("") == []


class TestTokenizeCount:
    def test_counts_and_vocabulary(self):
        vocab, counts, class_ids = tokenize_count(TOY_CLASSES)
        assert vocab.terms == ("apple", "banana")
        assert class_ids == (0, 1, 2)
        assert counts.tolist() == [[2, 5], [1, 4], [1, 2]]

    def test_min_df_drops_rare_terms(self):
        classes = {0: ["common rare", "common words"], 1: ["common again"]}
        vocab, counts, _ = tokenize_count(classes)
        assert "rare" not in vocab.terms
        assert "common" in vocab.terms

    def test_bigrams_counted(self):
        classes = {0: ["your mother said", "your mother left"]}
        vocab, counts, _ = tokenize_count(classes)
        assert "your mother" in vocab.terms

    def test_empty_vocabulary(self):
        with pytest.raises(EmptyVocabulary):
            tokenize_count({0: ["unique"], 1: ["different"]})

    def test_no_classes(self):
        with pytest.raises(EmptyVocabulary):
            tokenize_count({})


class TestCtfidf:
    def test_toy_matrix_matches_hand_computation(self):
        vocab, counts, class_ids = tokenize_count(TOY_CLASSES)
        matrix = ctfidf(counts, class_ids)
        assert np.allclose(matrix.weights, TOY_WEIGHTS, atol=1e-9)
        assert matrix.avg_words_per_class == pytest.approx(5.0)
        assert matrix.corpus_term_frequency.tolist() == [4.0, 11.0]

    def test_corner_entry_is_two_ln_two_and_a_quarter(self):
        vocab, counts, class_ids = tokenize_count(TOY_CLASSES)
        matrix = ctfidf(counts, class_ids)
        assert matrix.weights[0, 0] == pytest.approx(2 * np.log(2.25), abs=1e-9)

    def test_absent_term_scores_zero(self):
        matrix = ctfidf(np.array([[3, 0], [0, 2]]))
        assert matrix.weights[0, 1] == 0.0
        assert matrix.weights[1, 0] == 0.0


class TestTopTerms:
    def test_descending_weight(self):
        vocab, counts, class_ids = tokenize_count(TOY_CLASSES)
        matrix = ctfidf(counts, class_ids)
        terms = top_terms(matrix, vocab, 0, k=2)
        assert terms[0][0] == "banana"
        assert terms[0][1] > terms[1][1]

    def test_tie_breaks_lexicographically(self):
        classes = {0: ["zebra", "zebra", "aardvark", "aardvark"],
                   1: ["zebra", "aardvark"]}
        vocab, counts, class_ids = tokenize_count(classes)
        matrix = ctfidf(counts, class_ids)
        terms = top_terms(matrix, vocab, 0)
        assert [t for t, _ in terms] == ["aardvark", "zebra"]

    def test_zero_weight_terms_excluded(self):
        matrix = ctfidf(np.array([[2, 0], [1, 3]]))
        from topicforge.represent import Vocabulary
        vocab = Vocabulary(terms=("a", "b"), doc_frequency=np.array([2, 2]))
        assert [t for t, _ in top_terms(matrix, vocab, 0)] == ["a"]


class TestMmr:
    def test_redundant_term_deferred(self):
        candidates = [("a", 1.0), ("b", 0.9), ("c", 0.5)]
        vectors = {"a": np.array([1.0, 0.0]), "b": np.array([1.0, 0.0]),
                   "c": np.array([0.0, 1.0])}
        picked = mmr_select(candidates, vectors, lam=0.7, k=3)
        assert [t for t, _ in picked] == ["a", "c", "b"]

    def test_lambda_one_keeps_relevance_order(self):
        candidates = [("a", 0.9), ("b", 1.0), ("c", 0.5)]
        picked = mmr_select(candidates, lam=1.0, k=3)
        assert [t for t, _ in picked] == ["b", "a", "c"]

    def test_tie_goes_to_lower_index(self):
        candidates = [("x", 0.5), ("y", 0.5)]
        vectors = {"x": np.array([1.0, 0.0]), "y": np.array([0.0, 1.0])}
        assert mmr_select(candidates, vectors, k=1)[0][0] == "x"

    def test_empty(self):
        assert mmr_select([]) == []


class TestCentroidAndDocs:
    def test_centroid_is_mean(self):
        emb = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(topic_centroid(emb), [0.5, 0.5])

    def test_representative_docs_closest_first(self):
        centroid = np.array([1.0, 0.0])
        vectors = np.array([[0.0, 1.0], [1.0, 0.1], [1.0, 0.0]])
        texts = ["far", "near", "exact"]
        assert representative_documents(texts, vectors, centroid, limit=2) == \
            ["exact", "near"]

    def test_limit_defaults_to_four(self):
        vectors = np.eye(6)
        out = representative_documents([f"d{i}" for i in range(6)], vectors,
                                       np.ones(6))
        assert len(out) == 4


class TestLabeling:
    def test_prompt_template_structure(self):
        template = label_prompt_template()
        assert "[DOCUMENTS]" in template
        assert "[KEYWORDS]" in template
        assert "at most 5 words" in template
        assert "topic: <topic label>" in template

    def test_render_substitutes(self):
        prompt = render_label_prompt(["anxiety", "worry"], ["doc one", "doc two"])
        assert "anxiety, worry" in prompt
        assert "doc one\ndoc two" in prompt
        assert "[DOCUMENTS]" not in prompt

    def test_parse_label(self):
        assert _parse_label("topic: Fear of Losing Control") == "Fear of Losing Control"
        assert _parse_label("Sure!\ntopic: one two three four five six") == \
            "one two three four five"
        assert _parse_label("no marker here") == "no marker here"

    def test_fallback_label(self):
        assert fallback_label(["a", "b", "c", "d"]) == "a/b/c"

    def test_no_endpoint_uses_fallback(self):
        assert llm_label(["a", "b", "c"], []) == "a/b/c"

    def test_http_success(self, monkeypatch):
        class FakeResponse:
            def raise_for_status(self):
                pass

            def json(self):
                return {"text": "topic: Sleep Problems"}

        monkeypatch.setattr("topicforge.represent.requests.post",
                            lambda *a, **k: FakeResponse())
        config = LlmConfig(endpoint="http://llm/complete")
        assert llm_label(["sleep", "insomnia"], ["doc"], config) == "Sleep Problems"

    def test_service_down_falls_back(self, monkeypatch):
        import requests

        def fail(*a, **k):
            raise requests.ConnectionError("down")

        monkeypatch.setattr("topicforge.represent.requests.post", fail)
        config = LlmConfig(endpoint="http://llm/complete", retries=2)
        assert llm_label(["sleep", "insomnia"], ["doc"], config) == "sleep/insomnia"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.text(st.characters(whitelist_categories=("Ll",)),
                                  min_size=1, max_size=6),
                          st.floats(0, 1)),
                min_size=1, max_size=8, unique_by=lambda t: t[0]))
def test_mmr_returns_permutation_of_candidates(candidates):
    picked = mmr_select(candidates, k=len(candidates))
    assert sorted(picked) == sorted(candidates)
