import json

import numpy as np
import pytest

from topicforge.errors import (
    DimensionMismatch,
    InsufficientData,
    NothingToUndo,
    OverlappingGroups,
    UnknownTopicId,
)
from topicforge.model import (
    CurationOp,
    TopicModel,
    apply_op,
    assemble_model,
    distance_map,
    mark_other,
    merge_topics,
    rename_topic,
    topic_hierarchy,
    undo,
)


class TestAssembly:
    def test_version_zero(self, small_model):
        assert small_model.version == 0
        assert small_model.curation_log == []

    def test_noise_becomes_others(self, small_model):
        others = small_model.topic(-1)
        assert others.is_other
        assert others.label == "Others"
        assert others.size == 6

    def test_topic_sizes_partition_documents(self, small_model):
        assert sum(t.size for t in small_model.topics) == small_model.n_docs

    def test_keywords_present_and_weighted(self, small_model):
        topic = small_model.topic(0)
        assert 1 <= len(topic.keywords) <= 10
        assert all(w > 0 for _, w in topic.keywords)

    def test_fallback_labels(self, small_model):
        topic = small_model.topic(0)
        assert topic.label == "/".join(w for w, _ in topic.keywords[:3])

    def test_mismatched_lengths_rejected(self, small_model):
        from topicforge.model import _base_kwargs
        kwargs = _base_kwargs(small_model)
        kwargs["base_assignments"] = kwargs["base_assignments"][:-1]
        with pytest.raises(DimensionMismatch):
            TopicModel(**kwargs)

    def test_representative_documents(self, small_model):
        docs = small_model.topic_documents(0, limit=3)
        assert len(docs) == 3
        assert all(isinstance(d, str) for d in docs)

    def test_unknown_topic(self, small_model):
        with pytest.raises(UnknownTopicId):
            small_model.topic(99)


class TestMerge:
    def test_merge_conserves_documents(self, small_model):
        merged = merge_topics(small_model, [{0, 1}])
        assert sum(t.size for t in merged.topics) == small_model.n_docs
        assert len(merged.topics) == len(small_model.topics) - 1
        assert merged.version == 1

    def test_merge_keeps_lowest_id(self, small_model):
        merged = merge_topics(small_model, [{1, 2}])
        ids = {t.topic_id for t in merged.topics}
        assert 1 in ids and 2 not in ids

    def test_merged_centroid_is_member_mean(self, small_model):
        merged = merge_topics(small_model, [{0, 1}])
        members = merged.assignments == 0
        expected = merged.embeddings[members].mean(axis=0)
        assert np.allclose(merged.topic(0).centroid, expected)

    def test_group_too_small(self, small_model):
        with pytest.raises(OverlappingGroups):
            merge_topics(small_model, [{0}])

    def test_overlapping_groups(self, small_model):
        with pytest.raises(OverlappingGroups):
            merge_topics(small_model, [{0, 1}, {1, 2}])

    def test_cannot_merge_others(self, small_model):
        with pytest.raises(UnknownTopicId):
            merge_topics(small_model, [{-1, 0}])

    def test_unknown_id(self, small_model):
        with pytest.raises(UnknownTopicId):
            merge_topics(small_model, [{0, 42}])


class TestMarkOtherAndRename:
    def test_mark_other_grows_others(self, small_model):
        before = small_model.topic(-1).size
        moved = small_model.topic(2).size
        marked = mark_other(small_model, [2])
        assert marked.topic(-1).size == before + moved
        assert 2 not in {t.topic_id for t in marked.topics}

    def test_rename(self, small_model):
        renamed = rename_topic(small_model, 0, "Family Matters")
        assert renamed.topic(0).label == "Family Matters"
        assert renamed.topic(1).label == small_model.topic(1).label

    def test_rename_survives_unrelated_ops(self, small_model):
        model = rename_topic(small_model, 0, "Kept")
        model = mark_other(model, [2])
        assert model.topic(0).label == "Kept"


class TestUndoAndReplay:
    def test_undo_restores_assignments(self, small_model):
        merged = merge_topics(small_model, [{0, 1}])
        restored = undo(merged)
        assert np.array_equal(restored.assignments, small_model.assignments)
        assert restored.version == 2  # undo is itself logged

    def test_undo_empty_log(self, small_model):
        with pytest.raises(NothingToUndo):
            undo(small_model)

    def test_undo_past_effective_ops(self, small_model):
        model = undo(merge_topics(small_model, [{0, 1}]))
        with pytest.raises(NothingToUndo):
            undo(model)

    def test_replay_reproduces_model_bit_exactly(self, small_model):
        model = merge_topics(small_model, [{0, 1}])
        model = rename_topic(model, 0, "merged topic")
        payload = json.dumps(model.to_dict(), sort_keys=True)
        replayed = TopicModel.from_dict(json.loads(payload))
        assert json.dumps(replayed.to_dict(), sort_keys=True) == payload
        assert np.array_equal(replayed.assignments, model.assignments)
        assert [t.label for t in replayed.topics] == [t.label for t in model.topics]

    def test_save_load_round_trip(self, small_model, tmp_path):
        model = mark_other(small_model, [1])
        path = tmp_path / "model.json"
        model.save(path)
        loaded = TopicModel.load(path)
        assert loaded.version == model.version
        assert np.array_equal(loaded.assignments, model.assignments)

    def test_apply_op_dispatch(self, small_model):
        op = CurationOp(kind="rename", payload={"topic_id": 0, "label": "X"},
                        timestamp=CurationOp.now())
        assert apply_op(small_model, op).topic(0).label == "X"
        with pytest.raises(ValueError):
            apply_op(small_model, CurationOp(kind="explode", payload={}))


class TestCoherenceRecompute:
    def test_metric_tracked_through_curation(self, small_model):
        from topicforge.model import _base_kwargs
        model = TopicModel(**{**_base_kwargs(small_model),
                              "coherence_metric": "c_v"})
        assert model.coherence is not None
        merged = merge_topics(model, [{0, 1}])
        assert merged.coherence is not None
        assert len(merged.coherence.topic_ids) == len(model.coherence.topic_ids) - 1


class TestHierarchyAndMap:
    def test_hierarchy_structure(self, small_model):
        hierarchy = topic_hierarchy(small_model)
        k = len(hierarchy.leaves)
        assert -1 not in hierarchy.leaves
        assert len(hierarchy.nodes) == k - 1
        assert set(hierarchy.nodes[-1].leaf_topic_ids) == set(hierarchy.leaves)
        distances = [n.distance for n in hierarchy.nodes]
        assert distances == sorted(distances)

    def test_hierarchy_needs_two_topics(self, small_model):
        model = merge_topics(small_model, [{0, 1, 2}])
        with pytest.raises(InsufficientData):
            topic_hierarchy(model)

    def test_distance_map_entries(self, small_model):
        entries = distance_map(small_model)
        assert {e.topic_id for e in entries} == {0, 1, 2}
        assert all(np.isfinite([e.x, e.y]).all() for e in entries)
        assert all(e.size == small_model.topic(e.topic_id).size for e in entries)

    def test_distance_map_reflects_separation(self, six_pool_model):
        model, _ = six_pool_model
        entries = distance_map(model)
        coords = np.array([[e.x, e.y] for e in entries])
        # six well-separated topics should not collapse to one point
        assert np.ptp(coords, axis=0).max() > 1e-6
