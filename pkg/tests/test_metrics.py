"""Metric scoring tests: question decomposition, score identities, parsing."""

import numpy as np
import pytest

from compbench.backends import BackendSet, FakeChat, FakeEmbedder, FakeVqa, ImageRef, fake_backend_set
from compbench.geometry import BBox, Detection
from compbench.metrics import (
    MetricConfig,
    MetricError,
    MetricInapplicable,
    MetricScore,
    blip_clip_score,
    bvqa_score,
    clip_score,
    default_cot_prompts,
    disentangle,
    mgpt_cot_score,
    mgpt_score,
    parse_score_response,
    three_in_one,
    unidet_metric,
)
from compbench.suite import AttributeSpec, ObjectSpec, PromptRecord, RelationSpec

IMG = ImageRef("img1", "sha256:" + "0" * 64)
CFG = MetricConfig()


def attr_record(pairs, category="color", text=None, rid="p1"):
    objects = tuple(
        ObjectSpec(noun, tuple(AttributeSpec(kind, value) for kind, value in attrs))
        for noun, attrs in pairs
    )
    return PromptRecord(
        id=rid,
        category=category,
        split="test",
        text=text or "placeholder text",
        objects=objects,
        source="chatgpt",
    )


class TestDisentangle:
    def test_two_color_objects(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
            text="a green bench and a red car",
        )
        questions = [q.text for q in disentangle(record)]
        assert questions == ["a green bench?", "a red car?"]

    def test_mixed_attribute_kinds(self):
        record = attr_record(
            [("tree", [("shape", "tall")]), ("car", [("color", "red")])],
            category="complex",
            text="a tall tree and a red car",
        )
        questions = [q.text for q in disentangle(record)]
        assert questions == ["a tall tree?", "a red car?"]

    def test_single_object(self):
        record = attr_record([("vase", [("color", "blue")])])
        assert [q.text for q in disentangle(record)] == ["a blue vase?"]

    def test_multi_attribute_object_folds_with_commas(self):
        record = attr_record([("apple", [("shape", "big"), ("color", "green")])], category="complex")
        assert [q.text for q in disentangle(record)] == ["a big, green apple?"]

    def test_unfolded_multi_attribute(self):
        record = attr_record([("apple", [("shape", "big"), ("color", "green")])], category="complex")
        questions = [q.text for q in disentangle(record, fold_multi_attribute=False)]
        assert questions == ["a big apple?", "a green apple?"]

    def test_structure_missing_rejected(self):
        record = PromptRecord(
            id="x", category="color", split="test", text="a red car",
            structure_missing=True, source="chatgpt",
        )
        with pytest.raises(MetricInapplicable):
            disentangle(record)

    def test_vowel_article(self):
        record = attr_record([("mirror", [("shape", "oval")])])
        assert [q.text for q in disentangle(record)] == ["an oval mirror?"]


class TestBvqa:
    def test_product_of_probabilities(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
        )
        backends = BackendSet(
            vqa=FakeVqa(overrides={("img1", "a green bench?"): 0.9, ("img1", "a red car?"): 0.8})
        )
        score = bvqa_score(IMG, record, backends, CFG)
        assert score.value == pytest.approx(0.72, abs=1e-15)
        assert score.detail["probabilities"] == [0.9, 0.8]

    def test_zero_probability_absorbs(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
        )
        backends = BackendSet(
            vqa=FakeVqa(overrides={("img1", "a green bench?"): 0.0, ("img1", "a red car?"): 0.8})
        )
        assert bvqa_score(IMG, record, backends, CFG).value == 0.0

    def test_three_object_product(self):
        record = attr_record(
            [
                ("bench", [("color", "green")]),
                ("car", [("color", "red")]),
                ("vase", [("color", "blue")]),
            ],
            category="complex",
        )
        backends = BackendSet(
            vqa=FakeVqa(
                overrides={
                    ("img1", "a green bench?"): 1.0,
                    ("img1", "a red car?"): 1.0,
                    ("img1", "a blue vase?"): 0.5,
                }
            )
        )
        assert bvqa_score(IMG, record, backends, CFG).value == 0.5

    def test_value_equals_product_of_detail(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
        )
        backends = BackendSet(vqa=FakeVqa(seed=7))
        score = bvqa_score(IMG, record, backends, CFG)
        product = 1.0
        for p in score.detail["probabilities"]:
            product *= p
        assert score.value == product

    def test_appending_question_never_increases(self):
        two = attr_record([("bench", [("color", "green")]), ("car", [("color", "red")])])
        three = attr_record(
            [
                ("bench", [("color", "green")]),
                ("car", [("color", "red")]),
                ("vase", [("color", "blue")]),
            ],
            category="complex",
        )
        backends = BackendSet(vqa=FakeVqa(seed=7))
        assert (
            bvqa_score(IMG, three, backends, CFG).value
            <= bvqa_score(IMG, two, backends, CFG).value
        )


def embedder_with(text_vectors=None, image_vectors=None):
    return BackendSet(
        embedder=FakeEmbedder(
            text_overrides=text_vectors or {}, image_overrides=image_vectors or {}
        ),
        captioner=fake_backend_set().captioner,
    )


class TestClipScores:
    def test_identical_embeddings(self):
        e = np.array([1.0, 0.0, 0.0])
        backends = embedder_with({"a red car": e}, {"img1": e})
        assert clip_score(IMG, "a red car", backends).value == pytest.approx(1.0)

    def test_orthogonal_embeddings(self):
        backends = embedder_with(
            {"a red car": np.array([1.0, 0.0])}, {"img1": np.array([0.0, 1.0])}
        )
        assert clip_score(IMG, "a red car", backends).value == 0.0

    def test_antiparallel_clamped_to_zero(self):
        backends = embedder_with(
            {"a red car": np.array([1.0, 0.0])}, {"img1": np.array([-1.0, 0.0])}
        )
        score = clip_score(IMG, "a red car", backends)
        assert score.value == 0.0
        assert score.detail["cosine"] == pytest.approx(-1.0)

    def test_blip_clip_caption_equals_prompt(self):
        backends = fake_backend_set(seed=1)
        backends.captioner.overrides["img1"] = "a red car"
        assert blip_clip_score(IMG, "a red car", backends).value == pytest.approx(1.0, abs=1e-9)

    def test_blip_clip_orthogonal_caption(self):
        backends = embedder_with(
            {
                "some caption": np.array([1.0, 0.0]),
                "a red car": np.array([0.0, 1.0]),
            }
        )
        backends.captioner.overrides["img1"] = "some caption"
        assert blip_clip_score(IMG, "a red car", backends).value == 0.0


def spatial_prompt(noun_a, word, noun_b, rid="sp1"):
    return PromptRecord(
        id=rid, category="spatial", split="test",
        text=f"a {noun_a} {word} a {noun_b}",
        objects=(ObjectSpec(noun_a), ObjectSpec(noun_b)),
        relations=(RelationSpec(0, 1, word, "spatial"),),
    )


class TestUnidetMetric:
    def test_satisfied_relation(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        backends = fake_backend_set()
        backends.detector.overrides["img1"] = [
            Detection("girl", 0.9, BBox(10, 200, 100, 400)),
            Detection("horse", 0.8, BBox(300, 180, 480, 420)),
        ]
        score = unidet_metric(IMG, record, backends, CFG)
        assert score.value == 1.0
        assert score.detail["relations"][0]["stage"] == "ok"

    def test_empty_detections(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        assert unidet_metric(IMG, record, fake_backend_set(), CFG).value == 0.0

    def test_record_without_spatial_relation_inapplicable(self):
        record = attr_record([("car", [("color", "red")])])
        with pytest.raises(MetricInapplicable):
            unidet_metric(IMG, record, fake_backend_set(), CFG)


def complex_record(objects, relations=(), rid="cx1", text="a complex scene"):
    return PromptRecord(
        id=rid, category="complex", split="test", text=text,
        objects=objects, relations=relations, source="chatgpt",
    )


class TestThreeInOne:
    def test_mean_of_three_components(self):
        # b_vqa = 0.5 * 0.6 = 0.30; unidet = 3/5 = 0.60; clip = 0.15
        objects = (
            ObjectSpec("bench", (AttributeSpec("color", "green"),)),
            ObjectSpec("car", (AttributeSpec("color", "red"),)),
            ObjectSpec("vase", ()),
        )
        relations = (
            RelationSpec(0, 1, "on the left of", "spatial"),    # satisfied
            RelationSpec(1, 0, "on the right of", "spatial"),   # satisfied
            RelationSpec(2, 1, "next to", "spatial"),           # satisfied (95 px apart)
            RelationSpec(0, 2, "on the top of", "spatial"),     # not satisfied (same row)
            RelationSpec(1, 2, "on the bottom of", "spatial"),  # not satisfied
        )
        record = complex_record(objects, relations, text="a green bench and a red car near a vase")
        backends = fake_backend_set()
        backends.vqa.overrides.update(
            {
                ("img1", "a green bench?"): 0.5,
                ("img1", "a red car?"): 0.6,
                ("img1", "a vase?"): 1.0,
            }
        )
        backends.detector.overrides["img1"] = [
            Detection("bench", 0.9, BBox(10, 200, 100, 300)),
            Detection("car", 0.9, BBox(300, 200, 400, 300)),
            Detection("vase", 0.9, BBox(420, 200, 470, 300)),
        ]
        backends.embedder.text_overrides[record.text] = np.array([1.0, 0.0])
        backends.embedder.image_overrides["img1"] = np.array([0.15, np.sqrt(1 - 0.15**2)])
        score = three_in_one(IMG, record, backends, CFG)
        assert score.detail["components"]["b_vqa"] == pytest.approx(0.30, abs=1e-15)
        assert score.detail["components"]["unidet"] == pytest.approx(0.60, abs=1e-15)
        assert score.detail["components"]["clip"] == pytest.approx(0.15, abs=1e-15)
        assert score.value == pytest.approx(0.35, abs=1e-12)

    def test_skips_missing_spatial_component(self):
        objects = (ObjectSpec("bench", (AttributeSpec("color", "green"),)),)
        record = complex_record(objects, text="a green bench")
        backends = fake_backend_set()
        backends.vqa.overrides[("img1", "a green bench?")] = 0.4
        backends.embedder.text_overrides[record.text] = np.array([1.0, 0.0])
        backends.embedder.image_overrides["img1"] = np.array([0.6, 0.8])
        score = three_in_one(IMG, record, backends, CFG)
        assert score.detail["applicable"] == ["b_vqa", "clip"]
        assert score.detail["components"]["unidet"] is None
        assert score.value == pytest.approx(0.5, abs=1e-12)

    def test_all_components_one(self):
        objects = (
            ObjectSpec("girl", (AttributeSpec("color", "red"),)),
            ObjectSpec("horse", (AttributeSpec("color", "brown"),)),
        )
        relations = (RelationSpec(0, 1, "on the left of", "spatial"),)
        record = complex_record(objects, relations, text="a red girl left of a brown horse")
        backends = fake_backend_set()
        backends.vqa.overrides.update(
            {("img1", "a red girl?"): 1.0, ("img1", "a brown horse?"): 1.0}
        )
        backends.detector.overrides["img1"] = [
            Detection("girl", 0.9, BBox(10, 200, 100, 400)),
            Detection("horse", 0.8, BBox(300, 180, 480, 420)),
        ]
        e = np.array([1.0, 0.0])
        backends.embedder.text_overrides[record.text] = e
        backends.embedder.image_overrides["img1"] = e
        score = three_in_one(IMG, record, backends, CFG)
        assert score.value == pytest.approx(1.0, abs=1e-12)

    def test_value_is_exact_mean_of_applicable(self):
        objects = (ObjectSpec("bench", (AttributeSpec("color", "green"),)),)
        record = complex_record(objects)
        backends = fake_backend_set(seed=3)
        score = three_in_one(IMG, record, backends, CFG)
        values = [score.detail["components"][k] for k in score.detail["applicable"]]
        assert score.value == sum(values) / len(values)

    def test_non_complex_rejected(self):
        record = attr_record([("car", [("color", "red")])])
        with pytest.raises(MetricInapplicable):
            three_in_one(IMG, record, fake_backend_set(), CFG)


class TestParseScoreResponse:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ('{"score": 85, "explanation": "fits"}', 0.85),
            ('prefix ```json\n{"score": 40, "explanation": "x"}\n``` suffix', 0.40),
            ("Score: 100.", 1.0),
            ("I would rate this 73 out of 100", 0.73),
            ('{"score": 150}', 1.0),  # clamped
        ],
    )
    def test_parsed(self, text, expected):
        value, failed = parse_score_response(text)
        assert not failed
        assert value == pytest.approx(expected)

    def test_gibberish_fails(self):
        value, failed = parse_score_response("no numeric content here")
        assert failed and value == 0.0

    def test_out_of_range_integer_skipped(self):
        value, failed = parse_score_response("rated 400 but really 55")
        assert not failed
        assert value == 0.55


class TestMgptCot:
    def _backends_with_responses(self, record, describe_response, predict_response):
        prompts = default_cot_prompts()
        describe = prompts.describe(record.category)
        predict = prompts.predict(record.category, record.text)
        chat = FakeChat(
            overrides={
                ("img1", (describe,)): describe_response,
                ("img1", (describe, describe_response, predict)): predict_response,
            }
        )
        return BackendSet(chat=chat)

    def test_json_score(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        backends = self._backends_with_responses(
            record, "an image of a girl and a horse", '{"score": 85, "explanation": "close"}'
        )
        score = mgpt_cot_score(IMG, record, backends)
        assert score.value == 0.85
        assert not score.detail["parse_failed"]
        assert score.detail["describe_response"] == "an image of a girl and a horse"

    def test_tolerant_integer_extraction(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        backends = self._backends_with_responses(record, "desc", "Score: 100.")
        assert mgpt_cot_score(IMG, record, backends).value == 1.0

    def test_gibberish_scores_zero_with_flag(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        backends = self._backends_with_responses(record, "desc", "???")
        score = mgpt_cot_score(IMG, record, backends)
        assert score.value == 0.0
        assert score.detail["parse_failed"]

    def test_unknown_category_rejected(self):
        prompts = default_cot_prompts()
        with pytest.raises(MetricError):
            prompts.describe("nonexistent")


class TestMgpt:
    def test_attribute_questions_averaged(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
        )
        questions = [
            "Is there a green bench in the image? Give a score from 0 to 100."
            " If a green bench is not present or if the bench is not green, give a lower score.",
            "Is there a red car in the image? Give a score from 0 to 100."
            " If a red car is not present or if the car is not red, give a lower score.",
        ]
        chat = FakeChat(
            overrides={
                ("img1", (questions[0],)): '{"score": 80, "explanation": "x"}',
                ("img1", (questions[1],)): '{"score": 60, "explanation": "x"}',
            }
        )
        score = mgpt_score(IMG, record, BackendSet(chat=chat))
        assert score.value == pytest.approx(0.70, abs=1e-12)

    def test_overall_question_zero(self):
        record = spatial_prompt("girl", "on the left of", "horse")
        question = (
            f'Rate the overall alignment between the image and the text prompt "{record.text}". '
            "Give a score from 0 to 100."
        )
        chat = FakeChat(overrides={("img1", (question,)): '{"score": 0, "explanation": "x"}'})
        assert mgpt_score(IMG, record, BackendSet(chat=chat)).value == 0.0

    def test_parse_failure_averages_as_zero(self):
        record = attr_record(
            [("bench", [("color", "green")]), ("car", [("color", "red")])],
        )
        questions = [
            "Is there a green bench in the image? Give a score from 0 to 100."
            " If a green bench is not present or if the bench is not green, give a lower score.",
            "Is there a red car in the image? Give a score from 0 to 100."
            " If a red car is not present or if the car is not red, give a lower score.",
        ]
        chat = FakeChat(
            overrides={
                ("img1", (questions[0],)): '{"score": 80, "explanation": "x"}',
                ("img1", (questions[1],)): "gibberish",
            }
        )
        score = mgpt_score(IMG, record, BackendSet(chat=chat))
        assert score.value == pytest.approx(0.40, abs=1e-12)
        assert score.detail["parse_failures"] == [False, True]


class TestMetricScoreInvariants:
    def test_value_out_of_range_rejected(self):
        with pytest.raises(MetricError):
            MetricScore("p", "i", "clip", 1.5)

    def test_unknown_metric_rejected(self):
        with pytest.raises(MetricError):
            MetricScore("p", "i", "nonsense", 0.5)
