import numpy as np
import pytest
from scipy import ndimage

from sceneforge.errors import EmptyRegionError, ProviderProtocolError, ProviderTimeout
from sceneforge.geometry import Aabb
from sceneforge.providers import (
    Caption,
    LabelMask,
    PromptBox,
    PromptPoint,
    PromptSet,
    ProviderConfig,
    RelevanceScore,
    caption_segment,
    fallback_mask,
    request_mask,
    score_relevance,
)
from sceneforge.raster import DepthImage, RgbImage

from stub_provider import StubProvider, rectangle_mask, caption_by_image_hash


def flat_image(width=64, height=64):
    return RgbImage(np.zeros((height, width, 3), dtype=np.uint8))


def height_field(*boxes, width=64, height=64, plane=0.01):
    """Synthetic BEV heights: a low plane plus flat-top boxes (v0:v1, u0:u1, h)."""
    values = np.full((height, width), plane)
    for v0, v1, u0, u1, h in boxes:
        values[v0:v1, u0:u1] = h
    return DepthImage(values)


class TestPromptSet:
    def test_needs_some_prompt(self):
        with pytest.raises(ValueError):
            PromptSet()

    def test_box_ordering(self):
        with pytest.raises(ValueError):
            PromptBox(10, 10, 5, 20)

    def test_bounds_validation(self):
        prompts = PromptSet(points=(PromptPoint(100, 10),))
        with pytest.raises(ValueError):
            prompts.validate_bounds(64, 64)


class TestLabelMask:
    def test_contiguity_enforced(self):
        labels = np.zeros((4, 4), dtype=np.uint16)
        labels[0, 0] = 2  # label 1 missing
        with pytest.raises(ValueError):
            LabelMask(labels)


class TestFallbackMask:
    def test_point_grows_full_footprint(self):
        heights = height_field((10, 30, 10, 30, 1.0))
        mask = fallback_mask(heights, PromptSet(points=(PromptPoint(15, 15),)))
        expected = np.zeros((64, 64), dtype=bool)
        expected[10:30, 10:30] = True
        np.testing.assert_array_equal(mask.labels == 1, expected)

    def test_touching_boxes_different_heights(self):
        heights = height_field((10, 30, 10, 30, 2.0), (10, 30, 30, 50, 1.0))
        mask = fallback_mask(heights, PromptSet(points=(PromptPoint(15, 15),)))
        region = mask.labels == 1
        assert region[15, 15]
        assert region[:, 30:].sum() == 0  # confined to the taller box

    def test_box_prompt_covers_both(self):
        heights = height_field((10, 30, 10, 28, 1.0), (10, 30, 36, 50, 2.0))
        mask = fallback_mask(heights, PromptSet(boxes=(PromptBox(5, 5, 60, 60),)))
        assert mask.n_labels == 1
        region = mask.labels == 1
        assert region[15, 15] and region[15, 40]
        assert not region[5, 5]  # plane stays background

    def test_background_point_errors(self):
        heights = height_field((10, 30, 10, 30, 1.0))
        with pytest.raises(EmptyRegionError):
            fallback_mask(heights, PromptSet(points=(PromptPoint(50, 50),)))

    def test_background_polarity_carves(self):
        heights = height_field((10, 30, 10, 30, 1.0))
        prompts = PromptSet(points=(
            PromptPoint(15, 15),
            PromptPoint(20, 20, polarity="background"),
        ))
        # the carve region grows with the same rule, so it removes the box
        with pytest.raises(EmptyRegionError):
            fallback_mask(heights, prompts)

    def test_deterministic(self):
        heights = height_field((10, 30, 10, 30, 1.0), (40, 60, 40, 60, 2.0))
        prompts = PromptSet(points=(PromptPoint(15, 15), PromptPoint(45, 45)))
        a = fallback_mask(heights, prompts)
        b = fallback_mask(heights, prompts)
        np.testing.assert_array_equal(a.labels, b.labels)
        assert a.n_labels == 2

    def test_point_regions_connected(self):
        heights = height_field((10, 30, 10, 30, 1.0), (40, 60, 40, 60, 2.0))
        mask = fallback_mask(heights, PromptSet(points=(PromptPoint(15, 15), PromptPoint(45, 45))))
        for label in (1, 2):
            _, n = ndimage.label(mask.labels == label)
            assert n == 1


class TestRequestMask:
    def test_stub_echoes_rectangle(self):
        rect = rectangle_mask(64, 64, 8, 8, 24, 24)
        with StubProvider(mask=rect) as stub:
            config = ProviderConfig(mask_url=stub.url("/v1/mask"))
            mask = request_mask(config, flat_image(), PromptSet(points=(PromptPoint(10, 10),)))
        np.testing.assert_array_equal(mask.labels, rect.labels)

    def test_out_of_bounds_rejected_before_network(self):
        with StubProvider(mask=rectangle_mask(64, 64, 0, 0, 4, 4)) as stub:
            config = ProviderConfig(mask_url=stub.url("/v1/mask"))
            with pytest.raises(ValueError):
                request_mask(config, flat_image(), PromptSet(points=(PromptPoint(999, 0),)))
            assert stub.requests == []

    def test_fallback_path(self):
        heights = height_field((10, 30, 10, 30, 1.0))
        config = ProviderConfig()  # no URLs, fallback on
        mask = request_mask(config, flat_image(), PromptSet(points=(PromptPoint(15, 15),)),
                            height_image=heights)
        assert mask.n_labels == 1

    def test_timeout_is_retried_then_raised(self):
        with StubProvider(mask=rectangle_mask(8, 8, 0, 0, 2, 2), sleep_s=0.5) as stub:
            config = ProviderConfig(mask_url=stub.url("/v1/mask"), timeout_ms=50,
                                    retries=2, backoff_s=0.01)
            with pytest.raises(ProviderTimeout):
                request_mask(config, flat_image(8, 8), PromptSet(points=(PromptPoint(1, 1),)))
            assert len(stub.requests) == 2

    def test_protocol_error_not_retried(self):
        with StubProvider(raw_body=b"not json at all") as stub:
            config = ProviderConfig(mask_url=stub.url("/v1/mask"), retries=3, backoff_s=0.01)
            with pytest.raises(ProviderProtocolError):
                request_mask(config, flat_image(8, 8), PromptSet(points=(PromptPoint(1, 1),)))
            assert len(stub.requests) == 1


class TestScoreRelevance:
    def test_fallback_unscored(self):
        score = score_relevance(ProviderConfig(), [flat_image()], "building")
        assert score.score == 1.0
        assert score.provenance == "unscored"

    def test_stub_scoring(self):
        with StubProvider(score=0.9) as stub:
            config = ProviderConfig(score_url=stub.url("/v1/score"))
            score = score_relevance(config, [flat_image()], "building")
        assert score == RelevanceScore(score=0.9, label="building")

    def test_empty_views_rejected(self):
        with pytest.raises(ValueError):
            score_relevance(ProviderConfig(), [], "building")


class TestCaptionSegment:
    def test_fallback_template_unit_cube(self):
        bounds = Aabb([-0.5, -0.5, -0.5], [0.5, 0.5, 0.5])
        caption = caption_segment(ProviderConfig(), [flat_image()], bounds=bounds)
        assert caption.text == "a 3D scene segment, footprint 1.0m × 1.0m, height 1.0m"
        assert caption.source_view_count == 1

    def test_modal_selection(self):
        with StubProvider(caption_fn=lambda _: "a tall tower") as stub:
            config = ProviderConfig(caption_url=stub.url("/v1/caption"))
            caption = caption_segment(config, [flat_image()] * 3)
        assert caption == Caption(text="a tall tower", source_view_count=3)

    def test_distinct_captions_pick_longest(self, rng):
        replies = iter(["short", "medium one", "the longest caption of all"])
        with StubProvider(caption_fn=lambda _: next(replies)) as stub:
            config = ProviderConfig(caption_url=stub.url("/v1/caption"))
            caption = caption_segment(config, [flat_image()] * 3)
        assert caption.text == "the longest caption of all"

    def test_order_invariant_aggregation(self, rng):
        views = [RgbImage(rng.integers(0, 255, size=(16, 16, 3), dtype=np.uint8))
                 for _ in range(4)]
        fn = caption_by_image_hash(["alpha", "beta", "gamma"])
        with StubProvider(caption_fn=fn) as stub:
            config = ProviderConfig(caption_url=stub.url("/v1/caption"))
            first = caption_segment(config, views)
            second = caption_segment(config, views[::-1])
        assert first.text == second.text


class TestProviderConfig:
    def test_env_overrides(self, monkeypatch):
        monkeypatch.setenv("SCENEFORGE_MASK_URL", "http://example/mask")
        monkeypatch.setenv("SCENEFORGE_PROVIDER_TIMEOUT_MS", "1234")
        config = ProviderConfig().with_env_overrides()
        assert config.mask_url == "http://example/mask"
        assert config.timeout_ms == 1234

    def test_from_file(self, tmp_path):
        path = tmp_path / "providers.json"
        path.write_text('{"score_url": "http://example/score", "fallback_enabled": false}')
        config = ProviderConfig.from_file(path)
        assert config.score_url == "http://example/score"
        assert config.fallback_enabled is False
