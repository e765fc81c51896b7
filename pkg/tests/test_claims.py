import numpy as np
import pytest

from synthdata import planted_video, random_video
from tempground.claims import (
    Claim,
    CorrectionRequest,
    GroundedAction,
    build_claim_for_query,
    build_correction_prompt,
    correct_response,
    fallback_correct,
    ground_actions,
    render_claim,
    top5_for_result,
)
from tempground.clients import FileEmbeddingClient, RuleFallbackClient
from tempground.errors import BackendMissing, EmbeddingFailure
from tempground.events import IconicAction
from tempground.parsing import hits_window, parse_timestamps
from tempground.scoring import DnConfig, RankedEntry, RankedTimestamps
from tempground.store import VideoMeta

CLIENT = RuleFallbackClient()


def make_grounded(text, timestamp):
    ranking = RankedTimestamps(entries=(
        RankedEntry(frame_index=int(timestamp), timestamp_seconds=timestamp, total_score=1.0),
    ))
    return GroundedAction(
        action=IconicAction(index=0, text=text), best=ranking, chosen_timestamp=timestamp
    )


class TestGroundActions:
    def test_planted_single_action(self):
        video, embed = planted_video("v", n=20, signal_frames=[7], queries=["the person opens the door"])
        actions = [IconicAction(0, "the person opens the door")]
        grounded = ground_actions(video, actions, embed, DnConfig())
        assert len(grounded) == 1
        assert grounded[0].chosen_timestamp == 7.0

    def test_two_actions_order_preserved(self):
        queries = ["the person opens the door", "the person sits down"]
        video, embed = planted_video("v", n=20, signal_frames=[3, 12], queries=queries)
        actions = [IconicAction(i, q) for i, q in enumerate(queries)]
        grounded = ground_actions(video, actions, embed, DnConfig())
        assert [g.chosen_timestamp for g in grounded] == [3.0, 12.0]
        assert [g.action.text for g in grounded] == queries

    def test_single_frame_video(self):
        video, embed = planted_video("v", n=1, signal_frames=[0], queries=["anything"])
        grounded = ground_actions(video, [IconicAction(0, "anything")], embed, DnConfig())
        assert grounded[0].chosen_timestamp == 0.0

    def test_chosen_timestamp_is_frame_aligned(self):
        queries = ["a", "b"]
        video, embed = planted_video("v", n=11, signal_frames=[2, 9], queries=queries, fps=2.0)
        grounded = ground_actions(video, [IconicAction(i, q) for i, q in enumerate(queries)],
                                  embed, DnConfig())
        valid = {k / 2.0 for k in range(11)}
        for g in grounded:
            assert g.chosen_timestamp in valid

    def test_missing_backend(self):
        rng = np.random.default_rng(0)
        video = random_video(rng, n=4, dims={"clip": 4})
        embed = FileEmbeddingClient()
        embed.add("clip", "x", np.ones(4))
        with pytest.raises(BackendMissing):
            ground_actions(video, [IconicAction(0, "x")], embed, DnConfig(),
                           backends=["clip", "blip2"])

    def test_dim_mismatch_is_embedding_failure(self):
        rng = np.random.default_rng(1)
        video = random_video(rng, n=4, dims={"clip": 4})
        embed = FileEmbeddingClient()
        embed.add("clip", "x", np.ones(5))
        with pytest.raises(EmbeddingFailure):
            ground_actions(video, [IconicAction(0, "x")], embed, DnConfig())


class TestRenderClaim:
    def test_template_line(self):
        meta = VideoMeta("v", num_frames=30, duration_seconds=30.0)
        claim = render_claim([make_grounded("the person opens the door", 3.0)], meta)
        assert claim.lines == (
            'Fact: the event "the person opens the door" most likely occurs '
            "at 3.0 seconds in this 30.0-second video.",
        )

    def test_two_actions_two_lines_in_order(self):
        meta = VideoMeta("v", num_frames=30, duration_seconds=30.0)
        claim = render_claim(
            [make_grounded("first act", 1.0), make_grounded("second act", 2.0)], meta
        )
        assert len(claim.lines) == 2
        assert "first act" in claim.lines[0]
        assert "second act" in claim.lines[1]

    def test_zero_timestamp_not_special_cased(self):
        meta = VideoMeta("v", num_frames=30, duration_seconds=30.0)
        claim = render_claim([make_grounded("it starts", 0.0)], meta)
        assert "at 0.0 seconds" in claim.lines[0]

    def test_timestamps_within_duration(self):
        meta = VideoMeta("v", num_frames=30, duration_seconds=30.0)
        claim = render_claim([make_grounded("act", 29.0)], meta)
        assert all(t <= claim.video_duration for t in claim.timestamps)


def claim_at(timestamp, duration=30.0, text="the person opens the door"):
    meta = VideoMeta("v", num_frames=int(duration), duration_seconds=duration)
    return render_claim([make_grounded(text, timestamp)], meta)


class TestFallbackCorrection:
    def test_wrong_timestamp_substituted(self):
        claim = claim_at(3.0)
        out = fallback_correct("Person opens the door at 20 seconds.", claim, 30.0)
        assert "3.0" in out and "20" not in out

    def test_consistent_response_unchanged(self):
        claim = claim_at(3.0)
        original = "Person opens the door at 3.0 seconds."
        assert fallback_correct(original, claim, 30.0) == original

    def test_no_information_replaced_by_fact(self):
        claim = claim_at(3.0)
        out = fallback_correct("No information mentioned.", claim, 30.0)
        assert out == claim.lines[0]

    def test_no_temporal_statement_appends_facts(self):
        claim = claim_at(3.0)
        out = fallback_correct("The person walks to the door.", claim, 30.0)
        assert out.startswith("The person walks to the door.")
        assert claim.lines[0] in out

    def test_idempotent(self):
        claim = claim_at(3.0)
        for original in (
            "Person opens the door at 20 seconds.",
            "No information mentioned.",
            "The person walks to the door.",
            "Person opens the door in the middle of the video.",
        ):
            once = fallback_correct(original, claim, 30.0)
            twice = fallback_correct(once, claim, 30.0)
            assert once == twice

    def test_corrected_output_parses_consistent_with_claim(self):
        claim = claim_at(7.0)
        out = fallback_correct("It happens from 20 seconds to 25 seconds.", claim, 30.0)
        parsed = parse_timestamps(out, 30.0)
        assert hits_window(parsed, 7.0, 7.0)

    def test_through_client(self):
        claim = claim_at(3.0)
        req = CorrectionRequest(
            user_query="When did the person open the door?",
            original_response="Person opens the door at 20 seconds.",
            claim=claim,
        )
        out = correct_response(req, CLIENT)
        assert "3.0" in out and "20" not in out

    def test_request_invariants(self):
        claim = claim_at(3.0)
        with pytest.raises(ValueError):
            CorrectionRequest(user_query="", original_response="x", claim=claim)


class TestCorrectionPrompt:
    def test_four_blocks(self):
        claim = claim_at(3.0)
        req = CorrectionRequest("when?", "sometime", claim)
        prompt = build_correction_prompt(req)
        assert "Question: when?" in prompt
        assert "Original answer: sometime" in prompt
        assert "Facts:\n" + claim.lines[0] in prompt
        assert "Instruction:" in prompt


class TestPipeline:
    def test_non_temporal_query_short_circuits(self):
        video, embed = planted_video("v", n=5, signal_frames=[2], queries=["x"])
        result = build_claim_for_query(
            video, "What color is the sofa?", CLIENT, embed, DnConfig()
        )
        assert result.claim is None
        assert result.actions == ()

    def test_temporal_query_builds_claim(self):
        video, embed = planted_video(
            "v", n=20, signal_frames=[7], queries=["the person opens the door"]
        )
        result = build_claim_for_query(
            video, "When did the person open the door?", CLIENT, embed, DnConfig()
        )
        assert result.claim is not None
        assert result.grounded[0].chosen_timestamp == 7.0
        assert "7.0 seconds" in result.claim.lines[0]

    def test_deterministic_byte_for_byte(self):
        video, embed = planted_video(
            "v", n=20, signal_frames=[7], queries=["the person opens the door"]
        )
        a = build_claim_for_query(video, "When did the person open the door?", CLIENT, embed, DnConfig())
        b = build_claim_for_query(video, "When did the person open the door?", CLIENT, embed, DnConfig())
        assert a.claim.text == b.claim.text
        assert a.claim.text.encode() == b.claim.text.encode()

    def test_top5_pools_across_actions(self):
        queries = ["the person opens the door", "the person sits down"]
        video, embed = planted_video("v", n=20, signal_frames=[3, 12], queries=queries)
        result = build_claim_for_query(
            video, "Did the person open the door before sitting down?", CLIENT, embed, DnConfig()
        )
        top5 = top5_for_result(result)
        assert len(top5) == 5
        assert top5[0] == 3.0
        assert 12.0 in top5
