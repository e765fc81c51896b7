import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempground.clients import RuleFallbackClient
from tempground.errors import EmptyDecomposition
from tempground.events import (
    ActivationResult,
    IconicAction,
    activate,
    decompose,
    rule_activate,
    rule_decompose,
)


CLIENT = RuleFallbackClient()


class TestActivate:
    # Frozen oracle table for the rule fallback.
    def test_when_question(self):
        result = rule_activate("When did the person open the door?")
        assert result == ActivationResult(True, ("the person opens the door",))

    def test_non_temporal_query(self):
        assert rule_activate("What color is the sofa?") == ActivationResult(False, ())

    def test_before_relation_splits_two_events(self):
        result = rule_activate("Did the person drink coffee before sitting down?")
        assert result.needs_temporal_support
        assert result.event_texts == ("the person drinks coffee", "the person sits down")

    def test_through_client(self):
        result = activate("When did the person open the door?", CLIENT)
        assert result.event_texts == ("the person opens the door",)

    def test_what_time(self):
        result = rule_activate("What time does the movie start?")
        assert result.needs_temporal_support
        assert result.event_texts == ("the movie starts",)

    def test_empty_query_rejected(self):
        with pytest.raises(ValueError):
            rule_activate("   ")

    def test_invariant_false_means_no_events(self):
        with pytest.raises(ValueError):
            ActivationResult(False, ("something",))

    @given(st.text(alphabet=st.characters(whitelist_categories=("L", "Zs")), max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_appending_when_question_activates(self, prefix):
        query = (prefix + " When did this happen?").strip()
        result = rule_activate(query)
        assert result.needs_temporal_support
        assert len(result.event_texts) >= 1
        assert all(t.strip() for t in result.event_texts)


class TestDecompose:
    def test_football_example_four_actions(self):
        text = ("The player kicks the ball, it sails past the goalkeeper, "
                "and lands in the net, followed by the crowd's loud cheers.")
        actions = rule_decompose(text)
        assert len(actions) == 4
        assert actions[0] == "The player kicks the ball"
        assert actions[1] == "it sails past the goalkeeper"
        assert actions[2] == "it lands in the net"
        assert actions[3] == "the crowd's loud cheers"

    def test_single_clause_passthrough(self):
        assert rule_decompose("A person opens the door.") == ["A person opens the door."]

    def test_then_split_reattaches_subject(self):
        assert rule_decompose("Person pours water then drinks it.") == \
            ["Person pours water", "Person drinks it"]

    def test_client_wraps_into_iconic_actions(self):
        actions = decompose("Person pours water then drinks it.", CLIENT)
        assert [a.index for a in actions] == [0, 1]
        assert all(isinstance(a, IconicAction) for a in actions)

    def test_order_preserved(self):
        text = "he stands up, walks to the window, and opens it"
        actions = rule_decompose(text)
        assert actions == ["he stands up", "he walks to the window", "he opens it"]

    def test_no_terminal_conjunction(self):
        for action in rule_decompose("she reads a book and falls asleep."):
            assert not action.rstrip().endswith((" and", " then", ","))

    def test_idempotent_on_produced_actions(self):
        corpus = [
            ("The player kicks the ball, it sails past the goalkeeper, "
             "and lands in the net, followed by the crowd's loud cheers."),
            "Person pours water then drinks it.",
            "he stands up, walks to the window, and opens it",
            "A person opens the door.",
            "the dog runs while the cat sleeps",
        ]
        for text in corpus:
            for action in rule_decompose(text):
                assert rule_decompose(action) == [action]

    def test_empty_client_result_raises(self):
        class EmptyClient:
            def transform(self, task, inputs):
                return {"actions": []}

        with pytest.raises(EmptyDecomposition):
            decompose("something happened", EmptyClient())

    def test_action_text_invariants(self):
        with pytest.raises(ValueError):
            IconicAction(index=0, text="  padded  ")
        with pytest.raises(ValueError):
            IconicAction(index=0, text="")
