"""Query activation and iconic-action decomposition.

Activation decides whether a user query needs temporal support and
extracts the event text(s); decomposition splits an event description
into single-clause "iconic actions" that image-text models can match
frame by frame.  Both operations go through a pluggable text-transform
client; the deterministic rule fallback below approximates the LLM
behavior well enough for offline runs and CI.

Fallback rules, frozen for reproducibility:
  * activation cue lexicon (word-boundary, lowercased query):
    when / what time / before / after / first / then / beginning /
    end / order
  * event text = query minus interrogative scaffolding, with the verb
    restored to third person after a stripped do-support auxiliary
  * decomposition splits on clause boundaries ("," ";" "and" "then"
    "followed by" "while") and re-attaches the nearest preceding
    subject to subjectless clauses
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import EmptyDecomposition


@dataclass(frozen=True)
class ActivationResult:
    needs_temporal_support: bool
    event_texts: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "event_texts", tuple(self.event_texts))
        if not self.needs_temporal_support and self.event_texts:
            raise ValueError("non-temporal queries carry no event texts")


@dataclass(frozen=True)
class IconicAction:
    """One clause (subject + verb phrase) from a decomposed event."""

    index: int
    text: str

    def __post_init__(self) -> None:
        if not self.text or self.text != self.text.strip():
            raise ValueError("action text must be nonempty and trimmed")


_CUE_RE = re.compile(
    r"\b(?:when|what\s+time|before|after|first|then|beginning|end|order)\b"
)

_SCAFFOLD_RE = re.compile(
    r"^(?:(?:when|what\s+time)\s+(?:did|does|do|is|was|are|were|will)\s+|"
    r"(?:did|does|do)\s+)"
)

_RELATION_SPLIT_RE = re.compile(r"\s+(?:before|after|then)\s+")

_PRONOUNS = {"it", "he", "she", "they", "we", "i", "you", "this", "that", "these", "those"}
_DETERMINERS = {"the", "a", "an", "his", "her", "their", "its", "my", "your", "our"}
_BARE_SUBJECTS = {
    "person", "people", "man", "woman", "boy", "girl", "someone", "somebody",
    "crowd", "everyone", "player", "dog", "cat",
}

_AUX_VERBS = {"is", "was", "are", "were", "has", "had", "does", "did", "will", "can"}

# Gerunds whose base form is not recoverable by the suffix rules alone.
_IRREGULAR_GERUNDS = {
    "sitting": "sit", "getting": "get", "running": "run", "putting": "put",
    "making": "make", "taking": "take", "using": "use", "having": "have",
    "writing": "write", "coming": "come", "giving": "give", "leaving": "leave",
    "smiling": "smile", "riding": "ride", "closing": "close", "waving": "wave",
}


def third_person(verb: str) -> str:
    """Base-form verb to third person singular; inflected forms pass through."""
    if verb in _AUX_VERBS:
        return verb
    if verb == "have":
        return "has"
    if verb.endswith("ed") or verb.endswith("ing"):
        return verb
    if verb.endswith("s") and not verb.endswith(("ss", "us")):
        return verb
    if verb.endswith(("s", "x", "z", "ch", "sh", "o")):
        return verb + "es"
    if len(verb) > 1 and verb.endswith("y") and verb[-2] not in "aeiou":
        return verb[:-1] + "ies"
    return verb + "s"


def gerund_base(word: str) -> str:
    """Strip -ing, undoing consonant doubling for common verbs."""
    if word in _IRREGULAR_GERUNDS:
        return _IRREGULAR_GERUNDS[word]
    if not word.endswith("ing") or len(word) <= 4:
        return word
    stem = word[:-3]
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in "aeiouls":
        return stem[:-1]
    return stem


def _split_subject(tokens: List[str]) -> Tuple[Optional[List[str]], List[str]]:
    """Split leading subject tokens from the rest of a clause."""
    if not tokens:
        return None, tokens
    head = tokens[0].lower()
    if head in _PRONOUNS or head in _BARE_SUBJECTS:
        return tokens[:1], tokens[1:]
    if head in _DETERMINERS and len(tokens) >= 2:
        return tokens[:2], tokens[2:]
    return None, tokens


def _has_subject(clause: str) -> bool:
    subject, _ = _split_subject(clause.split())
    return subject is not None


def subject_of(clause: str) -> Optional[str]:
    """Leading subject noun phrase of a clause, if recognizable."""
    subject, _ = _split_subject(clause.split())
    return " ".join(subject) if subject else None


def _conjugate_clause(clause: str) -> str:
    """Restore third person after do-support stripping: "the person open
    the door" -> "the person opens the door"."""
    tokens = clause.split()
    subject, rest = _split_subject(tokens)
    if subject is None or not rest:
        return clause
    return " ".join(subject + [third_person(rest[0])] + rest[1:])


def _finish_clause(raw: str, fallback_subject: Optional[str]) -> Optional[str]:
    text = raw.strip(" ,.;")
    if not text:
        return None
    tokens = text.split()
    head = tokens[0].lower()
    if head.endswith("ing") and not _has_subject(text):
        verb = third_person(gerund_base(head))
        rest = tokens[1:]
        pieces = ([fallback_subject] if fallback_subject else []) + [verb] + rest
        return " ".join(pieces)
    return _conjugate_clause(text)


def rule_activate(query: str) -> ActivationResult:
    """Deterministic activation: cue-word gate plus clause extraction."""
    stripped = query.strip()
    if not stripped:
        raise ValueError("query must be nonempty")
    lowered = stripped.lower()
    if not _CUE_RE.search(lowered):
        return ActivationResult(False, ())

    events: List[str] = []
    for sentence in re.split(r"[.?!]+", lowered):
        sentence = sentence.strip()
        if not sentence or not _CUE_RE.search(sentence):
            continue
        body = _SCAFFOLD_RE.sub("", sentence).strip()
        parts = [p for p in _RELATION_SPLIT_RE.split(body) if p.strip()]
        subject: Optional[str] = None
        for part in parts:
            clause = _finish_clause(part, subject)
            if clause:
                events.append(clause)
                subject = subject_of(clause) or subject

    if not events:
        # Cue present but nothing extractable; fall back to the cleaned query.
        cleaned = re.sub(r"[?!.]+$", "", lowered).strip()
        events = [cleaned or lowered]
    return ActivationResult(True, tuple(dict.fromkeys(events)))


_CLAUSE_SPLIT_RE = re.compile(r"\s*[,;]\s*|\s+(?:and|then|while)\s+|\s+followed\s+by\s+")
_LEADING_CONNECTIVE_RE = re.compile(r"^(?:and|then|while|followed\s+by)\s+", re.IGNORECASE)


def rule_decompose(event_text: str) -> List[str]:
    """Deterministic clause splitting with subject re-attachment."""
    text = event_text.strip()
    if not text:
        raise ValueError("event text must be nonempty")

    raw_pieces = _CLAUSE_SPLIT_RE.split(text)
    if len(raw_pieces) == 1:
        return [text]

    clauses: List[str] = []
    last_subject: Optional[str] = None
    for raw in raw_pieces:
        piece = raw.strip(" ,.;")
        while True:
            trimmed = _LEADING_CONNECTIVE_RE.sub("", piece).strip(" ,.;")
            if trimmed == piece:
                break
            piece = trimmed
        if not piece:
            continue
        if not _has_subject(piece) and last_subject:
            piece = f"{last_subject} {piece}"
        clauses.append(piece)
        last_subject = subject_of(piece) or last_subject
    return clauses or [text]


def _client_or_none(client):
    return client if client is not None else None


def activate(query: str, client) -> ActivationResult:
    """Run Claim Activate through the given transform client."""
    if not query.strip():
        raise ValueError("query must be nonempty")
    output = client.transform("activate", {"query": query})
    needs = bool(output["needs_temporal_support"])
    texts = tuple(str(t) for t in output.get("event_texts", ()) if str(t).strip())
    if not needs:
        return ActivationResult(False, ())
    return ActivationResult(True, texts)


def decompose(event_text: str, client) -> List[IconicAction]:
    """Split an event description into ordered iconic actions."""
    if not event_text.strip():
        raise ValueError("event text must be nonempty")
    output = client.transform("decompose", {"event": event_text})
    texts = [str(t).strip() for t in output.get("actions", ()) if str(t).strip()]
    if not texts:
        raise EmptyDecomposition(f"client produced no actions for {event_text!r}")
    return [IconicAction(index=i, text=t) for i, t in enumerate(texts)]
