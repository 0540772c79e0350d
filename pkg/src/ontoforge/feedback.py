"""Stakeholder feedback: ingest, theme summarization, theme-to-proposal refinement."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .gateway import (
    NoStructuredBlockError, Proposal, ProposalKind, SchemaViolationError,
    UnexpectedKindError, complete_and_parse,
)
from .templates import FEEDBACK_THEMES, THEME_REFINEMENT

ROLES = ("DomainExpert", "OntologyEngineer", "EndUser")
CHUNK_SIZE = 50  # items per gateway call when summarizing


class FeedbackParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message)
        self.pos = pos


@dataclass(frozen=True)
class FeedbackItem:
    id: str
    role: str
    text: str
    timestamp: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "role": self.role, "text": self.text, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, data: dict) -> "FeedbackItem":
        return cls(id=data["id"], role=data["role"], text=data["text"],
                   timestamp=data.get("timestamp"))


def parse_feedback_file(text: str) -> list[dict]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FeedbackParseError(f"feedback file is not valid JSON at position {exc.pos}: {exc.msg}",
                                 pos=exc.pos) from exc
    if not isinstance(data, list):
        raise FeedbackParseError("feedback file must contain a list of items")
    for i, item in enumerate(data):
        if not isinstance(item, dict):
            raise FeedbackParseError(f"item {i} is not an object", pos=i)
        if item.get("role") not in ROLES:
            raise FeedbackParseError(
                f"item {i} has invalid role {item.get('role')!r}; expected one of {ROLES}", pos=i)
        if not isinstance(item.get("text"), str) or not item["text"].strip():
            raise FeedbackParseError(f"item {i} needs non-empty text", pos=i)
    return data


def ingest_feedback(project, text: str, *, clock=None) -> tuple[int, int]:
    """Append items from a feedback file; returns (added, duplicate warnings)."""
    items = parse_feedback_file(text)
    existing = {(f.role, f.text) for f in project.feedback_items}
    added = 0
    warned = 0
    for item in items:
        key = (item["role"], item["text"])
        if key in existing:
            warned += 1
            project.log("system", "feedback_duplicate_skipped", item["role"],
                        {"text": item["text"][:80]}, clock=clock)
            continue
        existing.add(key)
        fid = project.next_id("feedback", "fb-{:03d}")
        project.feedback_items.append(FeedbackItem(
            id=fid, role=item["role"], text=item["text"], timestamp=item.get("timestamp")))
        project.log("human", "feedback_ingested", fid, clock=clock)
        added += 1
    return added, warned


def _validate_theme(payload: dict, known_ids: set[str]):
    ids = payload["supporting_ids"]
    if len(set(ids)) != len(ids):
        raise SchemaViolationError("payload.supporting_ids", "ids must be distinct")
    unknown = [i for i in ids if i not in known_ids]
    if unknown:
        raise SchemaViolationError("payload.supporting_ids", f"unknown item ids {unknown}")


def summarize_feedback(project, provider, *, model: str = "default"):
    """Theme summaries over all ingested items, as Pending Revision proposals.

    Items are chunked at CHUNK_SIZE per call; themes from different chunks are
    merged by case-folded label and re-ranked so ranks stay a permutation.

    Returns (proposal, prompt_hash) pairs.
    """
    if not project.feedback_items:
        raise ValueError("feedback summarization needs at least one ingested item")
    known_ids = {f.id for f in project.feedback_items}
    chunks = [project.feedback_items[i:i + CHUNK_SIZE]
              for i in range(0, len(project.feedback_items), CHUNK_SIZE)]
    collected: list[tuple[dict, str]] = []
    for chunk in chunks:
        items_text = "\n".join(f"{f.id} [{f.role}] {f.text}" for f in chunk)
        proposals, phash, _ = complete_and_parse(
            FEEDBACK_THEMES, {"items": items_text}, provider, model=model)
        ranks = sorted(p.payload["rank"] for p in proposals)
        if ranks != list(range(1, len(proposals) + 1)):
            raise SchemaViolationError("payload.rank", f"ranks {ranks} are not a permutation of 1..n")
        for p in proposals:
            _validate_theme(p.payload, known_ids)
            collected.append((p.payload, phash))

    # merge across chunks by case-folded theme label
    merged: dict[str, tuple[dict, str]] = {}
    for payload, phash in collected:
        key = " ".join(payload["theme"].casefold().split())
        if key in merged:
            base, base_hash = merged[key]
            ids = list(dict.fromkeys(base["supporting_ids"] + payload["supporting_ids"]))
            base = dict(base, supporting_ids=ids, rank=min(base["rank"], payload["rank"]))
            merged[key] = (base, base_hash)
        else:
            merged[key] = (payload, phash)

    ordered = sorted(merged.values(), key=lambda pair: (pair[0]["rank"], pair[0]["theme"]))
    out = []
    for rank, (payload, phash) in enumerate(ordered, 1):
        payload = dict(payload, rank=rank)
        out.append((Proposal.create(ProposalKind.REVISION, payload), phash))
    return out


def themes_to_proposals(project, themes, provider, *, model: str = "default", clock=None):
    """Concrete structural proposals from accepted themes, one gateway call per theme.

    A theme whose refinement output stays unparseable after the single repair
    re-prompt contributes no proposals and is logged as unparseable.

    Returns (proposal, prompt_hash) pairs.
    """
    inventory = project.inventory_context()
    out = []
    for theme in themes:
        context = {
            "theme": theme.payload["theme"],
            "action": theme.payload["action"],
            "classes": inventory["classes"],
            "object_properties": inventory["object_properties"],
            "data_properties": inventory["data_properties"],
        }
        try:
            proposals, phash, _ = complete_and_parse(
                THEME_REFINEMENT, context, provider, model=model)
        except (NoStructuredBlockError, SchemaViolationError, UnexpectedKindError) as exc:
            project.log("system", "theme_unparseable", theme.id,
                        {"reason": "unparseable", "error": str(exc)}, clock=clock)
            continue
        out.extend((p, phash) for p in proposals)
    return out
