from __future__ import annotations

import json
import os

import pytest

from ontoforge.gateway import MockProvider, SAMPLE_DELIMITER, prompt_hash


class ScriptProvider:
    """Queue-backed provider for unit tests: each complete() pops one entry.

    An entry is either a completion string, a list of sample strings, or an
    exception instance to raise.
    """

    id = "script"

    def __init__(self, entries):
        self.entries = list(entries)
        self.requests = []

    def complete(self, request):
        from ontoforge.gateway import ChatResponse, ProviderError
        self.requests.append(request)
        if not self.entries:
            raise ProviderError("script exhausted")
        entry = self.entries.pop(0)
        if isinstance(entry, Exception):
            raise entry
        samples = entry if isinstance(entry, list) else [entry]
        return ChatResponse(completions=tuple(samples[:request.n]))


def write_mock_fixture(mock_dir, request, samples, label="test"):
    """Author a mock fixture file for a concrete request."""
    os.makedirs(mock_dir, exist_ok=True)
    key = prompt_hash(request.messages)
    with open(os.path.join(mock_dir, key + ".txt"), "w", encoding="utf-8") as fh:
        fh.write(f"\n{SAMPLE_DELIMITER}\n".join(samples))
    index_path = os.path.join(mock_dir, "index.json")
    index = {}
    if os.path.exists(index_path):
        index = json.loads(open(index_path, encoding="utf-8").read())
    index[key] = label
    with open(index_path, "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=1, sort_keys=True)
    return key


def proposals_block(*items) -> str:
    """Fenced completion carrying the given (kind, payload) proposals."""
    doc = {"proposals": [{"kind": kind, "payload": payload} for kind, payload in items]}
    return "```json\n" + json.dumps(doc, indent=1) + "\n```"


@pytest.fixture
def script_provider():
    return ScriptProvider


@pytest.fixture
def counting_clock():
    state = {"n": 0}

    def clock():
        state["n"] += 1
        return f"2026-01-01T00:00:{state['n']:02d}+00:00"

    return clock
