import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from conftest import ScriptProvider, proposals_block, write_mock_fixture
from ontoforge.gateway import (
    ChainError, ChatRequest, CorpusIndex, HttpProvider, MissingSlotError,
    MockProvider, NoStructuredBlockError, PromptTemplate, Proposal,
    ProposalKind, ProposalStatus, ProviderError, SchemaViolationError,
    Technique, UnexpectedKindError, build_request, chain_steps, complete,
    complete_and_parse, parse_proposals, prompt_chain, prompt_hash, retrieve,
    self_consistency,
)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def test_zero_shot_substitution_exact():
    t = PromptTemplate(id="z", technique=Technique.ZERO_SHOT,
                       body="List key concepts for {domain}.", slots=("domain",))
    assert "List key concepts for vehicle models." == \
        __import__("ontoforge.gateway", fromlist=["render_prompt"]).render_prompt(
            t, {"domain": "vehicle models"})


def test_few_shot_exemplars_precede_instruction():
    t = PromptTemplate(id="f", technique=Technique.FEW_SHOT,
                       body="Suggest more properties and hierarchies.",
                       exemplars=("Vehicle hasEngine Engine", "Car isA Vehicle"))
    from ontoforge.gateway import render_prompt
    text = render_prompt(t, {})
    assert text.index("Vehicle hasEngine Engine") < text.index("Car isA Vehicle") \
        < text.index("Suggest more properties")


def test_missing_slot_lists_names():
    t = PromptTemplate(id="z", technique=Technique.ZERO_SHOT,
                       body="{alpha} and {beta}", slots=("alpha", "beta"))
    from ontoforge.gateway import render_prompt
    with pytest.raises(MissingSlotError) as exc:
        render_prompt(t, {"alpha": 1})
    assert exc.value.names == ["beta"]


def test_undeclared_slot_rejected_at_construction():
    with pytest.raises(ValueError):
        PromptTemplate(id="bad", technique=Technique.ZERO_SHOT, body="{mystery}")


def test_general_knowledge_prepends_facts():
    t = PromptTemplate(id="g", technique=Technique.GENERAL_KNOWLEDGE, body="Propose a model.")
    from ontoforge.gateway import render_prompt
    text = render_prompt(t, {"facts": "Brands: Toyota, Honda, Ford."})
    assert text.startswith("Background facts:\nBrands: Toyota, Honda, Ford.")


def test_retrieval_augmented_appends_excerpts_with_ids():
    t = PromptTemplate(id="r", technique=Technique.RETRIEVAL_AUGMENTED, body="Extract terms.")
    from ontoforge.gateway import render_prompt
    text = render_prompt(t, {"retrieved": [("doc-1", "fuel economy matters")]})
    assert "Relevant excerpts:" in text and "[doc-1] fuel economy matters" in text


def test_chain_of_thought_appends_scaffold():
    t = PromptTemplate(id="c", technique=Technique.CHAIN_OF_THOUGHT, body="Model preferences.",
                       steps=("Identify core attributes.", "Organize into a structure."))
    from ontoforge.gateway import render_prompt
    text = render_prompt(t, {})
    assert "1. Identify core attributes." in text and "2. Organize into a structure." in text
    assert text.index("Model preferences.") < text.index("1. Identify")


def test_prompt_determinism():
    t = PromptTemplate(id="z", technique=Technique.ZERO_SHOT, body="{a}", slots=("a",))
    from ontoforge.gateway import render_prompt
    assert render_prompt(t, {"a": "x"}) == render_prompt(t, {"a": "x"})


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

def _request(text="hello", n=1):
    return ChatRequest(model="m", messages=(("user", text),), n=n)


def test_mock_provider_strict_playback(tmp_path):
    req = _request("the prompt")
    write_mock_fixture(tmp_path, req, ["canned answer"])
    provider = MockProvider(str(tmp_path), strict=True)
    assert complete(req, provider).completions == ("canned answer",)


def test_mock_provider_strict_unknown_hash(tmp_path):
    provider = MockProvider(str(tmp_path), strict=True)
    with pytest.raises(ProviderError) as exc:
        complete(_request(), provider)
    assert "no fixture" in str(exc.value)


def test_mock_provider_lenient_stub(tmp_path):
    provider = MockProvider(str(tmp_path), strict=False)
    response = complete(_request(), provider)
    assert parse_proposals(response.completions[0]) == []


def test_mock_provider_three_samples_in_order(tmp_path):
    req = _request("vote", n=3)
    write_mock_fixture(tmp_path, req, ["s1", "s2", "s3"])
    response = complete(req, MockProvider(str(tmp_path)))
    assert response.completions == ("s1", "s2", "s3")


def test_chat_request_invariants():
    with pytest.raises(ValueError):
        ChatRequest(model="m", messages=(("system", "x"),))
    with pytest.raises(ValueError):
        ChatRequest(model="m", messages=(("user", "x"),), temperature=3.0)
    with pytest.raises(ValueError):
        ChatRequest(model="m", messages=(("user", "x"),), n=0)


def test_prompt_hash_stable_and_content_sensitive():
    a = prompt_hash((("user", "alpha"),))
    assert a == prompt_hash((("user", "alpha"),))
    assert a != prompt_hash((("user", "beta"),))
    assert len(a) == 64


class _StubHandler(BaseHTTPRequestHandler):
    behavior = "ok"
    calls = 0

    def do_POST(self):
        type(self).calls += 1
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.behavior == "rate_limit_once" and type(self).calls == 1:
            self.send_response(429)
            self.end_headers()
            self.wfile.write(b"slow down")
            return
        if self.behavior == "server_error":
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"boom")
            return
        payload = {
            "choices": [{"message": {"content": f"echo:{body['messages'][-1]['content']}"}}
                        for _ in range(body.get("n", 1))],
            "usage": {"prompt_tokens": 5, "completion_tokens": 7},
        }
        data = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.calls = 0
    _StubHandler.behavior = "ok"
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_http_provider_round_trip(stub_server):
    provider = HttpProvider(stub_server, "key", "m", backoff_s=0.01)
    response = provider.complete(_request("ping"))
    assert response.completions == ("echo:ping",)
    assert response.prompt_tokens == 5


def test_http_provider_retries_rate_limit(stub_server):
    _StubHandler.behavior = "rate_limit_once"
    provider = HttpProvider(stub_server, "key", "m", backoff_s=0.01)
    assert provider.complete(_request("x")).completions == ("echo:x",)
    assert _StubHandler.calls == 2


def test_http_provider_surfaces_provider_error(stub_server):
    _StubHandler.behavior = "server_error"
    provider = HttpProvider(stub_server, "key", "m", backoff_s=0.01)
    with pytest.raises(ProviderError) as exc:
        provider.complete(_request("x"))
    assert exc.value.status == 500 and "boom" in exc.value.body


def test_http_provider_transport_error_after_retries():
    from ontoforge.gateway import TransportError
    provider = HttpProvider("http://127.0.0.1:1", "key", "m",
                            max_retries=1, backoff_s=0.01)
    with pytest.raises(TransportError):
        provider.complete(_request("x"))


def test_http_provider_requires_credentials(monkeypatch):
    from ontoforge.gateway import CredentialMissingError
    monkeypatch.delenv("ONTOFORGE_LLM_BASE_URL", raising=False)
    monkeypatch.delenv("ONTOFORGE_LLM_API_KEY", raising=False)
    with pytest.raises(CredentialMissingError):
        HttpProvider.from_env()


# ---------------------------------------------------------------------------
# Proposal parsing
# ---------------------------------------------------------------------------

def test_parse_valid_class_def():
    completion = "Here you go.\n" + proposals_block(
        ("ClassDef", {"name": "DrivingStyle", "definition": "How a user drives."}))
    props = parse_proposals(completion, (ProposalKind.CLASS_DEF,))
    assert len(props) == 1
    assert props[0].kind is ProposalKind.CLASS_DEF
    assert props[0].status is ProposalStatus.PENDING
    assert props[0].payload["name"] == "DrivingStyle"


def test_parse_prose_only_raises():
    with pytest.raises(NoStructuredBlockError):
        parse_proposals("Certainly! The key concept is DrivingStyle.")


def test_parse_missing_required_field():
    completion = proposals_block(("ClassDef", {"definition": "missing name"}))
    with pytest.raises(SchemaViolationError) as exc:
        parse_proposals(completion)
    assert "name" in exc.value.path


def test_parse_unknown_field_rejected():
    completion = proposals_block(("ClassDef", {"name": "X", "definition": "d", "color": "red"}))
    with pytest.raises(SchemaViolationError) as exc:
        parse_proposals(completion)
    assert "color" in exc.value.path


def test_parse_unexpected_kind():
    completion = proposals_block(("Instance", {"name": "Henri", "class": "User"}))
    with pytest.raises(UnexpectedKindError):
        parse_proposals(completion, (ProposalKind.CLASS_DEF,))


def test_proposal_id_stable_under_reserialization():
    p = Proposal.create(ProposalKind.CLASS_DEF, {"name": "X", "definition": "d"})
    round_tripped = Proposal.from_dict(json.loads(json.dumps(p.to_dict())))
    from ontoforge.gateway import proposal_id
    assert round_tripped.id == p.id == proposal_id(round_tripped.kind, round_tripped.payload)


def test_complete_and_parse_repair_cycle(tmp_path):
    template = PromptTemplate(id="t", technique=Technique.ZERO_SHOT, body="Go.",
                              expected_kinds=(ProposalKind.CLASS_DEF,))
    good = proposals_block(("ClassDef", {"name": "X", "definition": "d"}))
    provider = ScriptProvider(["no block here", good])
    props, phash, _ = complete_and_parse(template, {}, provider)
    assert props[0].payload["name"] == "X"
    assert len(provider.requests) == 2
    repair_messages = provider.requests[1].messages
    assert repair_messages[-1][0] == "user" and "could not be used" in repair_messages[-1][1]
    assert phash == prompt_hash(repair_messages)


def test_complete_and_parse_second_failure_propagates():
    template = PromptTemplate(id="t", technique=Technique.ZERO_SHOT, body="Go.",
                              expected_kinds=(ProposalKind.CLASS_DEF,))
    provider = ScriptProvider(["prose", "still prose"])
    with pytest.raises(NoStructuredBlockError):
        complete_and_parse(template, {}, provider)


# ---------------------------------------------------------------------------
# Self-consistency
# ---------------------------------------------------------------------------

def _prop_sample(*names):
    return proposals_block(*[
        ("DataPropertyDef", {"name": n, "definition": f"{n} value."}) for n in names])


VOTE_TEMPLATE = PromptTemplate(
    id="vote", technique=Technique.SELF_CONSISTENCY, body="Suggest properties.",
    expected_kinds=(ProposalKind.DATA_PROPERTY_DEF,))


def test_majority_vote_three_samples(tmp_path):
    request = build_request(VOTE_TEMPLATE, {}, n=3)
    write_mock_fixture(tmp_path, request, [
        _prop_sample("hasSafetyFeatures"),
        _prop_sample("hasSafetyFeatures"),
        _prop_sample("hasEngineType"),
    ])
    vote = self_consistency(VOTE_TEMPLATE, {}, 3, MockProvider(str(tmp_path)))
    assert [p.display_name() for p in vote.winners] == ["hasSafetyFeatures"]
    assert [p.display_name() for p in vote.minority] == ["hasEngineType"]
    assert vote.tally[("DataPropertyDef", "hassafetyfeatures")] == 2


def test_single_sample_wins_trivially(tmp_path):
    request = build_request(VOTE_TEMPLATE, {}, n=1)
    write_mock_fixture(tmp_path, request, [_prop_sample("hasSafetyFeatures")])
    vote = self_consistency(VOTE_TEMPLATE, {}, 1, MockProvider(str(tmp_path)))
    assert len(vote.winners) == 1 and not vote.minority


def test_even_split_all_minority(tmp_path):
    request = build_request(VOTE_TEMPLATE, {}, n=4)
    write_mock_fixture(tmp_path, request, [
        _prop_sample("hasSafetyFeatures"), _prop_sample("hasSafetyFeatures"),
        _prop_sample("hasEngineType"), _prop_sample("hasEngineType"),
    ])
    vote = self_consistency(VOTE_TEMPLATE, {}, 4, MockProvider(str(tmp_path)))
    assert vote.winners == []
    assert sorted(p.display_name() for p in vote.minority) == ["hasEngineType", "hasSafetyFeatures"]


def test_unparseable_sample_counts_as_empty():
    provider = ScriptProvider([[_prop_sample("hasX"), "garbage prose", _prop_sample("hasX")]])
    vote = self_consistency(VOTE_TEMPLATE, {}, 3, provider)
    assert [p.display_name() for p in vote.winners] == ["hasX"]


def test_voting_soundness_random_samples():
    import random
    rng = random.Random(3)
    pool = ["hasA", "hasB", "hasC", "hasD"]
    for _ in range(25):
        k = rng.randrange(1, 6)
        samples = [_prop_sample(*rng.sample(pool, rng.randrange(0, len(pool) + 1)) or ["hasA"])
                   for _ in range(k)]
        vote = self_consistency(VOTE_TEMPLATE, {}, k, ScriptProvider([samples]))
        for w in vote.winners:
            assert vote.tally[w.vote_key()] * 2 > k
        seen = {p.vote_key() for p in vote.winners} | {p.vote_key() for p in vote.minority}
        assert seen == set(vote.tally)


def test_vote_requires_positive_k():
    with pytest.raises(ValueError):
        self_consistency(VOTE_TEMPLATE, {}, 0, ScriptProvider([]))


# ---------------------------------------------------------------------------
# Prompt chaining
# ---------------------------------------------------------------------------

CHAIN = PromptTemplate(
    id="chain", technique=Technique.PROMPT_CHAINING, body="", slots=("topic",),
    steps=("List core concepts for {topic}.",
           "Suggest properties for the concepts.",
           "Outline a hierarchy."))


def test_chain_feeds_previous_output_forward():
    provider = ScriptProvider(["concepts!", "properties!", "hierarchy!"])
    responses = prompt_chain(chain_steps(CHAIN), {"topic": "vehicles"}, provider)
    assert [r.completions[0] for r in responses] == ["concepts!", "properties!", "hierarchy!"]
    step2_prompt = provider.requests[1].messages[-1][1]
    assert "concepts!" in step2_prompt
    step3_prompt = provider.requests[2].messages[-1][1]
    assert "properties!" in step3_prompt


def test_chain_aborts_with_partial_transcript():
    provider = ScriptProvider(["concepts!", ProviderError("down")])
    with pytest.raises(ChainError) as exc:
        prompt_chain(chain_steps(CHAIN), {"topic": "vehicles"}, provider)
    assert exc.value.step == 2
    assert [r.completions[0] for r in exc.value.responses] == ["concepts!"]


def test_chain_requires_two_steps():
    single = PromptTemplate(id="s", technique=Technique.ZERO_SHOT, body="x")
    with pytest.raises(ValueError):
        prompt_chain([single], {}, ScriptProvider([]))


def test_chain_template_invariant():
    with pytest.raises(ValueError):
        PromptTemplate(id="c", technique=Technique.PROMPT_CHAINING, body="", steps=("one",))


def test_mock_chain_is_deterministic(tmp_path):
    # author fixtures for all three steps, then run twice: identical transcripts
    provider = ScriptProvider(["c", "p", "h"])
    prompt_chain(chain_steps(CHAIN), {"topic": "v"}, provider)
    for req, completion in zip(provider.requests, ["c", "p", "h"]):
        write_mock_fixture(tmp_path, req, [completion])
    mock = MockProvider(str(tmp_path))
    first = [r.completions for r in prompt_chain(chain_steps(CHAIN), {"topic": "v"}, mock)]
    second = [r.completions for r in prompt_chain(chain_steps(CHAIN), {"topic": "v"}, mock)]
    assert first == second == [("c",), ("p",), ("h",)]


# ---------------------------------------------------------------------------
# Retrieval
# ---------------------------------------------------------------------------

def test_retrieve_single_document():
    index = CorpusIndex.from_documents([("d1", "manual", "fuel efficiency data")])
    assert retrieve(index, "fuel", 1) == [("d1", pytest.approx(math.log(2)))]


def test_retrieve_no_indexed_terms():
    index = CorpusIndex.from_documents([("d1", "manual", "fuel efficiency data")])
    assert retrieve(index, "zebra quantum", 3) == []


def test_retrieve_five_document_hand_computed_ranking():
    docs = [
        ("d1", "", "fuel fuel economy"),
        ("d2", "", "fuel range"),
        ("d3", "", "economy seats"),
        ("d4", "", "seats cargo cargo"),
        ("d5", "", "warranty"),
    ]
    index = CorpusIndex.from_documents(docs)
    n = 5
    w_fuel = math.log(1 + n / 2)   # df(fuel)=2
    w_econ = math.log(1 + n / 2)   # df(economy)=2
    expected = {
        "d1": 2 * w_fuel + 1 * w_econ,
        "d2": 1 * w_fuel,
        "d3": 1 * w_econ,
    }
    got = retrieve(index, "fuel economy", 5)
    assert [doc for doc, _ in got] == ["d1", "d2", "d3"]
    for doc, score in got:
        assert score == pytest.approx(expected[doc])


def test_retrieve_exhaustive_scoring_equivalence():
    import random
    rng = random.Random(9)
    vocab_words = ["fuel", "seat", "cargo", "brand", "range", "price"]
    docs = [(f"d{i}", "", " ".join(rng.choices(vocab_words, k=rng.randrange(1, 10))))
            for i in range(8)]
    index = CorpusIndex.from_documents(docs)
    for _ in range(20):
        query = " ".join(rng.choices(vocab_words, k=2))
        got = retrieve(index, query, 8)
        # oracle: recompute from raw docs
        n = len(docs)
        expected = []
        for doc_id, _, text in docs:
            tokens = text.split()
            score = 0.0
            for term in query.split():
                df = sum(1 for _, _, t in docs if term in t.split())
                tf = tokens.count(term)
                if df and tf:
                    score += tf * math.log(1 + n / df)
            if score > 0:
                expected.append((doc_id, score))
        expected.sort(key=lambda p: (-p[1], p[0]))
        assert [d for d, _ in got] == [d for d, _ in expected]
        for (d1, s1), (d2, s2) in zip(got, expected):
            assert s1 == pytest.approx(s2)


def test_corpus_stats_match_recount():
    docs = [("d1", "title word", "body word word"), ("d2", "x", "word")]
    index = CorpusIndex.from_documents(docs)
    assert index.term_freq["d1"]["word"] == 3  # title + body
    assert index.doc_freq["word"] == 2
