"""Provider-neutral LLM access: prompt templates for seven prompting techniques,
chat completion over HTTP with a deterministic mock provider, self-consistency
voting, prompt chains, local-corpus retrieval, and proposal parsing."""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import Enum


class GatewayError(RuntimeError):
    pass


class GatewayTimeoutError(GatewayError):
    pass


class TransportError(GatewayError):
    pass


class ProviderError(GatewayError):
    def __init__(self, message: str, status: int | None = None, body: str = ""):
        detail = f" (status {status})" if status is not None else ""
        super().__init__(f"{message}{detail}")
        self.status = status
        self.body = body[:500]


class CredentialMissingError(GatewayError):
    pass


class MissingSlotError(ValueError):
    def __init__(self, names):
        super().__init__("missing slot value(s): " + ", ".join(sorted(names)))
        self.names = sorted(names)


class NoStructuredBlockError(ValueError):
    pass


class SchemaViolationError(ValueError):
    def __init__(self, path: str, reason: str = ""):
        suffix = f": {reason}" if reason else ""
        super().__init__(f"proposal schema violation at {path}{suffix}")
        self.path = path


class UnexpectedKindError(ValueError):
    def __init__(self, kind: str, expected):
        super().__init__(f"unexpected proposal kind {kind!r}; expected one of {sorted(k.value for k in expected)}")
        self.kind = kind


class ChainError(GatewayError):
    def __init__(self, step: int, responses, cause: Exception):
        super().__init__(f"prompt chain failed at step {step}: {cause}")
        self.step = step
        self.responses = responses
        self.cause = cause


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

class Technique(Enum):
    ZERO_SHOT = "ZeroShot"
    FEW_SHOT = "FewShot"
    CHAIN_OF_THOUGHT = "ChainOfThought"
    SELF_CONSISTENCY = "SelfConsistency"
    GENERAL_KNOWLEDGE = "GeneralKnowledge"
    PROMPT_CHAINING = "PromptChaining"
    RETRIEVAL_AUGMENTED = "RetrievalAugmented"


_SLOT_RE = re.compile(r"\{([a-z][a-z0-9_]*)\}")

# context keys consumed by technique-specific rendering, not by body slots
RESERVED_FACTS_KEY = "facts"
RESERVED_RETRIEVED_KEY = "retrieved"


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    technique: Technique
    body: str
    slots: tuple[str, ...] = ()
    expected_kinds: tuple["ProposalKind", ...] = ()
    exemplars: tuple[str, ...] = ()
    steps: tuple[str, ...] = ()
    system: str | None = None

    def __post_init__(self):
        referenced = set(_SLOT_RE.findall(self.body)) | {
            name for step in self.steps for name in _SLOT_RE.findall(step)
        }
        undeclared = referenced - set(self.slots)
        if undeclared:
            raise ValueError(f"template {self.id}: undeclared slot(s) {sorted(undeclared)}")
        if self.technique is Technique.FEW_SHOT and not self.exemplars:
            raise ValueError(f"template {self.id}: few-shot templates need at least one exemplar")
        if self.technique is Technique.PROMPT_CHAINING and len(self.steps) < 2:
            raise ValueError(f"template {self.id}: prompt chains need at least two steps")


def _substitute(text: str, context: dict) -> str:
    missing = [name for name in _SLOT_RE.findall(text) if name not in context]
    if missing:
        raise MissingSlotError(missing)
    return _SLOT_RE.sub(lambda m: str(context[m.group(1)]), text)


def render_prompt(template: PromptTemplate, context: dict) -> str:
    """Deterministic prompt text for a template and its slot values."""
    body = _substitute(template.body, context)
    parts = []
    if template.technique is Technique.FEW_SHOT:
        parts.append("Examples:\n" + "\n".join(f"- {e}" for e in template.exemplars))
    if template.technique is Technique.GENERAL_KNOWLEDGE:
        if RESERVED_FACTS_KEY not in context:
            raise MissingSlotError([RESERVED_FACTS_KEY])
        parts.append("Background facts:\n" + str(context[RESERVED_FACTS_KEY]))
    parts.append(body)
    if template.technique is Technique.CHAIN_OF_THOUGHT and template.steps:
        scaffold = "\n".join(f"{i}. {_substitute(s, context)}" for i, s in enumerate(template.steps, 1))
        parts.append("Work through this step by step:\n" + scaffold)
    if template.technique is Technique.RETRIEVAL_AUGMENTED:
        if RESERVED_RETRIEVED_KEY not in context:
            raise MissingSlotError([RESERVED_RETRIEVED_KEY])
        excerpts = context[RESERVED_RETRIEVED_KEY]
        rendered = "\n".join(f"[{doc_id}] {text}" for doc_id, text in excerpts)
        parts.append("Relevant excerpts:\n" + rendered)
    if template.expected_kinds:
        parts.append(output_contract(template.expected_kinds))
    return "\n\n".join(parts)


def output_contract(kinds) -> str:
    names = ", ".join(k.value for k in kinds)
    return (
        "Answer with a single fenced code block containing a JSON document of the form\n"
        '{"proposals": [{"kind": "<kind>", "payload": {...}}]}\n'
        f"where <kind> is one of: {names}. Use exactly the payload fields defined for each kind."
    )


# ---------------------------------------------------------------------------
# Requests, responses, providers
# ---------------------------------------------------------------------------

DEFAULT_TEMPERATURE = 0.0
SELF_CONSISTENCY_TEMPERATURE = 0.8

ENV_BASE_URL = "ONTOFORGE_LLM_BASE_URL"
ENV_API_KEY = "ONTOFORGE_LLM_API_KEY"
ENV_MODEL = "ONTOFORGE_LLM_MODEL"


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]  # (role, content)
    temperature: float = DEFAULT_TEMPERATURE
    n: int = 1

    def __post_init__(self):
        if not any(role == "user" for role, _ in self.messages):
            raise ValueError("a chat request needs at least one user message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.n < 1:
            raise ValueError("sample count must be positive")


@dataclass(frozen=True)
class ChatResponse:
    completions: tuple[str, ...]
    latency_ms: float = 0.0
    prompt_tokens: int | None = None
    completion_tokens: int | None = None


def prompt_hash(messages) -> str:
    """SHA-256 of the fully rendered message list; keys mock fixtures and provenance."""
    canonical = json.dumps(
        [{"role": role, "content": content} for role, content in messages],
        sort_keys=True, separators=(",", ":"), ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_request(template: PromptTemplate, context: dict, model: str = "default",
                  n: int = 1, temperature: float | None = None) -> ChatRequest:
    if temperature is None:
        temperature = DEFAULT_TEMPERATURE if n == 1 else SELF_CONSISTENCY_TEMPERATURE
    messages = []
    if template.system:
        messages.append(("system", template.system))
    messages.append(("user", render_prompt(template, context)))
    return ChatRequest(model=model, messages=tuple(messages), temperature=temperature, n=n)


SAMPLE_DELIMITER = "%%SAMPLE%%"
MOCK_INDEX_FILE = "index.json"


class MockProvider:
    """Fixture playback keyed by prompt hash.

    Each fixture is `<prompt-hash>.txt`; multi-sample fixtures separate
    completions with a line containing only %%SAMPLE%%. Strict mode errors on
    unknown hashes; lenient mode answers a schema-shaped empty stub.
    """

    id = "mock"

    def __init__(self, fixture_dir: str, strict: bool = True):
        self.fixture_dir = fixture_dir
        self.strict = strict

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = prompt_hash(request.messages)
        path = os.path.join(self.fixture_dir, key + ".txt")
        if not os.path.exists(path):
            if self.strict:
                raise ProviderError(f"no fixture for prompt hash {key}")
            return ChatResponse(completions=tuple('```json\n{"proposals": []}\n```' for _ in range(request.n)))
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
        samples = content.split(f"\n{SAMPLE_DELIMITER}\n")
        return ChatResponse(completions=tuple(samples[:request.n]))


class HttpProvider:
    """POSTs to {base_url}/chat/completions; retries transport errors and 429s."""

    def __init__(self, base_url: str, api_key: str, model: str,
                 timeout_s: float = 60.0, max_retries: int = 2, backoff_s: float = 1.0):
        if not base_url:
            raise CredentialMissingError(f"{ENV_BASE_URL} is not set")
        if not api_key:
            raise CredentialMissingError(f"{ENV_API_KEY} is not set")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.backoff_s = backoff_s

    @property
    def id(self) -> str:
        return f"http:{self.model}"

    @classmethod
    def from_env(cls, **kwargs) -> "HttpProvider":
        return cls(
            base_url=os.environ.get(ENV_BASE_URL, ""),
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, "gpt-4o"),
            **kwargs,
        )

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = json.dumps({
            "model": request.model if request.model != "default" else self.model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
            "n": request.n,
        }).encode("utf-8")
        url = self.base_url + "/chat/completions"
        attempt = 0
        start = time.monotonic()
        while True:
            try:
                req = urllib.request.Request(
                    url, data=payload, method="POST",
                    headers={"Content-Type": "application/json",
                             "Authorization": f"Bearer {self.api_key}"},
                )
                with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                choices = body.get("choices", [])
                completions = tuple(c["message"]["content"] for c in choices)
                if not completions:
                    raise ProviderError("provider returned no choices", body=json.dumps(body))
                usage = body.get("usage", {})
                return ChatResponse(
                    completions=completions,
                    latency_ms=(time.monotonic() - start) * 1000.0,
                    prompt_tokens=usage.get("prompt_tokens"),
                    completion_tokens=usage.get("completion_tokens"),
                )
            except urllib.error.HTTPError as exc:
                body_text = exc.read().decode("utf-8", "replace")
                if exc.code == 429 and attempt < self.max_retries:
                    attempt += 1
                    time.sleep(self.backoff_s * (2 ** (attempt - 1)))
                    continue
                raise ProviderError("provider rejected the request", status=exc.code, body=body_text)
            except TimeoutError as exc:
                if attempt < self.max_retries:
                    attempt += 1
                    time.sleep(self.backoff_s * (2 ** (attempt - 1)))
                    continue
                raise GatewayTimeoutError(f"request to {url} timed out after {self.timeout_s}s") from exc
            except urllib.error.URLError as exc:
                if isinstance(exc.reason, TimeoutError) and attempt >= self.max_retries:
                    raise GatewayTimeoutError(f"request to {url} timed out after {self.timeout_s}s") from exc
                if attempt < self.max_retries:
                    attempt += 1
                    time.sleep(self.backoff_s * (2 ** (attempt - 1)))
                    continue
                raise TransportError(f"could not reach {url}: {exc.reason}") from exc


def complete(request: ChatRequest, provider) -> ChatResponse:
    """Issue a chat request against any provider object exposing .complete()."""
    return provider.complete(request)


# ---------------------------------------------------------------------------
# Proposals
# ---------------------------------------------------------------------------

class ProposalKind(Enum):
    GLOSSARY_TERM = "GlossaryTerm"
    COMPETENCY_QUESTION = "CompetencyQuestion"
    CLASS_DEF = "ClassDef"
    OBJECT_PROPERTY_DEF = "ObjectPropertyDef"
    DATA_PROPERTY_DEF = "DataPropertyDef"
    RELATION_AXIOM = "RelationAxiom"
    INSTANCE = "Instance"
    ANNOTATION = "Annotation"
    SPARQL_TEST = "SparqlTest"
    REVISION = "Revision"


class ProposalStatus(Enum):
    PENDING = "Pending"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    EDITED = "Edited"


# kind -> (required fields, optional fields)
PROPOSAL_SCHEMAS: dict[ProposalKind, tuple[tuple[str, ...], tuple[str, ...]]] = {
    ProposalKind.GLOSSARY_TERM: (("term", "interpretation"), ()),
    ProposalKind.COMPETENCY_QUESTION: (("question",), ()),
    ProposalKind.CLASS_DEF: (("name", "definition"), ("parent",)),
    ProposalKind.OBJECT_PROPERTY_DEF: (("name", "definition"), ("domain", "range")),
    ProposalKind.DATA_PROPERTY_DEF: (("name", "definition"), ("domain", "range")),
    ProposalKind.RELATION_AXIOM: (("subject", "relation", "object"), ()),
    ProposalKind.INSTANCE: (("name", "class"), ("properties",)),
    ProposalKind.ANNOTATION: (("entity", "label", "comment"), ()),
    ProposalKind.SPARQL_TEST: (("cq_id", "query"), ("expectation",)),
    ProposalKind.REVISION: (("theme", "sentiment", "supporting_ids", "action", "rank"), ("quote",)),
}

# field carrying each kind's identity, for voting keys and display
NAME_FIELDS: dict[ProposalKind, str] = {
    ProposalKind.GLOSSARY_TERM: "term",
    ProposalKind.COMPETENCY_QUESTION: "question",
    ProposalKind.CLASS_DEF: "name",
    ProposalKind.OBJECT_PROPERTY_DEF: "name",
    ProposalKind.DATA_PROPERTY_DEF: "name",
    ProposalKind.INSTANCE: "name",
    ProposalKind.ANNOTATION: "entity",
    ProposalKind.SPARQL_TEST: "cq_id",
    ProposalKind.REVISION: "theme",
}


@dataclass(frozen=True)
class Provenance:
    template_id: str
    technique: str
    prompt_hash: str
    provider_id: str
    timestamp: str


def proposal_id(kind: ProposalKind, payload: dict) -> str:
    canonical = json.dumps({"kind": kind.value, "payload": payload},
                           sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Proposal:
    id: str
    kind: ProposalKind
    payload: dict
    status: ProposalStatus = ProposalStatus.PENDING
    provenance: Provenance | None = None
    original_payload: dict | None = None  # set when status is Edited
    reason: str | None = None

    @classmethod
    def create(cls, kind: ProposalKind, payload: dict, provenance: Provenance | None = None) -> "Proposal":
        return cls(id=proposal_id(kind, payload), kind=kind, payload=payload, provenance=provenance)

    def display_name(self) -> str:
        name_field = NAME_FIELDS.get(self.kind)
        if name_field is None:  # RelationAxiom
            p = self.payload
            return f"{p.get('subject')} {p.get('relation')} {p.get('object')}"
        return str(self.payload.get(name_field, ""))

    def vote_key(self) -> tuple[str, str]:
        return (self.kind.value, " ".join(self.display_name().casefold().split()))

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind.value,
            "payload": self.payload,
            "status": self.status.value,
        }
        if self.provenance:
            out["provenance"] = {
                "template_id": self.provenance.template_id,
                "technique": self.provenance.technique,
                "prompt_hash": self.provenance.prompt_hash,
                "provider_id": self.provenance.provider_id,
                "timestamp": self.provenance.timestamp,
            }
        if self.original_payload is not None:
            out["original_payload"] = self.original_payload
        if self.reason is not None:
            out["reason"] = self.reason
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Proposal":
        prov = None
        if "provenance" in data:
            prov = Provenance(**data["provenance"])
        return cls(
            id=data["id"],
            kind=ProposalKind(data["kind"]),
            payload=data["payload"],
            status=ProposalStatus(data["status"]),
            provenance=prov,
            original_payload=data.get("original_payload"),
            reason=data.get("reason"),
        )


_FENCE_RE = re.compile(r"```[a-zA-Z0-9]*\n(.*?)```", re.DOTALL)


def validate_payload(kind: ProposalKind, payload, path: str = "payload"):
    if not isinstance(payload, dict):
        raise SchemaViolationError(path, "payload must be an object")
    required, optional = PROPOSAL_SCHEMAS[kind]
    allowed = set(required) | set(optional)
    for key in payload:
        if key not in allowed:
            raise SchemaViolationError(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in payload:
            raise SchemaViolationError(f"{path}.{key}", "required field missing")
    if kind is ProposalKind.REVISION:
        if not isinstance(payload["supporting_ids"], list):
            raise SchemaViolationError(f"{path}.supporting_ids", "must be a list")
        if not isinstance(payload["rank"], int):
            raise SchemaViolationError(f"{path}.rank", "must be an integer")
    if kind is ProposalKind.INSTANCE and "properties" in payload:
        props = payload["properties"]
        if not isinstance(props, list):
            raise SchemaViolationError(f"{path}.properties", "must be a list")
        for i, entry in enumerate(props):
            if not isinstance(entry, dict) or not {"property", "value"} <= set(entry):
                raise SchemaViolationError(f"{path}.properties[{i}]", "needs property and value")
            extra = set(entry) - {"property", "value", "value_type"}
            if extra:
                raise SchemaViolationError(f"{path}.properties[{i}].{sorted(extra)[0]}", "unknown field")


def parse_proposals(completion: str, expected_kinds=None) -> list[Proposal]:
    """Extract and validate the first fenced proposal block of a completion."""
    m = _FENCE_RE.search(completion)
    if not m:
        raise NoStructuredBlockError("no fenced code block found in completion")
    try:
        doc = json.loads(m.group(1))
    except json.JSONDecodeError as exc:
        raise SchemaViolationError("(document)", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "proposals" not in doc:
        raise SchemaViolationError("(document)", "expected an object with a 'proposals' list")
    extra = set(doc) - {"proposals"}
    if extra:
        raise SchemaViolationError(sorted(extra)[0], "unknown field")
    items = doc["proposals"]
    if not isinstance(items, list):
        raise SchemaViolationError("proposals", "must be a list")
    out = []
    for i, item in enumerate(items):
        path = f"proposals[{i}]"
        if not isinstance(item, dict):
            raise SchemaViolationError(path, "must be an object")
        unknown = set(item) - {"kind", "payload"}
        if unknown:
            raise SchemaViolationError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        if "kind" not in item or "payload" not in item:
            raise SchemaViolationError(path, "needs kind and payload")
        try:
            kind = ProposalKind(item["kind"])
        except ValueError:
            raise SchemaViolationError(f"{path}.kind", f"unknown kind {item['kind']!r}")
        if expected_kinds is not None and kind not in expected_kinds:
            raise UnexpectedKindError(kind.value, expected_kinds)
        validate_payload(kind, item["payload"], f"{path}.payload")
        out.append(Proposal.create(kind, item["payload"]))
    return out


REPAIR_INSTRUCTION = (
    "The previous answer could not be used: {error}. "
    "Reply again with only a fenced code block containing the JSON proposal document."
)


def complete_and_parse(template: PromptTemplate, context: dict, provider, *,
                       model: str = "default", expected_kinds=None):
    """One completion parsed into proposals, with at most one repair re-prompt.

    Returns (proposals, prompt_hash, completion_text) for provenance.
    """
    kinds = expected_kinds if expected_kinds is not None else template.expected_kinds
    request = build_request(template, context, model=model)
    response = provider.complete(request)
    completion = response.completions[0]
    try:
        return parse_proposals(completion, kinds), prompt_hash(request.messages), completion
    except (NoStructuredBlockError, SchemaViolationError, UnexpectedKindError) as exc:
        repair_messages = request.messages + (
            ("assistant", completion),
            ("user", REPAIR_INSTRUCTION.format(error=exc)),
        )
        repair_request = ChatRequest(model=request.model, messages=repair_messages,
                                     temperature=request.temperature, n=1)
        repair_response = provider.complete(repair_request)
        repaired = repair_response.completions[0]
        proposals = parse_proposals(repaired, kinds)  # second failure propagates
        return proposals, prompt_hash(repair_request.messages), repaired


# ---------------------------------------------------------------------------
# Self-consistency voting
# ---------------------------------------------------------------------------

@dataclass
class VoteResult:
    winners: list[Proposal]
    minority: list[Proposal]
    tally: dict[tuple[str, str], int]
    prompt_hash: str


def self_consistency(template: PromptTemplate, context: dict, k: int, provider, *,
                     model: str = "default") -> VoteResult:
    """Draw k samples and keep proposals backed by a strict majority of them.

    Sub-majority and tied proposals land in the minority list for human review;
    unparseable samples count as empty rather than aborting the vote.
    """
    if k < 1:
        raise ValueError("sample count k must be >= 1")
    request = build_request(template, context, model=model, n=k,
                            temperature=SELF_CONSISTENCY_TEMPERATURE if k > 1 else DEFAULT_TEMPERATURE)
    response = provider.complete(request)
    per_sample: list[dict[tuple[str, str], Proposal]] = []
    for completion in response.completions:
        try:
            proposals = parse_proposals(completion, template.expected_kinds or None)
        except (NoStructuredBlockError, SchemaViolationError, UnexpectedKindError):
            per_sample.append({})
            continue
        per_sample.append({p.vote_key(): p for p in proposals})

    tally: dict[tuple[str, str], int] = {}
    first_seen: dict[tuple[str, str], Proposal] = {}
    for sample in per_sample:
        for key, prop in sample.items():
            tally[key] = tally.get(key, 0) + 1
            first_seen.setdefault(key, prop)

    winners, minority = [], []
    for key in sorted(first_seen, key=lambda key: (key[0], key[1])):
        (winners if tally[key] * 2 > k else minority).append(first_seen[key])
    return VoteResult(winners=winners, minority=minority, tally=tally,
                      prompt_hash=prompt_hash(request.messages))


# ---------------------------------------------------------------------------
# Prompt chaining
# ---------------------------------------------------------------------------

def chain_steps(template: PromptTemplate) -> list[PromptTemplate]:
    """Expand a PromptChaining template into one single-step template per step."""
    if template.technique is not Technique.PROMPT_CHAINING:
        raise ValueError(f"template {template.id} is not a prompt chain")
    out = []
    for i, step in enumerate(template.steps, 1):
        kinds = template.expected_kinds if i == len(template.steps) else ()
        out.append(PromptTemplate(
            id=f"{template.id}#step{i}", technique=Technique.ZERO_SHOT, body=step,
            slots=template.slots, expected_kinds=kinds, system=template.system,
        ))
    return out


def run_chain(steps, context: dict, provider, *, model: str = "default"):
    """Run ≥2 templates sequentially, feeding each completion into the next prompt.

    Returns (responses, per-step prompt hashes); aborts at the first failure
    with a ChainError carrying the partial transcript and the failing step index.
    """
    if len(steps) < 2:
        raise ValueError("a prompt chain needs at least two steps")
    responses: list[ChatResponse] = []
    hashes: list[str] = []
    previous: str | None = None
    for index, step in enumerate(steps, 1):
        prompt = render_prompt(step, context)
        if previous is not None:
            prompt = f"Previous step output:\n{previous}\n\n{prompt}"
        messages = (("system", step.system),) if step.system else ()
        request = ChatRequest(model=model, messages=messages + (("user", prompt),))
        hashes.append(prompt_hash(request.messages))
        try:
            response = provider.complete(request)
        except GatewayError as exc:
            raise ChainError(index, responses, exc) from exc
        responses.append(response)
        previous = response.completions[0]
    return responses, hashes


def prompt_chain(steps, context: dict, provider, *, model: str = "default") -> list[ChatResponse]:
    """Ordered chain responses (see run_chain for the hash-carrying variant)."""
    responses, _ = run_chain(steps, context, provider, model=model)
    return responses


# ---------------------------------------------------------------------------
# Retrieval
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class CorpusIndex:
    documents: list[tuple[str, str, str]]  # (id, title, text)
    term_freq: dict[str, dict[str, int]]   # doc id -> term -> count
    doc_freq: dict[str, int]

    @classmethod
    def from_documents(cls, documents) -> "CorpusIndex":
        term_freq: dict[str, dict[str, int]] = {}
        doc_freq: dict[str, int] = {}
        docs = [tuple(d) for d in documents]
        for doc_id, title, text in docs:
            counts: dict[str, int] = {}
            for token in _tokenize(f"{title} {text}"):
                counts[token] = counts.get(token, 0) + 1
            term_freq[doc_id] = counts
            for token in counts:
                doc_freq[token] = doc_freq.get(token, 0) + 1
        return cls(documents=docs, term_freq=term_freq, doc_freq=doc_freq)

    def text_of(self, doc_id: str) -> str:
        for did, _, text in self.documents:
            if did == doc_id:
                return text
        raise KeyError(doc_id)


def retrieve(index: CorpusIndex, query: str, k: int) -> list[tuple[str, float]]:
    """Top-k documents by sum over query terms of tf * ln(1 + N/df)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_docs = len(index.documents)
    terms = _tokenize(query)
    scored = []
    for doc_id, _, _ in index.documents:
        tf = index.term_freq[doc_id]
        score = 0.0
        for term in terms:
            df = index.doc_freq.get(term, 0)
            if df and term in tf:
                score += tf[term] * math.log(1 + n_docs / df)
        if score > 0:
            scored.append((doc_id, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
