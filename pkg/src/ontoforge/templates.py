"""Shipped prompt templates: one per pipeline stage plus the theme-refinement
follow-up, covering all seven prompting techniques."""

from __future__ import annotations

from .gateway import PromptTemplate, ProposalKind, Technique

SYSTEM_PREAMBLE = (
    "You are assisting an ontology engineering team. Be precise, stay within the "
    "requested output format, and never invent identifiers outside the provided inventory."
)

STRUCTURAL_KINDS = (
    ProposalKind.CLASS_DEF,
    ProposalKind.OBJECT_PROPERTY_DEF,
    ProposalKind.DATA_PROPERTY_DEF,
    ProposalKind.RELATION_AXIOM,
    ProposalKind.INSTANCE,
)

TEMPLATES: dict[str, PromptTemplate] = {}


def _register(template: PromptTemplate) -> PromptTemplate:
    TEMPLATES[template.id] = template
    return template


GLOSSARY_EXTRACTION = _register(PromptTemplate(
    id="glossary-extraction",
    technique=Technique.RETRIEVAL_AUGMENTED,
    system=SYSTEM_PREAMBLE,
    body=(
        "Identify the key domain terms that the '{project}' ontology must define, "
        "based on the scenario excerpts below. Propose one GlossaryTerm per term "
        "with a one-sentence interpretation a non-technical stakeholder can read."
    ),
    slots=("project",),
    expected_kinds=(ProposalKind.GLOSSARY_TERM,),
))

CQ_GENERATION = _register(PromptTemplate(
    id="cq-generation",
    technique=Technique.FEW_SHOT,
    system=SYSTEM_PREAMBLE,
    body=(
        "Formulate informal competency questions the '{project}' ontology must be able "
        "to answer. Cover the needs that appear in the scenario and glossary; phrase each "
        "question in plain natural language.\n"
        "Scenario:\n{scenario}\n\n"
        "Accepted glossary terms:\n{glossary}"
    ),
    slots=("project", "scenario", "glossary"),
    exemplars=(
        "Which vehicles can seat at least five passengers?",
        "Does the user prefer an automatic or a manual transmission?",
    ),
    expected_kinds=(ProposalKind.COMPETENCY_QUESTION,),
))

MODELET_DEVELOPMENT = _register(PromptTemplate(
    id="modelet-development",
    technique=Technique.PROMPT_CHAINING,
    system=SYSTEM_PREAMBLE,
    body="",
    slots=("project", "scenario", "glossary", "focus"),
    steps=(
        "List the core concepts needed to model {focus} for the '{project}' ontology.\n"
        "Scenario:\n{scenario}\n\nAccepted glossary terms:\n{glossary}",
        "For the concepts you listed, propose the properties and relationships that "
        "connect them, including plausible domains and ranges.",
        "Compile the final modelet covering {focus}: classes with suggested parents, "
        "object and data properties with domains and ranges, any extra relation axioms, "
        "and sample instances that exercise every class.",
    ),
    expected_kinds=STRUCTURAL_KINDS,
))

TESTCASE_TRANSLATION = _register(PromptTemplate(
    id="testcase-translation",
    technique=Technique.ZERO_SHOT,
    system=SYSTEM_PREAMBLE,
    body=(
        "Translate the competency question below into a SPARQL SELECT query and propose "
        "it as one SparqlTest with cq_id \"{cq_id}\".\n"
        "Question {cq_id}: {question}\n\n"
        "Use only this inventory.\n"
        "PREFIX {prefix}: <{namespace}>\n"
        "Classes: {classes}\n"
        "Object properties: {object_properties}\n"
        "Data properties: {data_properties}"
    ),
    slots=("cq_id", "question", "prefix", "namespace", "classes",
           "object_properties", "data_properties"),
    expected_kinds=(ProposalKind.SPARQL_TEST,),
))

REFINEMENT_SUGGESTIONS = _register(PromptTemplate(
    id="refinement-suggestions",
    technique=Technique.SELF_CONSISTENCY,
    system=SYSTEM_PREAMBLE,
    body=(
        "Review the current '{project}' ontology inventory and suggest additions that "
        "close gaps in how user needs are captured: missing classes, properties, or "
        "relation axioms. Suggest only genuinely missing elements.\n"
        "Classes: {classes}\n"
        "Object properties: {object_properties}\n"
        "Data properties: {data_properties}"
    ),
    slots=("project", "classes", "object_properties", "data_properties"),
    expected_kinds=(ProposalKind.CLASS_DEF, ProposalKind.OBJECT_PROPERTY_DEF,
                    ProposalKind.DATA_PROPERTY_DEF, ProposalKind.RELATION_AXIOM),
))

ANNOTATION_GENERATION = _register(PromptTemplate(
    id="annotation-generation",
    technique=Technique.GENERAL_KNOWLEDGE,
    system=SYSTEM_PREAMBLE,
    body=(
        "Write a human-readable label and a one-sentence descriptive comment for every "
        "entity listed below. Propose one Annotation per entity and repeat the entity "
        "IRI exactly as given.\n"
        "Entities needing annotations:\n{entities}"
    ),
    slots=("entities",),
    expected_kinds=(ProposalKind.ANNOTATION,),
))

FEEDBACK_THEMES = _register(PromptTemplate(
    id="feedback-themes",
    technique=Technique.CHAIN_OF_THOUGHT,
    system=SYSTEM_PREAMBLE,
    body=(
        "Summarize the stakeholder feedback items below into recurring themes. For each "
        "theme report a sentiment (Positive, Negative, Mixed or Neutral), the supporting "
        "item ids, one representative quote, a suggested action, and a priority rank "
        "starting at 1 for the most pressing theme.\n"
        "Items:\n{items}"
    ),
    slots=("items",),
    steps=(
        "Group the items by the aspect of the ontology they talk about.",
        "Judge the sentiment of each group from the wording of its items.",
        "Rank the groups: more supporting items and blocking problems rank higher.",
    ),
    expected_kinds=(ProposalKind.REVISION,),
))

THEME_REFINEMENT = _register(PromptTemplate(
    id="theme-refinement",
    technique=Technique.ZERO_SHOT,
    system=SYSTEM_PREAMBLE,
    body=(
        "The feedback theme '{theme}' was accepted with this suggested action: {action}\n"
        "Propose the concrete schema changes that implement the action, staying "
        "consistent with the inventory.\n"
        "Classes: {classes}\n"
        "Object properties: {object_properties}\n"
        "Data properties: {data_properties}"
    ),
    slots=("theme", "action", "classes", "object_properties", "data_properties"),
    expected_kinds=(ProposalKind.CLASS_DEF, ProposalKind.OBJECT_PROPERTY_DEF,
                    ProposalKind.DATA_PROPERTY_DEF, ProposalKind.RELATION_AXIOM),
))
