#!/usr/bin/env python3
"""Regenerate the bundled demo artifacts (mock completions keyed by prompt
hash, batch decision files, runbooks) under src/ontoforge/fixtures/henri/.

Run from the repository root after changing templates or demo content:

    python3 scripts/gen_fixtures.py
"""

from __future__ import annotations

import json
import os
import shutil
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ontoforge import docgen, feedback, pipeline
from ontoforge.fixtures import (
    HENRI_SCENARIO, build_henri_project, build_table4_synth,
)
from ontoforge.gateway import ChatResponse, prompt_hash
from ontoforge.model import extract_snapshot

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
HENRI_DIR = os.path.join(ROOT, "src", "ontoforge", "fixtures", "henri")
DATA_DIR = os.path.join(ROOT, "src", "ontoforge", "fixtures", "data")

NS = "http://vivocaz.fr/ucpo/ns#"


def block(*items):
    doc = {"proposals": [{"kind": k, "payload": p} for k, p in items]}
    return "```json\n" + json.dumps(doc, indent=1, ensure_ascii=False) + "\n```"


class AuthoringProvider:
    """Pops scripted completions in call order while recording prompt hashes."""

    id = "mock"

    def __init__(self):
        self.queue = []
        self.recorded = []  # (hash, [samples], label)

    def push(self, samples, label):
        self.queue.append((samples if isinstance(samples, list) else [samples], label))

    def complete(self, request):
        if not self.queue:
            raise RuntimeError("authoring queue exhausted")
        samples, label = self.queue.pop(0)
        self.recorded.append((prompt_hash(request.messages), samples, label))
        return ChatResponse(completions=tuple(samples[:request.n]))


# ---------------------------------------------------------------------------
# Stage content
# ---------------------------------------------------------------------------

GLOSSARY = [
    ("User Profile", "The collected personal details and stated preferences of one user "
                     "of the platform."),
    ("User Context", "The situation around an interaction: when, where, on which device "
                     "and during which activity it happens."),
    ("User Profile Context", "A profile together with the situational information that "
                             "applies while that profile is active."),
]

CQ_TOPICS = [
    ("Which demographic details describe the user?", True),
    ("Which body style of vehicle does the user prefer?", True),
    ("How much is the user prepared to spend on the vehicle?", True),
    ("Which concrete vehicle models does the user favour?", True),
    ("How far does the user commute on a typical day?", True),
    ("Which vehicle brand does the user prefer?", True),
    ("For which purposes will the user drive the vehicle?", True),
    ("Does the user prefer a manual or an automatic gearbox?", False),
    ("Which safety capabilities matter to the user?", True),
    ("Which fuel or energy type does the user prefer?", True),
    ("Does the user need towing or cargo capacity?", False),
    ("Which infotainment features does the user expect?", False),
    ("In which climate will the vehicle mostly be driven?", False),
    ("How many passengers must the vehicle accommodate?", True),
    ("Does the user want a new or a pre-owned vehicle?", False),
]

MODELET1_FINAL = block(
    ("ClassDef", {"name": "User", "definition": "A person shopping on the platform."}),
    ("ClassDef", {"name": "PersonalProfile",
                  "definition": "Stable demographic and social information about a user."}),
    ("ObjectPropertyDef", {"name": "hasPersonalProfile",
                           "definition": "Connects a user to their demographic profile.",
                           "domain": "User", "range": "PersonalProfile"}),
    ("DataPropertyDef", {"name": "hasFirstName", "definition": "Given name.",
                         "domain": "PersonalProfile", "range": "string"}),
    ("DataPropertyDef", {"name": "hasLastName", "definition": "Family name.",
                         "domain": "PersonalProfile", "range": "string"}),
    ("DataPropertyDef", {"name": "hasAge", "definition": "Age in years.",
                         "domain": "PersonalProfile", "range": "integer"}),
    ("DataPropertyDef", {"name": "hasOccupation", "definition": "Professional activity.",
                         "domain": "PersonalProfile", "range": "string"}),
    ("DataPropertyDef", {"name": "hasNumberOfChildren", "definition": "Number of children.",
                         "domain": "PersonalProfile", "range": "integer"}),
    ("ClassDef", {"name": "DrivingStyle",
                  "definition": "Mileage, road conditions and primary use of the vehicle.",
                  "parent": "PersonalProfile"}),
    ("ClassDef", {"name": "TechSavviness",
                  "definition": "Comfort with automotive technology and assistance systems.",
                  "parent": "PersonalProfile"}),
    ("ClassDef", {"name": "EnvironmentalConcerns",
                  "definition": "Weight the user gives to environmental impact.",
                  "parent": "PersonalProfile"}),
    ("Instance", {"name": "Henri", "class": "User",
                  "properties": [{"property": "hasPersonalProfile", "value": "HenriPersonal",
                                  "value_type": "entity"}]}),
    ("Instance", {"name": "HenriPersonal", "class": "PersonalProfile",
                  "properties": [
                      {"property": "hasFirstName", "value": "Henri"},
                      {"property": "hasLastName", "value": "Dubois"},
                      {"property": "hasAge", "value": 45, "value_type": "integer"},
                      {"property": "hasOccupation", "value": "sales engineer"},
                      {"property": "hasNumberOfChildren", "value": 2, "value_type": "integer"},
                  ]}),
)

_MODELET2_CLASSES = [
    ("UserProfile", "A per-purpose profile a user maintains.", None),
    ("Preference", "A desired characteristic of the vehicle being sought.", None),
    ("VehicleType", "Preferred body style.", "Preference"),
    ("Budget", "Financial range for the purchase.", "Preference"),
    ("Brand", "Preferred manufacturer.", "Preference"),
    ("Context", "Situational information around an interaction.", None),
    ("TemporalContext", "Time-related factors.", "Context"),
    ("Location", "Where the interaction happens.", "Context"),
    ("Activity", "What the user is doing.", "Context"),
    ("Device", "Hardware used to interact.", "Context"),
    ("SocialContext", "Social environment of the user.", "Context"),
    ("UserContext", "General context attached to the user.", "Context"),
    ("ProfileContext", "Context specific to one profile.", "Context"),
    ("VehicleModel", "A concrete vehicle model on the market.", None),
]

_MODELET2_OBJECT_PROPS = [
    ("hasUserProfile", "Connects a user to a purpose-specific profile.", "User", "UserProfile"),
    ("hasVehiclePreference", "Connects a profile to a vehicle preference.", "UserProfile", "Preference"),
    ("hasFavoriteBrand", "Brand the preference is anchored to.", "Preference", "Brand"),
    ("hasFavoriteModel", "Model the user singles out.", "Preference", "VehicleModel"),
    ("recommendsVehicle", "Vehicle model matching the preference.", "Preference", "VehicleModel"),
    ("hasPreferredVehicleType", "Preferred body style of the preference.", "Preference", "VehicleType"),
    ("hasContext", "Situational information attached to the profile.", "UserProfile", "Context"),
    ("hasBudget", "Budget attached to the preference.", "Preference", "Budget"),
]

_MODELET2_DATA_PROPS = [
    ("hasDrivingPurpose", "Main purpose of the profile.", "UserProfile", "string"),
    ("hasCommuteDistance", "Typical daily commute in kilometres.", "UserProfile", "decimal"),
    ("hasFuelEfficiency", "Desired fuel efficiency threshold.", "Preference", "decimal"),
    ("hasFuelType", "Preferred fuel or energy type.", "Preference", "string"),
    ("hasSeatingCapacity", "Seats the vehicle must offer.", "Preference", "integer"),
    ("hasDesiredSafetyFeature", "Safety capability the user asks for.", "Preference", "string"),
    ("hasBudgetAmount", "Upper bound of the budget in euros.", "Budget", "decimal"),
]

_PRO_MODELS = ["RenaultZoe", "PeugeotE208", "ToyotaPrius", "HondaInsight", "Peugeot5008Hybrid"]
_FAMILY_MODELS = ["Peugeot5008Hybrid", "RenaultEspace", "VolkswagenTouran"]

_MODELET2_INSTANCES = [
    ("Henri", "User", [
        {"property": "hasUserProfile", "value": "HenriProProfile", "value_type": "entity"},
        {"property": "hasUserProfile", "value": "HenriFamilyProfile", "value_type": "entity"},
    ]),
    ("HenriProProfile", "UserProfile", [
        {"property": "hasDrivingPurpose", "value": "professional"},
        {"property": "hasCommuteDistance", "value": "42.5", "value_type": "decimal"},
        {"property": "hasVehiclePreference", "value": "HenriProPreference", "value_type": "entity"},
        {"property": "hasContext", "value": "MorningCommute", "value_type": "entity"},
    ]),
    ("HenriFamilyProfile", "UserProfile", [
        {"property": "hasDrivingPurpose", "value": "family"},
        {"property": "hasVehiclePreference", "value": "HenriFamilyPreference", "value_type": "entity"},
        {"property": "hasContext", "value": "WeekendTrip", "value_type": "entity"},
    ]),
    ("HenriProPreference", "Preference", [
        {"property": "hasFuelEfficiency", "value": "32.5", "value_type": "decimal"},
        {"property": "hasFuelType", "value": "electric"},
        {"property": "hasPreferredVehicleType", "value": "CompactCar", "value_type": "entity"},
        {"property": "hasFavoriteBrand", "value": "Peugeot", "value_type": "entity"},
        {"property": "hasFavoriteModel", "value": "PeugeotE208", "value_type": "entity"},
        {"property": "hasBudget", "value": "HenriProBudget", "value_type": "entity"},
    ] + [{"property": "recommendsVehicle", "value": m, "value_type": "entity"}
         for m in _PRO_MODELS]),
    ("HenriFamilyPreference", "Preference", [
        {"property": "hasSeatingCapacity", "value": 7, "value_type": "integer"},
        {"property": "hasDesiredSafetyFeature", "value": "automatic emergency braking"},
        {"property": "hasFuelType", "value": "hybrid"},
        {"property": "hasPreferredVehicleType", "value": "Suv", "value_type": "entity"},
        {"property": "hasFavoriteBrand", "value": "Renault", "value_type": "entity"},
        {"property": "hasBudget", "value": "HenriFamilyBudget", "value_type": "entity"},
    ] + [{"property": "recommendsVehicle", "value": m, "value_type": "entity"}
         for m in _FAMILY_MODELS]),
    ("HenriProBudget", "Budget", [
        {"property": "hasBudgetAmount", "value": "28000.0", "value_type": "decimal"}]),
    ("HenriFamilyBudget", "Budget", [
        {"property": "hasBudgetAmount", "value": "35000.0", "value_type": "decimal"}]),
    ("CompactCar", "VehicleType", []),
    ("Suv", "VehicleType", []),
    ("Peugeot", "Brand", []),
    ("Renault", "Brand", []),
    ("MorningCommute", "Activity", []),
    ("WeekendTrip", "Activity", []),
] + [(m, "VehicleModel", []) for m in sorted(set(_PRO_MODELS + _FAMILY_MODELS))]


def modelet2_final():
    items = []
    for name, definition, parent in _MODELET2_CLASSES:
        payload = {"name": name, "definition": definition}
        if parent:
            payload["parent"] = parent
        items.append(("ClassDef", payload))
    for name, definition, domain, range_ in _MODELET2_OBJECT_PROPS:
        items.append(("ObjectPropertyDef", {"name": name, "definition": definition,
                                            "domain": domain, "range": range_}))
    items.append(("ObjectPropertyDef", {
        "name": "hasPreferenceDetail",
        "definition": "Generic link from a preference to one of its detail values.",
        "domain": "Preference"}))
    items.append(("RelationAxiom", {"subject": "hasFavoriteBrand",
                                    "relation": "subPropertyOf",
                                    "object": "hasPreferenceDetail"}))
    for name, definition, domain, range_ in _MODELET2_DATA_PROPS:
        items.append(("DataPropertyDef", {"name": name, "definition": definition,
                                          "domain": domain, "range": range_}))
    for name, cls, props in _MODELET2_INSTANCES:
        payload = {"name": name, "class": cls}
        if props:
            payload["properties"] = props
        items.append(("Instance", payload))
    return block(*items)


CQ_QUERIES = {
    "CQ01": "SELECT ?user ?age ?occupation WHERE {\n"
            "  ?user ucpo:hasPersonalProfile ?pp .\n"
            "  ?pp ucpo:hasAge ?age .\n"
            "  ?pp ucpo:hasOccupation ?occupation .\n}",
    "CQ02": "SELECT ?profile ?vehicleType WHERE {\n"
            "  ?profile ucpo:hasVehiclePreference ?pref .\n"
            "  ?pref ucpo:hasPreferredVehicleType ?vehicleType .\n}",
    "CQ03": "SELECT ?pref ?amount WHERE {\n"
            "  ?pref ucpo:hasBudget ?budget .\n"
            "  ?budget ucpo:hasBudgetAmount ?amount .\n}",
    "CQ04": "SELECT ?user ?model WHERE {\n"
            "  ?user ucpo:hasUserProfile ?profile .\n"
            "  ?profile ucpo:hasVehiclePreference ?pref .\n"
            "  ?pref ucpo:hasFavoriteModel ?model .\n}",
    "CQ05": "SELECT ?profile ?distance WHERE {\n"
            "  ?profile ucpo:hasCommuteDistance ?distance .\n}",
    "CQ06": "SELECT ?user ?brand WHERE {\n"
            "  ?user ucpo:hasUserProfile ?profile .\n"
            "  ?profile ucpo:hasVehiclePreference ?pref .\n"
            "  ?pref ucpo:hasFavoriteBrand ?brand .\n}",
    "CQ07": "SELECT ?profile ?purpose WHERE {\n"
            "  ?profile ucpo:hasDrivingPurpose ?purpose .\n}",
    "CQ08": "SELECT ?pref ?safety WHERE {\n"
            "  ?pref ucpo:hasDesiredSafetyFeature ?safety .\n}",
    "CQ09": "SELECT ?pref ?fuel WHERE {\n"
            "  ?pref ucpo:hasFuelType ?fuel .\n}",
    "CQ10": "SELECT ?pref ?seats WHERE {\n"
            "  ?pref ucpo:hasSeatingCapacity ?seats .\n}",
}

PREFIX_LINE = "PREFIX ucpo: <http://vivocaz.fr/ucpo/ns#>\n"


def testcase_block(cq_id):
    return block(("SparqlTest", {"cq_id": cq_id, "query": PREFIX_LINE + CQ_QUERIES[cq_id]}))


def refinement_sample(extra=()):
    items = [
        ("DataPropertyDef", {"name": "hasSafetyFeature",
                             "definition": "A safety capability a vehicle model offers.",
                             "domain": "VehicleModel", "range": "string"}),
    ]
    items.extend(extra)
    return block(*items)


FEEDBACK_ITEMS = [
    {"role": "DomainExpert",
     "text": "The model cannot express towing-capacity requirements for utility buyers.",
     "timestamp": "2026-03-02T09:15:00+00:00"},
    {"role": "EndUser",
     "text": "I could not record that I need a tow hitch for my trailer; towing capacity is missing.",
     "timestamp": "2026-03-02T10:40:00+00:00"},
    {"role": "OntologyEngineer",
     "text": "Dealer inventory data carries towing capacity but there is no property to map it to.",
     "timestamp": "2026-03-03T08:05:00+00:00"},
    {"role": "EndUser",
     "text": "The profile concepts are clearly documented and easy to follow.",
     "timestamp": "2026-03-03T11:30:00+00:00"},
    {"role": "DomainExpert",
     "text": "Consider letting users state a preferred vehicle colour.",
     "timestamp": "2026-03-04T16:20:00+00:00"},
]

THEMES_BLOCK = block(
    ("Revision", {"theme": "towing capacity not modelled", "sentiment": "Negative",
                  "supporting_ids": ["fb-001", "fb-002", "fb-003"],
                  "quote": "I could not record that I need a tow hitch for my trailer; "
                           "towing capacity is missing.",
                  "action": "Add a data property capturing the required towing capacity "
                            "to vehicle preferences.",
                  "rank": 1}),
    ("Revision", {"theme": "colour preference missing", "sentiment": "Negative",
                  "supporting_ids": ["fb-005"],
                  "quote": "Consider letting users state a preferred vehicle colour.",
                  "action": "Add a colour preference subclass.",
                  "rank": 2}),
    ("Revision", {"theme": "documentation praised", "sentiment": "Positive",
                  "supporting_ids": ["fb-004"],
                  "quote": "The profile concepts are clearly documented and easy to follow.",
                  "action": "Keep the current documentation style.",
                  "rank": 3}),
)


def annotation_block(project):
    snapshot = extract_snapshot(project.graph)
    needing = docgen.entities_needing_annotations(snapshot)
    items = []
    for iri in needing:
        label = docgen.fallback_label(iri)
        if iri in snapshot.classes:
            comment = f"{label} as modelled for vehicle-sales personalization."
        elif iri in snapshot.object_properties:
            comment = f"Connects entities through the {label.lower()} relationship."
        else:
            comment = f"Records the {label.lower()} value."
        items.append(("Annotation", {"entity": iri, "label": label, "comment": comment}))
    return block(*items)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def accept_all(project):
    return [{"proposal": p.id, "verdict": "accept"} for p in project.pending()]


def cq_decisions(project):
    keep = {q for q, accepted in CQ_TOPICS if accepted}
    decisions = []
    for p in project.pending():
        verdict = "accept" if p.payload["question"] in keep else "reject"
        d = {"proposal": p.id, "verdict": verdict}
        if verdict == "reject":
            d["reason"] = "out of scope for the first iteration"
        decisions.append(d)
    return decisions


def theme_decisions(project):
    decisions = []
    for p in project.pending():
        if p.payload["theme"] == "towing capacity not modelled":
            decisions.append({"proposal": p.id, "verdict": "accept"})
        else:
            decisions.append({"proposal": p.id, "verdict": "reject",
                              "reason": "deferred to a later iteration"})
    return decisions


GATEFAIL_QUERY = PREFIX_LINE + "SELECT ?x WHERE {\n  ?x a ucpo:UnmodeledThing .\n}"


def main():
    clock_state = {"n": 0}

    def clock():
        clock_state["n"] += 1
        return f"2026-03-01T00:00:00+00:00#{clock_state['n']:04d}"

    with open(os.path.join(DATA_DIR, "table4-synth.ttl"), "w", encoding="utf-8") as fh:
        fh.write(build_table4_synth())

    if os.path.isdir(HENRI_DIR):
        shutil.rmtree(HENRI_DIR)
    os.makedirs(os.path.join(HENRI_DIR, "mock"))
    os.makedirs(os.path.join(HENRI_DIR, "decisions"))

    provider = AuthoringProvider()
    project = build_henri_project(clock=clock)
    steps = []
    decision_files = {}

    def review(name, decisions):
        fname = f"decisions/{name}.json"
        decision_files[fname] = decisions
        steps.append({"op": "review_apply", "file": fname})
        pipeline.apply_decisions(project, decisions, clock=clock)

    # stage 1: glossary over retrieved scenario excerpts
    provider.push(block(*[("GlossaryTerm", {"term": t, "interpretation": i})
                          for t, i in GLOSSARY]), "ScenarioGlossary")
    steps.append({"op": "stage_run", "stage": "ScenarioGlossary"})
    pipeline.run_stage(project, pipeline.Stage.SCENARIO_GLOSSARY, provider, clock=clock)
    review("step-01-glossary", accept_all(project))

    # stage 2: competency questions
    provider.push(block(*[("CompetencyQuestion", {"question": q}) for q, _ in CQ_TOPICS]),
                  "CompetencyQuestions")
    steps.append({"op": "stage_run", "stage": "CompetencyQuestions"})
    pipeline.run_stage(project, pipeline.Stage.COMPETENCY_QUESTIONS, provider, clock=clock)
    review("step-02-cqs", cq_decisions(project))

    # stage 3, run 1: demographic modelet
    provider.push("Core concepts: the user and their stable demographic profile "
                  "(name, age, occupation, children).", "ModeletDevelopment#1 step1")
    provider.push("Properties: a user holds one personal profile; the profile carries "
                  "name, age, occupation and family-size attributes.", "ModeletDevelopment#1 step2")
    provider.push(MODELET1_FINAL, "ModeletDevelopment#1 step3")
    focus1 = "stable demographic user information"
    steps.append({"op": "stage_run", "stage": "ModeletDevelopment",
                  "focus": focus1, "covers": ["CQ01"]})
    pipeline.run_stage(project, pipeline.Stage.MODELET_DEVELOPMENT, provider,
                       focus=focus1, covered_cq_ids=["CQ01"], clock=clock)
    review("step-03-modelet1", accept_all(project))

    # stage 3, run 2: preferences and context modelet
    provider.push("Core concepts: purpose-specific user profiles, vehicle preferences "
                  "(type, budget, brand, models), and interaction context (time, place, "
                  "activity, device, social setting).", "ModeletDevelopment#2 step1")
    provider.push("Properties: users hold profiles; profiles carry preferences and "
                  "context; preferences point at brands, budgets, vehicle types and "
                  "recommended models.", "ModeletDevelopment#2 step2")
    provider.push(modelet2_final(), "ModeletDevelopment#2 step3")
    focus2 = "user preferences and interaction context"
    covers2 = [f"CQ{i:02d}" for i in range(2, 11)]
    steps.append({"op": "stage_run", "stage": "ModeletDevelopment",
                  "focus": focus2, "covers": covers2})
    pipeline.run_stage(project, pipeline.Stage.MODELET_DEVELOPMENT, provider,
                       focus=focus2, covered_cq_ids=covers2, clock=clock)
    review("step-04-modelet2", accept_all(project))

    # stage 4: one SparqlTest per accepted ICQ
    for icq in project.icqs:
        provider.push(testcase_block(icq.id), f"TestCaseGeneration {icq.id}")
    steps.append({"op": "stage_run", "stage": "TestCaseGeneration"})
    pipeline.run_stage(project, pipeline.Stage.TEST_CASE_GENERATION, provider, clock=clock)
    normal_test_decisions = accept_all(project)
    # gatefail variant: same review, but CQ01's test edited to query a class
    # that no modelet declares, so the first merge gate fails
    gatefail_decisions = []
    for d in normal_test_decisions:
        proposal = project.proposals[d["proposal"]]
        if proposal.payload.get("cq_id") == "CQ01":
            gatefail_decisions.append({
                "proposal": d["proposal"], "verdict": "edit",
                "payload": {"cq_id": "CQ01", "query": GATEFAIL_QUERY},
                "reason": "tightened during review"})
        else:
            gatefail_decisions.append(dict(d))
    decision_files["decisions/step-05-tests-gatefail.json"] = gatefail_decisions
    review("step-05-tests", normal_test_decisions)

    steps.append({"op": "modelet_merge", "modelet": "modelet-1"})
    pipeline.merge_modelet(project, "modelet-1", clock=clock)
    steps.append({"op": "modelet_merge", "modelet": "modelet-2"})
    pipeline.merge_modelet(project, "modelet-2", clock=clock)

    # stage 5: self-consistency refinement, 3 samples, one straggler suggestion
    provider.push([
        refinement_sample(),
        refinement_sample(extra=[("DataPropertyDef", {
            "name": "hasEngineType", "definition": "Engine family of a vehicle model.",
            "domain": "VehicleModel", "range": "string"})]),
        refinement_sample(),
    ], "ModelRefinement")
    steps.append({"op": "stage_run", "stage": "ModelRefinement", "k": 3})
    pipeline.run_stage(project, pipeline.Stage.MODEL_REFINEMENT, provider, k=3, clock=clock)
    review("step-06-refinement", accept_all(project))

    # stage 6: annotations for every entity still missing label or comment
    provider.push(annotation_block(project), "DocumentGeneration")
    steps.append({"op": "stage_run", "stage": "DocumentGeneration"})
    pipeline.run_stage(project, pipeline.Stage.DOCUMENT_GENERATION, provider, clock=clock)
    review("step-07-annotations", accept_all(project))

    # stage 7: feedback themes
    steps.append({"op": "feedback_ingest", "file": "feedback.json"})
    feedback.ingest_feedback(project, json.dumps(FEEDBACK_ITEMS), clock=clock)
    provider.push(THEMES_BLOCK, "Feedback")
    steps.append({"op": "stage_run", "stage": "Feedback"})
    pipeline.run_stage(project, pipeline.Stage.FEEDBACK, provider, clock=clock)
    review("step-08-themes", theme_decisions(project))

    assert not provider.queue, "unused authored completions"
    for stage, status in project.stage_status.items():
        assert status is pipeline.StageStatus.PASSED, f"{stage} ended {status}"

    # -- write artifacts ----------------------------------------------------
    index = {}
    for phash, samples, label in provider.recorded:
        with open(os.path.join(HENRI_DIR, "mock", phash + ".txt"), "w", encoding="utf-8") as fh:
            fh.write("\n%%SAMPLE%%\n".join(samples))
        index[phash] = label
    with open(os.path.join(HENRI_DIR, "mock", "index.json"), "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=1, sort_keys=True)
    for fname, decisions in decision_files.items():
        with open(os.path.join(HENRI_DIR, fname), "w", encoding="utf-8") as fh:
            json.dump(decisions, fh, indent=1)
    with open(os.path.join(HENRI_DIR, "runbook.json"), "w", encoding="utf-8") as fh:
        json.dump(steps, fh, indent=1)

    gatefail_steps = []
    for step in steps:
        if step["op"] == "modelet_merge":
            break
        adjusted = dict(step)
        if adjusted.get("file") == "decisions/step-05-tests.json":
            adjusted["file"] = "decisions/step-05-tests-gatefail.json"
        gatefail_steps.append(adjusted)
    with open(os.path.join(HENRI_DIR, "runbook-gatefail.json"), "w", encoding="utf-8") as fh:
        json.dump(gatefail_steps, fh, indent=1)

    with open(os.path.join(HENRI_DIR, "feedback.json"), "w", encoding="utf-8") as fh:
        json.dump(FEEDBACK_ITEMS, fh, indent=1)
    with open(os.path.join(HENRI_DIR, "scenario.txt"), "w", encoding="utf-8") as fh:
        fh.write(HENRI_SCENARIO + "\n")

    print(f"wrote {len(index)} mock fixtures, {len(decision_files)} decision files, "
          f"{len(steps)} runbook steps")

    # -- self-check: replay from the written artifacts ----------------------
    from ontoforge.fixtures import materialize_demo
    import tempfile
    from ontoforge.testkit import run_data_tests, run_model_tests, run_query_tests, Severity
    from ontoforge.rdf import serialize_turtle

    with tempfile.TemporaryDirectory() as tmp:
        path = materialize_demo(tmp, variant="full", clock=clock)
        replayed = pipeline.load_project(path)
        snapshot = extract_snapshot(replayed.graph)
        model_errors = [f for f in run_model_tests(replayed.graph, snapshot)
                        if f.severity is Severity.ERROR]
        data_errors = [f for f in run_data_tests(replayed.graph, snapshot)
                       if f.severity is Severity.ERROR]
        report = run_query_tests(replayed.graph, replayed.test_cases)
        rebuilt = pipeline.replay_revision_log(replayed)
        assert not model_errors, model_errors
        assert not data_errors, data_errors
        assert report.all_passed(), report.to_text()
        assert serialize_turtle(rebuilt, replayed.prefixes) == \
            serialize_turtle(replayed.graph, replayed.prefixes)
        print(f"self-check passed: {report.passes}/{report.total} query tests green, "
              f"{len(replayed.graph)} triples in the main model")


if __name__ == "__main__":
    main()
