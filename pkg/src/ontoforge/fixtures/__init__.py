"""Bundled fixtures: ontology documents, query files, the synthetic metrics
ontology, and builders for the demo projects."""

from __future__ import annotations

import os
from importlib import resources

from .. import pipeline
from ..rdf import Graph, PrefixMap, parse_turtle

HENRI_NAMESPACE = "http://vivocaz.fr/ucpo/ns#"

TTL_FIXTURES = (
    "ucpo-mini.ttl",
    "cars.ttl",
    "users.ttl",
    "henri.ttl",
    "table4-synth.ttl",
    "defect_missing_domain.ttl",
    "defect_missing_range.ttl",
    "defect_subclass_cycle.ttl",
    "defect_untyped_individual.ttl",
    "defect_orphan_property.ttl",
    "defect_missing_label.ttl",
)

QUERY_FIXTURES = ("qb1.rq", "qb2.rq", "qb3.rq", "dual_context.rq")


def _data_root():
    return resources.files(__package__) / "data"


def fixture_text(name: str) -> str:
    if name.endswith(".rq"):
        return (_data_root() / "queries" / name).read_text(encoding="utf-8")
    return (_data_root() / name).read_text(encoding="utf-8")


def fixture_graph(name: str) -> tuple[Graph, PrefixMap]:
    return parse_turtle(fixture_text(name))


def henri_dir():
    """Directory with the scripted demo artifacts (mock fixtures, decisions, runbook)."""
    return resources.files(__package__) / "henri"


def henri_text(relpath: str) -> str:
    node = henri_dir()
    for part in relpath.split("/"):
        node = node / part
    return node.read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# table4-synth generator
# ---------------------------------------------------------------------------

def build_table4_synth() -> str:
    """Synthetic ontology with the published structural counts: 42 classes,
    31/16 object/data properties, 159 individuals, 11 subclass edges, and
    domain/range axioms on 30 of the object properties."""
    lines = [
        "# Synthetic ontology generated to fixed structural counts.",
        "@prefix t4: <http://example.org/table4#> .",
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "",
    ]
    for i in range(1, 43):
        lines.append(f"t4:C{i:02d} a owl:Class .")
    lines.append("")
    for i in range(1, 12):
        lines.append(f"t4:C{i + 1:02d} rdfs:subClassOf t4:C{i:02d} .")
    lines.append("")
    for i in range(1, 32):
        parts = [f"t4:op{i:02d} a owl:ObjectProperty"]
        if i <= 30:
            domain = (i - 1) % 42 + 1
            range_ = i % 42 + 1
            parts.append(f"rdfs:domain t4:C{domain:02d}")
            parts.append(f"rdfs:range t4:C{range_:02d}")
        lines.append(" ; ".join(parts) + " .")
    lines.append("")
    for i in range(1, 17):
        lines.append(f"t4:dp{i:02d} a owl:DatatypeProperty .")
    lines.append("")
    for i in range(1, 160):
        cls = (i - 1) % 42 + 1
        lines.append(f"t4:ind{i:03d} a t4:C{cls:02d} .")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Demo project builders
# ---------------------------------------------------------------------------

HENRI_SCENARIO_TITLE = "Two vehicles for Henri"

HENRI_SCENARIO = (
    "Henri is shopping for two vehicles. For his daily work as a sales engineer he "
    "wants a fuel-efficient, compact and reliable car for a long commute; for trips "
    "with his spouse and two children he wants a safe family vehicle with seven "
    "seats and room for luggage. The dealer's platform should keep one professional "
    "profile and one family profile for Henri, remember his budget, preferred brands "
    "and favourite models for each purpose, and recommend vehicle models that match "
    "the right profile, its context (commute, weekend trips) and the devices he uses "
    "to browse listings."
)


def build_henri_project(clock=None) -> pipeline.Project:
    project = pipeline.init_project(
        "henri-vehicle-profiles",
        [(HENRI_SCENARIO_TITLE, HENRI_SCENARIO)],
        namespace=HENRI_NAMESPACE,
        prefix_label="ucpo",
        clock=clock,
    )
    return project


def build_table4_project(clock=None) -> pipeline.Project:
    project = pipeline.init_project(
        "table4-synth",
        [("Metrics baseline", "Synthetic structure for metrics verification.")],
        namespace="http://example.org/table4#",
        prefix_label="t4",
        clock=clock,
    )
    pipeline.load_seed_model(project, fixture_text("table4-synth.ttl"), clock=clock)
    return project


def write_project(project: pipeline.Project, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "project.json")
    pipeline.create_project_file(project, path)
    return path


# ---------------------------------------------------------------------------
# Runbook execution
# ---------------------------------------------------------------------------

def run_runbook(project: pipeline.Project, steps, provider, read_artifact, *, clock=None):
    """Execute scripted demo steps against a project.

    read_artifact(relpath) must return the text of referenced files (decision
    lists, feedback). Steps mirror the CLI surface one-to-one.
    """
    import json as _json

    for step in steps:
        op = step["op"]
        if op == "stage_run":
            pipeline.run_stage(project, pipeline.Stage(step["stage"]), provider,
                               focus=step.get("focus"),
                               covered_cq_ids=step.get("covers"),
                               k=step.get("k", 3), clock=clock)
        elif op == "review_apply":
            decisions = _json.loads(read_artifact(step["file"]))
            pipeline.apply_decisions(project, decisions, clock=clock)
        elif op == "modelet_merge":
            pipeline.merge_modelet(project, step["modelet"], clock=clock)
        elif op == "feedback_ingest":
            from .. import feedback as feedback_mod
            feedback_mod.ingest_feedback(project, read_artifact(step["file"]), clock=clock)
        else:
            raise ValueError(f"unknown runbook op {op!r}")
    return project


def materialize_demo(directory: str, *, variant: str = "full", clock=None) -> str:
    """Copy the bundled demo artifacts into a working directory and execute the
    selected runbook against a fresh project. Returns the project file path.

    Variants: "full" (all seven stages), "gatefail" (stops after test review
    with one test edited to fail its merge gate), "review" (one stage run,
    proposals left pending), "fresh" (no steps).
    """
    os.makedirs(directory, exist_ok=True)
    src = henri_dir()
    for name in ("feedback.json", "scenario.txt", "runbook.json", "runbook-gatefail.json"):
        (_copy_text(src / name, os.path.join(directory, name)))
    mock_target = os.path.join(directory, "mock")
    os.makedirs(mock_target, exist_ok=True)
    for entry in (src / "mock").iterdir():
        _copy_text(entry, os.path.join(mock_target, entry.name))
    dec_target = os.path.join(directory, "decisions")
    os.makedirs(dec_target, exist_ok=True)
    for entry in (src / "decisions").iterdir():
        _copy_text(entry, os.path.join(dec_target, entry.name))

    from ..gateway import MockProvider
    import json as _json

    project = build_henri_project(clock=clock)
    provider = MockProvider(mock_target, strict=True)

    def read_artifact(relpath):
        return open(os.path.join(directory, relpath), encoding="utf-8").read()

    if variant == "full":
        steps = _json.loads(read_artifact("runbook.json"))
    elif variant == "gatefail":
        steps = _json.loads(read_artifact("runbook-gatefail.json"))
    elif variant == "review":
        steps = _json.loads(read_artifact("runbook.json"))[:1]
    elif variant == "fresh":
        steps = []
    else:
        raise ValueError(f"unknown demo variant {variant!r}")
    run_runbook(project, steps, provider, read_artifact, clock=clock)
    path = os.path.join(directory, "project.json")
    pipeline.save_project(project, path)
    return path


def _copy_text(source, target):
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(source.read_text(encoding="utf-8"))
