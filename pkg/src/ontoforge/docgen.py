"""Annotation injection and Markdown documentation emission."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .gateway import Proposal, complete_and_parse
from .model import OntologySnapshot, extract_snapshot
from .templates import ANNOTATION_GENERATION

_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def fallback_label(iri: str) -> str:
    """Readable label from an IRI local name: "VehicleType" -> "Vehicle Type"."""
    local = iri
    for sep in ("#", "/"):
        if sep in local:
            local = local.rsplit(sep, 1)[1]
    words = []
    for chunk in re.split(r"[_\s]+", local):
        words.extend(_CAMEL_RE.findall(chunk))
    return " ".join(words) if words else local


def entities_needing_annotations(snapshot: OntologySnapshot) -> list[str]:
    return [e for e in sorted(snapshot.classes | snapshot.properties)
            if not (snapshot.label(e) and snapshot.comment(e))]


def annotate_entities(project, provider, *, model: str = "default"):
    """Annotation proposals for every class/property still missing a label or
    comment; fully annotated entities are never proposed for again.

    Returns (proposal, prompt_hash) pairs for the pipeline to store.
    """
    if not len(project.graph):
        raise ValueError("cannot annotate an empty model")
    snapshot = extract_snapshot(project.graph)
    needing = entities_needing_annotations(snapshot)
    if not needing:
        return []
    inventory = project.inventory_context()
    facts = (
        f"Project: {project.name}\n"
        f"Classes: {inventory['classes']}\n"
        f"Object properties: {inventory['object_properties']}\n"
        f"Data properties: {inventory['data_properties']}\n"
        f"Glossary:\n{project.glossary_text()}"
    )
    context = {"entities": "\n".join(needing), "facts": facts}
    proposals, phash, _ = complete_and_parse(ANNOTATION_GENERATION, context, provider, model=model)
    wanted = set(needing)
    return [(p, phash) for p in proposals if p.payload.get("entity") in wanted]


@dataclass(frozen=True)
class ClassSection:
    iri: str
    label: str
    comment: str | None
    superclasses: tuple[str, ...]
    subclasses: tuple[str, ...]
    domain_properties: tuple[str, ...]
    individuals: tuple[str, ...]


@dataclass(frozen=True)
class PropertySection:
    iri: str
    label: str
    comment: str | None
    kind: str  # "object" | "data"
    domains: tuple[str, ...]
    ranges: tuple[str, ...]


@dataclass
class DocBundle:
    toc: list[str] = field(default_factory=list)
    class_sections: list[ClassSection] = field(default_factory=list)
    property_sections: list[PropertySection] = field(default_factory=list)
    glossary: list[tuple[str, str]] = field(default_factory=list)


def _display(snapshot: OntologySnapshot, iri: str) -> str:
    return snapshot.label(iri) or fallback_label(iri)


def build_doc_bundle(snapshot: OntologySnapshot, glossary=()) -> DocBundle:
    bundle = DocBundle()
    order_key = lambda iri: (_display(snapshot, iri).casefold(), iri)

    for cls in sorted(snapshot.classes, key=order_key):
        supers = tuple(sorted((p for c, p in snapshot.subclass_edges if c == cls),
                              key=order_key))
        subs = tuple(sorted((c for c, p in snapshot.subclass_edges if p == cls),
                            key=order_key))
        props = tuple(sorted((p for p, domains in snapshot.domain_of.items() if cls in domains),
                             key=order_key))
        members = tuple(sorted((i for i, c in snapshot.type_assertions
                                if c == cls and i in snapshot.individuals), key=order_key))
        bundle.class_sections.append(ClassSection(
            iri=cls, label=_display(snapshot, cls), comment=snapshot.comment(cls),
            superclasses=supers, subclasses=subs, domain_properties=props,
            individuals=members))

    for prop in sorted(snapshot.properties, key=order_key):
        bundle.property_sections.append(PropertySection(
            iri=prop, label=_display(snapshot, prop), comment=snapshot.comment(prop),
            kind="object" if prop in snapshot.object_properties else "data",
            domains=tuple(sorted(snapshot.domain_of.get(prop, ()), key=order_key)),
            ranges=tuple(sorted(snapshot.range_of.get(prop, ()), key=order_key))))

    bundle.glossary = [(term, interp) for term, interp in glossary]
    bundle.toc = (["Class hierarchy"]
                  + [s.label for s in bundle.class_sections]
                  + [s.label for s in bundle.property_sections]
                  + (["Glossary"] if bundle.glossary else []))
    return bundle


def _hierarchy_outline(snapshot: OntologySnapshot) -> list[str]:
    children: dict[str, list[str]] = {}
    has_parent = set()
    order_key = lambda iri: (_display(snapshot, iri).casefold(), iri)
    for child, parent in snapshot.subclass_edges:
        children.setdefault(parent, []).append(child)
        has_parent.add(child)
    roots = sorted((c for c in snapshot.classes if c not in has_parent), key=order_key)
    lines: list[str] = []

    def walk(cls: str, depth: int, trail: frozenset[str]):
        lines.append("  " * depth + f"- {_display(snapshot, cls)}")
        if cls in trail:  # cycle guard; cycles are reported by the testkit
            return
        for sub in sorted(children.get(cls, ()), key=order_key):
            walk(sub, depth + 1, trail | {cls})

    for root in roots:
        walk(root, 0, frozenset())
    return lines


NO_DESCRIPTION = "(no description)"


def emit_markdown_docs(snapshot: OntologySnapshot, glossary=(), title: str = "Ontology documentation") -> str:
    """Deterministic Markdown rendering of the full structure."""
    bundle = build_doc_bundle(snapshot, glossary)
    lines = [f"# {title}", ""]
    lines.append("## Table of contents")
    lines.append("")
    for item in bundle.toc:
        lines.append(f"- {item}")
    lines.append("")

    lines.append("## Class hierarchy")
    lines.append("")
    outline = _hierarchy_outline(snapshot)
    lines.extend(outline if outline else ["(no classes)"])
    lines.append("")

    lines.append("## Classes")
    lines.append("")
    if not bundle.class_sections:
        lines.append("(no classes)")
        lines.append("")
    for section in bundle.class_sections:
        lines.append(f"### {section.label}")
        lines.append("")
        lines.append(f"IRI: `{section.iri}`")
        lines.append("")
        lines.append(section.comment or NO_DESCRIPTION)
        lines.append("")
        if section.superclasses:
            lines.append("Superclasses: " + ", ".join(_display(snapshot, s) for s in section.superclasses))
        if section.subclasses:
            lines.append("Subclasses: " + ", ".join(_display(snapshot, s) for s in section.subclasses))
        if section.domain_properties:
            lines.append("Properties with this domain: "
                         + ", ".join(_display(snapshot, p) for p in section.domain_properties))
        if section.individuals:
            lines.append("Individuals: " + ", ".join(_display(snapshot, i) for i in section.individuals))
        if section.superclasses or section.subclasses or section.domain_properties or section.individuals:
            lines.append("")

    lines.append("## Properties")
    lines.append("")
    if not bundle.property_sections:
        lines.append("(no properties)")
        lines.append("")
    for section in bundle.property_sections:
        lines.append(f"### {section.label}")
        lines.append("")
        lines.append(f"IRI: `{section.iri}` ({section.kind} property)")
        lines.append("")
        lines.append(section.comment or NO_DESCRIPTION)
        lines.append("")
        if section.domains:
            lines.append("Domain: " + ", ".join(_display(snapshot, d) for d in section.domains))
        if section.ranges:
            lines.append("Range: " + ", ".join(_display(snapshot, r) for r in section.ranges))
        if section.domains or section.ranges:
            lines.append("")

    if bundle.glossary:
        lines.append("## Glossary")
        lines.append("")
        for term, interpretation in bundle.glossary:
            lines.append(f"- **{term}**: {interpretation}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
