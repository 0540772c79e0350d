"""Typed TBox/ABox view extracted from a graph: entity sets, axiom edges, annotations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import vocab
from .rdf import Graph, Iri, Literal


class ConflictingDeclarationError(ValueError):
    def __init__(self, offenders: dict[str, list[str]]):
        listing = "; ".join(f"{iri} declared as {', '.join(kinds)}" for iri, kinds in sorted(offenders.items()))
        super().__init__(f"conflicting entity declarations: {listing}")
        self.offenders = offenders


class UnknownClassError(KeyError):
    pass


class EntityKind(Enum):
    CLASS = "Class"
    OBJECT_PROPERTY = "ObjectProperty"
    DATA_PROPERTY = "DataProperty"
    INDIVIDUAL = "Individual"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class OntologySnapshot:
    """Immutable extraction result; safe to share across readers."""

    classes: frozenset[str]
    object_properties: frozenset[str]
    data_properties: frozenset[str]
    individuals: frozenset[str]
    subclass_edges: frozenset[tuple[str, str]]
    subproperty_edges: frozenset[tuple[str, str]]
    domain_of: dict[str, frozenset[str]]
    range_of: dict[str, frozenset[str]]
    type_assertions: frozenset[tuple[str, str]]
    annotations: dict[str, dict[str, str | None]]
    axiom_total: int

    @property
    def properties(self) -> frozenset[str]:
        return self.object_properties | self.data_properties

    def label(self, iri: str) -> str | None:
        return self.annotations.get(iri, {}).get("label")

    def comment(self, iri: str) -> str | None:
        return self.annotations.get(iri, {}).get("comment")


def extract_snapshot(graph: Graph) -> OntologySnapshot:
    """Build the snapshot per the documented extraction rules.

    classes: IRIs typed owl:Class plus any IRI at either end of an
    rdfs:subClassOf edge, minus owl:Thing/owl:Nothing. Blank-node class
    expressions are skipped (their triples still count toward axiom_total).
    individuals: IRIs carrying an rdf:type to a member of classes that are not
    themselves declared schema entities; counted once regardless of how many
    type assertions they carry.
    """
    rdf_type = Iri(vocab.RDF_TYPE)
    declared_classes: set[str] = set()
    object_properties: set[str] = set()
    data_properties: set[str] = set()

    for t in graph.match(p=rdf_type):
        if not isinstance(t.s, Iri):
            continue
        if t.o == Iri(vocab.OWL_CLASS):
            declared_classes.add(t.s.value)
        elif t.o == Iri(vocab.OWL_OBJECT_PROPERTY):
            object_properties.add(t.s.value)
        elif t.o == Iri(vocab.OWL_DATATYPE_PROPERTY):
            data_properties.add(t.s.value)

    classes = set(declared_classes)
    subclass_pairs: set[tuple[str, str]] = set()
    for t in graph.match(p=Iri(vocab.RDFS_SUBCLASSOF)):
        if isinstance(t.s, Iri):
            classes.add(t.s.value)
        if isinstance(t.o, Iri):
            classes.add(t.o.value)
    classes -= {vocab.OWL_THING, vocab.OWL_NOTHING}

    offenders: dict[str, list[str]] = {}
    for iri in sorted((classes & object_properties) | (classes & data_properties)
                      | (object_properties & data_properties)):
        kinds = []
        if iri in classes:
            kinds.append("class")
        if iri in object_properties:
            kinds.append("object property")
        if iri in data_properties:
            kinds.append("data property")
        offenders[iri] = kinds
    if offenders:
        raise ConflictingDeclarationError(offenders)

    for t in graph.match(p=Iri(vocab.RDFS_SUBCLASSOF)):
        if isinstance(t.s, Iri) and isinstance(t.o, Iri) and t.s.value in classes and t.o.value in classes:
            subclass_pairs.add((t.s.value, t.o.value))

    subproperty_pairs = {
        (t.s.value, t.o.value)
        for t in graph.match(p=Iri(vocab.RDFS_SUBPROPERTYOF))
        if isinstance(t.s, Iri) and isinstance(t.o, Iri)
    }

    declared_props = object_properties | data_properties
    domain_of: dict[str, set[str]] = {}
    range_of: dict[str, set[str]] = {}
    for pred, store in ((vocab.RDFS_DOMAIN, domain_of), (vocab.RDFS_RANGE, range_of)):
        for t in graph.match(p=Iri(pred)):
            if isinstance(t.s, Iri) and isinstance(t.o, Iri) and t.s.value in declared_props:
                store.setdefault(t.s.value, set()).add(t.o.value)

    schema_entities = classes | declared_props
    type_assertions: set[tuple[str, str]] = set()
    individuals: set[str] = set()
    for t in graph.match(p=rdf_type):
        if isinstance(t.s, Iri) and isinstance(t.o, Iri) and t.o.value in classes:
            type_assertions.add((t.s.value, t.o.value))
            if t.s.value not in schema_entities:
                individuals.add(t.s.value)

    annotations: dict[str, dict[str, str | None]] = {}
    annotation_count = 0
    for pred, key in ((vocab.RDFS_LABEL, "label"), (vocab.RDFS_COMMENT, "comment")):
        for t in graph.match(p=Iri(pred)):
            if isinstance(t.s, Iri) and isinstance(t.o, Literal):
                annotations.setdefault(t.s.value, {"label": None, "comment": None})[key] = t.o.lexical
                annotation_count += 1

    # axiom enumeration (documented counting rule; the upstream rule behind the
    # published axiom/class ratio is not recoverable)
    declaration_count = sum(
        1 for t in graph.match(p=rdf_type)
        if isinstance(t.s, Iri) and t.o in (Iri(vocab.OWL_CLASS), Iri(vocab.OWL_OBJECT_PROPERTY),
                                            Iri(vocab.OWL_DATATYPE_PROPERTY))
    )
    subclass_triples = len(graph.match(p=Iri(vocab.RDFS_SUBCLASSOF)))
    subproperty_triples = len(graph.match(p=Iri(vocab.RDFS_SUBPROPERTYOF)))
    domain_triples = len(graph.match(p=Iri(vocab.RDFS_DOMAIN)))
    range_triples = len(graph.match(p=Iri(vocab.RDFS_RANGE)))
    assertion_count = sum(1 for t in graph if t.p.value in declared_props)
    axiom_total = (declaration_count + subclass_triples + subproperty_triples
                   + domain_triples + range_triples + len(type_assertions)
                   + assertion_count + annotation_count)

    return OntologySnapshot(
        classes=frozenset(classes),
        object_properties=frozenset(object_properties),
        data_properties=frozenset(data_properties),
        individuals=frozenset(individuals),
        subclass_edges=frozenset(subclass_pairs),
        subproperty_edges=frozenset(subproperty_pairs),
        domain_of={k: frozenset(v) for k, v in domain_of.items()},
        range_of={k: frozenset(v) for k, v in range_of.items()},
        type_assertions=frozenset(type_assertions),
        annotations=annotations,
        axiom_total=axiom_total,
    )


def classify(snapshot: OntologySnapshot, iri: str) -> EntityKind:
    if iri in snapshot.classes:
        return EntityKind.CLASS
    if iri in snapshot.object_properties:
        return EntityKind.OBJECT_PROPERTY
    if iri in snapshot.data_properties:
        return EntityKind.DATA_PROPERTY
    if iri in snapshot.individuals:
        return EntityKind.INDIVIDUAL
    return EntityKind.UNKNOWN


def subclass_closure(snapshot: OntologySnapshot, cls: str) -> frozenset[str]:
    """Reflexive-transitive superclass set; terminates on cyclic hierarchies."""
    if cls not in snapshot.classes:
        raise UnknownClassError(cls)
    parents: dict[str, set[str]] = {}
    for child, parent in snapshot.subclass_edges:
        parents.setdefault(child, set()).add(parent)
    seen = {cls}
    stack = [cls]
    while stack:
        current = stack.pop()
        for parent in parents.get(current, ()):
            if parent not in seen:
                seen.add(parent)
                stack.append(parent)
    return frozenset(seen)
