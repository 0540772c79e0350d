"""Ontology quality metrics: base counts, schema richness ratios, DL expressivity."""

from __future__ import annotations

from dataclasses import dataclass

from . import vocab
from .model import OntologySnapshot
from .rdf import Graph, Iri, Literal

SIX_DP = "{:.6f}"

# recognized OWL constructs; anything else from the owl: namespace found in a
# graph is reported in DlExpressivity.unrecognized instead of guessed at
_KNOWN_OWL = {
    vocab.OWL_CLASS, vocab.OWL_OBJECT_PROPERTY, vocab.OWL_DATATYPE_PROPERTY,
    vocab.OWL_FUNCTIONAL_PROPERTY, vocab.OWL_THING, vocab.OWL_NOTHING,
    vocab.OWL_INVERSE_OF, vocab.OWL_COMPLEMENT_OF, vocab.OWL_UNION_OF,
    vocab.OWL_ONE_OF, vocab.OWL_CARDINALITY, vocab.OWL_MIN_CARDINALITY,
    vocab.OWL_MAX_CARDINALITY,
}


@dataclass(frozen=True)
class BaseMetrics:
    class_count: int
    object_property_count: int
    data_property_count: int
    properties_count: int
    individual_count: int
    subclassof_count: int
    domain_axiom_count: int
    range_axiom_count: int
    axiom_total: int


@dataclass(frozen=True)
class SchemaMetrics:
    attribute_richness: float
    inheritance_richness: float
    relationship_richness: float
    axiom_class_ratio: float
    class_relation_ratio: float
    degenerate: bool


@dataclass(frozen=True)
class DlExpressivity:
    features: frozenset[str]
    unrecognized: tuple[str, ...] = ()

    def render(self) -> str:
        # fixed letter order: AL core, then C H I F N O, with (D) trailing
        out = "AL"
        for letter in ("C", "H", "I", "F", "N", "O"):
            if letter in self.features:
                out += letter
        if "D" in self.features:
            out += "(D)"
        return out


def compute_base_metrics(snapshot: OntologySnapshot) -> BaseMetrics:
    """Counts per the snapshot sets; domain/range axioms counted on object properties only."""
    domain_axioms = sum(len(v) for k, v in snapshot.domain_of.items() if k in snapshot.object_properties)
    range_axioms = sum(len(v) for k, v in snapshot.range_of.items() if k in snapshot.object_properties)
    return BaseMetrics(
        class_count=len(snapshot.classes),
        object_property_count=len(snapshot.object_properties),
        data_property_count=len(snapshot.data_properties),
        properties_count=len(snapshot.object_properties) + len(snapshot.data_properties),
        individual_count=len(snapshot.individuals),
        subclassof_count=len(snapshot.subclass_edges),
        domain_axiom_count=domain_axioms,
        range_axiom_count=range_axioms,
        axiom_total=snapshot.axiom_total,
    )


def compute_schema_metrics(base: BaseMetrics) -> SchemaMetrics:
    """Richness ratios; zero denominators yield 0 and set the degenerate flag."""
    c = base.class_count
    h = base.subclassof_count
    p = base.object_property_count
    na = base.data_property_count
    degenerate = False

    def ratio(num: float, den: float) -> float:
        nonlocal degenerate
        if den == 0:
            degenerate = True
            return 0.0
        return num / den

    return SchemaMetrics(
        attribute_richness=ratio(na, c),
        inheritance_richness=ratio(h, c),
        relationship_richness=ratio(p, h + p),
        axiom_class_ratio=ratio(base.axiom_total, c),
        class_relation_ratio=ratio(c, h + p),
        degenerate=degenerate,
    )


def detect_dl_expressivity(graph: Graph, snapshot: OntologySnapshot) -> DlExpressivity:
    features = {"AL"}
    preds = {t.p.value for t in graph}
    type_objects = {t.o.value for t in graph.match(p=Iri(vocab.RDF_TYPE)) if isinstance(t.o, Iri)}

    if vocab.RDFS_SUBPROPERTYOF in preds:
        features.add("H")
    if vocab.OWL_INVERSE_OF in preds:
        features.add("I")
    if vocab.OWL_FUNCTIONAL_PROPERTY in type_objects:
        features.add("F")
    if preds & {vocab.OWL_CARDINALITY, vocab.OWL_MIN_CARDINALITY, vocab.OWL_MAX_CARDINALITY}:
        features.add("N")
    if preds & {vocab.OWL_COMPLEMENT_OF, vocab.OWL_UNION_OF}:
        features.add("C")
    if vocab.OWL_ONE_OF in preds:
        features.add("O")
    has_typed_literal = any(
        isinstance(t.o, Literal) and t.o.datatype is not None for t in graph
    )
    if snapshot.data_properties or has_typed_literal:
        features.add("D")

    unrecognized = sorted(
        iri for iri in (preds | type_objects)
        if iri.startswith(vocab.OWL_NS) and iri not in _KNOWN_OWL
    )
    return DlExpressivity(features=frozenset(features), unrecognized=tuple(unrecognized))


@dataclass(frozen=True)
class MetricsReport:
    base: BaseMetrics
    schema: SchemaMetrics
    expressivity: DlExpressivity

    def to_dict(self) -> dict:
        return {
            "base": {
                "class_count": self.base.class_count,
                "object_property_count": self.base.object_property_count,
                "data_property_count": self.base.data_property_count,
                "properties_count": self.base.properties_count,
                "individual_count": self.base.individual_count,
                "subclassof_count": self.base.subclassof_count,
                "domain_axiom_count": self.base.domain_axiom_count,
                "range_axiom_count": self.base.range_axiom_count,
                "axiom_total": self.base.axiom_total,
                "dl_expressivity": self.expressivity.render(),
            },
            "schema": {
                "attribute_richness": SIX_DP.format(self.schema.attribute_richness),
                "inheritance_richness": SIX_DP.format(self.schema.inheritance_richness),
                "relationship_richness": SIX_DP.format(self.schema.relationship_richness),
                "axiom_class_ratio": SIX_DP.format(self.schema.axiom_class_ratio),
                "class_relation_ratio": SIX_DP.format(self.schema.class_relation_ratio),
                "degenerate": self.schema.degenerate,
            },
            "unrecognized_constructs": list(self.expressivity.unrecognized),
        }

    def to_text(self) -> str:
        b, s = self.base, self.schema
        lines = [
            "Base Metrics",
            f"Class count  {b.class_count}",
            f"Object property count  {b.object_property_count}",
            f"Data property count  {b.data_property_count}",
            f"Properties count  {b.properties_count}",
            f"Individual count  {b.individual_count}",
            f"SubClassOf axioms count  {b.subclassof_count}",
            f"Object property domain axioms count  {b.domain_axiom_count}",
            f"Object property range axioms count  {b.range_axiom_count}",
            f"Axiom count (documented rule)  {b.axiom_total}",
            f"DL expressivity  {self.expressivity.render()}",
            "Schema Metrics",
            f"Attribute richness (AR)  {SIX_DP.format(s.attribute_richness)}",
            f"Inheritance richness (IR)  {SIX_DP.format(s.inheritance_richness)}",
            f"Relationship richness (RR)  {SIX_DP.format(s.relationship_richness)}",
            f"Axiom/class ratio  {SIX_DP.format(s.axiom_class_ratio)}",
            f"Class/relation ratio  {SIX_DP.format(s.class_relation_ratio)}",
        ]
        if s.degenerate:
            lines.append("Degenerate: one or more denominators were zero")
        if self.expressivity.unrecognized:
            lines.append("Unrecognized constructs: " + ", ".join(self.expressivity.unrecognized))
        return "\n".join(lines) + "\n"


def metrics_report(graph: Graph, snapshot: OntologySnapshot) -> MetricsReport:
    base = compute_base_metrics(snapshot)
    return MetricsReport(
        base=base,
        schema=compute_schema_metrics(base),
        expressivity=detect_dl_expressivity(graph, snapshot),
    )
