import pytest

from ontoforge import vocab
from ontoforge.fixtures import fixture_graph
from ontoforge.metrics import (
    BaseMetrics, compute_base_metrics, compute_schema_metrics,
    detect_dl_expressivity, metrics_report,
)
from ontoforge.model import extract_snapshot
from ontoforge.rdf import Graph, Iri, Literal, Triple, parse_turtle

T4 = "table4-synth.ttl"


@pytest.fixture(scope="module")
def table4():
    g, _ = fixture_graph(T4)
    snap = extract_snapshot(g)
    return g, snap


def test_base_metrics_empty():
    base = compute_base_metrics(extract_snapshot(Graph()))
    assert base == BaseMetrics(0, 0, 0, 0, 0, 0, 0, 0, 0)


def test_base_metrics_published_counts(table4):
    _, snap = table4
    base = compute_base_metrics(snap)
    assert base.class_count == 42
    assert base.object_property_count == 31
    assert base.data_property_count == 16
    assert base.properties_count == 47
    assert base.individual_count == 159
    assert base.subclassof_count == 11
    assert base.domain_axiom_count == 30
    assert base.range_axiom_count == 30


def test_base_metrics_toy():
    g, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "ex:A a owl:Class . ex:B a owl:Class . ex:A rdfs:subClassOf ex:B .")
    base = compute_base_metrics(extract_snapshot(g))
    assert base.class_count == 2 and base.subclassof_count == 1


def test_schema_metrics_published_values(table4):
    _, snap = table4
    schema = compute_schema_metrics(compute_base_metrics(snap))
    assert schema.attribute_richness == pytest.approx(0.380952, abs=1e-6)
    assert schema.inheritance_richness == pytest.approx(0.261905, abs=1e-6)
    assert schema.relationship_richness == pytest.approx(0.738095, abs=1e-6)
    assert schema.class_relation_ratio == pytest.approx(1.0, abs=1e-6)
    assert not schema.degenerate


def test_schema_metrics_zero_denominators_flagged():
    schema = compute_schema_metrics(BaseMetrics(0, 0, 0, 0, 0, 0, 0, 0, 0))
    assert schema.attribute_richness == 0.0
    assert schema.relationship_richness == 0.0
    assert schema.degenerate


def test_schema_metrics_internal_consistency(table4):
    _, snap = table4
    base = compute_base_metrics(snap)
    s = compute_schema_metrics(base)
    assert s.attribute_richness * base.class_count == pytest.approx(base.data_property_count, abs=1e-6)
    assert s.inheritance_richness * base.class_count == pytest.approx(base.subclassof_count, abs=1e-6)
    assert (s.relationship_richness * (base.subclassof_count + base.object_property_count)
            == pytest.approx(base.object_property_count, abs=1e-6))


def test_rr_bounded():
    for h, p in [(0, 0), (5, 0), (0, 5), (3, 7)]:
        schema = compute_schema_metrics(BaseMetrics(1, p, 0, p, 0, h, 0, 0, 0))
        assert 0.0 <= schema.relationship_richness <= 1.0


def test_scale_invariance_of_ar_ir(table4):
    _, snap = table4
    base = compute_base_metrics(snap)
    doubled = BaseMetrics(
        class_count=base.class_count * 2,
        object_property_count=base.object_property_count,
        data_property_count=base.data_property_count * 2,
        properties_count=base.properties_count,
        individual_count=base.individual_count,
        subclassof_count=base.subclassof_count * 2,
        domain_axiom_count=base.domain_axiom_count,
        range_axiom_count=base.range_axiom_count,
        axiom_total=base.axiom_total,
    )
    s1, s2 = compute_schema_metrics(base), compute_schema_metrics(doubled)
    assert s1.attribute_richness == pytest.approx(s2.attribute_richness)
    assert s1.inheritance_richness == pytest.approx(s2.inheritance_richness)


def test_dl_expressivity_baseline_and_letters():
    g, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "ex:A a owl:Class . ex:B a owl:Class . ex:A rdfs:subClassOf ex:B .")
    snap = extract_snapshot(g)
    assert detect_dl_expressivity(g, snap).render() == "AL"


def test_dl_expressivity_ucpo_mini_and_monotonicity():
    g, _ = fixture_graph("ucpo-mini.ttl")
    snap = extract_snapshot(g)
    expr = detect_dl_expressivity(g, snap)
    assert expr.render() == "ALH(D)"
    g2 = g.copy()
    g2.add(Triple(Iri("http://e/p"), Iri(vocab.OWL_INVERSE_OF), Iri("http://e/q")))
    expr2 = detect_dl_expressivity(g2, extract_snapshot(g2))
    assert expr2.render() == "ALHI(D)"
    assert expr.features <= expr2.features  # adding triples never removes letters


def test_dl_expressivity_full_feature_detection():
    g, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "ex:p a owl:FunctionalProperty . ex:A owl:complementOf ex:B .\n"
        "ex:C owl:oneOf ex:x . ex:r owl:cardinality 1 .")
    snap = extract_snapshot(g)
    rendered = detect_dl_expressivity(g, snap).render()
    assert rendered == "ALCFNO(D)"  # (D) from the typed cardinality literal


def test_unrecognized_constructs_listed_not_guessed():
    g, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "ex:A owl:disjointWith ex:B .")
    expr = detect_dl_expressivity(g, extract_snapshot(g))
    assert vocab.OWL_NS + "disjointWith" in expr.unrecognized
    assert expr.render() == "AL"


def test_report_six_decimals_and_table_values(table4):
    g, snap = table4
    text = metrics_report(g, snap).to_text()
    assert "Attribute richness (AR)  0.380952" in text
    assert "Inheritance richness (IR)  0.261905" in text
    assert "Relationship richness (RR)  0.738095" in text
    assert "Class/relation ratio  1.000000" in text
    assert "Properties count  47" in text


def test_report_degenerate_flag_line():
    report = metrics_report(Graph(), extract_snapshot(Graph()))
    assert "Degenerate" in report.to_text()
    assert report.to_dict()["schema"]["degenerate"] is True


def test_report_toy_hand_computation():
    # 3 classes, 2 subclass edges, 1 object property, 2 data properties:
    # AR = 2/3, IR = 2/3, RR = 1/(2+1)
    g, _ = parse_turtle(
        "@prefix ex: <http://e/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "ex:A a owl:Class . ex:B a owl:Class . ex:C a owl:Class .\n"
        "ex:B rdfs:subClassOf ex:A . ex:C rdfs:subClassOf ex:A .\n"
        "ex:op a owl:ObjectProperty . ex:d1 a owl:DatatypeProperty . ex:d2 a owl:DatatypeProperty .")
    report = metrics_report(g, extract_snapshot(g))
    assert report.to_dict()["schema"]["attribute_richness"] == "0.666667"
    assert report.to_dict()["schema"]["inheritance_richness"] == "0.666667"
    assert report.to_dict()["schema"]["relationship_richness"] == "0.333333"
