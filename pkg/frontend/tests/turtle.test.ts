import { describe, expect, it } from "vitest";
import { TurtleParseError, parseTurtle } from "../src/turtle.js";

describe("turtle reader", () => {
  it("parses a single statement with prefixes", () => {
    const { triples, prefixes } = parseTurtle(
      "@prefix ex: <http://e/> .\nex:a ex:b ex:c .");
    expect(prefixes.get("ex")).toBe("http://e/");
    expect(triples).toHaveLength(1);
    expect(triples[0].s).toEqual({ kind: "iri", value: "http://e/a" });
  });

  it("handles a, semicolon and comma lists", () => {
    const { triples } = parseTurtle(
      "@prefix ex: <http://e/> .\nex:s a ex:K ; ex:p ex:o1 , ex:o2 .");
    expect(triples).toHaveLength(3);
    expect(triples[0].p.value).toContain("rdf-syntax-ns#type");
    expect(triples.filter((t) => t.p.value === "http://e/p")).toHaveLength(2);
  });

  it("parses literals with datatypes, languages and escapes", () => {
    const { triples } = parseTurtle(
      '@prefix ex: <http://e/> .\n' +
      'ex:s ex:p "v\\n" , "w"@fr , 7 , 2.5 , true , "x"^^ex:t .');
    const objects = triples.map((t) => t.o);
    expect(objects).toContainEqual({ kind: "literal", value: "v\n" });
    expect(objects).toContainEqual({ kind: "literal", value: "w", lang: "fr" });
    expect(objects).toContainEqual({
      kind: "literal", value: "7",
      datatype: "http://www.w3.org/2001/XMLSchema#integer",
    });
    expect(objects).toContainEqual({ kind: "literal", value: "x", datatype: "http://e/t" });
  });

  it("reports undeclared prefixes with a line number", () => {
    expect(() => parseTurtle("ex:a ex:b ex:c ."))
      .toThrowError(TurtleParseError);
    try {
      parseTurtle("\n\nex:a ex:b ex:c .");
    } catch (error) {
      expect((error as TurtleParseError).line).toBe(3);
    }
  });

  it("rejects truncated statements instead of guessing", () => {
    expect(() => parseTurtle("@prefix ex: <http://e/> . ex:a ex:b"))
      .toThrowError(TurtleParseError);
  });

  it("round-trips the shapes the backend serializer emits", () => {
    const text = [
      "@prefix ucpo: <http://vivocaz.fr/ucpo/ns#> .",
      "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
      "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
      "",
      'ucpo:Budget a owl:Class ;',
      '    rdfs:label "Budget"@en ;',
      "    rdfs:subClassOf ucpo:Preference .",
    ].join("\n");
    const { triples } = parseTurtle(text);
    expect(triples).toHaveLength(3);
  });
});
