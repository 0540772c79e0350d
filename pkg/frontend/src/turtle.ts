// Minimal reader for the same Turtle subset the backend emits: prefixes, `a`,
// `;`/`,` lists, IRIs, qnames, blank labels, quoted strings with escapes,
// datatype/language suffixes, bare numerics and booleans. Display only: the
// class tree and labels come from here, nothing is ever written back.

export interface TurtleTerm {
  kind: "iri" | "blank" | "literal";
  value: string;
  datatype?: string;
  lang?: string;
}

export interface TurtleTriple {
  s: TurtleTerm;
  p: TurtleTerm;
  o: TurtleTerm;
}

export class TurtleParseError extends Error {
  constructor(message: string, public line: number) {
    super(`line ${line}: ${message}`);
  }
}

const RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

type Token =
  | { t: "iri"; v: string; line: number }
  | { t: "qname"; prefix: string; local: string; line: number }
  | { t: "blank"; v: string; line: number }
  | { t: "string"; v: string; line: number }
  | { t: "number"; v: string; line: number }
  | { t: "boolean"; v: string; line: number }
  | { t: "langtag"; v: string; line: number }
  | { t: "a" | "dot" | "semi" | "comma" | "dtype" | "prefixDecl"; line: number };

function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  let line = 1;
  const n = text.length;
  while (i < n) {
    const c = text[i];
    if (c === "\n") {
      line++;
      i++;
      continue;
    }
    if (c === " " || c === "\t" || c === "\r") {
      i++;
      continue;
    }
    if (c === "#") {
      while (i < n && text[i] !== "\n") i++;
      continue;
    }
    if (c === "<") {
      const end = text.indexOf(">", i + 1);
      if (end === -1) throw new TurtleParseError("unterminated IRI", line);
      tokens.push({ t: "iri", v: text.slice(i + 1, end), line });
      i = end + 1;
      continue;
    }
    if (c === '"') {
      let j = i + 1;
      let out = "";
      for (;;) {
        if (j >= n || text[j] === "\n") throw new TurtleParseError("unterminated string", line);
        const ch = text[j];
        if (ch === '"') break;
        if (ch === "\\") {
          const esc = text[j + 1];
          const mapped: Record<string, string> = { '"': '"', "\\": "\\", n: "\n", t: "\t" };
          if (!(esc in mapped)) throw new TurtleParseError(`unsupported escape \\${esc}`, line);
          out += mapped[esc];
          j += 2;
        } else {
          out += ch;
          j++;
        }
      }
      tokens.push({ t: "string", v: out, line });
      i = j + 1;
      continue;
    }
    if (text.startsWith("^^", i)) {
      tokens.push({ t: "dtype", line });
      i += 2;
      continue;
    }
    if (c === "@") {
      const word = /^[A-Za-z][A-Za-z0-9-]*/.exec(text.slice(i + 1))?.[0] ?? "";
      if (word === "prefix") {
        tokens.push({ t: "prefixDecl", line });
        i += 7;
      } else if (word) {
        tokens.push({ t: "langtag", v: word, line });
        i += 1 + word.length;
      } else {
        throw new TurtleParseError("expected @prefix or language tag", line);
      }
      continue;
    }
    if (c === "." || c === ";" || c === ",") {
      tokens.push({ t: c === "." ? "dot" : c === ";" ? "semi" : "comma", line });
      i++;
      continue;
    }
    if (text.startsWith("_:", i)) {
      const m = /^[A-Za-z0-9][A-Za-z0-9_-]*/.exec(text.slice(i + 2));
      if (!m) throw new TurtleParseError("blank label expected", line);
      tokens.push({ t: "blank", v: m[0], line });
      i += 2 + m[0].length;
      continue;
    }
    const num = /^[+-]?(?:\d+\.\d+|\d+)/.exec(text.slice(i));
    if (num && (/\d/.test(c) || ((c === "+" || c === "-") && /\d/.test(text[i + 1] ?? "")))) {
      tokens.push({ t: "number", v: num[0], line });
      i += num[0].length;
      continue;
    }
    const qname = /^([A-Za-z][A-Za-z0-9_-]*)?:([A-Za-z_][A-Za-z0-9_-]*)?/.exec(text.slice(i));
    if (qname && text.slice(i, i + qname[0].length).includes(":")) {
      tokens.push({ t: "qname", prefix: qname[1] ?? "", local: qname[2] ?? "", line });
      i += qname[0].length;
      continue;
    }
    const word = /^[A-Za-z][A-Za-z0-9_-]*/.exec(text.slice(i));
    if (word) {
      if (word[0] === "a") tokens.push({ t: "a", line });
      else if (word[0] === "true" || word[0] === "false")
        tokens.push({ t: "boolean", v: word[0], line });
      else if (word[0].toUpperCase() === "PREFIX") tokens.push({ t: "prefixDecl", line });
      else throw new TurtleParseError(`unexpected token '${word[0]}'`, line);
      i += word[0].length;
      continue;
    }
    throw new TurtleParseError(`unexpected character '${c}'`, line);
  }
  return tokens;
}

const XSD = "http://www.w3.org/2001/XMLSchema#";

export function parseTurtle(text: string): { triples: TurtleTriple[]; prefixes: Map<string, string> } {
  const tokens = tokenize(text);
  const prefixes = new Map<string, string>();
  const triples: TurtleTriple[] = [];
  let i = 0;

  const peek = () => tokens[i];
  const take = () => tokens[i++];
  const expand = (prefix: string, local: string, line: number): string => {
    const ns = prefixes.get(prefix);
    if (ns === undefined) throw new TurtleParseError(`undeclared prefix '${prefix}'`, line);
    return ns + local;
  };

  const term = (position: "subject" | "predicate" | "object"): TurtleTerm => {
    const tok = take();
    if (!tok) throw new TurtleParseError(`expected a ${position}`, 0);
    if (tok.t === "iri") return { kind: "iri", value: tok.v };
    if (tok.t === "qname") return { kind: "iri", value: expand(tok.prefix, tok.local, tok.line) };
    if (tok.t === "blank") return { kind: "blank", value: tok.v };
    if (tok.t === "a" && position === "predicate") return { kind: "iri", value: RDF_TYPE };
    if (position === "object") {
      if (tok.t === "string") {
        const next = peek();
        if (next?.t === "dtype") {
          take();
          const dt = take();
          if (dt?.t === "iri") return { kind: "literal", value: tok.v, datatype: dt.v };
          if (dt?.t === "qname")
            return { kind: "literal", value: tok.v, datatype: expand(dt.prefix, dt.local, dt.line) };
          throw new TurtleParseError("expected datatype IRI", tok.line);
        }
        if (next?.t === "langtag") {
          take();
          return { kind: "literal", value: tok.v, lang: next.v };
        }
        return { kind: "literal", value: tok.v };
      }
      if (tok.t === "number")
        return {
          kind: "literal",
          value: tok.v,
          datatype: tok.v.includes(".") ? XSD + "decimal" : XSD + "integer",
        };
      if (tok.t === "boolean") return { kind: "literal", value: tok.v, datatype: XSD + "boolean" };
    }
    throw new TurtleParseError(`expected a ${position}`, tok.line);
  };

  while (i < tokens.length) {
    if (peek().t === "prefixDecl") {
      const declLine = take().line;
      const label = take();
      if (label?.t !== "qname" || label.local !== "")
        throw new TurtleParseError("expected prefix label", declLine);
      const ns = take();
      if (ns?.t !== "iri") throw new TurtleParseError("expected namespace IRI", declLine);
      prefixes.set(label.prefix, ns.v);
      if (peek()?.t === "dot") take();
      continue;
    }
    const subject = term("subject");
    for (;;) {
      const predicate = term("predicate");
      for (;;) {
        const object = term("object");
        triples.push({ s: subject, p: predicate, o: object });
        if (peek()?.t === "comma") {
          take();
          continue;
        }
        break;
      }
      const next = take();
      if (!next) throw new TurtleParseError("unexpected end of document", 0);
      if (next.t === "semi") {
        if (peek()?.t === "dot") {
          take();
          break;
        }
        continue;
      }
      if (next.t === "dot") break;
      throw new TurtleParseError("expected '.', ';' or ','", next.line);
    }
  }
  return { triples, prefixes };
}
