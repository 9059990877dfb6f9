// Python-compatible JSON rendering. Pipeline files are canonical: keys
// sorted, two-space indent, trailing newline, and numbers printed the way
// python's json module prints them. Reproducing that here is what makes a
// UI-exported file byte-identical to one the backend would write.
//
// The one thing JSON.stringify cannot do is distinguish 1 from 1.0, so
// values are first wrapped into a small tagged tree (JVal) where every
// number knows whether it is an int or a float.

export type JVal =
  | { t: "str"; v: string }
  | { t: "int"; v: number }
  | { t: "float"; v: number }
  | { t: "bool"; v: boolean }
  | { t: "null" }
  | { t: "arr"; v: JVal[] }
  | { t: "obj"; v: Record<string, JVal> };

export const jstr = (v: string): JVal => ({ t: "str", v });
export const jint = (v: number): JVal => ({ t: "int", v });
export const jfloat = (v: number): JVal => ({ t: "float", v });
export const jbool = (v: boolean): JVal => ({ t: "bool", v });
export const jarr = (v: JVal[]): JVal => ({ t: "arr", v });
export const jobj = (v: Record<string, JVal>): JVal => ({ t: "obj", v });

// python repr() of a float: shortest round-trip digits, ".0" kept on
// integral values, exponent notation outside [1e-4, 1e16) with a sign and
// at least two exponent digits.
export function pyFloatRepr(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`not JSON-serializable: ${v}`);
  if (v === 0) return Object.is(v, -0) ? "-0.0" : "0.0";
  const exp = Number(v.toExponential().split("e")[1]);
  if (exp >= 16 || exp < -4) {
    const [mantissa, rawExp] = v.toExponential().split("e") as [string, string];
    const sign = rawExp.startsWith("-") ? "-" : "+";
    const digits = rawExp.replace(/^[+-]/, "").padStart(2, "0");
    return `${mantissa}e${sign}${digits}`;
  }
  if (Number.isInteger(v)) return `${v.toFixed(1)}`;
  return String(v);
}

export function pyIntRepr(v: number): string {
  if (!Number.isSafeInteger(v)) throw new Error(`not an int: ${v}`);
  return String(v);
}

// python json.dumps escapes with ensure_ascii=True: control characters and
// everything past 0x7e become \uXXXX (astral chars as surrogate pairs,
// which is how JS strings store them anyway).
export function pyStringRepr(s: string): string {
  let out = '"';
  for (const unit of s) {
    for (let i = 0; i < unit.length; i++) {
      const code = unit.charCodeAt(i);
      const ch = unit[i]!;
      if (ch === '"') out += '\\"';
      else if (ch === "\\") out += "\\\\";
      else if (ch === "\n") out += "\\n";
      else if (ch === "\r") out += "\\r";
      else if (ch === "\t") out += "\\t";
      else if (ch === "\b") out += "\\b";
      else if (ch === "\f") out += "\\f";
      else if (code < 0x20 || code > 0x7e)
        out += "\\u" + code.toString(16).padStart(4, "0");
      else out += ch;
    }
  }
  return out + '"';
}

type JLeaf = Exclude<JVal, { t: "arr" } | { t: "obj" }>;

function renderLeaf(val: JLeaf): string {
  switch (val.t) {
    case "str": return pyStringRepr(val.v);
    case "int": return pyIntRepr(val.v);
    case "float": return pyFloatRepr(val.v);
    case "bool": return val.v ? "true" : "false";
    case "null": return "null";
  }
}

// json.dumps(x, sort_keys=True, indent=2)
export function dumpsPretty(val: JVal, indent = 0): string {
  const pad = " ".repeat(indent + 2);
  const close = " ".repeat(indent);
  if (val.t === "arr") {
    if (val.v.length === 0) return "[]";
    const items = val.v.map((item) => pad + dumpsPretty(item, indent + 2));
    return "[\n" + items.join(",\n") + "\n" + close + "]";
  }
  if (val.t === "obj") {
    const keys = Object.keys(val.v).sort();
    if (keys.length === 0) return "{}";
    const items = keys.map(
      (k) => pad + pyStringRepr(k) + ": " + dumpsPretty(val.v[k]!, indent + 2),
    );
    return "{\n" + items.join(",\n") + "\n" + close + "}";
  }
  return renderLeaf(val);
}

// json.dumps(x, sort_keys=True, separators=(",", ":")) -- the form hashed
// into the pipeline id.
export function dumpsCompact(val: JVal): string {
  if (val.t === "arr") return "[" + val.v.map(dumpsCompact).join(",") + "]";
  if (val.t === "obj") {
    const keys = Object.keys(val.v).sort();
    return "{" + keys.map((k) => pyStringRepr(k) + ":" + dumpsCompact(val.v[k]!)).join(",") + "}";
  }
  return renderLeaf(val);
}
