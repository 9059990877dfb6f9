import { describe, expect, it } from "vitest";
import { labelColumn, splitCsvLine } from "../src/csv";

describe("splitCsvLine", () => {
  it("splits plain rows", () => {
    expect(splitCsvLine("1,2.5,0")).toEqual(["1", "2.5", "0"]);
    expect(splitCsvLine("a,,c")).toEqual(["a", "", "c"]);
  });

  it("respects quoted cells with commas and escaped quotes", () => {
    expect(splitCsvLine('"a,b",c')).toEqual(["a,b", "c"]);
    expect(splitCsvLine('"say ""hi""",1')).toEqual(['say "hi"', "1"]);
  });
});

describe("labelColumn", () => {
  const csv = "timestamp,value,label\n0,1.0,0\n1,5.0,1\n2,1.1,1\n3,0.9,0\n";

  it("reads the label column, skipping the header", () => {
    expect(labelColumn(csv, 2)).toEqual([0, 1, 1, 0]);
  });

  it("treats anything but 1 as normal", () => {
    expect(labelColumn("h1,h2\nx,yes\ny, 1\nz,2\n", 1)).toEqual([0, 1, 0]);
  });

  it("copes with CRLF files and missing cells", () => {
    expect(labelColumn("a,b\r\n0,1\r\n1,0\r\n", 1)).toEqual([1, 0]);
    expect(labelColumn("a,b\n0\n", 5)).toEqual([0]);
  });
});
