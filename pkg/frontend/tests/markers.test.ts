import { describe, expect, it } from "vitest";

import {
  countMarkers,
  findMarkers,
  hasMarker,
  stripCommentsAndStrings,
} from "../src/markers.js";

describe("stripCommentsAndStrings", () => {
  it("preserves length and newlines", () => {
    const src = 'theorem t : True := by\n  -- a note\n  exact "x"\n';
    const out = stripCommentsAndStrings(src);
    expect(out.length).toBe(src.length);
    const newlines = (s: string) => [...s].filter((c) => c === "\n").length;
    expect(newlines(out)).toBe(newlines(src));
  });

  it("blanks a line comment to end of line only", () => {
    const out = stripCommentsAndStrings("exact h -- sorry here\nsorry");
    expect(out).toBe("exact h " + " ".repeat(13) + "\nsorry");
  });

  it("blanks nested block comments entirely", () => {
    const src = "/- outer /- inner sorry -/ admit -/ exact h";
    const out = stripCommentsAndStrings(src);
    expect(out).toBe(" ".repeat(35) + " exact h");
  });

  it("blanks string contents and honors escapes", () => {
    const src = 'have s := "\\" sorry" ; admit';
    const out = stripCommentsAndStrings(src);
    expect(out).toContain("admit");
    expect(out).not.toContain("sorry");
  });

  it("an unterminated block comment blanks the rest", () => {
    const out = stripCommentsAndStrings("exact h /- open\nsorry admit");
    expect(out.startsWith("exact h ")).toBe(true);
    expect(out).not.toContain("sorry");
    expect(out).toContain("\n");
  });
});

describe("findMarkers", () => {
  it("reports offset, line, and column for a plain marker", () => {
    const src = "theorem a : True := by\n  sorry\n";
    const hits = findMarkers(src);
    expect(hits.length).toBe(1);
    expect(hits[0].token).toBe("sorry");
    expect(hits[0].line).toBe(1);
    expect(hits[0].col).toBe(2);
    expect(src.slice(hits[0].offset, hits[0].offset + 5)).toBe("sorry");
  });

  it("finds admit as well", () => {
    const hits = findMarkers("theorem b : True := by admit");
    expect(hits.map((h) => h.token)).toEqual(["admit"]);
  });

  it("ignores markers inside comments", () => {
    expect(hasMarker("-- sorry")).toBe(false);
    expect(hasMarker("/- sorry -/ exact h")).toBe(false);
    expect(hasMarker("/- a /- sorry -/ admit -/ rfl")).toBe(false);
  });

  it("ignores markers inside string literals", () => {
    expect(hasMarker('example := "sorry"')).toBe(false);
    expect(countMarkers('example := "\\" sorry" ; admit')).toBe(1);
  });

  it("matches whole identifiers only", () => {
    expect(hasMarker("exact sorry'")).toBe(false);
    expect(hasMarker("exact mysorry")).toBe(false);
    expect(hasMarker("exact sorry2")).toBe(false);
    expect(hasMarker("exact αsorry")).toBe(false);
    expect(hasMarker("(sorry)")).toBe(true);
  });

  it("handles markers at the very start and end", () => {
    const hits = findMarkers("sorry");
    expect(hits.length).toBe(1);
    expect(hits[0].offset).toBe(0);
    expect(hits[0].line).toBe(0);
    expect(hits[0].col).toBe(0);
    expect(countMarkers("by admit")).toBe(1);
  });

  it("counts one hit per occurrence in order", () => {
    const src = "sorry\nexact h -- admit\nadmit\n/- sorry -/ sorry\n";
    const hits = findMarkers(src);
    expect(hits.map((h) => [h.token, h.line])).toEqual([
      ["sorry", 0],
      ["admit", 2],
      ["sorry", 3],
    ]);
  });
});
