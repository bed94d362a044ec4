/** Lexical scan for incomplete-proof markers, mirrored from the backend.
 *
 * The file pane highlights `sorry` and `admit` tokens, and those
 * highlights must sit exactly where the backend's scan reports them, so
 * this module replicates the same state machine: blank out comments and
 * strings without moving any offset, then match whole identifiers only.
 */

const IDENT_CHAR = /[\p{L}\p{N}_']/u;

export function isIdentChar(ch: string): boolean {
  return IDENT_CHAR.test(ch);
}

/** Replace comment and string content with spaces, preserving length.
 *
 * Line comments run from `--` to end of line, block comments nest,
 * strings honor backslash escapes. Anything left unterminated blanks
 * the rest of the text, which can only hide markers, never invent them.
 */
export function stripCommentsAndStrings(source: string): string {
  const out = source.split("");
  const blank = (j: number) => {
    if (j < out.length && out[j] !== "\n") out[j] = " ";
  };
  let i = 0;
  const n = source.length;
  let mode: "code" | "line" | "block" | "string" = "code";
  let depth = 0;
  while (i < n) {
    const ch = source[i];
    const two = source.slice(i, i + 2);
    if (mode === "code") {
      if (two === "/-") {
        mode = "block";
        depth = 1;
        blank(i);
        blank(i + 1);
        i += 2;
      } else if (two === "--") {
        mode = "line";
        blank(i);
        blank(i + 1);
        i += 2;
      } else if (ch === '"') {
        mode = "string";
        blank(i);
        i += 1;
      } else {
        i += 1;
      }
    } else if (mode === "line") {
      if (ch === "\n") mode = "code";
      else blank(i);
      i += 1;
    } else if (mode === "block") {
      if (two === "/-") {
        depth += 1;
        blank(i);
        blank(i + 1);
        i += 2;
      } else if (two === "-/") {
        depth -= 1;
        blank(i);
        blank(i + 1);
        i += 2;
        if (depth === 0) mode = "code";
      } else {
        blank(i);
        i += 1;
      }
    } else {
      if (two === '\\"' || two === "\\\\") {
        blank(i);
        blank(i + 1);
        i += 2;
      } else if (ch === '"') {
        blank(i);
        mode = "code";
        i += 1;
      } else {
        blank(i);
        i += 1;
      }
    }
  }
  return out.join("");
}

export interface MarkerHit {
  token: string;
  offset: number;
  /** zero-based */
  line: number;
  /** zero-based */
  col: number;
}

export function findMarkers(source: string): MarkerHit[] {
  const stripped = stripCommentsAndStrings(source);
  const starts = [0];
  for (let i = 0; i < stripped.length; i++) {
    if (stripped[i] === "\n") starts.push(i + 1);
  }
  const hits: MarkerHit[] = [];
  const re = /sorry|admit/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(stripped)) !== null) {
    const before = m.index > 0 ? stripped[m.index - 1] : "";
    const after = m.index + m[0].length < stripped.length ? stripped[m.index + m[0].length] : "";
    if (before !== "" && isIdentChar(before)) continue;
    if (after !== "" && isIdentChar(after)) continue;
    let line = 0;
    while (line + 1 < starts.length && starts[line + 1] <= m.index) line += 1;
    hits.push({
      token: m[0],
      offset: m.index,
      line,
      col: m.index - starts[line],
    });
  }
  return hits;
}

export function countMarkers(source: string): number {
  return findMarkers(source).length;
}

export function hasMarker(source: string): boolean {
  return findMarkers(source).length > 0;
}
