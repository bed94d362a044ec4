"""Lexical analysis of Lean source text.

Everything in this module works on raw text without elaborating it: comment
and string stripping, incomplete-proof marker scanning, theorem declaration
discovery, goal negation, and tactic-name extraction.  The scanners are
deliberately conservative; they understand exactly the token shapes they
need (line comments, nested block comments, double-quoted strings) and
nothing else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Tokens that leave a proof incomplete when they appear as code.
INCOMPLETE_MARKER_TOKENS = ("sorry", "admit")

# Bracket pairs that open a binder or term group.  A colon inside any of
# these is a binder/ascription colon, not the goal separator.
_OPEN_BRACKETS = {"(": ")", "[": "]", "{": "}", "⟨": "⟩", "⦃": "⦄"}
_CLOSE_BRACKETS = {v: k for k, v in _OPEN_BRACKETS.items()}

_DECL_RE = re.compile(
    r"(?m)^[ \t]*(?:@\[[^\]]*\]\s*)?"
    r"(?:(?:private|protected|noncomputable|scoped)\s+)*"
    r"(theorem|lemma)[ \t]+(\S+)"
)


class MalformedStatement(ValueError):
    """A theorem statement whose goal cannot be located lexically."""


def is_ident_char(ch: str) -> bool:
    """True when ``ch`` can be part of a Lean identifier.

    Letters and digits (including unicode subscripts), underscore, and the
    prime mark all extend an identifier, so ``sorry'`` is a distinct name
    rather than a ``sorry`` marker.
    """
    return ch.isalnum() or ch in "_'"


def strip_comments_and_strings(source: str) -> str:
    """Replace comment and string-literal content with spaces.

    The result has exactly the same length and line structure as the
    input, so every offset computed on it is valid in the original text.
    Line comments run from ``--`` to end of line; block comments nest;
    strings respect backslash escapes.  Unterminated comments or strings
    blank out the rest of the file, which is the safe direction for
    marker scanning.
    """
    out = list(source)
    i = 0
    n = len(source)
    mode = "code"
    depth = 0

    def blank(j: int) -> None:
        if out[j] != "\n":
            out[j] = " "

    while i < n:
        ch = source[i]
        two = source[i : i + 2]
        if mode == "code":
            if two == "/-":
                mode = "block"
                depth = 1
                blank(i)
                blank(i + 1)
                i += 2
            elif two == "--":
                mode = "line"
                blank(i)
                blank(i + 1)
                i += 2
            elif ch == '"':
                mode = "string"
                blank(i)
                i += 1
            else:
                i += 1
        elif mode == "line":
            if ch == "\n":
                mode = "code"
            else:
                blank(i)
            i += 1
        elif mode == "block":
            if two == "/-":
                depth += 1
                blank(i)
                blank(i + 1)
                i += 2
            elif two == "-/":
                depth -= 1
                blank(i)
                blank(i + 1)
                i += 2
                if depth == 0:
                    mode = "code"
            else:
                blank(i)
                i += 1
        else:  # string
            if two == '\\"' or two == "\\\\":
                blank(i)
                blank(i + 1)
                i += 2
            elif ch == '"':
                blank(i)
                mode = "code"
                i += 1
            else:
                blank(i)
                i += 1
    return "".join(out)


@dataclass(frozen=True)
class MarkerHit:
    """One incomplete-proof marker found in source text."""

    token: str
    offset: int
    line: int  # zero-based
    col: int  # zero-based


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts

def _offset_to_pos(starts: list[int], offset: int) -> tuple[int, int]:
    import bisect

    line = bisect.bisect_right(starts, offset) - 1
    return line, offset - starts[line]


def iter_incomplete_markers(source: str) -> list[MarkerHit]:
    """All ``sorry``/``admit`` tokens that count as code.

    Occurrences inside comments or string literals are ignored, as are
    occurrences embedded in longer identifiers (``sorry'``, ``admits``,
    ``my_sorry``).
    """
    stripped = strip_comments_and_strings(source)
    starts = _line_starts(stripped)
    hits: list[MarkerHit] = []
    for m in re.finditer(r"sorry|admit", stripped):
        before = stripped[m.start() - 1] if m.start() > 0 else ""
        after = stripped[m.end()] if m.end() < len(stripped) else ""
        if before and is_ident_char(before):
            continue
        if after and is_ident_char(after):
            continue
        line, col = _offset_to_pos(starts, m.start())
        hits.append(MarkerHit(m.group(0), m.start(), line, col))
    return hits


def contains_incomplete_marker(source: str) -> bool:
    """True when the text still carries a ``sorry`` or ``admit`` token."""
    return bool(iter_incomplete_markers(source))


def count_incomplete_markers(source: str) -> int:
    return len(iter_incomplete_markers(source))


@dataclass(frozen=True)
class TheoremDecl:
    """A ``theorem``/``lemma`` declaration located in a file.

    ``start``/``end`` delimit the declaration in the original text; the
    slice runs from the declaration keyword to the start of the next
    declaration (or end of file), so splicing a rewritten declaration
    back over the slice reproduces a well-formed file.
    """

    name: str
    keyword: str
    start: int
    end: int
    has_marker: bool

    def text(self, source: str) -> str:
        return source[self.start : self.end]


def find_theorem_declarations(source: str) -> list[TheoremDecl]:
    """Locate all theorem/lemma declarations, in file order."""
    stripped = strip_comments_and_strings(source)
    matches = list(_DECL_RE.finditer(stripped))
    decls: list[TheoremDecl] = []
    for i, m in enumerate(matches):
        start = m.start(1)
        end = matches[i + 1].start(1) if i + 1 < len(matches) else len(source)
        decls.append(
            TheoremDecl(
                name=m.group(2),
                keyword=m.group(1),
                start=start,
                end=end,
                has_marker=contains_incomplete_marker(stripped[start:end]),
            )
        )
    return decls


def split_task_source(source: str) -> tuple[str, str]:
    """Split a single-theorem file into (preamble, statement).

    Raises MalformedStatement unless exactly one declaration is present.
    """
    decls = find_theorem_declarations(source)
    if len(decls) != 1:
        raise MalformedStatement(
            f"expected exactly one theorem declaration, found {len(decls)}"
        )
    d = decls[0]
    return source[: d.start], source[d.start :]


def _goal_span(statement: str) -> tuple[int, int]:
    """Locate the goal of a theorem statement.

    Returns (goal_start, goal_end) offsets into ``statement``: the text
    strictly between the last top-level ``:`` of the signature and the
    ``:=`` that introduces the body (or end of text when there is no
    body).  Top-level means bracket-nesting depth zero, so binder colons
    inside ``()``, ``{}``, ``[]``, ``⟨⟩`` or ``⦃⦄`` never qualify.
    """
    stripped = strip_comments_and_strings(statement)
    depth = 0
    last_colon = -1
    assign = len(statement)
    i = 0
    n = len(stripped)
    while i < n:
        ch = stripped[i]
        if ch in _OPEN_BRACKETS:
            depth += 1
        elif ch in _CLOSE_BRACKETS:
            depth -= 1
            if depth < 0:
                raise MalformedStatement("unbalanced brackets in statement")
        elif depth == 0 and ch == ":":
            if i + 1 < n and stripped[i + 1] == "=":
                assign = i
                break
            last_colon = i
        i += 1
    if last_colon < 0 or last_colon >= assign:
        raise MalformedStatement("no goal separator found in statement")
    return last_colon + 1, assign


def extract_goal(statement: str) -> str:
    """The goal proposition of a statement, with surrounding space trimmed."""
    a, b = _goal_span(statement)
    goal = statement[a:b].strip()
    if not goal:
        raise MalformedStatement("empty goal")
    return goal


def negate_statement(statement: str) -> str:
    """Rewrite a theorem statement to claim the negation of its goal.

    The goal ``P`` becomes ``(P) = False`` and the body becomes
    ``by sorry``; everything before the goal separator is preserved
    byte for byte.
    """
    a, _ = _goal_span(statement)
    goal = extract_goal(statement)
    return statement[:a] + f" ({goal}) = False := by sorry\n"


def negate_theorem_in_file(source: str) -> str:
    """Replace the sole theorem of a file with its negated form."""
    preamble, statement = split_task_source(source)
    return preamble + negate_statement(statement)


# ---------------------------------------------------------------------------
# Tactic extraction
# ---------------------------------------------------------------------------

def _head_positions(stripped: str) -> set[int]:
    """Offsets where a tactic head token may begin.

    A position qualifies when, looking backwards past spaces and tabs, the
    previous character is a newline (or start of text), a ``;``, the ``>``
    of ``<;>``, a focus bullet, or the end of a ``by`` token.
    """
    heads: set[int] = set()
    for m in re.finditer(r"[^\s]", stripped):
        i = m.start()
        if i > 0 and is_ident_char(stripped[i - 1]):
            continue  # middle of a token
        j = i - 1
        while j >= 0 and stripped[j] in " \t":
            j -= 1
        if j < 0 or stripped[j] == "\n":
            heads.add(i)
            continue
        prev = stripped[j]
        if prev == ";" or prev == "·":
            heads.add(i)
            continue
        if prev == ">" and stripped[max(0, j - 2) : j + 1] == "<;>":
            heads.add(i)
            continue
        if prev == "y" and j >= 1 and stripped[j - 1 : j + 1] == "by":
            before = stripped[j - 2] if j >= 2 else ""
            if not before or not is_ident_char(before):
                heads.add(i)
    return heads


def extract_tactic_names(body: str, vocabulary: frozenset[str]) -> set[str]:
    """Vocabulary tactics that appear in head position in a proof body.

    Matching is purely lexical: comments and strings are stripped, then
    identifier tokens found at the start of a tactic slot (line start,
    after ``;`` / ``<;>`` / ``by`` / a focus bullet) are intersected with
    the vocabulary.  Combinator suffix forms such as ``simp?`` or
    ``exact?`` share a head token with their base tactic and are counted
    as the base name; that is a known limit of lexical matching.
    """
    stripped = strip_comments_and_strings(body)
    heads = _head_positions(stripped)
    found: set[str] = set()
    for m in re.finditer(r"[\w']+", stripped):
        if m.start() not in heads:
            continue
        tok = m.group(0)
        end = m.end()
        nxt = stripped[end] if end < len(stripped) else ""
        if nxt and is_ident_char(nxt):
            continue
        if tok in vocabulary:
            found.add(tok)
    return found
