"""Prover-side text work: reading replies, building proof skeletons.

The prover talks in ordinary chat messages. These helpers pull structure
out of those messages (step plans, have-lines, ill-posedness claims) and
turn a plan into a compilable skeleton file where every step ends in an
open obligation.
"""

from __future__ import annotations

import re
from importlib import resources

from ..leantext import count_incomplete_markers

_PROMPT_CACHE: dict[str, str] = {}


def load_prompt(name: str) -> str:
    """Return a prompt asset shipped with the package, cached."""
    if name not in _PROMPT_CACHE:
        ref = resources.files("proofloop.agents").joinpath("prompts", f"{name}.txt")
        _PROMPT_CACHE[name] = ref.read_text(encoding="utf-8")
    return _PROMPT_CACHE[name]


def phase_guidance(phase_name: str) -> str:
    """One-line instruction for the given prover phase."""
    for line in load_prompt("phase_guidance").splitlines():
        head, sep, rest = line.partition(":")
        if sep and head.strip() == phase_name:
            return rest.strip()
    raise KeyError(phase_name)


# A numbered step: "1. foo", "2) bar", "Step 3: baz".
_NUMBERED_RE = re.compile(r"^\s*(?:step\s+)?(\d+)\s*[.):]\s+(\S.*)$", re.IGNORECASE)
_BULLET_RE = re.compile(r"^\s*[-*]\s+(\S.*)$")


def parse_sketch_steps(text: str) -> list[str]:
    """Extract an ordered step plan from a prover reply.

    Numbered lines win; if there are none, bullet lines are used instead.
    Returns the step descriptions in order of appearance.
    """
    numbered: list[tuple[int, str]] = []
    bullets: list[str] = []
    for line in text.splitlines():
        m = _NUMBERED_RE.match(line)
        if m:
            numbered.append((int(m.group(1)), m.group(2).strip()))
            continue
        b = _BULLET_RE.match(line)
        if b:
            bullets.append(b.group(1).strip())
    if numbered:
        return [desc for _, desc in numbered]
    return bullets


# Phrases that flag a claim of unprovability as stated.
_ILL_POSED_PHRASES = (
    "contradictory premises",
    "premises are contradictory",
    "ill-posed",
    "cannot hold as stated",
)


def detect_ill_posed_claim(text: str) -> bool:
    """True when a reply asserts the statement cannot be proved as given."""
    low = text.lower()
    return any(phrase in low for phrase in _ILL_POSED_PHRASES)


def extract_have_lines(text: str) -> list[str]:
    """Collect have-step lines from a reply or a file, in order."""
    out = []
    for line in text.splitlines():
        if line.lstrip().startswith("have "):
            out.append(line.strip())
    return out


class EmptySketch(ValueError):
    """A skeleton was requested with no steps to build it from."""


def build_skeleton(statement: str, step_lines: list[str]) -> str:
    """Rewrite a theorem so its body is a chain of open have-steps.

    ``statement`` is the full theorem declaration whose body gets
    replaced. Each step line that does not already end in an open
    obligation has ``:= by sorry`` appended, and a final ``sorry`` closes
    the goal, so the result carries exactly ``len(step_lines) + 1``
    markers.
    """
    if not step_lines:
        raise EmptySketch("cannot build a skeleton from an empty step list")
    head = statement
    depth = 0
    pos = None
    opens = "([{⟨⦃"
    closes = ")]}⟩⦄"
    for i, ch in enumerate(head):
        if ch in opens:
            depth += 1
        elif ch in closes:
            depth -= 1
        elif depth == 0 and head.startswith(":=", i):
            pos = i
            break
    if pos is None:
        raise EmptySketch("statement has no body to replace")
    prefix = head[:pos].rstrip()
    lines = [f"{prefix} := by"]
    for raw in step_lines:
        step = raw.strip()
        if count_incomplete_markers(step) == 0:
            step = f"{step} := by sorry"
        lines.append(f"  {step}")
    lines.append("  sorry")
    out = "\n".join(lines) + "\n"
    assert count_incomplete_markers(out) >= len(step_lines) + 1
    return out
