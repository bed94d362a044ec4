"""Parsing of diagnostic payloads returned by the Lean tool server.

Two shapes are accepted: a JSON list of diagnostic objects (LSP-style
severities) and the plain-text block format ``l<line>c<col>-l<line>c<col>,
severity: <n>`` followed by the message.  Everything else raises
UnparseablePayload, which callers treat as an ERROR: an unreadable
verdict must never pass a proof.
"""

from __future__ import annotations

import json
import re
from typing import Any

from ..model import Diagnostic, Severity
from .errors import UnparseablePayload

# LSP numeric severities: 1 error, 2 warning, 3 information, 4 hint.
_LSP_TO_SEVERITY = {
    1: Severity.ERROR,
    2: Severity.INCOMPLETE,
    3: None,
    4: None,
}

_SORRY_NOTICE = re.compile(r"declaration uses '?(sorry|admit)'?", re.IGNORECASE)

_TEXT_HEAD = re.compile(
    r"^l(\d+)c(\d+)-l(\d+)c(\d+),\s*severity:\s*(\d+)\s*$"
)

_CLEAN_TEXTS = {"", "no errors", "no errors found", "no diagnostics", "ok"}


def _classify(lsp_severity: int, message: str, source_tag: str) -> Severity | None:
    """Map an LSP severity to the three-point scale; None means drop.

    A sorry/admit notice is forced to INCOMPLETE whatever its transport
    severity, and linter output counts as INCOMPLETE even when tagged
    informational.
    """
    if _SORRY_NOTICE.search(message):
        return Severity.INCOMPLETE
    if "linter" in source_tag.lower() or message.lstrip().startswith("linter"):
        return Severity.INCOMPLETE
    if lsp_severity not in _LSP_TO_SEVERITY:
        raise UnparseablePayload(f"unknown severity {lsp_severity!r}")
    return _LSP_TO_SEVERITY[lsp_severity]


def _from_obj(obj: dict[str, Any], default_file: str) -> Diagnostic | None:
    if not isinstance(obj, dict):
        raise UnparseablePayload(f"diagnostic entry is not an object: {obj!r}")
    if "message" not in obj or "severity" not in obj:
        raise UnparseablePayload(f"diagnostic entry missing fields: {obj!r}")
    message = obj["message"]
    raw_sev = obj["severity"]
    if not isinstance(message, str) or not isinstance(raw_sev, int):
        raise UnparseablePayload(f"diagnostic entry has wrong field types: {obj!r}")
    source_tag = str(obj.get("source", obj.get("source_tag", "")))
    sev = _classify(raw_sev, message, source_tag)
    if sev is None:
        return None
    rng = obj.get("range", {})
    start = rng.get("start", {}) if isinstance(rng, dict) else {}
    end = rng.get("end", {}) if isinstance(rng, dict) else {}
    return Diagnostic(
        severity=sev,
        message=message,
        file=str(obj.get("file", default_file)),
        start_line=int(start.get("line", obj.get("start_line", 0))),
        start_col=int(start.get("character", obj.get("start_col", 0))),
        end_line=int(end.get("line", obj.get("end_line", 0))),
        end_col=int(end.get("character", obj.get("end_col", 0))),
        source_tag=source_tag,
    )


def _parse_text_blocks(text: str, default_file: str) -> list[Diagnostic]:
    blocks = [b for b in re.split(r"\n\s*\n", text) if b.strip()]
    diags: list[Diagnostic] = []
    matched_any = False
    for block in blocks:
        lines = block.strip().splitlines()
        m = _TEXT_HEAD.match(lines[0].strip())
        if m is None:
            raise UnparseablePayload(f"unrecognized diagnostic block: {lines[0]!r}")
        matched_any = True
        sl, sc, el, ec, sev = (int(g) for g in m.groups())
        message = "\n".join(lines[1:]).strip()
        out_sev = _classify(sev, message, "")
        if out_sev is None:
            continue
        diags.append(
            Diagnostic(
                severity=out_sev,
                message=message,
                file=default_file,
                start_line=sl,
                start_col=sc,
                end_line=el,
                end_col=ec,
            )
        )
    if not matched_any and blocks:
        raise UnparseablePayload("no diagnostic blocks found")
    return diags


def parse_diagnostics(payload: Any, default_file: str = "") -> list[Diagnostic]:
    """Normalize a tool payload into Diagnostic values.

    Accepts a list of objects, a JSON string encoding such a list, or
    the text block format.  A clean report (empty list, empty string, or
    a no-errors phrase) yields [].
    """
    if payload is None:
        return []
    if isinstance(payload, list):
        out = []
        for obj in payload:
            d = _from_obj(obj, default_file)
            if d is not None:
                out.append(d)
        return out
    if isinstance(payload, dict):
        inner = payload.get("diagnostics")
        if isinstance(inner, list):
            return parse_diagnostics(inner, default_file)
        raise UnparseablePayload("no diagnostics field in object payload")
    if isinstance(payload, str):
        text = payload.strip()
        if text.lower() in _CLEAN_TEXTS:
            return []
        if text.startswith("[") or text.startswith("{"):
            try:
                decoded = json.loads(text)
            except json.JSONDecodeError as e:
                raise UnparseablePayload(f"payload looks like JSON but is not: {e}")
            return parse_diagnostics(decoded, default_file)
        return _parse_text_blocks(text, default_file)
    raise UnparseablePayload(f"unsupported payload type {type(payload).__name__}")
