"""Lexical layer: marker scanning, goal negation, tactic extraction."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from proofloop.leantext import (
    MalformedStatement,
    contains_incomplete_marker,
    count_incomplete_markers,
    extract_goal,
    extract_tactic_names,
    find_theorem_declarations,
    iter_incomplete_markers,
    negate_statement,
    negate_theorem_in_file,
    split_task_source,
    strip_comments_and_strings,
)

from oracles import oracle_has_marker, oracle_marker_count, oracle_strip

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "marker_corpus"
LEAN = FIXTURES / "lean"


def corpus_files() -> list[Path]:
    return sorted(p for p in CORPUS.glob("*.lean"))


def test_corpus_has_twenty_files():
    assert len(corpus_files()) == 20


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_marker_scan_matches_oracle(path):
    text = path.read_text(encoding="utf-8")
    assert contains_incomplete_marker(text) == oracle_has_marker(text)
    assert count_incomplete_markers(text) == oracle_marker_count(text)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_marker_scan_matches_hand_labels(path):
    labels = json.loads((CORPUS / "labels.json").read_text())
    text = path.read_text(encoding="utf-8")
    expected = labels[path.name]
    assert contains_incomplete_marker(text) == expected["has_marker"]
    assert count_incomplete_markers(text) == expected["marker_count"]


def test_stripper_preserves_length_and_newlines():
    for path in corpus_files():
        text = path.read_text(encoding="utf-8")
        stripped = strip_comments_and_strings(text)
        assert len(stripped) == len(text)
        assert [i for i, c in enumerate(text) if c == "\n"] == [
            i for i, c in enumerate(stripped) if c == "\n"
        ]


def test_stripper_matches_oracle_on_corpus():
    for path in corpus_files():
        text = path.read_text(encoding="utf-8")
        assert strip_comments_and_strings(text) == oracle_strip(text)


def test_token_boundaries():
    assert not contains_incomplete_marker("def sorry' : Nat := 3")
    assert not contains_incomplete_marker("def admits : Nat := 1")
    assert not contains_incomplete_marker("def sorry₂ : Nat := 1")
    assert contains_incomplete_marker("example : True := by sorry")
    assert contains_incomplete_marker("foo.sorry")
    assert contains_incomplete_marker("(admit)")


def test_marker_positions_zero_based():
    text = "-- clean\ntheorem a : True := by\n  sorry\n"
    (hit,) = iter_incomplete_markers(text)
    assert (hit.line, hit.col) == (2, 2)
    assert hit.token == "sorry"


def test_marker_fuzz_against_oracle():
    rng = random.Random(1311)
    atoms = [
        "sorry", "admit", "sorry'", "admits", "x", "foo", "--", "\n",
        "/-", "-/", '"', " ", "theorem", ":=", "by", "h₁", "\\",
    ]
    for _ in range(300):
        text = "".join(rng.choice(atoms) for _ in range(rng.randrange(0, 40)))
        assert contains_incomplete_marker(text) == oracle_has_marker(text), repr(text)
        assert count_incomplete_markers(text) == oracle_marker_count(text), repr(text)


# ---------------------------------------------------------------------------
# Theorem discovery and task splitting
# ---------------------------------------------------------------------------

def test_find_declarations_multi():
    text = (CORPUS / "multi_decl_one_marker.lean").read_text()
    decls = find_theorem_declarations(text)
    assert [d.name for d in decls] == ["first_one", "second_one"]
    assert [d.has_marker for d in decls] == [False, True]
    assert "".join(d.text(text) for d in decls) in text


def test_split_task_source_roundtrip():
    for name in ["dihedral_order_two.lean", "prime_sum_ill_posed.lean", "qt_eigenstate.lean"]:
        text = (LEAN / name).read_text(encoding="utf-8")
        preamble, statement = split_task_source(text)
        assert preamble + statement == text
        assert statement.lstrip().startswith("theorem")


def test_split_task_source_rejects_no_theorem():
    with pytest.raises(MalformedStatement):
        split_task_source("def a : Nat := 1\n")


def test_split_task_source_rejects_two_theorems():
    with pytest.raises(MalformedStatement):
        split_task_source((CORPUS / "multi_decl_one_marker.lean").read_text())


# ---------------------------------------------------------------------------
# Negation
# ---------------------------------------------------------------------------

def test_negate_simple_goal():
    stmt = "theorem t : True := by sorry"
    out = negate_statement(stmt)
    assert out == "theorem t : (True) = False := by sorry\n"


def test_negate_order_of_goal():
    text = (LEAN / "dihedral_order_two.lean").read_text(encoding="utf-8")
    _, stmt = split_task_source(text)
    out = negate_statement(stmt)
    assert extract_goal(out) == "(orderOf x = 2) = False"
    assert out.startswith(
        "theorem exercise_3_part1 {x : D_n} (h : x = s * r ^ i) :"
    )


def test_negate_prime_sum_goal_exact():
    text = (LEAN / "prime_sum_ill_posed.lean").read_text(encoding="utf-8")
    _, stmt = split_task_source(text)
    out = negate_statement(stmt)
    assert extract_goal(out) == "(p1 + p2 + p3 + p4 = 190) = False"
    # Everything up to the goal separator survives byte for byte.
    head = stmt[: stmt.rindex(":=")]
    sep = head.rindex(":")
    assert out == stmt[: sep + 1] + " (p1 + p2 + p3 + p4 = 190) = False := by sorry\n"


def test_negate_preserves_prefix_bytes():
    stmt = "theorem t (h : 1 < 2) : 1 + 1 = 2 := by sorry"
    out = negate_statement(stmt)
    prefix = "theorem t (h : 1 < 2) :"
    assert out.startswith(prefix)
    assert out == prefix + " (1 + 1 = 2) = False := by sorry\n"


def test_negate_binder_colons_ignored():
    stmt = "theorem t {x : Nat} [inst : Decidable True] ⦃y : Int⦄ : x = x := by sorry"
    assert extract_goal(negate_statement(stmt)) == "(x = x) = False"


def test_negate_in_file_keeps_preamble():
    text = (LEAN / "prime_sum_ill_posed.lean").read_text(encoding="utf-8")
    out = negate_theorem_in_file(text)
    assert out.startswith("import Mathlib\n")
    assert "(p1 + p2 + p3 + p4 = 190) = False := by sorry" in out
    assert "= 190 := by  sorry" not in out


def test_negate_malformed():
    with pytest.raises(MalformedStatement):
        negate_statement("theorem t := by sorry")  # no goal separator
    with pytest.raises(MalformedStatement):
        negate_statement("theorem t : := by sorry")  # empty goal
    with pytest.raises(MalformedStatement):
        negate_statement("theorem t ) : True := by sorry")  # unbalanced


# ---------------------------------------------------------------------------
# Tactic extraction
# ---------------------------------------------------------------------------

VOCAB = frozenset({"exact", "rw", "rfl", "simp", "intro", "omega", "ext"})


def test_extract_ignores_comments():
    assert extract_tactic_names("-- simp\nby exact h", VOCAB) == {"exact"}
    assert extract_tactic_names("by rfl", VOCAB) == {"rfl"}


def test_extract_head_positions_only():
    body = "intro h\nexact foo.rw (simp_result)\n"
    # rw appears after a dot and simp only inside a longer identifier.
    assert extract_tactic_names(body, VOCAB) == {"intro", "exact"}


def test_extract_after_semicolons_and_bullets():
    body = "constructor <;> simp\n· exact h1 ; rfl\n"
    assert extract_tactic_names(body, VOCAB) == {"simp", "exact", "rfl"}


def test_extract_identifier_suffix_not_counted():
    assert extract_tactic_names("Matrix.ext_iff x\nextension y\n", VOCAB) == set()


def test_extract_from_successful_proof_listing():
    text = (LEAN / "diagonal_real_proof.lean").read_text(encoding="utf-8")
    body = text[text.index(":= by") + 2 :]
    from proofloop.bench.analytics import DEFAULT_TACTIC_VOCABULARY

    assert extract_tactic_names(body, DEFAULT_TACTIC_VOCABULARY.names) == {"rw", "exact"}
