"""Embedded triple store with a single-pattern SPARQL subset.

The store answers exactly one kind of query: a triple pattern with one
variable, optionally filtered by a comparator on that variable. That is
all the rule-based and neural KB solvers need to fill in the missing
part of a (subject, predicate, object) fact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import (
    EmptyComponent,
    FilterTypeError,
    MalformedLine,
    SparqlSyntaxError,
)
from .text import EntityDictionary, normalize, tokenize


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        for name in ("subject", "predicate", "object"):
            value = getattr(self, name)
            if not value.strip():
                raise ValueError(f"triple {name} is empty")
            if "\t" in value or "\n" in value:
                raise ValueError(f"triple {name} contains tab/newline")


class KnowledgeBase:
    """Immutable triple collection with (s,p)->objects and (p,o)->subjects indices."""

    def __init__(self, triples: list[Triple]):
        seen: set[Triple] = set()
        self.triples: list[Triple] = []
        for t in triples:
            if t not in seen:
                seen.add(t)
                self.triples.append(t)

        self.by_subject_predicate: dict[tuple[str, str], list[str]] = {}
        self.by_predicate_object: dict[tuple[str, str], list[str]] = {}
        for t in self.triples:
            objs = self.by_subject_predicate.setdefault((t.subject, t.predicate), [])
            if t.object not in objs:
                objs.append(t.object)
            subs = self.by_predicate_object.setdefault((t.predicate, t.object), [])
            if t.subject not in subs:
                subs.append(t.subject)

        subjects = {t.subject for t in self.triples}
        self.entities: set[str] = set(subjects)
        self.entities.update(t.object for t in self.triples if t.object in subjects)

    def predicates_of(self, subject: str) -> list[str]:
        """Outgoing predicates of a subject, in first-occurrence order."""
        out: list[str] = []
        for t in self.triples:
            if t.subject == subject and t.predicate not in out:
                out.append(t.predicate)
        return out

    def __len__(self) -> int:
        return len(self.triples)


def load_triples(path: str) -> KnowledgeBase:
    """Load a UTF-8 TSV file (subject<TAB>predicate<TAB>object per line).

    Blank lines and lines starting with '#' are skipped; duplicate
    triples collapse to one.
    """
    triples: list[Triple] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise MalformedLine(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
            try:
                triples.append(Triple(fields[0].strip(), fields[1].strip(), fields[2].strip()))
            except ValueError as exc:
                raise MalformedLine(lineno, str(exc)) from exc
    return KnowledgeBase(triples)


COMPARATORS = ("<=", ">=", "!=", "=", "<", ">")
_NUMERIC_COMPARATORS = {"<", ">", "<=", ">="}


@dataclass(frozen=True)
class ObjectUnknown:
    subject: str
    predicate: str


@dataclass(frozen=True)
class SubjectUnknown:
    predicate: str
    object: str


@dataclass(frozen=True)
class SparqlQuery:
    variable: str
    pattern: ObjectUnknown | SubjectUnknown
    filter: Optional[tuple[str, str]] = None  # (comparator, literal)

    def __post_init__(self):
        if self.filter is not None:
            comp, literal = self.filter
            if comp not in COMPARATORS:
                raise ValueError(f"unknown comparator {comp!r}")
            if comp in _NUMERIC_COMPARATORS and _as_number(literal) is None:
                raise ValueError(f"numeric comparator {comp} needs a numeric literal, got {literal!r}")


def _as_number(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


class _Scanner:
    """Token scanner for the subset grammar; whitespace-insensitive."""

    _PATTERNS = [
        ("IRI", re.compile(r"<([^<>\n]*)>")),
        ("VAR", re.compile(r"\?(\w+)")),
        ("WORD", re.compile(r"SELECT|WHERE|FILTER", re.IGNORECASE)),
        ("CMP", re.compile(r"<=|>=|!=|=|<|>")),
        ("PUNCT", re.compile(r"[{}().]")),
        ("LITERAL", re.compile(r'"([^"\n]*)"|(-?\d+(?:\.\d+)?)')),
    ]

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek_is(self, literal: str) -> bool:
        self.skip_ws()
        return self.text[self.pos : self.pos + len(literal)].upper() == literal.upper()

    def expect_word(self, word: str):
        self.skip_ws()
        if not self.peek_is(word):
            raise SparqlSyntaxError(self.pos, word)
        self.pos += len(word)

    def expect_var(self) -> str:
        self.skip_ws()
        m = re.compile(r"\?(\w+)").match(self.text, self.pos)
        if not m:
            raise SparqlSyntaxError(self.pos, "?variable")
        self.pos = m.end()
        return m.group(1)

    def expect_iri(self) -> str:
        self.skip_ws()
        m = re.compile(r"<([^<>\n]*)>").match(self.text, self.pos)
        if not m:
            raise SparqlSyntaxError(self.pos, "<iri>")
        self.pos = m.end()
        return m.group(1)

    def try_iri(self) -> Optional[str]:
        self.skip_ws()
        m = re.compile(r"<([^<>\n]*)>").match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(1)

    def try_var(self) -> Optional[str]:
        self.skip_ws()
        m = re.compile(r"\?(\w+)").match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(1)

    def expect_comparator(self) -> str:
        self.skip_ws()
        for comp in COMPARATORS:
            if self.text.startswith(comp, self.pos):
                self.pos += len(comp)
                return comp
        raise SparqlSyntaxError(self.pos, "comparator")

    def expect_literal(self) -> str:
        self.skip_ws()
        m = re.compile(r'"([^"\n]*)"').match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return m.group(1)
        m = re.compile(r"-?\d+(?:\.\d+)?").match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return m.group(0)
        raise SparqlSyntaxError(self.pos, "literal")


def parse_sparql(text: str) -> SparqlQuery:
    """Parse a query of the subset grammar:

    SELECT ?v WHERE { <s> <p> ?v . }  or  SELECT ?v WHERE { ?v <p> <o> . }
    optionally followed by FILTER(?v CMP literal) before the closing brace.
    """
    sc = _Scanner(text)
    sc.expect_word("SELECT")
    variable = sc.expect_var()
    sc.expect_word("WHERE")
    sc.expect_word("{")

    subject_iri = sc.try_iri()
    if subject_iri is not None:
        predicate = sc.expect_iri()
        var2 = sc.expect_var()
        if var2 != variable:
            raise SparqlSyntaxError(sc.pos, f"?{variable}")
        pattern: ObjectUnknown | SubjectUnknown = ObjectUnknown(subject_iri, predicate)
    else:
        var2 = sc.try_var()
        if var2 is None:
            raise SparqlSyntaxError(sc.pos, "<iri> or ?variable")
        if var2 != variable:
            raise SparqlSyntaxError(sc.pos, f"?{variable}")
        predicate = sc.expect_iri()
        object_iri = sc.expect_iri()
        pattern = SubjectUnknown(predicate, object_iri)
    sc.expect_word(".")

    filt: Optional[tuple[str, str]] = None
    if sc.peek_is("FILTER"):
        sc.expect_word("FILTER")
        sc.expect_word("(")
        var3 = sc.expect_var()
        if var3 != variable:
            raise SparqlSyntaxError(sc.pos, f"?{variable}")
        comp = sc.expect_comparator()
        literal = sc.expect_literal()
        sc.expect_word(")")
        filt = (comp, literal)

    sc.expect_word("}")
    if not sc.eof():
        raise SparqlSyntaxError(sc.pos, "end of query")
    try:
        return SparqlQuery(variable, pattern, filt)
    except ValueError as exc:
        raise SparqlSyntaxError(sc.pos, str(exc)) from exc


def serialize_sparql(q: SparqlQuery) -> str:
    if isinstance(q.pattern, ObjectUnknown):
        body = f"<{q.pattern.subject}> <{q.pattern.predicate}> ?{q.variable}"
    else:
        body = f"?{q.variable} <{q.pattern.predicate}> <{q.pattern.object}>"
    filt = ""
    if q.filter is not None:
        comp, literal = q.filter
        lit = literal if _as_number(literal) is not None else f'"{literal}"'
        filt = f" FILTER(?{q.variable} {comp} {lit})"
    return f"SELECT ?{q.variable} WHERE {{ {body} .{filt} }}"


def _passes_filter(binding: str, filt: Optional[tuple[str, str]]) -> bool:
    if filt is None:
        return True
    comp, literal = filt
    if comp in _NUMERIC_COMPARATORS:
        left = _as_number(binding)
        if left is None:
            raise FilterTypeError(f"non-numeric binding {binding!r} under comparator {comp}")
        right = float(literal)
        return {"<": left < right, ">": left > right, "<=": left <= right, ">=": left >= right}[comp]
    if comp == "=":
        return binding == literal
    return binding != literal


def execute_sparql(kb: KnowledgeBase, q: SparqlQuery) -> list[str]:
    """All bindings matching the pattern, filtered, first-insertion order."""
    if isinstance(q.pattern, ObjectUnknown):
        candidates = kb.by_subject_predicate.get((q.pattern.subject, q.pattern.predicate), [])
    else:
        candidates = kb.by_predicate_object.get((q.pattern.predicate, q.pattern.object), [])
    out: list[str] = []
    for binding in candidates:
        if _passes_filter(binding, q.filter) and binding not in out:
            out.append(binding)
    return out


def generate_sparql(subject: str, predicate: str) -> str:
    """Object-unknown query text for a (subject, predicate) pair."""
    if not subject or not predicate:
        raise EmptyComponent("subject and predicate must be non-empty")
    return f"SELECT ?x WHERE {{ <{subject}> <{predicate}> ?x . }}"


def build_entity_dictionary(kb: KnowledgeBase) -> EntityDictionary:
    """Export KB entities keyed by their normalized surface form.

    When two entities normalize to the same key the lexicographically
    smallest canonical string wins.
    """
    entries: dict[str, str] = {}
    for entity in kb.entities:
        key = normalize(entity)
        if not key:
            continue
        if key not in entries or entity < entries[key]:
            entries[key] = entity
    max_tokens = max((len(tokenize(k)) for k in entries), default=0)
    return EntityDictionary(entries=entries, max_entry_tokens=max_tokens)
