"""Heuristic rule sets: the text DSL, completeness analysis, and completion.

Grammar (whitespace-insensitive, ``#`` starts a line comment)::

    file        := (frame_decl | map_decl | rule_stmt | evidence_decl)*
    frame_decl  := "frame" IDENT "=" "{" label ("," label)* "}"
                 | "frame" IDENT "=" IDENT ("*" IDENT)+          # product frame
    map_decl    := "map" IDENT ":" IDENT "->" IDENT "{" rule_stmt+ "}"
    rule_stmt   := "rule"? antecedent "->" term ("," term)* ";"
    antecedent  := label | "{" label ("," label)* "}"
    term        := target ":" NUMBER
    target      := "{" label ("," label)* "}" | label | "*"      # "*" = whole conclusion frame
    evidence_decl := "evidence" "on" IDENT "{" (target ":" NUMBER ";")+ "}"
    label       := IDENT | "(" IDENT ("," IDENT)* ")"            # tuple elements of product frames
    NUMBER      := decimal in [0, 1], at most nine fractional digits

A rule set is *incomplete* when its antecedents or conclusions are not backed
by a declared exhaustive frame, or when some rule's strengths sum below 1.
Completion synthesizes the missing frames (adding a catch-all complement
element named ``!<labels>``) and pads deficient rules with the whole
conclusion frame, after which every rule is a mass function and the set
converts to an evidential mapping.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from math import fsum
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError
from .frames import Frame, SubsetRef
from .mapping import EvidentialMapping
from .product import ProductFrame, product_frame

STRENGTH_SUM_TOL = 1e-9

Target = tuple[str, ...] | None  # None stands for the whole conclusion frame


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleTerm:
    """One conclusion of a rule: a target subset and the strength committed to it."""

    target: Target
    strength: float
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def is_star(self) -> bool:
        return self.target is None


@dataclass(frozen=True)
class HeuristicRule:
    antecedent: tuple[str, ...]
    terms: tuple[RuleTerm, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def is_singleton(self) -> bool:
        return len(self.antecedent) == 1

    def strength_total(self) -> float:
        return fsum(t.strength for t in self.terms)

    def antecedent_text(self) -> str:
        if self.is_singleton:
            return self.antecedent[0]
        return "{" + ",".join(self.antecedent) + "}"


@dataclass(frozen=True)
class RuleSet:
    """Parsed rules plus whatever frame knowledge the file provided.

    ``antecedent_frame``/``conclusion_frame`` are None until a declaration
    resolves them or completion synthesizes them; the raw label sets are then
    derivable from the rules themselves.
    """

    name: str | None
    source_name: str | None
    target_name: str | None
    antecedent_frame: Frame | None
    conclusion_frame: Frame | None
    rules: tuple[HeuristicRule, ...]

    def singleton_rules(self) -> tuple[HeuristicRule, ...]:
        return tuple(r for r in self.rules if r.is_singleton)

    def subset_rules(self) -> tuple[HeuristicRule, ...]:
        return tuple(r for r in self.rules if not r.is_singleton)

    def antecedent_labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rule in self.rules:
            for label in rule.antecedent:
                seen.setdefault(label)
        return tuple(seen)

    def conclusion_labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rule in self.rules:
            for term in rule.terms:
                if term.target is not None:
                    for label in term.target:
                        seen.setdefault(label)
        return tuple(seen)

    @property
    def status(self) -> str:
        return "complete" if classify_completeness(self).complete else "incomplete"


@dataclass(frozen=True)
class EvidenceDecl:
    frame_name: str
    assignments: tuple[tuple[Target, float], ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class Document:
    """Everything one file contributes: frame declarations, at most one rule
    set, and any evidence declarations."""

    frames: dict[str, Frame]
    ruleset: RuleSet | None
    evidence: list[EvidenceDecl]


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<arrow>->)
    | (?P<ident>!?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<punct>[{}(),;:=*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "number", "->", "eof", or a punctuation character
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        group = m.lastgroup
        lexeme = m.group()
        if group not in ("ws", "comment"):
            kind = "->" if group == "arrow" else (lexeme if group == "punct" else group)
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

@dataclass
class _RawRule:
    antecedent: tuple[str, ...]
    terms: list[RuleTerm]
    line: int
    col: int


@dataclass
class _RawMap:
    name: str
    source_name: str
    target_name: str
    rules: list[_RawRule]
    line: int
    col: int


class _Parser:
    def __init__(self, tokens: list[_Token], frames: dict[str, Frame]):
        self.tokens = tokens
        self.pos = 0
        self.frames = frames          # resolution set: ambient plus declared
        self.declared: dict[str, Frame] = {}
        self.maps: list[_RawMap] = []
        self.bare: list[_RawRule] = []
        self.evidence: list[EvidenceDecl] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> None:
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of file"
            self.fail(f"expected {what or kind!r}, found {shown!r}", tok)
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.peek().kind == "ident" and self.peek().text == word

    # -- grammar -----------------------------------------------------------

    def parse(self) -> None:
        while self.peek().kind != "eof":
            if self.at_keyword("frame"):
                self.frame_decl()
            elif self.at_keyword("map"):
                self.map_decl()
            elif self.at_keyword("evidence"):
                self.evidence_decl()
            else:
                self.bare.append(self.rule_stmt())

    def label(self) -> str:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return tok.text
        if tok.kind == "(":
            self.advance()
            parts = [self.expect("ident", "an element name").text]
            while self.peek().kind == ",":
                self.advance()
                parts.append(self.expect("ident", "an element name").text)
            self.expect(")")
            return "(" + ",".join(parts) + ")"
        self.fail("expected an element label")
        raise AssertionError  # unreachable

    def label_list(self) -> list[str]:
        self.expect("{")
        labels = [self.label()]
        while self.peek().kind == ",":
            self.advance()
            labels.append(self.label())
        self.expect("}")
        return labels

    def frame_decl(self) -> None:
        start = self.advance()  # 'frame'
        name = self.expect("ident", "a frame name").text
        if name in self.declared:
            self.fail(f"frame {name!r} declared twice", start)
        self.expect("=")
        try:
            if self.peek().kind == "{":
                frame: Frame = Frame(name, tuple(self.label_list()))
            else:
                comp_names = [self.expect("ident", "a component frame name")]
                while self.peek().kind == "*":
                    self.advance()
                    comp_names.append(self.expect("ident", "a component frame name"))
                if len(comp_names) < 2:
                    self.fail("a product frame needs at least two components", start)
                comps = []
                for tok in comp_names:
                    if tok.text not in self.frames:
                        self.fail(f"unknown frame {tok.text!r}", tok)
                    comps.append(self.frames[tok.text])
                frame = product_frame(comps, name=name)
        except ValidationError as exc:
            self.fail(str(exc), start)
        if name in self.frames and self.frames[name] != frame:
            self.fail(f"frame {name!r} conflicts with an earlier declaration", start)
        self.declared[name] = frame
        self.frames[name] = frame

    def map_decl(self) -> None:
        start = self.advance()  # 'map'
        name = self.expect("ident", "a map name").text
        self.expect(":")
        source_name = self.expect("ident", "a source frame name").text
        self.expect("->")
        target_name = self.expect("ident", "a target frame name").text
        self.expect("{")
        rules = [self.rule_stmt()]
        while self.peek().kind != "}":
            rules.append(self.rule_stmt())
        self.expect("}")
        self.maps.append(_RawMap(name, source_name, target_name, rules, start.line, start.col))

    def rule_stmt(self) -> _RawRule:
        start = self.peek()
        if self.at_keyword("rule") and self.peek(1).kind != "->":
            self.advance()
            start = self.peek()
        if self.peek().kind == "{":
            antecedent = tuple(self.label_list())
        else:
            antecedent = (self.label(),)
        self.expect("->")
        terms = [self.term()]
        while self.peek().kind == ",":
            self.advance()
            terms.append(self.term())
        self.expect(";")
        return _RawRule(antecedent, terms, start.line, start.col)

    def term(self) -> RuleTerm:
        tok = self.peek()
        target: Target
        if tok.kind == "*":
            self.advance()
            target = None
        elif tok.kind == "{":
            target = tuple(self.label_list())
        else:
            target = (self.label(),)
        self.expect(":")
        strength = self.number()
        return RuleTerm(target, strength, tok.line, tok.col)

    def number(self) -> float:
        tok = self.expect("number", "a number in [0, 1]")
        if "." in tok.text and len(tok.text.split(".", 1)[1]) > 9:
            self.fail("numbers may carry at most nine fractional digits", tok)
        value = float(tok.text)
        if value > 1.0:
            self.fail(f"number {tok.text} is outside [0, 1]", tok)
        return value

    def evidence_decl(self) -> None:
        start = self.advance()  # 'evidence'
        if not self.at_keyword("on"):
            self.fail("expected 'on' after 'evidence'")
        self.advance()
        frame_name = self.expect("ident", "a frame name").text
        self.expect("{")
        assignments: list[tuple[Target, float]] = []
        while self.peek().kind != "}":
            tok = self.peek()
            if tok.kind == "*":
                self.advance()
                target: Target = None
            elif tok.kind == "{":
                target = tuple(self.label_list())
            else:
                target = (self.label(),)
            self.expect(":")
            value = self.number()
            self.expect(";")
            assignments.append((target, value))
        self.expect("}")
        if not assignments:
            self.fail("evidence declaration has no assignments", start)
        frame = self.frames.get(frame_name)
        if frame is not None:
            for target, _ in assignments:
                for lab in target or ():
                    if lab not in frame:
                        self.fail(f"unknown label {lab!r} for frame {frame_name!r}", start)
        self.evidence.append(
            EvidenceDecl(frame_name, tuple(assignments), start.line, start.col)
        )


# ---------------------------------------------------------------------------
# semantic assembly
# ---------------------------------------------------------------------------

def _find_frame(labels: Iterable[str], frames: dict[str, Frame]) -> Frame | None:
    """Frame that contains every label, if the labels touch any frame at all."""
    labels = list(labels)
    touched = [f for f in frames.values() if any(lab in f for lab in labels)]
    if not touched:
        return None
    for candidate in frames.values():
        if all(lab in candidate for lab in labels):
            return candidate
    raise ValidationError(
        f"labels {labels} overlap a declared frame but do not all fit one frame"
    )


def _canonical_target_key(target: Target, frame: Frame | None):
    if frame is None:
        return ("*",) if target is None else tuple(sorted(target))
    if target is None:
        return frame.full().mask
    return frame.subset(target).mask


def _validate_rules(
    raw_rules: list[_RawRule],
    source: Frame | None,
    target: Frame | None,
) -> tuple[HeuristicRule, ...]:
    rules: list[HeuristicRule] = []
    seen_antecedents: set = set()
    for raw in raw_rules:
        antecedent = raw.antecedent
        if source is not None:
            for lab in antecedent:
                if lab not in source:
                    raise ParseError(
                        f"unknown label {lab!r} for frame {source.name!r}", raw.line, raw.col
                    )
            antecedent = source.subset(antecedent).labels
        else:
            deduped: dict[str, None] = {}
            for lab in antecedent:
                deduped.setdefault(lab)
            antecedent = tuple(deduped)
        ant_key = frozenset(antecedent)
        if ant_key in seen_antecedents:
            raise ParseError(
                f"duplicate rule for antecedent {raw.antecedent}", raw.line, raw.col
            )
        seen_antecedents.add(ant_key)
        seen_targets: set = set()
        for term in raw.terms:
            if term.strength <= 0.0:
                raise ParseError("rule strengths must be positive", term.line, term.col)
            if term.target is not None and target is not None:
                for lab in term.target:
                    if lab not in target:
                        raise ParseError(
                            f"unknown label {lab!r} for frame {target.name!r}",
                            term.line,
                            term.col,
                        )
            key = _canonical_target_key(term.target, target)
            if key in seen_targets:
                raise ParseError("duplicate conclusion subset in rule", term.line, term.col)
            seen_targets.add(key)
        total = fsum(t.strength for t in raw.terms)
        if total > 1.0 + STRENGTH_SUM_TOL:
            raise ParseError(
                f"rule strengths sum to {total:g}, above 1", raw.line, raw.col
            )
        rules.append(HeuristicRule(antecedent, tuple(raw.terms), raw.line, raw.col))
    return tuple(rules)


def _build_ruleset(parser: _Parser) -> RuleSet | None:
    if parser.maps and parser.bare:
        raw = parser.bare[0]
        raise ParseError(
            "a file holds one rule set: found both a map block and bare rules",
            raw.line,
            raw.col,
        )
    if len(parser.maps) > 1:
        second = parser.maps[1]
        raise ParseError("a file holds at most one map block", second.line, second.col)
    if parser.maps:
        m = parser.maps[0]
        source = parser.frames.get(m.source_name)
        target = parser.frames.get(m.target_name)
        rules = _validate_rules(m.rules, source, target)
        return RuleSet(m.name, m.source_name, m.target_name, source, target, rules)
    if parser.bare:
        ant_labels: dict[str, None] = {}
        con_labels: dict[str, None] = {}
        for raw in parser.bare:
            for lab in raw.antecedent:
                ant_labels.setdefault(lab)
            for term in raw.terms:
                for lab in term.target or ():
                    con_labels.setdefault(lab)
        first = parser.bare[0]
        try:
            source = _find_frame(ant_labels, parser.frames)
            target = _find_frame(con_labels, parser.frames) if con_labels else None
        except ValidationError as exc:
            raise ParseError(str(exc), first.line, first.col) from None
        rules = _validate_rules(parser.bare, source, target)
        return RuleSet(
            None,
            source.name if source else None,
            target.name if target else None,
            source,
            target,
            rules,
        )
    return None


def parse_document(text: str, frames: Mapping[str, Frame] | None = None) -> Document:
    """Parse a DSL file into frames, at most one rule set, and evidence.

    ``frames`` supplies ambient declarations (for example from a map file)
    that label resolution may use; re-declaring one with different elements
    is an error.
    """
    parser = _Parser(_tokenize(text), dict(frames or {}))
    parser.parse()
    ruleset = _build_ruleset(parser)
    return Document(parser.declared, ruleset, parser.evidence)


def parse_rules(text: str, frames: Mapping[str, Frame] | None = None) -> RuleSet:
    """Parse a rule file; fails if it contains no rules."""
    doc = parse_document(text, frames)
    if doc.ruleset is None:
        raise ParseError("the file declares no rules", 1, 1)
    return doc.ruleset


# ---------------------------------------------------------------------------
# completeness and completion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompletenessReport:
    antecedent_issue: str | None
    conclusion_issue: str | None
    deficient: tuple[tuple[str, float], ...]

    @property
    def complete(self) -> bool:
        return (
            self.antecedent_issue is None
            and self.conclusion_issue is None
            and not self.deficient
        )

    def reasons(self) -> tuple[str, ...]:
        out = []
        if self.antecedent_issue:
            out.append(f"(a) {self.antecedent_issue}")
        if self.conclusion_issue:
            out.append(f"(b) {self.conclusion_issue}")
        for antecedent, total in self.deficient:
            out.append(f"(c) rule {antecedent}: strengths sum to {total:g} < 1")
        return tuple(out)


def classify_completeness(rs: RuleSet) -> CompletenessReport:
    """Report, independently, every way a rule set falls short of complete."""
    if rs.antecedent_frame is None:
        labels = ", ".join(rs.antecedent_labels())
        ant_issue = f"antecedent set {{{labels}}} is not backed by a declared frame"
    else:
        covered = {r.antecedent[0] for r in rs.singleton_rules()}
        missing = [e for e in rs.antecedent_frame.elements if e not in covered]
        if missing:
            ant_issue = (
                f"frame {rs.antecedent_frame.name!r} elements with no rule: "
                + ", ".join(missing)
            )
        else:
            ant_issue = None
    if rs.conclusion_frame is None:
        labels = ", ".join(rs.conclusion_labels())
        con_issue = f"conclusion set {{{labels}}} is not backed by a declared frame"
    else:
        con_issue = None
    deficient = tuple(
        (rule.antecedent_text(), rule.strength_total())
        for rule in rs.rules
        if rule.strength_total() < 1.0 - STRENGTH_SUM_TOL
    )
    return CompletenessReport(ant_issue, con_issue, deficient)


def _complement_label(labels: Iterable[str]) -> str:
    sanitized = [re.sub(r"[^A-Za-z0-9_]", "_", lab.lstrip("!")) for lab in labels]
    candidate = "!" + "_".join(sanitized)
    existing = set(labels)
    while candidate in existing:
        candidate += "_"
    return candidate


def complete_ruleset(rs: RuleSet) -> tuple[RuleSet, Frame, Frame]:
    """Make a rule set complete; identity on already-complete sets.

    Missing frames are synthesized with a catch-all complement element; every
    uncovered antecedent element gets a vacuous rule; deficient rules are
    padded with the whole conclusion frame.  Returns the completed set plus
    its two frames.
    """
    if rs.antecedent_frame is not None:
        theta_e = rs.antecedent_frame
    else:
        labels = rs.antecedent_labels()
        comp = _complement_label(labels)
        theta_e = Frame(rs.source_name or "E", (*labels, comp))
    if rs.conclusion_frame is not None:
        theta_h = rs.conclusion_frame
    else:
        labels = rs.conclusion_labels()
        if not labels:
            raise ValidationError(
                "cannot synthesize a conclusion frame: the rules name no conclusion "
                "labels (use a map block to name the conclusion frame)"
            )
        comp = _complement_label(labels)
        theta_h = Frame(rs.target_name or "H", (*labels, comp))
    rules = list(rs.rules)
    covered = {r.antecedent[0] for r in rs.singleton_rules()}
    for element in theta_e.elements:
        if element not in covered:
            rules.append(HeuristicRule((element,), (RuleTerm(None, 1.0),)))
    padded = []
    for rule in rules:
        total = rule.strength_total()
        if total < 1.0 - STRENGTH_SUM_TOL:
            padded.append(
                replace(rule, terms=(*rule.terms, RuleTerm(None, 1.0 - total)))
            )
        else:
            padded.append(rule)
    completed = RuleSet(
        rs.name, theta_e.name, theta_h.name, theta_e, theta_h, tuple(padded)
    )
    return completed, theta_e, theta_h


def ruleset_to_mapping(rs: RuleSet, theta_e: Frame, theta_h: Frame) -> EvidentialMapping:
    """Convert a complete rule set to its evidential mapping.

    Singleton-antecedent rules become the element images; rules over larger
    antecedent subsets become row overrides for the complete matrix.
    """
    report = classify_completeness(rs)
    if not report.complete:
        raise ValidationError(
            "rule set is incomplete: " + "; ".join(report.reasons())
        )
    if rs.antecedent_frame != theta_e or rs.conclusion_frame != theta_h:
        raise ValidationError("rule set frames do not match the frames given")

    def resolve(term: RuleTerm) -> tuple[SubsetRef, float]:
        subset = theta_h.full() if term.target is None else theta_h.subset(term.target)
        return subset, term.strength

    images = {
        rule.antecedent[0]: [resolve(t) for t in rule.terms]
        for rule in rs.singleton_rules()
    }
    overrides = {
        theta_e.subset(rule.antecedent): [resolve(t) for t in rule.terms]
        for rule in rs.subset_rules()
    }
    return EvidentialMapping(
        rs.name or "R", theta_e, theta_h, images, overrides=overrides or None
    )


# ---------------------------------------------------------------------------
# rule conversions for [c, d]-style uncertainty pairs
# ---------------------------------------------------------------------------

def _two_element_frames(e_label: str, h_label: str) -> tuple[Frame, Frame]:
    theta_e = Frame("E", (e_label, "!" + e_label))
    theta_h = Frame("H", (h_label, "!" + h_label))
    return theta_e, theta_h


def _cd_ruleset(
    e_label: str, h_label: str, for_h: float, against_h: float, residue: float
) -> RuleSet:
    theta_e, theta_h = _two_element_frames(e_label, h_label)
    terms = []
    if for_h > 0.0:
        terms.append(RuleTerm((h_label,), for_h))
    if against_h > 0.0:
        terms.append(RuleTerm(("!" + h_label,), against_h))
    if residue > STRENGTH_SUM_TOL:
        terms.append(RuleTerm(None, residue))
    rules = (
        HeuristicRule((e_label,), tuple(terms)),
        HeuristicRule(("!" + e_label,), (RuleTerm(None, 1.0),)),
    )
    return RuleSet(None, "E", "H", theta_e, theta_h, rules)


def from_ginsberg(e_label: str, h_label: str, c: float, d: float) -> RuleSet:
    """Rules for "if E then H with [c, d]" read as confirmation c, refutation d."""
    if c < 0.0 or d < 0.0 or c + d > 1.0 + STRENGTH_SUM_TOL:
        raise ValidationError(f"need c >= 0, d >= 0 and c + d <= 1; got c={c}, d={d}")
    return _cd_ruleset(e_label, h_label, c, d, 1.0 - d - c)


def from_hau_kashyap(e_label: str, h_label: str, c: float, d: float) -> RuleSet:
    """Rules for "if E then H with [c, d]" read as credibility c, plausibility d."""
    if not 0.0 <= c <= d + STRENGTH_SUM_TOL or d > 1.0:
        raise ValidationError(f"need 0 <= c <= d <= 1; got c={c}, d={d}")
    return _cd_ruleset(e_label, h_label, c, 1.0 - d, d - c)


# ---------------------------------------------------------------------------
# canonical rendering
# ---------------------------------------------------------------------------

def format_mass(value: float) -> str:
    """Shortest decimal with at most nine fractional digits."""
    text = f"{value:.9f}".rstrip("0").rstrip(".")
    return text or "0"


def _quantize_row(strengths: list[float], complete_row: bool) -> list[float]:
    quantized = [round(v, 9) for v in strengths]
    if complete_row:
        # The grid values must still sum to 1 so the rendered file re-parses;
        # fold the rounding residual into the largest entry.
        residual = 1.0 - fsum(quantized)
        if residual:
            j = max(range(len(quantized)), key=lambda i: quantized[i])
            adjusted = round(quantized[j] + residual, 9)
            if 0.0 < adjusted <= 1.0:
                quantized[j] = adjusted
    return quantized


def _target_text(target: Target, frame: Frame | None) -> str:
    if target is None:
        return "*"
    if frame is not None:
        subset = frame.subset(target)
        if subset.is_full:
            return "*"
        labels = subset.labels
    else:
        labels = target
    if len(labels) == 1:
        return labels[0]
    return "{" + ",".join(labels) + "}"


def _term_sort_key(term: RuleTerm, frame: Frame):
    subset = frame.full() if term.target is None else frame.subset(term.target)
    return subset.sort_key


def _render_rule(rule: HeuristicRule, source: Frame | None, target: Frame | None) -> str:
    if source is not None and not rule.is_singleton:
        antecedent = "{" + ",".join(source.subset(rule.antecedent).labels) + "}"
    else:
        antecedent = rule.antecedent_text()
    terms = list(rule.terms)
    if target is not None:
        terms.sort(key=lambda t: _term_sort_key(t, target))
    total = rule.strength_total()
    values = _quantize_row(
        [t.strength for t in terms], abs(total - 1.0) <= STRENGTH_SUM_TOL
    )
    body = ", ".join(
        f"{_target_text(t.target, target)}: {format_mass(v)}"
        for t, v in zip(terms, values)
    )
    return f"{antecedent} -> {body} ;"


def _frame_decl_lines(frame: Frame, done: set[str], lines: list[str]) -> None:
    if frame.name in done:
        return
    if isinstance(frame, ProductFrame):
        for comp in frame.components:
            _frame_decl_lines(comp, done, lines)
        lines.append(
            f"frame {frame.name} = " + " * ".join(c.name for c in frame.components)
        )
    else:
        body = ", ".join(frame.elements)
        lines.append(f"frame {frame.name} = {{ {body} }}")
    done.add(frame.name)


def render_ruleset(rs: RuleSet) -> str:
    """Canonical DSL text; parsing it back yields an equivalent rule set."""
    lines: list[str] = []
    done: set[str] = set()
    source, target = rs.antecedent_frame, rs.conclusion_frame
    for frame in (source, target):
        if frame is not None:
            _frame_decl_lines(frame, done, lines)
    rules = list(rs.rules)
    if source is not None:
        order = {label: i for i, label in enumerate(source.elements)}
        singles = sorted(
            (r for r in rules if r.is_singleton), key=lambda r: order[r.antecedent[0]]
        )
        subsets = sorted(
            (r for r in rules if not r.is_singleton),
            key=lambda r: source.subset(r.antecedent).sort_key,
        )
        rules = singles + subsets
    if rs.name is not None or (source is not None and target is not None):
        name = rs.name or "R"
        src = source.name if source is not None else rs.source_name
        dst = target.name if target is not None else rs.target_name
        lines.append(f"map {name} : {src} -> {dst} {{")
        for rule in rules:
            lines.append("  " + _render_rule(rule, source, target))
        lines.append("}")
    else:
        for rule in rules:
            lines.append(_render_rule(rule, source, target))
    return "\n".join(lines) + "\n"


def mapping_to_ruleset(g: EvidentialMapping) -> RuleSet:
    rules = []
    for label in g.source.elements:
        terms = tuple(
            RuleTerm(None if s.is_full else s.labels, v) for s, v in g.image(label)
        )
        rules.append(HeuristicRule((label,), terms))
    for title, entries in sorted(g.overrides.items(), key=lambda kv: kv[0].sort_key):
        terms = tuple(
            RuleTerm(None if s.is_full else s.labels, v) for s, v in entries
        )
        rules.append(HeuristicRule(title.labels, terms))
    return RuleSet(g.name, g.source.name, g.target.name, g.source, g.target, tuple(rules))


def render_mapping(g: EvidentialMapping) -> str:
    return render_ruleset(mapping_to_ruleset(g))


def render_evidence(frame: Frame, pairs: Iterable[tuple[SubsetRef, float]]) -> str:
    lines = [f"evidence on {frame.name} {{"]
    for subset, value in pairs:
        target = "*" if subset.is_full else _target_text(subset.labels, frame)
        lines.append(f"  {target}: {format_mass(round(value, 9))} ;")
    lines.append("}")
    return "\n".join(lines) + "\n"
