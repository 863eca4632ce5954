"""Line-oriented text formats for institutions, domains, groundings and trajectories.

One declaration per line, ``#`` starts a comment. Parsers collect every
error they can find (recovering at line boundaries) and raise
:class:`SpecFormatError` carrying the full list. Serializers emit a canonical
form, so ``parse(serialize(v)) == v``.

The grammar is described in ``docs/spec-language.md``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Mapping

from .errors import InputError
from .model import (
    BUILTIN_SIGNATURES,
    BUILTIN_VALUE_SETS,
    FALSE,
    NONE,
    ACTIVE,
    USED_OBJECT,
    Cardinality,
    Domain,
    Grounding,
    Institution,
    Issue,
    Norm,
    NormKind,
    Segment,
    Statement,
    StateVarDecl,
    StateVarName,
    Trajectory,
    validate_domain,
    validate_institution,
    validate_trajectory,
)

EXTENSIONS = {".inst": "institution", ".dom": "domain", ".grd": "grounding", ".trj": "trajectory"}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        text = f"{self.span}: {self.message}"
        if self.expected:
            text += f" (expected {' or '.join(self.expected)})"
        return text


class SpecFormatError(ValueError):
    """Raised by the parsers; ``errors`` lists every diagnostic found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("\n".join(map(str, errors)))


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<int>\d+(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z](?:[A-Za-z0-9_]|-(?!>))*)
  | (?P<punct>[()\[\],=:*])
  | (?P<bad>\S)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


class _Fail(Exception):
    def __init__(self, error: ParseError):
        self.error = error


class _Line:
    """Cursor over the tokens of one source line."""

    def __init__(self, file: str, lineno: int, text: str):
        self.file, self.lineno = file, lineno
        self.tokens: list[_Token] = []
        self.pos = 0
        self.end_column = len(text) + 1
        for m in _TOKEN_RE.finditer(text):
            kind = m.lastgroup
            if kind == "ws":
                continue
            if kind == "bad":
                raise _Fail(ParseError(SourceSpan(file, lineno, m.start() + 1),
                                       f"unexpected character {m.group()!r}"))
            self.tokens.append(_Token(kind, m.group(), m.start() + 1))

    def span(self, tok: _Token | None = None) -> SourceSpan:
        if tok is None:
            return SourceSpan(self.file, self.lineno, self.end_column)
        return SourceSpan(self.file, self.lineno, tok.column, len(tok.text))

    def error(self, message: str, tok: _Token | None = None,
              expected: tuple[str, ...] = ()) -> _Fail:
        return _Fail(ParseError(self.span(tok), message, expected))

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def next(self, what: str, kind: str | None = None, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"missing {what}", None, (what,))
        if (kind and tok.kind != kind) or (text and tok.text != text):
            raise self.error(f"expected {what}, found {tok.text!r}", tok, (what,))
        self.pos += 1
        return tok

    def ident(self, what: str = "identifier") -> _Token:
        return self.next(what, "ident")

    def punct(self, text: str) -> _Token:
        return self.next(f"'{text}'", text=text)

    def integer(self, what: str = "integer") -> tuple[int, _Token]:
        tok = self.next(what, "int")
        return int(tok.text), tok

    def idents(self, what: str) -> list[_Token]:
        out = [self.ident(what)]
        while not self.at_end():
            out.append(self.ident(what))
        return out

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r} at end of declaration", tok,
                             ("end of line",))

    def statevar(self) -> tuple[StateVarName, _Token]:
        head = self.ident("state variable name")
        args: list[str] = []
        if (tok := self.peek()) is not None and tok.text == "(":
            self.pos += 1
            args.append(self.ident("argument").text)
            while (tok := self.peek()) is not None and tok.text == ",":
                self.pos += 1
                args.append(self.ident("argument").text)
            self.punct(")")
        return StateVarName(head.text, tuple(args)), head

    def statement(self) -> tuple[Statement, _Token]:
        open_ = self.punct("(")
        s = self.ident("role").text
        self.punct(",")
        p = self.ident("act").text
        self.punct(",")
        o = self.ident("artifact or role").text
        self.punct(")")
        return Statement(s, p, o), open_


def _lines(text: str, file: str, errors: list[ParseError]) -> Iterator[_Line]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            line = _Line(file, lineno, body)
        except _Fail as f:
            errors.append(f.error)
            continue
        yield line


def _run(line: _Line, errors: list[ParseError], fn: Callable[[_Line], None]) -> None:
    try:
        fn(line)
    except _Fail as f:
        errors.append(f.error)


def _missing_header(file: str, kind: str) -> ParseError:
    return ParseError(SourceSpan(file, 1, 1), f"missing {kind} header", (kind,))


def _header(line: _Line, keyword: str) -> str:
    line.next(f"'{keyword}'", "ident", keyword)
    name = line.ident(f"{keyword} name").text
    line.done()
    return name


# institution ---------------------------------------------------------------

_INST_KEYWORDS = ("arts", "roles", "acts", "norm", "card")


def parse_institution(text: str, file: str = "<institution>",
                      signatures: Mapping[str, tuple[int, NormKind]] | None = None
                      ) -> Institution:
    sigs = dict(BUILTIN_SIGNATURES if signatures is None else signatures)
    errors: list[ParseError] = []
    name: str | None = None
    ids: dict[str, dict[str, SourceSpan]] = {k: {} for k in ("arts", "roles", "acts")}
    norms: list[tuple[Norm, list[tuple[Statement, _Line, _Token]]]] = []
    seen_norms: set[Norm] = set()
    cards: dict[str, Cardinality] = {}
    card_spans: dict[str, tuple[_Line, _Token]] = {}

    def declaration(line: _Line) -> None:
        nonlocal name
        kw = line.peek()
        if name is None:
            if kw.text != "institution":
                raise line.error("missing institution header", kw, ("institution",))
            name = _header(line, "institution")
            return
        line.pos += 1
        if kw.text in ids:
            for tok in line.idents(f"{kw.text[:-1]} name"):
                if tok.text in ids[kw.text]:
                    raise line.error(f"duplicate declaration of {tok.text}", tok)
                ids[kw.text][tok.text] = line.span(tok)
        elif kw.text == "norm":
            q = line.ident("qualifier")
            stmts = [line.statement()]
            while not line.at_end():
                stmts.append(line.statement())
            arity, kind = sigs.get(q.text, (None, NormKind.MODAL))
            if arity is not None and arity != len(stmts):
                raise line.error(f"qualifier {q.text} expects arity {arity}, "
                                 f"got {len(stmts)}", q, (f"{arity} statement(s)",))
            norm = Norm(q.text, tuple(s for s, _ in stmts), kind)
            if norm in seen_norms:
                raise line.error(f"duplicate norm {norm}", q)
            seen_norms.add(norm)
            norms.append((norm, [(s, line, tok) for s, tok in stmts]))
        elif kw.text == "card":
            role = line.ident("role")
            lo, lo_tok = line.integer("minimum")
            if (tok := line.peek()) is not None and tok.text == "*":
                line.pos += 1
                hi = None
            else:
                hi, tok = line.integer("maximum or '*'")
            line.done()
            if role.text in cards:
                raise line.error(f"duplicate cardinality for {role.text}", role)
            if hi is not None and lo > hi:
                raise line.error(f"min > max for {role.text} ({lo} > {hi})", lo_tok)
            cards[role.text] = Cardinality(lo, hi)
            card_spans[role.text] = (line, role)
        elif kw.text == "institution":
            raise line.error("duplicate institution header", kw)
        else:
            raise line.error(f"unknown keyword {kw.text!r}", kw, _INST_KEYWORDS)

    for line in _lines(text, file, errors):
        _run(line, errors, declaration)
    if name is None:
        if not any(e.message == "missing institution header" for e in errors):
            errors.insert(0, _missing_header(file, "institution"))
        raise SpecFormatError(errors)

    arts, roles, acts = (set(ids[k]) for k in ("arts", "roles", "acts"))
    for norm, stmts in norms:
        for s, line, tok in stmts:
            if s.subject not in roles:
                errors.append(ParseError(line.span(tok), f"{norm}: undeclared role {s.subject}"))
            if s.predicate not in acts:
                errors.append(ParseError(line.span(tok), f"{norm}: undeclared act {s.predicate}"))
            if s.object not in arts and s.object not in roles:
                errors.append(ParseError(line.span(tok),
                                         f"{norm}: undeclared artifact or role {s.object}"))
    for role, (line, tok) in card_spans.items():
        if role not in roles:
            errors.append(ParseError(line.span(tok), f"card: undeclared role {role}"))
    inst = Institution(name, frozenset(arts), frozenset(roles), frozenset(acts),
                       tuple(n for n, _ in norms), cards)
    if not errors:
        errors.extend(_issues_at(validate_institution(inst, sigs), file))
    if errors:
        raise SpecFormatError(errors)
    return inst


def _issues_at(issues: list[Issue], file: str) -> list[ParseError]:
    return [ParseError(SourceSpan(file, 1, 1), str(i)) for i in issues]


def serialize_institution(inst: Institution) -> str:
    out = [f"institution {inst.name}"]
    for label, ids in (("arts", inst.arts), ("roles", inst.roles), ("acts", inst.acts)):
        if ids:
            out.append(f"{label} {' '.join(sorted(ids))}")
    for norm in inst.norms:
        stmts = " ".join(f"({s.subject}, {s.predicate}, {s.object})" for s in norm.statements)
        out.append(f"norm {norm.qualifier} {stmts}")
    for role, c in sorted(inst.cardinality.items()):
        out.append(f"card {role} {c.min} {'*' if c.max is None else c.max}")
    return "\n".join(out) + "\n"


# domain ---------------------------------------------------------------------

_DOM_KEYWORDS = ("agents", "objects", "behaviors", "afford", "statevar", "concurrent-behaviors")


def parse_domain(text: str, file: str = "<domain>") -> Domain:
    errors: list[ParseError] = []
    name: str | None = None
    ids: dict[str, dict[str, SourceSpan]] = {k: {} for k in ("agents", "objects", "behaviors")}
    affordances: dict[tuple[str, str, str], tuple[_Line, list[_Token]]] = {}
    decls: dict[StateVarName, StateVarDecl] = {}
    concurrent = False

    def declaration(line: _Line) -> None:
        nonlocal name, concurrent
        kw = line.peek()
        if name is None:
            if kw.text != "domain":
                raise line.error("missing domain header", kw, ("domain",))
            name = _header(line, "domain")
            return
        line.pos += 1
        if kw.text in ids:
            for tok in line.idents(f"{kw.text[:-1]} name"):
                if any(tok.text in group for group in ids.values()):
                    raise line.error(f"duplicate declaration of {tok.text}", tok)
                ids[kw.text][tok.text] = line.span(tok)
        elif kw.text == "afford":
            toks = [line.ident("agent"), line.ident("behavior"), line.ident("object or agent")]
            line.done()
            triple = tuple(t.text for t in toks)
            if triple in affordances:
                raise line.error(f"duplicate affordance {' '.join(triple)}", toks[0])
            affordances[triple] = (line, toks)
        elif kw.text == "statevar":
            var, head = line.statevar()
            mode = line.next("'values' or 'type'", "ident")
            values: tuple[str, ...] = ()
            builtin = None
            if mode.text == "values":
                vals = [line.ident("value")]
                while (tok := line.peek()) is not None and tok.text != "default":
                    vals.append(line.ident("value"))
                values = tuple(t.text for t in vals)
                if len(set(values)) != len(values):
                    raise line.error(f"duplicate value in vals({var})", vals[0])
            elif mode.text == "type":
                tok = line.ident("value set type")
                if tok.text not in BUILTIN_VALUE_SETS:
                    raise line.error(f"unknown value set type {tok.text!r}", tok,
                                     BUILTIN_VALUE_SETS)
                builtin = tok.text
            else:
                raise line.error(f"expected 'values' or 'type', found {mode.text!r}", mode,
                                 ("values", "type"))
            default = None
            if not line.at_end():
                line.next("'default'", "ident", "default")
                dtok = line.ident("default value")
                default = dtok.text
                if values and default not in values:
                    raise line.error(f"default {default} not in vals({var})", dtok)
            line.done()
            if var.functor in (ACTIVE, USED_OBJECT):
                raise line.error(f"{var.functor} state variables are implicit", head)
            if var in decls:
                raise line.error(f"duplicate state variable {var}", head)
            decls[var] = StateVarDecl(var, values, builtin, default)
        elif kw.text == "concurrent-behaviors":
            mode = line.ident("'allowed'")
            if mode.text != "allowed":
                raise line.error(f"expected 'allowed', found {mode.text!r}", mode, ("allowed",))
            line.done()
            concurrent = True
        elif kw.text == "domain":
            raise line.error("duplicate domain header", kw)
        else:
            raise line.error(f"unknown keyword {kw.text!r}", kw, _DOM_KEYWORDS)

    for line in _lines(text, file, errors):
        _run(line, errors, declaration)
    if name is None:
        if not any(e.message == "missing domain header" for e in errors):
            errors.insert(0, _missing_header(file, "domain"))
        raise SpecFormatError(errors)

    agents, objects, behaviors = (set(ids[k]) for k in ("agents", "objects", "behaviors"))
    for (a, b, o), (line, toks) in affordances.items():
        if a not in agents:
            errors.append(ParseError(line.span(toks[0]), f"undeclared agent {a}"))
        if b not in behaviors:
            errors.append(ParseError(line.span(toks[1]), f"undeclared behavior {b}"))
        if o not in objects and o not in agents:
            errors.append(ParseError(line.span(toks[2]), f"undeclared object or agent {o}"))
    dom = Domain(name, frozenset(agents), frozenset(objects), frozenset(behaviors),
                 frozenset(affordances), tuple(decls[k] for k in sorted(decls)), concurrent)
    if not errors:
        errors.extend(_issues_at(validate_domain(dom), file))
    if errors:
        raise SpecFormatError(errors)
    return dom


def serialize_domain(dom: Domain) -> str:
    out = [f"domain {dom.name}"]
    for label, ids in (("agents", dom.agents), ("objects", dom.objects),
                       ("behaviors", dom.behaviors)):
        if ids:
            out.append(f"{label} {' '.join(sorted(ids))}")
    if dom.concurrent_behaviors:
        out.append("concurrent-behaviors allowed")
    for a, b, o in sorted(dom.affordances):
        out.append(f"afford {a} {b} {o}")
    for decl in sorted(dom.state_vars, key=lambda d: d.name):
        if decl.builtin is not None:
            text = f"statevar {decl.name} type {decl.builtin}"
        else:
            text = f"statevar {decl.name} values {' '.join(decl.values)}"
        if decl.default is not None:
            text += f" default {decl.default}"
        out.append(text)
    return "\n".join(out) + "\n"


# grounding ------------------------------------------------------------------

_GRD_KEYWORDS = ("grounding", "role", "act", "art")


def parse_grounding(text: str, file: str = "<grounding>") -> Grounding:
    errors: list[ParseError] = []
    name: str | None = None
    roles: dict[str, str] = {}  # agent -> role
    acts: set[tuple[str, str]] = set()
    arts: set[tuple[str, str]] = set()
    seen_any = False

    def declaration(line: _Line) -> None:
        nonlocal name, seen_any
        kw = line.next("declaration", "ident")
        if kw.text == "grounding":
            if name is not None or seen_any:
                raise line.error("grounding header must come first and only once", kw)
            name = line.ident("grounding name").text
            line.done()
            return
        seen_any = True
        if kw.text not in ("role", "act", "art"):
            raise line.error(f"unknown keyword {kw.text!r}", kw, _GRD_KEYWORDS)
        source = line.ident(kw.text)
        line.next("'->'", "arrow")
        targets = line.idents({"role": "agent", "act": "behavior", "art": "object"}[kw.text])
        for tok in targets:
            if kw.text == "role":
                prev = roles.get(tok.text)
                if prev is not None:
                    raise line.error(f"agent {tok.text} already grounded to role {prev}"
                                     if prev != source.text else
                                     f"duplicate grounding role {source.text} -> {tok.text}", tok)
                roles[tok.text] = source.text
            else:
                bucket = acts if kw.text == "act" else arts
                pair = (source.text, tok.text)
                if pair in bucket:
                    raise line.error(f"duplicate grounding {kw.text} {pair[0]} -> {pair[1]}", tok)
                bucket.add(pair)

    for line in _lines(text, file, errors):
        _run(line, errors, declaration)
    if errors:
        raise SpecFormatError(errors)
    return Grounding(frozenset((r, a) for a, r in roles.items()), frozenset(acts),
                     frozenset(arts), name or "G")


def serialize_grounding(g: Grounding) -> str:
    out = [f"grounding {g.name}"]
    out += [f"role {r} -> {a}" for r, a in sorted(g.roles)]
    out += [f"act {x} -> {b}" for x, b in sorted(g.acts)]
    out += [f"art {x} -> {o}" for x, o in sorted(g.arts)]
    return "\n".join(out) + "\n"


# trajectory -----------------------------------------------------------------

def parse_trajectory(text: str, file: str = "<trajectory>", domain: Domain | None = None
                     ) -> Trajectory:
    """Parse a trajectory; with ``domain`` also check names and values."""
    errors: list[ParseError] = []
    horizon: tuple[int, int] | None = None
    timelines: dict[StateVarName, tuple[Segment, ...]] = {}

    def declaration(line: _Line) -> None:
        nonlocal horizon
        kw = line.next("declaration", "ident")
        if horizon is None:
            if kw.text != "horizon":
                raise line.error("missing horizon header", kw, ("horizon",))
            lo, lo_tok = line.integer("horizon start")
            hi, _ = line.integer("horizon end")
            line.done()
            if lo > hi:
                raise line.error(f"empty horizon [{lo},{hi}]", lo_tok)
            horizon = (lo, hi)
            return
        if kw.text == "horizon":
            raise line.error("duplicate horizon header", kw)
        if kw.text != "timeline":
            raise line.error(f"unknown keyword {kw.text!r}", kw, ("timeline",))
        var, head = line.statevar()
        line.punct(":")
        if var in timelines:
            raise line.error(f"duplicate timeline for {var}", head)
        if domain is not None and var not in domain.variables:
            raise line.error(f"undeclared state variable {var}", head)
        segs: list[Segment] = []
        while not line.at_end():
            open_ = line.punct("[")
            a, _ = line.integer("interval start")
            line.punct(",")
            b, _ = line.integer("interval end")
            line.punct("]")
            line.punct("=")
            vtok = line.ident("value")
            if a > b:
                raise line.error(f"empty interval [{a},{b}]", open_)
            if a < horizon[0] or b > horizon[1]:
                raise line.error(f"segment [{a},{b}] outside horizon "
                                 f"[{horizon[0]},{horizon[1]}]", open_)
            if domain is not None and vtok.text not in domain.values_of(var):
                raise line.error(f"value {vtok.text} not in vals({var})", vtok)
            for s in segs:
                if s.start <= b and a <= s.end:
                    raise line.error(f"segment [{a},{b}] overlaps {s}", open_)
            segs.append(Segment(a, b, vtok.text))
        if not segs:
            raise line.error(f"timeline {var} has no segments", head, ("[start,end]=value",))
        timelines[var] = tuple(sorted(segs))

    for line in _lines(text, file, errors):
        _run(line, errors, declaration)
    if horizon is None:
        if not any(e.message == "missing horizon header" for e in errors):
            errors.insert(0, _missing_header(file, "horizon"))
        raise SpecFormatError(errors)
    traj = Trajectory(horizon[0], horizon[1], timelines)
    if domain is not None and not errors:
        errors.extend(_issues_at(validate_trajectory(traj, domain), file))
    if errors:
        raise SpecFormatError(errors)
    return traj


def _default_for(var: StateVarName, domain: Domain | None) -> str | None:
    if domain is not None and var in domain.variables:
        return domain.default_of(var)
    if var.functor == ACTIVE and len(var.args) == 2:
        return FALSE
    if var.functor == USED_OBJECT and len(var.args) == 2:
        return NONE
    return None


def serialize_trajectory(traj: Trajectory, domain: Domain | None = None) -> str:
    """Canonical text; timelines holding only their default value are omitted."""
    out = [f"horizon {traj.start} {traj.end}"]
    for var in sorted(traj.timelines):
        segs = sorted(traj.timelines[var])
        default = _default_for(var, domain)
        if default is not None and all(s.value == default for s in segs):
            continue
        out.append(f"timeline {var}: " + " ".join(map(str, segs)))
    return "\n".join(out) + "\n"


# files ----------------------------------------------------------------------

PARSERS: dict[str, Callable[..., object]] = {
    "institution": parse_institution,
    "domain": parse_domain,
    "grounding": parse_grounding,
    "trajectory": parse_trajectory,
}


def kind_of(path: str | Path) -> str:
    suffix = Path(path).suffix
    if suffix not in EXTENSIONS:
        raise InputError(f"unknown file extension {suffix!r} (expected one of "
                         f"{', '.join(sorted(EXTENSIONS))})")
    return EXTENSIONS[suffix]


def load(path: str | Path, **kwargs) -> object:
    """Parse a file, choosing the parser from its extension."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return PARSERS[kind_of(path)](text, str(path), **kwargs)


def load_institution(path: str | Path, **kwargs) -> Institution:
    return parse_institution(Path(path).read_text(encoding="utf-8"), str(path), **kwargs)


def load_domain(path: str | Path) -> Domain:
    return parse_domain(Path(path).read_text(encoding="utf-8"), str(path))


def load_grounding(path: str | Path) -> Grounding:
    return parse_grounding(Path(path).read_text(encoding="utf-8"), str(path))


def load_trajectory(path: str | Path, domain: Domain | None = None) -> Trajectory:
    return parse_trajectory(Path(path).read_text(encoding="utf-8"), str(path), domain)


def serialize(value: object, domain: Domain | None = None) -> str:
    if isinstance(value, Institution):
        return serialize_institution(value)
    if isinstance(value, Domain):
        return serialize_domain(value)
    if isinstance(value, Grounding):
        return serialize_grounding(value)
    if isinstance(value, Trajectory):
        return serialize_trajectory(value, domain)
    raise TypeError(f"cannot serialize {type(value).__name__}")
