"""Lexicon description language: parser, structure builder, serializer.

Statement forms, each terminated by ``.``:

  type NAME < PARENT, PARENT = CHILD | CHILD .   (either clause optional)
  approp NAME { feat: value-type, ... } .
  constraint NAME tier? := EXPR .
  sense NAME := EXPR .
  frame NAME := EXPR .
  pragma WORD ... .

An EXPR is a ``&``-conjunction of named constraint references and AVM
literals ``[type? feat: value, ...]``.  Values are nested AVMs, quoted
string atoms, bare type names, or ``#n`` tags; a tag's first occurrence
binds the node (optionally wrapping a value), later occurrences are bare
references to it.  ``+``/``-`` in value position abbreviate voice-plus /
voice-minus.  Comments run from ``;`` to end of line.

Conjunction is evaluated as one merge: every term constrains the same
root node, so tags shared between terms denote the same node.  Node types
are never inferred upward from features; a feature not licensed by the
type expected at its position is a positioned error, and authors must
annotate (e.g. ``[dir-obj: [noun-phrase head: ...]]``) when a slot's
declared type is more general than the structure they are writing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .fs import FeatureStructure, UnificationFailure
from .lattice import TypeLattice

TIERS = ("verb", "morph", "cooccur", "lexical", "semantic")

_VOICE_ALIASES = {"+": "voice-plus", "-": "voice-minus"}


class DslError(Exception):
    """Positioned lexicon-language error: ``source:line:col: message``."""

    def __init__(self, message: str, source: str = "<input>", line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.col}: {self.message}"


class DslSyntaxError(DslError):
    pass


class DslNameError(DslError):
    """Unknown or duplicate names; tag misuse."""


class DslTypeError(DslError):
    """Type annotation or value incompatible with its position."""


# -- tokens -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>;[^\n]*)
    | (?P<assign>:=)
    | (?P<tag>\#[0-9]+)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<badstring>"(?:[^"\\\n]|\\.)*\n?)
    | (?P<ident>[A-Za-z0-9*+-]+)
    | (?P<punct>[.,:|<=&\[\]{}])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "string" | "tag" | punct text | "eof"
    text: str
    line: int
    col: int


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _scan(text: str, source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    bol = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(
                f"unexpected character {text[pos]!r}", source, line, pos - bol + 1
            )
        kind = m.lastgroup
        tok = m.group()
        col = pos - bol + 1
        if kind == "badstring":
            raise DslSyntaxError("unterminated string literal", source, line, col)
        if kind == "ws" or kind == "comment":
            pass
        elif kind == "assign":
            tokens.append(Token(":=", tok, line, col))
        elif kind == "punct":
            tokens.append(Token(tok, tok, line, col))
        elif kind == "string":
            tokens.append(Token("string", _unquote(tok), line, col))
        elif kind == "tag":
            tokens.append(Token("tag", tok[1:], line, col))
        else:
            tokens.append(Token("ident", tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            bol = pos + tok.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, n - bol + 1))
    return tokens


# -- syntax tree ----------------------------------------------------------------


@dataclass(frozen=True)
class Pos:
    source: str
    line: int
    col: int


@dataclass(frozen=True)
class Avm:
    type_name: str | None
    pairs: tuple[tuple[str, "Value", Pos], ...]
    pos: Pos


@dataclass(frozen=True)
class AtomLit:
    text: str
    pos: Pos


@dataclass(frozen=True)
class LeafLit:
    type_name: str
    pos: Pos


@dataclass(frozen=True)
class TagValue:
    number: int
    value: "Value | None"
    pos: Pos


Value = Avm | AtomLit | LeafLit | TagValue


@dataclass(frozen=True)
class Ref:
    name: str
    pos: Pos


Term = Ref | Avm


@dataclass(frozen=True)
class Expr:
    terms: tuple[Term, ...]
    pos: Pos


@dataclass(frozen=True)
class TypeDecl:
    name: str
    parents: tuple[str, ...]
    children: tuple[str, ...]
    pos: Pos


@dataclass(frozen=True)
class AppropDecl:
    type_name: str
    feats: tuple[tuple[str, str, Pos], ...]
    pos: Pos


@dataclass(frozen=True)
class ConstraintDecl:
    name: str
    tier: str | None
    body: Expr
    pos: Pos


@dataclass(frozen=True)
class SenseDecl:
    name: str
    body: Expr
    pos: Pos


@dataclass(frozen=True)
class FrameDecl:
    name: str
    body: Expr
    pos: Pos


@dataclass(frozen=True)
class PragmaDecl:
    words: tuple[str, ...]
    pos: Pos


Statement = TypeDecl | AppropDecl | ConstraintDecl | SenseDecl | FrameDecl | PragmaDecl


# -- parser -----------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.toks = tokens
        self.i = 0
        self.source = source

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def pos(self, tok: Token) -> Pos:
        return Pos(self.source, tok.line, tok.col)

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise DslSyntaxError(message, self.source, tok.line, tok.col)

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.next()

    def ident(self, what: str) -> Token:
        return self.expect("ident", what)

    # statements

    def statements(self) -> list[Statement]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
        return out

    def statement(self) -> Statement:
        head = self.ident("a statement keyword")
        if head.text == "type":
            return self.type_decl(head)
        if head.text == "approp":
            return self.approp_decl(head)
        if head.text == "constraint":
            return self.named_body(head, "constraint")
        if head.text == "sense":
            return self.named_body(head, "sense")
        if head.text == "frame":
            return self.named_body(head, "frame")
        if head.text == "pragma":
            return self.pragma_decl(head)
        self.fail(
            f"unknown statement keyword {head.text!r} "
            "(expected type, approp, constraint, sense, frame, or pragma)",
            head,
        )

    def type_decl(self, head: Token) -> TypeDecl:
        name = self.ident("a type name").text
        parents: list[str] = []
        children: list[str] = []
        if self.peek().kind == "<":
            self.next()
            parents.append(self.ident("a parent type name").text)
            while self.peek().kind == ",":
                self.next()
                parents.append(self.ident("a parent type name").text)
        if self.peek().kind == "=":
            self.next()
            children.append(self.ident("a subtype name").text)
            while self.peek().kind == "|":
                self.next()
                children.append(self.ident("a subtype name").text)
        if not parents and not children:
            self.fail("a type statement needs a '<' parent clause or an '=' subtype list")
        self.expect(".", "'.'")
        return TypeDecl(name, tuple(parents), tuple(children), self.pos(head))

    def approp_decl(self, head: Token) -> AppropDecl:
        name = self.ident("a type name").text
        self.expect("{", "'{'")
        feats = []
        if self.peek().kind != "}":
            while True:
                f = self.ident("a feature name")
                self.expect(":", "':'")
                v = self.ident("a value type name")
                feats.append((f.text, v.text, self.pos(f)))
                if self.peek().kind != ",":
                    break
                self.next()
        self.expect("}", "'}'")
        self.expect(".", "'.'")
        return AppropDecl(name, tuple(feats), self.pos(head))

    def named_body(self, head: Token, which: str) -> Statement:
        name = self.ident(f"a {which} name").text
        tier = None
        if which == "constraint" and self.peek().kind == "ident":
            t = self.next()
            if t.text not in TIERS:
                self.fail(f"unknown tier {t.text!r} (expected one of {', '.join(TIERS)})", t)
            tier = t.text
        self.expect(":=", "':='")
        body = self.expr()
        self.expect(".", "'.'")
        if which == "constraint":
            return ConstraintDecl(name, tier, body, self.pos(head))
        if which == "sense":
            return SenseDecl(name, body, self.pos(head))
        return FrameDecl(name, body, self.pos(head))

    def pragma_decl(self, head: Token) -> PragmaDecl:
        words = []
        while self.peek().kind in ("ident", "string"):
            words.append(self.next().text)
        self.expect(".", "'.'")
        if not words:
            self.fail("empty pragma", head)
        return PragmaDecl(tuple(words), self.pos(head))

    # expressions

    def expr(self) -> Expr:
        first = self.peek()
        terms = [self.term()]
        while self.peek().kind == "&":
            self.next()
            terms.append(self.term())
        return Expr(tuple(terms), self.pos(first))

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "[":
            return self.avm()
        if t.kind == "ident":
            self.next()
            return Ref(t.text, self.pos(t))
        self.fail("expected a constraint name or an AVM '['")

    def avm(self) -> Avm:
        lb = self.expect("[", "'['")
        type_name = None
        if self.peek().kind == "ident" and self.peek(1).kind != ":":
            type_name = self.next().text
        pairs = []
        if self.peek().kind not in ("]",):
            while True:
                f = self.ident("a feature name")
                self.expect(":", "':'")
                v = self.value()
                pairs.append((f.text, v, self.pos(f)))
                if self.peek().kind != ",":
                    break
                self.next()
        self.expect("]", "']'")
        return Avm(type_name, tuple(pairs), self.pos(lb))

    def value(self) -> Value:
        t = self.peek()
        if t.kind == "[":
            return self.avm()
        if t.kind == "string":
            self.next()
            return AtomLit(t.text, self.pos(t))
        if t.kind == "tag":
            self.next()
            inner = None
            if self.peek().kind in ("[", "string", "ident"):
                inner = self.value()
            return TagValue(int(t.text), inner, self.pos(t))
        if t.kind == "ident":
            self.next()
            return LeafLit(t.text, self.pos(t))
        self.fail("expected a value (AVM, type name, quoted atom, or #tag)")


def parse_lexicon(text: str, source: str = "<lexicon>") -> list[Statement]:
    """Parse lexicon-language statements; raises DslSyntaxError with position."""
    return _Parser(_scan(text, source), source).statements()


# -- structure building --------------------------------------------------------------


class _Builder:
    """Evaluates one expression into a raw node graph over a lattice."""

    def __init__(self, lattice: TypeLattice, env: Mapping[str, FeatureStructure]):
        self.lat = lattice
        self.env = env
        self.types: list[int] = []
        self.arcs: list[list[tuple[int, int]]] = []
        self.pairs: list[tuple[int, int]] = []
        self.tags: dict[int, int] = {}

    def new_node(self, tid: int) -> int:
        self.types.append(tid)
        self.arcs.append([])
        return len(self.types) - 1

    def type_id(self, name: str, pos: Pos) -> int:
        if self.lat.has_type(name):
            return self.lat.type_id(name)
        alias = _VOICE_ALIASES.get(name)
        if alias and self.lat.has_type(alias):
            return self.lat.type_id(alias)
        raise DslNameError(f"unknown type {name!r}", pos.source, pos.line, pos.col)

    def root_candidates(self, expr: Expr) -> list[tuple[int, Pos]]:
        out = []
        for term in expr.terms:
            if isinstance(term, Ref):
                fs = self.env.get(term.name)
                if fs is None:
                    raise DslNameError(
                        f"reference to undeclared constraint {term.name!r}",
                        term.pos.source,
                        term.pos.line,
                        term.pos.col,
                    )
                out.append((fs.types[0], term.pos))
            elif term.type_name is not None:
                out.append((self.type_id(term.type_name, term.pos), term.pos))
        return out

    def build(self, expr: Expr, default_root: str) -> tuple[int, int]:
        """Returns (root index, root type id)."""
        cands = self.root_candidates(expr)
        if cands:
            root_t, first_pos = cands[0]
            for t, pos in cands[1:]:
                g = self.lat.glb(root_t, t)
                if g is None:
                    raise DslTypeError(
                        f"term root type {self.lat.type_name(t)!r} is incompatible with "
                        f"{self.lat.type_name(root_t)!r} from an earlier term",
                        pos.source,
                        pos.line,
                        pos.col,
                    )
                root_t = g
        else:
            root_t = self.lat.type_id(default_root)
        root = self.new_node(root_t)
        for term in expr.terms:
            if isinstance(term, Ref):
                self.pairs.append((root, self.inline(self.env[term.name])))
            else:
                self.pairs.append((root, self.avm_node(term, root_t)))
        return root, root_t

    def inline(self, fs: FeatureStructure) -> int:
        off = len(self.types)
        self.types.extend(fs.types)
        for i in range(fs.node_count):
            self.arcs.append([(f, d + off) for f, d in fs.arcs(i)])
        return off

    def avm_node(self, avm: Avm, expected: int | None) -> int:
        if avm.type_name is not None:
            t = self.type_id(avm.type_name, avm.pos)
            if expected is not None:
                g = self.lat.glb(t, expected)
                if g is None:
                    raise DslTypeError(
                        f"declared type {self.lat.type_name(t)!r} is incompatible with "
                        f"{self.lat.type_name(expected)!r} expected here",
                        avm.pos.source,
                        avm.pos.line,
                        avm.pos.col,
                    )
                t = g
        elif expected is not None:
            t = expected
        else:
            raise DslTypeError(
                "cannot infer a type for this AVM; annotate it",
                avm.pos.source,
                avm.pos.line,
                avm.pos.col,
            )
        idx = self.new_node(t)
        seen: set[int] = set()
        for fname, value, pos in avm.pairs:
            if not self.lat.has_feature(fname):
                raise DslNameError(
                    f"feature {fname!r} is not declared by any appropriateness",
                    pos.source,
                    pos.line,
                    pos.col,
                )
            fid = self.lat.feature_id(fname)
            if fid in seen:
                raise DslNameError(
                    f"feature {fname!r} repeated in one AVM", pos.source, pos.line, pos.col
                )
            seen.add(fid)
            want = self.lat.approp(t, fid)
            if want is None:
                raise DslTypeError(
                    f"feature {fname!r} is not appropriate for type "
                    f"{self.lat.type_name(t)!r}; annotate the AVM with a subtype that "
                    "licenses it",
                    pos.source,
                    pos.line,
                    pos.col,
                )
            self.arcs[idx].append((fid, self.value_node(value, want)))
        return idx

    def value_node(self, value: Value, expected: int) -> int:
        if isinstance(value, Avm):
            return self.avm_node(value, expected)
        if isinstance(value, AtomLit):
            aid = self.lat.intern_atom(value.text)
            if not self.lat.subtype(aid, expected):
                raise DslTypeError(
                    f'atom "{value.text}" cannot satisfy expected type '
                    f"{self.lat.type_name(expected)!r}",
                    value.pos.source,
                    value.pos.line,
                    value.pos.col,
                )
            return self.new_node(aid)
        if isinstance(value, LeafLit):
            t = self.type_id(value.type_name, value.pos)
            g = self.lat.glb(t, expected)
            if g is None:
                raise DslTypeError(
                    f"type {self.lat.type_name(t)!r} cannot satisfy expected type "
                    f"{self.lat.type_name(expected)!r}",
                    value.pos.source,
                    value.pos.line,
                    value.pos.col,
                )
            return self.new_node(g)
        # TagValue: first occurrence binds (optionally with a payload), later
        # occurrences are bare references; rebinding is an error.
        if value.number in self.tags:
            if value.value is not None:
                raise DslNameError(
                    f"tag #{value.number} is already bound; later occurrences must be bare",
                    value.pos.source,
                    value.pos.line,
                    value.pos.col,
                )
            return self.tags[value.number]
        idx = (
            self.new_node(expected)
            if value.value is None
            else self.value_node(value.value, expected)
        )
        self.tags[value.number] = idx
        return idx


def build_structure(
    expr: Expr,
    lattice: TypeLattice,
    env: Mapping[str, FeatureStructure],
    default_root: str = "case-frame",
) -> FeatureStructure | UnificationFailure:
    """Evaluate a conjunction to a canonical structure (or a merge failure).

    ``env`` supplies compiled structures for named references.  Authoring
    errors (unknown names, unlicensed features, impossible annotations)
    raise DslError; a failure of the final merge, e.g. a sense whose terms
    contradict each other, is returned as the UnificationFailure value.
    """
    b = _Builder(lattice, env)
    root, _ = b.build(expr, default_root)
    return FeatureStructure.build(lattice, b.types, b.arcs, root, b.pairs, check=True)


# -- serialization ----------------------------------------------------------------------


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def serialize_frame(fs: FeatureStructure) -> str:
    """Canonical text for a structure; stable input for ``parse_frame``.

    Features print in name order (the storage order), nested values are
    indented two spaces, and every node with several incoming arcs gets a
    ``#n`` tag at its first visit with bare ``#n`` references afterwards.
    """
    indeg = [0] * fs.node_count
    for i in range(fs.node_count):
        for _, d in fs.arcs(i):
            indeg[d] += 1
    shared = {i for i in range(fs.node_count) if indeg[i] > 1}
    tags: dict[int, int] = {}
    lat = fs.lattice

    def visit(idx: int, depth: int) -> str:
        prefix = ""
        if idx in shared:
            if idx in tags:
                return f"#{tags[idx]}"
            tags[idx] = len(tags) + 1
            prefix = f"#{tags[idx]} "
        t = fs.types[idx]
        if lat.is_atom(t):
            return f'{prefix}"{_escape(lat.atom_text(t))}"'
        arcs = list(fs.arcs(idx))
        if not arcs:
            # a bare name at the top level would read back as a constraint
            # reference, so the root always keeps its brackets
            if idx == 0:
                return f"{prefix}[{lat.type_name(t)}]"
            return prefix + lat.type_name(t)
        pad = "  " * (depth + 1)
        body = ",\n".join(
            f"{pad}{lat.feature_name(f)}: {visit(d, depth + 1)}" for f, d in arcs
        )
        return f"{prefix}[{lat.type_name(t)}\n{body}]"

    return visit(0, 0)


def parse_frame(text: str, lexicon, source: str = "<frame>") -> FeatureStructure:
    """Parse one frame: either ``frame NAME := EXPR.`` or a bare expression.

    ``lexicon`` supplies the lattice and the named-constraint environment.
    Raises DslError on syntax or authoring problems and on a frame whose
    terms do not unify.
    """
    toks = _scan(text, source)
    p = _Parser(toks, source)
    if p.peek().kind == "ident" and p.peek().text == "frame" and p.peek(1).kind == "ident":
        head = p.next()
        _name = p.ident("a frame name").text
        p.expect(":=", "':='")
        expr = p.expr()
        p.expect(".", "'.'")
    else:
        head = p.peek()
        expr = p.expr()
        if p.peek().kind == ".":
            p.next()
    if p.peek().kind != "eof":
        p.fail("trailing input after the frame")
    built = build_structure(expr, lexicon.lattice, lexicon.constraints, "case-frame")
    if isinstance(built, UnificationFailure):
        raise DslTypeError(
            f"frame terms do not unify: {built}", source, head.line, head.col
        )
    return built
