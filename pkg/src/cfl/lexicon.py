"""Lexicon compilation: statements in, typed constraint inventory out.

A compiled lexicon holds one shared lattice, every named constraint as a
canonical structure, and each verb sense as the unification of the
well-formed case-frame skeleton with the sense's constraint terms.  The
skeleton expands the schema one level (verb, args, sem) so that sense
structures always expose the three regions even when no term mentions
one of them.

Compilation aggregates problems instead of stopping at the first: an
unsatisfiable sense, a rebound name, or a lattice defect each contribute
a diagnostic, and ``CompileError`` carries the whole list.

Argument-slot and semantic-role inventories are fixed by the schema
types, not by this module: whatever the prelude (or a replacement
loaded with the no-prelude switch) declares appropriate for the
``arg-slots`` and ``sem-frame`` types is what frames can carry.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

from . import dsl
from .dsl import (
    AppropDecl,
    ConstraintDecl,
    DslError,
    Expr,
    FrameDecl,
    PragmaDecl,
    SenseDecl,
    Statement,
    TypeDecl,
)
from .fs import FeatureStructure, UnificationFailure, unify
from .lattice import Diagnostic, LatticeError, TypeLattice

ARG_SLOTS = (
    "subject",
    "dir-obj",
    "abl-obl",
    "dat-obl",
    "loc-obl",
    "benef",
    "inst",
    "value-obj",
    "agn-obj",
)
SEM_ROLES = (
    "agent",
    "experiencer",
    "theme",
    "patient",
    "source",
    "goal",
    "beneficiary",
    "instrument",
    "causer",
)

RULE_NAMES = ("strip-passive", "strip-causative", "strip-reflexive")

PRELUDE_ENV = "CFL_PRELUDE"


class CompileError(Exception):
    """Aggregated lexicon problems; ``diagnostics`` lists every finding."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__(
            f"{len(self.diagnostics)} problem(s):\n"
            + "\n".join(str(d) for d in self.diagnostics)
        )


class SchemaError(LatticeError):
    pass


@dataclass(frozen=True)
class CaseFrameSchema:
    """Resolved ids for the case-frame geometry a lexicon builds on."""

    case_frame: int
    wf_case_frame: int
    noun_phrase: int
    nil: int
    sem_frame: int
    voice_plus: int
    voice_minus: int
    voice_nil: int
    f_verb: int
    f_args: int
    f_sem: int
    f_rel: int
    f_passive: int
    f_caus: int
    f_rflx: int
    slots: dict[str, int]
    roles: dict[str, int]

    @classmethod
    def from_lattice(cls, lat: TypeLattice) -> "CaseFrameSchema":
        missing = []

        def t(name: str) -> int:
            if lat.has_type(name):
                return lat.type_id(name)
            missing.append(f"type {name!r}")
            return -1

        def f(name: str) -> int:
            if lat.has_feature(name):
                return lat.feature_id(name)
            missing.append(f"feature {name!r}")
            return -1

        schema = cls(
            case_frame=t("case-frame"),
            wf_case_frame=t("wf-case-frame"),
            noun_phrase=t("noun-phrase"),
            nil=t("nil"),
            sem_frame=t("sem-frame"),
            voice_plus=t("voice-plus"),
            voice_minus=t("voice-minus"),
            voice_nil=t("voice-nil"),
            f_verb=f("verb"),
            f_args=f("args"),
            f_sem=f("sem"),
            f_rel=f("rel"),
            f_passive=f("passive"),
            f_caus=f("caus"),
            f_rflx=f("rflx"),
            slots={s: lat.feature_id(s) for s in ARG_SLOTS if lat.has_feature(s)},
            roles={r: lat.feature_id(r) for r in SEM_ROLES if lat.has_feature(r)},
        )
        if missing:
            raise SchemaError(
                "lexicon does not declare the case-frame schema: missing "
                + ", ".join(missing)
            )
        return schema


@dataclass(frozen=True)
class SenseTerm:
    """One conjunct of a sense: a named constraint or an inline structure."""

    label: str | None
    tier: str | None
    structure: FeatureStructure


@dataclass(frozen=True)
class SenseEntry:
    sense_id: str
    index: int
    compiled: FeatureStructure
    rel_type: int
    terms: tuple[SenseTerm, ...]


@dataclass(frozen=True)
class LexiconConfig:
    max_embed_depth: int = 8
    disabled_rules: frozenset[str] = frozenset()


@dataclass
class CompiledLexicon:
    lattice: TypeLattice
    schema: CaseFrameSchema | None
    skeleton: FeatureStructure | None
    constraints: dict[str, FeatureStructure]
    constraint_tiers: dict[str, str | None]
    senses: list[SenseEntry]
    frames: dict[str, FeatureStructure]
    config: LexiconConfig
    sources: tuple[str, ...] = ()

    def sense(self, sense_id: str) -> SenseEntry:
        for s in self.senses:
            if s.sense_id == sense_id:
                return s
        raise KeyError(sense_id)


class _LazyEnv(Mapping):
    """Constraint environment with on-demand evaluation.

    Statement order inside a file is free: a constraint may reference one
    declared later.  Circular references are reported at the point of use.
    """

    def __init__(self, lattice: TypeLattice, decls: dict[str, ConstraintDecl]):
        self.lattice = lattice
        self.decls = decls
        self.done: dict[str, FeatureStructure] = {}
        self.in_progress: set[str] = set()

    def __getitem__(self, name: str) -> FeatureStructure:
        got = self.get(name)
        if got is None:
            raise KeyError(name)
        return got

    def get(self, name: str, default=None):
        if name in self.done:
            return self.done[name]
        decl = self.decls.get(name)
        if decl is None:
            return default
        if name in self.in_progress:
            raise DslError(
                f"circular constraint reference through {name!r}",
                decl.pos.source,
                decl.pos.line,
                decl.pos.col,
            )
        self.in_progress.add(name)
        try:
            built = dsl.build_structure(decl.body, self.lattice, self)
            if isinstance(built, UnificationFailure):
                raise DslError(
                    f"constraint {name!r} is self-contradictory: {built}",
                    decl.pos.source,
                    decl.pos.line,
                    decl.pos.col,
                )
            self.done[name] = built
        finally:
            self.in_progress.discard(name)
        return self.done[name]

    def __iter__(self):
        return iter(self.decls)

    def __len__(self):
        return len(self.decls)


def _build_skeleton(lat: TypeLattice, schema: CaseFrameSchema) -> FeatureStructure:
    """Well-formed case frame: root plus one typed node per top-level region."""
    types = [schema.wf_case_frame]
    arcs: list[list[tuple[int, int]]] = [[]]
    for fid, want in sorted(lat.effective_approp(schema.wf_case_frame).items()):
        arcs[0].append((fid, len(types)))
        types.append(want)
        arcs.append([])
    built = FeatureStructure.build(lat, types, arcs)
    assert isinstance(built, FeatureStructure)
    return built


def compile_lexicon(statements: Sequence[Statement]) -> CompiledLexicon:
    """Compile parsed statements; raises CompileError with every finding."""
    diags: list[Diagnostic] = []

    type_parents: dict[str, set[str]] = {}
    approp: dict[str, dict[str, str]] = {}
    constraint_decls: dict[str, ConstraintDecl] = {}
    sense_decls: list[SenseDecl] = []
    frame_decls: list[FrameDecl] = []
    pragmas: list[PragmaDecl] = []
    heads_seen: set[str] = set()

    def dup(kind: str, name: str, pos) -> None:
        diags.append(
            Diagnostic(
                "duplicate-name",
                f"{pos.source}:{pos.line}:{pos.col}: {kind} {name!r} is already declared",
                (name,),
            )
        )

    for st in statements:
        if isinstance(st, TypeDecl):
            if st.name in heads_seen:
                dup("type", st.name, st.pos)
                continue
            heads_seen.add(st.name)
            type_parents.setdefault(st.name, set()).update(st.parents)
            for child in st.children:
                type_parents.setdefault(child, set()).add(st.name)
        elif isinstance(st, AppropDecl):
            row = approp.setdefault(st.type_name, {})
            for fname, vname, pos in st.feats:
                if fname in row:
                    dup(f"appropriateness for {st.type_name!r}, feature", fname, pos)
                else:
                    row[fname] = vname
        elif isinstance(st, ConstraintDecl):
            if st.name in constraint_decls:
                dup("constraint", st.name, st.pos)
            else:
                constraint_decls[st.name] = st
        elif isinstance(st, SenseDecl):
            sense_decls.append(st)
        elif isinstance(st, FrameDecl):
            frame_decls.append(st)
        elif isinstance(st, PragmaDecl):
            pragmas.append(st)

    try:
        lattice = TypeLattice(type_parents, approp)
    except LatticeError as exc:
        raise CompileError(diags + [Diagnostic("lattice", str(exc))]) from exc
    lattice_diags = lattice.validate()
    diags.extend(lattice_diags)
    if lattice_diags:
        raise CompileError(diags)

    schema: CaseFrameSchema | None = None
    skeleton: FeatureStructure | None = None
    if lattice.has_type("case-frame"):
        try:
            schema = CaseFrameSchema.from_lattice(lattice)
            skeleton = _build_skeleton(lattice, schema)
        except SchemaError as exc:
            diags.append(Diagnostic("schema", str(exc)))

    env = _LazyEnv(lattice, constraint_decls)
    constraints: dict[str, FeatureStructure] = {}
    tiers: dict[str, str | None] = {}
    for name, decl in constraint_decls.items():
        try:
            constraints[name] = env[name]
            tiers[name] = decl.tier
        except DslError as exc:
            diags.append(Diagnostic("constraint", str(exc), (name,)))

    senses: list[SenseEntry] = []
    sense_names: set[str] = set()
    for decl in sense_decls:
        name = decl.name
        if name in sense_names or name in constraint_decls:
            dup("sense", name, decl.pos)
            continue
        sense_names.add(name)
        if schema is None or skeleton is None:
            diags.append(
                Diagnostic(
                    "sense",
                    f"sense {name!r} needs the case-frame schema, which this "
                    "lexicon does not declare",
                    (name,),
                )
            )
            continue
        entry = _compile_sense(decl, len(senses), lattice, schema, skeleton, env, diags)
        if entry is not None:
            senses.append(entry)

    frames: dict[str, FeatureStructure] = {}
    for decl in frame_decls:
        if decl.name in frames:
            dup("frame", decl.name, decl.pos)
            continue
        try:
            built = dsl.build_structure(decl.body, lattice, env)
        except DslError as exc:
            diags.append(Diagnostic("frame", str(exc), (decl.name,)))
            continue
        if isinstance(built, UnificationFailure):
            diags.append(
                Diagnostic(
                    "frame",
                    f"frame {decl.name!r} does not unify: {built}",
                    (decl.name,),
                )
            )
            continue
        frames[decl.name] = built

    config = _read_pragmas(pragmas, diags)

    if diags:
        raise CompileError(diags)
    return CompiledLexicon(
        lattice=lattice,
        schema=schema,
        skeleton=skeleton,
        constraints=constraints,
        constraint_tiers=tiers,
        senses=senses,
        frames=frames,
        config=config,
    )


def _compile_sense(
    decl: SenseDecl,
    index: int,
    lattice: TypeLattice,
    schema: CaseFrameSchema,
    skeleton: FeatureStructure,
    env: _LazyEnv,
    diags: list[Diagnostic],
) -> SenseEntry | None:
    name = decl.name
    try:
        body = dsl.build_structure(decl.body, lattice, env)
        terms = _sense_terms(decl.body, lattice, env)
    except DslError as exc:
        diags.append(Diagnostic("sense", str(exc), (name,)))
        return None
    if isinstance(body, UnificationFailure):
        diags.append(
            Diagnostic(
                "unsatisfiable-sense",
                f"sense {name!r}: terms are jointly unsatisfiable: {body}"
                + _blame(skeleton, terms),
                (name,),
            )
        )
        return None
    compiled = unify(skeleton, body)
    if isinstance(compiled, UnificationFailure):
        diags.append(
            Diagnostic(
                "unsatisfiable-sense",
                f"sense {name!r}: terms do not fit a well-formed case frame: "
                f"{compiled}" + _blame(skeleton, terms),
                (name,),
            )
        )
        return None
    rel = compiled.resolve_node(("sem", "rel"))
    if rel is None:
        diags.append(
            Diagnostic(
                "uninstantiated-relation",
                f"sense {name!r} does not instantiate SEM.REL",
                (name,),
            )
        )
        return None
    rel_type = compiled.types[rel]
    if lattice.has_type("*top-rel*") and rel_type == lattice.type_id("*top-rel*"):
        diags.append(
            Diagnostic(
                "uninstantiated-relation",
                f"sense {name!r} leaves SEM.REL at the top relation type",
                (name,),
            )
        )
        return None
    return SenseEntry(name, index, compiled, rel_type, tuple(terms))


def _sense_terms(expr: Expr, lattice: TypeLattice, env: _LazyEnv) -> list[SenseTerm]:
    """Per-term structures for failure attribution.

    A named reference keeps its declared tier; an inline AVM term has no
    tier and ranks after tagged terms during diagnosis.  Tags shared
    between two inline terms of one sense are not visible here (each term
    is rebuilt standalone), so a failure caused only by such a
    coindexation is attributed to the conjunction as a whole.
    """
    out = []
    for term in expr.terms:
        if isinstance(term, dsl.Ref):
            fs = env[term.name]
            decl = env.decls[term.name]
            out.append(SenseTerm(term.name, decl.tier, fs))
        else:
            built = dsl.build_structure(Expr((term,), term.pos), lattice, env)
            if isinstance(built, UnificationFailure):
                raise DslError(
                    f"inline term does not unify: {built}",
                    term.pos.source,
                    term.pos.line,
                    term.pos.col,
                )
            out.append(SenseTerm(None, None, built))
    return out


def _blame(skeleton: FeatureStructure, terms: list[SenseTerm]) -> str:
    """Name the first term whose addition breaks the fold, if any does."""
    acc: FeatureStructure = skeleton
    for k, term in enumerate(terms):
        nxt = unify(acc, term.structure)
        if isinstance(nxt, UnificationFailure):
            label = term.label or f"inline term {k + 1}"
            return f" (first failing term: {label})"
        acc = nxt
    return ""


def _read_pragmas(pragmas: list[PragmaDecl], diags: list[Diagnostic]) -> LexiconConfig:
    depth = 8
    disabled: set[str] = set()
    for p in pragmas:
        words = p.words
        where = f"{p.pos.source}:{p.pos.line}:{p.pos.col}"
        if words[0] == "no-rule":
            if len(words) == 2 and words[1] in RULE_NAMES:
                disabled.add(words[1])
            else:
                diags.append(
                    Diagnostic(
                        "pragma",
                        f"{where}: no-rule expects one of {', '.join(RULE_NAMES)}",
                    )
                )
        elif words[0] == "max-embed-depth":
            if len(words) == 2 and words[1].isdigit() and int(words[1]) > 0:
                depth = int(words[1])
            else:
                diags.append(
                    Diagnostic(
                        "pragma",
                        f"{where}: max-embed-depth expects a positive integer",
                    )
                )
        else:
            diags.append(Diagnostic("pragma", f"{where}: unknown pragma {words[0]!r}"))
    return LexiconConfig(max_embed_depth=depth, disabled_rules=frozenset(disabled))


def prelude_path() -> str:
    """Packaged prelude, unless CFL_PRELUDE points somewhere else."""
    override = os.environ.get(PRELUDE_ENV)
    if override:
        return override
    return str(resources.files(__package__) / "prelude.cfl")


def load_lexicon(
    paths: Iterable[str | os.PathLike],
    prelude: bool = True,
    prelude_file: str | None = None,
) -> CompiledLexicon:
    """Read, parse, and compile lexicon files in order, prelude first.

    I/O errors and syntax errors raise as-is (OSError / DslError);
    semantic problems raise CompileError.
    """
    statements: list[Statement] = []
    sources: list[str] = []
    ordered = list(paths)
    if prelude:
        ordered.insert(0, prelude_file or prelude_path())
    for p in ordered:
        text = _read_text(p)
        statements.extend(dsl.parse_lexicon(text, source=str(p)))
        sources.append(str(p))
    lex = compile_lexicon(statements)
    lex.sources = tuple(sources)
    return lex


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def sense_lookup(lexicon: CompiledLexicon, rel_name: str) -> list[SenseEntry]:
    """Senses whose relation is at or below ``rel_name``, in declaration order."""
    lat = lexicon.lattice
    tid = lat.type_id(rel_name)
    return [s for s in lexicon.senses if lat.subtype(s.rel_type, tid)]
