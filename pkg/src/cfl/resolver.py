"""Sense resolution: match case frames against the lexicon across voice stages.

A surface frame is expanded into its strip ladder (see valency) and every
sense is tried against every stage by unification.  Resolution keeps the
matches from the earliest stage that has any; ``explain`` keeps them all.
Frames may embed clauses in argument slots; embedded clauses are resolved
first, depth-first, and each way of resolving them yields a variant of the
outer frame.

For every sense that fails, the failure is localized by replaying the
sense's constraint terms one at a time in tier order (verb, morph,
cooccur, lexical, semantic; untagged terms last) and reporting the first
term that clashes.  Terms are compiled per sense, so a clash that only
emerges from tag sharing between two terms is attributed to the
conjunction as a whole.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

from .dsl import TIERS
from .fs import FeatureStructure, UnificationFailure, graft, unify
from .lexicon import CompiledLexicon, SchemaError, SenseEntry
from .valency import Stage, stages

_TIER_RANK = {name: rank for rank, name in enumerate(TIERS)}


class MalformedFrameError(Exception):
    """Input structure is not rooted where the operation requires."""


class EmbedDepthExceededError(MalformedFrameError):
    """Clause embedding recursed past the configured limit."""


@dataclass(frozen=True)
class ResolvedSense:
    """One successful reading: the sense, the stage it matched at, and the
    fully unified frame carrying the instantiated semantics."""

    sense_id: str
    frame: FeatureStructure
    stage: int
    stage_label: str
    notes: tuple[str, ...] = ()
    embedded: Mapping[str, "ResolvedSense"] = field(default_factory=dict)


@dataclass(frozen=True)
class FailureRecord:
    sense_id: str
    stage: int
    stage_label: str
    tier: str
    term: str
    path: str
    reason: str

    def __str__(self) -> str:
        where = f" at {self.path}" if self.path else ""
        return (
            f"{self.sense_id} @ {self.stage_label}: "
            f"[{self.tier}] {self.term} failed{where}: {self.reason}"
        )


@dataclass(frozen=True)
class FailureReport:
    records: tuple[FailureRecord, ...]

    def for_sense(self, sense_id: str) -> tuple[FailureRecord, ...]:
        return tuple(r for r in self.records if r.sense_id == sense_id)

    def format(self) -> str:
        return "\n".join(str(r) for r in self.records)


def _subframe(fs: FeatureStructure, node: int) -> FeatureStructure:
    types = list(fs.types)
    arcs = [list(fs.arcs(i)) for i in range(fs.node_count)]
    built = FeatureStructure.build(fs.lattice, types, arcs, root=node, check=False)
    assert isinstance(built, FeatureStructure)
    return built


def _arc_target(fs: FeatureStructure, node: int, fid: int) -> int | None:
    for f, d in fs.arcs(node):
        if f == fid:
            return d
    return None


def _term_order(sense: SenseEntry):
    def rank(pair):
        pos, term = pair
        return (_TIER_RANK.get(term.tier, len(TIERS)), pos)

    return sorted(enumerate(sense.terms), key=rank)


def _record(sense, stage, tier, term, failure) -> FailureRecord:
    return FailureRecord(
        sense_id=sense.sense_id,
        stage=stage.index,
        stage_label=stage.label,
        tier=tier,
        term=term,
        path=".".join(failure.path),
        reason=str(failure),
    )


def _analyse(lexicon: CompiledLexicon, sense: SenseEntry, stage: Stage) -> FailureRecord:
    """Localize why ``sense`` rejected ``stage.frame``."""
    cur = unify(stage.frame, lexicon.skeleton)
    if isinstance(cur, UnificationFailure):
        return _record(sense, stage, "frame", "well-typed case frame", cur)
    for _, term in _term_order(sense):
        nxt = unify(cur, term.structure)
        if isinstance(nxt, UnificationFailure):
            return _record(sense, stage, term.tier or "semantic", term.label, nxt)
        cur = nxt
    # every term passes in isolation; the clash lives in tag sharing
    whole = unify(stage.frame, sense.compiled)
    assert isinstance(whole, UnificationFailure)
    return _record(sense, stage, "semantic", "joint constraints", whole)


def _embedded_slots(lexicon: CompiledLexicon, frame: FeatureStructure):
    schema = lexicon.schema
    args = _arc_target(frame, 0, schema.f_args)
    if args is None:
        return []
    found = []
    for slot, fid in schema.slots.items():
        target = _arc_target(frame, args, fid)
        if target is not None and frame.lattice.subtype(
            frame.types[target], schema.case_frame
        ):
            found.append((slot, target))
    return found


def resolve(
    lexicon: CompiledLexicon,
    frame: FeatureStructure,
    all_stages: bool = False,
    _depth: int = 0,
) -> tuple[list[ResolvedSense], FailureReport]:
    """All senses compatible with ``frame``, with diagnostics for the rest.

    Returns matches from the earliest stage that has any (every stage when
    ``all_stages``), ordered by stage then lexicon declaration order.
    """
    schema = lexicon.schema
    if schema is None or lexicon.skeleton is None:
        raise SchemaError("lexicon declares no case-frame schema; cannot resolve")
    if _depth > lexicon.config.max_embed_depth:
        raise EmbedDepthExceededError(
            f"clause embedding deeper than {lexicon.config.max_embed_depth}"
        )
    lat = frame.lattice
    if not lat.subtype(frame.types[0], schema.case_frame):
        raise MalformedFrameError(
            f"expected a case-frame, got {frame.root_type_name()!r}"
        )

    records: list[FailureRecord] = []
    seen_rec: set[tuple] = set()

    def push(rec: FailureRecord) -> None:
        key = (rec.sense_id, rec.stage, rec.tier, rec.term, rec.path)
        if key not in seen_rec:
            seen_rec.add(key)
            records.append(rec)

    # Resolve embedded clauses first; each reading becomes a frame variant.
    embeds = []
    for slot, node in _embedded_slots(lexicon, frame):
        sub = _subframe(frame, node)
        sub_matches, sub_report = resolve(
            lexicon, sub, all_stages=all_stages, _depth=_depth + 1
        )
        prefix = f"args.{slot}"
        for r in sub_report.records:
            push(
                FailureRecord(
                    sense_id=r.sense_id,
                    stage=r.stage,
                    stage_label=r.stage_label,
                    tier=r.tier,
                    term=r.term,
                    path=f"{prefix}.{r.path}" if r.path else prefix,
                    reason=r.reason,
                )
            )
        if not sub_matches:
            return [], FailureReport(tuple(records))
        embeds.append((slot, sub_matches))

    if embeds:
        variants = []
        for combo in product(*(ms for _, ms in embeds)):
            vf = frame
            chosen: dict[str, ResolvedSense] = {}
            for (slot, _), alt in zip(embeds, combo):
                vf = graft(vf, ("args", slot), alt.frame)
                chosen[slot] = alt
            variants.append((vf, chosen))
    else:
        variants = [(frame, {})]

    matches: list[ResolvedSense] = []
    seen: set[tuple[str, int]] = set()
    for vf, chosen in variants:
        for stage in stages(schema, vf, lexicon.config.disabled_rules):
            for sense in lexicon.senses:
                u = unify(stage.frame, sense.compiled)
                if isinstance(u, UnificationFailure):
                    push(_analyse(lexicon, sense, stage))
                    continue
                key = (sense.sense_id, stage.index)
                if key not in seen:
                    seen.add(key)
                    matches.append(
                        ResolvedSense(
                            sense_id=sense.sense_id,
                            frame=u,
                            stage=stage.index,
                            stage_label=stage.label,
                            notes=stage.notes,
                            embedded=chosen,
                        )
                    )

    if matches and not all_stages:
        best = min(m.stage for m in matches)
        matches = [m for m in matches if m.stage == best]
    matches.sort(key=lambda m: (m.stage, lexicon.sense(m.sense_id).index))
    return matches, FailureReport(tuple(records))


def explain(
    lexicon: CompiledLexicon, frame: FeatureStructure
) -> tuple[list[ResolvedSense], FailureReport]:
    """Like resolve, but keeps matches and diagnostics from every stage."""
    return resolve(lexicon, frame, all_stages=True)


def generate(
    lexicon: CompiledLexicon, sem: FeatureStructure
) -> list[tuple[str, FeatureStructure]]:
    """Case frames realizing a semantic frame, in declaration order.

    Each sense is tried against a skeleton carrying ``sem`` as its
    semantics; unification both selects compatible senses and fills in the
    syntactic frame they impose.
    """
    schema = lexicon.schema
    if schema is None or lexicon.skeleton is None:
        raise SchemaError("lexicon declares no case-frame schema; cannot generate")
    if not sem.lattice.subtype(sem.types[0], schema.sem_frame):
        raise MalformedFrameError(
            f"expected a sem-frame, got {sem.root_type_name()!r}"
        )
    shell = graft(lexicon.skeleton, ("sem",), sem)
    out = []
    for sense in lexicon.senses:
        u = unify(shell, sense.compiled)
        if not isinstance(u, UnificationFailure):
            out.append((sense.sense_id, u))
    return out
