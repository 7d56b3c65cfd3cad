"""Valency-changing voice transformations as lexical rules.

Turkish stacks voice suffixes outside-in (stem + RFLX + CAUS + PASS), so
recovering the base diathesis peels them in the reverse order: passive
first, then causative, then reflexive.  Stage numbering is fixed by rule,
not by how many apply: stage 1 is always the passive strip, 2 the
causative, 3 the reflexive; inapplicable rules simply leave gaps.

Each rule fires only on a frame whose marker is voice-plus, rewrites the
argument array by re-hanging existing nodes (filled arguments are moved,
never copied or dropped), resets the marker to voice-minus, and records
what the demoted material becomes:

  strip-passive    dir-obj := subject; subject := agn-obj when that is a
                   noun phrase, else a fresh underspecified one; agn-obj
                   := nil
  strip-causative  sem.causer := subject; subject := dir-obj; dir-obj := nil
  strip-reflexive  arguments stay; sem.agent and sem.patient become one node
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .fs import FeatureStructure
from .lexicon import CaseFrameSchema


@dataclass(frozen=True)
class Stage:
    """One rung of the strip ladder: the frame as seen after ``index`` rules."""

    index: int
    label: str
    frame: FeatureStructure
    notes: tuple[str, ...] = ()


class _Surgery:
    """Mutable copy of a frame's node graph for argument shuffling."""

    def __init__(self, fs: FeatureStructure):
        self.lat = fs.lattice
        self.types = list(fs.types)
        self.arcs = [list(fs.arcs(i)) for i in range(fs.node_count)]

    def node(self, *fids: int) -> int | None:
        cur = 0
        for fid in fids:
            nxt = None
            for f, d in self.arcs[cur]:
                if f == fid:
                    nxt = d
                    break
            if nxt is None:
                return None
            cur = nxt
        return cur

    def fresh(self, tid: int) -> int:
        self.types.append(tid)
        self.arcs.append([])
        return len(self.types) - 1

    def ensure(self, parent: int, fid: int) -> int:
        """Child of ``parent`` over ``fid``, created with its declared type."""
        for f, d in self.arcs[parent]:
            if f == fid:
                return d
        want = self.lat.approp(self.types[parent], fid)
        if want is None:
            raise ValueError(
                f"feature {self.lat.feature_name(fid)!r} not appropriate during surgery"
            )
        idx = self.fresh(want)
        self.arcs[parent].append((fid, idx))
        return idx

    def set_arc(self, parent: int, fid: int, target: int) -> None:
        row = self.arcs[parent]
        for k, (f, _) in enumerate(row):
            if f == fid:
                row[k] = (fid, target)
                return
        row.append((fid, target))

    def drop_arc(self, parent: int, fid: int) -> None:
        self.arcs[parent] = [(f, d) for f, d in self.arcs[parent] if f != fid]

    def finish(self) -> FeatureStructure | None:
        built = FeatureStructure.build(self.lat, self.types, self.arcs, check=True)
        return built if isinstance(built, FeatureStructure) else None


def _marker_is_plus(schema: CaseFrameSchema, fs: FeatureStructure, marker_fid: int) -> bool:
    verb = None
    for f, d in fs.arcs(0):
        if f == schema.f_verb:
            verb = d
            break
    if verb is None:
        return False
    for f, d in fs.arcs(verb):
        if f == marker_fid:
            return fs.types[d] == schema.voice_plus
    return False


def _strip_passive(schema, fs):
    s = _Surgery(fs)
    notes: list[str] = []
    verb = s.node(schema.f_verb)
    args = s.ensure(0, schema.f_args)
    f_subj = schema.slots["subject"]
    f_dir = schema.slots["dir-obj"]
    f_agn = schema.slots["agn-obj"]
    subj = s.node(schema.f_args, f_subj)
    agn = s.node(schema.f_args, f_agn)
    if subj is not None:
        s.set_arc(args, f_dir, subj)
    if agn is not None and s.lat.subtype(s.types[agn], schema.noun_phrase):
        s.set_arc(args, f_subj, agn)
    else:
        s.set_arc(args, f_subj, s.fresh(schema.noun_phrase))
        notes.append("agentless passive: promoted subject left underspecified")
    s.set_arc(args, f_agn, s.fresh(schema.nil))
    s.set_arc(verb, schema.f_passive, s.fresh(schema.voice_minus))
    return s.finish(), tuple(notes)


def _strip_causative(schema, fs):
    s = _Surgery(fs)
    verb = s.node(schema.f_verb)
    args = s.ensure(0, schema.f_args)
    f_subj = schema.slots["subject"]
    f_dir = schema.slots["dir-obj"]
    subj = s.node(schema.f_args, f_subj)
    dirobj = s.node(schema.f_args, f_dir)
    if subj is not None:
        sem = s.ensure(0, schema.f_sem)
        s.set_arc(sem, schema.roles["causer"], subj)
    if dirobj is not None:
        s.set_arc(args, f_subj, dirobj)
    else:
        s.drop_arc(args, f_subj)
    s.set_arc(args, f_dir, s.fresh(schema.nil))
    s.set_arc(verb, schema.f_caus, s.fresh(schema.voice_minus))
    return s.finish(), ()


def _strip_reflexive(schema, fs):
    s = _Surgery(fs)
    verb = s.node(schema.f_verb)
    sem = s.ensure(0, schema.f_sem)
    f_agent = schema.roles["agent"]
    f_patient = schema.roles["patient"]
    target = s.node(schema.f_sem, f_agent)
    if target is None:
        target = s.node(schema.f_sem, f_patient)
    if target is None:
        want = s.lat.approp(s.types[sem], f_agent)
        target = s.fresh(want if want is not None else s.types[0])
    s.set_arc(sem, f_agent, target)
    s.set_arc(sem, f_patient, target)
    s.set_arc(verb, schema.f_rflx, s.fresh(schema.voice_minus))
    return s.finish(), ()


@dataclass(frozen=True)
class LexicalRule:
    """A voice-strip rule: applicability probe plus frame transform."""

    name: str
    stage_index: int
    suffix: str
    marker: str
    _apply: Callable

    def marker_fid(self, schema: CaseFrameSchema) -> int:
        return {
            "passive": schema.f_passive,
            "caus": schema.f_caus,
            "rflx": schema.f_rflx,
        }[self.marker]

    def applicable(self, schema: CaseFrameSchema, frame: FeatureStructure) -> bool:
        return _marker_is_plus(schema, frame, self.marker_fid(schema))

    def transform(
        self, schema: CaseFrameSchema, frame: FeatureStructure
    ) -> tuple[FeatureStructure | None, tuple[str, ...]]:
        if not self.applicable(schema, frame):
            return None, ()
        return self._apply(schema, frame)


STRIP_PASSIVE = LexicalRule("strip-passive", 1, "-PASS", "passive", _strip_passive)
STRIP_CAUSATIVE = LexicalRule("strip-causative", 2, "-CAUS", "caus", _strip_causative)
STRIP_REFLEXIVE = LexicalRule("strip-reflexive", 3, "-RFLX", "rflx", _strip_reflexive)

RULES = (STRIP_PASSIVE, STRIP_CAUSATIVE, STRIP_REFLEXIVE)


def stage_label(index: int) -> str:
    return f"stage:{index} ({('surface', '-PASS', '-CAUS', '-RFLX')[index]})"


def stages(
    schema: CaseFrameSchema,
    frame: FeatureStructure,
    disabled: Iterable[str] = (),
) -> list[Stage]:
    """The strip ladder for ``frame``: surface first, then each applicable rule.

    Rules apply to the previous stage's output, so a passive causative
    yields stages 0, 1, and 2.  Rules named in ``disabled`` are skipped.
    """
    off = set(disabled)
    out = [Stage(0, stage_label(0), frame)]
    cur = frame
    for rule in RULES:
        if rule.name in off or not rule.applicable(schema, cur):
            continue
        nxt, notes = rule.transform(schema, cur)
        if nxt is None:
            continue
        cur = nxt
        out.append(Stage(rule.stage_index, stage_label(rule.stage_index), cur, notes))
    return out
