"""Voice-strip rules: per-rule surgery, stage ladder shape, sharing."""

from __future__ import annotations

import pytest

from cfl.fs import FeatureStructure
from cfl.valency import (
    RULES,
    STRIP_CAUSATIVE,
    STRIP_PASSIVE,
    STRIP_REFLEXIVE,
    stage_label,
    stages,
)


@pytest.fixture(scope="module")
def frames(corpus):
    return {name: frame for name, frame, _, _ in corpus}


def ladder(lexicon, frame, disabled=()):
    return stages(lexicon.schema, frame, disabled=disabled)


# -- strip-passive ------------------------------------------------------------------


def test_passive_promotes_agent_phrase(lexicon, frames):
    # gecirildi carries an overt "adam tarafından" agent; the strip puts the
    # surface subject back in object position and the agent back as subject.
    surface = frames["gecirildi.frm"]
    out, notes = STRIP_PASSIVE.transform(lexicon.schema, surface)
    assert isinstance(out, FeatureStructure)
    assert notes == ()
    assert out.atom_at(("args", "dir-obj", "head", "lex")) == "çocuk"
    assert out.atom_at(("args", "subject", "head", "lex")) == "adam"
    assert out.type_at(("args", "agn-obj")) == "nil"
    assert out.type_at(("verb", "passive")) == "voice-minus"


def test_passive_without_agent_leaves_note(lexicon, frames):
    surface = frames["kafa_passive.frm"]
    out, notes = STRIP_PASSIVE.transform(lexicon.schema, surface)
    assert isinstance(out, FeatureStructure)
    assert any("agentless passive" in n for n in notes)
    assert out.atom_at(("args", "dir-obj", "head", "lex")) == "kafa"
    # the invented subject is a bare noun phrase with nothing known about it
    assert out.type_at(("args", "subject")) == "noun-phrase"
    assert out.features_at(("args", "subject")) == []


def test_passive_not_applicable_without_marker(lexicon, frames):
    active = frames["ye_bribe.frm"]
    assert not STRIP_PASSIVE.applicable(lexicon.schema, active)
    out, _ = STRIP_PASSIVE.transform(lexicon.schema, active)
    assert out is None


# -- strip-causative ------------------------------------------------------------------


def test_causative_demotes_causer(lexicon, frames):
    surface = frames["gecirildi.frm"]
    depassivized, _ = STRIP_PASSIVE.transform(lexicon.schema, surface)
    out, notes = STRIP_CAUSATIVE.transform(lexicon.schema, depassivized)
    assert isinstance(out, FeatureStructure)
    assert notes == ()
    # the causer (adam, subject after the passive strip) moves under sem
    assert out.atom_at(("sem", "causer", "head", "lex")) == "adam"
    # the causee (çocuk) is the subject of the stripped frame
    assert out.atom_at(("args", "subject", "head", "lex")) == "çocuk"
    assert out.type_at(("args", "dir-obj")) == "nil"
    assert out.type_at(("verb", "caus")) == "voice-minus"


def test_causative_preserves_unrelated_slots(lexicon, frames):
    surface = frames["gecirildi.frm"]
    depassivized, _ = STRIP_PASSIVE.transform(lexicon.schema, surface)
    out, _ = STRIP_CAUSATIVE.transform(lexicon.schema, depassivized)
    assert out.atom_at(("args", "dat-obl", "head", "lex")) == "okul"
    assert out.type_at(("args", "dat-obl", "case")) == "dat"


# -- strip-reflexive ------------------------------------------------------------------


def test_reflexive_fuses_agent_and_patient(lexicon, frames):
    surface = frames["yika_self.frm"]
    out, notes = STRIP_REFLEXIVE.transform(lexicon.schema, surface)
    assert isinstance(out, FeatureStructure)
    assert notes == ()
    assert out.shares(("sem", "agent"), ("sem", "patient"))
    assert out.type_at(("verb", "rflx")) == "voice-minus"


# -- stage ladder -------------------------------------------------------------------


def test_stage_indexes_are_fixed_with_gaps(lexicon, frames):
    # reflexive only: the ladder skips 1 and 2
    lad = ladder(lexicon, frames["yika_self.frm"])
    assert [s.index for s in lad] == [0, 3]
    assert lad[0].label == "stage:0 (surface)"
    assert lad[1].label == "stage:3 (-RFLX)"

    # passive + causative: 0, 1, 2 with no 3
    lad = ladder(lexicon, frames["gecirildi.frm"])
    assert [s.index for s in lad] == [0, 1, 2]
    assert [s.label for s in lad] == [
        "stage:0 (surface)",
        "stage:1 (-PASS)",
        "stage:2 (-CAUS)",
    ]


def test_all_three_markers_walk_every_stage(lexicon):
    from cfl.dsl import parse_frame

    text = """frame triple := [
      verb: [stem: "yıka", agr: 3sg, vform: finite, passive: +, caus: +, rflx: +],
      args: [subject: [noun-phrase head: [lex: "adam", sem: human], case: nom,
                       poss: none],
             dir-obj: nil, abl-obl: nil, dat-obl: nil, loc-obl: nil, benef: nil,
             inst: nil, value-obj: nil, agn-obj: nil]]."""
    frame = parse_frame(text, lexicon)
    lad = ladder(lexicon, frame)
    assert [s.index for s in lad] == [0, 1, 2, 3]


def test_active_frame_has_single_stage(lexicon, frames):
    lad = ladder(lexicon, frames["ye_bribe.frm"])
    assert [s.index for s in lad] == [0]


def test_disabled_rule_is_skipped(lexicon, frames):
    lad = ladder(lexicon, frames["yika_self.frm"], disabled=("strip-reflexive",))
    assert [s.index for s in lad] == [0]


def test_stage_label_helper():
    assert stage_label(0) == "stage:0 (surface)"
    assert stage_label(2) == "stage:2 (-CAUS)"
    assert [r.stage_index for r in RULES] == [1, 2, 3]
    assert [r.suffix for r in RULES] == ["-PASS", "-CAUS", "-RFLX"]


# -- structure hygiene -----------------------------------------------------------------


def test_strip_preserves_sharing(lexicon):
    from cfl.dsl import parse_frame

    # subject and benef share one noun phrase; the passive strip moves the
    # subject node but must not sever the benef alias of its replacement
    text = """frame shared := [
      verb: [stem: "ye", agr: 3sg, vform: finite, passive: +, caus: -, rflx: -],
      args: [subject: #1 [noun-phrase head: [lex: "adam", sem: human], case: nom,
                          poss: none],
             dir-obj: nil, abl-obl: nil, dat-obl: nil, loc-obl: nil, benef: #1,
             inst: nil, value-obj: nil, agn-obj: nil]]."""
    frame = parse_frame(text, lexicon)
    assert frame.shares(("args", "subject"), ("args", "benef"))
    out, _ = STRIP_PASSIVE.transform(lexicon.schema, frame)
    # the old subject node went to dir-obj; benef still points at that node
    assert out.shares(("args", "dir-obj"), ("args", "benef"))
    assert out.atom_at(("args", "benef", "head", "lex")) == "adam"


def test_stages_do_not_mutate_input(lexicon, frames):
    surface = frames["gecirildi.frm"]

    def snapshot(fs):
        return (fs.types, tuple(tuple(fs.arcs(i)) for i in range(fs.node_count)))

    before = snapshot(surface)
    ladder(lexicon, surface)
    assert snapshot(surface) == before
