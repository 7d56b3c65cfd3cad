"""Sense resolution: staged matching, embeddings, failure analysis, generation."""

from __future__ import annotations

import dataclasses
from itertools import product

import pytest

from cfl.dsl import parse_frame
from cfl.fs import FeatureStructure, UnificationFailure, graft, iso_equal, unify
from cfl.resolver import (
    EmbedDepthExceededError,
    MalformedFrameError,
    _subframe,
    explain,
    generate,
    resolve,
)
from cfl.valency import stages

from conftest import FIXTURES

FRAMES_DIR = FIXTURES / "frames"
AMBIG_DIR = FIXTURES / "ambiguity"


@pytest.fixture(scope="module")
def frames(corpus):
    return {name: frame for name, frame, _, _ in corpus}


def ids(matches):
    return [m.sense_id for m in matches]


# -- worked examples --------------------------------------------------------------


def test_bribe_vs_cost_split_on_subject_sort(lexicon, frames):
    got, _ = resolve(lexicon, frames["ye_bribe.frm"])
    assert ids(got) == ["accept-bribe"]
    got, _ = resolve(lexicon, frames["ye_cost.frm"])
    assert ids(got) == ["cost-a-lot"]


def test_deviate_vs_surprise_split_on_oblique(lexicon, frames):
    got, _ = resolve(lexicon, frames["sas_deviate.frm"])
    assert ids(got) == ["deviate-from"]
    got, _ = resolve(lexicon, frames["sas_surprised.frm"])
    assert ids(got) == ["be-surprised-at"]


def test_exclusion_slot_blocks_all_senses(lexicon, frames):
    got, report = resolve(lexicon, frames["sas_both.frm"])
    assert got == []
    assert report.records


def test_double_voice_strip_lands_at_stage_two(lexicon, frames):
    got, _ = resolve(lexicon, frames["gecirildi.frm"])
    assert ids(got) == ["pass-to"]
    m = got[0]
    assert m.stage == 2
    assert m.stage_label == "stage:2 (-CAUS)"
    assert m.frame.atom_at(("sem", "causer", "head", "lex")) == "adam"
    assert m.frame.atom_at(("args", "subject", "head", "lex")) == "çocuk"


def test_passivized_idiom_matches_nothing_anywhere(lexicon, frames):
    got, report = explain(lexicon, frames["kafa_passive.frm"])
    assert got == []
    lines = [str(r) for r in report.records]
    assert any(
        "get-mentally-deranged @ stage:0 (surface): [morph]" in ln for ln in lines
    )
    assert any(
        "get-mentally-deranged @ stage:1 (-PASS)" in ln and "args.dir-obj.case" in ln
        for ln in lines
    )


def test_ambiguous_frame_yields_both_senses(ambiguous_lexicon):
    text = (AMBIG_DIR / "ye_kafa_ambig.frm").read_text(encoding="utf-8")
    frame = parse_frame(text, ambiguous_lexicon)
    got, _ = resolve(ambiguous_lexicon, frame)
    assert ids(got) == ["get-mentally-deranged", "eat1"]
    assert {m.stage for m in got} == {0}


# -- embedded clauses -------------------------------------------------------------------


def test_embedded_clause_resolution_is_recorded(lexicon, frames):
    got, _ = resolve(lexicon, frames["tut_feel.frm"])
    assert ids(got) == ["feel-like-doing"]
    m = got[0]
    assert set(m.embedded) == {"subject"}
    sub = m.embedded["subject"]
    assert sub.sense_id == "swim"
    assert sub.stage == 0


def test_embedded_failure_propagates_with_prefixed_paths(lexicon, frames):
    got, report = resolve(lexicon, frames["tut_embed_fail.frm"])
    assert got == []
    assert report.records
    assert all(r.path.startswith("args.subject") for r in report.records)


def test_embed_depth_limit(lexicon, frames):
    shallow = dataclasses.replace(lexicon.config, max_embed_depth=0)
    tight = dataclasses.replace(lexicon, config=shallow)
    with pytest.raises(EmbedDepthExceededError):
        resolve(tight, frames["tut_feel.frm"])
    # depth 1 is enough for a single level of embedding
    ok = dataclasses.replace(lexicon, config=dataclasses.replace(lexicon.config, max_embed_depth=1))
    got, _ = resolve(ok, frames["tut_feel.frm"])
    assert ids(got) == ["feel-like-doing"]


# -- stage policy ------------------------------------------------------------------------


def test_earliest_stage_wins(lexicon, frames):
    # the reflexive surface frame matches wash-self outright at stage 0; the
    # strip ladder still runs but no later stage may shadow the direct hit
    got, _ = resolve(lexicon, frames["yika_self.frm"])
    assert [(m.sense_id, m.stage) for m in got] == [("wash-self", 0)]
    # the stripped frame keeps dir-obj nil, so plain wash (which wants an
    # accusative object) stays out even with every stage on the table
    got, _ = resolve(lexicon, frames["yika_self.frm"], all_stages=True)
    assert [(m.sense_id, m.stage) for m in got] == [("wash-self", 0)]
    # gecirildi only matches after two strips; default mode returns exactly
    # the earliest stage that has anything at all
    got, _ = resolve(lexicon, frames["gecirildi.frm"])
    assert {m.stage for m in got} == {2}


def test_explain_equals_all_stages(lexicon, frames):
    a, ra = explain(lexicon, frames["yika_self.frm"])
    b, rb = resolve(lexicon, frames["yika_self.frm"], all_stages=True)
    assert [(m.sense_id, m.stage) for m in a] == [(m.sense_id, m.stage) for m in b]
    assert [str(r) for r in ra.records] == [str(r) for r in rb.records]


def test_resolution_is_deterministic(lexicon, frames):
    for name, frame in frames.items():
        first, r1 = explain(lexicon, frame)
        second, r2 = explain(lexicon, frame)
        assert [(m.sense_id, m.stage) for m in first] == [
            (m.sense_id, m.stage) for m in second
        ], name
        assert [str(x) for x in r1.records] == [str(x) for x in r2.records], name


# -- failure analysis -------------------------------------------------------------------


def test_failure_records_name_tier_term_and_path(lexicon, frames):
    _, report = explain(lexicon, frames["kafa_passive.frm"])
    recs = report.for_sense("get-mentally-deranged")
    by_stage = {r.stage: r for r in recs}
    r0 = by_stage[0]
    assert r0.tier == "morph"
    assert r0.term == "no-passive-no-rflx"
    assert r0.path == "verb.passive"
    r1 = by_stage[1]
    assert r1.tier == "morph"
    assert r1.term == "dir-obj-acc"
    assert r1.path == "args.dir-obj.case"
    assert "clash" in r1.reason


def test_report_format_is_one_line_per_record(lexicon, frames):
    _, report = resolve(lexicon, frames["sas_both.frm"])
    text = report.format()
    assert len(text.splitlines()) == len(report.records)


# -- malformed input --------------------------------------------------------------------


def test_non_case_frame_is_rejected(lexicon):
    sem = parse_frame("frame just-sem := [sem-frame rel: wash].", lexicon)
    with pytest.raises(MalformedFrameError):
        resolve(lexicon, sem)


# -- generation ---------------------------------------------------------------------------


def test_generate_realizes_idiom_syntax(lexicon):
    text = (FRAMES_DIR / "gen_deranged.frm").read_text(encoding="utf-8")
    sem = parse_frame(text, lexicon)
    got = generate(lexicon, sem)
    assert [sid for sid, _ in got] == ["get-mentally-deranged"]
    _, fs = got[0]
    assert fs.atom_at(("verb", "stem")) == "ye"
    assert fs.atom_at(("args", "dir-obj", "head", "lex")) == "kafa"
    assert fs.type_at(("args", "dir-obj", "case")) == "acc"
    assert fs.shares(("args", "subject"), ("sem", "experiencer"))
    assert fs.atom_at(("args", "subject", "head", "lex")) == "adam"


def test_generate_can_be_ambiguous(lexicon):
    sem = parse_frame("frame w := [sem-frame rel: wash].", lexicon)
    got = generate(lexicon, sem)
    assert [sid for sid, _ in got] == ["wash", "wash-self"]


def test_generate_rejects_non_sem_input(lexicon, frames):
    with pytest.raises(MalformedFrameError):
        generate(lexicon, frames["ye_bribe.frm"])


# -- brute-force oracle --------------------------------------------------------------------


def brute_force(lexicon, frame, depth=0):
    """Stage x sense sweep with its own embedded-clause recursion."""
    schema = lexicon.schema
    embeds = []
    for slot, fid in sorted(schema.slots.items()):
        node = None
        for f, d in frame.arcs(0):
            if f == schema.f_args:
                for f2, d2 in frame.arcs(d):
                    if f2 == fid:
                        node = d2
        if node is None:
            continue
        if frame.lattice.subtype(frame.types[node], schema.case_frame):
            sub = _subframe(frame, node)
            sub_hits = brute_force(lexicon, sub, depth + 1)
            if not sub_hits:
                return []
            embeds.append((slot, sub_hits))
    variant_frames = [frame]
    if embeds:
        variant_frames = []
        for combo in product(*(hs for _, hs in embeds)):
            vf = frame
            for (slot, _), (_, _, alt) in zip(embeds, combo):
                vf = graft(vf, ("args", slot), alt)
            variant_frames.append(vf)
    hits = []
    for vf in variant_frames:
        for stage in stages(schema, vf, lexicon.config.disabled_rules):
            for sense in lexicon.senses:
                u = unify(stage.frame, sense.compiled)
                if not isinstance(u, UnificationFailure):
                    hits.append((sense.sense_id, stage.index, u))
    return hits


def test_all_stages_matches_brute_force_on_corpus(lexicon, corpus):
    for name, frame, _, _ in corpus:
        got, _ = resolve(lexicon, frame, all_stages=True)
        want = brute_force(lexicon, frame)
        assert {(m.sense_id, m.stage) for m in got} == {
            (sid, st) for sid, st, _ in want
        }, name
        for m in got:
            twins = [
                u for sid, st, u in want if (sid, st) == (m.sense_id, m.stage)
            ]
            assert any(iso_equal(m.frame, u) for u in twins), name
