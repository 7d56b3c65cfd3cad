"""Type lattice: GLB against a brute-force oracle, validation, atoms."""

from __future__ import annotations

import random

import pytest

from cfl.lattice import (
    STRING_ATOM,
    TOP,
    LatticeError,
    MultipleGlbError,
    TypeLattice,
    VoiceValue,
)
from cfl.randgen import random_lattice, random_lattice_spec

# -- oracle -------------------------------------------------------------------


def oracle_tables(types: dict[str, tuple[str, ...]]):
    """Descendant sets computed by naive transitive closure over the declarations."""
    names = [TOP] + list(types)
    parents = {TOP: set()}
    for name, ps in types.items():
        parents[name] = set(ps) if ps else {TOP}

    desc = {n: {n} for n in names}
    changed = True
    while changed:
        changed = False
        for n in names:
            for p in parents[n]:
                if not desc[p] >= desc[n]:
                    desc[p] |= desc[n]
                    changed = True
    return desc


def oracle_glb(desc, a: str, b: str):
    """('ok', t) for a unique greatest common subtype, ('none',) for no
    common subtype, ('ambiguous', maximal-set) otherwise."""
    common = desc[a] & desc[b]
    if not common:
        return ("none",)
    maximal = {
        t
        for t in common
        if not any(t in desc[o] and t != o for o in common)
    }
    if len(maximal) == 1:
        return ("ok", next(iter(maximal)))
    return ("ambiguous", frozenset(maximal))


# -- glb vs oracle ------------------------------------------------------------


def test_glb_matches_oracle_on_random_lattices():
    rng = random.Random(42)
    saw_ambiguous = saw_none = 0
    for _ in range(100):
        types, approp = random_lattice_spec(
            rng, n_types=rng.randint(3, 40), n_features=rng.randint(0, 6)
        )
        lat = TypeLattice(types, approp)
        desc = oracle_tables(types)
        names = [TOP] + list(types)
        diags = lat.validate()
        flagged = {
            frozenset(d.subjects) for d in diags if d.kind == "multiple-glb"
        }
        expect_flagged = set()
        for i, a in enumerate(names):
            for b in names[i:]:
                want = oracle_glb(desc, a, b)
                ta, tb = lat.type_id(a), lat.type_id(b)
                if want[0] == "ok":
                    assert lat.glb(ta, tb) == lat.type_id(want[1]), (a, b)
                elif want[0] == "none":
                    saw_none += 1
                    assert lat.glb(ta, tb) is None, (a, b)
                else:
                    saw_ambiguous += 1
                    expect_flagged.add(frozenset((a, b)))
                    with pytest.raises(MultipleGlbError):
                        lat.glb(ta, tb)
        assert flagged == expect_flagged
    # the generator must exercise every branch for the run to mean anything
    assert saw_none > 50 and saw_ambiguous > 5


def test_glb_examples():
    lat = TypeLattice(
        {"a": (), "b": (), "c": ("a", "b"), "d": ("c",)},
        {},
    )
    a, b, c, d = (lat.type_id(n) for n in "abcd")
    top = lat.type_id(TOP)
    assert lat.glb(a, b) == c
    assert lat.glb(a, top) == a
    assert lat.glb(c, d) == d
    assert lat.glb(d, b) == d
    assert lat.subtype(d, a) and not lat.subtype(a, d)


def test_glb_symmetric_and_idempotent_on_random_lattice():
    rng = random.Random(5)
    lat = random_lattice(rng, n_types=25, n_features=4)
    for a in range(lat.n_core):
        assert lat.glb(a, a) == a
        for b in range(lat.n_core):
            assert lat.glb(a, b) == lat.glb(b, a)


# -- voice subhierarchy --------------------------------------------------------


def test_voice_three_values(lexicon):
    lat = lexicon.lattice
    plus = lat.type_id(VoiceValue.PLUS.type_name)
    minus = lat.type_id(VoiceValue.MINUS.type_name)
    nil = lat.type_id(VoiceValue.NIL.type_name)
    # unprocessed marker absorbs an explicit minus but rejects plus
    assert lat.glb(minus, nil) == nil
    assert lat.glb(plus, nil) is None
    assert lat.glb(plus, minus) is None
    assert lat.subtype(nil, minus)


# -- appropriateness -----------------------------------------------------------


def test_effective_approp_inherits_and_narrows():
    lat = TypeLattice(
        {"v": (), "w": ("v",), "x": (), "y": ("x",)},
        {"x": {"f": "v"}, "y": {"f": "w", "g": "v"}},
    )
    f, g = lat.feature_id("f"), lat.feature_id("g")
    assert lat.effective_approp(lat.type_id("x")) == {f: lat.type_id("v")}
    assert lat.effective_approp(lat.type_id("y")) == {
        f: lat.type_id("w"),
        g: lat.type_id("v"),
    }
    assert lat.approp(lat.type_id("x"), g) is None


def test_approp_clash_reported():
    lat = TypeLattice(
        {"a": (), "b": (), "x": (), "y": ("x",)},
        {"x": {"f": "a"}, "y": {"f": "b"}},  # a and b share no subtype
    )
    kinds = {d.kind for d in lat.validate()}
    assert "approp-clash" in kinds


def test_feature_ids_sorted_by_name():
    lat = TypeLattice(
        {"x": ()},
        {"x": {"zeta": "x", "alpha": "x", "mid": "x"}},
    )
    assert lat.feature_names == sorted(lat.feature_names)


# -- validation diagnostics ----------------------------------------------------


def test_cycle_diagnostic():
    lat = TypeLattice({"a": ("b",), "b": ("a",)}, {})
    assert any(d.kind == "cycle" for d in lat.validate())


def test_atom_subtype_diagnostic():
    lat = TypeLattice({"a": (STRING_ATOM,)}, {})
    assert any(d.kind == "atom-subtype" for d in lat.validate())


def test_diamond_without_join_is_flagged():
    lat = TypeLattice(
        {"a": (), "b": (), "c": ("a", "b"), "d": ("a", "b")},
        {},
    )
    diags = [d for d in lat.validate() if d.kind == "multiple-glb"]
    assert len(diags) == 1
    assert set(diags[0].subjects) == {"a", "b"}


def test_clean_fixture_validates(lexicon):
    assert lexicon.lattice.validate() == []


# -- string atoms ---------------------------------------------------------------


def test_atoms_interned_once():
    lat = TypeLattice({"a": ()}, {})
    t1 = lat.intern_atom("kedi")
    t2 = lat.intern_atom("kedi")
    t3 = lat.intern_atom("köpek")
    assert t1 == t2 != t3
    assert lat.is_atom(t1) and not lat.is_atom(lat.type_id("a"))
    assert lat.atom_text(t3) == "köpek"
    assert lat.type_name(t1) == "kedi"


def test_distinct_atoms_never_unify():
    lat = TypeLattice({"a": ()}, {})
    t1, t2 = lat.intern_atom("bir"), lat.intern_atom("iki")
    assert lat.glb(t1, t2) is None
    assert lat.glb(t1, t1) == t1
    assert lat.glb(t1, lat.type_id(STRING_ATOM)) == t1


def test_atom_below_core_type_fails():
    lat = TypeLattice({"a": ()}, {})
    atom = lat.intern_atom("söz")
    assert lat.glb(atom, lat.type_id("a")) is None
    assert lat.subtype(atom, lat.type_id(TOP))


def test_unknown_names_raise():
    lat = TypeLattice({"a": ()}, {})
    with pytest.raises(LatticeError):
        lat.type_id("missing")
    with pytest.raises(LatticeError):
        lat.feature_id("missing")


def test_kernel_tables_shape(lexicon):
    lat = lexicon.lattice
    tables = lat.kernel_tables()
    n = tables.n_core
    assert n == lat.n_core
    assert len(tables.glb) == n * n
    for a in range(n):
        assert tables.glb[a * n + a] == a
    # CSR rows cover every feature of every type
    for t in range(n):
        row = {
            tables.app_feat[k]: tables.app_val[k]
            for k in range(tables.app_start[t], tables.app_start[t + 1])
        }
        assert row == lat.effective_approp(t)
