"""Random lattices and feature structures for tests and benchmarks.

Generation is seeded (callers pass a ``random.Random``) so failures
reproduce.  Lattices come in two flavors: ``random_lattice`` retries until
validation is clean, for property tests that assume a usable signature;
``random_lattice_spec`` exposes the raw declarations so tests can also
feed unvalidated input through the same pipeline a user would.
"""

from __future__ import annotations

import random
from .fs import FeatureStructure
from .lattice import STRING_ATOM_ID, TypeLattice

_WORDS = (
    "ev", "su", "yol", "kapı", "taş", "el", "gün", "ay", "kar", "dil",
    "göz", "kuş", "dal", "kök", "ses", "kum", "buz", "tuz", "bal", "un",
)


def random_lattice_spec(
    rng: random.Random,
    n_types: int = 12,
    n_features: int = 5,
    p_second_parent: float = 0.25,
    p_refine: float = 0.3,
) -> tuple[dict[str, tuple[str, ...]], dict[str, dict[str, str]]]:
    """Random type and appropriateness declarations.

    Types form a DAG over earlier names; roughly a quarter get a second
    parent so diamonds (and occasionally glb ambiguity) occur.  Features
    are introduced at one type each; with probability ``p_refine`` a
    descendant restates the feature with a narrower value, which keeps
    inheritance monotone by construction.
    """
    names = [f"t{i}" for i in range(n_types)]
    types: dict[str, tuple[str, ...]] = {}
    for i, name in enumerate(names):
        if i == 0 or rng.random() < 0.2:
            types[name] = ()
            continue
        parents = {rng.choice(names[:i])}
        if i > 1 and rng.random() < p_second_parent:
            parents.add(rng.choice(names[:i]))
        types[name] = tuple(sorted(parents))

    descendants: dict[str, set[str]] = {n: {n} for n in names}
    for name in names:  # declaration order is topological
        for p in types[name]:
            for anc, ds in descendants.items():
                if p in ds:
                    ds.add(name)

    approp: dict[str, dict[str, str]] = {}
    for k in range(n_features):
        feat = f"f{k}"
        intro = rng.choice(names)
        value = rng.choice(names + ["string-atom"])
        approp.setdefault(intro, {})[feat] = value
        if value != "string-atom" and rng.random() < p_refine:
            sub = rng.choice(sorted(descendants[intro]))
            narrower = rng.choice(sorted(descendants[value]))
            if sub != intro:
                approp.setdefault(sub, {})[feat] = narrower
    return types, approp


def random_lattice(
    rng: random.Random,
    n_types: int = 12,
    n_features: int = 5,
    max_tries: int = 200,
) -> TypeLattice:
    """A random lattice whose ``validate()`` comes back clean."""
    for _ in range(max_tries):
        types, approp = random_lattice_spec(rng, n_types, n_features)
        lat = TypeLattice(types, approp)
        if not lat.validate():
            return lat
    raise RuntimeError("could not generate a clean lattice; widen max_tries")


def _core_descendants(lat: TypeLattice, tid: int) -> list[int]:
    return [t for t in range(lat.n_core) if lat.subtype(t, tid)]


def _reaches(arcs: list[list[tuple[int, int]]], src: int, dst: int) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        for _, d in arcs[stack.pop()]:
            if d == dst:
                return True
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return False


def random_structure(
    rng: random.Random,
    lat: TypeLattice,
    max_nodes: int = 10,
    p_arc: float = 0.7,
    p_reuse: float = 0.25,
) -> FeatureStructure:
    """A random well-typed structure over ``lat``.

    Grows breadth-first from a random root; each licensed feature is
    filled with a fresh node at a random subtype of the required value, a
    reused compatible node (yielding reentrancy), or a random string atom
    where the signature asks for one.
    """
    root_t = rng.randrange(lat.n_core)
    types: list[int] = [root_t]
    arcs: list[list[tuple[int, int]]] = [[]]
    queue = [0]
    while queue:
        node = queue.pop(0)
        for fid, want in sorted(lat.effective_approp(types[node]).items()):
            if rng.random() > p_arc:
                continue
            if want == STRING_ATOM_ID:
                child = len(types)
                types.append(lat.intern_atom(rng.choice(_WORDS)))
                arcs.append([])
            elif len(types) < max_nodes:
                reusable = [
                    i for i, t in enumerate(types)
                    if t < lat.n_core
                    and lat.subtype(t, want)
                    and not _reaches(arcs, i, node)
                    and i != node
                ]
                if reusable and rng.random() < p_reuse:
                    child = rng.choice(reusable)
                else:
                    child = len(types)
                    types.append(rng.choice(_core_descendants(lat, want)))
                    arcs.append([])
                    queue.append(child)
            else:
                continue
            arcs[node].append((fid, child))
    built = FeatureStructure.build(lat, types, arcs, check=True)
    assert isinstance(built, FeatureStructure), built
    return built
