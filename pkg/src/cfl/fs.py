"""Typed feature structures: rooted, acyclic, possibly reentrant graphs.

A structure is stored in canonical form: nodes numbered by preorder DFS
from the root with arcs taken in ascending feature-id order (equals
lexicographic feature-name order).  Canonical form makes isomorphism a
tuple comparison, so instances are immutable, hashable, and directly
usable as dict keys.

All structural operations funnel into the merge kernel: unification glues
two graphs at their roots, ``put`` glues a value onto a path, and
construction is a merge with an empty worklist plus a full well-typing
check.  Appropriateness is strict: a feature not licensed by a node's
type is a failure, never a reason to retype the node upward.  Value
coercion does apply downward: when a node's type narrows, its arc targets
narrow to the declared value types, recursively.

``subsumes`` is a simulation check rather than a merge: ``a`` subsumes
``b`` when ``b`` carries all of ``a``'s information, i.e. every node of
``a`` maps to a node of ``b`` at or below its type, arcs are preserved,
and shared nodes stay shared.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernel
from .lattice import LatticeError, TypeLattice

Path = tuple[str, ...]


class InappropriateFeatureError(LatticeError):
    """A path step names a feature the node's type does not license."""


def as_path(path: str | Sequence[str]) -> Path:
    """Normalize a path: dotted string or sequence of feature names."""
    if isinstance(path, str):
        return tuple(p for p in path.split(".") if p)
    return tuple(path)


@dataclass(frozen=True)
class UnificationFailure:
    """Why two structures do not unify.  Falsy, so ``if result:`` reads well.

    ``path`` locates the offending node from the root of the left operand;
    for arc-level failures ``feature`` names the arc.  ``left``/``right``
    are type names when the failure is a type clash.
    """

    kind: str  # "clash" | "inappropriate" | "cycle"
    path: Path
    feature: str | None = None
    left: str | None = None
    right: str | None = None

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        at = ".".join(self.path) or "<root>"
        if self.kind == "clash":
            via = f" at feature {self.feature!r}" if self.feature else ""
            return f"clash at {at}{via}: {self.left} and {self.right} have no common subtype"
        if self.kind == "inappropriate":
            return f"feature {self.feature!r} at {at} is not licensed by type {self.left}"
        return f"unification would create a cycle through {at}"


class FeatureStructure:
    """Immutable canonical-form feature structure over a shared lattice."""

    __slots__ = ("lattice", "types", "arc_start", "arc_feat", "arc_dst", "_hash")

    def __init__(self, lattice, types, arc_start, arc_feat, arc_dst):
        self.lattice = lattice
        self.types = types
        self.arc_start = arc_start
        self.arc_feat = arc_feat
        self.arc_dst = arc_dst
        self._hash = hash((types, arc_start, arc_feat, arc_dst))

    # -- construction ----------------------------------------------------------

    @classmethod
    def build(
        cls,
        lattice: TypeLattice,
        types: Sequence[int],
        arcs: Sequence[Iterable[tuple[int, int]]],
        root: int = 0,
        pairs: Sequence[tuple[int, int]] = (),
        check: bool = True,
    ) -> "FeatureStructure | UnificationFailure":
        """Canonicalize a raw node graph; ``check`` verifies well-typing.

        ``arcs[i]`` lists ``(feature_id, target)`` pairs for node ``i``;
        rows need not be sorted but may not repeat a feature.
        """
        starts = [0]
        feats: list[int] = []
        dsts: list[int] = []
        for row in arcs:
            srow = sorted(row)
            for k in range(1, len(srow)):
                if srow[k][0] == srow[k - 1][0]:
                    raise LatticeError(
                        f"duplicate feature {lattice.feature_name(srow[k][0])!r} on one node"
                    )
            for f, d in srow:
                feats.append(f)
                dsts.append(d)
            starts.append(len(feats))
        res = kernel.merge(
            lattice.kernel_tables(), list(types), starts, feats, dsts, root, list(pairs), check
        )
        if res[0] != "ok":
            return _failure(lattice, res, starts, feats, dsts, pairs, root)
        return cls._wrap(lattice, res)

    @classmethod
    def leaf(cls, lattice: TypeLattice, type_name: str) -> "FeatureStructure":
        tid = lattice.type_id(type_name)
        return cls(lattice, (tid,), (0, 0), (), ())

    @classmethod
    def atom(cls, lattice: TypeLattice, text: str) -> "FeatureStructure":
        return cls(lattice, (lattice.intern_atom(text),), (0, 0), (), ())

    @classmethod
    def _wrap(cls, lattice, ok_result) -> "FeatureStructure":
        _, types, starts, feats, dsts = ok_result
        return cls(lattice, tuple(types), tuple(starts), tuple(feats), tuple(dsts))

    # -- node-level views --------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.types)

    def node_type(self, i: int) -> int:
        return self.types[i]

    def arcs(self, i: int):
        s, e = self.arc_start[i], self.arc_start[i + 1]
        return zip(self.arc_feat[s:e], self.arc_dst[s:e])

    def root_type_name(self) -> str:
        return self.lattice.type_name(self.types[0])

    # -- path access ---------------------------------------------------------------

    def resolve_node(self, path: str | Sequence[str]) -> int | None:
        """Node index at ``path`` from the root, or None when absent."""
        node = 0
        for name in as_path(path):
            if not self.lattice.has_feature(name):
                return None
            fid = self.lattice.feature_id(name)
            nxt = None
            for f, d in self.arcs(node):
                if f == fid:
                    nxt = d
                    break
            if nxt is None:
                return None
            node = nxt
        return node

    def get(self, path: str | Sequence[str]) -> "FeatureStructure | None":
        """Sub-structure rooted at ``path``, or None when the path is absent."""
        node = self.resolve_node(path)
        if node is None:
            return None
        if node == 0:
            return self
        res = kernel.merge(
            self.lattice.kernel_tables(),
            list(self.types),
            list(self.arc_start),
            list(self.arc_feat),
            list(self.arc_dst),
            node,
            [],
            False,
        )
        return FeatureStructure._wrap(self.lattice, res)

    def type_at(self, path: str | Sequence[str]) -> str | None:
        node = self.resolve_node(path)
        return None if node is None else self.lattice.type_name(self.types[node])

    def features_at(self, path: str | Sequence[str] = ()) -> list[str]:
        node = self.resolve_node(path)
        if node is None:
            return []
        return [self.lattice.feature_name(f) for f, _ in self.arcs(node)]

    def atom_at(self, path: str | Sequence[str]) -> str | None:
        """Atom text at ``path`` when the node there is a string atom."""
        node = self.resolve_node(path)
        if node is None or not self.lattice.is_atom(self.types[node]):
            return None
        return self.lattice.atom_text(self.types[node])

    def shares(self, p1: str | Sequence[str], p2: str | Sequence[str]) -> bool:
        """True when both paths resolve to the same node (reentrancy)."""
        a = self.resolve_node(p1)
        b = self.resolve_node(p2)
        return a is not None and a == b

    def put(
        self, path: str | Sequence[str], value: "FeatureStructure"
    ) -> "FeatureStructure | UnificationFailure":
        """Unify ``value`` onto ``path``, creating well-typed spine nodes as needed.

        Raises InappropriateFeatureError when a step names a feature the
        type at that point does not license.
        """
        if value.lattice is not self.lattice:
            raise LatticeError("operands belong to different lattices")
        lat = self.lattice
        steps = as_path(path)
        node = 0
        consumed = 0
        for name in steps:
            if not lat.has_feature(name):
                raise InappropriateFeatureError(
                    f"feature {name!r} is not declared by any appropriateness"
                )
            fid = lat.feature_id(name)
            nxt = None
            for f, d in self.arcs(node):
                if f == fid:
                    nxt = d
                    break
            if nxt is None:
                break
            node = nxt
            consumed += 1

        types = list(self.types)
        arcs: list[list[tuple[int, int]]] = [list(self.arcs(i)) for i in range(self.node_count)]
        attach = node
        cur_type = types[attach]
        for name in steps[consumed:]:
            fid = lat.feature_id(name)
            want = lat.approp(cur_type, fid)
            if want is None:
                raise InappropriateFeatureError(
                    f"feature {name!r} is not appropriate for type {lat.type_name(cur_type)!r}"
                )
            idx = len(types)
            arcs[attach].append((fid, idx))
            types.append(want)
            arcs.append([])
            attach = idx
            cur_type = want
        offset = len(types)
        types.extend(value.types)
        for i in range(value.node_count):
            arcs.append([(f, d + offset) for f, d in value.arcs(i)])
        return FeatureStructure.build(lat, types, arcs, 0, [(attach, offset)], check=True)


    # -- equality ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureStructure)
            and self.lattice is other.lattice
            and self.types == other.types
            and self.arc_start == other.arc_start
            and self.arc_feat == other.arc_feat
            and self.arc_dst == other.arc_dst
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<FeatureStructure {self.root_type_name()} nodes={self.node_count}>"

    def __str__(self) -> str:
        from .dsl import serialize_frame

        return serialize_frame(self)


def _failure(lattice, res, starts, feats, dsts, pairs, root) -> UnificationFailure:
    kind, witness, feat, t1, t2 = res
    path = _witness_path(lattice, starts, feats, dsts, pairs, root, witness)
    fname = lattice.feature_name(feat) if feat >= 0 else None
    if kind == "clash":
        return UnificationFailure(
            "clash", path, fname, lattice.type_name(t1), lattice.type_name(t2)
        )
    if kind == "inappropriate":
        return UnificationFailure("inappropriate", path, fname, lattice.type_name(t1), None)
    return UnificationFailure("cycle", path)


def _witness_path(lattice, starts, feats, dsts, pairs, root, target) -> Path:
    """Shortest feature path from the root to the failure witness.

    Pair seeds act as unlabeled links so witnesses on the right operand
    resolve to a path through the merged graph.
    """
    eps: dict[int, list[int]] = {}
    for x, y in pairs:
        eps.setdefault(x, []).append(y)
        eps.setdefault(y, []).append(x)
    prev: dict[int, tuple[int, int] | None] = {root: None}
    q = deque([root])
    while q:
        x = q.popleft()
        if x == target:
            break
        for k in range(starts[x], starts[x + 1]):
            d = dsts[k]
            if d not in prev:
                prev[d] = (x, feats[k])
                q.append(d)
        for d in eps.get(x, ()):
            if d not in prev:
                prev[d] = (x, -1)
                q.append(d)
    if target not in prev:
        return ()
    names: list[str] = []
    cur = target
    while prev[cur] is not None:
        p, f = prev[cur]
        if f >= 0:
            names.append(lattice.feature_name(f))
        cur = p
    return tuple(reversed(names))


def unify(a: FeatureStructure, b: FeatureStructure) -> FeatureStructure | UnificationFailure:
    """Most general structure carrying all information of both, or a failure."""
    if a.lattice is not b.lattice:
        raise LatticeError("operands belong to different lattices")
    off = a.node_count
    types = list(a.types) + list(b.types)
    starts = list(a.arc_start) + [s + len(a.arc_feat) for s in b.arc_start[1:]]
    feats = list(a.arc_feat) + list(b.arc_feat)
    dsts = list(a.arc_dst) + [d + off for d in b.arc_dst]
    pairs = [(0, off)]
    res = kernel.merge(a.lattice.kernel_tables(), types, starts, feats, dsts, 0, pairs, False)
    if res[0] != "ok":
        return _failure(a.lattice, res, starts, feats, dsts, pairs, 0)
    return FeatureStructure._wrap(a.lattice, res)


def subsumes(a: FeatureStructure, b: FeatureStructure) -> bool:
    """True when ``b`` carries all information of ``a`` (``a`` is as general)."""
    if a.lattice is not b.lattice:
        raise LatticeError("operands belong to different lattices")
    lat = a.lattice
    phi = {0: 0}
    stack = [(0, 0)]
    while stack:
        x, y = stack.pop()
        if not lat.subtype(b.types[y], a.types[x]):
            return False
        row = dict(b.arcs(y))
        for f, dx in a.arcs(x):
            dy = row.get(f)
            if dy is None:
                return False
            seen = phi.get(dx)
            if seen is None:
                phi[dx] = dy
                stack.append((dx, dy))
            elif seen != dy:
                return False
    return True


def iso_equal(a: FeatureStructure, b: FeatureStructure) -> bool:
    """Isomorphism up to node renaming; canonical form makes it tuple equality."""
    return a == b


def graft(fs: FeatureStructure, path: str | Sequence[str], sub: FeatureStructure) -> FeatureStructure:
    """Replace the sub-structure at ``path`` with ``sub`` (no unification).

    The arc into ``path`` is re-pointed; anything reachable only through
    the old target drops out during canonicalization.
    """
    if sub.lattice is not fs.lattice:
        raise LatticeError("operands belong to different lattices")
    steps = as_path(path)
    if not steps:
        return sub
    parent = fs.resolve_node(steps[:-1])
    if parent is None:
        raise LatticeError(f"path {'.'.join(steps)!r} is absent")
    fid = fs.lattice.feature_id(steps[-1])
    off = fs.node_count
    types = list(fs.types) + list(sub.types)
    arcs: list[list[tuple[int, int]]] = []
    found = False
    for i in range(fs.node_count):
        row = []
        for f, d in fs.arcs(i):
            if i == parent and f == fid:
                row.append((f, off))
                found = True
            else:
                row.append((f, d))
        arcs.append(row)
    if not found:
        raise LatticeError(f"path {'.'.join(steps)!r} is absent")
    for i in range(sub.node_count):
        arcs.append([(f, d + off) for f, d in sub.arcs(i)])
    out = FeatureStructure.build(fs.lattice, types, arcs, 0, (), check=False)
    assert isinstance(out, FeatureStructure)
    return out
