"""Type lattice with subsumption, greatest lower bounds, and appropriateness.

The lattice orders a finite inventory of named types by declared
parent/child edges, rooted at the builtin ``*top*``.  Lower means more
specific.  ``glb`` computes the most general common subtype of a pair
when one exists; ``validate`` rejects inventories where some pair has
several incomparable maximal candidates, which is what keeps unification
deterministic downstream.

String atoms ("ye", "kafa", ...) occupy a reserved region under the
builtin ``string-atom`` type.  They are interned on demand, never carry
features, and two distinct atoms have no common subtype.

Appropriateness declarations (which features a type licenses, and the
type each feature's value must satisfy) are inherited down the order and
may only narrow: a subtype restating a feature must declare a value type
compatible with every declaration above it.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

TOP = "*top*"
STRING_ATOM = "string-atom"

TOP_ID = 0
STRING_ATOM_ID = 1


class LatticeError(Exception):
    """Malformed lattice construction or use."""


class MultipleGlbError(LatticeError):
    """A pair of types has several incomparable maximal common subtypes.

    Cannot occur on a lattice whose ``validate()`` returned no
    diagnostics.
    """


class VoiceValue(Enum):
    """Three-valued voice marking carried by verb morphology features.

    PLUS records an observed suffix, MINUS its observed absence, and NIL
    the default "no commitment yet" state.  NIL is a subtype of MINUS,
    so an unmarked frame can still satisfy a sense demanding absence,
    while PLUS and NIL never unify.
    """

    PLUS = "voice-plus"
    MINUS = "voice-minus"
    NIL = "voice-nil"

    @property
    def type_name(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding.  ``subjects`` names the offending types."""

    kind: str
    message: str
    subjects: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


@dataclass(frozen=True)
class KernelTables:
    """Dense lookup tables consumed by the merge kernels.

    ``glb`` is row-major n_core x n_core with -1 for "no common subtype".
    The appropriateness relation is in CSR form: row ``t`` spans
    ``app_start[t]:app_start[t+1]`` of ``app_feat``/``app_val``, with
    feature ids ascending inside a row.  ``atom_ok[t]`` is 1 when string
    atoms are subtypes of ``t``.
    """

    n_core: int
    glb: array
    app_start: array
    app_feat: array
    app_val: array
    atom_ok: array


class TypeLattice:
    """Immutable type order plus appropriateness, shared by all structures.

    ``types`` maps each declared name to its parent names; parentless
    entries attach to ``*top*``.  ``approp`` maps a type name to its
    feature declarations.  Feature ids are assigned in sorted name order
    so that id order and lexicographic order agree everywhere downstream.

    Atom interning is the only post-construction mutation and is
    append-only, so instances are safe to share read-only.
    """

    def __init__(
        self,
        types: Mapping[str, Iterable[str]],
        approp: Mapping[str, Mapping[str, str]] = (),
    ) -> None:
        names = [TOP, STRING_ATOM]
        for name in types:
            if name in (TOP, STRING_ATOM):
                continue
            names.append(name)
        self._ids = {name: i for i, name in enumerate(names)}
        if len(self._ids) != len(names):
            raise LatticeError("duplicate type name in declarations")
        self._names = names
        self.n_core = len(names)

        parents: list[set[int]] = [set() for _ in names]
        for name, ps in types.items():
            if name in (TOP, STRING_ATOM):
                if set(ps) - {TOP}:
                    raise LatticeError(f"builtin type {name!r} cannot be re-parented")
                continue
            tid = self._ids[name]
            for p in ps:
                pid = self._ids.get(p)
                if pid is None:
                    raise LatticeError(f"unknown parent type {p!r} of {name!r}")
                parents[tid].add(pid)
            if not parents[tid]:
                parents[tid].add(TOP_ID)
        parents[STRING_ATOM_ID].add(TOP_ID)
        self._parents = parents
        self._children: list[set[int]] = [set() for _ in names]
        for tid, ps in enumerate(parents):
            for pid in ps:
                self._children[pid].add(tid)

        feat_names: set[str] = set()
        decls = dict(approp) if approp else {}
        for tname, feats in decls.items():
            if tname not in self._ids:
                raise LatticeError(f"appropriateness on unknown type {tname!r}")
            feat_names.update(feats)
        self._feat_names = sorted(feat_names)
        self._feat_ids = {f: i for i, f in enumerate(self._feat_names)}
        self._declared_app: dict[int, dict[int, int]] = {}
        for tname, feats in decls.items():
            row = {}
            for fname, vname in feats.items():
                vid = self._ids.get(vname)
                if vid is None:
                    raise LatticeError(
                        f"appropriateness value {vname!r} for {tname}.{fname} is not a declared type"
                    )
                row[self._feat_ids[fname]] = vid
            self._declared_app[self._ids[tname]] = row

        self._anc, self._desc, self._cyclic = self._closures()
        self._atom_ids: dict[str, int] = {}
        self._atom_texts: list[str] = []
        self._glb_memo: dict[int, int | None] = {}
        self._eff_app_memo: dict[int, dict[int, int]] = {}
        self._tables: KernelTables | None = None

    # -- construction helpers -------------------------------------------------

    def _closures(self) -> tuple[list[int], list[int], bool]:
        n = self.n_core
        anc = [0] * n
        state = [0] * n  # 0 unvisited, 1 in progress, 2 done
        cyclic = False

        for start in range(n):
            if state[start] == 2:
                continue
            stack = [(start, iter(self._parents[start]))]
            state[start] = 1
            while stack:
                tid, it = stack[-1]
                advanced = False
                for pid in it:
                    if state[pid] == 1:
                        cyclic = True  # back edge
                        continue
                    if state[pid] == 0:
                        state[pid] = 1
                        stack.append((pid, iter(self._parents[pid])))
                        advanced = True
                        break
                if advanced:
                    continue
                mask = 1 << tid
                for pid in self._parents[tid]:
                    if state[pid] == 2:
                        mask |= anc[pid]
                state[tid] = 2
                stack.pop()
                anc[tid] = mask

        desc = [0] * n
        for tid in range(n):
            m = anc[tid]
            while m:
                low = m & -m
                desc[low.bit_length() - 1] |= 1 << tid
                m ^= low
        return anc, desc, cyclic

    # -- naming ---------------------------------------------------------------

    def type_id(self, name: str) -> int:
        tid = self._ids.get(name)
        if tid is None:
            tid = self._atom_ids.get(name)  # serialized atoms round-trip quoted, not here
        if tid is None:
            raise LatticeError(f"unknown type {name!r}")
        return tid

    def has_type(self, name: str) -> bool:
        return name in self._ids

    def type_name(self, tid: int) -> str:
        if tid >= self.n_core:
            return self._atom_texts[tid - self.n_core]
        return self._names[tid]

    def feature_id(self, name: str) -> int:
        fid = self._feat_ids.get(name)
        if fid is None:
            raise LatticeError(f"unknown feature {name!r}")
        return fid

    def has_feature(self, name: str) -> bool:
        return name in self._feat_ids

    def feature_name(self, fid: int) -> str:
        return self._feat_names[fid]

    @property
    def feature_names(self) -> list[str]:
        return list(self._feat_names)

    @property
    def type_names(self) -> list[str]:
        return list(self._names)

    # -- atoms ----------------------------------------------------------------

    def intern_atom(self, text: str) -> int:
        """Return the type id of the string atom ``text``, creating it once."""
        tid = self._atom_ids.get(text)
        if tid is None:
            tid = self.n_core + len(self._atom_texts)
            self._atom_ids[text] = tid
            self._atom_texts.append(text)
        return tid

    def is_atom(self, tid: int) -> bool:
        return tid >= self.n_core

    def atom_text(self, tid: int) -> str:
        if tid < self.n_core:
            raise LatticeError(f"type {self.type_name(tid)!r} is not a string atom")
        return self._atom_texts[tid - self.n_core]

    # -- order ----------------------------------------------------------------

    def subtype(self, a: int, b: int) -> bool:
        """True when ``a`` is at or below ``b``."""
        if a == b:
            return True
        if a >= self.n_core:
            return b < self.n_core and bool(self._anc[STRING_ATOM_ID] >> b & 1)
        if b >= self.n_core:
            return False
        return bool(self._anc[a] >> b & 1)

    def _maximal_common(self, a: int, b: int) -> list[int]:
        common = self._desc[a] & self._desc[b]
        out = []
        m = common
        while m:
            low = m & -m
            t = low.bit_length() - 1
            if not (self._anc[t] & ~low & common):
                out.append(t)
            m ^= low
        return out

    def glb(self, a: int, b: int) -> int | None:
        """Most general common subtype, or None when the pair is inconsistent.

        Raises MultipleGlbError on lattices that fail validation.
        """
        if a == b:
            return a
        if a >= self.n_core or b >= self.n_core:
            if a >= self.n_core and b >= self.n_core:
                return None  # distinct atoms
            atom, t = (a, b) if a >= self.n_core else (b, a)
            return atom if self.subtype(atom, t) else None
        key = a * self.n_core + b if a < b else b * self.n_core + a
        try:
            return self._glb_memo[key]
        except KeyError:
            pass
        cands = self._maximal_common(a, b)
        if len(cands) > 1:
            raise MultipleGlbError(
                f"types {self.type_name(a)!r} and {self.type_name(b)!r} have "
                f"{len(cands)} maximal common subtypes: "
                + ", ".join(self.type_name(t) for t in cands)
            )
        got = cands[0] if cands else None
        self._glb_memo[key] = got
        return got

    # -- appropriateness --------------------------------------------------------

    def effective_approp(self, tid: int) -> dict[int, int]:
        """Features licensed at ``tid``: feature id -> required value type id.

        Inherited declarations are folded with glb; validation guarantees
        the fold never bottoms out.
        """
        if tid >= self.n_core:
            return {}
        try:
            return self._eff_app_memo[tid]
        except KeyError:
            pass
        row: dict[int, int] = {}
        m = self._anc[tid]
        while m:
            low = m & -m
            t = low.bit_length() - 1
            m ^= low
            for fid, vid in self._declared_app.get(t, {}).items():
                if fid in row:
                    g = self.glb(row[fid], vid)
                    if g is None:
                        raise LatticeError(
                            f"feature {self.feature_name(fid)!r} has incompatible value "
                            f"types along ancestors of {self.type_name(tid)!r}"
                        )
                    row[fid] = g
                else:
                    row[fid] = vid
        self._eff_app_memo[tid] = row
        return row

    def approp(self, tid: int, fid: int) -> int | None:
        return self.effective_approp(tid).get(fid)

    # -- validation -------------------------------------------------------------

    def validate(self) -> list[Diagnostic]:
        """Check lattice well-formedness; empty list means usable.

        Findings: parent cycles, types unreachable from *top*, pairs with
        several maximal common subtypes (bounded completeness), value-type
        clashes in inherited appropriateness, and declared subtypes inside
        the reserved string-atom region.
        """
        out: list[Diagnostic] = []
        if self._cyclic:
            on_cycle = [
                self._names[t]
                for t in range(self.n_core)
                if any(self._anc[p] >> t & 1 for p in self._parents[t])
            ]
            out.append(
                Diagnostic(
                    "cycle",
                    "parent edges form a cycle through: " + ", ".join(sorted(on_cycle)),
                    tuple(sorted(on_cycle)),
                )
            )
        for t in range(self.n_core):
            if not (self._anc[t] >> TOP_ID & 1):
                out.append(
                    Diagnostic(
                        "unreachable",
                        f"type {self._names[t]!r} does not reach {TOP}",
                        (self._names[t],),
                    )
                )
        if self._cyclic:
            return out  # order-dependent checks are meaningless on a cyclic graph

        strict_desc = self._desc[STRING_ATOM_ID] & ~(1 << STRING_ATOM_ID)
        m = strict_desc
        while m:
            low = m & -m
            t = low.bit_length() - 1
            m ^= low
            out.append(
                Diagnostic(
                    "atom-subtype",
                    f"type {self._names[t]!r} is declared below {STRING_ATOM}; "
                    "the atom region admits no declared subtypes",
                    (self._names[t],),
                )
            )
        if self._declared_app.get(STRING_ATOM_ID):
            out.append(
                Diagnostic(
                    "atom-approp",
                    f"{STRING_ATOM} cannot license features: atoms have no arcs",
                    (STRING_ATOM,),
                )
            )

        for a in range(self.n_core):
            for b in range(a + 1, self.n_core):
                cands = self._maximal_common(a, b)
                if len(cands) > 1:
                    out.append(
                        Diagnostic(
                            "multiple-glb",
                            f"types {self._names[a]!r} and {self._names[b]!r} have "
                            "maximal common subtypes "
                            + ", ".join(sorted(self._names[t] for t in cands)),
                            (self._names[a], self._names[b]),
                        )
                    )

        if not any(d.kind == "multiple-glb" for d in out):
            for t in range(self.n_core):
                try:
                    self.effective_approp(t)
                except LatticeError as exc:
                    out.append(Diagnostic("approp-clash", str(exc), (self._names[t],)))
        return out

    # -- kernel interface --------------------------------------------------------

    def kernel_tables(self) -> KernelTables:
        """Dense tables for the merge kernels; built once and cached."""
        if self._tables is not None:
            return self._tables
        n = self.n_core
        flat = [-1] * (n * n)
        for a in range(n):
            flat[a * n + a] = a
            for b in range(a + 1, n):
                g = self.glb(a, b)
                if g is not None:
                    flat[a * n + b] = g
                    flat[b * n + a] = g
        glb_tab = array("i", flat)

        app_start = array("i", [0] * (n + 1))
        feats: list[int] = []
        vals: list[int] = []
        for t in range(n):
            row = self.effective_approp(t)
            for fid in sorted(row):
                feats.append(fid)
                vals.append(row[fid])
            app_start[t + 1] = len(feats)
        atom_ok = array("b", [0] * n)
        m = self._anc[STRING_ATOM_ID]
        while m:
            low = m & -m
            atom_ok[low.bit_length() - 1] = 1
            m ^= low
        self._tables = KernelTables(
            n_core=n,
            glb=glb_tab,
            app_start=app_start,
            app_feat=array("i", feats),
            app_val=array("i", vals),
            atom_ok=atom_ok,
        )
        return self._tables
