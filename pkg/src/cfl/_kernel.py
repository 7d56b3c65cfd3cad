"""Pure-Python graph-merge kernel.

One primitive serves unification, conjunction, well-typing checks, and
canonicalization: ``merge`` takes a node-typed graph in CSR form plus a
worklist of node pairs to identify, and returns the canonical merged
graph or a typed failure.  The compiled twin in ``_ckernel.pyx`` must
produce bit-identical output, including failure witnesses, so both keep
the same LIFO worklist discipline.

Graph encoding: ``types[i]`` is the type id of node ``i`` (ids >= n_core
are string atoms); node ``i``'s arcs occupy ``arc_feat[arc_start[i]:
arc_start[i+1]]`` / ``arc_dst[...]`` with feature ids strictly ascending.
Feature ids are assigned in lexicographic name order upstream, so sorted
arcs give a name-canonical traversal for free.

Result tuples:
  ("ok", types, starts, feats, dsts)      canonical form, root at index 0
  ("clash", witness, feat, t1, t2)        no common subtype; feat is -1 for
                                          a node-pair clash, else the arc
                                          whose declared value type failed
  ("inappropriate", witness, feat, t, -1) node of type t carries an arc its
                                          type does not license
  ("cycle", witness, -1, -1, -1)          merging created a feature cycle

``witness`` is the smallest original node id in the offending class, so
callers can rebuild a feature path over the input graph deterministically.
"""

from __future__ import annotations

BACKEND = "pure"


def merge(tables, types, arc_start, arc_feat, arc_dst, root, pairs, check_all):
    """Identify node pairs, retype by glb, coerce to well-typedness, canonicalize.

    ``check_all`` re-verifies every node (construction mode); otherwise only
    classes touched by a union are re-checked, which is sound because a
    merge can only narrow types downward.
    """
    n_core = tables.n_core
    glb_tab = tables.glb
    app_start = tables.app_start
    app_feat = tables.app_feat
    app_val = tables.app_val
    atom_ok = tables.atom_ok

    n = len(types)
    parent = list(range(n))
    typ = list(types)
    wit = list(range(n))
    afeat = []
    adst = []
    for i in range(n):
        s, e = arc_start[i], arc_start[i + 1]
        afeat.append(list(arc_feat[s:e]))
        adst.append(list(arc_dst[s:e]))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def glb(a, b):
        if a == b:
            return a
        if a >= n_core or b >= n_core:
            if a >= n_core and b >= n_core:
                return -1
            if a >= n_core:
                return a if atom_ok[b] else -1
            return b if atom_ok[a] else -1
        return glb_tab[a * n_core + b]

    stack = [(p[0], p[1]) for p in pairs]
    touched = []
    while stack:
        x, y = stack.pop()
        rx = find(x)
        ry = find(y)
        if rx == ry:
            continue
        if ry < rx:
            rx, ry = ry, rx
        g = glb(typ[rx], typ[ry])
        if g < 0:
            w = wit[rx] if wit[rx] < wit[ry] else wit[ry]
            return ("clash", w, -1, typ[rx], typ[ry])
        parent[ry] = rx
        if wit[ry] < wit[rx]:
            wit[rx] = wit[ry]
        typ[rx] = g
        fb = afeat[ry]
        if fb:
            fa = afeat[rx]
            da = adst[rx]
            db = adst[ry]
            if fa:
                mf = []
                md = []
                i = j = 0
                la, lb = len(fa), len(fb)
                while i < la and j < lb:
                    if fa[i] == fb[j]:
                        stack.append((da[i], db[j]))
                        mf.append(fa[i])
                        md.append(da[i])
                        i += 1
                        j += 1
                    elif fa[i] < fb[j]:
                        mf.append(fa[i])
                        md.append(da[i])
                        i += 1
                    else:
                        mf.append(fb[j])
                        md.append(db[j])
                        j += 1
                if i < la:
                    mf.extend(fa[i:])
                    md.extend(da[i:])
                if j < lb:
                    mf.extend(fb[j:])
                    md.extend(db[j:])
                afeat[rx] = mf
                adst[rx] = md
            else:
                afeat[rx] = fb
                adst[rx] = db
        afeat[ry] = None
        adst[ry] = None
        touched.append(rx)

    # Well-typing: every arc must be licensed by its class's type, and the
    # target must narrow to the declared value type.  Narrowing propagates.
    if check_all:
        queue = [i for i in range(n) if parent[i] == i]
    else:
        queue = [find(c) for c in touched]
    while queue:
        c = find(queue.pop())
        fl = afeat[c]
        if not fl:
            continue
        t = typ[c]
        if t >= n_core:
            return ("inappropriate", wit[c], fl[0], t, -1)
        s, e = app_start[t], app_start[t + 1]
        row = {}
        for k in range(s, e):
            row[app_feat[k]] = app_val[k]
        dl = adst[c]
        for i in range(len(fl)):
            want = row.get(fl[i], -1)
            if want < 0:
                return ("inappropriate", wit[c], fl[i], t, -1)
            d = find(dl[i])
            g = glb(typ[d], want)
            if g < 0:
                return ("clash", wit[d], fl[i], typ[d], want)
            if g != typ[d]:
                typ[d] = g
                queue.append(d)

    # Canonical extraction: preorder DFS with ascending-feature arcs; a
    # gray target is a back edge, i.e. a feature cycle.
    r = find(root)
    order = {r: 0}
    color = {r: 1}
    out_types = [typ[r]]
    rows_f = [[]]
    rows_d = [[]]
    stack2 = [(r, 0)]
    while stack2:
        c, i = stack2[-1]
        fl = afeat[c]
        if fl is not None and i < len(fl):
            stack2[-1] = (c, i + 1)
            d = find(adst[c][i])
            idx = order.get(d)
            if idx is None:
                idx = len(out_types)
                order[d] = idx
                color[d] = 1
                out_types.append(typ[d])
                rows_f.append([])
                rows_d.append([])
                rows_f[order[c]].append(fl[i])
                rows_d[order[c]].append(idx)
                stack2.append((d, 0))
            else:
                if color[d] == 1:
                    return ("cycle", wit[d], -1, -1, -1)
                rows_f[order[c]].append(fl[i])
                rows_d[order[c]].append(idx)
        else:
            color[c] = 2
            stack2.pop()

    starts = [0]
    feats_out = []
    dsts_out = []
    for i in range(len(out_types)):
        feats_out.extend(rows_f[i])
        dsts_out.extend(rows_d[i])
        starts.append(len(feats_out))
    return ("ok", out_types, starts, feats_out, dsts_out)
