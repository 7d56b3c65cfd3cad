# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph-merge kernel.

Same contract as ``_kernel.merge``, same worklist discipline, same
tie-breaks; outputs (including failure witnesses) are bit-identical with
the pure version, which the backend-equivalence tests enforce.  Node
state and arc rows live in C buffers; only the final canonical form is
materialized as Python lists.
"""

from libc.stdlib cimport free, malloc

BACKEND = "compiled"


cdef struct Rows:
    int **feat
    int **dst
    int *length


cdef inline int cfind(int *parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def merge(tables, types, arc_start, arc_feat, arc_dst, root, pairs, check_all):
    cdef int n_core = tables.n_core
    cdef int[::1] glb_tab = tables.glb
    cdef int[::1] app_start = tables.app_start
    cdef int[::1] app_feat = tables.app_feat
    cdef int[::1] app_val = tables.app_val
    cdef signed char[::1] atom_ok = tables.atom_ok

    cdef Py_ssize_t n = len(types)
    cdef Py_ssize_t n_pairs = len(pairs)
    cdef Py_ssize_t total_arcs = len(arc_feat)
    cdef Py_ssize_t i, j, k
    cdef int x, y, rx, ry, g, a, b, w, c, t, d, want, fid
    cdef int la, lb, s, e

    cdef int *parent = <int *> malloc(n * sizeof(int))
    cdef int *typ = <int *> malloc(n * sizeof(int))
    cdef int *wit = <int *> malloc(n * sizeof(int))
    cdef Rows rows
    rows.feat = <int **> malloc(n * sizeof(int *))
    rows.dst = <int **> malloc(n * sizeof(int *))
    rows.length = <int *> malloc(n * sizeof(int))
    # pair worklist: every push after the seed corresponds to an arc
    # collision, and each collision permanently removes one arc
    cdef Py_ssize_t cap = 2 * (n_pairs + total_arcs) + 8
    cdef int *stack_x = <int *> malloc(cap * sizeof(int))
    cdef int *stack_y = <int *> malloc(cap * sizeof(int))
    cdef int *touched = <int *> malloc((n + 1) * sizeof(int))
    cdef int *order = <int *> malloc(n * sizeof(int))
    cdef int *color = <int *> malloc(n * sizeof(int))
    cdef int *dfs_node = <int *> malloc((n + 1) * sizeof(int))
    cdef int *dfs_arc = <int *> malloc((n + 1) * sizeof(int))
    cdef Py_ssize_t top, n_touched, dfs_top
    cdef int *mf
    cdef int *md
    cdef int *fa
    cdef int *fb
    cdef int *da
    cdef int *db

    if (parent == NULL or typ == NULL or wit == NULL or rows.feat == NULL
            or rows.dst == NULL or rows.length == NULL or stack_x == NULL
            or stack_y == NULL or touched == NULL or order == NULL
            or color == NULL or dfs_node == NULL or dfs_arc == NULL):
        # row contents are still uninitialized; free only the top level
        free(rows.feat)
        free(rows.dst)
        free(rows.length)
        free(parent)
        free(typ)
        free(wit)
        free(stack_x)
        free(stack_y)
        free(touched)
        free(order)
        free(color)
        free(dfs_node)
        free(dfs_arc)
        raise MemoryError()

    for i in range(n):
        parent[i] = <int> i
        typ[i] = types[i]
        wit[i] = <int> i
        rows.feat[i] = NULL
        rows.dst[i] = NULL
        rows.length[i] = 0

    try:
        for i in range(n):
            s = arc_start[i]
            e = arc_start[i + 1]
            la = e - s
            rows.length[i] = la
            if la > 0:
                rows.feat[i] = <int *> malloc(la * sizeof(int))
                rows.dst[i] = <int *> malloc(la * sizeof(int))
                if rows.feat[i] == NULL or rows.dst[i] == NULL:
                    raise MemoryError()
                for j in range(la):
                    rows.feat[i][j] = arc_feat[s + j]
                    rows.dst[i][j] = arc_dst[s + j]

        top = 0
        for i in range(n_pairs):
            p = pairs[i]
            stack_x[top] = p[0]
            stack_y[top] = p[1]
            top += 1

        n_touched = 0
        while top > 0:
            top -= 1
            x = stack_x[top]
            y = stack_y[top]
            rx = cfind(parent, x)
            ry = cfind(parent, y)
            if rx == ry:
                continue
            if ry < rx:
                rx, ry = ry, rx
            g = _glb(glb_tab, atom_ok, n_core, typ[rx], typ[ry])
            if g < 0:
                w = wit[rx] if wit[rx] < wit[ry] else wit[ry]
                return ("clash", w, -1, typ[rx], typ[ry])
            parent[ry] = rx
            if wit[ry] < wit[rx]:
                wit[rx] = wit[ry]
            typ[rx] = g
            lb = rows.length[ry]
            if lb > 0:
                la = rows.length[rx]
                if la > 0:
                    fa = rows.feat[rx]
                    da = rows.dst[rx]
                    fb = rows.feat[ry]
                    db = rows.dst[ry]
                    mf = <int *> malloc((la + lb) * sizeof(int))
                    md = <int *> malloc((la + lb) * sizeof(int))
                    if mf == NULL or md == NULL:
                        free(mf)
                        free(md)
                        raise MemoryError()
                    i = 0
                    j = 0
                    k = 0
                    while i < la and j < lb:
                        if fa[i] == fb[j]:
                            stack_x[top] = da[i]
                            stack_y[top] = db[j]
                            top += 1
                            mf[k] = fa[i]
                            md[k] = da[i]
                            i += 1
                            j += 1
                            k += 1
                        elif fa[i] < fb[j]:
                            mf[k] = fa[i]
                            md[k] = da[i]
                            i += 1
                            k += 1
                        else:
                            mf[k] = fb[j]
                            md[k] = db[j]
                            j += 1
                            k += 1
                    while i < la:
                        mf[k] = fa[i]
                        md[k] = da[i]
                        i += 1
                        k += 1
                    while j < lb:
                        mf[k] = fb[j]
                        md[k] = db[j]
                        j += 1
                        k += 1
                    free(rows.feat[rx])
                    free(rows.dst[rx])
                    rows.feat[rx] = mf
                    rows.dst[rx] = md
                    rows.length[rx] = <int> k
                else:
                    rows.feat[rx] = rows.feat[ry]
                    rows.dst[rx] = rows.dst[ry]
                    rows.length[rx] = lb
                    rows.feat[ry] = NULL
                    rows.dst[ry] = NULL
            if rows.feat[ry] != NULL:
                free(rows.feat[ry])
                free(rows.dst[ry])
                rows.feat[ry] = NULL
                rows.dst[ry] = NULL
            rows.length[ry] = 0
            touched[n_touched] = rx
            n_touched += 1

        # well-typing sweep, LIFO, appending narrowed classes
        queue = []
        if check_all:
            for i in range(n):
                if parent[i] == i:
                    queue.append(i)
        else:
            for i in range(n_touched):
                queue.append(cfind(parent, touched[i]))
        while queue:
            c = cfind(parent, <int> queue.pop())
            la = rows.length[c]
            if la == 0:
                continue
            t = typ[c]
            if t >= n_core:
                return ("inappropriate", wit[c], rows.feat[c][0], t, -1)
            s = app_start[t]
            e = app_start[t + 1]
            fa = rows.feat[c]
            da = rows.dst[c]
            for i in range(la):
                fid = fa[i]
                want = -1
                for k in range(s, e):
                    if app_feat[k] == fid:
                        want = app_val[k]
                        break
                if want < 0:
                    return ("inappropriate", wit[c], fid, t, -1)
                d = cfind(parent, da[i])
                g = _glb(glb_tab, atom_ok, n_core, typ[d], want)
                if g < 0:
                    return ("clash", wit[d], fid, typ[d], want)
                if g != typ[d]:
                    typ[d] = g
                    queue.append(d)

        # canonical extraction: preorder DFS, gray target = feature cycle
        rx = cfind(parent, root)
        for i in range(n):
            order[i] = -1
            color[i] = 0
        order[rx] = 0
        color[rx] = 1
        out_types = [typ[rx]]
        rows_f = [[]]
        rows_d = [[]]
        dfs_node[0] = rx
        dfs_arc[0] = 0
        dfs_top = 1
        while dfs_top > 0:
            c = dfs_node[dfs_top - 1]
            i = dfs_arc[dfs_top - 1]
            if i < rows.length[c]:
                dfs_arc[dfs_top - 1] = <int> i + 1
                d = cfind(parent, rows.dst[c][i])
                if order[d] < 0:
                    order[d] = <int> len(out_types)
                    color[d] = 1
                    out_types.append(typ[d])
                    rows_f.append([])
                    rows_d.append([])
                    rows_f[order[c]].append(rows.feat[c][i])
                    rows_d[order[c]].append(order[d])
                    dfs_node[dfs_top] = d
                    dfs_arc[dfs_top] = 0
                    dfs_top += 1
                else:
                    if color[d] == 1:
                        return ("cycle", wit[d], -1, -1, -1)
                    rows_f[order[c]].append(rows.feat[c][i])
                    rows_d[order[c]].append(order[d])
            else:
                color[c] = 2
                dfs_top -= 1

        starts = [0]
        feats_out = []
        dsts_out = []
        for row in rows_f:
            feats_out.extend(row)
        for row in rows_d:
            dsts_out.extend(row)
            starts.append(len(dsts_out))
        return ("ok", out_types, starts, feats_out, dsts_out)
    finally:
        _free_all(parent, typ, wit, &rows, n, stack_x, stack_y, touched,
                  order, color, dfs_node, dfs_arc)


cdef inline int _glb(int[::1] glb_tab, signed char[::1] atom_ok, int n_core,
                     int a, int b) nogil:
    if a == b:
        return a
    if a >= n_core or b >= n_core:
        if a >= n_core and b >= n_core:
            return -1
        if a >= n_core:
            return a if atom_ok[b] else -1
        return b if atom_ok[a] else -1
    return glb_tab[a * n_core + b]


cdef void _free_all(int *parent, int *typ, int *wit, Rows *rows, Py_ssize_t n,
                    int *stack_x, int *stack_y, int *touched, int *order,
                    int *color, int *dfs_node, int *dfs_arc):
    cdef Py_ssize_t i
    if rows.feat != NULL and rows.dst != NULL:
        for i in range(n):
            free(rows.feat[i])
            free(rows.dst[i])
    free(rows.feat)
    free(rows.dst)
    free(rows.length)
    free(parent)
    free(typ)
    free(wit)
    free(stack_x)
    free(stack_y)
    free(touched)
    free(order)
    free(color)
    free(dfs_node)
    free(dfs_arc)
