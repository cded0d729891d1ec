"""Numba kernels for tree construction and prediction.

The tree is stored as flat parallel arrays (feature, threshold, left, right,
value, count). Internal nodes have feature >= 0; leaves have feature == -1.
Node 0 is the root and children always carry higher indices than their parent.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_tree(x, y, w, min_leaf):
    """Grow a regression tree by greedy variance-reduction splitting.

    x: (n, f) float64 feature matrix, y: (n,) float64 targets,
    w: (n,) float64 integer-valued sample weights (bootstrap multiplicities),
    min_leaf: minimum total weight allowed in a leaf.

    Returns (feature, threshold, left, right, value, count, n_nodes, importance)
    where importance[j] is the total weighted-SSE decrease attributed to
    splits on feature j.
    """
    n, f = x.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes)
    count = np.zeros(max_nodes, np.int64)
    importance = np.zeros(f)

    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    vals = np.empty(n)

    stack_node = np.empty(max_nodes, np.int64)
    stack_lo = np.empty(max_nodes, np.int64)
    stack_hi = np.empty(max_nodes, np.int64)
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    top = 0
    n_nodes = 1

    while top >= 0:
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        top -= 1
        m = hi - lo

        # Two-pass weighted mean / SSE: stable on near-constant leaves.
        tw = 0.0
        ty = 0.0
        for i in range(lo, hi):
            r = idx[i]
            tw += w[r]
            ty += w[r] * y[r]
        mean = ty / tw
        sse = 0.0
        for i in range(lo, hi):
            r = idx[i]
            d = y[r] - mean
            sse += w[r] * d * d

        value[node] = mean
        count[node] = np.int64(round(tw))

        if tw < 2.0 * min_leaf or sse <= 0.0:
            continue

        best_sse = np.inf
        best_f = -1
        best_thr = 0.0
        for j in range(f):
            for i in range(m):
                vals[i] = x[idx[lo + i], j]
            order = np.argsort(vals[:m])
            cw = 0.0
            cwy = 0.0
            cwy2 = 0.0
            for p in range(m - 1):
                r = idx[lo + order[p]]
                d = y[r] - mean
                cw += w[r]
                cwy += w[r] * d
                cwy2 += w[r] * d * d
                v0 = vals[order[p]]
                v1 = vals[order[p + 1]]
                if v0 == v1:
                    continue
                rw = tw - cw
                if cw < min_leaf or rw < min_leaf:
                    continue
                rwy = -cwy
                rwy2 = sse - cwy2
                child_sse = (cwy2 - cwy * cwy / cw) + (rwy2 - rwy * rwy / rw)
                # Strict < keeps the lowest feature index, lowest threshold.
                if child_sse < best_sse:
                    best_sse = child_sse
                    best_f = j
                    thr = 0.5 * (v0 + v1)
                    # Midpoints of near-adjacent floats can round up to v1,
                    # which would leave the right child empty; clamp below.
                    if thr >= v1:
                        thr = v0
                    best_thr = thr

        if best_f < 0:
            continue

        # Stable partition of idx[lo:hi] around the split.
        nl = 0
        for i in range(lo, hi):
            if x[idx[i], best_f] <= best_thr:
                nl += 1
        if nl == 0 or nl == m:
            continue  # degenerate threshold; keep the node as a leaf

        importance[best_f] += sse - best_sse
        pl = 0
        pr = nl
        for i in range(lo, hi):
            r = idx[i]
            if x[r, best_f] <= best_thr:
                buf[pl] = r
                pl += 1
            else:
                buf[pr] = r
                pr += 1
        for i in range(m):
            idx[lo + i] = buf[i]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lchild
        right[node] = rchild

        top += 1
        stack_node[top] = rchild
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        top += 1
        stack_node[top] = lchild
        stack_lo[top] = lo
        stack_hi[top] = lo + nl

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], count[:n_nodes], importance)


@njit(cache=True)
def predict_batch(feature, threshold, left, right, value, x):
    """Route each row of x to its leaf; returns the leaf values."""
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out
