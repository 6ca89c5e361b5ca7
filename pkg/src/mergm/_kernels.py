"""Numba kernels for change statistics and the Metropolis-Hastings chain.

All kernels operate on the raw adjacency matrix (uint8) plus the degree
cache, so a single change-statistic implementation backs both the public
`stats.change_statistics` function and the sampler's acceptance ratio.

Term codes: 0=edges, 1=twostars, 2=gwesp, 3=gwnsp, 4=gwdegree.
`wtab[r, k]` holds the geometric weight of class k for term r (zeros for
unweighted terms); wtab[r, 0] == 0 always.
"""

from __future__ import annotations

import numpy as np
from numba import njit

CODE_EDGES = 0
CODE_TWOSTARS = 1
CODE_GWESP = 2
CODE_GWNSP = 3
CODE_GWDEGREE = 4


@njit(cache=True, nogil=True, inline="always")
def _common_count(adj, i, j):
    n = adj.shape[0]
    c = 0
    for h in range(n):
        if adj[i, h] and adj[j, h]:
            c += 1
    return c


@njit(cache=True, nogil=True)
def change_stats_absent(adj, deg, i, j, codes, wtab, out):
    """Add-direction change statistics for dyad {i,j}; requires adj[i,j]==0.

    out[r] = s_r(y with edge ij) - s_r(y without edge ij), evaluated on the
    current matrix, which must have the edge absent.
    """
    n = adj.shape[0]
    for r in range(codes.shape[0]):
        code = codes[r]
        if code == CODE_EDGES:
            out[r] = 1.0
        elif code == CODE_TWOSTARS:
            out[r] = float(deg[i] + deg[j])
        elif code == CODE_GWESP:
            w = wtab[r]
            c = 0
            acc = 0.0
            for h in range(n):
                if adj[i, h] and adj[j, h]:
                    # edges {i,h} and {j,h} each gain one shared partner
                    c += 1
                    e_ih = _common_count(adj, i, h)
                    e_jh = _common_count(adj, j, h)
                    acc += (w[e_ih + 1] - w[e_ih]) + (w[e_jh + 1] - w[e_jh])
            out[r] = w[c] + acc
        elif code == CODE_GWNSP:
            w = wtab[r]
            c = 0
            acc = 0.0
            for h in range(n):
                if h == i or h == j:
                    continue
                aih = adj[i, h]
                ajh = adj[j, h]
                if aih and ajh:
                    c += 1
                elif ajh:
                    # non-edge {i,h} gains shared partner j
                    q = _common_count(adj, i, h)
                    acc += w[q + 1] - w[q]
                elif aih:
                    # non-edge {j,h} gains shared partner i
                    q = _common_count(adj, j, h)
                    acc += w[q + 1] - w[q]
            # the dyad {i,j} itself leaves the non-edge class c
            out[r] = acc - w[c]
        else:
            w = wtab[r]
            out[r] = (w[deg[i] + 1] - w[deg[i]]) + (w[deg[j] + 1] - w[deg[j]])


@njit(cache=True, nogil=True)
def all_dyad_change_stats(adj, deg, codes, wtab, out):
    """Change statistics for every unordered dyad, row-major over i<j.

    `out` has shape (n*(n-1)/2, p). The matrix is temporarily toggled for
    present edges and restored, so the net mutation is zero.
    """
    n = adj.shape[0]
    d = 0
    for i in range(n):
        for j in range(i + 1, n):
            present = adj[i, j] != 0
            if present:
                adj[i, j] = 0
                adj[j, i] = 0
                deg[i] -= 1
                deg[j] -= 1
            change_stats_absent(adj, deg, i, j, codes, wtab, out[d])
            if present:
                adj[i, j] = 1
                adj[j, i] = 1
                deg[i] += 1
                deg[j] += 1
            d += 1


@njit(cache=True, nogil=True)
def mh_run(
    adj,
    deg,
    s,
    theta,
    u,
    codes,
    wtab,
    dyad_i,
    dyad_j,
    unif,
    t0,
    burn,
    thin,
    S_out,
    T_out,
    A_out,
    keep_adj,
    scratch,
):
    """Run a block of single-edge-toggle Metropolis-Hastings proposals.

    Proposals in this block are numbered t0+1 .. t0+len(dyad_i) globally;
    retained sample k (0-based) is recorded after proposal burn+(k+1)*thin.
    The log acceptance ratio for adding edge {i,j} is
    theta . change_stats + u_i + u_j, negated for deletion. Running
    statistics `s` and the degree cache are updated incrementally.

    Returns the number of accepted proposals in this block.
    """
    p = codes.shape[0]
    n = adj.shape[0]
    nkeep = S_out.shape[0]
    acc = 0
    for t in range(dyad_i.shape[0]):
        i = dyad_i[t]
        j = dyad_j[t]
        present = adj[i, j] != 0
        if present:
            adj[i, j] = 0
            adj[j, i] = 0
            deg[i] -= 1
            deg[j] -= 1
        change_stats_absent(adj, deg, i, j, codes, wtab, scratch)
        logr = u[i] + u[j]
        for r in range(p):
            logr += theta[r] * scratch[r]
        if present:
            logr = -logr
        if logr >= 0.0 or unif[t] < np.exp(logr):
            acc += 1
            if present:
                for r in range(p):
                    s[r] -= scratch[r]
            else:
                adj[i, j] = 1
                adj[j, i] = 1
                deg[i] += 1
                deg[j] += 1
                for r in range(p):
                    s[r] += scratch[r]
        elif present:
            adj[i, j] = 1
            adj[j, i] = 1
            deg[i] += 1
            deg[j] += 1
        g = t0 + t + 1
        if g > burn and (g - burn) % thin == 0:
            k = (g - burn) // thin - 1
            if 0 <= k < nkeep:
                for r in range(p):
                    S_out[k, r] = s[r]
                for v in range(n):
                    T_out[k, v] = deg[v]
                if keep_adj:
                    for a in range(n):
                        for b in range(n):
                            A_out[k, a, b] = adj[a, b]
    return acc
