"""Independent brute-force oracles shared by unit and acceptance tests."""

import math
from fractions import Fraction
from itertools import combinations

import numpy as np

INF = math.inf


def floyd_warshall(n, edges):
    """All-pairs unit-weight distances over directed ``edges`` (u, v)."""
    d = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for u, v in edges:
        if u != v:
            d[u][v] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def scc_partition(dist):
    """Mutual reachability classes, as a set of frozensets."""
    n = len(dist)
    return {frozenset(j for j in range(n) if dist[i][j] < INF and dist[j][i] < INF) for i in range(n)}


def dense_pagerank(n, edges, damping=0.85, iters=10_000, tol=1e-15):
    """Google-matrix power iteration with uniform teleport and dangling rows."""
    A = np.zeros((n, n))
    for u, v in set(edges):
        if u != v:
            A[u, v] = 1.0
    out = A.sum(axis=1)
    P = np.where(out[:, None] > 0, A / np.maximum(out, 1)[:, None], 1.0 / n)
    G = damping * P + (1 - damping) / n
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        nxt = r @ G
        if np.abs(nxt - r).sum() < tol:
            return nxt
        r = nxt
    return r


# -- clone detection ----------------------------------------------------------

def brute_force_clones(channels, threshold=Fraction(3, 10), min_words=6):
    """Exhaustive O(n^2) clone relation.

    ``channels`` maps id -> (language, [(date, text, forwarded), ...]).
    Texts are compared after whitespace collapse; ratios are exact fractions.
    """
    elig = {}
    for cid, (_, msgs) in channels.items():
        first = {}
        for date, body, forwarded in msgs:
            norm = " ".join(body.split())
            low = norm.lower()
            service = ("violated" in low and "terms of service" in low) or ("unavailable" in low and "copyright" in low)
            if forwarded or service or len(norm.split()) < min_words:
                continue
            first[norm] = min(date, first.get(norm, date))
        elig[cid] = first
    out = set()
    for a in channels:
        for b in channels:
            if a == b or channels[a][0] != channels[b][0] or not elig[b]:
                continue
            shared = [t for t in elig[b] if t in elig[a]]
            if not shared:
                continue
            ratio = Fraction(len(shared), len(elig[b]))
            if ratio >= threshold and all(elig[b][t] > elig[a][t] for t in shared):
                out.add((a, b, len(shared), len(elig[b])))
    return out


# -- reachability for the crawl simulator ---------------------------------------

def crawl_closure(origins_of, seeds):
    """Least set containing ``seeds`` and closed under ``origins_of``."""
    closed = set(seeds)
    changed = True
    while changed:
        changed = False
        for c in list(closed):
            new = origins_of(c) - closed
            if new:
                closed |= new
                changed = True
    return closed


# -- adjusted Rand index ----------------------------------------------------------

def adjusted_rand(a, b):
    a, b = list(a), list(b)
    n = len(a)
    pairs = lambda k: k * (k - 1) / 2  # noqa: E731
    cont = {}
    for x, y in zip(a, b):
        cont[(x, y)] = cont.get((x, y), 0) + 1
    ra, rb = {}, {}
    for (x, y), c in cont.items():
        ra[x] = ra.get(x, 0) + c
        rb[y] = rb.get(y, 0) + c
    index = sum(pairs(c) for c in cont.values())
    sa = sum(pairs(c) for c in ra.values())
    sb = sum(pairs(c) for c in rb.values())
    expected = sa * sb / pairs(n)
    top = (sa + sb) / 2
    return 1.0 if top == expected else (index - expected) / (top - expected)


# -- Shapley by permutation-free subset enumeration ---------------------------------

def shapley_by_subsets(value, d):
    """phi_i = sum over S not containing i of |S|!(d-|S|-1)!/d! (v(S+i) - v(S))."""
    phi = []
    for i in range(d):
        rest = [j for j in range(d) if j != i]
        total = Fraction(0)
        for k in range(d):
            w = Fraction(math.factorial(k) * math.factorial(d - k - 1), math.factorial(d))
            for S in combinations(rest, k):
                total += w * (Fraction(value(frozenset(S) | {i})) - Fraction(value(frozenset(S))))
        phi.append(total)
    return phi
