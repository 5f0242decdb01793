"""Reference enumerators for the O(n) loop gas and the critical random-cluster
model. These work directly on occupied dual edges and bond subsets; they share
only lattice geometry with the height-model code.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .domains import SquarePatch, TriangularPatch

ORACLE_CAP = 24


class OracleCapError(ValueError):
    pass


@dataclass
class OnResult:
    """O(n) loop gas: counts keyed by (occupied honeycomb vertices, loops)."""

    counts: dict
    arcs: dict  # arc edge tuple -> {(vertices, loops): count}

    def Z(self, n: float, x: float) -> float:
        return sum(c * x**m * n**l for (m, l), c in self.counts.items())

    def arc_law(self, n: float, x: float) -> dict:
        w = {k: sum(c * x**m * n**l for (m, l), c in d.items()) for k, d in self.arcs.items()}
        z = sum(w.values())
        return {k: v / z for k, v in w.items()}


def on_partition(patch: TriangularPatch, arc: tuple[int, int] | None = None, cap: int = ORACLE_CAP) -> OnResult:
    """Every set of occupied honeycomb edges with degree 0 or 2 at each
    triangle. Boundary half-edges are occupied exactly at the arc ends.
    """
    ends = set(arc or ())
    if patch.n_sites - len(patch.boundary_sites.nonzero()[0]) > cap:
        raise OracleCapError("patch too large for the O(n) oracle")
    tris = sorted(range(patch.n_triangles), key=lambda t: tuple(np.round(patch.tri_center(t)[::-1], 9)))
    state = {}  # lattice edge -> 0/1
    for e in range(len(patch.edges)):
        if patch.edge_tris[e, 1] < 0:
            state[e] = 1 if e in ends else 0
    counts = defaultdict(int)
    arcs = defaultdict(lambda: defaultdict(int))

    def finish():
        occ = [e for e, v in state.items() if v]
        adj = defaultdict(list)
        for e in occ:
            a, b = patch.edge_tris[e]
            if b >= 0:
                adj[a].append(b)
                adj[b].append(a)
        verts = {t for e in occ for t in patch.edge_tris[e] if t >= 0}
        seen = set()
        loops = 0
        for v in verts:
            if v in seen:
                continue
            stack, comp = [v], []
            seen.add(v)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if all(len(adj[u]) == 2 for u in comp):
                loops += 1
        key = (len(verts), loops)
        counts[key] += 1
        if arc:
            arcs[_arc_path(patch, state, arc[0])][key] += 1

    def rec(i):
        if i == len(tris):
            finish()
            return
        t = tris[i]
        es = [int(e) for e in patch.tri_edges[t]]
        fixed = [state.get(e) for e in es]
        for pattern in ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)):
            if any(f is not None and f != p for f, p in zip(fixed, pattern)):
                continue
            newly = [e for e, f, p in zip(es, fixed, pattern) if f is None]
            for e, f, p in zip(es, fixed, pattern):
                if f is None:
                    state[e] = p
            rec(i + 1)
            for e in newly:
                del state[e]

    rec(0)
    return OnResult(dict(counts), {k: dict(v) for k, v in arcs.items()})


def _arc_path(patch, state, start):
    path = [start]
    e, t = start, int(patch.edge_tris[start, 0])
    while True:
        nxt = [int(f) for f in patch.tri_edges[t] if f != e and state[int(f)]]
        e = nxt[0]
        path.append(e)
        a, b = patch.edge_tris[e]
        t = b if a == t else a
        if t < 0:
            return tuple(path)


# --------------------------------------------------------------------------
# random-cluster model on the even sublattice


@dataclass
class PottsResult:
    """Critical random-cluster sums.

    ``Z_rc`` is sum over bond sets of sqrt(Q)^|bonds| Q^clusters;
    ``Z_loop`` divides out sqrt(Q)^norm_exponent so that it counts
    sqrt(Q) per closed medial loop.
    """

    Q: float
    Z_rc: float
    norm_exponent: int
    law: dict

    @property
    def Z_loop(self) -> float:
        return self.Z_rc / math.sqrt(self.Q) ** self.norm_exponent


class _DSU:
    def __init__(self, items):
        self.p = {i: i for i in items}

    def find(self, i):
        while self.p[i] != i:
            self.p[i] = self.p[self.p[i]]
            i = self.p[i]
        return i

    def union(self, a, b):
        self.p[self.find(a)] = self.find(b)

    def count(self):
        return len({self.find(i) for i in self.p})


def potts_rc_partition(patch: SquarePatch, Q: float, cap: int = ORACLE_CAP) -> PottsResult:
    """FK sum with bonds on the even-sublattice diagonals of the plaquettes.

    Boundary corners of a half-plaquette are always joined. On a Dobrushin
    patch the odd boundary arc is dual-wired and the law of the interface
    between the two boundary clusters is returned, keyed by the lattice
    edges it crosses.
    """
    par = patch.parity
    even = [s for s in range(patch.n_sites) if par[s] == 0]
    odd = [s for s in range(patch.n_sites) if par[s] == 1]
    bonds, dual_of = [], []
    forced_bonds, forced_dual = [], []
    for pl in patch.plaquettes:
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            s, u = int(pl[(k + 1) % 4]), int(pl[(k + 3) % 4])
            (forced_bonds if par[s] == 0 else forced_dual).append((s, u))
            continue
        t = 0 if par[pl[0]] == 0 else 1
        bonds.append((int(pl[t]), int(pl[t + 2])))
        dual_of.append((int(pl[t + 1]), int(pl[(t + 3) % 4])))
    if len(bonds) > cap:
        raise OracleCapError(f"{len(bonds)} bonds exceed the oracle cap of {cap}")
    bnd_even = [s for s in patch.boundary if par[s] == 0]
    bnd_odd = [s for s in patch.boundary if par[s] == 1]
    dobrushin = len(bnd_odd) > 0 and len(bnd_even) > 0
    sq = math.sqrt(Q)
    Z = 0.0
    law = defaultdict(float)
    interface_edges = [(s, t) for s, t in patch.lattice_edges()]
    for mask in range(1 << len(bonds)):
        prim = _DSU(even)
        for s in bnd_even[1:]:
            prim.union(s, bnd_even[0])
        for s, u in forced_bonds:
            prim.union(s, u)
        nb = 0
        closed = []
        for i, (s, u) in enumerate(bonds):
            if mask >> i & 1:
                prim.union(s, u)
                nb += 1
            else:
                closed.append(i)
        k = prim.count()
        w = sq**nb * Q**k
        Z += w
        if dobrushin:
            dual = _DSU(odd)
            for s in bnd_odd[1:]:
                dual.union(s, bnd_odd[0])
            for s, u in forced_dual:
                dual.union(s, u)
            for i in closed:
                dual.union(*dual_of[i])
            pr, dr = prim.find(bnd_even[0]), dual.find(bnd_odd[0])
            key = []
            for s, t in interface_edges:
                e, o = (s, t) if par[s] == 0 else (t, s)
                if prim.find(e) == pr and dual.find(o) == dr:
                    key.append((s, t))
            law[tuple(key)] += w
    if dobrushin:
        law = {k: v / Z for k, v in law.items()}
    # Euler: every cluster and every independent cycle of the wired graph is
    # bounded by one medial component, so loops = 2k + |bonds| - |V|; on a
    # Dobrushin patch one of those components is the open interface
    norm = len(even) - max(len(bnd_even) - 1, 0) + (1 if dobrushin else 0)
    return PottsResult(Q, Z, norm, dict(law))

