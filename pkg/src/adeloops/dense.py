"""Dense ADE height model on the square lattice.

Neighbouring heights are strictly adjacent on the graph. A plaquette with
corners (a, b, c, d) weighs

    (S_b S_d / S_a S_c)^(1/4) [a = c] + (S_a S_c / S_b S_d)^(1/4) [b = d].

Choosing one term per plaquette joins one diagonal pair; the medial lines
wrap the other two corners, and each wrap carries (S_corner / S_diag)^(1/4).

Boundary half-plaquettes (one corner outside the region) carry only the
term joining the two boundary corners, weighted by the wrap of the middle
corner. This is how wired boundaries are realised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .dilute import DEFAULT_CAP, EnumerationCapError, tv_distance
from .domains import BoundaryCondition, DomainError, SquarePatch, boundary_heights, require_valid
from .spectra import GraphSpec, SpectralData

SPLIT_CONVENTIONS = ("split-left", "split-right", "random")


def _fourth_roots(S):
    S = np.asarray(S, dtype=float)
    if np.any(S == 0):
        raise ValueError("eigenvector has a zero component; plaquette weights are undefined")
    r = np.abs(S) ** 0.25
    if np.any(S < 0):
        return r * np.exp(1j * np.pi / 4 * (S < 0))
    return r


def _tables(spec: SpectralData):
    """Full-plaquette and half-plaquette weight tables on internal indices."""
    adj = spec.graph.adjacency.astype(bool)
    k = len(adj)
    r = _fourth_roots(spec.S)
    dtype = r.dtype
    full = np.zeros((k, k, k, k), dtype=dtype)
    half = np.zeros((k, k, k), dtype=dtype)
    for a in range(k):
        for b in np.flatnonzero(adj[a]):
            for c in np.flatnonzero(adj[b]):
                half[a, b, c] = r[b] / r[a] if a == c else 0
                for d in np.flatnonzero(adj[c]):
                    if not adj[d, a]:
                        continue
                    w = 0
                    if a == c:
                        w = w + r[b] * r[d] / (r[a] * r[c])
                    if b == d:
                        w = w + r[a] * r[c] / (r[b] * r[d])
                    full[a, b, c, d] = w
    return full, half


def plaquette_weight(a: int, b: int, c: int, d: int, spec: SpectralData, strict: bool = False):
    """Weight of one plaquette with corner heights given as graph labels."""
    g = spec.graph
    ia, ib, ic, id_ = (g.index(h) for h in (a, b, c, d))
    adj = g.adjacency
    pairs = ((ia, ib), (ib, ic), (ic, id_), (id_, ia))
    if not all(adj[p, q] for p, q in pairs):
        if strict:
            raise ValueError(f"plaquette ({a},{b},{c},{d}) has non-adjacent consecutive heights")
        return 0.0
    r = _fourth_roots(spec.S)
    w = 0
    if ia == ic:
        w = w + r[ib] * r[id_] / (r[ia] * r[ic])
    if ib == id_:
        w = w + r[ia] * r[ic] / (r[ib] * r[id_])
    if isinstance(w, complex) and w.imag == 0:
        return w.real
    return w


def config_weight_square(patch: SquarePatch, values: np.ndarray, spec: SpectralData):
    """Product of plaquette weights for internal node indices ``values``."""
    full, half = _tables(spec)
    adj = spec.graph.adjacency
    for s, t in patch.lattice_edges():
        if not adj[values[s], values[t]]:
            return 0.0
    w = 1.0
    for pl in patch.plaquettes:
        if np.all(pl >= 0):
            w = w * full[tuple(values[pl])]
        else:
            k = int(np.flatnonzero(pl < 0)[0])
            w = w * half[values[pl[(k + 1) % 4]], values[pl[(k + 2) % 4]], values[pl[(k + 3) % 4]]]
    return w


# --------------------------------------------------------------------------
# exact height enumeration


def _compile(patch: SquarePatch, fixed: dict, graph: GraphSpec, cap: int):
    free = patch.free_sites
    if len(free) > cap:
        raise EnumerationCapError(
            f"{len(free)} free sites exceed the cap of {cap} "
            f"(at most {graph.node_count ** len(free):.3g} configurations)"
        )
    init = np.full(patch.n_sites, -1, dtype=np.int64)
    for s, h in fixed.items():
        init[s] = graph.index(h)
    if np.any(np.delete(init, free) < 0):
        raise DomainError("boundary sites without heights")
    order = np.full(patch.n_sites, -1, dtype=np.int64)
    order[free] = np.arange(len(free))
    nbrs = patch.neighbors()
    chk_ptr, chk = [0], []
    for k, s in enumerate(free):
        chk.extend(t for t in nbrs[s] if order[t] < k)
        chk_ptr.append(len(chk))
    pl = patch.plaquettes
    last = np.where(pl >= 0, order[np.maximum(pl, 0)], -1).max(axis=1)
    pl_ptr, pls = [0], []
    for k in range(len(free)):
        pls.extend(np.flatnonzero(last == k).tolist())
        pl_ptr.append(len(pls))
    return (free.astype(np.int64), init, np.array(chk_ptr, dtype=np.int64), np.array(chk, dtype=np.int64),
            np.array(pl_ptr, dtype=np.int64), np.array(pls, dtype=np.int64), np.flatnonzero(last < 0))


@nb.njit(cache=True)
def _plaq_value(pl, H, full, half):
    if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
        return full[H[pl[0]], H[pl[1]], H[pl[2]], H[pl[3]]]
    k = 0
    while pl[k] >= 0:
        k += 1
    return half[H[pl[(k + 1) % 4]], H[pl[(k + 2) % 4]], H[pl[(k + 3) % 4]]]


@nb.njit(cache=True)
def _dfs_square(init, free, chk_ptr, chk, pl_ptr, pls, plaquettes, adj, full, half, w0, out_conf, out_w, emit):
    nf = free.shape[0]
    k_nodes = adj.shape[0]
    H = init.copy()
    total = w0 * 0.0
    if nf == 0:
        if emit:
            out_w[0] = w0
        return w0, 1
    choice = np.full(nf, -1, dtype=np.int64)
    wacc = np.zeros(nf + 1, dtype=full.dtype)
    wacc[0] = w0
    count = 0
    k = 0
    while k >= 0:
        choice[k] += 1
        if choice[k] >= k_nodes:
            H[free[k]] = -1
            k -= 1
            continue
        h = choice[k]
        ok = True
        for j in range(chk_ptr[k], chk_ptr[k + 1]):
            if not adj[h, H[chk[j]]]:
                ok = False
                break
        if not ok:
            continue
        H[free[k]] = h
        w = wacc[k]
        for j in range(pl_ptr[k], pl_ptr[k + 1]):
            w = w * _plaq_value(plaquettes[pls[j]], H, full, half)
        if w == 0:
            continue
        if k == nf - 1:
            total += w
            if emit:
                for i in range(nf):
                    out_conf[count, i] = H[free[i]]
                out_w[count] = w
            count += 1
        else:
            wacc[k + 1] = w
            k += 1
            choice[k] = -1
    return total, count


@dataclass
class SquareEnumeration:
    Z: float | complex
    count: int
    configs: np.ndarray | None = None
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def enumerate_heights_square(patch: SquarePatch, bc: BoundaryCondition, spec: SpectralData,
                             cap: int = DEFAULT_CAP, stream: bool = False) -> SquareEnumeration:
    """Exact sum over dense height configurations (nonzero weights only)."""
    fixed = require_valid(patch, bc, spec.graph, "dense")
    free, init, chk_ptr, chk, pl_ptr, pls, const = _compile(patch, fixed, spec.graph, cap)
    full, half = _tables(spec)
    adj = spec.graph.adjacency.astype(np.bool_)
    w0 = full.dtype.type(1)
    for p in const:
        w0 = w0 * _plaq_value(patch.plaquettes[p], init, full, half)
    args = (init, free, chk_ptr, chk, pl_ptr, pls, patch.plaquettes, adj, full, half, w0)
    nf = len(free)
    Z, count = _dfs_square(*args, np.zeros((1, max(nf, 1)), dtype=np.int64), np.zeros(1, dtype=full.dtype), False)
    out = SquareEnumeration(_real_if_close(Z), int(count),
                            meta={"free_sites": nf, "plaquette_form": "symmetrized",
                                  "boundary": "half-plaquettes join their boundary corners"})
    if stream:
        conf = np.zeros((max(count, 1), max(nf, 1)), dtype=np.int64)
        ws = np.zeros(max(count, 1), dtype=full.dtype)
        _dfs_square(*args, conf, ws, True)
        configs = np.repeat(init[None, :], count, axis=0)
        if nf:
            configs[:, free] = conf[:count, :nf]
        out.configs, out.weights = configs, ws[:count]
    return out


def _real_if_close(z):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-13 * max(1.0, abs(z)) else z


# --------------------------------------------------------------------------
# medial lattice


@dataclass(frozen=True, eq=False)
class MedialGraph:
    """Medial nodes are lattice edges; each plaquette term gives two arcs.

    ``arcs[p, t]`` holds the two (node, node, corner) arcs of term ``t`` of
    plaquette ``p``: term 0 joins corners 0 and 2 (arcs wrap corners 1 and 3),
    term 1 joins corners 1 and 3. A node of -1 marks a missing arc.
    """

    edges: np.ndarray  # (E, 2) site pairs
    arcs: np.ndarray  # (P, 2, 2, 3)
    forced: np.ndarray  # (P,) -1 free, else forced term
    open_nodes: np.ndarray  # medial nodes lying on a single plaquette


def medial_graph(patch: SquarePatch) -> MedialGraph:
    edges = patch.lattice_edges()
    eid = {e: i for i, e in enumerate(edges)}

    def node(s, t):
        if s < 0 or t < 0:
            return -1
        return eid[(min(s, t), max(s, t))]

    P = len(patch.plaquettes)
    arcs = np.full((P, 2, 2, 3), -1, dtype=np.int64)
    forced = np.full(P, -1, dtype=np.int64)
    for p, pl in enumerate(patch.plaquettes):
        for term in (0, 1):
            for j, corner in enumerate((term + 1, (term + 3) % 4)):
                s = pl[corner]
                if s < 0:
                    continue
                u, v = pl[(corner - 1) % 4], pl[(corner + 1) % 4]
                arcs[p, term, j] = (node(s, u), node(s, v), corner)
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            # join the two corners next to the missing one
            forced[p] = (k + 1) % 2
            arcs[p, 1 - forced[p]] = -1
    per_node = np.zeros(len(edges), dtype=np.int64)
    for p in range(P):
        for n_ in {int(x) for x in arcs[p, :, :, :2].ravel() if x >= 0}:
            per_node[n_] += 1
    return MedialGraph(np.array(edges, dtype=np.int64).reshape(-1, 2), arcs, forced,
                       np.flatnonzero(per_node == 1))


@nb.njit(cache=True)
def _fk_hist(arcs, free_pl, forced, n_nodes, n_open):
    """Histogram of closed medial loops over all free term choices."""
    P = arcs.shape[0]
    nfree = free_pl.shape[0]
    hist = np.zeros(n_nodes + 2, dtype=np.int64)
    term = forced.copy()
    parent = np.arange(n_nodes)
    for mask in range(1 << nfree):
        for i in range(nfree):
            term[free_pl[i]] = (mask >> i) & 1
        for i in range(n_nodes):
            parent[i] = i
        comps = n_nodes
        for p in range(P):
            t = term[p]
            for j in range(2):
                a = arcs[p, t, j, 0]
                if a < 0:
                    continue
                b = arcs[p, t, j, 1]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a != b:
                    parent[a] = b
                    comps -= 1
        hist[comps - n_open] += 1
    return hist


@dataclass
class FKEnumeration:
    histogram: np.ndarray  # index = number of closed medial loops
    free_plaquettes: int

    def Z(self, Lambda: float) -> float:
        return float(np.polynomial.polynomial.polyval(Lambda, self.histogram.astype(float)))


FK_CAP = 22


def fk_loop_expansion(patch: SquarePatch, cap: int = FK_CAP) -> FKEnumeration:
    """All term choices of the non-forced plaquettes, counted by closed loops."""
    mg = medial_graph(patch)
    free_pl = np.flatnonzero(mg.forced < 0)
    if len(free_pl) > cap:
        raise EnumerationCapError(f"{len(free_pl)} free plaquettes exceed the cap of {cap} (2^{len(free_pl)} terms)")
    n_open = len(mg.open_nodes) // 2
    hist = _fk_hist(mg.arcs, free_pl.astype(np.int64), np.maximum(mg.forced, 0), len(mg.edges), n_open)
    nz = np.flatnonzero(hist)
    return FKEnumeration(hist[: nz.max() + 1], len(free_pl))


# --------------------------------------------------------------------------
# medial loops of one (heights, terms) pair


@dataclass
class MedialLoop:
    nodes: list[int]
    corners: list[tuple[int, int]]  # (plaquette, corner) wrapped by each arc
    closed: bool


@dataclass
class MedialLoopConfig:
    loops: list[MedialLoop]
    curve: MedialLoop | None
    even_clusters: int
    odd_clusters: int


def compatible_terms(patch: SquarePatch, values: np.ndarray) -> list[list[int]]:
    """Terms allowed by the heights, per plaquette."""
    out = []
    for pl in patch.plaquettes:
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            out.append([(k + 1) % 2])
            continue
        h = values[pl]
        out.append([t for t in (0, 1) if h[t] == h[t + 2]])
    return out


def medial_loops(patch: SquarePatch, terms, mg: MedialGraph | None = None) -> MedialLoopConfig:
    mg = mg or medial_graph(patch)
    n = len(mg.edges)
    links = [[] for _ in range(n)]
    for p, t in enumerate(terms):
        for j in range(2):
            a, b, corner = mg.arcs[p, t, j]
            if a < 0:
                continue
            links[a].append((b, (p, corner)))
            links[b].append((a, (p, corner)))
    seen = np.zeros(n, dtype=bool)
    loops, curve = [], None
    starts = [int(v) for v in mg.open_nodes] + list(range(n))
    for s in starts:
        if seen[s]:
            continue
        nodes, corners = [s], []
        seen[s] = True
        prev, cur = None, s
        while True:
            nxt = [(b, c) for b, c in links[cur] if (b, c) != prev]
            if not nxt:
                break
            b, c = nxt[0]
            corners.append(c)
            prev = (cur, c)
            if b == s:
                break
            nodes.append(b)
            seen[b] = True
            cur = b
        closed = len(links[s]) == 2
        lp = MedialLoop(nodes, corners, closed)
        if closed:
            loops.append(lp)
        else:
            curve = lp
    # clusters of the two sublattices under the chosen diagonal joins
    parent = list(range(patch.n_sites))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for pl, t in zip(patch.plaquettes, terms):
        a, c = pl[t], pl[t + 2]
        if a >= 0 and c >= 0:
            parent[find(a)] = find(c)
        elif np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            parent[find(pl[(k + 1) % 4])] = find(pl[(k + 3) % 4])
    roots = {find(i) for i in range(patch.n_sites)}
    # boundary sites of one sublattice are wired through the boundary
    for par in (0, 1):
        bs = [s for s in patch.boundary if patch.parity[s] == par]
        for s in bs[1:]:
            parent[find(s)] = find(bs[0])
    roots = {find(i) for i in range(patch.n_sites)}
    even = sum(1 for r in roots if patch.parity[r] == 0)
    return MedialLoopConfig(loops, curve, even, len(roots) - even)


def corner_product(loop: MedialLoop, patch: SquarePatch, values: np.ndarray, spec: SpectralData):
    """Product of the (S_corner / S_diagonal)^(1/4) wraps along a loop."""
    r = _fourth_roots(spec.S)
    w = 1.0
    for p, corner in loop.corners:
        pl = patch.plaquettes[p]
        diag = pl[(corner + 1) % 4]
        w = w * r[values[pl[corner]]] / r[values[diag]]
    return w


def loop_sides(loop: MedialLoop, patch: SquarePatch, mg: MedialGraph, values: np.ndarray):
    """(inner, outer) node indices of a closed medial loop."""
    pts = patch.pos[mg.edges[loop.nodes]].mean(axis=1)
    s, t = mg.edges[loop.nodes[0]]
    from .dilute import _polygon_contains
    if _polygon_contains(pts, patch.pos[s]):
        return int(values[s]), int(values[t])
    return int(values[t]), int(values[s])


# --------------------------------------------------------------------------
# chordal law of the height model itself


@nb.njit(cache=True)
def _joint_curves(configs, weights, plaquettes, arcs, start, n_nodes, full_w, full_terms):
    """For every (heights, terms) pair: weight and curve node mask."""
    n = configs.shape[0]
    P = plaquettes.shape[0]
    words = (n_nodes + 63) // 64
    total = 0
    amb = np.zeros(P, dtype=np.int64)
    for i in range(n):
        na = 0
        for p in range(P):
            pl = plaquettes[p]
            if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
                if configs[i, pl[0]] == configs[i, pl[2]] and configs[i, pl[1]] == configs[i, pl[3]]:
                    na += 1
        total += 1 << na
    masks = np.zeros((total, words), dtype=np.uint64)
    w_out = np.zeros(total, dtype=weights.dtype)
    term = np.zeros(P, dtype=np.int64)
    nbr = np.full((n_nodes, 2), -1, dtype=np.int64)
    row = 0
    for i in range(n):
        na = 0
        for p in range(P):
            pl = plaquettes[p]
            if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
                a0 = configs[i, pl[0]] == configs[i, pl[2]]
                a1 = configs[i, pl[1]] == configs[i, pl[3]]
                if a0 and a1:
                    amb[na] = p
                    na += 1
                    term[p] = 0
                elif a0:
                    term[p] = 0
                else:
                    term[p] = 1
            else:
                term[p] = full_terms[p]
        for mask in range(1 << na):
            w = weights[i] * 0 + 1.0
            for j in range(na):
                term[amb[j]] = (mask >> j) & 1
            for p in range(P):
                pl = plaquettes[p]
                if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
                    w = w * full_w[configs[i, pl[0]], configs[i, pl[1]], configs[i, pl[2]], configs[i, pl[3]], term[p]]
            for v in range(n_nodes):
                nbr[v, 0] = -1
                nbr[v, 1] = -1
            for p in range(P):
                t = term[p]
                for j in range(2):
                    a = arcs[p, t, j, 0]
                    if a < 0:
                        continue
                    b = arcs[p, t, j, 1]
                    if nbr[a, 0] < 0:
                        nbr[a, 0] = b
                    else:
                        nbr[a, 1] = b
                    if nbr[b, 0] < 0:
                        nbr[b, 0] = a
                    else:
                        nbr[b, 1] = a
            prev = -1
            cur = start
            while True:
                masks[row, cur // 64] |= np.uint64(1) << np.uint64(cur % 64)
                nxt = nbr[cur, 0] if nbr[cur, 0] != prev else nbr[cur, 1]
                if nxt < 0:
                    break
                prev = cur
                cur = nxt
            w_out[row] = w * weights[i]
            row += 1
    return masks, w_out


@dataclass
class DenseCurveLaw:
    probabilities: dict  # key: tuple of (site, site) lattice edges crossed, in order
    Z: float | complex

    def tv_distance(self, other) -> float:
        return tv_distance(self.probabilities, other.probabilities)


def _term_tables(spec):
    """full_w[a,b,c,d,t]: weight of term t alone."""
    full, _ = _tables(spec)
    r = _fourth_roots(spec.S)
    k = len(r)
    out = np.zeros(full.shape + (2,), dtype=full.dtype)
    idx = np.argwhere(full != 0)
    for a, b, c, d in idx:
        if a == c:
            out[a, b, c, d, 0] = r[b] * r[d] / (r[a] * r[c])
        if b == d:
            out[a, b, c, d, 1] = r[a] * r[c] / (r[b] * r[d])
    return out


def chordal_law_exact_dense(patch: SquarePatch, bc: BoundaryCondition, spec: SpectralData,
                            cap: int = DEFAULT_CAP) -> DenseCurveLaw:
    """Law of the medial curve between the two wired arcs, summing the
    height model over heights and plaquette terms."""
    if patch.shape != "dobrushin" or bc.mode != "chordal":
        raise DomainError("dense curve laws need a Dobrushin patch with chordal:a,b")
    en = enumerate_heights_square(patch, bc, spec, cap=cap, stream=True)
    mg = medial_graph(patch)
    if len(mg.open_nodes) != 2:
        raise DomainError("expected exactly two curve endpoints")
    start = int(mg.open_nodes[0])
    # half-plaquette factors do not depend on terms; fold them into the config weight
    full, half = _tables(spec)
    hw = np.ones(len(en.configs), dtype=full.dtype)
    for pl in patch.plaquettes:
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            hw = hw * half[en.configs[:, pl[(k + 1) % 4]], en.configs[:, pl[(k + 2) % 4]], en.configs[:, pl[(k + 3) % 4]]]
    masks, w = _joint_curves(en.configs, hw, patch.plaquettes, mg.arcs, start, len(mg.edges),
                             _term_tables(spec), np.maximum(mg.forced, 0))
    keys, inv = np.unique(masks, axis=0, return_inverse=True)
    inv = inv.ravel()
    sums = np.zeros(len(keys), dtype=w.dtype)
    np.add.at(sums, inv, w)
    Z = sums.sum()
    probs = {}
    for key, s in zip(keys, sums):
        nodes = [i for i in range(len(mg.edges)) if (int(key[i // 64]) >> (i % 64)) & 1]
        probs[tuple(sorted(tuple(int(v) for v in mg.edges[i]) for i in nodes))] = complex(s / Z).real
    return DenseCurveLaw(probs, _real_if_close(Z))


# --------------------------------------------------------------------------
# same-height cluster boundaries for A_m


@dataclass
class ClusterBoundarySet:
    edges: list[tuple[int, int]]
    loops: list[list[int]]
    paths: list[list[int]]
    convention: str
    odd_vertices: list[int]

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "edges": [list(e) for e in self.edges],
            "loops": self.loops,
            "paths": self.paths,
        }


def height_cluster_boundaries(patch: SquarePatch, labels, graph: GraphSpec,
                              convention: str = "split-left", rng=None) -> ClusterBoundarySet:
    """Edges along the equal diagonal of plaquettes reading (a, a+1, a, a-1),
    joined into loops and boundary-to-boundary paths."""
    if graph.kind != "A":
        raise ValueError("cluster boundaries are defined for A_m graphs")
    if convention not in SPLIT_CONVENTIONS:
        raise ValueError(f"convention must be one of {SPLIT_CONVENTIONS}")
    if convention == "random" and rng is None:
        rng = np.random.default_rng(0)
    h = np.asarray(labels)
    edges = []
    for pl in patch.plaquettes:
        if np.any(pl < 0):
            continue
        v = h[pl]
        for t in (0, 1):
            if v[t] == v[t + 2] and abs(int(v[t + 1]) - int(v[(t + 3) % 4])) == 2:
                s, u = int(pl[t]), int(pl[t + 2])
                edges.append((min(s, u), max(s, u)))
    edges.sort()
    inc = [[] for _ in range(patch.n_sites)]
    for i, (s, u) in enumerate(edges):
        inc[s].append(i)
        inc[u].append(i)
    bmask = patch.boundary_sites
    # interior sites of odd degree would break the loop decomposition; they
    # are reported (the set stays empty for A_m heights)
    odd = [s for s in range(patch.n_sites) if len(inc[s]) % 2 and not bmask[s]]
    # pair up edges at each vertex
    pair = {}
    for s in range(patch.n_sites):
        es = inc[s]
        if len(es) == 2:
            pair[(s, es[0])], pair[(s, es[1])] = es[1], es[0]
        elif len(es) == 4:
            ang = []
            for e in es:
                o = edges[e][0] if edges[e][1] == s else edges[e][1]
                d = patch.pos[o] - patch.pos[s]
                ang.append(np.arctan2(d[1], d[0]))
            es = [es[i] for i in np.argsort(ang)]
            left = convention == "split-left" or (convention == "random" and rng.random() < 0.5)
            groups = ((0, 1), (2, 3)) if left else ((1, 2), (3, 0))
            for i, j in groups:
                pair[(s, es[i])], pair[(s, es[j])] = es[j], es[i]
    used = np.zeros(len(edges), dtype=bool)
    loops, paths = [], []

    def walk(e, s):
        # follow edge e leaving site s
        seq = [s]
        while True:
            used[e] = True
            o = edges[e][0] if edges[e][1] == s else edges[e][1]
            seq.append(o)
            nxt = pair.get((o, e))
            if nxt is None or used[nxt]:
                return seq
            e, s = nxt, o

    for s in range(patch.n_sites):
        if bmask[s]:
            for e in inc[s]:
                if not used[e] and (s, e) not in pair:
                    paths.append(walk(e, s))
    for e in range(len(edges)):
        if not used[e]:
            seq = walk(e, edges[e][0])
            loops.append(seq[:-1] if seq[0] == seq[-1] else seq)
    return ClusterBoundarySet(edges, loops, paths, convention, odd)


def ising_domain_walls(patch: SquarePatch, labels) -> list[tuple[int, int]]:
    """Plaquette diagonals separating unequal spins on the opposite diagonal."""
    h = np.asarray(labels)
    out = []
    for pl in patch.plaquettes:
        if np.any(pl < 0):
            continue
        for t in (0, 1):
            if h[pl[t + 1]] != h[pl[(t + 3) % 4]]:
                s, u = int(pl[t]), int(pl[t + 2])
                out.append((min(s, u), max(s, u)))
    return sorted(out)
