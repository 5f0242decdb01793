"""Dilute ADE height model on the triangular lattice.

Heights on neighbouring sites are equal or adjacent on the graph. A
triangle with heights (a, b, b) is marked and weighs
``x * (S_a / S_b) ** (1/6)``; marked triangles join into loops on the
dual honeycomb lattice.

Fractional powers of possibly negative eigenvector components use
``S ** (1/6) = |S| ** (1/6) * exp(i pi sigma / 6)`` with ``sigma = 1`` for
negative entries, so that products around any closed loop telescope to
``S_inner / S_outer``. Per-configuration weights are accumulated as
(marked count, log-magnitude, phase) and exponentiated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .domains import BoundaryCondition, DomainError, TriangularPatch, change_points, require_valid
from .spectra import GraphSpec, SpectralData

DEFAULT_CAP = 14


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HeightConfig:
    patch: TriangularPatch
    graph: GraphSpec
    values: np.ndarray  # internal node index per site

    @classmethod
    def from_labels(cls, patch, graph, labels):
        return cls(patch, graph, np.array([graph.index(int(h)) for h in labels], dtype=np.int64))

    @property
    def labels(self) -> np.ndarray:
        return np.array(self.graph.labels)[self.values]


@dataclass(frozen=True)
class ChordalCurve:
    """Dual path from the first change point to the second.

    ``edges`` lists the crossed lattice edges (first and last are boundary
    edges) and ``triangles`` the marked triangles between them.
    """

    edges: tuple[int, ...]
    triangles: tuple[int, ...]
    left: int
    right: int

    @property
    def turn_difference(self) -> int:
        return self.right - self.left


@dataclass
class Loop:
    edges: list[int]
    triangles: list[int]
    depth: int = 0


@dataclass
class LoopConfig:
    loops: list[Loop]
    curve: ChordalCurve | None
    marked: int

    @property
    def n_loops(self) -> int:
        return len(self.loops)


# --------------------------------------------------------------------------
# single-configuration quantities


def _odd_other(h):
    if h[0] == h[1]:
        return h[2], h[0]
    if h[0] == h[2]:
        return h[1], h[0]
    return h[0], h[1]


def _sixth_roots(S: np.ndarray):
    S = np.asarray(S, dtype=float)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(S)) / 6.0
    sigma = (S < 0).astype(np.int64)
    return logmag, sigma


def triangle_factor(ha: int, hb: int, hc: int, adjacency: np.ndarray, S, x: float):
    """Weight of one triangle from internal node indices."""
    if ha == hb == hc:
        return 1.0
    vals = (ha, hb, hc)
    if len(set(vals)) == 3:
        return 0.0
    odd = [v for v in vals if vals.count(v) == 1][0]
    other = [v for v in vals if vals.count(v) == 2][0]
    if not adjacency[odd, other]:
        return 0.0
    r = _root6(S[odd]) / _root6(S[other])
    return x * (r.real if r.imag == 0 else r)


def _root6(s):
    return complex(abs(s) ** (1 / 6) * np.exp(1j * np.pi / 6 * (s < 0)))


def config_weight(config: HeightConfig, S, x: float, strict: bool = False):
    """Product of triangle weights; invalid configurations weigh 0."""
    patch, adj, v = config.patch, config.graph.adjacency, config.values
    for a, b in patch.edges:
        if v[a] != v[b] and not adj[v[a], v[b]]:
            if strict:
                raise ValueError(f"sites {a},{b} carry non-adjacent heights")
            return 0.0
    logw = 0.0
    phase = 0
    marked = 0
    logmag, sigma = _sixth_roots(S)
    for tr in patch.triangles:
        h = v[tr]
        if h[0] == h[1] == h[2]:
            continue
        if h[0] != h[1] and h[1] != h[2] and h[0] != h[2]:
            if strict:
                raise ValueError("triangle with three distinct heights")
            return 0.0
        odd, other = _odd_other(h)
        marked += 1
        logw += logmag[odd] - logmag[other]
        phase += sigma[odd] - sigma[other]
    w = x**marked * math.exp(logw) if np.isfinite(logw) else (0.0 if logw < 0 else math.inf)
    if phase % 12:
        return w * complex(np.exp(1j * np.pi * phase / 6))
    return w


def _other_wall(patch, unequal, t, e):
    for e2 in patch.tri_edges[t]:
        if e2 != e and unequal[e2]:
            return int(e2)
    raise RuntimeError(f"dangling wall segment in triangle {t}")


def _turn(patch, t, e_in, e_out):
    """+1 for a left turn, -1 for a right turn at triangle t."""
    c = patch.tri_center(t)
    a = c - patch.edge_mid(e_in)
    b = patch.edge_mid(e_out) - c
    return 1 if a[0] * b[1] - a[1] * b[0] > 0 else -1


def trace_curve(patch: TriangularPatch, unequal: np.ndarray, start_edge: int) -> ChordalCurve:
    e = start_edge
    t = int(patch.edge_tris[e, 0])
    edges = [e]
    tris = []
    left = right = 0
    while True:
        e2 = _other_wall(patch, unequal, t, e)
        tris.append(t)
        if _turn(patch, t, e, e2) > 0:
            left += 1
        else:
            right += 1
        edges.append(e2)
        a, b = patch.edge_tris[e2]
        nxt = b if a == t else a
        if nxt < 0:
            break
        e, t = e2, int(nxt)
    return ChordalCurve(tuple(edges), tuple(tris), left, right)


def _polygon_contains(poly, pt):
    x, y = pt
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xi > x:
                inside = not inside
    return inside


def loop_decomposition(config: HeightConfig, start_edges=None) -> LoopConfig:
    """Closed loops (with nesting depth) and the open curve of a configuration."""
    patch, v = config.patch, config.values
    unequal = v[patch.edges[:, 0]] != v[patch.edges[:, 1]]
    boundary_walls = [int(e) for e in np.flatnonzero(unequal & (patch.edge_tris[:, 1] < 0))]
    curve = None
    used = np.zeros(len(unequal), dtype=bool)
    if boundary_walls:
        if start_edges is None:
            start_edges = boundary_walls[:1]
        if len(boundary_walls) != 2:
            raise ValueError("expected one open curve (two boundary wall edges)")
        curve = trace_curve(patch, unequal, start_edges[0])
        used[list(curve.edges)] = True
    loops = []
    for e0 in np.flatnonzero(unequal & ~used):
        if used[e0]:
            continue
        e = int(e0)
        t = int(patch.edge_tris[e, 0])
        edges, tris = [], []
        while True:
            used[e] = True
            edges.append(e)
            tris.append(t)
            e2 = _other_wall(patch, unequal, t, e)
            a, b = patch.edge_tris[e2]
            nxt = b if a == t else a
            if e2 == e0:
                break
            if nxt < 0:
                raise RuntimeError("closed loop reached the boundary")
            e, t = e2, int(nxt)
        loops.append(Loop(edges, tris))
    polys = [np.array([patch.tri_center(t) for t in lp.triangles]) for lp in loops]
    for i, lp in enumerate(loops):
        probe = patch.edge_mid(lp.edges[0])
        lp.depth = sum(_polygon_contains(polys[j], probe) for j in range(len(loops)) if j != i)
    marked = int(sum(len(set(v[tr])) > 1 for tr in patch.triangles))
    return LoopConfig(loops, curve, marked)


def loop_height_ratio(loop: Loop, config: HeightConfig, S) -> complex | float:
    """Product of the (S/S)^(+-1/6) factors of the loop's triangles."""
    logmag, sigma = _sixth_roots(S)
    v = config.values
    total, phase = 0.0, 0
    for t in loop.triangles:
        h = v[config.patch.triangles[t]]
        odd, other = _odd_other(h)
        total += logmag[odd] - logmag[other]
        phase += sigma[odd] - sigma[other]
    r = math.exp(total)
    if phase % 12:
        return r * complex(np.exp(1j * np.pi * phase / 6))
    return r


def inside_outside_heights(loop: Loop, config: HeightConfig) -> tuple[int, int]:
    """Internal node indices just inside and just outside a closed loop."""
    patch = config.patch
    poly = np.array([patch.tri_center(t) for t in loop.triangles])
    a, b = patch.edges[loop.edges[0]]
    if _polygon_contains(poly, patch.pos[a]):
        return int(config.values[a]), int(config.values[b])
    return int(config.values[b]), int(config.values[a])


# --------------------------------------------------------------------------
# exact enumeration


@dataclass
class _Problem:
    patch: TriangularPatch
    free: np.ndarray
    init: np.ndarray  # internal node per site, -1 free
    chk_ptr: np.ndarray
    chk: np.ndarray
    tri_ptr: np.ndarray
    tri: np.ndarray  # triangle ids completed at each step
    const_tris: np.ndarray
    triangles: np.ndarray


def _compile(patch: TriangularPatch, fixed: dict[int, int], graph: GraphSpec, cap: int) -> _Problem:
    free = patch.free_sites
    if len(free) > cap:
        k = graph.node_count
        deg = graph.adjacency.sum() / k
        raise EnumerationCapError(
            f"{len(free)} free sites exceed the cap of {cap} "
            f"(roughly {(1 + deg) ** len(free):.3g} configurations)"
        )
    init = np.full(patch.n_sites, -1, dtype=np.int64)
    for s, h in fixed.items():
        init[s] = graph.index(h)
    missing = [int(s) for s in np.flatnonzero(init < 0) if s not in set(free.tolist())]
    if missing:
        raise DomainError(f"boundary sites without heights: {missing[:5]}")
    order = np.full(patch.n_sites, -1, dtype=np.int64)
    order[free] = np.arange(len(free))
    nbrs = patch.neighbors()
    chk_ptr, chk = [0], []
    for k, s in enumerate(free):
        chk.extend(t for t in nbrs[s] if order[t] < k)
        chk_ptr.append(len(chk))
    last = order[patch.triangles].max(axis=1)
    tri_ptr, tri = [0], []
    for k in range(len(free)):
        tri.extend(np.flatnonzero(last == k).tolist())
        tri_ptr.append(len(tri))
    return _Problem(
        patch, free, init,
        np.array(chk_ptr, dtype=np.int64), np.array(chk, dtype=np.int64),
        np.array(tri_ptr, dtype=np.int64), np.array(tri, dtype=np.int64),
        np.flatnonzero(last < 0), patch.triangles.astype(np.int64),
    )


def _triangle_tables(adjacency: np.ndarray, S):
    k = len(S)
    logmag, sigma = _sixth_roots(S)
    marked = np.full((k, k, k), -1, dtype=np.int64)
    logw = np.zeros((k, k, k))
    phase = np.zeros((k, k, k), dtype=np.int64)
    for a in range(k):
        for b in range(k):
            for c in range(k):
                vals = (a, b, c)
                if a == b == c:
                    marked[a, b, c] = 0
                    continue
                if len(set(vals)) == 3:
                    continue
                odd = [v for v in vals if vals.count(v) == 1][0]
                other = [v for v in vals if vals.count(v) == 2][0]
                if not adjacency[odd, other]:
                    continue
                if not np.isfinite(logmag[other]):
                    raise ValueError("eigenvector has a zero component; triangle weights are undefined")
                marked[a, b, c] = 1
                logw[a, b, c] = logmag[odd] - logmag[other]
                phase[a, b, c] = sigma[odd] - sigma[other]
    return marked, logw, phase


@nb.njit(cache=True)
def _dfs_heights(init, free, chk_ptr, chk, tri_ptr, tri, triangles, allowed,
                 t_marked, t_log, t_phase, m0, l0, p0, n_tri, out_conf, out_m, out_l, out_p, emit):
    nf = free.shape[0]
    k_nodes = allowed.shape[0]
    H = init.copy()
    coef = np.zeros((n_tri + 1, 12))
    if nf == 0:
        if l0 > -np.inf:
            coef[m0, p0 % 12] += np.exp(l0)
        if emit:
            out_m[0] = m0
            out_l[0] = l0
            out_p[0] = p0
        return coef, 1
    choice = np.full(nf, -1, dtype=np.int64)
    macc = np.zeros(nf + 1, dtype=np.int64)
    lacc = np.zeros(nf + 1)
    pacc = np.zeros(nf + 1, dtype=np.int64)
    macc[0] = m0
    lacc[0] = l0
    pacc[0] = p0
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
            if not allowed[h, H[chk[j]]]:
                ok = False
                break
        if not ok:
            continue
        H[free[k]] = h
        m = macc[k]
        lw = lacc[k]
        ph = pacc[k]
        for j in range(tri_ptr[k], tri_ptr[k + 1]):
            t = tri[j]
            a = H[triangles[t, 0]]
            b = H[triangles[t, 1]]
            c = H[triangles[t, 2]]
            mk = t_marked[a, b, c]
            if mk < 0:
                ok = False
                break
            m += mk
            lw += t_log[a, b, c]
            ph += t_phase[a, b, c]
        if not ok:
            continue
        if k == nf - 1:
            if lw > -np.inf:
                coef[m, ph % 12] += np.exp(lw)
            if emit:
                for i in range(nf):
                    out_conf[count, i] = H[free[i]]
                out_m[count] = m
                out_l[count] = lw
                out_p[count] = ph
            count += 1
        else:
            macc[k + 1] = m
            lacc[k + 1] = lw
            pacc[k + 1] = ph
            k += 1
            choice[k] = -1
    return coef, count


@dataclass
class HeightEnumeration:
    """Exact height sum, stored as coefficients of x**M (complex)."""

    coefficients: np.ndarray  # complex, index = number of marked triangles
    count: int
    configs: np.ndarray | None = None  # (count, n_sites) internal node indices
    marked: np.ndarray | None = None
    logw: np.ndarray | None = None
    phase: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def Z(self, x: float):
        z = np.polynomial.polynomial.polyval(x, self.coefficients)
        return z.real if abs(z.imag) <= 1e-14 * max(1.0, abs(z)) else z

    def weights(self, x: float) -> np.ndarray:
        w = x ** self.marked.astype(float) * np.exp(self.logw)
        if np.any(self.phase % 12):
            return w * np.exp(1j * np.pi * self.phase / 6)
        return w


def enumerate_heights(patch: TriangularPatch, bc: BoundaryCondition, spec: SpectralData,
                      cap: int = DEFAULT_CAP, stream: bool = False, validate: bool = True) -> HeightEnumeration:
    """Exact sum over height assignments by depth-first search.

    The result is a polynomial in x; evaluate with ``.Z(x)``. With
    ``stream`` every admissible configuration is returned as well.
    """
    graph = spec.graph
    fixed = require_valid(patch, bc, graph, "dilute") if validate else None
    if fixed is None:
        from .domains import boundary_heights
        fixed = boundary_heights(patch, bc)
    prob = _compile(patch, fixed, graph, cap)
    adj = graph.adjacency.astype(bool)
    allowed = adj | np.eye(len(adj), dtype=bool)
    marked, logw, phase = _triangle_tables(graph.adjacency, spec.S)
    m0, l0, p0 = 0, 0.0, 0
    for t in prob.const_tris:
        a, b, c = prob.init[patch.triangles[t]]
        if marked[a, b, c] < 0:
            raise DomainError(f"boundary triangle {t} has an inadmissible height pattern")
        m0 += marked[a, b, c]
        l0 += logw[a, b, c]
        p0 += phase[a, b, c]
    args = (prob.init, prob.free, prob.chk_ptr, prob.chk, prob.tri_ptr, prob.tri, prob.triangles,
            allowed, marked, logw, phase, m0, l0, p0, patch.n_triangles)
    nf = len(prob.free)
    dummy_c = np.zeros((1, max(nf, 1)), dtype=np.int64)
    dummy_f = np.zeros(1)
    dummy_i = np.zeros(1, dtype=np.int64)
    coef12, count = _dfs_heights(*args, dummy_c, dummy_i, dummy_f, dummy_i, False)
    out = HeightEnumeration(_collapse_phases(coef12), int(count),
                            meta={"free_sites": nf, "boundary_factor_rule": "bulk"})
    if stream:
        conf = np.zeros((max(count, 1), max(nf, 1)), dtype=np.int64)
        om = np.zeros(max(count, 1), dtype=np.int64)
        ol = np.zeros(max(count, 1))
        op = np.zeros(max(count, 1), dtype=np.int64)
        _dfs_heights(*args, conf, om, ol, op, True)
        full = np.repeat(prob.init[None, :], count, axis=0)
        if nf:
            full[:, prob.free] = conf[:count, :nf]
        out.configs, out.marked, out.logw, out.phase = full, om[:count], ol[:count], op[:count]
    return out


def _collapse_phases(coef12: np.ndarray) -> np.ndarray:
    phases = np.exp(1j * np.pi * np.arange(12) / 6)
    phases[0] = 1.0
    phases[6] = -1.0
    if not np.any(coef12[:, 1:]):
        return coef12[:, 0].astype(complex)
    return coef12 @ phases


# --------------------------------------------------------------------------
# loop-gas enumeration through domain-wall (two-colour) configurations


@nb.njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@nb.njit(cache=True)
def _dfs_walls(init, free, tri_ptr, tri, triangles, edges, m0, n_tri):
    """Histogram over (marked triangles, spin clusters) of all 2-colourings."""
    nf = free.shape[0]
    n = init.shape[0]
    S = init.copy()
    hist = np.zeros((n_tri + 1, n + 1), dtype=np.int64)
    parent = np.arange(n)
    choice = np.full(max(nf, 1), -1, dtype=np.int64)
    macc = np.zeros(nf + 1, dtype=np.int64)
    macc[0] = m0
    k = 0
    if nf == 0:
        k = -1
        leaf = True
    else:
        leaf = False
    while True:
        if not leaf:
            if k < 0:
                break
            choice[k] += 1
            if choice[k] > 1:
                S[free[k]] = -1
                k -= 1
                continue
            S[free[k]] = choice[k]
            m = macc[k]
            for j in range(tri_ptr[k], tri_ptr[k + 1]):
                t = tri[j]
                a = S[triangles[t, 0]]
                b = S[triangles[t, 1]]
                c = S[triangles[t, 2]]
                if not (a == b and b == c):
                    m += 1
            if k < nf - 1:
                macc[k + 1] = m
                k += 1
                choice[k] = -1
                continue
        else:
            m = m0
        for i in range(n):
            parent[i] = i
        clusters = n
        for e in range(edges.shape[0]):
            a = edges[e, 0]
            b = edges[e, 1]
            if S[a] == S[b]:
                ra = _find(parent, a)
                rb = _find(parent, b)
                if ra != rb:
                    parent[ra] = rb
                    clusters -= 1
        hist[m, clusters] += 1
        if leaf:
            break
    return hist


@dataclass
class LoopEnumeration:
    """Counts of loop configurations by (marked triangles, closed loops)."""

    histogram: np.ndarray  # [M, loops]
    open_curves: int

    def Z(self, Lambda: float, x: float) -> float:
        M = np.arange(self.histogram.shape[0])[:, None].astype(float)
        L = np.arange(self.histogram.shape[1])[None, :].astype(float)
        return float(np.sum(self.histogram * x**M * Lambda**L))

    def loop_count_distribution(self, Lambda: float, x: float) -> np.ndarray:
        M = np.arange(self.histogram.shape[0])[:, None].astype(float)
        L = np.arange(self.histogram.shape[1])[None, :].astype(float)
        w = (self.histogram * x**M * Lambda**L).sum(axis=0)
        return w / w.sum()


def _spin_boundary(patch: TriangularPatch, bc: BoundaryCondition):
    spins = np.full(patch.n_sites, -1, dtype=np.int64)
    if bc.mode in ("homogeneous", "wired"):
        spins[list(patch.outer)] = 0
        n_open = 0
        if patch.holes:
            raise DomainError("loop enumeration on annuli lives in the topology module")
    elif bc.mode == "chordal":
        from .domains import _split_cycle_by_edges
        arcs, _ = _split_cycle_by_edges(patch, patch.outer, change_points(patch, bc))
        spins[arcs[1]] = 0
        spins[arcs[0]] = 1
        n_open = 1
    else:
        raise DomainError(f"loop enumeration supports homogeneous and chordal boundaries, not {bc.mode}")
    return spins, n_open


def enumerate_loops(patch: TriangularPatch, bc: BoundaryCondition, cap: int = DEFAULT_CAP) -> LoopEnumeration:
    """All dual loop configurations compatible with the boundary, by counting
    their domain-wall two-colourings. The open curve (chordal case) carries
    ``x`` per marked triangle but no loop weight.
    """
    spins, n_open = _spin_boundary(patch, bc)
    free = patch.free_sites
    if len(free) > cap:
        raise EnumerationCapError(f"{len(free)} free sites exceed the cap of {cap} (2^{len(free)} colourings)")
    order = np.full(patch.n_sites, -1, dtype=np.int64)
    order[free] = np.arange(len(free))
    last = order[patch.triangles].max(axis=1)
    tri_ptr, tri = [0], []
    for k in range(len(free)):
        tri.extend(np.flatnonzero(last == k).tolist())
        tri_ptr.append(len(tri))
    m0 = int(sum(len(set(spins[tr])) > 1 for tr in patch.triangles[last < 0]))
    hist = _dfs_walls(spins, free.astype(np.int64), np.array(tri_ptr, dtype=np.int64),
                      np.array(tri, dtype=np.int64), patch.triangles.astype(np.int64),
                      patch.edges.astype(np.int64), m0, patch.n_triangles)
    base = 1 + n_open  # boundary clusters
    loops = np.zeros((hist.shape[0], hist.shape[1]), dtype=np.int64)
    for c in range(hist.shape[1]):
        if hist[:, c].any():
            if c < base:
                raise RuntimeError("fewer clusters than boundary arcs")
            loops[:, c - base] += hist[:, c]
    last_col = np.flatnonzero(loops.any(axis=0))
    ncol = int(last_col.max()) + 1 if len(last_col) else 1
    return LoopEnumeration(loops[:, :ncol], n_open)


def open_curve_turns(patch: TriangularPatch, e1: int, e2: int) -> int:
    """Left minus right turns of a simple dual path from boundary edge e1 to
    boundary edge e2 (a shortest one; every simple path gives the same)."""
    t0 = int(patch.edge_tris[e1, 0])
    t1 = int(patch.edge_tris[e2, 0])
    prev = {t0: (-1, e1)}
    queue = [t0]
    for t in queue:
        if t == t1:
            break
        for e in patch.tri_edges[t]:
            a, b = patch.edge_tris[e]
            u = int(b if a == t else a)
            if u >= 0 and u not in prev:
                prev[u] = (t, int(e))
                queue.append(u)
    if t1 not in prev:
        raise DomainError("change points are not connected through the patch")
    path, t = [], t1
    while t >= 0:
        path.append(t)
        t = prev[t][0]
    path.reverse()
    entry = [prev[t][1] for t in path] + [e2]
    return sum(_turn(patch, t, entry[k], entry[k + 1]) for k, t in enumerate(path))


def open_curve_factor(patch: TriangularPatch, bc: BoundaryCondition, spec: SpectralData):
    """Constant weight the open curve picks up from its turning:
    (S_a / S_b)^((L - R) / 6). Height Z = this factor times loop Z; it is 1
    when the curve leaves in the direction it entered."""
    e1, e2 = change_points(patch, bc)[:2]
    k = open_curve_turns(patch, e1, e2)
    g = spec.graph
    r = (_root6(spec.S[g.index(bc.heights[0])]) / _root6(spec.S[g.index(bc.heights[1])])) ** k
    return r.real if abs(r.imag) < 1e-14 * abs(r) else r


# --------------------------------------------------------------------------
# curve laws


@nb.njit(cache=True)
def _curve_masks(configs, edges, edge_tris, tri_edges, start):
    n, E = configs.shape[0], edges.shape[0]
    masks = np.zeros((n, E), dtype=np.uint8)
    for i in range(n):
        e = start
        t = edge_tris[e, 0]
        masks[i, e] = 1
        while True:
            nxt_e = -1
            for k in range(3):
                e2 = tri_edges[t, k]
                if e2 != e and configs[i, edges[e2, 0]] != configs[i, edges[e2, 1]]:
                    nxt_e = e2
                    break
            masks[i, nxt_e] = 1
            if edge_tris[nxt_e, 0] == t:
                t2 = edge_tris[nxt_e, 1]
            else:
                t2 = edge_tris[nxt_e, 0]
            if t2 < 0:
                break
            e = nxt_e
            t = t2
    return masks


@dataclass
class CurveLaw:
    """Exact law of the open curve: probabilities keyed by edge tuples."""

    probabilities: dict
    curves: dict
    Z: float | complex

    def tv_distance(self, other: "CurveLaw") -> float:
        return tv_distance(self.probabilities, other.probabilities)


def tv_distance(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * float(sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys))


def group_curves(patch, configs, weights, start_edge):
    """Sum configuration weights by the curve leaving ``start_edge``."""
    masks = _curve_masks(configs, patch.edges.astype(np.int64), patch.edge_tris.astype(np.int64),
                         patch.tri_edges.astype(np.int64), int(start_edge))
    packed = np.packbits(masks, axis=1)
    keys, inverse = np.unique(packed, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    sums = np.zeros(len(keys), dtype=np.result_type(weights, float))
    np.add.at(sums, inverse, weights)
    reps = np.zeros(len(keys), dtype=np.int64)
    reps[inverse[::-1]] = np.arange(len(inverse))[::-1]
    return sums, reps, inverse


def chordal_law_exact(patch: TriangularPatch, bc: BoundaryCondition, spec: SpectralData, x: float,
                      cap: int = DEFAULT_CAP) -> CurveLaw:
    if bc.mode != "chordal":
        raise DomainError("curve laws need a chordal boundary condition")
    en = enumerate_heights(patch, bc, spec, cap=cap, stream=True)
    w = en.weights(x)
    z1, z2 = change_points(patch, bc)
    sums, reps, _ = group_curves(patch, en.configs, w, z1)
    Z = sums.sum()
    probs, curves = {}, {}
    for s, r in zip(sums, reps):
        v = en.configs[r]
        unequal = v[patch.edges[:, 0]] != v[patch.edges[:, 1]]
        c = trace_curve(patch, unequal, z1)
        probs[c.edges] = complex(s / Z).real
        curves[c.edges] = c
    return CurveLaw(probs, curves, Z)
