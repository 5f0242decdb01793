"""Annulus and arch experiments: non-contractible loop weights, the
canonical inner-boundary sum, connection probabilities of several curves and
the exponent arithmetic of fused boundary operators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba as nb
import numpy as np

from .dilute import (DEFAULT_CAP, EnumerationCapError, _curve_masks, enumerate_heights, open_curve_factor,
                     trace_curve, tv_distance)
from .domains import (BoundaryCondition, DomainError, TriangularPatch, _split_cycle_by_edges,
                      change_points, require_valid)
from .spectra import GraphSpec, SpectralData, kac_weight


# --------------------------------------------------------------------------
# walk counts


def walk_matrix(graph: GraphSpec, N: int) -> np.ndarray:
    """[G^N] with exact integer entries."""
    if N < 0:
        raise ValueError("N must be >= 0")
    G = graph.adjacency.astype(object)
    out = np.eye(len(G), dtype=np.int64).astype(object)
    for _ in range(N):
        out = out.dot(G)
    return out


def annulus_loop_weight(graph: GraphSpec, b: int, c: int, N: int, contractible: int, Lambda: float) -> float:
    """Lambda^contractible times the number of N-step walks from b to c."""
    walks = walk_matrix(graph, N)[graph.index(b), graph.index(c)]
    return Lambda**contractible * int(walks)


def canonical_annulus(graph: GraphSpec, S, b: int, N: int, contractible: int, Lambda: float,
                      rtol: float = 1e-10) -> float:
    """Inner heights summed with weight S_c; equals Lambda^(contractible + N) S_b.

    Both sides are evaluated and compared; a mismatch beyond ``rtol`` raises.
    """
    S = np.asarray(S, dtype=float)
    row = walk_matrix(graph, N)[graph.index(b)]
    lhs = float(sum(int(row[c]) * S[c] for c in range(len(S))))
    rhs = Lambda**N * S[graph.index(b)]
    if abs(lhs - rhs) > rtol * max(abs(rhs), 1e-300):
        raise ArithmeticError(f"walk sum {lhs} != Lambda^N S_b = {rhs}")
    return Lambda**contractible * lhs


def eigen_identity_error(graph: GraphSpec, S, Lambda: float, N: int) -> float:
    """max_b |sum_c [G^N]_bc S_c - Lambda^N S_b| / max|Lambda^N S|."""
    S = np.asarray(S, dtype=float)
    W = np.array(walk_matrix(graph, N), dtype=float)
    rhs = Lambda**N * S
    return float(np.max(np.abs(W @ S - rhs)) / np.max(np.abs(rhs)))


# --------------------------------------------------------------------------
# winding classification


def _hole_center(patch: TriangularPatch) -> np.ndarray:
    return patch.pos[list(patch.holes[0])].mean(axis=0)


def cut_crossings(patch: TriangularPatch, tilt: float = 0.1) -> np.ndarray:
    """Signed crossings of each lattice edge (oriented low id -> high id) with
    a ray from the hole centre pointing down, tilted by ``tilt`` radians."""
    if len(patch.holes) != 1:
        raise DomainError("winding needs a patch with exactly one hole")
    c = _hole_center(patch)
    d = np.array([math.sin(tilt), -math.cos(tilt)])
    n = np.array([-d[1], d[0]])
    P = patch.pos
    u, v = patch.edges[:, 0], patch.edges[:, 1]
    su = (P[u] - c) @ n
    sv = (P[v] - c) @ n
    out = np.zeros(len(patch.edges), dtype=np.int64)
    for e in np.flatnonzero(np.sign(su) != np.sign(sv)):
        t = su[e] / (su[e] - sv[e])
        hit = P[u[e]] + t * (P[v[e]] - P[u[e]])
        if (hit - c) @ d > 0:
            out[e] = 1 if su[e] < 0 else -1
    for cyc in (patch.outer, patch.holes[0]):
        total = 0
        for i in range(len(cyc)):
            s, t = cyc[i], cyc[(i + 1) % len(cyc)]
            e = patch.edge_id(s, t)
            total += out[e] if s < t else -out[e]
        if abs(total) != 1:
            raise DomainError("cut ray does not cross the boundary cycles exactly once")
    return out


@nb.njit(cache=True)
def _root(parent, pot, i):
    p = 0
    while parent[i] != i:
        p += pot[i]
        i = parent[i]
    return i, p


@nb.njit(cache=True)
def _wrap_stats(configs, edges, cross, site_a, site_b, site_c):
    """Per configuration: clusters of equal values, clusters winding around
    the hole, the side (0 = a, 1 = b) of the hole region, and a flag for a
    cycle winding more than once."""
    n, ns = configs.shape
    E = edges.shape[0]
    out = np.zeros((n, 4), dtype=np.int64)
    parent = np.empty(ns, dtype=np.int64)
    pot = np.empty(ns, dtype=np.int64)
    size = np.empty(ns, dtype=np.int64)
    wrap = np.empty(ns, dtype=np.bool_)
    for i in range(n):
        for k in range(ns):
            parent[k] = k
            pot[k] = 0
            size[k] = 1
            wrap[k] = False
        bad = 0
        for e in range(E):
            u = edges[e, 0]
            v = edges[e, 1]
            if configs[i, u] != configs[i, v]:
                continue
            ru, pu = _root(parent, pot, u)
            rv, pv = _root(parent, pot, v)
            w = cross[e]
            if ru == rv:
                d = pu + w - pv
                if d != 0:
                    wrap[ru] = True
                    if d > 1 or d < -1:
                        bad = 1
            elif size[ru] <= size[rv]:
                parent[ru] = rv
                pot[ru] = pv - w - pu
                size[rv] += size[ru]
                wrap[rv] = wrap[rv] or wrap[ru]
            else:
                parent[rv] = ru
                pot[rv] = pu + w - pv
                size[ru] += size[rv]
                wrap[ru] = wrap[ru] or wrap[rv]
        clusters = 0
        winding = 0
        for k in range(ns):
            if parent[k] == k:
                clusters += 1
                if wrap[k]:
                    winding += 1
        ra, _ = _root(parent, pot, site_a)
        rb, _ = _root(parent, pot, site_b)
        rc, _ = _root(parent, pot, site_c)
        if rc == ra:
            side = 0
        elif rc == rb:
            side = 1
        elif wrap[ra]:
            side = 0
        elif wrap[rb]:
            side = 1
        else:
            side = -1
        out[i, 0] = clusters
        out[i, 1] = winding
        out[i, 2] = side
        out[i, 3] = bad
    return out


@dataclass
class AnnulusLoopStats:
    """Per-configuration loop counts and their aggregates.

    ``contractible`` and ``N`` are per configuration; ``side`` is 0 when the
    hole lies on the a side of the chordal curve, 1 on the b side.
    ``law_N`` and ``side_law`` are weighted by the configuration weights.
    """

    contractible: np.ndarray
    N: np.ndarray
    side: np.ndarray
    law_N: dict
    side_law: dict
    curve_law: dict = field(default_factory=dict)


def _classify(patch, configs, bc_sites):
    cross = cut_crossings(patch)
    sa, sb, sc = bc_sites
    st = _wrap_stats(configs.astype(np.int64), patch.edges.astype(np.int64), cross, sa, sb, sc)
    if st[:, 3].any():
        raise RuntimeError("a cluster winds more than once around the hole")
    N = st[:, 1] - 1
    loops = st[:, 0] - 2  # one region per loop plus the two outer regions
    return loops - N, N, st[:, 2]


def _annulus_sites(patch, bc):
    arcs, _ = _split_cycle_by_edges(patch, patch.outer, change_points(patch, bc))
    # arcs[1] carries a, arcs[0] carries b
    return int(arcs[1][len(arcs[1]) // 2]), int(arcs[0][len(arcs[0]) // 2]), int(patch.holes[0][0])


def _aggregate(values, weights):
    out = {}
    for v in np.unique(values):
        out[int(v)] = float(np.real(weights[values == v].sum()))
    tot = sum(out.values())
    return {k: v / tot for k, v in out.items()}


def _curve_law(patch, configs, weights, start):
    """Law of the chordal curve keyed by its sorted lattice-edge ids."""
    masks = _curve_masks(configs, patch.edges.astype(np.int64), patch.edge_tris.astype(np.int64),
                         patch.tri_edges.astype(np.int64), int(start))
    keys, inv = np.unique(np.packbits(masks, axis=1), axis=0, return_inverse=True)
    sums = np.zeros(len(keys), dtype=complex)
    np.add.at(sums, inv.ravel(), weights)
    Z = sums.sum()
    E = len(patch.edges)
    return {tuple(np.flatnonzero(np.unpackbits(k)[:E]).tolist()): float((v / Z).real)
            for k, v in zip(keys, sums)}


def _touches_hole(patch, configs, start):
    """Whether the chordal curve passes a triangle with a hole-boundary corner."""
    hole = np.zeros(patch.n_sites, dtype=bool)
    hole[list(patch.holes[0])] = True
    # crossing any edge of a triangle means passing through it
    edges = np.unique(patch.tri_edges[hole[patch.triangles].any(axis=1)])
    masks = _curve_masks(configs, patch.edges.astype(np.int64), patch.edge_tris.astype(np.int64),
                         patch.tri_edges.astype(np.int64), int(start))
    return masks[:, edges].any(axis=1)


@dataclass
class AnnulusResult:
    Z: float
    stats: AnnulusLoopStats
    meta: dict


def annulus_enumerate(patch: TriangularPatch, bc: BoundaryCondition, spec: SpectralData, x: float,
                      cap: int = DEFAULT_CAP, avoid_hole: bool = False, validate: bool = True) -> AnnulusResult:
    """Exact height sum on an annulus with outer arcs a | b and inner height c.

    Every configuration is classified by its contractible loops, its
    non-contractible loops N and the side of the curve the hole is on.
    With ``avoid_hole`` configurations whose curve touches the inner
    boundary are discarded.
    """
    if bc.mode != "annulus":
        raise DomainError("annulus_enumerate needs an annulus boundary condition")
    if validate:
        require_valid(patch, bc, spec.graph, "dilute")
    en = enumerate_heights(patch, bc, spec, cap=cap, stream=True, validate=False)
    configs = en.configs
    w = en.weights(x)
    start = change_points(patch, bc)[0]
    if avoid_hole:
        keep = ~_touches_hole(patch, configs, start)
        configs, w = configs[keep], w[keep]
    contr, N, side = _classify(patch, configs, _annulus_sites(patch, bc))
    stats = AnnulusLoopStats(contr, N, side, _aggregate(N, w), _aggregate(side, w),
                             _curve_law(patch, configs, w, start))
    Z = complex(w.sum())
    return AnnulusResult(Z.real if abs(Z.imag) < 1e-12 * abs(Z) else Z, stats,
                         {"graph": spec.graph.name, "bc": bc.to_dict(), "x": x,
                          "configurations": int(len(configs)), "avoid_hole": avoid_hole})


# --------------------------------------------------------------------------
# loop side: two-colourings with a free hole colour


@dataclass
class AnnulusLoopGas:
    """All wall configurations of the annulus, one per two-colouring."""

    configs: np.ndarray
    marked: np.ndarray
    contractible: np.ndarray
    N: np.ndarray
    side: np.ndarray
    start: int

    def weights(self, x: float, loop_weight) -> np.ndarray:
        """``loop_weight(contractible, N, side)`` supplies the loop factor."""
        keys, inv = np.unique(np.c_[self.contractible, self.N, self.side], axis=0, return_inverse=True)
        lw = np.array([loop_weight(int(c), int(n), int(s)) for c, n, s in keys])
        return x ** self.marked.astype(float) * lw[inv.ravel()]


def annulus_loop_gas(patch: TriangularPatch, bc: BoundaryCondition, cap: int = DEFAULT_CAP) -> AnnulusLoopGas:
    """Enumerate the domain walls of an annulus directly: outer arcs are
    coloured 0 (a) and 1 (b), the hole boundary takes one free colour."""
    arcs, _ = _split_cycle_by_edges(patch, patch.outer, change_points(patch, bc))
    hole = list(patch.holes[0])
    fixed = np.full(patch.n_sites, -1, dtype=np.int64)
    fixed[arcs[1]] = 0
    fixed[arcs[0]] = 1
    free = np.flatnonzero(fixed < 0)
    free = np.array([s for s in free if s not in set(hole)], dtype=np.int64)
    if len(free) + 1 > cap + 1:
        raise EnumerationCapError(f"{len(free)} free sites exceed the cap of {cap}")
    bits = np.array(list(itertools.product((0, 1), repeat=len(free) + 1)), dtype=np.int64)
    configs = np.repeat(fixed[None, :], len(bits), axis=0)
    configs[:, free] = bits[:, :-1]
    configs[:, hole] = bits[:, -1:]
    tri = configs[:, patch.triangles]
    marked = (tri.min(axis=2) != tri.max(axis=2)).sum(axis=1)
    contr, N, side = _classify(patch, configs, _annulus_sites(patch, bc))
    return AnnulusLoopGas(configs, marked, contr, N, side, change_points(patch, bc)[0])


def annulus_factorized_Z(patch, bc: BoundaryCondition, spec: SpectralData, x: float,
                         cap: int = DEFAULT_CAP) -> float:
    """Loop-side sum of x^M Lambda^contractible [G^N]_dc S_c / S_d, with d the
    outer height on the hole's side of the curve. The ratio S_c / S_d is the
    turning factor of loops encircling the hole in the plane; the open curve
    contributes the constant ``open_curve_factor``."""
    gas = annulus_loop_gas(patch, bc, cap)
    a, b, c = bc.heights
    g = spec.graph
    S = spec.S
    Lam = spec.Lambda
    cache = {}

    def lw(k, n, s):
        d = (a, b)[s]
        if (n, d) not in cache:
            cache[n, d] = int(walk_matrix(g, n)[g.index(d), g.index(c)]) * S[g.index(c)] / S[g.index(d)]
        return Lam**k * cache[n, d]

    return float(gas.weights(x, lw).sum() * open_curve_factor(patch, bc, spec))


def annulus_law_compare(patch, spec_a: SpectralData, bc_a: BoundaryCondition,
                        spec_b: SpectralData, bc_b: BoundaryCondition, x: float,
                        cap: int = DEFAULT_CAP, avoid_hole: bool = False) -> dict:
    """Exact curve laws of two models on the same annulus and their TV distance."""
    ra = annulus_enumerate(patch, bc_a, spec_a, x, cap, avoid_hole)
    rb = annulus_enumerate(patch, bc_b, spec_b, x, cap, avoid_hole)
    return {
        "tv": tv_distance(ra.stats.curve_law, rb.stats.curve_law),
        "law_N": (ra.stats.law_N, rb.stats.law_N),
        "side_law": (ra.stats.side_law, rb.stats.side_law),
        "Z": (ra.Z, rb.Z),
        "curves": len(set(ra.stats.curve_law) | set(rb.stats.curve_law)),
    }


def canonical_annulus_law(patch, spec: SpectralData, a: int, b: int, x: float,
                          cap: int = DEFAULT_CAP, avoid_hole: bool = False):
    """Curve law with the inner height summed over all nodes.

    On a planar annulus the triangle weights of a loop around the hole
    already contribute S_c / S_d, so the plain sum over c carries the S_c
    projection: every non-contractible loop ends up with weight Lambda.
    Returns (law, Z).
    """
    configs, ws = [], []
    for c in spec.graph.labels:
        bc = BoundaryCondition.annulus(a, b, c)
        try:
            en = enumerate_heights(patch, bc, spec, cap=cap, stream=True, validate=False)
        except DomainError:
            continue
        if en.count == 0:
            continue
        configs.append(en.configs)
        ws.append(en.weights(x))
    configs = np.concatenate(configs)
    w = np.concatenate(ws)
    start = change_points(patch, BoundaryCondition.annulus(a, b, a))[0]
    if avoid_hole:
        keep = ~_touches_hole(patch, configs, start)
        configs, w = configs[keep], w[keep]
    return _curve_law(patch, configs, w, start), complex(w.sum()).real


def loop_gas_annulus_law(patch, Lambda: float, x: float, cap: int = DEFAULT_CAP, avoid_hole: bool = False):
    """Curve law of the loop gas with weight Lambda on every closed loop."""
    bc = BoundaryCondition.annulus(0, 1, 2)
    gas = annulus_loop_gas(patch, bc, cap)
    w = gas.weights(x, lambda k, n, s: Lambda ** (k + n))
    configs = gas.configs
    if avoid_hole:
        keep = ~_touches_hole(patch, configs, gas.start)
        configs, w = configs[keep], w[keep]
    return _curve_law(patch, configs, w, gas.start), float(w.sum())


# --------------------------------------------------------------------------
# arch configurations


def forced_arch_heights(N: int, m: int) -> tuple[int, ...]:
    """Boundary arcs 1, 2, ..., N+1, N, ..., 2 (cyclic; the last arc returns
    to 1). On A_m the N curves are then forced to pair x_j with y_j."""
    if N < 1:
        raise ValueError("need N >= 1")
    if N > m - 1:
        raise DomainError(f"forced arches need N <= m - 1, got N = {N} on A_{m}")
    return tuple(range(1, N + 2)) + tuple(range(N, 1, -1))


def cross_ratio(z) -> float:
    """(z2 - z1)(z4 - z3) / ((z3 - z1)(z4 - z2)) for real z1 < z2 < z3 < z4.

    One point may be infinite; it is then z4 and the limit is taken.
    """
    z1, z2, z3, z4 = sorted(float(v) for v in z)
    if not np.isfinite(z3):
        raise ValueError("at most one point may be at infinity")
    if np.isinf(z4):
        return (z2 - z1) / (z3 - z1)
    return (z2 - z1) * (z4 - z3) / ((z3 - z1) * (z4 - z2))


@dataclass
class ArchExperiment:
    """Exact connection statistics of the curves leaving 2N change points.

    Pairings are tuples of index pairs into ``breaks`` (boundary order).
    ``topology_factor`` holds, per pairing, the height-summed weight of a
    wall configuration divided by x^M Lambda^loops (one value per pairing
    when the factor depends on topology only).
    """

    heights: tuple
    breaks: tuple
    weights: dict
    probabilities: dict
    topology_factor: dict
    eta: float | None
    meta: dict


def _pairing(patch, v, breaks):
    unequal = v[patch.edges[:, 0]] != v[patch.edges[:, 1]]
    index = {e: i for i, e in enumerate(breaks)}
    pairs = []
    seen = set()
    for i, e in enumerate(breaks):
        if i in seen:
            continue
        c = trace_curve(patch, unequal, e)
        j = index.get(c.edges[-1])
        if j is None:
            raise RuntimeError("curve ended away from the change points")
        seen.update((i, j))
        pairs.append((min(i, j), max(i, j)))
    return tuple(sorted(pairs))


def arch_enumerate(patch: TriangularPatch, spec: SpectralData, heights, breaks, x: float,
                   cap: int = DEFAULT_CAP) -> ArchExperiment:
    """Exact pairing weights for boundary arcs with the given heights.

    ``breaks`` are the boundary edges where consecutive arcs meet;
    ``heights[k]`` is the arc that follows ``breaks[k]`` in boundary order.
    """
    heights = tuple(int(h) for h in heights)
    if len(heights) != len(breaks) or len(heights) % 2:
        raise DomainError("need an even number of arcs, one change point per arc")
    g = spec.graph
    for h, k in zip(heights, heights[1:] + heights[:1]):
        if not g.adjacent(h, k):
            raise DomainError(f"consecutive arc heights {h}, {k} are not adjacent on {g.name}")
    # arcs as split from the boundary cycle start after the first sorted break
    bedges = patch.boundary_edges()
    order = sorted(range(len(breaks)), key=lambda i: bedges.index(breaks[i]))
    breaks = tuple(breaks[i] for i in order)
    heights = tuple(heights[i] for i in order)
    bc = BoundaryCondition.arch(heights, breaks)
    require_valid(patch, bc, g, "dilute")
    en = enumerate_heights(patch, bc, spec, cap=cap, stream=True, validate=False)
    w = en.weights(x)
    configs = en.configs
    pairings = [_pairing(patch, v, breaks) for v in configs]
    weights = {}
    for p, wi in zip(pairings, w):
        weights[p] = weights.get(p, 0.0) + wi
    Z = sum(weights.values())
    probs = {p: float(np.real(v / Z)) for p, v in weights.items()}
    # wall-level sums divided by x^M Lambda^loops
    n_open = len(breaks) // 2
    walls = configs[:, patch.edges[:, 0]] != configs[:, patch.edges[:, 1]]
    keys, inv = np.unique(np.packbits(walls, axis=1), axis=0, return_inverse=True)
    inv = inv.ravel()
    wsum = np.zeros(len(keys), dtype=complex)
    np.add.at(wsum, inv, w)
    factors = {}
    for k in range(len(keys)):
        r = int(np.flatnonzero(inv == k)[0])
        v = configs[r]
        clusters = _count_clusters(patch, v)
        loops = clusters - 1 - n_open
        M = int(en.marked[r])
        f = wsum[k] / (x**M * spec.Lambda**loops)
        factors.setdefault(pairings[r], []).append(complex(f).real)
    eta = None
    if len(breaks) == 4:
        try:
            from .curves import rectangle_of
            rect = rectangle_of(patch)
            eta = cross_ratio(_boundary_abscissae(patch, rect, breaks))
        except Exception:  # geometry outside the map's domain
            eta = None
    return ArchExperiment(heights, breaks, weights, probs, factors, eta,
                          {"graph": g.name, "x": x, "configurations": int(en.count)})


def _boundary_abscissae(patch, rect, breaks):
    pts = np.array([patch.edge_mid(e) for e in breaks])
    w = rect(pts[:, 0] + 1j * pts[:, 1])
    bad = ~np.isfinite(w) | (np.abs(w) > 1e12)
    return np.where(bad, np.inf, np.real(w))


def _count_clusters(patch, v):
    parent = list(range(patch.n_sites))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s, t in patch.edges:
        if v[s] == v[t]:
            parent[find(s)] = find(t)
    return len({find(i) for i in range(patch.n_sites)})


def arch_swap_ratio(spec: SpectralData, a: int, b: int) -> float:
    """S_a / S_b: relative weight of the two ways two curves can connect."""
    g = spec.graph
    return float(spec.S[g.index(a)] / spec.S[g.index(b)])


def topology_swap_ratio(exp: ArchExperiment, rtol: float = 1e-10) -> dict:
    """Ratios of the per-pairing topology factors.

    Each pairing's factors must agree across all its wall configurations;
    returns {pairing: factor / factor of the first pairing}.
    """
    base = None
    out = {}
    for p in sorted(exp.topology_factor):
        vals = np.array(exp.topology_factor[p])
        if np.max(np.abs(vals - vals[0])) > rtol * abs(vals[0]):
            raise ArithmeticError(f"pairing {p}: factor is not constant ({vals.min()} .. {vals.max()})")
        if base is None:
            base = vals[0]
        out[p] = float(vals[0] / base)
    return out


# --------------------------------------------------------------------------
# fused boundary exponents


def h1s(kappa: float, s: int) -> float:
    """Weight of the (1, s) boundary operator as a function of kappa."""
    return (s - 1) * (2 * (s + 1) - kappa) / (2 * kappa)


@dataclass
class FusionExponents:
    kappa: float
    N: int
    identity_channel: float  # -(6 - kappa) / kappa
    phi13_channel: float  # 2 / kappa
    fused: float  # -2 h_{1,N+1}
    h12: float
    h13: float
    h1N1: float
    minimal_model: tuple | None
    continuum: bool
    structure: dict


def zn_exponents(kappa: float, N: int, search: int = 64) -> FusionExponents:
    """Exponents of the N-curve partition function as points fuse.

    h_{1,s} comes from the Kac table of the (p, p') with kappa = 4p'/p
    (kappa < 4) or 4p/p' (kappa > 4) when such a pair with p <= ``search``
    exists; otherwise from the continuum formula, flagged by ``continuum``.
    """
    if not 2 < kappa < 8:
        raise ValueError(f"kappa must lie in (2, 8), got {kappa}")
    if N < 1:
        raise ValueError("N must be >= 1")
    r = Fraction(kappa / 4).limit_denominator(search)
    mm = None
    if abs(float(r) - kappa / 4) < 1e-12 and r != 1:
        if kappa < 4:
            pp, p = r.numerator, r.denominator
            weight = lambda s: float(kac_weight(s, 1, p, pp))
        else:
            p, pp = r.numerator, r.denominator
            weight = lambda s: float(kac_weight(1, s, p, pp))
        if pp >= 2 and max(p, pp) <= search:
            mm = (p, pp)
    if mm is None:
        weight = lambda s: h1s(kappa, s)
    h12, h13, hN = weight(2), weight(3), weight(N + 1)
    structure = {
        "pairs_x": N * (N - 1) // 2,
        "pairs_y": N * (N - 1) // 2,
        "pair_exponent": 2 / kappa,
        "xy_exponent": -2 * hN,
        "near_pair_exponent": -(6 - kappa) / kappa,
        "Z0": 1,
    }
    return FusionExponents(kappa, N, -(6 - kappa) / kappa, 2 / kappa, -2 * hN, h12, h13, hN,
                           mm, mm is None, structure)
