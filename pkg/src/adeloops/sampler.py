"""Single-site heat-bath Monte Carlo for both height models.

Uniform variates come from numpy's PCG64 seeded explicitly, drawn one per
site update in fixed blocks, so a seed reproduces a run exactly. Curves are
traced from sampled heights; for the dense model the plaquette terms are
drawn from their exact conditional given the heights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .dense import _fourth_roots, _tables, medial_graph
from .dilute import ChordalCurve, _triangle_tables, trace_curve
from .domains import (BoundaryCondition, DomainError, SquarePatch, TriangularPatch, change_points,
                      require_valid)
from .spectra import SpectralData

RNG_NAME = "numpy.PCG64"
BLOCK_SWEEPS = 256


@dataclass
class ChainConfig:
    model: str  # dilute | dense
    spec: SpectralData
    patch: TriangularPatch | SquarePatch
    bc: BoundaryCondition
    x: float | None = None
    sweeps: int = 1000
    thermalization: int = 100
    seed: int = 0
    stride: int = 1
    batches: int = 50

    def manifest(self) -> dict:
        return {
            "model": self.model,
            "graph": self.spec.graph.name,
            "eigen_index": self.spec.selected_index,
            "lattice": self.patch.meta,
            "shape": self.patch.shape,
            "bc": self.bc.to_dict(),
            "x": self.x,
            "sweeps": self.sweeps,
            "thermalization": self.thermalization,
            "seed": self.seed,
            "stride": self.stride,
            "rng": RNG_NAME,
        }


@nb.njit(cache=True)
def _csr_dot(H, s, ptr, idx, allowed, h):
    for j in range(ptr[s], ptr[s + 1]):
        if not allowed[h, H[idx[j]]]:
            return False
    return True


@nb.njit(cache=True)
def _choose(probs, tot, u):
    r = u * tot
    acc = 0.0
    last = -1
    for h in range(probs.shape[0]):
        if probs[h] > 0:
            acc += probs[h]
            last = h
            if r < acc:
                return h
    return last


@nb.njit(cache=True)
def _update_dilute(H, s, nbr_ptr, nbr, inc_ptr, inc, triangles, wtab, allowed, u, probs):
    k = allowed.shape[0]
    old = H[s]
    tot = 0.0
    for h in range(k):
        w = 0.0
        if _csr_dot(H, s, nbr_ptr, nbr, allowed, h):
            H[s] = h
            w = 1.0
            for j in range(inc_ptr[s], inc_ptr[s + 1]):
                t = inc[j]
                w *= wtab[H[triangles[t, 0]], H[triangles[t, 1]], H[triangles[t, 2]]]
        probs[h] = w
        tot += w
    if tot <= 0.0:
        H[s] = old
        return False
    H[s] = _choose(probs, tot, u)
    return True


@nb.njit(cache=True)
def _sweeps_dilute(H, free, nbr_ptr, nbr, inc_ptr, inc, triangles, wtab, allowed, u):
    probs = np.zeros(allowed.shape[0])
    skipped = 0
    n = free.shape[0]
    for i in range(u.shape[0]):
        if not _update_dilute(H, free[i % n], nbr_ptr, nbr, inc_ptr, inc, triangles, wtab, allowed, u[i], probs):
            skipped += 1
    return skipped


@nb.njit(cache=True)
def _plaq_w(pl, H, full, half):
    if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
        return full[H[pl[0]], H[pl[1]], H[pl[2]], H[pl[3]]]
    k = 0
    while pl[k] >= 0:
        k += 1
    return half[H[pl[(k + 1) % 4]], H[pl[(k + 2) % 4]], H[pl[(k + 3) % 4]]]


@nb.njit(cache=True)
def _update_dense(H, s, nbr_ptr, nbr, inc_ptr, inc, plaquettes, full, half, adj, u, probs):
    k = adj.shape[0]
    old = H[s]
    tot = 0.0
    for h in range(k):
        w = 0.0
        if _csr_dot(H, s, nbr_ptr, nbr, adj, h):
            H[s] = h
            w = 1.0
            for j in range(inc_ptr[s], inc_ptr[s + 1]):
                w *= _plaq_w(plaquettes[inc[j]], H, full, half)
        probs[h] = w
        tot += w
    if tot <= 0.0:
        H[s] = old
        return False
    H[s] = _choose(probs, tot, u)
    return True


@nb.njit(cache=True)
def _sweeps_dense(H, free, nbr_ptr, nbr, inc_ptr, inc, plaquettes, full, half, adj, u):
    probs = np.zeros(adj.shape[0])
    skipped = 0
    n = free.shape[0]
    for i in range(u.shape[0]):
        if not _update_dense(H, free[i % n], nbr_ptr, nbr, inc_ptr, inc, plaquettes, full, half, adj, u[i], probs):
            skipped += 1
    return skipped


@nb.njit(cache=True)
def _equal_clusters(H, edges, parent):
    n = H.shape[0]
    for i in range(n):
        parent[i] = i
    comps = n
    for e in range(edges.shape[0]):
        a = edges[e, 0]
        b = edges[e, 1]
        if H[a] != H[b]:
            continue
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            parent[a] = b
            comps -= 1
    return comps


@nb.njit(cache=True)
def _marked(H, triangles):
    m = 0
    for t in range(triangles.shape[0]):
        a = H[triangles[t, 0]]
        if a != H[triangles[t, 1]] or a != H[triangles[t, 2]]:
            m += 1
    return m


def _csr(lists):
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in lists])
    flat = np.array([v for x in lists for v in x], dtype=np.int64)
    return ptr, flat


class ChainState:
    """Heights plus the tables needed for local updates."""

    def __init__(self, cfg: ChainConfig):
        self.cfg = cfg
        spec, patch = cfg.spec, cfg.patch
        if np.any(spec.S <= 0):
            raise ValueError("sampling needs a positive weight vector (Perron eigenvector)")
        self.graph = spec.graph
        fixed = require_valid(patch, cfg.bc, spec.graph, cfg.model)
        H = np.full(patch.n_sites, -1, dtype=np.int64)
        for s, h in fixed.items():
            H[s] = spec.graph.index(h)
        self.nbr_ptr, self.nbr = _csr(patch.neighbors())
        if cfg.model == "dilute":
            if not isinstance(patch, TriangularPatch):
                raise DomainError("dilute sampling needs a triangular patch")
            if cfg.x is None or cfg.x <= 0:
                raise ValueError("dilute sampling needs x > 0")
            self.free = patch.free_sites.astype(np.int64)
            marked, logw, _ = _triangle_tables(spec.graph.adjacency, spec.S)
            self.wtab = np.where(marked >= 0, cfg.x ** np.maximum(marked, 0) * np.exp(logw), 0.0)
            adj = spec.graph.adjacency.astype(bool)
            self.allowed = adj | np.eye(len(adj), dtype=bool)
            inc = [[] for _ in range(patch.n_sites)]
            for t, tr in enumerate(patch.triangles):
                for s in tr:
                    inc[s].append(t)
            self.triangles = patch.triangles.astype(np.int64)
            self.edges = patch.edges.astype(np.int64)
        elif cfg.model == "dense":
            if not isinstance(patch, SquarePatch):
                raise DomainError("dense sampling needs a square patch")
            free = patch.free_sites
            # checkerboard: even sublattice first, then odd
            self.free = np.concatenate([free[patch.parity[free] == 0], free[patch.parity[free] == 1]]).astype(np.int64)
            self.full, self.half = _tables(spec)
            self.adj = spec.graph.adjacency.astype(bool)
            inc = [[] for _ in range(patch.n_sites)]
            for p, pl in enumerate(patch.plaquettes):
                for s in pl:
                    if s >= 0:
                        inc[s].append(p)
            self.edges = np.array(patch.lattice_edges(), dtype=np.int64).reshape(-1, 2)
        else:
            raise ValueError(f"model must be dilute or dense, not {cfg.model!r}")
        self.inc_ptr, self.inc = _csr(inc)
        H[self.free] = -1
        self.H = self._initial(H)
        self.rng = np.random.Generator(np.random.PCG64(cfg.seed))
        self.skipped = 0
        self._parent = np.arange(patch.n_sites)

    def _initial(self, H):
        """Greedy admissible start: fill free sites by BFS from the boundary."""
        patch = self.cfg.patch
        nbrs = patch.neighbors()
        order, seen = [], set(np.flatnonzero(H >= 0).tolist())
        frontier = sorted(seen)
        while frontier:
            nxt = []
            for s in frontier:
                for t in nbrs[s]:
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
                        nxt.append(t)
            frontier = nxt
        H = H.copy()
        ok_tab = self.allowed if self.cfg.model == "dilute" else self.adj
        k = len(ok_tab)
        choice = [-1] * len(order)
        i = 0
        while 0 <= i < len(order):
            site = order[i]
            choice[i] += 1
            if choice[i] >= k:
                H[site] = -1
                choice[i] = -1
                i -= 1
                continue
            h = choice[i]
            if all(H[t] < 0 or ok_tab[h, H[t]] for t in nbrs[site]):
                H[site] = h
                i += 1
        if i < 0:
            raise DomainError("no admissible configuration for these boundary heights")
        return H

    def step_site(self, site: int, u: float) -> bool:
        probs = np.zeros(self.graph.node_count)
        if self.cfg.model == "dilute":
            return _update_dilute(self.H, site, self.nbr_ptr, self.nbr, self.inc_ptr, self.inc, self.triangles,
                                  self.wtab, self.allowed, u, probs)
        return _update_dense(self.H, site, self.nbr_ptr, self.nbr, self.inc_ptr, self.inc, self.cfg.patch.plaquettes,
                             self.full, self.half, self.adj, u, probs)

    def conditional(self, site: int) -> np.ndarray:
        """Exact conditional law of one site given the rest."""
        H = self.H.copy()
        k = self.graph.node_count
        w = np.zeros(k)
        for h in range(k):
            H[site] = h
            w[h] = self._local_weight(H, site)
        return w / w.sum() if w.sum() > 0 else w

    def _local_weight(self, H, site):
        patch = self.cfg.patch
        if self.cfg.model == "dilute":
            if any(not self.allowed[H[site], H[t]] for t in patch.neighbors()[site]):
                return 0.0
            w = 1.0
            for t in self.inc[self.inc_ptr[site]:self.inc_ptr[site + 1]]:
                w *= self.wtab[tuple(H[patch.triangles[t]])]
            return w
        if any(not self.adj[H[site], H[t]] for t in patch.neighbors()[site]):
            return 0.0
        w = 1.0
        for p in self.inc[self.inc_ptr[site]:self.inc_ptr[site + 1]]:
            w *= _plaq_w(patch.plaquettes[p], H, self.full, self.half)
        return float(np.real(w))

    def sweep(self, n: int = 1):
        nf = len(self.free)
        if nf == 0 or n <= 0:
            return
        u = self.rng.random(n * nf)
        if self.cfg.model == "dilute":
            self.skipped += _sweeps_dilute(self.H, self.free, self.nbr_ptr, self.nbr, self.inc_ptr, self.inc,
                                           self.triangles, self.wtab, self.allowed, u)
        else:
            self.skipped += _sweeps_dense(self.H, self.free, self.nbr_ptr, self.nbr, self.inc_ptr, self.inc,
                                          self.cfg.patch.plaquettes, self.full, self.half, self.adj, u)

    def observables(self) -> dict:
        if self.cfg.model == "dilute":
            clusters = _equal_clusters(self.H, self.edges, self._parent)
            arcs = 2 if self.cfg.bc.mode == "chordal" else 1
            return {"loops": int(clusters - arcs), "marked": int(_marked(self.H, self.triangles))}
        clusters = _equal_clusters(self.H, self.edges, self._parent)
        return {"clusters": int(clusters), "joined": int(_joined(self.H, self.cfg.patch.plaquettes))}


@nb.njit(cache=True)
def _joined(H, plaquettes):
    n = 0
    for p in range(plaquettes.shape[0]):
        pl = plaquettes[p]
        if pl[0] >= 0 and pl[1] >= 0 and pl[2] >= 0 and pl[3] >= 0:
            if H[pl[0]] == H[pl[2]]:
                n += 1
            if H[pl[1]] == H[pl[3]]:
                n += 1
    return n


def heatbath_step(state: ChainState, site: int, rng: np.random.Generator) -> ChainState:
    """Resample one free site from its exact conditional."""
    if not state.step_site(site, rng.random()):
        state.skipped += 1
    return state


def batch_means(series: np.ndarray, batches: int = 50):
    """Mean and standard error from non-overlapping batch means."""
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n < 2 * batches:
        batches = max(n // 2, 1)
    if n < 2:
        return (float(series.mean()) if n else float("nan")), float("nan")
    size = n // batches
    means = series[: size * batches].reshape(batches, size).mean(axis=1)
    return float(series.mean()), float(means.std(ddof=1) / np.sqrt(batches))


@dataclass
class ChainResult:
    records: list
    summary: dict
    series: dict = field(default_factory=dict)


def run_chain(cfg: ChainConfig, out=None, keep_series: bool = True) -> ChainResult:
    """Thermalise, then record observables every ``stride`` sweeps.

    With ``out`` (a text stream) records are written as NDJSON followed by a
    summary line; floats use repr so identical seeds give identical bytes.
    """
    state = ChainState(cfg)
    if cfg.sweeps <= 0:
        summary = {"type": "summary", "manifest": cfg.manifest(), "samples": 0,
                   "insufficient_data": True, "means": {}, "stderr": {}}
        if out is not None:
            out.write(json.dumps(summary, sort_keys=True) + "\n")
        return ChainResult([], summary)
    done = 0
    while done < cfg.thermalization:
        n = min(BLOCK_SWEEPS, cfg.thermalization - done)
        state.sweep(n)
        done += n
    names = list(state.observables())
    series = {k: [] for k in names}
    records = []
    if out is not None:
        out.write(json.dumps({"type": "header", "manifest": cfg.manifest()}, sort_keys=True) + "\n")
    for i in range(cfg.sweeps // cfg.stride):
        state.sweep(cfg.stride)
        obs = state.observables()
        for k in names:
            series[k].append(obs[k])
        rec = {"type": "record", "sweep": (i + 1) * cfg.stride, **obs}
        if keep_series:
            records.append(rec)
        if out is not None:
            out.write(json.dumps(rec, sort_keys=True) + "\n")
    arrays = {k: np.asarray(v) for k, v in series.items()}
    means, errs = {}, {}
    for k, v in arrays.items():
        means[k], errs[k] = batch_means(v, cfg.batches)
    summary = {
        "type": "summary",
        "manifest": cfg.manifest(),
        "samples": len(next(iter(arrays.values()))) if arrays else 0,
        "insufficient_data": any(len(v) < 2 * cfg.batches for v in arrays.values()),
        "means": means,
        "stderr": errs,
        "skipped_updates": int(state.skipped),
    }
    if "loops" in arrays:
        vals, counts = np.unique(arrays["loops"], return_counts=True)
        summary["loop_histogram"] = {str(int(v)): int(c) for v, c in zip(vals, counts)}
    if out is not None:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return ChainResult(records, summary, arrays)


def _pool_rare(probs, n, min_expected=5.0):
    """Bin map that pools outcomes expected fewer than ``min_expected`` times."""
    probs = np.asarray(probs, dtype=float)
    groups = [[k] for k in np.flatnonzero(n * probs >= min_expected)]
    rare = [k for k in np.flatnonzero((probs > 0) & (n * probs < min_expected))]
    if rare:
        if groups and n * probs[rare].sum() < min_expected:
            j = min(range(len(groups)), key=lambda g: probs[groups[g]].sum())
            groups[j] += rare
        else:
            groups.append(rare)
    return groups


def histogram_test(samples: np.ndarray, probs: np.ndarray, batches: int = 100):
    """Compare a correlated sample of integer outcomes with exact probabilities.

    Outcomes expected fewer than five times are pooled. Each bin indicator
    gets a batch-means standard error (never below the independent-sample
    value); the chi-square statistic uses the batch covariance of all bins
    but one. Returns (chi2, dof, p_value, max |deviation| / sigma).
    """
    from scipy import stats

    samples = np.asarray(samples)
    probs = np.asarray(probs, dtype=float)
    n = len(samples)
    size = n // batches
    samples = samples[: size * batches]
    groups = _pool_rare(probs, size * batches)
    ind = np.stack([np.isin(samples, g) for g in groups], axis=1).astype(float)
    pg = np.array([probs[g].sum() for g in groups])
    bm = ind.reshape(batches, size, len(groups)).mean(axis=1)
    phat = ind.mean(axis=0)
    cov = np.atleast_2d(np.cov(bm.T, ddof=1)) / batches
    d = phat - pg
    var = np.maximum(np.diag(cov), pg * (1 - pg) / len(samples))
    zmax = float(np.max(np.abs(d) / np.sqrt(np.maximum(var, 1e-300))))
    # drop one bin: the indicators sum to one
    d1, c1 = d[:-1], cov[:-1, :-1] + np.diag(var[:-1] - np.diag(cov)[:-1])
    chi2 = float(d1 @ np.linalg.solve(c1, d1)) if len(d1) else 0.0
    dof = len(d1)
    # Hotelling correction for an estimated covariance
    f = chi2 * (batches - dof) / (dof * (batches - 1)) if dof else 0.0
    p = float(stats.f.sf(f, dof, batches - dof)) if dof else 1.0
    if np.any(np.isin(samples, np.flatnonzero(probs == 0))) or np.any(samples >= len(probs)):
        p = 0.0
    return chi2, dof, p, zmax


# --------------------------------------------------------------------------
# curves


def _dense_terms(state: ChainState, rng: np.random.Generator) -> np.ndarray:
    """Draw plaquette terms given heights (exact conditional)."""
    patch = state.cfg.patch
    r = _fourth_roots(state.cfg.spec.S)
    H = state.H
    terms = np.zeros(len(patch.plaquettes), dtype=np.int64)
    u = rng.random(len(patch.plaquettes))
    for p, pl in enumerate(patch.plaquettes):
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            terms[p] = (k + 1) % 2
            continue
        a, b, c, d = H[pl]
        w0 = r[b] * r[d] / (r[a] * r[c]) if a == c else 0.0
        w1 = r[a] * r[c] / (r[b] * r[d]) if b == d else 0.0
        terms[p] = 0 if u[p] * (w0 + w1) < w0 else 1
    return terms


@dataclass
class MedialCurve:
    nodes: tuple[int, ...]
    points: np.ndarray
    left: int  # interior right-angle turns
    right: int
    winding: float = 0.0  # signed total turning, boundary normal in to boundary normal out

    @property
    def turn_difference(self) -> int:
        """Right minus left turning in units of 45 degrees.

        The end steps meet the boundary at 45 degrees, so interior turn
        counts alone are not fixed; the total turning is.
        """
        return int(round(-self.winding / (np.pi / 4)))


def _end_normal(s, t, step):
    n = np.array([s[1] - t[1], t[0] - s[0]])
    n /= np.hypot(*n)
    return n if n @ step > 0 else -n


def medial_winding(patch: SquarePatch, crossed) -> float:
    """Total signed turning of a medial path given the lattice edges it
    crosses, from the inward normal at the first edge to the outward normal
    at the last."""
    ends = patch.pos[np.asarray(crossed)]
    pts = ends.mean(axis=1)
    d = np.diff(pts, axis=0)
    dirs = np.vstack([_end_normal(*ends[0], d[0]), d, _end_normal(*ends[-1], d[-1])])
    return float(np.sum(np.arctan2(dirs[:-1, 0] * dirs[1:, 1] - dirs[:-1, 1] * dirs[1:, 0],
                                   np.sum(dirs[:-1] * dirs[1:], axis=1))))


def trace_medial_curve(patch: SquarePatch, terms, mg=None) -> MedialCurve:
    mg = mg or medial_graph(patch)
    nbr = [[] for _ in range(len(mg.edges))]
    for p, t in enumerate(terms):
        for j in range(2):
            a, b, _ = mg.arcs[p, t, j]
            if a >= 0:
                nbr[a].append(b)
                nbr[b].append(a)
    start = int(mg.open_nodes[0])
    nodes = [start]
    prev = -1
    cur = start
    while True:
        nxt = [v for v in nbr[cur] if v != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        nodes.append(cur)
    pts = patch.pos[mg.edges[nodes]].mean(axis=1)
    d = np.diff(pts, axis=0)
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    return MedialCurve(tuple(nodes), pts, int(np.sum(cross > 0)), int(np.sum(cross < 0)),
                       medial_winding(patch, mg.edges[nodes]))


def sample_curve_ensemble(cfg: ChainConfig, count: int, progress=None) -> list:
    """``count`` chordal curves taken every ``cfg.stride`` sweeps after
    thermalisation."""
    if count <= 0:
        return []
    if cfg.bc.mode != "chordal":
        raise DomainError("curve sampling needs a chordal boundary condition")
    state = ChainState(cfg)
    state.sweep(cfg.thermalization)
    curves = []
    if cfg.model == "dilute":
        z1, _ = change_points(cfg.patch, cfg.bc)
        e0, e1 = cfg.patch.edges[:, 0], cfg.patch.edges[:, 1]
        for i in range(count):
            state.sweep(cfg.stride)
            curves.append(trace_curve(cfg.patch, state.H[e0] != state.H[e1], z1))
            if progress:
                progress(i)
    else:
        mg = medial_graph(cfg.patch)
        for i in range(count):
            state.sweep(cfg.stride)
            curves.append(trace_medial_curve(cfg.patch, _dense_terms(state, state.rng), mg))
            if progress:
                progress(i)
    return curves


def curve_points(patch, curve) -> np.ndarray:
    """Polyline of a curve. Dilute curves alternate crossed-edge midpoints and
    triangle centres, so every step is half a honeycomb edge."""
    if isinstance(curve, ChordalCurve):
        pts = [patch.edge_mid(curve.edges[0])]
        for t, e in zip(curve.triangles, curve.edges[1:]):
            pts += [patch.tri_center(t), patch.edge_mid(e)]
        return np.array(pts)
    return curve.points
