"""Finite lattice patches and boundary conditions.

Triangular patches carry the dual honeycomb structure used by the dilute
model: every lattice edge is a dual edge between the (at most two)
triangles containing it. Square patches are described in physical
coordinates ``(p, q)`` with sublattice parity ``(p + q) % 2``; plaquettes
with one missing corner are boundary half-plaquettes whose two diagonal
corners lie on the boundary.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .spectra import GraphSpec

SQ3 = math.sqrt(3.0)


class DomainError(ValueError):
    pass


def _boundary_cycles(n_sites, pos, oriented_edges):
    """Chain boundary edges (interior on the left) into closed site cycles."""
    nxt = {}
    for s, t in oriented_edges:
        if s in nxt:
            raise DomainError(f"boundary pinches at site {s}")
        nxt[s] = t
    cycles = []
    seen = set()
    for start in sorted(nxt, key=lambda s: (pos[s][1], pos[s][0])):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start:
            cyc.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        cycles.append(cyc)
    return cycles


def _signed_area(pos, cyc):
    xy = pos[cyc]
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True, eq=False)
class TriangularPatch:
    """Sites, elementary triangles and dual (honeycomb) structure."""

    coords: np.ndarray  # (N, 2) integer lattice coordinates
    pos: np.ndarray  # (N, 2) physical positions
    triangles: np.ndarray  # (T, 3) site ids, counterclockwise
    up: np.ndarray  # (T,) bool
    edges: np.ndarray  # (E, 2) site ids, sorted
    edge_tris: np.ndarray  # (E, 2) triangle ids, -1 for outside
    tri_edges: np.ndarray  # (T, 3) edge ids; edge k is opposite corner k
    outer: tuple[int, ...]  # outer boundary cycle, counterclockwise
    holes: tuple[tuple[int, ...], ...] = ()
    shape: str = "parallelogram"
    cut: tuple[int, ...] = ()  # site path from a hole to the outer boundary
    meta: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def boundary_sites(self) -> np.ndarray:
        mask = np.zeros(self.n_sites, dtype=bool)
        mask[list(self.outer)] = True
        for h in self.holes:
            mask[list(h)] = True
        return mask

    @property
    def free_sites(self) -> np.ndarray:
        """Interior sites in row-major (y, then x) order."""
        idx = np.flatnonzero(~self.boundary_sites)
        return idx[np.lexsort((self.pos[idx, 0], self.pos[idx, 1]))]

    def edge_id(self, s: int, t: int) -> int:
        key = (min(s, t), max(s, t))
        return self._edge_index[key]

    @property
    def _edge_index(self):
        cache = self.meta.get("_edge_index")
        if cache is None:
            cache = {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}
            self.meta["_edge_index"] = cache
        return cache

    def boundary_edges(self, cycle=None) -> list[int]:
        cyc = self.outer if cycle is None else cycle
        return [self.edge_id(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in range(self.n_sites)]
        for a, b in self.edges:
            nb[a].append(int(b))
            nb[b].append(int(a))
        return nb

    def tri_center(self, t: int) -> np.ndarray:
        return self.pos[self.triangles[t]].mean(axis=0)

    def edge_mid(self, e: int) -> np.ndarray:
        return self.pos[self.edges[e]].mean(axis=0)

    def euler_characteristic(self) -> int:
        return self.n_sites - len(self.edges) + self.n_triangles

    def default_change_points(self) -> tuple[int, int]:
        """Boundary edges at the middle of the bottom and top rows."""
        ymin, ymax = self.pos[:, 1].min(), self.pos[:, 1].max()
        bedges = self.boundary_edges()

        def pick(y):
            cand = [e for e in bedges if np.allclose(self.pos[self.edges[e], 1], y)]
            if not cand:
                raise DomainError("no horizontal boundary row for change points")
            xs = [self.edge_mid(e)[0] for e in cand]
            xc = 0.5 * (min(self.pos[self.pos[:, 1] == y, 0]) + max(self.pos[self.pos[:, 1] == y, 0]))
            return cand[int(np.argmin(np.abs(np.array(xs) - xc + 1e-9)))]

        return pick(ymin), pick(ymax)

    def to_dict(self) -> dict:
        return {
            "lattice": "triangular",
            "shape": self.shape,
            "sites": self.coords.tolist(),
            "triangles": self.triangles.tolist(),
            "outer": list(self.outer),
            "holes": [list(h) for h in self.holes],
            "meta": {k: v for k, v in self.meta.items() if not k.startswith("_")},
        }


def _finish_triangular(coords, pos, tris, shape, holes_expected=0, meta=None, cut=()):
    pos = np.asarray(pos, dtype=float)
    tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
    # counterclockwise corner order
    for t in range(len(tris)):
        a, b, c = pos[tris[t]]
        if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0:
            tris[t, [1, 2]] = tris[t, [2, 1]]
    up = np.array([np.sum(pos[tr, 1] == pos[tr, 1].min()) == 2 for tr in tris], dtype=bool)
    edge_index = {}
    edges = []
    edge_tris = []
    tri_edges = np.empty_like(tris)
    for t, tr in enumerate(tris):
        for k in range(3):
            s, u = int(tr[(k + 1) % 3]), int(tr[(k + 2) % 3])
            key = (min(s, u), max(s, u))
            e = edge_index.get(key)
            if e is None:
                e = len(edges)
                edge_index[key] = e
                edges.append(key)
                edge_tris.append([t, -1])
            else:
                edge_tris[e][1] = t
            tri_edges[t, k] = e
    edges = np.array(edges, dtype=np.int64)
    edge_tris = np.array(edge_tris, dtype=np.int64)
    oriented = []
    for e in np.flatnonzero(edge_tris[:, 1] < 0):
        t = edge_tris[e, 0]
        tr = list(tris[t])
        for k in range(3):
            s, u = tr[(k + 1) % 3], tr[(k + 2) % 3]
            if {s, u} == set(edges[e]):
                oriented.append((int(s), int(u)))
    cycles = _boundary_cycles(len(pos), pos, oriented)
    areas = [_signed_area(pos, c) for c in cycles]
    outer_i = int(np.argmax(areas))
    outer = tuple(cycles[outer_i])
    holes = tuple(tuple(c[::-1]) for i, c in enumerate(cycles) if i != outer_i)
    if len(holes) != holes_expected:
        raise DomainError(f"expected {holes_expected} holes, found {len(holes)}")
    patch = TriangularPatch(
        coords=np.asarray(coords, dtype=np.int64),
        pos=pos,
        triangles=tris,
        up=up,
        edges=edges,
        edge_tris=edge_tris,
        tri_edges=tri_edges,
        outer=outer,
        holes=holes,
        shape=shape,
        cut=tuple(cut),
        meta=dict(meta or {}),
    )
    return patch


def build_triangular_patch(rows: int, cols: int, shape: str = "parallelogram") -> TriangularPatch:
    """Triangular-lattice patch of ``rows`` strips.

    ``parallelogram`` and ``rect`` have ``2 * rows * cols`` triangles; ``rect``
    uses alternately shifted rows so the region is close to a rectangle;
    ``symrect`` drops the last site of every shifted row, which makes the
    patch mirror symmetric.
    """
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be >= 1")
    if shape == "parallelogram":
        index = {}
        coords, pos = [], []
        for j in range(rows + 1):
            for i in range(cols + 1):
                index[i, j] = len(coords)
                coords.append((i, j))
                pos.append((i + 0.5 * j, 0.5 * SQ3 * j))
        tris = []
        for j in range(rows):
            for i in range(cols):
                tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
                tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
        return _finish_triangular(coords, pos, tris, shape, meta={"rows": rows, "cols": cols})
    if shape == "rect":
        if cols < 2:
            raise DomainError("rect patches need cols >= 2")
        index = {}
        coords, pos = [], []
        for j in range(rows + 1):
            for i in range(cols + 1):
                index[i, j] = len(coords)
                coords.append((i, j))
                pos.append((i + 0.5 * (j % 2), 0.5 * SQ3 * j))
        tris = []
        for j in range(rows):
            if j % 2 == 0:
                for i in range(cols):
                    tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
                for i in range(cols):
                    tris.append((index[i, j + 1], index[i + 1, j + 1], index[i + 1, j]))
            else:
                for i in range(cols):
                    tris.append((index[i, j + 1], index[i + 1, j + 1], index[i, j]))
                for i in range(cols):
                    tris.append((index[i, j], index[i + 1, j], index[i + 1, j + 1]))
        return _finish_triangular(coords, pos, tris, shape, meta={"rows": rows, "cols": cols})
    if shape == "symrect":
        # odd rows one site shorter: mirror symmetric about x = cols / 2
        if cols < 2:
            raise DomainError("symrect patches need cols >= 2")
        index = {}
        coords, pos = [], []
        for j in range(rows + 1):
            for i in range(cols + 1 - j % 2):
                index[i, j] = len(coords)
                coords.append((i, j))
                pos.append((i + 0.5 * (j % 2), 0.5 * SQ3 * j))
        tris = []
        for j in range(rows):
            lo, hi = (j, j + 1) if j % 2 == 0 else (j + 1, j)
            for i in range(cols):
                tris.append((index[i, lo], index[i + 1, lo], index[i, hi]))
            for i in range(cols - 1):
                tris.append((index[i, hi], index[i + 1, hi], index[i + 1, lo]))
        return _finish_triangular(coords, pos, tris, shape, meta={"rows": rows, "cols": cols})
    raise DomainError(f"unknown triangular patch shape {shape!r}")


def build_annulus(outer_rows: int, outer_cols: int, hole_rect: tuple[int, int, int, int]) -> TriangularPatch:
    """Parallelogram patch with the rhombi ``hole_rect = (i0, j0, w, h)`` removed.

    The removed block's perimeter sites form the inner boundary. The cut
    path runs from the hole's lower-left corner straight down to the outer
    boundary.
    """
    i0, j0, w, h = hole_rect
    if w < 1 or h < 1:
        raise DomainError("hole must contain at least one rhombus")
    if i0 < 1 or j0 < 1 or i0 + w > outer_cols - 1 or j0 + h > outer_rows - 1:
        raise DomainError("hole must lie strictly inside the patch")
    index = {}
    coords, pos = [], []
    for j in range(outer_rows + 1):
        for i in range(outer_cols + 1):
            if i0 < i < i0 + w and j0 < j < j0 + h:
                continue
            index[i, j] = len(coords)
            coords.append((i, j))
            pos.append((i + 0.5 * j, 0.5 * SQ3 * j))
    tris = []
    for j in range(outer_rows):
        for i in range(outer_cols):
            if i0 <= i < i0 + w and j0 <= j < j0 + h:
                continue
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    cut = [index[i0, j] for j in range(j0, -1, -1)]
    return _finish_triangular(
        coords, pos, tris, "annulus", holes_expected=1,
        meta={"rows": outer_rows, "cols": outer_cols, "hole": list(hole_rect)}, cut=cut,
    )


# --------------------------------------------------------------------------
# square lattice


@dataclass(frozen=True, eq=False)
class SquarePatch:
    """Square-lattice region described by its plaquettes.

    ``plaquettes[k]`` lists the four corners counterclockwise from the
    lower-left one, with ``-1`` for a corner outside the region.
    """

    coords: np.ndarray  # (N, 2) integer (p, q)
    parity: np.ndarray  # (N,) (p + q) % 2
    plaquettes: np.ndarray  # (P, 4)
    boundary: tuple[int, ...]  # boundary sites, counterclockwise
    shape: str
    meta: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    @property
    def pos(self) -> np.ndarray:
        return self.coords.astype(float)

    @property
    def boundary_sites(self) -> np.ndarray:
        mask = np.zeros(self.n_sites, dtype=bool)
        mask[list(self.boundary)] = True
        return mask

    @property
    def free_sites(self) -> np.ndarray:
        idx = np.flatnonzero(~self.boundary_sites)
        return idx[np.lexsort((self.coords[idx, 0], self.coords[idx, 1]))]

    @property
    def full(self) -> np.ndarray:
        return np.all(self.plaquettes >= 0, axis=1)

    def neighbors(self) -> list[list[int]]:
        nb = [set() for _ in range(self.n_sites)]
        for pl in self.plaquettes:
            for k in range(4):
                s, t = pl[k], pl[(k + 1) % 4]
                if s >= 0 and t >= 0:
                    nb[s].add(int(t))
                    nb[t].add(int(s))
        return [sorted(x) for x in nb]

    def lattice_edges(self) -> list[tuple[int, int]]:
        out = set()
        for pl in self.plaquettes:
            for k in range(4):
                s, t = pl[k], pl[(k + 1) % 4]
                if s >= 0 and t >= 0:
                    out.add((min(s, t), max(s, t)))
        return sorted(out)

    def to_dict(self) -> dict:
        return {
            "lattice": "square",
            "shape": self.shape,
            "sites": self.coords.tolist(),
            "plaquettes": self.plaquettes.tolist(),
            "boundary": list(self.boundary),
            "meta": dict(self.meta),
        }


def _finish_square(coords, shape, meta):
    coords = np.asarray(coords, dtype=np.int64)
    index = {(int(p), int(q)): i for i, (p, q) in enumerate(coords)}
    centers = set()
    for p, q in index:
        for dp in (-1, 0):
            for dq in (-1, 0):
                centers.add((p + dp, q + dq))
    plaqs = []
    for p, q in sorted(centers, key=lambda c: (c[1], c[0])):
        corners = [index.get(c, -1) for c in ((p, q), (p + 1, q), (p + 1, q + 1), (p, q + 1))]
        if sum(c >= 0 for c in corners) >= 3:
            plaqs.append(corners)
    plaqs = np.array(plaqs, dtype=np.int64).reshape(-1, 4)
    # interior: four surrounding plaquettes, never on the outer diagonal of a half-plaquette
    count = np.zeros(len(coords), dtype=np.int64)
    on_edge = np.zeros(len(coords), dtype=bool)
    for pl in plaqs:
        count[pl[pl >= 0]] += 1
        if np.any(pl < 0):
            k = int(np.flatnonzero(pl < 0)[0])
            on_edge[pl[(k + 1) % 4]] = on_edge[pl[(k + 3) % 4]] = True
    bsites = np.flatnonzero((count < 4) | on_edge)
    c = coords[bsites].astype(float)
    center = coords.mean(axis=0)
    ang = np.arctan2(c[:, 1] - center[1], c[:, 0] - center[0])
    order = np.lexsort((-np.hypot(c[:, 0] - center[0], c[:, 1] - center[1]), np.round(ang, 12)))
    bsorted = [int(bsites[i]) for i in order]
    # start at the lowest-then-leftmost boundary site
    start = min(range(len(bsorted)), key=lambda i: (coords[bsorted[i], 1], coords[bsorted[i], 0]))
    bsorted = bsorted[start:] + bsorted[:start]
    return SquarePatch(
        coords=coords,
        parity=(coords.sum(axis=1) % 2).astype(np.int64),
        plaquettes=plaqs,
        boundary=tuple(bsorted),
        shape=shape,
        meta=meta,
    )


def build_square_patch(rows: int, cols: int) -> SquarePatch:
    """Axis-aligned ``rows x cols`` block of plaquettes."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be >= 1")
    coords = [(p, q) for q in range(rows + 1) for p in range(cols + 1)]
    return _finish_square(coords, "rect", {"rows": rows, "cols": cols})


def _rotated(U, V, shape):
    coords = []
    for v in range(V + 1):
        for u in range(U + 1):
            if (u - v) % 2 == 0:
                coords.append(((u + v) // 2, (u - v) // 2))
    return _finish_square(coords, shape, {"U": U, "V": V})


def build_wired_patch(U: int, V: int) -> SquarePatch:
    """Diagonal rectangle whose boundary sites all lie on the even sublattice.

    In rotated coordinates ``u = p + q``, ``v = p - q`` the region is
    ``0 <= u <= U, 0 <= v <= V``; both sides must be even.
    """
    if U < 2 or V < 2 or U % 2 or V % 2:
        raise DomainError("wired patches need even U, V >= 2")
    return _rotated(U, V, "wired")


def build_dobrushin_patch(U: int, V: int) -> SquarePatch:
    """Diagonal rectangle with odd sides: the ``u = 0`` and ``v = 0`` sides are
    even-sublattice boundary, the other two odd. The two arcs meet at two
    gaps where a single medial curve starts and ends.
    """
    if U < 3 or V < 3 or U % 2 == 0 or V % 2 == 0:
        raise DomainError("Dobrushin patches need odd U, V >= 3")
    return _rotated(U, V, "dobrushin")


# --------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary heights.

    ``mode`` is one of ``homogeneous`` / ``wired`` (one height), ``chordal``
    (a, b), ``annulus`` (a, b outer; c inner), ``arch`` (heights of
    consecutive arcs) or ``fixed`` (explicit site -> height map). On
    triangular patches ``breaks`` are boundary edge ids where the height
    changes; on square patches chordal heights are assigned by sublattice.
    """

    mode: str
    heights: tuple[int, ...]
    breaks: tuple[int, ...] = ()
    fixed: tuple[tuple[int, int], ...] = ()

    @classmethod
    def homogeneous(cls, a):
        return cls("homogeneous", (a,))

    @classmethod
    def wired(cls, a):
        return cls("wired", (a,))

    @classmethod
    def chordal(cls, a, b, breaks=()):
        return cls("chordal", (a, b), tuple(breaks))

    @classmethod
    def annulus(cls, a, b, c, breaks=()):
        return cls("annulus", (a, b, c), tuple(breaks))

    @classmethod
    def arch(cls, heights, breaks=()):
        return cls("arch", tuple(heights), tuple(breaks))

    @classmethod
    def from_map(cls, mapping):
        return cls("fixed", (), (), tuple(sorted((int(k), int(v)) for k, v in mapping.items())))

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "heights": list(self.heights)}
        if self.breaks:
            d["breaks"] = list(self.breaks)
        if self.fixed:
            d["fixed"] = [list(x) for x in self.fixed]
        return d


_BC_RE = re.compile(r"^(homogeneous|chordal|wired|annulus|arch):([-\d,\s]+)$")


def parse_bc(text: str) -> BoundaryCondition:
    m = _BC_RE.match(text.strip())
    if not m:
        raise DomainError(f"cannot parse boundary condition {text!r}")
    mode, rest = m.groups()
    vals = tuple(int(x) for x in rest.split(",") if x.strip())
    need = {"homogeneous": 1, "wired": 1, "chordal": 2, "annulus": 3}
    if mode in need and len(vals) != need[mode]:
        raise DomainError(f"{mode} takes {need[mode]} height(s), got {len(vals)}")
    if mode == "arch" and len(vals) < 2:
        raise DomainError("arch needs at least two arc heights")
    return BoundaryCondition(mode, vals)


def _split_cycle_by_edges(patch: TriangularPatch, cycle, breaks):
    """Arcs of consecutive sites between the given boundary edges."""
    bedges = patch.boundary_edges(cycle)
    pos_of = {e: i for i, e in enumerate(bedges)}
    try:
        cuts = sorted(pos_of[e] for e in breaks)
    except KeyError as err:
        raise DomainError(f"edge {err.args[0]} is not on the boundary") from None
    n = len(cycle)
    arcs = []
    for k, c in enumerate(cuts):
        nxt = cuts[(k + 1) % len(cuts)]
        arc = []
        i = (c + 1) % n
        while True:
            arc.append(cycle[i])
            if i == nxt:
                break
            i = (i + 1) % n
        arcs.append(arc)
    return arcs, [bedges[c] for c in cuts]


def change_points(patch, bc: BoundaryCondition) -> tuple[int, ...]:
    if bc.breaks:
        return bc.breaks
    if bc.mode in ("chordal", "annulus") and isinstance(patch, TriangularPatch):
        return patch.default_change_points()
    if bc.mode == "arch" and isinstance(patch, TriangularPatch):
        k = len(bc.heights)
        bedges = patch.boundary_edges()
        return tuple(bedges[(i * len(bedges)) // k] for i in range(k))
    return ()


def boundary_heights(patch, bc: BoundaryCondition) -> dict[int, int]:
    """Map boundary site id -> height label."""
    if bc.mode == "fixed":
        return dict(bc.fixed)
    if isinstance(patch, TriangularPatch):
        out = {}
        if bc.mode in ("homogeneous", "wired"):
            for s in patch.outer:
                out[s] = bc.heights[0]
            for h in patch.holes:
                for s in h:
                    out[s] = bc.heights[0]
            return out
        breaks = change_points(patch, bc)
        if bc.mode in ("chordal", "annulus"):
            arcs, _ = _split_cycle_by_edges(patch, patch.outer, breaks)
            if len(arcs) != 2:
                raise DomainError("chordal boundary needs exactly two change points")
            # arcs[0] runs counterclockwise from the first break: the right arc
            for s in arcs[1]:
                out[s] = bc.heights[0]
            for s in arcs[0]:
                out[s] = bc.heights[1]
            if bc.mode == "annulus":
                if len(patch.holes) != 1:
                    raise DomainError("annulus boundary needs a patch with one hole")
                for s in patch.holes[0]:
                    out[s] = bc.heights[2]
            elif patch.holes:
                raise DomainError("chordal boundary on a patch with holes; use annulus")
            return out
        if bc.mode == "arch":
            arcs, _ = _split_cycle_by_edges(patch, patch.outer, breaks)
            if len(arcs) != len(bc.heights):
                raise DomainError("arch needs one change point per arc")
            for arc, h in zip(arcs, bc.heights):
                for s in arc:
                    out[s] = h
            return out
        raise DomainError(f"unsupported mode {bc.mode!r} on a triangular patch")
    if isinstance(patch, SquarePatch):
        out = {}
        if bc.mode in ("homogeneous", "wired"):
            for s in patch.boundary:
                out[s] = bc.heights[0]
            return out
        if bc.mode == "chordal":
            # even boundary sublattice gets a, odd gets b
            for s in patch.boundary:
                out[s] = bc.heights[patch.parity[s]]
            return out
        raise DomainError(f"unsupported mode {bc.mode!r} on a square patch; use fixed")
    raise DomainError("unknown patch type")


def validate_bc(patch, bc: BoundaryCondition, graph: GraphSpec, model_kind: str) -> list[str]:
    """Every violated requirement, as a list of messages (empty when valid)."""
    errors = []
    try:
        heights = boundary_heights(patch, bc)
    except DomainError as err:
        return [str(err)]
    for s, h in sorted(heights.items()):
        if h not in graph.labels:
            errors.append(f"site {s}: height {h} is not a node of {graph.name}")
    if errors:
        return errors
    if bc.mode in ("chordal", "annulus"):
        a, b = bc.heights[:2]
        if a == b:
            errors.append(f"chordal heights must differ, got a = b = {a}")
        elif not graph.adjacent(a, b):
            errors.append(f"heights {a} and {b} are not adjacent on {graph.name}")
    if bc.mode == "annulus":
        a, b, c = bc.heights
        if c in (a, b):
            errors.append(f"inner height {c} must differ from outer heights {a}, {b}")
    girth = graph.shortest_cycle()
    if model_kind == "dilute":
        if girth is not None and girth <= 3:
            errors.append(f"{graph.name} has a cycle of length {girth}; dilute model needs none <= 3")
        if isinstance(patch, TriangularPatch):
            nb = patch.neighbors()
            for s, h in heights.items():
                for t in nb[s]:
                    if t in heights and t > s:
                        g = heights[t]
                        if g != h and not graph.adjacent(g, h):
                            errors.append(f"boundary sites {s},{t}: heights {h},{g} neither equal nor adjacent")
        else:
            errors.append("dilute model lives on triangular patches")
    elif model_kind == "dense":
        if girth is not None and girth <= 4:
            errors.append(f"{graph.name} has a cycle of length {girth}; dense model needs none <= 4")
        if not isinstance(patch, SquarePatch):
            errors.append("dense model lives on square patches")
            return errors
        gpar = graph.node_parity
        if gpar is None:
            errors.append(f"{graph.name} is not bipartite")
            return errors
        if bc.mode == "wired":
            par = {int(patch.parity[s]) for s in patch.boundary}
            if len(par) > 1:
                errors.append("wired boundary needs all boundary sites on the same sublattice")
        if bc.mode == "chordal":
            par = {int(patch.parity[s]) for s in patch.boundary}
            if len(par) < 2:
                errors.append("chordal dense boundary needs both sublattices on the boundary")
        # even sublattice carries one node class of the graph
        cls = {}
        for s, h in heights.items():
            key = (int(patch.parity[s]) + gpar[graph.index(h)]) % 2
            cls.setdefault(key, []).append(s)
        if len(cls) > 1:
            errors.append("boundary heights put both node classes on one sublattice")
        nb = patch.neighbors()
        for s, h in heights.items():
            for t in nb[s]:
                if t in heights and t > s and not graph.adjacent(h, heights[t]):
                    errors.append(f"boundary sites {s},{t}: heights {h},{heights[t]} not adjacent")
    else:
        errors.append(f"unknown model kind {model_kind!r}")
    return errors


def require_valid(patch, bc, graph, model_kind):
    errs = validate_bc(patch, bc, graph, model_kind)
    if errs:
        raise DomainError("; ".join(errs))
    return boundary_heights(patch, bc)
