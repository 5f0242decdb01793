"""Height graphs, their adjacency spectra, and the closed-form relations
between loop fugacity, Coxeter data, kappa and minimal-model exponents.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

EIG_TOL = 1e-9

ADE_COXETER = {"E6": 12, "E7": 18, "E8": 30}


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphSpec:
    """A connected height graph.

    ``labels[i]`` is the external name of internal node ``i``; heights are
    always reported with labels (A_m uses 1..m, Star(Q) has center 0).
    """

    kind: str
    size: int | None
    labels: tuple[int, ...]
    adjacency: np.ndarray = field(repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.kind if self.size is None else f"{self.kind}{self.size}"

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def is_ade(self) -> bool:
        return self.kind in ("A", "D", "E6", "E7", "E8")

    def index(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise GraphError(f"{label} is not a node of {self.name}") from None

    def adjacent(self, a: int, b: int) -> bool:
        return bool(self.adjacency[self.index(a), self.index(b)])

    def neighbors(self, a: int) -> list[int]:
        i = self.index(a)
        return [self.labels[j] for j in np.flatnonzero(self.adjacency[i])]

    @property
    def node_parity(self) -> tuple[int, ...] | None:
        """Bipartition labels (0/1) by BFS from internal node 0, or None."""
        k = self.node_count
        parity = [-1] * k
        parity[0] = 0
        queue = [0]
        while queue:
            i = queue.pop()
            for j in np.flatnonzero(self.adjacency[i]):
                if parity[j] < 0:
                    parity[j] = 1 - parity[i]
                    queue.append(j)
                elif parity[j] == parity[i]:
                    return None
        return tuple(parity)

    def shortest_cycle(self) -> int | None:
        """Girth of the graph (None for trees)."""
        k = self.node_count
        best = None
        for s in range(k):
            dist = [-1] * k
            parent = [-1] * k
            dist[s] = 0
            queue = [s]
            for i in queue:
                for j in np.flatnonzero(self.adjacency[i]):
                    if dist[j] < 0:
                        dist[j] = dist[i] + 1
                        parent[j] = i
                        queue.append(j)
                    elif parent[i] != j:
                        c = dist[i] + dist[j] + 1
                        if best is None or c < best:
                            best = c
        return best

    def to_dict(self) -> dict:
        return {
            "kind": self.name,
            "nodes": list(self.labels),
            "adjacency": self.adjacency.astype(int).tolist(),
        }


def _from_edges(kind, size, labels, edges) -> GraphSpec:
    labels = tuple(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    adj = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for a, b in edges:
        adj[pos[a], pos[b]] = adj[pos[b], pos[a]] = 1
    adj.setflags(write=False)
    return GraphSpec(kind, size, labels, adj)


def _path(nodes):
    return list(zip(nodes[:-1], nodes[1:]))


def build_graph(kind: str, size: int | None = None) -> GraphSpec:
    """Construct a named height graph with its canonical numbering."""
    kind = kind.strip()
    if kind == "A":
        if size is None or size < 2:
            raise GraphError("A_m needs m >= 2")
        nodes = list(range(1, size + 1))
        return _from_edges("A", size, nodes, _path(nodes))
    if kind == "D":
        if size is None or size < 4:
            raise GraphError("D_n needs n >= 4")
        n = size
        nodes = list(range(1, n + 1))
        edges = _path(list(range(1, n - 1))) + [(n - 2, n - 1), (n - 2, n)]
        return _from_edges("D", n, nodes, edges)
    if kind in ("E6", "E7", "E8"):
        n = int(kind[1])
        if size not in (None, n):
            raise GraphError(f"{kind} has fixed size {n}")
        nodes = list(range(1, n + 1))
        edges = _path(list(range(1, n))) + [(3, n)]
        return _from_edges(kind, None, nodes, edges)
    if kind == "ExtA":
        if size is None or size < 3:
            raise GraphError("ExtA_m needs m >= 3 (m >= 4 for use in either model)")
        nodes = list(range(1, size + 1))
        return _from_edges("ExtA", size, nodes, _path(nodes) + [(size, 1)])
    if kind == "ExtD":
        if size is None or size < 4:
            raise GraphError("ExtD_n needs n >= 4")
        n = size
        nodes = list(range(0, n + 1))
        edges = [(0, 2), (1, 2)] + _path(list(range(2, n - 1))) + [(n - 2, n - 1), (n - 2, n)]
        return _from_edges("ExtD", n, nodes, edges)
    if kind in ("ExtE6", "ExtE7", "ExtE8"):
        arms = {"ExtE6": (2, 2, 2), "ExtE7": (1, 3, 3), "ExtE8": (1, 2, 5)}[kind]
        if size is not None:
            raise GraphError(f"{kind} takes no size")
        nodes = [0]
        edges = []
        for length in arms:
            prev = 0
            for _ in range(length):
                nodes.append(len(nodes))
                edges.append((prev, nodes[-1]))
                prev = nodes[-1]
        return _from_edges(kind, None, nodes, edges)
    if kind == "Star":
        if size is None or size < 1:
            raise GraphError("Star(Q) needs Q >= 1")
        nodes = list(range(size + 1))
        return _from_edges("Star", size, nodes, [(0, q) for q in range(1, size + 1)])
    raise GraphError(f"unknown graph kind {kind!r}")


_GRAPH_RE = re.compile(r"^(ExtA|ExtD|ExtE6|ExtE7|ExtE8|Star|E6|E7|E8|A|D)(\d*)$")


def parse_graph(text: str) -> GraphSpec:
    """Parse names like ``A3``, ``D4``, ``E6``, ``ExtA6``, ``Star3``."""
    m = _GRAPH_RE.match(text.strip())
    if not m:
        raise GraphError(f"cannot parse graph name {text!r}")
    kind, num = m.groups()
    if kind in ("E6", "E7", "E8", "ExtE6", "ExtE7", "ExtE8"):
        if num:
            raise GraphError(f"{kind} takes no size")
        return build_graph(kind)
    if not num:
        raise GraphError(f"{kind} needs a size, e.g. {kind}3")
    return build_graph(kind, int(num))


def coxeter_number(graph: GraphSpec) -> int | None:
    if graph.kind == "A":
        return graph.size + 1
    if graph.kind == "D":
        return 2 * graph.size - 2
    return ADE_COXETER.get(graph.kind)


@dataclass(frozen=True)
class SpectralData:
    graph: GraphSpec
    eigenvalues: tuple[float, ...]
    eigenvectors: np.ndarray = field(repr=False, compare=False)
    selected_index: int
    Lambda: float
    S: np.ndarray = field(repr=False, compare=False)
    h: int | None
    exponents: tuple[int, ...]
    exponent: int | None
    kappa_dilute: float | None
    kappa_dense: float | None

    def weight(self, label: int) -> float:
        return float(self.S[self.graph.index(label)])

    @property
    def is_perron(self) -> bool:
        return self.selected_index == 0

    def residual(self) -> float:
        return float(np.max(np.abs(self.graph.adjacency @ self.S - self.Lambda * self.S)))

    def to_dict(self) -> dict:
        return {
            "kind": self.graph.name,
            "nodes": list(self.graph.labels),
            "eigenvalues": list(self.eigenvalues),
            "eigen_index": self.selected_index,
            "lambda": self.Lambda,
            "S": [float(v) for v in self.S],
            "h": self.h,
            "exponents": list(self.exponents),
            "kappa_dilute": self.kappa_dilute,
            "kappa_dense": self.kappa_dense,
        }


def _rref(rows: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    a = rows.astype(float).copy()
    r = 0
    for c in range(a.shape[1]):
        if r == a.shape[0]:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) < tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] /= a[r, c]
        for i in range(a.shape[0]):
            if i != r:
                a[i] -= a[i, c] * a[r]
        r += 1
    return a[:r]


def _canonical_eigensystem(adj: np.ndarray):
    vals, vecs = np.linalg.eigh(adj.astype(float))
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    out_vecs = np.empty_like(vecs)
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and abs(vals[j] - vals[i]) < EIG_TOL:
            j += 1
        block = vecs[:, i:j].T
        if j - i > 1:
            # basis-independent representative of a degenerate eigenspace
            block = _rref(block)
            block = block[np.lexsort(-block.T[::-1])]
        for k, v in enumerate(block):
            out_vecs[:, i + k] = v
        mean = float(np.mean(vals[i:j]))
        vals[i:j] = mean
        i = j
    return vals, out_vecs


def _normalize(v: np.ndarray) -> np.ndarray:
    imax = int(np.argmax(np.abs(v) - 1e-12 * np.arange(len(v))))
    v = v / v[imax]
    v[np.abs(v) < 1e-14] = 0.0
    return v


def spectrum(graph: GraphSpec, selected_index: int = 0, for_model: bool = False) -> SpectralData:
    """Eigen-decomposition with one selected eigenpair.

    ``S`` is scaled so that its largest-magnitude component equals +1. With
    ``for_model`` the selected eigenvalue must be non-negative.
    """
    k = graph.node_count
    if not 0 <= selected_index < k:
        raise GraphError(f"eigen index {selected_index} out of range for {k} nodes")
    vals, vecs = _canonical_eigensystem(graph.adjacency)
    lam = float(vals[selected_index])
    if abs(lam) < 1e-12:
        lam = 0.0
    if for_model and lam < 0:
        raise GraphError(f"selected eigenvalue {lam:.6g} is negative; loop weights must be >= 0")
    S = _normalize(vecs[:, selected_index].copy())
    if selected_index == 0:
        S = np.abs(S)
    h = None
    exps: tuple[int, ...] = ()
    exponent = None
    if graph.is_ade:
        h = coxeter_number(graph)
        h_est = math.pi / math.acos(vals[0] / 2)
        if abs(h_est - h) > 1e-6:
            raise GraphError(f"Coxeter inversion gave {h_est} for {graph.name}, expected {h}")
        exps = tuple(sorted({eigenvalue_exponent(v, h) for v in vals if v >= -1e-12}))
        exponent = eigenvalue_exponent(lam, h)
    if h is not None and exponent is not None and exponent >= 1:
        kd = kappa_from_coxeter(h, exponent, "dilute")
        kD = kappa_from_coxeter(h, exponent, "dense") if lam >= 0 else None
    elif lam >= 0 and lam <= 2:
        kd = kappa_from_fugacity(lam, "dilute")
        kD = kappa_from_fugacity(lam, "dense")
    else:
        kd = kD = None
    return SpectralData(
        graph=graph,
        eigenvalues=tuple(float(v) for v in vals),
        eigenvectors=vecs,
        selected_index=selected_index,
        Lambda=lam,
        S=S,
        h=h,
        exponents=exps,
        exponent=exponent,
        kappa_dilute=kd,
        kappa_dense=kD,
    )


def eigenvalue_exponent(value: float, h: int) -> int:
    """Invert value = 2cos(pi h'/h) for integral h'."""
    hp = h * math.acos(max(-1.0, min(1.0, value / 2))) / math.pi
    r = round(hp)
    if abs(hp - r) > 1e-6:
        raise GraphError(f"eigenvalue {value} is not of the form 2cos(pi h'/{h})")
    return int(r)


def all_exponents(graph: GraphSpec) -> list[int]:
    """Coxeter exponents of every eigenvalue, with multiplicity."""
    h = coxeter_number(graph)
    if h is None:
        raise GraphError(f"{graph.name} has no Coxeter number")
    vals = np.linalg.eigvalsh(graph.adjacency.astype(float))
    return sorted(eigenvalue_exponent(v, h) for v in vals)


def kappa_from_coxeter(h: int, hp: int, phase: str) -> float:
    if not 1 <= hp < h:
        raise ValueError(f"need 1 <= h' < h, got h={h}, h'={hp}")
    if phase == "dilute":
        return 4 * h / (h + hp)
    if phase == "dense":
        return 4 * h / (h - hp)
    raise ValueError(f"phase must be 'dilute' or 'dense', not {phase!r}")


def loop_fugacity_relations(kappa: float) -> tuple[float, float]:
    """Loop weight n = -2cos(4 pi / kappa) and Q = n^2."""
    if not 2 < kappa < 8:
        raise ValueError(f"kappa must lie in (2, 8), got {kappa}")
    n = -2 * math.cos(4 * math.pi / kappa)
    return n, n * n


def kappa_from_fugacity(n: float, phase: str) -> float:
    """Inverse of the n(kappa) relation on the dilute (2,4] or dense [4,8) branch."""
    if not -2 <= n <= 2:
        raise ValueError(f"loop weight must lie in [-2, 2], got {n}")
    if abs(abs(n) - 2) < 1e-12:
        n = math.copysign(2.0, n)
    theta = math.acos(-n / 2)
    if phase == "dilute":
        return 4 * math.pi / (2 * math.pi - theta)
    if phase == "dense":
        if theta == 0:
            raise ValueError("n = -2 has no dense branch")
        return 4 * math.pi / theta
    raise ValueError(f"phase must be 'dilute' or 'dense', not {phase!r}")


def o_n_critical_point(n: float) -> float:
    if not 0 <= n <= 2:
        raise ValueError(f"critical point defined for 0 <= n <= 2, got {n}")
    return (2 + math.sqrt(2 - n)) ** -0.5


@dataclass(frozen=True)
class MinimalModelData:
    p: int
    pp: int
    c: float
    kac: dict

    def weight(self, r: int, s: int) -> float:
        return self.kac[(r, s)]


def kac_weight(r: int, s: int, p: int, pp: int) -> Fraction:
    return Fraction((r * p - s * pp) ** 2 - (p - pp) ** 2, 4 * p * pp)


def minimal_model(p: int, pp: int) -> MinimalModelData:
    if not (p > pp >= 2):
        raise ValueError(f"need p > p' >= 2, got ({p}, {pp})")
    if math.gcd(p, pp) != 1:
        raise ValueError(f"({p}, {pp}) are not coprime")
    c = 1 - 6 * (p - pp) ** 2 / (p * pp)
    kac = {
        (r, s): float(kac_weight(r, s, p, pp))
        for r in range(1, pp)
        for s in range(1, p)
    }
    return MinimalModelData(p, pp, c, kac)
