"""Chordal curve analysis: conformal embedding, Loewner driving functions,
kappa estimation, winding-angle observables and the curve file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numba as nb
import numpy as np
from scipy import optimize, special


class CurveError(ValueError):
    pass


# --------------------------------------------------------------------------
# rectangle -> upper half plane


@lru_cache(maxsize=64)
def _modulus_for_ratio(ratio: float) -> float:
    """Parameter m with K(1 - m) / K(m) = ratio."""
    f = lambda m: special.ellipk(1 - m) / special.ellipk(m) - ratio
    return float(optimize.brentq(f, 1e-300, 1 - 1e-16, xtol=1e-300, rtol=1e-15))


def sn_cn_dn(u: np.ndarray, m: float):
    """Complex Jacobi functions from real-argument ones (addition formulas)."""
    u = np.asarray(u, dtype=complex)
    s, c, d, _ = special.ellipj(u.real, m)
    s1, c1, d1, _ = special.ellipj(u.imag, 1 - m)
    den = c1**2 + m * s**2 * s1**2
    sn = (s * d1 + 1j * c * d * s1 * c1) / den
    cn = (c * c1 - 1j * s * d * s1 * d1) / den
    dn = (d * c1 * d1 - 1j * m * s * c * s1) / den
    return sn, cn, dn


@dataclass(frozen=True)
class RectangleMap:
    """Conformal map of ``[x0, x0 + width] x [y0, y0 + height]`` onto the upper
    half plane sending the bottom midpoint to 0 and the top midpoint to
    infinity (w = sn(u | m) after rescaling)."""

    x0: float
    y0: float
    width: float
    height: float

    @property
    def m(self) -> float:
        return _modulus_for_ratio(2 * self.height / self.width)

    @property
    def K(self) -> float:
        return float(special.ellipk(self.m))

    def _u(self, z):
        zeta = np.asarray(z, dtype=complex) - complex(self.x0 + self.width / 2, self.y0)
        return zeta * (2 * self.K / self.width)

    def __call__(self, z):
        sn, _, _ = sn_cn_dn(self._u(z), self.m)
        return sn

    def inverse(self, w, newton: int = 4):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        m = self.m
        u = np.array([complex(mpmath.ellipf(mpmath.asin(complex(v)), m)) for v in w])
        for _ in range(newton):
            sn, cn, dn = sn_cn_dn(u, m)
            u = u - (sn - w) / (cn * dn)
        z = u * self.width / (2 * self.K) + complex(self.x0 + self.width / 2, self.y0)
        return z

    def to_dict(self) -> dict:
        return {"map": "jacobi-sn rectangle", "x0": self.x0, "y0": self.y0,
                "width": self.width, "height": self.height, "m": self.m}


@dataclass
class HalfPlaneCurve:
    points: np.ndarray  # complex, points[0] real
    meta: dict = field(default_factory=dict)

    def validate(self):
        if abs(self.points[0].imag) > 1e-12:
            raise CurveError("half-plane curve must start on the real axis")
        bad = np.flatnonzero(self.points[1:].imag <= 0)
        if len(bad):
            raise CurveError(f"point {int(bad[0]) + 1} is not in the upper half plane")


def rectangle_of(patch, base: float | None = None) -> RectangleMap:
    """Bounding rectangle of the patch sites; with ``base`` the rectangle is
    widened just enough to be symmetric about x = base, which becomes the
    midpoint of its bottom side."""
    pos = patch.pos
    lo, hi = pos.min(axis=0), pos.max(axis=0)
    width = float(hi[0] - lo[0])
    x0 = float(lo[0])
    if base is not None:
        half = max(float(base) - float(lo[0]), float(hi[0]) - float(base))
        width, x0 = 2 * half, float(base) - half
    return RectangleMap(x0, float(lo[1]), width, float(hi[1] - lo[1]))


def embed_half_plane(points, rect: RectangleMap, truncate: float | None = None) -> HalfPlaneCurve:
    """Map a lattice curve starting on the bottom side into the half plane.

    The image is translated so that the base point sits at 0. With
    ``truncate`` the curve stops at the first point with |w| > truncate.
    """
    z = np.asarray(points, dtype=float)
    z = z[:, 0] + 1j * z[:, 1] if z.ndim == 2 else np.asarray(points, dtype=complex)
    if abs(z[0].imag - rect.y0) > 1e-9:
        raise CurveError("curve does not start on the bottom side of the rectangle")
    w = rect(z)
    w[0] = w[0].real
    w = w - w[0].real
    if truncate is not None:
        big = np.flatnonzero(~np.isfinite(w) | (np.abs(w) > truncate))
        if len(big):
            w = w[: big[0]]
    w = w[np.isfinite(w)]
    hp = HalfPlaneCurve(w, {"mapping": rect.to_dict(), "base_shift": 0.0})
    return hp


def depth_capacity(rect: RectangleMap, base: float, depth: float = 0.75) -> float:
    """Capacity of the vertical slit from 0 to the image of the point at
    fractional height ``depth`` above the base."""
    w = complex(rect(complex(base, rect.y0 + depth * rect.height)))
    return float(abs(w) ** 2 / 4)


def driving_ensemble(patch, point_lists, base_edge: int, depth: float = 0.75, truncate: float = 1e6):
    """Driving functions of lattice curves plus the common capacity cut-off.

    Curves are mapped with the rectangle centred on the base edge; the
    cut-off keeps the part of each curve statistically far from the target.
    """
    base = float(patch.edge_mid(base_edge)[0])
    rect = rectangle_of(patch, base=base)
    dfs = []
    for pts in point_lists:
        hp = embed_half_plane(pts, rect, truncate=truncate)
        hp.validate()
        dfs.append(loewner_extract(hp))
    return dfs, depth_capacity(rect, base, depth)


# --------------------------------------------------------------------------
# Loewner zipper with vertical slits


@nb.njit(cache=True)
def _slit(z, a, b):
    v = np.sqrt((z - a) ** 2 + b * b + 0j)
    if v.imag < 0 or (v.imag == 0 and v.real * (z - a).real < 0):
        v = -v
    return a + v


@nb.njit(cache=True)
def _unslit(w, a, b):
    v = np.sqrt((w - a) ** 2 - b * b + 0j)
    if v.imag < 0 or (v.imag == 0 and v.real * (w - a).real < 0):
        v = -v
    return a + v


@nb.njit(cache=True)
def _zipper(z):
    n = z.shape[0]
    pts = z.copy()
    W = np.zeros(n)
    t = np.zeros(n)
    W[0] = pts[0].real
    bad = -1
    for k in range(1, n):
        p = pts[k]
        a = p.real
        b = p.imag
        if b <= 0:
            bad = k
            break
        W[k] = a
        t[k] = t[k - 1] + b * b / 4.0
        for j in range(k + 1, n):
            pts[j] = _slit(pts[j], a, b)
    return W, t, bad


@dataclass
class DrivingFunction:
    t: np.ndarray
    W: np.ndarray
    meta: dict = field(default_factory=dict)

    def at(self, grid):
        return np.interp(grid, self.t, self.W)


def loewner_extract(curve: HalfPlaneCurve) -> DrivingFunction:
    """Driving values and capacity times by composing vertical-slit maps.

    Each step maps the current tip a + ib down to a, so W is piecewise
    constant with a jump per point and t grows by b^2 / 4.
    """
    curve.validate()
    W, t, bad = _zipper(np.ascontiguousarray(curve.points, dtype=np.complex128))
    if bad >= 0:
        raise CurveError(f"point {bad} fell onto the real axis during unzipping")
    return DrivingFunction(t, W, {"slit": "vertical", "points": len(W)})


def zip_curve(df: DrivingFunction) -> np.ndarray:
    """Rebuild the curve from a driving function (inverse of the zipper)."""
    n = len(df.W)
    out = np.zeros(n, dtype=complex)
    out[0] = df.W[0]
    b = 2 * np.sqrt(np.maximum(np.diff(df.t), 0))
    for k in range(1, n):
        w = complex(df.W[k], b[k - 1])
        for j in range(k - 1, 0, -1):
            w = _unslit(w, df.W[j], b[j - 1])
        out[k] = w
    return out


def kappa_estimate(ensemble: list[DrivingFunction], grid_points: int = 64, t_max: float | None = None,
                   t_min_fraction: float = 0.01, grid: str = "log", weighting: str = "brownian",
                   bootstrap: int = 200, seed: int = 0, min_curves: int = 30):
    """Fit Var W(t) = kappa t through the origin on a common grid.

    With ``weighting="brownian"`` the fit is generalised least squares using
    the covariance the sample variance has when W is Brownian,
    Cov(V(s), V(t)) proportional to min(s, t)^2; ``"uniform"`` is ordinary
    least squares. Returns (kappa_hat, stderr); stderr from resampling whole
    curves.
    """
    if len(ensemble) < min_curves:
        raise CurveError(f"need at least {min_curves} curves, got {len(ensemble)}")
    t_end = min(float(df.t[-1]) for df in ensemble)
    if t_max is not None:
        t_end = min(t_end, t_max)
    if not t_end > 0:
        raise CurveError("driving functions have no common capacity range")
    if grid == "log":
        ts = np.geomspace(t_end * t_min_fraction, t_end, grid_points)
    elif grid == "linear":
        ts = np.linspace(0, t_end, grid_points + 1)[1:]
    else:
        raise ValueError(f"grid must be 'log' or 'linear', not {grid!r}")
    M = np.array([df.at(ts) - df.W[0] for df in ensemble])
    if weighting == "brownian":
        proj = np.linalg.solve(np.minimum.outer(ts, ts) ** 2, ts)
    elif weighting == "uniform":
        proj = ts
    else:
        raise ValueError(f"weighting must be 'brownian' or 'uniform', not {weighting!r}")
    norm = float(proj @ ts)

    def fit(rows):
        return float(proj @ rows.var(axis=0, ddof=1)) / norm

    k = fit(M)
    rng = np.random.Generator(np.random.PCG64(seed))
    boots = [fit(M[rng.integers(0, len(M), len(M))]) for _ in range(bootstrap)]
    return k, float(np.std(boots, ddof=1))


def brownian_drivers(kappa: float, count: int, steps: int = 400, t_final: float = 1.0, seed: int = 0):
    rng = np.random.Generator(np.random.PCG64(seed))
    t = np.linspace(0, t_final, steps + 1)
    dW = rng.normal(0, np.sqrt(kappa * t_final / steps), size=(count, steps))
    return [DrivingFunction(t, np.concatenate([[0.0], np.cumsum(row)])) for row in dW]


# --------------------------------------------------------------------------
# winding angles and the parafermionic observable


def step_codes(points, lattice: str) -> list[int]:
    d = np.diff(np.asarray(points, dtype=float), axis=0)
    ang = np.arctan2(d[:, 1], d[:, 0])
    if lattice == "tri":
        # honeycomb half-edges point at 30 + 60k degrees
        return [int(round((a - np.pi / 6) / (np.pi / 3))) % 6 for a in ang]
    if lattice == "sq-medial":
        return [int(round((a - np.pi / 4) / (np.pi / 2))) % 4 for a in ang]
    raise CurveError(f"unknown lattice {lattice!r}")


def winding_angles(codes, lattice: str) -> np.ndarray:
    """Winding angle at each point, accumulated turn by turn from the first
    step (which points into the domain, along the inward normal)."""
    q = 6 if lattice == "tri" else 4
    unit = 2 * np.pi / q
    theta = [0.0, 0.0]
    for a, b in zip(codes[:-1], codes[1:]):
        d = (b - a) % q
        turn = d if d <= q // 2 else d - q
        theta.append(theta[-1] + turn * unit)
    return np.array(theta[: len(codes) + 1])


@dataclass
class ParafermionEstimate:
    s: float
    values: dict  # point key -> complex mean
    samples: int
    residuals: dict = field(default_factory=dict)
    flagged: bool = False

    def median_residual(self) -> float:
        return float(np.median(list(self.residuals.values()))) if self.residuals else float("nan")


def _key(p):
    return (round(float(p[0]), 6), round(float(p[1]), 6))


def parafermion_observable(curves_points, lattice: str, s: float, cells=None, min_samples: int = 30) -> ParafermionEstimate:
    """Mean of 1[curve visits point] e^{i s theta} over an ensemble.

    ``cells`` is an optional list of point cycles (each the edge midpoints
    around one lattice site); the relative discrete contour sum is reported
    for every cell whose points were all visited.
    """
    n = len(curves_points)
    if n == 0:
        return ParafermionEstimate(s, {}, 0, {}, True)
    acc = {}
    for pts in curves_points:
        codes = step_codes(pts, lattice)
        th = winding_angles(codes, lattice)
        seen = set()
        step = 2 if lattice == "tri" else 1  # tri curves alternate midpoints and centres
        for p, a in zip(pts[::step], th[::step]):
            k = _key(p)
            if k in seen:
                continue
            seen.add(k)
            acc[k] = acc.get(k, 0) + np.exp(1j * s * a)
    values = {k: v / n for k, v in acc.items()}
    res = {}
    for cyc in cells or ():
        keys = [_key(p) for p in cyc]
        if not all(k in values for k in keys):
            continue
        z = np.array([complex(*p) for p in cyc])
        F = np.array([values[k] for k in keys])
        dz = np.roll(z, -1) - z
        num = abs(np.sum((F + np.roll(F, -1)) / 2 * dz))
        den = np.sum((np.abs(F) + np.abs(np.roll(F, -1))) / 2 * np.abs(dz))
        if den > 0:
            res[keys[0]] = float(num / den)
    return ParafermionEstimate(s, values, n, res, n < min_samples)


def site_cells(patch, lattice: str) -> list:
    """Edge-midpoint cycles around interior sites, counterclockwise."""
    out = []
    pos = patch.pos
    if lattice == "tri":
        edges = patch.edges
        interior = np.flatnonzero(~patch.boundary_sites)
    else:
        edges = np.array(patch.lattice_edges())
        interior = patch.free_sites
    inc = [[] for _ in range(len(pos))]
    for a, b in edges:
        inc[a].append((a, b))
        inc[b].append((a, b))
    for s in interior:
        mids = np.array([(pos[a] + pos[b]) / 2 for a, b in inc[s]])
        ang = np.arctan2(mids[:, 1] - pos[s][1], mids[:, 0] - pos[s][0])
        out.append(mids[np.argsort(ang)])
    return out


# --------------------------------------------------------------------------
# curve file format (NDJSON)


def curve_record(cid, points, lattice: str, meta=None) -> dict:
    pts = np.asarray(points, dtype=float)
    return {"id": cid, "lattice": lattice, "base": [float(pts[0, 0]), float(pts[0, 1])],
            "steps": step_codes(pts, lattice), "meta": dict(meta or {})}


def points_from_record(rec: dict) -> np.ndarray:
    base = np.array(rec["base"], dtype=float)
    if rec["lattice"] == "tri":
        r = 1 / (2 * np.sqrt(3))  # centre to edge midpoint
        dirs = np.array([(r * np.cos(np.pi / 6 + k * np.pi / 3), r * np.sin(np.pi / 6 + k * np.pi / 3)) for k in range(6)])
    elif rec["lattice"] == "sq-medial":
        dirs = np.array([(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)])
    else:
        raise CurveError(f"unknown lattice {rec['lattice']!r}")
    steps = np.asarray(rec["steps"], dtype=int)
    return np.vstack([base, base + np.cumsum(dirs[steps], axis=0)]) if len(steps) else base[None, :]


def write_curves(fh, records):
    for rec in records:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_curves(fh) -> list[dict]:
    out = []
    for i, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as err:
            raise CurveError(f"line {i}: {err}") from None
        if rec.get("type") in ("header", "summary"):
            continue
        for k in ("id", "lattice", "base", "steps"):
            if k not in rec:
                raise CurveError(f"line {i}: missing {k!r}")
        out.append(rec)
    return out


def turn_counts(codes, lattice: str) -> tuple[int, int]:
    q = 6 if lattice == "tri" else 4
    left = right = 0
    for a, b in zip(codes[:-1], codes[1:]):
        d = (b - a) % q
        if d == 1:
            left += 1
        elif d == q - 1:
            right += 1
        elif d:
            raise CurveError("curve reverses or skips a direction")
    return left, right


def scale_driving(df: DrivingFunction, lam: float) -> DrivingFunction:
    return DrivingFunction(df.t * lam * lam, df.W * lam, dict(df.meta))


def arc_curve(radius: float = 1.0, n: int = 400, end_angle: float = np.pi / 4) -> np.ndarray:
    """Circular arc from 0 centred at ``radius`` on the real axis (test curve)."""
    phi = np.linspace(np.pi, end_angle, n)
    return radius + radius * np.exp(1j * phi)

