import itertools
import math

import numpy as np
import pytest

from adeloops import dilute as D
from adeloops.domains import BoundaryCondition, build_triangular_patch, change_points
from adeloops.spectra import o_n_critical_point, parse_graph, spectrum


def spec(name, index=0):
    return spectrum(parse_graph(name), index, for_model=True)


def test_single_free_site_by_hand():
    # one free site, six triangles around it: Z = 1 + (S_b / S_a) x^6 summed over neighbours b
    p = build_triangular_patch(2, 2)
    assert len(p.free_sites) == 1
    for name, a in [("A2", 1), ("A3", 1), ("A3", 2), ("D4", 2)]:
        sd = spec(name)
        en = D.enumerate_heights(p, BoundaryCondition.homogeneous(a), sd)
        nbrs = [b for b in sd.graph.labels if sd.graph.adjacent(a, b)]
        x = 0.7
        expect = 1 + sum(sd.weight(b) / sd.weight(a) for b in nbrs) * x**6
        assert en.Z(x) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("name", ["A2", "A3", "A4", "A5", "D4", "D5", "E6"])
def test_height_equals_loop_Z(name):
    sd = spec(name)
    p = build_triangular_patch(4, 4)
    for a in sd.graph.labels[:2]:
        bc = BoundaryCondition.homogeneous(a)
        en = D.enumerate_heights(p, bc, sd)
        lo = D.enumerate_loops(p, bc)
        for x in (0.3, o_n_critical_point(sd.Lambda), 0.8):
            assert abs(en.Z(x) - lo.Z(sd.Lambda, x)) < 1e-10 * lo.Z(sd.Lambda, x)


@pytest.mark.parametrize("name,index", [("A4", 1), ("D5", 1), ("E6", 2)])
def test_non_perron_eigenvector(name, index):
    sd = spec(name, index)
    assert np.all(sd.S != 0)
    p = build_triangular_patch(4, 4)
    a = sd.graph.labels[int(np.argmax(np.abs(sd.S)))]
    bc = BoundaryCondition.homogeneous(a)
    en = D.enumerate_heights(p, bc, sd)
    lo = D.enumerate_loops(p, bc)
    assert abs(en.Z(0.5) - lo.Z(sd.Lambda, 0.5)) < 1e-10 * abs(lo.Z(sd.Lambda, 0.5))


def test_chordal_Z_with_turning_factor():
    p = build_triangular_patch(3, 4)
    be = p.boundary_edges()
    sd = spec("A3")
    for e2 in be[3:12]:
        bc = BoundaryCondition.chordal(1, 2, breaks=(be[1], e2))
        zh = D.enumerate_heights(p, bc, sd).Z(0.6)
        zl = D.enumerate_loops(p, bc).Z(sd.Lambda, 0.6) * D.open_curve_factor(p, bc, sd)
        assert zh == pytest.approx(zl, rel=1e-12)
    # default change points: the curve leaves the way it came in
    bc = BoundaryCondition.chordal(1, 2)
    assert D.open_curve_turns(p, *change_points(p, bc)) == 0


def test_loop_ratio_is_inside_over_outside():
    sd = spec("A4")
    p = build_triangular_patch(4, 4)
    en = D.enumerate_heights(p, BoundaryCondition.homogeneous(2), sd, stream=True)
    checked = 0
    for v in en.configs[::5]:
        cfg = D.HeightConfig(p, sd.graph, v)
        for lp in D.loop_decomposition(cfg).loops:
            i, o = D.inside_outside_heights(lp, cfg)
            assert D.loop_height_ratio(lp, cfg, sd.S) == pytest.approx(sd.S[i] / sd.S[o], rel=1e-12)
            checked += 1
    assert checked > 100


def test_config_weight_matches_enumeration():
    sd = spec("A3")
    p = build_triangular_patch(3, 3)
    en = D.enumerate_heights(p, BoundaryCondition.homogeneous(1), sd, stream=True)
    w = en.weights(0.45)
    for k in range(0, en.count, 3):
        cfg = D.HeightConfig(p, sd.graph, en.configs[k])
        assert D.config_weight(cfg, sd.S, 0.45) == pytest.approx(w[k], rel=1e-12)


def test_triangle_factor_rules():
    sd = spec("A3")
    adj = sd.graph.adjacency
    assert D.triangle_factor(0, 0, 0, adj, sd.S, 0.5) == 1.0
    assert D.triangle_factor(0, 1, 2, adj, sd.S, 0.5) == 0.0
    assert D.triangle_factor(0, 0, 2, adj, sd.S, 0.5) == 0.0
    assert D.triangle_factor(1, 0, 0, adj, sd.S, 0.5) == pytest.approx(0.5 * math.sqrt(2) ** (1 / 6))


def test_turn_count_constant_over_enumerated_curves():
    p = build_triangular_patch(4, 5)
    for name, a, b in [("A2", 1, 2), ("A4", 2, 3)]:
        law = D.chordal_law_exact(p, BoundaryCondition.chordal(a, b), spec(name), 0.6)
        assert {c.turn_difference for c in law.curves.values()} == {0}
        assert sum(law.probabilities.values()) == pytest.approx(1.0)


def test_loop_count_brute_force():
    # all two-colourings of a 3x3 patch, clusters counted directly
    p = build_triangular_patch(3, 3)
    lo = D.enumerate_loops(p, BoundaryCondition.homogeneous(1))
    free = p.free_sites
    hist = {}
    for bits in itertools.product((0, 1), repeat=len(free)):
        col = np.zeros(p.n_sites, dtype=int)
        col[free] = bits
        marked = sum(len(set(col[t])) > 1 for t in p.triangles)
        parent = list(range(p.n_sites))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for s, t in p.edges:
            if col[s] == col[t]:
                parent[find(s)] = find(t)
        loops = len({find(i) for i in range(p.n_sites)}) - 1
        hist[marked, loops] = hist.get((marked, loops), 0) + 1
    for (m, l), c in hist.items():
        assert lo.histogram[m, l] == c
    assert lo.histogram.sum() == 2 ** len(free)


def test_cap():
    p = build_triangular_patch(6, 6)
    with pytest.raises(D.EnumerationCapError):
        D.enumerate_heights(p, BoundaryCondition.homogeneous(1), spec("A3"), cap=10)
