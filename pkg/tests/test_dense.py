import itertools
import math

import numpy as np
import pytest

from adeloops import dense as Dn
from adeloops.domains import BoundaryCondition, build_dobrushin_patch, build_wired_patch
from adeloops.spectra import parse_graph, spectrum


def spec(name):
    return spectrum(parse_graph(name), for_model=True)


def test_plaquette_weight_by_hand():
    sd = spec("A3")
    # both diagonals equal: (S2/S1)^(1/2) + (S1/S2)^(1/2)
    assert Dn.plaquette_weight(1, 2, 1, 2, sd) == pytest.approx(2**0.25 + 2**-0.25)
    assert Dn.plaquette_weight(1, 2, 3, 2, sd) == pytest.approx(0.5**0.25)  # (S1 S3 / S2^2)^(1/4)
    assert Dn.plaquette_weight(1, 2, 3, 3, sd) == 0.0
    with pytest.raises(ValueError):
        Dn.plaquette_weight(1, 3, 1, 2, sd, strict=True)


@pytest.mark.parametrize("name,a", [("A3", 1), ("A3", 2), ("A4", 1), ("A5", 2), ("D4", 1), ("Star2", 1), ("Star3", 0)])
@pytest.mark.parametrize("U,V", [(4, 4), (6, 4)])
def test_height_equals_fk(name, a, U, V):
    sd = spec(name)
    p = build_wired_patch(U, V)
    zh = Dn.enumerate_heights_square(p, BoundaryCondition.wired(a), sd).Z
    zl = Dn.fk_loop_expansion(p).Z(sd.Lambda)
    assert abs(zh - zl) < 1e-10 * abs(zl)


def test_corner_products_and_euler():
    sd = spec("A4")
    p = build_wired_patch(6, 4)
    mg = Dn.medial_graph(p)
    en = Dn.enumerate_heights_square(p, BoundaryCondition.wired(1), sd, stream=True)
    n = 0
    for v in en.configs:
        for terms in itertools.product(*Dn.compatible_terms(p, v)):
            mc = Dn.medial_loops(p, list(terms), mg)
            assert len(mc.loops) == mc.even_clusters + mc.odd_clusters - 1
            for lp in mc.loops:
                i, o = Dn.loop_sides(lp, p, mg, v)
                assert Dn.corner_product(lp, p, v, sd) == pytest.approx(sd.S[i] / sd.S[o], rel=1e-12)
                n += 1
    assert n > 50


def test_fk_histogram_small():
    # 2x2 wired patch: one free plaquette, two terms; one of them closes a loop
    p = build_wired_patch(2, 2)
    fk = Dn.fk_loop_expansion(p)
    assert fk.histogram.sum() == 2 ** fk.free_plaquettes


def test_dense_curve_law_sums_to_one_and_is_graph_independent_at_equal_lambda():
    p = build_dobrushin_patch(5, 3)
    a5 = Dn.chordal_law_exact_dense(p, BoundaryCondition.chordal(2, 3), spec("A5"))
    st = Dn.chordal_law_exact_dense(p, BoundaryCondition.chordal(1, 0), spec("Star3"))
    assert sum(a5.probabilities.values()) == pytest.approx(1.0)
    assert a5.tv_distance(st) < 1e-10


def test_cluster_boundaries_even_degree():
    sd = spec("A4")
    p = build_wired_patch(6, 6)
    en = Dn.enumerate_heights_square(p, BoundaryCondition.wired(1), sd, stream=True)
    labels = np.asarray(sd.graph.labels)
    for v in en.configs[:: max(1, en.count // 200)]:
        for conv in Dn.SPLIT_CONVENTIONS:
            cb = Dn.height_cluster_boundaries(p, labels[v], sd.graph, conv, rng=np.random.default_rng(1))
            assert cb.odd_vertices == []
            covered = sum(len(lp) for lp in cb.loops) + sum(len(pa) - 1 for pa in cb.paths)
            assert covered == len(cb.edges)


def test_cluster_boundaries_reject_non_a():
    with pytest.raises(ValueError):
        Dn.height_cluster_boundaries(build_wired_patch(4, 4), np.ones(13, dtype=int), parse_graph("D4"))


def test_zero_component_rejected():
    with pytest.raises(ValueError):
        Dn._fourth_roots(np.array([1.0, 0.0]))
    assert math.isfinite(spec("A3").Lambda)
