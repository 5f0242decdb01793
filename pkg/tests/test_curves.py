import io

import numpy as np
import pytest

from adeloops import curves as C
from adeloops import dilute as D
from adeloops import sampler as S
from adeloops.domains import BoundaryCondition, build_triangular_patch, change_points
from adeloops.spectra import parse_graph, spectrum


def test_vertical_slit_capacity():
    # a straight slit of height y has capacity y^2 / 4 and zero driving function
    y = np.linspace(0, 2.0, 41)
    df = C.loewner_extract(C.HalfPlaneCurve(1j * y))
    assert np.allclose(df.W, 0, atol=1e-12)
    assert df.t[-1] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("end", [np.pi / 2, np.pi / 4, 0.2])
def test_zipper_round_trip(end):
    z = C.arc_curve(1.0, 300, end)
    df = C.loewner_extract(C.HalfPlaneCurve(z))
    back = C.zip_curve(df)
    assert abs(back[-1] - z[-1]) < 1e-6
    assert np.max(np.abs(back - z)) < 1e-6


def test_reflection_negates_driving():
    z = C.arc_curve(1.0, 200)
    a = C.loewner_extract(C.HalfPlaneCurve(z))
    b = C.loewner_extract(C.HalfPlaneCurve(-np.conj(z)))
    assert np.allclose(a.t, b.t, rtol=1e-12)
    assert np.allclose(a.W, -b.W, atol=1e-12)


def test_scaling():
    z = C.arc_curve(1.0, 200)
    a = C.loewner_extract(C.HalfPlaneCurve(z))
    b = C.loewner_extract(C.HalfPlaneCurve(3 * z))
    s = C.scale_driving(a, 3.0)
    assert np.allclose(s.t, b.t, rtol=1e-12) and np.allclose(s.W, b.W, atol=1e-12)


def test_point_off_half_plane_rejected():
    with pytest.raises(C.CurveError):
        C.loewner_extract(C.HalfPlaneCurve(np.array([0, 1j, 1 - 0.5j])))


@pytest.mark.parametrize("kappa", [2.0, 4.0, 6.0])
def test_brownian_kappa(kappa):
    k, err = C.kappa_estimate(C.brownian_drivers(kappa, 500, seed=1))
    assert abs(k - kappa) < 0.05 * kappa
    assert 0 < err < 0.1 * kappa


def test_kappa_needs_curves():
    with pytest.raises(C.CurveError):
        C.kappa_estimate(C.brownian_drivers(2.0, 5))


def test_rectangle_map():
    r = C.RectangleMap(0.0, 0.0, 4.0, 3.0)
    assert abs(r(2.0)) < 1e-14
    assert abs(r(0.0) + 1) < 1e-12 and abs(r(4.0) - 1) < 1e-12
    assert abs(r(2 + 3j)) > 1e6
    # upper corners go to +-1/sqrt(m)
    assert abs(r(4 + 3j) - 1 / np.sqrt(r.m)) < 1e-8
    z = np.array([1 + 1j, 3 + 2.5j, 0.5 + 0.1j])
    w = r(z)
    assert np.all(w.imag > 0)
    assert np.allclose(r.inverse(w), z, atol=1e-10)


def test_embed_lattice_curve():
    p = build_triangular_patch(6, 8, shape="rect")
    bc = BoundaryCondition.chordal(1, 2)
    sd = spectrum(parse_graph("A2"), for_model=True)
    cfg = S.ChainConfig("dilute", sd, p, bc, x=0.6, thermalization=20, stride=1, seed=2)
    pts = [S.curve_points(p, c) for c in S.sample_curve_ensemble(cfg, 5)]
    dfs, tcut = C.driving_ensemble(p, pts, change_points(p, bc)[0])
    assert len(dfs) == 5 and tcut > 0
    for df in dfs:
        assert df.W[0] == 0 and np.all(np.diff(df.t) >= 0)


def test_step_codes_and_turns():
    p = build_triangular_patch(4, 5, shape="rect")
    sd = spectrum(parse_graph("A2"), for_model=True)
    law = D.chordal_law_exact(p, BoundaryCondition.chordal(1, 2), sd, 0.6)
    for c in list(law.curves.values())[:50]:
        pts = S.curve_points(p, c)
        codes = C.step_codes(pts, "tri")
        left, right = C.turn_counts(codes, "tri")
        assert (left, right) == (c.left, c.right)
        assert C.winding_angles(codes, "tri")[-1] == pytest.approx((left - right) * np.pi / 3)


def test_ndjson_round_trip():
    p = build_triangular_patch(4, 5, shape="rect")
    sd = spectrum(parse_graph("A2"), for_model=True)
    law = D.chordal_law_exact(p, BoundaryCondition.chordal(1, 2), sd, 0.6)
    recs, pts = [], []
    for i, c in enumerate(list(law.curves.values())[:20]):
        pts.append(S.curve_points(p, c))
        recs.append(C.curve_record(i, pts[-1], "tri", {"seed": 0}))
    buf = io.StringIO()
    C.write_curves(buf, recs)
    buf.seek(0)
    back = C.read_curves(buf)
    assert back == recs
    for r, q in zip(back, pts):
        assert np.allclose(C.points_from_record(r), q, atol=1e-12)


def test_read_curves_errors():
    with pytest.raises(C.CurveError, match="line 2"):
        C.read_curves(io.StringIO('{"type": "header"}\n{"id": 1, "lattice": "tri"}\n'))
    with pytest.raises(C.CurveError, match="line 1"):
        C.read_curves(io.StringIO("{oops\n"))


def test_parafermion_observable():
    # a straight curve: no winding, so the observable is the visit indicator at any s
    pts = np.array([(0.5 * k, 0.5 * k) for k in range(6)])
    est = C.parafermion_observable([pts, pts], "sq-medial", 0.7, min_samples=1)
    assert len(est.values) == 6
    assert all(abs(v - 1) < 1e-12 for v in est.values.values())
    assert C.parafermion_observable([], "tri", 0.5).flagged


def test_site_cells():
    p = build_triangular_patch(3, 3)
    cells = C.site_cells(p, "tri")
    assert len(cells) == len(p.free_sites)
    assert all(len(c) == 6 for c in cells)
