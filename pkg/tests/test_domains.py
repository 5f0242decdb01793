import numpy as np
import pytest

from adeloops.domains import (BoundaryCondition, DomainError, boundary_heights, build_annulus,
                              build_dobrushin_patch, build_square_patch, build_triangular_patch,
                              build_wired_patch, change_points, parse_bc, validate_bc)
from adeloops.spectra import parse_graph


@pytest.mark.parametrize("rows,cols", [(2, 2), (3, 4), (5, 3)])
def test_parallelogram_counts(rows, cols):
    p = build_triangular_patch(rows, cols)
    assert p.n_sites == (rows + 1) * (cols + 1)
    assert p.n_triangles == 2 * rows * cols
    assert p.euler_characteristic() == 1
    assert len(p.free_sites) == (rows - 1) * (cols - 1)


def test_triangles_counterclockwise():
    p = build_triangular_patch(3, 3, shape="rect")
    a, b, c = (p.pos[p.triangles[:, k]] for k in range(3))
    cross = (b - a)[:, 0] * (c - a)[:, 1] - (b - a)[:, 1] * (c - a)[:, 0]
    assert np.all(cross > 0)


def test_symrect_mirror():
    p = build_triangular_patch(4, 5, shape="symrect")
    assert (p.n_sites, p.n_triangles, len(p.free_sites)) == (28, 36, 10)
    xm = (p.pos[:, 0].min() + p.pos[:, 0].max()) / 2
    mirrored = {(round(2 * xm - x, 9), round(y, 9)) for x, y in p.pos}
    assert mirrored == {(round(x, 9), round(y, 9)) for x, y in p.pos}


def test_annulus_topology():
    p = build_annulus(5, 6, (3, 2, 1, 1))
    assert len(p.holes) == 1
    assert p.euler_characteristic() == 0
    assert len(p.free_sites) == 16
    with pytest.raises(DomainError):
        build_annulus(4, 4, (0, 1, 1, 1))


def test_outer_cycle_counterclockwise():
    p = build_triangular_patch(3, 4)
    xy = p.pos[list(p.outer)]
    area = 0.5 * np.sum(xy[:, 0] * np.roll(xy[:, 1], -1) - np.roll(xy[:, 0], -1) * xy[:, 1])
    assert area > 0


def test_chordal_arcs_and_change_points():
    p = build_triangular_patch(4, 4)
    bc = BoundaryCondition.chordal(1, 2)
    z1, z2 = change_points(p, bc)
    assert p.edge_mid(z1)[1] == pytest.approx(p.pos[:, 1].min())
    assert p.edge_mid(z2)[1] == pytest.approx(p.pos[:, 1].max())
    h = boundary_heights(p, bc)
    assert set(h.values()) == {1, 2}
    # a is the left arc
    left = [s for s, v in h.items() if v == 1]
    right = [s for s, v in h.items() if v == 2]
    assert p.pos[left, 0].mean() < p.pos[right, 0].mean()


def test_validate_messages():
    p = build_triangular_patch(3, 3)
    g = parse_graph("A4")
    assert validate_bc(p, BoundaryCondition.chordal(1, 2), g, "dilute") == []
    assert "not adjacent" in validate_bc(p, BoundaryCondition.chordal(1, 3), g, "dilute")[0]
    assert "not a node" in validate_bc(p, BoundaryCondition.homogeneous(9), g, "dilute")[0]
    assert validate_bc(p, BoundaryCondition.homogeneous(1), parse_graph("ExtA3"), "dilute")
    assert validate_bc(p, BoundaryCondition.homogeneous(1), g, "dense")
    ann = build_annulus(5, 6, (3, 2, 1, 1))
    assert validate_bc(ann, BoundaryCondition.annulus(2, 3, 2), parse_graph("A5"), "dilute")


def test_square_patches():
    p = build_square_patch(3, 2)
    assert p.n_sites == 12
    w = build_wired_patch(4, 4)
    assert len({int(w.parity[s]) for s in w.boundary}) == 1
    d = build_dobrushin_patch(5, 3)
    assert len({int(d.parity[s]) for s in d.boundary}) == 2
    for bad in ((3, 4), (1, 2)):
        with pytest.raises(DomainError):
            build_wired_patch(*bad)
    with pytest.raises(DomainError):
        build_dobrushin_patch(4, 3)


def test_parse_bc():
    assert parse_bc("chordal:1,2") == BoundaryCondition.chordal(1, 2)
    assert parse_bc("annulus: 2, 3, 1").heights == (2, 3, 1)
    for bad in ("chordal:1", "loop:1", "annulus:1,2"):
        with pytest.raises(DomainError):
            parse_bc(bad)
