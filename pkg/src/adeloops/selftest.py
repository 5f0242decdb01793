"""Equivalence gates on small built-in patches (``adeloops selftest``)."""

from __future__ import annotations

import math

from . import dense, dilute, oracle, topology
from .domains import (BoundaryCondition, build_annulus, build_dobrushin_patch, build_triangular_patch,
                      build_wired_patch, change_points)
from .spectra import o_n_critical_point, parse_graph, spectrum

TOL = 1e-10


def _check(name, value, tol=TOL):
    return {"name": name, "value": float(value), "tolerance": tol, "passed": bool(value < tol)}


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def check_spectra():
    err = 0.0
    for m in range(2, 13):
        sd = spectrum(parse_graph(f"A{m}"))
        err = max(err, abs(sd.Lambda - 2 * math.cos(math.pi / (m + 1))))
    return _check("A_m largest eigenvalue", err, 1e-12)


def check_dilute_Z():
    err = 0.0
    patch = build_triangular_patch(3, 3)
    for g in ("A3", "D4", "E6"):
        sd = spectrum(parse_graph(g), for_model=True)
        bc = BoundaryCondition.homogeneous(sd.graph.labels[0])
        en = dilute.enumerate_heights(patch, bc, sd)
        lo = dilute.enumerate_loops(patch, bc)
        for x in (0.3, o_n_critical_point(sd.Lambda), 0.8):
            err = max(err, _rel(en.Z(x), lo.Z(sd.Lambda, x)))
    return _check("dilute height Z = loop Z", err)


def check_dilute_law():
    patch = build_triangular_patch(3, 4)
    bc = BoundaryCondition.chordal(1, 2)
    sd = spectrum(parse_graph("A2"), for_model=True)
    x = o_n_critical_point(sd.Lambda)
    on = oracle.on_partition(patch, arc=change_points(patch, bc))
    law = dilute.chordal_law_exact(patch, bc, sd, x)
    return _check("dilute curve law = O(n) oracle", dilute.tv_distance(on.arc_law(sd.Lambda, x), law.probabilities))


def check_dense():
    out = []
    patch = build_wired_patch(4, 4)
    sd = spectrum(parse_graph("A3"), for_model=True)
    en = dense.enumerate_heights_square(patch, BoundaryCondition.wired(1), sd)
    fk = dense.fk_loop_expansion(patch)
    out.append(_check("dense height Z = FK loop Z", _rel(en.Z, fk.Z(sd.Lambda))))
    patch = build_dobrushin_patch(5, 3)
    law = dense.chordal_law_exact_dense(patch, BoundaryCondition.chordal(2, 1), sd)
    rc = oracle.potts_rc_partition(patch, 2.0)
    out.append(_check("dense curve law = random-cluster oracle", dilute.tv_distance(rc.law, law.probabilities)))
    return out


def check_annulus():
    out = []
    patch = build_annulus(5, 6, (3, 2, 1, 1))
    sd = spectrum(parse_graph("A5"), for_model=True)
    bc = BoundaryCondition.annulus(2, 3, 1)
    res = topology.annulus_enumerate(patch, bc, sd, 0.7, cap=16)
    zf = topology.annulus_factorized_Z(patch, bc, sd, 0.7, cap=16)
    out.append(_check("annulus Z factorises", _rel(res.Z, zf)))
    err = max(topology.eigen_identity_error(sd.graph, sd.S, sd.Lambda, N) for N in range(13))
    out.append(_check("walk-count eigen identity", err))
    sd = spectrum(parse_graph("A3"), for_model=True)
    law, _ = topology.canonical_annulus_law(patch, sd, 2, 1, 0.5, cap=16)
    gas, _ = topology.loop_gas_annulus_law(patch, sd.Lambda, 0.5, cap=16)
    out.append(_check("canonical annulus = loop gas", dilute.tv_distance(law, gas)))
    return out


def run_all() -> list[dict]:
    checks = [check_spectra(), check_dilute_Z(), check_dilute_law()]
    checks += check_dense()
    checks += check_annulus()
    return checks


if __name__ == "__main__":
    for c in run_all():
        print(("PASS" if c["passed"] else "FAIL"), c["name"], c["value"])
