"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary."""

import csv
import io
import time
from dataclasses import replace

import numpy as np
import pytest

from branched_splines.analyzer import agreement_rates, conformality_sweep, sweep_csv
from branched_splines.branched_basis import enumerate_components, partition_of_unity_error, random_cover_points
from branched_splines.cli import analyze_report
from branched_splines.config import load_config
from branched_splines.cover import cover_topology
from branched_splines.fvs import (
    FvsDofs, build_fvs_surface, element_dofs, fvs_eval, fvs_solve_element, fvs_surface, scan_fvs_surface,
)
from branched_splines.geometry import (
    EmbeddingConfig, export_obj, mesh_report, read_obj, sample_control_net, scan_branched_spline, tessellate,
)
from conftest import ACCEPTANCE_LINES
from oracles import random_convex_quad, random_cubic, random_cut_system, support_component_count


def verdict(tag, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_ac1_triple_cover_topology():
    rep, secs = timed(analyze_report, load_config("example3.json"))
    t = rep["topology"]
    got = (t["V"], t["E"], t["F"], t["chi"], t["genus"], sorted(r["indices"] for r in t["ramification"]))
    ok = got == (1196, 2400, 1200, -4, 3, [[3], [3]]) and secs < 1.0
    verdict("AC1 triple-cover topology", ok,
            f"V'={t['V']} E'={t['E']} F'={t['F']} chi={t['chi']} g={t['genus']} "
            f"ramification={got[5]} in {secs:.2f}s")


def test_ac2_double_cover_topology():
    rep, secs = timed(analyze_report, load_config("example2.json"))
    t = rep["topology"]
    ok = (t["chi"], t["genus"]) == (-2, 2) and secs < 1.0
    verdict("AC2 double-cover topology", ok, f"chi={t['chi']} g={t['genus']} in {secs:.2f}s")


def test_ac3_basis_census(triple):
    hats, quads = enumerate_components(triple, 1), enumerate_components(triple, 2)
    V = cover_topology(triple).V
    o1, o2 = support_component_count(triple, 1), support_component_count(triple, 2)
    ok = len(hats) == V == o1 == 1196 and len(quads) == o2 == 1184
    verdict("AC3 basis census", ok,
            f"d=1: {len(hats)} (V'={V}, oracle {o1}); d=2: {len(quads)} (oracle {o2})")


def test_ac4_partition_of_unity(triple_bases, double_bases):
    rng = np.random.default_rng(2024)
    worst = 0.0
    parts = []
    for name, bases in (("triple", triple_bases), ("double", double_bases)):
        for d in (1, 2):
            pts = random_cover_points(bases[d].spec, 10_000, rng)
            err = partition_of_unity_error(bases[d], pts)
            worst = max(worst, err)
            parts.append(f"{name} d={d}: {err:.1e}")
    verdict("AC4 partition of unity", worst <= 1e-12, f"max |sum B - 1| = {worst:.2e} ({'; '.join(parts)})")


def test_ac5_smoothness_scans(triple_bases, double_bases, double):
    cfg = EmbeddingConfig()
    c0, c1 = 0.0, 0.0
    exempt = []
    for bases in (triple_bases, double_bases):
        for d in (1, 2):
            basis = bases[d]
            rep = scan_branched_spline(basis, sample_control_net(basis.spec, basis, cfg), order=1)
            c0 = max(c0, rep.max_value_gap, rep.exempt_max_value_gap)
            if d == 2:
                c1 = max(c1, rep.max_gradient_gap)
                exempt.append(rep.exempt_max_gradient_gap)
    fvs = scan_fvs_surface(fvs_surface(double, cfg))
    c0 = max(c0, fvs.max_value_gap, fvs.exempt_max_value_gap)
    c1 = max(c1, fvs.max_gradient_gap)
    exempt.append(fvs.exempt_max_gradient_gap)
    ok = c0 <= 1e-10 and c1 <= 1e-8
    verdict("AC5 smoothness scans", ok,
            f"C0 gap {c0:.1e} (all edges), C1 gap {c1:.1e} (non-ramification edges); "
            f"ramification-edge C1 gaps reported: {', '.join(f'{g:.1e}' for g in exempt)}")


@pytest.mark.parametrize("name,genus", [("example3.json", 3), ("example2.json", 2)])
def test_ac6_mesh_validity(tmp_path, name, genus):
    base = load_config(name)
    parts, ok = [], True
    for k in (1, 2, 4):
        emb = replace(base.embedding, k=k)
        t0 = time.perf_counter()
        if base.kind == "fvs":
            mesh = build_fvs_surface(base.spec, emb)
        else:
            basis = enumerate_components(base.spec, base.degree)
            mesh = tessellate(base.spec, basis, sample_control_net(base.spec, basis, emb), emb)
        path = tmp_path / f"k{k}.obj"
        export_obj(mesh, path)
        secs = time.perf_counter() - t0
        rep = mesh_report(read_obj(path))
        good = rep.closed and rep.oriented and rep.manifold and rep.genus == genus and secs < 30
        ok &= good
        parts.append(f"k={k}: g={rep.genus} closed={rep.closed} oriented={rep.oriented} {secs:.1f}s")
    verdict(f"AC6 mesh validity {name} ({base.kind})", ok, "; ".join(parts))


def test_ac7_conformality_sweep(tmp_path):
    rows = conformality_sweep(range(2, 5), range(1, 7), range(0, 6))
    rows = [r for r in rows if r.r < r.n]
    out = tmp_path / "confdim.csv"
    out.write_text(sweep_csv(rows))
    parsed = list(csv.DictReader(io.StringIO(out.read_text())))
    table = {(r.N, r.n, r.r): r.oracle_dim for r in rows}
    rates = agreement_rates(rows)
    ok = len(parsed) == len(rows) == 63 and table[(2, 1, 0)] == 0 and table[(3, 3, 1)] == 2
    verdict("AC7 conformality sweep", ok,
            f"{len(rows)} rows written; (2,1,0)->{table[(2, 1, 0)]}, (3,3,1)->{table[(3, 3, 1)]}; "
            f"agreement A={rates['A']:.1%} B={rates['B']:.1%} (reported)")


def test_ac8_fvs_patch_test():
    rng = np.random.default_rng(8)
    repro, round_trip = 0.0, 0.0
    for _ in range(100):
        P = random_convex_quad(rng)
        f, grad = random_cubic(rng)
        elem = fvs_solve_element(P, FvsDofs.from_function(P, f, grad))
        for p in rng.dirichlet(np.ones(4), size=50) @ P:
            repro = max(repro, abs(float(fvs_eval(elem, p)[0]) - f(*p)))
        dofs = rng.normal(size=16)
        back = element_dofs(fvs_solve_element(P, dofs)).as_vector()
        round_trip = max(round_trip, float(np.max(np.abs(back - dofs))))
    ok = repro <= 1e-10 and round_trip <= 1e-10
    verdict("AC8 FVS patch test", ok,
            f"cubic reproduction {repro:.1e} over 100 quads x 50 points; DOF round trip {round_trip:.1e}")


def test_ac9_riemann_hurwitz():
    rng = np.random.default_rng(9)
    failures, total_ram = 0, 0
    for _ in range(200):
        spec = random_cut_system(rng)
        t = cover_topology(spec)
        total_ram += t.total_ramification
        failures += (2 * t.genus - 2) != t.total_ramification or t.chi % 2 != 0
    verdict("AC9 Riemann-Hurwitz", failures == 0,
            f"200 random cut systems, {failures} violations (total ramification seen: {total_ram})")
