"""Command-line pipeline: analyze, build, confdim, check.

Exit codes: 0 success, 1 malformed input, 2 invalid cover, 3 failed check.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .analyzer import agreement_rates, conformality_sweep, sweep_csv
from .branched_basis import enumerate_components, partition_of_unity_error, random_cover_points
from .config import ConfigError, RunConfig, load_config
from .cover import cover_topology, validate_cover
from .fvs import build_fvs_surface, fvs_surface, scan_fvs_surface
from .geometry import WeldError, export_obj, mesh_report, sample_control_net, scan_branched_spline, tessellate

EXIT_OK, EXIT_MALFORMED, EXIT_INVALID, EXIT_FAILED = 0, 1, 2, 3

UNITY_POINTS = 10_000
UNITY_TOL = 1e-12


def _override(cfg: RunConfig, degree=None, density=None) -> RunConfig:
    if degree is not None:
        cfg = replace(cfg, kind="bspline", degree=degree)
    if density is not None:
        cfg = replace(cfg, embedding=replace(cfg.embedding, k=density))
    return cfg


def _rh_check(topo, n: int) -> dict:
    lhs = 2 * topo.genus - 2
    rhs = n * (2 * 1 - 2) + topo.total_ramification
    return {"2g-2": lhs, "n(2g_base-2)+sum(e-1)": rhs, "holds": lhs == rhs}


def analyze_report(cfg: RunConfig) -> dict:
    topo = cover_topology(cfg.spec)
    census = {str(d): enumerate_components(cfg.spec, d).census() for d in (1, 2)}
    return {
        "valid": True,
        "sheets": cfg.spec.sheets,
        "grid": [cfg.spec.grid.W, cfg.spec.grid.H],
        "topology": topo.as_dict(),
        "riemann_hurwitz": _rh_check(topo, cfg.spec.sheets),
        "basis": census,
    }


def build_surface(cfg: RunConfig, *, fault=None):
    """Run the surface pipeline; returns ``(mesh, scan report, extra info)``."""
    spec, emb = cfg.spec, cfg.embedding
    if cfg.kind == "fvs":
        surf = fvs_surface(spec, emb)
        mesh = build_fvs_surface(spec, emb, fault=fault)
        return mesh, scan_fvs_surface(surf), {"kind": "fvs"}
    basis = enumerate_components(spec, cfg.degree)
    net = sample_control_net(spec, basis, emb)
    mesh = tessellate(spec, basis, net, emb, fault=fault)
    scan = scan_branched_spline(basis, net)
    info = {"kind": "bspline", "degree": cfg.degree, "components": len(basis),
            "irregular_components": len(net.irregular), "blended_control_points": net.blended}
    return mesh, scan, info


def check_report(cfg: RunConfig, *, tol=1e-10, grad_tol=1e-8, fault=None, net_hook=None, seed=0) -> dict:
    """Itemized verification; ``net_hook`` may edit the control net before tessellation."""
    spec, emb = cfg.spec, cfg.embedding
    checks = []

    def record(name, passed, **detail):
        checks.append({**detail, "name": name, "passed": bool(passed)})

    topo = cover_topology(spec)
    rh = _rh_check(topo, spec.sheets)
    record("riemann_hurwitz", rh["holds"] and topo.chi % 2 == 0, **rh)
    hats = enumerate_components(spec, 1)
    record("hat_count_equals_cover_vertices", len(hats) == topo.V, hats=len(hats), cover_vertices=topo.V)

    rng = np.random.default_rng(seed)
    points = random_cover_points(spec, UNITY_POINTS, rng)
    if cfg.kind == "bspline":
        basis = hats if cfg.degree == 1 else enumerate_components(spec, cfg.degree)
        err = partition_of_unity_error(basis, points)
        record("partition_of_unity", err <= UNITY_TOL, max_error=err, tol=UNITY_TOL, points=len(points))
        net = sample_control_net(spec, basis, emb)
        if net_hook is not None:
            net_hook(net)
        scan = scan_branched_spline(basis, net, tol=tol, grad_tol=grad_tol)
        make_mesh = lambda: tessellate(spec, basis, net, emb, fault=fault)
    else:
        surf = fvs_surface(spec, emb)
        scan = scan_fvs_surface(surf, tol=tol, grad_tol=grad_tol)
        make_mesh = lambda: build_fvs_surface(spec, emb, fault=fault)
    summary = scan.summary()
    record("smoothness_scan", summary.pop("passed"), **summary)

    try:
        mesh = make_mesh()
    except WeldError as exc:
        record("weld", False, error=str(exc))
    else:
        rep = mesh_report(mesh)
        record("weld", True, max_gap=mesh.weld_gap)
        record("mesh_manifold", rep.closed and rep.oriented and rep.manifold, **rep.as_dict())
        record("mesh_euler_matches_cover", rep.chi == topo.chi and rep.genus == topo.genus,
               mesh_chi=rep.chi, cover_chi=topo.chi, mesh_genus=rep.genus, cover_genus=topo.genus)
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def _load(args) -> RunConfig:
    return _override(load_config(args.config), getattr(args, "degree", None), getattr(args, "density", None))


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _invalid(cfg: RunConfig) -> list[str]:
    problems = validate_cover(cfg.spec)
    if problems:
        _emit({"valid": False, "violations": problems})
    return problems


def cmd_analyze(args) -> int:
    cfg = _load(args)
    if _invalid(cfg):
        return EXIT_INVALID
    report = analyze_report(cfg)
    if args.out:
        degree = args.degree or (cfg.degree if cfg.kind == "bspline" else 2)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(enumerate_components(cfg.spec, degree).census_csv())
        report["census_csv"] = args.out
    _emit(report)
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = _load(args)
    if _invalid(cfg):
        return EXIT_INVALID
    topo = cover_topology(cfg.spec)
    mesh, scan, info = build_surface(cfg)
    out = args.out or cfg.output or "surface.obj"
    export_obj(mesh, out)
    rep = mesh_report(mesh)
    _emit({
        "output": out,
        **info,
        "density": cfg.embedding.k,
        "mesh": rep.as_dict(),
        "cover_genus": topo.genus,
        "genus_matches": rep.genus == topo.genus,
        "weld_gap": mesh.weld_gap,
        "smoothness": scan.summary(),
    })
    return EXIT_OK if rep.genus == topo.genus and rep.manifold else EXIT_FAILED


def _int_range(text: str) -> list[int]:
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise ValueError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def cmd_confdim(args) -> int:
    try:
        Ns = _int_range(args.N if args.N is not None else args.pos[0])
        ns = _int_range(args.n if args.n is not None else args.pos[1])
        rs = _int_range(args.r if args.r is not None else args.pos[2])
    except (IndexError, TypeError, ValueError) as exc:
        print(f"confdim: need N, n, r as integers or lo..hi ranges ({exc})", file=sys.stderr)
        return EXIT_MALFORMED
    if min(Ns) < 2 or min(ns) < 0 or min(rs) < 0:
        print("confdim: need N >= 2 and n, r >= 0", file=sys.stderr)
        return EXIT_MALFORMED
    rows = conformality_sweep(Ns, ns, rs)
    text = sweep_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    rates = agreement_rates(rows)
    print(f"rows={len(rows)} agree_A={rates['A']:.3f} agree_B={rates['B']:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _load(args)
    if _invalid(cfg):
        return EXIT_INVALID
    fault = (((0, 0), 0), (0, 0)) if args.inject_weld_fault else None
    report = check_report(cfg, tol=args.tolerance, grad_tol=args.grad_tolerance, fault=fault)
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="branched-splines", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="run config JSON (or a bundled example name)")
        p.add_argument("--degree", type=int, choices=(1, 2), help="use B-splines of this degree")
        return p

    p = with_config(sub.add_parser("analyze", help="cover topology and basis census"))
    p.add_argument("--out", help="write the per-basis component census CSV here")
    p.set_defaults(func=cmd_analyze)

    p = with_config(sub.add_parser("build", help="build the surface and export OBJ"))
    p.add_argument("--out", help="OBJ output path")
    p.add_argument("--density", type=int, help="samples per cell edge")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("confdim", help="conformality dimension: exact nullity vs closed forms")
    p.add_argument("pos", nargs="*", help="N n r (integers or lo..hi)")
    p.add_argument("--N")
    p.add_argument("--n")
    p.add_argument("--r")
    p.add_argument("--out", help="also write the CSV here")
    p.set_defaults(func=cmd_confdim)

    p = with_config(sub.add_parser("check", help="verification report"))
    p.add_argument("--density", type=int)
    p.add_argument("--tolerance", type=float, default=1e-10, help="value continuity tolerance")
    p.add_argument("--grad-tolerance", type=float, default=1e-8, help="gradient continuity tolerance")
    p.add_argument("--inject-weld-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except WeldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
