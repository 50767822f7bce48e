"""Gradient mismatch next to the branch points as the blend radius varies.

Edges touching a ramification vertex are exempt from the C1 requirement; this
prints what the scan sees there anyway, for the B-spline and FVS surfaces.

    python3 scripts/ramification_scan.py [--rho 0 1 2 3]
"""

import argparse

from branched_splines.branched_basis import enumerate_components
from branched_splines.cover import example_double_cover, example_triple_cover
from branched_splines.fvs import fvs_surface, scan_fvs_surface
from branched_splines.geometry import EmbeddingConfig, sample_control_net, scan_branched_spline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.0, 1.0, 2.0, 3.0])
    args = ap.parse_args()

    triple, double = example_triple_cover(), example_double_cover()
    quads = enumerate_components(triple, 2)
    print(f"{'rho':>4} {'surface':>14} {'C1 regular':>11} {'C1 branch':>11}")
    for rho in args.rho:
        cfg = EmbeddingConfig(rho=rho)
        rep = scan_branched_spline(quads, sample_control_net(triple, quads, cfg))
        print(f"{rho:4.1f} {'bspline d=2':>14} {rep.max_gradient_gap:11.2e} {rep.exempt_max_gradient_gap:11.2e}")
        rep = scan_fvs_surface(fvs_surface(double, cfg))
        print(f"{rho:4.1f} {'fvs':>14} {rep.max_gradient_gap:11.2e} {rep.exempt_max_gradient_gap:11.2e}")


if __name__ == "__main__":
    main()
