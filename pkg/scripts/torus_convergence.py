"""How closely an unbranched FVS surface follows the torus it interpolates.

Samples every cell on a (k+1)^2 grid and reports the max deviation for a few
grid sizes, plus the observed convergence order.

    python3 scripts/torus_convergence.py [--sizes 10 20 40 80] [--density 4]
"""

import argparse
import math

import numpy as np

from branched_splines.base_splines import TorusGrid
from branched_splines.cover import BranchedCoverSpec
from branched_splines.fvs import UNIT_SQUARE, bb_basis, fvs_solve_element, fvs_surface, locate
from branched_splines.geometry import EmbeddingConfig, torus_embed


def max_deviation(W, k):
    spec = BranchedCoverSpec(TorusGrid(W, W), 1)
    cfg = EmbeddingConfig(k=k)
    surf = fvs_surface(spec, cfg)
    probe = fvs_solve_element(UNIT_SQUARE, np.zeros(16))
    ts = [a / k for a in range(k + 1)]
    plan = [(x, y, locate(probe, (x, y))) for x in ts for y in ts]
    worst = 0.0
    for cell in spec.grid.cells():
        coefs = np.tensordot(surf.operator, surf.cell_dofs(cell, 0), axes=(1, 0)).reshape(4, 10, 3)
        for x, y, (tri, lam, _) in plan:
            err = bb_basis(lam) @ coefs[tri] - torus_embed(spec.grid, 0, cell[0] + x, cell[1] + y, cfg)
            worst = max(worst, float(np.max(np.abs(err))))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--density", type=int, default=4)
    args = ap.parse_args()

    prev = None
    print(f"{'W':>4} {'max error':>12} {'order':>6}")
    for W in args.sizes:
        err = max_deviation(W, args.density)
        order = "" if prev is None else f"{math.log(prev[1] / err) / math.log(W / prev[0]):6.2f}"
        print(f"{W:>4} {err:12.3e} {order:>6}")
        prev = (W, err)


if __name__ == "__main__":
    main()
