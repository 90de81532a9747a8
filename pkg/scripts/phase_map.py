"""Print a text map of the (c1, c2) phase regions with finite-N densities.

Usage: python scripts/phase_map.py [a] [N] [points]
"""

import sys

import numpy as np

from freeaw.asymptotics import Region, mean_density, phase_limit

GLYPH = {Region.MaxCurrent: "M", Region.LowDensity: "L", Region.HighDensity: "H", Region.Coexistence: "C"}


def main(argv):
    a = float(argv[0]) if argv else 0.4
    N = int(argv[1]) if len(argv) > 1 else 100
    k = int(argv[2]) if len(argv) > 2 else 9
    grid = np.linspace(0.2, 0.95 / a, k)
    print(f"a={a} N={N}; rows c2 (top = largest), columns c1")
    for c2 in grid[::-1]:
        cells = []
        for c1 in grid:
            res = phase_limit(a, c1, c2)
            rho = mean_density(N, a, c1, c2)
            cells.append(f"{GLYPH[res.region]}{rho:6.3f}")
        print(f"{c2:5.2f} | " + " ".join(cells))
    print("        " + " ".join(f"{c:7.2f}" for c in grid))


if __name__ == "__main__":
    main(sys.argv[1:])
