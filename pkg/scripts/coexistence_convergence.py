"""phi_N(1) on the coexistence line against the mixture limit and the two-exponential finite-N form."""

import math
import sys

from freeaw.asymptotics import laplace_transform, mixture_transform


def finite_form(a, c, s, N):
    t = math.exp(s / N)
    pre = (c - a) * (1 - a * c) / (a * (c * c - 1))
    return pre / (2 * s) * (((1 - a * c) / (1 - a * c * t * t)) ** N - ((c - a) / (c - a * t)) ** N)


def main(argv):
    a = float(argv[0]) if argv else 0.4
    c = float(argv[1]) if len(argv) > 1 else 2.0
    s = 1.0
    mix = mixture_transform(a, c, s)
    print(f"a={a} c={c} s={s} mixture limit {mix:.4f}")
    print(f"{'N':>6} {'phi_N':>10} {'rel vs limit':>13} {'finite form':>12} {'rel vs form':>12}")
    for N in (100, 200, 400, 800, 1600, 3200):
        phi = laplace_transform(N, s, a, c, c)
        ff = finite_form(a, c, s, N)
        print(f"{N:>6} {phi:>10.3f} {phi / mix - 1:>13.4f} {ff:>12.3f} {phi / ff - 1:>12.5f}")


if __name__ == "__main__":
    main(sys.argv[1:])
