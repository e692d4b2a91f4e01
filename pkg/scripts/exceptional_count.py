"""Exceptional points and coefficient zeros for the two-photon model at omega=1, Delta=2, q=1/4.

Prints the kind-2A/2B points and the f_1 / c_1 / c_2 zeros in the window
g <= 0.48, E < 3, then tunes eps to the N=1, M=2 crossing and shows the
f_1 and c_2 zeros merging.
"""
import argparse

from rabi_spectra import two_photon as tp
from rabi_spectra.core import Kind, ModelParams

G_WINDOW = (1e-3, 0.48)
E_MAX = 3.0


def zeros(base: ModelParams):
    circles = []
    for kind, index in (("2A", 0), ("2A", 1), ("2B", 2)):
        circles += [p for p in tp.find_exceptional_2p(kind, "1/4", base, index, g_interval=G_WINDOW)
                    if p.energy < E_MAX]
    triangles = {}
    for label, kind, n in (("f1", Kind.A, 1), ("c1", Kind.B, 1), ("c2", Kind.B, 2)):
        triangles[label] = [p for p in tp.find_coefficient_zeros_2p("1/4", base, kind, n, g_interval=G_WINDOW)
                            if p.energy < E_MAX]
    return circles, triangles


def report(base: ModelParams) -> None:
    circles, triangles = zeros(base)
    print(f"eps = {base.epsilon:.10f}")
    for p in sorted(circles, key=lambda p: p.g):
        print(f"  circle   {p.kind:3s} g={p.g:.6f} E={p.energy:.6f}")
    for label, pts in triangles.items():
        for p in pts:
            print(f"  triangle {label:3s} g={p.g:.6f} E={p.energy:.6f}")
    print(f"  {len(circles)} circles, {sum(map(len, triangles.values()))} triangles")
    if triangles["f1"] and triangles["c2"]:
        print(f"  |g(f1) - g(c2)| = {abs(triangles['f1'][0].g - triangles['c2'][0].g):.3e}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--epsilon", type=float, default=1.0)
    args = parser.parse_args()
    base = ModelParams(1.0, 2.0, args.epsilon, 0.0)
    report(base)
    (point,) = tp.find_degenerate_2p("1/4", 1, 2, 2.0)
    print("\ntuned to the N=1, M=2 crossing:")
    report(base.with_(epsilon=point.epsilon))


if __name__ == "__main__":
    main()
