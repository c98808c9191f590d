"""Periodic points of the Renyi map and what their weights say about pressure.

Run with ``python3 demos/periodic_and_pressure.py``.
"""

from __future__ import annotations

from renyi_ldp.pressure import partition_sum, pressure_bracket
from renyi_ldp.renyi import periodic_point


def main() -> None:
    print("Every periodic digit word has one fixed point, a quadratic irrational:")
    for w in ("1", "2", "2,3", "1,1,4"):
        pt = periodic_point(w)
        print(f"  word {w:>6}: xi = {pt.xi}  (~{float(pt.xi):.6f}),  |(T^n)'(xi)| = {float(pt.derivative):.6f}")

    print("\nThe word '1' is the neutral fixed point 0 with derivative 1; its weight")
    print("never decays, which is why pressure brackets converge slowly near beta = 1.")

    print("\nAt beta = 1/2 the one-letter sums grow like the harmonic series:")
    for M in (250, 500, 1000, 2000):
        z = partition_sum(0.5, 1, M)
        print(f"  M = {M:5d}: truncated Z_1 = {z.lower:.4f}, tail certified = {not z.divergent}")

    print("\nAbove 1/2 the tail is finite and the bracket is certified:")
    for beta in (0.8, 1.0, 1.5):
        for n in (1, 2, 3):
            br = pressure_bracket(beta, n, 60)
            print(f"  beta = {beta}, n = {n}: P in [{br.lo:+.4f}, {br.hi:+.4f}]  (tail {br.tail:.2e})")


if __name__ == "__main__":
    main()
