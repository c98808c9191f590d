"""Weighted periodic orbits, escape from compact sets, and equidistribution.

Orbits are weighted by ``|(T^n)'(x)|^(-beta)``.  Orbits that leave a large
compact set carry exponentially little weight; at beta = 1 the weighted
orbits concentrate near the neutral point as the period grows.

Run with ``python3 demos/equidistribution_and_escape.py``.
"""

from __future__ import annotations

from renyi_ldp.ldp import CompactSet, build_ensemble, equidist_table, escape_stratify, expo_bound_check, smoothed_indicator


def main() -> None:
    print("Escape strata versus the exponential bound (beta = 1, delta = 0.1):")
    for n in (4, 6, 8):
        r = expo_bound_check(1.0, n)
        worst = min(r.rows, key=lambda row: row.log_margin)
        print(f"  n = {n}: hypothesis met = {r.hypothesis_met}, tightest stratum m = {worst.m} with log margin {worst.log_margin:.2f}")

    print("\nEscape strata for the small compact set N = (3, 5, 7, 9, 11) (digits <= 8):")
    G = CompactSet((3, 5, 7, 9, 11))
    for n in (3, 5):
        st = escape_stratify(build_ensemble(1.0, n, 8), G)
        shares = ", ".join(f"m={m}: {st.stratum(m) / st.total:.3f}" for m in range(n + 1))
        print(f"  n = {n}: weight share by escape count {shares}")

    print("\nShare of orbit time spent in [0, 0.1) at beta = 1, digits <= 4:")
    f = smoothed_indicator(0.1)
    for row in equidist_table(1.0, range(2, 11, 2), 4, f):
        print(f"  n = {row.n:2d}: A_n = {row.A_n:.4f}")


if __name__ == "__main__":
    main()
