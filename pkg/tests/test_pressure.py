import itertools
import math

import mpmath
import numpy as np
import pytest

from renyi_ldp.errors import DomainError
from renyi_ldp.pressure import (
    birkhoff_sum,
    block_bernoulli,
    distortion_modulus,
    partition_sum,
    power_sum,
    pressure_bracket,
    word_tail_bound,
    zeta_tail_bound,
)
from renyi_ldp.renyi import word_matrix
from renyi_ldp.shift import enumerate_words


def test_birkhoff_sums():
    assert birkhoff_sum(1.0, "1") == 0
    assert math.isclose(birkhoff_sum(1.0, "2"), -math.log(6.854101966249685), rel_tol=1e-12)
    assert math.isclose(birkhoff_sum(0.5, "2"), 0.5 * birkhoff_sum(1.0, "2"), rel_tol=1e-14)


def test_distortion_modulus():
    for p in (1, 2, 7):
        assert math.isclose(distortion_modulus(1.0, 1, p) if p == 1 else max(2 * math.log((q + 1) / q) for q in range(1, p + 1)), distortion_modulus(1.0, 1, p))
    assert distortion_modulus(1.0, 1, 5) <= 2 * math.log(2) + 1e-15
    assert distortion_modulus(0.0, 4, 3) == 0
    D = distortion_modulus(1.0, 2, 5)
    oracle = max(2 * math.log((word_matrix(w).c + word_matrix(w).d) / word_matrix(w).d) for w in enumerate_words(2, 5))
    assert 0 < D <= 4 * math.log(2) and math.isclose(D, oracle, rel_tol=1e-12)


def test_partition_sum_small():
    Z = partition_sum(1.0, 1, 3)
    assert math.isclose(Z.lower, 1 + 0.1458980337503155 + 0.0717967697244908, rel_tol=1e-12)
    assert math.isclose(Z.tail, 1 / 3)
    assert not Z.divergent


def test_partition_sum_monotone_in_truncation():
    vals = [partition_sum(1.0, 1, M) for M in (10, 100, 1000)]
    assert vals[0].lower < vals[1].lower < vals[2].lower
    assert vals[0].tail > vals[1].tail > vals[2].tail
    assert all(v.lower <= vals[-1].lower <= v.upper for v in vals)


def test_partition_sum_diverges_at_half():
    Z = partition_sum(0.5, 1, 1000)
    assert Z.divergent and math.isinf(Z.upper)
    # |T'(xi_p)|^(-1/2) = 1 - xi_p lies between 1/(p+1) and 1/p
    assert math.log(1001) - 1 < Z.lower < 1 + math.log(1000)


def test_tail_bounds_dominate_brute_force():
    assert math.isinf(zeta_tail_bound(1.0, 10))
    brute = math.fsum(p**-2.0 for p in range(11, 200_000))
    assert brute <= zeta_tail_bound(2.0, 10)
    # words of length 2 with some digit above 4, digits up to 400
    beta, M = 1.0, 4
    brute = math.fsum((p * q) ** -2.0 for p in range(1, 401) for q in range(1, 401) if max(p, q) > M)
    assert brute <= word_tail_bound(beta, 2, M)
    assert math.isclose(power_sum(2.0, 3), 1 + 1 / 4 + 1 / 9)


def _bracket_oracle(beta, n, M):
    """Cylinder endpoint sums with exact integers, summed in mpmath."""
    sup = inf = mpmath.mpf(0)
    for w in itertools.product(range(1, M + 1), repeat=n):
        A = word_matrix(w)
        sup += mpmath.mpf(A.d) ** (-2 * beta)
        inf += mpmath.mpf(A.c + A.d) ** (-2 * beta)
    return float(mpmath.log(inf) / n), sup


def test_pressure_bracket_matches_oracle():
    br = pressure_bracket(1.0, 2, 6)
    lo, sup = _bracket_oracle(1.0, 2, 6)
    assert math.isclose(br.lo, lo, rel_tol=1e-12)
    assert math.isclose(br.hi, float(mpmath.log(sup + br.tail) / 2), rel_tol=1e-12)


def test_pressure_bracket_beta_one_contains_zero():
    br = pressure_bracket(1.0, 1, 10**4)
    assert 0 in br


def test_pressure_bracket_nesting_beta_08():
    b2 = pressure_bracket(0.8, 2, 200)
    b3 = pressure_bracket(0.8, 3, 200)
    assert b2.width <= 0.8
    assert b2.lo <= b3.lo and b3.hi <= b2.hi


def test_pressure_bracket_hi_nonincreasing():
    his = [pressure_bracket(1.0, n, 30).hi for n in (1, 2, 3)]
    assert all(b <= a + 1e-12 for a, b in zip(his, his[1:]))


def test_pressure_bracket_divergent():
    br = pressure_bracket(0.4, 2, 10)
    assert br.divergent and math.isinf(br.hi) and math.isfinite(br.lo)


def test_block_bernoulli_neutral_point():
    st = block_bernoulli(1.0, [(1,)], P_ref=0.25)
    assert st.entropy_rate == 0
    assert st.mean_potential == 0 and st.mean_potential_upper == 0
    assert st.F_value == -0.25


def test_block_bernoulli_two_words():
    st = block_bernoulli(1.0, [(1,), (2,)])
    assert st.entropy_rate > 0
    assert st.F_value <= 0
    assert st.mean_potential <= st.mean_potential_upper


def test_block_bernoulli_against_bracket():
    words = list(enumerate_words(2, 3))
    st = block_bernoulli(0.8, words)
    br = pressure_bracket(0.8, 2, 3)
    assert st.free_energy <= br.hi + 1e-12
    # the inequality behind the block construction
    assert 2 * st.free_energy >= st.log_sup_sum - st.distortion - 1e-12


def test_block_bernoulli_mean_bracket_encloses_quadrature():
    """The certified mean-potential bracket must hold the value obtained by
    iterating the block IFS on a fine grid (independent quadrature)."""
    words = [(1,), (2,), (3,)]
    st = block_bernoulli(1.0, words)
    q = st.probabilities
    mats = [word_matrix(w) for w in words]
    y = np.linspace(0, 1, 20001)
    dens = np.ones_like(y)
    # push the uniform law through the IFS many times via sample points
    pts = np.linspace(0, 1, 2001)
    wts = np.full(len(pts), 1 / len(pts))
    for _ in range(12):
        pts = np.concatenate([(M.a * pts + M.b) / (M.c * pts + M.d) for M in mats])
        wts = np.concatenate([wts * qi for qi in q])
        order = np.argsort(pts)
        pts, wts = pts[order], wts[order]
        # compress to keep the sample small
        bins = np.minimum((pts * 4000).astype(int), 3999)
        s = np.bincount(bins, weights=wts, minlength=4000)
        m = np.bincount(bins, weights=wts * pts, minlength=4000)
        keep = s > 0
        pts, wts = m[keep] / s[keep], s[keep]
    val = sum(qi * np.sum(wts * -2.0 * np.log(M.c * pts + M.d)) for qi, M in zip(q, mats))
    assert st.mean_potential - 1e-6 <= val <= st.mean_potential_upper + 1e-6
    del y, dens


def test_block_bernoulli_validation():
    with pytest.raises(DomainError):
        block_bernoulli(1.0, [])
    with pytest.raises(DomainError):
        block_bernoulli(1.0, [(1,), (1, 2)])
    with pytest.raises(DomainError):
        block_bernoulli(1.0, [(1,), (1,)])
