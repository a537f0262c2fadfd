from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from recurlab.circle import (AngleTurns, d_metric_finite, jamison_separation_test,
                             perturb_divisibility, unimod_dist, verify_witness,
                             witness_nested_intervals)
from recurlab.seqcore import (gen_divisibility, gen_recursive_q, naturals,
                              triangular_pow2)

# closed forms, computed independently:
#   2 sin(pi/8)  = sqrt(2 - sqrt(2))
#   2 sin(pi/16) = sqrt(2 - sqrt(2 + sqrt(2)))
#   2 sin(pi/3)  = sqrt(3)
TWO_SIN_PI_8 = 0.7653668647301796
TWO_SIN_PI_16 = 0.3901806440322565
SQRT_3 = 1.7320508075688772


def pow2_seq(count=11):
    return gen_divisibility(1, (lambda k: 2), count)


def test_unimod_dist_exact_residues():
    assert unimod_dist(F(1, 2), 1) == unimod_dist(F(1, 2), -1)
    half = unimod_dist(F(1, 2), 1)
    assert half.is_exact and half.lo == 2
    assert unimod_dist(F(1, 6), 1).is_exact and unimod_dist(F(1, 6), 1).lo == 1
    assert unimod_dist(F(1, 3), 3).is_exact and unimod_dist(F(1, 3), 3).lo == 0
    assert unimod_dist(F(5, 3), 1) == unimod_dist(F(2, 3), 1)


def test_unimod_dist_window():
    t = AngleTurns.approx(F(1, 3), F(1, 10000))
    b = unimod_dist(t, 1)
    assert b.lo < SQRT_3 < b.hi and float(b.width) < 0.01
    spans_zero = AngleTurns.approx(F(0), F(1, 10))
    assert unimod_dist(spans_zero, 1).lo == 0
    wide = AngleTurns.approx(F(1, 2), F(1))
    assert unimod_dist(wide, 7).lo == 0 and unimod_dist(wide, 7).hi == 2


def test_d_metric_triangular_64th():
    cert = d_metric_finite(F(1, 64), 0, triangular_pow2(6), K=5)
    assert abs(float(cert.bound.mid) - TWO_SIN_PI_8) < 1e-15
    assert cert.bound.width < F(1, 10**20)
    assert not cert.tail_exact


def test_d_metric_naturals_exact_two():
    cert = d_metric_finite(F(1, 8), 0, naturals(5), K=4)
    assert cert.bound.is_exact and cert.bound.lo == 2


angles = st.fractions(min_value=0, max_value=1, max_denominator=64)


@settings(max_examples=60)
@given(angles, angles, angles)
def test_d_metric_triangle_inequality(t1, t2, t3):
    seq = triangular_pow2(5)
    d13 = d_metric_finite(t1, t3, seq, K=4).bound
    d12 = d_metric_finite(t1, t2, seq, K=4).bound
    d23 = d_metric_finite(t2, t3, seq, K=4).bound
    assert d13.lo <= d12.hi + d23.hi
    assert d_metric_finite(t1, t2, seq, K=4).bound == d_metric_finite(t2, t1, seq, K=4).bound


@given(angles)
def test_d_metric_self_distance_zero(t):
    b = d_metric_finite(t, t, naturals(6), K=5).bound
    assert b.is_exact and b.lo == 0


def test_perturbation_has_exact_tail():
    res = perturb_divisibility(F(1, 3), triangular_pow2(6), m=4)
    assert res.theta.exact == F(1, 3) + F(1, 1024)
    cert = res.certificate
    assert cert.tail_exact
    assert abs(float(cert.bound.mid) - TWO_SIN_PI_16) < 1e-15
    assert cert.bound.width < F(1, 10**20)


def test_perturbation_rejects_general_sequences():
    with pytest.raises(ValueError):
        perturb_divisibility(F(1, 3), gen_recursive_q(3, 5), m=2)


def test_witness_third_on_powers_of_two():
    w = verify_witness(F(1, 3), pow2_seq(), K=10, target=F(1))
    assert w.meets_target
    assert sorted(set(w.residues)) == [F(1, 3), F(2, 3)]
    assert abs(float(w.delta.mid) - SQRT_3) < 1e-15
    c = w.to_certificate()
    assert c.passed and c.to_dict()["kind"] == "rotation-witness"


def test_witness_collapse_detected():
    # 2^10 * (1/1024) lands on an integer: the orbit returns to 1 exactly
    w = verify_witness(F(1, 1024), pow2_seq(), K=10, target=F(1, 100))
    assert w.delta.is_exact and w.delta.lo == 0
    assert not w.meets_target


def test_nested_interval_search_finds_witness():
    search = witness_nested_intervals(pow2_seq(), K=10, delta_target=F(1, 2))
    assert search.found
    cert = search.certificate
    assert cert.meets_target and cert.delta.lo >= F(1, 2)
    assert cert.theta.is_exact
    assert search.trials and all(m < 1 for _, m in search.trials)
    recheck = verify_witness(cert.theta.exact, pow2_seq(), K=10, target=F(1, 2))
    assert recheck.meets_target


def test_nested_interval_budget_guard():
    big = gen_divisibility(1, (lambda k: 3), 30)
    with pytest.raises(ValueError, match="removals"):
        witness_nested_intervals(big, K=29, delta_target=F(1, 2))


def test_jamison_grid_scan_naturals():
    rep = jamison_separation_test(naturals(5001), epsilon=F(7, 4), K=5000, grid=5001)
    assert rep.best_theta == F(1, 3)
    assert abs(float(rep.sup.mid) - SQRT_3) < 1e-12
    assert rep.witness_found            # sqrt(3) < 7/4
    tight = jamison_separation_test(naturals(5001), epsilon=F(17, 10), K=5000, grid=5001)
    assert not tight.witness_found      # sqrt(3) > 17/10


def test_jamison_grid_aliasing_guard():
    with pytest.raises(ValueError, match="alias"):
        jamison_separation_test(naturals(5001), epsilon=F(1), K=5000, grid=100)


def test_jamison_structural_divisibility():
    fast = gen_divisibility(1, (lambda k: 10 ** (k + 1)), 8)
    rep = jamison_separation_test(fast, epsilon=F(1, 100), K=7, grid=0)
    assert rep.witness_found
    assert rep.best_theta == F(1, fast.term(8))
    assert rep.sup.hi < F(1, 10**7)
    with pytest.raises(ValueError, match="divisibility"):
        jamison_separation_test(gen_recursive_q(3, 5), epsilon=F(1), K=4, grid=0)


def test_angle_container():
    with pytest.raises(ValueError):
        AngleTurns()
    with pytest.raises(ValueError):
        AngleTurns.approx(F(1, 2), F(-1))
    assert AngleTurns.of(F(7, 3)).exact == F(1, 3)
    diff = AngleTurns.of(F(1, 4)).minus(AngleTurns.of(F(3, 4)))
    assert diff.exact == F(1, 2)
