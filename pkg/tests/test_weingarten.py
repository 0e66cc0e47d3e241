import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from wlab.weingarten import (
    CMC,
    BracketError,
    GeneralElliptic,
    Linear,
    SingularDenominatorError,
    WeingartenError,
    check_ellipticity,
    curvature_pair,
    f_at_zero,
    linear_to_f,
    relation_from_config,
    relation_to_config,
    residual,
    solve_kappa1,
    table_relation,
)

pos = st.floats(0.05, 20.0)


def test_linear_to_f_at_zero_is_umbilic_curvature():
    rel = linear_to_f(1.0, 1.0)
    assert rel.f(0.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    H = rel.f(0.0)
    # umbilic: K = H^2
    assert 2 * H + H * H == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 1e6])
def test_linear_to_f_pointwise_ellipticity(t):
    rel = linear_to_f(1.0, 1.0)
    assert 4 * t * rel.fprime(t) ** 2 < 1


def test_small_b_limit_is_cmc():
    for t in (0.0, 0.5, 3.0):
        assert linear_to_f(1.3, 1e-9).f(t) == pytest.approx(1 / 2.6, rel=1e-7)


def test_fprime_matches_finite_difference():
    rel = linear_to_f(0.7, 2.3)
    for t in (0.1, 1.0, 50.0):
        h = 1e-6 * max(1.0, t)
        fd = (rel.f(t + h) - rel.f(t - h)) / (2 * h)
        assert rel.fprime(t) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("a,b", [(0, 1), (1, 0), (-1, 1), (1, -2)])
def test_linear_to_f_domain(a, b):
    with pytest.raises(WeingartenError):
        linear_to_f(a, b)


@given(a=pos, b=pos, h=st.floats(0.0, 30.0))
def test_linear_to_f_solves_relation(a, b, h):
    # for any (H, K) on the relation with t = H^2 - K >= 0, f(t) = H on the H > 0 branch
    rel = linear_to_f(a, b)
    H = rel.f(0.0) + h * 0.1
    K = (1 - 2 * a * H) / b
    t = H * H - K
    assert t >= -1e-12 * max(1.0, H * H, abs(K))
    assert rel.f(max(t, 0.0)) == pytest.approx(H, rel=1e-10, abs=1e-12)


def test_check_ellipticity_cases():
    res = check_ellipticity(linear_to_f(1.0, 1.0), t_max=1e6)
    assert res.ok and res.margin > 0
    sqrt_rel = GeneralElliptic(lambda t: math.sqrt(t), lambda t: 0.5 / math.sqrt(t))
    res = check_ellipticity(sqrt_rel, 1e6)
    assert not res.ok
    assert res.margin == pytest.approx(0.0, abs=1e-12)
    res = check_ellipticity(CMC(0.5), 1e6)
    assert res.ok and res.margin == 1.0


def test_check_ellipticity_reports_violating_t():
    bad = GeneralElliptic(lambda t: t, lambda t: 1.0)  # 4t < 1 only for t < 1/4
    res = check_ellipticity(bad, 10.0)
    assert not res
    assert res.worst_t == pytest.approx(10.0)


def test_check_ellipticity_preconditions():
    with pytest.raises(WeingartenError):
        check_ellipticity(CMC(1.0), t_max=0.0)
    with pytest.raises(WeingartenError):
        check_ellipticity(CMC(1.0), n_samples=1)


@given(a=pos, b=pos)
def test_linear_relations_always_elliptic(a, b):
    assert check_ellipticity(linear_to_f(a, b), t_max=1e6, n_samples=200).ok


def test_solve_kappa1_examples():
    rel = Linear(1.0, 1.0)
    assert solve_kappa1(rel, 1.0) == 0.0
    k = math.sqrt(2) - 1
    assert solve_kappa1(rel, k) == pytest.approx(k, abs=1e-15)
    assert 1 / k == pytest.approx(1 + math.sqrt(2))
    # general solver agrees at the umbilic point
    assert solve_kappa1(linear_to_f(1.0, 1.0), k) == pytest.approx(k, abs=1e-12)
    assert solve_kappa1(CMC(0.5), 1.0) == 0.0


def test_singular_denominator():
    with pytest.raises(SingularDenominatorError):
        solve_kappa1(Linear(1.0, 2.0), -0.5)


@given(a=pos, b=pos, k2=st.floats(-10, 10))
def test_linear_closed_form_satisfies_relation(a, b, k2):
    assume(abs(a + b * k2) > 1e-3)
    pair = curvature_pair(Linear(a, b), k2)
    assert 2 * a * pair.H + b * pair.K == pytest.approx(1.0, abs=1e-12 * max(1.0, abs(2 * a * pair.H), abs(b * pair.K)))


@given(a=st.floats(0.2, 5.0), b=st.floats(0.2, 5.0), k2=st.floats(-10, 10))
def test_general_solver_matches_linear_branch(a, b, k2):
    # the H > 0 branch of the linear relation is kappa2 > -a/b
    assume(a + b * k2 > 1e-2)
    k1 = solve_kappa1(Linear(a, b), k2)
    assume(k1 + k2 > 0)
    g = solve_kappa1(linear_to_f(a, b), k2)
    assert g == pytest.approx(k1, abs=1e-9 * max(1.0, abs(k1)))


@given(a=st.floats(0.2, 5.0), b=st.floats(0.2, 5.0), k2=st.floats(-10, 10))
def test_general_root_is_unique_and_bracketed(a, b, k2):
    assume(a + b * k2 > 1e-2)
    rel = linear_to_f(a, b)
    k1 = solve_kappa1(rel, k2)
    assert abs(residual(rel, k1, k2)) < 1e-12
    d = 1e-6 * max(1.0, abs(k1))
    assert residual(rel, k1 - d, k2) < 0 < residual(rel, k1 + d, k2)


@pytest.mark.parametrize("k2", [-2.0, -1.5, -1.0])
def test_no_root_below_linear_branch(k2):
    # for kappa2 <= -a/b the H > 0 branch has no solution
    with pytest.raises(BracketError):
        solve_kappa1(linear_to_f(1.0, 1.0), k2)


def test_bracket_failure_is_reported():
    # f grows like t, so g decreases for large |kappa1| and never changes sign
    rel = GeneralElliptic(lambda t: 1.0 + t, lambda t: 1.0)
    with pytest.raises(BracketError):
        solve_kappa1(rel, 0.0)


def test_table_relation_reproduces_linear():
    lin = linear_to_f(1.0, 1.0)
    t = np.linspace(0, 40, 801)
    tab = table_relation(t, [lin.f(x) for x in t])
    assert check_ellipticity(tab, t_max=40).ok
    for k2 in (-0.3, 0.2, 0.9, 2.0):
        assert solve_kappa1(tab, k2) == pytest.approx(solve_kappa1(Linear(1.0, 1.0), k2), abs=1e-5)


def test_table_relation_validation():
    with pytest.raises(WeingartenError):
        table_relation([0, 1, 1], [0, 1, 2])
    with pytest.raises(WeingartenError):
        table_relation([0], [1])


def test_relation_config_round_trip():
    for rel in (Linear(2.0, 0.5), CMC(0.25)):
        assert relation_from_config(relation_to_config(rel)) == rel
    tab = relation_from_config({"kind": "table", "t": [0, 1, 2], "f": [1, 1.1, 1.15]})
    assert f_at_zero(tab) == pytest.approx(1.0)
    with pytest.raises(WeingartenError):
        relation_from_config({"kind": "linear", "a": 1})
    with pytest.raises(WeingartenError):
        relation_from_config({"kind": "quadratic"})


def test_invalid_relations():
    with pytest.raises(WeingartenError):
        Linear(0.0, 1.0)
    with pytest.raises(WeingartenError):
        CMC(0.0)
