import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbarucp import norms
from dbarucp.gridfn import Domain, GridField, closed_form, make_grid, sample
from dbarucp.norms import (
    DIVERGES,
    INCONCLUSIVE,
    TENDS_TO_ZERO,
    FlatnessReport,
    WeightField,
    flatness_functional,
    flatness_verdict,
    lp_membership_probe,
    lp_norm,
    vanishing_order_estimate,
)


def test_weight_field_validation():
    g = make_grid(Domain.square(1.0), 8)
    with pytest.raises(ValueError):
        WeightField()
    with pytest.raises(ValueError):
        WeightField(GridField(g, np.zeros(g.size)))
    with pytest.raises(ValueError):
        WeightField(GridField(g, np.ones(g.size)), closed_form("gaussian", 0.3))
    with pytest.raises(ValueError):
        WeightField.constant(g).scaled(-1.0)
    assert np.allclose(WeightField.constant(g, 2.0).scaled(3.0).values, 6.0)


def test_lp_norm_of_constant_on_square():
    g = make_grid(Domain.square(1.0), 16)
    f = sample(closed_form("constant", 3.0), g)
    assert lp_norm(f, 2) == pytest.approx(3.0 * 2.0)  # area 4
    assert lp_norm(f, 1, Domain.disk(0.5)) == pytest.approx(3.0 * g.weights[np.abs(g.nodes) <= 0.5].sum())


@settings(max_examples=25, deadline=None)
@given(c=st.floats(1e-3, 1e3), p=st.floats(0.5, 4.0))
def test_lp_norm_homogeneous(c, p):
    g = make_grid(Domain.disk(1.0), 16)
    f = sample(closed_form("gaussian", 0.4), g)
    assert lp_norm(GridField(g, c * f.values), p) == pytest.approx(c * lp_norm(f, p), rel=1e-12)


def test_closed_form_norm_needs_a_disk():
    with pytest.raises(ValueError):
        lp_norm(closed_form("gaussian", 0.3), 2)
    with pytest.raises(ValueError):
        lp_norm(closed_form("gaussian", 0.3), 2, Domain.square(1.0))
    with pytest.raises(ValueError):
        lp_norm(closed_form("gaussian", 0.3), 0.0, Domain.disk(1.0))


def test_closed_form_norm_of_power():
    # || |z|^a ||_{L2(D1)}^2 = 2 pi / (2a + 2)
    assert lp_norm(closed_form("abs-power", 1.5), 2, Domain.disk(1.0)) ** 2 == pytest.approx(2 * math.pi / 5)
    assert lp_norm(closed_form("subcritical-V", 0.5), 2.0, Domain.disk(1.0)) == math.inf


def test_h1_surrogate_constant_and_polar():
    g = make_grid(Domain.square(1.0), 32)
    assert norms.h1_norm(sample(closed_form("constant", 1.0), g)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        norms.h1_norm(sample(closed_form("constant", 1.0), make_grid(Domain.disk(1.0), 16)))


def test_weighted_norms_with_unit_weight_reduce_to_l2():
    g = make_grid(Domain.square(1.0), 16)
    f = sample(closed_form("gaussian", 0.3), g)
    V = WeightField.constant(g)
    assert norms.weighted_l2_norm(f, V) == pytest.approx(lp_norm(f, 2))
    assert norms.inverse_weighted_l2_norm(f, V) == pytest.approx(lp_norm(f, 2))
    with pytest.raises(ValueError):
        norms.weighted_l2_norm(f, WeightField.constant(make_grid(Domain.square(1.0), 16)))


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.0, 3.0), m=st.integers(0, 10))
def test_flatness_verdict_for_powers(a, m):
    # r^-m int_{D_r} |z|^{2a} = 2 pi r^{2a+2-m} / (2a+2)
    v = flatness_functional(closed_form("abs-power", a), m=m).verdict
    e = 2 * a + 2 - m
    if e > 0.05:
        assert v == TENDS_TO_ZERO
    elif e < -0.05:
        assert v == DIVERGES
    elif e == 0:
        assert v == INCONCLUSIVE


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.0, 3.0), m=st.integers(1, 10))
def test_flatness_nesting(a, m):
    # decay at order m implies decay at every lower order
    u = closed_form("abs-power", a)
    if flatness_functional(u, m=m).verdict == TENDS_TO_ZERO:
        assert all(flatness_functional(u, m=j).verdict == TENDS_TO_ZERO for j in range(m))


def test_flatness_report_invariants():
    rep = flatness_functional(closed_form("abs-power", 1.0), m=2)
    assert np.all(np.diff(rep.radii) < 0) and np.all(rep.values >= 0)
    assert rep.slope == pytest.approx(2.0, abs=1e-6)
    assert rep.to_dict()["verdict"] == TENDS_TO_ZERO
    with pytest.raises(ValueError):
        FlatnessReport(0j, 0, np.array([0.1, 0.2]), np.ones(2), np.zeros(2), INCONCLUSIVE, 0.0, np.zeros(1))


def test_flatness_rejects_bad_inputs():
    with pytest.raises(ValueError):
        flatness_functional(closed_form("abs-power", 1.0), m=-1)
    with pytest.raises(ValueError):
        flatness_functional(closed_form("abs-power", 1.0), radii=[0.1, 0.2])
    with pytest.raises(ValueError):
        flatness_functional(closed_form("gaussian", 0.3, 0.1), radii=[0.5, 0.25, 0.125])
    g = make_grid(Domain.square(1.0), 16)
    with pytest.raises(ValueError):
        flatness_functional(sample(closed_form("gaussian", 0.3), g), radii=[0.5, 0.25, 0.125])


def test_flatness_verdict_rules():
    lr = np.log([0.5, 0.25, 0.125, 0.0625])
    assert flatness_verdict([0, -1, -2, -3], lr) == TENDS_TO_ZERO
    assert flatness_verdict([0, 1, 2, 3], lr) == DIVERGES
    assert flatness_verdict([0, 0, 0, 0], lr) == INCONCLUSIVE
    assert flatness_verdict([0, -math.inf, -math.inf, -math.inf], lr) == TENDS_TO_ZERO
    assert flatness_verdict([0, 1], lr[:2]) == INCONCLUSIVE


def test_flatness_on_sampled_field_matches_closed_form():
    g = make_grid(Domain.square(1.0), 256)
    u = closed_form("abs-power", 1.0)
    radii = norms.dyadic(4)
    a = flatness_functional(sample(u, g), m=2, radii=radii)
    b = flatness_functional(u, m=2, radii=radii)
    # disk masks on a lattice: relative error of order h / r
    assert np.allclose(a.values, b.values, rtol=0.1)
    assert a.verdict == b.verdict


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_vanishing_order_of_power(a):
    assert vanishing_order_estimate(closed_form("abs-power", a)) == pytest.approx(a + 1, abs=1e-6)


def test_vanishing_order_of_flat_function():
    assert vanishing_order_estimate(closed_form("subcritical-u", 0.5)) == "infinite"


def test_membership_probe_verdicts():
    sub = lp_membership_probe(closed_form("subcritical-V", 0.3), 1.0, outer=1.0)
    assert sub.verdict == "converges" and sub.limit == pytest.approx(math.pi * 0.3 / 0.7, rel=1e-10)
    bad = lp_membership_probe(closed_form("subcritical-V", 0.5), 2.0, outer=1.0)
    assert bad.verdict == "diverges" and not bad.limit_converged
    assert np.all(np.diff(sub.partials) >= 0)
    assert set(sub.to_dict()) >= {"p", "verdict", "limit", "partials"}


def test_membership_probe_sampled_weight():
    g = make_grid(Domain.disk(1.0), 32)
    V = WeightField.sampled(closed_form("gaussian", 0.5, 0, 1.0), g)
    rep = lp_membership_probe(WeightField(V.field), 2.0, cutoffs=norms.dyadic(6))
    assert rep.verdict == "converges"


def test_membership_probe_validation():
    with pytest.raises(ValueError):
        lp_membership_probe(closed_form("subcritical-V", 0.3), 0.0)
    with pytest.raises(ValueError):
        lp_membership_probe(closed_form("subcritical-V", 0.3), 1.0, cutoffs=[0.1, 0.2])
