import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbarucp import gallery as gal
from dbarucp.gridfn import Domain, closed_form, make_grid, sample, sample_dbar


def test_example_ranges():
    with pytest.raises(ValueError):
        gal.example_exact_l2(0.5)
    with pytest.raises(ValueError):
        gal.example_exact_l2(0.0)
    with pytest.raises(ValueError, match="must be below 2"):
        gal.example_subcritical(1.0, 1.0)
    with pytest.raises(ValueError):
        gal.example_subcritical(-0.1, 1.0)


def test_exact_l2_pointwise_values():
    pair = gal.example_exact_l2(0.25)
    r = 0.25
    L = math.log(1 / r)
    assert pair.u(np.array([r]))[0].real == pytest.approx(math.exp(-L**0.25), rel=1e-14)
    assert pair.V(np.array([r * 1j]))[0].real == pytest.approx(0.25 / (2 * r * L**0.75), rel=1e-14)
    assert pair.domain.radius == 0.5 and pair.ndim == 1


def test_subcritical_pointwise_values():
    pair = gal.example_subcritical(0.5, 1.0)
    assert pair.u(np.array([0.3]))[0].real == pytest.approx(math.exp(-0.3**-0.5), rel=1e-14)
    assert pair.V(np.array([0.3]))[0].real == pytest.approx(0.5 / (2 * 0.3**1.5), rel=1e-14)


def test_product_pointwise_value():
    pair = gal.example_product_2d(0.25)
    u0 = lambda r: math.exp(-math.log(1 / r) ** 0.25)
    Z = np.array([[0.2 + 0j, 0.3j]])
    assert pair.u(Z)[0].real == pytest.approx(u0(0.2) * u0(0.3), rel=1e-14)
    assert pair.ndim == 2 and pair.u.dbar(Z).shape == (1, 2)
    assert pair.metadata["factor"].u.name == "exact-l2-u"


def test_product_zero_set_on_axes():
    pair = gal.example_product_2d(0.25)
    Z = np.array([[0j, 0.3 + 0j], [0.2j, 0j]])
    assert np.all(pair.u(Z) == 0)


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.02, 0.45), th=st.floats(0, 2 * math.pi))
def test_exact_l2_equality_property(r, th):
    pair = gal.example_exact_l2(0.25)
    z = np.array([r * complex(math.cos(th), math.sin(th))])
    an, _, skipped = gal.equality_deviation(pair, z)
    assert skipped == 0 and an < 1e-12


def test_equality_deviation_skips_endpoints():
    pair = gal.example_exact_l2(0.25)
    _, _, skipped = gal.equality_deviation(pair, np.array([0.0, 0.5, 0.2]))
    assert skipped == 2


def test_bidisk_probe_is_fubini_scaled():
    rep, partials = gal.bidisk_l2_probe(0.25)
    area = math.pi * (0.25 - rep.cutoffs**2)
    assert np.allclose(partials, 2 * rep.partials * area)
    assert rep.verdict == "converges"


def test_combinator_refuses_a_bad_pair():
    with pytest.raises(ValueError, match="one-variable bound fails"):
        gal.product_combinator(closed_form("exact-l2-u", 0.25), 0.5 * closed_form("exact-l2-V", 0.25))


def test_combinator_on_subcritical_pair():
    pair = gal.product_combinator(closed_form("subcritical-u", 0.5), closed_form("subcritical-V", 0.5), p=1.0)
    m = pair.metadata
    assert m["one_d_residual"] <= 1e-8 and m["two_d_residual"] <= 1e-8
    # ||W||_1 on D_1 is pi eps / (1 - eps)
    assert m["W_lp"] == pytest.approx(math.pi, rel=1e-10)
    assert m["V_lp"] <= m["V_lp_bound"] * (1 + 1e-6)


def test_combinator_with_zero_function():
    pair = gal.product_combinator(closed_form("constant", 0.0), closed_form("constant", 1.0))
    assert pair.metadata["one_d_residual"] == 0.0
    Z = np.array([[0.5 + 0j, 0.5j]])
    assert pair.u(Z)[0] == 0


def test_combinator_potential_is_cut_to_the_bidisk():
    pair = gal.product_combinator(closed_form("constant", 0.0), closed_form("constant", 1.0))
    Z = np.array([[0.5 + 0j, 0.5j], [0.5 + 0j, 1.5 + 0j], [1.5 + 0j, 1.5j]])
    assert pair.V(Z).tolist() == [2.0, 1.0, 0.0]


def test_slice_restriction():
    pair = gal.example_product_2d(0.25)
    res = gal.line_restriction(pair, slice_value=0.3)
    assert res.kind == "slice" and res.residual < 1e-12
    u0 = closed_form("exact-l2-u", 0.25)
    t = np.array([0.1 + 0.1j])
    assert res.w(t)[0] == pytest.approx(u0(t)[0] * u0(np.array([0.3]))[0])
    with pytest.raises(ValueError):
        gal.line_restriction(pair, slice_value=0.7)


def test_line_restriction_chain_rule_against_differences():
    pair = gal.example_product_2d(0.25)
    res = gal.line_restriction(pair, direction=[0.6, 0.3j])
    assert res.kind == "line" and res.residual <= 1e-12
    t = np.array([0.2 + 0.15j, -0.3 + 0.1j])
    assert np.allclose(res.w.dbar(t), res.w.dbar_fd(t, 1e-5), atol=1e-4)


def test_line_restriction_validation():
    pair = gal.example_product_2d(0.25)
    with pytest.raises(ValueError):
        gal.line_restriction(pair)
    with pytest.raises(ValueError):
        gal.line_restriction(pair, direction=[0, 0])
    with pytest.raises(ValueError):
        gal.line_restriction(closed_form("gaussian", 0.3), direction=[1, 0])


def _holomorphic_setup():
    g = make_grid(Domain.square(1.0), 128)
    u = sample(closed_form("monomial", 2, 0), g)
    return g, u


def test_weak_residual_vanishes_for_holomorphic_polynomial():
    g, u = _holomorphic_setup()
    r = gal.weak_dbar_residual(u, None, gal.standard_bump(0.6, 0.1)).residual
    assert abs(r) < 1e-6


def test_weak_residual_is_linear_in_phi():
    g = make_grid(Domain.square(1.0), 64)
    u = sample(closed_form("gaussian", 0.3), g)
    f = sample_dbar(closed_form("monomial", 1, 1), g)
    p1, p2 = gal.standard_bump(0.5), gal.standard_bump(0.3, 0.2j)
    r1 = gal.weak_dbar_residual(u, f, p1).residual
    r2 = gal.weak_dbar_residual(u, f, p2).residual
    r12 = gal.weak_dbar_residual(u, f, 2 * p1 + p2).residual
    assert r12 == pytest.approx(2 * r1 + r2, rel=1e-12, abs=1e-14)


def test_weak_residual_ladder_sums():
    g, u = _holomorphic_setup()
    res = gal.weak_dbar_residual(u, None, gal.standard_bump(0.6), ladder_ks=(2, 4))
    for k, row in res.ladder.items():
        assert row["A"] + row["B"] == pytest.approx(res.residual, abs=1e-12)


def test_weak_residual_rejects_unsupported_phi():
    g, u = _holomorphic_setup()
    with pytest.raises(ValueError):
        gal.weak_dbar_residual(u, None, closed_form("gaussian", 0.3))


def test_punctured_ladder_for_inverse_z():
    lad = gal.punctured_disk_ladder(closed_form("inv-z"), gal.standard_bump())
    # Stokes: the residual equals -pi phi(0), with phi(0) = 1/e
    assert lad.residual == pytest.approx(-math.pi / math.e, rel=1e-6)
    for row in lad.ladder.values():
        assert row["A"] == pytest.approx(lad.residual, rel=1e-6)
        assert abs(row["B"]) < 1e-5


def test_pairing_value_and_properties():
    res = gal.inv_z_pairing()
    assert res.converged
    assert res.value.real == pytest.approx(-1.15572739, abs=1e-7)
    assert res.value == pytest.approx(res.stokes_value, rel=1e-6)
    assert abs(res.value - res.displayed_target) > 1.0


def test_pairing_doubles_with_phi():
    a = gal.inv_z_pairing(gal.standard_bump())
    b = gal.inv_z_pairing(2 * gal.standard_bump())
    assert b.value == pytest.approx(2 * a.value, rel=1e-12)


def test_pairing_zero_when_phi_vanishes_at_origin():
    res = gal.inv_z_pairing(gal.standard_bump(0.3, 0.5))
    assert res.converged and abs(res.value) < 1e-6 and res.phi0 == 0


def test_pairing_rejects_bad_phi():
    with pytest.raises(ValueError):
        gal.inv_z_pairing(closed_form("gaussian", 0.3))
    with pytest.raises(ValueError):
        gal.inv_z_pairing(gal.standard_bump(0.8, 0.5))
