import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbarucp import inequalities as iq
from dbarucp.gridfn import ClosedFormFunction, Domain, GridField, closed_form, make_grid, sample
from dbarucp.norms import WeightField


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_riesz_constant_from_gamma(alpha):
    assert iq.riesz_constant(alpha) == pytest.approx(
        math.pi * 2**alpha * math.gamma(alpha / 2) / math.gamma(1 - alpha / 2), rel=1e-14)


def test_semigroup_constant():
    assert iq.SEMIGROUP_K == pytest.approx(27.50074, abs=1e-5)


@pytest.mark.parametrize("q", [0.5, 4 / 3, 1.9])
def test_kernel_q_norm_at_centre(q):
    # rho = 1 in every direction
    assert iq.kernel_q_norm_at(0j, q) == pytest.approx((2 * math.pi / (2 - q)) ** (1 / q), rel=1e-13)


def test_kernel_q_norm_off_centre_against_quadrature():
    from scipy import integrate, optimize

    # polar coordinates about z, exit radius found by root finding
    z, q = 0.6 + 0.2j, 4 / 3
    exit_r = lambda t: optimize.brentq(lambda s: abs(z + s * np.exp(1j * t)) - 1, 0, 2)
    val, _ = integrate.dblquad(lambda s, t: s ** (1 - q), 0, 2 * math.pi, 0, exit_r, epsabs=1e-11)
    assert iq.kernel_q_norm_at(z, q) == pytest.approx(val ** (1 / q), rel=1e-9)


def test_kernel_q_ceiling_value():
    assert iq.kernel_q_ceiling(4 / 3) == pytest.approx(7.607086303067982, rel=1e-14)
    assert iq.kernel_q_ceiling(4 / 3) == pytest.approx((3 * math.pi * 2 ** (2 / 3)) ** 0.75, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(rho=st.floats(0.0, 0.99), th=st.floats(0, 2 * math.pi), q=st.floats(0.2, 1.9))
def test_kernel_norm_below_ceiling(rho, th, q):
    assert iq.kernel_q_norm_at(rho * complex(math.cos(th), math.sin(th)), q) <= iq.kernel_q_ceiling(q)


def test_kernel_norm_validates_q():
    with pytest.raises(ValueError):
        iq.kernel_q_norm_at(0j, 2.0)


def test_hoelder_needs_p_above_two():
    g = make_grid(Domain.square(1.25), 16)
    f = sample(closed_form("gaussian", 0.3), g)
    with pytest.raises(ValueError):
        iq.hoelder_p_gt2_ratio(f, WeightField.constant(g), 2.0)


def test_hoelder_ratio_below_kernel_norm():
    g = make_grid(Domain.square(1.25), 64)
    f = sample(closed_form("gaussian", 0.3), g)
    res = iq.hoelder_p_gt2_ratio(f, WeightField.constant(g), 4.0)
    assert 0 < res.ratio <= res.kernel_q_norm <= res.ceiling


def test_hls_suite_frozen_small_run():
    rep = iq.run_hls_suite(6, 3, 64)
    assert rep.c0_hat == pytest.approx(1.208784919675991, rel=1e-10)
    assert rep.max_scale_deviation < 1e-13
    assert len(rep.params) == 6 and rep.families == iq.FAMILIES
    assert [p["family"] for p in rep.params] == list(iq.FAMILIES) * 2


def test_hls_suite_deterministic_and_scale_free():
    a = iq.run_hls_suite(4, 11, 32)
    b = iq.run_hls_suite(4, 11, 32)
    c = iq.run_hls_suite(4, 11, 32, v_scale=7.0)
    assert a.to_dict() == b.to_dict()
    assert np.allclose(a.ratios, c.ratios, rtol=1e-13)
    assert c.to_dict()["v_scale"] == 7.0


def test_hls_suite_validation():
    with pytest.raises(ValueError):
        iq.run_hls_suite(0)
    with pytest.raises(ValueError):
        iq.run_hls_suite(2, v_scale=0.0)
    with pytest.raises(ValueError):
        iq.trial_functions(np.random.default_rng(0), "nope")


def test_hls_report_rejects_negative_ratio():
    with pytest.raises(ValueError):
        iq.HLSReport((), [-1.0], [], [], [], 0, 8, 1.0, 2.0)


def test_whls_ratio_scale_invariance():
    g = make_grid(Domain.square(2.0), 32)
    f = sample(closed_form("gaussian", 0.3), g)
    V = WeightField.sampled(closed_form("inverse-quadratic", 0.05) + closed_form("gaussian", 0.4, 0, 2.0), g)
    r = iq.whls_ratio(f, V)
    assert iq.whls_ratio(f, V.scaled(5.0)) == pytest.approx(r, rel=1e-13)
    assert iq.whls_ratio(GridField(g, 3 * f.values), V) == pytest.approx(r, rel=1e-13)


def test_semigroup_residual_small():
    g = make_grid(Domain.square(2.0), 64)
    K, res = iq.semigroup_residual(sample(closed_form("gaussian", 0.3), g), flag=math.inf)
    assert abs(K - iq.SEMIGROUP_K) / iq.SEMIGROUP_K < 0.05 and res < 0.05


def test_split_estimate_holds_with_constant():
    g = make_grid(Domain.square(1.0), 64)
    f = GridField(g, sample(closed_form("gaussian", 0.3), g).modulus)
    for z in (0j, 0.2 + 0.1j):
        node = g.nodes[np.argmin(np.abs(g.nodes - z))]
        est = iq.split_estimate(f, node, 0.25)
        assert est.holds and est.empirical_constant <= iq.SPLIT_CONSTANT


def test_split_estimate_validation():
    g = make_grid(Domain.square(1.0), 16)
    f = sample(closed_form("gaussian", 0.3), g)
    with pytest.raises(ValueError):
        iq.split_estimate(GridField(g, -f.modulus), 0j, 0.1)
    with pytest.raises(ValueError):
        iq.split_estimate(GridField(g, f.modulus), 0j, 0.0)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-1, 2))
def test_smoothstep_range(t):
    v = float(iq.smoothstep(t))
    assert 0 <= v <= 1
    assert 0 <= float(iq.smoothstep_slope(t)) <= 1.5


@pytest.mark.parametrize("r", [0.25, 0.5, 1.0])
def test_cutoff_gradient_bounds(r):
    z = np.linspace(0, 3 * r, 2001).astype(complex)
    eta = iq.eta_cutoff(r)
    assert np.max(2 * np.abs(eta.dbar(z))) <= 1.5 / r * (1 + 1e-12)
    assert eta(np.array([0.99 * r]))[0] == 1 and eta(np.array([2.01 * r]))[0] == 0
    k = 8 / r
    psi = iq.psi_cutoff(k)
    assert np.max(2 * np.abs(psi.dbar(z))) <= 1.5 * k * (1 + 1e-12)
    assert psi(np.array([0.99 / k]))[0] == 0 and psi(np.array([2.01 / k]))[0] == 1


def test_certificate_params_enforce_k():
    with pytest.raises(ValueError):
        iq.CertificateParams.build(0.5, 7.9, closed_form("constant", 1.0), grid_n=32)
    P = iq.CertificateParams.build(0.5, 8, closed_form("constant", 1.0), grid_n=32)
    # ||1_{D_r} + r/(1+|z|^2)||^2 on the plane: lattice part plus exact tail
    assert P.V_l2_sq > math.pi * 0.25 / 1.25 and P.C_r > 0


def test_certificate_step_licensing():
    P = iq.CertificateParams.build(0.5, 8, closed_form("constant", 1.0), grid_n=64)
    rep = iq.ucp_certificate(closed_form("annulus-bump"), P, 2, 1.0)
    names = [s.name for s in rep.steps]
    assert names[:5] == ["reconstruction", "whls", "smallness", "split-exact", "mm-exact"]
    assert not rep.step("split-displayed").licensed and not rep.step("mm-displayed").licensed
    for n in ("reconstruction", "whls", "split-exact"):
        assert rep.step(n).holds
    with pytest.raises(KeyError):
        rep.step("nope")
    d = rep.to_dict()
    assert {s["name"] for s in d["steps"]} == set(names)


def test_certificate_non_admissible_steps_unlicensed():
    P = iq.CertificateParams.build(0.5, 8, closed_form("constant", 1e-3), grid_n=64, augment=False)
    rep = iq.ucp_certificate(closed_form("annulus-bump"), P, 1, 1.0)
    assert not rep.admissible
    assert not any(rep.step(n).licensed for n in ("B-substitution", "nn", "half-disk"))


def test_certificate_needs_dbar_rule():
    P = iq.CertificateParams.build(0.5, 8, closed_form("constant", 1.0), grid_n=32)
    with pytest.raises(ValueError):
        iq.ucp_certificate(ClosedFormFunction("no-dbar", {}, lambda z: z, None), P, 1, 1.0)


def test_chain_step_slack():
    s = iq.ChainStep("x", 1.0, 2.0)
    assert s.holds and s.slack == 2.0
    assert not iq.ChainStep("y", 2.0, 1.0).holds
    assert iq.ChainStep("z", 0.0, 1.0).slack == math.inf
