import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbarucp.gridfn import (
    FAMILIES,
    ComplexGrid,
    Domain,
    GridField,
    RadialProfile,
    SamplingError,
    closed_form,
    integrate,
    make_grid,
    profile_function,
    sample,
    sample_dbar,
    translate,
)


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain.disk(-1.0)
    with pytest.raises(ValueError):
        Domain.annulus(0.5, 0.25)
    d = Domain.annulus(0.25, 0.5)
    assert d.area == pytest.approx(math.pi * (0.25 - 0.0625))
    assert d.contains(np.array([0.3]))[0] and not d.contains(np.array([0.1]))[0]


@pytest.mark.parametrize("domain", [Domain.square(1.0), Domain.disk(1.0), Domain.annulus(0.25, 0.5)])
def test_grid_weights_sum_to_area(domain):
    n = 64 if domain.kind == "square" else 32
    g = make_grid(domain, n)
    assert g.weights.sum() == pytest.approx(domain.area, rel=1e-5)
    assert g.check() is None or g.check()


def test_grid_arrays_read_only():
    g = make_grid(Domain.square(1.0), 16)
    with pytest.raises(ValueError):
        g.nodes[0] = 0
    with pytest.raises(ValueError):
        g.weights[0] = 0


def test_grid_rejects_low_resolution():
    with pytest.raises(ValueError):
        make_grid(Domain.square(1.0), 4)


def test_polar_second_moment():
    # int_{D_1} |z|^2 = pi / 2
    g = make_grid(Domain.disk(1.0), 64)
    f = sample(closed_form("abs-power", 2.0), g)
    assert integrate(f).real == pytest.approx(math.pi / 2, abs=2e-9)


def test_cartesian_image_orientation():
    g = make_grid(Domain.square(1.0), 8)
    img = g.as_image(g.nodes)
    assert np.all(np.diff(img.real, axis=1) > 0)
    assert np.all(np.diff(img.imag, axis=0) > 0)


@pytest.mark.parametrize(
    "name,args",
    [
        ("monomial", (2, 1)),
        ("gaussian", (0.4, 0.1 + 0.2j, 2.0)),
        ("inverse-quadratic", (1.0, 0.5)),
        ("poly-bump", (1.0,)),
        ("std-bump", (0.8, 0.1j)),
        ("exact-l2-u", (0.25,)),
        ("subcritical-u", (0.5,)),
    ],
)
def test_analytic_dbar_matches_finite_differences(name, args):
    f = closed_form(name, *args)
    z = np.array([0.11 + 0.07j, -0.2 + 0.15j, 0.3 - 0.05j])
    assert np.allclose(f.dbar(z), f.dbar_fd(z, 1e-5), rtol=1e-7, atol=1e-9)


def test_annulus_bump_peak_and_support():
    f = closed_form("annulus-bump", 0.25, 0.5)
    assert abs(f(np.array([0.375]))[0]) == pytest.approx(1.0)
    assert f(np.array([0.2, 0.55])).tolist() == [0, 0]


def test_exact_l2_value_at_half():
    # e^{-(ln 2)^{1/4}} with (ln 2)^{1/4} = 0.91244
    u = closed_form("exact-l2-u", 0.25)
    assert u(np.array([0.5]))[0].real == pytest.approx(math.exp(-math.log(2) ** 0.25), rel=1e-14)
    assert u(np.array([0.5]))[0].real == pytest.approx(0.401542, abs=1e-6)


def test_unknown_family():
    with pytest.raises(KeyError):
        closed_form("no-such-family")


def test_sampling_refuses_singular_nodes():
    g = make_grid(Domain.square(1.0), 9)  # odd n puts a node at 0
    with pytest.raises(SamplingError) as exc:
        sample(closed_form("inv-z"), g)
    assert exc.value.nodes.size >= 1


def test_radial_profile_attached_and_consistent():
    g = make_grid(Domain.disk(0.5), 32)
    f = sample(closed_form("exact-l2-u", 0.25), g)
    assert f.profile is not None
    assert f.check_radial(1e-8)


def test_profile_csv_round_trip(tmp_path):
    p = RadialProfile.from_function(lambda r: np.exp(-r) + 1j * r, 1e-3, 1.0, 50)
    path = tmp_path / "p.csv"
    p.to_csv(path)
    q = RadialProfile.from_csv(path)
    assert np.array_equal(p.radii, q.radii) and np.array_equal(p.values, q.values)
    assert path.read_text().splitlines()[0] == "radius,re,im"


def test_profile_csv_header_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("r,value\n0.1,1\n")
    with pytest.raises(ValueError):
        RadialProfile.from_csv(path)


def test_profile_function_dbar():
    f = closed_form("gaussian", 0.5)
    g = profile_function(RadialProfile.from_function(f.radial, 1e-4, 2.0, 800))
    z = np.array([0.3 + 0.2j])
    assert g.dbar(z)[0] == pytest.approx(f.dbar(z)[0], rel=1e-4)


def test_field_arithmetic_requires_same_grid():
    a = sample(closed_form("constant", 1.0), make_grid(Domain.square(1.0), 8))
    b = sample(closed_form("constant", 1.0), make_grid(Domain.square(1.0), 8))
    with pytest.raises(ValueError):
        a + b


def test_registry_covers_gallery_families():
    for name in ("exact-l2-u", "exact-l2-V", "subcritical-u", "subcritical-V", "inv-z", "annulus-bump"):
        assert name in FAMILIES


coef = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@settings(max_examples=30, deadline=None)
@given(a=coef, b=coef)
def test_dbar_is_linear(a, b):
    f, g = closed_form("gaussian", 0.3), closed_form("monomial", 1, 2)
    h = a * f + b * g
    z = np.array([0.1 + 0.2j, -0.3j])
    assert np.allclose(h.dbar(z), a * f.dbar(z) + b * g.dbar(z), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-0.5, 0.5), y=st.floats(-0.5, 0.5))
def test_leibniz_rule(x, y):
    f, g = closed_form("gaussian", 0.4), closed_form("monomial", 0, 1)
    z = np.array([complex(x, y)])
    assert np.allclose((f * g).dbar(z), f.dbar(z) * g(z) + f(z) * g.dbar(z), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(cx=st.floats(-0.5, 0.5), cy=st.floats(-0.5, 0.5))
def test_translate_moves_values(cx, cy):
    c = complex(cx, cy)
    f = closed_form("gaussian", 0.3)
    z = np.array([0.2 - 0.1j])
    assert np.allclose(translate(f, c)(z + c), f(z))
    assert np.allclose(translate(f, c).dbar(z + c), f.dbar(z))


def test_sample_dbar_shape():
    g = make_grid(Domain.square(1.0), 16)
    d = sample_dbar(closed_form("gaussian", 0.3), g)
    assert isinstance(d, GridField) and d.values.shape == (g.size, 1)
    assert isinstance(g, ComplexGrid)


def test_disk_integrals_of_constant_and_odd_function():
    g = make_grid(Domain.disk(1.0), 32)
    assert integrate(sample(closed_form("constant", 1.0), g)).real == pytest.approx(math.pi, rel=1e-5)
    assert abs(integrate(sample(closed_form("monomial", 1, 0), g))) < 1e-12


@pytest.mark.parametrize("a,exact", [(2.0, 8 / 3), (4.0, 112 / 45), (6.0, 96 / 35)])
def test_quadrature_error_halves_under_doubling(a, exact):
    # int over [-1, 1]^2 of (x^2 + y^2)^(a/2), expanded by the binomial rule
    errs = [abs(integrate(sample(closed_form("abs-power", a), make_grid(Domain.square(1.0), n))).real - exact)
            for n in (32, 64)]
    assert errs[1] <= errs[0] / 2


@settings(max_examples=20, deadline=None)
@given(a=coef, b=coef)
def test_integrate_is_linear(a, b):
    g = make_grid(Domain.square(1.0), 16)
    f, h = sample(closed_form("gaussian", 0.3), g), sample(closed_form("monomial", 2, 1), g)
    lhs = integrate(GridField(g, a * f.values + b * h.values))
    assert lhs == pytest.approx(a * integrate(f) + b * integrate(h), abs=1e-12)


def test_grid_integral_matches_radial_quadrature():
    from scipy import integrate as sp

    f = closed_form("gaussian", 0.4)
    ref, _ = sp.quad(lambda s: 2 * math.pi * s * f.radial(s).real, 0, 1)
    g = make_grid(Domain.disk(1.0), 32)
    assert integrate(sample(f, g)).real == pytest.approx(ref, rel=5e-3)
