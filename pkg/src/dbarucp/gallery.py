"""
Explicit example pairs (u, V) with |dbar u| = V |u| or <=, and the devices
built on them: the product of two one-variable pairs, restriction to lines
and slices, weak-form residuals, and the 1/z pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gridfn import (
    ClosedFormFunction,
    Domain,
    GridField,
    _gauss_log_radial,
    closed_form,
    make_grid,
    sample,
)
from .inequalities import smoothstep, smoothstep_slope
from .norms import lp_norm

EXAMPLES = ("exact-l2", "subcritical", "product-2d", "inv-z")

# pointwise checks skip points this close to the origin or to the log endpoint
ORIGIN_EXCLUSION = 1e-6
ENDPOINT_EXCLUSION = 1e-3


@dataclass(frozen=True, eq=False)
class ExamplePair:
    u: ClosedFormFunction
    V: ClosedFormFunction
    domain: Domain
    metadata: dict = field(default_factory=dict)

    @property
    def ndim(self):
        return self.u.ndim

    def describe(self):
        meta = {k: v for k, v in self.metadata.items() if not callable(v)}
        return {"u": self.u.describe(), "V": self.V.describe(), "domain": self.domain.to_dict(), "metadata": meta}


# ---------------------------------------------------------------------------
# one-variable pairs


def example_exact_l2(eps: float = 0.25) -> ExamplePair:
    """u = exp(-(-ln|z|)^eps), V = eps / (2|z| (-ln|z|)^(1-eps)) on D_{1/2}."""
    eps = float(eps)
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    u = closed_form("exact-l2-u", eps)
    V = closed_form("exact-l2-V", eps)
    meta = {
        "example": "exact-l2",
        "eps": eps,
        "relation": "equality",
        "zero_set": "origin only",
        "V_in_Lp": {"2": True, "2.5": False},
        "flatness": {"2": "tends-to-zero", "3": "diverges"},
        "endpoint_radius": 0.5,
    }
    return ExamplePair(u, V, Domain.disk(0.5), meta)


def example_subcritical(eps: float = 0.5, p: float = 1.0) -> ExamplePair:
    """u = exp(-|z|^-eps), V = eps / (2|z|^(eps+1)); V in L^p(D_1) when (eps+1) p < 2."""
    eps, p = float(eps), float(p)
    if not eps > 0 or not 0 < p < 2:
        raise ValueError("need eps > 0 and 0 < p < 2")
    if not (eps + 1) * p < 2:
        raise ValueError(f"(eps+1)*p = {(eps + 1) * p:g} must be below 2")
    u = closed_form("subcritical-u", eps)
    V = closed_form("subcritical-V", eps)
    meta = {
        "example": "subcritical",
        "eps": eps,
        "p": p,
        "relation": "equality",
        "flat_at_origin": True,
        "V_in_Lp": {str(p): True},
        "flatness": {str(m): "tends-to-zero" for m in range(11)},
    }
    return ExamplePair(u, V, Domain.disk(1.0), meta)


# ---------------------------------------------------------------------------
# two variables


def _pair_eval(fn1, fn2):
    def ev(Z):
        Z = np.asarray(Z, complex)
        return fn1(Z[..., 0]) * fn2(Z[..., 1])

    return ev


def _product_dbar(w1, w2):
    """Stack (dbar_1 u, dbar_2 u) for u = w1(z1) w2(z2)."""

    def dbar(Z):
        Z = np.asarray(Z, complex)
        a, b = Z[..., 0], Z[..., 1]
        return np.stack([w1.dbar(a) * w2(b), w1(a) * w2.dbar(b)], axis=-1)

    return dbar


def dbar_modulus_2d(u: ClosedFormFunction, Z):
    """(|dbar_1 u|^2 + |dbar_2 u|^2)^(1/2)."""
    d = np.asarray(u.dbar(Z))
    return np.sqrt(np.sum(np.abs(d) ** 2, axis=-1))


def example_product_2d(eps: float = 0.25) -> ExamplePair:
    """u(z1, z2) = u0(z1) u0(z2) on the bidisk D_{1/2} x D_{1/2}.

    V = (eps/2) (|z1|^-2 L1^(2eps-2) + |z2|^-2 L2^(2eps-2))^(1/2), Lj = -ln|zj|,
    which is the Euclidean combination of the one-variable potentials.
    """
    base = example_exact_l2(eps)
    u0, V0 = base.u, base.V
    u = ClosedFormFunction("product-2d-u", {"eps": eps}, _pair_eval(u0, u0), _product_dbar(u0, u0),
                           singular=(), ndim=2)

    def V(Z):
        Z = np.asarray(Z, complex)
        a, b = np.abs(Z[..., 0]), np.abs(Z[..., 1])
        return np.sqrt(V0.radial(a) ** 2 + V0.radial(b) ** 2)

    Vf = ClosedFormFunction("product-2d-V", {"eps": eps}, V, ndim=2)
    meta = {
        "example": "product-2d",
        "eps": eps,
        "relation": "equality",
        "zero_set": "{z1 = 0} or {z2 = 0}",
        "V_in_Lp": {"2": True, "2.5": False},
        "factor": base,
    }
    return ExamplePair(u, Vf, Domain.disk(0.5), meta)


def bidisk_l2_probe(eps: float = 0.25, cutoffs=None):
    """Partial integrals of V^2 for the product example on the bidisk.

    V^2 = V0(z1)^2 + V0(z2)^2, so the bidisk integral is
    2 * ||V0||^2_{L2(D_1/2 minus D_c)} * |D_1/2 minus D_c| by Fubini; the
    probe verdict follows the one-variable rule.
    """
    from .norms import lp_membership_probe

    base = example_exact_l2(eps)
    rep = lp_membership_probe(base.V, 2.0, cutoffs, outer=0.5)
    area = math.pi * (0.25 - rep.cutoffs**2)
    partials = 2 * rep.partials * area
    return rep, partials


def product_combinator(w: ClosedFormFunction, W: ClosedFormFunction, p: float = 1.0, n: int = 24,
                       tol: float = 1e-8, seed: int = 0) -> ExamplePair:
    """u(z1, z2) = w(z1) w(z2) with V = W(z1) chi_D1(z2) + W(z2) chi_D1(z1).

    The one-variable bound |dbar w| <= W |w| is verified on a polar grid of D_1
    first; the combinator refuses when it fails beyond ``tol``.  Functions
    whose support is not inside D_1 are used only on D_1 x D_1.  The residual
    report (worst 1D and 2D excess, L^p norms of W and V) lands in metadata.
    """
    if w.dbar is None:
        raise ValueError("w needs an analytic d-bar rule")
    g1 = make_grid(Domain.annulus(1e-3, 1.0 - 1e-9), n, 2 * n)
    z = g1.nodes
    with np.errstate(all="ignore"):
        lhs = np.abs(w.dbar(z))
        rhs = np.abs(np.asarray(W(z))) * np.abs(w(z))
    excess = float(np.max(np.where(np.isfinite(lhs - rhs), lhs - rhs, 0.0)))
    if excess > tol:
        raise ValueError(f"one-variable bound fails: max(|dbar w| - W|w|) = {excess:.3g}")

    def Vf(Z):
        Z = np.asarray(Z, complex)
        a, b = Z[..., 0], Z[..., 1]
        chi_a = (np.abs(a) < 1).astype(float)
        chi_b = (np.abs(b) < 1).astype(float)
        with np.errstate(all="ignore"):
            Wa = np.where(chi_b > 0, np.abs(np.asarray(W(a))), 0.0)
            Wb = np.where(chi_a > 0, np.abs(np.asarray(W(b))), 0.0)
        return Wa * chi_b + Wb * chi_a

    u = ClosedFormFunction("product", {"w": w.describe()}, _pair_eval(w, w), _product_dbar(w, w), ndim=2)
    Vc = ClosedFormFunction("product-V", {"W": W.describe()}, Vf, ndim=2)

    rng = np.random.default_rng(seed)
    Z = _random_bidisk(rng, 2000, 1e-3, 1.0 - 1e-9)
    with np.errstate(all="ignore"):
        d2 = dbar_modulus_2d(u, Z) - Vf(Z) * np.abs(u(Z))
    two_d = float(np.max(np.where(np.isfinite(d2), d2, -np.inf)))

    # (a + b)^p <= 2^(p-1) (a^p + b^p) and |D_1| = pi give ||V||_p^p <= 2^p pi ||W||_p^p
    w_lp = _radial_lp(W, p)
    V_lp = _bidisk_lp(Vf, W, p, rng)
    meta = {
        "example": "product",
        "relation": "inequality",
        "p": p,
        "one_d_residual": excess,
        "two_d_residual": two_d,
        "W_lp": w_lp,
        "V_lp": V_lp,
        "V_lp_bound": float((2 ** (p - 1) * 2 * math.pi * w_lp**p) ** (1 / p)),
    }
    return ExamplePair(u, Vc, Domain.disk(1.0), meta)


def _random_bidisk(rng, n, r_min, r_max):
    r = np.sqrt(rng.uniform(r_min**2, r_max**2, (n, 2)))
    th = rng.uniform(0, 2 * math.pi, (n, 2))
    return r * np.exp(1j * th)


def _radial_lp(W, p):
    if W.is_radial:
        return lp_norm(W, p, Domain.disk(1.0))
    g = make_grid(Domain.annulus(1e-6, 1.0), 96)
    return lp_norm(sample(W, g), p)


def _bidisk_lp(Vf, W, p, rng, n=200000):
    """||V||_p on D_1 x D_1.

    For radial W the integrand depends on (|z1|, |z2|) only, so a tensor
    log-radial Gauss rule (2 pi r dr per factor) is exact up to quadrature
    error; otherwise a Monte Carlo estimate is returned.
    """
    if W.is_radial:
        r, w = _gauss_log_radial(1e-12, 1.0, 384)
        w = 2 * math.pi * w
        with np.errstate(all="ignore"):
            Wr = np.abs(np.asarray(W.radial(r)))
        V = Wr[:, None] + Wr[None, :]
        return float(np.sum(w[:, None] * w[None, :] * V**p) ** (1 / p))
    Z = _random_bidisk(rng, n, 0.0, 1.0)
    with np.errstate(all="ignore"):
        v = Vf(Z) ** p
    v = v[np.isfinite(v)]
    return float((math.pi**2 * v.mean()) ** (1 / p))


# ---------------------------------------------------------------------------
# restriction


@dataclass
class Restriction:
    w: ClosedFormFunction
    potential: Optional[Callable]
    residual: float
    kind: str


def line_restriction(u, direction=None, slice_value=None, V: Optional[ClosedFormFunction] = None,
                     radius: float = 0.45, n: int = 32, domain: Optional[Domain] = None) -> Restriction:
    """Restrict a function of (z1, z2) to a slice z2 = c or a complex line tau -> tau z.

    For a slice the induced bound is |dbar w| <= V(., c) |w| (needs V).  For a
    line through 0 it is |dbar w(tau)| <= |z| |dbar u(tau z)|, which follows from
    dbar_tau u(tau z) = sum_j conj(z_j) dbar_j u(tau z).  The bound is checked
    on a polar grid of radius ``radius`` and the worst excess returned.
    """
    pair = u if isinstance(u, ExamplePair) else None
    if pair is not None:
        u, V = pair.u, pair.V if V is None else V
        domain = pair.domain if domain is None else domain
    if u.ndim != 2:
        raise ValueError("line restriction needs a function of two variables")
    g = make_grid(Domain.annulus(1e-3, radius), n, 2 * n)
    t = g.nodes
    if slice_value is not None:
        c = complex(slice_value)
        if domain is not None and not domain.contains(c):
            raise ValueError("slice value outside the domain")
        stack = lambda a: np.stack([np.asarray(a, complex), np.full(np.shape(a), c)], axis=-1)
        w = ClosedFormFunction("slice", {"c": c}, lambda a: u(stack(a)), lambda a: u.dbar(stack(a))[..., 0])
        pot = None if V is None else (lambda a: V(stack(a)))
        with np.errstate(all="ignore"):
            lhs = np.abs(w.dbar(t))
            rhs = np.inf if pot is None else np.abs(pot(t)) * np.abs(w(t))
        return Restriction(w, pot, float(np.max(lhs - rhs)), "slice")
    if direction is None:
        raise ValueError("give a direction or a slice value")
    d = np.asarray(direction, complex)
    if d.shape != (2,) or not np.any(d):
        raise ValueError("direction must be a nonzero complex 2-vector")
    line = lambda tau: np.asarray(tau, complex)[..., None] * d
    w = ClosedFormFunction(
        "line", {"direction": [[x.real, x.imag] for x in d]},
        lambda tau: u(line(tau)),
        lambda tau: np.sum(np.conj(d) * u.dbar(line(tau)), axis=-1),
    )
    norm = float(np.linalg.norm(d))
    with np.errstate(all="ignore"):
        lhs = np.abs(w.dbar(t))
        rhs = norm * dbar_modulus_2d(u, line(t))
    return Restriction(w, None, float(np.max(lhs - rhs)), "line")


# ---------------------------------------------------------------------------
# pointwise equality checks


def sample_annulus_points(r_in, r_out, n_r=12, n_t=16):
    r = np.linspace(r_in, r_out, n_r)
    th = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def _excluded(z, pair):
    r = np.abs(z)
    out = r < ORIGIN_EXCLUSION
    end = pair.metadata.get("endpoint_radius")
    if end is not None:
        out |= np.abs(1 - r / end) < ENDPOINT_EXCLUSION
    return out


def equality_deviation(pair: ExamplePair, z=None, fd_step: float = 1e-4):
    """Max relative deviation of |dbar u| from V|u|: (analytic, finite difference, skipped)."""
    if pair.ndim == 2:
        return _equality_deviation_2d(pair, z, fd_step)
    if z is None:
        z = sample_annulus_points(0.05, 0.95 * pair.domain.radius)
    z = np.asarray(z, complex)
    skip = _excluded(z, pair)
    z = z[~skip]
    ref = np.abs(pair.V(z)) * np.abs(pair.u(z))
    an = np.abs(np.abs(pair.u.dbar(z)) - ref) / ref
    fd = np.abs(np.abs(pair.u.dbar_fd(z, fd_step)) - ref) / ref
    return float(an.max()), float(fd.max()), int(skip.sum())


def _equality_deviation_2d(pair, Z, step):
    if Z is None:
        a = sample_annulus_points(0.05, 0.45, 6, 8)
        A, B = np.meshgrid(a, a)
        Z = np.stack([A.ravel(), B.ravel()], axis=-1)
    Z = np.asarray(Z, complex)
    skip = (np.abs(Z) < ORIGIN_EXCLUSION).any(axis=-1)
    Z = Z[~skip]
    ref = pair.V(Z) * np.abs(pair.u(Z))
    an = np.abs(dbar_modulus_2d(pair.u, Z) - ref) / ref
    comps = []
    for j in range(2):
        e = np.zeros(2, complex)
        e[j] = 1
        fx = (pair.u(Z + step * e) - pair.u(Z - step * e)) / (2 * step)
        fy = (pair.u(Z + 1j * step * e) - pair.u(Z - 1j * step * e)) / (2 * step)
        comps.append(0.5 * (fx + 1j * fy))
    fdm = np.sqrt(np.abs(comps[0]) ** 2 + np.abs(comps[1]) ** 2)
    fd = np.abs(fdm - ref) / ref
    return float(an.max()), float(fd.max()), int(skip.sum())


# ---------------------------------------------------------------------------
# weak formulation


def cutoff_ladder_profile(inner=0.45, outer=1.0):
    """eta = 1 on D_inner, 0 outside D_outer, cubic in between; |grad eta| = 1.5/(outer-inner)."""
    w = outer - inner

    def val(r):
        return 1 - smoothstep((np.asarray(r) - inner) / w)

    def slope(r):
        return -smoothstep_slope((np.asarray(r) - inner) / w) / w

    return val, slope


def _radial_scaled_cutoff(k, val, slope):
    def ev(z):
        return val(k * np.abs(np.asarray(z))) + 0j

    def dbar(z):
        z = np.asarray(z, complex)
        r = np.abs(z)
        with np.errstate(all="ignore"):
            out = k * slope(k * r) * z / (2 * r)
        return np.where(r > 0, out, 0)

    return ClosedFormFunction(f"eta_{k:g}", {"k": k}, ev, dbar)


@dataclass
class WeakResidual:
    residual: complex
    ladder: dict


def weak_dbar_residual(u: GridField, f: Optional[GridField], phi: ClosedFormFunction,
                       ladder_ks=(), u_function: Optional[ClosedFormFunction] = None) -> WeakResidual:
    """int u dbar(phi) + int f phi over u's grid.

    ``ladder_ks`` adds the split int u dbar(eta_k phi) + int u dbar((1-eta_k) phi)
    = A_k + B_k for each k, the two pieces of the removable-singularity
    argument.
    """
    if phi.support is None:
        raise ValueError("test function must be compactly supported")
    if phi.dbar is None:
        raise ValueError("test function needs an analytic d-bar rule")
    g = u.grid
    sup = phi.support
    dom = g.domain
    if dom.kind != "square" and sup.radius + abs(sup.center - dom.center) > dom.radius * (1 + 1e-12):
        raise ValueError("test function support leaves the grid domain")
    w = g.weights
    z = g.nodes
    dphi = np.asarray(phi.dbar(z))
    uv = u.values[:, 0]
    res = np.sum(w * uv * dphi)
    if f is not None:
        res += np.sum(w * f.values[:, 0] * np.asarray(phi(z)))
    ladder = {}
    val, slope = cutoff_ladder_profile()
    for k in ladder_ks:
        ek = _radial_scaled_cutoff(k, val, slope)
        d_in = ek.dbar(z) * phi(z) + ek(z) * dphi
        A = complex(np.sum(w * uv * d_in))
        B = complex(np.sum(w * uv * (dphi - d_in)))
        disk = np.abs(z) < 1.0 / k
        ladder[k] = {"A": A, "B": B, "u_l2_inner": float(np.sqrt(np.sum(w[disk] * np.abs(uv[disk]) ** 2)))}
    return WeakResidual(complex(res), ladder)


def _split_annulus_grids(breaks, per_log_unit, ntheta):
    """Polar grids on consecutive annuli between sorted radii, so kinks fall on panel ends."""
    grids = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nr = max(8, 8 * math.ceil(per_log_unit * math.log(b / a) / 8))
        grids.append(make_grid(Domain.annulus(a, b), nr, ntheta))
    return grids


def punctured_disk_ladder(u: ClosedFormFunction, phi: ClosedFormFunction, f: Optional[ClosedFormFunction] = None,
                          ks=(4, 8, 16, 32), inner: float = 1e-6, per_log_unit: int = 64,
                          ntheta: int = 64) -> WeakResidual:
    """Weak residual and the A_k / B_k split for closed-form u on the punctured unit disk.

    A_k = int u dbar(eta_k phi), B_k = int u dbar((1 - eta_k) phi) + int f phi.
    The quadrature breaks at every cutoff transition radius.
    """
    if phi.support is None or phi.dbar is None:
        raise ValueError("test function must be compactly supported with an analytic d-bar")
    sup = phi.support
    if abs(sup.center) + sup.radius > 1 + 1e-12:
        raise ValueError("test function must be supported in D_1")
    lo, hi = 0.45, 1.0
    breaks = {inner, 1.0, abs(sup.center) + sup.radius}
    for k in ks:
        breaks.update((lo / k, hi / k))
    breaks = np.array(sorted(b for b in breaks if inner <= b <= 1.0))
    grids = _split_annulus_grids(breaks, per_log_unit, ntheta)
    val, slope = cutoff_ladder_profile(lo, hi)
    res = 0j
    ladder = {k: {"A": 0j, "B": 0j, "u_l2_inner": 0.0} for k in ks}
    for g in grids:
        z, w = g.nodes, g.weights
        with np.errstate(all="ignore"):
            uv = np.asarray(u(z))
        dphi = np.asarray(phi.dbar(z))
        fphi = 0 if f is None else np.asarray(f(z)) * np.asarray(phi(z))
        res += np.sum(w * (uv * dphi + fphi))
        for k in ks:
            ek = _radial_scaled_cutoff(k, val, slope)
            d_in = ek.dbar(z) * phi(z) + ek(z) * dphi
            ladder[k]["A"] += np.sum(w * uv * d_in)
            ladder[k]["B"] += np.sum(w * (uv * (dphi - d_in) + fphi))
            disk = np.abs(z) < 1.0 / k
            ladder[k]["u_l2_inner"] += float(np.sum(w[disk] * np.abs(uv[disk]) ** 2))
    for k in ks:
        ladder[k]["A"] = complex(ladder[k]["A"])
        ladder[k]["B"] = complex(ladder[k]["B"])
        ladder[k]["u_l2_inner"] = math.sqrt(ladder[k]["u_l2_inner"])
    return WeakResidual(complex(res), ladder)


def standard_bump(radius=1.0, center=0j):
    return closed_form("std-bump", radius, center)


@dataclass
class PairingResult:
    value: complex
    ladder: list
    extrapolations: list
    converged: bool
    phi0: complex

    @property
    def displayed_target(self):
        """-pi i phi(0), the value displayed for the pairing."""
        return -math.pi * 1j * self.phi0

    @property
    def stokes_value(self):
        """-pi phi(0): Stokes with d(g dz) = dbar g  dzbar ^ dz = 2i dbar g dx ^ dy."""
        return -math.pi * self.phi0


def inv_z_pairing(phi: Optional[ClosedFormFunction] = None, eps_ladder=None, per_log_unit: int = 96,
                  ntheta: int = 128, tol: float = 1e-5) -> PairingResult:
    """int_{D_1} dbar(phi)/z dv via annuli eps < |z| < 1 and Richardson in eps^2.

    The excluded disk contributes O(eps^2) for smooth phi, so each halving of
    eps is combined as (4 I(eps/2) - I(eps)) / 3.  ``converged`` is False when
    the last two extrapolated values differ by more than ``tol`` times the
    integral of |dbar(phi)/z|.
    """
    phi = standard_bump() if phi is None else phi
    if phi.support is None or phi.dbar is None:
        raise ValueError("test function must be compactly supported with an analytic d-bar")
    sup = phi.support
    if abs(sup.center) + sup.radius > 1 + 1e-12:
        raise ValueError("test function must be supported in D_1")
    eps_ladder = 2.0 ** -np.arange(3, 9) if eps_ladder is None else np.asarray(eps_ladder, float)
    vals = []
    scale = 0.0
    for e in eps_ladder:
        # radial nodes grow with the log width so the density stays fixed
        nr = 8 * math.ceil(per_log_unit * math.log(1 / e) / 8)
        g = make_grid(Domain.annulus(e, 1.0), nr, ntheta)
        z = g.nodes
        integrand = np.asarray(phi.dbar(z)) / z
        vals.append(complex(np.sum(g.weights * integrand)))
        scale = max(scale, float(np.sum(g.weights * np.abs(integrand))))
    ext = [(4 * vals[i + 1] - vals[i]) / 3 for i in range(len(vals) - 1)]
    # judged against the absolute integral so phi(0) = 0 is not penalized
    conv = len(ext) >= 2 and abs(ext[-1] - ext[-2]) <= tol * max(abs(ext[-1]), scale)
    return PairingResult(ext[-1] if ext else vals[-1], vals, ext, bool(conv), complex(phi(np.array([0j]))[0]))
