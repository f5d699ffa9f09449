"""
Empirical checks of the weighted Hardy-Littlewood-Sobolev estimate, the steps
of its proof, the Hoelder route for p > 2, and the unique continuation chain.

Norms of I_1 f and of V are taken over the computational grid.  Test
functions are compactly supported (or negligibly small at the grid edge), so
this is the plane-wide quantity up to the far-field tail of I_1 f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gridfn import ClosedFormFunction, ComplexGrid, Domain, GridField, closed_form, make_grid, sample
from .norms import WeightField, inverse_weighted_l2_norm, lp_norm, weighted_l2_norm
from .operators import (
    DEFAULT_RULE,
    dyadic_radii,
    maximal_function,
    riesz_potential,
)

# constant of the split step: the dyadic shells of D_delta give
# I <= pi 2^(3/2) / (1 - 2^(-1/2)) * delta^(1/2) Mg = 4 pi / (sqrt 2 - 1) * ...
SPLIT_NEAR_CONSTANT = 4 * math.pi / (math.sqrt(2) - 1)
# Cauchy-Schwarz on |w| > delta: II <= sqrt(2 pi / delta) ||g||
SPLIT_FAR_CONSTANT = math.sqrt(2 * math.pi)
SPLIT_CONSTANT = max(SPLIT_NEAR_CONSTANT, SPLIT_FAR_CONSTANT)


def riesz_constant(alpha):
    """c_alpha with |z|^(alpha-2) = c_alpha * (normalised Riesz kernel)."""
    return math.pi * 2**alpha * math.gamma(alpha / 2) / math.gamma(1 - alpha / 2)


# composition of unnormalised kernels: I_a I_b = c_a c_b / c_(a+b) I_(a+b)
SEMIGROUP_K = riesz_constant(0.5) ** 2 / riesz_constant(1.0)


# ---------------------------------------------------------------------------
# ratios


def _real_part(f: GridField):
    return GridField(f.grid, f.values.real)


def whls_ratio(f: GridField, V: WeightField):
    """||I_1 f||_{L2_V} / (||V||_{L2} ||f||_{L2_{1/V}})."""
    den = lp_norm(V.field, 2) * inverse_weighted_l2_norm(f, V)
    if den == 0:
        return 0.0
    return weighted_l2_norm(riesz_potential(f, 1.0), V) / den


def half_riesz_ratio(g: GridField, V: WeightField, method="auto"):
    """||I_{1/2} g||_{L2_V} / (||V||_{L2}^{1/2} ||g||_{L2})."""
    gn = lp_norm(g, 2)
    if gn == 0:
        return 0.0
    num = weighted_l2_norm(riesz_potential(g, 0.5, method=method), V)
    return num / (math.sqrt(lp_norm(V.field, 2)) * gn)


@dataclass(frozen=True)
class SplitEstimate:
    near: float
    far: float
    bound: float
    maximal: float
    constant: float
    empirical_constant: float

    @property
    def holds(self):
        return self.near + self.far <= self.bound


def split_estimate(g: GridField, z: complex, delta: float, levels: Optional[int] = None,
                   constant: float = SPLIT_CONSTANT) -> SplitEstimate:
    """Near and far parts of I_{1/2} g at a node z, split at |w - z| = delta.

    Mg(z) is the discrete maximal function over the centred disks
    delta * 2^-j, the family used to bound the near part shell by shell.
    """
    if np.any(g.values.real < 0) or np.any(g.values.imag != 0):
        raise ValueError("split estimate needs g >= 0")
    if not delta > 0:
        raise ValueError("delta must be positive")
    grid = g.grid
    z = complex(z)
    a = g.values[:, 0].real
    d = np.abs(grid.nodes - z)
    w = grid.weights
    self_node = d <= 1e-9 * math.sqrt(w.min())
    near = (d < delta) & ~self_node
    far = (d >= delta)
    beta = 1.5
    c_self = DEFAULT_RULE.constant(beta)
    I = float(np.sum(a[near] * w[near] * d[near] ** -beta))
    if delta > 0:
        I += float(np.sum(a[self_node] * w[self_node] ** (1 - beta / 2) * c_self))
    II = float(np.sum(a[far] * w[far] * d[far] ** -beta))
    if not np.any(a):
        return SplitEstimate(0.0, 0.0, 0.0, 0.0, constant, 0.0)
    if levels is None:
        cell = grid.spacing if grid.is_cartesian else math.sqrt(w.min())
        levels = max(1, int(math.ceil(math.log2(delta / cell))) + 1)
    M = float(maximal_function(g, [z], dyadic_radii(delta, levels))[0].real)
    gl2 = float(math.sqrt(np.sum(w * a * a)))
    base = math.sqrt(delta) * M + gl2 / math.sqrt(delta)
    return SplitEstimate(I, II, constant * base, M, constant, (I + II) / base if base > 0 else 0.0)


def split_integrated_check(g: GridField, V: WeightField, constant: float = SPLIT_CONSTANT):
    """Pointwise bound with delta = 1/V(z), squared, weighted by V and integrated.

    Returns (lhs, rhs, pointwise_ok) with lhs = int |I_{1/2} g|^2 V and
    rhs = C^2 int (Mg + V ||g||)^2, the integrated form of
    I_{1/2} g <= C (V^(-1/2) Mg + V^(1/2) ||g||).
    """
    I = riesz_potential(g, 0.5).values[:, 0].real
    M = maximal_function(g).values[:, 0].real
    v = V.values
    w = g.grid.weights
    gl2 = lp_norm(g, 2)
    point = constant * (M / np.sqrt(v) + np.sqrt(v) * gl2)
    lhs = float(np.sum(w * I * I * v))
    rhs = float(constant**2 * np.sum(w * (M + v * gl2) ** 2))
    return lhs, rhs, bool(np.all(I <= point))


def semigroup_residual(f: GridField, inner: float = 0.5, center: complex = 0j, flag: float = 0.10):
    """Fit I_{1/2} I_{1/2} f ~ K I_1 f on targets within ``inner`` of ``center``.

    Returns (K_hat, relative residual).  A residual above ``flag`` raises.
    """
    if not np.any(f.values):
        return 0.0, 0.0
    A = riesz_potential(riesz_potential(f, 0.5), 0.5).values[:, 0]
    B = riesz_potential(f, 1.0).values[:, 0]
    m = np.abs(f.grid.nodes - center) < inner
    K = float((np.vdot(B[m], A[m])).real / np.vdot(B[m], B[m]).real)
    res = float(np.linalg.norm(A[m] - K * B[m]) / np.linalg.norm(A[m]))
    if res > flag:
        raise ArithmeticError(f"semigroup residual {res:.3g} exceeds {flag}: discretisation failure")
    return K, res


# ---------------------------------------------------------------------------
# Hoelder route


def kernel_q_norm_at(z: complex, q: float, nodes: int = 2048):
    """|| |. - z|^-1 ||_{L^q(D_1)} for |z| < 1 by the polar formula.

    With rho(theta) the distance from z to the unit circle in direction theta,
    the q-th power is int_0^{2 pi} rho^(2-q) / (2-q) d theta; the angular
    integrand is smooth and periodic, so the trapezoid rule converges fast.
    """
    if not 0 < q < 2:
        raise ValueError("q must lie in (0, 2)")
    z = complex(z)
    th = 2 * math.pi * np.arange(nodes) / nodes
    e = np.exp(1j * th)
    b = (np.conj(e) * z).real
    rho = -b + np.sqrt(b * b + 1 - abs(z) ** 2)
    return float((np.mean(rho ** (2 - q)) * 2 * math.pi / (2 - q)) ** (1 / q))


def kernel_q_ceiling(q: float):
    """Bound from enlarging D_1 - z to D_2: (2 pi 2^(2-q) / (2-q))^(1/q)."""
    return (2 * math.pi * 2 ** (2 - q) / (2 - q)) ** (1 / q)


@dataclass(frozen=True)
class HoelderResult:
    ratio: float
    kernel_q_norm: float
    ceiling: float
    p: float


def hoelder_p_gt2_ratio(f: GridField, V: WeightField, p: float, z_samples: Optional[np.ndarray] = None):
    """Ratio ||I_1 f||_{L2_V(D1)} / (||V||_{Lp(D1)} ||f||_{L2_{1/V}(D1)}) and the kernel bound."""
    p = float(p)
    if not p > 2:
        raise ValueError("the Hoelder route needs p > 2")
    q = p / (p - 1)
    D1 = Domain.disk(1.0)
    inside = D1.contains(f.grid.nodes)
    fm = GridField(f.grid, np.where(inside[:, None], f.values, 0))
    I = riesz_potential(fm, 1.0)
    den = lp_norm(V.field, p, D1) * inverse_weighted_l2_norm(fm, V, D1)
    ratio = 0.0 if den == 0 else weighted_l2_norm(I, V, D1) / den
    if z_samples is None:
        rr = np.concatenate([[0.0], np.linspace(0.05, 0.95, 19)])
        z_samples = rr.astype(complex)
    knorm = max(kernel_q_norm_at(z, q) for z in np.atleast_1d(z_samples))
    return HoelderResult(float(ratio), knorm, kernel_q_ceiling(q), p)


# ---------------------------------------------------------------------------
# randomized HLS suite


FAMILIES = ("radial-bump", "off-center-bump", "two-bump")


def _rand_center(rng, rmax):
    rho = rmax * math.sqrt(rng.uniform())
    return rho * complex(np.exp(2j * math.pi * rng.uniform()))


def trial_functions(rng: np.random.Generator, family: str):
    """Draw (f, V, params) for one trial of the given family."""
    if family == "radial-bump":
        w = rng.uniform(0.1, 0.45)
        f = closed_form("gaussian", w)
        fp = {"width": w}
    elif family == "off-center-bump":
        rad = rng.uniform(0.2, 0.8)
        c = _rand_center(rng, 1.0)
        f = closed_form("std-bump", rad, c)
        fp = {"radius": rad, "center": [c.real, c.imag]}
    elif family == "two-bump":
        w1, w2 = rng.uniform(0.1, 0.35, 2)
        c1, c2 = _rand_center(rng, 0.8), _rand_center(rng, 0.8)
        a = rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0])
        f = closed_form("gaussian", w1, c1) + closed_form("gaussian", w2, c2, a)
        fp = {"widths": [w1, w2], "centers": [[c1.real, c1.imag], [c2.real, c2.imag]], "weight": a}
    else:
        raise ValueError(f"unknown trial family {family!r}")
    nv = int(rng.integers(1, 4))
    V = closed_form("inverse-quadratic", 0.05)
    vp = []
    for _ in range(nv):
        amp = rng.uniform(0.5, 5.0)
        wid = rng.uniform(0.1, 0.8)
        c = _rand_center(rng, 1.2)
        V = V + closed_form("gaussian", wid, c, amp)
        vp.append({"amplitude": amp, "width": wid, "center": [c.real, c.imag]})
    return f, V, {"family": family, "f": fp, "V": vp}


@dataclass
class HLSReport:
    families: tuple
    ratios: list
    half_ratios: list
    scale_checks: list
    params: list
    seed: int
    grid_n: int
    half_width: float
    scale: float
    v_scale: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.ratios, float)
        if r.size and (not np.all(np.isfinite(r)) or np.any(r < 0)):
            raise ValueError("HLS ratios must be finite and nonnegative")

    @property
    def c0_hat(self):
        return float(max(self.ratios)) if self.ratios else 0.0

    @property
    def all_finite(self):
        return bool(np.all(np.isfinite(self.ratios)))

    @property
    def max_scale_deviation(self):
        return float(max(self.scale_checks)) if self.scale_checks else 0.0

    def to_dict(self):
        return {
            "families": list(self.families),
            "seed": self.seed,
            "grid_n": self.grid_n,
            "half_width": self.half_width,
            "scale": self.scale,
            "v_scale": self.v_scale,
            "c0_hat": self.c0_hat,
            "trials": [
                {"params": p, "ratio": r, "half_ratio": h, "scale_deviation": s}
                for p, r, h, s in zip(self.params, self.ratios, self.half_ratios, self.scale_checks)
            ],
        }


def run_hls_suite(trials: int = 100, seed: int = 42, grid_n: int = 256, half_width: float = 2.0,
                  families: Sequence[str] = FAMILIES, scale: float = 7.0, v_scale: float = 1.0) -> HLSReport:
    """Randomized weighted-HLS trials, cycling through ``families``.

    Every trial weight is multiplied by ``v_scale`` first.  Each trial also
    recomputes its ratio with V replaced by scale * V; the relative change is
    recorded as the scale check.
    """
    if not v_scale > 0:
        raise ValueError("v_scale must be positive")
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    grid = make_grid(Domain.square(half_width), grid_n)
    ratios, halves, checks, params = [], [], [], []
    for t in range(trials):
        fam = families[t % len(families)]
        f_cf, V_cf, prm = trial_functions(rng, fam)
        f = sample(f_cf, grid)
        V = WeightField.sampled(V_cf, grid)
        if v_scale != 1.0:
            V = V.scaled(v_scale)
        r = whls_ratio(f, V)
        rk = whls_ratio(f, V.scaled(scale))
        ratios.append(r)
        halves.append(half_riesz_ratio(_abs_field(f), V))
        checks.append(abs(rk - r) / r if r else 0.0)
        params.append(prm)
    return HLSReport(tuple(families), ratios, halves, checks, params, seed, grid_n, half_width, scale, v_scale)


def _abs_field(f):
    return GridField(f.grid, f.modulus)


# ---------------------------------------------------------------------------
# certificate chain


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t)


def smoothstep_slope(t):
    t = np.asarray(t, float)
    return np.where((t > 0) & (t < 1), 6 * t * (1 - t), 0.0)


def _radial_cutoff(value, slope):
    """ClosedFormFunction for a radial profile with known derivative."""
    def dbar(z):
        z = np.asarray(z, complex)
        r = np.abs(z)
        with np.errstate(all="ignore"):
            out = slope(r) * z / (2 * r)
        return np.where(r > 0, out, 0)

    return ClosedFormFunction("cutoff", {}, lambda z: value(np.abs(z)) + 0j, dbar, value)


def eta_cutoff(r):
    """1 on D_r, 0 outside D_2r, |grad| = 1.5/r at most."""
    return _radial_cutoff(
        lambda s: 1 - smoothstep((np.asarray(s) - r) / r),
        lambda s: -smoothstep_slope((np.asarray(s) - r) / r) / r,
    )


def psi_cutoff(k):
    """psi(k z): 0 on D_{1/k}, 1 outside D_{2/k}, |grad| = 1.5 k at most."""
    return _radial_cutoff(
        lambda s: smoothstep(k * np.asarray(s) - 1),
        lambda s: k * smoothstep_slope(k * np.asarray(s) - 1),
    )


@dataclass
class CertificateParams:
    """Radius r, inner index k, the cutoffs and the augmented weight.

    ``build`` applies the replacement V -> V chi_{D_r} + r / (1 + |z|^2) unless
    ``augment`` is False, and records C_r = min of the weight on D_2r.
    """

    r: float
    k: float
    grid: ComplexGrid
    V: WeightField
    V_l2_sq: float
    C_r: float
    eta: ClosedFormFunction
    psi: ClosedFormFunction
    augmented: bool = True

    def __post_init__(self):
        if self.k < 4 / self.r * (1 - 1e-12):
            raise ValueError(f"k = {self.k} violates k >= 4/r = {4 / self.r:g}")
        z = self.grid.nodes
        g_eta = 2 * np.abs(self.eta.dbar(z))
        g_psi = 2 * np.abs(self.psi.dbar(z))
        if g_eta.max() > 2 / self.r * (1 + 1e-12) or g_psi.max() > 2 * self.k * (1 + 1e-12):
            raise ValueError("cutoff gradient bounds violated")

    @classmethod
    def build(cls, r: float, k: float, V: ClosedFormFunction, grid_n: int = 256, augment: bool = True,
              half_width: Optional[float] = None):
        if not r > 0:
            raise ValueError("radius must be positive")
        hw = 2.5 * r if half_width is None else half_width
        grid = make_grid(Domain.square(hw), grid_n)
        z = grid.nodes
        with np.errstate(all="ignore"):
            raw = np.asarray(V(z)).real
        if augment:
            tail = r / (1 + np.abs(z) ** 2)
            vals = np.where(np.abs(z) < r, raw, 0.0) + tail
            # grid part inside D_r plus the exact tail of (r / (1+|z|^2))^2 outside D_r
            inside = np.abs(z) < r
            l2 = float(np.sum(grid.weights[inside] * vals[inside] ** 2)) + r * r * math.pi / (1 + r * r)
        else:
            vals = raw
            l2 = float(np.sum(grid.weights * vals**2))
        Vw = WeightField(GridField(grid, vals))
        cr = float(vals[np.abs(z) < 2 * r].min())
        return cls(r, k, grid, Vw, l2, cr, eta_cutoff(r), psi_cutoff(k), augment)


@dataclass
class ChainStep:
    name: str
    lhs: float
    rhs: float
    licensed: bool = True

    @property
    def holds(self):
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300

    @property
    def slack(self):
        if self.lhs == 0:
            return math.inf
        return self.rhs / self.lhs

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "licensed": self.licensed,
                "holds": self.holds, "slack": self.slack}


@dataclass
class ChainReport:
    m: int
    k: float
    r: float
    lhs: float
    A: float
    B: float
    C: float
    steps: list
    admissible: bool
    smallness: bool
    c0_hat: float

    @property
    def licensed_steps_hold(self):
        return all(s.holds for s in self.steps if s.licensed)

    def step(self, name):
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self):
        return {"m": self.m, "k": self.k, "r": self.r, "lhs": self.lhs, "A": self.A, "B": self.B, "C": self.C,
                "admissible": self.admissible, "smallness": self.smallness, "c0_hat": self.c0_hat,
                "steps": [s.to_dict() for s in self.steps]}


def ucp_certificate(u: ClosedFormFunction, params: CertificateParams, m: int, c0_hat: float,
                    admissibility_tol: float = 1e-9) -> ChainReport:
    """Evaluate every inequality of the cutoff argument for one order m.

    Steps, each as lhs <= rhs:

    reconstruction   LHS <= (1/pi^2) ||I_1(|dbar(psi eta u)| / |z|^m)||^2_{V}
    whls             that norm <= c0_hat^2 ||V||^2 ||F||^2_{1/V} / pi^2
    smallness        c0_hat^2 ||V||^2 / pi^2 <= 1/2
    split-exact      ||F||^2_{1/V} <= 2A + 2B + C   (|a+b|^2 <= 2|a|^2 + 2|b|^2)
    mm-exact         LHS <= A + B + C/2             (the three steps above combined)
    split-displayed  ||F||^2_{1/V} <= A + B + C     (as displayed; not implied)
    mm-displayed     LHS <= (A + B + C) / 2         (as displayed; not implied)
    B-substitution   B <= LHS                       (needs |dbar u| <= V|u|)
    nn               int_{D_r} (r/|z|)^2m |u|^2 V <= int_{ann} |dbar(eta u)|^2 / V
    half-disk        2^2m int_{D_{r/2}} |u|^2 V <= int_{D_2r} |dbar(eta u)|^2 / C_r

    The two displayed forms drop the factor 2 of the split and are reported
    without a license.  The last three rely on the differential inequality;
    for inputs that violate it they are computed and reported but marked
    unlicensed.
    """
    if u.dbar is None:
        raise ValueError("certificate needs an analytic d-bar rule for u")
    P = params
    g = P.grid
    z = g.nodes
    w = g.weights
    r = P.r
    absz = np.abs(z)
    with np.errstate(all="ignore"):
        uz = np.asarray(u(z), complex)
        du = np.asarray(u.dbar(z), complex)
    eta, deta = P.eta(z), P.eta.dbar(z)
    psi, dpsi = P.psi(z), P.psi.dbar(z)
    v = P.V.values
    in2r = absz < 2 * r
    uz = np.where(in2r, uz, 0)
    du = np.where(in2r, du, 0)

    support = np.abs(psi * eta * uz) > 0
    if np.any(support & (absz < 1 / P.k)):
        raise ValueError("psi_k eta u does not vanish inside D_{1/k}; the chain is not derived there")
    bad = ~np.isfinite(uz) | ~np.isfinite(du)
    if np.any(bad & (np.abs(psi * eta) > 0)):
        raise ValueError("u or its d-bar is not finite on the support of the cutoffs")
    uz = np.where(bad, 0, uz)
    du = np.where(bad, 0, du)

    inr = absz < r
    ann = in2r & ~inr
    zm = np.where(absz > 0, absz, np.inf) ** (-2 * m)

    lhs = float(np.sum(w[inr] * (np.abs(psi * uz) ** 2 * zm * v)[inr]))
    # d-bar of psi_k eta u
    dF = dpsi * eta * uz + psi * deta * uz + psi * eta * du
    F = np.abs(dF) * np.sqrt(zm)
    F = np.where(absz > 1 / P.k, F, 0.0)
    Ffield = GridField(g, F)
    I1 = riesz_potential(Ffield, 1.0).values[:, 0].real
    recon = float(np.sum(w * I1 * I1 * v)) / math.pi**2
    F_inv = float(np.sum(w * F * F / v))
    whls_rhs = c0_hat**2 * P.V_l2_sq * F_inv / math.pi**2

    A = float(np.sum(w * np.abs(dpsi) ** 2 * np.abs(uz) ** 2 * zm / v))
    B = float(np.sum(w[inr] * (np.abs(psi) ** 2 * np.abs(du) ** 2 * zm / v)[inr]))
    deu = deta * uz + eta * du
    C = float(np.sum(w[ann] * (np.abs(deu) ** 2 * zm / v)[ann]))

    admissible = bool(np.all(np.abs(du[inr]) <= v[inr] * np.abs(uz[inr]) * (1 + admissibility_tol) + 1e-300))
    small = c0_hat**2 * P.V_l2_sq / math.pi**2

    nn_lhs = float(np.sum(w[inr] * ((r / np.where(absz > 0, absz, np.inf)) ** (2 * m) * np.abs(uz) ** 2 * v)[inr]))
    nn_rhs = float(np.sum(w[ann] * (np.abs(deu) ** 2 / v)[ann]))
    half = absz < r / 2
    hd_lhs = 2 ** (2 * m) * float(np.sum(w[half] * (np.abs(uz) ** 2 * v)[half]))
    hd_rhs = float(np.sum(w[in2r] * np.abs(deu[in2r]) ** 2)) / P.C_r

    steps = [
        ChainStep("reconstruction", lhs, recon),
        ChainStep("whls", recon, whls_rhs),
        ChainStep("smallness", small, 0.5),
        ChainStep("split-exact", F_inv, 2 * A + 2 * B + C),
        ChainStep("mm-exact", lhs, A + B + C / 2),
        ChainStep("split-displayed", F_inv, A + B + C, False),
        ChainStep("mm-displayed", lhs, (A + B + C) / 2, False),
        ChainStep("B-substitution", B, lhs, admissible),
        ChainStep("nn", nn_lhs, nn_rhs, admissible),
        ChainStep("half-disk", hd_lhs, hd_rhs, admissible),
    ]
    return ChainReport(int(m), P.k, r, lhs, A, B, C, steps, admissible, small <= 0.5, c0_hat)


def certificate_ladder(u: ClosedFormFunction, V: ClosedFormFunction, c0_hat: float, r: float = 0.5,
                       ks: Sequence[float] = (8, 16, 32), ms: Sequence[int] = range(1, 7), grid_n: int = 256,
                       augment: bool = True):
    """Chain reports for every (k, m) pair; returns a dict keyed by (k, m)."""
    out = {}
    for k in ks:
        P = CertificateParams.build(r, k, V, grid_n=grid_n, augment=augment)
        for m in ms:
            out[(k, m)] = ucp_certificate(u, P, m, c0_hat)
    return out
