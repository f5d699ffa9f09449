"""
Lebesgue and weighted norms, the flatness functional, and integrability probes.

Inputs come in two forms.  Sampled fields (GridField) are summed with their
grid's quadrature weights.  Radial closed-form functions are integrated in
one dimension through their log-modulus, which reaches radii like 2^-40 and
the limit r -> 0 without underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import radial
from .gridfn import ClosedFormFunction, Domain, GridField, RadialProfile, sample

Radial = Union[ClosedFormFunction, RadialProfile]


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True, eq=False)
class WeightField:
    """A strictly positive potential.

    Holds a sampled field, a radial closed form, or both.  ``singular`` lists
    points where the weight is unbounded; ``exponents`` records which L^p
    classes are of interest for probes.
    """

    field: Optional[GridField] = None
    function: Optional[ClosedFormFunction] = None
    singular: tuple = ()
    exponents: tuple = (2.0,)

    def __post_init__(self):
        if self.field is None and self.function is None:
            raise ValueError("weight needs samples or a closed form")
        if self.field is not None:
            v = self.field.values
            if np.any(np.abs(v.imag) > 0) or not np.all(v.real > 0):
                raise ValueError("weight samples must be strictly positive reals")
            if self.function is not None and self.function.is_radial:
                r = np.abs(self.field.grid.nodes)
                ref = np.asarray(self.function.radial(r), float)
                if not np.allclose(v[:, 0].real, ref, rtol=1e-10, atol=0):
                    raise ValueError("weight samples disagree with the radial profile")
        if not self.singular and self.function is not None:
            object.__setattr__(self, "singular", tuple(self.function.singular))

    @classmethod
    def sampled(cls, V: ClosedFormFunction, grid, **kw):
        return cls(sample(V, grid), V, **kw)

    @classmethod
    def constant(cls, grid, c=1.0):
        return cls(GridField(grid, np.full(grid.size, float(c))))

    @property
    def values(self):
        if self.field is None:
            raise ValueError("weight has no samples")
        return self.field.values[:, 0].real

    @property
    def grid(self):
        return None if self.field is None else self.field.grid

    def scaled(self, k):
        k = float(k)
        if not k > 0:
            raise ValueError("scale must be positive")
        fld = None if self.field is None else GridField(self.field.grid, self.field.values * k)
        fn = None if self.function is None else k * self.function
        return WeightField(fld, fn, self.singular, self.exponents)


# ---------------------------------------------------------------------------
# norms


def _region(f: GridField, domain: Optional[Domain]):
    if domain is None:
        return np.ones(f.grid.size, bool)
    return domain.contains(f.grid.nodes, closed=True)


def _radial_disk_norm(fn: ClosedFormFunction, p, domain):
    if not fn.is_radial:
        raise ValueError("closed-form norms need a radial function")
    if domain is None:
        if fn.support is None:
            raise ValueError("norm of a function without compact support needs a domain")
        domain = fn.support
    if domain.center != 0 or domain.kind == "square":
        raise ValueError("radial norms are taken over centred disks or annuli")
    parts = fn.log_parts()
    if domain.kind == "disk":
        res = radial.log_disk_mass(parts, domain.radius, p)
        if not res.converged:
            return math.inf
        return math.exp(res.log_value / p)
    return math.exp(radial.log_annulus_mass(parts, domain.inner, domain.radius, p) / p)


def lp_norm(f, p: float, domain: Optional[Domain] = None):
    """(int_domain |f|^p dv)^(1/p) for a sampled field or a radial closed form."""
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    if isinstance(f, WeightField):
        f = f.field if f.field is not None else f.function
    if isinstance(f, ClosedFormFunction):
        return _radial_disk_norm(f, p, domain)
    m = _region(f, domain)
    a = f.modulus[m]
    return float(np.sum(f.grid.weights[m] * a**p) ** (1.0 / p))


def weighted_l2_norm(f: GridField, V: WeightField, domain: Optional[Domain] = None):
    """(int_domain |f|^2 V dv)^(1/2)."""
    if V.grid is not f.grid:
        raise ValueError("field and weight must share a grid")
    v = V.values
    m = _region(f, domain)
    if not np.all(v[m] > 0):
        raise ValueError("weight must be positive on the domain")
    return float(math.sqrt(np.sum(f.grid.weights[m] * f.modulus[m] ** 2 * v[m])))


def inverse_weighted_l2_norm(f: GridField, V: WeightField, domain: Optional[Domain] = None):
    """(int_domain |f|^2 / V dv)^(1/2)."""
    if V.grid is not f.grid:
        raise ValueError("field and weight must share a grid")
    m = _region(f, domain)
    return float(math.sqrt(np.sum(f.grid.weights[m] * f.modulus[m] ** 2 / V.values[m])))


def h1_norm(u: GridField, domain: Optional[Domain] = None):
    """Discrete surrogate (||u||^2 + ||grad u||^2)^(1/2) on a cartesian grid.

    Finite values only show the sampled data is H^1-like; they do not prove
    membership of the underlying function.
    """
    g = u.grid
    if not g.is_cartesian:
        raise ValueError("the H1 surrogate uses finite differences on cartesian grids")
    m = _region(u, domain)
    grad2 = np.zeros(g.size)
    for c in range(u.dim):
        dy, dx = np.gradient(u.image(c).astype(complex), g.spacing, edge_order=1)
        grad2 += (np.abs(dx) ** 2 + np.abs(dy) ** 2).ravel()
    total = np.sum(g.weights[m] * (u.modulus[m] ** 2 + grad2[m]))
    return float(math.sqrt(total))


# ---------------------------------------------------------------------------
# flatness


TENDS_TO_ZERO = "tends-to-zero"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FlatnessThresholds:
    """Decision rule for a finite sample of r^-m * mass(r).

    A decisive verdict needs the last three values to move monotonically.
    Decay is accepted when the last value is below ``drop`` times the first,
    or when the last two local log-log slopes both exceed ``min_slope`` and
    the newer one keeps at least ``persistence`` of the older one.  Growth is
    accepted when each of the last two steps at least ``growth``-folds the
    value, or under the mirrored slope condition.
    """

    drop: float = 1e-6
    growth: float = 2.0
    min_slope: float = 0.01
    persistence: float = 0.75


@dataclass(frozen=True)
class FlatnessReport:
    center: complex
    order: int
    radii: np.ndarray
    values: np.ndarray
    log_values: np.ndarray
    verdict: str
    slope: float
    local_slopes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not np.all(np.diff(self.radii) < 0):
            raise ValueError("radii must be strictly decreasing")
        if np.any(self.values < 0):
            raise ValueError("flatness values must be nonnegative")

    def to_dict(self):
        return {
            "center": [self.center.real, self.center.imag],
            "order": self.order,
            "radii": self.radii.tolist(),
            "values": self.values.tolist(),
            "log_values": self.log_values.tolist(),
            "verdict": self.verdict,
            "slope": self.slope,
        }


def dyadic(levels, start=1, base=2.0):
    """[base^-start, ..., base^-(start+levels-1)]."""
    return base ** -np.arange(start, start + levels, dtype=float)


def _log_masses(u, z0, radii, p=2.0):
    """ln int_{|z-z0|<r} |u|^p dv for each r."""
    radii = np.asarray(radii, float)
    if isinstance(u, ClosedFormFunction):
        if not u.is_radial or z0 != 0:
            raise ValueError("closed-form inputs must be radial about the centre")
        parts = u.log_parts()
        out = []
        for r in radii:
            res = radial.log_disk_mass(parts, r, p)
            out.append(res.log_value if res.converged else math.inf)
        return np.array(out)
    if isinstance(u, RadialProfile):
        if z0 != 0:
            raise ValueError("radial profiles are centred at 0")
        if radii.min() < u.r_min:
            raise ValueError(f"radii below the profile range (min {u.r_min:g})")
        # below the first mesh radius the profile is constant
        core = math.pi * u.r_min**2 * abs(u.values[0]) ** p
        out = []
        for r in radii:
            shell = radial.annulus_mass(lambda s: np.abs(u(s)) ** p, u.r_min, r) if r > u.r_min else 0.0
            total = core + shell.real if r > u.r_min else math.pi * r * r * abs(u.values[0]) ** p
            out.append(math.log(total) if total > 0 else -math.inf)
        return np.array(out)
    g = u.grid
    cell = g.spacing if g.is_cartesian else None
    if cell is not None and radii.min() < 4 * cell:
        raise ValueError("radii must span at least 4 grid cells")
    d = np.abs(g.nodes - z0)
    a = u.modulus**p * g.weights
    out = []
    for r in radii:
        s = a[d < r].sum()
        out.append(math.log(s) if s > 0 else -math.inf)
    return np.array(out)


def _local_slopes(log_r, log_v):
    # d ln F / d ln r: positive when F shrinks along with r
    return np.diff(log_v) / np.diff(log_r)


def flatness_verdict(log_values, log_radii, rule: FlatnessThresholds = FlatnessThresholds()):
    L = np.asarray(log_values, float)
    if L.size < 3 or not np.all(np.isfinite(L)):
        if L.size and np.all(L[-3:] == -np.inf):
            return TENDS_TO_ZERO
        return INCONCLUSIVE
    s = _local_slopes(np.asarray(log_radii, float), L)
    last = L[-3:]
    if last[0] > last[1] > last[2]:
        if L[-1] - L[0] < math.log(rule.drop):
            return TENDS_TO_ZERO
        if s[-2] >= rule.min_slope and s[-1] >= rule.min_slope and s[-1] >= rule.persistence * s[-2]:
            return TENDS_TO_ZERO
    if last[0] < last[1] < last[2]:
        step = math.log(rule.growth) - 1e-12
        if last[1] - last[0] >= step and last[2] - last[1] >= step:
            return DIVERGES
        if s[-2] <= -rule.min_slope and s[-1] <= -rule.min_slope and s[-1] <= rule.persistence * s[-2]:
            return DIVERGES
    return INCONCLUSIVE


def flatness_functional(u, z0: complex = 0j, m: int = 0, radii: Optional[Sequence[float]] = None,
                        rule: FlatnessThresholds = FlatnessThresholds()) -> FlatnessReport:
    """Samples of r^-m * int_{|z-z0|<r} |u|^2 dv along decreasing radii, with a verdict."""
    if m < 0:
        raise ValueError("order must be non-negative")
    radii = dyadic(30) if radii is None else np.asarray(radii, float)
    if radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    z0 = complex(z0)
    lr = np.log(radii)
    lv = _log_masses(u, z0, radii) - m * lr
    slopes = _local_slopes(lr, lv)
    fit = _fit_slope(lr[-5:], lv[-5:])
    with np.errstate(over="ignore"):
        vals = np.exp(lv)
    return FlatnessReport(z0, int(m), radii, vals, lv, flatness_verdict(lv, lr, rule), fit, slopes)


def _fit_slope(x, y):
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(x[ok], y[ok], 1)[0])


def vanishing_order_estimate(u, z0: complex = 0j, radii=None, window: int = 5, cap: float = 50.0,
                             spread: float = 0.10):
    """Half the log-log slope of int_{|z-z0|<r} |u|^2 against r at small r.

    Returns a float, the string "infinite" when slopes pass ``cap`` or keep
    growing convexly, or "inconclusive" when local slopes in the fitting
    window disagree by more than ``spread``.
    """
    radii = dyadic(30) if radii is None else np.asarray(radii, float)
    lr = np.log(radii)
    lm = _log_masses(u, complex(z0), radii)
    if np.any(lm == -np.inf):
        return "infinite"
    s = _local_slopes(lr, lm)
    if not np.all(np.isfinite(s)):
        return "inconclusive"
    if s.max() > cap:
        return "infinite"
    tail = s[-window:]
    if tail.size >= 3:
        d1 = np.diff(tail)
        d2 = np.diff(d1)
        if np.all(d1 > 0) and np.all(d2 > 0):
            return "infinite"
    mean = float(np.mean(tail))
    if mean <= 0 or (tail.max() - tail.min()) > spread * abs(mean):
        return "inconclusive"
    return _fit_slope(lr[-window - 1:], lm[-window - 1:]) / 2.0


# ---------------------------------------------------------------------------
# integrability probes


@dataclass(frozen=True)
class MembershipReport:
    p: float
    cutoffs: np.ndarray
    partials: np.ndarray
    increments: np.ndarray
    verdict: str
    limit: float
    limit_converged: bool

    def to_dict(self):
        return {
            "p": self.p,
            "cutoffs": self.cutoffs.tolist(),
            "partials": self.partials.tolist(),
            "increments": self.increments.tolist(),
            "verdict": self.verdict,
            "limit": self.limit,
            "limit_converged": self.limit_converged,
        }


def lp_membership_probe(V, p: float, cutoffs: Optional[Sequence[float]] = None, outer: Optional[float] = None,
                        rel_tail: float = 0.01) -> MembershipReport:
    """Partial integrals of V^p over cutoff < |z| < outer for shrinking cutoffs.

    Converges when the last increments stop growing and the newest one adds
    less than ``rel_tail`` of the running total; diverges when the last three
    increments strictly grow.  For radial closed forms the full limit is also
    evaluated.
    """
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    cutoffs = dyadic(40, start=2) if cutoffs is None else np.asarray(cutoffs, float)
    if np.any(np.diff(cutoffs) >= 0):
        raise ValueError("cutoffs must be strictly decreasing")
    fn = V.function if isinstance(V, WeightField) and V.function is not None else V
    if isinstance(V, WeightField) and V.function is None:
        fn = V.field
    limit, lim_ok = math.nan, False
    if isinstance(fn, ClosedFormFunction):
        if outer is None:
            outer = fn.support.radius if fn.support is not None else 1.0
        parts = fn.log_parts()
        logs = np.array([radial.log_annulus_mass(parts, c, outer, p) for c in cutoffs])
        res = radial.log_disk_mass(parts, outer, p)
        lim_ok = res.converged
        limit = math.exp(res.log_value) if lim_ok else math.inf
        with np.errstate(over="ignore"):
            partials = np.exp(logs)
    else:
        g = fn.grid
        d = np.abs(g.nodes)
        if outer is None:
            outer = float(d.max()) * (1 + 1e-12)
        a = fn.modulus**p * g.weights
        partials = np.array([a[(d > c) & (d < outer)].sum() for c in cutoffs])
    inc = np.diff(partials, prepend=0.0)
    verdict = INCONCLUSIVE
    if inc.size >= 3 and np.all(np.isfinite(partials)):
        a, b, c = inc[-3:]
        if a < b < c:
            verdict = "diverges"
        elif b >= c and partials[-1] > 0 and c / partials[-1] < rel_tail:
            verdict = "converges"
    elif not np.all(np.isfinite(partials)):
        verdict = "diverges"
    return MembershipReport(p, cutoffs, partials, inc, verdict, limit, lim_ok)
