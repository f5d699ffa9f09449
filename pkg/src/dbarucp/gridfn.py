"""
Planar domains, sampling grids, quadrature, and closed-form test functions.

Two grid kinds are supported:

    cartesian   cell-centred uniform nodes over a square, weight h**2 each
    polar       composite Gauss-Legendre in log-radius times a periodic
                trapezoid rule in angle, over a disk or an annulus

Polar grids put their radial nodes on panels of equal width in t = ln r, so
nodes cluster geometrically toward the centre.  A full disk is represented
by an annulus whose inner radius is ``DISK_INNER_FRACTION`` times the outer
radius; the missing area is below 1e-12 of the disk.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

DISK_INNER_FRACTION = 1e-6
MIN_RESOLUTION = 8


class SamplingError(ValueError):
    """Raised when a function cannot be evaluated at some grid nodes."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = np.asarray(nodes)


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class Domain:
    """A square, disk or annulus in the plane.

    For squares ``radius`` is the half-width.  ``inner`` is the hole radius
    of an annulus and is 0 for disks and squares.
    """

    kind: str
    center: complex = 0j
    radius: float = 1.0
    inner: float = 0.0

    def __post_init__(self):
        if self.kind not in ("square", "disk", "annulus"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("domain radius must be positive")
        if self.inner < 0:
            raise ValueError("inner cutoff must be non-negative")
        if self.kind == "annulus" and not 0 < self.inner < self.radius:
            raise ValueError("annulus needs 0 < inner < outer radius")
        if self.kind != "annulus" and self.inner != 0:
            raise ValueError("only annuli carry an inner cutoff")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def square(cls, half_width, center=0j):
        return cls("square", center, half_width)

    @classmethod
    def disk(cls, radius, center=0j):
        return cls("disk", center, radius)

    @classmethod
    def annulus(cls, inner, outer, center=0j):
        return cls("annulus", center, outer, inner)

    @property
    def area(self):
        if self.kind == "square":
            return 4.0 * self.radius**2
        return math.pi * (self.radius**2 - self.inner**2)

    def contains(self, z, closed=False):
        """Boolean mask of points inside the domain (open by default)."""
        w = np.asarray(z) - self.center
        if self.kind == "square":
            m = np.maximum(np.abs(w.real), np.abs(w.imag))
            return m <= self.radius if closed else m < self.radius
        r = np.abs(w)
        if closed:
            return (r <= self.radius) & (r >= self.inner)
        return (r < self.radius) & (r > self.inner)

    def contains_disk(self, z, r):
        """Mask of centres z whose open disk of radius r lies in the domain."""
        w = np.asarray(z) - self.center
        if self.kind == "square":
            m = np.maximum(np.abs(w.real), np.abs(w.imag))
            return m + r <= self.radius
        d = np.abs(w)
        ok = d + r <= self.radius
        if self.inner > 0:
            ok &= d - r >= self.inner
        return ok

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "inner": self.inner,
        }


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True, eq=False)
class ComplexGrid:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    domain: Domain
    shape: tuple
    spacing: float = 0.0  # cartesian cell width; 0 for polar grids
    radii: Optional[np.ndarray] = None  # polar radial nodes

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(np.asarray(self.nodes, complex)))
        object.__setattr__(self, "weights", _frozen(np.asarray(self.weights, float)))
        if self.radii is not None:
            object.__setattr__(self, "radii", _frozen(self.radii))
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in length")

    @property
    def size(self):
        return self.nodes.size

    @property
    def is_cartesian(self):
        return self.kind == "cartesian"

    def check(self, rtol=1e-3):
        """Assert the grid invariants; returns self for chaining."""
        if not np.all(self.weights > 0):
            raise AssertionError("non-positive quadrature weight")
        area = self.domain.area
        if abs(self.weights.sum() - area) > rtol * area:
            raise AssertionError("weights do not sum to the domain area")
        if not np.all(self.domain.contains(self.nodes)):
            raise AssertionError("node outside the declared domain")
        if np.unique(self.nodes).size != self.nodes.size:
            raise AssertionError("repeated nodes")
        return self

    def as_image(self, values):
        """Reshape per-node values to the (ny, nx) layout of a cartesian grid."""
        if not self.is_cartesian:
            raise ValueError("image layout is defined only for cartesian grids")
        return np.asarray(values).reshape(self.shape + np.shape(values)[1:])

    def mask(self, domain=None):
        if domain is None:
            return np.ones(self.size, bool)
        return domain.contains(self.nodes, closed=True)

    def describe(self):
        return {"kind": self.kind, "shape": list(self.shape), "domain": self.domain.to_dict()}


def _gauss_log_radial(r_in, r_out, nr, per_panel=8):
    """Composite Gauss-Legendre nodes/weights for int_{r_in}^{r_out} g(r) r dr."""
    panels = max(1, nr // per_panel)
    q = nr // panels
    extra = nr - q * panels
    t_edges = np.linspace(math.log(r_in), math.log(r_out), panels + 1)
    r_nodes, r_weights = [], []
    for k in range(panels):
        m = q + (1 if k < extra else 0)
        x, w = np.polynomial.legendre.leggauss(m)
        a, b = t_edges[k], t_edges[k + 1]
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        r = np.exp(t)
        r_nodes.append(r)
        r_weights.append(0.5 * (b - a) * w * r * r)  # r dr = r^2 dt
    return np.concatenate(r_nodes), np.concatenate(r_weights)


def make_grid(domain: Domain, n: int = 256, ntheta: Optional[int] = None, per_panel: int = 8):
    """Build a grid over ``domain``.

    Squares get an ``n x n`` cartesian grid.  Disks and annuli get a polar
    grid with ``n`` radial and ``ntheta`` (default ``2n``) angular nodes.
    """
    if n < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION} per axis")
    if domain.kind == "square":
        a = domain.radius
        h = 2.0 * a / n
        x = -a + (np.arange(n) + 0.5) * h
        X, Y = np.meshgrid(x, x)
        nodes = (X + 1j * Y).ravel() + domain.center
        weights = np.full(n * n, h * h)
        return ComplexGrid("cartesian", nodes, weights, domain, (n, n), spacing=h)

    ntheta = 2 * n if ntheta is None else ntheta
    if ntheta < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION} per axis")
    r_in = domain.inner if domain.kind == "annulus" else domain.radius * DISK_INNER_FRACTION
    r, wr = _gauss_log_radial(r_in, domain.radius, n, per_panel)
    dtheta = 2.0 * math.pi / ntheta
    theta = (np.arange(ntheta) + 0.5) * dtheta
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel() + domain.center
    weights = (wr[:, None] * np.full(ntheta, dtheta)[None, :]).ravel()
    return ComplexGrid("polar", nodes, weights, domain, (n, ntheta), radii=r)


def points(zs):
    """Plain array of target points (no quadrature weights)."""
    return np.atleast_1d(np.asarray(zs, dtype=complex))


# ---------------------------------------------------------------------------
# Radial profiles


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Tabulated radial function, interpolated monotonically in log-radius."""

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, float)
        v = np.asarray(self.values, complex)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValueError("radii and values must be 1-D of equal length >= 2")
        if not (np.all(r > 0) and np.all(np.diff(r) > 0)):
            raise ValueError("radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", _frozen(r))
        object.__setattr__(self, "values", _frozen(v))
        x = np.log(r)
        with np.errstate(all="ignore"):
            object.__setattr__(self, "_re", PchipInterpolator(x, v.real, extrapolate=False))
            object.__setattr__(self, "_im", PchipInterpolator(x, v.imag, extrapolate=False))

    @property
    def r_min(self):
        return float(self.radii[0])

    @property
    def r_max(self):
        return float(self.radii[-1])

    def __call__(self, r):
        r = np.asarray(r, float)
        x = np.log(np.clip(r, self.r_min, self.r_max))
        out = self._re(x) + 1j * self._im(x)
        out = np.where(r < self.r_min, self.values[0], out)
        return np.where(r > self.r_max, self.values[-1], out)

    def derivative(self, r):
        """d/dr of the interpolant; zero outside the tabulated range."""
        r = np.asarray(r, float)
        inside = (r >= self.r_min) & (r <= self.r_max)
        x = np.log(np.clip(r, self.r_min, self.r_max))
        d = (self._re.derivative()(x) + 1j * self._im.derivative()(x)) / np.clip(r, self.r_min, self.r_max)
        return np.where(inside, d, 0)

    @classmethod
    def from_function(cls, g, r_min=2.0**-40, r_max=1.0, n=400, extra_radii=None):
        r = np.geomspace(r_min, r_max, n)
        if extra_radii is not None:
            extra = np.asarray(extra_radii, float)
            extra = extra[(extra >= r_min) & (extra <= r_max)]
            r = np.unique(np.concatenate([r, extra]))
            keep = np.concatenate([[True], np.diff(r) > 1e-11 * r[1:]])
            r = r[keep]
        return cls(r, np.asarray(g(r), complex))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "re", "im"])
            for r, v in zip(self.radii, self.values):
                w.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"radius", "re", "im"}:
            raise ValueError("radial profile CSV needs header radius,re,im")
        r = np.array([float(row["radius"]) for row in rows])
        v = np.array([float(row["re"]) + 1j * float(row["im"]) for row in rows])
        return cls(r, v)


# ---------------------------------------------------------------------------
# Fields


@dataclass(frozen=True, eq=False)
class GridField:
    """Values of a (possibly vector valued) function at the nodes of a grid.

    ``values`` always has shape (n_nodes, N).
    """

    grid: ComplexGrid
    values: np.ndarray
    profile: Optional[RadialProfile] = None
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.size:
            raise ValueError("values length must equal the node count")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def radial(self):
        return self.profile is not None

    @property
    def scalar(self):
        if self.dim != 1:
            raise ValueError("field is vector valued")
        return self.values[:, 0]

    @property
    def modulus(self):
        """Euclidean norm of the value vector at each node."""
        if self.dim == 1:
            return np.abs(self.values[:, 0])
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=1))

    def image(self, component=0):
        return self.grid.as_image(self.values[:, component])

    def with_values(self, values, name=""):
        return GridField(self.grid, values, name=name)

    def __add__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, GridField):
            _same_grid(self, c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def check_radial(self, rtol=1e-10):
        if self.profile is None:
            return True
        r = np.abs(self.grid.nodes - self.grid.domain.center)
        ref = self.profile(r)
        v = self.values[:, 0]
        scale = np.maximum(np.abs(ref), np.finfo(float).tiny)
        return bool(np.all(np.abs(v - ref) <= rtol * scale + 1e-300))


def _same_grid(a, b):
    if a.grid is not b.grid:
        raise ValueError("fields live on different grids")


def integrate(f: GridField):
    """Quadrature sum of the field; complex for scalar fields."""
    s = f.grid.weights @ f.values
    return complex(s[0]) if f.dim == 1 else s


# ---------------------------------------------------------------------------
# Closed-form functions


@dataclass(frozen=True, eq=False)
class ClosedFormFunction:
    """A named parametric function with optional analytic d-bar.

    ``evaluate`` maps complex arrays to values.  For functions of two complex
    variables (``ndim == 2``) points are arrays of shape (..., 2) and ``dbar``
    returns the per-variable derivatives stacked on the last axis.

    ``radial`` (r -> value) is present when the function depends on |z| only;
    ``log_modulus`` together with ``log_rate`` gives its overflow-free log
    form for tiny radii: ln|f(e^{-t})| = log_rate * t + log_modulus(t).  The
    linear part is kept apart so that it can cancel exactly against the
    area element.  ``support`` is None for functions not compactly supported.
    """

    name: str
    params: dict
    evaluate: Callable
    dbar: Optional[Callable] = None
    radial: Optional[Callable] = None
    log_modulus: Optional[Callable] = None
    support: Optional[Domain] = None
    singular: tuple = ()
    ndim: int = 1
    log_rate: float = 0.0

    def __call__(self, z):
        return self.evaluate(np.asarray(z))

    @property
    def is_radial(self):
        return self.radial is not None

    def log_abs(self, t):
        """ln|f(e^{-t})| for radial functions."""
        rate, rest = self.log_parts()
        t = np.asarray(t, float)
        return rate * t + rest(t)

    def log_parts(self):
        """(rate, rest) with ln|f(e^{-t})| = rate * t + rest(t)."""
        if self.log_modulus is not None:
            return self.log_rate, self.log_modulus
        if self.radial is None:
            raise ValueError(f"{self.name} is not radial")

        def rest(t):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(self.radial(np.exp(-np.asarray(t, float)))))

        return 0.0, rest

    def dbar_fd(self, z, step=1e-5):
        """Central-difference d-bar (1-D functions only)."""
        z = np.asarray(z, complex)
        fx = (self.evaluate(z + step) - self.evaluate(z - step)) / (2 * step)
        fy = (self.evaluate(z + 1j * step) - self.evaluate(z - 1j * step)) / (2 * step)
        return 0.5 * (fx + 1j * fy)

    def describe(self):
        return {"family": self.name, "params": {k: _jsonable(v) for k, v in self.params.items()}}

    # algebra ---------------------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, ClosedFormFunction):
            return scale(self, other)
        return product(self, other)

    def __rmul__(self, c):
        return scale(self, c)

    def __add__(self, other):
        return add(self, other)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _support_union(a, b):
    if a is None or b is None:
        return None
    if a == b:
        return a
    # bounding square; exactness is not needed for support bookkeeping
    ext = max(abs(a.center) + a.radius * math.sqrt(2), abs(b.center) + b.radius * math.sqrt(2))
    return Domain.square(ext)


def scale(f, c):
    c = complex(c) if isinstance(c, complex) else float(c)
    lm, rate = None, 0.0
    if f.is_radial:
        rate, base = f.log_parts()
        lm = lambda t: base(t) + math.log(abs(c)) if c != 0 else np.full(np.shape(t), -np.inf)
    return ClosedFormFunction(
        f"{c}*{f.name}",
        {"c": c, "of": f.describe()},
        lambda z: c * f.evaluate(z),
        None if f.dbar is None else (lambda z: c * f.dbar(z)),
        None if f.radial is None else (lambda r: c * f.radial(r)),
        lm,
        f.support,
        f.singular,
        f.ndim,
        rate,
    )


def add(f, g):
    if f.ndim != g.ndim:
        raise ValueError("dimension mismatch")
    dbar = None
    if f.dbar is not None and g.dbar is not None:
        dbar = lambda z: f.dbar(z) + g.dbar(z)
    radial = None
    if f.radial is not None and g.radial is not None:
        radial = lambda r: f.radial(r) + g.radial(r)
    return ClosedFormFunction(
        f"({f.name}+{g.name})",
        {"terms": [f.describe(), g.describe()]},
        lambda z: f.evaluate(z) + g.evaluate(z),
        dbar,
        radial,
        None,
        _support_union(f.support, g.support),
        tuple(f.singular) + tuple(g.singular),
        f.ndim,
    )


def product(f, g):
    if f.ndim != 1 or g.ndim != 1:
        raise ValueError("pointwise products are defined for functions of one variable")
    dbar = None
    if f.dbar is not None and g.dbar is not None:
        dbar = lambda z: f.dbar(z) * g.evaluate(z) + f.evaluate(z) * g.dbar(z)
    radial = lm = None
    rate = 0.0
    if f.is_radial and g.is_radial:
        radial = lambda r: f.radial(r) * g.radial(r)
        (ra, fa), (rb, fb) = f.log_parts(), g.log_parts()
        rate = ra + rb
        lm = lambda t: fa(t) + fb(t)
    support = f.support if g.support is None else g.support if f.support is None else None
    if f.support is not None and g.support is not None:
        support = f.support if f.support.area <= g.support.area else g.support
    return ClosedFormFunction(
        f"({f.name}*{g.name})",
        {"factors": [f.describe(), g.describe()]},
        lambda z: f.evaluate(z) * g.evaluate(z),
        dbar,
        radial,
        lm,
        support,
        tuple(f.singular) + tuple(g.singular),
        1,
        rate,
    )


def translate(f, c):
    """z -> f(z - c)."""
    c = complex(c)
    sup = None
    if f.support is not None:
        s = f.support
        sup = Domain(s.kind, s.center + c, s.radius, s.inner)
    return ClosedFormFunction(
        f"{f.name}@{c}",
        {"shift": c, "of": f.describe()},
        lambda z: f.evaluate(np.asarray(z) - c),
        None if f.dbar is None else (lambda z: f.dbar(np.asarray(z) - c)),
        None,
        None,
        sup,
        tuple(s + c for s in f.singular),
    )


def sample(f: ClosedFormFunction, grid: ComplexGrid, name: str = ""):
    """Evaluate ``f`` at the grid nodes.

    Raises SamplingError listing the nodes where evaluation overflows or
    falls on a declared singular point.
    """
    z = grid.nodes
    if f.singular:
        tol = 1e-12 * max(1.0, grid.domain.radius)
        hit = np.zeros(z.size, bool)
        for s in f.singular:
            hit |= np.abs(z - s) <= tol
        if hit.any():
            raise SamplingError(f"{f.name}: nodes on a singular point", np.flatnonzero(hit))
    with np.errstate(all="ignore"):
        v = np.asarray(f.evaluate(z))
    bad = ~np.isfinite(v)
    if v.ndim > 1:
        bad = bad.any(axis=tuple(range(1, v.ndim)))
    if bad.any():
        raise SamplingError(f"{f.name}: evaluation not finite at {bad.sum()} nodes", np.flatnonzero(bad))
    profile = None
    if f.is_radial and grid.domain.center == 0:
        r = grid.radii if grid.radii is not None else np.abs(z)
        r = r[r > 0]
        lo = min(2.0**-40, float(r.min()))
        profile = RadialProfile.from_function(f.radial, lo, float(r.max()), extra_radii=r)
    return GridField(grid, v, profile=profile, name=name or f.name)


def sample_dbar(f: ClosedFormFunction, grid: ComplexGrid):
    if f.dbar is None:
        raise ValueError(f"{f.name} has no analytic d-bar rule")
    with np.errstate(all="ignore"):
        v = np.asarray(f.dbar(grid.nodes))
    if not np.all(np.isfinite(v)):
        raise SamplingError(f"d-bar of {f.name} not finite on the grid")
    return GridField(grid, v, name=f"dbar {f.name}")


# ---------------------------------------------------------------------------
# Families

FAMILIES: dict = {}


def family(name):
    def register(builder):
        FAMILIES[name] = builder
        return builder

    return register


def closed_form(name, *args, **kwargs) -> ClosedFormFunction:
    """Look up a registered family by name and instantiate it."""
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown function family {name!r}; known: {sorted(FAMILIES)}") from None
    return builder(*args, **kwargs)


def profile_function(profile: RadialProfile, name: str = "profile") -> ClosedFormFunction:
    """Radial function backed by a tabulated profile; d-bar from the interpolant."""
    support = Domain.disk(profile.r_max) if profile.values[-1] == 0 else None
    return _radial(name, {"r_min": profile.r_min, "r_max": profile.r_max, "nodes": int(profile.radii.size)},
                   profile, profile.derivative, support=support)


def _radial_dbar(gprime):
    """d-bar of g(|z|) is g'(r) z / (2r)."""

    def dbar(z):
        z = np.asarray(z, complex)
        r = np.abs(z)
        with np.errstate(all="ignore"):
            out = gprime(r) * z / (2 * r)
        return np.where(r > 0, out, 0)

    return dbar


def _radial(name, params, g, gprime=None, log_mod=None, support=None, singular=(), rate=0.0):
    return ClosedFormFunction(
        name,
        params,
        lambda z: g(np.abs(np.asarray(z, complex))) + 0j,
        None if gprime is None else _radial_dbar(gprime),
        g,
        log_mod,
        support,
        singular,
        1,
        rate,
    )


@family("constant")
def constant(c=1.0):
    c = complex(c)
    return ClosedFormFunction(
        "constant",
        {"c": c},
        lambda z: np.full(np.shape(z), c),
        lambda z: np.zeros(np.shape(z), complex),
        lambda r: np.full(np.shape(r), c),
        (lambda t: np.full(np.shape(t), math.log(abs(c)))) if c != 0 else None,
    )


@family("monomial")
def monomial(j=1, k=0):
    """z**j * conj(z)**k."""
    j, k = int(j), int(k)

    def dbar(z):
        z = np.asarray(z, complex)
        if k == 0:
            return np.zeros_like(z)
        return k * z**j * np.conj(z) ** (k - 1)

    radial = None
    if j == 0 and k == 0:
        radial = lambda r: np.ones_like(r, dtype=complex)
    return ClosedFormFunction(
        "monomial", {"j": j, "k": k}, lambda z: np.asarray(z, complex) ** j * np.conj(z) ** k, dbar, radial
    )


@family("z")
def identity():
    return monomial(1, 0)


@family("zbar")
def conj_identity():
    return monomial(0, 1)


@family("abs-power")
def abs_power(a=1.0):
    """|z|**a; singular at 0 when a < 0."""
    a = float(a)
    sing = (0j,) if a < 0 else ()
    return _radial(
        "abs-power",
        {"a": a},
        lambda r: np.asarray(r, float) ** a,
        lambda r: a * np.asarray(r, float) ** (a - 1),
        lambda t: np.zeros(np.shape(t)),
        singular=sing,
        rate=-a,
    )


@family("disk-indicator")
def disk_indicator(radius=1.0):
    R = float(radius)
    return _radial(
        "disk-indicator",
        {"radius": R},
        lambda r: np.where(np.asarray(r) < R, 1.0, 0.0),
        support=Domain.disk(R),
    )


@family("annulus-indicator")
def annulus_indicator(inner=1.0, outer=2.0):
    a, b = float(inner), float(outer)
    return _radial(
        "annulus-indicator",
        {"inner": a, "outer": b},
        lambda r: np.where((np.asarray(r) > a) & (np.asarray(r) < b), 1.0, 0.0),
        support=Domain.annulus(a, b),
    )


@family("gaussian")
def gaussian(width=1.0, center=0j, amplitude=1.0):
    w2 = float(width) ** 2
    c = complex(center)
    A = float(amplitude)

    def ev(z):
        d = np.asarray(z, complex) - c
        return A * np.exp(-np.abs(d) ** 2 / w2) + 0j

    def dbar(z):
        d = np.asarray(z, complex) - c
        return -d / w2 * A * np.exp(-np.abs(d) ** 2 / w2)

    radial = lm = None
    if c == 0:
        radial = lambda r: A * np.exp(-np.asarray(r) ** 2 / w2)
        lm = lambda t: math.log(A) - np.exp(-2 * np.asarray(t)) / w2
    return ClosedFormFunction(
        "gaussian", {"width": float(width), "center": c, "amplitude": A}, ev, dbar, radial, lm
    )


@family("inverse-quadratic")
def inverse_quadratic(c=1.0, scale=1.0):
    """c / (1 + |z|^2 / scale^2): positive and square integrable on the plane."""
    c, a2 = float(c), float(scale) ** 2

    def g(r):
        return c / (1.0 + np.asarray(r, float) ** 2 / a2)

    return _radial(
        "inverse-quadratic", {"c": c, "scale": float(scale)}, g, lambda r: -2 * c * np.asarray(r) / a2 / (1 + np.asarray(r) ** 2 / a2) ** 2
    )


@family("poly-bump")
def poly_bump(radius=1.0):
    """(1 - |z|^2/R^2)^2 inside D_R, 0 outside (C^1)."""
    R2 = float(radius) ** 2

    def g(r):
        s = 1 - np.asarray(r, float) ** 2 / R2
        return np.where(s > 0, s * s, 0.0)

    def dbar(z):
        z = np.asarray(z, complex)
        s = 1 - np.abs(z) ** 2 / R2
        return np.where(s > 0, -2 * z * s / R2, 0)

    return ClosedFormFunction(
        "poly-bump", {"radius": float(radius)}, lambda z: g(np.abs(z)) + 0j, dbar, g, None, Domain.disk(radius)
    )


@family("std-bump")
def std_bump(radius=1.0, center=0j):
    """exp(-1/(1 - |z-c|^2/R^2)) inside D_R(c); value e^{-1} at the centre."""
    R2 = float(radius) ** 2
    c = complex(center)

    def ev(z):
        d = np.asarray(z, complex) - c
        s = np.abs(d) ** 2 / R2
        with np.errstate(divide="ignore", over="ignore"):
            out = np.exp(-1.0 / (1.0 - s))
        return np.where(s < 1, out, 0.0) + 0j

    def dbar(z):
        d = np.asarray(z, complex) - c
        s = np.abs(d) ** 2 / R2
        with np.errstate(all="ignore"):
            out = -np.exp(-1.0 / (1.0 - s)) * d / (R2 * (1.0 - s) ** 2)
        return np.where(s < 1, out, 0)

    radial = None
    if c == 0:
        radial = lambda r: ev(np.asarray(r, float)).real
    return ClosedFormFunction(
        "std-bump", {"radius": float(radius), "center": c}, ev, dbar, radial, None, Domain.disk(radius, c)
    )


@family("annulus-bump")
def annulus_bump(inner=0.25, outer=0.5):
    """Smooth radial bump supported in inner < |z| < outer, peak value 1."""
    a, b = float(inner), float(outer)
    if not 0 <= a < b:
        raise ValueError("annulus bump needs 0 <= inner < outer")
    peak = 4.0 / (b - a) ** 2

    def g(r):
        r = np.asarray(r, float)
        q = (r - a) * (b - r)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.exp(peak - 1.0 / q)
        return np.where(q > 0, out, 0.0)

    def gp(r):
        r = np.asarray(r, float)
        q = (r - a) * (b - r)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.exp(peak - 1.0 / q) * (a + b - 2 * r) / q**2
        return np.where(q > 0, out, 0.0)

    sup = Domain.annulus(a, b) if a > 0 else Domain.disk(b)
    return _radial("annulus-bump", {"inner": a, "outer": b}, g, gp, support=sup)


def _exact_l2_value(e):
    def g(r):
        # ln 0 = -inf gives the limit value 0 at the origin
        with np.errstate(divide="ignore"):
            return np.exp(-((-np.log(np.asarray(r, float))) ** e))

    return g


@family("exact-l2-u")
def exact_l2_u(eps=0.25):
    """exp(-(-ln|z|)^eps) on the punctured disk of radius 1/2."""
    e = float(eps)
    return _radial(
        "exact-l2-u",
        {"eps": e},
        _exact_l2_value(e),
        lambda r: np.exp(-((-np.log(r)) ** e)) * e * (-np.log(r)) ** (e - 1) / r,
        lambda t: -(np.asarray(t, float) ** e),
        support=Domain.disk(0.5),
        singular=(0j,),
    )


@family("exact-l2-V")
def exact_l2_v(eps=0.25):
    """eps / (2 |z| (-ln|z|)^(1-eps))."""
    e = float(eps)

    def g(r):
        r = np.asarray(r, float)
        return e / (2 * r * (-np.log(r)) ** (1 - e))

    def lm(t):
        t = np.asarray(t, float)
        return math.log(e / 2) - (1 - e) * np.log(t)

    return _radial("exact-l2-V", {"eps": e}, g, None, lm, support=Domain.disk(0.5), singular=(0j,), rate=1.0)


@family("subcritical-u")
def subcritical_u(eps=0.5):
    """exp(-|z|^-eps), flat at the origin."""
    e = float(eps)

    def g(r):
        r = np.asarray(r, float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(r > 0, np.exp(-(r ** (-e))), 0.0)

    def gp(r):
        r = np.asarray(r, float)
        with np.errstate(all="ignore"):
            out = np.exp(-(r ** (-e))) * e * r ** (-e - 1)
        return np.where(np.isfinite(out), out, 0.0)

    return _radial("subcritical-u", {"eps": e}, g, gp, lambda t: -np.exp(e * np.asarray(t, float)))


@family("subcritical-V")
def subcritical_v(eps=0.5):
    """eps / (2 |z|^(eps+1))."""
    e = float(eps)
    return _radial(
        "subcritical-V",
        {"eps": e},
        lambda r: e / (2 * np.asarray(r, float) ** (e + 1)),
        None,
        lambda t: np.full(np.shape(t), math.log(e / 2)),
        singular=(0j,),
        rate=e + 1,
    )


@family("inv-z")
def inv_z():
    """1/z: holomorphic off the origin."""
    return ClosedFormFunction(
        "inv-z",
        {},
        lambda z: 1.0 / np.asarray(z, complex),
        lambda z: np.zeros(np.shape(z), complex),
        None,
        None,
        None,
        (0j,),
    )
