"""
One-dimensional quadrature for radial integrals.

A radial integral over a disk or annulus is mapped to the half line by
t = -ln r, so 2*pi * int_0^R g(s) s ds becomes 2*pi * int_T^inf g(e^-t) e^-2t dt
with T = -ln R.  Integrands are handled through their logarithm, which keeps
quantities like exp(-(ln 1/r)^eps) at r = 2^-40 far from underflow.

Bounded ranges use composite Gauss-Legendre on unit panels in t.  The half
line uses panels of doubling width, each split into Gauss-Legendre subpanels,
and stops once a panel adds less than ``tol`` relative to the running total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

_ORDER = 16
_X, _W = np.polynomial.legendre.leggauss(_ORDER)
_LOG_W = np.log(_W)
_T_CAP = 1e300
_LOG_CAP = 700.0


def _log_panel(logf, a, b):
    """ln of int_a^b exp(logf(t)) dt on one Gauss panel."""
    t = 0.5 * (b - a) * _X + 0.5 * (a + b)
    with np.errstate(all="ignore"):
        vals = np.asarray(logf(t), float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    return float(logsumexp(vals + _LOG_W)) + math.log(0.5 * (b - a))


def log_integral(logf, a, b, panel=1.0):
    """ln int_a^b exp(logf(t)) dt using Gauss panels of width <= ``panel``."""
    if b <= a:
        return -math.inf
    k = max(1, int(math.ceil((b - a) / panel)))
    edges = np.linspace(a, b, k + 1)
    parts = [_log_panel(logf, edges[i], edges[i + 1]) for i in range(k)]
    return float(logsumexp(parts))


@dataclass(frozen=True)
class TailResult:
    log_value: float
    converged: bool
    panels: int

    @property
    def value(self):
        return math.exp(self.log_value) if self.log_value < _LOG_CAP else math.inf


def log_tail(logf, a, tol=1e-15, sub=4):
    """ln int_a^inf exp(logf(t)) dt over panels [a + 2^j - 1, a + 2^(j+1) - 1]."""
    total = -math.inf
    quiet = 0
    j = 0
    lo = a
    width = 1.0
    while True:
        hi = lo + width
        if hi > _T_CAP:
            return TailResult(total, False, j)
        edges = np.linspace(lo, hi, sub + 1)
        part = float(logsumexp([_log_panel(logf, edges[i], edges[i + 1]) for i in range(sub)]))
        total = float(np.logaddexp(total, part))
        j += 1
        if total > _LOG_CAP:
            return TailResult(total, False, j)
        if part < total + math.log(tol):
            quiet += 1
            if quiet >= 2:
                return TailResult(total, True, j)
        else:
            quiet = 0
        lo, width = hi, 2 * width


# ---------------------------------------------------------------------------
# disk and annulus integrals of |u|^p, given t -> ln|u(e^-t)|


def _integrand(parts, p):
    # |u|^p s^2 dt with s = e^-t; the linear parts combine before evaluation
    rate, rest = parts
    slope = p * rate - 2.0
    return lambda t: slope * t + p * rest(t)


def log_disk_mass(parts, r, p=2.0, tol=1e-15):
    """ln(2*pi * int_0^r |u(s)|^p s ds) and a convergence flag.

    ``parts`` is the (rate, rest) pair of ClosedFormFunction.log_parts.
    """
    res = log_tail(_integrand(parts, p), -math.log(r), tol)
    return TailResult(res.log_value + math.log(2 * math.pi), res.converged, res.panels)


def log_annulus_mass(parts, r_in, r_out, p=2.0):
    """ln(2*pi * int_{r_in}^{r_out} |u(s)|^p s ds)."""
    a, b = -math.log(r_out), -math.log(r_in)
    return log_integral(_integrand(parts, p), a, b) + math.log(2 * math.pi)


def annulus_mass(g, r_in, r_out, panel=0.25):
    """2*pi * int_{r_in}^{r_out} g(s) s ds for a complex radial function g.

    Plain (non-log) composite Gauss in t = -ln s; for smooth integrands.
    """
    a, b = -math.log(r_out), -math.log(r_in)
    k = max(1, int(math.ceil((b - a) / panel)))
    edges = np.linspace(a, b, k + 1)
    total = 0j
    for i in range(k):
        lo, hi = edges[i], edges[i + 1]
        t = 0.5 * (hi - lo) * _X + 0.5 * (hi + lo)
        s = np.exp(-t)
        total += 0.5 * (hi - lo) * np.sum(_W * np.asarray(g(s)) * s * s)
    return complex(2 * math.pi * total)
