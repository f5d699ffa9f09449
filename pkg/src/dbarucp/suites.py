"""Verification suites: each runs a group of checks and returns a VerificationReport.

The pass thresholds are the acceptance thresholds; values that only inform
(alternative reference values, timings) ride along in each item's values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import gallery as gal
from . import inequalities as iq
from . import norms
from .gridfn import Domain, closed_form, make_grid, sample, sample_dbar
from .operators import (
    cauchy_green_reconstruct,
    cauchy_moments,
    kernel_moment_identity,
    self_cell_closed_form,
    self_cell_subgrid,
)
from .reports import CheckItem, VerificationReport

SUITES = ("identity", "operators", "flatness", "hls", "certificate", "gallery", "appendix")


@dataclass
class SuiteConfig:
    grid_n: int = 256
    trials: int = 100
    seed: int = 42
    tol: float = 0.01
    direct: bool = False
    cache: dict = field(default_factory=dict, repr=False)

    def echo(self):
        return {"grid_n": self.grid_n, "trials": self.trials, "seed": self.seed, "tol": self.tol,
                "direct": self.direct}


def _timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


# ---------------------------------------------------------------------------
# identity


def identity_check(n=1000, seed=42):
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(n):
        while True:
            z = complex(*rng.uniform(-2, 2, 2))
            zeta = complex(*rng.uniform(-2, 2, 2))
            if abs(zeta) > 0.1 and abs(z - zeta) > 1e-3:
                break
        m = int(rng.integers(1, 9))
        lhs, rhs = kernel_moment_identity(z, zeta, m)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
    dt = time.perf_counter() - t
    return CheckItem("kernel-identity", worst < 1e-10 and dt < 1.0,
                     {"max_scaled_residual": worst, "samples": n, "runtime_s": dt})


def suite_identity(cfg: SuiteConfig):
    rep = VerificationReport("identity", "operators", cfg.echo())
    rep.add(identity_check(seed=cfg.seed))
    return rep


# ---------------------------------------------------------------------------
# operators


CG_HALF_WIDTH = 1.25


def cg_error(n, method="auto"):
    """Sup error of the Cauchy-Green reconstruction of (1-|z|^2)^2 on a square grid."""
    u = closed_form("poly-bump", 1.0)
    g = make_grid(Domain.square(CG_HALF_WIDTH), n)
    (rec, dt) = _timed(cauchy_green_reconstruct, sample_dbar(u, g), method=method)
    exact = sample(u, g).values[:, 0]
    err = float(np.max(np.abs(rec.values[:, 0] - exact)))
    return err, float(np.max(np.abs(exact))), dt


def cg_checks(n=256, direct=False):
    err, sup, dt = cg_error(n, "fft")
    err_h, _, _ = cg_error(n // 2, "fft")
    items = [
        CheckItem("cg-reconstruction-accuracy", err < 0.02 * sup and dt < 5.0,
                  {"grid_n": n, "sup_error": err, "relative_error": err / sup, "runtime_fft_s": dt}),
        CheckItem("cg-halving-at-most-doubles", err_h <= 2 * err,
                  {"error_n": err, "error_half_n": err_h, "ratio": err_h / err},
                  "literal clause; second-order quadrature gives a ratio near 4"),
    ]
    if direct:
        errd, _, dtd = cg_error(n, "direct")
        items.append(CheckItem("cg-direct-sum", errd < 0.02 * sup and dtd < 120.0,
                               {"sup_error": errd, "runtime_direct_s": dtd, "fft_vs_direct": abs(errd - err)}))
    return items


def moment_check(n=256, l_max=5):
    u = closed_form("annulus-bump", 0.25, 0.5)
    g = make_grid(Domain.square(0.6), n)
    f = sample_dbar(u, g)
    mom = cauchy_moments(f, l_max)
    l1 = float(np.sum(g.weights * np.abs(f.values[:, 0])))
    worst = max(abs(m) for m in mom)
    return CheckItem("moment-vanishing", worst < 1e-6 * l1,
                     {"max_moment": worst, "dbar_l1": l1, "l_max": l_max, "grid_n": n})


def semigroup_check(n=256):
    g = make_grid(Domain.square(2.0), n)
    fs = [closed_form("gaussian", 0.3), closed_form("poly-bump", 0.6), closed_form("gaussian", 0.3, 0.2 + 0.1j)]
    Ks, res = [], []
    for f in fs:
        K, r = iq.semigroup_residual(sample(f, g), flag=math.inf)
        Ks.append(K)
        res.append(r)
    spread = (max(Ks) - min(Ks)) / np.mean(Ks)
    return CheckItem("semigroup", spread < 0.05 and max(res) < 0.05,
                     {"K_hat": Ks, "residuals": res, "spread": spread, "K_continuum": iq.SEMIGROUP_K, "grid_n": n})


def hoelder_check(n=256, trials=9, seed=7, p=4.0):
    q = p / (p - 1)
    ceiling = iq.kernel_q_ceiling(q)
    derived = (3 * math.pi * 2 ** (2 / 3)) ** 0.75
    rng = np.random.default_rng(seed)
    g = make_grid(Domain.square(1.25), n)
    ratios, knorm = [], 0.0
    for t in range(trials):
        f, V, _ = iq.trial_functions(rng, iq.FAMILIES[t % len(iq.FAMILIES)])
        res = iq.hoelder_p_gt2_ratio(sample(f, g), norms.WeightField.sampled(V, g), p)
        ratios.append(res.ratio)
        knorm = res.kernel_q_norm
    ok = abs(ceiling - derived) < 1e-12 * derived and knorm <= ceiling and max(ratios) <= knorm * (1 + 1e-6)
    return CheckItem("hoelder-p-gt-2", ok,
                     {"p": p, "ceiling": ceiling, "ceiling_derived": derived, "kernel_q_norm_max": knorm,
                      "max_ratio": max(ratios), "ratios": ratios})


def self_cell_check():
    vals = {}
    ok = True
    for beta in (1.0, 1.5):
        cf, sg = self_cell_closed_form(beta), self_cell_subgrid(beta)
        vals[f"beta_{beta:g}"] = {"closed_form": cf, "subgrid": sg}
        ok &= abs(cf - sg) < 0.01 * cf
    return CheckItem("self-cell-constant", ok, vals)


def suite_operators(cfg: SuiteConfig):
    rep = VerificationReport("operators", "operators", cfg.echo())
    for it in cg_checks(cfg.grid_n, cfg.direct):
        rep.add(it)
    rep.add(moment_check(cfg.grid_n))
    rep.add(semigroup_check(cfg.grid_n))
    rep.add(hoelder_check(cfg.grid_n))
    rep.add(self_cell_check())
    return rep


# ---------------------------------------------------------------------------
# flatness and integrability


def flatness_checks():
    t = time.perf_counter()
    ex = gal.example_exact_l2(0.25)
    f2 = norms.flatness_functional(ex.u, m=2)
    f3 = norms.flatness_functional(ex.u, m=3)
    sub = gal.example_subcritical(0.5, 1.0)
    verdicts = [norms.flatness_functional(sub.u, m=m).verdict for m in range(11)]
    dt = time.perf_counter() - t
    return [
        CheckItem("exact-l2-flatness", f2.verdict == norms.TENDS_TO_ZERO and f3.verdict == norms.DIVERGES and dt < 10,
                  {"m2": f2.verdict, "m3": f3.verdict, "smallest_radius": float(f2.radii[-1]), "runtime_s": dt}),
        CheckItem("subcritical-flatness", all(v == norms.TENDS_TO_ZERO for v in verdicts),
                  {"verdicts": verdicts, "order": str(norms.vanishing_order_estimate(sub.u))}),
    ]


def membership_checks():
    ex = gal.example_exact_l2(0.25)
    p2 = norms.lp_membership_probe(ex.V, 2.0, outer=0.5)
    p25 = norms.lp_membership_probe(ex.V, 2.5, outer=0.5)
    oracle = 0.23583983346909917
    subs = {}
    ok_sub = True
    for eps, p in ((0.3, 1.0), (0.5, 1.2), (0.1, 1.5)):
        pair = gal.example_subcritical(eps, p)
        rp = norms.lp_membership_probe(pair.V, p, outer=1.0)
        subs[f"eps={eps:g},p={p:g}"] = rp.verdict
        ok_sub &= rp.verdict == "converges"
    return [
        CheckItem("exact-l2-l2-membership",
                  p2.verdict == "converges" and abs(p2.limit - oracle) < 1e-3 * oracle and p25.verdict == "diverges",
                  {"p2_verdict": p2.verdict, "p2_limit": p2.limit, "oracle": oracle, "p2_5_verdict": p25.verdict}),
        CheckItem("subcritical-lp-membership", ok_sub, subs),
    ]


def suite_flatness(cfg: SuiteConfig):
    rep = VerificationReport("flatness", "norms", cfg.echo())
    for it in flatness_checks() + membership_checks():
        rep.add(it)
    return rep


# ---------------------------------------------------------------------------
# HLS


def hls_reports(cfg: SuiteConfig):
    key = ("hls", cfg.trials, cfg.seed, cfg.grid_n)
    if key not in cfg.cache:
        base = iq.run_hls_suite(cfg.trials, cfg.seed, cfg.grid_n)
        fine = iq.run_hls_suite(cfg.trials, cfg.seed, 2 * cfg.grid_n)
        cfg.cache[key] = (base, fine)
    return cfg.cache[key]


def hls_check(base, fine):
    drift = abs(fine.c0_hat - base.c0_hat) / base.c0_hat
    ok = base.all_finite and fine.all_finite and base.max_scale_deviation < 1e-13 and drift < 0.10
    return CheckItem("weighted-hls", ok,
                     {"trials": len(base.ratios), "c0_hat": base.c0_hat, "c0_hat_doubled": fine.c0_hat,
                      "drift": drift, "max_scale_deviation": base.max_scale_deviation,
                      "max_half_ratio": max(base.half_ratios)})


def suite_hls(cfg: SuiteConfig):
    rep = VerificationReport("hls", "inequalities", cfg.echo())
    rep.add(hls_check(*hls_reports(cfg)))
    return rep


# ---------------------------------------------------------------------------
# certificate


def certificate_checks(c0_hat, grid_n=256, r=0.5, ks=(8, 16, 32), ms=range(1, 7)):
    t = time.perf_counter()
    ladder = iq.certificate_ladder(closed_form("annulus-bump"), closed_form("constant", 1.0), c0_hat, r, ks, ms,
                                   grid_n=grid_n)
    failing = sorted({s.name for R in ladder.values() for s in R.steps if s.licensed and not s.holds})
    any_rep = next(iter(ladder.values()))
    dt = time.perf_counter() - t
    main = CheckItem("certificate-chain", not failing and dt < 300,
                     {"failing_licensed_steps": failing, "smallness": any_rep.step("smallness").lhs,
                      "c0_hat": c0_hat, "runtime_s": dt})

    flat = iq.certificate_ladder(closed_form("subcritical-u", 1.0), closed_form("subcritical-V", 1.0), c0_hat, r,
                                 ks, ms, grid_n=grid_n)
    dec = {}
    ok = True
    for m in ms:
        A = [flat[(k, m)].A for k in ks]
        dec[str(m)] = A
        ok &= all(b < a for a, b in zip(A, A[1:]))
    flat_item = CheckItem("certificate-flat-A-decreasing", ok, {"A_by_m": dec, "ks": list(ks)})
    return [main, flat_item]


def suite_certificate(cfg: SuiteConfig):
    rep = VerificationReport("certificate", "inequalities", cfg.echo())
    key = ("hls", cfg.trials, cfg.seed, cfg.grid_n)
    if key in cfg.cache:
        c0 = cfg.cache[key][0].c0_hat
    else:
        c0 = iq.run_hls_suite(cfg.trials, cfg.seed, cfg.grid_n).c0_hat
    for it in certificate_checks(c0, cfg.grid_n):
        rep.add(it)
    return rep


# ---------------------------------------------------------------------------
# gallery


def equality_checks(tol=0.01):
    items = []
    for pair in (gal.example_exact_l2(0.25), gal.example_subcritical(0.5, 1.0), gal.example_product_2d(0.25)):
        an, fd, skipped = gal.equality_deviation(pair)
        items.append(CheckItem(f"equality-{pair.metadata['example']}", an < 1e-10 and fd < tol,
                               {"analytic_deviation": an, "fd_deviation": fd, "skipped_points": skipped}))
    return items


def product_checks():
    pe = gal.example_product_2d(0.25)
    rng = np.random.default_rng(3)
    Z = gal._random_bidisk(rng, 2000, 1e-3, 0.5)
    zero_min = float(np.min(np.abs(pe.u(Z))))
    rep, partials = gal.bidisk_l2_probe(0.25)
    pc = gal.product_combinator(closed_form("subcritical-u", 0.3), closed_form("subcritical-V", 0.3))
    sl = gal.line_restriction(pe, slice_value=0.3)
    return [
        CheckItem("product-2d-zero-set", zero_min > 0, {"min_modulus_off_axes": zero_min}),
        CheckItem("product-2d-l2", rep.verdict == "converges",
                  {"verdict": rep.verdict, "bidisk_partial": float(partials[-1])}),
        CheckItem("product-combinator", pc.metadata["two_d_residual"] <= 1e-8 and pc.metadata["V_lp"] <= pc.metadata["V_lp_bound"] * (1 + 1e-6),
                  {k: pc.metadata[k] for k in ("one_d_residual", "two_d_residual", "V_lp", "V_lp_bound")}),
        CheckItem("slice-restriction", sl.residual <= 1e-8, {"residual": sl.residual}),
    ]


def suite_gallery(cfg: SuiteConfig):
    rep = VerificationReport("gallery", "gallery", cfg.echo())
    for it in equality_checks(cfg.tol) + product_checks():
        rep.add(it)
    return rep


# ---------------------------------------------------------------------------
# appendix


def pairing_checks(tol=0.01):
    res, dt = _timed(gal.inv_z_pairing)
    target = res.displayed_target
    stokes = res.stokes_value
    rel = abs(res.value - target) / abs(target)
    rel_s = abs(res.value - stokes) / abs(stokes)
    return [
        CheckItem("inv-z-pairing", res.converged and rel < tol and dt < 60,
                  {"pairing": res.value, "target_minus_pi_i_phi0": target, "stokes_minus_pi_phi0": stokes,
                   "relative_error": rel, "relative_error_stokes": rel_s, "converged": res.converged,
                   "runtime_s": dt},
                  "target as displayed; the computed value matches -pi phi(0) instead"),
    ]


def weak_residual_checks(n=256, tol=0.01, seed=11):
    from .norms import h1_norm, lp_norm

    rng = np.random.default_rng(seed)
    g = make_grid(Domain.square(1.25), n)
    u = closed_form("poly-bump", 1.0)
    f = sample_dbar(u, g)
    rec = cauchy_green_reconstruct(f)
    worst = 0.0
    for _ in range(5):
        c = complex(*rng.uniform(-0.4, 0.4, 2))
        phi = gal.standard_bump(rng.uniform(0.2, 0.6), c)
        wr = gal.weak_dbar_residual(rec, f, phi)
        scale = lp_norm(rec, 2) * h1_norm(sample(phi, g))
        worst = max(worst, abs(wr.residual) / scale)
    phi = gal.standard_bump()
    lad = gal.punctured_disk_ladder(closed_form("inv-z"), phi)
    target = math.pi * 1j * float(phi(np.array([0j]))[0].real)
    rel = abs(lad.residual - target) / abs(target)
    return [
        CheckItem("weak-residual-reconstructed", worst < 1e-3, {"max_scaled_residual": worst, "grid_n": n}),
        CheckItem("weak-residual-inv-z", abs(lad.residual) > 0.5 * abs(target) and rel < tol,
                  {"residual": lad.residual, "target_pi_i_phi0": target, "relative_error": rel,
                   "ladder": {str(k): v for k, v in lad.ladder.items()}},
                  "nonzero as claimed; the value is -pi phi(0), not pi i phi(0)"),
    ]


def suite_appendix(cfg: SuiteConfig):
    rep = VerificationReport("appendix", "gallery", cfg.echo())
    for it in pairing_checks(cfg.tol) + weak_residual_checks(cfg.grid_n, cfg.tol):
        rep.add(it)
    return rep


RUNNERS = {
    "identity": suite_identity,
    "operators": suite_operators,
    "flatness": suite_flatness,
    "hls": suite_hls,
    "certificate": suite_certificate,
    "gallery": suite_gallery,
    "appendix": suite_appendix,
}


def run_suite(name: str, cfg: SuiteConfig | None = None):
    """Run one suite, or all of them, returning a list of reports."""
    cfg = SuiteConfig() if cfg is None else cfg
    if name == "all":
        names = SUITES
    elif name in RUNNERS:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    out = []
    for nm in names:
        t = time.perf_counter()
        rep = RUNNERS[nm](cfg)
        rep.duration = time.perf_counter() - t
        out.append(rep)
    return out
