"""Command line driver: ``verify``, ``gallery`` and ``hls``.

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time

import numpy as np

from . import gallery as gal
from . import inequalities as iq
from . import norms
from .gridfn import Domain, RadialProfile, make_grid, profile_function
from . import __version__
from .reports import SCHEMA_VERSION, dumps, hls_payload
from .suites import SUITES, SuiteConfig, run_suite

log = logging.getLogger("dbarucp")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PLOTS = ("flatness", "lp", "ratio")


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _grid_n(text):
    v = int(text)
    if v < 8:
        raise argparse.ArgumentTypeError("grid resolution must be at least 8")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="dbarucp", description="Verification toolkit for d-bar unique continuation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites and write a JSON report")
    v.add_argument("--suite", default="all", choices=SUITES + ("all",))
    v.add_argument("--grid-n", type=_grid_n, default=256)
    v.add_argument("--trials", type=_positive_int, default=100)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--tol", type=_positive_float, default=0.01,
                   help="relative tolerance for comparisons against reference values")
    v.add_argument("--direct", action="store_true", help="also time the direct-sum reconstruction")
    v.add_argument("--out", default="verify_report.json")

    g = sub.add_parser("gallery", help="export an example: profiles, metadata and plots")
    g.add_argument("--example", required=True, choices=gal.EXAMPLES + ("custom",))
    g.add_argument("--eps", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--grid-n", type=_grid_n, default=128)
    g.add_argument("--u-csv", help="radial profile of u (custom example)")
    g.add_argument("--v-csv", help="radial profile of V (custom example)")
    g.add_argument("--plot", default="all", choices=PLOTS + ("all", "none"))
    g.add_argument("--out", help="output directory (default gallery_<example>)")

    h = sub.add_parser("hls", help="randomized weighted-HLS suite")
    h.add_argument("--trials", type=_positive_int, default=100)
    h.add_argument("--seed", type=int, default=42)
    h.add_argument("--grid-n", type=_grid_n, default=256)
    h.add_argument("--scale-v", type=_positive_float, default=1.0)
    h.add_argument("--out", default="hls_report.json")
    return ap


def _write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args):
    cfg = SuiteConfig(grid_n=args.grid_n, trials=args.trials, seed=args.seed, tol=args.tol, direct=args.direct)
    t = time.perf_counter()
    reports = run_suite(args.suite, cfg)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "suite": args.suite,
        "reports": [r.to_dict() for r in reports],
        "overall": "pass" if all(r.passed for r in reports) else "fail",
        "duration_s": time.perf_counter() - t,
    }
    _write(args.out, dumps(payload))
    for r in reports:
        for it in r.items:
            print(f"{'PASS' if it.passed else 'FAIL'}  {r.check}/{it.name}")
    print(f"overall: {payload['overall']}  ->  {args.out}")
    return EXIT_OK if payload["overall"] == "pass" else EXIT_FAIL


# ---------------------------------------------------------------------------
# gallery


def _pair_for(args):
    ex = args.example
    if ex == "exact-l2":
        return gal.example_exact_l2(0.25 if args.eps is None else args.eps)
    if ex == "subcritical":
        return gal.example_subcritical(0.5 if args.eps is None else args.eps, 1.0 if args.p is None else args.p)
    if ex == "product-2d":
        return gal.example_product_2d(0.25 if args.eps is None else args.eps)
    if ex == "custom":
        if not (args.u_csv and args.v_csv):
            raise UsageError("the custom example needs --u-csv and --v-csv")
        try:
            pu, pv = RadialProfile.from_csv(args.u_csv), RadialProfile.from_csv(args.v_csv)
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        return gal.ExamplePair(profile_function(pu, "u"), profile_function(pv, "V"),
                               Domain.disk(min(pu.r_max, pv.r_max)), {"example": "custom", "relation": "inequality"})
    return None


def _flatness_orders(pair):
    if pair.metadata.get("example") == "subcritical":
        return list(range(0, 11, 2))
    return [0, 1, 2, 3, 4]


def _radial_outputs(pair, out, plots, grid_n):
    """Profiles, flatness and probe summaries for a one-variable radial pair."""
    R = pair.domain.radius
    u, V = pair.u, pair.V
    RadialProfile.from_function(u.radial, 2.0**-40, R * (1 - 1e-9)).to_csv(os.path.join(out, "u_profile.csv"))
    RadialProfile.from_function(V.radial, 2.0**-40, R * (1 - 1e-9)).to_csv(os.path.join(out, "V_profile.csv"))
    radii = R * norms.dyadic(30)
    flat = {m: norms.flatness_functional(u, m=m, radii=radii) for m in _flatness_orders(pair)}
    p = float(pair.metadata.get("p", 2.0))
    probes = {q: norms.lp_membership_probe(V, q, outer=R) for q in sorted({p, 2.0, 2.5})}
    an, fd, skipped = gal.equality_deviation(pair) if pair.metadata.get("relation") == "equality" else (None, None, 0)
    summary = {
        "flatness": {str(m): rep.verdict for m, rep in flat.items()},
        "vanishing_order": norms.vanishing_order_estimate(u, radii=radii),
        "lp_probe": {f"{q:g}": {"verdict": r.verdict, "limit": r.limit} for q, r in probes.items()},
        "equality_deviation": {"analytic": an, "finite_difference": fd, "skipped": skipped},
    }
    if "flatness" in plots:
        _plot_flatness(flat, os.path.join(out, "flatness.png"))
    if "lp" in plots:
        _plot_probes(probes, os.path.join(out, "lp_probe.png"))
    if "ratio" in plots:
        _plot_ratio(pair, grid_n, os.path.join(out, "ratio_map.png"))
    return summary


def _product_outputs(pair, out, plots, grid_n):
    base = pair.metadata["factor"]
    summary = _radial_outputs(base, out, tuple(p for p in plots if p != "ratio"), grid_n)
    an, fd, skipped = gal.equality_deviation(pair)
    summary["equality_deviation_2d"] = {"analytic": an, "finite_difference": fd, "skipped": skipped}
    sl = gal.line_restriction(pair, slice_value=0.3)
    summary["slice_z2_0.3_residual"] = sl.residual
    if "ratio" in plots:
        _plot_ratio(pair, grid_n, os.path.join(out, "ratio_map.png"), slice_value=0.3)
    return summary


def _inv_z_outputs(out, plots):
    phi = gal.standard_bump()
    RadialProfile.from_function(phi.radial, 1e-6, 1.0).to_csv(os.path.join(out, "phi_profile.csv"))
    res = gal.inv_z_pairing(phi)
    lad = gal.punctured_disk_ladder(gal.closed_form("inv-z"), phi)
    summary = {
        "pairing": res.value,
        "displayed_value_minus_pi_i_phi0": res.displayed_target,
        "stokes_value_minus_pi_phi0": res.stokes_value,
        "converged": res.converged,
        "eps_ladder": res.ladder,
        "extrapolations": res.extrapolations,
        "weak_residual": lad.residual,
        "cutoff_ladder": {str(k): v for k, v in lad.ladder.items()},
    }
    print(f"pairing            {res.value.real:+.10f} {res.value.imag:+.3e}i")
    print(f"-pi i phi(0)       {res.displayed_target.real:+.10f} {res.displayed_target.imag:+.10f}i")
    print(f"-pi phi(0)         {res.stokes_value.real:+.10f} {res.stokes_value.imag:+.10f}i")
    if plots:
        _plot_ladder(res, os.path.join(out, "pairing_ladder.png"))
    return summary


def cmd_gallery(args):
    plots = PLOTS if args.plot == "all" else (() if args.plot == "none" else (args.plot,))
    out = args.out or f"gallery_{args.example}"
    try:
        pair = _pair_for(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {out}: {exc}") from exc
    if args.example == "inv-z":
        summary = _inv_z_outputs(out, plots)
        meta = {"example": "inv-z", "phi": gal.standard_bump().describe()}
    elif args.example == "product-2d":
        summary = _product_outputs(pair, out, plots, args.grid_n)
        meta = pair.describe()
    else:
        summary = _radial_outputs(pair, out, plots, args.grid_n)
        meta = pair.describe()
    meta.get("metadata", {}).pop("factor", None)
    payload = {"schema_version": SCHEMA_VERSION, "toolkit_version": __version__, "example": meta,
               "computed": summary}
    _write(os.path.join(out, "metadata.json"), dumps(payload))
    print(f"wrote {out}/")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plots


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _plot_flatness(flat, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for m, rep in flat.items():
        ax.plot(np.log2(rep.radii), rep.log_values / np.log(10), marker=".", label=f"m={m} ({rep.verdict})")
    ax.set_xlabel("log2 r")
    ax.set_ylabel("log10 r^-m int_{D_r} |u|^2")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_probes(probes, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for q, rep in probes.items():
        with np.errstate(divide="ignore"):
            ax.plot(np.log2(rep.cutoffs), np.log10(rep.partials), marker=".", label=f"p={q:g} ({rep.verdict})")
    ax.set_xlabel("log2 cutoff")
    ax.set_ylabel("log10 partial integral of V^p")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_ratio(pair, grid_n, path, slice_value=None):
    plt = _pyplot()
    R = pair.domain.radius
    g = make_grid(Domain.square(R), grid_n)
    z = g.nodes
    with np.errstate(all="ignore"):
        if slice_value is None:
            num = np.abs(pair.u.dbar(z))
            den = np.abs(pair.V(z)) * np.abs(pair.u(z))
        else:
            Z = np.stack([z, np.full_like(z, slice_value)], axis=-1)
            num = gal.dbar_modulus_2d(pair.u, Z)
            den = pair.V(Z) * np.abs(pair.u(Z))
        ratio = np.where(np.abs(z) < R, num / den, np.nan)
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(g.as_image(ratio), origin="lower", extent=(-R, R, -R, R), cmap="viridis")
    fig.colorbar(im, ax=ax, label="|dbar u| / (V |u|)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_ladder(res, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = np.array(res.ladder)
    ax.plot(range(len(vals)), vals.real, marker="o", label="annulus integral (real part)")
    ax.plot(range(1, len(vals)), np.real(res.extrapolations), marker="s", label="Richardson")
    ax.axhline(res.stokes_value.real, color="k", lw=0.8, ls="--", label="-pi phi(0)")
    ax.set_xlabel("ladder step (eps halves)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# hls


def cmd_hls(args):
    rep = iq.run_hls_suite(args.trials, args.seed, args.grid_n, v_scale=args.scale_v)
    command = {"trials": args.trials, "seed": args.seed, "grid_n": args.grid_n, "scale_v": args.scale_v}
    _write(args.out, dumps(hls_payload(rep, command)))
    ok = rep.all_finite and rep.max_scale_deviation < 1e-13
    print(f"C0_hat = {rep.c0_hat:.12g} over {args.trials} trials; max scale deviation {rep.max_scale_deviation:.3g}")
    print(f"{'PASS' if ok else 'FAIL'}  ->  {args.out}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "gallery": cmd_gallery, "hls": cmd_hls}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
