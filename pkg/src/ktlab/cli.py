"""Command-line orchestration: reproducible experiment runs with structured output.

Every run serializes its configuration, embeds a hash of it in each output
file, and writes a manifest (config echo, output list, wall time, seed).
Outputs are byte-identical for identical configurations regardless of the
worker count; wall-clock timings live only in the manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .endpoint import (
    FourierSideConfig,
    GrowthTable,
    angular_integral_exact_d2,
    angular_schedule_mc,
    divergence_study,
    vtrunc_lhs,
    vtrunc_rhs,
)
from .exponents import (
    ExponentTuple,
    ExtRational,
    check_admissible,
    q_of_sigma,
    scale as scale_tuple,
)
from .functions import (
    GaussianPhaseSpace,
    GaussianSlice,
    GaussianSpaceTime,
    make_counterexample_g,
)
from .grids import GAUSS, Axis, GridSpec, sinh_stretched_interval
from .multilinear import (
    bilinear_bound_check,
    interpolated_bound_check,
    nonendpoint_sweep,
    sigma_exponent_tuple,
)
from .norms import dual_ratio, mixed_norm, strichartz_ratio
from .transport import density


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config, hashing, serialization

# run-shape keys that must not affect output bytes
_NON_SEMANTIC_KEYS = ("workers", "out_dir")


def config_hash(config: dict) -> str:
    semantic = {k: v for k, v in config.items() if k not in _NON_SEMANTIC_KEYS}
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path: str, header: list[str], rows, chash: str):
    with open(path, "w") as fh:
        fh.write(f"# config {chash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else _fmt(c) for c in row) + "\n")


def write_json(path: str, payload: dict, chash: str):
    payload = dict(payload)
    payload["config_hash"] = chash
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(out_dir: str, command: str, config: dict, outputs: list[str],
                   timings: dict, seed: int | None):
    manifest = {
        "command": command,
        "config": config,
        "outputs": outputs,
        "timings": timings,
        "seed": seed,
        "version": __version__,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_schedule(text: str) -> list[float]:
    """Schedules: comma list '1,2,4', geometric '8:512:x2' or '0.1:1e-4:/10'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"schedule {text!r} must be lo:hi:xK or lo:hi:/K")
        lo, hi, step = float(parts[0]), float(parts[1]), parts[2]
        if step.startswith("x"):
            factor = float(step[1:])
        elif step.startswith("/"):
            factor = 1.0 / float(step[1:])
        else:
            raise UsageError(f"schedule step {step!r} must start with 'x' or '/'")
        if factor <= 0 or factor == 1.0:
            raise UsageError("schedule factor must be positive and != 1")
        values = []
        v = lo
        if (factor > 1) != (hi > lo):
            raise UsageError(f"schedule {text!r} never reaches its endpoint")
        while (v <= hi * (1 + 1e-12)) if factor > 1 else (v >= hi * (1 - 1e-12)):
            values.append(v)
            v *= factor
        return values
    return [float(v) for v in text.split(",")]


def parse_rational_list(text: str) -> list[Fraction]:
    return [Fraction(tok.strip()) for tok in text.split(",")]


# ---------------------------------------------------------------------------
# subcommand implementations (each returns a list of output filenames)

def cmd_exponents(args, out_dir, chash):
    d = args.d
    if args.scan:
        n = args.denominator
        rows = []
        for i in range(n + 1):
            for j in range(n + 1):
                inv_p, inv_q = Fraction(i, n), Fraction(j, n)
                inv_r = inv_p + Fraction(2, d) * inv_q
                if inv_r > 1:
                    rows.append((float(inv_p), float(inv_q), "invalid"))
                    continue
                inv_a = Fraction(1, 2) * (inv_r + inv_p)
                try:
                    E = ExponentTuple(ExtRational.from_reciprocal(inv_q),
                                      ExtRational.from_reciprocal(inv_p),
                                      ExtRational.from_reciprocal(inv_r),
                                      ExtRational.from_reciprocal(inv_a))
                except ValueError:
                    rows.append((float(inv_p), float(inv_q), "invalid"))
                    continue
                verdict = check_admissible(E, d)
                rows.append((float(inv_p), float(inv_q), verdict.status))
        path = os.path.join(out_dir, "region.csv")
        write_csv(path, ["one_over_p", "one_over_q", "status"], rows, chash)
        return ["region.csv"]

    E = ExponentTuple(ExtRational(args.q), ExtRational(args.p),
                      ExtRational(args.r), ExtRational(args.a))
    verdict = check_admissible(E, d)
    print(verdict.status)
    payload = {"d": d, "tuple": {"q": str(E.q), "p": str(E.p), "r": str(E.r),
                                 "a": str(E.a)},
               "status": verdict.status, "violated": list(verdict.violated)}
    if args.scale is not None:
        scaled = scale_tuple(E, args.scale)
        print(str(scaled))
        payload["scaled"] = {"lambda": args.scale, "tuple": str(scaled)}
    write_json(os.path.join(out_dir, "exponents.json"), payload, chash)
    return ["exponents.json"]


def cmd_density(args, out_dir, chash):
    d = args.d
    f0 = GaussianPhaseSpace(d, x_width=args.x_width, v_width=args.v_width)
    rho = density(f0, GridSpec.uniform(d, -4.0, 4.0, args.v_points, rule=GAUSS))
    ts = parse_schedule(args.times)
    xs = np.linspace(-args.x_max, args.x_max, args.x_points)
    rows = []
    for t in ts:
        if d == 1:
            pts = xs[:, None]
        else:
            pts = np.stack([xs, np.zeros_like(xs)], axis=-1)
        vals = rho(np.full(len(xs), t), pts)
        for k in range(len(xs)):
            rows.append((t, *pts[k], vals[k]))
    header = ["t"] + [f"x{i + 1}" for i in range(d)] + ["value"]
    write_csv(os.path.join(out_dir, "density.csv"), header, rows, chash)
    return ["density.csv"]


def cmd_norms(args, out_dir, chash):
    d = args.d
    f0 = GaussianPhaseSpace(d, x_width=args.x_width, v_width=args.v_width)
    exps = (float(ExtRational(args.q)), float(ExtRational(args.p)),
            float(ExtRational(args.r)))
    grids = (GridSpec.uniform(1, -6.0, 6.0, 81),
             GridSpec.uniform(d, -8.0, 8.0, 61),
             GridSpec.uniform(d, -6.0, 6.0, 61))

    def F(T, X, V):
        return f0(X - T * V, V)

    res = mixed_norm(F, exps, grids)
    payload = {"d": d, "exponents": {"q": args.q, "p": args.p, "r": args.r},
               "value": res.value, "error_estimate": res.error_estimate,
               "peak": res.peak}
    print(_fmt(res.value))
    write_json(os.path.join(out_dir, "norms.json"), payload, chash)
    return ["norms.json"]


def _ratio_grids(mu: float = 1.0, nu: float = 1.0):
    t = [sinh_stretched_interval(1e6 * mu / nu, 256)]
    x = [sinh_stretched_interval(4e6 * mu, 512)]
    v = GridSpec((Axis(-4.0 * nu, 4.0 * nu, 48, GAUSS),))
    return t, x, v


def cmd_ratio(args, out_dir, chash):
    from .exponents import reduced_family_tuple

    d = args.d
    if d != 1:
        raise UsageError("the ratio sweep is implemented for d = 1")
    E = reduced_family_tuple(Fraction(args.p), d)
    f0 = GaussianPhaseSpace(d)
    outputs = []
    base = strichartz_ratio(f0, E, *_ratio_grids())
    print(_fmt(base))
    rows = []
    for mu in parse_schedule(args.mu_schedule):
        for nu in parse_schedule(args.nu_schedule):
            val = strichartz_ratio(f0.dilated(mu, nu), E, *_ratio_grids(mu, nu))
            rows.append((mu, nu, val))
    write_csv(os.path.join(out_dir, "ratio.csv"), ["mu", "nu", "ratio"], rows, chash)
    outputs.append("ratio.csv")
    write_json(os.path.join(out_dir, "ratio.json"),
               {"d": d, "p": args.p, "tuple": str(E), "baseline": base}, chash)
    outputs.append("ratio.json")
    return outputs


def _resolve_g(family: str, d: int):
    if family == "gaussian":
        return GaussianSpaceTime(d), True
    if family == "bump":
        return make_counterexample_g(d), False
    raise UsageError(f"unknown family {family!r} (expected gaussian or bump)")


def cmd_blowup(args, out_dir, chash):
    d = args.d
    g, oracle = _resolve_g(args.family, d)
    schedule = parse_schedule(args.v_schedule)
    quad = dict(n_x=args.n_x, n_v_radial=args.n_v, n_v_angular=args.n_v,
                n_t=args.n_t)
    table, rows = divergence_study(g, d, schedule, with_rhs=args.with_rhs,
                                   oracle=oracle, error_estimate=True, **quad)
    csv_rows = list(zip(rows["V"], rows["lhs"], rows["rhs"],
                        rows["lhs_err"], rows["rhs_err"]))
    write_csv(os.path.join(out_dir, "blowup.csv"),
              ["V", "lhs", "rhs", "lhs_err", "rhs_err"], csv_rows, chash)
    outputs = ["blowup.csv"]
    if not table.insufficient_data:
        fit = table.fit()
        write_json(os.path.join(out_dir, "fit.json"),
                   {"model": fit.model,
                    "coefficients": {"slope": fit.slope, "intercept": fit.intercept},
                    "r_squared": fit.r_squared,
                    "slope_stderr": fit.slope_stderr}, chash)
        outputs.append("fit.json")
        print(f"fitted slope {_fmt(fit.slope)} (r^2 {_fmt(fit.r_squared)})")
    return outputs


def cmd_angular(args, out_dir, chash):
    d = args.d
    eps = sorted(parse_schedule(args.eps_schedule), reverse=True)
    if d == 2:
        values = [angular_integral_exact_d2(e) for e in eps]
        stderrs = [0.0] * len(eps)
        table = GrowthTable(params=1.0 / np.array(eps), values=np.array(values))
    elif d == 3:
        table = angular_schedule_mc(d, eps, n_samples=args.samples, seed=args.seed,
                                    workers=args.workers)
        values, stderrs = table.values, table.stderrs
    else:
        raise UsageError("angular integral needs d in {2, 3}")
    rows = list(zip(eps, values, stderrs))
    write_csv(os.path.join(out_dir, "angular.csv"),
              ["epsilon", "value", "stderr"], rows, chash)
    outputs = ["angular.csv"]
    if len(eps) >= 2:
        fit = table.fit()
        write_json(os.path.join(out_dir, "fit.json"),
                   {"model": "log",
                    "coefficients": {"slope": fit.slope, "intercept": fit.intercept},
                    "r_squared": fit.r_squared,
                    "slope_stderr": fit.slope_stderr}, chash)
        outputs.append("fit.json")
        print(f"fitted slope {_fmt(fit.slope)} vs ln(1/eps)")
    return outputs


def cmd_identity(args, out_dir, chash):
    d = args.d
    if d not in (1, 2):
        raise UsageError("the tensor-quadrature identity check needs d in {1, 2}")
    g, oracle = _resolve_g(args.family, d)
    quad = dict(n_x=32, n_v_radial=24, n_v_angular=24, n_t=48) if args.family == "bump" \
        else dict(n_x=48, n_v_radial=32, n_v_angular=32, n_t=64)
    lhs, lhs_err = vtrunc_lhs(g, args.V, d=d, oracle=oracle, **quad)
    rhs, rhs_err = vtrunc_rhs(g, args.V, FourierSideConfig(d=d))
    gap = abs(lhs - rhs) / rhs
    ok = gap < args.tol
    print(f"lhs {_fmt(lhs)} rhs {_fmt(rhs)} rel gap {_fmt(gap)} "
          f"{'<' if ok else '>='} tol {_fmt(args.tol)}")
    write_json(os.path.join(out_dir, "identity.json"),
               {"d": d, "V": args.V, "family": args.family, "lhs": lhs, "rhs": rhs,
                "lhs_err": lhs_err, "rhs_err": rhs_err, "rel_gap": gap,
                "tol": args.tol, "ok": ok}, chash)
    if not ok:
        raise UsageError(f"identity gap {gap:.3g} exceeds tolerance {args.tol:g}")
    return ["identity.json"]


def cmd_bounds(args, out_dir, chash):
    d = args.d
    gen = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.count):
        slices = [GaussianSlice(d, amplitude=gen.uniform(0.5, 2.0),
                                center=tuple(gen.uniform(-1.0, 1.0, d)),
                                width=gen.uniform(0.7, 1.5))
                  for _ in range(d + 1)]
        while True:
            ts = np.sort(gen.uniform(-2.0, 2.0, d + 1))
            if np.min(np.diff(ts)) > 0.2:
                break
        pair = (0, d)
        bil = bilinear_bound_check(slices, ts, pair)
        rows.append((f"{i}", bil.form, bil.bound, bil.margin,
                     bil.kind.replace(",", "-")))
        interp = interpolated_bound_check(slices, ts)
        rows.append((f"{i}", interp.form, interp.bound, interp.margin, interp.kind))
    write_csv(os.path.join(out_dir, "bounds.csv"),
              ["config_id", "form", "bound", "margin", "kind"], rows, chash)
    worst = min(r[3] / r[2] for r in rows)
    print(f"worst margin / bound: {_fmt(worst)}")
    return ["bounds.csv"]


def _sweep_family(d: int):
    return [GaussianSpaceTime(d).dilated(mt, mx)
            for mt in (0.5, 1.0, 2.0) for mx in (0.5, 1.0, 2.0)]


def _sweep_ratio_fn(d: int):
    t_grid = GridSpec.uniform(1, -8.0, 8.0, 64, rule=GAUSS)
    x_grid = GridSpec.uniform(1, -8.0, 8.0, 64, rule=GAUSS)
    v_group = [sinh_stretched_interval(60.0, 96)]

    def ratio_fn(g, E):
        return dual_ratio(g, E, t_grid, x_grid, v_group, d=d)

    return ratio_fn


def cmd_sweep(args, out_dir, chash):
    d = args.d
    if d != 1:
        raise UsageError("the sigma sweep is implemented for d = 1")
    sigmas = parse_rational_list(args.sigma_schedule)
    rows = nonendpoint_sweep(_sweep_family(d), d, sigmas, _sweep_ratio_fn(d))
    write_csv(os.path.join(out_dir, "sweep.csv"),
              ["sigma", "q_sigma", "worst_constant"], list(map(tuple, rows)), chash)
    return ["sweep.csv"]


# ---------------------------------------------------------------------------
# verify-all: the acceptance suite at reduced scale

def _verify_checks(args, out_dir, chash):
    seed = args.seed
    workers = args.workers

    def check_exponents():
        from .exponents import endpoint_tuple

        E = endpoint_tuple(2)
        assert str(E) == "(2, 4, 4/3, 2)", f"endpoint tuple {E}"
        assert str(scale_tuple(E, "4/3")) == "(3/2, 3, 1, 3/2)"
        assert check_admissible(E, 2).status == "endpoint"
        cmd_exponents(argparse.Namespace(d=2, scan=True, denominator=16,
                                         q=None, p=None, r=None, a=None, scale=None),
                      out_dir, chash)
        return "exact endpoint algebra and region scan"

    def check_oracles():
        gen = np.random.default_rng(seed)
        for d in (1, 2):
            f0 = GaussianPhaseSpace(d, x_width=0.9, v_width=1.2)
            rho = density(f0, GridSpec.uniform(d, -4, 4, 40, rule=GAUSS))
            ts = gen.uniform(-3, 3, 20)
            xs = gen.uniform(-3, 3, (20, d))
            quad = rho(ts, xs)
            oracle = f0.density_closed_form(ts, xs)
            err = np.max(np.abs(quad - oracle) / oracle)
            assert err < 1e-6, f"density oracle err {err:.2e}"
        norm = GaussianSlice(1).norm(2)
        assert abs(norm - 2 ** -0.25) < 1e-12
        return "Gaussian density oracle within 1e-6"

    def check_identity_d1():
        g = GaussianSpaceTime(1)
        for V in (1.0, 2.0):
            lhs, _ = vtrunc_lhs(g, V, error_estimate=False)
            rhs, _ = vtrunc_rhs(g, V, FourierSideConfig(d=1), error_estimate=False)
            exact = math.sqrt(2) * math.asinh(V)
            assert abs(lhs - exact) < 1e-2 * exact, f"lhs {lhs} vs {exact}"
            assert abs(rhs - exact) < 1e-2 * exact, f"rhs {rhs} vs {exact}"
        return "d=1 truncated identity vs closed form"

    def check_identity_d2():
        g = GaussianSpaceTime(2)
        lhs, lhs_err = vtrunc_lhs(g, 1.0, n_x=40, n_v_radial=24, n_v_angular=24,
                                  oracle=True)
        rhs, rhs_err = vtrunc_rhs(g, 1.0, FourierSideConfig(d=2))
        gap = abs(lhs - rhs)
        budget = lhs_err + rhs_err + 1e-10
        assert gap <= max(budget, 1e-3 * rhs), f"gap {gap:.2e} budget {budget:.2e}"
        return "d=2 truncated identity within error budget"

    def check_blowup():
        outs = cmd_blowup(argparse.Namespace(d=1, family="gaussian",
                                             v_schedule="8:512:x2", with_rhs=False,
                                             n_x=48, n_v=48, n_t=64), out_dir, chash)
        with open(os.path.join(out_dir, "fit.json")) as fh:
            fit = json.load(fh)
        slope = fit["coefficients"]["slope"]
        assert abs(slope - math.sqrt(2)) < 0.05 * math.sqrt(2), f"slope {slope}"
        assert fit["r_squared"] > 0.999
        return f"d=1 blowup slope {slope:.4f} ~ sqrt(2), outputs {outs}"

    def check_angular():
        # keep fit.json as the blowup fit; the angular fit gets its own name
        fit_path = os.path.join(out_dir, "fit.json")
        with open(fit_path, "rb") as fh:
            blowup_fit = fh.read()
        cmd_angular(argparse.Namespace(d=2, eps_schedule="1e-1:1e-4:/10",
                                       samples=0, seed=seed, workers=workers),
                    out_dir, chash)
        os.replace(fit_path, os.path.join(out_dir, "angular_fit.json"))
        with open(fit_path, "wb") as fh:
            fh.write(blowup_fit)
        with open(os.path.join(out_dir, "angular_fit.json")) as fh:
            slope = json.load(fh)["coefficients"]["slope"]
        assert abs(slope - 8 * math.pi) < 0.05 * 8 * math.pi, f"slope {slope}"
        table = angular_schedule_mc(3, [1e-1, 1e-2, 1e-3], n_samples=200_000,
                                    seed=seed, workers=workers)
        assert table.strictly_increasing
        return "angular divergence: d=2 slope ~ 8 pi, d=3 MC monotone"

    def check_bounds():
        cmd_bounds(argparse.Namespace(d=1, count=20, seed=seed), out_dir, chash)
        with open(os.path.join(out_dir, "bounds.csv")) as fh:
            lines = [ln for ln in fh if not ln.startswith("#")][1:]
        for ln in lines:
            _, form, bound, margin, kind = ln.strip().split(",")
            assert float(margin) >= -1e-3 * float(bound), f"margin {margin} ({kind})"
        return "bilinear/interpolated bounds hold with constant 1"

    def check_ratio_scaling():
        from .exponents import reduced_family_tuple

        E = reduced_family_tuple(3, 1)
        f0 = GaussianPhaseSpace(1)
        vals, rows = [], []
        for mu in (0.5, 1.0, 2.0):
            for nu in (0.5, 1.0, 2.0):
                tg = GridSpec((Axis(-8 * mu / nu, 8 * mu / nu, 64, GAUSS),))
                xg = GridSpec((Axis(-8 * mu, 8 * mu, 64, GAUSS),))
                vg = GridSpec((Axis(-4 * nu, 4 * nu, 48, GAUSS),))
                val = strichartz_ratio(f0.dilated(mu, nu), E, tg, xg, vg)
                vals.append(val)
                rows.append((mu, nu, val))
        write_csv(os.path.join(out_dir, "ratio.csv"), ["mu", "nu", "ratio"],
                  rows, chash)
        spread = (max(vals) - min(vals)) / (sum(vals) / len(vals))
        assert spread < 1e-3, f"spread {spread:.2e}"
        return f"ratio invariant under dilations (spread {spread:.1e})"

    def check_sweep():
        cmd_sweep(argparse.Namespace(d=1, sigma_schedule="2,3/2,5/4"),
                  out_dir, chash)
        with open(os.path.join(out_dir, "sweep.csv")) as fh:
            lines = [ln for ln in fh if not ln.startswith("#")][1:]
        consts = [float(ln.strip().split(",")[2]) for ln in lines]
        assert all(b >= a for a, b in zip(consts, consts[1:])), f"consts {consts}"
        return "sigma-sweep constants monotone toward the endpoint"

    return [
        ("exponent-algebra", check_exponents),
        ("gaussian-oracles", check_oracles),
        ("identity-d1", check_identity_d1),
        ("identity-d2", check_identity_d2),
        ("blowup-d1", check_blowup),
        ("angular-divergence", check_angular),
        ("multilinear-bounds", check_bounds),
        ("ratio-scaling", check_ratio_scaling),
        ("sigma-sweep", check_sweep),
    ]


def cmd_verify_all(args, out_dir, chash):
    failures = 0
    for name, check in _verify_checks(args, out_dir, chash):
        try:
            detail = check()
        except AssertionError as exc:
            print(f"FAIL {name}: {exc}")
            failures += 1
        else:
            print(f"PASS {name}: {detail}")
    if failures:
        raise UsageError(f"{failures} verification check(s) failed")
    outputs = sorted(f for f in os.listdir(out_dir) if f != "manifest.json")
    return outputs


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktlab",
        description="Numerical laboratory for kinetic-transport space-time estimates")
    parser.add_argument("--config", help="JSON file of defaults; flags override")
    parser.add_argument("--out-dir", default=None,
                        help="output directory (default $KTLAB_OUT_DIR or '.')")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="classify an exponent tuple, or scan a region")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q")
    p.add_argument("--p")
    p.add_argument("--r")
    p.add_argument("--a")
    p.add_argument("--scale", help="power-transform parameter lambda (rational)")
    p.add_argument("--scan", action="store_true",
                   help="emit region.csv over the (1/p, 1/q) square")
    p.add_argument("--denominator", type=int, default=24)

    p = sub.add_parser("density", help="sample the velocity average on a (t, x) grid")
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--times", default="0,1,2")
    p.add_argument("--x-max", type=float, default=4.0)
    p.add_argument("--x-points", type=int, default=81)
    p.add_argument("--x-width", type=float, default=1.0)
    p.add_argument("--v-width", type=float, default=1.0)
    p.add_argument("--v-points", type=int, default=48)

    p = sub.add_parser("norms", help="mixed space-time norm of the free-streaming solution")
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--q", default="2")
    p.add_argument("--p", default="2")
    p.add_argument("--r", default="2")
    p.add_argument("--x-width", type=float, default=1.0)
    p.add_argument("--v-width", type=float, default=1.0)

    p = sub.add_parser("ratio", help="Strichartz ratio and its dilation sweep")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p", default="3", help="spatial exponent of the r = 1 family")
    p.add_argument("--mu-schedule", default="0.5,1,2")
    p.add_argument("--nu-schedule", default="0.5,1,2")

    p = sub.add_parser("blowup", help="growth of the v-truncated endpoint norm")
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--family", default="gaussian", choices=("gaussian", "bump"))
    p.add_argument("--v-schedule", default="8:512:x2")
    p.add_argument("--with-rhs", action="store_true")
    p.add_argument("--n-x", type=int, default=48, dest="n_x")
    p.add_argument("--n-v", type=int, default=48, dest="n_v")
    p.add_argument("--n-t", type=int, default=64, dest="n_t")

    p = sub.add_parser("angular", help="restricted angular integral growth")
    p.add_argument("--d", type=int, default=2, choices=(2, 3))
    p.add_argument("--eps-schedule", default="1e-1:1e-4:/10")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("identity", help="check the v-truncated Fourier-side identity")
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--V", type=float, default=2.0)
    p.add_argument("--family", default="gaussian", choices=("gaussian", "bump"))
    p.add_argument("--tol", type=float, default=0.01)

    p = sub.add_parser("bounds", help="multilinear bound margins on a random corpus")
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sweep", help="worst dual-ratio constants along a sigma schedule")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--sigma-schedule", default="2,3/2,5/4,11/10")

    p = sub.add_parser("verify-all", help="reduced-scale acceptance run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    return parser


_COMMANDS = {
    "exponents": cmd_exponents,
    "density": cmd_density,
    "norms": cmd_norms,
    "ratio": cmd_ratio,
    "blowup": cmd_blowup,
    "angular": cmd_angular,
    "identity": cmd_identity,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "verify-all": cmd_verify_all,
}


def _apply_config_file(parser, argv):
    """Pre-parse --config and install its values as parser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    for action in parser._subparsers._group_actions[0].choices.values():
        action.set_defaults(**{k.replace("-", "_"): v for k, v in values.items()
                               if k.replace("-", "_") in
                               {a.dest for a in action._actions}})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)

    out_dir = args.out_dir or os.environ.get("KTLAB_OUT_DIR", ".")
    os.makedirs(out_dir, exist_ok=True)
    config = {k: v for k, v in vars(args).items()
              if k not in ("command", "config", "out_dir") and v is not None}
    chash = config_hash({"command": args.command, **config})

    start = time.perf_counter()
    try:
        outputs = _COMMANDS[args.command](args, out_dir, chash)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start
    write_manifest(out_dir, args.command, {"command": args.command, **config},
                   outputs, {"wall_s": wall}, getattr(args, "seed", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
