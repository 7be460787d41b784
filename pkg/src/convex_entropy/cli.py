"""Command-line driver: single operations and JSON check campaigns.

A campaign is one JSON document::

    {"specs": {"name": {...spec...}},
     "tolerance": {"rel_tol": 1e-7},
     "entries": [{"op": "check", "check_id": "GAUSS_WINDOW", "spec": "name"}, ...]}

Entry ``spec`` values are either a name from ``specs`` or an inline spec.
Each entry produces bound-check rows and/or estimate rows; errors raised by
an entry are recorded in the report and the remaining entries still run.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

from . import __version__, convmix, distributions, entropy, inequalities, jsonio, spectral
from .errors import ConvexEntropyError, InvalidSpec

CHECK_COLUMNS = ["check_id", "anchor", "lhs", "rhs", "slack", "verdict", "side", "tol", "entry"]
ESTIMATE_COLUMNS = ["label", "value", "uncertainty", "method", "entry"]
TRAJECTORY_COLUMNS = ["n", "block_entropy", "entry"]
THREADS_ENV = "CONVEX_ENTROPY_THREADS"


# --------------------------------------------------------------------------
# Report
# --------------------------------------------------------------------------

@dataclass
class Report:
    version: str
    campaign: dict
    results: list
    counts: dict
    wall_clock: float = 0.0

    def to_dict(self):
        return {"tool": "convex-entropy", "version": self.version, "campaign": self.campaign,
                "results": self.results, "counts": self.counts,
                "wall_clock_seconds": self.wall_clock}

    @property
    def exit_code(self):
        return 0 if self.counts["fail"] == 0 and self.counts["error"] == 0 else 1

    def checks(self):
        for res in self.results:
            for row in res.get("checks", []):
                yield dict(row, entry=res["index"])

    def estimates(self):
        for res in self.results:
            for row in res.get("estimates", []):
                yield dict(row, entry=res["index"])

    def trajectories(self):
        for res in self.results:
            for row in res.get("trajectory", []):
                yield dict(row, entry=res["index"])


@dataclass
class EntryResult:
    checks: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)

    def add_estimate(self, label, est):
        self.estimates.append(dict(est.to_dict(), label=label))


def _retolerance(check, rel_tol):
    """Rebuild a check with the relative part of its tolerance replaced."""
    if rel_tol is None:
        return check
    scale = max(1.0, abs(check.lhs), abs(check.rhs))
    extra = max(0.0, check.tol - inequalities.REL_TOL * scale)
    tol = rel_tol * scale + extra
    slack = check.slack
    if abs(slack) <= check.eq_tol:
        verdict = "equality"
    elif slack >= -tol:
        verdict = "pass"
    else:
        verdict = "fail"
    return inequalities.BoundCheck(check.check_id, check.anchor, check.side, check.lhs,
                                   check.rhs, slack, verdict, tol, check.eq_tol,
                                   check.equality_case, check.inputs)


# --------------------------------------------------------------------------
# Entry operations
# --------------------------------------------------------------------------

def _spec(entry, specs, key="spec"):
    ref = entry.get(key)
    if ref is None:
        raise InvalidSpec("entry needs %r" % key)
    if isinstance(ref, str):
        if ref not in specs:
            raise InvalidSpec("unknown spec reference %r" % ref)
        ref = specs[ref]
    return ref


def _op_entropy(entry, specs, out):
    spec = distributions.spec_from_dict(_spec(entry, specs))
    est = entropy.entropy(spec, entry.get("method", "auto"), seed=entry.get("seed", 0),
                          m=entry.get("m", 200_000))
    out.add_estimate("entropy", est)


def _op_check(entry, specs, out):
    spec = distributions.spec_from_dict(_spec(entry, specs))
    params = dict(entry.get("params", {}))
    params.setdefault("seed", entry.get("seed", 0))
    cid = entry.get("check_id", "all")
    if cid == "all":
        out.checks.extend(inequalities.run_catalog(spec, params=params))
    else:
        if cid not in inequalities.CATALOG:
            raise InvalidSpec("unknown check id %r" % cid)
        out.checks.extend(inequalities.run_check(cid, spec, params))


def _op_chf(entry, specs, out):
    spec = distributions.spec_from_dict(_spec(entry, specs))
    chf = spectral.charfn_of(spec)
    conv = spec.convexity()
    convexity = entry.get("convexity") or ("log-concave" if conv.log_concave else "kappa")
    beta = entry.get("beta", conv.beta)
    peak = distributions.max_density(spec)
    win = spectral.plancherel_window(chf, convexity, beta, peak)
    h = entropy.entropy(spec, entry.get("method", "auto"), seed=entry.get("seed", 0))
    out.add_estimate("h2", entropy.Estimate(win.h2))
    out.add_estimate("entropy", h)
    inputs = {"window": [win.lower, win.upper], "norm2": win.norm2}
    mk = inequalities.make_check
    out.checks.append(mk("CHF_WINDOW", "lower", win.lower, h.value, uncertainty=h.uncertainty,
                         anchor="order-2 entropy window from the characteristic function",
                         inputs=inputs))
    out.checks.append(mk("CHF_WINDOW", "upper", h.value, win.upper, uncertainty=h.uncertainty,
                         anchor="order-2 entropy window from the characteristic function",
                         inputs=inputs))
    out.checks.append(mk("CHF_WINDOW", "sharper_upper", h.value, win.sharper_upper,
                         uncertainty=h.uncertainty,
                         anchor="window upper bound through the maximum density",
                         inputs={"sharper_upper": win.sharper_upper, "width": win.sharper_upper - win.lower}))


def _op_rate(entry, specs, out):
    model = spectral.SpectralModel.from_dict(_spec(entry, specs, "model"))
    horizon = int(entry.get("horizon", 256))
    traj = spectral.toeplitz_trajectory(model, horizon)
    rate = spectral.szego_rate(model, entry.get("reading", "half"))
    out.add_estimate("szego_rate", entropy.Estimate(rate, method="quadrature"))
    out.add_estimate("block_entropy_per_coordinate",
                     entropy.Estimate(float(traj[-1]), detail={"horizon": horizon}))
    out.trajectory = [{"n": k, "block_entropy": float(b)} for k, b in enumerate(traj, start=1)]
    logs = [-0.5 * k * math.log(2 * math.pi) - 0.5 * ld
            for k, ld in enumerate(spectral.toeplitz_logdet_trajectory(model, horizon), start=1)]
    bounds = spectral.process_rate_bounds(logs, log_values=True)
    mk = inequalities.make_check
    anchor = "entropy rate between peak-density rates"
    out.checks.append(mk("RATE_WINDOW", "lower", bounds.f_minus, float(traj[-1]), anchor=anchor,
                         inputs=bounds.to_dict()))
    out.checks.append(mk("RATE_WINDOW", "upper", float(traj[-1]), bounds.upper_rate, anchor=anchor,
                         inputs=bounds.to_dict()))
    out.checks.append(mk("RATE_MONOTONE", "non_increasing", float(max(0.0, (traj[1:] - traj[:-1]).max(initial=0.0))),
                         0.0, anchor="block entropies per coordinate do not increase",
                         inputs={"horizon": horizon}))


def _op_convolve(entry, specs, out):
    spec = distributions.spec_from_dict(_spec(entry, specs))
    folds = entry.get("folds", 2)
    folds = folds if isinstance(folds, list) else [folds]
    for m in folds:
        res = convmix.self_convolve_max(spec, m, entry.get("kappa"), entry.get("method", "auto"))
        out.checks.append(inequalities.make_check(
            "CONV_PEAK", "m=%d" % m, res.peak, res.bound,
            anchor="peak density of self-convolutions", inputs=res.to_dict()))


def _op_mixture(entry, specs, out):
    mix = convmix.MixtureSpec.from_dict(_spec(entry, specs, "mix"))
    anchor = "entropy bracket for scale mixtures"
    cond = None
    if mix.mixing.family != "point":
        cond = convmix.mixture_logconcavity_condition(mix)
        out.checks.append(cond)
    bounds = convmix.mixture_bounds(mix, require_condition=False)
    out.add_estimate("lower_bound", entropy.Estimate(bounds.lower))
    out.add_estimate("upper_bound", entropy.Estimate(bounds.upper))
    if bounds.upper_corrected is not None:
        out.add_estimate("upper_bound_corrected", entropy.Estimate(bounds.upper_corrected))
    samples = entry.get("mc")
    if mix.parameterization == "variance":
        if samples:
            h = convmix.mixture_entropy_mc(mix, entry.get("seed", 0), samples)
        else:
            h = convmix.mixture_entropy_quad(mix)
        out.add_estimate("entropy", h)
        # the lower side needs no condition; the upper sides only count when it holds
        out.checks.append(inequalities.make_check("MIXTURE", "lower", bounds.lower, h.value,
                                                  uncertainty=h.uncertainty, anchor=anchor))
        if cond is None or cond.ok:
            out.checks.append(inequalities.make_check("MIXTURE", "upper", h.value, bounds.upper,
                                                      uncertainty=h.uncertainty, anchor=anchor))
            if bounds.upper_corrected is not None:
                out.checks.append(inequalities.make_check(
                    "MIXTURE", "upper_corrected", h.value, bounds.upper_corrected,
                    uncertainty=h.uncertainty, anchor="entropy bracket through the peak at 0"))


def _quantity_registry():
    ineq = inequalities
    dist = distributions

    def spec_of(a):
        return dist.spec_from_dict(a["spec"])

    return {
        "pdf": lambda a: float(dist.pdf(spec_of(a), a["x"])),
        "max_density": lambda a: dist.max_density(spec_of(a)),
        "entropy": lambda a: entropy.entropy(spec_of(a), a.get("method", "auto")).value,
        "pareto_Z": lambda a: entropy.pareto_Z(a["n"], a["beta"], a.get("a", 1.0)),
        "pareto_L": lambda a: entropy.pareto_L(a["n"], a["beta"], a.get("a", 1.0)),
        "kconc_upper_bound": lambda a: ineq.kconc_upper_bound(a["n"], a["beta"]),
        "beta_regime_bound": lambda a: ineq.beta_regime_bound(
            a["n"], a["beta"], a["regime"], a["beta0"], a.get("form", "printed")),
        "iso_lower_constant": lambda a: ineq.iso_lower_constant(a["n"])[a.get("component", 0)],
        "chf_norm2": lambda a: spectral.chf_norm2(spectral.charfn_of(spec_of(a)),
                                                  a.get("method", "auto")).value,
        "stable_h2_identity": lambda a: spectral.stable_h2_identity(
            a["alpha"], a["n"], a["f0"])[a.get("component", 0)],
        "stable_kappa_upper": lambda a: spectral.stable_kappa_upper(a["alpha"], a["n"]),
        "junge_bound": lambda a: convmix.junge_bound(a["n"], a["kappa"], a["m"]),
    }


def _op_quantity(entry, specs, out):
    name = entry["quantity"]
    registry = _quantity_registry()
    if name not in registry:
        raise InvalidSpec("unknown quantity %r" % name)
    args = dict(entry.get("args", {}))
    if "spec" in args:
        args["spec"] = _spec(args, specs)
    value = float(registry[name](args))
    expected = float(entry["expected"])
    tol = float(entry.get("tol", 1e-9))
    diff = abs(value - expected)
    verdict = "equality" if diff <= tol else "fail"
    out.checks.append(inequalities.BoundCheck(
        "VALUE", entry.get("label", name), "equal", value, expected, tol - diff, verdict, tol, tol,
        "", {"quantity": name}))


def _op_kappa(entry, specs, out):
    spec = distributions.spec_from_dict(_spec(entry, specs))
    rep = distributions.kappa_classify(spec, entry["kappa"], entry.get("trials", 2000),
                                       entry.get("seed", 0))
    verdict = rep.verdict
    out.checks.append(inequalities.BoundCheck(
        "KAPPA_CLASS", "kappa-concavity on random triples", "worst_violation",
        rep.worst_violation, rep.tolerance, rep.tolerance - rep.worst_violation, verdict,
        rep.tolerance, 0.0, "", rep.to_dict()))


OPERATIONS = {
    "entropy": _op_entropy,
    "check": _op_check,
    "chf": _op_chf,
    "rate": _op_rate,
    "convolve": _op_convolve,
    "mixture": _op_mixture,
    "quantity": _op_quantity,
    "kappa": _op_kappa,
}


def run_entry(entry, specs, rel_tol=None):
    """Run one campaign entry; returns its result dictionary."""
    out = EntryResult()
    res = {"op": entry.get("op"), "seed": entry.get("seed", 0)}
    try:
        op = OPERATIONS.get(entry.get("op"))
        if op is None:
            raise InvalidSpec("unknown op %r" % entry.get("op"))
        op(entry, specs, out)
    except Exception as exc:  # recorded per entry; the campaign continues
        res["status"] = "error"
        res["error"] = {"type": type(exc).__name__, "message": str(exc)}
    else:
        res["status"] = "ok"
    res["checks"] = [_retolerance(c, rel_tol).to_dict() for c in out.checks]
    res["estimates"] = out.estimates
    if out.trajectory:
        res["trajectory"] = out.trajectory
    return res


def _pool_size(n_entries):
    try:
        cap = int(os.environ.get(THREADS_ENV, "0"))
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_entries))


def run_campaign(campaign):
    """Execute every entry of a campaign; result order follows the campaign."""
    start = time.perf_counter()
    entries = list(campaign.get("entries", []))
    specs = dict(campaign.get("specs", {}))
    rel_tol = campaign.get("tolerance", {}).get("rel_tol")
    results = []
    if entries:
        with ThreadPoolExecutor(max_workers=_pool_size(len(entries))) as pool:
            results = list(pool.map(lambda e: run_entry(e, specs, rel_tol), entries))
    for i, res in enumerate(results):
        res["index"] = i
    counts = {"pass": 0, "equality": 0, "fail": 0, "error": 0, "estimates": 0}
    for res in results:
        if res["status"] == "error":
            counts["error"] += 1
        for c in res["checks"]:
            counts[c["verdict"]] += 1
        counts["estimates"] += len(res["estimates"])
    return Report(__version__, campaign, results, counts, time.perf_counter() - start)


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return "%.12g" % v
    return "" if v is None else str(v)


def _csv_block(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _md_block(rows, columns):
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in rows:
        lines.append("| " + " | ".join(_fmt(row.get(c)) for c in columns) + " |")
    return "\n".join(lines) + "\n"


def _error_rows(report):
    return [{"entry": r["index"], "op": r["op"], **r["error"]}
            for r in report.results if r["status"] == "error"]


def emit_tables(report, format="json"):
    """Render a report as JSON, CSV or markdown.

    CSV and markdown emit tables for checks, estimates, block-entropy
    trajectories and entry errors; when more than one is present they appear
    as separate sections.
    """
    if format == "json":
        return jsonio.dumps(report.to_dict()) + "\n"
    checks = list(report.checks())
    ests = list(report.estimates())
    errors = _error_rows(report)
    sections = []
    if checks:
        sections.append(("Checks", checks, CHECK_COLUMNS))
    if ests:
        sections.append(("Estimates", ests, ESTIMATE_COLUMNS))
    traj = list(report.trajectories())
    if traj:
        sections.append(("Trajectory", traj, TRAJECTORY_COLUMNS))
    if errors:
        sections.append(("Errors", errors, ["entry", "op", "type", "message"]))
    if format == "csv":
        if len(sections) == 1:
            return _csv_block(sections[0][1], sections[0][2])
        return "\n".join("# %s\n%s" % (t, _csv_block(r, c)) for t, r, c in sections)
    if format == "markdown":
        return "\n".join("## %s\n\n%s" % (t, _md_block(r, c)) for t, r, c in sections)
    raise InvalidSpec("format must be json, csv or markdown")


# --------------------------------------------------------------------------
# Command line
# --------------------------------------------------------------------------

def load_bundled_campaign(name="paper_suite"):
    text = resources.files("convex_entropy").joinpath("data", name + ".json").read_text()
    return jsonio.loads(text)


def _load_json(path):
    with open(path) as fh:
        return jsonio.loads(fh.read())


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    p.add_argument("--tol", type=float, help="relative tolerance for verdicts")


def build_parser():
    ap = argparse.ArgumentParser(prog="convex-entropy",
                                 description="Entropy bounds for convex measures.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy estimate of a density")
    p.add_argument("--spec", required=True)
    p.add_argument("--method", default="auto",
                   choices=["auto", "closed-form", "quadrature", "monte-carlo"])
    p.add_argument("--mc", type=int, default=200_000, help="Monte Carlo sample size")
    _common(p)

    p = sub.add_parser("check", help="run inequality checks")
    p.add_argument("--spec", required=True)
    p.add_argument("--check", default="all", help="check id or 'all'")
    p.add_argument("--params", help="JSON file with check parameters")
    _common(p)

    p = sub.add_parser("rate", help="entropy rate of a stationary Gaussian process")
    p.add_argument("--model", required=True)
    p.add_argument("--horizon", type=int, default=256)
    _common(p)

    p = sub.add_parser("convolve", help="peak density of self-convolutions")
    p.add_argument("--spec", required=True)
    p.add_argument("--folds", type=int, nargs="+", default=[2])
    p.add_argument("--kappa", type=float)
    _common(p)

    p = sub.add_parser("mixture", help="entropy bracket for a scale mixture")
    p.add_argument("--mix", required=True)
    p.add_argument("--bounds", action="store_true", help="report only the bracket")
    p.add_argument("--mc", type=int, help="Monte Carlo sample size (default: quadrature)")
    _common(p)

    p = sub.add_parser("chf", help="entropy window from the characteristic function")
    p.add_argument("--spec", required=True)
    p.add_argument("--beta", type=float)
    _common(p)

    p = sub.add_parser("campaign", help="run a JSON campaign ('paper-suite' for the bundled one)")
    p.add_argument("campaign")
    _common(p)
    return ap


def campaign_from_args(args):
    if args.command == "campaign":
        if args.campaign == "paper-suite":
            camp = load_bundled_campaign()
        else:
            camp = _load_json(args.campaign)
    else:
        entry = {"op": args.command, "seed": args.seed}
        if args.command == "entropy":
            entry.update(spec=_load_json(args.spec), method=args.method, m=args.mc)
        elif args.command == "check":
            entry.update(spec=_load_json(args.spec), check_id=args.check)
            if args.params:
                entry["params"] = _load_json(args.params)
        elif args.command == "rate":
            entry.update(model=_load_json(args.model), horizon=args.horizon)
        elif args.command == "convolve":
            entry.update(spec=_load_json(args.spec), folds=args.folds)
            if args.kappa is not None:
                entry["kappa"] = args.kappa
        elif args.command == "mixture":
            entry.update(mix=_load_json(args.mix))
            if args.mc:
                entry["mc"] = args.mc
        elif args.command == "chf":
            entry.update(spec=_load_json(args.spec))
            if args.beta is not None:
                entry["beta"] = args.beta
        camp = {"entries": [entry]}
    if args.tol is not None:
        camp = dict(camp, tolerance=dict(camp.get("tolerance", {}), rel_tol=args.tol))
    return camp


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        camp = campaign_from_args(args)
    except (OSError, ValueError) as exc:
        print("convex-entropy: %s" % exc, file=sys.stderr)
        return 2
    if args.command == "mixture" and args.bounds:
        try:
            mix = convmix.MixtureSpec.from_dict(camp["entries"][0]["mix"])
            text = jsonio.dumps(convmix.mixture_bounds(mix).to_dict()) + "\n"
        except ConvexEntropyError as exc:
            print("convex-entropy: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
            return 1
        code = 0
    else:
        report = run_campaign(camp)
        text = emit_tables(report, args.format)
        code = report.exit_code
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
