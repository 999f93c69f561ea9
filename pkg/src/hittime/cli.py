"""Command-line driver: ``hittime model | analyze | sweep | verify | simulate``.

Exit codes: 0 success, 2 configuration error, 3 numerical or check failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chain import (MarkovChain, ReferencePair, check_reversibility,
                    stationary_distribution, validate)
from .checks import CheckReport
from .errors import (ConfigError, HittimeError, InsufficientGrid, NotIrreducible,
                     ParamOutOfRange, SmallnessViolated)
from .models import PRESET_VERSION, PRESETS, build_preset, preset_params

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 2, 3
DEFAULT_ZETA = math.exp(-1)
SUITES = ("lemma", "theorem", "envelope", "network")

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "chain", "pair", "validation", "hitting", "certificate",
                 "hypotheses", "envelope", "lemma_suite", "early_exponential",
                 "network", "passed"],
    "properties": {
        "version": {"type": "string"},
        "chain": {"type": "object", "required": ["n", "source"]},
        "pair": {"type": "object", "required": ["x0", "G"],
                 "properties": {"x0": {"type": "integer"},
                                "G": {"type": "array", "items": {"type": "integer"}}}},
        "validation": {"type": "object", "required": ["passed"]},
        "hitting": {"type": "object", "required": ["mean", "local_time_at_start", "quantiles"],
                    "properties": {"mean": {"type": "number"},
                                   "local_time_at_start": {"type": "number"},
                                   "quantiles": {"type": "object"}}},
        "certificate": {"type": ["object", "null"]},
        "hypotheses": {"type": "object",
                       "required": ["local_time_ratio", "mean_time_ratio", "checks"]},
        "envelope": {"type": "object", "required": ["status"]},
        "lemma_suite": {"type": "object", "required": ["status"]},
        "early_exponential": {"type": "object", "required": ["status"]},
        "network": {"type": "object", "required": ["status"]},
        "passed": {"type": "boolean"},
    },
}

SWEEP_COLUMNS_DOC = "param, then every tracked quantity in PointReport.quantities() order"


def _workers(default=1):
    raw = os.environ.get("HITTIME_WORKERS")
    if raw is None:
        return default
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"HITTIME_WORKERS must be an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError("HITTIME_WORKERS must be positive")
    return w


# ---------------------------------------------------------------------------
# configuration


@dataclass
class AnalysisConfig:
    """Inputs of ``analyze`` and ``verify``, merged from a JSON file and flags."""

    chain_path: str = None
    preset: str = None
    params: dict = field(default_factory=dict)
    x0: int = None
    target: list = None
    zetas: list = field(default_factory=lambda: [DEFAULT_ZETA])
    r_target: float = None
    t_max: float = 20.0
    t_points: int = 200
    scale: int = None
    suites: list = field(default_factory=lambda: list(SUITES))
    out: str = None
    plots: bool = True

    @classmethod
    def from_sources(cls, args):
        cfg = {}
        if getattr(args, "config", None):
            try:
                with open(args.config) as fh:
                    cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
            unknown = set(cfg) - set(cls.__dataclass_fields__)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        flags = {
            "chain_path": getattr(args, "chain", None),
            "preset": getattr(args, "preset", None),
            "x0": getattr(args, "x0", None),
            "target": getattr(args, "target", None),
            "zetas": getattr(args, "zeta", None),
            "r_target": getattr(args, "r_target", None),
            "t_max": getattr(args, "t_max", None),
            "t_points": getattr(args, "t_points", None),
            "scale": getattr(args, "scale", None),
            "suites": getattr(args, "suite", None),
            "out": getattr(args, "out", None),
        }
        cfg.update({k: v for k, v in flags.items() if v is not None})
        params = dict(cfg.get("params", {}))
        params.update(_preset_overrides(args))
        cfg["params"] = params
        if getattr(args, "no_plots", False):
            cfg["plots"] = False
        c = cls(**cfg)
        c.check()
        return c

    def check(self):
        if (self.chain_path is None) == (self.preset is None):
            raise ConfigError("give exactly one of --chain or --preset")
        if self.chain_path is not None and not Path(self.chain_path).is_file():
            raise ConfigError(f"chain file {self.chain_path} does not exist")
        if self.chain_path is not None and (self.x0 is None or not self.target):
            raise ConfigError("--x0 and --target are required with --chain")
        if not self.zetas or any(not 0 < z < 1 for z in self.zetas):
            raise ConfigError("zeta values must lie in (0, 1)")
        if self.r_target is not None and not 0 < self.r_target < 1:
            raise ConfigError("r_target must lie in (0, 1)")
        if not self.t_max > 0 or int(self.t_points) < 1:
            raise ConfigError("t grid needs t_max > 0 and t_points >= 1")
        bad = set(self.suites) - set(SUITES)
        if bad:
            raise ConfigError(f"unknown suites {sorted(bad)}; choose from {SUITES}")

    def t_grid(self):
        return np.linspace(self.t_max / self.t_points, self.t_max, int(self.t_points))


def _preset_overrides(args):
    return {k: getattr(args, k) for k in ("p", "h", "a", "b", "c", "L")
            if getattr(args, k, None) is not None}


def load_chain_and_pair(cfg):
    """Chain, reference pair and a description of the source."""
    if cfg.preset is not None:
        chain, pair, params = build_preset(cfg.preset, **cfg.params)
        source = {"preset": cfg.preset, "preset_version": PRESET_VERSION, "params": params}
        if cfg.x0 is not None or cfg.target:
            pair = ReferencePair(pair.x0 if cfg.x0 is None else cfg.x0,
                                 frozenset(cfg.target) if cfg.target else pair.G)
    else:
        chain = MarkovChain.load(cfg.chain_path)
        pair = ReferencePair(cfg.x0, frozenset(cfg.target))
        source = {"file": str(cfg.chain_path)}
    pair.check(chain)
    return chain, pair, source


def _require_valid(chain):
    report = validate(chain)
    if not report.passed:
        raise ConfigError(f"chain failed validation: {report.to_dict()}")
    return report


# ---------------------------------------------------------------------------
# analysis pipeline


def _certificate(chain, pair, r_target):
    from .recurrence import balanced_certificate, minimal_R
    if r_target is None:
        return balanced_certificate(chain, pair)
    return minimal_R(chain, pair, r_target)


def _network_checks(chain, pair):
    """RLT identity and voltage/taboo agreement when the chain is reversible."""
    from .hitting import taboo_probability
    from .network import edge_resistances, total_resistance_vs_green, voltage

    pi = stationary_distribution(chain)
    ok, _ = check_reversibility(chain, pi)
    rep = CheckReport()
    if not ok:
        rep.skip("resistance_equals_local_time", "chain is not reversible")
        return rep, None
    net = edge_resistances(chain, pi)
    R, lt, gap = total_resistance_vs_green(net, chain, pair.x0, pair.G)
    rep.add("resistance_equals_local_time", gap, 1e-8, 0.0, x=pair.x0)
    v = voltage(net, pair.x0, pair.G)
    worst = 0.0
    for y in range(chain.n):
        if y == pair.x0 or y in pair.G:
            continue
        worst = max(worst, abs(v[y] - taboo_probability(chain, y, {pair.x0}, pair.G)))
    rep.add("voltage_equals_taboo_probability", worst, 1e-10, 0.0)
    return rep, {"resistance": R, "local_time_over_measure": lt}


def run_analysis(cfg):
    """Build the full report dict; figures and CSV files go to ``cfg.out``."""
    from . import plotting
    from .expbounds import (density_profile, ee_check, lemma_suite,
                            verify_exponential_law)
    from .hitting import hitting_stats
    from .hypotheses import local_time_ratio, mean_time_ratio, theorem_inequality_suite

    chain, pair, source = load_chain_and_pair(cfg)
    validation = _require_valid(chain)
    out = Path(cfg.out) if cfg.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    stats = hitting_stats(chain, pair, cfg.zetas)
    cert = _certificate(chain, pair, cfg.r_target)
    report = {
        "version": __version__,
        "chain": {"n": chain.n, "source": source},
        "pair": {"x0": pair.x0, "G": sorted(pair.G)},
        "validation": validation.to_dict(),
        "hitting": stats.to_dict(),
        "certificate": None if cert is None else cert.to_dict(),
    }
    failed = False

    hyp = theorem_inequality_suite(chain, pair, cfg.zetas[0], cert)
    report["hypotheses"] = {
        "local_time_ratio": local_time_ratio(chain, pair),
        "mean_time_ratio": mean_time_ratio(chain, pair),
        "checks": hyp.to_dict() if "theorem" in cfg.suites else {"status": "not requested"},
    }
    if "theorem" in cfg.suites:
        failed |= not hyp.passed

    if "envelope" not in cfg.suites:
        report["envelope"] = {"status": "not requested"}
    elif cert is None:
        report["envelope"] = {"status": "skipped", "reason": "no recurrence certificate"}
    else:
        try:
            dev = verify_exponential_law(chain, pair, cert, cfg.t_grid(), from_basin=True)
        except SmallnessViolated as exc:
            report["envelope"] = {"status": "skipped", "reason": exc.violations}
        else:
            report["envelope"] = {"status": "pass" if dev.passed else "fail", **dev.to_dict()}
            failed |= not dev.passed
            if out is not None:
                _write_csv(out / "envelope.csv", ["t", "survival", "exp", "deviation", "envelope"],
                           zip(dev.t, dev.survival, np.exp(-dev.t), dev.measured, dev.envelope))
                if cfg.plots:
                    plotting.exponential_law(dev, out / "envelope.png")

    if "lemma" not in cfg.suites:
        report["lemma_suite"] = {"status": "not requested"}
    elif cert is None or cert.R >= stats.mean:
        report["lemma_suite"] = {"status": "skipped", "reason": "needs a certificate with R < T"}
    else:
        lem = lemma_suite(chain, pair, cert, S=cfg.scale)
        report["lemma_suite"] = {"status": "pass" if lem.passed else "fail", **lem.to_dict()}
        failed |= not lem.passed

    report["early_exponential"] = _early_exponential(chain, pair, cert, stats.mean, out, cfg,
                                                     ee_check, density_profile, plotting)

    if "network" in cfg.suites:
        try:
            net, values = _network_checks(chain, pair)
        except NotIrreducible as exc:
            report["network"] = {"status": "skipped", "reason": str(exc)}
        else:
            status = "skipped" if not net.checks else ("pass" if net.passed else "fail")
            report["network"] = {"status": status, **net.to_dict(), "values": values}
            failed |= not net.passed
    else:
        report["network"] = {"status": "not requested"}

    report["passed"] = not failed
    if out is not None:
        with open(out / "report.json", "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
    return report


def _early_exponential(chain, pair, cert, T, out, cfg, ee_check, density_profile, plotting):
    if cert is None or cert.R >= T:
        return {"status": "skipped", "reason": "needs a certificate with R < T"}
    eta = math.sqrt(max(cert.R / T, cert.r))
    S = int(math.floor(eta * T))
    if not 1 <= S <= T:
        return {"status": "skipped", "reason": "scale outside [1, T]"}
    alpha = ee_check(chain, pair, S)
    prof = density_profile(chain, pair, S)
    if out is not None:
        _write_csv(out / "density.csv", ["k", "mass", "a", "density", "geometric_density"],
                   zip(prof["k"], prof["mass"], prof["a"], prof["density"],
                       prof["geometric_density"]))
        if cfg.plots:
            plotting.density_profile(prof, out / "density.png")
    scale = (cert.R / T + cert.r) / eta
    return {"status": "computed", "scale": S, "scale_fraction": eta, "alpha": alpha,
            "alpha_over_scale_ratio": alpha / scale if scale > 0 else None,
            "rate": prof["rate"], "remainder": prof["remainder"]}


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))


# ---------------------------------------------------------------------------
# commands


def cmd_model(args):
    chain, pair, params = build_preset(args.preset, **_preset_overrides(args))
    d = chain.to_dict()
    d["preset"] = {"name": args.preset, "version": PRESET_VERSION, "params": params,
                   "x0": pair.x0, "G": sorted(pair.G)}
    text = json.dumps(d)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_analyze(args):
    cfg = AnalysisConfig.from_sources(args)
    report = run_analysis(cfg)
    print(_summary(report))
    if cfg.out is None:
        print(json.dumps(report, indent=2, sort_keys=True, default=_json_default))
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def _summary(report):
    h = report["hitting"]
    lines = [f"{'quantity':<28} value",
             f"{'mean exit time':<28} {h['mean']:.6g}",
             f"{'local time at start':<28} {h['local_time_at_start']:.6g}"]
    for z, q in h["quantiles"].items():
        lines.append(f"{'quantile time ' + format(float(z), '.4g'):<28} {q}")
    hy = report["hypotheses"]
    lines.append(f"{'local time ratio':<28} {hy['local_time_ratio']:.6g}")
    lines.append(f"{'mean time ratio':<28} {hy['mean_time_ratio']:.6g}")
    cert = report["certificate"]
    if cert:
        lines.append(f"{'recurrence (R, r)':<28} ({cert['R']}, {cert['r']:.4g})")
    for key in ("envelope", "lemma_suite", "early_exponential", "network"):
        lines.append(f"{key:<28} {report[key]['status']}")
    lines.append(f"{'overall':<28} {'PASS' if report['passed'] else 'FAIL'}")
    return "\n".join(lines)


def _parse_grid(text):
    """``"64,128,256"`` or ``"lo:hi:n"`` (geometric)."""
    if text is None or not text.strip():
        raise InsufficientGrid("empty grid")
    if ":" in text:
        try:
            lo, hi, n = text.split(":")
            return np.geomspace(float(lo), float(hi), int(n)).tolist()
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


def cmd_sweep(args):
    from . import plotting
    from .hypotheses import PresetFamily, evaluate_hypotheses

    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}")
    grid = _parse_grid(args.grid)
    fixed = _preset_overrides(args)
    fixed.pop(args.param, None)
    preset_params(args.preset, **fixed)
    family = PresetFamily(args.preset, args.param, **fixed)
    zetas = args.zeta or [DEFAULT_ZETA]
    sweep = evaluate_hypotheses(family, grid, param_name=args.param,
                                direction=family.direction, zetas=zetas,
                                quantiles=args.quantiles, tails=args.tails,
                                exact_recurrence=args.exact_recurrence,
                                workers=_workers())
    columns = ["param"] + list(sweep.points[0].quantities())
    rows = [[p.param] + list(p.quantities().values()) for p in sweep.points]
    track = args.track or [c for c in columns[1:]]
    unknown = set(track) - set(columns[1:])
    if unknown:
        raise ConfigError(f"unknown tracked quantities {sorted(unknown)}")
    summary = sweep.to_dict()
    summary["fits"] = {k: v for k, v in summary["fits"].items() if k in track}
    summary["preset"] = {"name": args.preset, "version": PRESET_VERSION, "fixed": fixed}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "sweep.csv", columns, rows)
        with open(out / "fits.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        if not args.no_plots:
            plotting.sweep(sweep, track, out / "sweep.png")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        sys.stdout.write(buf.getvalue())
    print(f"{'quantity':<32} {'slope':>10} {'residual':>10}", file=sys.stderr)
    for k in track:
        f = sweep.fits[k]
        print(f"{k:<32} {f.slope:>10.4f} {f.max_rel_residual:>10.3g}", file=sys.stderr)
    for k, v in sweep.verdicts.items():
        print(f"hypothesis {k:<21} {'holds' if v else 'fails'}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    from .expbounds import lemma_suite, verify_exponential_law
    from .hitting import mean_hitting_time
    from .hypotheses import theorem_inequality_suite

    cfg = AnalysisConfig.from_sources(args)
    chain, pair, _ = load_chain_and_pair(cfg)
    _require_valid(chain)
    tol = args.tol
    cert = _certificate(chain, pair, cfg.r_target)
    total = CheckReport()
    T = mean_hitting_time(chain, pair.x0, pair.G)
    if "theorem" in cfg.suites:
        total.extend(theorem_inequality_suite(chain, pair, cfg.zetas[0], cert))
    if "lemma" in cfg.suites:
        if cert is None or cert.R >= T:
            total.skip("lemma", "needs a certificate with R < T")
        else:
            total.extend(lemma_suite(chain, pair, cert, S=cfg.scale, tolerance=tol))
    if "envelope" in cfg.suites:
        if cert is None:
            total.skip("envelope", "no recurrence certificate")
        else:
            try:
                dev = verify_exponential_law(chain, pair, cert, cfg.t_grid(), from_basin=True)
            except SmallnessViolated as exc:
                total.skip("envelope", "; ".join(exc.violations))
            else:
                total.add("envelope", dev.max_ratio, 1.0, 0.0, worst_t=dev.worst_t)
                for b in dev.basin:
                    total.add("envelope_basin", b["max_ratio"], 1.0, 0.0, start=b["start"])
    if "network" in cfg.suites:
        net, _ = _network_checks(chain, pair)
        total.extend(net)
    print(total.table())
    if args.json:
        Path(args.json).write_text(json.dumps(total.to_dict(full=True), indent=2,
                                              sort_keys=True, default=_json_default))
    return EXIT_OK if total.passed else EXIT_FAILURE


def cmd_simulate(args):
    from . import plotting
    from .hitting import mean_hitting_time, survival_curve
    from .montecarlo import dkw_band, ks_distance, sample_hitting_times

    if args.count is None or args.count < 1:
        raise ConfigError("--count must be a positive integer")
    cfg = AnalysisConfig.from_sources(args)
    chain, pair, source = load_chain_and_pair(cfg)
    _require_valid(chain)
    start = pair.x0 if args.start is None else args.start
    samples = sample_hitting_times(chain, start, pair.G, args.count, args.seed,
                                   workers=_workers())
    curve = survival_curve(chain, start, pair.G)
    d = ks_distance(samples, curve)
    band = dkw_band(samples.count, args.alpha)
    report = {"source": source, **samples.metadata(), "ks_distance": d,
              "dkw_band": band, "alpha": args.alpha, "within_band": d <= band,
              "empirical_mean": samples.mean(),
              "exact_mean": mean_hitting_time(chain, start, pair.G)}
    if args.output:
        if str(args.output).endswith(".npy"):
            samples.to_npy(args.output)
        else:
            samples.to_csv(args.output)
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    if args.plot:
        plotting.samples_vs_exact(samples, curve, report["exact_mean"], args.plot, band)
    return EXIT_OK if report["within_band"] else EXIT_FAILURE


# ---------------------------------------------------------------------------
# argument parsing


def _add_preset_params(p):
    g = p.add_argument_group("preset parameters")
    g.add_argument("--p", type=float)
    g.add_argument("--h", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--L", type=int)


def _add_source(p, with_config=True):
    src = p.add_argument_group("chain source")
    src.add_argument("--chain", help="chain JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--x0", type=int, help="reference state")
    src.add_argument("--target", type=int, nargs="+", help="target set G")
    if with_config:
        p.add_argument("--config", help="JSON file with AnalysisConfig fields")
    _add_preset_params(p)


def _add_analysis_opts(p):
    p.add_argument("--zeta", type=float, nargs="+", help="quantile levels (default 1/e)")
    p.add_argument("--r-target", dest="r_target", type=float,
                   help="recurrence error target (default: balanced certificate)")
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-points", dest="t_points", type=int)
    p.add_argument("--scale", type=int, help="lemma-suite scale S (default 10 R)")
    p.add_argument("--suite", nargs="+", choices=SUITES)


def build_parser():
    parser = argparse.ArgumentParser(prog="hittime", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hittime {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="write a preset chain as JSON")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("-o", "--output")
    _add_preset_params(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("analyze", help="full report for one chain")
    _add_source(p)
    _add_analysis_opts(p)
    p.add_argument("--out", help="directory for report.json, CSV files and figures")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="hypothesis proxies along a preset family")
    p.add_argument("--preset", required=True)
    p.add_argument("--param", required=True, help="parameter to vary (e.g. L or p)")
    p.add_argument("--grid", required=True, help="comma list, or lo:hi:n for a geometric grid")
    p.add_argument("--track", nargs="+", help="quantities to fit and plot (default: all)")
    p.add_argument("--zeta", type=float, nargs="+")
    p.add_argument("--quantiles", action="store_true", help="also compute quantile times")
    p.add_argument("--tails", action="store_true", help="also report P(tau > T_n)")
    p.add_argument("--exact-recurrence", dest="exact_recurrence", action="store_true")
    p.add_argument("--out", help="directory for sweep.csv, fits.json and sweep.png")
    p.add_argument("--no-plots", action="store_true")
    _add_preset_params(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run inequality suites; exit 0 iff all pass")
    _add_source(p)
    _add_analysis_opts(p)
    p.add_argument("--tol", type=float, default=1e-10, help="slack tolerance")
    p.add_argument("--json", help="write the full check list here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo hitting times with a KS report")
    _add_source(p)
    p.add_argument("--start", type=int, help="start state (default x0)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01, help="DKW band level")
    p.add_argument("-o", "--output", help="samples file (.csv or .npy)")
    p.add_argument("--report", help="KS report JSON (default stdout)")
    p.add_argument("--plot", help="figure path")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParamOutOfRange, InsufficientGrid) as exc:
        print(f"hittime: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HittimeError as exc:
        print(f"hittime: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"hittime: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
