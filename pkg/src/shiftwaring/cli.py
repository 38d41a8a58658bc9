"""Batch experiment driver.

Every subcommand except ``verify`` takes a JSON configuration object via
--config.  Shared optional fields: label (free text), workers and
budget_tuples (the command-line flags win), smoothing ("log",
"identity", "sqrt").  Shift values are decimal literals or preset names
(sqrt2, golden, e2).  Per-subcommand fields are documented in README.md.

CSV output is UTF-8 with LF line endings, a mandatory header row, a
fixed column order per subcommand, and the 16-hex configuration digest
as the last column of every row.  Wall-clock metadata lives in a
sidecar <out>.meta.json, never in the CSV body; the runtime_ms column
of the count table is the one deliberately volatile cell.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration
(no output file is written), 3 budget exceeded (partial output ending
in a diagnostic row).
"""

import argparse
import datetime
import json
import math
import sys
import time

from ._util import config_digest
from .core import Instance, Query, expected_main_term, resolve_shift
from .counting import (DEFAULT_TUPLE_BUDGET, count_meet_middle,
                       count_power_system, count_power_system_shifted,
                       count_solutions, count_solutions_boxed,
                       weighted_solution_count)
from .dissection import ARC_CLASSES, DissectionParams, classify_frequency
from .errors import (BudgetExceededError, ConfigError, NonConvergenceError,
                     ShiftWaringError)
from .integrator import (arc_contributions, default_truncation, dh_integral,
                         hua_moment, minor_moment, slope_estimate)
from .kernels import SMOOTHING_CHOICES, KernelParams, KernelSpec
from .verify import render_report_csv, render_report_json, run_suite

_COMMON_KEYS = {"label", "workers", "budget_tuples", "smoothing"}

# Brute enumeration stays pleasant up to this much raw tuple space.
_AUTO_BRUTE_CAP = 2_000_000


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _check_keys(cfg: dict, allowed: set, command: str) -> None:
    extra = sorted(set(cfg) - allowed - _COMMON_KEYS)
    if extra:
        raise ConfigError(
            f"unknown config fields for {command}: {', '.join(extra)}")


def _get(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config missing required field {key!r}")
    return cfg[key]


def _get_int(cfg: dict, key: str) -> int:
    v = _get(cfg, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
        raise ConfigError(f"{key} must be an integer")
    return int(v)


def _get_float(cfg: dict, key: str) -> float:
    v = _get(cfg, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(v)


def _number_list(cfg: dict, key: str, positive: bool = False,
                 integer: bool = False) -> list:
    raw = _get(cfg, key)
    vals = raw if isinstance(raw, list) else [raw]
    if not vals:
        raise ConfigError(f"{key} must not be empty")
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"every {key} entry must be a number")
        if integer and v != int(v):
            raise ConfigError(f"every {key} entry must be an integer")
        if positive and not v > 0:
            raise ConfigError(f"every {key} entry must be positive")
        out.append(int(v) if integer else float(v))
    return out


def _smoothing_of(cfg: dict) -> str:
    smoothing = cfg.get("smoothing", "log")
    if smoothing not in SMOOTHING_CHOICES:
        raise ConfigError(f"unknown smoothing {smoothing!r}")
    return smoothing


def _instance_from(cfg: dict) -> Instance:
    k = _get_int(cfg, "k")
    s = _get_int(cfg, "s")
    _get(cfg, "theta")
    eta = _get_float(cfg, "eta")
    return Instance.make(k, s, cfg["theta"], eta)


def _kernel_for(cfg: dict, eta: float, P: float,
                smoothing: str) -> KernelSpec:
    kind = cfg.get("kind", "dh")
    if "delta" in cfg:
        params = KernelParams(eta=float(eta), delta=_get_float(cfg, "delta"))
    else:
        params = KernelParams.from_length(float(eta), float(P), smoothing)
    return KernelSpec(kind=kind, params=params)


def _dissection_for(cfg: dict, P: float, k: int,
                    smoothing: str) -> DissectionParams:
    Q = cfg.get("Q")
    if "Q_exp" in cfg:
        if Q is not None:
            raise ConfigError("pass at most one of Q, Q_exp")
        Q = float(P) ** _get_float(cfg, "Q_exp")
    return DissectionParams(P=float(P), k=int(k),
                            xi=float(cfg.get("xi", 0.5)), Q=Q,
                            T=cfg.get("T"), t_exp=cfg.get("t_exp"),
                            smoothing=smoothing)


def _digest(args, cfg: dict) -> str:
    return config_digest(dict(cfg, command=args.command))


def _fmt(value) -> str:
    if value is None or (isinstance(value, str) and value == ""):
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def _meta(args, cfg: dict, digest: str, t0: float) -> dict:
    def iso(t):
        return datetime.datetime.fromtimestamp(
            t, datetime.timezone.utc).isoformat(timespec="milliseconds")

    now = time.time()
    return {"command": args.command, "config": cfg, "config_hash": digest,
            "workers": args.workers, "budget_tuples": args.budget_tuples,
            "started_utc": iso(t0), "finished_utc": iso(now),
            "runtime_ms": int(round((now - t0) * 1000.0))}


def _emit(args, cfg: dict, digest: str, header, rows, t0: float) -> None:
    """Write one CSV table to --out (plus the metadata sidecar) or to
    stdout; cells must stay free of the delimiter."""
    lines = [",".join(header)]
    for row in rows:
        cells = [_fmt(v) for v in row]
        for c in cells:
            if "," in c or "\n" in c:
                raise AssertionError("CSV cells must stay delimiter-free")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    _write_text(args.out, text)
    meta = json.dumps(_meta(args, cfg, digest, t0),
                      indent=2, sort_keys=True) + "\n"
    _write_text(args.out + ".meta.json", meta)


def _pick_method(inst: Instance, tau: float, requested: str) -> str:
    if requested != "auto":
        return requested
    if inst.s < 2:
        return "brute"
    xmax = int(math.ceil((tau + inst.eta) ** (1.0 / inst.k) + 1.0))
    return "brute" if xmax ** inst.s <= _AUTO_BRUTE_CAP else "mitm"


def _count_three(inst: Instance, tau: float, method: str, budget: int):
    """Natural-range, boxed, and tent-weighted counts by one engine."""
    if method == "mitm":
        n = count_meet_middle(inst, tau, bound="natural", budget=budget)
        nstar = count_meet_middle(inst, tau, bound="box", budget=budget)
        w = count_meet_middle(inst, tau, weighted=True, bound="box",
                              budget=budget)
        return int(n.value), int(nstar.value), float(w.value)
    n = count_solutions(inst, tau, budget=budget)
    nstar = count_solutions_boxed(inst, tau, budget=budget)
    w = weighted_solution_count(inst, tau, budget=budget)
    return int(n.value), int(nstar.value), float(w)


_COUNT_HEADER = ("tau", "P", "N", "Nstar", "weighted", "main_term",
                 "ratio", "method", "runtime_ms", "config_hash")


def _cmd_count(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"k", "s", "theta", "eta", "tau", "method"}, "count")
    inst = _instance_from(cfg)
    taus = _number_list(cfg, "tau", positive=True)
    requested = cfg.get("method", "auto")
    if requested not in ("auto", "brute", "mitm"):
        raise ConfigError(f"unknown method {requested!r}")
    digest = _digest(args, cfg)
    rows = []
    code = 0
    for tau in taus:
        tick = time.perf_counter()
        q = Query.from_tau(inst, tau)
        method = _pick_method(inst, tau, requested)
        try:
            n, nstar, w = _count_three(inst, tau, method,
                                       args.budget_tuples)
        except BudgetExceededError as exc:
            ms = int(round((time.perf_counter() - tick) * 1000.0))
            rows.append([tau, q.P, "", "", "", "", "",
                         "budget-exceeded", ms, digest])
            print(f"shiftwaring: budget exceeded at tau={tau:g}: {exc}",
                  file=sys.stderr)
            code = 3
            break
        main = expected_main_term(inst, tau)
        ms = int(round((time.perf_counter() - tick) * 1000.0))
        rows.append([tau, q.P, n, nstar, w, main, float(n) / main,
                     method, ms, digest])
    _emit(args, cfg, digest, _COUNT_HEADER, rows, t0)
    return code


_INTEGRATE_HEADER = ("tau", "P", "kind", "value_re", "value_im",
                     "tail_bound", "disc_error", "panels", "config_hash")


def _cmd_integrate(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"k", "s", "theta", "eta", "tau", "kind", "delta",
                      "A", "mesh"}, "integrate")
    inst = _instance_from(cfg)
    taus = _number_list(cfg, "tau", positive=True)
    smoothing = _smoothing_of(cfg)
    digest = _digest(args, cfg)
    rows = []
    for tau in taus:
        q = Query.from_tau(inst, tau)
        spec = _kernel_for(cfg, inst.eta, q.P, smoothing)
        res = dh_integral(inst, tau, spec, A=cfg.get("A"),
                          mesh=cfg.get("mesh"), workers=args.workers,
                          smoothing=smoothing)
        rows.append([tau, q.P, spec.kind, res.value.real, res.value.imag,
                     res.tail_bound, res.disc_error, res.panels, digest])
    _emit(args, cfg, digest, _INTEGRATE_HEADER, rows, t0)
    return 0


_ARCS_HEADER = ("tau", "P", "arc", "value_re", "value_im", "tail_bound",
                "disc_error", "panels", "config_hash")


def _cmd_arcs(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"k", "s", "theta", "eta", "tau", "kind", "delta",
                      "xi", "Q", "Q_exp", "T", "t_exp", "A", "mesh"},
                "arcs")
    inst = _instance_from(cfg)
    taus = _number_list(cfg, "tau", positive=True)
    smoothing = _smoothing_of(cfg)
    digest = _digest(args, cfg)
    rows = []
    for tau in taus:
        q = Query.from_tau(inst, tau)
        params = _dissection_for(cfg, q.P, inst.k, smoothing)
        spec = _kernel_for(cfg, inst.eta, q.P, smoothing)
        parts = arc_contributions(inst, tau, spec, params, A=cfg.get("A"),
                                  mesh=cfg.get("mesh"),
                                  workers=args.workers, smoothing=smoothing)
        for cls in ARC_CLASSES:
            res = parts[cls]
            rows.append([tau, q.P, cls, res.value.real, res.value.imag,
                         res.tail_bound, res.disc_error, res.panels,
                         digest])
    _emit(args, cfg, digest, _ARCS_HEADER, rows, t0)
    return 0


_MINOR_KEYS = {"theta", "s2", "k", "P", "eta", "delta", "kind", "xi", "Q",
               "Q_exp", "T", "t_exp", "A", "mesh"}
_MINOR_HEADER = ("P", "s2", "k", "moment", "tail_bound", "disc_error",
                 "panels", "config_hash")


def _cmd_minor_moment(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, _MINOR_KEYS, "minor-moment")
    theta = resolve_shift(_get(cfg, "theta"))
    s2 = _get_int(cfg, "s2")
    k = _get_int(cfg, "k")
    eta = _get_float(cfg, "eta")
    Ps = _number_list(cfg, "P", positive=True)
    smoothing = _smoothing_of(cfg)
    digest = _digest(args, cfg)
    rows = []
    for P in Ps:
        params = _dissection_for(cfg, P, k, smoothing)
        spec = _kernel_for(cfg, eta, P, smoothing)
        A = float(cfg["A"]) if "A" in cfg else \
            default_truncation(eta, P, smoothing)
        res = minor_moment(theta, s2, k, P, spec, params, A=A,
                           mesh=cfg.get("mesh"), workers=args.workers)
        rows.append([P, s2, k, res.value.real, res.tail_bound,
                     res.disc_error, res.panels, digest])
    _emit(args, cfg, digest, _MINOR_HEADER, rows, t0)
    return 0


_HUA_HEADER = ("P", "j", "k", "power", "moment", "tail_bound",
               "disc_error", "panels", "config_hash")


def _cmd_hua_moment(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"theta", "j", "k", "P", "zeta_eta", "A", "mesh"},
                "hua-moment")
    theta = resolve_shift(_get(cfg, "theta"))
    j = _get_int(cfg, "j")
    k = _get_int(cfg, "k")
    zeta_eta = _get_float(cfg, "zeta_eta")
    Ps = _number_list(cfg, "P", positive=True)
    digest = _digest(args, cfg)
    rows = []
    for P in Ps:
        res = hua_moment(theta, j, k, P, zeta_eta, A=cfg.get("A"),
                         mesh=cfg.get("mesh"), workers=args.workers)
        rows.append([P, j, k, j * (j + 1), res.value.real, res.tail_bound,
                     res.disc_error, res.panels, digest])
    _emit(args, cfg, digest, _HUA_HEADER, rows, t0)
    return 0


_JCOUNT_HEADER = ("P", "s", "k", "J", "J_shifted", "config_hash")


def _cmd_jcount(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"s", "k", "P", "theta", "eta"}, "jcount")
    s = _get_int(cfg, "s")
    k = _get_int(cfg, "k")
    Ps = _number_list(cfg, "P", positive=True, integer=True)
    shifted = "theta" in cfg or "eta" in cfg
    if shifted and not ("theta" in cfg and "eta" in cfg):
        raise ConfigError("the shifted variant needs both theta and eta")
    digest = _digest(args, cfg)
    rows = []
    for P in Ps:
        J = count_power_system(s, k, P, budget=args.budget_tuples)
        Js = ""
        if shifted:
            Js = count_power_system_shifted(s, k, P, cfg["theta"],
                                            _get_float(cfg, "eta"),
                                            budget=args.budget_tuples)
        rows.append([P, s, k, J, Js, digest])
    _emit(args, cfg, digest, _JCOUNT_HEADER, rows, t0)
    return 0


_CLASSIFY_HEADER = ("alpha", "band", "witness", "large_sum", "config_hash")


def _cmd_classify(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"alpha", "P", "k", "xi", "Q", "Q_exp", "T", "t_exp",
                      "theta3"}, "classify")
    alphas = _number_list(cfg, "alpha")
    k = _get_int(cfg, "k")
    P = _get_float(cfg, "P")
    smoothing = _smoothing_of(cfg)
    params = _dissection_for(cfg, P, k, smoothing)
    inst = None
    if "theta3" in cfg:
        inst = Instance.make(k, 1, (cfg["theta3"],), 1.0)
    digest = _digest(args, cfg)
    rows = []
    for alpha in alphas:
        lab = classify_frequency(alpha, params, inst=inst,
                                 with_large_sum=inst is not None)
        if lab.band == "major":
            witness = ""
        elif lab.witness[0] == "n":
            witness = "n"
        else:
            witness = f"N:{lab.witness[1]}/{lab.witness[2]}"
        large = "" if lab.large_sum is None else lab.large_sum
        rows.append([alpha, lab.band, witness, large, digest])
    _emit(args, cfg, digest, _CLASSIFY_HEADER, rows, t0)
    return 0


def _cmd_verify(args, cfg: dict, t0: float) -> int:
    _check_keys(cfg, {"mutate"}, "verify")
    report = run_suite(workers=args.workers, mutate=cfg.get("mutate"))
    digest = report["config_hash"]
    as_json = args.out is not None and args.out.endswith(".json")
    text = render_report_json(report) if as_json \
        else render_report_csv(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write_text(args.out, text)
        meta = json.dumps(_meta(args, cfg, digest, t0),
                          indent=2, sort_keys=True) + "\n"
        _write_text(args.out + ".meta.json", meta)
        good = sum(1 for c in report["checks"] if c["passed"])
        print(f"verify: {good}/{len(report['checks'])} checks passed")
    return 0 if report["passed"] else 1


def _minor_envelope(s2: int, k: int) -> float:
    """max(s + k(k-1)/2, 2s - k) - 1/4 with s = s2/2 half-variables."""
    s = s2 / 2.0
    return max(s + k * (k - 1) / 2.0, 2.0 * s - k) - 0.25


def _hua_envelope(j: int) -> float:
    """j(j+1) - j, the conditional growth exponent of the probe."""
    return float(j * (j + 1) - j)


_SLOPES_HEADER = ("P", "moment", "tail_bound", "disc_error", "panels",
                  "status", "config_hash")


def _cmd_slopes(args, cfg: dict, t0: float) -> int:
    mode = cfg.get("mode")
    if mode not in ("minor", "hua"):
        raise ConfigError('mode must be "minor" or "hua"')
    if args.out is None:
        raise ConfigError("slopes writes a CSV and a fit file; --out "
                          "is required")
    if mode == "minor":
        _check_keys(cfg, _MINOR_KEYS | {"mode"}, "slopes")
    else:
        _check_keys(cfg, {"mode", "theta", "j", "k", "P", "zeta_eta",
                          "A", "mesh"}, "slopes")
    Ps = _number_list(cfg, "P", positive=True)
    if len(set(Ps)) < 4:
        raise ConfigError("slope fits need at least 4 distinct P values")
    smoothing = _smoothing_of(cfg)
    theta = resolve_shift(_get(cfg, "theta"))
    k = _get_int(cfg, "k")
    digest = _digest(args, cfg)
    if mode == "minor":
        s2 = _get_int(cfg, "s2")
        eta = _get_float(cfg, "eta")
        envelope = _minor_envelope(s2, k)

        def compute(P):
            params = _dissection_for(cfg, P, k, smoothing)
            spec = _kernel_for(cfg, eta, P, smoothing)
            A = float(cfg["A"]) if "A" in cfg else \
                default_truncation(eta, P, smoothing)
            return minor_moment(theta, s2, k, P, spec, params, A=A,
                                mesh=cfg.get("mesh"), workers=args.workers)
    else:
        j = _get_int(cfg, "j")
        zeta_eta = _get_float(cfg, "zeta_eta")
        envelope = _hua_envelope(j)

        def compute(P):
            return hua_moment(theta, j, k, P, zeta_eta, A=cfg.get("A"),
                              mesh=cfg.get("mesh"), workers=args.workers)

    rows = []
    pts = []
    for P in Ps:
        try:
            res = compute(P)
        except BudgetExceededError as exc:
            rows.append([P, "", "", "", "", "budget-exceeded", digest])
            _emit(args, cfg, digest, _SLOPES_HEADER, rows, t0)
            print(f"shiftwaring: budget exceeded at P={P:g}: {exc}",
                  file=sys.stderr)
            return 3
        rows.append([P, res.value.real, res.tail_bound, res.disc_error,
                     res.panels, "ok", digest])
        pts.append((P, res.value.real))
    fit = slope_estimate(pts)
    _emit(args, cfg, digest, _SLOPES_HEADER, rows, t0)
    doc = {"mode": mode, "exponent": fit.exponent,
           "intercept": fit.intercept, "residual": fit.residual,
           "envelope_exponent": envelope,
           "points": [[p, v] for p, v in pts],
           "config_hash": digest}
    _write_text(args.out + ".slopefit.json",
                json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"slopes: fitted exponent {fit.exponent:.4f}, "
          f"envelope {envelope:.4f}")
    return 0


_COMMANDS = (
    ("count", "solution counts, main term, and their ratio per tau",
     _cmd_count),
    ("integrate", "kernel-weighted counting integral per tau",
     _cmd_integrate),
    ("arcs", "counting integral regrouped by arc class", _cmd_arcs),
    ("minor-moment", "restricted power moment of one exponential sum",
     _cmd_minor_moment),
    ("hua-moment", "whole-line power-moment probe", _cmd_hua_moment),
    ("jcount", "power-sum system solution counts", _cmd_jcount),
    ("classify", "arc labels for a list of frequencies", _cmd_classify),
    ("verify", "run the cross-module invariant suite", _cmd_verify),
    ("slopes", "moment sweep with a fitted growth exponent", _cmd_slopes),
)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON configuration file")
    common.add_argument("--out", metavar="PATH",
                        help="output path (stdout when omitted)")
    common.add_argument("--workers", type=int, default=None, metavar="N",
                        help="worker threads for quadrature (default 1)")
    common.add_argument("--budget-tuples", type=int, default=None,
                        dest="budget_tuples", metavar="N",
                        help="enumeration budget cap "
                             f"(default {DEFAULT_TUPLE_BUDGET})")
    parser = argparse.ArgumentParser(
        prog="shiftwaring",
        description="Experiments on counting solutions of shifted "
                    "power-sum inequalities.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="SUBCOMMAND")
    for name, help_text, handler in _COMMANDS:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
    return parser


def _resolve_flag(flag_value, cfg_value, fallback: int, name: str) -> int:
    value = flag_value if flag_value is not None else cfg_value
    if value is None:
        value = fallback
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{name} must be a positive integer")
    return value


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.time()
    try:
        cfg = {}
        if args.config is not None:
            cfg = _load_config(args.config)
        elif args.command != "verify":
            raise ConfigError(f"{args.command} requires --config")
        args.workers = _resolve_flag(args.workers, cfg.get("workers"),
                                     1, "workers")
        args.budget_tuples = _resolve_flag(
            args.budget_tuples, cfg.get("budget_tuples"),
            DEFAULT_TUPLE_BUDGET, "budget_tuples")
        return args.handler(args, cfg, t0)
    except ConfigError as exc:
        print(f"shiftwaring: config error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceededError, NonConvergenceError) as exc:
        print(f"shiftwaring: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except ShiftWaringError as exc:
        print(f"shiftwaring: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
