"""Command-line interface: ``dataeff eval | sweep | verify``.

Exit codes: 0 success (verify: PASS), 1 domain or I/O error, 2 usage error,
3 verify FAIL.
"""

import argparse
import datetime as dt
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from dataeff import __version__
from dataeff.errors import DomainError, RegimeError, ResourceError
from dataeff.fading import FadingModel
from dataeff.link import LinkParams
from dataeff.metrics import (
    HELD,
    CpaConfig,
    CraConfig,
    eor_cpa,
    eor_cra,
    ior_cpa,
    ior_cra,
    mec_cpa,
    mec_cra,
    mid_cpa,
    mid_cra_single,
)
from dataeff.montecarlo import GENERATOR_ID, SimConfig, estimate_eor, estimate_ior
from dataeff.units import UnitError, db_to_linear, parse_db, parse_quantity

DEFAULT_N0 = 1e-9
EXIT_ERROR = 1
EXIT_FAIL = 3

# name -> (flag, quantity kind)
PARAMS = {
    "H": ("--H", "data"),
    "E_th": ("--Eth", "energy"),
    "E": ("--E", "energy"),
    "H_th": ("--Hth", "data"),
    "B": ("--B", "frequency"),
    "N0": ("--N0", "density"),
    "p_t": ("--Pt", "power"),
    "gamma_c": ("--gammac", "gain"),
    "p_max": ("--Pmax", "power"),
    "g": ("--g", "gain"),
    "T_c": ("--Tc", "time"),
    "avg_gain": ("--gbar", "gain"),
}

REQUIRED = {
    ("eor", "cra"): ("H", "E_th", "B", "p_t", "fading", "avg_gain"),
    ("eor", "cpa"): ("H", "E_th", "B", "gamma_c", "p_max", "fading", "avg_gain"),
    ("ior", "cra"): ("E", "H_th", "B", "p_t", "fading", "avg_gain"),
    ("ior", "cpa"): ("E", "H_th", "B", "gamma_c", "p_max", "fading", "avg_gain"),
    ("mec", "cra"): ("H", "g", "B", "p_t"),
    ("mec", "cpa"): ("H", "g", "B", "gamma_c", "p_max"),
    ("mid", "cra"): ("E", "g", "B", "p_t"),
    ("mid", "cpa"): ("E", "g", "B", "gamma_c", "p_max"),
}

# sweepable name -> (parameter it sets, quantity kind for min/max)
SWEEPABLE = {
    "E_th": ("E_th", "energy"),
    "H_th": ("H_th", "data"),
    "p_t": ("p_t", "power"),
    "B": ("B", "frequency"),
    "gamma_c": ("gamma_c", "gain"),
    "p_max": ("p_max", "power"),
    "avg_gain_db": ("avg_gain", "db"),
    "m": ("m", "shape"),
}

UNIT_OF = {"eor": "", "ior": "", "mec": "J", "mid": "bits"}
SI_LABEL = {
    "H": "bits", "E_th": "J", "E": "J", "H_th": "bits", "B": "Hz", "N0": "W/Hz",
    "p_t": "W", "gamma_c": "linear", "p_max": "W", "g": "linear", "T_c": "s",
    "avg_gain": "linear", "m": "",
}


def _quantity(kind):
    def convert(text):
        try:
            return parse_quantity(text, kind)
        except UnitError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    convert.__name__ = kind
    return convert


def _positive_int(text):
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _add_params(parser):
    group = parser.add_argument_group("parameters (bare numbers are SI)")
    for name, (flag, kind) in PARAMS.items():
        default = DEFAULT_N0 if name == "N0" else None
        group.add_argument(flag, dest=name, type=_quantity(kind), default=default, metavar=kind.upper())
    group.add_argument("--fading", choices=("rayleigh", "nakagami"))
    group.add_argument("--m", dest="m", type=float, help="Nakagami shape")
    parser.add_argument("--metric", choices=("eor", "ior", "mec", "mid"))
    parser.add_argument("--strategy", choices=("cra", "cpa"))
    parser.add_argument("--config", help="flat 'key = value' file mirroring flag names")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dataeff",
        description="Data-oriented energy-efficiency metrics for CRA/CPA over fading channels.",
    )
    parser.add_argument("--version", action="version", version=f"dataeff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one metric at one parameter point")
    _add_params(p_eval)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter and write a CSV curve")
    _add_params(p_sweep)
    p_sweep.add_argument("--swept", choices=tuple(SWEEPABLE))
    p_sweep.add_argument("--min", dest="grid_min")
    p_sweep.add_argument("--max", dest="grid_max")
    p_sweep.add_argument("--points", type=_positive_int)
    p_sweep.add_argument("--spacing", choices=("lin", "log"), default="lin")
    p_sweep.add_argument("--out", help="CSV path ('-' for stdout)")
    p_sweep.add_argument("--simulate", type=int, default=0, metavar="N",
                         help="also estimate EOR/IOR by Monte Carlo with N samples per point")
    p_sweep.add_argument("--seed", type=_seed, default=0)
    p_sweep.add_argument("--workers", type=_positive_int, default=1)

    p_verify = sub.add_parser("verify", help="compare a closed-form outage rate with Monte Carlo")
    _add_params(p_verify)
    p_verify.add_argument("--n", dest="n_samples", type=_positive_int, default=10**6)
    p_verify.add_argument("--seed", type=_seed, default=0)
    p_verify.add_argument("--workers", type=_positive_int, default=1)
    return parser


def read_config(path):
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            entries[key.lstrip("-")] = value
    return entries


def _apply_config(parser, argv):
    """Re-parse with config-file values installed as defaults so flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in ("eval", "sweep", "verify"):
        return parser.parse_args(argv)
    try:
        entries = read_config(known.config)
    except (OSError, ValueError) as exc:
        parser.error(f"config: {exc}")
    subparser = parser._subparsers._group_actions[0].choices[known.command]
    by_option = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            by_option[opt.lstrip("-")] = action
    defaults = {}
    for key, value in entries.items():
        action = by_option.get(key)
        if action is None or not action.option_strings:
            parser.error(f"config: unknown key {key!r}")
        defaults[action.dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


# -- parameter resolution ----------------------------------------------------


def _require(parser, params, names, context):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        flags = ", ".join(PARAMS[n][0] if n in PARAMS else f"--{n}" for n in missing)
        parser.error(f"{context} needs {flags}")


def collect_params(args):
    params = {name: getattr(args, name) for name in PARAMS}
    params["fading"] = args.fading
    params["m"] = args.m
    return params


def build_models(params):
    """Turn a resolved SI parameter dict into library objects."""
    link = LinkParams(params["B"], params["N0"])
    fading = None
    if params.get("fading") == "rayleigh":
        fading = FadingModel.rayleigh(params["avg_gain"])
    elif params.get("fading") == "nakagami":
        if params.get("m") is None:
            raise DomainError("Nakagami fading needs --m")
        fading = FadingModel.nakagami(params["m"], params["avg_gain"])
    return link, fading


def _strategy(strategy, params):
    if strategy == "cra":
        return CraConfig(params["p_t"])
    return CpaConfig(params["gamma_c"], params["p_max"])


def compute(metric, strategy, params):
    """Evaluate ``metric`` for ``strategy`` at SI parameters; may return :data:`HELD`."""
    link, fading = build_models(params)
    config = _strategy(strategy, params)
    p = params
    if metric == "eor":
        fn = eor_cra if strategy == "cra" else eor_cpa
        return fn(link, config, fading, p["H"], p["E_th"])
    if metric == "ior":
        fn = ior_cra if strategy == "cra" else ior_cpa
        return fn(link, config, fading, p["E"], p["H_th"])
    if metric == "mec":
        fn = mec_cra if strategy == "cra" else mec_cpa
        return fn(link, config, p["H"], p["g"])
    if strategy == "cra":
        return mid_cra_single(link, config, p["E"], p["g"], T_c=p.get("T_c"))
    return mid_cpa(link, config, p["E"], p["g"], T_c=p.get("T_c"))


def simulate(metric, strategy, params, sim):
    link, fading = build_models(params)
    config = _strategy(strategy, params)
    if metric == "eor":
        return estimate_eor(config, link, fading, params["H"], params["E_th"], sim)
    return estimate_ior(config, link, fading, params["E"], params["H_th"], sim)


def format_value(value, metric):
    if value is HELD:
        return "HELD"
    unit = UNIT_OF[metric]
    text = f"{value:.17g}"
    return f"{text} {unit}" if unit else text


# -- metadata ----------------------------------------------------------------


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = dt.datetime.fromtimestamp(int(epoch), tz=dt.timezone.utc)
    else:
        moment = dt.datetime.now(tz=dt.timezone.utc).replace(microsecond=0)
    return moment.isoformat()


@dataclass
class RunMetadata:
    command: str
    params: dict
    extra: dict = field(default_factory=dict)
    seed: int = None
    generator: str = None
    version: str = __version__
    timestamp: str = field(default_factory=_timestamp)

    def lines(self):
        out = [f"# tool: dataeff {self.version}", f"# command: {self.command}"]
        for key, value in self.extra.items():
            out.append(f"# {key}: {value}")
        for name in sorted(self.params):
            value = self.params[name]
            if value is None:
                continue
            if isinstance(value, float):
                label = SI_LABEL.get(name, "")
                value = f"{value!r} {label}".rstrip()
            out.append(f"# param {name}: {value}")
        if self.seed is not None:
            out.append(f"# seed: {self.seed}")
            out.append(f"# generator: {self.generator}")
        out.append(f"# timestamp: {self.timestamp}")
        return out


# -- commands ----------------------------------------------------------------


def cmd_eval(args, parser):
    _require(parser, vars(args), ("metric", "strategy"), "eval")
    params = collect_params(args)
    _require(parser, params, REQUIRED[args.metric, args.strategy], f"{args.metric}/{args.strategy}")
    value = compute(args.metric, args.strategy, params)
    print(format_value(value, args.metric))
    return 0


def sweep_grid(lo, hi, points, spacing):
    if spacing == "log":
        if lo <= 0.0:
            raise DomainError("log spacing needs a positive grid")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _grid_bound(text, kind):
    if kind == "db":
        return parse_db(text)
    if kind == "shape":
        return float(text)
    return parse_quantity(text, kind)


def cmd_sweep(args, parser):
    _require(parser, vars(args), ("metric", "strategy", "swept", "grid_min", "grid_max", "points", "out"),
             "sweep")
    if args.points < 2:
        parser.error("sweep needs --points >= 2")
    target, kind = SWEEPABLE[args.swept]
    try:
        lo = _grid_bound(args.grid_min, kind)
        hi = _grid_bound(args.grid_max, kind)
    except (UnitError, ValueError) as exc:
        parser.error(str(exc))
    if not lo < hi:
        parser.error("sweep needs --min < --max")
    if args.spacing == "log" and lo <= 0.0:
        parser.error("log spacing needs --min > 0")
    params = collect_params(args)
    needed = [n for n in REQUIRED[args.metric, args.strategy] if n != target]
    _require(parser, params, needed, f"{args.metric}/{args.strategy} sweep")
    if args.simulate and args.metric not in ("eor", "ior"):
        parser.error("--simulate applies to eor/ior only")

    grid = sweep_grid(lo, hi, args.points, args.spacing)
    sim = SimConfig(args.simulate, args.seed, args.workers) if args.simulate else None
    rows = []
    for x in grid:
        point = dict(params)
        point[target] = db_to_linear(x) if kind == "db" else float(x)
        value = compute(args.metric, args.strategy, point)
        row = [f"{x:.17g}", "HELD" if value is HELD else f"{value:.17g}"]
        if sim is not None:
            est = simulate(args.metric, args.strategy, point, sim)
            row += [f"{est.p_hat:.17g}", f"{est.std_error:.17g}"]
        rows.append(",".join(row))

    fixed = {k: v for k, v in params.items() if k != target}
    meta = RunMetadata(
        "sweep",
        fixed,
        extra={
            "metric": args.metric,
            "strategy": args.strategy,
            "swept": f"{args.swept} from {lo!r} to {hi!r}, {args.points} points, {args.spacing}",
        },
    )
    header = [args.swept, "value"]
    if sim is not None:
        meta.seed, meta.generator = sim.seed, GENERATOR_ID
        meta.extra["n_samples"] = sim.n_samples
        header += ["p_hat", "std_error"]
    text = "\n".join(meta.lines() + [",".join(header)] + rows) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def cmd_verify(args, parser):
    _require(parser, vars(args), ("metric", "strategy"), "verify")
    if args.metric not in ("eor", "ior"):
        parser.error("verify checks the outage rates: --metric eor or ior")
    params = collect_params(args)
    _require(parser, params, REQUIRED[args.metric, args.strategy], f"{args.metric}/{args.strategy}")
    sim = SimConfig(args.n_samples, args.seed, args.workers)
    closed = compute(args.metric, args.strategy, params)
    est = simulate(args.metric, args.strategy, params, sim)
    gap = abs(closed - est.p_hat)
    tolerance = max(3.0 * est.std_error, 1e-4)
    verdict = "PASS" if gap <= tolerance else "FAIL"
    meta = RunMetadata(
        "verify",
        params,
        extra={"metric": args.metric, "strategy": args.strategy, "n_samples": sim.n_samples},
        seed=sim.seed,
        generator=GENERATOR_ID,
    )
    for line in meta.lines():
        print(line)
    print(f"closed_form: {closed:.17g}")
    print(f"p_hat: {est.p_hat:.17g}")
    print(f"std_error: {est.std_error:.17g}")
    print(f"gap: {gap:.17g}")
    print(f"tolerance: {tolerance:.17g}")
    print(f"verdict: {verdict}")
    return 0 if verdict == "PASS" else EXIT_FAIL


def _attach_negative_values(argv):
    """Glue ``--gbar -10dB`` into ``--gbar=-10dB``; argparse reads ``-10dB`` as a flag."""
    out = []
    for token in argv:
        negative = len(token) > 1 and token[0] == "-" and (token[1].isdigit() or token[1] == ".")
        if negative and out and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={token}"
        else:
            out.append(token)
    return out


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = _apply_config(parser, argv)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return COMMANDS[args.command](args, subparser)
    except (DomainError, RegimeError, ResourceError, OSError) as exc:
        print(f"dataeff: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
