"""Command-line front end.

Every subcommand reads its options from flags and, optionally, from a flat
``key = value`` config file given with ``--config``.  Keys are the long
flag names with dashes or underscores (``shots = 100000``,
``no_crosstalk = true``); flags on the command line win.  Data goes to
``--out`` (default standard output), progress to standard error.

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import replace

import numpy as np

from .codes import CODE_NAMES, build_code, canonical_name

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4

SIMULATE_COLUMNS = ("code", "basis", "method", "shots", "violations", "rate", "ci_low", "ci_high",
                    "std_error", "p_phys", "tail_bound")
BIAS_EXTRA_COLUMNS = ("code", "shots", "rate_x", "rate_z", "bias_zz", "bias_zz_error", "p_phys")
NOISE_FLAGS = ("p2q", "p1q", "inv_t2", "rabi_ratio", "p2d", "eps_ms", "t1q", "t2q")

log = logging.getLogger("compass_sim")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative number, got {text}")
    return v


def _prob(text: str) -> float:
    v = _nonneg(text)
    if v > 1:
        raise argparse.ArgumentTypeError(f"must be a probability in [0, 1], got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _codes(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(CODE_NAMES)
    try:
        return [canonical_name(c) for c in text.split(",") if c.strip()]
    except (KeyError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc).strip("'\"")) from None


def _order(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _common(p: argparse.ArgumentParser, codes_default: str = "all"):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--quiet", action="store_true", help="no progress messages")
    p.add_argument("--code", "--codes", dest="code", type=_codes, default=codes_default,
                   help="code name, comma list or 'all'")


def _noise_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("noise")
    g.add_argument("--p2q", type=_prob, help="MS overrotation flip probability (p1q defaults to p2q/10)")
    g.add_argument("--p1q", type=_prob, help="single-qubit overrotation flip probability")
    g.add_argument("--eps-ms", dest="eps_ms", type=_nonneg, help="MS overrotation angle (alternative to --p2q)")
    g.add_argument("--inv-t2", "--invT2", dest="inv_t2", type=_nonneg, help="1/T2 in 1/s")
    g.add_argument("--rabi-ratio", "--rabiRatio", dest="rabi_ratio", type=_nonneg,
                   help="crosstalk Rabi ratio Omega_c/Omega_R")
    g.add_argument("--p2d", type=_prob, help="depolarizing two-qubit rate (excludes the ion-trap channels)")
    g.add_argument("--t1q", type=_nonneg, default=10.0, help="single-qubit gate time in us (default 10)")
    g.add_argument("--t2q", type=_nonneg, default=200.0, help="MS gate time in us (default 200)")


def _run_flags(p: argparse.ArgumentParser):
    p.add_argument("--shots", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--method", choices=("direct", "subset"), default="direct")
    p.add_argument("--kmax", type=int, default=4, help="largest fault count sampled in subset mode")
    p.add_argument("--no-crosstalk", dest="no_crosstalk", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compass-sim", description="Compass-code fault injection and ion-chain layout tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("codes", help="stabilizers, gauges, logicals and ancilla maps as JSON")
    _common(p)

    p = sub.add_parser("compile", help="native gate listing of the experiment circuit")
    _common(p, codes_default="Surface17")
    p.add_argument("--basis", choices=("Z", "X"), default="Z")
    p.add_argument("--naive", action="store_true", help="no rotation cancellation")
    p.add_argument("--t1q", type=_nonneg, default=10.0)
    p.add_argument("--t2q", type=_nonneg, default=200.0)

    p = sub.add_parser("chain", help="optimal chain ordering and published-chain check")
    _common(p)
    p.add_argument("--order", type=_order, help="check this ordering instead of the published one")
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("simulate", help="logical error rates of the two-block experiment")
    _common(p, codes_default="Surface17")
    p.add_argument("--basis", choices=("Z", "X", "both"), default="both")
    p.add_argument("--layout", type=_order, help="block chain ordering (default: published)")
    _noise_flags(p)
    _run_flags(p)

    p = sub.add_parser("sweep", help="grid of noise parameters over several codes")
    _common(p)
    p.add_argument("--x", help="axis 'name:lo:hi:log|lin:n' or 'name:v1,v2,...'")
    p.add_argument("--y", help="second axis, same syntax")
    p.add_argument("--summary", help="JSON summary file (best-code map and pseudothresholds)")
    _noise_flags(p)
    _run_flags(p)

    p = sub.add_parser("bias", help="Bias_ZZ over a grid")
    _common(p, codes_default="BaconShor13")
    p.add_argument("--grid", action="append",
                   help="axis spec as for sweep; give once or twice")
    _noise_flags(p)
    _run_flags(p)

    p = sub.add_parser("validate", help="code checks, noiseless Bell check, single-fault tolerance")
    _common(p)
    p.add_argument("--shots", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_config(argv=None) -> argparse.Namespace:
    """Parse flags, filling anything not given on the command line from ``--config``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        for key in cfg:
            if key not in actions or key in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
        defaults = {}
        for key, value in cfg.items():
            a = actions[key]
            if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[key] = _bool(value)
            elif isinstance(a, argparse._AppendAction):
                defaults[key] = [v.strip() for v in value.split(";") if v.strip()]
            else:
                defaults[key] = value
        sub.set_defaults(**defaults)
        first = args
        args = parser.parse_args(argv)
        # repeated flags append to their default; command-line values replace config ones instead
        for key, a in actions.items():
            if isinstance(a, argparse._AppendAction) and getattr(first, key) is not None:
                setattr(args, key, getattr(first, key))
    _check(args)
    return args


def _check(args):
    # required here rather than in argparse so a config file can supply them
    if args.command == "sweep" and not args.x:
        raise ConfigError("sweep needs --x")
    if args.command == "bias" and not args.grid:
        raise ConfigError("bias needs --grid")
    if getattr(args, "kmax", 4) < 2 and getattr(args, "method", "direct") == "subset":
        raise ConfigError("--kmax must be at least 2 in subset mode")
    if getattr(args, "p2q", None) is not None and getattr(args, "eps_ms", None) is not None:
        raise ConfigError("give either --p2q or --eps-ms, not both")
    if getattr(args, "p2d", None) and any(getattr(args, k, None) for k in ("p2q", "p1q", "eps_ms", "inv_t2",
                                                                            "rabi_ratio")):
        raise ConfigError("--p2d (depolarizing) cannot be combined with ion-trap noise flags")


class ValidationFailure(RuntimeError):
    pass


def _emit(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _noise_values(args) -> dict:
    return {k: getattr(args, k) for k in NOISE_FLAGS if getattr(args, k, None) is not None}


def _noise(args):
    from .sweep import noise_from

    try:
        return noise_from(_noise_values(args))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_codes(args) -> int:
    _emit(args.out, json.dumps([build_code(c).to_dict() for c in args.code], indent=2) + "\n")
    return EXIT_OK


def cmd_compile(args) -> int:
    from .compiler import compile_and_schedule
    from .experiment import build_experiment_circuit

    parts = []
    for code in args.code:
        exp = build_experiment_circuit(code, args.basis, t1q=args.t1q, t2q=args.t2q)
        tc = compile_and_schedule(exp.logical, greedy=False, t1q=args.t1q, t2q=args.t2q) if args.naive \
            else exp.compiled
        log.info("%s %s: %d single-qubit gates, %d XX gates, duration %.0f us", code, args.basis,
                 tc.single_qubit_count, tc.count("XX"), tc.total_duration)
        parts.append(f"# {code} basis={args.basis} single_qubit={tc.single_qubit_count} xx={tc.count('XX')} "
                     f"duration_us={tc.total_duration:g}\n" + tc.to_text())
    _emit(args.out, "".join(parts))
    return EXIT_OK


def _chain_text(r: dict) -> str:
    lines = [f"{r['code']}: {len(r['graph_edges'])} safe pairs",
             f"  optimal   {' '.join(map(str, r['optimal_order']))}  extra={r['optimal_extra_edge_count']}"
             f" time_cost={r['optimal_time_cost']:g}",
             f"  {'published' if r['published'] else 'checked  '} {' '.join(map(str, r['checked_order']))}"
             f"  extra={r['checked_extra_edge_count']} time_cost={r['checked_time_cost']:g}"]
    if r["checked_bad_adjacencies"]:
        lines.append("  bad adjacencies: " + " ".join(f"{a}-{b}" for a, b in r["checked_bad_adjacencies"]))
    if r["differs_from_published"]:
        lines.append("  positions differing from published: "
                     + " ".join(f"{i}:{a}->{b}" for i, a, b in r["differs_from_published"]))
    return "\n".join(lines)


def cmd_chain(args) -> int:
    from .chain import build_graph, optimal_chain, validate_chain
    from .codes import PUBLISHED_CHAINS

    if args.order is not None and len(args.code) != 1:
        raise ConfigError("--order needs exactly one --code")
    out = []
    for code in args.code:
        t0 = time.perf_counter()
        graph = build_graph(code)
        best = optimal_chain(code)
        try:
            rep = validate_chain(code, args.order)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        log.info("%s: optimal chain with %d extra edges (%.1f s); checked chain has %d bad adjacencies",
                 code, best.extra_edge_count, time.perf_counter() - t0, rep.extra_edge_count)
        pub = PUBLISHED_CHAINS[code]
        out.append({"code": code, "graph_edges": [list(e) for e in sorted(graph.edges)],
                    "optimal_order": list(best.order),
                    "optimal_extra_edge_count": best.extra_edge_count, "optimal_time_cost": best.time_cost,
                    "checked_order": list(rep.order), "published": args.order is None,
                    "checked_bad_adjacencies": [list(p) for p in rep.bad_adjacencies],
                    "checked_extra_edge_count": rep.extra_edge_count, "checked_time_cost": rep.time_cost,
                    "checked_is_optimal": rep.extra_edge_count == best.extra_edge_count,
                    "differs_from_published": [[i, a, b] for i, (a, b) in enumerate(zip(pub, rep.order)) if a != b]})
    if args.format == "text":
        _emit(args.out, "\n".join(_chain_text(r) for r in out) + "\n")
    else:
        _emit(args.out, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def _spec(args, code, basis, noise, layout=None):
    from .experiment import ExperimentSpec

    try:
        return ExperimentSpec(code, basis, noise, shots=args.shots, seed=args.seed, layout=layout,
                              method=args.method, kmax=args.kmax, include_crosstalk=not args.no_crosstalk,
                              workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _run_seed(seed: int, code: str, basis: str) -> int:
    # one independent stream per (code, basis), the same whichever subset is run
    return int(np.random.SeedSequence([seed, CODE_NAMES.index(code), "ZX".index(basis)]).generate_state(1)[0])


def cmd_simulate(args) -> int:
    from .experiment import run_experiment
    from .sweep import bias_zz

    noise = _noise(args)
    bases = ("Z", "X") if args.basis == "both" else (args.basis,)
    if args.layout is not None and len(args.code) != 1:
        raise ConfigError("--layout needs exactly one --code")
    rows, results = [], {}
    for code in args.code:
        for basis in bases:
            spec = replace(_spec(args, code, basis, noise, args.layout), seed=_run_seed(args.seed, code, basis))
            t0 = time.perf_counter()
            try:
                r = run_experiment(spec)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            log.info("%s %s: %s violations in %d shots, rate %.3g (%.1f s)", code, basis,
                     _fmt(r.violations), r.shots, r.rate, time.perf_counter() - t0)
            results[(code, basis)] = r
            rows.append({**r.to_dict(), "method": r.mode})
    if args.format == "json":
        summary = {"noise": noise.to_dict(), "seed": args.seed, "runs": rows}
        if len(bases) == 2:
            summary["bias_zz"] = {c: bias_zz(results[(c, "X")], results[(c, "Z")]) for c in args.code}
        _emit(args.out, json.dumps(summary, indent=1, default=_json_default) + "\n")
    else:
        _emit(args.out, _csv(rows, SIMULATE_COLUMNS))
    return EXIT_OK


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return None
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _grid(args, axes_text):
    from .sweep import Axis, sweep_and_map

    try:
        axes = [Axis.parse(t) for t in axes_text]
        fixed = {k: v for k, v in _noise_values(args).items() if k not in {a.name for a in axes}}
        return sweep_and_map(axes, args.code, fixed, shots=args.shots, seed=args.seed, method=args.method,
                             kmax=args.kmax, workers=args.workers, include_crosstalk=not args.no_crosstalk,
                             progress=lambda msg: log.info("%s", msg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_sweep(args) -> int:
    axes = [args.x] + ([args.y] if args.y else [])
    res = _grid(args, axes)
    if args.format == "json":
        _emit(args.out, res.to_json() + "\n")
    else:
        _emit(args.out, res.to_csv())
        if args.summary:
            _emit(args.summary, res.to_json() + "\n")
    return EXIT_OK


def cmd_bias(args) -> int:
    from .sweep import bias_zz, bias_zz_error

    if not 1 <= len(args.grid) <= 2:
        raise ConfigError("--grid takes one or two axes")
    res = _grid(args, args.grid)
    rows = []
    for cell in res.cells:
        for code in res.codes:
            rx, rz = cell.results[(code, "X")], cell.results[(code, "Z")]
            rows.append({**cell.params, "code": code, "shots": rx.shots, "rate_x": rx.rate, "rate_z": rz.rate,
                         "bias_zz": bias_zz(rx, rz), "bias_zz_error": bias_zz_error(rx, rz),
                         "p_phys": cell.p_phys})
    if args.format == "json":
        _emit(args.out, json.dumps(rows, indent=1, default=_json_default) + "\n")
    else:
        _emit(args.out, _csv(rows, [a.name for a in res.axes] + list(BIAS_EXTRA_COLUMNS)))
    return EXIT_OK


# noise used for the single-fault check: every ion-trap channel on, crosstalk off
VALIDATE_NOISE = {"p1q": 1e-4, "p2q": 1e-3, "inv_t2": 1.0}


def validation_report(code: str, shots: int = 10_000, seed: int = 0) -> dict:
    """Code checks, noiseless Bell check and single-fault tolerance for one code."""
    from .experiment import (ExperimentSpec, experiment_setup, fault_model, noiseless_bell_check,
                             single_fault_failures)
    from .noise import NoiseParams

    checks = dict(build_code(code).check())
    noise = NoiseParams.from_rates(**VALIDATE_NOISE)
    for basis in ("Z", "X"):
        checks[f"noiseless_bell_{basis}"] = noiseless_bell_check(code, basis, shots, seed=seed) == 0
        spec = ExperimentSpec(code, basis, noise, include_crosstalk=False)
        _, dec = experiment_setup(code, basis)
        checks[f"single_fault_tolerant_{basis}"] = not single_fault_failures(fault_model(spec), dec)
    return checks


def cmd_validate(args) -> int:
    report = {}
    for code in args.code:
        t0 = time.perf_counter()
        report[code] = validation_report(code, args.shots, args.seed)
        failed = [k for k, ok in report[code].items() if not ok]
        log.info("%s: %s (%.1f s)", code, "ok" if not failed else "FAILED " + ", ".join(failed),
                 time.perf_counter() - t0)
    _emit(args.out, json.dumps(report, indent=2) + "\n")
    if not all(all(r.values()) for r in report.values()):
        raise ValidationFailure("validation failed")
    return EXIT_OK


COMMANDS = {"codes": cmd_codes, "compile": cmd_compile, "chain": cmd_chain, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "bias": cmd_bias, "validate": cmd_validate}


def main(argv=None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    try:
        args = parse_config(argv)
        log.setLevel(logging.WARNING if args.quiet else logging.INFO)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
