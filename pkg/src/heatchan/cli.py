"""Command-line entry point: configuration, dispatch, result serialization.

Exit codes: 0 success, 2 usage or validation error, 3 numeric or resource
error.  Every run prints its resolved parameters as a header line, and any
result file starts with the same header so the run can be reproduced from
the file alone.  Rates are nats per channel use everywhere; ``--bits``
converts displayed rates only, never file contents.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import codec, harness, serialize
from .channel import ChannelParams, NoiseDistribution
from .coeffs import ClassifyPolicy, classify, parse_spec
from .errors import HeatchanError, SpecValidationError

__all__ = ["main", "console_main", "parse_and_dispatch"]

LN2 = math.log(2.0)


# -- small parsers ------------------------------------------------------------


def _float_grid(text: str):
    """Grid syntax: 'a,b,c' | 'lo:hi:count' (linear) | 'lo:hi:count:log'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 3:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            return list(np.linspace(lo, hi, count))
        if len(parts) == 4 and parts[3] == "log":
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if lo <= 0 or hi <= 0:
                raise argparse.ArgumentTypeError("log grids need positive endpoints")
            return list(np.geomspace(lo, hi, count))
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_grid(text: str):
    return [int(round(v)) for v in _float_grid(text)]


def _noise(text: str) -> NoiseDistribution:
    try:
        return NoiseDistribution.parse(text)
    except SpecValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _resolve_power(args) -> float:
    """Exactly one of --snr/--power is given; derive the other."""
    if args.power is not None:
        return float(args.power)
    return float(args.snr) * float(args.sigma2)


def _out_format(args) -> str:
    if getattr(args, "format", None):
        return args.format
    path = getattr(args, "output", None)
    if path and str(path).endswith(".jsonl"):
        return "jsonl"
    return "csv"


def _rate_str(value: float, bits: bool) -> str:
    if bits:
        return f"{value / LN2:.6g} bits/use"
    return f"{value:.6g} nats/use"


def _emit(args, command, params, columns, rows):
    header = "# heatchan " + command + " " + " ".join(
        f"{k}={serialize.fmt_value(v)}" for k, v in params.items())
    print(header)
    if getattr(args, "output", None):
        serialize.write_result(args.output, command, params, columns, rows,
                               _out_format(args))


# -- subcommand handlers -------------------------------------------------------


def _cmd_classify(args) -> int:
    spec = parse_spec(args.coeffs)
    policy = ClassifyPolicy(positive_floor=args.positive_floor,
                            zero_ceiling=args.zero_ceiling,
                            divergence_threshold=args.divergence_threshold)
    result = classify(spec, args.horizon, policy)
    params = {"coeffs": spec.label, "horizon": args.horizon,
              "positive_floor": policy.positive_floor,
              "zero_ceiling": policy.zero_ceiling,
              "divergence_threshold": policy.divergence_threshold}
    row = {"spec": spec.label, "horizon": result.horizon,
           "verdict": result.verdict.value,
           "liminf_ratio": result.liminf_ratio_estimate,
           "limsup_ratio": result.limsup_ratio_estimate,
           "decay_stat": result.decay_stat}
    _emit(args, "classify", params, serialize.CLASSIFY_COLUMNS, [row])
    print(result.verdict.value)
    print(f"liminf_ratio={result.liminf_ratio_estimate:.6g} "
          f"limsup_ratio={result.limsup_ratio_estimate:.6g} "
          f"decay_stat={result.decay_stat:.6g}")
    return 0


def _make_input(pattern: str, n: int) -> np.ndarray:
    if pattern == "pm2":
        x = np.full(n, 2.0)
        x[1::2] = -2.0
        return x
    if pattern == "zeros":
        return np.zeros(n)
    if pattern.startswith("file:"):
        return np.loadtxt(pattern[5:], ndmin=1)[:n]
    raise SpecValidationError(f"unknown input pattern {pattern!r} (pm2|zeros|file:PATH)")


def _cmd_simulate(args) -> int:
    spec = parse_spec(args.coeffs)
    params_ch = ChannelParams(sigma2=args.sigma2, noise=args.noise)
    x = _make_input(args.x, args.n)
    var_model, var_emp = harness.fidelity_check(spec, params_ch, x, args.trials,
                                                args.seed, workers=args.workers)
    rel = np.abs(var_emp - var_model) / var_model
    rows = [{"k": k + 1, "x": float(x[k]), "var_model": float(var_model[k]),
             "var_emp": float(var_emp[k]), "rel_err": float(rel[k])}
            for k in range(x.size)]
    params = {"coeffs": spec.label, "sigma2": args.sigma2, "noise": args.noise.kind,
              "x": args.x, "n": args.n, "trials": args.trials, "seed": args.seed,
              "workers": args.workers}
    _emit(args, "simulate", params, serialize.SIM_COLUMNS, rows)
    print(f"max relative deviation of residual variance: {rel.max():.6g}")
    return 0


def _cmd_code(args) -> int:
    spec = parse_spec(args.coeffs)
    power = _resolve_power(args)
    params_ch = ChannelParams(sigma2=args.sigma2, noise=args.noise, power=power)
    if args.messages is not None:
        messages = args.messages
    else:
        messages = int(round(math.exp(args.rate * args.n)))
    scheme = codec.SchemeParams(L=args.L, P=power, message_count=messages, n=args.n)
    variance = scheme.active_variance(args.variance_mode)
    est = codec.scheme_error_probability(
        spec, params_ch, scheme, variance, args.trials, args.seed,
        redraw_codebook=not args.fixed_codebook,
        dtype=np.dtype(args.dtype), workers=args.workers)
    rate = scheme.rate_nats
    params = {"coeffs": spec.label, "sigma2": args.sigma2, "snr": params_ch.snr,
              "L": args.L, "n": args.n, "messages": messages,
              "trials": args.trials, "seed": args.seed,
              "variance_mode": args.variance_mode, "dtype": args.dtype,
              "fixed_codebook": args.fixed_codebook, "noise": args.noise.kind,
              "workers": args.workers}
    aL = harness.alpha_L(spec, args.L)
    ach = None
    if math.isfinite(aL):
        ach = bounds_mod.achievable_rate_opt(power, args.sigma2, aL, args.L).pre_limit_rate
    row = {"spec": spec.label, "sigma2": args.sigma2, "snr": params_ch.snr,
           "L": args.L, "n": args.n, "messages": messages, "rate_nats": rate,
           "trials": est.trials, "errors": est.errors, "err_prob": est.err_prob,
           "ci_lo": est.ci_lo, "ci_hi": est.ci_hi, "ach_rate_pre_limit": ach,
           "seed": args.seed}
    _emit(args, "code", params, serialize.SWEEP_COLUMNS, [row])
    print(f"rate {_rate_str(rate, args.bits)}  err_prob={est.err_prob:.6g} "
          f"[{est.ci_lo:.6g}, {est.ci_hi:.6g}]  errors={est.errors}/{est.trials}")
    return 0


def _cmd_bounds(args) -> int:
    spec = parse_spec(args.coeffs)
    if args.converse:
        return _cmd_bounds_converse(args, spec)
    if args.snr is None and args.power is None:
        raise SpecValidationError("one of --snr/--power is required")
    power = _resolve_power(args)
    snr = power / args.sigma2
    aL = harness.alpha_L(spec, args.L, args.tol)
    if not math.isfinite(aL):
        raise HeatchanError(
            f"lattice coefficient sum diverges for {spec.label} at L={args.L}; "
            "no finite rate formula applies")
    report = bounds_mod.achievable_rate_opt(power, args.sigma2, aL, args.L, args.eps)
    rho_lb = None
    if spec.family == "geometric":
        rho_lb = bounds_mod.rho_rate_lower_bound(spec.rho, args.L)
    params = {"coeffs": spec.label, "sigma2": args.sigma2, "snr": snr,
              "L": args.L, "eps": args.eps, "tol": args.tol}
    row = {"spec": spec.label, "sigma2": args.sigma2, "snr": snr, "L": args.L,
           "alphaL": aL, "eps": args.eps, "s_used": report.s_used,
           "pre_limit_rate": report.pre_limit_rate,
           "asymptotic_rate": report.asymptotic_rate,
           "rho_lower_bound": rho_lb}
    _emit(args, "bounds", params, serialize.BOUNDS_COLUMNS, [row])
    print(f"alphaL={aL:.6g} s*={report.s_used:.6g}")
    print(f"pre_limit_rate  {_rate_str(report.pre_limit_rate, args.bits)}")
    print(f"asymptotic_rate {_rate_str(report.asymptotic_rate, args.bits)}"
          if math.isfinite(report.asymptotic_rate) else
          "asymptotic_rate unbounded (alphaL = 0)")
    if rho_lb is not None:
        print(f"rho_lower_bound {_rate_str(rho_lb, args.bits)}")
    return 0


def _cmd_bounds_converse(args, spec) -> int:
    if args.rho is None:
        raise SpecValidationError("--converse needs --rho (and optionally --l0)")
    rep = bounds_mod.converse_constant(spec, args.rho, args.l0, args.noise,
                                       args.delta, args.eta, args.eps_delta_eta)
    params = {"coeffs": spec.label, "rho": args.rho, "l0": args.l0,
              "noise": args.noise.kind, "delta": args.delta, "eta": args.eta,
              "eps_delta_eta": args.eps_delta_eta}
    row = {"spec": spec.label, "rho": rep.rho, "l0": rep.l0,
           "noise": args.noise.kind, "delta": rep.delta, "eta": rep.eta,
           "eps_delta_eta": rep.eps_delta_eta, "beta_tilde": rep.beta_tilde,
           "h_noise": rep.h_noise, "h_minus": rep.h_minus_noise,
           "K": rep.K, "bound": rep.bound}
    _emit(args, "converse", params, serialize.CONVERSE_COLUMNS, [row])
    print(f"beta_tilde={rep.beta_tilde:.6g} K={rep.K:.6g}")
    print(f"capacity ceiling K - log(beta_tilde) = {_rate_str(rep.bound, args.bits)}")
    return 0


def _cmd_sweep(args) -> int:
    spec = parse_spec(args.coeffs)
    cfg = harness.SweepConfig(
        spec=spec, sigma2=args.sigma2, snr_grid=tuple(args.snr_grid),
        L_grid=tuple(args.L_grid), n_grid=tuple(args.n_grid),
        rate_grid=tuple(args.rate_grid), trials=args.trials, seed=args.seed,
        workers=args.workers, message_cap=args.cap,
        variance_mode=args.variance_mode, dtype=args.dtype, noise=args.noise)
    params = {"coeffs": spec.label, "sigma2": args.sigma2,
              "snr_grid": ",".join("%.17g" % v for v in cfg.snr_grid),
              "L_grid": ",".join(str(v) for v in cfg.L_grid),
              "n_grid": ",".join(str(v) for v in cfg.n_grid),
              "rate_grid": ",".join("%.17g" % v for v in cfg.rate_grid),
              "trials": cfg.trials, "seed": cfg.seed, "cap": cfg.message_cap,
              "variance_mode": cfg.variance_mode, "dtype": cfg.dtype,
              "noise": cfg.noise.kind, "workers": cfg.workers}
    header = "# heatchan sweep " + " ".join(
        f"{k}={serialize.fmt_value(v)}" for k, v in params.items())
    print(header)
    writer = None
    if args.output:
        writer = serialize.ResultWriter(args.output, "sweep", params,
                                        serialize.SWEEP_COLUMNS, _out_format(args))

    def on_row(row):
        if writer is not None:
            writer.write_row(row)
        err = row["err_prob"]
        print(f"snr={row['snr']:.6g} L={row['L']} n={row['n']} "
              f"rate={row['rate_nats']:.6g} -> "
              + (f"err={err:.6g}" if err is not None else "skipped"))

    try:
        harness.error_sweep(cfg, on_row=on_row)
    finally:
        if writer is not None:
            writer.close()
    return 0


def _cmd_lemma1(args) -> int:
    value = bounds_mod.lemma1_empirical(args.noise, args.delta, args.c_grid,
                                        args.trials, args.seed)
    params = {"noise": args.noise.kind, "delta": args.delta,
              "c_grid": ",".join("%.17g" % c for c in args.c_grid),
              "trials": args.trials, "seed": args.seed}
    row = {"noise": args.noise.kind, "delta": args.delta, "trials": args.trials,
           "seed": args.seed, "value": value}
    _emit(args, "lemma1", params, serialize.LEMMA1_COLUMNS, [row])
    print(f"max_c E[log(1/|X+c|); |X+c| <= delta] ~= {value:.6g}")
    return 0


def _cmd_lemma2(args) -> int:
    spec = parse_spec(args.coeffs)
    power = _resolve_power(args)
    report = harness.lemma2_check(spec, args.sigma2, power, args.L, args.n_grid,
                                  args.eps, args.trials, args.seed,
                                  workers=args.workers, noise=args.noise)
    params = {"coeffs": spec.label, "sigma2": args.sigma2, "power": power,
              "L": args.L, "n_grid": ",".join(str(n) for n in args.n_grid),
              "eps": args.eps, "trials": args.trials, "seed": args.seed,
              "noise": args.noise.kind, "workers": args.workers}
    _emit(args, "lemma2", params, serialize.LEMMA2_COLUMNS, report.rows())
    for row in report.rows():
        print(f"n={row['n']} m={row['m']} mean_y={row['mean_y']:.6g} "
              f"(target {row['target_y']:.6g}) mean_z={row['mean_z']:.6g} "
              f"(target {row['target_z']:.6g}) hit_frac={row['hit_frac']:.4g}")
    return 0


def _cmd_demo(args) -> int:
    specs = [parse_spec(tok) for tok in args.specs.split(",") if tok.strip()]
    if not specs:
        raise SpecValidationError("--specs must name at least one coefficient spec")
    rows, flags = harness.dichotomy_demo(specs, args.snr_grid, args.L_grid,
                                         sigma2=args.sigma2)
    params = {"specs": ",".join(s.label for s in specs), "sigma2": args.sigma2,
              "snr_grid": ",".join("%.17g" % v for v in args.snr_grid),
              "L_grid": ",".join(str(v) for v in args.L_grid)}
    _emit(args, "demo", params, serialize.DEMO_COLUMNS, rows)
    for label, flag in flags.items():
        print(f"{label}: {flag}")
    for row in rows:
        print(f"{row['spec']} snr={row['snr']:.6g} best_L={row['best_L']} "
              f"rate={_rate_str(row['rate_nats'], args.bits)}")
    return 0


# -- parser assembly -----------------------------------------------------------


def _add_common_output(p):
    p.add_argument("-o", "--output", help="result file path (.csv or .jsonl)")
    p.add_argument("--format", choices=["csv", "jsonl"],
                   help="output format (default: by extension, csv otherwise)")
    p.add_argument("--config", help="key = value file supplying flag defaults")


def _add_power_group(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr", type=float, help="signal-to-noise ratio P/sigma2 (linear)")
    g.add_argument("--power", type=float, help="average power budget P (linear)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatchan",
        description="Heating-channel simulator and rate toolkit "
                    "(rates in nats per channel use)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="bounded/unbounded capacity verdict")
    p.add_argument("--coeffs", required=True, help="coefficient spec, e.g. geometric:0.5")
    p.add_argument("--horizon", type=_positive_int, default=128)
    p.add_argument("--positive-floor", type=float, default=1e-6)
    p.add_argument("--zero-ceiling", type=float, default=1e-6)
    p.add_argument("--divergence-threshold", type=float, default=20.0)
    _add_common_output(p)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("simulate", help="channel-law fidelity on a fixed input")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--n", type=_positive_int, required=True, help="block length")
    p.add_argument("--x", default="pm2", help="input pattern: pm2|zeros|file:PATH")
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    _add_common_output(p)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("code", help="block-error probability of the coding scheme")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    _add_power_group(p)
    p.add_argument("--L", type=_positive_int, required=True, help="period")
    p.add_argument("--n", type=_positive_int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rate", type=float, help="target rate in nats per use")
    g.add_argument("--messages", type=_positive_int, help="codebook size |M|")
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--variance-mode", choices=["lp", "p"], default="lp",
                   help="active-slot variance: L*P (default) or P")
    p.add_argument("--dtype", choices=["float64", "float32"], default="float64")
    p.add_argument("--fixed-codebook", action="store_true",
                   help="fix one codebook across trials (variance reduction)")
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--bits", action="store_true", help="display rates in bits")
    _add_common_output(p)
    p.set_defaults(handler=_cmd_code)

    p = sub.add_parser("bounds", help="achievable-rate report for one (spec, L, SNR), "
                                      "or the converse constant with --converse")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--snr", type=float, help="signal-to-noise ratio P/sigma2 (linear)")
    g.add_argument("--power", type=float, help="average power budget P (linear)")
    p.add_argument("--L", type=_positive_int, default=1)
    p.add_argument("--eps", type=float, default=0.0,
                   help="concentration slack in the pre-limit rate")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--converse", action="store_true",
                   help="report the converse constant instead of rates")
    p.add_argument("--rho", type=float, help="ratio floor for the converse")
    p.add_argument("--l0", type=_positive_int, default=1)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--eps-delta-eta", type=float, default=0.0)
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--bits", action="store_true")
    _add_common_output(p)
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("sweep", help="error-probability sweep over a grid")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--snr-grid", type=_float_grid, required=True,
                   help="'a,b,c' or 'lo:hi:count[:log]'")
    p.add_argument("--L-grid", type=_int_grid, required=True)
    p.add_argument("--n-grid", type=_int_grid, required=True)
    p.add_argument("--rate-grid", type=_float_grid, required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--cap", type=_positive_int, default=harness.MESSAGE_CAP,
                   help="skip points needing more codewords than this")
    p.add_argument("--variance-mode", choices=["lp", "p"], default="lp")
    p.add_argument("--dtype", choices=["float64", "float32"], default="float64")
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    _add_common_output(p)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("lemma1", help="Monte Carlo expected-log estimate")
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--c-grid", type=_float_grid, default=[0.0])
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    _add_common_output(p)
    p.set_defaults(handler=_cmd_lemma1)

    p = sub.add_parser("lemma2", help="concentration check of the subsampled norms")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    _add_power_group(p)
    p.add_argument("--L", type=_positive_int, required=True)
    p.add_argument("--n-grid", type=_int_grid, required=True)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--noise", type=_noise, default=NoiseDistribution.gaussian())
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    _add_common_output(p)
    p.set_defaults(handler=_cmd_lemma2)

    p = sub.add_parser("demo", help="bounded-vs-unbounded formula-rate table")
    p.add_argument("--specs", required=True,
                   help="comma-separated coefficient specs")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--snr-grid", type=_float_grid, required=True)
    p.add_argument("--L-grid", type=_int_grid, default=list(range(1, 9)))
    p.add_argument("--bits", action="store_true")
    _add_common_output(p)
    p.set_defaults(handler=_cmd_demo)

    return parser


def _expand_config(argv):
    """Splice config-file entries in as flags ahead of the explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv  # let argparse report the missing value
    path = argv[i + 1]
    extra = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SpecValidationError(f"bad config line {line!r} (want key = value)")
            key, value = (part.strip() for part in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "false"):  # store_true flags
                if value.lower() == "true":
                    extra.append(flag)
            else:
                extra.extend([flag, value])
    # flags from the command line come later and therefore win
    head = argv[:1]
    tail = [tok for j, tok in enumerate(argv[1:], start=1) if j not in (i, i + 1)]
    return head + extra + tail


def main(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv:
            argv = _expand_config(argv)
        args = parser.parse_args(argv)
        return args.handler(args)
    except SpecValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HeatchanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


# spec-facing alias: dispatch argv, return exit code
parse_and_dispatch = main


def console_main() -> None:
    raise SystemExit(main())
