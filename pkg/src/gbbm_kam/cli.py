"""Command-line entry point: ``gbbm-kam <command> [--config FILE] [flags]``.

Flags override keys of the JSON config file; the merged configuration is
validated against the command's schema before anything runs, and every
emitted report is validated against its own schema before it is written.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import serialization as ser

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4
EXIT_NONCONVERGENCE = 5

EPILOG = """\
exit codes:
  0  success
  2  configuration error (schema violation, invalid parameter, missing file)
  3  resource ceiling exceeded (enumeration too large, out of memory)
  4  verification failure (zero divisor, nonzero residual, failed assumption
     or acceptance criterion, drift tolerance exceeded)
  5  numerical non-convergence (inner solver, frequency extraction)

environment:
  GBBM_KAM_THREADS  worker count when --threads is not given (default 1)
  GBBM_KAM_NUMBA    set to 0 to force the pure-numpy integrator
"""


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        n = flag
    else:
        raw = os.environ.get("GBBM_KAM_THREADS", "1")
        try:
            n = int(raw)
        except ValueError:
            raise Failure(EXIT_CONFIG, f"GBBM_KAM_THREADS={raw!r} is not an integer")
    if n < 1:
        raise Failure(EXIT_CONFIG, f"thread count must be positive, got {n}")
    return n


def _load_config(args, keys: list[str], schema: str) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = ser.read_json(args.config)
        except FileNotFoundError:
            raise Failure(EXIT_CONFIG, f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise Failure(EXIT_CONFIG, f"config file is not valid JSON: {exc}")
        if not isinstance(cfg, dict):
            raise Failure(EXIT_CONFIG, "config file must contain a JSON object")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    try:
        jsonschema.validate(cfg, ser.load_schema(schema))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise Failure(EXIT_CONFIG, f"config violates schema {schema} at {path}: {exc.message}")
    return cfg


def _emit(report: dict, schema: str, output: str | None) -> None:
    ser.validate(report, schema)
    text = ser.dumps(report)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rat_pi(c) -> dict:
    r, p = c
    return ser.rational(r, p)


# ---------------------------------------------------------------------------
# commands


def cmd_divisors(args) -> int:
    from .divisor_analysis import ADMISSIBLE, survey_min_divisor
    from .index_sets import DEFAULT_CEILING

    cfg = _load_config(args, ["order", "n1", "n2", "jmax", "labels", "non_s_jmax", "ceiling", "output"], "divisors_config")
    S = _tangential(cfg["n1"], cfg["n2"])
    labels = cfg.get("labels") or list(ADMISSIBLE[cfg["order"]])
    try:
        rep = survey_min_divisor(
            cfg["order"], labels, S, cfg["jmax"], non_s_jmax=cfg.get("non_s_jmax"), ceiling=cfg.get("ceiling", DEFAULT_CEILING)
        )
    except ValueError as exc:
        raise Failure(EXIT_CONFIG, str(exc))
    _emit(rep.to_json(), "divisors_report", cfg.get("output"))
    if rep.zero_divisor_tuples:
        raise Failure(EXIT_VERIFY, f"{len(rep.zero_divisor_tuples)} zero divisor(s), first {rep.zero_divisor_tuples[0]}")
    return EXIT_OK


def _tangential(n1: int, n2: int):
    from .index_sets import TangentialSet

    try:
        return TangentialSet(n1, n2)
    except ValueError as exc:
        raise Failure(EXIT_CONFIG, str(exc))


def _normal_form(S, jmax):
    from .normal_form import ZeroDivisorError, normal_form

    if jmax is not None and jmax < S.n2:
        raise Failure(EXIT_CONFIG, f"jmax={jmax} must be >= n2={S.n2}")
    try:
        return normal_form(S, jmax)
    except ZeroDivisorError as exc:
        raise Failure(EXIT_VERIFY, str(exc))


def gbar_table(nf) -> list[dict]:
    from .kam_check import normal_frequency_bracket

    names = ("|z_n1|^6", "|z_n1|^4 |z_n2|^2", "|z_n1|^2 |z_n2|^4", "|z_n2|^6")
    rows = [{"term": t, "coefficient": _rat_pi(c), "factor": "1"} for t, c in zip(names, nf.Gbar_S)]
    br = normal_frequency_bracket(nf.Gbar)
    for t, c in zip(("|z_n1|^4 |z_j|^2", "|z_n1|^2 |z_n2|^2 |z_j|^2", "|z_n2|^4 |z_j|^2"), br):
        rows.append({"term": t, "coefficient": _rat_pi(c), "factor": "lambda_j"})
    return rows


def cmd_normalform(args) -> int:
    cfg = _load_config(args, ["n1", "n2", "jmax", "output"], "normalform_config")
    S = _tangential(cfg["n1"], cfg["n2"])
    nf = _normal_form(S, cfg.get("jmax"))
    report = {
        "n1": S.n1,
        "n2": S.n2,
        "jmax": nf.jmax,
        "Gbar": gbar_table(nf),
        "R": [_rat_pi(c) for c in nf.R],
        "T": [_rat_pi(c) for c in nf.T],
        "homological_residual_zero": nf.homological_zero,
        "gtilde_terms": nf.gtilde_terms,
    }
    _emit(report, "normalform_report", cfg.get("output"))
    if not nf.homological_zero:
        raise Failure(EXIT_VERIFY, "homological residual is not the zero polynomial")
    return EXIT_OK


def cmd_freqmap(args) -> int:
    from . import kam_check as kc

    keys = ["n1", "n2", "eps", "jmax", "modes", "grid", "table", "samples", "seed", "scaling_eps", "model", "output"]
    cfg = _load_config(args, keys, "freqmap_config")
    S = _tangential(cfg["n1"], cfg["n2"])
    kind = cfg.get("model", "full")
    if kind == "full":
        model = kc.model_from_normal_form(_normal_form(S, cfg.get("jmax")))
    else:
        model = kc.leading_order_model(S.n1, S.n2)
    eps = cfg["eps"]
    modes = cfg.get("modes", 5 * S.n2)
    table = []
    for xi in kc.domain_grid(eps, cfg.get("table", 8)):
        Jm = kc.jacobian(model, xi)
        table.append(
            {
                "xi": list(xi),
                "omega": list(kc.omega0(model, xi)),
                "normal_factor": kc.omega_bracket_value(model, xi),
                "jacobian": Jm.tolist(),
                "det": float(np.linalg.det(Jm)),
                "det_closed_form": kc.leading_det_closed_form(S.n1, S.n2, xi),
            }
        )
    checks = {
        "A": kc.check_assumption_A(model, eps, cfg.get("grid", 64)),
        "B": kc.check_assumption_B(model, eps, modes, cfg.get("grid", 64), cfg.get("samples", 1000), cfg.get("seed", 0)),
        "C": kc.check_assumption_C(S.n1, S.n2, tuple(cfg.get("scaling_eps", (1e-4, 1e-5, 1e-6)))),
        "D": kc.CheckResult(True, {"note": "reality of the normal-form coefficients is checked exactly"}),
        "E": kc.CheckResult(True, {"note": "vacuous: no normal-frequency coupling matrix"}),
    }
    report = {
        "n1": S.n1,
        "n2": S.n2,
        "eps": eps,
        "model": kind,
        "omega0_at_zero": [ser.rational(q) for q in model.omega0_at_zero()],
        "omega_bracket": [_rat_pi(c) for c in model.omega_bracket],
        "table": table,
        "assumptions": {k: v.to_json() for k, v in checks.items()},
    }
    _emit(report, "freqmap_report", cfg.get("output"))
    failed = [k for k, v in checks.items() if not v.passed]
    if failed:
        raise Failure(EXIT_VERIFY, f"assumption(s) {', '.join(failed)} failed")
    return EXIT_OK


SIM_KEYS = [
    "n1", "n2", "xi", "phases", "jmax", "M", "dt", "T", "stride", "integrator",
    "nonlinear", "tol", "maxit", "drift_tol_H", "drift_tol_E1", "backend",
]


def cmd_simulate(args) -> int:
    from . import _kernels
    from .dynamics import ConfigError, SimConfig, integrate

    cfg = _load_config(args, SIM_KEYS + ["output", "meta"], "simulate_config")
    try:
        sim = SimConfig(**{k: cfg[k] for k in SIM_KEYS if k in cfg})
        backend = _kernels.backend_name(sim.backend)
    except (ConfigError, ValueError, RuntimeError) as exc:
        raise Failure(EXIT_CONFIG, str(exc))
    traj = integrate(sim)
    out = cfg["output"]
    ser.write_trajectory_csv(out, traj.times, traj.mode(sim.n1), traj.mode(sim.n2), traj.H, traj.E1)
    meta = {
        "config": sim.to_json(),
        "backend": backend,
        "samples": int(traj.times.size),
        "drift_H": traj.drift_H(),
        "drift_E1": traj.drift_E1(),
        "normal_energy_ratio": traj.normal_energy_ratio(sim.n1, sim.n2) if min(sim.xi) > 0 else None,
        "inner_iterations": traj.inner_iterations,
        "csv": str(out),
    }
    ser.validate(meta, "simulate_report")
    ser.write_json(cfg.get("meta") or f"{out}.json", meta)
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .dynamics import compare_point
    from .frequency import MIN_SAMPLES, extract_frequencies
    from .kam_check import model_from_normal_form

    cfg = _load_config(args, ["trajectory", "n1", "n2", "xi", "full_model", "output"], "analyze_config")
    path = Path(cfg["trajectory"])
    if not path.exists():
        raise Failure(EXIT_CONFIG, f"trajectory file not found: {path}")
    meta_path = Path(f"{path}.json")
    if meta_path.exists():
        sim = ser.read_json(meta_path)["config"]
        for k in ("n1", "n2", "xi"):
            cfg.setdefault(k, sim[k])
    missing = [k for k in ("n1", "n2", "xi") if k not in cfg]
    if missing:
        raise Failure(EXIT_CONFIG, f"missing {missing}: pass them or keep the simulate metadata next to the CSV")
    try:
        data = ser.read_trajectory_csv(path)
    except ValueError as exc:
        raise Failure(EXIT_CONFIG, str(exc))
    t = data["t"]
    if t.size < MIN_SAMPLES:
        raise Failure(EXIT_CONFIG, f"trajectory has {t.size} samples; frequency extraction needs {MIN_SAMPLES}")
    steps = np.diff(t)
    sample_dt = float(np.mean(steps))
    if np.max(np.abs(steps - sample_dt)) > 1e-9 * abs(sample_dt):
        raise Failure(EXIT_CONFIG, "trajectory samples are not uniformly spaced")
    dt = abs(sample_dt)
    sig1, sig2 = data["z_n1"], data["z_n2"]
    if sample_dt < 0:  # backward run: reverse time so that frequencies keep their sign
        sig1, sig2 = sig1[::-1], sig2[::-1]
    t1 = extract_frequencies(sig1, dt, 1)[0]
    t2 = extract_frequencies(sig2, dt, 1)[0]
    full = None
    if cfg.get("full_model", True):
        full = model_from_normal_form(_normal_form(_tangential(cfg["n1"], cfg["n2"]), None))
    pt = compare_point(tuple(cfg["xi"]), (t1.frequency, t2.frequency), cfg["n1"], cfg["n2"], full)
    H, E1 = data["H"], data["E1"]
    report = pt.to_json()
    report.update(
        {
            "n1": cfg["n1"],
            "n2": cfg["n2"],
            "samples": int(t.size),
            "sample_dt": dt,
            "amplitudes": [abs(t1.amplitude), abs(t2.amplitude)],
            "drift_H": float(np.max(np.abs(H - H[0])) / abs(H[0])) if H[0] else None,
            "drift_E1": float(np.max(np.abs(E1 - E1[0])) / E1[0]) if E1[0] else None,
            "normal_energy_ratio": None,
        }
    )
    _emit(report, "analyze_report", cfg.get("output"))
    return EXIT_OK


def cmd_verify_all(args) -> int:
    from .acceptance import run_all

    cfg = _load_config(args, ["criteria", "output"], "verify_all_config")
    results = run_all(cfg.get("criteria"), workers=args.threads_resolved, echo=lambda s: print(s, file=sys.stderr))
    report = {"all_pass": all(r.passed for r in results), "criteria": [r.to_json() for r in results]}
    _emit(report, "verify_all_report", cfg.get("output"))
    if not report["all_pass"]:
        failed = [r.number for r in results if not r.passed]
        raise Failure(EXIT_VERIFY, f"criteria {failed} failed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _pair(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return [float(p) for p in parts]


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gbbm-kam",
        description="Small-divisor, normal-form, frequency-map and simulation checks for two-frequency gBBM tori.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--threads", type=int, default=None, help="worker processes for parallel sections (sweeps)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        sp.add_argument("--output", help="output path (default: stdout)")
        sp.set_defaults(func=fn)
        return sp

    sp = add("divisors", cmd_divisors, "exact minimum small divisor over the admissible index classes")
    sp.add_argument("--order", type=int)
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--jmax", type=int)
    sp.add_argument("--labels", type=lambda s: s.split(","), help="comma-separated class labels, e.g. D1,D2")
    sp.add_argument("--non-s-jmax", dest="non_s_jmax", type=int, help="tighter bound for non-tangential entries")
    sp.add_argument("--ceiling", type=int, help="maximum projected number of tuples")

    sp = add("normalform", cmd_normalform, "sextic normal form and the order-10/14 action coefficients")
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--jmax", type=int, help="mode cutoff (default 5*n2)")

    sp = add("freqmap", cmd_freqmap, "frequency map tables and assumption checks")
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--jmax", type=int, help="normal-form mode cutoff (default 5*n2)")
    sp.add_argument("--modes", type=int, help="largest normal mode in the frequency bounds (default 5*n2)")
    sp.add_argument("--grid", type=int, help="grid points per axis for the checks (default 64)")
    sp.add_argument("--table", type=int, help="grid points per axis in the output table (default 8)")
    sp.add_argument("--samples", type=int, help="random samples for the derivative bound (default 1000)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--scaling-eps", dest="scaling_eps", type=_floats, help="comma-separated eps values for the scaling check")
    sp.add_argument("--model", choices=["full", "leading"])

    sp = add("simulate", cmd_simulate, "integrate the truncated flow and write a trajectory CSV")
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--xi", type=_pair, help="xi1,xi2")
    sp.add_argument("--phases", type=_pair, help="x1,x2")
    sp.add_argument("--jmax", type=int)
    sp.add_argument("--M", type=int, help="grid size (power of two, > 6*jmax)")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--T", type=float)
    sp.add_argument("--stride", type=int)
    sp.add_argument("--integrator", choices=["splitting", "implicit-midpoint"])
    sp.add_argument("--nonlinear", type=_bool)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--maxit", type=int)
    sp.add_argument("--drift-tol-H", dest="drift_tol_H", type=float)
    sp.add_argument("--drift-tol-E1", dest="drift_tol_E1", type=float)
    sp.add_argument("--backend", choices=["numba", "numpy"])
    sp.add_argument("--meta", help="metadata JSON path (default: <output>.json)")

    sp = add("analyze", cmd_analyze, "measure tangential frequencies in a trajectory CSV")
    sp.add_argument("trajectory", nargs="?")
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--xi", type=_pair)
    sp.add_argument("--full-model", dest="full_model", type=_bool, help="also compare with the order-14 model (default true)")

    sp = add("verify-all", cmd_verify_all, "run the acceptance suite")
    sp.add_argument("--criteria", type=_ints, help="comma-separated subset, e.g. 1,6,9")
    return p


def main(argv=None) -> int:
    from .dynamics import ConfigError, DriftError, NonConvergenceError
    from .frequency import FrequencyError
    from .index_sets import ResourceLimitError

    args = build_parser().parse_args(argv)
    try:
        args.threads_resolved = resolve_threads(args.threads)
        return args.func(args)
    except Failure as exc:
        print(f"gbbm-kam: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"gbbm-kam: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceLimitError, MemoryError) as exc:
        print(f"gbbm-kam: resource ceiling: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DriftError as exc:
        print(f"gbbm-kam: verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (NonConvergenceError, FrequencyError) as exc:
        print(f"gbbm-kam: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
