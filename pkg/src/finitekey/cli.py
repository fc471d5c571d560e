"""Command-line front end.

Subcommands write a CSV table (to ``--out`` or stdout) and a short
human-readable summary. Exit codes: 0 success, 1 verification failure,
2 configuration error.
"""

import argparse
import csv
import datetime
import io
import json
import math
import sys

from finitekey import __version__
from finitekey.config import PRESETS, ConfigError, load_config
from finitekey.guessing import (
    BellDiagonalState, CertificateError, ansatz_max, build_certificate, pg_closed_form,
    pinched_ansatz, restricted_pg_oracle, verify_certificate,
)
from finitekey.optimize import (
    Axis, NoKeyError, SweepSpec, evaluate_cell, qber_threshold, sweep,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2
ANSATZ_TOL = 1e-6
ORACLE_TOL = 1e-4

RATE_COLUMNS = ["method", "raw_rate", "clamped_rate", "f", "delta", "q_eff",
                "leak_per_signal", "epsilon_total", "feasible"]
SWEEP_COLUMNS = ["axis_value", "method", "raw_rate", "clamped_rate", "f_opt", "q_eff",
                 "delta", "epsilon_total", "feasible"]
THRESHOLD_COLUMNS = ["method", "block_size", "threshold_qber", "bracket_width", "status"]
VERIFY_COLUMNS = ["qber", "closed_form", "ansatz_max", "oracle", "ansatz_gap", "oracle_gap",
                  "oracle_p3", "oracle_s", "pass"]
CERTIFICATE_COLUMNS = ["qber", "objective", "fidelity", "guessing_probability",
                       "min_block_eigenvalue", "verdict"]


def fmt(value):
    """Serialize a cell: 9 significant digits for numbers, lowercase booleans."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".9g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def _rate_row(method, point, f):
    return {
        "method": method, "raw_rate": point.raw_rate, "clamped_rate": point.clamped_rate,
        "f": float(f), "delta": point.delta, "q_eff": point.effective_qber,
        "leak_per_signal": point.leak_per_signal, "epsilon_total": point.epsilon_total,
        "feasible": point.feasible,
    }


def cmd_rate(cfg):
    template = cfg.protocol()
    rows, summary = [], []
    for method in cfg.method_ids:
        opt = evaluate_cell(method, template, cfg.estimation_fraction)
        rows.append(_rate_row(method, opt.point, opt.f))
        status = "" if opt.point.feasible else " (infeasible: effective QBER > 1/2)"
        summary.append(f"{method.value}: rate {fmt(opt.point.clamped_rate)} "
                       f"(raw {fmt(opt.point.raw_rate)}, f {fmt(float(opt.f))}){status}")
    return RATE_COLUMNS, rows, summary, EXIT_OK


def _cmd_sweep(cfg, axis):
    if axis is Axis.BLOCK_SIZE:
        if cfg.asymptotic:
            raise ConfigError("asymptotic", "a block-size sweep cannot be asymptotic")
        grid = cfg.sweep_n.values(log=True)
    else:
        grid = cfg.sweep_qber.values()
    spec = SweepSpec(
        methods=cfg.method_ids, axis=axis, grid=grid, template=cfg.protocol(),
        optimize_f=cfg.estimation_fraction is None, fixed_f=cfg.estimation_fraction)
    rows = [{
        "axis_value": r.axis_value, "method": r.method, "raw_rate": r.point.raw_rate,
        "clamped_rate": r.point.clamped_rate, "f_opt": float(r.f_opt),
        "q_eff": r.point.effective_qber, "delta": r.point.delta,
        "epsilon_total": r.point.epsilon_total, "feasible": r.point.feasible,
    } for r in sweep(spec)]
    summary = [f"{len(rows)} rows ({len(grid)} {axis.value} values x {len(cfg.methods)} methods)"]
    return SWEEP_COLUMNS, rows, summary, EXIT_OK


def cmd_sweep_n(cfg):
    return _cmd_sweep(cfg, Axis.BLOCK_SIZE)


def cmd_sweep_qber(cfg):
    return _cmd_sweep(cfg, Axis.QBER)


def cmd_threshold(cfg):
    template = cfg.protocol()
    rows, summary = [], []
    for method in cfg.method_ids:
        try:
            res = qber_threshold(method, template, cfg.estimation_fraction)
            row = {"method": method, "block_size": template.block_size,
                   "threshold_qber": res.threshold_qber, "bracket_width": res.bracket_width,
                   "status": "ok"}
            summary.append(f"{method.value}: threshold QBER {fmt(res.threshold_qber)} "
                           f"(+/- {fmt(res.bracket_width)})")
        except NoKeyError:
            row = {"method": method, "block_size": template.block_size,
                   "threshold_qber": math.nan, "bracket_width": math.nan, "status": "no-key"}
            summary.append(f"{method.value}: no key even at QBER 0")
        rows.append(row)
    return THRESHOLD_COLUMNS, rows, summary, EXIT_OK


def cmd_verify_pg(cfg):
    rows, ok = [], True
    for p in cfg.verify_qbers:
        closed = pg_closed_form(p)
        _, ansatz = ansatz_max(p)
        oracle = restricted_pg_oracle(p, cfg.grid_resolution)
        a_gap, o_gap = abs(closed - ansatz), abs(closed - oracle.pg)
        passed = a_gap <= ANSATZ_TOL and o_gap <= ORACLE_TOL
        ok &= passed
        rows.append({"qber": p, "closed_form": closed, "ansatz_max": ansatz,
                     "oracle": oracle.pg, "ansatz_gap": a_gap, "oracle_gap": o_gap,
                     "oracle_p3": oracle.p3, "oracle_s": oracle.s, "pass": passed})
    worst = max(rows, key=lambda r: r["oracle_gap"])
    summary = [f"max oracle gap {fmt(worst['oracle_gap'])} at p={fmt(worst['qber'])}",
               f"max ansatz gap {fmt(max(r['ansatz_gap'] for r in rows))}",
               "PASS" if ok else "FAIL"]
    return VERIFY_COLUMNS, rows, summary, EXIT_OK if ok else EXIT_VERIFY


def cmd_certificate(cfg):
    p = cfg.qber
    rho = BellDiagonalState.optimal(p).to_matrix()
    tau = pinched_ansatz(1 - p)
    try:
        cert = build_certificate(rho, tau)
    except CertificateError as exc:
        return CERTIFICATE_COLUMNS, [], [f"certificate error: {exc}", "FAIL"], EXIT_VERIFY
    verdict = verify_certificate(cert)
    row = {"qber": p, "objective": verdict.objective, "fidelity": verdict.fidelity,
           "guessing_probability": verdict.objective ** 2,
           "min_block_eigenvalue": verdict.min_block_eigenvalue,
           "verdict": "PASS" if verdict.passed else "FAIL"}
    summary = [f"objective Re Tr X     {fmt(verdict.objective)}",
               f"fidelity              {fmt(verdict.fidelity)}",
               f"guessing probability  {fmt(verdict.objective ** 2)}",
               f"min block eigenvalue  {fmt(verdict.min_block_eigenvalue)}",
               row["verdict"]]
    return CERTIFICATE_COLUMNS, [row], summary, EXIT_OK if verdict.passed else EXIT_VERIFY


COMMANDS = {
    "rate": cmd_rate,
    "sweep-n": cmd_sweep_n,
    "sweep-qber": cmd_sweep_qber,
    "threshold": cmd_threshold,
    "verify-pg": cmd_verify_pg,
    "certificate": cmd_certificate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="finitekey", description="Finite-size BB84 key rates (FME, AEP, EUR).")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="built-in figure preset")
    common.add_argument("--out", help="write the CSV here instead of stdout")
    common.add_argument("--delta-variant", choices=["main", "appendix"])
    common.add_argument("--gamma", type=float, help="reconciliation inefficiency")
    common.add_argument("--fixed-f", type=float,
                        help="use this estimation fraction instead of optimizing it")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _write_sidecar(path, command, cfg):
    meta = {
        "command": command,
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg.to_dict(),
    }
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, default=str)
        fh.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {"delta_variant": args.delta_variant, "gamma": args.gamma,
                 "estimation_fraction": args.fixed_f, "out": args.out}
    try:
        cfg = load_config(args.config, args.preset, overrides)
        columns, rows, summary, code = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"finitekey: configuration error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"finitekey: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = render_csv(columns, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        _write_sidecar(cfg.out, args.command, cfg)
        print("\n".join(summary))
    else:
        sys.stdout.write(text)
        print("\n".join(summary), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
