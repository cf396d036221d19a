"""Command-line front end.

Subcommands: sweep | bounds | check | optimize.  Outputs are byte-stable
for a fixed seed; timestamps live only in the JSON manifests.  Exit codes:
0 ok, 1 config error, 2 certificate/check failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .bounds import (
    BlockConstants,
    BoundPreconditionError,
    CertificateError,
    bound_cerg,
    bound_pcov,
    bound_pcov_thinned,
    c_h,
    estimate_block_constants,
    k_erg,
    k_sinr,
    k_thin,
    optimize_mean_sinr,
    verify_block,
)
from .channel import ActivityPolicy, FadingModel
from .geometry import DegenerateLatitudeError
from .montecarlo import (
    DEFAULT_LADDER,
    SweepConfig,
    format_sig9,
    read_sweep_csv,
    resolve_workers,
    run_sweep,
    table_one_channel,
    write_manifest,
    write_sweep_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK = 2
EXIT_IO = 3

BOUNDS_CSV_COLUMNS = [
    "n_o", "n_s", "n_total", "status", "m", "a_geom",
    "bound_pcov", "bound_cerg", "bound_pcov_q0.1", "bound_pcov_q0.03",
    "k_thin", "k_erg", "k_sinr", "c_h",
]

OPTIMIZE_CSV_COLUMNS = ["n_o", "n_s", "n_total", "mean_sinr", "ci_lo", "ci_hi", "drops", "is_argmax"]


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _CliError(f"config error: {message}", EXIT_CONFIG)


# Table I defaults; a dedicated test asserts each against a literal.
DEFAULTS = {
    "altitude_km": 550.0,
    "inclination_deg": 53.0,
    "latitude_deg": 0.0,
    "earth_radius_km": 6371.0,
    "alpha": 2.5,
    "gr": 1.0,
    "gt": 10.0,
    "dg_km": 1000.0,
    "snr_dmin_db": 12.0,
    "tau_db": 0.0,
    "tx_power": 1.0,
    "seed": 1000,
    "drops": 6000,
    "max_drops": 30000,
    "refine_threshold": 0.05,
    "policies": "full,q0.1,q0.03,scaling",
    "scaling_c": 600.0,
    "grid_res": 1024,
    "out_dir": "out",
    "noise_includes_boost": True,
    "n_max_cap": 40000,
    "fading": "rayleigh",
    "ladder": ",".join(f"{a}x{b}" for a, b in DEFAULT_LADDER),
}


def _parse_ladder(spec: str) -> tuple[tuple[int, int], ...]:
    ladder = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            a, b = token.split("x")
            ladder.append((int(a), int(b)))
        except ValueError:
            raise _CliError(f"config error: bad ladder token {token!r} (want NxM)", EXIT_CONFIG)
    if not ladder:
        raise _CliError("config error: empty constellation ladder", EXIT_CONFIG)
    return tuple(ladder)


def _read_config_file(path: str) -> dict:
    """Flat key = value text file; '#' starts a comment."""
    overrides = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as exc:
        raise _CliError(f"config error: cannot read {path}: {exc}", EXIT_CONFIG)
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise _CliError(f"config error: {path}:{lineno}: expected key = value", EXIT_CONFIG)
        key, value = (part.strip() for part in body.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise _CliError(f"config error: {path}:{lineno}: unknown key {key!r}", EXIT_CONFIG)
        overrides[key] = value
    return overrides


def _coerce(key: str, value):
    default = DEFAULTS[key]
    if isinstance(value, str):
        if isinstance(default, bool):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise _CliError(f"config error: boolean expected for {key}, got {value!r}", EXIT_CONFIG)
        if isinstance(default, int) and not isinstance(default, bool):
            return int(value)
        if isinstance(default, float):
            return float(value)
    return value


def _parse_policies(spec: str, scaling_c: float) -> list[ActivityPolicy]:
    policies = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "full":
            policies.append(ActivityPolicy.full_reuse())
        elif token == "scaling":
            policies.append(ActivityPolicy.scaling_law(scaling_c))
        elif token.startswith("q"):
            try:
                policies.append(ActivityPolicy.fixed_thinning(float(token[1:])))
            except ValueError:
                raise _CliError(f"config error: bad policy token {token!r}", EXIT_CONFIG)
        else:
            raise _CliError(f"config error: bad policy token {token!r}", EXIT_CONFIG)
    if not policies:
        raise _CliError("config error: empty policy list", EXIT_CONFIG)
    return policies


def _settings(args) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, value in _read_config_file(args.config).items():
            settings[key] = _coerce(key, value)
    for key in DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = _coerce(key, flag_value)
    return settings


def _fading(settings) -> FadingModel:
    name = settings["fading"]
    if name == "rayleigh":
        return FadingModel.rayleigh()
    if name == "unit":
        return FadingModel.unit()
    if name.startswith("nakagami"):
        return FadingModel.nakagami(float(name.removeprefix("nakagami")))
    raise _CliError(f"config error: unknown fading {name!r}", EXIT_CONFIG)


def _sweep_config(settings) -> SweepConfig:
    channel = table_one_channel(
        tx_power=settings["tx_power"],
        pathloss_exp=settings["alpha"],
        gain_rx=settings["gr"],
        gain_tx_boost=settings["gt"],
        gain_cutoff_km=settings["dg_km"],
        altitude_km=settings["altitude_km"],
        snr_at_dmin_db=settings["snr_dmin_db"],
        noise_includes_boost=settings["noise_includes_boost"],
    )
    return SweepConfig(
        constellation_list=_parse_ladder(settings["ladder"]),
        policies=tuple(_parse_policies(settings["policies"], settings["scaling_c"])),
        tau_db=settings["tau_db"],
        base_drops=settings["drops"],
        max_drops=max(settings["drops"], settings["max_drops"]),
        refine_threshold=settings["refine_threshold"],
        master_seed=settings["seed"],
        fading=_fading(settings),
        user_latitude_deg=settings["latitude_deg"],
        altitude_km=settings["altitude_km"],
        inclination_deg=settings["inclination_deg"],
        earth_radius_km=settings["earth_radius_km"],
        channel=channel,
    )


def _ensure_out_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise _CliError(f"i/o error: cannot create {path}: {exc}", EXIT_IO)


def _write_rows(path: str, columns: list[str], rows: list[list]) -> None:
    import csv

    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            writer.writerows(rows)
    except OSError as exc:
        raise _CliError(f"i/o error: cannot write {path}: {exc}", EXIT_IO)


def cmd_sweep(args) -> int:
    settings = _settings(args)
    config = _sweep_config(settings)
    _ensure_out_dir(settings["out_dir"])
    t0 = time.perf_counter()
    try:
        results = run_sweep(config)
    except DegenerateLatitudeError as exc:
        raise _CliError(f"config error: {exc}", EXIT_CONFIG)
    wall = time.perf_counter() - t0
    csv_path = os.path.join(settings["out_dir"], "sweep.csv")
    manifest_path = os.path.join(settings["out_dir"], "manifest.json")
    try:
        write_sweep_csv(results, csv_path)
        write_manifest(config, manifest_path, wall, extra={"command": "sweep"})
    except OSError as exc:
        raise _CliError(f"i/o error: {exc}", EXIT_IO)
    print(f"wrote {csv_path} ({len(results)} rows) and {manifest_path}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    settings = _settings(args)
    config = _sweep_config(settings)
    _ensure_out_dir(settings["out_dir"])
    params = config.walker(*config.constellation_list[0])
    user = config.user()
    try:
        constants = estimate_block_constants(params, user, grid_resolution=settings["grid_res"])
    except DegenerateLatitudeError as exc:
        raise _CliError(f"config error: {exc}", EXIT_CONFIG)
    except CertificateError as exc:
        raise _CliError(f"certificate failure: {exc}", EXIT_CHECK)

    reports = []
    for n_o, n_s in config.constellation_list:
        verification = verify_block(constants, constants.walker(n_o, n_s), user, phase_grid=9)
        if verification.status == "failed":
            raise _CliError(
                f"certificate failure at ({n_o},{n_s}): count {verification.min_count} < "
                f"required {verification.required} at phase state {verification.failing_state}",
                EXIT_CHECK,
            )
        reports.append((n_o, n_s, verification))

    fading = config.fading
    tau = config.tau_linear
    chan = config.channel
    kt = k_thin(constants, chan, fading, tau)
    ke = k_erg(constants, chan, fading)
    ks = k_sinr(constants, chan, fading)
    ch_val = c_h(fading)
    constants_cols = [format_sig9(kt), format_sig9(ke), format_sig9(ks), format_sig9(ch_val)]
    rows = []
    for n_o, n_s, verification in reports:
        base = [n_o, n_s, n_o * n_s]
        try:
            row = base + [
                "ok",
                math.floor(constants.beta * n_o * n_s) - 1,
                format_sig9((constants.d2_km / constants.d_min_km) ** chan.pathloss_exp),
                format_sig9(bound_pcov(constants, chan, fading, tau, n_o, n_s)),
                format_sig9(bound_cerg(constants, chan, fading, n_o, n_s)),
                format_sig9(bound_pcov_thinned(constants, chan, fading, tau, n_o, n_s, 0.1)),
                format_sig9(bound_pcov_thinned(constants, chan, fading, tau, n_o, n_s, 0.03)),
            ] + constants_cols
        except BoundPreconditionError:
            row = base + ["precondition_unmet", "", "", "", "", "", ""] + constants_cols
        rows.append(row)

    cert_path = os.path.join(settings["out_dir"], "certificate.json")
    table_path = os.path.join(settings["out_dir"], "bounds.csv")
    try:
        constants.save(cert_path)
    except OSError as exc:
        raise _CliError(f"i/o error: {exc}", EXIT_IO)
    _write_rows(table_path, BOUNDS_CSV_COLUMNS, rows)
    print(
        f"certificate: d1={constants.d1_km:.6g} d2={constants.d2_km:.6g} "
        f"beta={constants.beta:.6g} n0={constants.n0}"
    )
    print(f"wrote {cert_path} and {table_path}")
    return EXIT_OK


def _fit_loglog_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def cmd_check(args) -> int:
    settings = _settings(args)
    sweep_path = args.sweep_csv or os.path.join(settings["out_dir"], "sweep.csv")
    cert_path = args.certificate or os.path.join(settings["out_dir"], "certificate.json")
    manifest_path = os.path.join(os.path.dirname(sweep_path) or ".", "manifest.json")
    for path in (sweep_path, cert_path, manifest_path):
        if not os.path.exists(path):
            raise _CliError(f"i/o error: missing artifact {path}", EXIT_IO)
    try:
        rows = read_sweep_csv(sweep_path)
        constants = BlockConstants.load(cert_path)
        with open(manifest_path) as f:
            manifest = json.load(f)
    except (OSError, ValueError, KeyError) as exc:
        raise _CliError(f"i/o error: cannot load artifacts: {exc}", EXIT_IO)

    if manifest.get("geometry_hash") != constants.geometry_hash():
        raise _CliError(
            "check failure: sweep manifest and certificate disagree on geometry hash",
            EXIT_CHECK,
        )

    config = _sweep_config(settings)
    fading = config.fading
    chan = config.channel
    kt = k_thin(constants, chan, fading, config.tau_linear)
    ke = k_erg(constants, chan, fading)

    failures = []
    checks = []
    for row in rows:
        qn = row["q"] * row["n_total"]
        ratio_cov = qn * row["p_cov"] / kt
        ratio_erg = qn * row["c_erg"] / ke
        checks.append((row, ratio_cov, ratio_erg))
        if ratio_cov > 1.0:
            failures.append(f"coverage ratio {ratio_cov:.3g} > 1 at {row['policy']} N={row['n_total']}")
        if ratio_erg > 1.0:
            failures.append(f"rate ratio {ratio_erg:.3g} > 1 at {row['policy']} N={row['n_total']}")

    full = sorted((r for r in rows if r["policy"] == "full"), key=lambda r: r["n_total"])
    slope_interference = float("nan")
    slope_pcov = float("nan")
    if len(full) >= 2:
        slope_interference = _fit_loglog_slope(
            [r["n_total"] for r in full], [r["mean_I_over_p"] for r in full]
        )
        if not (0.85 <= slope_interference <= 1.15):
            failures.append(f"full-reuse interference slope {slope_interference:.3f} outside [0.85, 1.15]")
        tail = full[-4:]
        slope_pcov = _fit_loglog_slope([r["n_total"] for r in tail], [r["p_cov"] for r in tail])
        if not slope_pcov <= -0.7:
            failures.append(f"full-reuse coverage tail slope {slope_pcov:.3f} > -0.7")

    scaling = sorted(
        (r for r in rows if r["policy"].startswith("scaling")), key=lambda r: r["n_total"]
    )
    interference_flat = float("nan")
    if scaling:
        c_val = settings["scaling_c"]
        anchor = next((r for r in scaling if r["n_total"] >= c_val), scaling[0])
        largest = scaling[-1]
        interference_flat = largest["mean_I_over_p"] / anchor["mean_I_over_p"]
        if not (0.5 <= interference_flat <= 2.0):
            failures.append(
                f"scaling-law interference at N={largest['n_total']} is x{interference_flat:.2f} "
                f"its value at N={anchor['n_total']} (factor-2 band)"
            )

    max_ratio_cov = max(c[1] for c in checks)
    max_ratio_erg = max(c[2] for c in checks)
    report = {
        "k_thin": kt,
        "k_erg": ke,
        "max_ratio_qn_pcov": max_ratio_cov,
        "max_ratio_qn_cerg": max_ratio_erg,
        "slope_interference_full": slope_interference,
        "slope_pcov_full_tail": slope_pcov,
        "scaling_interference_ratio": interference_flat,
        "failures": failures,
    }
    report_path = os.path.join(settings["out_dir"], "check_report.json")
    _ensure_out_dir(settings["out_dir"])
    try:
        with open(report_path, "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise _CliError(f"i/o error: {exc}", EXIT_IO)

    print(f"max qN*P_cov/K_thin = {max_ratio_cov:.4g}; max qN*C_erg/K_erg = {max_ratio_erg:.4g}")
    print(f"interference slope (full reuse) = {slope_interference:.3f}")
    print(f"coverage tail slope (full reuse) = {slope_pcov:.3f}")
    if failures:
        for failure in failures:
            print(f"FAIL: {failure}", file=sys.stderr)
        raise _CliError(f"check failure: {len(failures)} assertion(s) failed", EXIT_CHECK)
    print("all scaling checks passed")
    return EXIT_OK


def cmd_optimize(args) -> int:
    settings = _settings(args)
    cert_path = args.certificate or os.path.join(settings["out_dir"], "certificate.json")
    if not os.path.exists(cert_path):
        raise _CliError(
            f"config error: certificate {cert_path} not found (run the bounds subcommand first)",
            EXIT_CONFIG,
        )
    try:
        constants = BlockConstants.load(cert_path)
    except (OSError, ValueError, KeyError) as exc:
        raise _CliError(f"i/o error: cannot load certificate: {exc}", EXIT_IO)
    config = _sweep_config(settings)
    if constants.geometry_hash() != config.geometry_hash():
        raise _CliError("config error: certificate geometry does not match the configured geometry", EXIT_CONFIG)

    _ensure_out_dir(settings["out_dir"])
    result = optimize_mean_sinr(
        config, constants, config.channel, config.fading, n_max_cap=settings["n_max_cap"]
    )
    rows = []
    for entry in result.table:
        is_star = entry.n_o == result.n_o_star and entry.n_s == result.n_s_star
        rows.append([
            entry.n_o, entry.n_s, entry.n_total,
            format_sig9(entry.mean_sinr), format_sig9(entry.ci_lo), format_sig9(entry.ci_hi),
            entry.drops, int(is_star),
        ])
    table_path = os.path.join(settings["out_dir"], "optimize.csv")
    _write_rows(table_path, OPTIMIZE_CSV_COLUMNS, rows)
    manifest = {
        "command": "optimize",
        "argmax": [result.n_o_star, result.n_s_star],
        "j_star": result.j_star,
        "j_star_ci": list(result.j_star_ci),
        "j_ref": result.j_ref,
        "k_sinr": result.k_sinr_value,
        "decay_threshold": result.decay_threshold,
        "n_max_uncapped": result.n_max_uncapped,
        "n_max_used": result.n_max,
        "cap_binding": result.cap_binding,
        "smallball_heuristic": result.smallball_heuristic,
        "master_seed": config.master_seed,
        "drops_per_pair": config.base_drops,
        "geometry_hash": config.geometry_hash(),
    }
    manifest_path = os.path.join(settings["out_dir"], "optimize_manifest.json")
    try:
        with open(manifest_path, "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise _CliError(f"i/o error: {exc}", EXIT_IO)
    cap_note = " (cap binding: search inconclusive beyond the cap)" if result.cap_binding else ""
    print(
        f"argmax ({result.n_o_star}, {result.n_s_star}), mean SINR {result.j_star:.6g} "
        f"[{result.j_star_ci[0]:.6g}, {result.j_star_ci[1]:.6g}], {len(result.table)} pairs searched{cap_note}"
    )
    print(f"wrote {table_path} and {manifest_path}")
    return EXIT_OK


def _add_shared_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value settings file; flags win")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--drops", type=int)
    sub.add_argument("--max-drops", dest="max_drops", type=int)
    sub.add_argument("--altitude-km", dest="altitude_km", type=float)
    sub.add_argument("--inclination-deg", dest="inclination_deg", type=float)
    sub.add_argument("--latitude-deg", dest="latitude_deg", type=float)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--gt", type=float)
    sub.add_argument("--gr", type=float)
    sub.add_argument("--dg-km", dest="dg_km", type=float)
    sub.add_argument("--snr-dmin-db", dest="snr_dmin_db", type=float)
    sub.add_argument("--tau-db", dest="tau_db", type=float)
    sub.add_argument("--policies")
    sub.add_argument("--scaling-c", dest="scaling_c", type=float)
    sub.add_argument("--grid-res", dest="grid_res", type=int)
    sub.add_argument("--out-dir", dest="out_dir")
    sub.add_argument(
        "--noise-includes-boost", dest="noise_includes_boost",
        choices=["true", "false"], default=None,
    )
    sub.add_argument("--fading")
    sub.add_argument("--n-max-cap", dest="n_max_cap", type=int)
    sub.add_argument("--ladder", help="constellation sizes as NxM,NxM,...")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="walkerdense", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="run the densification sweep", parents=[])
    _add_shared_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    bounds = subs.add_parser("bounds", help="estimate, verify, and tabulate bound constants")
    _add_shared_flags(bounds)
    bounds.set_defaults(func=cmd_bounds)

    check = subs.add_parser("check", help="validate scaling laws against a sweep")
    _add_shared_flags(check)
    check.add_argument("--sweep-csv", dest="sweep_csv")
    check.add_argument("--certificate")
    check.set_defaults(func=cmd_check)

    optimize = subs.add_parser("optimize", help="finite search for the mean-SINR maximizer")
    _add_shared_flags(optimize)
    optimize.add_argument("--certificate")
    optimize.set_defaults(func=cmd_optimize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
