"""Command-line front end.

Every command resolves its arguments (and any input files) into a plain
dictionary, writes its outputs atomically, and records that dictionary in
``manifest.json`` so ``wirechan replay manifest.json`` reproduces the run
without the original inputs.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from wirechan import __version__
from wirechan.channel import (
    ImpulseResponse,
    NyquistKernel,
    channel_power_gain,
    equivalent_response,
    load_impulse_response,
    rms_delay_spread,
)
from wirechan.generator import (
    PDP_FAMILIES,
    GeneratorConfig,
    generate_ensemble,
    make_rng,
    read_ensemble_csv,
)
from wirechan.link import (
    DEFAULT_M_GRID,
    DEFAULT_SAMPLE_PERIOD,
    CapacityConfig,
    capacity_gain_correlation,
    capacity_report,
    cdf_to_csv,
    best_row,
    coverage_cdf,
    ensemble_capacities,
    sweep_cp,
    sweep_to_csv,
)
from wirechan.lptv import generate_bank
from wirechan.profiles import (
    ProfileConfigError,
    get_profile,
    parse_profiles,
    profile_to_config,
    profile_to_dict,
)
from wirechan.regression import robust_regress
from wirechan.stats import (
    battery_rejects,
    boxplot_outliers,
    ks_two_sample,
    lognormality_battery,
    summary_statistics,
)

OUT_ENV = "WIRECHAN_OUT"
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- output helpers -----------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- argument resolution ------------------------------------------------------

GEN_KEYS = {"profile": str, "pdp": str, "taps": int, "decay": float, "count": int,
            "seed": int, "truncate": None, "complex_taps": None, "line_form": str}


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _read_config(path):
    """Profiles and the optional ``[generator]`` section of a config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        profiles = parse_profiles(text)
    except ProfileConfigError as exc:
        raise UsageError(f"{path}: {exc}") from None
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    gen = {}
    if cp.has_section("generator"):
        for key, raw in cp.items("generator"):
            if key not in GEN_KEYS:
                raise UsageError(f"{path}: unknown key {key!r} in [generator]")
            kind = GEN_KEYS[key]
            try:
                gen[key] = _bool(raw) if kind is None else kind(raw.strip())
            except ValueError as exc:
                raise UsageError(f"{path}: [generator] {key}: {exc}") from None
    return profiles, gen


def _resolve_profile(name, config_path):
    profiles, gen = ({}, {}) if config_path is None else _read_config(config_path)
    name = name or gen.get("profile") or "ih-plc-urban"
    key = name.strip().lower()
    if key in profiles:
        return profiles[key], gen
    if len(profiles) == 1 and name is None:
        return next(iter(profiles.values())), gen
    try:
        return get_profile(name), gen
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _pick(args, gen, key, default):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return gen.get(key, default)


def _generator_settings(args, truncate_default):
    profile, gen = _resolve_profile(args.profile, args.config)
    settings = {
        "profile": profile.name,
        "pdp": _pick(args, gen, "pdp", "gaussian-random"),
        "taps": _pick(args, gen, "taps", 50),
        "decay": _pick(args, gen, "decay", 10.0),
        "count": _pick(args, gen, "count", 1000),
        "seed": _pick(args, gen, "seed", 0),
        "truncate": _pick(args, gen, "truncate", truncate_default),
        "complex_taps": _pick(args, gen, "complex_taps", False),
        "line_form": _pick(args, gen, "line_form", None),
    }
    if settings["pdp"] not in PDP_FAMILIES:
        raise UsageError(f"unknown PDP family {settings['pdp']!r}; choose from {PDP_FAMILIES}")
    return settings, profile


def _gen_config(s, profile):
    try:
        return GeneratorConfig(profile, s["pdp"], s["taps"], s["decay"], s["seed"],
                               s["truncate"], s["complex_taps"], s["line_form"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _capacity_settings(args):
    return {"W_hz": args.bandwidth, "gamma_db": args.gamma_db,
            "efficiency_cap": args.efficiency_cap, "band_start_hz": args.band[0],
            "band_end_hz": args.band[1], "n_subcarriers": args.subcarriers,
            "pt_dbm_hz": args.pt, "n0_dbm_hz": args.n0}


def _load_channel(path, tap_spacing=None):
    try:
        return load_impulse_response(path, tap_spacing).to_dict()
    except OSError as exc:
        raise UsageError(f"cannot read channel {path}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path}: malformed channel file: {exc}") from None


def _load_columns(path):
    try:
        return read_ensemble_csv(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path}: malformed CSV: {exc}") from None


def _column(cols, name, path):
    if name not in cols:
        raise UsageError(f"{path}: no column {name!r} (have {', '.join(cols)})")
    return [float(v) for v in cols[name]]


def _parse_grid(text):
    if text == "default":
        return list(DEFAULT_M_GRID), None
    m_grid, nu_grid = list(DEFAULT_M_GRID), None
    try:
        for part in text.split(";"):
            key, _, vals = part.partition("=")
            nums = [int(v) for v in vals.split(",") if v.strip()]
            if key.strip() == "M":
                m_grid = nums
            elif key.strip() == "nu":
                nu_grid = nums
            else:
                raise ValueError(part)
    except ValueError:
        raise UsageError(f"bad --grid value {text!r}; use 'default' or 'M=256,1024;nu=0,8,16'") from None
    return m_grid, nu_grid


def resolve(args) -> dict:
    cmd = args.command
    r = {"command": cmd}
    if cmd in ("generate", "coverage", "lptv"):
        settings, profile = _generator_settings(args, truncate_default=(cmd == "coverage"))
        r.update(settings)
        r["profile_config"] = profile_to_config(profile)
        if cmd == "generate":
            r["save_channels"] = bool(args.save_channels)
        if cmd == "coverage":
            r["capacity"] = _capacity_settings(args)
        if cmd == "lptv":
            r.update(harmonics=args.harmonics, step_db=args.step_db, period_s=args.period)
            _gen_config(settings, profile)
    elif cmd in ("metrics", "capacity", "sweep"):
        r["channel_file"] = str(args.channel)
        r["channel"] = _load_channel(args.channel, getattr(args, "tap_spacing", None))
        if cmd == "capacity":
            r["capacity"] = _capacity_settings(args)
        if cmd == "sweep":
            r["capacity"] = _capacity_settings(args)
            r["M_grid"], r["nu_grid"] = _parse_grid(args.grid)
            r["sample_period_s"] = args.sample_period
            r["roll_off"] = args.roll_off
    elif cmd == "regress":
        cols = _load_columns(args.input)
        r.update(input_file=str(args.input), form=args.form, x_column=args.x, y_column=args.y,
                 x=_column(cols, args.x, args.input), y=_column(cols, args.y, args.input))
    elif cmd == "tests":
        cols = _load_columns(args.input)
        r.update(input_file=str(args.input), column=args.column, db=bool(args.db),
                 negate=bool(args.negate), remove_outliers=bool(args.remove_outliers),
                 calibration=args.calibration,
                 samples=_column(cols, args.column, args.input))
        if args.ks_column:
            r["ks_column"] = args.ks_column
            r["ks_samples"] = _column(cols, args.ks_column, args.input)
    return r


# -- command bodies: resolved dict -> {filename: text} ------------------------

def _profile_from(r):
    return next(iter(parse_profiles(r["profile_config"]).values()))


def _capacity(r):
    return CapacityConfig(**r["capacity"])


def _ensemble(r):
    profile = _profile_from(r)
    cfg = GeneratorConfig(profile, r["pdp"], r["taps"], r["decay"], r["seed"],
                          r["truncate"], r["complex_taps"], r["line_form"])
    return generate_ensemble(cfg, r["count"], r["seed"])


def run_generate(r):
    ens = _ensemble(r)
    files = {"ensemble.csv": ens.to_csv()}
    if r.get("save_channels"):
        for i, ch in enumerate(ens.channels):
            files[f"channels/{i:05d}.json"] = ch.to_json() + "\n"
    return files, f"{len(ens)} realizations of {r['profile']} ({r['pdp']})"


def run_coverage(r):
    ens = _ensemble(r)
    cap = _capacity(r)
    caps = ensemble_capacities(ens, cap)
    rates, probs = coverage_cdf(ens, cap, capacities=caps)
    summary = {"n": len(ens), "median_bps": float(np.median(caps)),
               "mean_bps": float(np.mean(caps))}
    if len(ens) >= 3:
        cg, cr = capacity_gain_correlation(ens, cap, capacities=caps)
        summary.update(corr_gain=cg, corr_rmsds=cr)
    return ({"coverage.csv": cdf_to_csv(rates, probs), "ensemble.csv": ens.to_csv(),
             "coverage_summary.json": _dumps(summary)},
            f"median capacity {summary['median_bps'] / 1e6:.1f} Mbit/s")


def run_metrics(r):
    h = ImpulseResponse.from_dict(r["channel"])
    g, gdb = channel_power_gain(h)
    out = {"gain": g, "gain_db": gdb, "rmsds_s": rms_delay_spread(h),
           "L": h.L, "tap_spacing_s": h.tap_spacing}
    return {"metrics.json": _dumps(out)}, f"gain {gdb:.2f} dB, RMS-DS {out['rmsds_s']:.3e} s"


def run_capacity(r):
    h = ImpulseResponse.from_dict(r["channel"])
    rep = capacity_report(h, _capacity(r))
    return {"capacity.json": _dumps(rep)}, f"capacity {rep['capacity_bps'] / 1e6:.2f} Mbit/s"


def run_sweep(r):
    h = ImpulseResponse.from_dict(r["channel"])
    ts = r["sample_period_s"]
    if not np.isclose(h.tap_spacing, ts, rtol=1e-9):
        h = equivalent_response(h, NyquistKernel(ts, r["roll_off"]))
    rows = sweep_cp(h, _capacity(r), r["M_grid"], r["nu_grid"])
    M, nu, rate = best_row(rows)
    return {"sweep.csv": sweep_to_csv(rows)}, f"optimum M={M}, nu={nu}: {rate / 1e6:.2f} Mbit/s"


def run_regress(r):
    line = robust_regress(r["x"], r["y"], r["form"])
    d = line.diagnostics
    out = {"form": line.form, "slope": line.slope, "intercept": line.intercept,
           "correlation": line.correlation, "iterations": d.iterations,
           "converged": d.converged, "n": len(r["x"])}
    csv_text = ("form,slope,intercept,correlation,iterations,converged\n"
                f"{line.form},{float(line.slope)!r},{float(line.intercept)!r},"
                f"{float(line.correlation)!r},"
                f"{d.iterations},{int(d.converged)}\n")
    return ({"regression.json": _dumps(out), "regression.csv": csv_text},
            f"{line.form}: slope {line.slope:.5g}, intercept {line.intercept:.5g}")


def run_tests(r):
    x = np.asarray(r["samples"])
    if r["negate"]:
        x = -x
    if r["db"]:
        x = 10.0 ** (x / 10.0)
    removed = []
    if r["remove_outliers"]:
        x, rem = boxplot_outliers(x)
        removed = rem.tolist()
    reports = lognormality_battery(x, calibration=r["calibration"])
    records = [rep.to_dict() for rep in reports]
    if "ks_samples" in r:
        records.append(ks_two_sample(np.log(x) if r["db"] else x, r["ks_samples"]).to_dict())
    s = summary_statistics(x)
    out = {"tests": records, "battery_rejects": battery_rejects(reports),
           "removed_outliers": removed, "summary": s.__dict__}
    lines = ["test_name,statistic,p_value,reject_at_5pct"]
    for rec in records:
        rej = "" if rec["reject_at_5pct"] is None else int(rec["reject_at_5pct"])
        stat = "" if rec["statistic"] is None else repr(rec["statistic"])
        p = "" if rec["p_value"] is None else repr(rec["p_value"])
        lines.append(f"{rec['test_name']},{stat},{p},{rej}")
    verdict = "rejects" if out["battery_rejects"] else "accepts"
    return ({"tests.json": _dumps(out), "tests.csv": "\n".join(lines) + "\n"},
            f"battery {verdict} lognormality (n={x.size})")


def run_lptv(r):
    profile = _profile_from(r)
    cfg = GeneratorConfig(profile, r["pdp"], r["taps"], r["decay"], r["seed"],
                          r["truncate"], r["complex_taps"], r["line_form"])
    ch = generate_bank(cfg, r["harmonics"], r["step_db"], make_rng(r["seed"]), r["period_s"])
    return {"lptv.json": ch.to_json() + "\n"}, f"{len(ch.harmonics)} harmonic responses"


RUNNERS = {"generate": run_generate, "metrics": run_metrics, "capacity": run_capacity,
           "coverage": run_coverage, "regress": run_regress, "tests": run_tests,
           "sweep": run_sweep, "lptv": run_lptv}


def execute(resolved: dict, out: Path) -> list[Path]:
    files, message = RUNNERS[resolved["command"]](resolved)
    manifest = {"tool": "wirechan", "version": __version__, "command": resolved["command"],
                "seed": resolved.get("seed", 0), "resolved": resolved,
                "outputs": sorted(files)}
    if "profile_config" in resolved:
        manifest["profile"] = profile_to_dict(_profile_from(resolved))
    files["manifest.json"] = _dumps(manifest)
    written = []
    for name, text in files.items():
        path = out / name
        _write_atomic(path, text)
        written.append(path)
    print(f"{resolved['command']}: {message} -> {out}")
    return written


# -- parser -------------------------------------------------------------------

def _add_out(p):
    p.add_argument("--out", type=Path, default=None,
                   help=f"output directory (default ${OUT_ENV} or ./wirechan-out)")


def _add_generator(p):
    p.add_argument("--profile", help="built-in profile name or a section in --config")
    p.add_argument("--config", help="profile/generator override file (INI style)")
    p.add_argument("--pdp", choices=PDP_FAMILIES)
    p.add_argument("--taps", type=int, help="tap count L for multi-tap families")
    p.add_argument("--decay", type=float, help="exponential PDP decay in taps")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--truncate", action=argparse.BooleanOptionalAction, default=None,
                   help="redraw attenuation outside the profile's table bounds")
    p.add_argument("--complex", dest="complex_taps", action="store_true", default=None)
    p.add_argument("--line-form", dest="line_form", choices=("linear", "log"))


def _add_capacity(p):
    p.add_argument("--bandwidth", type=float, default=28e6, help="W in Hz")
    p.add_argument("--gamma-db", type=float, default=7.0)
    p.add_argument("--efficiency-cap", type=float, default=12.0)
    p.add_argument("--band", type=float, nargs=2, default=(2e6, 30e6), metavar=("LO", "HI"))
    p.add_argument("--subcarriers", type=int, default=1024)
    p.add_argument("--pt", type=float, default=-55.0, help="transmit PSD, dBm/Hz")
    p.add_argument("--n0", type=float, default=-120.0, help="noise PSD, dBm/Hz")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wirechan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wirechan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a channel ensemble")
    _add_generator(p)
    p.add_argument("--save-channels", action="store_true")
    _add_out(p)

    p = sub.add_parser("coverage", help="capacity coverage CDF of an ensemble")
    _add_generator(p)
    _add_capacity(p)
    _add_out(p)

    for name, hlp in (("metrics", "gain and RMS-DS of a channel file"),
                      ("capacity", "capacity of a channel file")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--channel", required=True, type=Path)
        p.add_argument("--tap-spacing", type=float)
        if name == "capacity":
            _add_capacity(p)
        _add_out(p)

    p = sub.add_parser("sweep", help="(M, nu) rate sweep for a channel file")
    p.add_argument("--channel", required=True, type=Path)
    p.add_argument("--tap-spacing", type=float)
    p.add_argument("--grid", default="default")
    p.add_argument("--sample-period", type=float, default=DEFAULT_SAMPLE_PERIOD)
    p.add_argument("--roll-off", type=float, default=0.2)
    _add_capacity(p)
    _add_out(p)

    p = sub.add_parser("regress", help="robust gain/RMS-DS regression from a CSV")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--x", default="gain_db")
    p.add_argument("--y", default="rmsds_us")
    p.add_argument("--form", choices=("linear", "log"), default="linear")
    _add_out(p)

    p = sub.add_parser("tests", help="lognormality battery on a CSV column")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--column", default="gain_db")
    p.add_argument("--db", action="store_true", help="column is in dB; test 10^(x/10)")
    p.add_argument("--negate", action="store_true", help="negate before use (attenuation)")
    p.add_argument("--remove-outliers", action="store_true")
    p.add_argument("--calibration", choices=("auto", "asymptotic", "monte-carlo"),
                   default="auto")
    p.add_argument("--ks-column", help="also KS-compare against this column")
    _add_out(p)

    p = sub.add_parser("lptv", help="generate an LPTV harmonic bank")
    _add_generator(p)
    p.add_argument("--harmonics", type=int, default=3)
    p.add_argument("--step-db", type=float, default=10.0)
    p.add_argument("--period", type=float, default=1.0 / 120.0, help="T0 in seconds")
    _add_out(p)

    p = sub.add_parser("replay", help="rerun from a manifest.json")
    p.add_argument("manifest", type=Path)
    _add_out(p)
    return parser


def _without_out(argv):
    # the destination does not affect results, so it stays out of the manifest
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(a)
    return kept


def _out_dir(args) -> Path:
    if args.out is not None:
        return args.out
    return Path(os.environ.get(OUT_ENV, "wirechan-out"))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "replay":
            try:
                resolved = json.loads(args.manifest.read_text())["resolved"]
            except (OSError, ValueError, KeyError) as exc:
                raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from None
        else:
            resolved = resolve(args)
            resolved["argv"] = _without_out(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        execute(resolved, _out_dir(args))
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
