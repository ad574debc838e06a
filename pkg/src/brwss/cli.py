"""Command-line front end: predictions, simulation ensembles, ballot tables, figures.

Owns every file format the tool writes.  CSV dialect: comma-separated, '.'
decimal point, mandatory header row, UTF-8, LF line endings, no quoting (data
columns never contain free text).  Every output file is accompanied by (or
embeds) a run manifest holding the tool version, the subcommand, a full
config echo, the master seed and RNG name, timestamps, and any
hypotheses-violated warnings, which is enough to reproduce the data files
byte-exactly.

Exit codes: 0 success, 2 usage/config error, 3 numeric failure.
"""

from __future__ import annotations

import enum
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__, ballot as ballot_mod
from .errors import BrwssError, NoRootError, QuadratureError, RegimeError
from .model import ModelParams
from .numerics import (E, predict_fast, predict_slow, predict_ultraslow,
                       regime_constants, solve_first_moment)
from .simulate import RNG_NAME, SimConfig, SimMode, run_ensemble

FIG1A_HEADER = ["rho", "x0", "r"]
FIG1B_HEADER = ["m", "t_root", "t_expansion"]
FIG2_HEADER = ["rho", "t_root"]
PREDICT_HEADER = ["b", "d", "m", "rho", "regime", "t_root", "t_predicted",
                  "term_leading", "term_m", "term_correction", "warnings"]
SAMPLES_HEADER = ["replica", "hit_time", "censoring", "events", "peak_pop"]


@dataclass
class RunManifest:
    tool_version: str
    subcommand: str
    config: dict
    master_seed: int | None
    rng_name: str | None
    started_at: str
    finished_at: str = ""
    hypotheses_warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _manifest(subcommand: str, config: dict, master_seed=None, rng_name=None) -> RunManifest:
    return RunManifest(tool_version=__version__, subcommand=subcommand,
                       config=config, master_seed=master_seed, rng_name=rng_name,
                       started_at=datetime.now(timezone.utc).isoformat())


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows):
    """Write the package CSV dialect; floats use shortest round-trip repr."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_csv(path):
    """Read back a CSV written by write_csv: (header, list of string rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise click.ClickException(f"{path}: empty CSV")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def _write_manifest(path: Path, manifest: RunManifest):
    manifest.finished_at = datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config_file(path):
    """Simple key=value config file; '#' starts a comment line."""
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"config file {path}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONFIG_CASTS = {
    "b": int, "d": int, "m": int, "replicas": int, "pop_cap": int, "seed": int,
    "exact_max_n": int,
    "lambda1": float, "lambda2": float, "rho": float, "t_max_mult": float,
    "regime": str, "format": str, "mode": str, "m_range": str, "rho_range": str,
    "rho_points": int, "raw_time": lambda s: s.lower() in ("1", "true", "yes"),
    "cover": lambda s: s.lower() in ("1", "true", "yes"),
}


_PARAM_ALIASES = {"format": "fmt"}  # dict key -> click parameter name


def _merge_config(ctx_params: dict, config_path) -> dict:
    """Precedence: explicit flags > config file > defaults."""
    merged = dict(ctx_params)
    if not config_path:
        return merged
    file_vals = _load_config_file(config_path)
    ctx = click.get_current_context()
    for key, raw in file_vals.items():
        if key not in merged:
            raise click.UsageError(f"config file: unknown key {key!r}")
        param = _PARAM_ALIASES.get(key, key)
        if ctx.get_parameter_source(param) == click.core.ParameterSource.DEFAULT:
            cast = _CONFIG_CASTS.get(key, str)
            try:
                merged[key] = cast(raw)
            except ValueError as exc:
                raise click.UsageError(f"config file: bad value for {key}: {raw!r} ({exc})")
    return merged


def _resolve_params(b, d, lambda1, lambda2, rho) -> ModelParams:
    if rho is not None:
        if lambda1 is not None or lambda2 is not None:
            raise click.UsageError("--rho is exclusive with --lambda1/--lambda2")
        return ModelParams.from_rho(b, d, rho)
    if lambda1 is None:
        raise click.UsageError("either --rho or --lambda1 (with optional --lambda2) is required")
    return ModelParams(b, d, lambda1, 1.0 if lambda2 is None else lambda2)


def _parse_range(spec: str, name: str) -> tuple[float, float]:
    try:
        lo, _, hi = spec.partition(":")
        return float(lo), float(hi)
    except ValueError:
        raise click.UsageError(f"--{name} expects LO:HI, got {spec!r}")


class _Exit(enum.IntEnum):
    OK = 0
    USAGE = 2
    NUMERIC = 3


def _numeric_guard(fn):
    """Map package errors to exit codes: regime/config -> 2, numeric -> 3."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NoRootError, QuadratureError) as exc:
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(_Exit.NUMERIC)
        except RegimeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_Exit.USAGE)
        except BrwssError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_Exit.USAGE)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """First-passage-time predictions and simulation for branching random
    walks on the b-ary hypercube."""


def _predict_one(params: ModelParams, m: int, regime: str, raw_time: bool):
    """One prediction record as a list matching PREDICT_HEADER."""
    rho = params.rho()
    scale = 1.0 / params.lambda2 if raw_time else 1.0

    if m == 0:
        return [params.b, params.d, 0, rho, "trivial", 0.0, 0.0, 0.0, 0.0, 0.0,
                "m=0: first passage is immediate by convention"], []

    if regime == "auto":
        if rho > E:
            regime = "fast"
        else:
            regime = "slow"

    if regime == "slow":
        pred = predict_slow(params.rescaled(), m)
        terms = dict(pred.decomposition)
        leading, term_m, corr = terms["x0*d"], terms["r*m"], 0.0
    elif regime == "fast":
        pred = predict_fast(params.rescaled(), m)
        leading, term_m, corr = pred.t_predicted, 0.0, 0.0
    elif regime == "ultraslow":
        if params.b != 2:
            raise RegimeError("the ultra-slow predictor supports b=2 only")
        pred = predict_ultraslow(rho, params.d, m)
        terms = dict(pred.decomposition)
        leading, term_m, corr = terms["d*log2/log(rho)"], 0.0, terms["correction"]
    else:
        raise click.UsageError(f"unknown regime {regime!r}")

    t_root = pred.t_first_moment if pred.t_first_moment is not None else math.nan
    row = [params.b, params.d, m, rho, pred.regime.value,
           t_root * scale, pred.t_predicted * scale,
           leading * scale, term_m * scale, corr * scale,
           ";".join(pred.warnings) if pred.warnings else ""]
    return row, list(pred.warnings)


@main.command("predict")
@click.option("--b", type=int, default=2, show_default=True)
@click.option("--d", type=int, required=True)
@click.option("--m", type=int, default=None)
@click.option("--m-range", type=str, default=None, help="A:B inclusive integer range")
@click.option("--lambda1", type=float, default=None)
@click.option("--lambda2", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--rho-range", type=str, default=None, help="LO:HI sweep of rho")
@click.option("--rho-points", type=int, default=25, show_default=True)
@click.option("--regime", type=click.Choice(["auto", "slow", "fast", "ultraslow"]),
              default="auto", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--raw-time", is_flag=True, help="report times in the caller's units (divide by lambda2)")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="write to a file (with a manifest sidecar) instead of stdout")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value config file; flags take precedence")
@_numeric_guard
def cmd_predict(b, d, m, m_range, lambda1, lambda2, rho, rho_range, rho_points,
                regime, fmt, raw_time, out, config_path):
    """Emit regime predictions, one record per m (or per rho in a sweep)."""
    cfg = _merge_config(dict(b=b, d=d, m=m, m_range=m_range, lambda1=lambda1,
                             lambda2=lambda2, rho=rho, rho_range=rho_range,
                             rho_points=rho_points, regime=regime, format=fmt,
                             raw_time=raw_time), config_path)
    b, d, m, m_range = cfg["b"], cfg["d"], cfg["m"], cfg["m_range"]
    lambda1, lambda2, rho = cfg["lambda1"], cfg["lambda2"], cfg["rho"]
    rho_range, rho_points = cfg["rho_range"], cfg["rho_points"]
    regime, fmt, raw_time = cfg["regime"], cfg["format"], cfg["raw_time"]

    rows = []
    warnings: list[str] = []
    if rho_range is not None:
        if m is None:
            raise click.UsageError("--rho-range requires --m")
        lo, hi = _parse_range(rho_range, "rho-range")
        for r in np.linspace(lo, hi, rho_points):
            params = ModelParams.from_rho(b, d, float(r))
            row, warn = _predict_one(params, m, regime, raw_time)
            rows.append(row)
            warnings.extend(warn)
    else:
        params = _resolve_params(b, d, lambda1, lambda2, rho)
        if m_range is not None:
            lo, hi = _parse_range(m_range, "m-range")
            ms = range(int(lo), int(hi) + 1)
        elif m is not None:
            ms = [m]
        else:
            raise click.UsageError("one of --m or --m-range is required")
        for mm in ms:
            row, warn = _predict_one(params, mm, regime, raw_time)
            rows.append(row)
            warnings.extend(warn)

    manifest = _manifest("predict", {k: v for k, v in cfg.items()}, None, None)
    manifest.hypotheses_warnings = sorted(set(warnings))
    if fmt == "json":
        payload = {"records": [dict(zip(PREDICT_HEADER, row)) for row in rows],
                   "manifest": manifest.to_json()}
        manifest.finished_at = datetime.now(timezone.utc).isoformat()
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)
    else:
        if out:
            write_csv(out, PREDICT_HEADER, rows)
            _write_manifest(Path(out).with_suffix(Path(out).suffix + ".manifest.json"),
                            manifest)
        else:
            click.echo(",".join(PREDICT_HEADER))
            for row in rows:
                click.echo(",".join(_fmt(x) for x in row))


@main.command("simulate")
@click.option("--b", type=int, default=2, show_default=True)
@click.option("--d", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--lambda1", type=float, default=None)
@click.option("--lambda2", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--replicas", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--t-max-mult", type=float, default=4.0, show_default=True,
              help="time horizon as a multiple of the first-moment prediction")
@click.option("--pop-cap", type=int, default=10 ** 7, show_default=True)
@click.option("--mode", type=click.Choice(["projected", "full"]), default="projected",
              show_default=True)
@click.option("--cover", is_flag=True, help="measure cover times (full mode)")
@click.option("--raw-time", is_flag=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@_numeric_guard
def cmd_simulate(b, d, m, lambda1, lambda2, rho, replicas, seed, t_max_mult,
                 pop_cap, mode, cover, raw_time, out_dir, config_path):
    """Run a simulation ensemble; write samples CSV and stats JSON."""
    cfg = _merge_config(dict(b=b, d=d, m=m, lambda1=lambda1, lambda2=lambda2,
                             rho=rho, replicas=replicas, seed=seed,
                             t_max_mult=t_max_mult, pop_cap=pop_cap, mode=mode,
                             cover=cover, raw_time=raw_time), config_path)
    params = _resolve_params(cfg["b"], cfg["d"], cfg["lambda1"], cfg["lambda2"], cfg["rho"])
    rescaled = params.rescaled()
    sim_mode = SimMode.PROJECTED if cfg["mode"] == "projected" else SimMode.FULL_GENOTYPE
    if cfg["cover"] and sim_mode is not SimMode.FULL_GENOTYPE:
        raise click.UsageError("--cover requires --mode full")

    if cfg["m"] > 0:
        t_ref = solve_first_moment(rescaled, cfg["m"])
    else:
        t_ref = 1.0
    if cfg["cover"]:
        # cover times sit on the d scale; give them generous room
        t_ref = max(t_ref, 3.0 * solve_first_moment(rescaled, max(1, cfg["d"] // 2)))
    sim_cfg = SimConfig(params=rescaled, m=cfg["m"], t_max=cfg["t_max_mult"] * t_ref,
                        population_cap=cfg["pop_cap"], master_seed=cfg["seed"],
                        replicas=cfg["replicas"], mode=sim_mode)
    stats = run_ensemble(sim_cfg, kind="cover" if cfg["cover"] else "fpt")

    scale = 1.0 / params.lambda2 if cfg["raw_time"] else 1.0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, s in enumerate(stats.samples):
        rows.append([i,
                     "" if s.hit_time is None else repr(s.hit_time * scale),
                     s.censoring_reason.value, s.events_processed, s.peak_population])
    write_csv(out / "samples.csv", SAMPLES_HEADER, rows)

    manifest = _manifest("simulate", {k: v for k, v in cfg.items()},
                         master_seed=cfg["seed"], rng_name=RNG_NAME)
    manifest.finished_at = datetime.now(timezone.utc).isoformat()
    quantiles = stats.quantiles
    if quantiles is not None:
        quantiles = {k: v * scale for k, v in quantiles.items()}
    payload = {
        "quantiles": quantiles,
        "censored_count": stats.censored_count,
        "replicas": cfg["replicas"],
        "replica_seed_rule": stats.replica_seed_rule,
        "time_units": "raw" if cfg["raw_time"] else "rescaled (lambda2=1)",
        "manifest": manifest.to_json(),
    }
    with open(out / "stats.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {out / 'samples.csv'} and {out / 'stats.json'}")


@main.command("ballot")
@click.option("--n-grid", type=str, default="100,1000", show_default=True)
@click.option("--lambda-grid", type=str, default="1", show_default=True)
@click.option("--replicas", type=int, default=10 ** 5, show_default=True)
@click.option("--exact-max-n", type=int, default=1024, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="ballot.csv",
              show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@_numeric_guard
def cmd_ballot(n_grid, lambda_grid, replicas, exact_max_n, seed, out, config_path):
    """Smirnov-scaling table: boundary non-crossing probabilities on a grid."""
    cfg = _merge_config(dict(n_grid=n_grid, lambda_grid=lambda_grid, replicas=replicas,
                             exact_max_n=exact_max_n, seed=seed), config_path)
    try:
        ns = [int(x) for x in str(cfg["n_grid"]).split(",") if x]
        lams = [float(x) for x in str(cfg["lambda_grid"]).split(",") if x]
    except ValueError as exc:
        raise click.UsageError(f"bad grid: {exc}")
    rng = np.random.default_rng(cfg["seed"])
    header = ["lambda", "n", "p_mc", "std_err", "normalized", "p_exact", "note"]
    rows = []
    skipped = []
    for lam in lams:
        for n in ns:
            if not 1.0 <= lam <= math.sqrt(n):
                rows.append([lam, n, math.nan, math.nan, math.nan, math.nan,
                             "skipped:lambda-exceeds-sqrt-n"])
                skipped.append(f"lambda={lam} n={n}")
                continue
            cells = ballot_mod.smirnov_scaling_report([lam], [n], cfg["replicas"], rng)
            cell = cells[0]
            p_exact = math.nan
            if n <= cfg["exact_max_n"]:
                p_exact = ballot_mod.ballot_exact(ballot_mod.BallotQuery(n=n, a=lam, b_end=lam))
            rows.append([cell.lam, cell.n, cell.p_hat, cell.std_err,
                         cell.normalized, p_exact, ""])
    manifest = _manifest("ballot", {k: v for k, v in cfg.items()},
                         master_seed=cfg["seed"], rng_name="numpy PCG64")
    manifest.hypotheses_warnings = [f"skipped cell {s}" for s in skipped]
    write_csv(out, header, rows)
    _write_manifest(Path(out).with_suffix(Path(out).suffix + ".manifest.json"), manifest)
    click.echo(f"wrote {out}")


@main.command("figures")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--fig2-d", type=int, default=1000, show_default=True,
              help="d for the rho sweep (not stated by the source figure)")
@_numeric_guard
def cmd_figures(out_dir, fig2_d):
    """Write the figure CSV bundle: fig1a.csv, fig1b.csv, fig2.csv."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        click.echo(f"error: cannot write to {out_dir}: {exc}", err=True)
        sys.exit(_Exit.USAGE)

    manifest = _manifest("figures", {"out": str(out_dir), "fig2_d": fig2_d})

    # fig1a: x0 and r against rho on [1.035, 2.5] for b=2
    rows = []
    for rho in np.linspace(1.035, 2.5, 150):
        rc = regime_constants(2, float(rho))
        rows.append([float(rho), rc.x0, rc.r])
    write_csv(out / "fig1a.csv", FIG1A_HEADER, rows)

    # fig1b: first-moment root vs affine expansion, rho=2, b=4, d=10^4
    # (at m=0 the strictly positive root of the equation is exactly x0*d)
    params = ModelParams.from_rho(4, 10 ** 4, 2.0)
    rc = regime_constants(4, 2.0)
    rows = [[0, rc.x0 * params.d, rc.x0 * params.d]]
    for m in range(1, 501):
        t_root = solve_first_moment(params, m)
        rows.append([m, t_root, rc.x0 * params.d + rc.r * m])
    write_csv(out / "fig1b.csv", FIG1B_HEADER, rows)

    # fig2: root of the first-moment equation across rho in [2, 5], b=2, m=1
    params2 = ModelParams.from_rho(2, fig2_d, 2.0)
    rows = []
    for rho in np.linspace(2.0, 5.0, 61):
        p = ModelParams.from_rho(2, fig2_d, float(rho))
        rows.append([float(rho), solve_first_moment(p, 1)])
    write_csv(out / "fig2.csv", FIG2_HEADER, rows)

    manifest.config["fig2_m"] = 1
    _write_manifest(out / "figures.manifest.json", manifest)
    click.echo(f"wrote {out / 'fig1a.csv'}, {out / 'fig1b.csv'}, {out / 'fig2.csv'}")


if __name__ == "__main__":
    main()
