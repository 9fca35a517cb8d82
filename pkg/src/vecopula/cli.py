"""Command-line front end: ranks, fits, simulation, density grids and tau tables.

Input is a CSV of (already filtered) residuals with a header row and an
optional leading ISO-8601 date column.  The analysis is described by one JSON
config; ``--seed`` and ``--out`` override the matching config keys.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from vecopula._validation import BlockStructure
from vecopula.estimation import fit_gaussian_vc_mom, fit_nesting_copula, kendall_transform
from vecopula.families.classical import classical_copula, tau_from_theta, theta_from_tau
from vecopula.families.elliptical import StudentVCParams, student_vc_density, student_vc_sample
from vecopula.families.gaussian import GaussianVCParams, gaussian_vc_density, gaussian_vc_sample
from vecopula.families.kendall import KendallVCParams, kendall_vc_density, kendall_vc_sample
from vecopula.transport import GRID_SCHEMES, block_vector_ranks

logger = logging.getLogger("vecopula")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4
NESTING_FAMILIES = ("clayton", "frank", "gaussian", "gumbel")
MAX_TENSOR_DIM = 6
_FLOAT_FMT = "%.17g"


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class NumericalError(Exception):
    pass


@dataclass
class AnalysisConfig:
    input: Path | None = None
    blocks: dict[str, list[str]] = field(default_factory=dict)
    periods: dict[str, tuple[str | None, str | None]] = field(default_factory=dict)
    families: list[str] = field(default_factory=lambda: list(NESTING_FAMILIES))
    method: str = "mle"
    grid: str = "auto"
    seed: int = 0
    out: Path = Path("vecopula_out")
    model: dict = field(default_factory=dict)
    density_points: int = 9

    @property
    def dims(self):
        if self.blocks:
            return tuple(len(cols) for cols in self.blocks.values())
        dims = self.model.get("dims")
        if dims is None:
            raise ConfigError("block dimensions are needed: give 'blocks', 'model.dims' or --dims")
        return tuple(int(k) for k in dims)


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_config(path=None, overrides=None):
    """Parse and validate a JSON config; ``overrides`` are applied on top."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        _require(isinstance(raw, dict), "config must be a JSON object")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    base = Path(path).parent if path is not None else Path.cwd()

    cfg = AnalysisConfig()
    if raw.get("input") is not None:
        cfg.input = (base / raw["input"]).resolve()
    blocks = raw.get("blocks", {})
    _require(isinstance(blocks, dict), "'blocks' must map block names to column lists")
    for name, cols in blocks.items():
        _require(
            isinstance(cols, list) and cols and all(isinstance(c, str) for c in cols),
            f"block {name!r} must be a non-empty list of column names",
        )
    all_cols = [c for cols in blocks.values() for c in cols]
    _require(len(all_cols) == len(set(all_cols)), "a column appears in more than one block")
    cfg.blocks = {str(k): list(v) for k, v in blocks.items()}

    periods = raw.get("periods", {})
    _require(isinstance(periods, dict), "'periods' must map labels to [start, end] pairs")
    for label, span in periods.items():
        _require(
            isinstance(span, list) and len(span) == 2,
            f"period {label!r} must be a [start, end] pair (null for open ends)",
        )
        cfg.periods[str(label)] = (span[0], span[1])
    _check_periods(cfg.periods)

    families = raw.get("families", list(NESTING_FAMILIES))
    _require(isinstance(families, list) and families, "'families' must be a non-empty list")
    for fam in families:
        _require(fam in NESTING_FAMILIES, f"unknown nesting family {fam!r}; expected {NESTING_FAMILIES}")
    cfg.families = list(families)
    cfg.method = raw.get("method", "mle")
    _require(cfg.method in ("mle", "tau_inversion"), f"unknown method {cfg.method!r}")
    cfg.grid = raw.get("grid", "auto")
    _require(cfg.grid in GRID_SCHEMES, f"unknown grid scheme {cfg.grid!r}; expected {GRID_SCHEMES}")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and 0 <= seed < 2**64, "seed must be an unsigned 64-bit integer")
    cfg.seed = seed
    cfg.out = Path(raw.get("out", "vecopula_out"))
    if not cfg.out.is_absolute() and path is not None and (overrides or {}).get("out") is None:
        cfg.out = base / cfg.out
    cfg.model = dict(raw.get("model", {}))
    cfg.density_points = int(raw.get("density_points", 9))
    _require(cfg.density_points >= 1, "density_points must be positive")
    return cfg


def _check_periods(periods):
    spans = []
    for label, (start, end) in periods.items():
        try:
            lo = pd.Timestamp(start) if start is not None else pd.Timestamp.min
            hi = pd.Timestamp(end) if end is not None else pd.Timestamp.max
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"period {label!r} has an invalid date: {exc}") from None
        _require(lo <= hi, f"period {label!r} ends before it starts")
        spans.append((lo, hi, label))
    spans.sort()
    for (_, hi, a), (lo, _, b) in zip(spans, spans[1:]):
        _require(lo > hi, f"periods {a!r} and {b!r} overlap")


def _require_data_config(cfg):
    _require(cfg.input is not None, "config needs an 'input' CSV path")
    _require(len(cfg.blocks) >= 1, "config needs at least one block")


def read_residuals(cfg):
    """Load the input CSV, returning ``(frame, dates)``; ``dates`` may be None."""
    try:
        df = pd.read_csv(cfg.input, encoding="utf-8", on_bad_lines="error", dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise DataError(f"input file {cfg.input} does not exist") from None
    except (pd.errors.ParserError, UnicodeDecodeError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot parse {cfg.input}: {exc}") from None
    if df.shape[0] == 0:
        raise DataError(f"{cfg.input} has no data rows")

    dates = None
    first = df.columns[0]
    if first not in {c for cols in cfg.blocks.values() for c in cols}:
        parsed = pd.to_datetime(df[first], format="ISO8601", errors="coerce")
        if parsed.notna().all():
            dates = pd.DatetimeIndex(parsed)
            df = df.drop(columns=first)
        elif parsed.notna().any():
            bad = int(np.flatnonzero(parsed.isna().to_numpy())[0])
            raise DataError(f"row {bad + 2}: malformed date {df[first].iloc[bad]!r}")

    missing = [c for cols in cfg.blocks.values() for c in cols if c not in df.columns]
    if missing:
        raise DataError(f"columns {missing} are missing from {cfg.input}")
    wanted = [c for cols in cfg.blocks.values() for c in cols]
    values = df[wanted].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad_rows = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if bad_rows.size:
        r = int(bad_rows[0])
        raise DataError(f"row {r + 2}: non-numeric or non-finite value in {df[wanted].iloc[r].tolist()}")
    if cfg.periods and dates is None:
        raise DataError("periods are configured but the input has no leading date column")
    if dates is not None and not dates.is_monotonic_increasing:
        raise DataError("dates must be in increasing order")
    return pd.DataFrame(values, columns=wanted), dates


def split_periods(cfg, values, dates):
    """``[(label, frame, dates)]`` in config order; one 'all' period when none are set."""
    if not cfg.periods:
        return [("all", values, dates)]
    out = []
    for label, (start, end) in cfg.periods.items():
        mask = np.ones(len(values), dtype=bool)
        if start is not None:
            mask &= dates >= pd.Timestamp(start)
        if end is not None:
            mask &= dates <= pd.Timestamp(end)
        if not mask.any():
            raise DataError(f"period {label!r} contains no observations")
        out.append((label, values[mask].reset_index(drop=True), dates[mask]))
    return out


def _threads():
    raw = os.environ.get("VCOP_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"VCOP_THREADS must be a positive integer, got {raw!r}") from None
    _require(n >= 1, "VCOP_THREADS must be a positive integer")
    return n


def _map(fn, items):
    items = list(items)
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_atomic(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.chmod(tmp, 0o644)
    os.replace(tmp, path)


def _csv_text(frame, header_comment=None):
    body = frame.to_csv(index=False, float_format=_FLOAT_FMT, lineterminator="\n")
    return (f"# {header_comment}\n" if header_comment else "") + body


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _period_seeds(cfg, n_periods):
    return [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(n_periods)]


def _period_ranks(cfg, label, frame, seed):
    """Blockwise empirical vector ranks of one period, as an (n, d) array."""
    blocks = BlockStructure(cfg.dims)
    try:
        return block_vector_ranks(frame.to_numpy(), blocks, cfg.grid, seed)
    except ValueError as exc:
        raise DataError(f"period {label!r}: {exc}") from None
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"period {label!r}: {exc}") from None


def _ranked_periods(cfg):
    _require_data_config(cfg)
    values, dates = read_residuals(cfg)
    periods = split_periods(cfg, values, dates)
    seeds = _period_seeds(cfg, len(periods))
    ranks = _map(lambda job: _period_ranks(cfg, *job), [(lab, fr, s) for (lab, fr, _), s in zip(periods, seeds)])
    return [(lab, fr, dt, rk) for (lab, fr, dt), rk in zip(periods, ranks)]


def _safe_name(label):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


def cmd_ranks(cfg):
    written = []
    for label, frame, dates, ranks in _ranked_periods(cfg):
        base = cfg.out / "ranks" / _safe_name(label)
        combined = pd.DataFrame(ranks, columns=list(frame.columns))
        if dates is not None:
            combined.insert(0, "date", dates.strftime("%Y-%m-%d"))
        for name, cols in cfg.blocks.items():
            part = combined[(["date"] if dates is not None else []) + cols]
            path = base / f"{_safe_name(name)}.csv"
            _write_atomic(path, _csv_text(part))
            written.append(path)
        path = base / "all.csv"
        _write_atomic(path, _csv_text(combined))
        written.append(path)
    return written


def _fit_period(cfg, label, ranks):
    blocks = BlockStructure(cfg.dims)
    out = {"n": int(ranks.shape[0]), "blocks": dict(zip(cfg.blocks, blocks.dims))}
    try:
        omega = fit_gaussian_vc_mom(ranks, blocks).omega
        out["gaussian_vc"] = {"omega": omega.tolist()}
    except ValueError as exc:
        raise DataError(f"period {label!r}, Gaussian vector copula: {exc}") from None
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"period {label!r}, Gaussian vector copula: {exc}") from None
    v = kendall_transform(ranks, blocks)
    out["nesting"] = {}
    for fam in cfg.families:
        try:
            out["nesting"][fam] = fit_nesting_copula(v, fam, cfg.method).to_dict()
        except ValueError as exc:
            raise DataError(f"period {label!r}, family {fam}: {exc}") from None
        except (FloatingPointError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"period {label!r}, family {fam}: {exc}") from None
    return out


def _check_families_for_blocks(cfg):
    if len(cfg.blocks) > 2:
        bad = [f for f in cfg.families if f != "gaussian"]
        _require(not bad, f"families {bad} need exactly two blocks, config has {len(cfg.blocks)}")


def _fit_all(cfg):
    _check_families_for_blocks(cfg)
    ranked = _ranked_periods(cfg)
    fits = _map(lambda job: _fit_period(cfg, job[0], job[3]), ranked)
    return {label: fit for (label, *_), fit in zip(ranked, fits)}


def cmd_fit(cfg):
    path = cfg.out / "fit.json"
    _write_atomic(path, _json_text({"method": cfg.method, "seed": cfg.seed, "periods": _fit_all(cfg)}))
    return [path]


def format_tau_table(table, digits=2):
    """Plain-text table with families as rows and periods as columns."""
    periods = list(table.columns)
    width = max(12, *(len(p) + 2 for p in periods))
    first = max(10, *(len(f) + 2 for f in table.index))
    lines = ["".ljust(first) + "".join(p.rjust(width) for p in periods)]
    for fam, row in table.iterrows():
        lines.append(fam.capitalize().ljust(first) + "".join(f"{x:.{digits}f}".rjust(width) for x in row))
    return "\n".join(lines) + "\n"


def cmd_contagion(cfg):
    fits = _fit_all(cfg)
    cols = {}
    alt = {}
    for label, fit in fits.items():
        cols[label] = [fit["nesting"][f]["tau"] for f in cfg.families]
        alt[label] = [_alternate_tau(fit["nesting"][f]) for f in cfg.families]
    table = pd.DataFrame(cols, index=cfg.families)
    table.index.name = "family"
    alt_table = pd.DataFrame(alt, index=cfg.families)
    alt_table.index.name = "family"
    other = "tau_inversion" if cfg.method == "mle" else "mle"
    paths = [cfg.out / "tau_table.csv", cfg.out / f"tau_table_{other}.csv", cfg.out / "tau_table.txt", cfg.out / "fit.json"]
    _write_atomic(paths[0], table.to_csv(float_format=_FLOAT_FMT, lineterminator="\n"))
    _write_atomic(paths[1], alt_table.to_csv(float_format=_FLOAT_FMT, lineterminator="\n"))
    text = f"Kendall's tau implied by the fitted nesting copula ({cfg.method})\n\n" + format_tau_table(table)
    _write_atomic(paths[2], text)
    _write_atomic(paths[3], _json_text({"method": cfg.method, "seed": cfg.seed, "periods": fits}))
    sys.stdout.write(text)
    return paths


def _alternate_tau(report):
    theta = report["theta_tau_inversion"] if report["method"] == "mle" else report["theta_mle"]
    return float(tau_from_theta(report["family"], theta))


def parse_model(spec):
    """``gaussian``, ``student`` or ``kendall:<family>`` into ``(kind, family)``."""
    kind, _, family = spec.partition(":")
    if kind in ("gaussian", "student") and not family:
        return kind, None
    if kind == "kendall" and family in NESTING_FAMILIES:
        return kind, family
    raise ConfigError(f"invalid --model {spec!r}; expected gaussian, student or kendall:{{{'|'.join(NESTING_FAMILIES)}}}")


def _cross_matrix(blocks, cross):
    M = np.full((blocks.d, blocks.d), float(cross))
    for sl in blocks.slices:
        M[sl, sl] = 0.0
    np.fill_diagonal(M, 1.0)
    return M


def build_model(cfg, spec):
    """Return ``(density_fn, sample_fn, description)`` for the requested model."""
    kind, family = parse_model(spec)
    blocks = BlockStructure(cfg.dims)
    m = cfg.model
    try:
        if kind == "gaussian":
            omega = np.asarray(m["omega"], dtype=float) if "omega" in m else _cross_matrix(blocks, m.get("cross", 0.5))
            params = GaussianVCParams(omega, blocks)
            return (lambda u: gaussian_vc_density(u, params), lambda n, rng: gaussian_vc_sample(params, n, rng), "gaussian")
        if kind == "student":
            sigma = np.asarray(m["sigma"], dtype=float) if "sigma" in m else _cross_matrix(blocks, m.get("cross", 0.5))
            params = StudentVCParams(sigma, m.get("dof", 5.0), blocks)
            return (lambda u: student_vc_density(u, params), lambda n, rng: student_vc_sample(params, n, rng), "student")
        if "theta" in m:
            theta = float(m["theta"])
        else:
            theta = theta_from_tau(family, float(m.get("tau", 0.5)))
        params = KendallVCParams(classical_copula(family, theta, dim=blocks.K), blocks)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid model parameters for {spec}: {exc}") from None
    return (
        lambda u: kendall_vc_density(u, params),
        lambda n, rng: kendall_vc_sample(params, n, rng),
        f"kendall:{family} theta={theta!r}",
    )


def _columns(cfg):
    if cfg.blocks:
        return [c for cols in cfg.blocks.values() for c in cols]
    return [f"u{j + 1}" for j in range(sum(cfg.dims))]


def cmd_simulate(cfg, model, n):
    _require(n is not None and n >= 1, "--n must be a positive integer")
    _, sampler, desc = build_model(cfg, model)
    try:
        u = sampler(n, np.random.default_rng(cfg.seed))
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"simulation failed: {exc}") from None
    path = cfg.out / "sample.csv"
    frame = pd.DataFrame(u, columns=_columns(cfg))
    _write_atomic(path, _csv_text(frame, f"model={desc} dims={list(cfg.dims)} n={n} seed={cfg.seed}"))
    return [path]


def cmd_density(cfg, model, points=None):
    m = points or cfg.density_points
    density, _, desc = build_model(cfg, model)
    d = sum(cfg.dims)
    cols = _columns(cfg)
    if d <= MAX_TENSOR_DIM:
        axis = (np.arange(1, m + 1) - 0.5) / m
        u = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
        frame = pd.DataFrame(u, columns=cols)
        frame["density"] = density(u)
        path = cfg.out / "density.csv"
        _write_atomic(path, _csv_text(frame, f"model={desc} dims={list(cfg.dims)} points_per_axis={m}"))
        return [path]
    # too many dimensions for a tensor grid: summarise by Monte Carlo instead
    n = 100_000
    c = density(np.random.default_rng(cfg.seed).random((n, d)))
    summary = {
        "model": desc,
        "dims": list(cfg.dims),
        "n": n,
        "seed": cfg.seed,
        "mean_density": float(c.mean()),
        "std_error": float(c.std(ddof=1) / np.sqrt(n)),
        "quantiles": dict(zip(["q05", "q25", "q50", "q75", "q95"], np.quantile(c, [0.05, 0.25, 0.5, 0.75, 0.95]).tolist())),
    }
    path = cfg.out / "density_summary.json"
    _write_atomic(path, _json_text(summary))
    return [path]


def build_parser():
    parser = argparse.ArgumentParser(prog="vecopula", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="JSON analysis config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")

    for name, help_ in [
        ("ranks", "write blockwise empirical vector ranks per period"),
        ("fit", "fit the Gaussian vector copula and nesting copulas per period"),
        ("contagion", "tau table of nesting-copula fits: families x periods"),
    ]:
        common(sub.add_parser(name, help=help_), True)
    for name, help_ in [("simulate", "simulate from a vector copula"), ("density", "evaluate a density on a grid")]:
        p = sub.add_parser(name, help=help_)
        common(p, False)
        p.add_argument("--model", required=True, help="gaussian | student | kendall:{clayton|frank|gaussian|gumbel}")
        p.add_argument("--dims", help="block dimensions, e.g. 2,3 (when the config has no blocks)")
        p.add_argument("--theta", type=float, help="nesting parameter for kendall models")
        p.add_argument("--tau", type=float, help="nesting Kendall's tau for kendall models")
        p.add_argument("--cross", type=float, help="common cross-block correlation for gaussian/student")
        p.add_argument("--dof", type=float, help="degrees of freedom for student")
        if name == "simulate":
            p.add_argument("--n", type=int, required=True, help="number of draws")
        else:
            p.add_argument("--points", type=int, help="grid points per axis")
    return parser


def _config_from_args(args):
    overrides = {"seed": args.seed, "out": args.out}
    cfg = load_config(args.config, overrides)
    if args.command in ("simulate", "density"):
        if args.dims:
            try:
                cfg.model["dims"] = [int(x) for x in args.dims.split(",")]
            except ValueError:
                raise ConfigError(f"--dims must be comma-separated integers, got {args.dims!r}") from None
            cfg.blocks = {}
        for key in ("theta", "tau", "cross", "dof"):
            if getattr(args, key) is not None:
                cfg.model[key] = getattr(args, key)
                if key == "theta":
                    cfg.model.pop("tau", None)
                if key == "tau":
                    cfg.model.pop("theta", None)
    return cfg


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = _config_from_args(args)
    if args.command == "ranks":
        return cmd_ranks(cfg)
    if args.command == "fit":
        return cmd_fit(cfg)
    if args.command == "contagion":
        return cmd_contagion(cfg)
    if args.command == "simulate":
        return cmd_simulate(cfg, args.model, args.n)
    return cmd_density(cfg, args.model, args.points)


def main(argv=None):
    try:
        for path in run(argv):
            logger.info("wrote %s", path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
