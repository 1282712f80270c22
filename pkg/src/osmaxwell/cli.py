"""``osmaxwell analyze | optimize | bench | fit``.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
4 I/O error (including schema-version mismatches).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from osmaxwell.config import ExperimentConfig, load_config, with_overrides
from osmaxwell.discretization import dump_operators, split_domain
from osmaxwell.errors import (
    ConfigError,
    ContractError,
    DivergenceError,
    GMRESBreakdown,
    OptimizationError,
    PoleError,
    ResonanceError,
    SchemaError,
)
from osmaxwell.experiments import (
    DASH,
    BenchRow,
    fit_slopes,
    predicted_iteration_slope,
    run_grid,
    transmission_for,
)
from osmaxwell.model import HARMONIC
from osmaxwell.optimize import (
    asymptotic_result,
    build_band,
    minmax_optimize,
)
from osmaxwell.results import fmt_float, fmt_params, parse_params, read_csv, write_csv
from osmaxwell.symbols import rho_case_k

log = logging.getLogger("osmaxwell")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

BENCH_COLUMNS = ["case", "regime", "overlap", "h", "it_s", "it_gm", "cell",
                 "contraction", "predicted_max_rho", "params"]


def _meta(cfg: ExperimentConfig, command):
    return [("command", command), ("seed", cfg.seed)] + [(f"config.{k}", v) for k, v in cfg.echo()]


def _h_label(n):
    return f"1/{n}"


def _curve_k(band, n):
    """Log-spaced samples over ``[k_min, k_max]``, plus ``omega_tilde`` when harmonic."""
    k = np.geomspace(band.k_min, band.k_max, n)
    if band.kind == HARMONIC:
        k = np.unique(np.append(k, band.omega_tilde))
    return k


def cmd_analyze(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """``rho(k)`` for classical, asymptotic and numeric parameters; one file per case."""
    regime, medium = cfg.make_regime(), cfg.medium
    a = regime.shift(medium)
    written = []
    for case_id in cfg.cases:
        rows = []
        for n in cfg.h_inv:
            band = build_band(1.0 / n, regime, medium, n_samples=cfg.n_samples)
            k = _curve_k(band, cfg.n_samples)
            for overlap in cfg.overlaps:
                specs = [("asymptotic-formula", asymptotic_result(case_id, band, overlap).spec)]
                if case_id != 1:
                    specs.append(("numeric-minmax", minmax_optimize(case_id, band, overlap).spec))
                for strategy, spec in specs:
                    rho = rho_case_k(case_id, spec.params, k, a, spec.overlap)
                    tag = fmt_params(spec.params)
                    rows += [[_h_label(n), overlap, strategy, tag, fmt_float(kk), fmt_float(r)]
                             for kk, r in zip(k, rho)]
        written.append(write_csv(out / f"analyze_case{case_id}.csv", "analyze",
                                 ["h", "overlap", "strategy", "params", "k", "rho"], rows,
                                 _meta(cfg, "analyze") + [("case", case_id)]))
    return written


def cmd_optimize(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """Asymptotic and numeric parameters side by side with their achieved ``max rho``."""
    regime, medium = cfg.make_regime(), cfg.medium
    rows = []
    for case_id in cfg.cases:
        for overlap in cfg.overlaps:
            for n in cfg.h_inv:
                band = build_band(1.0 / n, regime, medium, n_samples=cfg.n_samples)
                ra = asymptotic_result(case_id, band, overlap)
                rn = ra if case_id == 1 else minmax_optimize(case_id, band, overlap)
                pa = list(ra.spec.params) + [math.nan] * (2 - len(ra.spec.params))
                pn = list(rn.spec.params) + [math.nan] * (2 - len(rn.spec.params))
                rows.append([
                    case_id, regime.kind, overlap, _h_label(n),
                    fmt_float(complex(pa[0]).real), fmt_float(complex(pa[1]).real), fmt_params(ra.spec.params),
                    fmt_float(ra.achieved_max_rho),
                    fmt_float(complex(pn[0]).real), fmt_float(complex(pn[1]).real), fmt_params(rn.spec.params),
                    fmt_float(rn.achieved_max_rho),
                    fmt_float(rn.achieved_max_rho / ra.achieved_max_rho),
                    ";".join(fmt_float(k) for k in rn.equioscillation_points),
                ])
    columns = ["case", "regime", "overlap", "h", "p1_asymptotic", "p2_asymptotic", "params_asymptotic",
               "max_rho_asymptotic", "p1_numeric", "p2_numeric", "params_numeric", "max_rho_numeric",
               "ratio", "equioscillation_k"]
    return [write_csv(out / "optimize.csv", "optimize", columns, rows, _meta(cfg, "optimize"))]


def _cell_text(r: BenchRow):
    s = str(r.it_s) if r.it_s is not None else DASH
    g = str(r.it_gm) if r.it_gm is not None else DASH
    return f"{s}({g})"


def bench_rows(rows: list[BenchRow]):
    return [[r.case_id, r.regime, r.overlap, _h_label(r.h_inv),
             r.it_s if r.it_s is not None else DASH, r.it_gm if r.it_gm is not None else DASH,
             _cell_text(r), fmt_float(r.contraction), fmt_float(r.predicted_max_rho), fmt_params(r.params)]
            for r in rows]


def cmd_bench(cfg: ExperimentConfig, out: Path, threads=1, dump=False) -> list[Path]:
    """Iteration-count grid ``it_S(it_GM)`` over cases, overlaps and mesh sizes."""
    regime = cfg.make_regime()
    rows = run_grid(cfg.cases, cfg.h_inv, cfg.overlaps, regime, threads=threads, medium=cfg.medium,
                    strategy=cfg.strategy, tol=cfg.tol, max_iters=cfg.max_iters, seed=cfg.seed,
                    bc=cfg.walls, gmres_restart=cfg.gmres_restart)
    written = [write_csv(out / "bench.csv", "bench", BENCH_COLUMNS, bench_rows(rows), _meta(cfg, "bench"))]
    if dump:
        written += _dump(cfg, out / "operators")
    return written


def _dump(cfg, root: Path):
    regime, medium = cfg.make_regime(), cfg.medium
    paths = []
    for case_id in cfg.cases:
        for overlap in cfg.overlaps:
            for n in cfg.h_inv:
                band = build_band(1.0 / n, regime, medium, n_samples=cfg.n_samples)
                spec = transmission_for(case_id, band, overlap, cfg.strategy)
                s1, s2 = split_domain(n, medium, regime, spec, bc=cfg.walls)
                paths += [Path(p) for p in dump_operators(
                    root / f"case{case_id}_{overlap}_N{n}",
                    A1=s1.matrix, A2=s2.matrix, send1=s1.send, send2=s2.send)]
    return paths


def read_bench(path) -> list[BenchRow]:
    _, rows = read_csv(path, kind="bench")
    out = []
    for r in rows:
        num, _, den = r["h"].partition("/")
        out.append(BenchRow(
            case_id=int(r["case"]), regime=r["regime"], overlap=r["overlap"], h_inv=int(den),
            it_s=None if r["it_s"] == DASH else int(r["it_s"]),
            it_gm=None if r["it_gm"] == DASH else int(r["it_gm"]),
            contraction=float(r["contraction"]), predicted_max_rho=float(r["predicted_max_rho"]),
            params=parse_params(r["params"]),
        ))
    return out


def cmd_fit(path, quantity="iterations", column="it_s", out: Path | None = None):
    """Per (case, overlap) slopes of a bench CSV, with the band-analysis prediction."""
    rows = read_bench(path)
    fits = fit_slopes(rows, quantity, column)
    kind = rows[0].regime
    table = []
    for f in fits:
        pred = predicted_iteration_slope(f.case_id, kind, f.overlap)
        if quantity == "one-minus-contraction":
            pred = -pred
        table.append([f.case_id, kind, f.overlap, quantity, column, f.n_points, fmt_float(f.slope),
                      fmt_float(f.intercept), fmt_float(f.residual), fmt_float(pred)])
    columns = ["case", "regime", "overlap", "quantity", "column", "n_points", "slope", "intercept",
               "residual", "predicted_slope"]
    if out is not None:
        write_csv(out / "fit.csv", "fit", columns, table, [("source", Path(path).name)])
    return fits, table


def build_parser():
    p = argparse.ArgumentParser(prog="osmaxwell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("analyze", "optimize", "bench"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="experiment config file")
        s.add_argument("--seed", type=int, help="overrides [experiment] seed")
        s.add_argument("--out", help="output directory (overrides [experiment] out)")
        s.add_argument("--threads", type=int, default=1, help="concurrent sweep cells")
        if name == "bench":
            s.add_argument("--dump-operators", action="store_true", help="also write subdomain matrices")
    s = sub.add_parser("fit")
    s.add_argument("csv", help="bench CSV to fit")
    s.add_argument("--config", help="optional config; its [fit] section picks quantity and column")
    s.add_argument("--quantity", choices=("iterations", "one-minus-contraction"))
    s.add_argument("--column", choices=("it_s", "it_gm"))
    s.add_argument("--out", help="also write fit.csv into this directory")
    for s in sub.choices.values():
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            cfg = load_config(args.config) if args.config else ExperimentConfig()
            quantity = args.quantity or cfg.fit_quantity
            column = args.column or cfg.fit_column
            _, table = cmd_fit(args.csv, quantity, column, Path(args.out) if args.out else None)
            for row in table:
                print(f"case {row[0]} L={row[2]}: slope {float(row[6]):+.3f} "
                      f"(predicted {float(row[9]):+.3f}, {row[5]} points)")
            return EXIT_OK
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError(f"seed must be a u64, got {args.seed}")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = with_overrides(load_config(args.config), seed=args.seed, out=args.out)
        out = Path(cfg.out)
        if args.command == "analyze":
            paths = cmd_analyze(cfg, out)
        elif args.command == "optimize":
            paths = cmd_optimize(cfg, out)
        else:
            paths = cmd_bench(cfg, out, threads=args.threads, dump=args.dump_operators)
        for path in paths:
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContractError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, GMRESBreakdown, OptimizationError, ResonanceError, PoleError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
