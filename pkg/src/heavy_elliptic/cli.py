"""Command line driver.

Every command writes ``config.txt`` (the fully resolved options) into its
output directory; ``--config config.txt`` reruns it with the same results.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import ensemble as ens
from . import io
from .ensemble import EllipticEnsembleConfig, HalfPlanePoint
from .experiments import (
    DEFAULT_WINDOW,
    DIAGONAL_LAWS,
    FIGURES,
    figure_config,
    matrix_stieltjes,
    real_axis_fraction,
    run_concentration,
    run_crossval,
)
from .pwit import DEFAULT_PRUNE_TOL, pwit_stieltjes_estimate
from .rde import (
    RdeConfig,
    density_from_stieltjes,
    log_potential_grid,
    mu_from_hermitization,
    rde_solve,
    rde_stieltjes_curve,
    validate_c2_support,
)
from .rng import RngStream

log = logging.getLogger("heavy_elliptic")

COMMANDS = ("spectrum", "singvals", "stieltjes", "pwit", "rde", "hermitize", "figure",
            "lsv", "concentration", "crossval")

# options written to config.txt, per command (common ones are always written)
COMMON = ("alpha", "n", "seed", "theta", "b", "diag")
EXTRA = {
    "spectrum": ("window",),
    "singvals": ("z",),
    "stieltjes": ("z", "eta", "trials"),
    "pwit": ("z", "eta", "trials", "branching", "depth", "prune_tol", "tail"),
    "rde": ("z", "eta", "pool", "gens", "terms", "tail", "energies"),
    "hermitize": ("window", "h", "clamp"),
    "figure": ("which", "window"),
    "lsv": ("z", "trials", "t_grid"),
    "concentration": ("n_list", "trials"),
    "crossval": ("z", "eta", "trials", "pwit_trials", "branching", "depth", "pool", "gens",
                 "terms", "prune_tol", "tail"),
}


def parse_complex(text) -> complex:
    if isinstance(text, complex):
        return text
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) == 1:
        return complex(io.eval_number(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(io.eval_number(parts[0]), io.eval_number(parts[1]))
    raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}")


def parse_floats(text) -> list[float]:
    return [io.eval_number(p) for p in str(text).split(",") if p.strip()]


def parse_window(text):
    if text in (None, "", "none", "auto"):
        return None
    w = parse_floats(text)
    if len(w) != 4:
        raise argparse.ArgumentTypeError("window needs xmin,xmax,ymin,ymax")
    return tuple(w)


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heavy-elliptic",
                                description="Heavy-tailed elliptic random matrix experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--alpha", type=float, default=1.25)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", default="iid",
                   help="iid | circle | axes-arcs | diagonal-arcs | symmetric | "
                        "arcs(centers=...; b=...) | atoms(file=...)")
    p.add_argument("--b", type=float, default=0.0, help="arc half-width factor (arcs are b*pi/4 wide)")
    p.add_argument("--diag", choices=sorted(DIAGONAL_LAWS), default="one",
                   help="law of the diagonal entries")
    p.add_argument("--z", type=parse_complex, default=0j, help="re,im")
    p.add_argument("--eta", default="1", help="Im(eta); a comma list for stieltjes")
    p.add_argument("--trials", type=int, default=None, help="replicas")
    p.add_argument("--pwit-trials", type=int, default=500)
    p.add_argument("--pool", type=int, default=100_000)
    p.add_argument("--gens", type=int, default=50)
    p.add_argument("--terms", type=int, default=50)
    p.add_argument("--branching", type=int, default=50)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--prune-tol", type=float, default=DEFAULT_PRUNE_TOL)
    p.add_argument("--tail", type=parse_bool, default=True,
                   help="add the mean of the truncated series tail (pwit, rde)")
    p.add_argument("--energies", default=None,
                   help="rde: E0,E1,count for a density curve at Im(eta)")
    p.add_argument("--which", choices=sorted(FIGURES), default="1R")
    p.add_argument("--window", default=None, help="xmin,xmax,ymin,ymax or auto")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--clamp", type=float, default=None)
    p.add_argument("--t-grid", default="0,0.25,0.5,1,2,4")
    p.add_argument("--n-list", default="100,200,400")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        conf = io.read_config(args.config)
        conf.pop("command", None)
        known = {a.dest for a in parser._actions}
        unknown = set(conf) - known
        if unknown:
            parser.error(f"unknown keys in {args.config}: {sorted(unknown)}")
        parser.set_defaults(**conf)
        args = parser.parse_args(argv)
        # defaults from set_defaults are strings; run them through the types
        for action in parser._actions:
            val = getattr(args, action.dest, None)
            if action.type is not None and isinstance(val, str) and action.dest in conf:
                setattr(args, action.dest, action.type(val))
    return args


def _spec(args):
    return io.parse_theta(args.theta, args.alpha, args.b,
                          Path(args.config).parent if args.config else None)


def _ensemble(args, n_default: int) -> EllipticEnsembleConfig:
    n = args.n if args.n is not None else n_default
    args.n = n
    return EllipticEnsembleConfig(n, _spec(args), diagonal_law=DIAGONAL_LAWS[args.diag],
                                  seed=args.seed)


def _log_config(args, out: Path):
    keys = COMMON + EXTRA.get(args.command, ())
    opts = {"command": args.command}
    for k in keys:
        v = getattr(args, k)
        if isinstance(v, complex):
            v = f"{v.real!r},{v.imag!r}"
        elif isinstance(v, tuple):
            v = ",".join(repr(x) for x in v)
        opts[k] = v
    io.write_config(out / "config.txt", opts)


def _eta(args) -> float:
    return parse_floats(args.eta)[0]


def cmd_spectrum(args, out):
    cfg = _ensemble(args, 1000)
    eig = ens.eigenvalues(ens.scale_and_shift(ens.build_elliptic_matrix(cfg), args.alpha))
    io.write_eigenvalues(out / "eigenvalues.csv", eig)
    io.svg_scatter(out / "spectrum.svg", eig, parse_window(args.window))
    return 0


def cmd_singvals(args, out):
    cfg = _ensemble(args, 1000)
    s = ens.singular_values(ens.scale_and_shift(ens.build_elliptic_matrix(cfg), args.alpha, args.z))
    io.write_singular_values(out / "singular_values.csv", s)
    return 0


def cmd_stieltjes(args, out):
    cfg = _ensemble(args, 1000)
    args.trials = args.trials or 10
    rows = []
    for t in parse_floats(args.eta):
        m = matrix_stieltjes(cfg, HalfPlanePoint(args.z, 1j * t), args.trials)
        rows.append((t, m.mean()))
    io.write_stieltjes(out / "stieltjes.csv", rows)
    return 0


def cmd_pwit(args, out):
    spec = _spec(args)
    args.trials = args.trials or 500
    u = HalfPlanePoint(args.z, 1j * _eta(args))
    est = pwit_stieltjes_estimate(spec, args.branching, args.depth, u, args.trials,
                                  RngStream(args.seed, 1), args.prune_tol, args.tail)
    io.write_csv(out / "pwit_estimate.csv", io.PWIT_HEADER,
                 [io.pwit_row(args.z, _eta(args), est.mean_block, est.se_a)])
    log.info("pwit: mean a = %s, mean nodes per tree %.0f", est.mean_block.a, est.nodes.mean())
    return 0


def cmd_rde(args, out):
    spec = _spec(args)
    u = HalfPlanePoint(args.z, 1j * _eta(args))
    sol = rde_solve(RdeConfig(u, spec, args.pool, args.gens, args.terms, args.seed, args.tail))
    io.write_population(out / "population.csv", sol.population)
    lines = [f"m_re={sol.m.real!r}", f"m_im={sol.m.imag!r}", f"se={sol.se!r}",
             f"drift_final={sol.final_drift!r}"]
    (out / "rde_summary.txt").write_text("\n".join(lines) + "\n")
    if args.energies:
        e0, e1, cnt = parse_floats(args.energies)
        energies = np.linspace(e0, e1, int(cnt))
        curve = rde_stieltjes_curve(spec, args.z, energies, _eta(args),
                                    min(args.pool, 20_000), args.gens, args.terms, args.seed)
        io.write_density(out / "density.csv", density_from_stieltjes(curve, _eta(args)))
    return 0


def cmd_hermitize(args, out):
    cfg = _ensemble(args, 200)
    c2 = validate_c2_support(cfg.spec)
    if not c2.satisfied:
        log.error("angular measure is supported on one line: %s", c2)
        return 2
    w = parse_window(args.window) or DEFAULT_WINDOW
    re = np.arange(round((w[1] - w[0]) / args.h) + 1) * args.h + w[0]
    im = np.arange(round((w[3] - w[2]) / args.h) + 1) * args.h + w[2]
    A = ens.scale_and_shift(ens.build_elliptic_matrix(cfg), args.alpha)
    U = log_potential_grid(A, re, im, args.clamp)
    mu = mu_from_hermitization(re, im, U, args.h)
    io.write_mu_grid(out / "mu_grid.csv", mu)
    log.info("hermitize: total mass %.4f, clipped %.4f", mu.total, mu.clipped)
    return 0


def cmd_figure(args, out):
    n = args.n or 2000
    args.n = n
    cfg, window = figure_config(args.which, n, args.seed, args.alpha)
    if args.window is not None:
        window = parse_window(args.window)
    args.window = window if window is not None else "auto"
    eig = ens.eigenvalues(ens.scale_and_shift(ens.build_elliptic_matrix(cfg), args.alpha))
    io.write_eigenvalues(out / f"figure_{args.which}.csv", eig)
    io.svg_scatter(out / f"figure_{args.which}.svg", eig, window, title=f"figure {args.which}")
    log.info("figure %s: %d eigenvalues, fraction near real axis %.4f",
             args.which, eig.size, real_axis_fraction(eig))
    return 0


def cmd_lsv(args, out):
    cfg = _ensemble(args, 200)
    args.trials = args.trials or 200
    curve, samples = ens.lsv_tail_curve(cfg, args.z, args.trials, parse_floats(args.t_grid))
    io.write_csv(out / "lsv_curve.csv", ("t", "prob"), curve)
    io.write_csv(out / "lsv_samples.csv", ("s_min",), ((s,) for s in samples))
    p = float(np.mean(samples <= cfg.n ** -3.0))
    (out / "lsv_summary.txt").write_text(f"prob_below_n^-3={p!r}\n")
    return 0


def cmd_concentration(args, out):
    spec = _spec(args)
    args.trials = args.trials or 50
    n_list = [int(x) for x in parse_floats(args.n_list)]
    rows, ratios = run_concentration(spec, n_list, args.trials, args.seed)
    io.write_csv(out / "concentration.csv", ("n", "std"), rows)
    (out / "concentration_trend.txt").write_text(
        "".join(f"std({a})/std({b})={r!r}\n" for (a, _), (b, _), r in zip(rows, rows[1:], ratios)))
    return 0


def cmd_crossval(args, out):
    spec = _spec(args)
    args.n = args.n or 1000
    args.trials = args.trials or 20
    u = HalfPlanePoint(args.z, 1j * _eta(args))
    c2 = validate_c2_support(spec)
    if not c2.satisfied:
        log.warning("angular measure is supported on one line (%s); only the singular "
                    "value measure is covered", c2)
    rep = run_crossval(spec, u, args.n, args.trials, args.branching, args.depth, args.pwit_trials,
                       args.pool, args.gens, args.terms, args.seed, args.diag, args.prune_tol,
                       args.tail)
    (out / "crossval.txt").write_text("\n".join(rep.lines()) + "\n")
    io.write_csv(out / "crossval.csv", ("route", "im_m", "se"),
                 [(k, e.value, e.se) for k, e in rep.estimates.items()])
    for line in rep.lines():
        log.info(line)
    return 0 if rep.consistent else 1


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status = HANDLERS[args.command](args, out)
    _log_config(args, out)
    log.info("%s finished in %.1f s (status %d)", args.command, time.perf_counter() - t0, status)
    return status


if __name__ == "__main__":
    sys.exit(main())
