"""Command-line interface.

Exit codes: 0 success, 2 invalid input or parameters, 3 numeric-domain error
(e.g. ``T <= (k + 1) N``).
"""

from __future__ import annotations

import csv
import json
import re
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .datasets import DatasetConfig, ingest, run_test
from .ensembles import DEFAULT_ALPHAS, AiryQuantileTable, airy_sum_quantiles, write_reference
from .errors import DataError, DomainError, ParameterError
from .experiments import (PowerScenario, null_density_experiment, order_sweep, power_experiment,
                          projector_check, size_experiment, stationary_coordinate_check)
from .model import E, E_col, DeterministicTerms, I_rho, VarKSpec, scaled_identity, simulate

_TERM = re.compile(
    r"(?P<sign>[+-]?)(?:(?P<coef>(?:\d+(?:\.\d*)?|\.\d+)(?:e[+-]?\d+)?)\*?)?"
    r"(?P<name>Ecol(?P<col>\d+)|E(?P<i>\d+),(?P<j>\d+)|E(?P<i1>\d)(?P<j1>\d)|I(?P<rho>\d+)?)",
    re.IGNORECASE)


def parse_pattern(text: str):
    """Parse sums like ``0.95*E12``, ``0.1*Ecol1+0.95*E12``, ``-0.8*I5`` or ``0.5*I``.

    ``E3,14`` addresses entries with multi-digit indices; ``I5`` puts ones on
    the first 5 diagonal entries; a bare ``I`` is the identity.
    """
    s = text.replace(" ", "")
    total, pos = None, 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos or (pos > 0 and not m.group("sign")):
            raise ParameterError(f"cannot parse matrix pattern {text!r} at position {pos}")
        coef = float(m.group("coef") or 1.0) * (-1.0 if m.group("sign") == "-" else 1.0)
        if m.group("col"):
            term = E_col(int(m.group("col")), coef)
        elif m.group("i"):
            term = E(int(m.group("i")), int(m.group("j")), coef)
        elif m.group("i1"):
            term = E(int(m.group("i1")), int(m.group("j1")), coef)
        elif m.group("rho"):
            term = I_rho(int(m.group("rho")), coef)
        else:
            term = scaled_identity(coef)
        total = term if total is None else total + term
        pos = m.end()
    if total is None:
        raise ParameterError("empty matrix pattern")
    return total


def _gammas(items, k: int) -> tuple:
    """``LAG:PATTERN`` strings into a Gamma tuple of length ``k - 1``."""
    out = [None] * max(k - 1, 0)
    for item in items:
        lag, _, pat = item.partition(":")
        if not pat or not lag.strip().isdigit():
            raise ParameterError(f"--gamma expects LAG:PATTERN, got {item!r}")
        i = int(lag)
        if not 1 <= i <= k - 1:
            raise ParameterError(f"lag {i} out of range 1..{k - 1} for a VAR({k})")
        out[i - 1] = parse_pattern(pat)
    return tuple(out)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except DomainError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(3)
        except (ParameterError, DataError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(2)


@click.group(cls=_Group)
@click.version_option(__version__)
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker processes; never changes numeric output.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.pass_context
def main(ctx, seed, threads, out_dir, fmt):
    """Cointegration tests for large panels and their Monte Carlo checks."""
    ctx.obj = {"seed": seed, "threads": threads, "out_dir": Path(out_dir), "format": fmt}


def _manifest(ctx, command: str, params: dict, outputs: list) -> Path:
    o = ctx.obj
    o["out_dir"].mkdir(parents=True, exist_ok=True)
    path = o["out_dir"] / f"manifest_{command}_seed{o['seed']}.json"
    body = {"command": command, "version": __version__, "seed": o["seed"], "threads": o["threads"],
            "format": o["format"], "params": params, "outputs": [str(Path(p).name) for p in outputs],
            "argv": sys.argv[1:]}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=str))
    return path


def _emit(ctx, command, result, params):
    paths = result.write(ctx.obj["out_dir"], ctx.obj["format"])
    _manifest(ctx, command, params, paths)
    click.echo(json.dumps(result.to_dict()["summary"], indent=2, sort_keys=True))


@main.command("simulate")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="CSV path (default in out-dir).")
@click.pass_context
def simulate_cmd(ctx, config, output):
    """Simulate a VAR(k) panel described by a JSON CONFIG and write it as CSV.

    CONFIG keys: N, k, T, and optionally gammas (list of patterns or null),
    pi (pattern), mu (number or list), deterministic + phi, noise_cov.
    """
    cfg = json.loads(Path(config).read_text())
    try:
        N, k, T = int(cfg["N"]), int(cfg["k"]), int(cfg["T"])
    except KeyError as exc:
        raise ParameterError(f"config is missing {exc}") from None
    pat = lambda v: None if v is None else parse_pattern(v) if isinstance(v, str) else np.asarray(v)  # noqa: E731
    det = cfg.get("deterministic")
    spec = VarKSpec(N, k, T, gammas=tuple(pat(g) for g in cfg.get("gammas", [])), pi=pat(cfg.get("pi")),
                    mu=cfg.get("mu"), phi=cfg.get("phi"),
                    deterministic=DeterministicTerms.parse(det) if det else None,
                    noise_cov=cfg.get("noise_cov"))
    panel = simulate(spec, ctx.obj["seed"])
    out = Path(output) if output else ctx.obj["out_dir"] / f"panel_seed{ctx.obj['seed']}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(N)])
        w.writerow([repr(float(v)) for v in panel.X0])
        for col in panel.data.T:
            w.writerow([repr(float(v)) for v in col])
    _manifest(ctx, "simulate", cfg, [out])
    click.echo(str(out))


@main.command("test")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", "k_text", default="1,2,3,4", show_default=True, help="VAR orders, comma-separated.")
@click.option("--r", "r_text", default="1,2,3", show_default=True, help="Ranks r, comma-separated.")
@click.option("--alpha", "alpha_text", default="0.95", show_default=True, help="Levels, comma-separated.")
@click.option("--no-header", is_flag=True, help="The CSV has no header row.")
@click.option("--date-column", type=int, default=None, help="0-based index of a date column to skip.")
@click.option("--transform", type=click.Choice(["none", "log"]), default="none", show_default=True)
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Quantile table CSV (default: packaged reference).")
@click.pass_context
def test_cmd(ctx, data, k_text, r_text, alpha_text, no_header, date_column, transform, table_path):
    """Run the modified cointegration test on a CSV panel, one JSON report per k."""
    cfg = DatasetConfig(data, has_header=not no_header, date_column=date_column, transform=transform)
    panel = ingest(cfg)
    table = AiryQuantileTable.from_csv(table_path) if table_path else None
    k_list, r_list, alphas = _int_list(k_text), _int_list(r_text), _float_list(alpha_text)
    reports = run_test(panel, k_list, r_list, alphas, table)
    out_dir = ctx.obj["out_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    stem = Path(data).stem
    for k, rep in reports.items():
        hist = rep.pop("histogram")
        rep["provenance"].update({"source": Path(data).name, "transform": transform, "date_column": date_column})
        p = out_dir / f"test_{stem}_k{k}.json"
        p.write_text(json.dumps(rep, indent=2, sort_keys=True))
        h = out_dir / f"test_{stem}_k{k}_hist.csv"
        with open(h, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(hist[0]))
            w.writeheader()
            w.writerows(hist)
        paths += [p, h]
        line = ", ".join(f"r={r}: {rep['rescaled'][r]:.3f} ({rep['decision'][r][str(alphas[0])]})"
                         if isinstance(rep["rescaled"][r], float) else f"r={r}: {rep['rescaled'][r]}"
                         for r in rep["rescaled"])
        click.echo(f"k={k}: {line}")
    _manifest(ctx, "test", {"data": str(data), "k": k_list, "r": r_list, "alpha": alphas, "transform": transform,
                            "no_header": no_header, "date_column": date_column, "table": table_path}, paths)


@main.command("quantiles")
@click.option("--r", "r_max", type=int, default=3, show_default=True, help="Largest partial-sum length.")
@click.option("--reps", type=int, default=20000, show_default=True)
@click.option("--dim", type=int, default=10000, show_default=True, help="Tridiagonal matrix size n.")
@click.option("--alpha", "alpha_text", default=",".join(map(str, DEFAULT_ALPHAS)), show_default=True)
@click.option("--window", type=int, default=None, help="Leading block size (default ceil(40 n^(1/3))).")
@click.option("--write-reference", "ref_path", type=click.Path(dir_okay=False), default=None,
              help="Also store the raw partial sums as a reference .npz at this path.")
@click.pass_context
def quantiles_cmd(ctx, r_max, reps, dim, alpha_text, window, ref_path):
    """Monte Carlo quantiles of sums of the top r Airy_1 points."""
    o = ctx.obj
    if ref_path:
        write_reference(ref_path, r_max=r_max, n=dim, reps=reps, seed=o["seed"], threads=o["threads"])
    table = airy_sum_quantiles(r_max, _float_list(alpha_text), dim, reps, o["seed"], threads=o["threads"],
                               window=window)
    o["out_dir"].mkdir(parents=True, exist_ok=True)
    path = o["out_dir"] / f"quantiles_r{r_max}_n{dim}_reps{reps}_seed{o['seed']}.csv"
    table.to_csv(path)
    _manifest(ctx, "quantiles", {"r": r_max, "reps": reps, "dim": dim, "alpha": alpha_text, "window": window,
                                 "write_reference": ref_path}, [path])
    for row in table.rows():
        click.echo(f"r={row['r']} alpha={row['alpha']}: {row['quantile']:.3f} (se {row['stderr']:.3f})")


@main.command("mc-size")
@click.option("--n", "N", type=int, default=92, show_default=True)
@click.option("--t", "T", type=int, default=522, show_default=True)
@click.option("--k", "k_text", default="1,2,3,4", show_default=True)
@click.option("--alpha", type=float, default=0.95, show_default=True)
@click.option("--r", type=int, default=1, show_default=True)
@click.option("--reps", type=int, default=10000, show_default=True)
@click.pass_context
def mc_size_cmd(ctx, N, T, k_text, alpha, r, reps):
    """Empirical size of the test when the panel is a pure random walk."""
    o = ctx.obj
    res = size_experiment(N, T, _int_list(k_text), alpha, reps, o["seed"], r=r, threads=o["threads"])
    _emit(ctx, "mc-size", res, res.params)


@main.command("mc-density")
@click.option("--n", "N", type=int, default=100, show_default=True)
@click.option("--t", "T", type=int, default=500, show_default=True)
@click.option("--k-dgp", type=int, default=2, show_default=True)
@click.option("--k-test", type=int, default=None, help="Order used by the test (default: k-dgp).")
@click.option("--gamma", "gamma_items", multiple=True, help="LAG:PATTERN, e.g. 1:0.95*E11 (repeatable).")
@click.option("--reps", type=int, default=2000, show_default=True)
@click.pass_context
def mc_density_cmd(ctx, N, T, k_dgp, k_test, gamma_items, reps):
    """Distribution of the rescaled top statistic versus the first Airy_1 point."""
    o = ctx.obj
    res = null_density_experiment(_gammas(gamma_items, k_dgp), N, T, k_dgp, k_test, reps, o["seed"],
                                  threads=o["threads"])
    _emit(ctx, "mc-density", res, {**res.params, "gamma": list(gamma_items)})


@main.command("order-sweep")
@click.option("--n", "N", type=int, default=100, show_default=True)
@click.option("--t", "T", type=int, default=500, show_default=True)
@click.option("--k-dgp", type=int, default=2, show_default=True)
@click.option("--gamma", "gamma_items", multiple=True, help="LAG:PATTERN (repeatable).")
@click.option("--pi", "pi_text", default=None, help="Pattern for Pi.")
@click.option("--k-range", "k_text", default="1,2,3", show_default=True)
@click.option("--rule", type=click.Choice(["edge", "absolute"]), default="edge", show_default=True)
@click.option("--threshold", type=float, default=None,
              help="Edge-scaled cutoff (default 3.0) or margin above lambda_+ (default 0.05).")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Sweep a CSV panel instead of a simulated one.")
@click.pass_context
def order_sweep_cmd(ctx, N, T, k_dgp, gamma_items, pi_text, k_text, rule, threshold, data):
    """Spectra for a range of VAR orders and the outlier counts per order."""
    o = ctx.obj
    if data:
        source = ingest(DatasetConfig(data))
    else:
        source = VarKSpec(N, k_dgp, T, gammas=_gammas(gamma_items, k_dgp),
                          pi=parse_pattern(pi_text) if pi_text else None)
    res = order_sweep(source, _int_list(k_text), rule=rule, threshold=threshold, seed=o["seed"])
    _emit(ctx, "order-sweep", res, {**res.params, "gamma": list(gamma_items), "pi": pi_text, "data": data})


@main.command("power")
@click.option("--n", "N", type=int, default=100, show_default=True)
@click.option("--t", "T", type=int, default=500, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--pi", "pi_text", default="-0.95*E11", show_default=True)
@click.option("--gamma", "gamma_items", multiple=True, help="LAG:PATTERN (repeatable).")
@click.option("--mu", type=float, default=None, help="Constant drift on every coordinate.")
@click.option("--alpha", type=float, default=0.95, show_default=True)
@click.option("--reps", type=int, default=200, show_default=True)
@click.pass_context
def power_cmd(ctx, N, T, k, pi_text, gamma_items, mu, alpha, reps):
    """Rejection rate and eigenvalue separation under a cointegrated DGP."""
    o = ctx.obj
    res = power_experiment(parse_pattern(pi_text), _gammas(gamma_items, k), N, T, k, reps, o["seed"], mu=mu,
                           alpha=alpha, threads=o["threads"])
    _emit(ctx, "power", res, {**res.params, "pi_text": pi_text, "gamma": list(gamma_items)})


@main.command("projector-check")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--n", "N", type=int, default=2, show_default=True)
@click.option("--t", "T_amb", type=int, default=10, show_default=True, help="Ambient dimension.")
@click.option("--reps", type=int, default=5000, show_default=True)
@click.pass_context
def projector_check_cmd(ctx, k, N, T_amb, reps):
    """Compare the projector model's top eigenvalue with its Jacobi law (two-sample KS)."""
    o = ctx.obj
    res = projector_check(k, N, T_amb, reps, o["seed"], threads=o["threads"])
    _emit(ctx, "projector-check", res, res.params)


@main.command("stationary-check")
@click.option("--beta", type=float, default=0.5, show_default=True)
@click.option("--sigma2", type=float, default=1.0, show_default=True)
@click.option("--n", "N", type=int, default=10, show_default=True)
@click.option("--t", "T", type=int, default=20000, show_default=True)
@click.option("--reps", type=int, default=500, show_default=True)
@click.option("--tol", type=float, default=0.02, show_default=True)
@click.pass_context
def stationary_check_cmd(ctx, beta, sigma2, N, T, reps, tol):
    """Squared correlation of a stationary first coordinate against its large-T limit."""
    o = ctx.obj
    res = stationary_coordinate_check(PowerScenario(beta, sigma2, N, T), reps, o["seed"], tol=tol,
                                      threads=o["threads"])
    _emit(ctx, "stationary-check", res, res.params)


main.add_command(stationary_check_cmd, "prop5-check")


if __name__ == "__main__":  # pragma: no cover
    main()
