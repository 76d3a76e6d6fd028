"""Command-line front end: fit models, simulate data, run sweeps and checks.

Exit codes are a stable contract: 0 success, 1 usage or input error,
2 numerical failure, 3 check failure. Every artifact embeds the tool
version, the fully resolved configuration, and the seed, so re-running a
command with the embedded config reproduces the artifact byte for byte.
"""

import sys

import click
import numpy as np

from . import __version__
from .dataset import read_csv, write_csv
from .domain import Domain1D, Domain2D
from .equivalence import (check_prop1, check_prop2, check_scores,
                          run_standard_checks)
from .errors import FitError, ModelInvalidError, NonConvergenceError
from .intensity import IntensityModel, ThinningModel
from .likelihoods import bin_presence
from .optim import OptimOptions
from .penalties import Penalty
from .sampling import (assemble_dataset, identity_features, quadratic_features,
                       sample_background, simulate_ipp, thin_process)
from .serialize import dumps
from .simstudy import (DEFAULT_N0_GRID, ESTIMATORS, MixtureSpec1D,
                       draw_study_data, emit_figure_data, run_sweep)
from .solvers import (fit_ipp, fit_iwlr, fit_logistic, fit_maxent,
                      fit_poisson_llm)

MODELS = ("ipp", "maxent", "lr", "iwlr", "berman-turner")
PRESETS = ("mixture45", "mixture45-intensity", "correct45")
SPEC_VARIANTS = {
    "mixture45": MixtureSpec1D.mixture45,
    "mixture45-intensity": MixtureSpec1D.mixture45_intensity,
    "correct45": MixtureSpec1D.correct45,
}


class CliInputError(click.ClickException):
    exit_code = 1


@click.group(name="ponly")
@click.version_option(__version__)
def cli():
    """Presence-only model fitting, simulation, and cross-verification."""


def _write_out(text, out):
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _penalty_from_flags(kind, lagrange, mix):
    if kind == "none":
        return Penalty.none()
    if kind == "l1":
        return Penalty.l1(lagrange)
    if kind == "l2":
        return Penalty.l2(lagrange)
    return Penalty.elastic(lagrange, mix)


def _load_json(path):
    import json

    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise CliInputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliInputError(f"bad JSON in {path}: {exc}") from None


# ---------------------------------------------------------------------------
# fit


@cli.command("fit")
@click.option("--model", required=True, type=click.Choice(MODELS))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--area", required=True, type=float, help="Domain area |D|.")
@click.option("--penalty", "penalty_kind", default="none",
              type=click.Choice(("none", "l1", "l2", "elastic")))
@click.option("--lambda", "lagrange", default=0.0, type=float,
              help="Penalty Lagrange multiplier.")
@click.option("--mix", default=1.0, type=float, help="Elastic-net mixing.")
@click.option("--W", "weight", default=None, type=float,
              help="Background weight for lr; forces a fixed W for iwlr "
                   "(disabling the escalation heuristic).")
@click.option("--seed", default=None, type=int, help="Recorded in the output.")
@click.option("--grad-tol", default=None, type=float)
@click.option("--max-iter", default=None, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_fit(model, data_path, area, penalty_kind, lagrange, mix, weight, seed,
            grad_tol, max_iter, out):
    """Fit one model to a dataset CSV and write the ModelFit JSON."""
    config = {
        "command": "fit", "model": model, "data": data_path, "area": area,
        "penalty": {"kind": penalty_kind, "lagrange": lagrange, "mix": mix},
        "W": weight, "seed": seed, "grad_tol": grad_tol, "max_iter": max_iter,
    }
    try:
        penalty = _penalty_from_flags(penalty_kind, lagrange, mix)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    opts_kw = {}
    if grad_tol is not None:
        opts_kw["grad_tol"] = grad_tol
    if max_iter is not None:
        opts_kw["max_iter"] = max_iter
    opts = OptimOptions(**opts_kw)

    try:
        data = read_csv(data_path, domain_area=area)
    except ValueError as exc:
        raise CliInputError(f"{data_path}: {exc}") from None

    try:
        if model == "ipp":
            fit = fit_ipp(data, penalty, opts)
        elif model == "maxent":
            fit = fit_maxent(data, penalty, opts)
        elif model == "lr":
            fit = fit_logistic(data, W=weight if weight else 1.0,
                               penalty=penalty, opts=opts)
        elif model == "iwlr":
            if weight is not None:
                config["w_escalation"] = "disabled (forced W)"
                fit = fit_logistic(data, W=weight, penalty=penalty, opts=opts)
                fit.model = "iwlr"
            else:
                fit = fit_iwlr(data, penalty, opts)
        else:  # berman-turner on a regular feature lattice
            fit = _fit_berman_turner(data, area, penalty, opts)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    except FitError as exc:
        doc = {"version": __version__, "config": config,
               "error": {"type": type(exc).__name__, "message": str(exc)}}
        _write_out(dumps(doc) + "\n", out)
        sys.exit(2)

    fit.seed = seed
    doc = {"version": __version__, "config": config}
    doc.update(fit.to_json_dict())
    if "rounds" in fit.extras:
        doc["w_rounds"] = fit.extras["rounds"]
    _write_out(dumps(doc) + "\n", out)


def _fit_berman_turner(data, area, penalty, opts):
    """Berman-Turner fit when background feature rows form a regular lattice.

    The CSV stores features, not locations, so the nearest-cell assignment
    happens in feature space; for identity feature maps the two coincide.
    Requires p in {1, 2}.
    """
    p = data.p
    if p == 1:
        lo = float(data.background_X.min())
        hi = float(data.background_X.max())
        n0 = data.n0
        half = (hi - lo) / (2 * (n0 - 1)) if n0 > 1 else 0.5
        domain = Domain1D(lo - half, hi + half)
    elif p == 2:
        mins = data.background_X.min(axis=0)
        maxs = data.background_X.max(axis=0)
        m = round(data.n0 ** 0.5)
        halves = (maxs - mins) / (2 * (m - 1)) if m > 1 else np.full(2, 0.5)
        domain = Domain2D(mins[0] - halves[0], maxs[0] + halves[0],
                          mins[1] - halves[1], maxs[1] + halves[1])
    else:
        raise CliInputError(
            "berman-turner via the CLI needs 1 or 2 feature columns forming "
            "a regular lattice")
    try:
        binned = bin_presence(data.presence_X, data.background_X, domain)
    except ValueError as exc:
        raise CliInputError(f"background rows are not a regular grid: {exc}") from None
    return fit_poisson_llm(binned, data.background_X, area, penalty, opts)


# ---------------------------------------------------------------------------
# simulate


@cli.command("simulate")
@click.option("--spec", "spec_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON simulation spec (domain, intensity, background).")
@click.option("--preset", default=None, type=click.Choice(PRESETS),
              help="Named feature-space study preset.")
@click.option("--n1", default=3000, type=int, help="Presence count (presets).")
@click.option("--n0", default=10000, type=int, help="Background count (presets).")
@click.option("--mode", default="uniform", type=click.Choice(("uniform", "grid")))
@click.option("--seed", default=0, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_simulate(spec_path, preset, n1, n0, mode, seed, out):
    """Generate a synthetic dataset CSV, deterministically per seed."""
    if (spec_path is None) == (preset is None):
        raise CliInputError("provide exactly one of --spec or --preset")
    if preset is not None:
        config = {"command": "simulate", "preset": preset, "n1": n1, "n0": n0,
                  "seed": seed}
        data = draw_study_data(SPEC_VARIANTS[preset](), n1, n0, seed)
    else:
        spec = _load_json(spec_path)
        config = {"command": "simulate", "spec": spec, "mode": mode,
                  "seed": seed}
        try:
            data = _simulate_from_spec(spec, mode, seed)
        except (ValueError, KeyError, ModelInvalidError) as exc:
            raise CliInputError(f"bad simulation spec: {exc}") from None

    comments = [f"ponly {__version__}",
                f"config: {dumps(config, compact=True)}"]
    if out:
        with open(out, "w", newline="") as f:
            write_csv(data, f, header_comments=comments)
    else:
        write_csv(data, sys.stdout, header_comments=comments)


def _domain_from_spec(spec):
    bounds = spec["domain"]["bounds"]
    if len(bounds) == 1:
        return Domain1D(float(bounds[0][0]), float(bounds[0][1]))
    if len(bounds) == 2:
        return Domain2D(float(bounds[0][0]), float(bounds[0][1]),
                        float(bounds[1][0]), float(bounds[1][1]))
    raise ValueError("domain must have 1 or 2 axes")


def _simulate_from_spec(spec, mode, seed):
    domain = _domain_from_spec(spec)
    fm = {"identity": identity_features,
          "quadratic": quadratic_features}[spec.get("features", "identity")]
    n0 = int(spec["background"]["n0"])
    bg_mode = spec["background"].get("mode", mode)

    if "thinning" in spec:
        thin = spec["thinning"]
        occ = IntensityModel.log_linear(float(thin["occurrence"]["alpha"]),
                                        thin["occurrence"]["beta"])
        x1 = tuple(thin["occurrence"]["features"])
        model = ThinningModel(occurrence=occ, x1_indices=x1,
                              gamma=float(thin["gamma"]), delta=thin["delta"],
                              x2_indices=tuple(thin["features"]))
        p_full = len(x1) + len(model.x2_indices)
        full_beta = np.zeros(p_full)
        for j, idx in enumerate(x1):
            full_beta[idx] = occ.components[0][2][j]
        occ_full = IntensityModel.log_linear(occ.components[0][1], full_beta)
        points = simulate_ipp(occ_full, domain, fm, seed=make_rng_stream(seed, 0))
        points = thin_process(points, model, fm, seed=make_rng_stream(seed, 1))
    else:
        comps = [(float(c.get("log_weight", 0.0)), float(c["alpha"]), c["beta"])
                 for c in spec["intensity"]["components"]]
        model = IntensityModel(components=tuple(comps))
        points = simulate_ipp(model, domain, fm, seed=make_rng_stream(seed, 0))

    if len(points) == 0:
        raise ValueError("simulation produced no presence points; raise alpha")
    background = sample_background(domain, n0, mode=bg_mode,
                                   seed=make_rng_stream(seed, 2))
    return assemble_dataset(points, background, fm, domain.area)


def make_rng_stream(seed, stream):
    from .rng import make_rng

    return make_rng(seed, stream)


# ---------------------------------------------------------------------------
# sweep


@cli.command("sweep")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON with n1, n0_grid, replicates, estimators, seed, "
                   "spec_variant, include_top.")
@click.option("--replicates", default=None, type=int,
              help="Override the config's replicate count.")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_sweep(config_path, replicates, out):
    """Run the misspecification sweep and write the long-format CSV."""
    raw = _load_json(config_path)
    cfg = {
        "command": "sweep",
        "n1": int(raw.get("n1", 3000)),
        "n0_grid": [int(v) for v in raw.get("n0_grid", DEFAULT_N0_GRID)],
        "replicates": int(raw.get("replicates", 20)),
        "estimators": list(raw.get("estimators", ESTIMATORS)),
        "seed": int(raw.get("seed", 17)),
        "spec_variant": raw.get("spec_variant", "mixture45"),
        "include_top": bool(raw.get("include_top", False)),
    }
    if replicates is not None:
        cfg["replicates"] = replicates
    if cfg["spec_variant"] not in SPEC_VARIANTS:
        raise CliInputError(
            f"spec_variant must be one of {sorted(SPEC_VARIANTS)}")
    for est in cfg["estimators"]:
        if est not in ESTIMATORS:
            raise CliInputError(f"unknown estimator {est!r}")

    try:
        sweep = run_sweep(
            SPEC_VARIANTS[cfg["spec_variant"]](), n1=cfg["n1"],
            n0_grid=cfg["n0_grid"], replicates=cfg["replicates"],
            estimators=tuple(cfg["estimators"]), seed=cfg["seed"],
            include_top=cfg["include_top"],
        )
    except FitError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)

    comments = [f"ponly {__version__}",
                f"config: {dumps(cfg, compact=True)}"]
    if out:
        emit_figure_data(sweep, out, header_comments=comments)
    else:
        emit_figure_data(sweep, sys.stdout, header_comments=comments)


# ---------------------------------------------------------------------------
# check


@cli.command("check")
@click.option("--data", "data_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Check one dataset instead of the standard random sweep.")
@click.option("--area", default=None, type=float)
@click.option("--datasets", default=50, type=int,
              help="Number of datasets in the standard sweep.")
@click.option("--seed", default=20260810, type=int)
@click.option("--tol", default=None, type=float,
              help="Override every check tolerance.")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_check(data_path, area, datasets, seed, tol, out):
    """Run equivalence checks; exit 0 only if every check passes."""
    lines = []
    failures = 0

    def record(report):
        nonlocal failures
        doc = {"version": __version__, "seed": seed}
        doc.update(report.to_json_dict())
        lines.append(dumps(doc, compact=True))
        if not report.passed:
            failures += 1

    tols = {}
    if tol is not None:
        tols = {"tol_prop1": tol, "tol_prop2": tol, "tol_scores": tol}

    try:
        if data_path is not None:
            if area is None:
                raise CliInputError("--area is required with --data")
            try:
                data = read_csv(data_path, domain_area=area)
            except ValueError as exc:
                raise CliInputError(f"{data_path}: {exc}") from None
            t1 = tols.get("tol_prop1", 1e-8)
            t2 = tols.get("tol_prop2", 1e-6)
            record(check_prop1(data, tolerance=t1))
            record(check_prop2(data, tolerance=t2))
            record(check_scores(fit_ipp(data), data,
                                tolerance=tols.get("tol_scores", 1e-8)))
        else:
            for report in run_standard_checks(n_datasets=datasets, seed=seed,
                                              **tols):
                record(report)
    except FitError as exc:
        doc = {"version": __version__, "seed": seed,
               "error": {"type": type(exc).__name__, "message": str(exc)}}
        _write_out("\n".join(lines + [dumps(doc, compact=True)]) + "\n", out)
        sys.exit(2)

    _write_out("\n".join(lines) + "\n", out)
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(3)


def main(argv=None):
    """Entry point mapping usage errors to exit code 1."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code if isinstance(exc, CliInputError) else 1
    except SystemExit as exc:
        return exc.code or 0


if __name__ == "__main__":
    sys.exit(main())
