"""Command-line interface.

Subcommands: condense (run an algorithm, write a subset file), verify (run
guarantee checkers against a subset, emit JSON reports), stats (one-line
dataset summary), generate (write a synthetic dataset CSV), bench (sweep
algorithms over alphas and datasets into a CSV), heatmap (sample a grid
quantity into a CSV). Report paths also render a figure next to the CSV
unless --no-fig is given.

Datasets are CSV paths or synthetic descriptors of the form
``synth:n=1000,d=2,c=3,seed=42[,generator=uniform-voronoi-seeded]``.
The NNC_THREADS environment variable caps query threads of the tree
backend; results do not depend on it.
"""
from __future__ import annotations

import json
import statistics
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import condense as cond
from . import core, data, verify
from .errors import NNCError

_ALGOS = {
    "rss": lambda ts, alpha, xi, prune, force: cond.alpha_rss(ts, alpha),
    "rss-fast": lambda ts, alpha, xi, prune, force: cond.alpha_rss_fast(ts, alpha, xi or 0.0),
    "sfcnn": lambda ts, alpha, xi, prune, force: cond.alpha_sfcnn(ts, alpha),
    "fcnn": lambda ts, alpha, xi, prune, force: cond.alpha_fcnn(ts, alpha),
    "net": lambda ts, alpha, xi, prune, force: cond.alpha_net(ts, alpha, prune=prune),
    "hss": lambda ts, alpha, xi, prune, force: cond.alpha_hss(ts, alpha, force_quadratic=force),
}

_CRITERIA = ("consistent", "selective", "density-bound", "coreset",
             "approx-coreset", "weak-coreset")


def _fail(exc: NNCError) -> None:
    detail = f" ({exc.details})" if getattr(exc, "details", None) else ""
    click.echo(f"error: {exc}{detail}", err=True)
    sys.exit(1)


def _resolve(dataset: str, normalize: bool, label_column, force_quadratic: bool):
    """Turn a --dataset value into (name, TrainingSet)."""
    if dataset.startswith("synth:"):
        spec = _parse_synth(dataset)
        desc = data.DatasetDescriptor(name=dataset, source=spec, normalize=normalize)
    else:
        desc = data.DatasetDescriptor(
            name=Path(dataset).stem, source=dataset,
            label_column=label_column, normalize=normalize,
        )
    return desc.name, desc.resolve(force_quadratic=force_quadratic)


def _parse_synth(text: str) -> data.SyntheticSpec:
    body = text[len("synth:"):]
    fields = {}
    for part in body.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return data.SyntheticSpec(
            n=int(fields["n"]), d=int(fields["d"]), class_count=int(fields["c"]),
            seed=int(fields["seed"]),
            generator=fields.get("generator", data.GENERATOR_VORONOI),
        )
    except KeyError as exc:
        raise click.UsageError(
            f"synthetic descriptor needs n, d, c, seed (missing {exc}); "
            "example: synth:n=1000,d=2,c=3,seed=42"
        )
    except ValueError as exc:
        raise click.UsageError(f"bad synthetic descriptor: {exc}")


dataset_opt = click.option("--dataset", required=True,
                           help="CSV path or synth:n=..,d=..,c=..,seed=.. descriptor.")
normalize_opt = click.option("--normalize", is_flag=True,
                             help="Rescale to unit diameter after loading.")
label_col_opt = click.option("--label-column", type=int, default=None,
                             help="Label column position (default: last).")
force_opt = click.option("--force-quadratic", is_flag=True,
                         help="Allow O(n^2) steps on sets beyond the size gate.")
no_fig_opt = click.option("--fig/--no-fig", "render_fig", default=True,
                          help="Render a figure next to the CSV (default on).")


@click.group()
@click.version_option(package_name="nnc")
def main():
    """Margin-parameterized training-set condensation with verifiable
    nearest-neighbor guarantees."""


@main.command("condense")
@dataset_opt
@click.option("--algo", required=True, type=click.Choice(sorted(_ALGOS)),
              help="Condensation algorithm.")
@click.option("--alpha", required=True, type=float, help="Margin parameter, >= 0.")
@click.option("--xi", type=float, default=None,
              help="Approximation factor; rss-fast only.")
@click.option("--prune", is_flag=True, help="Backward pruning pass; net only.")
@normalize_opt
@label_col_opt
@force_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Subset file to write.")
def cmd_condense(dataset, algo, alpha, xi, prune, normalize, label_column,
                 force_quadratic, out):
    """Condense a dataset and write the selected indices."""
    if xi is not None and algo != "rss-fast":
        raise click.UsageError("--xi only applies to rss-fast")
    if prune and algo != "net":
        raise click.UsageError("--prune only applies to net")
    try:
        name, ts = _resolve(dataset, normalize, label_column, force_quadratic)
        t0 = time.perf_counter_ns()
        subset = _ALGOS[algo](ts, alpha, xi, prune, force_quadratic)
        elapsed = time.perf_counter_ns() - t0
        data.save_subset(subset, out)
        kappa = core.compute_stats(ts).kappa
    except NNCError as exc:
        _fail(exc)
    click.echo(
        f"|R|={subset.size} |R|/kappa={subset.size / kappa:.4f} "
        f"time={elapsed / 1e6:.3f}ms"
    )


@main.command("verify")
@dataset_opt
@click.option("--subset", "subset_path", required=True, type=click.Path(exists=True),
              help="Subset file produced by condense.")
@click.option("--criterion", "criteria", multiple=True, required=True,
              type=click.Choice(_CRITERIA), help="Checker(s) to run.")
@click.option("--alpha", type=float, default=None,
              help="Margin parameter (default: the subset file's).")
@click.option("--epsilon", type=float, default=None,
              help="Coreset approximation bound.")
@click.option("--xi", type=float, default=None,
              help="Query-time approximation factor (approx-coreset).")
@click.option("--samples", type=int, default=10_000, show_default=True,
              help="Sampled-check query count.")
@click.option("--seed", type=int, default=42, show_default=True,
              help="Sampler seed.")
@click.option("--sampler", type=click.Choice(verify.QuerySampler.STRATEGIES),
              default="uniform", show_default=True)
@click.option("--scale", type=float, default=0.05, show_default=True,
              help="Gaussian sampler width as a fraction of the extent.")
@normalize_opt
@label_col_opt
@force_opt
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON reports here instead of stdout.")
def cmd_verify(dataset, subset_path, criteria, alpha, epsilon, xi, samples, seed,
               sampler, scale, normalize, label_column, force_quadratic, out):
    """Check guarantees of a condensed subset; exit 0 only if all pass."""
    try:
        name, ts = _resolve(dataset, normalize, label_column, force_quadratic)
        subset = data.load_subset(subset_path, ts)
        a = subset.alpha if alpha is None else alpha
        smp = verify.QuerySampler(strategy=sampler, count=samples, seed=seed, scale=scale)
        reports = []
        for crit in criteria:
            if crit == "consistent":
                reports.append(verify.check_alpha_consistent(ts, subset, a))
            elif crit == "selective":
                reports.append(verify.check_alpha_selective(ts, subset, a))
            elif crit == "density-bound":
                reports.append(verify.check_density_bound(ts, subset, a, smp))
            elif crit == "coreset":
                if epsilon is None:
                    raise click.UsageError("coreset needs --epsilon")
                reports.append(verify.check_coreset(ts, subset, epsilon, smp))
            elif crit == "approx-coreset":
                if epsilon is None or xi is None:
                    raise click.UsageError("approx-coreset needs --xi and --epsilon")
                reports.append(verify.check_approx_coreset(ts, subset, xi, epsilon, smp))
            elif crit == "weak-coreset":
                reports.append(verify.check_weak_coreset(ts, subset, a, smp))
    except NNCError as exc:
        _fail(exc)
    payload = json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
    if out:
        Path(out).write_text(payload + "\n")
        for r in reports:
            click.echo(
                f"{r.criterion}: {'PASS' if r.passed else 'FAIL'} "
                f"(violations={r.info.get('violation_count', 0)}, "
                f"samples={r.samples_tested})"
            )
    else:
        click.echo(payload)
    sys.exit(0 if all(r.passed for r in reports) else 1)


@main.command("stats")
@dataset_opt
@normalize_opt
@label_col_opt
@force_opt
def cmd_stats(dataset, normalize, label_column, force_quadratic):
    """Print: n d classes kappa (kappa as a percentage of n)."""
    try:
        name, ts = _resolve(dataset, normalize, label_column, force_quadratic)
        stats = core.compute_stats(ts, force_quadratic=force_quadratic)
    except NNCError as exc:
        _fail(exc)
    pct = 100.0 * stats.kappa / stats.n
    click.echo(f"{stats.n} {stats.d} {stats.class_count} {stats.kappa} ({pct:.2f}%)")


@main.command("generate")
@click.option("--n", required=True, type=int, help="Point count.")
@click.option("--d", required=True, type=int, help="Dimensions.")
@click.option("--classes", "c", required=True, type=int, help="Class count.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--generator", type=click.Choice(data.GENERATORS),
              default=data.GENERATOR_VORONOI, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="CSV file to write.")
def cmd_generate(n, d, c, seed, generator, out):
    """Write a deterministic synthetic dataset as CSV."""
    try:
        spec = data.SyntheticSpec(n=n, d=d, class_count=c, seed=seed, generator=generator)
        ts = data.generate_synthetic(spec)
        data.save_training_csv(ts, out)
    except NNCError as exc:
        _fail(exc)
    click.echo(f"wrote {ts.n} points, d={ts.d}, classes={ts.class_count} -> {out}")


@main.command("bench")
@click.option("--dataset", "datasets", multiple=True, required=True,
              help="One or more datasets (paths or synth: descriptors).")
@click.option("--algo", "algos", multiple=True, required=True,
              type=click.Choice(sorted(_ALGOS)))
@click.option("--alpha", "alphas", multiple=True, required=True, type=float)
@click.option("--xi", "xis", multiple=True, type=float,
              help="xi values for rss-fast cells (default 0).")
@click.option("--repeats", type=int, default=3, show_default=True)
@normalize_opt
@label_col_opt
@force_opt
@no_fig_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="CSV file to write.")
def cmd_bench(datasets, algos, alphas, xis, repeats, normalize, label_column,
              force_quadratic, render_fig, out):
    """Sweep algorithms x alphas x datasets, timing the condense call only."""
    if xis and "rss-fast" not in algos:
        raise click.UsageError("--xi only applies to rss-fast")
    if repeats < 1:
        raise click.UsageError("--repeats must be >= 1")
    fields = ["dataset", "algorithm", "alpha", "xi", "repeat", "wall_time_ns",
              "n", "subset_size", "kappa", "normalized_time", "normalized_size"]
    rows: list[dict] = []
    median_rows: list[dict] = []
    try:
        for ds_text in datasets:
            name, ts = _resolve(ds_text, normalize, label_column, force_quadratic)
            kappa = core.compute_stats(ts).kappa
            for algo in algos:
                xi_values = tuple(xis) if (algo == "rss-fast" and xis) else (0.0,)
                for alpha in alphas:
                    for xi in xi_values:
                        times = []
                        subset = None
                        for rep in range(1, repeats + 1):
                            ts.drop_caches()  # time the whole pipeline each run
                            t0 = time.perf_counter_ns()
                            subset = _ALGOS[algo](ts, alpha, xi, False, force_quadratic)
                            elapsed = time.perf_counter_ns() - t0
                            times.append(elapsed)
                            rows.append(_bench_row(
                                name, algo, alpha, xi, rep, elapsed, ts.n,
                                subset.size, kappa,
                            ))
                        med = statistics.median(times)
                        med_row = _bench_row(
                            name, algo, alpha, xi, "median", med, ts.n,
                            subset.size, kappa,
                        )
                        rows.append(med_row)
                        median_rows.append(med_row)
                        click.echo(
                            f"bench {name} {algo} alpha={alpha:g} xi={xi:g}: "
                            f"|R|={subset.size} median={med / 1e6:.3f}ms",
                            err=True,
                        )
    except NNCError as exc:
        _fail(exc)
    import csv as _csv
    with open(out, "w", newline="") as fh:
        w = _csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    if render_fig:
        from . import plots
        fig_path = plots.render_bench(median_rows, Path(out).with_suffix(".png"))
        click.echo(f"figure -> {fig_path}", err=True)


def _bench_row(dataset, algo, alpha, xi, rep, wall_ns, n, size, kappa) -> dict:
    return {
        "dataset": dataset, "algorithm": algo, "alpha": repr(float(alpha)),
        "xi": repr(float(xi)), "repeat": rep, "wall_time_ns": wall_ns,
        "n": n, "subset_size": size, "kappa": kappa,
        "normalized_time": repr(wall_ns / n),
        "normalized_size": repr(size / kappa),
    }


@main.command("heatmap")
@dataset_opt
@click.option("--subset", "subset_path", type=click.Path(exists=True), default=None,
              help="Measure densities against this subset instead of the full set.")
@click.option("--grid", type=int, default=100, show_default=True,
              help="Grid resolution per axis.")
@click.option("--quantity", type=click.Choice(["density", "beta-mask"]),
              default="density", show_default=True)
@click.option("--beta", type=float, default=None,
              help="Region threshold for beta-mask.")
@click.option("--alpha", type=float, default=None,
              help="Alternative to --beta: beta = 2/alpha.")
@normalize_opt
@label_col_opt
@force_opt
@no_fig_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="CSV file to write (x,y,value rows).")
def cmd_heatmap(dataset, subset_path, grid, quantity, beta, alpha, normalize,
                label_column, force_quadratic, render_fig, out):
    """Sample the chromatic density field (or the separated-region mask) on a
    2-D grid. Density values are clipped to [0, 10] for presentation."""
    if grid < 2:
        raise click.UsageError("--grid must be >= 2")
    if quantity == "beta-mask" and beta is None and alpha is None:
        raise click.UsageError("beta-mask needs --beta or --alpha")
    if beta is None and alpha is not None and alpha <= 0:
        raise click.UsageError("--alpha must be > 0 to derive beta")
    try:
        name, ts = _resolve(dataset, normalize, label_column, force_quadratic)
        if ts.d != 2:
            raise click.UsageError("heatmap needs a 2-D dataset")
        sub = data.load_subset(subset_path, ts).indices if subset_path else None
        smp = verify.QuerySampler(strategy="grid", count=grid * grid, seed=42)
        Q = smp.sample(ts)
        ev = verify._QueryEval(ts, Q, np.asarray(sub, dtype=np.int64) if sub else None)
        if quantity == "density":
            values = ev.density_R() if sub else ev.density_P()
            values = np.clip(values, 0.0, 10.0)
            text = [repr(float(v)) for v in values]
            title = f"chromatic density ({name})"
        else:
            b = beta if beta is not None else 2.0 / alpha
            mask = (ev.density_P() >= b).astype(np.int64)
            text = [str(int(v)) for v in mask]
            title = f"separated region at beta={b:g} ({name})"
    except NNCError as exc:
        _fail(exc)
    with open(out, "w") as fh:
        fh.write("x,y,value\n")
        for (x, y), v in zip(Q, text):
            fh.write(f"{float(x)!r},{float(y)!r},{v}\n")
    if render_fig:
        from . import plots
        numeric = np.asarray([float(v) for v in text])
        fig_path = plots.render_heatmap(
            Q[:, 0], Q[:, 1], numeric, ts.coords, ts.labels, title,
            Path(out).with_suffix(".png"),
        )
        click.echo(f"figure -> {fig_path}", err=True)


if __name__ == "__main__":
    main()
