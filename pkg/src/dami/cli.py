"""``dami`` command line entry point.

Kernel grammar: ``S(i,j,k)^t*C(l,m,n)^t`` -- ``S`` (space) or ``C`` (channel),
comma-separated point ids, optional ``^exponent``, primitives joined by ``*``.

Exit codes: 0 success, 2 validation error, 3 null-space dominated run.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import REPORT_FAMILIES, cv, invariance_report, knn_crossval, sample_dual
from .core import (
    COUNTING,
    MODES,
    DamiError,
    KernelSpec,
    NegativeBaseError,
    NullSpaceError,
    ValidationError,
    ZeroInvariant,
    parse_expr,
    serialize_expr,
)
from .datasets import base_cloud, classification_dataset
from .enumerate import STABLE_IDS, build_manifest, enumerate_kernels, reference_invariants
from .evaluation import eval_poly, evaluate_batch
from .io import label_from_filename, provenance, read_object, write_object, write_table
from .moments import central_moments
from .oracle import DEFAULT_BUDGET, brute_covariant
from .symbolic import build_invariant, expand_kernel, with_mode
from .transform import apply_dual

EXIT_VALIDATION = 2
EXIT_NULLSPACE = 3


def common(fn):
    """Options every command accepts."""
    fn = click.option("--seed", type=int, default=0, show_default=True, help="Seed for all randomness.")(fn)
    fn = click.option("--mode", type=click.Choice(MODES), default=COUNTING, show_default=True,
                      help="Normalization: counting (point-cloud invariant) or paper (density form).")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="Output file or directory.")(fn)

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NullSpaceError, NegativeBaseError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NULLSPACE)
        except (ValidationError, ZeroInvariant, DamiError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


dims = [
    click.option("--space-dim", "-M", type=int, default=3, show_default=True),
    click.option("--channel-dim", "-N", type=int, default=3, show_default=True),
]


def with_dims(fn):
    for opt in reversed(dims):
        fn = opt(fn)
    return fn


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _load_exprs(expr_dir: str | None, mode: str, space_dim: int, channel_dim: int):
    if expr_dir is None:
        if (space_dim, channel_dim) != (3, 3):
            raise ValidationError("built-in invariant set is 3-D/3-channel; pass --expr-dir")
        return reference_invariants(mode=mode)
    paths = sorted(Path(expr_dir).glob("*.json"))
    if not paths:
        raise ValidationError(f"no expression JSON files in {expr_dir}")
    exprs = []
    for p in paths:
        try:
            e = parse_expr(p.read_text())
        except ValidationError as exc:
            raise ValidationError(f"{p}: {exc}") from None
        exprs.append(with_mode(e, mode))
    return exprs


@click.group(help=__doc__)
@click.version_option(__version__, prog_name="dami")
def main():
    pass


@main.command("enumerate")
@with_dims
@click.option("--max-degree", type=int, default=4, show_default=True)
@click.option("--max-order", type=int, default=4, show_default=True)
@click.option("--dual/--no-dual", default=True, show_default=True, help="Require both space and channel primitives.")
@common
def enumerate_cmd(space_dim, channel_dim, max_degree, max_order, dual, out, mode, seed):
    """Enumerate canonical kernels; write expression JSONs and a manifest CSV."""
    specs = enumerate_kernels(space_dim, channel_dim, max_degree, max_order, dual)
    rows = build_manifest(specs, mode)
    out_dir = Path(out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    table = []
    for i, row in enumerate(rows, start=1):
        d = row.as_dict()
        name = ""
        if not row.zero:
            label = f"ID {row.table_id}" if row.table_id is not None else f"K{i:03d}"
            name = f"{i:03d}.json"
            expr = build_invariant(row.kernel, mode, label=label)
            (out_dir / name).write_text(serialize_expr(expr) + "\n")
        table.append({"file": name, **d})
    write_table(out_dir / "manifest.csv", table,
                comment=provenance(seed=seed, mode=mode, M=space_dim, N=channel_dim,
                                   max_degree=max_degree, max_order=max_order, dual=int(dual)))
    n_extra = sum(r.extra for r in rows)
    click.echo(f"{len(rows)} kernels ({sum(r.zero for r in rows)} zero, {n_extra} not in the reference set) "
               f"-> {out_dir}")


@main.command()
@click.option("--kernel", "-k", required=True, help="Kernel, e.g. 'S(1,2,3)*C(1,2,3)'.")
@with_dims
@click.option("--json", "as_json", is_flag=True, help="Print the full expression JSON instead.")
@common
def expand(kernel, space_dim, channel_dim, as_json, out, mode, seed):
    """Expand a kernel into central moments."""
    spec = KernelSpec.parse(kernel, space_dim, channel_dim)
    if as_json:
        text = serialize_expr(build_invariant(spec, mode, allow_zero=True)) + "\n"
    else:
        text = str(expand_kernel(spec)) + "\n"
    _emit(text, out)


@main.command("eval")
@click.option("--expr-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of expression JSONs (default: the 21 non-zero 3-D/3-channel reference invariants).")
@click.option("--object", "objects", type=click.Path(exists=True, dir_okay=False), multiple=True, required=True)
@with_dims
@click.option("--prescale", is_flag=True, help="Divide centered axes by their max-abs before moments.")
@common
def eval_cmd(expr_dir, objects, space_dim, channel_dim, prescale, out, mode, seed):
    """Evaluate invariants on one or more objects; one feature row per object."""
    exprs = _load_exprs(expr_dir, mode, space_dim, channel_dim)
    objs = [read_object(p, space_dim, channel_dim) for p in objects]
    res = evaluate_batch(exprs, objs, prescale=prescale)
    rows = [{"object": Path(p).name, **{lab: float(v) for lab, v in zip(res.labels, row)}}
            for p, row in zip(objects, res.values)]
    text = write_table(out, rows, ["object"] + res.labels, comment=provenance(seed=seed, mode=mode))
    if out is None:
        click.echo(text, nl=False)
    for (i, j), msg in sorted(res.errors.items()):
        click.echo(f"warning: {Path(objects[i]).name} / {res.labels[j]}: {msg}", err=True)
    if res.values.size and res.n_missing == res.values.size:
        sys.exit(EXIT_NULLSPACE)


@main.command()
@click.option("--object", "obj_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--family", type=click.Choice(list(REPORT_FAMILIES) + ["identity"]), default="dual",
              show_default=True)
@with_dims
@common
def transform(obj_path, family, space_dim, channel_dim, out, mode, seed):
    """Apply a seeded random transform; writes the object CSV and a JSON sidecar with the maps."""
    if out is None:
        raise ValidationError("--out is required")
    obj = read_object(obj_path, space_dim, channel_dim)
    spatial, channel = sample_dual(obj, family, np.random.default_rng(seed))
    result = apply_dual(obj, spatial, channel)
    write_object(out, result, comment=provenance(seed=seed, family=family))
    sidecar = {"tool": f"dami {__version__}", "seed": seed, "family": family,
               "spatial": spatial.to_dict(), "channel": channel.to_dict()}
    Path(str(out) + ".json").write_text(json.dumps(sidecar, indent=1) + "\n")
    click.echo(f"{family} transform (seed {seed}) -> {out}")


@main.command()
@click.option("--object", "obj_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--expr-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--trials", type=int, default=10, show_default=True)
@with_dims
@common
def invariance(obj_path, expr_dir, trials, space_dim, channel_dim, out, mode, seed):
    """CV of each invariant per transform family."""
    obj = read_object(obj_path, space_dim, channel_dim)
    exprs = _load_exprs(expr_dir, mode, space_dim, channel_dim)
    table = invariance_report(obj, exprs, trials=trials, seed=seed)
    text = write_table(out, table.rows(), ["invariant"] + table.columns,
                       comment=provenance(seed=seed, mode=mode, trials=trials))
    if out is None:
        click.echo(text, nl=False)


@main.command()
@click.option("--dataset", type=click.Path(exists=True, file_okay=False), required=True,
              help="Directory of object CSVs; filename prefix before '_' is the class label.")
@click.option("--expr-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Feature expressions (default: the six stable reference invariants).")
@click.option("--k", "k_neighbors", type=int, default=1, show_default=True)
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--no-standardize", is_flag=True)
@with_dims
@common
def classify(dataset, expr_dir, k_neighbors, folds, no_standardize, space_dim, channel_dim, out, mode, seed):
    """KNN k-fold cross-validation on invariant features."""
    if expr_dir is None:
        exprs = reference_invariants(STABLE_IDS, mode)
    else:
        exprs = _load_exprs(expr_dir, mode, space_dim, channel_dim)
    paths = sorted(Path(dataset).glob("*.csv"))
    if not paths:
        raise ValidationError(f"no object CSVs in {dataset}")
    labels = [label_from_filename(p) for p in paths]
    objs = [read_object(p, space_dim, channel_dim) for p in paths]
    feats = evaluate_batch(exprs, objs)
    report = knn_crossval(feats.values, labels, k_neighbors, folds, seed, standardize=not no_standardize)
    rows = [{"fold": i + 1, "accuracy": a} for i, a in enumerate(report.fold_accuracies)]
    rows.append({"fold": "mean", "accuracy": report.mean_accuracy})
    text = write_table(out, rows, ["fold", "accuracy"],
                       comment=provenance(seed=seed, mode=mode, k=k_neighbors, folds=folds,
                                          stratified=int(report.stratified)))
    if out is None:
        click.echo(text, nl=False)
    click.echo(f"mean accuracy {report.mean_accuracy:.4f} over {folds} folds "
               f"({len(objs)} objects, {len(set(labels))} classes)", err=True)


@main.command()
@click.option("--object", "obj_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--kernel", "-k", required=True)
@click.option("--budget", type=float, default=DEFAULT_BUDGET, show_default=True, help="Maximum point tuples.")
@click.option("--sample", is_flag=True, help="Sample tuples when the budget is exceeded.")
@with_dims
@common
def verify(obj_path, kernel, budget, sample, space_dim, channel_dim, out, mode, seed):
    """Compare the brute-force tuple sum with the symbolic expansion."""
    obj = read_object(obj_path, space_dim, channel_dim)
    spec = KernelSpec.parse(kernel, space_dim, channel_dim)
    poly = expand_kernel(spec)
    res = brute_covariant(obj, spec, int(budget), sample=sample, seed=seed)
    symbolic = eval_poly(poly, central_moments(obj, poly.keys()))
    err = abs(res.value - symbolic) / res.magnitude if res.magnitude else abs(res.value - symbolic)
    lines = [f"oracle    {res.value!r}", f"symbolic  {symbolic!r}", f"rel_error {err!r}",
             f"tuples    {res.n_tuples}{'' if res.exact else ' (sampled, approximate)'}"]
    _emit("\n".join(lines) + "\n", out)


@main.command()
@click.option("--classes", type=int, default=10, show_default=True)
@click.option("--points", type=int, default=500, show_default=True)
@click.option("--variants", type=int, default=0, show_default=True,
              help="Dual-affine copies per class (0 writes base clouds only).")
@common
def synth(classes, points, variants, out, mode, seed):
    """Write seeded synthetic colored clouds, one CSV per object."""
    out_dir = Path(out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if variants:
        data = classification_dataset(classes, variants, points, seed)
        counts: dict[str, int] = {}
        for label, obj in data:
            idx = counts.get(label, 0)
            counts[label] = idx + 1
            write_object(out_dir / f"{label}_{idx:03d}.csv", obj, comment=provenance(seed=seed))
        n = len(data)
    else:
        for i, s in enumerate(np.random.SeedSequence(seed).spawn(classes)):
            write_object(out_dir / f"{i}_000.csv", base_cloud(np.random.default_rng(s), points),
                         comment=provenance(seed=seed))
        n = classes
    click.echo(f"wrote {n} objects -> {out_dir}")


if __name__ == "__main__":
    main()
