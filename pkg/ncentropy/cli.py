#!/usr/bin/env python3
"""
Command-line surface: layer measures, entropy estimation and the experiments

Exit codes: 0 success, 2 input or parameter error, 3 degenerate data,
4 training divergence.
"""

import functools
import json
import logging
import sys
from pathlib import Path

import click

from ncentropy import config
from ncentropy.correlation import neuronal_correlation, structure_correlation_coefficient, weight_correlation
from ncentropy.data import (
    load_csv, manifest_for, read_manifest, sample_from_manifest, sample_gaussian, save_csv, write_manifest,
)
from ncentropy.entropy import estimate_entropy
from ncentropy.errors import NcEntropyError, ParameterError
from ncentropy.experiments import (
    run_epsilon_experiment, run_ge_experiment, run_groundtruth_experiment, run_init_sweep,
    run_linear_experiment, scale_params,
)
from ncentropy.kernel import default_width_grid, select_kernel_width
from ncentropy.models import (
    Activation, ConnectivityPattern, EntropyMethod, EstimatorConfig, EstimatorKind, Init, KernelConfig,
    KernelKind,
    ReportEncoder, Space,
)
from ncentropy.snapshot_io import read_snapshots
from ncentropy.utils import nats_to_bits

# Get logger
logger = logging.getLogger("ncentropy")


def handle_errors(func):
    """Log library errors with the failing operation and exit with its code"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except NcEntropyError as e:
            logger.error(f"Error: {e}")
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def _dump(payload):
    click.echo(json.dumps(payload, cls=ReportEncoder, indent=2))


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(item) for item in str(value).split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(item) for item in str(value).split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _echo_correlation(name, report, as_json):
    if as_json:
        _dump(report.to_dict())
        return
    click.echo(f"{name}: {report.value:.6f}")
    click.echo(f"pairs: {report.pair_count}")
    click.echo(f"skipped pairs: {report.skipped_pairs}")


@click.group()
def cli():
    """Neuronal correlation, weight correlation and kernel-embedding entropy"""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Activation CSV, samples x neurons")
@click.option("--has-labels", is_flag=True, help="Drop the label column before measuring")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def nc(input_path, has_labels, as_json):
    """Neuronal correlation of a layer's activations"""
    dataset = load_csv(input_path, has_labels)
    _echo_correlation("NC", neuronal_correlation(dataset.inputs), as_json)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Weight CSV, m rows x n columns")
@click.option("--abs", "absolute", is_flag=True, help="Average |cos| instead of the signed cosine")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def wc(input_path, absolute, as_json):
    """Weight correlation of a layer's weight matrix"""
    dataset = load_csv(input_path)
    _echo_correlation("WC", weight_correlation(dataset.inputs, absolute=absolute), as_json)


@cli.command()
@click.option("--fully-connected", "fully_connected", nargs=2, type=int, default=None, help="M N")
@click.option("--conv1d", nargs=3, type=int, default=None, help="LENGTH WIDTH STRIDE")
@click.option("--conv2d", nargs=4, type=int, default=None, help="HEIGHT WIDTH FILTER STRIDE")
@click.option("--parents", type=click.Path(), default=None, help="JSON list of parent-index lists")
@click.option("--gamma", "gamma", type=float, default=config.DEFAULT_GAMMA, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def gamma(fully_connected, conv1d, conv2d, parents, gamma, as_json):
    """Structure-correlation coefficient of a connectivity pattern"""
    given = [option for option in (fully_connected, conv1d, conv2d, parents) if option]
    if len(given) != 1:
        raise ParameterError(
            "give exactly one of --fully-connected, --conv1d, --conv2d, --parents", "structure_correlation_coefficient")
    if fully_connected:
        pattern = ConnectivityPattern.fully_connected(*fully_connected, gamma=gamma)
    elif conv1d:
        pattern = ConnectivityPattern.conv1d(*conv1d, gamma=gamma)
    elif conv2d:
        pattern = ConnectivityPattern.conv2d(*conv2d, gamma=gamma)
    else:
        try:
            lists = json.loads(Path(parents).read_text())
        except (OSError, ValueError) as e:
            raise ParameterError(f"cannot read parent lists from {parents}: {e}", "structure_correlation_coefficient")
        pattern = ConnectivityPattern.from_parent_lists(lists, gamma=gamma)
    report = structure_correlation_coefficient(pattern)
    if as_json:
        payload = report.to_dict()
        payload.update({"m": pattern.m, "n": pattern.n, "gamma": gamma})
        _dump(payload)
        return
    click.echo(f"Gamma: {report.value:.6g}")
    click.echo(f"m: {pattern.m}  n: {pattern.n}  gamma: {gamma:g}")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Activation CSV")
@click.option("--space", type=click.Choice([s.value for s in Space]), default=Space.PROJECTED.value, show_default=True)
@click.option("--estimator", type=click.Choice([e.value for e in EstimatorKind]),
              default=EstimatorKind.KNN.value, show_default=True)
@click.option("--bins", type=int, default=config.DEFAULT_BINS, show_default=True)
@click.option("--k", "k", type=int, default=config.DEFAULT_K, show_default=True)
@click.option("--kernel", type=click.Choice([k.value for k in KernelKind]), default=config.DEFAULT_KERNEL)
@click.option("--sigma", type=float, default=None, help="Fixed kernel width")
@click.option("--select-width", is_flag=True, help="Pick sigma by alignment with the label kernel")
@click.option("--method", type=click.Choice([m.value for m in EntropyMethod]), default=EntropyMethod.EVD.value,
              show_default=True, help="Projected space: scaled coordinates (evd) or Gram distances (gram)")
@click.option("--beta", type=float, default=config.DEFAULT_BETA, show_default=True)
@click.option("--grid-size", type=int, default=config.DEFAULT_GRID_SIZE, show_default=True)
@click.option("--has-labels", is_flag=True, help="CSV carries a label column")
@click.option("--max-samples", type=int, default=config.KERNEL_MAX_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--bits", is_flag=True, help="Report in bits instead of nats")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def entropy(input_path, space, estimator, bins, k, kernel, sigma, select_width, method, beta, grid_size,
            has_labels, max_samples, seed, bits, as_json):
    """Entropy of a layer's activations in the original or projected space"""
    dataset = load_csv(input_path, has_labels)
    estimator_cfg = EstimatorConfig(kind=estimator, bins=bins, k=k, seed=seed)
    kernel_cfg = None
    if Space(space) == Space.PROJECTED:
        if sigma is None and not select_width:
            raise ParameterError("projected space needs --sigma or --select-width", "entropy_kernel_embedding")
        labels = None
        grid = None
        if select_width and sigma is None:
            if dataset.labels is None:
                raise ParameterError("--select-width needs labels (--has-labels)", "select_kernel_width")
            labels = dataset.labels
            grid = default_width_grid(dataset.inputs, grid_size)
        kernel_cfg = KernelConfig(kind=kernel, sigma=sigma, labels=labels, beta=beta, grid=grid,
                                  max_samples=max_samples, seed=seed, method=method)
    estimate = estimate_entropy(dataset.inputs, space, kernel_cfg, estimator_cfg)
    payload = estimate.to_dict()
    payload["unit"] = "bits" if bits else "nats"
    if bits:
        payload["value"] = nats_to_bits(estimate.value)
    if as_json:
        _dump(payload)
        return
    click.echo(f"H ({space}, {estimate.estimator.value}): {payload['value']:.6f} {payload['unit']}")
    for key, value in estimate.diagnostics.items():
        if key != "width_selection":
            click.echo(f"  {key}: {value}")
    if "width_selection" in estimate.diagnostics:
        click.echo("  sigma grid:")
        for candidate in estimate.diagnostics["width_selection"]["grid"]:
            click.echo(f"    sigma={candidate['sigma']:.6g} A={candidate['alignment']:.4f} "
                       f"rho={candidate['dim_correlation']:.4f} objective={candidate['objective']:.4f}")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Activation CSV with a label column")
@click.option("--kernel", type=click.Choice([k.value for k in KernelKind]), default=config.DEFAULT_KERNEL)
@click.option("--beta", type=float, default=config.DEFAULT_BETA, show_default=True)
@click.option("--grid-size", type=int, default=config.DEFAULT_GRID_SIZE, show_default=True)
@click.option("--grid", callback=_float_list, default=None, help="Comma-separated sigma values")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def width(input_path, kernel, beta, grid_size, grid, as_json):
    """Kernel-width selection trace"""
    dataset = load_csv(input_path, has_labels=True)
    grid = grid or default_width_grid(dataset.inputs, grid_size)
    selection = select_kernel_width(dataset.inputs, dataset.labels, beta, grid, kernel)
    if as_json:
        _dump(selection.to_dict())
        return
    click.echo(f"sigma: {selection.sigma:.6g}  objective: {selection.objective:.4f}")
    for candidate in selection.grid:
        click.echo(f"  sigma={candidate.sigma:.6g} A={candidate.alignment:.4f} "
                   f"rho={candidate.dim_correlation:.4f} objective={candidate.objective:.4f}")


@cli.command()
@click.option("--n", "n", type=int, default=config.GROUNDTRUTH_SAMPLES, show_default=True)
@click.option("--d", "d", type=int, default=config.GROUNDTRUTH_DIM, show_default=True)
@click.option("--variance", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None, help="CSV path; manifest goes alongside")
@click.option("--manifest", type=click.Path(), default=None, help="Regenerate from an existing manifest")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def synth(n, d, variance, seed, out_path, manifest, as_json):
    """Seeded isotropic Gaussian dataset with a reproducibility manifest"""
    if manifest:
        spec = read_manifest(manifest)
        dataset = sample_from_manifest(spec)
    else:
        dataset = sample_gaussian(n, d, variance, seed)
        spec = manifest_for(dataset, variance)
    out = Path(out_path or Path(config.OUTPUT_DIR) / f"gaussian_n{spec.n}_d{spec.d}_seed{spec.seed}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(dataset.inputs, out)
    manifest_path = out.with_suffix(".manifest.json")
    write_manifest(spec, manifest_path)
    logger.info(f"Wrote {spec.n} samples to {out}")
    if as_json:
        _dump({"csv": str(out), "manifest": str(manifest_path), **spec.dict()})
        return
    click.echo(f"samples: {out}")
    click.echo(f"manifest: {manifest_path}")


@cli.command("snapshot-info")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def snapshot_info(input_path, as_json):
    """Summarize a snapshot container"""
    snapshots = read_snapshots(input_path)
    spec = snapshots[0].spec
    if as_json:
        _dump({"spec": spec.to_dict(), "snapshots": [s.to_dict() for s in snapshots]})
        return
    click.echo(f"structure: {'-'.join(str(size) for size in spec.layer_sizes)} "
               f"({spec.activation.value}, {spec.init.value}, seed {spec.seed})")
    for snapshot in snapshots:
        click.echo(f"  epoch {snapshot.epoch}: loss {snapshot.loss:.4f} "
                   f"train {snapshot.train_accuracy:.3f} test {snapshot.test_accuracy:.3f}")


def experiment_options(func):
    """Flags shared by every experiment command"""
    options = [
        click.option("--out", "out_dir", type=click.Path(), default=config.OUTPUT_DIR, show_default=True),
        click.option("--seeds", callback=_int_list, default=",".join(map(str, config.DEFAULT_SEEDS)),
                     show_default=True, help="Comma-separated seeds"),
        click.option("--paper-scale", is_flag=True, help="Published epochs, seeds and sample counts"),
        click.option("--workers", type=int, default=config.WORKERS, show_default=True),
        click.option("--quiet", is_flag=True, help="No progress bars"),
        click.option("--json", "as_json", is_flag=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def training_options(func):
    options = [
        click.option("--images", type=click.Path(), default=None, help="MNIST training images (IDX)"),
        click.option("--labels", type=click.Path(), default=None, help="MNIST training labels (IDX)"),
        click.option("--subset-size", type=int, default=config.DEFAULT_SUBSET, show_default=True),
        click.option("--lr", type=float, default=config.DEFAULT_LR, show_default=True),
        click.option("--batch", type=int, default=config.DEFAULT_BATCH, show_default=True),
        click.option("--init", type=click.Choice([i.value for i in Init]), default=Init.XAVIER.value,
                     show_default=True),
        click.option("--save-snapshots", is_flag=True, help="Write each run's snapshots as a .cent file"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _finish(report, as_json):
    if as_json:
        click.echo(report.to_json())
        return
    click.echo(f"{report.experiment}:")
    for key, value in report.summary.items():
        click.echo(f"  {key}: {value}")
    for claim, passed in report.claims.items():
        click.echo(f"  [{'PASS' if passed else 'FAIL'}] {claim}")


@cli.command("experiment-linear")
@experiment_options
@training_options
@click.option("--structure", default=config.LINEAR_STRUCTURE, show_default=True)
@click.option("--activation", type=click.Choice([a.value for a in Activation]), default=Activation.IDENTITY.value)
@click.option("--epochs", type=int, default=config.LINEAR_EPOCHS, show_default=True)
@click.option("--record-every", type=int, default=config.LINEAR_RECORD_EVERY, show_default=True)
@click.option("--eval-samples", type=int, default=config.LINEAR_EVAL_SAMPLES, show_default=True)
@click.option("--estimator", type=click.Choice([e.value for e in EstimatorKind]), default=EstimatorKind.KNN.value)
@click.option("--bins", type=int, default=config.DEFAULT_BINS)
@click.option("--k", "k", type=int, default=config.DEFAULT_K)
@click.option("--kernel", type=click.Choice([k.value for k in KernelKind]), default=config.DEFAULT_KERNEL)
@click.option("--beta", type=float, default=config.DEFAULT_BETA)
@click.option("--grid-size", type=int, default=config.DEFAULT_GRID_SIZE)
@handle_errors
def experiment_linear(out_dir, seeds, paper_scale, workers, quiet, as_json, images, labels, subset_size, lr,
                      batch, init, save_snapshots, structure, activation, epochs, record_every, eval_samples,
                      estimator, bins, k, kernel, beta, grid_size):
    """Entropy through the layers of an identity network"""
    params = scale_params({
        "structure": structure, "activation": activation, "init": init, "epochs": epochs,
        "record_every": record_every, "subset_size": subset_size, "eval_samples": eval_samples, "seeds": seeds,
        "lr": lr, "batch": batch, "estimator": estimator, "bins": bins, "k": k, "kernel": kernel, "beta": beta,
        "grid_size": grid_size, "images": images, "labels": labels, "workers": workers, "quiet": quiet,
        "save_snapshots": save_snapshots,
    }, paper_scale)
    _finish(run_linear_experiment(params, out_dir), as_json)


@cli.command("experiment-groundtruth")
@experiment_options
@click.option("--n", "n", type=int, default=config.GROUNDTRUTH_SAMPLES, show_default=True)
@click.option("--d", "d", type=int, default=config.GROUNDTRUTH_DIM, show_default=True)
@click.option("--variances", callback=_float_list, default=",".join(map(str, config.GROUNDTRUTH_VARIANCES)),
              show_default=True)
@click.option("--init", type=click.Choice([i.value for i in Init]), default=Init.XAVIER.value)
@click.option("--estimator", type=click.Choice([e.value for e in EstimatorKind]), default=EstimatorKind.KNN.value)
@click.option("--bins", type=int, default=config.DEFAULT_BINS)
@click.option("--k", "k", type=int, default=config.DEFAULT_K)
@click.option("--kernel", type=click.Choice([k.value for k in KernelKind]), default=config.DEFAULT_KERNEL)
@click.option("--sigma", type=float, default=None, help="Fixed kernel width (default: median distance)")
@click.option("--max-samples", type=int, default=config.KERNEL_MAX_SAMPLES, show_default=True)
@handle_errors
def experiment_groundtruth(out_dir, seeds, paper_scale, workers, quiet, as_json, n, d, variances, init,
                           estimator, bins, k, kernel, sigma, max_samples):
    """Estimates against the analytic entropy of isotropic Gaussians"""
    params = scale_params({
        "n": n, "d": d, "variances": variances, "seeds": seeds, "init": init, "estimator": estimator,
        "bins": bins, "k": k, "kernel": kernel, "sigma": sigma, "max_samples": max_samples, "workers": workers,
        "quiet": quiet,
    }, paper_scale)
    _finish(run_groundtruth_experiment(params, out_dir), as_json)


def _architectures(ctx, param, value):
    if not value:
        return dict(config.GE_ARCHITECTURES)
    architectures = {}
    for item in value:
        name, _, notation = item.partition("=")
        if not notation:
            raise click.BadParameter(f"expected NAME=STRUCTURE, got {item!r}")
        architectures[name] = notation
    return architectures


@cli.command("experiment-ge")
@experiment_options
@training_options
@click.option("--test-images", type=click.Path(), default=None)
@click.option("--test-labels", type=click.Path(), default=None)
@click.option("--architecture", "architectures", multiple=True, callback=_architectures,
              help="NAME=STRUCTURE, repeatable (default N3, N4, N5)")
@click.option("--activation", "activations", multiple=True, type=click.Choice(["relu", "tanh"]),
              default=("relu", "tanh"), show_default=True)
@click.option("--epochs", type=int, default=config.GE_EPOCHS, show_default=True)
@click.option("--record-every", type=int, default=config.GE_RECORD_EVERY, show_default=True)
@click.option("--eval-samples", type=int, default=2000, show_default=True)
@handle_errors
def experiment_ge(out_dir, seeds, paper_scale, workers, quiet, as_json, images, labels, subset_size, lr, batch,
                  init, save_snapshots, test_images, test_labels, architectures, activations, epochs, record_every,
                  eval_samples):
    """Penultimate-layer NC/WC against the generalization gap"""
    params = scale_params({
        "architectures": architectures, "activations": list(activations), "init": init, "epochs": epochs,
        "record_every": record_every, "subset_size": subset_size, "eval_samples": eval_samples, "seeds": seeds,
        "lr": lr, "batch": batch, "images": images, "labels": labels, "test_images": test_images,
        "test_labels": test_labels, "workers": workers, "quiet": quiet, "save_snapshots": save_snapshots,
    }, paper_scale)
    _finish(run_ge_experiment(params, out_dir), as_json)


@cli.command("experiment-epsilon")
@experiment_options
@training_options
@click.option("--structure", default=config.EPSILON_STRUCTURE, show_default=True)
@click.option("--activation", "activations", multiple=True, type=click.Choice([a.value for a in Activation]),
              default=("relu", "tanh", "identity"), show_default=True)
@click.option("--layers", callback=_int_list, default=",".join(map(str, config.EPSILON_LAYERS)), show_default=True)
@click.option("--epochs", type=int, default=config.EPSILON_EPOCHS, show_default=True)
@click.option("--record-every", type=int, default=config.LINEAR_RECORD_EVERY, show_default=True)
@click.option("--eval-samples", type=int, default=config.LINEAR_EVAL_SAMPLES, show_default=True)
@handle_errors
def experiment_epsilon(out_dir, seeds, paper_scale, workers, quiet, as_json, images, labels, subset_size, lr,
                       batch, init, save_snapshots, structure, activations, layers, epochs, record_every,
                       eval_samples):
    """NC of outputs against NC of pre-activations over training"""
    params = scale_params({
        "structure": structure, "activations": list(activations), "layers": layers, "init": init,
        "epochs": epochs, "record_every": record_every, "subset_size": subset_size, "eval_samples": eval_samples,
        "seeds": seeds, "lr": lr, "batch": batch, "images": images, "labels": labels, "workers": workers,
        "quiet": quiet, "save_snapshots": save_snapshots,
    }, paper_scale)
    _finish(run_epsilon_experiment(params, out_dir), as_json)


@cli.command("sweep-init")
@click.option("--out", "out_dir", type=click.Path(), default=config.OUTPUT_DIR, show_default=True)
@click.option("--m-range", callback=_int_list, default=",".join(map(str, config.SWEEP_SIZES)), show_default=True)
@click.option("--n-range", callback=_int_list, default=",".join(map(str, config.SWEEP_SIZES)), show_default=True)
@click.option("--fixed-m", type=int, default=config.SWEEP_FIXED, show_default=True)
@click.option("--fixed-n", type=int, default=config.SWEEP_FIXED, show_default=True)
@click.option("--init", "inits", multiple=True, type=click.Choice([i.value for i in Init]),
              default=config.SWEEP_INITS, show_default=True)
@click.option("--seeds", "sweep_seeds", type=int, default=config.SWEEP_SEEDS, show_default=True,
              help="Seeds 0..N-1 per grid point")
@click.option("--gamma", type=float, default=config.DEFAULT_GAMMA, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def sweep_init(out_dir, m_range, n_range, fixed_m, fixed_n, inits, sweep_seeds, gamma, as_json):
    """Weight correlation at initialization against layer width"""
    params = {
        "m_range": m_range, "n_range": n_range, "fixed_m": fixed_m, "fixed_n": fixed_n, "inits": list(inits),
        "sweep_seeds": sweep_seeds, "seeds": list(range(sweep_seeds)), "gamma": gamma,
    }
    _finish(run_init_sweep(params, out_dir), as_json)
