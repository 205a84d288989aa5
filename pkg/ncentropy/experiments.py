#!/usr/bin/env python3
"""
Desk-scale experiment runners

Each runner returns an ExperimentReport (config echo, metric tables, summary
statistics and pass/fail of the comparative claims) and writes the report
JSON, one CSV per table and SVG figures into the output directory. Seeds and
architectures run in a thread pool; results are assembled in submission order.
"""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path

import numpy as np

from ncentropy import config
from ncentropy.correlation import (
    empirical_covariance, neuronal_correlation, pairwise_weight_cosines,
    preactivation_correlation, structure_correlation_coefficient,
)
from ncentropy.data import load_idx, make_blobs, sample_gaussian, subset, train_test_split
from ncentropy.entropy import entropy_kernel_embedding, entropy_original, gaussian_entropy_analytic
from ncentropy.errors import ParameterError
from ncentropy.kernel import default_width_grid
from ncentropy.models import (
    Activation, ConnectivityPattern, EstimatorConfig, ExperimentReport, GaussianSpec, Init, KernelConfig,
)
from ncentropy.network import (
    forward_record, generalization_gap, initialize, penultimate_layer, preactivations,
    spec_from_notation, train, wc_vs_structure_sweep,
)
from ncentropy.plots import category_lines, line_panels
from ncentropy.snapshot_io import write_snapshots
from ncentropy.utils import iqr, spearman

# Get logger
logger = logging.getLogger("ncentropy")


def load_experiment_data(images=None, labels=None, test_images=None, test_labels=None,
                         subset_size=config.DEFAULT_SUBSET, seed=0):
    """
    MNIST subset when IDX paths are given, otherwise seeded synthetic class
    blobs of the same shape of problem

    Returns:
        tuple: (train_set, test_set, source)
    """
    if images and labels:
        full = load_idx(images, labels)
        train_part = subset(full, subset_size, seed)
        if test_images and test_labels:
            test_set = subset(load_idx(test_images, test_labels), max(subset_size // 5, 1), seed)
            return train_part, test_set, "idx"
        train_set, test_set = train_test_split(train_part, 0.2, seed)
        return train_set, test_set, "idx"

    logger.warning("No IDX files given; using synthetic class blobs in place of MNIST")
    blobs = make_blobs(
        n=subset_size, d=config.SYNTHETIC_DIM, classes=config.SYNTHETIC_CLASSES,
        cluster_std=config.SYNTHETIC_CLUSTER_STD, seed=seed, center_box=config.SYNTHETIC_CENTER_BOX)
    train_set, test_set = train_test_split(blobs, 0.2, seed)
    return train_set, test_set, "synthetic"


def run_parallel(func, items, workers=config.WORKERS):
    """Map over items in a thread pool, results in input order"""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def write_table(rows, path):
    if not rows:
        Path(path).write_text("")
        return
    fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_report(report: ExperimentReport, out_dir):
    """Report JSON plus one CSV per table"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in report.tables.items():
        write_table(rows, out / f"{report.experiment}_{name}.csv")
    path = out / f"{report.experiment}.json"
    path.write_text(report.to_json())
    logger.info(f"Report written to {path}")
    return path


def _new_report(experiment, params):
    return ExperimentReport(experiment=experiment, created_at=datetime.now(), config=params)


def _median_by(rows, keys, value):
    """Median of `value` grouped by the tuple of `keys`, groups in first-seen order"""
    groups = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row[value])
    return {group: float(np.median(values)) for group, values in groups.items()}


def _quiet(params):
    """Progress bars only for a single worker; threads would overwrite each other's line"""
    return params["quiet"] or params["workers"] > 1


def _save_snapshots(params, out_dir, name, snapshots):
    if not params.get("save_snapshots"):
        return None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.cent"
    write_snapshots(path, snapshots)
    return path


def _estimator(kind, bins, k, seed):
    return EstimatorConfig(kind=kind, bins=bins, k=k, seed=seed)


def scale_params(params, paper_scale):
    """Raise epochs, seeds and sample counts to the published protocol"""
    if not paper_scale:
        return params
    scaled = dict(params)
    if "epochs" in scaled:
        scaled["epochs"] = config.PAPER_SCALE_EPOCHS
    if "seeds" in scaled:
        scaled["seeds"] = list(config.PAPER_SCALE_SEEDS)
    if "subset_size" in scaled:
        scaled["subset_size"] = config.PAPER_SCALE_SUBSET
    scaled["paper_scale"] = True
    return scaled


# Entropy through linear layers

def volume_normalized(snapshot):
    """
    Function-preserving rescale of an identity network so that every square
    hidden-to-hidden layer has |det W| = 1

    Scaling layer l by c and the following weights by 1/c leaves the outputs
    unchanged, and the hidden layers then share one true entropy.
    """
    normalized = snapshot.copy()
    for index in range(1, len(normalized.weights) - 1):
        weights = normalized.weights[index]
        if weights.shape[0] != weights.shape[1]:
            continue
        sign, logdet = np.linalg.slogdet(weights)
        if sign == 0:
            logger.debug(f"layer {index + 1} is singular; left unnormalized")
            continue
        scale = np.exp(-logdet / weights.shape[0])
        normalized.weights[index] = weights * scale
        normalized.biases[index] = normalized.biases[index] * scale
        normalized.weights[index + 1] = normalized.weights[index + 1] / scale
    return normalized


def _linear_seed(params, seed, out_dir):
    train_set, test_set, source = load_experiment_data(
        params["images"], params["labels"], None, None, params["subset_size"], seed)
    spec = spec_from_notation(
        params["structure"], train_set.inputs.shape[1], max(train_set.n_classes, test_set.n_classes),
        Activation.IDENTITY, Init(params["init"]), seed)
    snapshots = train(
        initialize(spec), train_set, params["epochs"], params["lr"], params["batch"],
        params["record_every"], test_set, quiet=_quiet(params), label=f"linear seed {seed}")
    _save_snapshots(params, out_dir, f"experiment_linear_{params['structure']}_seed{seed}", snapshots)
    evaluation = subset(train_set, params["eval_samples"], seed)
    estimator = _estimator(params["estimator"], params["bins"], params["k"], seed)

    rows = []
    for snapshot in snapshots:
        measured = volume_normalized(snapshot)
        for layer in range(1, spec.hidden_layers + 1):
            activations = forward_record(measured, evaluation.inputs, layer).values
            kernel_cfg = KernelConfig(
                kind=params["kernel"], labels=evaluation.labels, beta=params["beta"],
                grid=default_width_grid(activations, params["grid_size"]), seed=seed)
            original = entropy_original(activations, estimator)
            projected = entropy_kernel_embedding(activations, kernel_cfg, estimator)
            rows.append({
                "seed": seed,
                "epoch": snapshot.epoch,
                "layer": layer,
                "entropy_original": original.value,
                "entropy_projected": projected.value,
                "nc_original": neuronal_correlation(activations).value,
                "nc_projected": projected.diagnostics["dim_correlation_projected"],
                "sigma": projected.diagnostics["sigma"],
                "retained_rank": projected.diagnostics["retained_rank"],
            })
        logger.info(f"linear seed {seed}: epoch {snapshot.epoch} measured on {spec.hidden_layers} layers")
    return rows, source


def run_linear_experiment(params, out_dir):
    """Entropy and NC per layer and epoch of an identity network, in both spaces"""
    if Activation(params.get("activation", "identity")) != Activation.IDENTITY:
        raise ParameterError("the linear experiment requires identity activation", "experiment_linear")
    results = run_parallel(lambda seed: _linear_seed(params, seed, out_dir), params["seeds"], params["workers"])
    rows = [row for seed_rows, _ in results for row in seed_rows]

    gaps = []
    for (seed, epoch), group in _group(rows, ("seed", "epoch")).items():
        original = [row["entropy_original"] for row in group]
        projected = [row["entropy_projected"] for row in group]
        gaps.append({
            "seed": seed,
            "epoch": epoch,
            "gap_original": max(original) - min(original),
            "gap_projected": max(projected) - min(projected),
        })

    curves = []
    for (epoch, layer), group in _group(rows, ("epoch", "layer")).items():
        curves.append({
            "epoch": epoch,
            "layer": layer,
            "entropy_original": float(np.median([r["entropy_original"] for r in group])),
            "entropy_projected": float(np.median([r["entropy_projected"] for r in group])),
            "nc_original": float(np.median([r["nc_original"] for r in group])),
            "nc_projected": float(np.median([r["nc_projected"] for r in group])),
        })

    gap_original = [g["gap_original"] for g in gaps]
    gap_projected = [g["gap_projected"] for g in gaps]
    nc_original = float(np.median([r["nc_original"] for r in rows]))
    nc_projected = float(np.median([r["nc_projected"] for r in rows]))

    report = _new_report("experiment_linear", params)
    report.tables = {"measurements": rows, "curves": curves, "gaps": gaps}
    report.summary = {
        "data_source": results[0][1],
        "gap_original_median": float(np.median(gap_original)),
        "gap_original_iqr": iqr(gap_original),
        "gap_projected_median": float(np.median(gap_projected)),
        "gap_projected_iqr": iqr(gap_projected),
        "nc_original_median": nc_original,
        "nc_projected_median": nc_projected,
    }
    report.claims = {
        "projected_gap_smaller": bool(np.median(gap_projected) < np.median(gap_original)),
        "projected_nc_below_0_1": bool(nc_projected < 0.1),
        "original_nc_above_projected": bool(nc_original > nc_projected),
    }
    report.notes = [
        "estimate-error range: per-epoch max - min entropy across layers, "
        "summarized by median and IQR over epochs (all seeds pooled)",
        "square hidden-to-hidden layers are measured after a function-preserving rescale to |det W| = 1",
    ]
    _plot_linear(curves, gaps, out_dir)
    write_report(report, out_dir)
    return report


def _group(rows, keys):
    groups = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    return groups


def _series_by_layer(curves, column):
    series = {}
    for layer, group in _group(curves, ("layer",)).items():
        series[f"layer {layer[0]}"] = ([r["epoch"] for r in group], [r[column] for r in group])
    return series


def _plot_linear(curves, gaps, out_dir):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    gap_epochs = _median_by(gaps, ("epoch",), "gap_original")
    gap_projected = _median_by(gaps, ("epoch",), "gap_projected")
    epochs = [epoch for (epoch,) in gap_epochs]
    line_panels(os.path.join(out_dir, "experiment_linear.svg"), [
        {"title": "(a) entropy, original space", "xlabel": "epoch", "ylabel": "nats",
         "series": _series_by_layer(curves, "entropy_original")},
        {"title": "(b1) NC, original space", "xlabel": "epoch", "ylabel": "NC",
         "series": _series_by_layer(curves, "nc_original")},
        {"title": "(b2) NC, projected space", "xlabel": "epoch", "ylabel": "NC",
         "series": _series_by_layer(curves, "nc_projected")},
        {"title": "(c) entropy, projected space", "xlabel": "epoch", "ylabel": "nats",
         "series": _series_by_layer(curves, "entropy_projected")},
        {"title": "(d) estimate-error range", "xlabel": "epoch", "ylabel": "max - min (nats)",
         "series": {"original": (epochs, list(gap_epochs.values())),
                    "projected": (epochs, list(gap_projected.values()))}},
    ])


# Entropy against the Gaussian ground truth

def volume_preserving_layer(snapshot):
    """Rescale the first weight matrix to |det W| = 1 so entropy is unchanged by the map"""
    weights = snapshot.weights[0]
    d = weights.shape[0]
    if weights.shape[1] != d:
        raise ParameterError("the ground-truth layer must be square", "experiment_groundtruth")
    _, logdet = np.linalg.slogdet(weights)
    snapshot.weights[0] = weights * np.exp(-logdet / d)
    return snapshot


def _groundtruth_case(params, variance, seed):
    n, d = params["n"], params["d"]
    samples = sample_gaussian(n, d, variance, seed).inputs
    analytic = gaussian_entropy_analytic(GaussianSpec.isotropic(d, variance))
    spec = spec_from_notation(f"I-{d}-O", d, 2, Activation.IDENTITY, Init(params["init"]), seed)
    snapshot = volume_preserving_layer(initialize(spec))
    mapped = forward_record(snapshot, samples, 1).values
    estimator = _estimator(params["estimator"], params["bins"], params["k"], seed)
    kernel_cfg = KernelConfig(kind=params["kernel"], sigma=params.get("sigma"),
                              max_samples=params["max_samples"], seed=seed)

    rows = []
    for source, label, data in (("raw", f"var={variance:g}", samples), ("network", f"var={variance:g}*", mapped)):
        original = entropy_original(data, estimator).value
        projected = entropy_kernel_embedding(data, kernel_cfg, estimator)
        rows.append({
            "variance": variance,
            "seed": seed,
            "input": source,
            "label": label,
            "analytic": analytic,
            "entropy_original": original,
            "entropy_projected": projected.value,
            "error_original": original - analytic,
            "error_projected": projected.value - analytic,
            "nc_input": neuronal_correlation(data).value,
            "sigma": projected.diagnostics["sigma"],
        })
    logger.info(f"groundtruth variance {variance:g} seed {seed}: analytic {analytic:.4f} nats")
    return rows


def run_groundtruth_experiment(params, out_dir):
    """Original- and projected-space estimates against the analytic Gaussian entropy"""
    cases = [(variance, seed) for variance in params["variances"] for seed in params["seeds"]]
    results = run_parallel(lambda case: _groundtruth_case(params, *case), cases, params["workers"])
    rows = [row for case_rows in results for row in case_rows]

    network_rows = [row for row in rows if row["input"] == "network"]
    better = [abs(r["error_projected"]) < abs(r["error_original"]) for r in network_rows]
    relative = [abs(r["error_projected"]) / abs(r["analytic"]) for r in network_rows]

    report = _new_report("experiment_groundtruth", params)
    report.tables = {"estimates": rows}
    report.summary = {
        "analytic": {f"{v:g}": gaussian_entropy_analytic(GaussianSpec.isotropic(params["d"], v))
                     for v in params["variances"]},
        "max_relative_error_projected": float(max(relative)),
        "mean_abs_error_original_network": float(np.mean([abs(r["error_original"]) for r in network_rows])),
        "mean_abs_error_projected_network": float(np.mean([abs(r["error_projected"]) for r in network_rows])),
    }
    report.claims = {
        "projected_closer_after_network": bool(all(better)),
        "projected_relative_error_below_15pct": bool(max(relative) < 0.15),
    }
    report.notes = [
        "the network layer is rescaled to |det W| = 1, so both inputs share one analytic entropy",
    ]
    _plot_groundtruth(rows, out_dir)
    write_report(report, out_dir)
    return report


def _plot_groundtruth(rows, out_dir):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    labels = list(dict.fromkeys(row["label"] for row in rows))
    analytic = _median_by(rows, ("label",), "analytic")
    original = _median_by(rows, ("label",), "entropy_original")
    projected = _median_by(rows, ("label",), "entropy_projected")
    category_lines(os.path.join(out_dir, "experiment_groundtruth.svg"), labels, {
        "ground truth": [analytic[(label,)] for label in labels],
        "projected space": [projected[(label,)] for label in labels],
        "original space": [original[(label,)] for label in labels],
    }, title="Entropy against the Gaussian ground truth")


# Correlation against generalization

def _ge_run(params, architecture, activation, seed, out_dir):
    train_set, test_set, source = load_experiment_data(
        params["images"], params["labels"], params["test_images"], params["test_labels"],
        params["subset_size"], seed)
    spec = spec_from_notation(
        params["architectures"][architecture], train_set.inputs.shape[1],
        max(train_set.n_classes, test_set.n_classes), activation, Init(params["init"]), seed)
    snapshots = train(
        initialize(spec), train_set, params["epochs"], params["lr"], params["batch"],
        params["record_every"], test_set, quiet=_quiet(params), label=f"{architecture}/{activation} seed {seed}")
    _save_snapshots(params, out_dir, f"experiment_ge_{architecture}_{activation}_seed{seed}", snapshots)
    evaluation = subset(train_set, params["eval_samples"], seed).inputs

    rows = []
    for snapshot in snapshots:
        record = generalization_gap(snapshot, train_set, test_set, eval_inputs=evaluation)
        cosines = pairwise_weight_cosines(snapshot.weight_matrix(penultimate_layer(snapshot)))
        q1, q2, q3 = np.percentile(cosines, [25, 50, 75])
        rows.append({
            "architecture": architecture,
            "activation": activation,
            "seed": seed,
            "epoch": snapshot.epoch,
            "nc": record.nc_penultimate,
            "wc": record.wc_penultimate,
            "wc_q1": float(q1),
            "wc_q2": float(q2),
            "wc_q3": float(q3),
            "gap": record.gap,
            "train_accuracy": record.train_accuracy,
            "test_accuracy": record.test_accuracy,
        })
    logger.info(f"{architecture}/{activation} seed {seed}: final NC {rows[-1]['nc']:.3f} gap {rows[-1]['gap']:.3f}")
    return rows, source


def run_ge_experiment(params, out_dir):
    """Penultimate NC/WC and the generalization gap across architectures"""
    for name, notation in params["architectures"].items():
        if any(not token.isdigit() and token not in ("I", "O") for token in notation.split("-")):
            raise ParameterError(f"{name} ({notation}) is not fully connected", "experiment_ge")
    jobs = [(architecture, activation, seed)
            for activation in params["activations"]
            for architecture in params["architectures"]
            for seed in params["seeds"]]
    results = run_parallel(lambda job: _ge_run(params, *job, out_dir), jobs, params["workers"])
    rows = [row for job_rows, _ in results for row in job_rows]

    final_epoch = max(row["epoch"] for row in rows)
    finals = [row for row in rows if row["epoch"] == final_epoch]
    summary_rows = []
    claims = {}
    for activation in params["activations"]:
        final_nc = []
        final_gap = []
        for architecture in params["architectures"]:
            group = [r for r in finals if r["architecture"] == architecture and r["activation"] == activation]
            entry = {
                "activation": activation,
                "architecture": architecture,
                "final_nc": float(np.median([r["nc"] for r in group])),
                "final_wc": float(np.median([r["wc"] for r in group])),
                "final_gap": float(np.median([r["gap"] for r in group])),
            }
            summary_rows.append(entry)
            final_nc.append(entry["final_nc"])
            final_gap.append(entry["final_gap"])
        rank = spearman(final_nc, final_gap)
        for entry in summary_rows[-len(params["architectures"]):]:
            entry["nc_gap_spearman"] = rank
        claims[f"{activation}_nc_increasing"] = bool(all(a < b for a, b in zip(final_nc, final_nc[1:])))
        claims[f"{activation}_nc_gap_spearman_positive"] = bool(rank > 0)

    report = _new_report("experiment_ge", params)
    report.tables = {"curves": rows, "summary": summary_rows}
    report.summary = {"data_source": results[0][1], "final_epoch": final_epoch}
    report.claims = claims
    _plot_ge(rows, params, out_dir)
    write_report(report, out_dir)
    return report


def _plot_ge(rows, params, out_dir):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    for activation in params["activations"]:
        panels = []
        for architecture in params["architectures"]:
            group = [r for r in rows if r["architecture"] == architecture and r["activation"] == activation]
            nc = _median_by(group, ("epoch",), "nc")
            gap = _median_by(group, ("epoch",), "gap")
            q1 = _median_by(group, ("epoch",), "wc_q1")
            q2 = _median_by(group, ("epoch",), "wc_q2")
            q3 = _median_by(group, ("epoch",), "wc_q3")
            epochs = [epoch for (epoch,) in nc]
            panels.append({"title": f"{architecture} WC quartiles", "xlabel": "epoch", "ylabel": "cosine",
                           "series": {"median": (epochs, list(q2.values()))},
                           "band": {"IQR": (epochs, list(q1.values()), list(q3.values()))}})
            panels.append({"title": f"{architecture} NC / gap", "xlabel": "epoch", "ylabel": "value",
                           "series": {"NC": (epochs, list(nc.values())), "gap": (epochs, list(gap.values()))}})
        line_panels(os.path.join(out_dir, f"experiment_ge_{activation}.svg"), panels, columns=2,
                    title=f"penultimate layer, {activation}")


# Nonlinearity gap epsilon

def _epsilon_run(params, activation, seed, out_dir):
    train_set, test_set, source = load_experiment_data(
        params["images"], params["labels"], None, None, params["subset_size"], seed)
    spec = spec_from_notation(
        params["structure"], train_set.inputs.shape[1], max(train_set.n_classes, test_set.n_classes),
        activation, Init(params["init"]), seed)
    for layer in params["layers"]:
        if not 1 <= layer <= spec.hidden_layers:
            raise ParameterError(f"layer {layer} is not a hidden layer of {params['structure']}", "experiment_epsilon")
    snapshots = train(
        initialize(spec), train_set, params["epochs"], params["lr"], params["batch"],
        params["record_every"], test_set, quiet=_quiet(params), label=f"epsilon {activation} seed {seed}")
    _save_snapshots(params, out_dir, f"experiment_epsilon_{activation}_seed{seed}", snapshots)
    evaluation = subset(train_set, params["eval_samples"], seed).inputs

    rows = []
    for snapshot in snapshots:
        for layer in params["layers"]:
            previous = evaluation if layer == 1 else forward_record(snapshot, evaluation, layer - 1).values
            sigma_prev = empirical_covariance(previous)
            nc_t = neuronal_correlation(forward_record(snapshot, evaluation, layer)).value
            nc_u = preactivation_correlation(snapshot.weights[layer - 1], sigma_prev).value
            rows.append({
                "activation": activation,
                "seed": seed,
                "epoch": snapshot.epoch,
                "layer": layer,
                "nc_t": nc_t,
                "nc_u": nc_u,
                "nc_u_empirical": neuronal_correlation(preactivations(snapshot, evaluation, layer)).value,
                "epsilon": abs(nc_t - nc_u),
            })
    return rows, source


def run_epsilon_experiment(params, out_dir):
    """rho(T_l), rho(U_l) and epsilon_l over training"""
    jobs = [(activation, seed) for activation in params["activations"] for seed in params["seeds"]]
    results = run_parallel(lambda job: _epsilon_run(params, *job, out_dir), jobs, params["workers"])
    rows = [row for job_rows, _ in results for row in job_rows]

    final_epoch = max(row["epoch"] for row in rows)
    final = _median_by([r for r in rows if r["epoch"] == final_epoch], ("activation", "layer"), "epsilon")
    claims = {}
    for (activation, layer), value in final.items():
        if activation == Activation.TANH.value:
            claims[f"tanh_layer{layer}_epsilon_below_0_2"] = bool(value < 0.2)
        elif activation == Activation.IDENTITY.value:
            claims[f"identity_layer{layer}_epsilon_below_0_02"] = bool(value < 0.02)

    report = _new_report("experiment_epsilon", params)
    report.tables = {"curves": rows}
    report.summary = {
        "data_source": results[0][1],
        "final_epoch": final_epoch,
        "final_epsilon": {f"{activation}/layer{layer}": value for (activation, layer), value in final.items()},
    }
    report.claims = claims
    _plot_epsilon(rows, out_dir)
    write_report(report, out_dir)
    return report


def _plot_epsilon(rows, out_dir):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    panels = []
    for (activation, layer), group in _group(rows, ("activation", "layer")).items():
        series = {}
        for column, label in (("nc_t", "rho(T)"), ("nc_u", "rho(U)"), ("epsilon", "epsilon")):
            curve = _median_by(group, ("epoch",), column)
            series[label] = ([epoch for (epoch,) in curve], list(curve.values()))
        panels.append({"title": f"{activation}, layer {layer}", "xlabel": "epoch", "ylabel": "value",
                       "series": series})
    line_panels(os.path.join(out_dir, "experiment_epsilon.svg"), panels, columns=2)


# Weight correlation at initialization

def structure_table(gamma=config.DEFAULT_GAMMA):
    """Gamma_l for the fully connected layers and the convolutional connectivity patterns"""
    patterns = {
        "fully_connected_784_30": ConnectivityPattern.fully_connected(784, 30, gamma),
        "fully_connected_100_100": ConnectivityPattern.fully_connected(100, 100, gamma),
        "conv2d_32x32_filter3": ConnectivityPattern.conv2d(32, 32, 3, 1, gamma),
        "conv2d_32x32_filter6": ConnectivityPattern.conv2d(32, 32, 6, 1, gamma),
    }
    return [{"pattern": name, "m": pattern.m, "n": pattern.n,
             "gamma_l": structure_correlation_coefficient(pattern).value}
            for name, pattern in patterns.items()]


def run_init_sweep(params, out_dir):
    """Mean |WC| over seeds as either layer width grows, for each initialization"""
    rows = wc_vs_structure_sweep(
        params["m_range"], params["n_range"], params["inits"], params["sweep_seeds"],
        params["fixed_m"], params["fixed_n"], params["gamma"])

    trends = []
    claims = {}
    for init in params["inits"]:
        for axis in ("m", "n"):
            group = [r for r in rows if r["init"] == init and r["axis"] == axis]
            rho = spearman([r[axis] for r in group], [r["mean_abs_wc"] for r in group])
            trends.append({"init": init, "axis": axis, "spearman": rho})
        claims[f"{init}_wc_decreases_with_m"] = bool(trends[-2]["spearman"] < -0.8)
        claims[f"{init}_wc_increases_with_n"] = bool(trends[-1]["spearman"] > 0.8)

    report = _new_report("sweep_init", params)
    report.tables = {"sweep": rows, "trends": trends, "structures": structure_table(params["gamma"])}
    report.claims = claims
    _plot_sweep(rows, params, out_dir)
    write_report(report, out_dir)
    return report


def _plot_sweep(rows, params, out_dir):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    panels = []
    for axis, title in (("m", f"(a) vary m, n={params['fixed_n']}"), ("n", f"(b) vary n, m={params['fixed_m']}")):
        series = {}
        for init in params["inits"]:
            group = [r for r in rows if r["init"] == init and r["axis"] == axis]
            series[init] = ([r[axis] for r in group], [r["mean_abs_wc"] for r in group])
        panels.append({"title": title, "xlabel": axis, "ylabel": "mean |WC|", "series": series})
    line_panels(os.path.join(out_dir, "sweep_init.svg"), panels, columns=2)
