#!/usr/bin/env python3
"""
Minimal fully connected network: initialization, SGD training, per-layer
activation recording and generalization-gap measurement

Layers follow T_l = a(T_{l-1} W_l + b_l) with samples as rows, W_l an m x n
matrix. Hidden layers share one activation; the output layer is a softmax
trained with cross-entropy.
"""

import logging

import numpy as np
from scipy.special import log_softmax, softmax
from scipy.stats import truncnorm

from ncentropy.config import DEFAULT_BATCH, DEFAULT_GAMMA, DEFAULT_LR
from ncentropy.correlation import neuronal_correlation, weight_correlation
from ncentropy.errors import DivergenceError, ParameterError
from ncentropy.models import (
    Activation, ActivationMatrix, Dataset, GeneralizationRecord, Init, NetworkSnapshot, NetworkSpec,
)
from ncentropy.utils import as_matrix, print_progress_bar, subsample_rows

# Get logger
logger = logging.getLogger("ncentropy")

RANDOM_LIMIT = 0.05  # U(-0.05, 0.05)
TRUNCATED_STD = 0.05  # N(0, 0.05^2) cut at +-2 std


def parse_structure(notation, input_dim=None, output_dim=None):
    """
    Layer sizes from the "I-20-20-O" notation; I and O are resolved from the
    dataset dimensions
    """
    sizes = []
    for token in notation.strip().split("-"):
        token = token.strip()
        if token == "I":
            if input_dim is None:
                raise ParameterError("structure uses I but no input dimension was given", "parse_structure")
            sizes.append(int(input_dim))
        elif token == "O":
            if output_dim is None:
                raise ParameterError("structure uses O but no output dimension was given", "parse_structure")
            sizes.append(int(output_dim))
        elif token.isdigit():
            sizes.append(int(token))
        else:
            raise ParameterError(f"unsupported layer token {token!r}; only fully connected layers", "parse_structure")
    if len(sizes) < 2:
        raise ParameterError(f"structure {notation!r} needs at least an input and an output", "parse_structure")
    return sizes


def format_structure(spec: NetworkSpec):
    """The notation the network was built from, or the explicit sizes"""
    if spec.notation:
        return spec.notation
    return "-".join(str(size) for size in spec.layer_sizes)


def spec_from_notation(notation, input_dim=None, output_dim=None,
                       activation=Activation.RELU, init=Init.XAVIER, seed=0):
    sizes = parse_structure(notation, input_dim, output_dim)
    return NetworkSpec(layer_sizes=sizes, activation=activation, init=init, seed=seed, notation=notation.strip())


def initialize_layer(m, n, init, rng):
    """One m x n weight matrix drawn with the given scheme"""
    init = Init(init)
    if init == Init.RANDOM:
        return rng.uniform(-RANDOM_LIMIT, RANDOM_LIMIT, size=(m, n))
    if init == Init.TRUNCATED_NORMAL:
        return truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=TRUNCATED_STD, size=(m, n), random_state=rng)
    if init == Init.XAVIER:
        limit = np.sqrt(6.0 / (m + n))
        return rng.uniform(-limit, limit, size=(m, n))
    return rng.normal(0.0, np.sqrt(2.0 / m), size=(m, n))


def initialize(spec: NetworkSpec):
    """Epoch-0 snapshot; biases start at zero"""
    rng = np.random.default_rng(spec.seed)
    weights = []
    biases = []
    for m, n in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        weights.append(initialize_layer(m, n, spec.init, rng))
        biases.append(np.zeros(n))
    return NetworkSnapshot(spec=spec, epoch=0, weights=weights, biases=biases)


def _activate(u, activation):
    if activation == Activation.RELU:
        return np.maximum(u, 0.0)
    if activation == Activation.TANH:
        return np.tanh(u)
    return u


def _activation_derivative(u, activation):
    if activation == Activation.RELU:
        return (u > 0.0).astype(np.float64)
    if activation == Activation.TANH:
        return 1.0 - np.tanh(u) ** 2
    return np.ones_like(u)


def forward_pass(snapshot: NetworkSnapshot, inputs):
    """
    Returns:
        tuple: (pre, post) lists indexed 0..k+1; pre[0] is None, post[0] the
        inputs, post[k+1] the softmax output
    """
    x = as_matrix(inputs, "forward_pass")
    activation = snapshot.spec.activation
    pre = [None]
    post = [x]
    last = len(snapshot.weights)
    for layer, (w, b) in enumerate(zip(snapshot.weights, snapshot.biases), start=1):
        u = post[-1] @ w + b
        pre.append(u)
        post.append(softmax(u, axis=1) if layer == last else _activate(u, activation))
    return pre, post


def _check_layer(snapshot, layer, operation):
    if not 1 <= layer <= len(snapshot.weights):
        raise ParameterError(f"layer {layer} out of range [1, {len(snapshot.weights)}]", operation)


def forward_record(snapshot: NetworkSnapshot, inputs, layer):
    """Samples x neurons outputs T_layer (softmax probabilities for the output layer)"""
    _check_layer(snapshot, layer, "forward_record")
    _, post = forward_pass(snapshot, inputs)
    return ActivationMatrix(values=post[layer], layer_id=layer, epoch=snapshot.epoch)


def preactivations(snapshot: NetworkSnapshot, inputs, layer):
    """U_layer = T_{layer-1} W_layer + b_layer"""
    _check_layer(snapshot, layer, "preactivations")
    pre, _ = forward_pass(snapshot, inputs)
    return pre[layer]


def logits(snapshot: NetworkSnapshot, inputs):
    pre, _ = forward_pass(snapshot, inputs)
    return pre[-1]


def predict(snapshot: NetworkSnapshot, inputs):
    return np.argmax(logits(snapshot, inputs), axis=1)


def accuracy(snapshot: NetworkSnapshot, dataset: Dataset):
    if dataset is None or len(dataset) == 0:
        raise ParameterError("dataset is empty", "accuracy")
    if dataset.labels is None:
        raise ParameterError("dataset has no labels", "accuracy")
    return float(np.mean(predict(snapshot, dataset.inputs) == dataset.labels))


def loss_and_gradients(snapshot: NetworkSnapshot, inputs, labels):
    """
    Mean softmax cross-entropy and its gradients by backpropagation

    Returns:
        tuple: (loss, weight_gradients, bias_gradients)
    """
    labels = np.asarray(labels, dtype=np.int64)
    pre, post = forward_pass(snapshot, inputs)
    batch = labels.shape[0]
    rows = np.arange(batch)
    loss = float(-np.mean(log_softmax(pre[-1], axis=1)[rows, labels]))

    delta = post[-1].copy()
    delta[rows, labels] -= 1.0
    delta /= batch

    activation = snapshot.spec.activation
    weight_grads = [None] * len(snapshot.weights)
    bias_grads = [None] * len(snapshot.weights)
    for layer in range(len(snapshot.weights), 0, -1):
        weight_grads[layer - 1] = post[layer - 1].T @ delta
        bias_grads[layer - 1] = delta.sum(axis=0)
        if layer > 1:
            delta = (delta @ snapshot.weights[layer - 1].T) * _activation_derivative(pre[layer - 1], activation)
    return loss, weight_grads, bias_grads


def _check_dataset(snapshot, dataset, operation):
    if dataset is None or len(dataset) == 0:
        raise ParameterError("dataset is empty", operation)
    if dataset.labels is None:
        raise ParameterError("dataset has no labels", operation)
    sizes = snapshot.spec.layer_sizes
    if dataset.inputs.shape[1] != sizes[0]:
        raise ParameterError(f"inputs have {dataset.inputs.shape[1]} features, network expects {sizes[0]}", operation)
    if dataset.labels.min() < 0 or dataset.labels.max() >= sizes[-1]:
        raise ParameterError(f"labels fall outside [0, {sizes[-1]})", operation)


def train(snapshot: NetworkSnapshot, dataset: Dataset, epochs, lr=DEFAULT_LR, batch=DEFAULT_BATCH,
          record_every=1, test_set: Dataset = None, quiet=True, label="Training"):
    """
    Plain minibatch SGD on softmax cross-entropy

    Returns the epoch-0 snapshot followed by one snapshot every
    `record_every` epochs (the final epoch is always recorded).
    """
    _check_dataset(snapshot, dataset, "train")
    if epochs < 0 or batch < 1 or record_every < 1:
        raise ParameterError(f"invalid epochs={epochs} batch={batch} record_every={record_every}", "train")

    rng = np.random.default_rng(snapshot.spec.seed)
    current = snapshot.copy()
    x, y = dataset.inputs, dataset.labels
    n = x.shape[0]

    def record(loss):
        current.loss = loss
        current.train_accuracy = accuracy(current, dataset)
        if test_set is not None:
            current.test_accuracy = accuracy(current, test_set)
        return current.copy()

    initial_loss, _, _ = loss_and_gradients(current, x, y)
    snapshots = [record(initial_loss)]
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            index = order[start:start + batch]
            loss, weight_grads, bias_grads = loss_and_gradients(current, x[index], y[index])
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            for layer in range(len(current.weights)):
                current.weights[layer] -= lr * weight_grads[layer]
                current.biases[layer] -= lr * bias_grads[layer]
            total += loss * len(index)
        current.epoch = snapshot.epoch + epoch
        if epoch % record_every == 0 or epoch == epochs:
            snapshots.append(record(total / n))
            logger.debug(f"{label}: epoch {current.epoch} loss {total / n:.4f} "
                         f"train acc {current.train_accuracy:.3f}")
        print_progress_bar(epoch, epochs, prefix=label, quiet=quiet)
    return snapshots


def penultimate_layer(snapshot: NetworkSnapshot):
    """Index of the last hidden layer"""
    hidden = len(snapshot.weights) - 1
    if hidden < 1:
        raise ParameterError("network has no hidden layer", "penultimate_layer")
    return hidden


def generalization_gap(snapshot: NetworkSnapshot, train_set: Dataset, test_set: Dataset,
                       max_samples=2000, seed=0, eval_inputs=None):
    """
    Train minus test accuracy, with NC and WC of the penultimate layer

    NC is measured on `eval_inputs` when given, else on a seeded subsample of
    at most `max_samples` training inputs.
    """
    if train_set is None or len(train_set) == 0 or test_set is None or len(test_set) == 0:
        raise ParameterError("train and test sets must be nonempty", "generalization_gap")
    train_accuracy = accuracy(snapshot, train_set)
    test_accuracy = accuracy(snapshot, test_set)
    layer = penultimate_layer(snapshot)
    if eval_inputs is None:
        eval_inputs, _, _ = subsample_rows(train_set.inputs, max_samples, seed)
    nc = neuronal_correlation(forward_record(snapshot, eval_inputs, layer))
    wc = weight_correlation(snapshot.weight_matrix(layer))
    return GeneralizationRecord(
        epoch=snapshot.epoch,
        gap=train_accuracy - test_accuracy,
        nc_penultimate=nc.value,
        wc_penultimate=wc.value,
        train_accuracy=train_accuracy,
        test_accuracy=test_accuracy,
    )


def wc_vs_structure_sweep(m_range, n_range, inits, seeds=20, fixed_m=100, fixed_n=100, gamma=DEFAULT_GAMMA):
    """
    Mean |WC| at initialization of a single m -> n layer, varying m at
    fixed n and n at fixed m

    Returns:
        list of dict rows: axis, m, n, init, mean_abs_wc, std_abs_wc, gamma_l
    """
    m_range = list(m_range)
    n_range = list(n_range)
    if not m_range or not n_range or not inits:
        raise ParameterError("sweep ranges and inits must be nonempty", "wc_vs_structure_sweep")
    if min(n_range + [fixed_n]) < 2:
        raise ParameterError("WC needs n >= 2 neurons", "wc_vs_structure_sweep")
    if min(m_range + [fixed_m]) < 1 or seeds < 1:
        raise ParameterError("m and the seed count must be positive", "wc_vs_structure_sweep")

    points = [("m", m, fixed_n) for m in m_range] + [("n", fixed_m, n) for n in n_range]
    rows = []
    for init in inits:
        for axis, m, n in points:
            values = np.array([
                weight_correlation(initialize_layer(m, n, init, np.random.default_rng(seed)), absolute=True).value
                for seed in range(seeds)
            ])
            rows.append({
                "axis": axis,
                "m": m,
                "n": n,
                "init": Init(init).value,
                "mean_abs_wc": float(values.mean()),
                "std_abs_wc": float(values.std()),
                "gamma_l": m / gamma,
            })
        logger.debug(f"Sweep finished for init {Init(init).value}")
    return rows
