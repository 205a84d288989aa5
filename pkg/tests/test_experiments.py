import numpy as np
import pytest

from ncentropy import config
from ncentropy.data import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, write_idx
from ncentropy.entropy import gaussian_entropy_analytic
from ncentropy.errors import ParameterError
from ncentropy.experiments import (
    load_experiment_data, run_epsilon_experiment, run_ge_experiment, run_groundtruth_experiment,
    run_init_sweep, run_linear_experiment, run_parallel, scale_params, structure_table, volume_normalized,
    volume_preserving_layer,
)
from ncentropy.models import Activation, ExperimentReport, GaussianSpec, NetworkSpec
from ncentropy.network import initialize, logits
from ncentropy.snapshot_io import read_snapshots

TRAINING = {
    "init": "xavier", "subset_size": 200, "seeds": [0], "lr": 0.05, "batch": 32, "images": None,
    "labels": None, "workers": 1, "quiet": True, "epochs": 2, "record_every": 1, "eval_samples": 60,
}


def test_synthetic_fallback_shape():
    train_set, test_set, source = load_experiment_data(subset_size=200, seed=1)
    assert source == "synthetic"
    assert (len(train_set), len(test_set)) == (160, 40)
    assert train_set.inputs.shape[1] == config.SYNTHETIC_DIM
    assert train_set.n_classes == config.SYNTHETIC_CLASSES


def test_idx_data_is_split(tmp_path):
    images = np.arange(40, dtype=np.uint8).reshape(10, 2, 2)
    labels = np.array([0, 1] * 5, dtype=np.uint8)
    write_idx(images, tmp_path / "images.idx", IDX_IMAGES_MAGIC)
    write_idx(labels, tmp_path / "labels.idx", IDX_LABELS_MAGIC)
    train_set, test_set, source = load_experiment_data(
        tmp_path / "images.idx", tmp_path / "labels.idx", subset_size=10)
    assert source == "idx"
    assert (len(train_set), len(test_set)) == (8, 2)
    assert train_set.inputs.shape[1] == 4


def test_run_parallel_keeps_order():
    assert run_parallel(lambda x: x * x, range(6), workers=3) == [0, 1, 4, 9, 16, 25]
    assert run_parallel(lambda x: -x, [1, 2], workers=1) == [-1, -2]


def test_scale_params():
    params = {"epochs": 2, "seeds": [0], "subset_size": 10, "lr": 0.1}
    assert scale_params(params, False) is params
    scaled = scale_params(params, True)
    assert scaled["epochs"] == config.PAPER_SCALE_EPOCHS
    assert scaled["seeds"] == list(config.PAPER_SCALE_SEEDS)
    assert scaled["subset_size"] == config.PAPER_SCALE_SUBSET
    assert scaled["lr"] == 0.1
    assert params["epochs"] == 2


def test_volume_preserving_layer():
    snapshot = volume_preserving_layer(initialize(NetworkSpec([4, 4, 2], seed=3)))
    assert abs(np.linalg.det(snapshot.weights[0])) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        volume_preserving_layer(initialize(NetworkSpec([4, 3, 2])))


def test_groundtruth_experiment(tmp_path):
    params = {
        "n": 500, "d": 5, "variances": [0.5, 1.0], "seeds": [0], "init": "xavier", "estimator": "knn",
        "bins": 30, "k": 3, "kernel": "gaussian", "sigma": None, "max_samples": 2000, "workers": 1,
    }
    report = run_groundtruth_experiment(params, tmp_path)
    rows = report.tables["estimates"]
    assert len(rows) == 4
    assert [row["label"] for row in rows] == ["var=0.5", "var=0.5*", "var=1", "var=1*"]
    for row in rows:
        expected = gaussian_entropy_analytic(GaussianSpec.isotropic(5, row["variance"]))
        assert row["analytic"] == pytest.approx(expected)
        assert np.isfinite(row["entropy_projected"])
    assert report.claims == {"projected_closer_after_network": True, "projected_relative_error_below_15pct": True}

    for name in ("experiment_groundtruth.json", "experiment_groundtruth_estimates.csv",
                 "experiment_groundtruth.svg"):
        assert (tmp_path / name).exists()
    loaded = ExperimentReport.parse_file(tmp_path / "experiment_groundtruth.json")
    assert loaded.config["variances"] == [0.5, 1.0]
    assert loaded.claims == report.claims


def test_linear_experiment(tmp_path):
    params = dict(TRAINING, structure="I-12-12-O", activation="identity", estimator="knn", bins=30, k=3,
                  kernel="gaussian", beta=0.5, grid_size=4, eval_samples=160, save_snapshots=True)
    report = run_linear_experiment(params, tmp_path)
    assert report.summary["data_source"] == "synthetic"
    assert len(report.tables["measurements"]) == 6
    assert {row["epoch"] for row in report.tables["gaps"]} == {0, 1, 2}
    for row in report.tables["measurements"]:
        assert 0.0 <= row["nc_projected"] <= 1.0
        assert row["retained_rank"] == 12
    assert report.claims == {
        "projected_gap_smaller": True, "projected_nc_below_0_1": True, "original_nc_above_projected": True}
    assert report.summary["gap_projected_median"] < report.summary["gap_original_median"]
    assert [s.epoch for s in read_snapshots(tmp_path / "experiment_linear_I-12-12-O_seed0.cent")] == [0, 1, 2]
    assert (tmp_path / "experiment_linear.svg").exists()
    assert (tmp_path / "experiment_linear_curves.csv").exists()


def test_linear_experiment_requires_identity(tmp_path):
    params = dict(TRAINING, structure="I-6-O", activation="tanh")
    with pytest.raises(ParameterError):
        run_linear_experiment(params, tmp_path)


def test_ge_experiment(tmp_path, caplog):
    params = dict(TRAINING, architectures={"small": "I-8-6-O", "large": "I-12-10-O"}, activations=["relu"],
                  test_images=None, test_labels=None, eval_samples=100, save_snapshots=True)
    with caplog.at_level("WARNING", logger="ncentropy"):
        report = run_ge_experiment(params, tmp_path)
    assert not any("Subsampling" in record.getMessage() for record in caplog.records)
    assert len(report.tables["curves"]) == 6
    assert [row["architecture"] for row in report.tables["summary"]] == ["small", "large"]
    assert all("nc_gap_spearman" in row for row in report.tables["summary"])
    for row in report.tables["curves"]:
        assert row["wc_q1"] <= row["wc_q2"] <= row["wc_q3"]
        assert row["gap"] == pytest.approx(row["train_accuracy"] - row["test_accuracy"])
    assert set(report.claims) == {"relu_nc_increasing", "relu_nc_gap_spearman_positive"}
    assert (tmp_path / "experiment_ge_relu.svg").exists()
    for name in ("small", "large"):
        loaded = read_snapshots(tmp_path / f"experiment_ge_{name}_relu_seed0.cent")
        assert [s.epoch for s in loaded] == [0, 1, 2]


def test_ge_experiment_rejects_convolutional_notation(tmp_path):
    params = dict(TRAINING, architectures={"conv": "I-C3-O"}, activations=["relu"],
                  test_images=None, test_labels=None)
    with pytest.raises(ParameterError):
        run_ge_experiment(params, tmp_path)


def test_epsilon_experiment(tmp_path):
    params = dict(TRAINING, structure="I-6-6-6-O", activations=["identity", "tanh"], layers=[2, 3], epochs=1)
    report = run_epsilon_experiment(params, tmp_path)
    rows = report.tables["curves"]
    assert len(rows) == 2 * 2 * 2
    for row in rows:
        if row["activation"] == "identity":
            assert row["epsilon"] < 1e-6
        assert row["epsilon"] == pytest.approx(abs(row["nc_t"] - row["nc_u"]))
    assert "identity_layer2_epsilon_below_0_02" in report.claims
    assert "tanh_layer3_epsilon_below_0_2" in report.claims
    assert (tmp_path / "experiment_epsilon.svg").exists()
    assert not list(tmp_path.glob("*.cent"))


def test_epsilon_experiment_rejects_output_layer(tmp_path):
    params = dict(TRAINING, structure="I-6-6-O", activations=["tanh"], layers=[3])
    with pytest.raises(ParameterError):
        run_epsilon_experiment(params, tmp_path)


def test_structure_table():
    rows = {row["pattern"]: row for row in structure_table()}
    assert rows["fully_connected_784_30"]["gamma_l"] == pytest.approx(784.0)
    assert rows["fully_connected_100_100"]["gamma_l"] == pytest.approx(100.0)
    assert rows["conv2d_32x32_filter3"]["gamma_l"] < rows["conv2d_32x32_filter6"]["gamma_l"]
    assert rows["conv2d_32x32_filter6"]["gamma_l"] < 100.0


def test_init_sweep(tmp_path):
    params = {"m_range": [10, 50, 200], "n_range": [5, 20], "fixed_m": 30, "fixed_n": 10,
              "inits": ["xavier"], "sweep_seeds": 3, "seeds": [0, 1, 2], "gamma": 1.0}
    report = run_init_sweep(params, tmp_path)
    assert len(report.tables["sweep"]) == 5
    assert [(t["axis"], t["init"]) for t in report.tables["trends"]] == [("m", "xavier"), ("n", "xavier")]
    assert set(report.claims) == {"xavier_wc_decreases_with_m", "xavier_wc_increases_with_n"}
    assert (tmp_path / "sweep_init_structures.csv").exists()


def test_volume_normalized_keeps_the_network_function(rng):
    spec = NetworkSpec([5, 4, 4, 3, 3, 2], activation=Activation.IDENTITY, seed=4)
    snapshot = initialize(spec)
    snapshot.biases = [rng.standard_normal(b.shape) for b in snapshot.biases]
    normalized = volume_normalized(snapshot)
    inputs = rng.standard_normal((20, 5))
    np.testing.assert_allclose(logits(normalized, inputs), logits(snapshot, inputs), atol=1e-10)
    assert abs(np.linalg.det(normalized.weights[1])) == pytest.approx(1.0)
    assert abs(np.linalg.det(normalized.weights[3])) == pytest.approx(1.0)
    np.testing.assert_array_equal(normalized.weights[0], snapshot.weights[0])
    assert normalized.weights[1] is not snapshot.weights[1]


def test_threaded_runs_do_not_draw_progress_bars(tmp_path, capsys):
    params = dict(TRAINING, structure="I-6-6-O", activations=["identity", "tanh"], layers=[1], epochs=1,
                  workers=2, quiet=False)
    run_epsilon_experiment(params, tmp_path)
    assert "█" not in capsys.readouterr().err
