import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hufae.data import (
    Recording,
    SyntheticConfig,
    apply_split,
    class_bins,
    generate_synthetic,
    hop_length,
    ingest_csv,
    ingest_uci_har,
    majority_label,
    read_uci_partition,
    resample,
    segment,
    split_subjects,
    window_count,
    write_corpus_csv,
)
from hufae.data.ingest import UCI_TRAIN_WINDOWS
from hufae.errors import ConfigError, DataError
from hufae.model import AXES, SensorLayout

import oracles


# ------------------------------------------------------------------ resample

def test_resample_midpoint():
    np.testing.assert_array_equal(resample([0.0, 2.0], 50, 100), [0.0, 1.0, 2.0])


def test_resample_constant():
    np.testing.assert_allclose(resample(np.full(7, 3.5), 100, 500), np.full(31, 3.5), rtol=0,
                               atol=1e-15)


def test_resample_piecewise_linear_oracle():
    out = resample([0.0, 1.0, 4.0], 50, 100)
    ref = np.interp(np.arange(5) / 2, np.arange(3), [0.0, 1.0, 4.0])
    np.testing.assert_allclose(out, ref, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(out, [0, 0.5, 1, 2.5, 4])


@pytest.mark.parametrize("to_hz", [75, 125, 40])
def test_resample_rejects_non_integer_factor(to_hz):
    with pytest.raises(ConfigError):
        resample([1.0, 2.0], 50, to_hz)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.integers(1, 6))
def test_resample_keeps_original_samples(values, factor):
    x = np.array(values)
    out = resample(x, 10, 10 * factor)
    assert len(out) == (len(x) - 1) * factor + 1
    np.testing.assert_array_equal(out[::factor], x)
    np.testing.assert_array_equal(resample(out, 5, 5), out)


def test_resample_multichannel():
    x = np.arange(12.0).reshape(3, 4)
    out = resample(x, 1, 2)
    assert out.shape == (3, 7)
    np.testing.assert_array_equal(out[:, ::2], x)


# ------------------------------------------------------------------ segment

def _rec(length, labels=None, channels=6, subject=1):
    sig = np.arange(channels * length, dtype=float).reshape(channels, length)
    labels = np.zeros(length, dtype=int) if labels is None else labels
    return Recording(subject, sig, 50.0, labels, SensorLayout(channels // 6))


def test_segment_1024_by_512():
    rec = _rec(1024)
    batch = segment(rec, 512, 0.5)
    assert len(batch) == 3
    for i, start in enumerate([0, 256, 512]):
        np.testing.assert_array_equal(batch.windows[i], rec.signals[:, start:start + 512])


def test_segment_exact_length_gives_one_window():
    assert len(segment(_rec(64), 64, 0.5)) == 1


def test_segment_without_overlap_tiles():
    for length in (100, 128, 131):
        assert len(segment(_rec(length), 32, 0.0)) == length // 32


def test_segment_short_recording_warns():
    with pytest.warns(UserWarning):
        batch = segment(_rec(10), 32)
    assert len(batch) == 0 and batch.windows.shape == (0, 6, 32)


def test_hop_is_half_window_at_half_overlap():
    for w in (2, 64, 128, 256, 512, 1500):
        assert hop_length(w, 0.5) * 2 == w


def test_window_count_matches_enumeration_grid():
    for overlap in (0.0, 0.25, 0.5):
        for w in range(1, 17):
            hop = hop_length(w, overlap)
            for length in range(0, 65):
                expected = len(oracles.enumerate_segments(length, w, hop))
                assert window_count(length, w, overlap) == expected


def test_majority_label_and_ties():
    assert majority_label(np.array([2, 2, 1])) == 2
    # tie: label 5 starts first
    assert majority_label(np.array([5, 5, 3, 3])) == 5
    assert majority_label(np.array([3, 5, 5, 3])) == 3


def test_boundary_windows_are_kept():
    labels = np.r_[np.zeros(48, int), np.ones(80, int)]
    batch = segment(_rec(128, labels), 64, 0.5)
    assert list(batch.labels) == [0, 1, 1]


def test_segment_labels_scalar_recording():
    rec = Recording(4, np.zeros((6, 100)), 50.0, np.array(3))
    batch = segment(rec, 50, 0.5)
    assert set(batch.labels) == {3} and set(batch.subject_ids) == {4}


# -------------------------------------------------------------------- split

def test_split_seventy_thirty():
    plan = split_subjects(range(1, 11), 0.7, seed=0)
    assert len(plan.train_subjects) == 7 and len(plan.test_subjects) == 3


def test_split_is_deterministic():
    assert split_subjects(range(20), 0.7, 5) == split_subjects(range(20), 0.7, 5)


def test_split_disjoint_over_many_seeds():
    batch, _ = generate_synthetic(n_units=1, classes=2, windows_per_class=20, window_size=64,
                                  n_subjects=10)
    for seed in range(100):
        plan = split_subjects(np.unique(batch.subject_ids), 0.7, seed)
        assert not plan.train_subjects & plan.test_subjects
        assert plan.train_subjects | plan.test_subjects == set(range(1, 11))
        train, test = apply_split(batch, plan)
        assert not set(test.subject_ids) & plan.train_subjects
        assert len(train) + len(test) == len(batch)


def test_split_shuffles_train_and_keeps_test_order():
    batch, _ = generate_synthetic(n_units=1, classes=2, windows_per_class=20, window_size=64,
                                  n_subjects=5)
    batch.windows[:, 0, 0] = np.arange(len(batch))
    train, test = apply_split(batch, split_subjects(range(1, 6), 0.6, 1))
    order = test.windows[:, 0, 0]
    assert np.all(np.diff(order) > 0)
    assert not np.all(np.diff(train.windows[:, 0, 0]) > 0)


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
def test_split_fraction_checked(fraction):
    with pytest.raises(ConfigError):
        split_subjects(range(5), fraction)


def test_split_needs_two_subjects():
    with pytest.raises(DataError):
        split_subjects([3], 0.7)


# ---------------------------------------------------------------- synthetic

def test_synthetic_noise_free_same_class_identical():
    batch, _ = generate_synthetic(n_units=2, classes=3, windows_per_class=4, window_size=128,
                                  noise_std=0.0, random_phase=False)
    for c in range(3):
        w = batch.windows[batch.labels == c]
        assert all(np.array_equal(w[0], w[i]) for i in range(1, len(w)))


def test_synthetic_is_bitwise_reproducible():
    a, ta = generate_synthetic(seed=4, windows_per_class=5)
    b, tb = generate_synthetic(seed=4, windows_per_class=5)
    assert np.array_equal(a.windows, b.windows) and ta == tb
    c, _ = generate_synthetic(seed=5, windows_per_class=5)
    assert not np.array_equal(a.windows, c.windows)


def test_synthetic_separable_by_spectral_peak():
    cfg = SyntheticConfig()
    batch, truth = generate_synthetic(cfg)
    bins = np.array(class_bins(cfg))
    assert np.all(np.diff(bins) >= 2)
    # DFT argmax on the first unit's a_x axis, mapped to the nearest class fundamental
    spec = np.abs(np.fft.rfft(batch.windows[:, 0], axis=-1))
    peak = spec.argmax(axis=1)
    pred = np.abs(peak[:, None] - bins[None, :]).argmin(axis=1)
    assert np.mean(pred == batch.labels) == 1.0


def test_synthetic_class_spectra_far_apart():
    batch, _ = generate_synthetic(n_units=2, classes=4, windows_per_class=30, noise_std=0.1)
    spec = np.abs(np.fft.rfft(batch.windows, axis=-1)).reshape(len(batch), -1)
    means = np.stack([spec[batch.labels == c].mean(axis=0) for c in range(4)])
    between = max(np.linalg.norm(means[i] - means[j]) for i in range(4) for j in range(i))
    within = max(np.linalg.norm(spec[batch.labels == c] - means[c], axis=1).mean()
                 for c in range(4))
    assert between > 10 * within


def test_synthetic_non_discriminative_unit_is_class_independent():
    batch, truth = generate_synthetic(n_units=3, classes=4, windows_per_class=3, noise_std=0.0,
                                      random_phase=False)
    nd = truth["non_discriminative_unit"]
    assert nd == 2
    unit = batch.windows[:, 6 * nd:6 * nd + 6]
    assert all(np.array_equal(unit[0], u) for u in unit)


@pytest.mark.parametrize("bad", [dict(classes=0), dict(n_units=0), dict(noise_std=-1.0),
                                 dict(bin_step=1), dict(classes=40)])
def test_synthetic_config_errors(bad):
    with pytest.raises(ConfigError):
        generate_synthetic(**bad)


# ---------------------------------------------------------------------- CSV

def _write(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


def test_csv_single_unit(tmp_path):
    header = ["subject", "label"] + [f"wrist_{a}" for a in AXES]
    rows = [[1, 2] + list(range(i, i + 6)) for i in range(10)]
    recs = ingest_csv(_write(tmp_path / "a.csv", header, rows))
    assert len(recs) == 1 and recs[0].signals.shape == (6, 10)
    assert recs[0].layout.unit_names == ("wrist",)
    assert np.array_equal(recs[0].signals[:, 3], np.arange(3, 9))


def test_csv_four_units(tmp_path):
    units = ["u0", "u1", "u2", "u3"]
    header = ["subject", "label"] + [f"{u}_{a}" for u in units for a in AXES]
    rows = [[1, 0] + [float(i)] * 24 for i in range(5)] + [[2, 1] + [0.5] * 24]
    recs = ingest_csv(_write(tmp_path / "b.csv", header, rows))
    assert [r.subject_id for r in recs] == [1, 2]
    assert recs[0].signals.shape == (24, 5) and recs[0].layout.n_units == 4


def test_csv_inactive_unit_zero_filled(tmp_path):
    layout = SensorLayout(4, ["u0", "u1", "u2", "u3"], [True, True, True, False])
    header = ["subject", "label"] + [f"u{j}_{a}" for j in range(3) for a in AXES]
    rows = [[1, 0] + [1.0] * 18 for _ in range(4)]
    (rec,) = ingest_csv(_write(tmp_path / "c.csv", header, rows), layout)
    assert rec.signals.shape == (24, 4)
    assert np.all(rec.signals[18:] == 0) and np.all(rec.signals[:18] == 1)
    assert rec.layout.active_mask[3] is False


def test_csv_missing_active_unit_rejected(tmp_path):
    layout = SensorLayout(2, ["u0", "u1"])
    header = ["subject", "label"] + [f"u0_{a}" for a in AXES]
    with pytest.raises(DataError):
        ingest_csv(_write(tmp_path / "d.csv", header, [[1, 0] + [0] * 6]), layout)


def test_csv_ragged_rows_rejected(tmp_path):
    header = ["subject", "label"] + [f"w_{a}" for a in AXES]
    with pytest.raises(DataError, match="ragged"):
        ingest_csv(_write(tmp_path / "e.csv", header, [[1, 0] + [0] * 6, [1, 0, 1]]))


def test_csv_unknown_column_rejected(tmp_path):
    header = ["subject", "label"] + [f"w_{a}" for a in AXES] + ["w_temp"]
    with pytest.raises(DataError, match="unknown"):
        ingest_csv(_write(tmp_path / "f.csv", header, [[1, 0] + [0] * 7]))


def test_synthetic_csv_round_trip(tmp_path):
    batch, _ = generate_synthetic(n_units=2, classes=2, windows_per_class=3, window_size=16,
                                  n_subjects=3, base_bin=1, bin_step=2)
    path = write_corpus_csv(batch, tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert len(lines) - 1 == 2 * 3 * 16
    recs = ingest_csv(path)
    assert len(recs) == len(batch)
    for rec, w, y in zip(recs, batch.windows, batch.labels):
        assert np.array_equal(rec.signals, w) and set(rec.labels) == {y}


# ---------------------------------------------------------------------- UCI

def _fake_uci(root, windows, labels, subjects, partition="train"):
    base = root / partition
    (base / "Inertial Signals").mkdir(parents=True)
    names = [f"body_acc_{c}" for c in "xyz"] + [f"body_gyro_{c}" for c in "xyz"]
    for a, name in enumerate(names):
        np.savetxt(base / "Inertial Signals" / f"{name}_{partition}.txt", windows[:, a],
                   fmt="%.7e")
    # total_acc is present in the published layout but not used
    np.savetxt(base / "Inertial Signals" / f"total_acc_x_{partition}.txt", windows[:, 0])
    np.savetxt(base / f"y_{partition}.txt", labels, fmt="%d")
    np.savetxt(base / f"subject_{partition}.txt", subjects, fmt="%d")


def _stream_windows(stream, n, width=128):
    hop = width // 2
    return np.stack([stream[:, i * hop:i * hop + width] for i in range(n)])


def test_uci_stitches_overlapping_windows(tmp_path):
    rng = np.random.default_rng(0)
    s1 = np.round(rng.normal(size=(6, 256)), 6)
    s2 = np.round(rng.normal(size=(6, 128)), 6)
    windows = np.concatenate([_stream_windows(s1, 3), _stream_windows(s2, 1)])
    _fake_uci(tmp_path, windows, [1, 1, 2, 3], [1, 1, 1, 2])
    recs = ingest_uci_har(tmp_path, partitions=("train",))
    assert [r.length for r in recs] == [256, 128]
    assert [r.subject_id for r in recs] == [1, 2]
    np.testing.assert_allclose(recs[0].signals, s1, rtol=1e-7)
    assert list(recs[0].labels[:128]) == [1] * 128 and list(recs[0].labels[192:]) == [2] * 64
    assert recs[0].sample_rate_hz == 50.0 and recs[0].layout.n_channels == 6


def test_uci_label_range(tmp_path):
    _fake_uci(tmp_path, np.zeros((2, 6, 128)), [1, 7], [1, 1])
    with pytest.raises(DataError, match="labels"):
        read_uci_partition(tmp_path, "train")


def test_uci_subject_range(tmp_path):
    _fake_uci(tmp_path, np.zeros((2, 6, 128)), [1, 2], [1, 31])
    with pytest.raises(DataError, match="subject"):
        read_uci_partition(tmp_path, "train")


def test_uci_row_count_mismatch(tmp_path):
    _fake_uci(tmp_path, np.zeros((2, 6, 128)), [1, 2], [1, 1])
    (tmp_path / "train" / "y_train.txt").write_text("1\n")
    with pytest.raises(DataError, match="row counts"):
        read_uci_partition(tmp_path, "train")


def test_uci_missing_files(tmp_path):
    with pytest.raises(DataError, match="missing"):
        ingest_uci_har(tmp_path)


def test_uci_published_count_enforced(tmp_path):
    _fake_uci(tmp_path, np.zeros((2, 6, 128)), [1, 2], [1, 1])
    with pytest.raises(DataError, match=str(UCI_TRAIN_WINDOWS)):
        ingest_uci_har(tmp_path, partitions=("train",), check_counts=True)


@pytest.mark.skipif(not os.environ.get("HUF_UCI_ROOT"), reason="set HUF_UCI_ROOT to the dataset")
def test_uci_published_train_partition():
    windows, labels, subjects = read_uci_partition(os.environ["HUF_UCI_ROOT"], "train")
    assert len(windows) == UCI_TRAIN_WINDOWS
    assert set(np.unique(labels)) <= set(range(1, 7))
