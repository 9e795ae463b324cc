from .ingest import (UCI_TEST_WINDOWS, UCI_TRAIN_WINDOWS, ingest_csv, ingest_uci_har,
                     read_uci_partition)
from .synthetic import (SyntheticConfig, class_bins, generate_synthetic, write_corpus_csv,
                        write_ground_truth)
from .types import Recording, SegmentBatch, SplitPlan
from .windows import (apply_split, hop_length, majority_label, resample, segment, segment_all,
                      split_subjects, window_count)

__all__ = [
    "Recording", "SegmentBatch", "SplitPlan", "SyntheticConfig", "UCI_TEST_WINDOWS",
    "UCI_TRAIN_WINDOWS", "apply_split", "class_bins", "generate_synthetic", "hop_length",
    "ingest_csv", "ingest_uci_har", "majority_label", "read_uci_partition", "resample",
    "segment", "segment_all", "split_subjects", "window_count", "write_corpus_csv",
    "write_ground_truth",
]
