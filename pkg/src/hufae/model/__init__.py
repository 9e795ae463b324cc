from .checkpoint import (FORMAT_VERSION, HufCheckpoint, load_checkpoint, read_manifest,
                         save_checkpoint)
from .classifier import FeedForwardClassifier, build_classifier, train_classifier
from .config import (AXES, ClassifierConfig, DrSaeConfig, FusionAeConfig, HufConfig,
                     SensorLayout, TrainConfig, desk_classifier_config, desk_config)
from .dr_sae import DrSae, build_dr_sae, stage_reconstruction_mse, train_stacked
from .fusion import FusionAe, build_fusion_ae, fusion_code_length, train_fusion_ae
from .huf import (FusionFeatures, HufClassifier, HufFeatureExtractor, HufModel,
                  final_features, huf_forward)

__all__ = [
    "AXES", "ClassifierConfig", "DrSae", "DrSaeConfig", "FORMAT_VERSION",
    "FeedForwardClassifier", "FusionAe", "FusionAeConfig", "FusionFeatures", "HufCheckpoint",
    "HufClassifier", "HufConfig", "HufFeatureExtractor", "HufModel", "SensorLayout",
    "TrainConfig", "build_classifier", "build_dr_sae", "build_fusion_ae",
    "desk_classifier_config", "desk_config", "final_features", "fusion_code_length",
    "huf_forward", "load_checkpoint", "read_manifest", "save_checkpoint",
    "stage_reconstruction_mse", "train_classifier",
    "train_fusion_ae", "train_stacked",
]
