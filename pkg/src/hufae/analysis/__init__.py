from .export import KINDS, export_plot_data
from .fir import (FirPath, apply_path, compose_fir, compose_kernels, composed_length,
                  encoder_weights, fir_equivalence_check, layered_linear, path_sum, sample_paths)
from .metrics import EvalReport, evaluate
from .spectrum import FrequencyResponse, frequency_response, spectral_energy

__all__ = [
    "EvalReport", "FirPath", "FrequencyResponse", "KINDS", "apply_path", "compose_fir",
    "compose_kernels", "composed_length", "encoder_weights", "evaluate", "export_plot_data",
    "fir_equivalence_check", "frequency_response", "layered_linear", "path_sum",
    "sample_paths", "spectral_energy",
]
