"""Power-quality disturbance detection with a second-order Gaussian window
S-transform and metaheuristic-tuned RBF support vector machines."""

from .features import (FeatureVector, NormalizationStats, apply_normalizer, extract_features,
                       feature_matrix, fit_normalizer, frequency_contour, magnitude_contour,
                       phase_contour)
from .models import (CLEAN, DisturbanceClass, DisturbanceParams, SamplingGrid, WaveformSignal,
                     add_noise, generate_dataset, generate_signal, sample_params)
from .optimizers import (OptimizerConfig, OptimizerRun, SearchSpace, ga_optimize,
                         pso_optimize, tune_svm, woa_optimize)
from .svm import (BinarySVM, SVMHyperparams, SVMModel, decision_function, evaluate, predict,
                  rbf_kernel, train_binary, train_multiclass)
from .transform import (STMatrix, WindowCoefficients, inverse_check, sogw_st, stockwell,
                        time_window, window_sigma)

__version__ = "0.1.0"
