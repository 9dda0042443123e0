"""Smartphone inertial-sensor activity recognition toolkit."""
from .dataset import (CLASSES, FeatureDataset, RawDataset, drop_features, load_features,
                      load_raw, save_features, stratified_folds, summarize)
from .evaluation import (ExperimentSpec, MetricsReport, cross_validate, elbow_sweep,
                         info_gain_rank, metrics_from_confusion, run_experiment)
from .features import (FEATURE_NAMES, REDUCED_FEATURE_NAMES, FeatureVector,
                       WindowFeatureExtractor, extract_features, extract_x_features)
from .models import ModelConfig, TrainedModel, load_model, save_model, train, train_hierarchical
from .signal import FilterConfig, SensorSample, SensorWindow, make_windows
from .stream import ActivityEvent, DebounceState, event_log, replay, streaming_predict

__version__ = "0.1.0"
