"""Fall detection from waist-worn inertial recordings (SisFall format).

Pipeline: parse and calibrate recordings, low-pass them with a 4th-order
Butterworth filter, reduce each of the nine channels to six moment
statistics (54 features), and cross-validate four classifiers.
"""

__version__ = "0.1.0"

from .dsp import BiquadCascade, FilterSpec, design_butterworth, filter_signal, frequency_response
from .evaluation import ConfusionMatrix, Metrics, compute_metrics, cross_validate, make_folds
from .features import FeatureMatrix, FeatureVector, channel_features, feature_vector
from .ingest import Label, Recording, RecordingMeta, calibrate, generate_synthetic, parse_recording

__all__ = [
    "BiquadCascade", "ConfusionMatrix", "FeatureMatrix", "FeatureVector", "FilterSpec", "Label",
    "Metrics", "Recording", "RecordingMeta", "calibrate", "channel_features", "compute_metrics",
    "cross_validate", "design_butterworth", "feature_vector", "filter_signal",
    "frequency_response", "generate_synthetic", "make_folds", "parse_recording",
]
