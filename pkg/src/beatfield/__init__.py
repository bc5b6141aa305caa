"""Beat-level ECG feature pipeline with receptive-field matching features."""

from .config import Level2Config, PipelineConfig, PreprocessConfig, Scenario, SegmentationConfig
from .ingest import AlarmLabel, LeadSelection, Recording, RhythmLabel, load_recording, save_recording, select_lead
from .level1 import SCHEMA, FeatureSchema, Level1Vector, extract_level1
from .matching import ReceptiveField, SequenceMatrix, apply_matching_layer, column_names, rf_bounds
from .pipeline import StreamFeaturizer, featurize_directory, featurize_recording, featurize_signal
from .segmentation import Fiducials, Piece, cut_pieces, detect_r_peaks, prune_close_beats, refine_pqst, segment

__version__ = "0.1.0"

__all__ = [
    "AlarmLabel",
    "FeatureSchema",
    "Fiducials",
    "LeadSelection",
    "Level1Vector",
    "Level2Config",
    "Piece",
    "PipelineConfig",
    "PreprocessConfig",
    "ReceptiveField",
    "Recording",
    "RhythmLabel",
    "SCHEMA",
    "Scenario",
    "SegmentationConfig",
    "SequenceMatrix",
    "StreamFeaturizer",
    "apply_matching_layer",
    "column_names",
    "cut_pieces",
    "detect_r_peaks",
    "extract_level1",
    "featurize_directory",
    "featurize_recording",
    "featurize_signal",
    "load_recording",
    "prune_close_beats",
    "refine_pqst",
    "rf_bounds",
    "save_recording",
    "segment",
    "select_lead",
]
