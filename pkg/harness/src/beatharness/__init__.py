"""Bi-LSTM training harness for exported beat-feature sequence matrices."""

from .data import Normalizer, classes_for_style, stratified_folds
from .matrices import LoadedMatrix, SchemaMismatchError, load_dataset, read_manifest, read_matrix
from .model import BiLstmClassifier
from .predict import predict, write_predictions
from .train import TrainConfig, load_checkpoint, save_checkpoint, train_fold, train_kfold

__version__ = "0.1.0"

__all__ = [
    "BiLstmClassifier",
    "LoadedMatrix",
    "Normalizer",
    "SchemaMismatchError",
    "TrainConfig",
    "classes_for_style",
    "load_checkpoint",
    "load_dataset",
    "predict",
    "read_manifest",
    "read_matrix",
    "save_checkpoint",
    "stratified_folds",
    "train_fold",
    "train_kfold",
    "write_predictions",
]
