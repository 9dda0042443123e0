from .api import (ELBOW_TREES, MODEL_KINDS, ModelConfig, Prediction, TrainedModel,
                  load_model, save_model, train, train_hierarchical)
from .base import ActivityClassifier, ordered_classes
from .forest import BaggedTreesClassifier, RandomForestActivityClassifier
from .hierarchical import HierarchicalActivityClassifier
from .knn import KNNActivityClassifier
from .naive_bayes import GaussianNBActivityClassifier
from .tree import InfoGainTreeClassifier

__all__ = [
    "ActivityClassifier", "BaggedTreesClassifier", "ELBOW_TREES", "GaussianNBActivityClassifier",
    "HierarchicalActivityClassifier", "InfoGainTreeClassifier", "KNNActivityClassifier",
    "MODEL_KINDS", "ModelConfig", "Prediction", "RandomForestActivityClassifier",
    "TrainedModel", "load_model", "ordered_classes", "save_model", "train",
    "train_hierarchical",
]
