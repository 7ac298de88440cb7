"""Digital-agent data pipeline: collection, factor selection, prediction, QoE fitting."""

from .arima import ArimaModel, accuracy_score, arima_fit, arima_predict, difference, prediction_accuracy
from .collection import ATTRIBUTES, AccuracyTracker, CollectionPolicy, SampleClock, collection_frequency
from .dcor import DccResult, ZeroVarianceError, distance_correlation, distance_covariance_sq, select_qos_factors
from .fitting import DaWindow, FittedQoe, cluster_users, fit_qoe_model, predicted_mos, update_trigger

__all__ = [
    "ATTRIBUTES", "AccuracyTracker", "ArimaModel", "CollectionPolicy", "DaWindow", "DccResult",
    "FittedQoe", "SampleClock", "ZeroVarianceError", "accuracy_score", "arima_fit", "arima_predict",
    "cluster_users", "collection_frequency", "difference", "distance_correlation",
    "distance_covariance_sq", "fit_qoe_model", "predicted_mos", "prediction_accuracy",
    "select_qos_factors", "update_trigger",
]
