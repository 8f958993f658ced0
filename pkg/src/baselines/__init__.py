"""
Reference predictors: KT estimator and projected online gradient descent
"""

from .kt import KtPredictor, KtState, kt_predict, kt_run, kt_sequence_loss
from .ogd import LearningRateSchedule, OnlineGradientDescent, ogd_run

__all__ = [
    "KtPredictor",
    "KtState",
    "kt_predict",
    "kt_run",
    "kt_sequence_loss",
    "LearningRateSchedule",
    "OnlineGradientDescent",
    "ogd_run",
]
