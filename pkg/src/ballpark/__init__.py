"""Learning instance classifiers from loose bag-level label proportions."""

from .alternator import TrainTrace, fit_ballpark, objective_value
from .core import (Bag, BagSet, Bound, ConstraintSet, Difference,
                   FeatureMatrix, Hyperparams, LabeledSet)
from .label_lp import check_feasibility, solve_label_step
from .svm import Model, decision_values, predict, train_svm
from .tuner import CvInputs, GridResult, select_C, split_bags

__all__ = ["Bag", "BagSet", "Bound", "ConstraintSet", "CvInputs",
           "Difference", "FeatureMatrix", "GridResult", "Hyperparams",
           "LabeledSet", "Model", "TrainTrace", "check_feasibility",
           "decision_values", "fit_ballpark", "objective_value", "predict",
           "select_C", "solve_label_step", "split_bags", "train_svm"]
