"""Prec@k loss, its convex surrogates, and streaming learners that optimize them."""

from .core import Batch, DimensionError, LabeledPoint, LinearModel, SparseVector, score_batch
from .metrics import delta, effective_k, overlap, prec_at_k, prec_at_kappa, rank, top_k_labeling
from .surrogates import (SurrogateKind, SurrogateValue, brute_force_eval, eval_avg, eval_max,
                         eval_normalized, eval_ramp, eval_struct, evaluate, subgradient_avg,
                         subgradient_max)
from .margins import (MarginKind, MarginType, check_margin, generate_margin_dataset,
                      mistake_bound)
from .learners import LearnerConfig, Method, TrainReport, train
from .dataio import Dataset, load_libsvm, parse_libsvm, save_libsvm

__version__ = "0.1.0"
