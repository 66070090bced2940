"""Parameter-free a-contrario anomaly detection.

A single robust-median detector over integerized values, and an ensemble of
them trained on random variable subsamples with score- and vote-summing
output nodes. See the README for the CLI and the benchmark harness.
"""
from .errors import (
    DataFormatError,
    DegenerateModelError,
    DomainError,
    IntegerRangeError,
    InvalidInputError,
    MetricError,
    PerceptionError,
)
from .kernels import BACKEND
from .neuron import (
    NeuronModel,
    ScoredPoint,
    decide,
    deviation,
    expected_count,
    fit_integers,
    fit_values,
    infer_decimals,
    integerize,
    log_binomial,
    score,
    score_series,
)
from .reduce import (
    DeviationModel,
    DeviationNeuron,
    deviation_reduce,
    featurewise_median,
    fit_deviation_neuron,
)
from .network import (
    AggregateOutput,
    NetworkConfig,
    NetworkModel,
    NeuronUnit,
    degrade,
    draw_subsample_size,
    fit_network,
    fit_single,
    load_model,
    predict,
    save_model,
    train_neuron,
)
from .data import Dataset, ScoreReport, load_csv, write_scores
from .evaluate import (
    EvalRow,
    SweepCurve,
    prf1,
    roc_auc,
    run_benchmark,
    sweep_degrade,
    sweep_neuron_count,
    sweep_subsample_size,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
