"""Ensemble of detectors over random variable subsamples.

Each unit draws a log-normal-biased number of observations with replacement,
ejects in-subsample anomalies once, refits on the remainder, and then scores
every observation. Output nodes sum scores (for ranking) and {-1,+1} votes
(for the decision): an observation is anomalous when strictly more units
vote +1 than -1.

Determinism contract: all randomness flows from the config seed through
per-unit child streams, unit results are merged in ascending unit index, and
the outputs are identical for any worker count.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import DataFormatError, InvalidInputError
from .neuron import MAX_DECIMALS, round_half_away
from .reduce import (
    DeviationModel,
    as_matrix,
    deviation_reduce,
    featurewise_median,
    fit_deviation_neuron,
    infer_matrix_decimals,
    integerize_matrix,
)

DEFAULT_NEURONS = 256
DEFAULT_MU = 3.0
DEFAULT_SIGMA = 2.0


@dataclass(frozen=True)
class NetworkConfig:
    """Ensemble parameters. The defaults are the parameter-free operating
    point; overrides exist for sweeps and experiments."""

    n_neurons: int = DEFAULT_NEURONS
    subsample_mu: float = DEFAULT_MU
    subsample_sigma: float = DEFAULT_SIGMA
    seed: int = 0
    decimals: int | None = None          # None: infer per feature
    size_min: int | None = None          # None: min(10, N)
    size_max: int | None = None          # None: min(1000, N)
    fixed_size: int | None = None        # force every draw to this size
    eject: bool = True                   # one-pass in-subsample ejection
    replacement: bool = True             # draw indices with replacement

    def __post_init__(self):
        if self.n_neurons < 1:
            raise InvalidInputError("n_neurons must be >= 1")
        if not self.subsample_sigma > 0:
            raise InvalidInputError("subsample_sigma must be > 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must fit in 64 unsigned bits")
        if self.decimals is not None and not 0 <= self.decimals <= MAX_DECIMALS:
            raise InvalidInputError(f"decimals must be None or in [0, {MAX_DECIMALS}]")
        if self.fixed_size is not None and self.fixed_size < 1:
            raise InvalidInputError("fixed_size must be >= 1")


def size_bounds(config: NetworkConfig, n_obs: int) -> tuple[int, int]:
    lo = min(10, n_obs) if config.size_min is None else min(config.size_min, n_obs)
    hi = min(1000, n_obs) if config.size_max is None else min(config.size_max, n_obs)
    if lo < 1 or hi < lo:
        raise InvalidInputError(f"bad subsample bounds [{lo}, {hi}] for N={n_obs}")
    return lo, hi


def draw_subsample_size(rng: np.random.Generator, n_obs: int,
                        config: NetworkConfig = NetworkConfig()) -> int:
    """Log-normal(mu, sigma) size, rounded then clamped to the bounds."""
    lo, hi = size_bounds(config, n_obs)
    if config.fixed_size is not None:
        if config.fixed_size > n_obs:
            raise InvalidInputError(f"fixed_size {config.fixed_size} exceeds N={n_obs}")
        return config.fixed_size
    raw = float(np.exp(rng.normal(config.subsample_mu, config.subsample_sigma)))
    s = int(round_half_away(np.array([min(raw, 1e18)]))[0])
    return max(lo, min(hi, s))


@dataclass(frozen=True)
class NeuronUnit:
    """One trained unit plus its training metadata."""

    medians: np.ndarray       # int64, one per feature
    total_dev: int
    count: int
    drawn_size: int
    ejected: int

    @property
    def retained(self) -> int:
        return self.drawn_size - self.ejected

    @property
    def degenerate(self) -> bool:
        return self.total_dev == 0


def train_neuron(sub_int: np.ndarray, eject: bool = True) -> NeuronUnit:
    """Fit on an integerized subsample with one-pass ejection and refit.

    Flagged points are removed and the unit refit only when at least three
    observations remain; otherwise the pre-ejection fit is kept.
    """
    sub_int = np.asarray(sub_int, dtype=np.int64)
    if sub_int.ndim != 2 or sub_int.shape[0] < 1:
        raise InvalidInputError("subsample must be a non-empty 2-d integer matrix")
    drawn = int(sub_int.shape[0])
    med = featurewise_median(sub_int)
    devs = deviation_reduce(sub_int, med)
    test = fit_deviation_neuron(devs)
    ejected = 0
    if eject and not test.degenerate:
        keep = ~test.decisions(devs)
        n_flagged = drawn - int(keep.sum())
        if n_flagged and int(keep.sum()) >= 3:
            sub_int = sub_int[keep]
            med = featurewise_median(sub_int)
            devs = deviation_reduce(sub_int, med)
            test = fit_deviation_neuron(devs)
            ejected = n_flagged
    return NeuronUnit(medians=med, total_dev=test.total_dev, count=test.count,
                      drawn_size=drawn, ejected=ejected)


@dataclass(frozen=True)
class NetworkModel:
    """A trained ensemble: units in canonical index order plus data scales."""

    units: tuple[NeuronUnit, ...]
    scales: np.ndarray        # per-feature decimal scales
    config: NetworkConfig
    n_train: int

    @property
    def n_features(self) -> int:
        return int(self.scales.size)

    @property
    def n_neurons(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class AggregateOutput:
    """Per-observation output-node state."""

    score_sum: np.ndarray
    vote_sum: np.ndarray
    anomaly: np.ndarray

    def __len__(self) -> int:
        return int(self.score_sum.size)


def _resolve_workers(threads: int | None) -> int:
    if threads is None:
        import os

        threads = os.cpu_count() or 1
    return max(1, int(threads))


def fit_network(matrix, config: NetworkConfig = NetworkConfig(),
                threads: int | None = None) -> NetworkModel:
    """Train the ensemble. Bit-identical output for a fixed (data, config)
    regardless of the worker count."""
    arr = as_matrix(matrix)
    n_obs = arr.shape[0]
    if config.fixed_size is not None and config.fixed_size > n_obs:
        raise InvalidInputError(f"fixed_size {config.fixed_size} exceeds N={n_obs}")
    if config.decimals is None:
        scales = infer_matrix_decimals(arr)
    else:
        scales = np.full(arr.shape[1], config.decimals, dtype=np.int64)
    x_int = np.ascontiguousarray(integerize_matrix(arr, scales))
    children = np.random.SeedSequence(config.seed).spawn(config.n_neurons)

    def build(child) -> NeuronUnit:
        rng = np.random.default_rng(child)
        size = draw_subsample_size(rng, n_obs, config)
        if config.replacement:
            idx = rng.integers(0, n_obs, size=size)
        else:
            idx = rng.permutation(n_obs)[:size]
        return train_neuron(x_int[idx], eject=config.eject)

    workers = _resolve_workers(threads)
    if workers == 1:
        units = tuple(build(c) for c in children)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            units = tuple(ex.map(build, children))
    return NetworkModel(units=units, scales=scales, config=config, n_train=n_obs)


def predict(model: NetworkModel, matrix, threads: int | None = None) -> AggregateOutput:
    """Score every observation with every unit and aggregate at the output
    nodes. Scores accumulate in ascending unit index; a degenerate unit
    contributes score 0 and vote -1. Ties (vote sum 0) are normal."""
    arr = as_matrix(matrix)
    if arr.shape[1] != model.n_features:
        raise InvalidInputError(
            f"model expects {model.n_features} features, got {arr.shape[1]}"
        )
    x_int = np.ascontiguousarray(integerize_matrix(arr, model.scales))
    n_obs = arr.shape[0]
    score_sum = np.zeros(n_obs)
    vote_sum = np.zeros(n_obs, dtype=np.int64)

    def unit_scores(unit: NeuronUnit):
        if unit.degenerate:
            return None
        devs = deviation_reduce(x_int, unit.medians)
        return kernels.scores_for_deviations(unit.total_dev, unit.count, devs)

    workers = _resolve_workers(threads)
    batch = max(4 * workers, 8)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        for start in range(0, len(model.units), batch):
            chunk = model.units[start:start + batch]
            for s in ex.map(unit_scores, chunk):
                if s is None:
                    vote_sum -= 1
                else:
                    score_sum += s
                    vote_sum += np.where(s > 0.0, 1, -1)
    return AggregateOutput(score_sum=score_sum, vote_sum=vote_sum,
                           anomaly=vote_sum > 0)


def degrade(model: NetworkModel, keep: int,
            rng: np.random.Generator | None = None) -> NetworkModel:
    """Copy retaining a uniformly random subset of units (canonical order
    preserved); aggregation semantics unchanged."""
    if not 1 <= keep <= model.n_neurons:
        raise InvalidInputError(f"keep must be in [1, {model.n_neurons}], got {keep}")
    rng = np.random.default_rng() if rng is None else rng
    chosen = np.sort(rng.choice(model.n_neurons, size=keep, replace=False))
    units = tuple(model.units[i] for i in chosen)
    return NetworkModel(units=units, scales=model.scales,
                        config=replace(model.config, n_neurons=keep),
                        n_train=model.n_train)


# ---------------------------------------------------------------------------
# Persistence: versioned little-endian flat file.
#
#   magic "PNET", version u16, then the config block
#     n_neurons u32, mu f64, sigma f64, seed u64,
#     decimals i8 (-1 = auto), size_min i64 (-1 = default), size_max i64,
#     fixed_size i64 (-1 = none), eject u8, replacement u8,
#   n_train u64, n_features u32, per-feature scales u8[F],
#   n_units u32, then per unit:
#     total_dev u64, count u32, drawn u32, ejected u32, flags u8 (bit0 =
#     degenerate), medians i64[F].
# ---------------------------------------------------------------------------

MAGIC = b"PNET"
FORMAT_VERSION = 1
_CONFIG = struct.Struct("<IddQbqqqBB")
_HEAD = struct.Struct("<QI")
_UNIT = struct.Struct("<QIIIB")


def save_model(model: NetworkModel, path) -> None:
    cfg = model.config
    parts = [MAGIC, struct.pack("<H", FORMAT_VERSION)]
    parts.append(_CONFIG.pack(
        cfg.n_neurons, cfg.subsample_mu, cfg.subsample_sigma, cfg.seed,
        -1 if cfg.decimals is None else cfg.decimals,
        -1 if cfg.size_min is None else cfg.size_min,
        -1 if cfg.size_max is None else cfg.size_max,
        -1 if cfg.fixed_size is None else cfg.fixed_size,
        int(cfg.eject), int(cfg.replacement),
    ))
    parts.append(_HEAD.pack(model.n_train, model.n_features))
    parts.append(bytes(int(s) for s in model.scales))
    parts.append(struct.pack("<I", len(model.units)))
    for u in model.units:
        parts.append(_UNIT.pack(u.total_dev, u.count, u.drawn_size, u.ejected,
                                int(u.degenerate)))
        parts.append(u.medians.astype("<i8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path) -> NetworkModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise DataFormatError(f"{path}: not a model file (bad magic)")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported model version {version}")
    off = 6
    (n_neurons, mu, sigma, seed, dec, smin, smax, fixed, eject, repl) = \
        _CONFIG.unpack_from(blob, off)
    off += _CONFIG.size
    n_train, n_features = _HEAD.unpack_from(blob, off)
    off += _HEAD.size
    scales = np.frombuffer(blob, dtype=np.uint8, count=n_features, offset=off)
    scales = scales.astype(np.int64)
    off += n_features
    (n_units,) = struct.unpack_from("<I", blob, off)
    off += 4
    units = []
    for _ in range(n_units):
        total_dev, count, drawn, ejected, flags = _UNIT.unpack_from(blob, off)
        off += _UNIT.size
        med = np.frombuffer(blob, dtype="<i8", count=n_features, offset=off)
        off += 8 * n_features
        unit = NeuronUnit(medians=med.astype(np.int64), total_dev=int(total_dev),
                          count=int(count), drawn_size=int(drawn), ejected=int(ejected))
        if bool(flags & 1) != unit.degenerate:
            raise DataFormatError(f"{path}: inconsistent degeneracy flag")
        units.append(unit)
    if off != len(blob):
        raise DataFormatError(f"{path}: trailing bytes after the last unit record")
    config = NetworkConfig(
        n_neurons=n_neurons, subsample_mu=mu, subsample_sigma=sigma, seed=seed,
        decimals=None if dec < 0 else int(dec),
        size_min=None if smin < 0 else int(smin),
        size_max=None if smax < 0 else int(smax),
        fixed_size=None if fixed < 0 else int(fixed),
        eject=bool(eject), replacement=bool(repl),
    )
    return NetworkModel(units=tuple(units), scales=scales, config=config,
                        n_train=int(n_train))


def fit_single(matrix, decimals: int | None = None) -> DeviationModel:
    """The single-detector path the ensemble is compared against: one fit of
    the whole batch, no subsampling, no ejection."""
    return DeviationModel.fit(matrix, decimals=decimals)
