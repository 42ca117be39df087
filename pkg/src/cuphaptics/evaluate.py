"""Estimator evaluation: angular RMSE/MAE, multi-seed comparison, scatter export.

Both estimators are scored on the same validation fold per seed. A
prediction can be absent (the pressure-difference vector was ~zero);
absent predictions are excluded from the error metrics and reported as a
separate count rather than being scored at some arbitrary penalty angle.
Across-seed spread is the population (divide-by-n) standard deviation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Angle, angular_error, estimate_direction
from .dataset import LabeledSample, SplitSpec, split
from .errors import ConfigError, InvalidInputError
from .mlp import MlpModel, TrainConfig, predict_angle, train

MLP_METHOD = "mlp"
MODEL_BASED_METHOD = "model_based"


@dataclass(frozen=True)
class PredictionPair:
    """One scored sample: the true yaw and the (possibly absent) prediction."""

    phi_true: Angle
    phi_pred: Angle | None


@dataclass(frozen=True)
class SeedMetrics:
    """Validation-fold metrics for one method under one seed."""

    seed: int
    rmse_deg: float
    mae_deg: float
    n_scored: int
    n_undefined: int


@dataclass(frozen=True)
class MethodSummary:
    """Per-seed rows plus mean/std aggregates for one method."""

    method: str
    per_seed: tuple[SeedMetrics, ...]
    rmse_mean_deg: float
    rmse_std_deg: float
    mae_mean_deg: float
    mae_std_deg: float
    n_undefined_total: int


@dataclass(frozen=True)
class EvalReport:
    """The two-method comparison over a common seed list."""

    seeds: tuple[int, ...]
    n_samples: int
    n_validation: int
    single_run: bool
    mlp: MethodSummary
    model_based: MethodSummary

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        # Field order fixed by the dataclass definitions -> stable output.
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def rmse_deg(pairs: Sequence[PredictionPair]) -> float:
    """sqrt(mean(angular_error^2)); every pair must carry a prediction."""
    if not pairs:
        raise InvalidInputError("rmse_deg requires at least one pair")
    errs = []
    for pair in pairs:
        if pair.phi_pred is None:
            raise InvalidInputError(
                "rmse_deg got an absent prediction; exclude those first"
            )
        errs.append(angular_error(pair.phi_pred, pair.phi_true))
    return float(np.sqrt(np.mean(np.square(errs))))


def mae_deg(pairs: Sequence[PredictionPair]) -> float:
    """Mean absolute wrap-aware angular error."""
    if not pairs:
        raise InvalidInputError("mae_deg requires at least one pair")
    errs = []
    for pair in pairs:
        if pair.phi_pred is None:
            raise InvalidInputError(
                "mae_deg got an absent prediction; exclude those first"
            )
        errs.append(angular_error(pair.phi_pred, pair.phi_true))
    return float(np.mean(errs))


def evaluate_model_based(samples: Sequence[LabeledSample]) -> list[PredictionPair]:
    """Pressure-difference estimate per sample."""
    return [
        PredictionPair(
            phi_true=s.pose.phi, phi_pred=estimate_direction(s.frame).phi_pred
        )
        for s in samples
    ]


def evaluate_mlp(
    model: MlpModel, samples: Sequence[LabeledSample]
) -> list[PredictionPair]:
    """Network estimate per sample."""
    return [
        PredictionPair(phi_true=s.pose.phi, phi_pred=predict_angle(model, s.frame))
        for s in samples
    ]


def _seed_metrics(seed: int, pairs: Sequence[PredictionPair]) -> SeedMetrics:
    scored = [p for p in pairs if p.phi_pred is not None]
    n_undefined = len(pairs) - len(scored)
    return SeedMetrics(
        seed=seed,
        rmse_deg=rmse_deg(scored),
        mae_deg=mae_deg(scored),
        n_scored=len(scored),
        n_undefined=n_undefined,
    )


def _summarize(method: str, rows: Sequence[SeedMetrics]) -> MethodSummary:
    rmse = np.array([r.rmse_deg for r in rows])
    mae = np.array([r.mae_deg for r in rows])
    return MethodSummary(
        method=method,
        per_seed=tuple(rows),
        rmse_mean_deg=float(rmse.mean()),
        rmse_std_deg=float(rmse.std()),  # population std; 0.0 for a single seed
        mae_mean_deg=float(mae.mean()),
        mae_std_deg=float(mae.std()),
        n_undefined_total=int(sum(r.n_undefined for r in rows)),
    )


def run_comparison(
    samples: Sequence[LabeledSample],
    split_spec: SplitSpec,
    train_config: TrainConfig,
    seeds: Sequence[int],
) -> tuple[EvalReport, dict[str, list[PredictionPair]]]:
    """compare() plus the first seed's per-sample pairs for scatter export.

    Each seed drives both the fold shuffle and the training run, so one
    integer fully reproduces a pipeline repetition.
    """
    if not seeds:
        raise ConfigError("need at least one seed")
    mlp_rows, mb_rows = [], []
    first_pairs: dict[str, list[PredictionPair]] = {}
    n_validation = 0
    for i, seed in enumerate(seeds):
        train_set, val_set = split(samples, replace(split_spec, seed=seed))
        model, _ = train(train_set, val_set, replace(train_config, seed=seed))
        mlp_pairs = evaluate_mlp(model, val_set)
        mb_pairs = evaluate_model_based(val_set)
        mlp_rows.append(_seed_metrics(seed, mlp_pairs))
        mb_rows.append(_seed_metrics(seed, mb_pairs))
        if i == 0:
            n_validation = len(val_set)
            first_pairs = {MLP_METHOD: mlp_pairs, MODEL_BASED_METHOD: mb_pairs}
    report = EvalReport(
        seeds=tuple(int(s) for s in seeds),
        n_samples=len(samples),
        n_validation=n_validation,
        single_run=len(seeds) == 1,
        mlp=_summarize(MLP_METHOD, mlp_rows),
        model_based=_summarize(MODEL_BASED_METHOD, mb_rows),
    )
    return report, first_pairs


def compare(
    samples: Sequence[LabeledSample],
    split_spec: SplitSpec,
    train_config: TrainConfig,
    seeds: Sequence[int],
) -> EvalReport:
    """Split, train, and score both methods once per seed; aggregate."""
    report, _ = run_comparison(samples, split_spec, train_config, seeds)
    return report


def export_scatter(
    results: Mapping[str, Iterable[PredictionPair]], path: str | Path
) -> None:
    """Write defined predictions as `phi_true_deg,phi_pred_deg,method` rows."""

    def fmt(v: float) -> str:
        return format(v, ".9g")

    lines = ["phi_true_deg,phi_pred_deg,method"]
    for method, pairs in results.items():
        for pair in pairs:
            if pair.phi_pred is None:
                continue
            lines.append(
                f"{fmt(pair.phi_true.degrees)},{fmt(pair.phi_pred.degrees)},{method}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
