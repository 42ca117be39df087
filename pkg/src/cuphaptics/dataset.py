"""Dataset persistence, train/validation splitting, and feature statistics.

The on-disk format is a plain CSV with the exact header

    p_ch1_kpa,p_ch2_kpa,p_ch3_kpa,p_ch4_kpa,p_atm_kpa,delta_mm,phi_deg

comma-separated, '.' decimal point, UTF-8, LF line endings, one row per
sample, numbers printed with 9 significant digits. Round trips are
lossless at that precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Angle, GroundTruthPose, SensorFrame
from .errors import (
    ConfigError,
    CsvParseError,
    DegenerateChannelError,
    InvalidInputError,
)
from .rng import make_generator

CSV_COLUMNS = (
    "p_ch1_kpa",
    "p_ch2_kpa",
    "p_ch3_kpa",
    "p_ch4_kpa",
    "p_atm_kpa",
    "delta_mm",
    "phi_deg",
)


@dataclass(frozen=True)
class LabeledSample:
    """One sensor frame paired with the pose that produced it."""

    frame: SensorFrame
    pose: GroundTruthPose


@dataclass(frozen=True)
class SplitSpec:
    """Shuffle-then-cut split: |train| = round(n * train_fraction)."""

    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        f = self.train_fraction
        if not (isinstance(f, (int, float)) and math.isfinite(f) and 0.0 < f < 1.0):
            raise ConfigError(f"train_fraction must be in (0, 1), got {f!r}")


@dataclass(frozen=True)
class FeatureStats:
    """Per-channel mean and population (divide-by-n) std of the 4 inputs."""

    mean: tuple[float, float, float, float]
    std: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        mean = tuple(float(m) for m in self.mean)
        std = tuple(float(s) for s in self.std)
        if len(mean) != 4 or len(std) != 4:
            raise InvalidInputError("feature stats must cover exactly 4 channels")
        for j, (m, s) in enumerate(zip(mean, std), start=1):
            if not (math.isfinite(m) and math.isfinite(s)):
                raise InvalidInputError(f"non-finite stats for channel {j}")
            if s <= 0.0:
                raise DegenerateChannelError(
                    f"channel {j} has std {s}; a positive spread is required"
                )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def write_csv(samples: Sequence[LabeledSample], path: str | Path) -> None:
    """Write samples to ``path`` in the package CSV schema."""
    lines = [",".join(CSV_COLUMNS)]
    for s in samples:
        row = (*s.frame.p_ch, s.frame.p_atm, s.pose.delta, s.pose.phi.degrees)
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_cell(raw: str, line: int, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise CsvParseError(
            f"expected a number, got {raw!r}", line=line, column=column
        ) from None
    if not math.isfinite(value):
        raise CsvParseError(f"non-finite value {raw!r}", line=line, column=column)
    return value


def read_csv(path: str | Path) -> list[LabeledSample]:
    """Read a dataset CSV, validating the header and every cell.

    ``phi_deg`` must lie in [0, 360]; an exact 360 (a 9-significant-digit
    rounding artifact of values just below the wrap) reads back as 0.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvParseError("empty file: missing header", line=1)
    header = tuple(rows[0])
    if header != CSV_COLUMNS:
        raise CsvParseError(
            f"bad header {','.join(header)!r}; expected {','.join(CSV_COLUMNS)!r}",
            line=1,
        )
    samples = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue  # tolerate a trailing blank line
        if len(row) != len(CSV_COLUMNS):
            raise CsvParseError(
                f"expected {len(CSV_COLUMNS)} columns, got {len(row)}", line=line_no
            )
        values = [
            _parse_cell(cell, line_no, col) for cell, col in zip(row, CSV_COLUMNS)
        ]
        phi = values[6]
        if not (0.0 <= phi <= 360.0):
            raise CsvParseError(
                f"phi_deg must be in [0, 360], got {phi}", line=line_no, column="phi_deg"
            )
        try:
            frame = SensorFrame(p_ch=tuple(values[0:4]), p_atm=values[4])
            pose = GroundTruthPose(delta=values[5], phi=Angle(phi))
        except InvalidInputError as exc:
            raise CsvParseError(str(exc), line=line_no) from exc
        samples.append(LabeledSample(frame=frame, pose=pose))
    return samples


def split(
    samples: Sequence[LabeledSample], spec: SplitSpec
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Partition samples into (train, validation) by a seeded shuffle."""
    n = len(samples)
    if n < 2:
        raise ConfigError(f"need at least 2 samples to split, got {n}")
    n_train = round(n * spec.train_fraction)
    perm = make_generator(spec.seed).permutation(n)
    train = [samples[i] for i in perm[:n_train]]
    val = [samples[i] for i in perm[n_train:]]
    return train, val


def feature_stats(train: Sequence[LabeledSample]) -> FeatureStats:
    """Per-channel mean/std of chamber pressures. Training set only."""
    if not train:
        raise ConfigError("cannot compute feature stats of an empty set")
    x = np.array([s.frame.p_ch for s in train], dtype=np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)  # population convention (divide by n)
    for j, s in enumerate(std, start=1):
        if not s > 0.0:
            raise DegenerateChannelError(
                f"channel {j} is constant in the training set (std = {s})"
            )
    return FeatureStats(mean=tuple(mean), std=tuple(std))


def standardize(
    frame: SensorFrame, stats: FeatureStats
) -> tuple[float, float, float, float]:
    """Map chamber pressures to z-scores under the given training stats."""
    return tuple(
        (p - m) / s for p, m, s in zip(frame.p_ch, stats.mean, stats.std)
    )
