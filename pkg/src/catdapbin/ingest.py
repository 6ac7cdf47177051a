"""CSV ingestion, column schemas and the JSON run configuration."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .discretize import DEFAULT_GRID_SIZE
from .pipeline import (
    BINARY,
    CATEGORICAL,
    CONTINUOUS,
    KINDS,
    AnalysisConfig,
    Dataset,
    ThresholdSearch,
)


class InputError(ValueError):
    """Bad input file or configuration; reported to the user, exit code 1."""


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    log_transform: bool = False
    epsilon: float | None = None
    range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.log_transform and self.kind != CONTINUOUS:
            raise InputError(f"column {self.name!r}: only continuous columns can be logged")
        if self.range is not None:
            lo, hi = (float(v) for v in self.range)
            if not lo < hi:
                raise InputError(f"column {self.name!r}: range needs a < b")
            object.__setattr__(self, "range", (lo, hi))
        if self.epsilon is not None and not self.epsilon > 0:
            raise InputError(f"column {self.name!r}: epsilon must be positive")

    @classmethod
    def from_dict(cls, name: str, doc: Mapping[str, Any]) -> "ColumnSchema":
        unknown = set(doc) - {"kind", "log_transform", "epsilon", "range"}
        if unknown:
            raise InputError(f"column {name!r}: unknown keys {sorted(unknown)}")
        if "kind" not in doc:
            raise InputError(f"column {name!r}: missing 'kind'")
        rng = doc.get("range")
        if rng is not None and (not isinstance(rng, (list, tuple)) or len(rng) != 2):
            raise InputError(f"column {name!r}: range must be [a, b]")
        return cls(
            name,
            doc["kind"],
            bool(doc.get("log_transform", False)),
            doc.get("epsilon"),
            tuple(rng) if rng is not None else None,
        )

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind}
        if self.log_transform:
            doc["log_transform"] = True
            doc["epsilon"] = self.epsilon
        if self.range is not None:
            doc["range"] = list(self.range)
        return doc


@dataclass(frozen=True)
class RunConfig:
    """Parsed JSON configuration for ``analyze`` and ``discretize``."""

    columns: Mapping[str, ColumnSchema]
    response: str
    predictors: tuple[str, ...]
    extra_responses: tuple[str, ...] = ()
    iterations: int = 1000
    seed: int = 0
    grid_size: int = DEFAULT_GRID_SIZE
    aic_margin: float = 2.0

    def __post_init__(self) -> None:
        for name in (self.response, *self.predictors, *self.extra_responses):
            if name not in self.columns:
                raise InputError(f"column {name!r} has no schema entry")
        if self.response in self.predictors:
            raise InputError("the response cannot also be a predictor")
        if self.iterations < 1:
            raise InputError("iterations must be positive")
        if self.grid_size < 1:
            raise InputError("grid_size must be positive")
        for name in self.predictors:
            col = self.columns[name]
            if col.kind == CONTINUOUS and col.range is None:
                raise InputError(f"continuous predictor {name!r} needs a range")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RunConfig":
        try:
            columns = {
                name: ColumnSchema.from_dict(name, spec)
                for name, spec in doc["columns"].items()
            }
            return cls(
                columns=columns,
                response=doc["response"],
                predictors=tuple(doc["predictors"]),
                extra_responses=tuple(doc.get("extra_responses", ())),
                iterations=int(doc.get("iterations", 1000)),
                seed=int(doc.get("seed", 0)),
                grid_size=int(doc.get("grid_size", DEFAULT_GRID_SIZE)),
                aic_margin=float(doc.get("aic_margin", 2.0)),
            )
        except KeyError as exc:
            raise InputError(f"config is missing {exc.args[0]!r}") from None
        except (TypeError, AttributeError) as exc:
            raise InputError(f"malformed config: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        return {
            "response": self.response,
            "predictors": list(self.predictors),
            "extra_responses": list(self.extra_responses),
            "iterations": self.iterations,
            "seed": self.seed,
            "grid_size": self.grid_size,
            "aic_margin": self.aic_margin,
            "columns": {name: col.to_dict() for name, col in self.columns.items()},
        }

    def analysis_config(self, dataset: Dataset, response: str, workers: int = 1,
                        fixed: Mapping[str, float] | None = None) -> AnalysisConfig:
        """Analysis of ``response`` against every other analysed column."""
        if response == self.response:
            predictors = self.predictors
        else:
            predictors = tuple(
                n for n in (self.response, *self.predictors) if n != response
            )
        searches = {
            n: ThresholdSearch(*self.columns[n].range, self.grid_size)
            for n in predictors
            if dataset.kinds[n] == CONTINUOUS
        }
        return AnalysisConfig(
            response=response,
            predictors=predictors,
            searches=searches,
            iterations=self.iterations,
            master_seed=self.seed,
            fixed_thresholds=dict(fixed or {}),
            workers=workers,
        )


def read_config(path: str | Path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "config" in doc and "columns" not in doc:
        doc = doc["config"]  # a run manifest
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    return RunConfig.from_dict(doc)


def log_transform(values, epsilon: float | None = None) -> tuple[np.ndarray, float]:
    """``log(max(x, epsilon))``; returns the values and the epsilon used.

    The default epsilon is half the smallest positive value.
    """
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise InputError("log transform needs non-negative values")
    if epsilon is None:
        positive = values[values > 0]
        if positive.size == 0:
            raise InputError("log transform needs at least one positive value")
        epsilon = float(positive.min()) / 2.0
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    return np.log(np.maximum(values, epsilon)), float(epsilon)


def _parse_cell(text: str, kind: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    if kind == CATEGORICAL and (value < 0 or value != int(value)):
        return None
    if kind == BINARY and value < 0:
        return None
    return value


def load_csv(path: str | Path, schema: Mapping[str, ColumnSchema]) -> Dataset:
    """Read the schema's columns from a CSV file with a header row.

    Binary columns record presence: any positive value becomes 1.  Missing
    or unparseable cells are rejected, listing every offending row.
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise InputError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    missing = [name for name in schema if name not in header]
    if missing:
        raise InputError(f"{path}: missing columns {missing}")
    body = rows[1:]
    if not body:
        raise InputError(f"{path} has a header but no data rows")
    where = {name: header.index(name) for name in schema}
    parsed = {name: np.empty(len(body)) for name in schema}
    problems = []
    for r, row in enumerate(body, start=2):
        for name, col in schema.items():
            idx = where[name]
            cell = row[idx].strip() if idx < len(row) else ""
            value = _parse_cell(cell, col.kind)
            if value is None:
                problems.append(f"row {r}, column {name!r}: {cell!r}")
            else:
                parsed[name][r - 2] = value
    if problems:
        raise InputError(
            f"{path}: {len(problems)} bad cell(s)\n  " + "\n  ".join(problems)
        )
    columns, kinds = {}, {}
    for name, col in schema.items():
        values = parsed[name]
        if col.kind == BINARY:
            values = (values > 0).astype(np.int64)
        elif col.kind == CATEGORICAL:
            values = values.astype(np.int64)
        columns[name] = values
        kinds[name] = col.kind
    return Dataset(columns, kinds)


def prepare(dataset: Dataset, schema: Mapping[str, ColumnSchema]):
    """Apply the schema's log transforms.

    Returns the transformed dataset and the resolved schema, with every
    epsilon filled in so a rerun is exact.
    """
    columns = dict(dataset.columns)
    resolved = {}
    for name, col in schema.items():
        if col.log_transform:
            columns[name], eps = log_transform(columns[name], col.epsilon)
            col = ColumnSchema(name, col.kind, True, eps, col.range)
        resolved[name] = col
    return Dataset(columns, dataset.kinds), resolved
