# qsvrg/storage/datasets.py

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ..core.design import DesignMatrix, Matrix, Vector
from ..core.exceptions import ConfigurationError, DatasetError
from ..utils.random_streams import RngStream

logger = logging.getLogger(__name__)

# (variables, data points) of the benchmark datasets, checked against the raw file
KNOWN_DATASETS = {
    "sonar": (60, 208),
    "madelon": (500, 2000),
    "sido0": (4932, 12678),
}

LAMBDA_SCALES = (1.0, 0.1, 0.01)
SYNTHETIC_STREAM = 0x5EED
NOISE_LEVEL = 0.1


@dataclass(frozen=True)
class RawDataset:
    features: Matrix
    labels: Vector
    name: str

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class PreprocessReport:
    means: List[float]
    scales: List[float]
    constant_column_index: int
    dropped_columns: List[int] = field(default_factory=list)


def _parse_row(cells: Sequence[str], path: str, line_no: int) -> List[float]:
    values = []
    for cell in cells:
        try:
            value = float(cell)
        except ValueError:
            raise DatasetError(f"non-numeric cell {cell.strip()!r}", path, line_no) from None
        if not math.isfinite(value):
            raise DatasetError(f"non-finite cell {cell.strip()!r}", path, line_no)
        values.append(value)
    return values


def _is_numeric_line(cells: Sequence[str]) -> bool:
    try:
        for cell in cells:
            float(cell)
    except ValueError:
        return False
    return True


def load_csv(path) -> RawDataset:
    """Comma-separated rows, last column the label, optional header line"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot read file: {e}", str(path)) from e

    lines = [(i, line) for i, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise DatasetError("file is empty", str(path))
    if not _is_numeric_line(lines[0][1].split(",")):
        logger.debug(f"Skipping header line of {path}")
        lines = lines[1:]
        if not lines:
            raise DatasetError("file has a header but no data rows", str(path))

    width = None
    rows = []
    for line_no, line in lines:
        cells = line.split(",")
        if width is None:
            width = len(cells)
            if width < 2:
                raise DatasetError(
                    "need at least one feature column and a label", str(path), line_no
                )
        elif len(cells) != width:
            raise DatasetError(
                f"expected {width} columns, found {len(cells)}", str(path), line_no
            )
        rows.append(_parse_row(cells, str(path), line_no))

    data = np.array(rows, dtype=np.float64)
    if data.shape[0] < 2:
        raise DatasetError("need at least two observations", str(path))
    raw = RawDataset(features=data[:, :-1], labels=data[:, -1], name=path.stem)
    _check_known_dimensions(raw)
    logger.info(f"Loaded {raw.name}: n={raw.n}, d={raw.d}")
    return raw


def save_csv(raw: RawDataset, path) -> Path:
    """Write rows with 17 significant digits so that load_csv reads back the same floats"""
    path = Path(path)
    data = np.column_stack([raw.features, raw.labels])
    with open(path, "w", encoding="utf-8") as f:
        for row in data:
            f.write(",".join(format(float(v), ".17g") for v in row))
            f.write("\n")
    return path


def _check_known_dimensions(raw: RawDataset):
    expected = KNOWN_DATASETS.get(raw.name.lower())
    if expected is not None and expected != (raw.d, raw.n):
        logger.warning(
            f"{raw.name}: expected {expected[0]} variables and {expected[1]} points, "
            f"found {raw.d} and {raw.n}"
        )


def preprocess(raw: RawDataset) -> Tuple[DesignMatrix, PreprocessReport]:
    """Center, scale to unit population std, drop constant columns, append a ones column"""
    x = np.asarray(raw.features, dtype=np.float64)
    means = x.mean(axis=0)
    centered = x - means
    stds = np.sqrt(np.mean(centered * centered, axis=0))
    magnitude = np.maximum(1.0, np.max(np.abs(x), axis=0))
    keep = stds > 1e-12 * magnitude
    dropped = [int(j) for j in np.flatnonzero(~keep)]
    if not np.any(keep):
        raise DatasetError(f"{raw.name}: every column has zero variance")
    if dropped:
        logger.info(f"{raw.name}: dropped zero-variance columns {dropped}")

    normalized = centered[:, keep] / stds[keep]
    design = DesignMatrix.from_rows(np.column_stack([normalized, np.ones(raw.n)]))
    report = PreprocessReport(
        means=[float(v) for v in means[keep]],
        scales=[float(v) for v in stds[keep]],
        constant_column_index=design.d - 1,
        dropped_columns=dropped,
    )
    return design, report


def synthetic_problem(
    n: int, d: int, condition_number: float, seed: int = 0
) -> Tuple[DesignMatrix, Vector]:
    """X = √n·U·diag(σ)·Vᵀ with σ_max²/σ_min² = condition_number, Y = Xθ† + noise"""
    if not (n >= d >= 1):
        raise ConfigurationError(f"synthetic problems need n >= d >= 1, got n={n}, d={d}")
    if condition_number < 1:
        raise ConfigurationError(f"condition number must be at least 1, got {condition_number}")

    rng = RngStream(seed, SYNTHETIC_STREAM)
    u, _ = np.linalg.qr(rng.normal((n, d)))
    v, _ = np.linalg.qr(rng.normal((d, d)))
    exponents = np.linspace(0.0, 1.0, d) if d > 1 else np.zeros(1)
    sigma = condition_number ** (-0.5 * exponents)
    x = math.sqrt(n) * (u * sigma) @ v.T
    theta_true = rng.normal(d)
    y = x @ theta_true + NOISE_LEVEL * rng.normal(n)
    return DesignMatrix.from_rows(x), y


def lambda_grid(lbar: float, n: int, scales: Sequence[float] = LAMBDA_SCALES) -> List[float]:
    """λ = scale·L̄/n"""
    return [s * lbar / n for s in scales]
