"""Self-contained ML runtime: CSV ingestion, ridge-stabilized least squares,
k-NN regression, model persistence, and observation buffering.

Deliberately stdlib-only and free of package-relative imports: generated
projects embed this module verbatim, which is what makes their numeric
behavior bit-identical to the simulator's.

Determinism notes: the least-squares solve is Gaussian elimination with
partial pivoting on the normal equations with a fixed ridge term; k-NN
compares squared Euclidean distances and breaks ties by lower stored-row
index; training rows are always dataset rows followed by buffer rows.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

#: Fixed ridge term added to the normal-equations diagonal; keeps collinear
#: datasets well-defined while staying within 1e-6 of exact least squares on
#: well-conditioned data.
RIDGE = 1e-9

MODEL_FORMAT_VERSION = 1

LINEAR_REGRESSION = "linear_regression"
KNN = "knn"


class MlError(Exception):
    pass


class DatasetNotFound(MlError):
    pass


class MissingColumn(MlError):
    def __init__(self, column: str):
        super().__init__(f"required column '{column}' missing from dataset")
        self.column = column


class NonNumericCell(MlError):
    def __init__(self, row: int, column: str):
        super().__init__(f"non-numeric or missing cell at data row {row}, "
                         f"column '{column}'")
        self.row = row
        self.column = column


class EmptyTrainingSet(MlError):
    pass


class SingularSystem(MlError):
    pass


class ArityMismatch(MlError):
    pass


class PersistenceIO(MlError):
    pass


class UnsupportedVersion(MlError):
    pass


class CorruptModelFile(MlError):
    pass


@dataclass
class DaConfig:
    """Declarative description of one data-analytics block."""

    name: str
    dataset_path: str
    feature_names: list[str]
    label_name: str
    algorithm: str  # LINEAR_REGRESSION | KNN
    k: int | None = None
    model_path: str = ""


@dataclass
class Dataset:
    column_names: list[str]
    rows: list[list[float]]  # n rows x m columns, all finite
    source_path: str = ""

    def column_index(self, name: str) -> int:
        return self.column_names.index(name)

    def project(self, names: list[str]) -> list[list[float]]:
        idx = [self.column_index(name) for name in names]
        return [[row[i] for i in idx] for row in self.rows]


@dataclass
class ObservationBuffer:
    da_name: str
    rows: list[tuple[list[float], float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class TrainedModel:
    algorithm: str
    feature_names: list[str]
    label_name: str
    weights: list[float] | None = None     # linear regression
    intercept: float | None = None
    samples: list[list[float]] | None = None  # knn: feature values + [label]
    k: int | None = None
    trained_on_rows: int = 0
    version: int = MODEL_FORMAT_VERSION


# -- dataset ingestion ---------------------------------------------------------


def _parse_cell(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    # reject inf/nan: trace formats and training assume finite values
    if value != value or value in (float("inf"), float("-inf")):
        return None
    return value


def load_dataset(path: str, required_columns: list[str]) -> Dataset:
    """Load a headered CSV.

    Required columns must be present and numeric in every row.  Columns that
    fail to parse numerically somewhere (and are not required) are dropped so
    the resulting matrix is fully numeric; row order is preserved.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            raw_rows = [row for row in reader if row]
    except FileNotFoundError:
        raise DatasetNotFound(f"dataset not found: {path}") from None
    except OSError as exc:
        raise DatasetNotFound(f"dataset not readable: {path}: {exc}") from None
    if header is None:
        raise MissingColumn(required_columns[0] if required_columns else "(any)")
    header = [h.strip() for h in header]
    for col in required_columns:
        if col not in header:
            raise MissingColumn(col)

    required = set(required_columns)
    parsed: list[list[float | None]] = []
    for r, raw in enumerate(raw_rows):
        row: list[float | None] = []
        for c, col in enumerate(header):
            cell = raw[c].strip() if c < len(raw) else ""
            value = _parse_cell(cell)
            if value is None and col in required:
                raise NonNumericCell(r + 1, col)
            row.append(value)
        parsed.append(row)

    keep = [c for c, col in enumerate(header)
            if col in required or all(row[c] is not None for row in parsed)]
    column_names = [header[c] for c in keep]
    rows = [[row[c] for c in keep] for row in parsed]
    return Dataset(column_names, rows, path)


# -- training --------------------------------------------------------------------


def _training_rows(config: DaConfig, dataset: Dataset,
                   buffer: ObservationBuffer | None):
    xs = dataset.project(config.feature_names)
    ys = dataset.project([config.label_name])
    rows = [(x, y[0]) for x, y in zip(xs, ys)]
    if buffer is not None:
        for features, label in buffer.rows:
            if len(features) != len(config.feature_names):
                raise ArityMismatch(
                    f"buffered sample has {len(features)} features, "
                    f"expected {len(config.feature_names)}")
            rows.append((list(features), label))
    return rows


def _solve_partial_pivot(a: list[list[float]], b: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting; `a` and `b` are consumed."""
    size = len(a)
    for col in range(size):
        pivot = max(range(col, size), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0.0:
            raise SingularSystem("normal equations are singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        for row in range(col + 1, size):
            factor = a[row][col] / a[col][col]
            if factor == 0.0:
                continue
            for k in range(col, size):
                a[row][k] -= factor * a[col][k]
            b[row] -= factor * b[col]
    solution = [0.0] * size
    for row in range(size - 1, -1, -1):
        acc = b[row]
        for k in range(row + 1, size):
            acc -= a[row][k] * solution[k]
        solution[row] = acc / a[row][row]
    return solution


def train(config: DaConfig, dataset: Dataset,
          buffer: ObservationBuffer | None = None) -> TrainedModel:
    """Fit `config.algorithm` on dataset rows followed by buffered rows."""
    rows = _training_rows(config, dataset, buffer)
    if not rows:
        raise EmptyTrainingSet(f"no rows to train '{config.name}' on")

    if config.algorithm == KNN:
        if not config.k or config.k < 1:
            raise MlError("knn needs k >= 1")
        samples = [list(x) + [y] for x, y in rows]
        return TrainedModel(KNN, list(config.feature_names), config.label_name,
                            samples=samples, k=config.k,
                            trained_on_rows=len(rows))

    m = len(config.feature_names)
    # augmented design matrix: features plus a trailing constant-1 column,
    # so the last solved coefficient is the intercept
    ata = [[0.0] * (m + 1) for _ in range(m + 1)]
    atb = [0.0] * (m + 1)
    for x, y in rows:
        aug = list(x) + [1.0]
        for i in range(m + 1):
            for j in range(m + 1):
                ata[i][j] += aug[i] * aug[j]
            atb[i] += aug[i] * y
    for i in range(m + 1):
        ata[i][i] += RIDGE
    coeffs = _solve_partial_pivot(ata, atb)
    return TrainedModel(LINEAR_REGRESSION, list(config.feature_names),
                        config.label_name, weights=coeffs[:m],
                        intercept=coeffs[m], trained_on_rows=len(rows))


# -- prediction --------------------------------------------------------------------


def predict(model: TrainedModel, features: list[float]) -> float:
    if len(features) != len(model.feature_names):
        raise ArityMismatch(f"model takes {len(model.feature_names)} "
                            f"features, got {len(features)}")
    if model.algorithm == LINEAR_REGRESSION:
        acc = 0.0
        for w, x in zip(model.weights, features):
            acc += w * x
        return acc + model.intercept
    if model.algorithm == KNN:
        dists = []
        for idx, sample in enumerate(model.samples):
            d = 0.0
            for a, b in zip(sample, features):
                diff = a - b
                d += diff * diff
            dists.append((d, idx))
        # ties on distance resolve to the lower stored-row index
        dists.sort(key=lambda pair: (pair[0], pair[1]))
        count = min(model.k, len(dists))
        total = 0.0
        for _, idx in dists[:count]:
            total += model.samples[idx][-1]
        return total / count
    raise MlError(f"unknown algorithm '{model.algorithm}'")


# -- observation --------------------------------------------------------------------


def observe(buffer: ObservationBuffer, features: list[float],
            label: float) -> ObservationBuffer:
    """Append one labeled sample; no deduplication, order preserved."""
    if buffer.rows and len(buffer.rows[0][0]) != len(features):
        raise ArityMismatch(
            f"observation has {len(features)} features, buffer holds "
            f"{len(buffer.rows[0][0])}")
    buffer.rows.append(([float(f) for f in features], float(label)))
    return buffer


# -- persistence --------------------------------------------------------------------


def save_model(model: TrainedModel, path: str) -> None:
    if model.algorithm == LINEAR_REGRESSION:
        params = {"weights": model.weights, "intercept": model.intercept}
    else:
        params = {"k": model.k, "samples": model.samples}
    doc = {
        "version": model.version,
        "algorithm": model.algorithm,
        "featureNames": model.feature_names,
        "labelName": model.label_name,
        "params": params,
        "trainedOnRows": model.trained_on_rows,
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise PersistenceIO(f"cannot write model file {path}: {exc}") from None


def load_model(path: str) -> TrainedModel:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PersistenceIO(f"cannot read model file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise CorruptModelFile(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise CorruptModelFile(f"{path}: not a model document")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: model format version {version!r} "
                                 f"(supported: {MODEL_FORMAT_VERSION})")
    try:
        algorithm = doc["algorithm"]
        features = [str(f) for f in doc["featureNames"]]
        label = str(doc["labelName"])
        params = doc["params"]
        trained_on = int(doc["trainedOnRows"])
        if algorithm == LINEAR_REGRESSION:
            weights = [float(w) for w in params["weights"]]
            if len(weights) != len(features):
                raise CorruptModelFile(f"{path}: weight/feature length mismatch")
            return TrainedModel(algorithm, features, label, weights=weights,
                                intercept=float(params["intercept"]),
                                trained_on_rows=trained_on)
        if algorithm == KNN:
            samples = [[float(v) for v in row] for row in params["samples"]]
            width = len(features) + 1
            if any(len(row) != width for row in samples):
                raise CorruptModelFile(f"{path}: sample width mismatch")
            return TrainedModel(algorithm, features, label, samples=samples,
                                k=int(params["k"]), trained_on_rows=trained_on)
        raise CorruptModelFile(f"{path}: unknown algorithm {algorithm!r}")
    except CorruptModelFile:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelFile(f"{path}: {exc}") from None
