"""Plain-text file formats: matrices, index sets, operator descriptors."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .signals import SensingOperator


def write_matrix_csv(path, M) -> None:
    """One row per line, ``.`` decimal, no header; vectors become one column."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in A:
            w.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
        except ValueError as exc:
            raise InvalidParameterError(f"{path}: {exc}") from None
    if not rows:
        raise InvalidParameterError(f"{path}: empty matrix file")
    if len({len(r) for r in rows}) != 1:
        raise InvalidParameterError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def read_vector_csv(path) -> np.ndarray:
    A = read_matrix_csv(path)
    if A.shape[1] == 1:
        return A[:, 0]
    if A.shape[0] == 1:
        return A[0]
    raise InvalidParameterError(f"{path}: expected a vector, got shape {A.shape}")


def write_omega_csv(path, omega) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i, j in omega:
            w.writerow([int(i), int(j)])


def read_omega_csv(path) -> list[tuple[int, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            pairs = [(int(r[0]), int(r[1])) for r in csv.reader(fh) if r]
        except (ValueError, IndexError) as exc:
            raise InvalidParameterError(f"{path}: bad index pair ({exc})") from None
    if not pairs:
        raise InvalidParameterError(f"{path}: empty observation set")
    return pairs


def write_descriptor(path, op: SensingOperator) -> None:
    Path(path).write_text(json.dumps(op.descriptor(), sort_keys=True) + "\n", encoding="utf-8")


def read_descriptor(path) -> SensingOperator:
    return SensingOperator.from_descriptor(json.loads(Path(path).read_text(encoding="utf-8")))
