"""Result containers shared by the sparse-recovery and completion solvers."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np


class Termination(str, enum.Enum):
    RESIDUAL_MET = "residual-met"
    MAX_ITER = "max-iter"
    SPARSITY_BUDGET = "sparsity-budget"

    def __str__(self):
        return self.value


@dataclass
class IterationTrace:
    """Per-iteration history; every list has one entry per iteration.

    ``residual`` is the data residual ``||y - Phi x||^2`` of the iterate,
    ``contraction`` the off-support energy ``||(I - T) x||^2``.  Solvers
    without a threshold or support notion store ``nan`` there.
    """

    thresholds: list = field(default_factory=list)
    support_sizes: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    contractions: list = field(default_factory=list)
    objectives: list = field(default_factory=list)

    CSV_HEADER = ("iter", "thr", "support_size", "residual", "contraction")

    def append(self, thr=math.nan, support_size=-1, residual=math.nan,
               contraction=math.nan, objective=math.nan) -> None:
        self.thresholds.append(float(thr))
        self.support_sizes.append(int(support_size))
        self.residuals.append(float(residual))
        self.contractions.append(float(contraction))
        self.objectives.append(float(objective))

    def __len__(self):
        return len(self.thresholds)

    def rows(self):
        for k in range(len(self)):
            yield (k + 1, self.thresholds[k], self.support_sizes[k],
                   self.residuals[k], self.contractions[k])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.CSV_HEADER)
            for row in self.rows():
                w.writerow([row[0], repr(row[1]), row[2], repr(row[3]), repr(row[4])])


@dataclass
class RecoveryResult:
    estimate: np.ndarray
    iterations: int
    trace: IterationTrace
    termination: Termination


@dataclass
class CompletionTrace:
    """One entry per inner iteration: outer index, inner index, threshold,
    rank after thresholding, and fit residual ``||P_Omega(A - Z)||_F``."""

    c: list = field(default_factory=list)
    k: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    rank: list = field(default_factory=list)
    fit_residual: list = field(default_factory=list)

    CSV_HEADER = ("c", "k", "mu", "rank", "fit_residual")

    def append(self, c, k, mu, rank, fit_residual) -> None:
        self.c.append(int(c))
        self.k.append(int(k))
        self.mu.append(float(mu))
        self.rank.append(int(rank))
        self.fit_residual.append(float(fit_residual))

    def __len__(self):
        return len(self.c)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.CSV_HEADER)
            for row in zip(*(getattr(self, f.name) for f in fields(self))):
                w.writerow([row[0], row[1], repr(row[2]), row[3], repr(row[4])])


@dataclass
class CompletionResult:
    estimate: np.ndarray
    outer_passes: int
    inner_iterations: int
    fit_residual: float
    trace: CompletionTrace
    termination: Termination
