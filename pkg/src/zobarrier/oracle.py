"""Noisy measurement oracle with budget accounting and a safety audit.

The oracle is the only channel through which the solver sees a problem:
it serves F_i(x, xi) = f_i(x) + xi with fresh noise per scalar value,
counts every call against an optional budget cap, and records a
ground-truth feasibility audit of every queried point. The audit uses
the problem's exact evaluators -- a test-harness privilege the solver
never gets.

Noise draws are keyed by (master_seed, iteration, side, sample, function
index), never by call order, so identical query sequences from two
oracles with equal seeds are bitwise identical and base/perturbed halves
may be served in any order.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhaustedError, ContractViolationError
from .problems import ProblemSpec
from .streams import DOMAIN_NOISE, SIDE_BASE, SIDE_PERTURBED, substream

_UNIT_NORM_TOL = 1e-12

_KINDS = ("gaussian", "bounded-uniform", "none")


@dataclass
class NoiseModel:
    """Zero-mean sub-Gaussian measurement noise.

    gaussian: N(0, sigma^2); bounded-uniform: U[-sigma*sqrt(3),
    sigma*sqrt(3)] (variance sigma^2); none: exact values.
    """

    kind: str = "gaussian"
    sigma: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ContractViolationError(f"noise kind must be one of {_KINDS}")
        if self.sigma < 0.0:
            raise ContractViolationError("sigma must be nonnegative")
        if self.kind == "none":
            # Consumers read sigma for their confidence bounds; a noiseless
            # model must report zero regardless of what was passed in.
            self.sigma = 0.0

    def draw(self, iteration: int, side: int, rows: int, cols: int) -> np.ndarray:
        """Noise table for (iteration, side); entry [j, i] is the draw for
        sample j, function i. Pure function of the key."""
        if self.kind == "none" or self.sigma == 0.0:
            return np.zeros((rows, cols))
        rng = substream(self.master_seed, DOMAIN_NOISE, iteration, side)
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size=(rows, cols))
        half = self.sigma * math.sqrt(3.0)
        return rng.uniform(-half, half, size=(rows, cols))


@dataclass
class MeasurementBatch:
    """One iteration's worth of noisy values.

    base_values[j, i] = F_i(x, xi-) and perturbed_values[j, i] =
    F_i(x + radius * directions[j], xi+), for functions i = 0 (objective)
    through m (constraints) and samples j = 0..n-1. The base point is
    re-measured with fresh noise for every j (1-point bandit feedback).
    """

    iteration: int
    base_point: np.ndarray
    directions: np.ndarray
    radius: float
    base_values: np.ndarray
    perturbed_values: np.ndarray

    def __post_init__(self):
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
            raise ContractViolationError("directions must be unit vectors")
        if self.base_values.shape != self.perturbed_values.shape:
            raise ContractViolationError("base/perturbed tables must match in shape")
        if self.base_values.shape[0] != self.directions.shape[0]:
            raise ContractViolationError("one value row per direction required")

    @property
    def n_samples(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def scalar_calls(self) -> int:
        return 2 * self.base_values.size


@dataclass
class AuditEntry:
    iteration: int
    tag: str  # "base" | "perturbed"
    sample_index: int  # 0 for base, 1..n for perturbed points
    point: np.ndarray
    true_max_constraint: float

    @property
    def violated(self) -> bool:
        return self.true_max_constraint > 0.0


@dataclass
class SafetyAudit:
    """Ground-truth record of every point the oracle was queried at."""

    entries: list[AuditEntry] = field(default_factory=list)
    total_scalar_calls: int = 0
    total_directions: int = 0

    @property
    def violation_count(self) -> int:
        return sum(1 for e in self.entries if e.violated)

    def violations(self) -> list[AuditEntry]:
        return [e for e in self.entries if e.violated]


_TAG_ORDER = {"base": 0, "perturbed": 1}


class MeasurementOracle:
    """Serves noisy measurements of one problem and audits every query.

    Value computation is pure given the stream key; audit and budget
    recording are lock-guarded appends, read back in canonical
    (iteration, side, sample) order.
    """

    def __init__(
        self,
        problem: ProblemSpec,
        noise: NoiseModel | None = None,
        budget_cap: int | None = None,
    ):
        self.problem = problem
        self.noise = noise if noise is not None else NoiseModel(
            kind="gaussian", sigma=problem.noise_sigma
        )
        self.budget_cap = budget_cap
        self._entries: list[AuditEntry] = []
        self._scalar_calls = 0
        self._directions = 0
        self._lock = threading.Lock()

    # -- accounting --------------------------------------------------------

    @property
    def total_scalar_calls(self) -> int:
        return self._scalar_calls

    @property
    def total_directions(self) -> int:
        return self._directions

    def _charge(self, scalar_calls: int, directions: int = 0) -> None:
        with self._lock:
            if (
                self.budget_cap is not None
                and self._scalar_calls + scalar_calls > self.budget_cap
            ):
                raise BudgetExhaustedError(
                    f"budget cap {self.budget_cap} would be exceeded "
                    f"({self._scalar_calls} used, {scalar_calls} requested)"
                )
            self._scalar_calls += scalar_calls
            self._directions += directions

    def _record(
        self, iteration: int, tag: str, sample_index: int, x: np.ndarray, fc: float | None = None
    ) -> None:
        if fc is None:
            fc = self.problem.max_constraint(x)
        with self._lock:
            self._entries.append(
                AuditEntry(iteration, tag, sample_index, np.array(x, dtype=float), float(fc))
            )

    def _record_points(self, iteration: int, tag: str, points: np.ndarray, fcs: np.ndarray) -> None:
        with self._lock:
            for j, (x, fc) in enumerate(zip(points, fcs)):
                self._entries.append(
                    AuditEntry(iteration, tag, j + 1, np.array(x, dtype=float), float(fc))
                )

    # -- measurement -------------------------------------------------------

    def measure(self, i: int, x: np.ndarray, stream_key: tuple[int, int, int]) -> float:
        """Single noisy value F_i(x, xi) on the stream keyed by
        (iteration, sample index, side)."""
        x = np.asarray(x, dtype=float)
        if not np.isfinite(x).all():
            raise ContractViolationError("query point must be finite")
        if not 0 <= i <= self.problem.num_constraints:
            raise ContractViolationError(
                f"function index {i} outside 0..{self.problem.num_constraints}"
            )
        k, j, side = stream_key
        if side not in (SIDE_BASE, SIDE_PERTURBED):
            raise ContractViolationError("side must be SIDE_BASE or SIDE_PERTURBED")
        self._charge(1)
        table = self.noise.draw(k, side, j + 1, self.problem.num_constraints + 1)
        if i == 0:
            true_value = self.problem.objective(x)
        else:
            true_value = self.problem.constraints[i - 1](x)
        tag = "base" if side == SIDE_BASE else "perturbed"
        self._record(k, tag, 0 if side == SIDE_BASE else j + 1, x)
        return float(true_value) + float(table[j, i])

    def measure_base(self, x: np.ndarray, n: int, iteration: int) -> np.ndarray:
        """n fresh noisy measurements of every function at x; (n, m+1)."""
        x = np.asarray(x, dtype=float)
        if n < 1:
            raise ContractViolationError("need n >= 1 base samples")
        m1 = self.problem.num_constraints + 1
        self._charge(n * m1)
        true_vals = self.problem.evaluate_all(x[None, :])  # (1, m+1)
        self._record(iteration, "base", 0, x, fc=float(true_vals[0, 1:].max()))
        return true_vals + self.noise.draw(iteration, SIDE_BASE, n, m1)

    def measure_perturbed(
        self, x: np.ndarray, directions: np.ndarray, radius: float, iteration: int
    ) -> np.ndarray:
        """Noisy values at x + radius * s_j for each direction; (n, m+1)."""
        x = np.asarray(x, dtype=float)
        directions = np.asarray(directions, dtype=float)
        if radius < 0.0:
            raise ContractViolationError("radius must be nonnegative")
        norms = np.linalg.norm(directions, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
            raise ContractViolationError("directions must be unit vectors")
        n, m1 = directions.shape[0], self.problem.num_constraints + 1
        self._charge(n * m1, directions=n)
        points = x[None, :] + radius * directions
        true_vals = self.problem.evaluate_all(points)  # (n, m+1)
        self._record_points(iteration, "perturbed", points, true_vals[:, 1:].max(axis=1))
        return true_vals + self.noise.draw(iteration, SIDE_PERTURBED, n, m1)

    def measure_batch(
        self, x: np.ndarray, directions: np.ndarray, radius: float, iteration: int
    ) -> MeasurementBatch:
        """Full batch: base and perturbed tables with independent noise."""
        base = self.measure_base(x, np.asarray(directions).shape[0], iteration)
        pert = self.measure_perturbed(x, directions, radius, iteration)
        return MeasurementBatch(
            iteration=iteration,
            base_point=np.array(x, dtype=float),
            directions=np.array(directions, dtype=float),
            radius=float(radius),
            base_values=base,
            perturbed_values=pert,
        )

    # -- audit ---------------------------------------------------------------

    def audit(self) -> SafetyAudit:
        """Complete audit so far, in canonical (iteration, tag, sample) order."""
        with self._lock:
            entries = sorted(
                self._entries,
                key=lambda e: (e.iteration, _TAG_ORDER[e.tag], e.sample_index),
            )
            return SafetyAudit(
                entries=entries,
                total_scalar_calls=self._scalar_calls,
                total_directions=self._directions,
            )


def write_audit_csv(audit: SafetyAudit, path) -> None:
    """Audit as CSV: k, tag, point components, true_fc, violated."""
    dim = audit.entries[0].point.shape[0] if audit.entries else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["k", "tag"] + [f"x{i}" for i in range(dim)] + ["true_fc", "violated"]
        )
        for e in audit.entries:
            writer.writerow(
                [e.iteration, e.tag]
                + [repr(float(v)) for v in e.point]
                + [repr(e.true_max_constraint), int(e.violated)]
            )
