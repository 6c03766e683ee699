"""Brute-force verifiers for the combinatorial identities behind the engine.

Two independent evaluation paths are provided for the distinct-label phase
sum attached to a partition: a literal enumeration over ordered tuples of
distinct grid labels, and the partition expansion with signed weights and
integer zero-sum indicators whose leading powers the engine relies on.
Their difference is a lower-order polynomial in the label count, which the
scan checks empirically.  A matrix-power trace estimator is included as an
eigenvalue-free route to the empirical moments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .constraints import difference_matrix
from .ensemble import (
    EnsembleConfig,
    gram_matrix,
    sample_positions,
    sampling_matrix,
    vertex_vector,
)
from .errors import BudgetError
from .partitions import Partition, enumerate_partitions_k, mobius_coefficient

DEFAULT_BLOCK_CAP = 4


@dataclass(frozen=True)
class PhaseSumInstance:
    """A partition with one integer offset vector per block.

    The block vectors must sum to zero, as every vector built from cyclic
    differences does; ``rho`` and ``d`` fix the label grid, so the label
    count is rho^d.  Diagnostic instances may disable the zero-sum check.
    """

    omega: Partition
    block_vectors: tuple[tuple[int, ...], ...]
    rho: int
    d: int
    enforce_zero_sum: bool = True

    def __post_init__(self) -> None:
        k = self.omega.k
        if len(self.block_vectors) != k:
            raise ValueError(f"need {k} block vectors, got {len(self.block_vectors)}")
        if any(len(vec) != self.d for vec in self.block_vectors):
            raise ValueError(f"block vectors must have length {self.d}")
        if self.rho < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.rho}")
        if self.enforce_zero_sum:
            totals = [sum(vec[m] for vec in self.block_vectors) for m in range(self.d)]
            if any(totals):
                raise ValueError(
                    f"block vectors must sum to zero componentwise, got {totals}"
                )

    @property
    def r(self) -> int:
        return self.rho**self.d


def instance_from_labels(
    omega: Partition, offsets: np.ndarray, rho: int
) -> PhaseSumInstance:
    """Build the per-block vectors from a p x d integer offset matrix."""
    offsets = np.asarray(offsets, dtype=np.int64)
    if offsets.ndim != 2 or offsets.shape[0] != omega.p:
        raise ValueError(f"offsets must be {omega.p} x d, got {offsets.shape}")
    forms = difference_matrix(omega)
    vectors = forms @ offsets
    return PhaseSumInstance(
        omega,
        tuple(tuple(int(v) for v in row) for row in vectors),
        rho,
        offsets.shape[1],
    )


def distinct_label_sum(
    instance: PhaseSumInstance,
    tuple_budget: int = 200_000,
    block_cap: int = DEFAULT_BLOCK_CAP,
) -> complex:
    """Exact phase sum over ordered tuples of distinct labels.

    Phase exponents are accumulated as integers modulo rho and combined
    with the roots of unity only at the end, so the enumeration itself is
    exact; the tuple space r!/(r-k)! is capped to keep it affordable.
    """
    k = instance.omega.k
    r = instance.r
    if r < k:
        return 0j
    if k > block_cap or math.perm(r, k) > tuple_budget:
        raise BudgetError(
            f"distinct-label enumeration with r={r}, k={k} needs "
            f"{math.perm(r, k)} tuples, over the budget {tuple_budget}"
        )
    # integer phase exponent per (label, block), reduced modulo rho
    table = np.empty((r, k), dtype=np.int64)
    for label in range(r):
        grid = vertex_vector(label, instance.rho, instance.d)
        for j, vec in enumerate(instance.block_vectors):
            table[label, j] = sum(g * v for g, v in zip(grid, vec)) % instance.rho
    residue_counts = np.zeros(instance.rho, dtype=np.int64)
    for tup in itertools.permutations(range(r), k):
        exponent = 0
        for j in range(k):
            exponent += table[tup[j], j]
        residue_counts[exponent % instance.rho] += 1
    phases = np.exp(-2j * np.pi * np.arange(instance.rho) / instance.rho)
    return complex(np.dot(residue_counts, phases))


def surviving_groupings(instance: PhaseSumInstance) -> list[Partition]:
    """Block groupings whose merged vectors all vanish exactly."""
    k = instance.omega.k
    vectors = np.array(instance.block_vectors, dtype=np.int64)
    out = []
    for h in range(1, k + 1):
        for grouping in enumerate_partitions_k(k, h):
            sums = [
                vectors[[i - 1 for i in sorted(block)]].sum(axis=0)
                for block in grouping.blocks
            ]
            if all(not s.any() for s in sums):
                out.append(grouping)
    return out


def partition_delta_sum(instance: PhaseSumInstance) -> int:
    """Leading-power partition expansion of the phase sum (an integer)."""
    r = instance.r
    total = 0
    for grouping in surviving_groupings(instance):
        total += r**grouping.k * mobius_coefficient(grouping)
    return total


@dataclass(frozen=True)
class ScanRow:
    r: int
    residual: float
    ratio: float  # residual / r^(h_max - 1)


def residual_scan(
    omega: Partition,
    block_vectors: tuple[tuple[int, ...], ...],
    r_list,
    d: int = 1,
) -> list[ScanRow]:
    """Compare both phase-sum paths along growing label counts.

    The difference must stay of one order below the leading surviving
    power: the scan reports residual / r^(h_max - 1) and checks that
    residual / r^h_max decays along the list.
    """
    rows: list[ScanRow] = []
    h_max = 0
    ratios_decay: list[float] = []
    for r in sorted(r_list):
        rho = round(r ** (1.0 / d))
        if rho**d != r:
            raise ValueError(f"label count {r} is not a perfect {d}-th power")
        instance = PhaseSumInstance(omega, block_vectors, rho, d)
        if not h_max:
            survivors = surviving_groupings(instance)
            h_max = max((g.k for g in survivors), default=0)
        lhs = distinct_label_sum(instance)
        rhs = partition_delta_sum(instance)
        residual = abs(lhs - rhs)
        denom = r ** max(h_max - 1, 0)
        rows.append(ScanRow(r, residual, residual / denom))
        ratios_decay.append(residual / r ** max(h_max, 1))
    if any(v > 1e-9 for v in ratios_decay):
        first, last = ratios_decay[0], ratios_decay[-1]
        if not last <= first * 1.0000001:
            raise AssertionError(
                f"residual does not decay one order below r^{h_max}: "
                f"{ratios_decay}"
            )
    return rows


def brute_trace_moment(
    config: EnsembleConfig, p: int, trials: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo moment by direct matrix powers, no eigensolver.

    Returns the mean and standard error over trials of trace(T^p)/n_rows;
    an independent path against the eigenvalue-based estimate.
    """
    if p < 1:
        raise ValueError(f"moment order must be >= 1, got {p}")
    if trials < 1:
        raise ValueError(f"trial count must be >= 1, got {trials}")
    if config.n_rows > 512:
        raise BudgetError(
            f"matrix-power oracle is capped at 512 rows, got {config.n_rows}"
        )
    values = []
    for trial in range(trials):
        positions = sample_positions(config, seed + trial)
        G = sampling_matrix(config, positions)
        T = gram_matrix(G, config.beta)
        power = np.linalg.matrix_power(T, p)
        values.append(float(np.trace(power).real) / config.n_rows)
    mean = float(np.mean(values))
    err = float(np.std(values, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return mean, err
