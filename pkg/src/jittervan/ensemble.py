"""Finite realizations of the jittered-grid ensemble and their spectra.

A configuration fixes the grid dimension d, the half-bandwidth M per
dimension and the vertex count rho per dimension; the sampling matrix has
one row per frequency vector in [-M, M]^d and one unit-norm column per
grid cell, each cell holding a single position jittered around its center.
The scaled Gram matrix has unit diagonal by construction, so its spectrum
averages to one in every realization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .errors import BudgetError, NumericalError
from .jitter import JitterDistribution

#: Refuse matrix builds larger than this many complex entries.
DEFAULT_CELL_BUDGET = 1 << 23

#: Eigenvalues of the positive semidefinite Gram matrix may round below
#: zero by at most this much; anything lower is a solver failure.
EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class EnsembleConfig:
    """Shape and jitter law of one random-matrix ensemble."""

    d: int
    M: int
    rho: int
    dist: JitterDistribution
    cell_budget: int = DEFAULT_CELL_BUDGET

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.M < 1:
            raise ValueError(f"half-bandwidth must be >= 1, got {self.M}")
        if 2 * self.M + 1 > self.rho:
            raise ValueError(
                f"need 2M+1 <= rho so the aspect ratio stays in (0, 1]; "
                f"got M={self.M}, rho={self.rho}"
            )

    @property
    def n_rows(self) -> int:
        return (2 * self.M + 1) ** self.d

    @property
    def n_cols(self) -> int:
        return self.rho**self.d

    @property
    def beta(self) -> float:
        return ((2 * self.M + 1) / self.rho) ** self.d


def freq_index(l_vec, M: int) -> int:
    """Scalar index of a frequency vector with components in [-M, M]."""
    value = 0
    width = 2 * M + 1
    for m, comp in enumerate(l_vec):
        if not -M <= comp <= M:
            raise ValueError(f"frequency component {comp} outside [-{M}, {M}]")
        value += width**m * int(comp)
    return value


def storage_row(l_vec, M: int, d: int) -> int:
    """0-based row of a frequency vector (index shifted by the mid offset)."""
    if len(l_vec) != d:
        raise ValueError(f"expected {d} components, got {len(l_vec)}")
    return freq_index(l_vec, M) + ((2 * M + 1) ** d - 1) // 2


def vertex_index(q_vec, rho: int) -> int:
    """Scalar index of a grid vertex with components in [0, rho-1]."""
    value = 0
    for m, comp in enumerate(q_vec):
        if not 0 <= comp < rho:
            raise ValueError(f"vertex component {comp} outside [0, {rho})")
        value += rho**m * int(comp)
    return value


def vertex_vector(index: int, rho: int, d: int) -> tuple[int, ...]:
    """Inverse of vertex_index."""
    if not 0 <= index < rho**d:
        raise ValueError(f"vertex index {index} outside [0, {rho ** d})")
    out = []
    for _ in range(d):
        out.append(index % rho)
        index //= rho
    return tuple(out)


def frequency_vectors(M: int, d: int) -> np.ndarray:
    """All frequency vectors in storage-row order, shape (2M+1)^d x d."""
    width = 2 * M + 1
    axis = np.arange(-M, M + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    # component m advances with stride width^m, so axis m is the m-th mesh axis
    stacked = np.stack([g.reshape(-1, order="F") for g in grids], axis=1)
    return stacked


def vertex_vectors(rho: int, d: int) -> np.ndarray:
    """All vertex vectors in vertex-index order, shape rho^d x d."""
    axis = np.arange(rho)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.reshape(-1, order="F") for g in grids], axis=1)


def sample_positions(config: EnsembleConfig, seed) -> np.ndarray:
    """One jittered position per cell, shape n_cols x d, entries in [0, 1)."""
    rng = np.random.default_rng(seed)
    vertices = vertex_vectors(config.rho, config.d)
    jitter = config.dist.draw(rng, vertices.shape)
    return (vertices + jitter) / config.rho


def sampling_matrix(config: EnsembleConfig, positions: np.ndarray) -> np.ndarray:
    """Complex-exponential sampling matrix, n_rows x n_cols, unit columns."""
    if positions.shape != (config.n_cols, config.d):
        raise ValueError(
            f"positions must have shape {(config.n_cols, config.d)}, "
            f"got {positions.shape}"
        )
    if config.n_rows * config.n_cols > config.cell_budget:
        raise BudgetError(
            f"matrix of {config.n_rows} x {config.n_cols} entries exceeds "
            f"the cell budget {config.cell_budget}"
        )
    freq = frequency_vectors(config.M, config.d)
    phases = freq @ positions.T
    return np.exp(-2j * np.pi * phases) / np.sqrt(config.n_rows)


def gram_matrix(G: np.ndarray, beta: float) -> np.ndarray:
    """Scaled Gram matrix beta * G G^H (Hermitian, unit diagonal)."""
    return beta * (G @ G.conj().T)


def spectrum(T: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, clamped at zero.

    Eigenvalues below the roundoff floor raise; tiny negatives are clipped
    to zero so downstream averages stay on [0, inf).
    """
    try:
        eigs = np.linalg.eigvalsh(T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    if eigs.min() < EIG_FLOOR:
        raise NumericalError(
            f"eigenvalue {eigs.min():.3e} below the PSD roundoff floor {EIG_FLOOR}"
        )
    return np.clip(eigs, 0.0, None)


@dataclass(frozen=True)
class SpectrumSample:
    """Eigenvalues of one or more realizations (trials x n_rows)."""

    eigenvalues: np.ndarray
    config: EnsembleConfig
    seed: int

    @property
    def trials(self) -> int:
        return self.eigenvalues.shape[0]


def simulate(
    config: EnsembleConfig, trials: int, seed: int, threads: int = 1
) -> SpectrumSample:
    """Draw positions, build the Gram matrix and solve, trial by trial.

    Trial t uses seed ``seed + t`` so runs are reproducible and trials can
    be distributed across workers without sharing generator state.
    """
    if trials < 1:
        raise ValueError(f"trial count must be >= 1, got {trials}")

    def one(trial: int) -> np.ndarray:
        positions = sample_positions(config, seed + trial)
        G = sampling_matrix(config, positions)
        return spectrum(gram_matrix(G, config.beta))

    eigs = np.stack(ordered_map(one, range(trials), threads))
    return SpectrumSample(eigs, config, seed)


def empirical_moment(sample: SpectrumSample, p: int) -> float:
    """Average over trials of the p-th power mean of the spectrum."""
    if p < 1:
        raise ValueError(f"moment order must be >= 1, got {p}")
    return float(np.mean(sample.eigenvalues**p))


def empirical_moment_std_error(sample: SpectrumSample, p: int) -> float:
    """Standard error over trials of the per-trial p-th moment."""
    per_trial = np.mean(sample.eigenvalues**p, axis=1)
    if len(per_trial) < 2:
        return 0.0
    return float(per_trial.std(ddof=1) / np.sqrt(len(per_trial)))


def histogram(sample: SpectrumSample, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Pooled eigenvalue histogram normalized to unit mass; (edges, density)."""
    if bins < 1:
        raise ValueError(f"bin count must be >= 1, got {bins}")
    density, edges = np.histogram(sample.eigenvalues.ravel(), bins=bins, density=True)
    return edges, density


def write_histogram_csv(path, edges: np.ndarray, density: np.ndarray) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_left", "bin_right", "density"])
        for left, right, value in zip(edges[:-1], edges[1:], density):
            writer.writerow([repr(float(left)), repr(float(right)), repr(float(value))])


def write_eigenvalue_csv(path, sample: SpectrumSample) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["trial", "eigenvalue"])
        for trial in range(sample.trials):
            for value in sample.eigenvalues[trial]:
                writer.writerow([trial, repr(float(value))])


def resolve_shape(
    beta_target: float, d: int, size_budget: int
) -> tuple[int, int, float]:
    """Pick (M, rho) for a target aspect ratio under a row-count budget.

    The half-bandwidth is pushed to the budget first, then the vertex count
    minimizes the aspect-ratio error (ties broken toward fewer vertices);
    the achieved ratio is returned and is what Monte-Carlo comparisons
    should be run against.
    """
    if not 0 < beta_target <= 1:
        raise ValueError(f"target aspect ratio must be in (0, 1], got {beta_target}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    M = 1
    while (2 * (M + 1) + 1) ** d <= size_budget:
        M += 1
    if (2 * M + 1) ** d > size_budget:
        raise ValueError(
            f"size budget {size_budget} cannot fit the minimal grid at d={d}"
        )
    width = 2 * M + 1
    best: tuple[float, int] | None = None
    # the error is unimodal in rho, but the range is small enough to scan
    rho_hi = max(width, int(np.ceil(width / beta_target ** (1.0 / d))) + 2)
    for rho in range(width, rho_hi + 1):
        achieved = (width / rho) ** d
        err = abs(achieved - beta_target)
        if best is None or err < best[0] - 1e-15:
            best = (err, rho)
    assert best is not None
    rho = best[1]
    return M, rho, (width / rho) ** d
