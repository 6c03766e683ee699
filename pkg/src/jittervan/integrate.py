"""Partition-pair integral factors of the moment expansion.

Every moment term carries a factor v attached to a partition pair: the
fine partition fixes the difference forms, the coarse one fixes which sums
of them are pinned to zero.  Three regimes are evaluated here.

* All forms pinned (coarse partition all singletons): the factor is the
  normalized volume of the zero set inside the centered unit cube.  It is
  computed exactly by counting integer points of the kernel lattice in
  growing boxes and extrapolating the leading coefficient of the counting
  polynomial, because the defining limit literally is that ratio and the
  counts are exact integers.
* No pinning (single coarse block): a plain randomized quasi Monte Carlo
  average of the characteristic-function product over the cube.
* Partial pinning: the pinned sums are eliminated exactly (rational
  solution map), and the integrand is averaged over the free coordinates
  with an indicator keeping the eliminated coordinates inside the cube,
  weighted by the elimination Jacobian.

A finite-grid evaluator of the same quantity at finite half-bandwidth M is
provided as an independent cross-check; it converges to the integral as M
grows.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from .constraints import (
    constraint_system,
    difference_matrix,
    integer_kernel_basis,
    merged_difference_rows,
)
from .errors import BudgetError, NumericalError, RealnessError
from .jitter import JitterDistribution
from .partitions import Partition

_BIG = np.iinfo(np.int64).max // 4


@dataclass(frozen=True)
class QmcOptions:
    """Tuning knobs for the stochastic and lattice evaluation paths."""

    points: int = 2**14
    replicates: int = 16
    seed: int = 0
    sampler: str = "sobol"  # "sobol" (scrambled) or "mc" for cross-checks
    realness_factor: float = 10.0
    lattice_sizes: tuple[int, ...] | None = None
    count_budget: int = 10**8

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ValueError("need at least 2 integration points")
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates for an error estimate")
        if self.sampler not in ("sobol", "mc"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    def with_seed(self, seed: int) -> "QmcOptions":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class IntegralValue:
    """One evaluated integral factor with its error bookkeeping.

    ``imag_residual`` records the magnitude of the imaginary part of the
    raw complex estimate before it was discarded; exact paths store the
    value additionally as a Fraction.
    """

    value: float
    std_error: float
    method: str
    imag_residual: float = 0.0
    exact: Fraction | None = None


def unity() -> IntegralValue:
    """The trivial factor for a single-block fine partition."""
    return IntegralValue(1.0, 0.0, "exact_unity")


def term_seed(
    partition: Partition,
    grouping: Partition,
    beta: float,
    d: int,
    kind: str,
    base_seed: int,
) -> int:
    """Stable per-term seed: a checksum of the canonical term key."""
    key = f"{partition}|{grouping}|{beta!r}|{d}|{kind}"
    return zlib.crc32(key.encode()) ^ (base_seed & 0xFFFFFFFF)


# ---------------------------------------------------------------------------
# exact lattice counting
# ---------------------------------------------------------------------------


def _independent_row_inverse(basis: list[list[int]]) -> list[list[Fraction]]:
    """Exact inverse of an invertible row subset of a full-column-rank matrix."""
    n_cols = len(basis[0])
    reduced: list[tuple[list[Fraction], int]] = []
    chosen: list[int] = []
    for idx, row in enumerate(basis):
        vec = [Fraction(v) for v in row]
        for other, _ in reduced:
            lead = next((t for t, v in enumerate(other) if v != 0), None)
            if lead is not None and vec[lead] != 0:
                factor = vec[lead] / other[lead]
                vec = [a - factor * b for a, b in zip(vec, other)]
        if any(v != 0 for v in vec):
            reduced.append((vec, idx))
            chosen.append(idx)
            if len(chosen) == n_cols:
                break
    if len(chosen) < n_cols:
        raise NumericalError("kernel basis is not of full column rank")
    square = [[Fraction(basis[r][c]) for c in range(n_cols)] for r in chosen]
    n = n_cols
    aug = [square[i] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        pivot = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        inv = Fraction(1) / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                factor = aug[r][c]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


def coordinate_bounds(basis: np.ndarray, box: int) -> list[int]:
    """Integer bounds b_t with |c_t| <= b_t whenever basis @ c stays in the box.

    Linear programming gives near-tight window sizes (the feasible region is
    symmetric about the origin, so one maximization per coordinate suffices);
    a unit safety margin keeps the window a guaranteed superset, and an exact
    rational fallback covers any solver hiccup.  Only the enumeration window
    depends on this; the counting itself filters exactly.
    """
    B = np.asarray(basis, dtype=float)
    p, n = B.shape
    rows = [[int(v) for v in row] for row in np.asarray(basis)]
    inverse = _independent_row_inverse(rows)
    fallback = [int(sum(abs(v) for v in row) * box) for row in inverse]
    a_ub = np.vstack([B, -B])
    b_ub = np.full(2 * p, float(box))
    bounds = []
    for t in range(n):
        cost = np.zeros(n)
        cost[t] = -1.0
        result = linprog(
            cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * n, method="highs"
        )
        if result.status == 0:
            bounds.append(min(int(np.floor(result.x[t] + 1e-6)) + 1, fallback[t]))
        else:
            bounds.append(fallback[t])
    return bounds


def count_box_solutions(basis: np.ndarray, box: int, budget: int = 10**8) -> int:
    """Exact number of integer c with every entry of basis @ c in [-box, box].

    Coordinates that never share a constraint row are independent, so the
    count factorizes over connected components of the interaction graph;
    each component is enumerated exactly.
    """
    B = np.asarray(basis, dtype=np.int64)
    p, n = B.shape
    if n == 0:
        return 1
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r in range(p):
        touched = np.flatnonzero(B[r])
        for t in touched[1:]:
            ra, rb = find(int(touched[0])), find(int(t))
            if ra != rb:
                parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for t in range(n):
        groups.setdefault(find(t), []).append(t)
    total = 1
    for cols in groups.values():
        keep = [r for r in range(p) if B[r, cols].any()]
        total *= _count_connected(B[np.ix_(keep, cols)], box, budget)
    return total


def _count_connected(B: np.ndarray, box: int, budget: int) -> int:
    """Exact count for one connected component: the last coordinate is
    counted by interval arithmetic, all earlier ones are enumerated as a
    flattened chunked grid; arithmetic stays in exact int64."""
    p, n = B.shape
    bounds = coordinate_bounds(B, box)
    if n == 1:
        lo, hi = -bounds[0], bounds[0]
        for r in range(p):
            b = int(B[r, 0])
            if b != 0:
                reach = box // abs(b)
                lo, hi = max(lo, -reach), min(hi, reach)
        return max(hi - lo + 1, 0)

    grid_nodes = 1
    for b in bounds[: n - 1]:
        grid_nodes *= 2 * b + 1
    if grid_nodes > budget:
        raise BudgetError(
            f"lattice count needs ~{grid_nodes:.2e} grid nodes, over the "
            f"budget {budget}"
        )

    shape = tuple(2 * b + 1 for b in bounds[: n - 1])
    offsets = np.array(bounds[: n - 1], dtype=np.int64)
    chunk = max(1, (4 << 20) // max(shape[-1], 1))
    total = 0
    for start in range(0, grid_nodes, chunk):
        stop = min(start + chunk, grid_nodes)
        flat = np.arange(start, stop, dtype=np.int64)
        prefix = np.stack(np.unravel_index(flat, shape), axis=1) - offsets
        partial = prefix @ B[:, : n - 1].T  # (points, p)
        lo = np.full(len(flat), -_BIG, dtype=np.int64)
        hi = np.full(len(flat), _BIG, dtype=np.int64)
        feasible = np.ones(len(flat), dtype=bool)
        for r in range(p):
            bv = int(B[r, n - 1])
            base = partial[:, r]
            if bv == 0:
                feasible &= np.abs(base) <= box
            else:
                upper = box - base
                lower = -box - base
                if bv > 0:
                    hi = np.minimum(hi, upper // bv)
                    lo = np.maximum(lo, -((-lower) // bv))
                else:
                    hi = np.minimum(hi, (-lower) // (-bv))
                    lo = np.maximum(lo, -(upper // (-bv)))
        counts = np.where(feasible, np.maximum(hi - lo + 1, 0), 0)
        total += int(counts.sum())
    return total


def _fit_exact_polynomial(
    xs: list[int], ys: list[int], degree: int
) -> tuple[list[Fraction], Fraction]:
    """Fit an exact-degree polynomial through the leading points.

    Returns (coefficients low-to-high, worst absolute residual on the
    remaining points).  All arithmetic is rational, so a zero residual
    certifies that the counts follow the polynomial exactly.
    """
    m = degree + 1
    if len(xs) < m + 1:
        raise ValueError("need at least degree+2 sample points for a residual check")
    aug = [
        [Fraction(xs[i]) ** j for j in range(m)] + [Fraction(ys[i])] for i in range(m)
    ]
    for c in range(m):
        pivot = next(r for r in range(c, m) if aug[r][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        inv = Fraction(1) / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for r in range(m):
            if r != c and aug[r][c] != 0:
                factor = aug[r][c]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[c])]
    coeffs = [aug[i][m] for i in range(m)]
    worst = Fraction(0)
    for i in range(m, len(xs)):
        predicted = sum(coeffs[j] * Fraction(xs[i]) ** j for j in range(m))
        worst = max(worst, abs(predicted - ys[i]))
    return coeffs, worst


@lru_cache(maxsize=None)
def _delta_volume_cached(
    omega: tuple[int, ...], sizes: tuple[int, ...], budget: int
) -> IntegralValue:
    partition = Partition(omega)
    p, k = partition.p, partition.k
    forms = difference_matrix(partition)
    basis = integer_kernel_basis(forms)
    degree = p - k + 1
    if basis.shape[1] != degree:
        raise NumericalError(
            f"kernel of the difference forms for {partition} has dimension "
            f"{basis.shape[1]}, expected {degree}"
        )
    counts = [count_box_solutions(basis, m, budget) for m in sizes]
    xs = [2 * m + 1 for m in sizes]
    coeffs, residual = _fit_exact_polynomial(xs, counts, degree)
    rel = residual / max(1, max(counts))
    if rel > Fraction(1, 10**9):
        raise NumericalError(
            f"lattice counts for {partition} are not a degree-{degree} "
            f"polynomial: sizes={sizes}, counts={counts}, residual={residual}"
        )
    leading = coeffs[degree]
    if not 0 < leading <= 1:
        raise NumericalError(
            f"leading counting coefficient {leading} for {partition} is outside (0, 1]"
        )
    return IntegralValue(
        value=float(leading),
        std_error=float(rel),
        method="lattice_extrapolation",
        imag_residual=0.0,
        exact=leading,
    )


def delta_volume(partition: Partition, opts: QmcOptions | None = None) -> IntegralValue:
    """Normalized volume of the fully pinned zero set, computed exactly.

    The count of kernel-lattice points in the box of half-width M is an
    exact polynomial in 2M+1 of degree p-k+1; the value is its leading
    coefficient.  One extra sample point guards the fit: a nonzero rational
    residual above 1e-9 relative raises a degeneracy error.
    """
    opts = opts or QmcOptions()
    p, k = partition.p, partition.k
    sizes = opts.lattice_sizes or tuple(8 * j for j in range(4, 4 + (p - k + 3)))
    if len(sizes) < (p - k + 1) + 2:
        raise ValueError(
            f"need at least {p - k + 3} lattice sizes for order {p}, "
            f"{k} blocks; got {len(sizes)}"
        )
    return _delta_volume_cached(partition.omega, tuple(sizes), opts.count_budget)


# ---------------------------------------------------------------------------
# randomized QMC for the characteristic-function regimes
# ---------------------------------------------------------------------------


def cf_integral(
    partition: Partition,
    grouping: Partition,
    beta: float,
    d: int,
    dist: JitterDistribution,
    opts: QmcOptions | None = None,
) -> IntegralValue:
    """Characteristic-function integral for a partially pinned pair.

    For a single coarse block nothing is pinned and the average runs over
    the whole cube; otherwise the pinned sums are eliminated exactly first.
    The estimate and its standard error come from independent scrambled
    replicates; the imaginary part must stay within the realness tolerance
    and is then discarded.
    """
    opts = opts or QmcOptions()
    p, k = partition.p, partition.k
    if grouping.p != k:
        raise ValueError(f"grouping must partition {{1,...,{k}}}")
    h = grouping.k
    if k == 1:
        raise ValueError("single-block fine partition is the exact-unity case")
    if h >= k:
        raise ValueError("fully pinned pairs are handled by delta_volume")
    if not 0 < beta <= 1:
        raise ValueError(f"aspect ratio must be in (0, 1], got {beta}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")

    system = constraint_system(partition, grouping)
    free_cols = list(system.free_columns)
    pivot_cols = list(system.pivot_columns)
    solution = system.solution_array()
    jacobian = float(system.jacobian_factor)
    forms = difference_matrix(partition).astype(float)
    scale = beta ** (1.0 / d)
    n_free = len(free_cols)

    estimates = np.empty(opts.replicates, dtype=complex)
    for rep in range(opts.replicates):
        rng = np.random.default_rng([opts.seed & 0xFFFFFFFF, rep])
        if opts.sampler == "sobol":
            points = qmc.Sobol(d=n_free, scramble=True, seed=rng).random(opts.points)
        else:
            points = rng.random((opts.points, n_free))
        y_free = points - 0.5
        y = np.empty((opts.points, p))
        y[:, free_cols] = y_free
        if system.rank:
            y_pivot = y_free @ solution.T
            y[:, pivot_cols] = y_pivot
            inside = np.all(np.abs(y_pivot) <= 0.5, axis=1)
        else:
            inside = None
        values = np.prod(dist.cf(scale * (y @ forms.T)), axis=1)
        if inside is not None:
            values = np.where(inside, values, 0.0)
        estimates[rep] = jacobian * values.mean()

    real = estimates.real
    value = float(real.mean())
    std_error = float(real.std(ddof=1) / np.sqrt(opts.replicates))
    imag_residual = float(abs(estimates.imag.mean()))
    if imag_residual > opts.realness_factor * max(std_error, 1e-9):
        raise RealnessError(
            f"imaginary residual {imag_residual:.3e} exceeds the tolerance for "
            f"pair ({partition}, {grouping}) with jitter {dist.kind}; the "
            "integrand is not real enough to discard its imaginary part"
        )
    method = "plain_qmc" if h == 1 else "qmc_constrained"
    return IntegralValue(value, std_error, method, imag_residual)


def term_integral(
    partition: Partition,
    grouping: Partition,
    beta: float,
    d: int,
    dist: JitterDistribution,
    opts: QmcOptions | None = None,
) -> IntegralValue:
    """Dispatch a partition pair to its evaluation regime."""
    if grouping.p != partition.k:
        raise ValueError(f"grouping must partition {{1,...,{partition.k}}}")
    if partition.k == 1:
        return unity()
    if grouping.k == partition.k:
        return delta_volume(partition, opts)
    return cf_integral(partition, grouping, beta, d, dist, opts)


# ---------------------------------------------------------------------------
# finite-grid cross-check
# ---------------------------------------------------------------------------


def _chunked_lattice_points(basis: np.ndarray, bounds: list[int], box: int):
    """Yield integer points of the kernel lattice inside the box, in chunks."""
    n = basis.shape[1]
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    inner_sizes = [len(r) for r in ranges[1:]]
    inner_total = int(np.prod(inner_sizes)) if inner_sizes else 1
    if n == 1:
        grid = ranges[0].reshape(-1, 1)
        points = grid @ basis.T.astype(np.int64)
        keep = np.all(np.abs(points) <= box, axis=1)
        yield grid[keep], points[keep]
        return
    mesh = np.meshgrid(*ranges[1:], indexing="ij")
    inner = np.stack([m.reshape(-1) for m in mesh], axis=1)
    for head in ranges[0]:
        chunk = np.empty((inner_total, n), dtype=np.int64)
        chunk[:, 0] = head
        chunk[:, 1:] = inner
        points = chunk @ basis.T.astype(np.int64)
        keep = np.all(np.abs(points) <= box, axis=1)
        if keep.any():
            yield chunk[keep], points[keep]


def finite_grid_term(
    partition: Partition,
    grouping: Partition,
    box: int,
    beta: float,
    d: int,
    dist: JitterDistribution,
    budget: int = 10**8,
) -> float:
    """Exact finite half-bandwidth evaluation of an integral factor.

    Sums the characteristic-function product over integer label offsets in
    [-box, box]^p satisfying the pinned-sum constraints, normalized by
    (2*box+1)^(p-h+1); deterministic, and converges to the corresponding
    integral as the box grows.
    """
    if box < 1:
        raise ValueError(f"half-bandwidth must be >= 1, got {box}")
    if grouping.p != partition.k:
        raise ValueError(f"grouping must partition {{1,...,{partition.k}}}")
    if not 0 < beta <= 1:
        raise ValueError(f"aspect ratio must be in (0, 1], got {beta}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    p, h = partition.p, grouping.k
    pinned = merged_difference_rows(partition, grouping)
    basis = integer_kernel_basis(pinned)
    if basis.shape[1] == 0:
        return 0.0 if p - h + 1 > 0 else 1.0
    bounds = coordinate_bounds(basis, box)
    nodes = int(np.prod([2 * b + 1 for b in bounds], dtype=object))
    if nodes > budget:
        raise BudgetError(
            f"finite-grid enumeration needs {nodes:.2e} nodes, over the "
            f"budget {budget}"
        )
    forms = difference_matrix(partition)
    scale = beta ** (1.0 / d) / (2 * box + 1)
    total = 0.0 + 0.0j
    for _, points in _chunked_lattice_points(basis, bounds, box):
        w = points @ forms.T
        total += np.prod(dist.cf(scale * w), axis=1).sum()
    return float(total.real / (2 * box + 1) ** (p - h + 1))
