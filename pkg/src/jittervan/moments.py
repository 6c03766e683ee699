"""Asymptotic spectral moments of the jittered-grid ensemble.

The p-th moment is assembled as a double sum over a fine partition of the
p trace indices and a coarse partition of its blocks; each pair carries a
signed combinatorial weight, an aspect-ratio power and an integral factor
raised to the grid dimension.  The limiting moments for growing dimension
are the Narayana polynomials, i.e. the Marchenko-Pastur moments, which are
provided alongside for comparison.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .integrate import IntegralValue, QmcOptions, term_integral, term_seed
from .jitter import JitterDistribution
from .partitions import Partition, enumerate_partitions_k, mobius_coefficient

DEFAULT_MOMENT_CAP = 5

_cf_cache: dict[tuple, IntegralValue] = {}
_cf_cache_lock = threading.Lock()


@dataclass(frozen=True)
class MomentTerm:
    """One (fine, coarse) partition pair of the moment expansion."""

    k: int
    h: int
    omega: Partition
    omega_prime: Partition
    u: int
    v: IntegralValue
    contribution: float
    std_error: float

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "h": self.h,
            "omega": list(self.omega.omega),
            "omega_prime": list(self.omega_prime.omega),
            "u": self.u,
            "v": self.v.value,
            "v_err": self.v.std_error,
            "method": self.v.method,
            "contribution": self.contribution,
        }


@dataclass(frozen=True)
class MomentResult:
    """Value of one asymptotic moment with its full term breakdown."""

    p: int
    beta: float
    d: int
    jitter: str
    value: float
    std_error: float
    terms: tuple[MomentTerm, ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "beta": self.beta,
            "d": self.d,
            "jitter": self.jitter,
            "value": self.value,
            "std_error": self.std_error,
            "terms": [term.to_dict() for term in self.terms],
        }


def clear_term_cache() -> None:
    with _cf_cache_lock:
        _cf_cache.clear()


def _evaluate_pair(
    omega: Partition,
    omega_prime: Partition,
    beta: float,
    d: int,
    dist: JitterDistribution,
    opts: QmcOptions,
) -> IntegralValue:
    k, h = omega.k, omega_prime.k
    if k == 1 or h == k:
        # exact paths; the delta volumes keep their own cache
        return term_integral(omega, omega_prime, beta, d, dist, opts)
    key = (
        omega.omega,
        omega_prime.omega,
        repr(beta),
        d,
        dist.kind,
        opts.points,
        opts.replicates,
        opts.sampler,
        opts.seed,
    )
    with _cf_cache_lock:
        hit = _cf_cache.get(key)
    if hit is not None:
        return hit
    seeded = opts.with_seed(term_seed(omega, omega_prime, beta, d, dist.kind, opts.seed))
    value = term_integral(omega, omega_prime, beta, d, dist, seeded)
    with _cf_cache_lock:
        _cf_cache[key] = value
    return value


def moment(
    p: int,
    beta: float,
    d: int,
    dist: JitterDistribution,
    opts: QmcOptions | None = None,
    moment_cap: int = DEFAULT_MOMENT_CAP,
    threads: int = 1,
) -> MomentResult:
    """p-th asymptotic eigenvalue moment of the jittered-grid ensemble.

    Dispatches every partition pair to its integral regime, weights by the
    signed block coefficient and the aspect-ratio power, and propagates the
    quadrature errors linearly through the d-th power.  The first moment is
    exactly 1 by construction.
    """
    if not 1 <= p <= moment_cap:
        raise ValueError(f"moment order must satisfy 1 <= p <= {moment_cap}, got {p}")
    if not 0 < beta <= 1:
        raise ValueError(f"aspect ratio must be in (0, 1], got {beta}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    opts = opts or QmcOptions()

    pairs: list[tuple[Partition, Partition]] = []
    for k in range(1, p + 1):
        for omega in enumerate_partitions_k(p, k, order_cap=max(p, 7)):
            for h in range(1, k + 1):
                for omega_prime in enumerate_partitions_k(k, h):
                    pairs.append((omega, omega_prime))

    def build(pair: tuple[Partition, Partition]) -> MomentTerm:
        omega, omega_prime = pair
        k, h = omega.k, omega_prime.k
        u = mobius_coefficient(omega_prime)
        v = _evaluate_pair(omega, omega_prime, beta, d, dist, opts)
        weight = beta ** (p - h)
        contribution = weight * u * v.value**d
        err = weight * abs(u) * d * abs(v.value) ** (d - 1) * v.std_error
        return MomentTerm(k, h, omega, omega_prime, u, v, contribution, err)

    terms = ordered_map(build, pairs, threads)
    value = sum(term.contribution for term in terms)
    std_error = sum(term.std_error for term in terms)
    return MomentResult(p, beta, d, dist.kind, value, std_error, tuple(terms))


# ---------------------------------------------------------------------------
# Marchenko-Pastur limit
# ---------------------------------------------------------------------------


def narayana(p: int, k: int) -> int:
    """Narayana number: binom(p,k) * binom(p,k-1) / p, exact."""
    if p < 1 or not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p with p >= 1, got p={p}, k={k}")
    return math.comb(p, k) * math.comb(p, k - 1) // p


def mp_moment(p: int, beta: float) -> float:
    """p-th Marchenko-Pastur moment: the Narayana polynomial in beta."""
    if p < 1:
        raise ValueError(f"moment order must be >= 1, got {p}")
    if not 0 < beta <= 1:
        raise ValueError(f"aspect ratio must be in (0, 1], got {beta}")
    return float(sum(beta ** (p - k) * narayana(p, k) for k in range(1, p + 1)))


def mp_support(beta: float) -> tuple[float, float]:
    """Support edges ((1-sqrt(beta))^2, (1+sqrt(beta))^2)."""
    if not 0 < beta <= 1:
        raise ValueError(f"aspect ratio must be in (0, 1], got {beta}")
    root = math.sqrt(beta)
    return ((1 - root) ** 2, (1 + root) ** 2)


def mp_density(beta: float, z):
    """Marchenko-Pastur density at z (scalar or array); zero off support."""
    low, high = mp_support(beta)
    arr = np.asarray(z, dtype=float)
    inside = (arr >= low) & (arr <= high)
    out = np.zeros_like(arr)
    safe = np.where(inside, arr, 1.0)
    radicand = np.clip((high - safe) * (safe - low), 0.0, None)
    out = np.where(inside, np.sqrt(radicand) / (2 * np.pi * safe * beta), 0.0)
    if np.isscalar(z) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    d: int
    moment: MomentResult
    mp: float
    gap: float


def convergence_report(
    p: int,
    beta: float,
    d_list,
    dist: JitterDistribution,
    opts: QmcOptions | None = None,
    moment_cap: int = DEFAULT_MOMENT_CAP,
    threads: int = 1,
) -> list[ConvergenceRow]:
    """Moments against the Marchenko-Pastur limit along a dimension list."""
    limit = mp_moment(p, beta)
    rows = []
    for d in d_list:
        result = moment(p, beta, d, dist, opts, moment_cap, threads)
        rows.append(ConvergenceRow(d, result, limit, abs(result.value - limit)))
    return rows
