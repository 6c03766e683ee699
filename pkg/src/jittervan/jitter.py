"""Within-cell jitter distributions on [0,1) with mean exactly 1/2.

Each distribution carries both a seeded sampler (for Monte Carlo paths) and
a closed-form characteristic function evaluated on the imaginary axis,

    cf(t) = E[exp(-2*pi*i * t * x)],

which is what the analytic moment engine consumes.  Only mean-1/2 laws are
admitted: the half-cell offset is what keeps the sample averages on the
grid vertices, and the engine factors that offset out exactly.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class JitterDistribution:
    """A jitter law given by a sampler plus characteristic function.

    Instances are immutable; samplers take explicit seeds (or generators)
    so parallel trials can use disjoint streams.
    """

    def __init__(
        self,
        kind: str,
        cf: Callable[[np.ndarray], np.ndarray],
        draw: Callable[[np.random.Generator, tuple], np.ndarray],
        symmetric_about_half: bool,
        mean: float = 0.5,
    ) -> None:
        if abs(mean - 0.5) > 0.0:
            raise ValueError(
                f"jitter mean must equal 1/2 exactly, got {mean}: the grid "
                "offset is factored out under that assumption"
            )
        self.kind = kind
        self.symmetric_about_half = bool(symmetric_about_half)
        self.mean = 0.5
        self._cf = cf
        self._draw = draw
        at_zero = complex(np.asarray(cf(np.array(0.0))).item())
        if abs(at_zero - 1.0) > 1e-12:
            raise ValueError(f"characteristic function must be 1 at t=0, got {at_zero}")

    def cf(self, t) -> np.ndarray:
        """Characteristic value E[exp(-2*pi*i*t*x)] for scalar or array t."""
        return self._cf(np.asarray(t, dtype=float))

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Draw i.i.d. variates into ``shape`` using an existing generator."""
        return self._draw(rng, shape)

    def sample(self, n: int, seed) -> np.ndarray:
        """Draw n i.i.d. variates; deterministic for a fixed seed."""
        if n < 1:
            raise ValueError(f"sample count must be >= 1, got {n}")
        return self._draw(np.random.default_rng(seed), (n,))

    def __repr__(self) -> str:
        return f"JitterDistribution(kind={self.kind!r})"


def _uniform_cf(t: np.ndarray) -> np.ndarray:
    # E[e^{-2 pi i t U}] over U ~ [0,1): phase times sin(pi t)/(pi t)
    return np.exp(-1j * np.pi * t) * np.sinc(t)


def _triangular_cf(t: np.ndarray) -> np.ndarray:
    # sum of two independent uniforms on [0,1/2): squared half-width factor
    return (np.exp(-0.5j * np.pi * t) * np.sinc(0.5 * t)) ** 2


def uniform01() -> JitterDistribution:
    """Jitter uniform on the whole cell [0,1)."""
    return JitterDistribution(
        "uniform01",
        _uniform_cf,
        lambda rng, shape: rng.random(shape),
        symmetric_about_half=True,
    )


def point_mass_half() -> JitterDistribution:
    """Deterministic half-cell jitter; realizes exact equal spacing."""
    return JitterDistribution(
        "point_mass_half",
        lambda t: np.exp(-1j * np.pi * t),
        lambda rng, shape: np.full(shape, 0.5),
        symmetric_about_half=True,
    )


def triangular01() -> JitterDistribution:
    """Triangular jitter on [0,1): sum of two uniforms on [0,1/2)."""
    return JitterDistribution(
        "triangular01",
        _triangular_cf,
        lambda rng, shape: rng.uniform(0.0, 0.5, shape) + rng.uniform(0.0, 0.5, shape),
        symmetric_about_half=True,
    )


#: CLI spellings of the built-in jitter kinds.
JITTER_NAMES = {
    "uniform": uniform01,
    "point": point_mass_half,
    "triangular": triangular01,
}


def from_name(name: str) -> JitterDistribution:
    """Resolve a CLI jitter name ("uniform", "point", "triangular")."""
    try:
        return JITTER_NAMES[name]()
    except KeyError:
        raise ValueError(
            f"unknown jitter {name!r}; choose from {sorted(JITTER_NAMES)}"
        ) from None
