"""Laplace noise, the exponential mechanism, and GEM threshold selection.

GEM picks a Lipschitz parameter from the grid ``{1, 2, 4, ..., 2^k}`` by
running the exponential mechanism on scores ``s_i`` of sensitivity 1. The
mechanism here minimizes: index ``i`` is drawn with probability proportional to
``exp(-eps * s_i / (2 * sensitivity))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError
from .graph import Graph


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    beta: float = 0.1

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ParameterError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not 0 < self.beta < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")


@dataclass(frozen=True)
class ExtensionFamily:
    """A family ``h_Delta`` of monotone-in-Delta Lipschitz underestimates of ``base_fn``.

    The family properties are not checked here; the test suite asserts them.
    """

    evaluator: Callable[[Graph, float], float]
    delta_max: float
    base_fn: Callable[[Graph], float]


@dataclass(frozen=True)
class GemSelection:
    chosen_index: int
    grid: tuple[int, ...]
    q_values: tuple[float, ...]
    s_values: tuple[float, ...]
    h_values: tuple[float, ...] = field(repr=False)
    t: float
    k: int


# -- Laplace -----------------------------------------------------------------


def laplace_from_uniform(u, scale: float):
    """Inverse CDF of ``Lap(scale)`` at ``u`` in ``(-1/2, 1/2)``."""
    u = np.asarray(u, dtype=float)
    out = scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    return float(out) if out.ndim == 0 else out


def laplace_sample(scale: float, rng: np.random.Generator, size: int | None = None):
    """Draw from ``Lap(scale)``, density ``exp(-|z|/b) / (2b)``."""
    if not (scale > 0 and math.isfinite(scale)):
        raise ParameterError(f"Laplace scale must be positive and finite, got {scale}")
    u = rng.random(size) - 0.5
    # u = -1/2 would map to -inf; redraw those (probability 2^-53 each)
    if size is None:
        while u == -0.5:
            u = rng.random() - 0.5
    else:
        bad = u == -0.5
        while bad.any():
            u[bad] = rng.random(int(bad.sum())) - 0.5
            bad = u == -0.5
    return laplace_from_uniform(u, scale)


def laplace_mechanism(value: float, sensitivity: float, epsilon: float, rng: np.random.Generator) -> float:
    if not sensitivity > 0:
        raise ParameterError("sensitivity must be positive")
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    return value + laplace_sample(sensitivity / epsilon, rng)


# -- exponential mechanism ---------------------------------------------------


def em_log_weights(scores: Sequence[float], sensitivity: float, epsilon: float) -> np.ndarray:
    """Unnormalized log-probabilities of the minimizing exponential mechanism."""
    s = np.asarray(scores, dtype=float)
    return -epsilon * s / (2.0 * sensitivity)


def em_probabilities(scores: Sequence[float], sensitivity: float, epsilon: float) -> np.ndarray:
    w = em_log_weights(scores, sensitivity, epsilon)
    w = np.exp(w - w.max())
    return w / w.sum()


def exponential_mechanism(
    scores: Sequence[float], sensitivity: float, epsilon: float, rng: np.random.Generator
) -> int:
    """Index ``i`` with probability proportional to ``exp(-eps * s_i / (2 * sensitivity))``.

    Sampled as the argmax of log-weight plus Gumbel noise, so huge score gaps
    never overflow.
    """
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ParameterError("exponential mechanism needs at least one index")
    if not np.all(np.isfinite(s)):
        raise ParameterError("scores must be finite")
    if not sensitivity > 0:
        raise ParameterError("sensitivity must be positive")
    if not epsilon >= 0:
        raise ParameterError("epsilon must be non-negative")
    return int(np.argmax(em_log_weights(s, sensitivity, epsilon) + rng.gumbel(size=s.size)))


# -- GEM ---------------------------------------------------------------------


def grid_exponent(delta_max: float) -> int:
    """``floor(log2(delta_max))`` computed without float rounding surprises."""
    if not delta_max >= 1:
        raise ParameterError(f"delta_max must be >= 1, got {delta_max}")
    k = int(math.floor(delta_max)).bit_length() - 1
    return k


def gem_scores(h_values: Sequence[float], grid: Sequence[int], epsilon: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``q_i = -h_i + i/eps`` and ``s_i = max_j ((q_i + t i) - (q_j + t j)) / (i + j)``."""
    i = np.asarray(grid, dtype=float)
    q = -np.asarray(h_values, dtype=float) + i / epsilon
    shifted = q + t * i
    s = ((shifted[:, None] - shifted[None, :]) / (i[:, None] + i[None, :])).max(axis=1)
    return q, s


def gem_select(
    g: Graph, family: ExtensionFamily, budget: PrivacyBudget, rng: np.random.Generator
) -> GemSelection:
    """Pick a grid value of Delta privately with the exponential mechanism.

    With ``k = 0`` there is a single candidate and no randomness is used.
    """
    k = grid_exponent(family.delta_max)
    grid = tuple(1 << j for j in range(k + 1))
    eps = budget.epsilon
    t = 2.0 * math.log(max(k, 1) / budget.beta) / eps
    h = tuple(float(family.evaluator(g, d)) for d in grid)
    q, s = gem_scores(h, grid, eps, t)
    idx = 0 if k == 0 else exponential_mechanism(s, 1.0, eps, rng)
    return GemSelection(grid[idx], grid, tuple(q.tolist()), tuple(s.tolist()), h, t, k)


def err_score(family: ExtensionFamily, g: Graph, delta: float, epsilon: float) -> float:
    """``|h_Delta(G) - h(G)| + Delta/eps``."""
    return abs(family.evaluator(g, delta) - family.base_fn(g)) + delta / epsilon
