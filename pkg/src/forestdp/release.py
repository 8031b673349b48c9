"""Node-private releases of the spanning-forest size and the component count.

``private_sf`` spends half its budget choosing Delta with GEM over the
``f_Delta`` family and half on Laplace noise of scale ``Delta/eps_lap``.
``private_cc`` additionally releases the vertex count and subtracts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .graph import Graph, spanning_forest_size
from .mechanisms import ExtensionFamily, PrivacyBudget, gem_select, laplace_sample
from .polytope import eval_lipschitz_extension
from .rng import make_stream

CC_COUNT_FRACTION = 0.1


@dataclass(frozen=True)
class ReleaseReport:
    statistic: str
    chosen_delta: float
    noise_scale: float
    noisy_value: float
    budget_split: tuple[float, float, float]
    epsilon: float
    beta: float
    seed: int | None
    node_count_noisy: float | None = None
    degenerate_input: bool = False
    # pre-noise extension value; not private, kept only for debugging and tests
    raw_extension_value: float | None = None

    def to_dict(self, debug_insecure: bool = False) -> dict:
        out = asdict(self)
        out["budget_split"] = {
            "epsilon_gem": self.budget_split[0],
            "epsilon_laplace": self.budget_split[1],
            "epsilon_count": self.budget_split[2],
        }
        if not debug_insecure:
            del out["raw_extension_value"]
        return out

    def to_json(self, debug_insecure: bool = False) -> str:
        return json.dumps(self.to_dict(debug_insecure), indent=2, sort_keys=True)


def default_beta(n: int) -> float:
    """``1 / ln ln max(n, 16)``, capped at 1/2."""
    return min(1.0 / math.log(math.log(max(n, 16))), 0.5)


@lru_cache(maxsize=4096)
def _f_delta(g: Graph, delta: float) -> float:
    return eval_lipschitz_extension(g, delta).value


def forest_extension_family(g: Graph) -> ExtensionFamily:
    """The ``f_Delta`` family for ``f_sf`` with ``Delta_max = n``, memoized per ``(G, Delta)``."""
    return ExtensionFamily(_f_delta, float(g.n), lambda h: float(spanning_forest_size(h)))


def _streams(rng: np.random.Generator | int | None) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    seed = 0 if rng is None else int(rng)
    return make_stream(seed), seed


def _split_sf(epsilon: float) -> tuple[float, float]:
    gem = epsilon / 2
    return gem, epsilon - gem


def _sf_release(
    g: Graph, epsilon: float, beta: float, rng: np.random.Generator, family: ExtensionFamily | None
) -> tuple[float, float, float, float, bool]:
    """Returns (chosen delta, raw value, noise scale, noisy value, degenerate)."""
    eps_gem, eps_lap = _split_sf(epsilon)
    gem_rng, lap_rng = rng.spawn(2)
    if g.n == 0:
        # the only neighbour is a single vertex, for which GEM is forced to 1
        delta, raw, degenerate = 1, 0.0, True
    else:
        family = family or forest_extension_family(g)
        sel = gem_select(g, family, PrivacyBudget(eps_gem, beta), gem_rng)
        delta = sel.chosen_index
        raw = sel.h_values[sel.grid.index(delta)]
        degenerate = False
    scale = delta / eps_lap
    return float(delta), raw, scale, raw + laplace_sample(scale, lap_rng), degenerate


def private_sf(
    g: Graph,
    budget: PrivacyBudget,
    rng: np.random.Generator | int | None = None,
    *,
    family: ExtensionFamily | None = None,
) -> ReleaseReport:
    """Release ``f_sf(G)``: GEM with ``eps/2`` picks Delta, then ``f_Delta(G) + Lap(2 Delta/eps)``."""
    stream, seed = _streams(rng)
    delta, raw, scale, noisy, degenerate = _sf_release(g, budget.epsilon, budget.beta, stream, family)
    eps_gem, eps_lap = _split_sf(budget.epsilon)
    return ReleaseReport(
        statistic="sf",
        chosen_delta=delta,
        noise_scale=scale,
        noisy_value=noisy,
        budget_split=(eps_gem, eps_lap, 0.0),
        epsilon=budget.epsilon,
        beta=budget.beta,
        seed=seed,
        degenerate_input=degenerate,
        raw_extension_value=raw,
    )


def private_cc(
    g: Graph,
    budget: PrivacyBudget,
    rng: np.random.Generator | int | None = None,
    *,
    count_fraction: float = CC_COUNT_FRACTION,
    family: ExtensionFamily | None = None,
) -> ReleaseReport:
    """Release ``f_cc(G) = n - f_sf(G)`` as ``(n + Lap(1/eps_count)) - (private f_sf)``."""
    if not 0 < count_fraction < 1:
        raise ValueError("count_fraction must lie in (0, 1)")
    stream, seed = _streams(rng)
    count_rng, sf_rng = stream.spawn(2)
    eps = budget.epsilon
    # the smaller share is computed by subtraction from the larger, which is
    # exact for a share >= eps/2, so the parts add back to eps exactly
    if count_fraction <= 0.5:
        eps_sf = eps * (1 - count_fraction)
        eps_count = eps - eps_sf
    else:
        eps_count = eps * count_fraction
        eps_sf = eps - eps_count
    n_noisy = g.n + laplace_sample(1.0 / eps_count, count_rng)
    delta, raw, scale, sf_noisy, degenerate = _sf_release(g, eps_sf, budget.beta, sf_rng, family)
    eps_gem, eps_lap = _split_sf(eps_sf)
    return ReleaseReport(
        statistic="cc",
        chosen_delta=delta,
        noise_scale=scale,
        noisy_value=n_noisy - sf_noisy,
        budget_split=(eps_gem, eps_lap, eps_count),
        epsilon=eps,
        beta=budget.beta,
        seed=seed,
        node_count_noisy=n_noisy,
        degenerate_input=degenerate,
        raw_extension_value=raw,
    )
