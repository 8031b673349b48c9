import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from conftest import complete, graphs, path, star
from forestdp.errors import ParameterError
from forestdp.graph import Graph, gen_gnp, induced_subgraph, spanning_forest_size
from forestdp.mechanisms import (
    ExtensionFamily,
    PrivacyBudget,
    em_probabilities,
    err_score,
    exponential_mechanism,
    gem_scores,
    gem_select,
    grid_exponent,
    laplace_from_uniform,
    laplace_mechanism,
    laplace_sample,
)
from forestdp.polytope import eval_lipschitz_extension
from forestdp.rng import make_stream


def f_delta(g, d):
    return eval_lipschitz_extension(g, d).value


def sf_family(delta_max):
    return ExtensionFamily(f_delta, delta_max, lambda g: float(spanning_forest_size(g)))


def test_budget_validation():
    with pytest.raises(ParameterError):
        PrivacyBudget(0.0)
    with pytest.raises(ParameterError):
        PrivacyBudget(1.0, 1.0)
    with pytest.raises(ParameterError):
        PrivacyBudget(float("inf"))


def test_laplace_moments():
    x = laplace_sample(1.0, make_stream(1), size=1_000_000)
    assert np.mean(np.abs(x)) == pytest.approx(1.0, abs=0.01)
    assert np.mean(np.abs(x) >= 2.0) == pytest.approx(math.exp(-2), abs=0.005)
    assert abs(np.mean(x)) < 0.01


def test_laplace_inverse_cdf():
    assert laplace_from_uniform(0.0, 3.0) == 0.0
    u = np.array([-0.25, 0.25])
    assert laplace_from_uniform(u, 1.0) == pytest.approx([math.log(2), -math.log(2)])
    with pytest.raises(ParameterError):
        laplace_sample(0.0, make_stream(0))


def test_laplace_deterministic_given_stream():
    a = laplace_sample(2.0, make_stream(5), size=10)
    b = laplace_sample(2.0, make_stream(5), size=10)
    assert np.array_equal(a, b)
    assert isinstance(laplace_sample(2.0, make_stream(5)), float)


def test_laplace_mechanism():
    rng = make_stream(2)
    hits = sum(abs(laplace_mechanism(5.0, 1.0, 1e9, rng) - 5.0) < 1e-6 for _ in range(1000))
    assert hits == 1000
    dev = [abs(laplace_mechanism(0.0, 1.0, 1.0, rng)) for _ in range(100_000)]
    assert np.median(dev) == pytest.approx(math.log(2), abs=0.02)
    with pytest.raises(ParameterError):
        laplace_mechanism(0.0, 0.0, 1.0, rng)
    with pytest.raises(ParameterError):
        laplace_mechanism(0.0, 1.0, -1.0, rng)


def _draw(scores, sens, eps, n, seed=0):
    rng = make_stream(seed)
    return np.bincount([exponential_mechanism(scores, sens, eps, rng) for _ in range(n)], minlength=len(scores))


def test_em_uniform_when_scores_equal():
    counts = _draw([3.0] * 5, 1.0, 1.0, 100_000)
    assert chisquare(counts).pvalue > 0.001
    counts = _draw([0.0, 5.0, 10.0], 1.0, 0.0, 30_000, seed=1)
    assert chisquare(counts).pvalue > 0.001


def test_em_two_point_ratio():
    s = 1.3
    n = 100_000
    counts = _draw([0.0, s], 1.0, 2.0, n, seed=3)
    p0 = math.exp(s) / (1 + math.exp(s))
    sigma = math.sqrt(n * p0 * (1 - p0))
    assert abs(counts[0] - n * p0) < 3 * sigma


def test_em_errors_and_extremes():
    rng = make_stream(0)
    with pytest.raises(ParameterError):
        exponential_mechanism([], 1.0, 1.0, rng)
    with pytest.raises(ParameterError):
        exponential_mechanism([0.0, float("nan")], 1.0, 1.0, rng)
    # enormous gaps do not overflow
    assert exponential_mechanism([0.0, 1e300], 1.0, 1.0, rng) == 0


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=8), st.floats(0.01, 10))
def test_em_probabilities_normalized(scores, eps):
    p = em_probabilities(scores, 1.0, eps)
    assert p.sum() == pytest.approx(1.0)
    # the most likely index has the minimum score (ties in p can break either way)
    assert scores[int(np.argmax(p))] == pytest.approx(min(scores))


def test_grid_exponent():
    assert [grid_exponent(x) for x in (1, 1.5, 2, 3, 4, 1000, 1024)] == [0, 0, 1, 1, 2, 9, 10]
    with pytest.raises(ParameterError):
        grid_exponent(0.5)


def test_gem_single_edge_prefers_one():
    g = complete(2)
    budget = PrivacyBudget(5.0, 1e-3)
    fam = sf_family(float(g.n))
    sel = gem_select(g, fam, budget, make_stream(0))
    assert sel.grid == (1, 2) and sel.h_values == (1.0, 1.0)
    assert int(np.argmin(sel.q_values)) == 0
    # analytic two-point probability of choosing 1
    p1 = em_probabilities(sel.s_values, 1.0, 5.0)[0]
    assert p1 > 0.9
    rng = make_stream(1)
    freq = np.mean([gem_select(g, fam, budget, rng).chosen_index == 1 for _ in range(10_000)])
    sigma = math.sqrt(p1 * (1 - p1) / 10_000)
    assert freq > 0.9 and abs(freq - p1) < 4 * sigma


def test_gem_k_zero_is_deterministic():
    fam = sf_family(1.5)
    for seed in range(20):
        sel = gem_select(path(3), fam, PrivacyBudget(0.1, 0.2), make_stream(seed))
        assert sel.chosen_index == 1 and sel.k == 0
    with pytest.raises(ParameterError):
        gem_select(path(3), sf_family(0.5), PrivacyBudget(1.0, 0.2), make_stream(0))


def test_gem_t_uses_natural_log():
    sel = gem_select(path(5), sf_family(5.0), PrivacyBudget(2.0, 0.1), make_stream(0))
    assert sel.k == 2 and sel.t == pytest.approx(2 * math.log(2 / 0.1) / 2.0)


@given(graphs(min_n=1, max_n=8), st.floats(0.2, 5))
def test_q_and_s_share_argmin(g, eps):
    grid = [1, 2, 4, 8]
    h = [f_delta(g, d) for d in grid]
    q, s = gem_scores(h, grid, eps, 0.0)
    assert np.argmin(q) == np.argmin(s)
    # with t > 0 the zero of s sits at the minimizer of the shifted score q_i + t i
    t = 1.0
    q, s = gem_scores(h, grid, eps, t)
    assert np.argmin(s) == np.argmin(q + t * np.array(grid)) and s.min() == 0.0
    # the displayed error form differs from q by the constant h(G) for underestimates
    err = [abs(hi - spanning_forest_size(g)) + d / eps for hi, d in zip(h, grid)]
    assert np.argmin(err) == np.argmin(q)
    assert np.allclose(np.array(err) - q, spanning_forest_size(g))


def test_s_sensitivity_over_neighbour_pairs():
    rng = make_stream(7)
    grid = [1, 2, 4, 8, 16]
    eps, t = 1.0, 2 * math.log(4 / 0.1)
    worst = 0.0
    for _ in range(200):
        g = gen_gnp(int(rng.integers(1, 12)), float(rng.uniform(0.1, 0.9)), rng)
        v = int(rng.integers(g.n))
        h = induced_subgraph(g, [u for u in range(g.n) if u != v])[0]
        _, s_g = gem_scores([f_delta(g, d) for d in grid], grid, eps, t)
        _, s_h = gem_scores([f_delta(h, d) for d in grid], grid, eps, t)
        worst = max(worst, float(np.max(np.abs(s_g - s_h))))
    assert worst <= 1 + 1e-6


def test_err_score_examples():
    const = ExtensionFamily(lambda g, d: 3.0, 8.0, lambda g: 3.0)
    assert err_score(const, path(3), 2, 1.0) == 2.0
    for d in (1, 2, 3):
        assert err_score(sf_family(d + 2), star(d + 1), d, 1.0) == pytest.approx(1 + d)
    # beyond saturation the error grows with Delta
    g = star(4)
    errs = [err_score(sf_family(8.0), g, d, 1.0) for d in range(4, 9)]
    assert all(a < b for a, b in zip(errs, errs[1:]))


def test_gem_utility_statistical():
    rng = make_stream(9)
    cases = [star(5), Graph.from_edges(8, [(0, i) for i in range(1, 8)] + [(1, 2)]), complete(4).add_vertex([0])]
    for g in cases:
        beta, eps = 0.1, 1.0
        fam = sf_family(float(g.n))
        errs = {d: err_score(fam, g, d, eps) for d in range(1, g.n + 1)}
        best = min(errs.values())
        slack = 10 * math.log(math.log(fam.delta_max) * max(math.e, 1 / beta))
        ok = 0
        for _ in range(100):
            sel = gem_select(g, fam, PrivacyBudget(eps, beta), rng)
            ok += errs[sel.chosen_index] <= best * slack
        assert ok >= (1 - 2 * beta) * 100
