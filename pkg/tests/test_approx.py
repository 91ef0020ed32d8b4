import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzsampling.approx import (
    analytic_function,
    error_chain,
    hat_function,
    make_function,
    polynomial_function,
    project,
    project_blackbox,
    quasi_interpolant,
    sobolev_function,
    sobolev_norm,
    sobolev_norm_bounds,
)
from mzsampling.basis import c_sigma, get_basis
from mzsampling.errors import DivergenceError, IllConditionedError, ShapeError
from mzsampling.mzfamily import Layer, assemble, generate_jittered, generate_random, generate_uniform

from oracles import normal_equations

BASES = ["fourier", "chebyshev", "legendre"]
CATALOG = [("sobolev", {"sigma": 1.2}), ("analytic", {"a": 1.25}), ("hat", {})]


def random_poly(basis, n, rng):
    dim = basis.dim(n)
    a = rng.standard_normal(dim)
    if basis.is_complex:
        a = a + 1j * rng.standard_normal(dim)
    return a


def test_project_constant():
    for name in BASES:
        f = polynomial_function(name, [1.0])
        for n in (0, 3, 10):
            a = project(f, n).a
            assert a[0] == 1 and not np.any(a[1:])


def test_project_analytic_matches_dft():
    b = get_basis("fourier")
    f = analytic_function(b, 1.25)
    a = project(f, 2).a
    freqs = b.modes(5)
    assert np.allclose(a, 4 / 3 * 2.0 ** -np.abs(freqs), rtol=0, atol=1e-15)
    x = -0.5 + np.arange(4096) / 4096
    vals = 1 / (1.25 - np.cos(2 * np.pi * x))
    dft = np.array([np.mean(vals * np.exp(-2j * np.pi * k * x)) for k in freqs])
    assert np.allclose(a, dft, atol=1e-12)


def test_project_full_retention():
    f = analytic_function("legendre", 2.0)
    assert np.array_equal(project(f, f.k_max).a, f.series)


@pytest.mark.parametrize("name", ["fourier", "chebyshev"])
def test_closed_forms_match_series(name):
    b = get_basis(name)
    f = analytic_function(b, 1.25)
    x = b.grid(257)
    assert np.max(np.abs(f.evaluate(x) - f.closed_form(x))) < 1e-12


@pytest.mark.parametrize("name", ["fourier", "chebyshev"])
def test_hat_tail_bound(name):
    b = get_basis(name)
    f = hat_function(b, k_max=512)
    x = b.grid(1001)
    assert np.max(np.abs(f.evaluate(x) - f.closed_form(x))) <= f.tail_sup_bound + 1e-12


def test_analytic_coefficients():
    f = analytic_function("fourier", 1.25)
    assert f.params["r"] == pytest.approx(0.5)
    assert f.mean == pytest.approx(4 / 3)
    assert f.is_real


def test_black_box_projection():
    b = get_basis("chebyshev")
    f = analytic_function(b, 1.25)
    approx = project_blackbox(b, f.closed_form, 8)
    assert np.allclose(approx.a, project(f, 8).a, atol=1e-12)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_function("fourier", "gaussian")


@pytest.mark.parametrize("name", BASES)
def test_recovers_polynomials(name):
    b = get_basis(name)
    rng = np.random.default_rng(1)
    for lay in [generate_jittered(b, 10, 2.0, 0.25, 4), generate_random(b, 10, 4.0, 4)]:
        g = assemble(b, lay)
        a = random_poly(b, 10, rng)
        p = quasi_interpolant(g, b.eval_series(a, lay.nodes))
        assert np.max(np.abs(p.a - a)) < 1e-9
        assert not np.any(quasi_interpolant(g, np.zeros(lay.size)).a)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(0, 40), seed=st.integers(0, 1000))
def test_uniform_idempotent(n, seed):
    b = get_basis("fourier")
    g = assemble(b, generate_uniform(b, n))
    a = random_poly(b, n, np.random.default_rng(seed))
    p = quasi_interpolant(g, b.eval_series(a, g.layer.nodes))
    assert np.max(np.abs(p.a - a)) < 1e-10


def test_uniform_is_dft():
    b = get_basis("fourier")
    n = 12
    lay = generate_uniform(b, n)
    y = np.random.default_rng(0).standard_normal(lay.size)
    p = quasi_interpolant(assemble(b, lay), y)
    dft = np.array([np.mean(y * np.exp(-2j * np.pi * k * lay.nodes)) for k in b.modes(b.dim(n))])
    assert np.allclose(p.a, dft, atol=1e-13)


@pytest.mark.parametrize("name", BASES)
def test_matches_normal_equations_oracle(name):
    b = get_basis(name)
    lay = generate_random(b, 3, 4.0, 11)
    g = assemble(b, lay)
    assert g.dim <= 8
    y = np.cos(3 * lay.nodes) + lay.nodes**2
    oracle = normal_equations(b, lay, y)
    assert np.max(np.abs(quasi_interpolant(g, y).a - oracle)) < 1e-8


def test_quasi_interpolant_errors():
    g = assemble("fourier", generate_uniform("fourier", 3))
    with pytest.raises(ShapeError):
        quasi_interpolant(g, np.ones(3))
    nodes = g.layer.nodes.copy()
    nodes[4] = nodes[3]
    bad = assemble("fourier", Layer(3, nodes, g.layer.tau))
    with pytest.raises(IllConditionedError):
        quasi_interpolant(bad, np.ones(7))


def test_norm_of_constant():
    f = polynomial_function("chebyshev", [1.0])
    for s in (0.0, 1.0, 3.7):
        assert sobolev_norm(f, s) == pytest.approx(1.0)


def test_norm_brute_force():
    b = get_basis("fourier")
    f = sobolev_function(b, 1.45, eps=0.05, k_max=64)
    # level magnitude (1 + m)^{-2}: sigma + 1/2 + eps = 2
    k = np.arange(1, 1_000_001, dtype=float)
    brute = math.sqrt(1 + 2 * np.sum((1 + k) ** -4.0 * (1 + k * k)))
    lo, hi = sobolev_norm_bounds(f, 1.0)
    assert lo <= hi and abs(hi - brute) < 1e-6


def test_norm_analytic_monotone():
    f = analytic_function("fourier", 1.25)
    vals = [sobolev_norm(f, s) for s in (0.0, 1.0, 2.0, 3.0)]
    assert all(math.isfinite(v) for v in vals) and vals == sorted(vals)
    r, q = 0.5, 0.75
    direct = math.sqrt((1 + 2 * sum(r ** (2 * m) * (1 + m * m) ** 3 for m in range(1, 200))) / q**2)
    assert vals[-1] == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("kind, sigma", [("sobolev", 1.25), ("hat", 1.5), ("hat", 2.0)])
def test_norm_diverges(kind, sigma):
    f = make_function("fourier", kind, **({"sigma": 1.2} if kind == "sobolev" else {}))
    with pytest.raises(DivergenceError) as info:
        sobolev_norm(f, sigma)
    assert info.value.sup_sigma == f.sup_sigma


def test_chain_exact_for_polynomials():
    b = get_basis("legendre")
    a = random_poly(b, 6, np.random.default_rng(2))
    f = polynomial_function(b, a)
    g = assemble(b, generate_jittered(b, 6, 2.0, 0.25, 1))
    p = quasi_interpolant(g, f.evaluate(g.layer.nodes))
    ch = error_chain(f, g, p, 1.2)
    scale = 1e-8 * np.linalg.norm(a)
    assert ch.err_proj <= scale and ch.err_gap <= scale and ch.err_lsq <= scale


def test_pythagoras_uniform():
    b = get_basis("fourier")
    f = sobolev_function(b, 1.2)
    g = assemble(b, generate_uniform(b, 16))
    p = quasi_interpolant(g, f.evaluate(g.layer.nodes))
    ch = error_chain(f, g, p, 1.2)
    assert ch.pythagoras_defect < 1e-9
    assert ch.err_lsq**2 == pytest.approx(ch.err_proj**2 + ch.err_gap**2, rel=1e-9)


@pytest.mark.parametrize("name", BASES)
@pytest.mark.parametrize("kind, params", CATALOG)
def test_chain_bounds(name, kind, params):
    b = get_basis(name)
    f = make_function(b, kind, **params)
    for lay in [generate_jittered(b, 64, 2.0, 0.25, 7), generate_random(b, 16, 4.0, 7)]:
        g = assemble(b, lay)
        p = quasi_interpolant(g, f.evaluate(lay.nodes))
        ch = error_chain(f, g, p, 1.2)
        assert ch.holds
        assert ch.pythagoras_defect < 1e-8


@pytest.mark.parametrize("name", BASES)
@pytest.mark.parametrize("kind, params", CATALOG)
def test_sampling_and_embedding(name, kind, params):
    b = get_basis(name)
    f = make_function(b, kind, **params)
    sigma = 1.2
    cs, norm = c_sigma(b, sigma), sobolev_norm(f, sigma)
    x = b.grid(4096)
    assert np.max(np.abs(f.evaluate(x))) <= cs * norm + f.tail_sup_bound
    lay = generate_random(b, 16, 4.0, 3)
    g = assemble(b, lay)
    sampled = float(np.sum(np.abs(f.evaluate(lay.nodes)) ** 2 * lay.tau))
    assert sampled <= g.b_n * cs**2 * norm**2 + 1e-10
