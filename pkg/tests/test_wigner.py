import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from catqed import _kernels_py, fock, wigner
from catqed._backend import available, load
from catqed.errors import ParameterError

TWO_OVER_PI = 2 / math.pi


def fock_wigner(n: int, beta: complex) -> float:
    r2 = abs(beta) ** 2
    return TWO_OVER_PI * (-1) ** n * scipy.special.eval_laguerre(n, 4 * r2) * math.exp(-2 * r2)


point = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=30, deadline=None)
@given(point, st.builds(complex, st.floats(-2, 2), st.floats(-2, 2)))
def test_coherent_wigner_closed_form(beta, alpha):
    psi = fock.coherent_state(alpha, 40)
    assert wigner.displaced_parity(psi, beta) == pytest.approx(
        float(wigner.analytic_coherent_wigner(alpha, beta)), abs=1e-9
    )


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_fock_state_wigner_laguerre(n):
    psi = fock.fock_state(n, 12)
    for beta in (0.0, 0.3 + 0.4j, -1.1j, 1.7 - 0.2j):
        assert wigner.displaced_parity(psi, beta) == pytest.approx(fock_wigner(n, beta), abs=1e-10)


@pytest.mark.parametrize("sign", [1, -1])
def test_cat_wigner_three_way(sign):
    alpha = 1.5
    psi = fock.cat_state(alpha, sign, 40)
    for beta in (0.0, 0.2 + 0.35j, 1.4 - 0.1j, -0.7 + 0.9j):
        dp = wigner.displaced_parity(psi, beta)
        an = float(wigner.analytic_cat_wigner(alpha, sign, beta, exact_norm=True))
        qd = 2 * wigner.wigner_position_quadrature(psi, *wigner.beta_to_xp(beta))
        assert dp == pytest.approx(an, abs=1e-9)
        assert dp == pytest.approx(qd, abs=1e-6)


def test_analytic_cat_large_alpha_normalization():
    b = 0.3 + 0.2j
    approx = wigner.analytic_cat_wigner(3.0, 1, b)
    exact = wigner.analytic_cat_wigner(3.0, 1, b, exact_norm=True)
    assert approx == pytest.approx(exact, rel=1e-7)
    with pytest.raises(ParameterError):
        wigner.analytic_cat_wigner(-1.0, 1, b)
    with pytest.raises(ParameterError):
        wigner.analytic_cat_wigner(1.0, 2, b)


def test_xp_beta_jacobian():
    beta = 0.4 - 1.3j
    assert wigner.xp_to_beta(*wigner.beta_to_xp(beta)) == pytest.approx(beta)
    psi = fock.coherent_state(0.6, 20)
    x, p = wigner.beta_to_xp(beta)
    # W(beta) = 2 W(X, P)
    assert wigner.displaced_parity(psi, beta) == pytest.approx(2 * wigner.wigner_position_quadrature(psi, x, p), abs=1e-8)


def test_grid_matches_dense_displaced_parity():
    psi = fock.cat_state(2.0, -1, 40)
    spec = wigner.GridSpec(-3, 3, -2, 2, 7, 5)
    grid = wigner.wigner_grid(psi, spec)
    re, im = spec.axes()
    assert grid.values.shape == (7, 5)
    for i in range(7):
        for j in range(5):
            assert grid.values[i, j] == pytest.approx(wigner.displaced_parity(psi, complex(re[i], im[j])), abs=1e-10)


@pytest.mark.skipif("cython" not in available(), reason="compiled backend not built")
def test_grid_backends_agree():
    rho = fock.as_density(fock.cat_state(2.5, 1, 50)).matrix
    axis = np.linspace(-4, 4, 17)
    a = load("cython").wigner_grid(rho, axis, axis[::-1])
    b = _kernels_py.wigner_grid(rho, axis, axis[::-1])
    assert np.max(np.abs(a - b)) < 1e-10


def test_grid_normalization_and_marginals():
    psi = fock.coherent_state(0.5 + 0.5j, 20)
    spec = wigner.GridSpec(-4, 4, -4, 4, 121, 121)
    grid = wigner.wigner_grid(psi, spec)
    assert grid.quadrature_norm == pytest.approx(1.0, abs=1e-6)
    m_re, m_im = wigner.marginals(grid)
    re, _ = spec.axes()
    # Re-beta marginal of a coherent state is a Gaussian of variance 1/4
    want = math.sqrt(2 / math.pi) * np.exp(-2 * (re - 0.5) ** 2)
    assert np.max(np.abs(m_re - want)) < 1e-6
    assert m_im.sum() * spec.steps[0] == pytest.approx(1.0, abs=1e-6)


def test_central_values_and_bound():
    for sign in (1, -1):
        psi = fock.cat_state(2.5, sign, fock.required_dim(2.5, sign=sign))
        assert wigner.displaced_parity(psi, 0.0) == pytest.approx(sign * TWO_OVER_PI, abs=1e-10)
    grid = wigner.wigner_grid(fock.cat_state(1.2, -1, 30), wigner.GridSpec(n_re=21, n_im=21))
    assert np.max(np.abs(grid.values)) <= TWO_OVER_PI + 1e-12


def im_axis_fringe(rho, alpha: float, ys) -> float:
    """Largest deviation of W(iy) from the two-Gaussian (no-interference) background."""
    background = TWO_OVER_PI * np.exp(-2 * (np.asarray(ys) ** 2 + alpha**2))
    w = np.array([wigner.displaced_parity(rho, 1j * y) for y in ys])
    return float(np.max(np.abs(w - background)))


def test_formula_average_has_no_cos_term():
    beta = 0.1 + np.linspace(-2, 2, 41) * 1j
    avg = 0.5 * (wigner.analytic_cat_wigner(2.0, 1, beta) + wigner.analytic_cat_wigner(2.0, -1, beta))
    bg = TWO_OVER_PI * np.exp(-2 * np.abs(beta) ** 2) * np.cosh(8 * beta.real) * math.exp(-8)
    assert np.max(np.abs(avg - bg)) < 1e-15


def test_dephased_mixture_has_no_fringes():
    alpha, dim = 2.0, 40
    ys = np.linspace(-2, 2, 17)
    plus, minus = fock.parity_projectors(dim)
    coh = fock.coherent_state(alpha, dim).to_density().matrix
    rho = fock.DensityMatrix(plus.matrix @ coh @ plus.matrix + minus.matrix @ coh @ minus.matrix)
    assert im_axis_fringe(rho, alpha, ys) < 1e-10


def test_equal_weight_mixture_residual_fringe_closed_form():
    # normalized cats weighted 1/2 each keep a cross term of relative size c/(1-c^2)
    alpha, dim = 1.0, 30
    c = math.exp(-2 * alpha**2)
    rho = fock.DensityMatrix(
        0.5 * (fock.cat_state(alpha, 1, dim).to_density().matrix + fock.cat_state(alpha, -1, dim).to_density().matrix)
    )
    for y in (0.0, 0.3, 0.8):
        w = wigner.displaced_parity(rho, 1j * y)
        expect = TWO_OVER_PI * math.exp(-2 * y * y) * c * (1 - math.cos(4 * alpha * y)) / (1 - c * c)
        assert w == pytest.approx(expect, abs=1e-12)


def test_grid_spec_validation():
    with pytest.raises(ParameterError):
        wigner.GridSpec(1, 0)
    with pytest.raises(ParameterError):
        wigner.GridSpec(n_re=1)
    spec = wigner.GridSpec()
    assert spec.to_dict()["n_re"] == 81
    assert spec.steps == (0.1, 0.1)


def test_sampled_wigner_binomial_statistics():
    psi = fock.cat_state(1.0, 1, 20)
    beta = 0.3 + 0.2j
    exact = wigner.displaced_parity(psi, beta)
    est, err = wigner.sampled_wigner(psi, beta, 20000, 7)
    p = 0.5 * (1 + exact / TWO_OVER_PI)
    sigma = TWO_OVER_PI * 2 * math.sqrt(p * (1 - p) / 20000)
    assert err == pytest.approx(sigma, rel=0.05)
    assert abs(est - exact) < 4 * sigma
    again = wigner.sampled_wigner(psi, beta, 20000, 7)
    assert again == (est, err)
    with pytest.raises(ParameterError):
        wigner.sampled_wigner(psi, beta, 0, 1)


def test_displacement_and_parity_covariance():
    dim = 50
    psi = fock.cat_state(1.2, -1, dim)
    gamma = 0.4 - 0.3j
    d = fock.displacement_operator(gamma, dim, tail_tol=1.0).matrix
    moved = fock.StateVector(d @ psi.amplitudes)
    flipped = fock.StateVector(fock.parity_operator(dim).matrix @ fock.coherent_state(0.7 + 0.2j, dim).amplitudes)
    coh = fock.coherent_state(0.7 + 0.2j, dim)
    for beta in (0.1 + 0.2j, -0.8 + 0.5j, 1.3j):
        assert wigner.displaced_parity(moved, beta) == pytest.approx(wigner.displaced_parity(psi, beta - gamma), abs=1e-8)
        assert wigner.displaced_parity(flipped, beta) == pytest.approx(wigner.displaced_parity(coh, -beta), abs=1e-10)


def test_sampled_wigner_eigenstate_has_no_noise():
    est, err = wigner.sampled_wigner(fock.fock_state(1, 8), 0.0, 100, 3)
    assert est == pytest.approx(-TWO_OVER_PI)
    assert err == 0.0
