import math
import warnings

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from catqed import composite, fock
from catqed.errors import ParameterError


def poisson_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    logmag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def test_u_pi_equals_dispersive_evolution_for_pi_over_chi():
    params = composite.DispersiveParams(chi=2 * math.pi * 2.4e6)
    u = composite.evolve_dispersive(params, 20, math.pi / params.chi)
    assert np.max(np.abs(u.matrix - composite.u_pi(20).matrix)) < 1e-12


def test_dispersive_params_validation():
    with pytest.raises(ParameterError):
        composite.DispersiveParams(chi=0.0)
    with pytest.raises(ParameterError):
        composite.DispersiveParams(chi=-1.0)


@pytest.mark.parametrize("dim", [2, 7, 64])
def test_parity_protocol_identity(dim):
    got = composite.parity_protocol_unitary(dim).matrix
    want = composite.parity_protocol_expected(dim).matrix
    assert np.max(np.abs(got - want)) < 1e-12


def test_parity_protocol_expected_is_built_independently():
    # explicit element check: |g,n> -> |g,n> for even n, |e,n> for odd n
    dim = 6
    u = composite.parity_protocol_expected(dim).matrix
    for n in range(dim):
        col = u[:, n]
        target = n if n % 2 == 0 else dim + n
        assert abs(col[target] - 1) < 1e-15
        assert np.sum(np.abs(col)) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 2.5), st.floats(0, 2 * math.pi), st.integers(0, 2**32 - 1))
def test_measure_parity_born_rule_and_back_action(r, phi, seed):
    alpha = r * complex(math.cos(phi), math.sin(phi))
    dim = max(fock.required_dim(alpha, sign=1), fock.required_dim(alpha, sign=-1))
    psi = fock.coherent_state(alpha, dim)
    rec = composite.measure_parity(psi, seed)
    mean_parity = math.exp(-2 * r * r)
    assert rec.p_even == pytest.approx(0.5 * (1 + mean_parity), abs=1e-12)
    assert rec.p_even + rec.p_odd == pytest.approx(1.0, abs=1e-12)
    target = fock.cat_state(alpha, rec.outcome, dim)
    assert fock.fidelity(target, rec.post_state) == pytest.approx(1.0, abs=1e-10)


def test_measurement_is_qnd():
    psi = fock.coherent_state(1.3, 30)
    rng = np.random.default_rng(4)
    rec = composite.measure_parity(psi, rng)
    for _ in range(5):
        again = composite.measure_parity(rec.post_state, rng)
        assert again.outcome == rec.outcome
        assert again.pre_probability == pytest.approx(1.0, abs=1e-12)


def test_joint_input_keeps_ancilla_reset():
    psi = fock.coherent_state(0.8, 20)
    joint = composite.QubitCavityState.product(composite.QUBIT_G, psi)
    rec = composite.measure_parity(joint, 11)
    assert isinstance(rec.post_state, composite.QubitCavityState)
    assert np.linalg.norm(rec.post_state.block(1)) == 0.0
    excited = composite.QubitCavityState.product(composite.QUBIT_E, psi)
    with pytest.raises(ParameterError):
        composite.measure_parity(excited, 0)


def test_readout_flip_only_changes_report():
    psi = fock.cat_state(1.0, 1, 20)
    rng = np.random.default_rng(9)
    n = 4000
    flips = 0
    for _ in range(n):
        rec = composite.measure_parity(psi, rng, readout_flip_p=0.2)
        assert rec.outcome == 1
        flips += rec.reported_outcome == -1
    sigma = math.sqrt(0.2 * 0.8 / n)
    assert abs(flips / n - 0.2) < 4 * sigma
    with pytest.raises(ParameterError):
        composite.measure_parity(psi, 0, readout_flip_p=1.0)


def test_schrodinger_cat_entanglement():
    alpha = 1.1
    dim = 30
    joint = composite.prepare_schrodinger_cat(alpha, 1, dim)
    assert joint.norm() == pytest.approx(1.0, abs=1e-12)
    # qubit reduced eigenvalues (1 +- |<0|alpha>|)/2
    c = math.exp(-alpha**2 / 2)
    lam = np.array([(1 + c) / 2, (1 - c) / 2])
    expect = float(-np.sum(lam * np.log(lam)))
    assert joint.entanglement_entropy() == pytest.approx(expect, abs=1e-10)
    assert np.allclose(joint.block(1), fock.fock_state(0, dim).amplitudes / math.sqrt(2))
    assert np.allclose(joint.block(0), poisson_amplitudes(alpha, dim) / math.sqrt(2), atol=1e-12)


def test_qubit_and_cavity_reductions_are_consistent():
    joint = composite.prepare_schrodinger_cat(0.7, -1, 16)
    q = joint.qubit_reduced()
    c = joint.cavity_reduced()
    assert np.trace(q).real == pytest.approx(1.0)
    assert c.trace() == pytest.approx(1.0)
    assert np.sum(np.linalg.eigvalsh(q) ** 2) == pytest.approx(c.purity(), abs=1e-12)


@pytest.mark.parametrize("alpha,sign", [(0.5, 1), (0.5, -1), (1.0, 1), (1.5, -1), (2.5, 1)])
def test_deterministic_cat_against_coherent_oracle(alpha, sign):
    dim = fock.required_dim(2 * alpha) + 20
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", composite.LowFidelityWarning)
        branch = composite.prepare_cat_deterministic(alpha, sign, dim)
    c = math.exp(-2 * alpha**2)
    oracle = (sign * poisson_amplitudes(alpha, dim) + (1 - sign * c) * poisson_amplitudes(-alpha, dim)) / math.sqrt(2)
    assert np.max(np.abs(branch.amplitudes - oracle)) < 1e-10
    ideal = fock.cat_state(alpha, sign, dim)
    f = abs(ideal.inner(branch)) ** 2
    assert f == pytest.approx((1 + sign * c) * (2 - sign * c) ** 2 / 4, abs=1e-10)


def test_deterministic_cat_warns_at_small_alpha():
    with pytest.warns(composite.LowFidelityWarning):
        composite.prepare_cat_deterministic(0.5, 1, 30)
    with warnings.catch_warnings():
        warnings.simplefilter("error", composite.LowFidelityWarning)
        composite.prepare_cat_deterministic(2.5, 1, fock.required_dim(5.0) + 10)


def test_selective_pi_pulse_touches_only_zero_photons():
    joint = composite.prepare_schrodinger_cat(0.4, 1, 12)
    flipped = composite.selective_pi_pulse(joint)
    a, b = joint.amplitudes, flipped.amplitudes
    assert b[0] == a[12] and b[12] == a[0]
    assert np.array_equal(np.delete(a, [0, 12]), np.delete(b, [0, 12]))


def test_prepare_cat_by_measurement():
    rec, post = composite.prepare_cat_by_measurement(1.0, 5, 20)
    ideal = fock.cat_state(1.0, rec.outcome, 20)
    assert fock.fidelity(ideal, post) == pytest.approx(1.0, abs=1e-10)


def test_jump_spectroscopy_poisson_weights():
    peaks = composite.jump_spectroscopy(3.0, 0.5, 15, 20)
    assert [p[0] for p in peaks] == [-0.5 * n for n in range(15)]
    pmf = scipy.stats.poisson.pmf(np.arange(15), 3.0)
    assert np.allclose([p[1] for p in peaks], pmf, atol=1e-14)
    vac = composite.jump_spectroscopy(0.0, 1.0, 3, 5)
    assert [w for _, w in vac] == [1.0, 0.0, 0.0]
    with pytest.raises(ParameterError):
        composite.jump_spectroscopy(1.0, 1.0, 6, 5)
