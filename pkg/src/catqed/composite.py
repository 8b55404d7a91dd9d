"""Qubit ⊗ cavity product space: dispersive evolution, parity measurement, cat recipes.

Basis ordering is qubit-major: index ``q * dim + n`` with ``q = 0`` for |g>
and ``q = 1`` for |e>. All dynamics runs in the frame rotating at the
renormalized cavity and qubit frequencies, where only the dispersive term
``V = -chi a†a |e><e|`` survives.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from . import fock
from .errors import InvariantViolation, ParameterError
from .fock import (
    DEFAULT_TAIL_TOL,
    OperatorMatrix,
    StateVector,
    check_dim,
)

QUBIT_G = np.array([1.0, 0.0], dtype=np.complex128)
QUBIT_E = np.array([0.0, 1.0], dtype=np.complex128)
_PROJ_G = np.diag([1.0, 0.0]).astype(np.complex128)
_PROJ_E = np.diag([0.0, 1.0]).astype(np.complex128)
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


class LowFidelityWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class QubitCavityState:
    """Joint pure state with amplitudes ordered (g, n=0..dim-1), (e, n=0..dim-1)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if arr.ndim != 1 or arr.shape[0] % 2:
            raise ParameterError("joint amplitudes must be a 1-D array of even length")
        check_dim(arr.shape[0] // 2)
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def product(cls, qubit, cavity: StateVector) -> "QubitCavityState":
        return cls(np.kron(np.asarray(qubit, dtype=np.complex128), cavity.amplitudes))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0] // 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def block(self, qubit: int) -> np.ndarray:
        """Unnormalized cavity amplitudes paired with qubit level ``qubit``."""
        return self.amplitudes[qubit * self.dim:(qubit + 1) * self.dim].copy()

    def cavity_conditioned(self, qubit: int) -> StateVector:
        return StateVector(self.block(qubit)).normalize()

    def qubit_reduced(self) -> np.ndarray:
        m = self.amplitudes.reshape(2, self.dim)
        return m @ m.conj().T

    def cavity_reduced(self) -> fock.DensityMatrix:
        m = self.amplitudes.reshape(2, self.dim)
        return fock.DensityMatrix(m.T @ m.conj())

    def entanglement_entropy(self) -> float:
        """Von Neumann entropy (nats) of the qubit reduced state."""
        evals = np.linalg.eigvalsh(self.qubit_reduced())
        evals = evals[evals > 1e-300]
        return float(-np.sum(evals * np.log(evals)))


@dataclass(frozen=True)
class DispersiveParams:
    """Dispersive shift and (metadata-only) renormalized frequencies."""

    chi: float
    omega_c: float | None = None
    omega_q: float | None = None

    def __post_init__(self):
        if not self.chi > 0:
            raise ParameterError(f"chi must be positive, got {self.chi}")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome: int
    pre_probability: float
    post_state: Union[QubitCavityState, StateVector]
    p_even: float
    p_odd: float
    reported_outcome: int


def _joint(op_qubit: np.ndarray, op_cavity: np.ndarray) -> np.ndarray:
    return np.kron(op_qubit, op_cavity)


def rotating_frame_generator(params: DispersiveParams, dim: int) -> OperatorMatrix:
    dim = check_dim(dim)
    _, _, number = fock.ladder_operators(dim)
    return OperatorMatrix(-params.chi * _joint(_PROJ_E, number.matrix), "V")


def evolve_dispersive(params: DispersiveParams, dim: int, t: float) -> OperatorMatrix:
    """exp(-i V t) by dense matrix exponential."""
    v = rotating_frame_generator(params, dim)
    return OperatorMatrix(scipy.linalg.expm(-1j * t * v.matrix), f"exp(-iV·{t:g})")


def u_pi(dim: int) -> OperatorMatrix:
    """|g><g| ⊗ I + |e><e| ⊗ Π."""
    dim = check_dim(dim)
    par = fock.parity_operator(dim).matrix
    return OperatorMatrix(_joint(_PROJ_G, np.eye(dim)) + _joint(_PROJ_E, par), "U_π")


def hadamard(dim: int) -> OperatorMatrix:
    dim = check_dim(dim)
    return OperatorMatrix(_joint(_HADAMARD, np.eye(dim)), "H")


def parity_protocol_unitary(dim: int) -> OperatorMatrix:
    """H U_π H: flips the qubit iff the photon number is odd."""
    h = hadamard(dim)
    return h @ u_pi(dim) @ h


def parity_protocol_expected(dim: int) -> OperatorMatrix:
    """Π+ ⊗ I + Π- ⊗ σx written out directly (qubit-major kron order)."""
    plus, minus = fock.parity_projectors(dim)
    return OperatorMatrix(_joint(np.eye(2), plus.matrix) + _joint(_SIGMA_X, minus.matrix), "Π+I+Π-σx")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def measure_parity(state, rng_seed, readout_flip_p: float = 0.0, tol: float = 1e-10) -> MeasurementRecord:
    """Run the H U_π H protocol with a fresh |g> ancilla and read the qubit.

    A cavity-only input gets the ancilla adjoined; a joint input must already
    hold the ancilla in |g>. The ancilla is reset to |g> after readout, so the
    post state is ready for a repeated measurement. ``readout_flip_p`` flips
    only the reported outcome; the back action follows the true outcome.
    """
    cavity_only = isinstance(state, StateVector)
    if cavity_only:
        joint = QubitCavityState.product(QUBIT_G, state)
    else:
        joint = state
        if np.linalg.norm(joint.block(1)) > tol:
            raise ParameterError("ancilla must start in |g> for the parity protocol")
    if not 0.0 <= readout_flip_p < 1.0:
        raise ParameterError("readout_flip_p must lie in [0, 1)")
    dim = joint.dim
    out = parity_protocol_unitary(dim).matrix @ joint.amplitudes
    g_block, e_block = out[:dim], out[dim:]
    total = float(np.vdot(out, out).real)
    p_even = float(np.vdot(g_block, g_block).real) / total
    p_odd = float(np.vdot(e_block, e_block).real) / total
    rng = _rng(rng_seed)
    outcome = 1 if rng.random() < p_even else -1
    prob = p_even if outcome == 1 else p_odd
    if prob <= 0.0:
        raise InvariantViolation("sampled a zero-probability measurement branch")
    cav = (g_block if outcome == 1 else e_block) / math.sqrt(prob * total)
    reported = outcome
    if readout_flip_p > 0.0 and rng.random() < readout_flip_p:
        reported = -outcome
    post_cavity = StateVector(cav)
    post = post_cavity if cavity_only else QubitCavityState.product(QUBIT_G, post_cavity)
    return MeasurementRecord(outcome, prob, post, p_even, p_odd, reported)


def conditional_displacement(alpha: complex, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> OperatorMatrix:
    """|e><e| ⊗ I + |g><g| ⊗ D(alpha): the drive is resonant only for |g>."""
    d = fock.displacement_operator(alpha, dim, tail_tol).matrix
    return OperatorMatrix(_joint(_PROJ_E, np.eye(dim)) + _joint(_PROJ_G, d), f"CD({alpha})")


def prepare_schrodinger_cat(alpha: complex, sign: int, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> QubitCavityState:
    """(|e>|0> + sign |g>|alpha>)/sqrt(2) via a pi/2 pulse and a conditional drive."""
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    dim = check_dim(dim)
    fock.coherent_state(alpha, dim, tail_tol)  # truncation check
    qubit = (QUBIT_E + sign * QUBIT_G) / math.sqrt(2.0)
    start = QubitCavityState.product(qubit, fock.fock_state(0, dim))
    cd = conditional_displacement(alpha, dim, tail_tol)
    return QubitCavityState(cd.matrix @ start.amplitudes)


def selective_pi_pulse(state: QubitCavityState) -> QubitCavityState:
    """Swap the g/e amplitudes of the zero-photon component only."""
    amps = state.amplitudes.copy()
    dim = state.dim
    amps[0], amps[dim] = amps[dim], amps[0]
    return QubitCavityState(amps)


def prepare_cat_deterministic(
    alpha: complex,
    sign: int,
    dim: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    warn_below: float = 1e-3,
) -> StateVector:
    """Schrödinger cat at 2*alpha, selective pi pulse, then displace by -alpha.

    Returns the cavity amplitudes of the qubit-|g> branch without
    renormalization: its overlap with the ideal cat is the joint fidelity,
    and the missing norm is the weight left on |e>|0> by the <0|2 alpha>
    overlap.
    """
    alpha = complex(alpha)
    joint = selective_pi_pulse(prepare_schrodinger_cat(2.0 * alpha, sign, dim, tail_tol))
    shift = fock.displacement_operator(-alpha, dim, tail_tol).matrix
    g_branch = StateVector(shift @ joint.block(0))
    ideal = fock.cat_state(alpha, sign, dim, tail_tol)
    infidelity = 1.0 - abs(ideal.inner(g_branch)) ** 2
    if infidelity > warn_below:
        warnings.warn(
            f"deterministic cat at alpha={alpha:.3g} has infidelity {infidelity:.3e}",
            LowFidelityWarning,
            stacklevel=2,
        )
    return g_branch


def prepare_cat_by_measurement(alpha: complex, rng_seed, dim: int, tail_tol: float = DEFAULT_TAIL_TOL):
    """Parity-measure a coherent state; the back action leaves a cat."""
    start = fock.coherent_state(alpha, dim, tail_tol)
    record = measure_parity(start, rng_seed)
    return record, record.post_state


def jump_spectroscopy(nbar: float, chi: float, n_peaks: int, dim: int) -> list[tuple[float, float]]:
    """Stick spectrum of the qubit line under a Poisson photon distribution.

    The peak for n photons sits at offset ``-n * chi`` with weight
    ``exp(-nbar) nbar**n / n!``.
    """
    dim = check_dim(dim)
    if nbar < 0:
        raise ParameterError(f"nbar must be non-negative, got {nbar}")
    if not 1 <= n_peaks <= dim:
        raise ParameterError(f"n_peaks must lie in 1..dim={dim}, got {n_peaks}")
    out = []
    for n in range(n_peaks):
        if nbar == 0.0:
            w = 1.0 if n == 0 else 0.0
        else:
            w = math.exp(-nbar + n * math.log(nbar) - math.lgamma(n + 1))
        out.append((-n * chi, w))
    return out
