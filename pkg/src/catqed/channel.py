"""Photon loss: exact Kraus map, jump trajectories and decay observables.

No Kerr term is modeled, so the order in which photons leave does not
matter: after ``N`` jumps in time ``t`` the trajectory state is
``a^N exp(-kappa t n/2) psi`` up to normalization, whatever the jump times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.stats

from . import fock
from ._backend import kernels as _default_kernels
from .errors import DimensionMismatchError, ParameterError
from .fock import DensityMatrix, OperatorMatrix, StateVector, safe_levels

CUMULATIVE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple[OperatorMatrix, ...]
    kappa_t: float
    ell_max: int
    completeness_defect: float

    @property
    def dim(self) -> int:
        return self.operators[0].dim


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    jump_times: tuple[float, ...]
    final_state: StateVector
    n_jumps: int


def default_ell_max(kappa_t: float, nbar_max: float, dim: int) -> int:
    """Smallest l whose cumulative loss weight reaches 1 - 1e-12 for a coherent state.

    For a coherent input of mean ``nbar_max`` the number of lost photons is
    Poisson with mean ``nbar_max * (1 - exp(-kappa_t))``.
    """
    mean = nbar_max * -math.expm1(-kappa_t)
    if mean == 0.0:
        return 0
    ell = int(scipy.stats.poisson.ppf(1.0 - CUMULATIVE_WEIGHT_TOL, mean))
    while scipy.stats.poisson.cdf(ell, mean) < 1.0 - CUMULATIVE_WEIGHT_TOL:
        ell += 1
    return min(ell, dim - 1)


def kraus_set(kappa_t: float, dim: int, ell_max: int | None = None, nbar_max: float | None = None) -> KrausSet:
    """E_l = sqrt((1 - e^{-kt})^l / l!) e^{-kt n/2} a^l for l = 0..ell_max.

    Without ``ell_max`` the cutoff follows ``nbar_max`` when given, else all
    ``dim - 1`` losses are kept (exact on the truncated space).
    """
    dim = fock.check_dim(dim)
    if not kappa_t >= 0:
        raise ParameterError(f"kappa_t must be non-negative, got {kappa_t}")
    if ell_max is None:
        ell_max = dim - 1 if nbar_max is None else default_ell_max(kappa_t, nbar_max, dim)
    if not 0 <= ell_max:
        raise ParameterError(f"ell_max must be non-negative, got {ell_max}")
    lost = -math.expm1(-kappa_t)
    a, _, _ = fock.ladder_operators(dim)
    damp = np.diag(np.exp(-0.5 * kappa_t * np.arange(dim)))
    ops = []
    a_pow = np.eye(dim, dtype=np.complex128)
    for ell in range(ell_max + 1):
        pref = math.sqrt(lost**ell / math.factorial(ell))
        ops.append(OperatorMatrix(pref * damp @ a_pow, f"E_{ell}"))
        a_pow = a_pow @ a.matrix
    k = safe_levels(dim)
    defect = float(np.max(np.abs(completeness_matrix(ops)[:k, :k] - np.eye(k))))
    return KrausSet(tuple(ops), float(kappa_t), ell_max, defect)


def completeness_matrix(ops) -> np.ndarray:
    """sum_l E_l† E_l."""
    if isinstance(ops, KrausSet):
        ops = ops.operators
    return sum(e.matrix.conj().T @ e.matrix for e in ops)


def apply_channel(rho, ks: KrausSet) -> DensityMatrix:
    """rho -> sum_l E_l rho E_l†."""
    r = fock.as_density(rho)
    if r.dim != ks.dim:
        raise DimensionMismatchError(f"state dim {r.dim} vs Kraus dim {ks.dim}")
    out = np.zeros_like(r.matrix)
    for e in ks.operators:
        out += e.matrix @ r.matrix @ e.matrix.conj().T
    return DensityMatrix(out)


def amplitude_decay(alpha: complex, kappa: float, t: float) -> complex:
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")
    return complex(alpha) * math.exp(-0.5 * kappa * t)


def parity_decay_curve(initial, kappa: float, times: Sequence[float]) -> list[float]:
    """<Π>(t) of the exactly damped state at each requested time."""
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ParameterError("times must be non-negative and ascending")
    rho = fock.as_density(initial)
    par = fock.parity_operator(rho.dim)
    out = []
    for t in times:
        ks = kraus_set(kappa * t, rho.dim)
        out.append(float(fock.expectation(apply_channel(rho, ks), par).real))
    return out


def _state_after(initial: StateVector, kappa: float, t: float, n_jumps: int) -> StateVector:
    """Normalized a^N exp(-kappa t n / 2) psi."""
    amps = initial.amplitudes * np.exp(-0.5 * kappa * t * np.arange(initial.dim))
    if n_jumps:
        n = np.arange(initial.dim)
        amps = np.concatenate([amps[n_jumps:] * np.sqrt(_falling(n[n_jumps:], n_jumps)), np.zeros(n_jumps)])
    return StateVector(amps).normalize()


def _falling(n: np.ndarray, k: int) -> np.ndarray:
    """n (n-1) ... (n-k+1) elementwise."""
    out = np.ones(n.shape, dtype=float)
    for j in range(k):
        out *= n - j
    return out


def sample_jump_batch(initial: StateVector, kappa: float, t_final: float, n_shots: int, rng_seed, backend=None):
    """Jump counts and NaN-padded jump times for ``n_shots`` trajectories.

    Trajectory ``s`` consumes row ``s`` of a ``(n_shots, dim)`` uniform
    block drawn from ``default_rng(rng_seed)``, so results do not depend on
    the kernel backend or on batching.
    """
    if kappa < 0 or t_final < 0:
        raise ParameterError("kappa and t_final must be non-negative")
    k = backend or _default_kernels
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    uniforms = rng.random((n_shots, initial.dim))
    return k.sample_jumps(initial.populations(), float(kappa), float(t_final), uniforms)


def trajectory_sample(initial: StateVector, kappa: float, t_final: float, rng_seed, backend=None) -> TrajectoryRecord:
    """One photon-loss trajectory with exactly sampled waiting times."""
    initial = initial.normalize()
    counts, times = sample_jump_batch(initial, kappa, t_final, 1, rng_seed, backend)
    n = int(counts[0])
    final = _state_after(initial, kappa, t_final, n)
    return TrajectoryRecord(tuple(float(x) for x in times[0, :n]), final, n)


def trajectory_average(initial: StateVector, kappa: float, t: float, observable, n_shots: int, rng_seed, backend=None):
    """Monte Carlo mean and standard error of <O> over jump trajectories."""
    initial = initial.normalize()
    counts, _ = sample_jump_batch(initial, kappa, t, n_shots, rng_seed, backend)
    mat = observable.matrix if isinstance(observable, OperatorMatrix) else np.asarray(observable)
    cache = {}
    values = np.empty(n_shots)
    for i, n in enumerate(counts):
        n = int(n)
        if n not in cache:
            cache[n] = float(fock.expectation(_state_after(initial, kappa, t, n), mat).real)
        values[i] = cache[n]
    stderr = float(values.std(ddof=1) / math.sqrt(n_shots)) if n_shots > 1 else float("nan")
    return float(values.mean()), stderr


def trajectory_density(initial: StateVector, kappa: float, t: float, n_shots: int, rng_seed, backend=None) -> DensityMatrix:
    """Trajectory-averaged density matrix; converges to the channel output."""
    initial = initial.normalize()
    counts, _ = sample_jump_batch(initial, kappa, t, n_shots, rng_seed, backend)
    ns, freq = np.unique(counts, return_counts=True)
    out = np.zeros((initial.dim, initial.dim), dtype=np.complex128)
    for n, c in zip(ns, freq):
        psi = _state_after(initial, kappa, t, int(n)).amplitudes
        out += (c / n_shots) * np.outer(psi, psi.conj())
    return DensityMatrix(out)
