"""Truncated single-mode Fock space: states, operators and structural identities.

Levels ``|0>, ..., |dim-1>`` are retained. Every state-producing function
checks the probability mass sitting in the top 10% of levels (plus any mass
lost beyond the cutoff) and raises :class:`TruncationError` when it exceeds
``tail_tol``; silently truncated states give wrong parities and Wigner values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateStateError,
    DimensionMismatchError,
    InvalidDimensionError,
    ParameterError,
    TruncationError,
)

DEFAULT_TAIL_TOL = 1e-12
STRUCTURAL_TOL = 1e-12
ANALYSIS_TOL = 1e-8


def check_dim(dim) -> int:
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)):
        raise InvalidDimensionError(f"dim must be an integer, got {dim!r}")
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    return int(dim)


def tail_levels(dim: int) -> int:
    """Number of top levels whose population counts as truncation tail."""
    return max(1, math.ceil(0.1 * dim))


def safe_levels(dim: int) -> int:
    """Number of low levels not polluted by the truncation edge."""
    return math.ceil(0.8 * dim)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state amplitudes over a truncated Fock basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if arr.ndim != 1:
            raise InvalidDimensionError("state amplitudes must be one-dimensional")
        check_dim(arr.shape[0])
        object.__setattr__(self, "amplitudes", _readonly(arr))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise DegenerateStateError("cannot normalize the null vector")
        return StateVector(self.amplitudes / nrm)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tail_mass(self) -> float:
        return float(self.populations()[-tail_levels(self.dim):].sum())

    def inner(self, other: "StateVector") -> complex:
        _match(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __len__(self) -> int:
        return self.dim


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix over the same truncated basis."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidDimensionError("density matrix must be square")
        check_dim(arr.shape[0])
        object.__setattr__(self, "matrix", _readonly(arr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix.conj().T, self.matrix)))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def tail_mass(self) -> float:
        return float(self.populations()[-tail_levels(self.dim):].sum())

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def is_valid(self, tol: float = 1e-10) -> bool:
        tr = self.trace()
        return (
            self.hermiticity_defect() < tol
            and 0.0 < tr <= 1.0 + tol
            and self.min_eigenvalue() > -tol
        )


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense operator with a human-readable label."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidDimensionError("operator matrix must be square")
        object.__setattr__(self, "matrix", _readonly(arr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, f"({self.label})†")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _match(self.dim, other.dim)
            return OperatorMatrix(self.matrix @ other.matrix, f"{self.label}·{other.label}")
        if isinstance(other, StateVector):
            _match(self.dim, other.dim)
            return StateVector(self.matrix @ other.amplitudes)
        if isinstance(other, DensityMatrix):
            _match(self.dim, other.dim)
            return OperatorMatrix(self.matrix @ other.matrix, self.label)
        return NotImplemented

    def unitarity_defect(self, levels: int | None = None) -> float:
        """Max-abs deviation of U†U from I on the first ``levels`` levels."""
        k = safe_levels(self.dim) if levels is None else levels
        prod = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(prod[:k, :k] - np.eye(k))))


StateLike = Union[StateVector, DensityMatrix]


def _match(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionMismatchError(f"dimension mismatch: {d1} vs {d2}")


def _check_tail(amplitudes: np.ndarray, tail_tol: float, what: str) -> None:
    pops = np.abs(amplitudes) ** 2
    dim = pops.shape[0]
    missing = max(0.0, 1.0 - float(pops.sum()))
    tail = float(pops[-tail_levels(dim):].sum()) + missing
    if tail > tail_tol:
        raise TruncationError(f"{what} does not fit in the truncated basis", tail, dim)


def required_dim(alpha: complex, tail_tol: float = DEFAULT_TAIL_TOL, minimum: int = 8, sign: int | None = None) -> int:
    """Smallest basis size that passes the truncation check for |alpha>.

    With ``sign`` the check is made on the cat of that parity instead; the
    parity filter moves weight between levels, so the two can differ by one.
    """
    dim = max(minimum, 2)
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    while True:
        amps = coherent_amplitudes(alpha, dim)
        if sign is not None and r2 > 0:
            keep = (np.arange(dim) % 2) == (0 if sign == 1 else 1)
            norm_sq = 2.0 * (1.0 + math.exp(-2.0 * r2)) if sign == 1 else -2.0 * math.expm1(-2.0 * r2)
            amps = np.where(keep, 2.0 * amps, 0.0) / math.sqrt(norm_sq)
        pops = np.abs(amps) ** 2
        tail = float(pops[-tail_levels(dim):].sum()) + max(0.0, 1.0 - float(pops.sum()))
        if tail <= tail_tol:
            return dim
        dim += 1


def fock_state(n: int, dim: int) -> StateVector:
    dim = check_dim(dim)
    if not 0 <= n < dim:
        raise ParameterError(f"Fock level {n} outside 0..{dim - 1}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[n] = 1.0
    return StateVector(amps)


def ladder_operators(dim: int) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Annihilation, creation and number operators."""
    dim = check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(np.complex128)
    number = np.diag(np.arange(dim, dtype=float)).astype(np.complex128)
    return (
        OperatorMatrix(a, "a"),
        OperatorMatrix(a.T.copy(), "a†"),
        OperatorMatrix(number, "n"),
    )


def parity_operator(dim: int) -> OperatorMatrix:
    dim = check_dim(dim)
    signs = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    return OperatorMatrix(np.diag(signs).astype(np.complex128), "Π")


def parity_projectors(dim: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Projectors onto the even and odd photon-number subspaces."""
    dim = check_dim(dim)
    even = (np.arange(dim) % 2 == 0).astype(float)
    return (
        OperatorMatrix(np.diag(even).astype(np.complex128), "Π+"),
        OperatorMatrix(np.diag(1.0 - even).astype(np.complex128), "Π-"),
    )


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Raw truncated amplitudes exp(-|a|^2/2) a^n / sqrt(n!), n < dim."""
    alpha = complex(alpha)
    ratios = np.empty(dim, dtype=np.complex128)
    ratios[0] = math.exp(-0.5 * abs(alpha) ** 2)
    ratios[1:] = alpha / np.sqrt(np.arange(1, dim, dtype=float))
    return np.cumprod(ratios)


def coherent_state(alpha: complex, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    dim = check_dim(dim)
    amps = coherent_amplitudes(alpha, dim)
    _check_tail(amps, tail_tol, f"coherent state alpha={complex(alpha):.4g}")
    return StateVector(amps / np.linalg.norm(amps))


def displacement_operator(beta: complex, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> OperatorMatrix:
    """D(beta) = exp(beta a† - beta* a) by scaling and squaring."""
    dim = check_dim(dim)
    beta = complex(beta)
    _check_tail(coherent_amplitudes(beta, dim), tail_tol, f"displacement beta={beta:.4g}")
    a, adag, _ = ladder_operators(dim)
    gen = beta * adag.matrix - beta.conjugate() * a.matrix
    return OperatorMatrix(scipy.linalg.expm(gen), f"D({beta:.6g})")


def cat_state(
    alpha: complex,
    sign: int,
    dim: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    canonical_phase: bool = True,
) -> StateVector:
    """Normalized (|alpha> + sign |-alpha>) with the exact normalization.

    With ``canonical_phase`` the largest-magnitude amplitude is made real
    positive; otherwise the literal superposition phase is kept.
    """
    dim = check_dim(dim)
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    if sign == -1 and r2 == 0.0:
        raise DegenerateStateError("odd cat with alpha=0 is the null vector")
    overlap_term = math.exp(-2.0 * r2) if sign == 1 else -math.expm1(-2.0 * r2)
    # sign=-1 uses 1 - exp(-2|a|^2) computed without cancellation
    norm_sq = 2.0 * (1.0 + overlap_term) if sign == 1 else 2.0 * overlap_term
    raw = coherent_amplitudes(alpha, dim)
    keep = (np.arange(dim) % 2 == 0) if sign == 1 else (np.arange(dim) % 2 == 1)
    amps = np.where(keep, 2.0 * raw, 0.0) / math.sqrt(norm_sq)
    _check_tail(amps, tail_tol, f"cat state alpha={alpha:.4g}")
    if canonical_phase:
        k = int(np.argmax(np.abs(amps)))
        amps = amps * (abs(amps[k]) / amps[k])
    return StateVector(amps)


def expectation(state, op) -> complex:
    """<psi|O|psi> for a state vector or Tr(O rho) for a density matrix."""
    mat = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)
    if isinstance(state, StateVector):
        _match(state.dim, mat.shape[0])
        return complex(np.vdot(state.amplitudes, mat @ state.amplitudes))
    if isinstance(state, DensityMatrix):
        _match(state.dim, mat.shape[0])
        return complex(np.trace(mat @ state.matrix))
    arr = np.asarray(state)
    if arr.ndim == 1:
        return complex(np.vdot(arr, mat @ arr))
    return complex(np.trace(mat @ arr))


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.to_density()
    arr = np.asarray(state)
    if arr.ndim == 1:
        return StateVector(arr).to_density()
    return DensityMatrix(arr)


def fidelity(a, b) -> float:
    """State fidelity; pure-pure reduces to |<a|b>|^2."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return abs(a.inner(b)) ** 2
    if isinstance(a, StateVector):
        a, b = b, a
    if isinstance(b, StateVector):
        return float(np.real(expectation(b, as_density(a).matrix)))
    ra, rb = as_density(a).matrix, as_density(b).matrix
    _match(ra.shape[0], rb.shape[0])
    # Hermitian square roots stay accurate for rank-deficient states
    # Hermitian square roots with round-off eigenvalues dropped, so
    # rank-deficient states do not pick up sqrt(eps) contributions
    w, v = np.linalg.eigh(0.5 * (ra + ra.conj().T))
    w = np.where(w > 1e-14 * max(w.max(), 1e-300), w, 0.0)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = np.linalg.eigvalsh(sq @ rb @ sq)
    inner = np.where(inner > 1e-14 * max(inner.max(), 1e-300), inner, 0.0)
    return float(np.sum(np.sqrt(inner)) ** 2)
