"""Wigner tomography by displaced parity, plus independent closed-form oracles.

The canonical convention is the dimensionless W(beta) normalized over
d(Re beta) d(Im beta), with |W| <= 2/pi. Position/momentum values (hbar=1,
oscillator-length units) relate through X = sqrt(2) Re beta,
P = sqrt(2) Im beta and dX dP = 2 d(Re beta) d(Im beta), so
W(beta) = 2 W(X, P).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

from . import fock
from ._backend import kernels as _default_kernels
from .errors import ParameterError, QuadratureError, TruncationError
from .fock import DEFAULT_TAIL_TOL, DensityMatrix, StateVector

TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class GridSpec:
    beta_re_min: float = -4.0
    beta_re_max: float = 4.0
    beta_im_min: float = -4.0
    beta_im_max: float = 4.0
    n_re: int = 81
    n_im: int = 81

    def __post_init__(self):
        if not (self.beta_re_max > self.beta_re_min and self.beta_im_max > self.beta_im_min):
            raise ParameterError("grid max must exceed min on both axes")
        if self.n_re < 2 or self.n_im < 2:
            raise ParameterError("grid needs at least 2 points per axis")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.beta_re_min, self.beta_re_max, self.n_re),
            np.linspace(self.beta_im_min, self.beta_im_max, self.n_im),
        )

    @property
    def steps(self) -> tuple[float, float]:
        return (
            (self.beta_re_max - self.beta_re_min) / (self.n_re - 1),
            (self.beta_im_max - self.beta_im_min) / (self.n_im - 1),
        )

    def to_dict(self) -> dict:
        return {
            "beta_re_min": self.beta_re_min,
            "beta_re_max": self.beta_re_max,
            "beta_im_min": self.beta_im_min,
            "beta_im_max": self.beta_im_max,
            "n_re": self.n_re,
            "n_im": self.n_im,
        }


@dataclass(frozen=True, eq=False)
class WignerGrid:
    spec: GridSpec
    values: np.ndarray  # shape (n_re, n_im)
    quadrature_norm: float


def _working_dim(rho: DensityMatrix, beta: complex, tail_tol: float) -> int:
    """Basis size large enough to hold the state displaced by ``beta``."""
    pops = rho.populations()
    support = np.nonzero(pops > tail_tol * 1e-3)[0]
    radius = math.sqrt(support[-1] if support.size else 0.0) + abs(beta)
    mean = radius**2
    # Poisson tail of a coherent state at that radius
    need = int(scipy.stats.poisson.isf(tail_tol * 1e-2, mean)) + 2 if mean > 0 else 2
    need = max(need, rho.dim, 2)
    return math.ceil(need / 0.9) + 1


def displaced_parity(rho, beta: complex, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """(2/pi) Tr[D(-beta) rho D†(-beta) Π] with a dense displacement matrix."""
    beta = complex(beta)
    r = fock.as_density(rho)
    work = _working_dim(r, beta, tail_tol)
    padded = np.zeros((work, work), dtype=np.complex128)
    padded[: r.dim, : r.dim] = r.matrix
    d = fock.displacement_operator(-beta, work, tail_tol=1.0).matrix
    moved = d @ padded @ d.conj().T
    diag = np.real(np.diag(moved))
    tail = float(diag[-fock.tail_levels(work):].sum())
    if tail > tail_tol:
        raise TruncationError(f"state displaced by {beta:.4g} leaks past the basis", tail, work)
    signs = np.where(np.arange(work) % 2 == 0, 1.0, -1.0)
    return TWO_OVER_PI * float(np.dot(signs, diag))


def wigner_grid(rho, spec: GridSpec, backend=None) -> WignerGrid:
    """Displaced parity on every grid point plus the Riemann-sum normalization."""
    k = backend or _default_kernels
    r = fock.as_density(rho)
    re, im = spec.axes()
    values = k.wigner_grid(r.matrix, re, im)
    dre, dim_ = spec.steps
    return WignerGrid(spec, values, float(values.sum() * dre * dim_))


def analytic_coherent_wigner(alpha: complex, beta):
    """(2/pi) exp(-2 |alpha - beta|^2)."""
    beta = np.asarray(beta, dtype=complex)
    return TWO_OVER_PI * np.exp(-2.0 * np.abs(complex(alpha) - beta) ** 2)


def analytic_cat_wigner(alpha: float, sign: int, beta, exact_norm: bool = False):
    """Closed-form Wigner function of a cat with real positive ``alpha``.

    The default uses the large-cat 1/sqrt(2) normalization,
    (2/pi) e^{-2|b|^2} [sign cos(4 a Im b) + cosh(4 a Re b) e^{-2 a^2}];
    ``exact_norm`` divides by 1 + sign e^{-2 a^2}.
    """
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    if not alpha > 0:
        raise ParameterError("alpha must be real and positive")
    beta = np.asarray(beta, dtype=complex)
    w = TWO_OVER_PI * np.exp(-2.0 * np.abs(beta) ** 2) * (
        sign * np.cos(4.0 * alpha * beta.imag) + np.cosh(4.0 * alpha * beta.real) * math.exp(-2.0 * alpha**2)
    )
    if exact_norm:
        w = w / (1.0 + sign * math.exp(-2.0 * alpha**2))
    return w


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Oscillator eigenfunctions phi_0..phi_{n_max-1} at ``x`` (rows = n)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max,) + x.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(2, n_max):
        out[n] = math.sqrt(2.0 / n) * x * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def _xi_integral(r: np.ndarray, x: float, p: float, half: float, n_int: int) -> float:
    xi = np.linspace(-half, half, n_int + 1)
    fa = hermite_functions(r.shape[0], x + 0.5 * xi)
    fb = hermite_functions(r.shape[0], x - 0.5 * xi)
    # rho(x + xi/2, x - xi/2) = sum_mn rho_mn phi_m(x+xi/2) phi_n(x-xi/2)
    kernel = np.einsum("mk,mn,nk->k", fa, r, fb)
    f = np.real(np.exp(-1j * p * xi) * kernel)
    h = 2.0 * half / n_int
    return h * (f.sum() - 0.5 * (f[0] + f[-1])) / (2.0 * math.pi)


def wigner_position_quadrature(rho, x: float, p: float, rtol: float = 1e-5, max_refinements: int = 12) -> float:
    """W(x, p) from the position-space definition, hbar = 1.

    Trapezoid rule on xi over +-(8 + 2 max|x|) oscillator lengths, halving
    the step until two successive estimates agree to ``rtol``. Multiply by 2
    (see :func:`xp_to_beta`) to compare with :func:`displaced_parity`.
    """
    r = fock.as_density(rho).matrix
    pops = np.real(np.diag(r))
    support = np.nonzero(pops > 1e-16)[0]
    n_top = int(support[-1]) if support.size else 0
    extent = max(abs(x), math.sqrt(2.0 * n_top + 1.0))
    half = 8.0 + 2.0 * extent
    n_int = 64
    prev = _xi_integral(r, x, p, half, n_int)
    for _ in range(max_refinements):
        n_int *= 2
        cur = _xi_integral(r, x, p, half, n_int)
        if abs(cur - prev) <= rtol * 1e-2 + 1e-14:
            return cur
        prev = cur
    raise QuadratureError(f"xi quadrature did not settle at (x={x}, p={p})")


def xp_to_beta(x: float, p: float) -> complex:
    return complex(x, p) / math.sqrt(2.0)


def beta_to_xp(beta: complex) -> tuple[float, float]:
    beta = complex(beta)
    return math.sqrt(2.0) * beta.real, math.sqrt(2.0) * beta.imag


def marginals(grid: WignerGrid) -> tuple[np.ndarray, np.ndarray]:
    """Integrate out Im beta (first) and Re beta (second) by Riemann sums."""
    dre, dim_ = grid.spec.steps
    return grid.values.sum(axis=1) * dim_, grid.values.sum(axis=0) * dre


def sampled_wigner(rho, beta: complex, shots: int, rng_seed) -> tuple[float, float]:
    """Shot-noise estimate of W(beta) from single parity outcomes.

    Each shot yields +-1 with Born probabilities of the displaced state's
    parity; the estimate is (2/pi) times the sample mean and the standard
    error is (2/pi) times sample std / sqrt(shots).
    """
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    parity = displaced_parity(rho, beta) / TWO_OVER_PI
    p_even = min(1.0, max(0.0, 0.5 * (1.0 + parity)))
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    n_even = int(rng.binomial(shots, p_even))
    mean = (2 * n_even - shots) / shots
    if shots > 1:
        var = max(0.0, 1.0 - mean * mean) * shots / (shots - 1)
        stderr = math.sqrt(var / shots)
    else:
        stderr = 0.0
    return TWO_OVER_PI * mean, TWO_OVER_PI * stderr
