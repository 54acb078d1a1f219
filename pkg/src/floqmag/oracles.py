"""Independent references the rest of the toolkit is tested against.

Four routes that do not share code with the series machinery:

* the exact effective Hamiltonian of the step-driven harmonic oscillator
  (a closed form — the drive only displaces the oscillator in momentum,
  by (g/ω₀)·tan(ω₀T/4));
* the effective Hamiltonian obtained directly as (i/T)·log U on the
  principal branch;
* closed-form combination terms of orders 1–4 for a product of two
  exponentials;
* the classical 2×2 monodromy of the parametrically modulated oscillator,
  whose |trace| > 2 criterion locates the instability tongues.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import BranchWrapWarning, ParameterError
from .evolution import FloquetOperator
from .operators import momentum_matrix
from .spectral import diagonalize

__all__ = [
    "AnalyticHF",
    "MonodromyResult",
    "analytic_hf_driven_ho",
    "hf_from_log",
    "bch_reference",
    "parametric_monodromy",
]

#: Minimum distance in T from a pole of tan(ω₀T/4) for the closed form.
_POLE_TOL = 1e-6

#: Eigenphase distance from ±π below which the principal log is flagged.
_WRAP_TOL = 1e-6


@dataclass(frozen=True)
class AnalyticHF:
    """Closed-form effective Hamiltonian of the linearly step-driven oscillator.

    H_F = ½p̂² + ½ω₀²x̂² − (g/ω₀)·tan(ω₀T/4)·p̂, valid away from the poles of
    the tangent (the resonances T = (2+4k)·π/ω₀).  ``near_pole`` records
    whether the requested period sits within 1e−6 of such a pole, in which
    case no finite matrix realization exists.
    """

    omega0: float
    g: float
    T: float

    def __post_init__(self) -> None:
        if self.omega0 <= 0:
            raise ParameterError(f"omega0 must be > 0, got {self.omega0}")
        if self.T <= 0:
            raise ParameterError(f"T must be > 0, got {self.T}")

    @property
    def near_pole(self) -> bool:
        # poles of tan(ω₀T/4) at ω₀T/4 = π/2 + kπ, i.e. T = (2+4k)π/ω₀
        k = round((self.omega0 * self.T / np.pi - 2.0) / 4.0)
        dists = [abs(self.T - (2.0 + 4.0 * kk) * np.pi / self.omega0)
                 for kk in (k - 1, k, k + 1)]
        return min(dists) < _POLE_TOL

    @property
    def drift_coefficient(self) -> float:
        """The momentum-displacement strength (g/ω₀)·tan(ω₀T/4)."""
        if self.near_pole:
            raise ParameterError(
                f"T={self.T} is within {_POLE_TOL} of a resonance pole of "
                f"tan(omega0*T/4); the closed form diverges there")
        return self.g / self.omega0 * np.tan(self.omega0 * self.T / 4.0)

    def matrix(self, dim: int) -> np.ndarray:
        """D×D realization diag(j·ω₀) − drift·p̂ (zero-point omitted)."""
        if dim < 1:
            raise ParameterError(f"dim must be >= 1, got {dim}")
        levels = np.diag(self.omega0 * np.arange(dim, dtype=float))
        return levels.astype(np.complex128) \
            - self.drift_coefficient * momentum_matrix(self.omega0, dim)


def analytic_hf_driven_ho(omega0: float, g: float, T: float,
                          dim: int) -> np.ndarray:
    """Closed-form effective Hamiltonian matrix for the linear step drive."""
    return AnalyticHF(omega0=omega0, g=g, T=T).matrix(dim)


def hf_from_log(U: FloquetOperator) -> np.ndarray:
    """(i/T)·log U on the principal branch.

    Each eigenphase of U is taken in (−π, π]; a BranchWrapWarning is issued
    when any eigenphase sits within 1e−6 of the seam at ±π, since the
    principal branch then no longer connects continuously to the small-T
    limit.  The result is exactly Hermitian (built from orthonormal
    eigenvectors and real phases, then symmetrized).
    """
    spectrum = diagonalize(U)
    # diagonalize returns mu = −angle(eigenvalue) in [−π, π); the principal
    # log phase is angle(w) = −mu in (−π, π].
    theta = -spectrum.quasi_energies
    if np.any(np.abs(theta) > np.pi - _WRAP_TOL):
        warnings.warn(
            "an eigenphase of U lies within 1e-6 of the +/-pi branch seam; "
            "the principal-branch effective Hamiltonian may not match the "
            "small-T continuation", BranchWrapWarning, stacklevel=2)
    v = spectrum.states
    # log w = i*theta, so (i/T)·log U = −(1/T)·V diag(theta) V†
    h = (v * (-theta / U.period)) @ v.conj().T
    return 0.5 * (h + h.conj().T)


def bch_reference(x: np.ndarray, y: np.ndarray
                  ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form combination terms of orders 1–4 for log(e^X e^Y).

    Returns (R₁, R₂, R₃, R₄) with
    R₁ = X + Y,
    R₂ = ½[X, Y],
    R₃ = (1/12)([X, [X, Y]] + [Y, [Y, X]]),
    R₄ = −(1/24)[Y, [X, [X, Y]]].
    """
    x = np.asarray(x)
    y = np.asarray(y)

    def comm(a, b):
        return a @ b - b @ a

    xy = comm(x, y)
    r1 = x + y
    r2 = 0.5 * xy
    r3 = (comm(x, xy) + comm(y, comm(y, x))) / 12.0
    r4 = -comm(y, comm(x, xy)) / 24.0
    return r1, r2, r3, r4


@dataclass(frozen=True)
class MonodromyResult:
    """One-period classical transfer matrix and its stability verdict."""

    matrix: np.ndarray
    trace: float
    unstable: bool


def _half_propagator(omega_sq: float, tau: float) -> np.ndarray:
    """Classical (x, ẋ) propagator over time τ for ẍ = −ω²·x.

    Rotation for ω² > 0, shear for ω² = 0, hyperbolic for ω² < 0.
    """
    if omega_sq > 0:
        w = np.sqrt(omega_sq)
        c, s = np.cos(w * tau), np.sin(w * tau)
        return np.array([[c, s / w], [-w * s, c]])
    if omega_sq == 0:
        return np.array([[1.0, tau], [0.0, 1.0]])
    k = np.sqrt(-omega_sq)
    ch, sh = np.cosh(k * tau), np.sinh(k * tau)
    return np.array([[ch, sh / k], [k * sh, ch]])


def parametric_monodromy(omega0: float, g: float, T: float) -> MonodromyResult:
    """Classical monodromy of the square-wave frequency modulation.

    The oscillator runs at frequency √(ω₀²+g) for the first half-period and
    √(ω₀²−g) for the second, so the monodromy is the ordered product of the
    two half-period propagators (the +g half acts first, hence rightmost).
    |trace| > 2 marks exponential instability.
    """
    if omega0 <= 0:
        raise ParameterError(f"omega0 must be > 0, got {omega0}")
    if T <= 0:
        raise ParameterError(f"T must be > 0, got {T}")
    tau = T / 2.0
    m = _half_propagator(omega0**2 - g, tau) @ _half_propagator(
        omega0**2 + g, tau)
    tr = float(np.trace(m))
    return MonodromyResult(matrix=m, trace=tr, unstable=abs(tr) > 2.0)
