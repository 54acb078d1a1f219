"""Quasi-energy spectra and localization/statistics diagnostics.

A one-period unitary is normal, so its Schur decomposition is (numerically)
its spectral decomposition with orthonormal eigenvectors — this is the one
route that stays well-conditioned through the clustered spectra produced at
large dimension.  Quasi-energies are the phases μ_α with eigenvalue e^{−iμ_α},
reduced to [−π, π) and sorted ascending.

Diagnostics: participation entropy of Floquet states, infinite- and
finite-time averages of an observable, and adjacent-gap ratio statistics with
the two reference distributions they are compared against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
import scipy.linalg

from .errors import (DegeneracyWarning, NumericalError, ParameterError,
                     ValidationError, ZeroSpacingWarning)
from .evolution import FloquetOperator, _check_hermitian, stroboscopic_energies

__all__ = [
    "FloquetSpectrum",
    "LevelStatistics",
    "diagonalize",
    "shannon_entropy",
    "long_time_energy",
    "finite_time_energy",
    "level_spacing_stats",
    "reference_distributions",
]

#: Maximum eigenpair residual ‖Uφ − e^{−iμ}φ‖ accepted from the decomposition.
_RESIDUAL_TOL = 1e-9

#: Gap below which the spectrum counts as degenerate for time averaging.
_DEGENERACY_GAP = 1e-10

#: Number of uniform histogram bins on [0, 1] for the gap-ratio statistics.
_HIST_BINS = 50


@dataclass(frozen=True)
class FloquetSpectrum:
    """Sorted quasi-energies and the matching orthonormal eigenvector columns."""

    quasi_energies: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    period: float

    def __post_init__(self) -> None:
        mu = np.array(self.quasi_energies, dtype=np.float64, copy=True)
        st = np.array(self.states, dtype=np.complex128, copy=True)
        d = mu.shape[0]
        if st.shape != (d, d):
            raise ValidationError(
                f"states must be {d}x{d} (one column per quasi-energy)")
        if np.any(np.diff(mu) < 0):
            raise ValidationError("quasi-energies must be sorted ascending")
        if d and (mu[0] < -np.pi or mu[-1] >= np.pi):
            raise ValidationError("quasi-energies must lie in [-pi, pi)")
        mu.setflags(write=False)
        st.setflags(write=False)
        object.__setattr__(self, "quasi_energies", mu)
        object.__setattr__(self, "states", st)

    @property
    def dim(self) -> int:
        return self.quasi_energies.shape[0]


def diagonalize(U: FloquetOperator) -> FloquetSpectrum:
    """Full spectral decomposition of a one-period unitary.

    Uses the complex Schur form: for a unitary input the triangular factor is
    diagonal up to rounding, its diagonal carries the eigenvalues, and the
    Schur basis provides orthonormal eigenvectors.  The per-column residual
    ‖Uφ_α − e^{−iμ_α}φ_α‖ equals the norm of the discarded strict upper part
    and is verified against 1e−9.
    """
    try:
        t, z = scipy.linalg.schur(U.u, output="complex")
    except Exception as exc:  # scipy raises LinAlgError subclasses
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    w = np.diag(t).copy()
    # residual of column k = norm of the strict upper part of column k
    strict = t - np.diag(w)
    residuals = np.linalg.norm(strict, axis=0)
    worst = float(residuals.max()) if residuals.size else 0.0
    if worst > _RESIDUAL_TOL:
        raise NumericalError(
            f"eigenpair residual {worst:.3e} exceeds {_RESIDUAL_TOL}")
    # eigenvalue e^{−iμ}: np.angle lands in (−π, π], so −angle is in [−π, π)
    # — except that a negative-zero imaginary part makes angle return −π,
    # which would put −angle at +π; fold that seam value back to −π
    mu = -np.angle(w)
    mu[mu >= np.pi] -= 2.0 * np.pi
    order = np.argsort(mu, kind="stable")
    return FloquetSpectrum(quasi_energies=mu[order], states=z[:, order],
                           period=U.period)


def shannon_entropy(state: np.ndarray) -> float:
    """Participation entropy −Σ p_i ln p_i of a normalized vector, p_i = |c_i|².

    Weights below 1e−300 contribute exactly zero (the p·ln p limit), keeping
    the sum finite for sharply localized states.
    """
    c = np.asarray(state, dtype=np.complex128).reshape(-1)
    if abs(np.linalg.norm(c) - 1.0) > 1e-12:
        raise ValidationError("state must be normalized to 1 within 1e-12")
    p = np.abs(c) ** 2
    mask = p > 1e-300
    p = p[mask]
    return float(-np.sum(p * np.log(p)))


def _expansion_weights(spectrum: FloquetSpectrum,
                       psi0: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi0, dtype=np.complex128).reshape(-1)
    if psi.shape[0] != spectrum.dim:
        raise ValidationError(
            f"psi0 has length {psi.shape[0]}, spectrum dimension is "
            f"{spectrum.dim}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValidationError("psi0 must be normalized to 1 within 1e-12")
    return np.abs(spectrum.states.conj().T @ psi) ** 2


def long_time_energy(spectrum: FloquetSpectrum, psi0: np.ndarray,
                     h0: np.ndarray) -> float:
    """Infinite-time average Σ_α |c_α|²·⟨φ_α|h0|φ_α⟩ of an observable.

    Valid when no two quasi-energies coincide; if any gap (including the
    wrap-around gap across the ±π seam) is below 1e−10 a DegeneracyWarning
    is issued, because cross terms then survive the averaging.
    """
    h0 = _check_hermitian(h0, "h0")
    weights = _expansion_weights(spectrum, psi0)
    mu = spectrum.quasi_energies
    if mu.size >= 2:
        gaps = np.diff(mu)
        wrap = 2.0 * np.pi - (mu[-1] - mu[0])
        if float(min(gaps.min(), wrap)) < _DEGENERACY_GAP:
            warnings.warn(
                "quasi-energy gap below 1e-10; the infinite-time average "
                "assumes a non-degenerate spectrum", DegeneracyWarning,
                stacklevel=2)
    diag = np.real(np.einsum("ia,ij,ja->a", spectrum.states.conj(), h0,
                             spectrum.states, optimize=True))
    return float(weights @ diag)


def finite_time_energy(U: FloquetOperator, psi0: np.ndarray, h0: np.ndarray,
                       n_av: int) -> float:
    """Running average (1/(n_av+1))·Σ_{n=0}^{n_av} E(nT) of ⟨h0⟩."""
    if n_av < 0:
        raise ParameterError(f"n_av must be >= 0, got {n_av}")
    energies = stroboscopic_energies(U, psi0, h0, n_av)
    return float(energies.mean())


@dataclass(frozen=True)
class LevelStatistics:
    """Adjacent-gap ratio data: r values, their mean, and a histogram."""

    ratios: np.ndarray = field(repr=False)
    mean_r: float
    hist_counts: np.ndarray = field(repr=False)
    bin_edges: np.ndarray = field(repr=False)
    zero_spacing_count: int


def level_spacing_stats(spectrum: FloquetSpectrum) -> LevelStatistics:
    """Gap-ratio statistics r_α = min(δ_α, δ_{α+1})/max(δ_α, δ_{α+1}).

    δ_α are the D−1 consecutive gaps of the sorted quasi-energies, giving
    D−2 ratios.  Exact degeneracies (δ = 0) are counted in
    ``zero_spacing_count`` and raised as a ZeroSpacingWarning, since they
    signal structure rather than statistical fluctuation; a window whose
    larger gap is zero gets r = 0 instead of 0/0.
    """
    mu = spectrum.quasi_energies
    if mu.size < 3:
        raise ParameterError(
            f"need at least 3 quasi-energies for gap ratios, got {mu.size}")
    delta = np.diff(mu)
    nzero = int(np.count_nonzero(delta == 0.0))
    if nzero:
        warnings.warn(
            f"{nzero} zero quasi-energy spacing(s); affected ratios set to 0",
            ZeroSpacingWarning, stacklevel=2)
    lo = np.minimum(delta[:-1], delta[1:])
    hi = np.maximum(delta[:-1], delta[1:])
    both_zero = hi == 0.0
    ratios = np.where(both_zero, 0.0, lo / np.where(both_zero, 1.0, hi))
    counts, edges = np.histogram(ratios, bins=_HIST_BINS, range=(0.0, 1.0))
    return LevelStatistics(ratios=ratios, mean_r=float(ratios.mean()),
                           hist_counts=counts, bin_edges=edges,
                           zero_spacing_count=nzero)


def reference_distributions(
        r: Union[float, np.ndarray]
) -> Tuple[Union[float, np.ndarray], Union[float, np.ndarray]]:
    """Reference gap-ratio densities (level-repelling, uncorrelated).

    Returns the pair (P_WD(r), P_POI(r)) with
    P_WD(r) = (27/4)·(r + r²)/(1 + r + r²)^{5/2} and P_POI(r) = 2/(1 + r)².
    Both are probability densities on [0, 1] for the folded ratio
    min/max ∈ [0, 1].
    """
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ParameterError("gap ratio r must lie in [0, 1]")
    p_wd = (27.0 / 4.0) * (arr + arr**2) / (1.0 + arr + arr**2) ** 2.5
    p_poi = 2.0 / (1.0 + arr) ** 2
    if np.isscalar(r) or arr.ndim == 0:
        return float(p_wd), float(p_poi)
    return p_wd, p_poi
