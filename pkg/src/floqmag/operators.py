"""Truncated matrix representations of the driven one-body models.

Every model is specified by a static Hamiltonian ``h0`` and a drive operator
``h1``; the time-dependent Hamiltonian over one period is ``h0 + λ(t)·h1``
with the square-wave protocol λ = +1 on the first half-period and −1 on the
second.  This module builds the finite ``dim × dim`` matrices of ``h0`` and
``h1`` in either the harmonic-oscillator number basis or (for the kicked
rotor) the angular-momentum basis.

Construction is exact in the following sense: powers of the position operator
are formed on a padded ladder and the leading block is kept, so every retained
entry equals its infinite-dimensional value — padding further changes nothing.
All matrices are real symmetric by construction and are validated as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, ValidationError

__all__ = [
    "ModelSpec",
    "TruncatedSystem",
    "build_ladder_power",
    "build_system",
    "momentum_matrix",
    "KINDS",
    "BASIS_OSCILLATOR",
    "BASIS_MOMENTUM",
]

#: Recognized model kinds.
KINDS = ("DrivenHO", "ParametricHO", "AnharmonicOsc", "KickedRotor")

BASIS_OSCILLATOR = "HarmonicOscillator"
BASIS_MOMENTUM = "Momentum"

#: Maximum supported power of the position operator.
_MAX_POWER = 8

#: Absolute tolerance for the symmetry check on constructed Hamiltonians.
_HERM_TOL = 1e-13


@dataclass(frozen=True)
class ModelSpec:
    """Physical parameters of one driven model.

    Exactly the fields relevant to ``kind`` must be set:

    ==============  =======================================
    kind            required fields
    ==============  =======================================
    DrivenHO        omega0, g            (linear drive g·x̂)
    ParametricHO    omega0, g            (drive g·x̂²/2)
    AnharmonicOsc   omega0, g, beta      (quartic β·x̂⁴/4, linear drive)
    KickedRotor     K                    (kick amplitude)
    ==============  =======================================
    """

    kind: str
    omega0: Optional[float] = None
    g: Optional[float] = None
    beta: Optional[float] = None
    K: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ParameterError(
                f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        required = {
            "DrivenHO": ("omega0", "g"),
            "ParametricHO": ("omega0", "g"),
            "AnharmonicOsc": ("omega0", "g", "beta"),
            "KickedRotor": ("K",),
        }[self.kind]
        for name in ("omega0", "g", "beta", "K"):
            val = getattr(self, name)
            if name in required:
                if val is None:
                    raise ParameterError(
                        f"{self.kind} requires parameter {name!r}")
                if not np.isfinite(val):
                    raise ParameterError(f"{name} must be finite, got {val}")
            elif val is not None:
                raise ParameterError(
                    f"{self.kind} does not take parameter {name!r}")
        if self.omega0 is not None and self.omega0 <= 0:
            raise ParameterError(f"omega0 must be > 0, got {self.omega0}")
        if self.beta is not None and self.beta < 0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")

    # -- convenience constructors ------------------------------------
    @classmethod
    def driven_ho(cls, omega0: float, g: float) -> "ModelSpec":
        return cls("DrivenHO", omega0=omega0, g=g)

    @classmethod
    def parametric_ho(cls, omega0: float, g: float) -> "ModelSpec":
        return cls("ParametricHO", omega0=omega0, g=g)

    @classmethod
    def anharmonic_osc(cls, omega0: float, g: float,
                       beta: float) -> "ModelSpec":
        return cls("AnharmonicOsc", omega0=omega0, g=g, beta=beta)

    @classmethod
    def kicked_rotor(cls, K: float) -> "ModelSpec":
        return cls("KickedRotor", K=K)


def _frozen_array(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def _bandwidth(m: np.ndarray) -> int:
    """Largest |i−j| carrying a nonzero entry (0 for the zero matrix)."""
    idx = np.nonzero(m)
    if idx[0].size == 0:
        return 0
    return int(np.max(np.abs(idx[0] - idx[1])))


@dataclass(frozen=True)
class TruncatedSystem:
    """A model truncated to ``dim`` basis states.

    ``h0`` and ``h1`` are real symmetric ``dim × dim`` matrices (stored
    read-only).  ``h0`` couples states at most four ladder steps apart and
    ``h1`` at most two; these bounds are structural facts of the supported
    models and are enforced on construction.
    """

    spec: ModelSpec
    dim: int
    h0: np.ndarray = field(repr=False)
    h1: np.ndarray = field(repr=False)
    basis: str

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ParameterError(f"dim must be >= 2, got {self.dim}")
        if self.basis not in (BASIS_OSCILLATOR, BASIS_MOMENTUM):
            raise ParameterError(f"unknown basis {self.basis!r}")
        for name, bound in (("h0", 4), ("h1", 2)):
            m = np.asarray(getattr(self, name))
            if m.shape != (self.dim, self.dim):
                raise ValidationError(
                    f"{name} must be {self.dim}x{self.dim}, got {m.shape}")
            if np.iscomplexobj(m) and np.any(m.imag != 0):
                raise ValidationError(f"{name} must be real in this basis")
            m = np.real(m).astype(np.float64)
            scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
            if float(np.max(np.abs(m - m.T), initial=0.0)) > _HERM_TOL * scale:
                raise ValidationError(f"{name} is not symmetric")
            if _bandwidth(m) > bound:
                raise ValidationError(
                    f"{name} couples states more than {bound} steps apart")
            object.__setattr__(self, name, _frozen_array(m))


def build_ladder_power(omega0: float, k: int, dim: int) -> np.ndarray:
    """Leading ``dim × dim`` block of x̂ᵏ in the number basis.

    The position operator x̂ = (â + â†)/√(2ω₀) couples only adjacent levels,
    so x̂ᵏ restricted to the first ``dim`` states involves intermediate
    states up to ``dim − 1 + k`` only.  Building the power on a ladder of
    size ``dim + k`` and slicing therefore reproduces the untruncated
    entries exactly; any additional padding leaves the block bit-identical.

    Parameters
    ----------
    omega0 : float
        Oscillator frequency, > 0.  Entries scale as ω₀^(−k/2).
    k : int
        Power, 0 ≤ k ≤ 8.  k = 0 returns the identity.
    dim : int
        Number of retained basis states, ≥ 1.
    """
    if not 0 <= k <= _MAX_POWER:
        raise ParameterError(f"power k must be in [0, {_MAX_POWER}], got {k}")
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if omega0 <= 0:
        raise ParameterError(f"omega0 must be > 0, got {omega0}")
    if k == 0:
        return np.eye(dim)
    n = dim + k
    x = np.zeros((n, n))
    lad = np.sqrt(np.arange(1, n) / (2.0 * omega0))
    x[np.arange(n - 1), np.arange(1, n)] = lad
    x[np.arange(1, n), np.arange(n - 1)] = lad
    xk = np.linalg.matrix_power(x, k)[:dim, :dim]
    # matrix_power accumulates (i, j) and (j, i) in different orders; the
    # operator is symmetric by construction, so restore that exactly
    return 0.5 * (xk + xk.T)


def momentum_matrix(omega0: float, dim: int) -> np.ndarray:
    """p̂ in the number basis: ⟨i|p̂|j⟩ = i√(ω₀/2)(√(j+1)δ_{i,j+1} − √j δ_{i,j−1})."""
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if omega0 <= 0:
        raise ParameterError(f"omega0 must be > 0, got {omega0}")
    p = np.zeros((dim, dim), dtype=np.complex128)
    lad = np.sqrt(np.arange(1, dim) * (omega0 / 2.0))
    p[np.arange(1, dim), np.arange(dim - 1)] = 1j * lad
    p[np.arange(dim - 1), np.arange(1, dim)] = -1j * lad
    return p


def build_system(spec: ModelSpec, dim: int) -> TruncatedSystem:
    """Construct the truncated ``h0``/``h1`` pair for a model.

    Oscillator models use the number basis with the zero-point energy
    dropped, h0 = diag(j·ω₀) plus (for the quartic model) β·x̂⁴/4 with its
    full matrix including the diagonal.  The kicked rotor uses the symmetric
    angular-momentum window n = −(dim−1)/2 … +(dim−1)/2 (dim must be odd),
    h0 = diag(n²/2) and ⟨m|cos x̂|n⟩ = ½·δ_{|m−n|,1}.
    """
    if dim < 2:
        raise ParameterError(f"dim must be >= 2, got {dim}")
    kind = spec.kind
    if kind == "KickedRotor":
        if dim % 2 == 0:
            raise ParameterError(
                f"kicked rotor needs an odd dim for a symmetric momentum "
                f"window, got {dim}")
        half = (dim - 1) // 2
        n = np.arange(-half, half + 1)
        h0 = np.diag(0.5 * n.astype(float) ** 2)
        cos = np.zeros((dim, dim))
        cos[np.arange(dim - 1), np.arange(1, dim)] = 0.5
        cos[np.arange(1, dim), np.arange(dim - 1)] = 0.5
        return TruncatedSystem(spec=spec, dim=dim, h0=h0, h1=spec.K * cos,
                               basis=BASIS_MOMENTUM)

    w0 = spec.omega0
    levels = np.diag(w0 * np.arange(dim, dtype=float))
    if kind == "DrivenHO":
        h0 = levels
        h1 = spec.g * build_ladder_power(w0, 1, dim)
    elif kind == "ParametricHO":
        h0 = levels
        h1 = 0.5 * spec.g * build_ladder_power(w0, 2, dim)
    elif kind == "AnharmonicOsc":
        h0 = levels + 0.25 * spec.beta * build_ladder_power(w0, 4, dim)
        h1 = spec.g * build_ladder_power(w0, 1, dim)
    else:  # pragma: no cover - ModelSpec already validated kind
        raise ParameterError(f"unknown model kind {kind!r}")
    return TruncatedSystem(spec=spec, dim=dim, h0=h0, h1=h1,
                           basis=BASIS_OSCILLATOR)
