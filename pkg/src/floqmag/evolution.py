"""Single-period propagators for the step drive and the kicked rotor.

The drive switches between +λ and −λ halfway through each period, so the
one-period propagator is an ordered product of two constant-Hamiltonian
exponentials.  The half with drive sign +1 acts first on states and therefore
appears as the rightmost factor; this ordering convention is load-bearing —
reversing it changes every expansion coefficient beyond leading order.

Exponentials are computed through full Hermitian eigendecompositions rather
than Padé scaling-and-squaring: the same decompositions feed the spectral
diagnostics, and exact unitary phases matter more here than speed at the
dimensions in play.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ParameterError, ValidationError
from .operators import ModelSpec, TruncatedSystem, build_system

__all__ = [
    "FloquetOperator",
    "hermitian_phase_exp",
    "floquet_operator",
    "kicked_rotor_operator",
    "stroboscopic_energies",
]

#: Relative Frobenius tolerance for Hermiticity preconditions.
_HERM_TOL = 1e-12

#: Unitarity tolerance ‖U†U − I‖_F/√D for constructed propagators.
_UNITARY_TOL = 1e-11


def _check_hermitian(h: np.ndarray, name: str, tol: float = _HERM_TOL) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got {h.shape}")
    scale = float(np.linalg.norm(h))
    defect = float(np.linalg.norm(h - h.conj().T))
    if defect > tol * max(scale, 1.0):
        raise ValidationError(
            f"{name} is not Hermitian (relative defect {defect / max(scale, 1.0):.3e})")
    return h


@dataclass(frozen=True)
class FloquetOperator:
    """One-period unitary ``u`` together with its period and source system."""

    u: np.ndarray = field(repr=False)
    period: float
    system: TruncatedSystem

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ParameterError(f"period must be > 0, got {self.period}")
        u = np.array(self.u, dtype=np.complex128, copy=True)
        d = u.shape[0]
        if u.shape != (d, d):
            raise ValidationError(f"u must be square, got {u.shape}")
        defect = np.linalg.norm(u.conj().T @ u - np.eye(d)) / np.sqrt(d)
        if defect > _UNITARY_TOL:
            raise ValidationError(
                f"operator is not unitary (defect {defect:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]


def hermitian_phase_exp(h: np.ndarray, s: float) -> np.ndarray:
    """exp(−i·s·h) for Hermitian h, via eigendecomposition.

    Returns V·diag(e^{−i·s·e_k})·V† where h = V·diag(e_k)·V†.  The result is
    unitary to within the eigensolver's orthogonality error.
    """
    h = _check_hermitian(h, "h")
    try:
        evals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    phases = np.exp(-1j * s * evals)
    return (vecs * phases) @ vecs.conj().T


def floquet_operator(system: TruncatedSystem, T: float) -> FloquetOperator:
    """One-period propagator U = e^{−i(h0−h1)T/2} · e^{−i(h0+h1)T/2}.

    The +1 half-period acts first on states, hence its exponential is the
    rightmost factor.
    """
    if T <= 0:
        raise ParameterError(f"period must be > 0, got {T}")
    if system.spec.kind == "KickedRotor":
        raise ParameterError(
            "the kicked rotor is delta-kicked, not step-driven; "
            "use kicked_rotor_operator")
    u = hermitian_phase_exp(system.h0 - system.h1, T / 2.0) \
        @ hermitian_phase_exp(system.h0 + system.h1, T / 2.0)
    return FloquetOperator(u=u, period=T, system=system)


def kicked_rotor_operator(spec: ModelSpec, T: float, dim: int) -> FloquetOperator:
    """Kicked-rotor propagator U = e^{−iT·p̂²/2} · e^{−iK·cos x̂}.

    The kick acts first (rightmost); the kinetic factor is exactly diagonal
    in the momentum basis, so only the cosine factor needs a
    decomposition.
    """
    if spec.kind != "KickedRotor":
        raise ParameterError(f"spec must be a KickedRotor, got {spec.kind}")
    if T <= 0:
        raise ParameterError(f"period must be > 0, got {T}")
    system = build_system(spec, dim)
    kick = hermitian_phase_exp(system.h1, 1.0)
    half = (dim - 1) // 2
    n = np.arange(-half, half + 1, dtype=float)
    kinetic = np.exp(-1j * T * 0.5 * n**2)
    return FloquetOperator(u=kinetic[:, None] * kick, period=T, system=system)


def stroboscopic_energies(U: FloquetOperator, psi0: np.ndarray,
                          observable: np.ndarray, n_max: int) -> np.ndarray:
    """Expectation of ``observable`` after 0..n_max whole periods.

    Propagates iteratively (ψ ← Uψ) rather than by diagonalization, checking
    norm preservation at every step; the expectation's imaginary residue must
    stay below 1e−10 and is discarded.
    """
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    psi = np.asarray(psi0, dtype=np.complex128).reshape(-1)
    if psi.shape[0] != U.dim:
        raise ValidationError(
            f"psi0 has length {psi.shape[0]}, operator dimension is {U.dim}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValidationError("psi0 must be normalized to 1 within 1e-12")
    obs = _check_hermitian(observable, "observable")
    energies = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if n > 0:
            psi = U.u @ psi
            if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
                raise NumericalError(
                    f"norm drift exceeded 1e-8 after {n} steps")
        e = np.vdot(psi, obs @ psi)
        if abs(e.imag) > 1e-10 * max(1.0, abs(e.real)):
            raise NumericalError(
                f"energy at step {n} has imaginary residue {e.imag:.3e}")
        energies[n] = e.real
    return energies
