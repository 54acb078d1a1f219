"""Radius-of-convergence estimators built on the expansion terms.

Three views of where the expansion stops converging:

* ratio curves, element-wise or in Frobenius norm, whose plateau height
  estimates the radius directly;
* the decay bound for strength-broken ladders, where n * rho_n saturates
  a finite ceiling c and the ceiling's growth against -log(beta) is a
  single log-fit coefficient kappa;
* a bandwidth heuristic giving the 1/W scale that the norm-level radius
  collapses onto as the cutoff grows.

Element curves respect the exact checkerboard sparsity of parity-clean
drives: orders whose element is pinned to zero carry no ratio of their
own, so the curve bridges each gap geometrically between the nearest
supported orders ((|a_m|/|a_{m'}|)^(1/(m'-m)) for m <= n < m'), which
reduces to the plain ratio wherever the support is dense.

The cutoff limit and the order limit do not commute: every element
pipeline here takes the large-D limit at fixed n first, and only then
forms ratio tails in n.  Taking them in the other order answers a
different (finite-D) question.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import AnalysisError, ParameterError, UnconvergedLimitWarning
from .magnus import DOUBLE, MagnusSeries, magnus_series
from .operators import ModelSpec, TruncatedSystem, build_system

__all__ = [
    "ELEMENT",
    "FROBENIUS",
    "RatioCurve",
    "Plateau",
    "RadiusEstimate",
    "DecayFit",
    "element_limit",
    "ratio_curve",
    "element_ratio_curve",
    "detect_plateau",
    "estimate_radius",
    "decay_fit",
    "kappa_fit",
    "bandwidth_heuristic",
]

#: Curve kinds.
ELEMENT = "Element"
FROBENIUS = "FrobeniusNorm"

#: Magnitudes at or below this count as exact zeros of the element.
_SUPPORT_FLOOR = 1e-300

#: Default relative agreement between consecutive cutoffs.
_LIMIT_TOL = 1e-8

#: Default cutoff schedule for the large-D limit.
DEFAULT_SCHEDULE = (16, 32, 64, 128, 256)


@dataclass(frozen=True)
class RatioCurve:
    """Successive-magnitude ratios rho_n of one expansion series.

    ``values[n]`` estimates |Omega_n| / |Omega_{n+1}| in the chosen
    sense for n = 0..L-1, where L is the certified order of the input
    (element-level certificate for element curves).  Undefined entries
    (vanishing denominators outside the supported span) are NaN.
    ``converged_flags[n]`` states whether the underlying magnitudes
    passed a cutoff-doubling agreement check; curves built from a
    single cutoff carry all-False flags.
    """

    kind: str
    values: np.ndarray = field(repr=False)
    dims_used: Tuple[int, ...]
    converged_flags: np.ndarray = field(repr=False)
    element: Optional[Tuple[int, int]] = None

    def __post_init__(self) -> None:
        if self.kind not in (ELEMENT, FROBENIUS):
            raise ParameterError(
                f"kind must be {ELEMENT!r} or {FROBENIUS!r}, "
                f"got {self.kind!r}")
        if self.kind == ELEMENT and self.element is None:
            raise ParameterError("Element curves need the (i, j) pair")
        v = np.asarray(self.values, dtype=float)
        if np.any(v[np.isfinite(v)] < 0.0):
            raise ParameterError("ratio values must be nonnegative")
        v.setflags(write=False)
        f = np.asarray(self.converged_flags, dtype=bool)
        f.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "converged_flags", f)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def defined(self) -> np.ndarray:
        """Boolean mask of the defined (non-NaN) entries."""
        return np.isfinite(self.values)


@dataclass(frozen=True)
class Plateau:
    """A flat stretch of a ratio curve: T_c estimate plus its span."""

    t_c: float
    start: int
    end: int          # inclusive index of the last value in the span

    @property
    def width(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class RadiusEstimate:
    """Radius from a plateau, raw or after period-2 smoothing.

    ``modulated`` is True when the raw curve alternates with period two
    (no plateau at the requested tolerance) and the plateau was found
    on the curve of geometric means of neighbouring ratios instead --
    the alternation multiplies successive ratios by reciprocal factors,
    which the geometric mean cancels exactly.
    """

    t_c: float
    plateau: Plateau
    modulated: bool


@dataclass(frozen=True)
class DecayFit:
    """Tangent-through-origin ceiling of one decay curve.

    ``c_beta`` is the least upper bound of n * rho_n over the asymptotic
    regime -- the slope of the steepest line through the origin that
    stays above the data in the (1/n, rho_n) plane.  ``kappa`` and its
    uncertainty are only populated on the aggregate fit of several
    ceilings against -log(beta) (see :func:`kappa_fit`).
    """

    c_beta: float
    n_min_asymptotic: int
    kappa: Optional[float] = None
    kappa_uncertainty: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.c_beta > 0.0:
            raise ParameterError(
                f"c_beta must be positive when reported, got {self.c_beta}")


# ---------------------------------------------------------------------------
# curve construction


def _element_magnitudes(series: MagnusSeries, i: int, j: int,
                        length: int) -> np.ndarray:
    return np.array([abs(series.terms[n][i, j]) for n in range(length + 1)])


def _bridged_ratios(mags: np.ndarray) -> np.ndarray:
    """Ratio curve over magnitudes with exact-zero gaps bridged.

    ``mags`` has length L+1; the result has length L.  Entry n is the
    geometric per-order ratio between the nearest supported magnitudes
    a <= n < b; entries outside the supported span are NaN.
    """
    length = mags.shape[0] - 1
    out = np.full(length, np.nan)
    support = np.nonzero(mags > _SUPPORT_FLOOR)[0]
    if support.size < 2:
        return out
    for a, b in zip(support[:-1], support[1:]):
        r = (mags[a] / mags[b]) ** (1.0 / (b - a))
        out[a:b] = r
    return out


def ratio_curve(series: MagnusSeries, kind: str,
                element: Optional[Tuple[int, int]] = None) -> RatioCurve:
    """Successive-ratio curve of one series, cut at its certified order.

    Element curves use the per-element certificate of the series'
    tracked corner and bridge exact parity zeros geometrically; the
    Frobenius curve uses the norm-level ``trust_order``.  A curve with
    no defined entry at all raises AnalysisError.
    """
    if kind == ELEMENT:
        if element is None:
            raise ParameterError("Element curves need the (i, j) pair")
        i, j = element
        if not (0 <= i < series.dim and 0 <= j < series.dim):
            raise ParameterError(
                f"element {(i, j)} outside dim {series.dim}")
        length = series.element_trust(i, j)
        if length < 2:
            raise ParameterError(
                f"series certified only to order {length} for element "
                f"{(i, j)}; need at least 2")
        values = _bridged_ratios(_element_magnitudes(series, i, j, length))
    elif kind == FROBENIUS:
        length = series.trust_order
        if length < 2:
            raise ParameterError(
                f"series certified only to order {length}; need at least 2")
        norms = np.asarray(series.frob_norms[:length + 1])
        values = np.full(length, np.nan)
        ok = norms[1:] > _SUPPORT_FLOOR
        values[ok] = norms[:-1][ok] / norms[1:][ok]
    else:
        raise ParameterError(
            f"kind must be {ELEMENT!r} or {FROBENIUS!r}, got {kind!r}")
    if not np.any(np.isfinite(values)):
        raise AnalysisError(
            "ratio curve undefined everywhere (all magnitudes vanish)")
    return RatioCurve(kind=kind, values=values, dims_used=(series.dim,),
                      converged_flags=np.zeros(len(values), dtype=bool),
                      element=element if kind == ELEMENT else None)


def element_limit(family: ModelSpec, i: int, j: int, n: int,
                  d_schedule: Sequence[int] = DEFAULT_SCHEDULE,
                  tol: float = _LIMIT_TOL,
                  precision: str = DOUBLE) -> Tuple[complex, bool]:
    """Large-cutoff limit of one element of one expansion term.

    Walks the increasing cutoff schedule until two consecutive values of
    (Omega_n)_{ij} agree within ``tol`` relative to their larger
    magnitude (exact zeros agree trivially); returns the last value and
    a converged flag.  An exhausted schedule leaves the flag False,
    returns the final value, and emits an UnconvergedLimitWarning.
    Each cutoff's series must be certified through n for the element,
    else the comparison would read rounding noise.
    """
    sched = tuple(d_schedule)
    if len(sched) < 2 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ParameterError(
            f"d_schedule must be at least two increasing cutoffs, "
            f"got {sched}")
    if not (0 <= i < sched[0] and 0 <= j < sched[0]):
        raise ParameterError(
            f"element {(i, j)} outside the smallest cutoff {sched[0]}")
    prev = None
    value = None
    for dim in sched:
        series = magnus_series(build_system(family, dim), n,
                               precision=precision)
        if series.element_trust(i, j) < n:
            raise ParameterError(
                f"order {n} is uncertified at cutoff {dim} (element "
                f"certificate {series.element_trust(i, j)}); raise the "
                f"precision or lower the order")
        value = complex(series.terms[n][i, j])
        if prev is not None:
            scale = max(abs(prev), abs(value))
            if scale <= _SUPPORT_FLOOR or abs(value - prev) <= tol * scale:
                return value, True
        prev = value
    warnings.warn(
        f"cutoff schedule {sched} exhausted without {tol:g}-agreement "
        f"for element {(i, j)} at order {n}",
        UnconvergedLimitWarning, stacklevel=2)
    return value, False


def element_ratio_curve(family: ModelSpec, i: int, j: int, order: int,
                        d_schedule: Sequence[int] = DEFAULT_SCHEDULE,
                        tol: float = _LIMIT_TOL,
                        precision: str = DOUBLE) -> RatioCurve:
    """Element ratio curve with the cutoff limit taken before the tail.

    One series per cutoff in the schedule serves every order; the
    reported magnitudes come from the largest cutoff, and each order's
    flag states whether the last two cutoffs agreed within ``tol``
    with both orders certified there.  The curve is cut at the largest
    cutoff's element certificate.
    """
    sched = tuple(d_schedule)
    if len(sched) < 2 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ParameterError(
            f"d_schedule must be at least two increasing cutoffs, "
            f"got {sched}")
    if not (0 <= i < sched[0] and 0 <= j < sched[0]):
        raise ParameterError(
            f"element {(i, j)} outside the smallest cutoff {sched[0]}")
    runs = [magnus_series(build_system(family, dim), order,
                          precision=precision) for dim in sched]
    last, prev = runs[-1], runs[-2]
    length = last.element_trust(i, j)
    if length < 2:
        raise ParameterError(
            f"series certified only to order {length} for element "
            f"{(i, j)}; need at least 2")
    mags = _element_magnitudes(last, i, j, length)
    values = _bridged_ratios(mags)
    trust_pair = min(length, prev.element_trust(i, j))
    flags = np.zeros(len(values), dtype=bool)
    for n in range(len(values)):
        if n + 1 > trust_pair:
            continue
        ok = True
        for m in (n, n + 1):
            a = complex(last.terms[m][i, j])
            b = complex(prev.terms[m][i, j])
            scale = max(abs(a), abs(b))
            if scale > _SUPPORT_FLOOR and abs(a - b) > tol * scale:
                ok = False
                break
        flags[n] = ok
    if not np.any(np.isfinite(values)):
        raise AnalysisError(
            "ratio curve undefined everywhere (all magnitudes vanish)")
    return RatioCurve(kind=ELEMENT, values=values, dims_used=sched,
                      converged_flags=flags, element=(i, j))


# ---------------------------------------------------------------------------
# plateau reading


def _find_plateau(values: np.ndarray, rel_eps: float,
                  min_len: int) -> Optional[Plateau]:
    length = values.shape[0]
    # mark n where the step to n+1 stays within rel_eps
    flat = np.zeros(max(length - 1, 0), dtype=bool)
    for n in range(length - 1):
        a, b = values[n], values[n + 1]
        if np.isfinite(a) and np.isfinite(b) and a > 0.0:
            flat[n] = abs(b / a - 1.0) < rel_eps
    best: Optional[Tuple[int, int]] = None
    n = 0
    while n < flat.shape[0]:
        if flat[n]:
            start = n
            while n < flat.shape[0] and flat[n]:
                n += 1
            if n - start >= min_len and (best is None
                                         or n - start > best[1] - best[0]):
                best = (start, n)
        else:
            n += 1
    if best is None:
        return None
    start, stop = best          # run of flat steps; values span one further
    t_c = float(np.median(values[start:stop + 1]))
    return Plateau(t_c=t_c, start=start, end=stop)


def detect_plateau(curve: RatioCurve, rel_eps: float = 0.02,
                   min_len: int = 4) -> Optional[Plateau]:
    """The longest flat stretch of a ratio curve, or None.

    A stretch is maximal over consecutive n with |rho_{n+1}/rho_n - 1|
    below ``rel_eps``; it qualifies from ``min_len`` such steps.  The
    estimate is the median over the values the stretch covers.  Absence
    of a plateau is a valid outcome, reported as None.
    """
    if rel_eps <= 0.0 or min_len < 1:
        raise ParameterError(
            f"need rel_eps > 0 and min_len >= 1, got {rel_eps}, {min_len}")
    if int(np.sum(curve.defined)) < min_len:
        raise ParameterError(
            f"curve has {int(np.sum(curve.defined))} defined entries; "
            f"need at least min_len = {min_len}")
    return _find_plateau(curve.values, rel_eps, min_len)


def estimate_radius(curve: RatioCurve, rel_eps: float = 0.02,
                    min_len: int = 4) -> Optional[RadiusEstimate]:
    """Radius estimate robust to exact period-2 modulation.

    First reads the raw curve; when that shows no plateau, reads the
    curve of geometric means of neighbouring ratios, which cancels an
    alternating modulation exactly, and marks the result ``modulated``.
    Returns None when neither curve has a plateau.
    """
    plateau = detect_plateau(curve, rel_eps=rel_eps, min_len=min_len)
    if plateau is not None:
        return RadiusEstimate(t_c=plateau.t_c, plateau=plateau,
                              modulated=False)
    v = curve.values
    smoothed = np.sqrt(v[:-1] * v[1:])
    plateau = _find_plateau(smoothed, rel_eps, min_len)
    if plateau is None:
        return None
    return RadiusEstimate(t_c=plateau.t_c, plateau=plateau, modulated=True)


# ---------------------------------------------------------------------------
# decay ceiling and the kappa fit


def _monotone(seq: np.ndarray) -> bool:
    return bool(np.all(np.diff(seq) <= 0.0) or np.all(np.diff(seq) >= 0.0))


def decay_fit(curve: RatioCurve, n_min: Optional[int] = None,
              window: int = 5) -> DecayFit:
    """Ceiling of n * rho_n over the asymptotic regime of a decay curve.

    The asymptotic regime starts at the smallest n whose ``window``
    consecutive defined values vary monotonically (ties allowed, since
    bridged curves carry paired equal values); pass ``n_min`` to pin
    the start by hand.  The ceiling c is the exact least upper bound of
    n * rho_n from the start onward -- the tangent through the origin
    that touches the (1/n, rho_n) data from above.  A curve that never
    turns monotone inside its certified span raises AnalysisError.
    """
    v = curve.values
    defined = np.nonzero(np.isfinite(v))[0]
    if n_min is not None:
        if n_min < 0:
            raise ParameterError(f"n_min must be >= 0, got {n_min}")
        defined = defined[defined >= n_min]
    if defined.size < 6:
        raise ParameterError(
            f"need at least 6 defined points from the regime start, "
            f"have {defined.size}")
    if n_min is None:
        start = None
        for k in range(defined.size - window + 1):
            # window of consecutive defined values (bridged curves are
            # NaN only outside the supported span, so these are dense)
            idx = defined[k:k + window]
            if _monotone(v[idx]):
                start = int(idx[0])
                break
        if start is None:
            raise AnalysisError(
                "no monotone stretch found inside the certified span; "
                "the curve is still oscillatory (pass n_min to override)")
        defined = defined[defined >= start]
        if defined.size < 6:
            raise ParameterError(
                f"only {defined.size} defined points after the detected "
                f"regime start n = {start}; need at least 6")
    else:
        start = int(defined[0])
    scaled = defined.astype(float) * v[defined]
    return DecayFit(c_beta=float(np.max(scaled)),
                    n_min_asymptotic=start)


def kappa_fit(betas: Sequence[float],
              fits: Sequence[DecayFit]) -> DecayFit:
    """Aggregate several decay ceilings into the log-fit coefficient.

    Fits c(beta) = kappa * (-log beta) + b by least squares over at
    least four strengths and returns a DecayFit carrying the shared
    ceiling information: ``c_beta`` of the smallest beta (the largest
    ceiling), its regime start, and the fitted kappa with its one-sigma
    uncertainty from the fit residuals.
    """
    if len(betas) != len(fits):
        raise ParameterError(
            f"got {len(betas)} strengths but {len(fits)} fits")
    if len(betas) < 4:
        raise ParameterError(
            f"kappa fit needs at least 4 strengths, got {len(betas)}")
    if any(not 0.0 < b < 1.0 for b in betas):
        raise ParameterError("strengths must lie in (0, 1) for -log beta")
    x = -np.log(np.asarray(betas, dtype=float))
    y = np.array([f.c_beta for f in fits])
    coeff, cov = np.polyfit(x, y, 1, cov=True)
    smallest = int(np.argmin(np.asarray(betas)))
    return DecayFit(c_beta=float(y[smallest]),
                    n_min_asymptotic=fits[smallest].n_min_asymptotic,
                    kappa=float(coeff[0]),
                    kappa_uncertainty=float(np.sqrt(cov[0, 0])))


# ---------------------------------------------------------------------------
# bandwidth heuristic


def bandwidth_heuristic(system: TruncatedSystem,
                        period: float = 1.0) -> Tuple[float, float]:
    """Time-averaged spectral width W and the 1/W radius scale.

    For the symmetric two-step drive the time average of the
    instantaneous spectral width is period-independent:
    W = (width(h0+h1) + width(h0-h1)) / 2 with width = lmax - lmin.
    Returns (W, 1/W).
    """
    if not period > 0.0:
        raise ParameterError(f"period must be positive, got {period}")
    h0 = np.asarray(system.h0)
    h1 = np.asarray(system.h1)
    widths = []
    for h in (h0 + h1, h0 - h1):
        ev = np.linalg.eigvalsh(h)
        widths.append(float(ev[-1] - ev[0]))
    w = 0.5 * (widths[0] + widths[1])
    if w <= 0.0:
        raise AnalysisError(f"degenerate spectral width W = {w}")
    return w, 1.0 / w
