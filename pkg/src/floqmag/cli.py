"""Command-line front end: parameter scans with machine-readable output.

Eight subcommands cover the standard analyses -- state entropies against
unperturbed energy, long-time and finite-time energy scans over the
period, quasi-energy gap statistics, expansion-ratio curves, radius and
decay-ceiling estimates, resonance proliferation under finite averaging,
kicked-rotor energy growth, and the cross-checking oracle suite.

Every run persists a ScanResult: a metadata preamble echoing the exact
configuration (enough to reproduce the file byte for byte, wall time
aside), named numeric columns of equal length, and every warning the
inner modules raised, verbatim.  Output is CSV (default) or JSON;
numbers carry 17 significant digits, so parsing reproduces the binary
values exactly.

Configuration comes from flags, optionally layered over a key-value
config file (``--config``); explicit flags win.  The only environment
override is FLOQMAG_WORKERS, the scan worker count.  Exit codes: 0 on
success, 2 on a usage error, 1 on numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .convergence import (ELEMENT, FROBENIUS, decay_fit,
                          element_ratio_curve, estimate_radius, kappa_fit,
                          ratio_curve)
from .errors import (AnalysisError, FloqmagError, ParameterError,
                     ValidationError)
from .evolution import (floquet_operator, kicked_rotor_operator,
                        stroboscopic_energies)
from .magnus import (DOUBLE, EXTENDED, PRECISIONS, BchFactors,
                     klarsfeld_terms, magnus_series)
from .operators import ModelSpec, build_system
from .oracles import (analytic_hf_driven_ho, bch_reference, hf_from_log,
                      parametric_monodromy)
from .spectral import (diagonalize, finite_time_energy, level_spacing_stats,
                       long_time_energy, reference_distributions,
                       shannon_entropy)

__all__ = ["RunConfig", "ScanResult", "run", "emit", "main"]

_MODEL_KEYS = {
    "driven-ho": "DrivenHO",
    "parametric-ho": "ParametricHO",
    "anharmonic-osc": "AnharmonicOsc",
    "kicked-rotor": "KickedRotor",
}

_SUBCOMMANDS = ("entropy", "energy-scan", "level-stats", "magnus-ratios",
                "tc-estimate", "resonance-scan", "kicked-scan",
                "oracle-check")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """One validated invocation: subcommand plus every knob it reads."""

    subcommand: str
    model: Optional[str] = None
    omega0: Optional[float] = None
    g: Optional[float] = None
    beta: Optional[float] = None
    betas: Optional[Tuple[float, ...]] = None
    K: Optional[float] = None
    dim: Optional[int] = None
    dims: Optional[Tuple[int, ...]] = None
    t: Optional[float] = None
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    t_step: Optional[float] = None
    t_list: Optional[Tuple[float, ...]] = None
    order: Optional[int] = None
    precision: Optional[str] = None
    kind: Optional[str] = None
    element: Optional[Tuple[int, int]] = None
    n_av: Optional[Tuple[int, ...]] = None
    n_min: Optional[int] = None
    d_schedule: Optional[Tuple[int, ...]] = None
    histogram_bins: Optional[int] = None
    steps: Optional[int] = None
    rel_eps: Optional[float] = None
    min_len: Optional[int] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    format: str = "csv"

    def t_grid(self) -> Tuple[float, ...]:
        """The period grid: explicit list, or min..max by step."""
        if self.t_list is not None:
            if not self.t_list:
                raise ParameterError("t_list: grid must be non-empty")
            if any(t <= 0.0 for t in self.t_list):
                raise ParameterError("t_list: all periods must be > 0")
            return self.t_list
        lo, hi, step = self.t_min, self.t_max, self.t_step
        if lo is None or hi is None or step is None:
            raise ParameterError(
                "t grid: need t_min, t_max, t_step, or an explicit t_list")
        if step <= 0.0:
            raise ParameterError(f"t_step: must be > 0, got {step}")
        if lo <= 0.0 or hi < lo:
            raise ParameterError(
                f"t grid: need 0 < t_min <= t_max, got [{lo}, {hi}]")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        grid = tuple(lo + k * step for k in range(count))
        if not grid:
            raise ParameterError("t grid: grid must be non-empty")
        return grid

    def model_spec(self, beta: Optional[float] = None) -> ModelSpec:
        """ModelSpec for the configured model; ``beta`` overrides."""
        kind = _MODEL_KEYS.get(self.model or "")
        if kind is None:
            raise ParameterError(
                f"model: expected one of {sorted(_MODEL_KEYS)}, "
                f"got {self.model!r}")
        b = self.beta if beta is None else beta
        if kind == "DrivenHO":
            return ModelSpec.driven_ho(self.omega0, self.g)
        if kind == "ParametricHO":
            return ModelSpec.parametric_ho(self.omega0, self.g)
        if kind == "AnharmonicOsc":
            return ModelSpec.anharmonic_osc(self.omega0, self.g, b)
        return ModelSpec.kicked_rotor(self.K)


@dataclass
class ScanResult:
    """Columns plus the metadata needed to reproduce them."""

    metadata: Dict[str, object]
    columns: Dict[str, List[object]]
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ParameterError(f"unequal column lengths: {lengths}")


def _workers() -> int:
    raw = os.environ.get("FLOQMAG_WORKERS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(
            f"FLOQMAG_WORKERS: expected a positive integer, got {raw!r}")
    if n < 1:
        raise ParameterError(
            f"FLOQMAG_WORKERS: expected a positive integer, got {n}")
    return n


def _map_ordered(fn: Callable, items: Sequence) -> List:
    """Apply fn over items, possibly concurrently, preserving order."""
    n = _workers()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommand implementations (each returns columns for a ScanResult)


def _ground_state(dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def _run_entropy(cfg: RunConfig) -> Dict[str, List]:
    if cfg.model == "kicked-rotor":
        raise ParameterError(
            "model: entropy needs an oscillator-basis model")
    cols: Dict[str, List] = {"dim": [], "alpha": [], "e_alpha": [],
                             "s_alpha": []}
    for dim in cfg.dims:
        system = build_system(cfg.model_spec(), dim)
        spectrum = diagonalize(floquet_operator(system, cfg.t))
        # reference energy: expectation of the bare ladder diag(j*omega0),
        # the same basis the entropy is computed in
        weights = np.abs(spectrum.states) ** 2
        e = cfg.omega0 * (np.arange(dim, dtype=float) @ weights)
        s = [shannon_entropy(spectrum.states[:, a]) for a in range(dim)]
        order = np.argsort(e, kind="stable")
        for rank, a in enumerate(order):
            cols["dim"].append(dim)
            cols["alpha"].append(rank)
            cols["e_alpha"].append(float(e[a]))
            cols["s_alpha"].append(float(s[a]))
    return cols


def _run_energy_scan(cfg: RunConfig) -> Dict[str, List]:
    grid = cfg.t_grid()
    betas = cfg.betas
    jobs = [(b, t) for b in betas for t in grid]

    def one(job):
        b, t = job
        system = build_system(cfg.model_spec(beta=b), cfg.dim)
        spectrum = diagonalize(floquet_operator(system, t))
        psi0 = _ground_state(cfg.dim)
        e_avg = long_time_energy(spectrum, psi0, system.h0)
        e_start = float(np.real(psi0.conj() @ system.h0 @ psi0))
        return e_avg, e_avg - e_start

    results = _map_ordered(one, jobs)
    cols: Dict[str, List] = {"beta": [], "T": [], "e_avg": [],
                             "e_above_start": []}
    for (b, t), (e_avg, e_sub) in zip(jobs, results):
        cols["beta"].append(b)
        cols["T"].append(t)
        cols["e_avg"].append(e_avg)
        cols["e_above_start"].append(e_sub)
    return cols


def _run_level_stats(cfg: RunConfig) -> Dict[str, List]:
    grid = cfg.t_grid()
    jobs = [(d, t) for d in cfg.dims for t in grid]

    def one(job):
        d, t = job
        system = build_system(cfg.model_spec(), d)
        return level_spacing_stats(diagonalize(floquet_operator(system, t)))

    stats = _map_ordered(one, jobs)
    bins = cfg.histogram_bins or 0
    if bins == 0:
        cols: Dict[str, List] = {"dim": [], "T": [], "mean_r": [],
                                 "n_ratios": [], "zero_spacings": []}
        for (d, t), st in zip(jobs, stats):
            cols["dim"].append(d)
            cols["T"].append(t)
            cols["mean_r"].append(st.mean_r)
            cols["n_ratios"].append(int(st.ratios.size))
            cols["zero_spacings"].append(st.zero_spacing_count)
        return cols
    cols = {"dim": [], "T": [], "bin_center": [], "count": [],
            "expected_poi": [], "expected_wd": [], "mean_r": []}
    edges = np.linspace(0.0, 1.0, bins + 1)
    # expected per-bin probabilities by fine trapezoid quadrature
    quad = np.linspace(0.0, 1.0, bins * 200 + 1)
    wd_q, poi_q = reference_distributions(quad)
    for (d, t), st in zip(jobs, stats):
        counts, _ = np.histogram(st.ratios, bins=bins, range=(0.0, 1.0))
        total = int(st.ratios.size)
        for k in range(bins):
            seg = (quad >= edges[k]) & (quad <= edges[k + 1])
            p_poi = float(np.trapezoid(poi_q[seg], quad[seg]))
            p_wd = float(np.trapezoid(wd_q[seg], quad[seg]))
            cols["dim"].append(d)
            cols["T"].append(t)
            cols["bin_center"].append(float(0.5 * (edges[k] + edges[k + 1])))
            cols["count"].append(int(counts[k]))
            cols["expected_poi"].append(p_poi * total)
            cols["expected_wd"].append(p_wd * total)
            cols["mean_r"].append(st.mean_r)
    return cols


def _run_magnus_ratios(cfg: RunConfig) -> Dict[str, List]:
    if cfg.kind == "frobenius":
        series = magnus_series(build_system(cfg.model_spec(), cfg.dim),
                               cfg.order, precision=cfg.precision)
        curve = ratio_curve(series, FROBENIUS)
    elif cfg.d_schedule is not None:
        curve = element_ratio_curve(cfg.model_spec(), cfg.element[0],
                                    cfg.element[1], cfg.order,
                                    d_schedule=cfg.d_schedule,
                                    precision=cfg.precision)
    else:
        series = magnus_series(build_system(cfg.model_spec(), cfg.dim),
                               cfg.order, precision=cfg.precision)
        curve = ratio_curve(series, ELEMENT, cfg.element)
    estimate = estimate_radius(curve, rel_eps=cfg.rel_eps,
                               min_len=cfg.min_len)
    if estimate is None:
        t_c, lo, hi, modulated = math.nan, -1, -1, False
    else:
        span = estimate.plateau
        lo, hi = span.start, span.end + (1 if estimate.modulated else 0)
        t_c, modulated = estimate.t_c, estimate.modulated
    cols: Dict[str, List] = {"n": [], "inv_n": [], "rho": [], "n_rho": [],
                             "in_plateau": [], "converged": [],
                             "plateau_t_c": []}
    for n in range(len(curve)):
        rho = float(curve.values[n])
        cols["n"].append(n)
        cols["inv_n"].append(1.0 / n if n > 0 else math.nan)
        cols["rho"].append(rho)
        cols["n_rho"].append(n * rho)
        cols["in_plateau"].append(int(lo <= n <= hi))
        cols["converged"].append(int(curve.converged_flags[n]))
        cols["plateau_t_c"].append(t_c)
    return cols


def _run_tc_estimate(cfg: RunConfig) -> Dict[str, List]:
    if cfg.model != "anharmonic-osc":
        raise ParameterError(
            "model: the decay ceiling and kappa fit apply to the "
            "anharmonic oscillator")
    i, j = cfg.element
    per_beta = []
    for b in cfg.betas:
        family = ModelSpec.anharmonic_osc(cfg.omega0, cfg.g, b)
        curve = element_ratio_curve(family, i, j, cfg.order,
                                    d_schedule=cfg.d_schedule,
                                    precision=cfg.precision)
        fit = decay_fit(curve, n_min=cfg.n_min)
        window = np.isfinite(curve.values)
        window[:fit.n_min_asymptotic] = False
        per_beta.append((fit, bool(np.all(curve.converged_flags[window]))))
    agg = kappa_fit(cfg.betas, [f for f, _ in per_beta])
    cols: Dict[str, List] = {"beta": [], "c_beta": [],
                             "n_min_asymptotic": [], "converged": [],
                             "kappa": [], "kappa_uncertainty": []}
    for b, (fit, conv) in zip(cfg.betas, per_beta):
        cols["beta"].append(b)
        cols["c_beta"].append(fit.c_beta)
        cols["n_min_asymptotic"].append(fit.n_min_asymptotic)
        cols["converged"].append(int(conv))
        cols["kappa"].append(agg.kappa)
        cols["kappa_uncertainty"].append(agg.kappa_uncertainty)
    return cols


def _run_resonance_scan(cfg: RunConfig) -> Dict[str, List]:
    grid = cfg.t_grid()
    system = build_system(cfg.model_spec(), cfg.dim)
    psi0 = _ground_state(cfg.dim)
    jobs = [(n_av, t) for n_av in cfg.n_av for t in grid]

    def one(job):
        n_av, t = job
        return finite_time_energy(floquet_operator(system, t), psi0,
                                  system.h0, n_av)

    results = _map_ordered(one, jobs)
    cols: Dict[str, List] = {"n_av": [], "T": [], "e_finite": []}
    for (n_av, t), e in zip(jobs, results):
        cols["n_av"].append(n_av)
        cols["T"].append(t)
        cols["e_finite"].append(e)
    return cols


def _run_kicked_scan(cfg: RunConfig) -> Dict[str, List]:
    op = kicked_rotor_operator(ModelSpec.kicked_rotor(cfg.K), cfg.t,
                               cfg.dim)
    psi0 = np.zeros(cfg.dim, dtype=np.complex128)
    psi0[(cfg.dim - 1) // 2] = 1.0          # zero-momentum start
    h0 = np.asarray(op.system.h0)
    energies = stroboscopic_energies(op, psi0, h0, cfg.steps)
    cols: Dict[str, List] = {"n": [], "t_elapsed": [], "energy": []}
    for n, e in enumerate(energies):
        cols["n"].append(n)
        cols["t_elapsed"].append(n * cfg.t)
        cols["energy"].append(float(e))
    return cols


def _run_oracle_check(cfg: RunConfig) -> Dict[str, List]:
    rng = np.random.default_rng(cfg.seed)
    checks: List[Tuple[str, float, float]] = []

    # combination terms against the four closed forms
    worst = 0.0
    for _ in range(100):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        x, y = 0.5 * (a - a.conj().T), 0.5 * (b - b.conj().T)
        terms = klarsfeld_terms(BchFactors(x=x, y=y), 4)
        for t, r in zip(terms, bch_reference(x, y)):
            scale = max(float(np.abs(r).max()), 1.0)
            worst = max(worst, float(np.abs(t - r).max()) / scale)
    checks.append(("recursion_vs_closed_forms", worst, 1e-12))

    # log of the period propagator against the analytic form, small T
    t_small, dim = 0.04, 64
    system = build_system(ModelSpec.driven_ho(1.0, 1.0), dim)
    h_log = hf_from_log(floquet_operator(system, t_small))
    h_ana = analytic_hf_driven_ho(1.0, 1.0, t_small, dim)
    corner = (h_log - h_ana)[:8, :8]
    shift = np.mean(np.diag(corner))
    dev = float(np.abs(corner - shift * np.eye(8)).max())
    checks.append(("log_propagator_vs_analytic", dev, 1e-6))

    # closure: re-exponentiating the extracted generator returns U
    op = floquet_operator(system, 1.0)
    h_f = hf_from_log(op)
    w, v = np.linalg.eigh(h_f)
    u_back = (v * np.exp(-1j * op.period * w)) @ v.conj().T
    closure = float(np.linalg.norm(u_back - op.u))
    checks.append(("log_exp_closure", closure, 1e-9))

    # monodromy trace at g = 0 and tongue-width linearity
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 5.0):
        m = parametric_monodromy(1.0, 0.0, t)
        worst = max(worst, abs(m.trace - 2.0 * math.cos(t)))
    checks.append(("monodromy_free_trace", worst, 1e-12))
    widths = []
    for g in (0.05, 0.1, 0.2):
        lo, hi = _tongue_edges(1.0, g)
        widths.append(hi - lo)
    dev = max(abs(widths[1] / widths[0] - 2.0) / 2.0,
              abs(widths[2] / widths[1] - 2.0) / 2.0)
    checks.append(("monodromy_tongue_linearity", dev, 0.2))

    # undriven limit of the analytic generator
    h_free = analytic_hf_driven_ho(1.0, 0.0, 0.3, 16)
    dev = float(np.abs(h_free - np.diag(np.arange(16.0))).max())
    checks.append(("analytic_free_ladder", dev, 1e-10))

    cols: Dict[str, List] = {"check_id": [], "passed": [], "max_dev": [],
                             "tol": []}
    meta_names: List[str] = []
    for k, (name, dev, tol) in enumerate(checks):
        meta_names.append(name)
        cols["check_id"].append(k)
        cols["passed"].append(int(dev < tol))
        cols["max_dev"].append(dev)
        cols["tol"].append(tol)
    cols["_check_names"] = meta_names      # hoisted into metadata by run()
    return cols


def _tongue_edges(omega0: float, g: float) -> Tuple[float, float]:
    """Instability interval of the monodromy trace around T = pi."""

    def unstable(t: float) -> bool:
        return parametric_monodromy(omega0, g, t).unstable

    grid = np.linspace(2.5, 3.8, 4001)
    flags = np.array([unstable(t) for t in grid])
    hits = np.nonzero(flags)[0]
    if hits.size == 0 or hits[0] == 0 or hits[-1] == grid.size - 1:
        raise AnalysisError(
            f"no bracketed instability interval near T = pi for g = {g}")
    left_lo, left_hi = grid[hits[0] - 1], grid[hits[0]]
    right_lo, right_hi = grid[hits[-1]], grid[hits[-1] + 1]
    for _ in range(60):
        mid = 0.5 * (left_lo + left_hi)
        if unstable(mid):
            left_hi = mid
        else:
            left_lo = mid
        mid = 0.5 * (right_lo + right_hi)
        if unstable(mid):
            right_lo = mid
        else:
            right_hi = mid
    return left_hi, right_lo


_RUNNERS = {
    "entropy": _run_entropy,
    "energy-scan": _run_energy_scan,
    "level-stats": _run_level_stats,
    "magnus-ratios": _run_magnus_ratios,
    "tc-estimate": _run_tc_estimate,
    "resonance-scan": _run_resonance_scan,
    "kicked-scan": _run_kicked_scan,
    "oracle-check": _run_oracle_check,
}


def run(cfg: RunConfig) -> ScanResult:
    """Execute one configured scan, capturing every inner warning."""
    t0 = time.monotonic()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cols = _RUNNERS[cfg.subcommand](cfg)
    extra = {}
    names = cols.pop("_check_names", None)
    if names is not None:
        for k, name in enumerate(names):
            extra[f"check_{k}"] = name
    meta: Dict[str, object] = {"floqmag_version": __version__,
                               "subcommand": cfg.subcommand}
    for f in fields(cfg):
        if f.name == "subcommand":
            continue
        value = getattr(cfg, f.name)
        if value is not None:
            meta[f.name] = value
    meta.update(extra)
    meta["wall_time_s"] = time.monotonic() - t0
    notes = sorted({str(w.message) for w in caught})
    return ScanResult(metadata=meta, columns=cols, warnings=notes)


# ---------------------------------------------------------------------------
# serialization


def _fmt_number(v: object) -> str:
    """CSV cell: integers plain, floats at 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return ""
    return "%.17g" % x


def _meta_value(v: object) -> str:
    if isinstance(v, tuple):
        return ",".join(_meta_value(x) for x in v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _emit_csv(result: ScanResult, path: str) -> None:
    lines = []
    meta = dict(result.metadata)
    wall = meta.pop("wall_time_s", None)
    for key, value in meta.items():
        lines.append(f"# {key} = {_meta_value(value)}")
    for note in result.warnings:
        lines.append(f"# warning: {note}")
    if wall is not None:
        lines.append(f"# wall_time_s = {_meta_value(wall)}")
    names = list(result.columns)
    lines.append(",".join(names))
    length = len(result.columns[names[0]]) if names else 0
    for row in range(length):
        lines.append(",".join(
            _fmt_number(result.columns[name][row]) for name in names))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_scalar(v: object) -> str:
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, tuple):
        return "[" + ", ".join(_json_scalar(x) for x in v) + "]"
    x = float(v)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return "%.17g" % x


def _emit_json(result: ScanResult, path: str) -> None:
    parts = ["{\n  \"metadata\": {\n"]
    meta_items = list(result.metadata.items())
    parts.append(",\n".join(
        f"    {json.dumps(k)}: {_json_scalar(v)}" for k, v in meta_items))
    parts.append("\n  },\n  \"columns\": {\n")
    col_strs = []
    for name, col in result.columns.items():
        body = ", ".join(_json_scalar(v) for v in col)
        col_strs.append(f"    {json.dumps(name)}: [{body}]")
    parts.append(",\n".join(col_strs))
    parts.append("\n  },\n  \"warnings\": [\n")
    parts.append(",\n".join(
        f"    {json.dumps(note)}" for note in result.warnings))
    parts.append("\n  ]\n}\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(parts))


def emit(result: ScanResult, fmt: str, path: str) -> str:
    """Persist a ScanResult as CSV or JSON; returns the path written."""
    if fmt == "csv":
        _emit_csv(result, path)
    elif fmt == "json":
        _emit_json(result, path)
    else:
        raise ParameterError(f"format: expected csv or json, got {fmt!r}")
    return path


# ---------------------------------------------------------------------------
# argument handling


def _pair(text: str) -> Tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"expected i,j with two indices, got {text!r}")
    return int(parts[0]), int(parts[1])


def _int_list(text: str) -> Tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


_CONVERTERS = {
    "model": str, "omega0": float, "g": float, "beta": float,
    "betas": _float_list, "K": float, "dim": int, "dims": _int_list,
    "t": float, "t_min": float, "t_max": float, "t_step": float,
    "t_list": _float_list, "order": int, "precision": str, "kind": str,
    "element": _pair, "n_av": _int_list, "n_min": int,
    "d_schedule": _int_list, "histogram_bins": int, "steps": int,
    "rel_eps": float, "min_len": int, "seed": int, "out": str,
    "format": str,
}

_DEFAULTS: Dict[str, Dict[str, object]] = {
    "entropy": {"model": "anharmonic-osc", "omega0": 1.0, "g": 1.0,
                "beta": 1.0, "t": 1.0, "dims": (256, 512)},
    "energy-scan": {"model": "anharmonic-osc", "omega0": 1.0, "g": 1.0,
                    "betas": (0.0, 0.2, 0.4, 0.6, 0.8), "dim": 64,
                    "t_min": 0.25, "t_max": 8.0, "t_step": 0.25},
    "level-stats": {"model": "anharmonic-osc", "omega0": 1.0, "g": 1.0,
                    "beta": 1.0, "dims": (1024,), "t_list": (1.0,),
                    "histogram_bins": 0},
    "magnus-ratios": {"model": "driven-ho", "omega0": 1.0, "g": 1.0,
                      "dim": 128, "order": 20, "precision": DOUBLE,
                      "kind": "element", "element": (0, 1),
                      "rel_eps": 0.02, "min_len": 4},
    "tc-estimate": {"model": "anharmonic-osc", "omega0": 1.0, "g": 1.0,
                    "betas": (0.1, 0.05, 0.02, 0.01, 0.005),
                    "element": (1, 2), "dim": 64, "order": 52,
                    "precision": EXTENDED, "d_schedule": (32, 64)},
    "resonance-scan": {"model": "anharmonic-osc", "omega0": 1.0, "g": 1.0,
                       "beta": 1.0, "dim": 64, "n_av": (5, 10, 40, 200),
                       "t_min": 0.25, "t_max": 8.0, "t_step": 0.05},
    "kicked-scan": {"K": 1.0, "dim": 33, "steps": 2000},
    "oracle-check": {"seed": 0},
}

#: Options each subcommand accepts (beyond --config/--out/--format).
_ACCEPTS: Dict[str, Tuple[str, ...]] = {
    "entropy": ("model", "omega0", "g", "beta", "t", "dims"),
    "energy-scan": ("model", "omega0", "g", "betas", "dim", "t_min",
                    "t_max", "t_step", "t_list"),
    "level-stats": ("model", "omega0", "g", "beta", "dims", "t_min",
                    "t_max", "t_step", "t_list", "histogram_bins"),
    "magnus-ratios": ("model", "omega0", "g", "beta", "dim", "order",
                      "precision", "kind", "element", "d_schedule",
                      "rel_eps", "min_len"),
    "tc-estimate": ("model", "omega0", "g", "betas", "element", "dim",
                    "order", "precision", "n_min", "d_schedule"),
    "resonance-scan": ("model", "omega0", "g", "beta", "dim", "n_av",
                       "t_min", "t_max", "t_step", "t_list"),
    "kicked-scan": ("K", "dim", "t", "steps"),
    "oracle-check": ("seed",),
}


def _read_config_file(path: str) -> Dict[str, object]:
    values: Dict[str, object] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParameterError(f"config: cannot read {path}: {exc}")
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ParameterError(
                f"config: line {lineno} is not 'key = value': {text!r}")
        key, _, val = text.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONVERTERS:
            raise ParameterError(f"config: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](val.strip())
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ParameterError(f"config: key {key!r}: {exc}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqmag",
        description="Scans and diagnostics for periodically driven "
                    "one-body systems")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    flag_help = {
        "model": "model family (driven-ho, parametric-ho, anharmonic-osc,"
                 " kicked-rotor)",
        "omega0": "oscillator frequency",
        "g": "drive strength",
        "beta": "quartic strength",
        "betas": "comma-separated quartic strengths",
        "K": "kick amplitude",
        "dim": "basis cutoff",
        "dims": "comma-separated basis cutoffs",
        "t": "driving period",
        "t_min": "period grid start",
        "t_max": "period grid end",
        "t_step": "period grid step",
        "t_list": "explicit comma-separated period grid",
        "order": "highest expansion order",
        "precision": f"arithmetic, one of {PRECISIONS}",
        "kind": "curve kind: element or frobenius",
        "element": "matrix element as i,j",
        "n_av": "comma-separated averaging window lengths",
        "n_min": "override for the asymptotic-regime start",
        "d_schedule": "comma-separated cutoffs for the large-D limit",
        "histogram_bins": "emit per-bin rows with this many bins (0: off)",
        "steps": "number of driving periods to follow",
        "rel_eps": "plateau flatness tolerance",
        "min_len": "minimum plateau length",
        "seed": "random seed for the oracle suite",
    }
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; flags override")
        p.add_argument("--out", help="output path")
        p.add_argument("--format", choices=("csv", "json"),
                       help="output format (default csv)")
        for key in _ACCEPTS[name]:
            p.add_argument("--" + key.replace("_", "-"),
                           dest=key, type=_CONVERTERS[key],
                           help=flag_help[key])
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    name = args.subcommand
    merged: Dict[str, object] = dict(_DEFAULTS[name])
    if args.config:
        for key, value in _read_config_file(args.config).items():
            if key in _ACCEPTS[name] or key in ("out", "format"):
                merged[key] = value
            else:
                raise ParameterError(
                    f"config: key {key!r} does not apply to {name}")
    for key in _ACCEPTS[name] + ("out", "format"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.setdefault("format", "csv")
    merged.setdefault("out", f"floqmag-{name}.{merged['format']}")
    return RunConfig(subcommand=name, **merged)


def _validate(cfg: RunConfig) -> None:
    name = cfg.subcommand
    if cfg.format not in ("csv", "json"):
        raise ParameterError(
            f"format: expected csv or json, got {cfg.format!r}")
    if cfg.precision is not None and cfg.precision not in PRECISIONS:
        raise ParameterError(
            f"precision: expected one of {PRECISIONS}, "
            f"got {cfg.precision!r}")
    if cfg.kind is not None and cfg.kind not in ("element", "frobenius"):
        raise ParameterError(
            f"kind: expected element or frobenius, got {cfg.kind!r}")
    if cfg.kind == "frobenius" and cfg.d_schedule is not None:
        raise ParameterError(
            "d_schedule: the large-D limit applies to element curves only")
    for key in ("dim", "order", "steps"):
        value = getattr(cfg, key)
        if value is not None and value < 1 and not (
                key == "order" and value == 0):
            raise ParameterError(f"{key}: must be positive, got {value}")
    if cfg.dims is not None and (not cfg.dims
                                 or any(d < 2 for d in cfg.dims)):
        raise ParameterError(f"dims: need cutoffs >= 2, got {cfg.dims}")
    if cfg.betas is not None and not cfg.betas:
        raise ParameterError("betas: grid must be non-empty")
    if cfg.n_av is not None and (not cfg.n_av
                                 or any(n < 0 for n in cfg.n_av)):
        raise ParameterError(f"n_av: need values >= 0, got {cfg.n_av}")
    if name in ("energy-scan", "level-stats", "resonance-scan"):
        cfg.t_grid()                      # raises with the offending field
    if cfg.element is not None:
        i, j = cfg.element
        limit = cfg.dim
        if cfg.dims is not None:
            limit = min(cfg.dims)
        if cfg.d_schedule is not None:
            limit = min(cfg.d_schedule + ((limit,) if limit else ()))
        if limit is not None and (i < 0 or j < 0 or i >= limit
                                  or j >= limit):
            raise ParameterError(
                f"element: indices {cfg.element} outside cutoff {limit}")
    if name == "entropy" and (cfg.t is None or cfg.t <= 0):
        raise ParameterError(f"t: need a positive period, got {cfg.t}")
    if name == "kicked-scan":
        if cfg.t is None or cfg.t <= 0:
            raise ParameterError(f"t: need a positive period, got {cfg.t}")
        if cfg.dim is None or cfg.dim % 2 == 0:
            raise ParameterError(
                f"dim: kicked scans need an odd cutoff, got {cfg.dim}")
    # constructing the model spec validates the physical parameters
    if name in ("energy-scan", "tc-estimate"):
        for b in cfg.betas:
            cfg.model_spec(beta=b)
    elif name == "kicked-scan":
        ModelSpec.kicked_rotor(cfg.K)
    elif name != "oracle-check":
        cfg.model_spec()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        _validate(cfg)
        _workers()
    except (ParameterError, ValidationError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run(cfg)
        emit(result, cfg.format, cfg.out)
    except (ParameterError, ValidationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FloqmagError as exc:
        print(f"error: {cfg.subcommand}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {cfg.subcommand}: cannot write {cfg.out}: {exc}",
              file=sys.stderr)
        return 1
    print(cfg.out)
    if cfg.subcommand == "oracle-check" and not all(
            result.columns["passed"]):
        bad = [k for k, ok in zip(result.columns["check_id"],
                                  result.columns["passed"]) if not ok]
        print(f"error: oracle-check: checks failed: {bad}",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
