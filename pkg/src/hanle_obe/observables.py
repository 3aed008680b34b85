"""Measured signals: fluorescence, absorptive susceptibility, magnetic-field
scans, and extraction of the narrow zero-field feature (contrast and width).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .obe import (
    DensityMatrix,
    SolverError,
    build_liouvillian,
    excited_projection_row,
    integrated_functionals,
    steady_state,
)
from .system import FieldConfig, TransitionSystem, drive_matrix

__all__ = [
    "FeatureStats",
    "LineshapeScan",
    "ResolutionError",
    "contrast",
    "extract_hwhm",
    "fluorescence",
    "narrow_feature",
    "scan_lineshape",
    "susceptibility_im",
]

# Contrast/width extraction declares a scan flat when the zero-field feature
# amplitude falls below this fraction of the pedestal level.
_FLAT_THRESHOLD = 1e-6


class ResolutionError(ValueError):
    """The scan grid cannot resolve (or does not contain) the narrow feature."""


def fluorescence(rho: DensityMatrix) -> float:
    """Fluorescence intensity in units of Gamma: the total excited population
    times the decay rate (Gamma = 1)."""
    return rho.excited_population


def susceptibility_im(rho: DensityMatrix, system: TransitionSystem, field_cfg: FieldConfig) -> float:
    """Imaginary (absorptive) part of the susceptibility, normalized units.

    Proportional to the drive-weighted imaginary optical coherences divided
    by rabi^2, which makes it intensity-independent at fixed saturation; the
    constant is fixed so a two-level F=0 -> F=1 atom at resonance and low
    saturation gives 1.  For a closed transition at steady state this equals
    excited population / rabi^2 (absorbed power = scattered power).
    """
    if field_cfg.rabi == 0.0:
        return 0.0
    w = drive_matrix(system, field_cfg)
    rho_eg = rho.eg
    return float(-2.0 * np.sum(w * rho_eg.imag) / field_cfg.rabi**2)


def _susceptibility_row(liou) -> np.ndarray:
    """Row functional equal to susceptibility_im on Hermitian states."""
    system, field_cfg = liou.system, liou.field
    n, n_g = system.dim, system.n_g
    row = np.zeros(n * n, dtype=complex)
    if field_cfg.rabi == 0.0:
        return row
    w = drive_matrix(system, field_cfg)
    # -2 Im(rho_eg) = i (rho_eg - rho_ge) on the Hermitian subspace
    for ie in range(system.n_e):
        for ig in range(n_g):
            coeff = 1j * w[ie, ig] / field_cfg.rabi**2
            row[(n_g + ie) * n + ig] += coeff
            row[ig * n + (n_g + ie)] -= coeff
    return row


@dataclass
class ScanMeta:
    """Provenance of a scan: the physical scenario and solver mode."""

    system_key: str
    polarization: str
    rabi: float
    detuning: float
    mode: str
    t_int: float | None = None
    config: object = None  # ScenarioConfig echo when run through the CLI layer


@dataclass
class LineshapeScan:
    """Ordered samples of the observables over a magnetic-field grid.

    ``pi_e``/``chi_im`` are stationary values in steady mode and time
    integrals over the interaction window in integrated mode.  The ground
    summary holds the final-state ground populations and the complex
    coherence between the stretched ground sublevels.
    """

    b_larmor: np.ndarray
    pi_e: np.ndarray
    chi_im: np.ndarray
    ground_populations: np.ndarray  # shape (npoints, n_g)
    coherence: np.ndarray  # complex rho_{g+F, g-F} per point
    meta: ScanMeta | None = None

    def __post_init__(self) -> None:
        self.b_larmor = np.asarray(self.b_larmor, dtype=float)
        self.pi_e = np.asarray(self.pi_e, dtype=float)
        self.chi_im = np.asarray(self.chi_im, dtype=float)
        if np.any(np.diff(self.b_larmor) <= 0):
            raise ValueError("b grid must be strictly increasing")
        if np.any(self.pi_e < -1e-12):
            raise ValueError("negative excited population in scan")

    @property
    def npoints(self) -> int:
        return self.b_larmor.size

    def coherence_magnitude(self) -> np.ndarray:
        return np.abs(self.coherence)


def _solve_point(system, field_cfg, b, mode, t_int, rho0, residual_tol, rtol, atol):
    liou = build_liouvillian(system, field_cfg, b)
    if mode == "steady":
        rho = steady_state(liou, residual_tol=residual_tol)
        return (
            rho.excited_population,
            susceptibility_im(rho, system, field_cfg),
            rho.ground_populations,
            rho.edge_ground_coherence,
        )
    rows = np.vstack([excited_projection_row(liou), _susceptibility_row(liou)])
    start = rho0 if rho0 is not None else DensityMatrix.uniform_ground(system)
    vals, rho_end = integrated_functionals(liou, start, t_int, rows, rtol=rtol, atol=atol)
    return vals[0], vals[1], rho_end.ground_populations, rho_end.edge_ground_coherence


def scan_lineshape(
    system: TransitionSystem,
    field_cfg: FieldConfig,
    b_grid,
    mode: str = "steady",
    *,
    t_int: float | None = None,
    rho0: DensityMatrix | None = None,
    workers: int | None = None,
    residual_tol: float = 1e-10,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    system_key: str = "custom",
) -> LineshapeScan:
    """Solve the master equation across a magnetic-field grid.

    ``mode`` is "steady" (closed transitions) or "integrated" (requires
    ``t_int``; the only meaningful choice for open transitions).  Points are
    independent; ``workers`` > 1 solves them in a thread pool.  Output order
    follows the grid regardless of scheduling.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    if mode not in ("steady", "integrated"):
        raise ValueError(f"unknown scan mode {mode!r}")
    if mode == "integrated" and (t_int is None or t_int <= 0):
        raise ValueError("integrated mode needs a positive t_int")
    if mode == "steady" and not system.closed:
        raise SolverError(
            "steady-mode scan on an open transition; use mode='integrated'"
        )

    def job(b):
        try:
            return _solve_point(system, field_cfg, b, mode, t_int, rho0, residual_tol, rtol, atol)
        except SolverError as exc:
            raise SolverError(f"scan failed at b_larmor = {b:g}: {exc}") from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, b_grid))
    else:
        results = [job(b) for b in b_grid]
    pi_e = np.array([r[0] for r in results])
    chi = np.array([r[1] for r in results])
    pops = np.array([r[2] for r in results])
    coh = np.array([r[3] for r in results], dtype=complex)
    meta = ScanMeta(
        system_key=system_key,
        polarization=field_cfg.polarization.value,
        rabi=field_cfg.rabi,
        detuning=field_cfg.detuning,
        mode=mode,
        t_int=t_int,
    )
    return LineshapeScan(b_grid, np.maximum(pi_e, 0.0), chi, pops, coh, meta)


@dataclass(frozen=True)
class FeatureStats:
    """Geometry of the zero-field feature of a scan."""

    center_value: float
    plateau: float
    amplitude: float
    hwhm: float
    hwhm_left: float
    hwhm_right: float
    points_inside: int
    flat: bool


def _first_crossing(b, y, half, start, step):
    """March outward from index ``start``; linear interpolation of |b| at the
    first crossing of level ``half``.  Returns None if never crossed."""
    prev = start
    sign0 = y[start] - half
    idx = start + step
    while 0 <= idx < y.size:
        if (y[idx] - half) * sign0 <= 0:
            y0, y1 = y[prev], y[idx]
            if y1 == y0:
                return abs(b[idx])
            frac = (half - y0) / (y1 - y0)
            return abs(b[prev] + frac * (b[idx] - b[prev]))
        prev = idx
        idx += step
    return None


def narrow_feature(
    scan: LineshapeScan,
    *,
    pedestal_window: tuple[float, float] = (5.0, 15.0),
    min_points: int = 8,
) -> FeatureStats:
    """Locate the narrow zero-field feature: amplitude relative to the local
    pedestal and half-width at half-amplitude on each side.

    The pedestal is the median of samples with |b| between
    ``pedestal_window[0]`` and ``pedestal_window[1]`` half-widths, determined
    self-consistently (seeded by the outer quarter of the grid).  Raises
    :class:`ResolutionError` when the grid is too coarse (fewer than
    ``min_points`` samples inside the half-width) or too narrow.
    """
    b, y = scan.b_larmor, scan.pi_e
    if b[0] > 0 or b[-1] < 0:
        raise ResolutionError("scan grid does not bracket b = 0")
    y0 = float(np.interp(0.0, b, y))
    center = int(np.argmin(np.abs(b)))
    outer = np.abs(b) >= 0.75 * np.abs(b).max()
    plateau = float(np.median(y[outer]))
    scale = max(abs(y0), abs(plateau), np.max(np.abs(y)))
    if scale == 0.0:
        return FeatureStats(y0, plateau, 0.0, 0.0, 0.0, 0.0, 0, True)
    width = None
    for _ in range(12):
        amp = y0 - plateau
        if abs(amp) <= _FLAT_THRESHOLD * scale:
            return FeatureStats(y0, plateau, amp, 0.0, 0.0, 0.0, 0, True)
        half = plateau + amp / 2.0
        left = _first_crossing(b, y, half, center, -1)
        right = _first_crossing(b, y, half, center, +1)
        if left is None and right is None:
            raise ResolutionError("no half-amplitude crossing inside the scan grid")
        new_width = np.mean([w for w in (left, right) if w is not None])
        window = (np.abs(b) >= pedestal_window[0] * new_width) & (
            np.abs(b) <= pedestal_window[1] * new_width
        )
        if np.count_nonzero(window) >= 3:
            plateau = float(np.median(y[window]))
        converged = width is not None and abs(new_width - width) <= 1e-9 + 1e-6 * width
        width = new_width
        if converged:
            break
    amp = y0 - plateau
    inside = int(np.count_nonzero(np.abs(b) <= width))
    stats = FeatureStats(
        center_value=y0,
        plateau=plateau,
        amplitude=amp,
        hwhm=float(width),
        hwhm_left=float(left) if left is not None else float("nan"),
        hwhm_right=float(right) if right is not None else float("nan"),
        points_inside=inside,
        flat=False,
    )
    if inside < min_points:
        raise ResolutionError(
            f"only {inside} grid points inside the detected half-width "
            f"{width:g}; refine the scan grid (need {min_points})"
        )
    return stats


def contrast(scan: LineshapeScan, *, pedestal_window: tuple[float, float] = (5.0, 15.0)) -> float:
    """Narrow-feature amplitude divided by the pedestal level; 0 for a flat
    scan, negative for a reversed (central-dip) lineshape."""
    stats = narrow_feature(scan, pedestal_window=pedestal_window)
    if stats.flat:
        return 0.0
    return stats.amplitude / stats.plateau


def extract_hwhm(scan: LineshapeScan, *, pedestal_window: tuple[float, float] = (5.0, 15.0)) -> float:
    """Half-width at half-amplitude of the narrow feature, in scan b units."""
    stats = narrow_feature(scan, pedestal_window=pedestal_window)
    if stats.flat:
        raise ResolutionError("scan is flat: no narrow feature to measure")
    return stats.hwhm
