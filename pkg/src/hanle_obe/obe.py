"""Rotating-frame optical Bloch equations for one F_g -> F_e transition.

The density matrix lives on the ordered Zeeman basis
(g_{-F_g} ... g_{+F_g}, e_{-F_e} ... e_{+F_e}) and is vectorized row-major;
the Liouvillian is the dense (n^2 x n^2) generator of d vec(rho)/dt.
It contains

* the coherent part: Zeeman shifts, detuning and the laser coupling,
* decay of the excited-excited and optical-coherence blocks at the total
  excited decay rate (and half of it, respectively),
* spontaneous-emission feeding of the ground block at the partial rate back
  into the simulated ground level, so open transitions leak trace.

Solvers: an algebraic steady state (closed systems), adaptive RK45 time
evolution, and an exact eigendecomposition propagator for times far beyond
the reach of explicit stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from ._threads import limited_blas
from .angular import clebsch_gordan, wigner_small_d
from .system import FieldConfig, TransitionSystem, drive_matrix

__all__ = [
    "DegenerateSteadyStateError",
    "DensityMatrix",
    "Liouvillian",
    "OpenSystemError",
    "SolverError",
    "StiffIntegrationError",
    "Trajectory",
    "build_liouvillian",
    "evolve",
    "excited_projection_row",
    "integrated_excited_population",
    "integrated_functionals",
    "rotate_basis",
    "steady_state",
]

# Propagation switches from RK45 to the eigendecomposition propagator when the
# span in units of the fastest rate exceeds this.
_RK45_SPAN_LIMIT = 2.0e4


class SolverError(RuntimeError):
    """Base class for steady-state and propagation failures."""


class OpenSystemError(SolverError):
    """Steady state requested for an open transition (only the empty atom is
    stationary there; use time integration instead)."""


class DegenerateSteadyStateError(SolverError):
    """The generator has more than one stationary direction."""

    def __init__(self, null_dim: int, message: str):
        super().__init__(message)
        self.null_dim = null_dim


class StiffIntegrationError(SolverError):
    """Adaptive stepping failed; reduce the Rabi frequency, shorten the time
    span, or use the steady-state / spectral paths."""


@dataclass
class DensityMatrix:
    """Complex density matrix over the joint ground+excited Zeeman basis."""

    matrix: np.ndarray
    n_g: int

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"density matrix must be square, got {self.matrix.shape}")
        if not 0 < self.n_g <= self.matrix.shape[0]:
            raise ValueError(f"invalid ground dimension {self.n_g}")

    @classmethod
    def uniform_ground(cls, system: TransitionSystem) -> "DensityMatrix":
        """Unpolarized atom: equal population in every ground sublevel."""
        rho = np.zeros((system.dim, system.dim), dtype=complex)
        for k in range(system.n_g):
            rho[k, k] = 1.0 / system.n_g
        return cls(rho, system.n_g)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_e(self) -> int:
        return self.dim - self.n_g

    @property
    def gg(self) -> np.ndarray:
        return self.matrix[: self.n_g, : self.n_g]

    @property
    def ge(self) -> np.ndarray:
        return self.matrix[: self.n_g, self.n_g :]

    @property
    def eg(self) -> np.ndarray:
        return self.matrix[self.n_g :, : self.n_g]

    @property
    def ee(self) -> np.ndarray:
        return self.matrix[self.n_g :, self.n_g :]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def excited_population(self) -> float:
        return float(np.trace(self.ee).real)

    @property
    def ground_populations(self) -> np.ndarray:
        return np.diag(self.gg).real.copy()

    @property
    def edge_ground_coherence(self) -> complex:
        """Coherence between the stretched ground sublevels, rho_{g_{+F} g_{-F}}."""
        return complex(self.matrix[self.n_g - 1, 0])

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm).min())


@dataclass(eq=False)
class Liouvillian:
    """Dense generator of the vectorized master equation, with its context."""

    matrix: np.ndarray
    system: TransitionSystem
    field: FieldConfig
    b_larmor: float
    _spec: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def rate_scale(self) -> float:
        """Crude bound on the fastest rate in the generator (inf-norm)."""
        return float(np.max(np.sum(np.abs(self.matrix), axis=1)))

    def spectral(self):
        """Cached eigendecomposition (w, V, Vinv) or None if ill-conditioned."""
        if self._spec is None:
            with limited_blas():
                w, v = np.linalg.eig(self.matrix)
                try:
                    vinv = np.linalg.inv(v)
                except np.linalg.LinAlgError:
                    self._spec = (None,)
                    return None
                recon = np.max(np.abs((v * w) @ vinv - self.matrix))
            scale = max(1.0, np.max(np.abs(self.matrix)))
            self._spec = ((w, v, vinv),) if recon <= 1e-8 * scale else (None,)
        return self._spec[0]


def build_liouvillian(
    system: TransitionSystem, field_cfg: FieldConfig, b_larmor: float
) -> Liouvillian:
    """Assemble the rotating-frame generator at one magnetic field value."""
    n_g, n_e, n = system.n_g, system.n_e, system.dim
    # coherent part: Zeeman ladder, detuning on the excited manifold, drive
    diag = np.concatenate(
        [
            system.ground.g_factor * system.m_g * b_larmor,
            system.excited.g_factor * system.m_e * b_larmor - field_cfg.detuning,
        ]
    )
    w = drive_matrix(system, field_cfg)
    ham = np.diag(diag.astype(complex))
    ham[n_g:, :n_g] = w
    ham[:n_g, n_g:] = w.T
    eye = np.eye(n)
    gen = -1j * (np.kron(ham, eye) - np.kron(eye, ham.T))
    # damping of excited populations/coherences and of optical coherences
    gamma_tot = system.total_decay_rate
    is_e = np.concatenate([np.zeros(n_g), np.ones(n_e)])
    damp = 0.5 * gamma_tot * np.add.outer(is_e, is_e)
    gen -= np.diag(damp.reshape(-1).astype(complex))
    # spontaneous-emission feeding of the ground block, one emission channel
    # per spherical photon polarization
    tf_g, tf_e = system.f_g.twice_j, system.f_e.twice_j
    for q in (-1, 0, 1):
        amp = np.zeros((n, n))
        for ig, tm_g in enumerate(range(-tf_g, tf_g + 1, 2)):
            tm_e = tm_g + 2 * q
            if abs(tm_e) > tf_e:
                continue
            ie = (tm_e + tf_e) // 2
            amp[ig, n_g + ie] = clebsch_gordan(
                tf_g / 2, tm_g / 2, 1, q, tf_e / 2, tm_e / 2
            )
        gen += system.gamma_fe_fg * np.kron(amp, amp)
    return Liouvillian(gen, system, field_cfg, b_larmor)


def _vec(rho) -> np.ndarray:
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    return mat.reshape(-1)


def _unvec(y: np.ndarray, n: int, n_g: int) -> DensityMatrix:
    return DensityMatrix(y.reshape(n, n).copy(), n_g)


def steady_state(liou: Liouvillian, *, residual_tol: float = 1e-10) -> DensityMatrix:
    """Unique trace-one stationary density matrix of a closed system.

    One row of the singular generator is replaced by the trace constraint and
    the dense system solved directly, with iterative refinement; if the
    residual check fails, the null space is diagnosed by SVD.
    """
    if not liou.system.closed:
        raise OpenSystemError(
            "open transition: all population eventually leaks out, so the only "
            "stationary state is the empty atom; integrate in time instead"
        )
    n = liou.dim
    gen = liou.matrix
    diag_idx = np.arange(n) * (n + 1)
    lmod = gen.copy()
    lmod[0, :] = 0.0
    lmod[0, diag_idx] = 1.0
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    with limited_blas():
        try:
            lu = scipy.linalg.lu_factor(lmod)
            y = scipy.linalg.lu_solve(lu, rhs)
            for _ in range(2):  # refinement keeps the residual near roundoff
                y += scipy.linalg.lu_solve(lu, rhs - lmod @ y)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
            y = None
        rho = _finalize_steady(y, liou, residual_tol)
        if rho is None:
            rho = _steady_from_nullspace(liou, residual_tol)
    return rho


def _finalize_steady(y, liou, residual_tol) -> DensityMatrix | None:
    if y is None:
        return None
    n = liou.dim
    mat = y.reshape(n, n)
    mat = 0.5 * (mat + mat.conj().T)
    tr = np.trace(mat).real
    if abs(tr) < 1e-8:
        return None
    mat = mat / tr
    residual = float(np.max(np.abs(liou.matrix @ mat.reshape(-1))))
    if residual > residual_tol:
        return None
    return DensityMatrix(mat, liou.system.n_g)


def _steady_from_nullspace(liou, residual_tol) -> DensityMatrix:
    s_vals = np.linalg.svd(liou.matrix, compute_uv=False)
    tol = max(s_vals[0], 1.0) * 1e-10
    null_dim = int(np.sum(s_vals <= tol))
    if null_dim != 1:
        raise DegenerateSteadyStateError(
            null_dim,
            f"stationary subspace has dimension {null_dim}; the steady state "
            "is not unique (e.g. no drive connecting all ground sublevels)",
        )
    _, _, vh = np.linalg.svd(liou.matrix)
    rho = _finalize_steady(vh[-1].conj(), liou, residual_tol)
    if rho is None:
        raise SolverError(
            f"steady-state residual exceeds {residual_tol:g} and the null-space "
            "fallback did not produce a trace-class state"
        )
    return rho


class Trajectory:
    """Solution of d rho/dt = L rho, sampled at arbitrary times in [0, t_final]."""

    def __init__(self, liou: Liouvillian, t_final: float, sampler, method: str):
        self.liou = liou
        self.t_final = t_final
        self.method = method
        self._sampler = sampler

    def at(self, t: float) -> DensityMatrix:
        if not 0.0 <= t <= self.t_final * (1 + 1e-12):
            raise ValueError(f"t = {t} outside the integrated span [0, {self.t_final}]")
        return _unvec(self._sampler(min(t, self.t_final)), self.liou.dim, self.liou.system.n_g)

    @property
    def final(self) -> DensityMatrix:
        return self.at(self.t_final)

    def sample(self, times) -> list[tuple[float, DensityMatrix]]:
        return [(float(t), self.at(float(t))) for t in times]


def _rk45_sampler(gen: np.ndarray, y0: np.ndarray, t_final: float, rtol, atol):
    sol = solve_ivp(
        lambda _t, y: gen @ y,
        (0.0, t_final),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not sol.success:
        raise StiffIntegrationError(
            f"adaptive integration failed after {sol.t[-1]:.3g}/{t_final:.3g} "
            f"time units: {sol.message}"
        )
    return lambda t: sol.sol(t)


def _spectral_sampler(spec, y0: np.ndarray):
    w, v, vinv = spec
    coef = vinv @ y0
    return lambda t: v @ (np.exp(w * t) * coef)


def _expm_sampler(gen: np.ndarray, y0: np.ndarray):
    def sampler(t):
        if t == 0.0:
            return y0.copy()
        return scipy.linalg.expm(gen * t) @ y0
    return sampler


def evolve(
    liou: Liouvillian,
    rho0,
    t_final: float,
    *,
    method: str = "auto",
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> Trajectory:
    """Propagate an initial state, returning a :class:`Trajectory` sampler.

    ``method``: "rk45" (adaptive explicit stepping), "spectral" (exact
    eigendecomposition propagator, exact for this linear system), or "auto"
    to use RK45 unless the span is too long for explicit stepping.
    """
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    y0 = _vec(rho0)
    if method == "auto":
        method = "rk45" if t_final * liou.rate_scale <= _RK45_SPAN_LIMIT else "spectral"
    with limited_blas():
        if method == "rk45":
            sampler = _rk45_sampler(liou.matrix, y0, t_final, rtol, atol)
        elif method == "spectral":
            spec = liou.spectral()
            sampler = _spectral_sampler(spec, y0) if spec else _expm_sampler(liou.matrix, y0)
        else:
            raise ValueError(f"unknown method {method!r}")
    return Trajectory(liou, t_final, sampler, method)


def excited_projection_row(liou: Liouvillian) -> np.ndarray:
    """Row functional extracting the total excited population from vec(rho)."""
    n, n_g = liou.dim, liou.system.n_g
    row = np.zeros(n * n, dtype=complex)
    for k in range(n_g, n):
        row[k * n + k] = 1.0
    return row


def integrated_functionals(
    liou: Liouvillian,
    rho0,
    t_int: float,
    rows: np.ndarray,
    *,
    method: str = "auto",
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> tuple[np.ndarray, DensityMatrix]:
    """Time integrals int_0^t_int f_k(rho(t)) dt for linear functionals f_k.

    ``rows`` is a (k, n^2) array of functional rows.  Returns the integrals
    and the final state.  The spectral path evaluates the integral in closed
    form (stationary directions contribute linearly in time); the RK45 path
    augments the ODE state with quadrature accumulators.
    """
    if t_int <= 0:
        raise ValueError(f"t_int must be positive, got {t_int}")
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    y0 = _vec(rho0)
    n, n_g = liou.dim, liou.system.n_g
    spec = liou.spectral() if method in ("auto", "spectral") else None
    if spec is not None:
        w, v, vinv = spec
        coef = vinv @ y0
        scale = max(1.0, float(np.max(np.abs(w))))
        zero = np.abs(w) <= 1e-12 * scale
        z = w * t_int
        growth = np.where(zero, t_int, t_int * _expm1_over(np.where(zero, 1.0, z)))
        integral_vec = v @ (growth * coef)
        y_final = v @ (np.where(zero, 1.0, np.exp(z)) * coef)
        return (rows @ integral_vec).real, _unvec(y_final, n, n_g)
    if method == "spectral":
        raise SolverError("eigendecomposition is too ill-conditioned for the spectral path")
    k = rows.shape[0]
    n2 = n * n
    aug = np.zeros((n2 + k, n2 + k), dtype=complex)
    aug[:n2, :n2] = liou.matrix
    aug[n2:, :n2] = rows
    y0_aug = np.concatenate([y0, np.zeros(k, dtype=complex)])
    sampler = _rk45_sampler(aug, y0_aug, t_int, rtol, atol)
    y_end = sampler(t_int)
    return y_end[n2:].real, _unvec(y_end[:n2], n, n_g)


def _expm1_over(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z, stable near z = 0."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-6
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def integrated_excited_population(
    liou: Liouvillian,
    rho0,
    t_int: float,
    *,
    method: str = "auto",
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> float:
    """Time-integrated total excited population over the interaction window.

    The emitted fluorescence over that window is Gamma times this value.
    """
    vals, _ = integrated_functionals(
        liou, rho0, t_int, excited_projection_row(liou)[None, :],
        method=method, rtol=rtol, atol=atol,
    )
    return float(vals[0])


def rotate_basis(rho: DensityMatrix, system: TransitionSystem, beta: float) -> DensityMatrix:
    """Rotate the quantization axis by ``beta`` about the axis orthogonal to
    both the magnetic field and the linear polarization plane, block by block.

    At beta = pi/2 this maps the field axis onto the axis along which
    linearly polarized light (in this package's sigma+ + sigma- convention)
    drives pure pi transitions, i.e. the natural basis of the drive at zero
    field.  Trace and spectrum are invariant.
    """
    blocks = []
    for level in (system.ground, system.excited):
        tf = level.f.twice_j
        dim = tf + 1
        block = np.zeros((dim, dim), dtype=complex)
        for r, tm_r in enumerate(range(-tf, tf + 1, 2)):
            for c, tm_c in enumerate(range(-tf, tf + 1, 2)):
                phase = 1j ** ((tm_r - tm_c) // 2)
                block[r, c] = phase * wigner_small_d(tf / 2, tm_r / 2, tm_c / 2, beta)
        blocks.append(block)
    rot = scipy.linalg.block_diag(*blocks)
    return DensityMatrix(rot @ rho.matrix @ rot.conj().T, system.n_g)
