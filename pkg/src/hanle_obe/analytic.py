"""Closed-form low-saturation model of the idealized closed 1 -> 2 transition
driven by linearly polarized light in a longitudinal magnetic field.

After adiabatic elimination of the optical coherences and the excited state,
the ground manifold (populations of m = -1, 0, +1 plus the m = +1 / m = -1
coherence) obeys a closed set of five linear rate equations whose
coefficients are set by the optical pumping rate, the light shift and the
ground Larmor frequency.  This module carries those equations, their steady
state, the excited-state populations they imply, and the half-width of the
narrow zero-field resonance.  Everything is exact arithmetic on the stated
rational coefficients; it serves as the reference the full density-matrix
solver is checked against.

Units: total spontaneous decay rate = 1, hbar = 1.  The magnetic field enters
as ``mu_b_norm`` = twice the ground-state Larmor frequency (the coupling
constant multiplying the coherence in the rate equations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExcitedPopulations",
    "GroundState5",
    "PumpParams",
    "excited_populations",
    "hwhm",
    "light_shift",
    "lineshape",
    "pumping_rate",
    "rate_rhs",
    "rate_rhs_reduced",
    "steady_state_ground",
]


def pumping_rate(rabi: float, detuning: float = 0.0) -> float:
    """Optical pumping rate: (1/2) rabi^2 / (detuning^2 + 1/4)."""
    return 0.5 * rabi**2 / (detuning**2 + 0.25)


def light_shift(rabi: float, detuning: float = 0.0) -> float:
    """Intensity-dependent ground-sublevel shift: (detuning/2) rabi^2 / (detuning^2 + 1/4)."""
    return 0.5 * detuning * rabi**2 / (detuning**2 + 0.25)


@dataclass(frozen=True)
class PumpParams:
    """Drive parameters of the ground-state rate equations.

    ``gamma_p``: optical pumping rate; ``delta_p``: light shift;
    ``mu_b_norm``: 2 * (ground Larmor frequency), all in units of the decay rate.
    """

    gamma_p: float
    delta_p: float = 0.0
    mu_b_norm: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma_p <= 0:
            raise ValueError(f"gamma_p must be positive, got {self.gamma_p}")

    @classmethod
    def from_drive(cls, rabi: float, detuning: float = 0.0, mu_b_norm: float = 0.0) -> "PumpParams":
        return cls(pumping_rate(rabi, detuning), light_shift(rabi, detuning), mu_b_norm)


@dataclass
class GroundState5:
    """Ground-manifold state: three populations and the edge coherence
    c = c_r + i c_i between the m = +1 and m = -1 sublevels."""

    pi_plus: float
    pi_zero: float
    pi_minus: float
    c_r: float
    c_i: float

    def validate(self, tol: float = 1e-9) -> None:
        total = self.pi_plus + self.pi_zero + self.pi_minus
        if abs(total - 1.0) > tol:
            raise ValueError(f"populations sum to {total}, not 1")
        bound = math.sqrt(max(self.pi_plus * self.pi_minus, 0.0))
        if math.hypot(self.c_r, self.c_i) > bound + 1e-12:
            raise ValueError("edge coherence exceeds the population bound")

    @classmethod
    def uniform(cls) -> "GroundState5":
        third = 1.0 / 3.0
        return cls(third, third, third, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.pi_plus, self.pi_zero, self.pi_minus, self.c_r, self.c_i])


def rate_rhs(state: GroundState5, params: PumpParams) -> tuple[float, float, float, float, float]:
    """Time derivatives (d pi_plus, d pi_zero, d pi_minus, d c_r, d c_i)."""
    gp, dp, x = params.gamma_p, params.delta_p, params.mu_b_norm
    p1, p0, pm, cr, ci = state.pi_plus, state.pi_zero, state.pi_minus, state.c_r, state.c_i
    d_p1 = -5 * gp / 72 * p1 + 9 * gp / 72 * p0 + gp / 72 * pm - gp / 18 * cr - dp / 6 * ci
    d_pm = gp / 72 * p1 + 9 * gp / 72 * p0 - 5 * gp / 72 * pm - gp / 18 * cr + dp / 6 * ci
    d_p0 = -d_p1 - d_pm
    d_cr = gp / 24 * p1 + gp / 8 * p0 + gp / 24 * pm - 5 * gp / 12 * cr + x * ci
    d_ci = dp / 12 * (p1 - pm) - x * cr - 5 * gp / 12 * ci
    return d_p1, d_p0, d_pm, d_cr, d_ci


def rate_rhs_reduced(
    d: float, pi_zero: float, c_r: float, c_i: float, params: PumpParams
) -> tuple[float, float, float, float]:
    """Reduced form in the population difference d = pi_plus - pi_minus,
    on the unit-trace shell (returns d d, d pi_zero, d c_r, d c_i)."""
    gp, dp, x = params.gamma_p, params.delta_p, params.mu_b_norm
    d_d = -gp / 12 * d - dp / 3 * c_i
    d_p0 = gp / 18 - 11 * gp / 36 * pi_zero + gp / 9 * c_r
    d_cr = gp / 24 + gp / 12 * pi_zero - 5 * gp / 12 * c_r + x * c_i
    d_ci = dp / 12 * d - x * c_r - 5 * gp / 12 * c_i
    return d_d, d_p0, d_cr, d_ci


def steady_state_ground(params: PumpParams) -> GroundState5:
    """Stationary ground state of the rate equations."""
    gp, dp, x = params.gamma_p, params.delta_p, params.mu_b_norm
    denom = 4 * dp**2 + 5 * gp**2
    c_r = (5 / 34) / (1.0 + (132 / 17) * (2 * x) ** 2 / denom)
    pi_zero = (2 / 11) * (1 + 2 * c_r)
    c_i = -12 * x * gp / denom * c_r
    d = -4 * dp / gp * c_i
    rest = 1.0 - pi_zero
    return GroundState5(
        pi_plus=(rest + d) / 2,
        pi_zero=pi_zero,
        pi_minus=(rest - d) / 2,
        c_r=c_r,
        c_i=c_i,
    )


@dataclass(frozen=True)
class ExcitedPopulations:
    """Excited sublevel populations implied by a ground state at low saturation."""

    e_minus2: float
    e_minus1: float
    e_zero: float
    e_plus1: float
    e_plus2: float

    @property
    def total(self) -> float:
        return self.e_minus2 + self.e_minus1 + self.e_zero + self.e_plus1 + self.e_plus2

    def as_array(self) -> np.ndarray:
        return np.array([self.e_minus2, self.e_minus1, self.e_zero, self.e_plus1, self.e_plus2])


def excited_populations(state: GroundState5, rabi: float, detuning: float = 0.0) -> ExcitedPopulations:
    """Excited populations slaved to the ground state; valid at low saturation.

    The total is s * (25/88 + (3/44) c_r) with s the saturation parameter.
    """
    s = rabi**2 / (detuning**2 + 0.25)
    e2 = s / 4 * state.pi_plus
    em2 = s / 4 * state.pi_minus
    e1 = s / 8 * state.pi_zero
    em1 = s / 8 * state.pi_zero
    e0 = s / 2 * ((state.pi_plus + state.pi_minus) / 12 + state.c_r / 6)
    return ExcitedPopulations(em2, em1, e0, e1, e2)


def hwhm(params: PumpParams) -> float:
    """Half-width at half-maximum of the narrow zero-field resonance, as a
    ground Larmor frequency (g_g * mu_B * B / hbar, units of the decay rate)."""
    return 0.125 * math.sqrt((17 / 33) * (4 * params.delta_p**2 + 5 * params.gamma_p**2))


def lineshape(rabi: float, detuning, mu_b_grid) -> np.ndarray:
    """Total stationary excited population over a grid of ground Larmor
    frequencies mu_b = g_g mu_B B / hbar (units of the decay rate)."""
    mu_b_grid = np.asarray(mu_b_grid, dtype=float)
    out = np.empty_like(mu_b_grid)
    for k, mu_b in enumerate(mu_b_grid):
        params = PumpParams.from_drive(rabi, detuning, mu_b_norm=2.0 * mu_b)
        state = steady_state_ground(params)
        out[k] = excited_populations(state, rabi, detuning).total
    return out
